mod common;

use std::collections::{BTreeSet, VecDeque};

use common::{chain, logic_case};
use myceliumsim::network::{MyceliumNetwork, NodeId};
use myceliumsim::spike::{simulate, CollisionRule, Injection, SimConfig, SpikeSim};
use proptest::prelude::*;

fn reachable_terminals(net: &MyceliumNetwork, from: NodeId) -> usize {
    let inc = net.incidence();
    let mut seen = BTreeSet::from([from]);
    let mut queue = VecDeque::from([from]);
    let mut count = 0;
    while let Some(n) = queue.pop_front() {
        if n != from && net.node(n).unwrap().kind.is_terminal() {
            count += 1;
            continue;
        }
        for s in &inc[&n] {
            let s = net.strand(*s).unwrap();
            if s.state.conducts() && seen.insert(s.other(n)) {
                queue.push_back(s.other(n));
            }
        }
    }
    count
}

proptest! {
    #[test]
    fn arrival_is_injection_plus_length_over_speed(
        lengths in prop::collection::vec(1.0f64..50.0, 1..12),
        t0 in 0.0f64..100.0,
        speed in prop::sample::select(vec![0.25, 0.5, 1.0, 2.0]),
    ) {
        let (net, a, b) = chain(&lengths);
        let cfg = SimConfig { speed_mm_per_s: speed, horizon_s: 1e6, ..SimConfig::default() };
        let log = simulate(&net, &[Injection { node: a.0, time_s: t0, amplitude_mv: 1.0 }], cfg).unwrap();
        let total: f64 = net.strands().iter().map(|s| s.length).sum();
        let hits: Vec<_> = log.at(b).collect();
        prop_assert_eq!(hits.len(), 1);
        prop_assert!((hits[0].time_s - (t0 + total / speed)).abs() < 1e-9);
    }

    #[test]
    fn single_injection_on_a_tree_reaches_every_leaf(case in logic_case(20)) {
        let cfg = SimConfig { rule: CollisionRule::Annihilate, horizon_s: 1e6, ..case.config };
        let src = case.ports.inputs[0];
        let mut sim = SpikeSim::new(&case.network, cfg).unwrap();
        sim.inject_spike(src, 0.0, 1.0).unwrap();
        let log = sim.run();
        prop_assert_eq!(log.len(), reachable_terminals(&case.network, src));
    }

    #[test]
    fn identical_inputs_give_identical_logs(case in logic_case(20), t1 in 0.0f64..50.0) {
        let inj: Vec<Injection> = case
            .ports
            .inputs
            .iter()
            .enumerate()
            .map(|(k, n)| Injection { node: n.0, time_s: k as f64 * t1, amplitude_mv: 1.0 })
            .collect();
        let cfg = SimConfig { horizon_s: 2000.0, ..case.config };
        let a = simulate(&case.network, &inj, cfg).unwrap();
        let b = simulate(&case.network.clone(), &inj, cfg).unwrap();
        prop_assert_eq!(a.to_csv(), b.to_csv());
    }

    #[test]
    fn longer_refractory_never_adds_arrivals_on_one_strand(
        length in 3.0f64..40.0,
        times in prop::collection::vec(0.0f64..400.0, 1..8),
        rule in common::rule(),
        rho in 0.0f64..300.0,
        extra in 0.0f64..300.0,
    ) {
        // one strand, one direction: no collision or downstream window to shift
        let (net, a, _) = chain(&[length]);
        let inj: Vec<Injection> = times
            .iter()
            .map(|&t| Injection { node: a.0, time_s: t, amplitude_mv: 1.0 })
            .collect();
        let base = SimConfig { rule, refractory_s: rho, horizon_s: 3000.0, ..SimConfig::default() };
        let longer = SimConfig { refractory_s: rho + extra, ..base };
        let short = simulate(&net, &inj, base).unwrap();
        let long = simulate(&net, &inj, longer).unwrap();
        prop_assert!(long.len() <= short.len(), "rho {} -> {}: {} -> {}", rho, rho + extra, short.len(), long.len());
    }
}

#[test]
fn zero_window_still_collides_on_exact_ties() {
    let (net, a, b, _, c) = myceliumsim::network::shapes::y_junction(10.0, 10.0, 10.0);
    let cfg = SimConfig { coincidence_window_s: 0.0, ..SimConfig::default() };
    let inj = [
        Injection { node: a.0, time_s: 0.0, amplitude_mv: 1.0 },
        Injection { node: b.0, time_s: 0.0, amplitude_mv: 1.0 },
    ];
    let log = simulate(&net, &inj, cfg).unwrap();
    assert_eq!(log.at(c).count(), 0);
}

/// Refractoriness that blocks one of two colliding spikes lets the other go on
/// alone, so a longer period can add arrivals under every collision rule.
#[test]
fn longer_refractory_can_add_arrivals_at_a_junction() {
    let (net, a, b, _, _) = myceliumsim::network::shapes::y_junction(10.0, 10.0, 10.0);
    let inj = [
        Injection { node: a.0, time_s: 0.0, amplitude_mv: 1.0 },
        Injection { node: a.0, time_s: 50.0, amplitude_mv: 1.0 },
        Injection { node: b.0, time_s: 50.0, amplitude_mv: 1.0 },
    ];
    for (rule, short_count) in [
        (CollisionRule::PriorityPass, 3),
        (CollisionRule::Fuse, 3),
        (CollisionRule::Annihilate, 2),
    ] {
        let count = |rho| {
            let cfg = SimConfig { rule, refractory_s: rho, ..SimConfig::default() };
            simulate(&net, &inj, cfg).unwrap().len()
        };
        assert_eq!(count(5.0), short_count, "{rule:?}");
        assert_eq!(count(20.0), 4, "{rule:?}");
    }
}

/// Blocking the middle spike of three on the first strand frees the second
/// strand in time for the last one.
#[test]
fn longer_refractory_can_add_arrivals_down_a_chain() {
    let (net, a, b) = chain(&[10.0, 20.0]);
    let inj: Vec<Injection> = [0.0, 130.0, 200.0]
        .iter()
        .map(|&t| Injection { node: a.0, time_s: t, amplitude_mv: 1.0 })
        .collect();
    let count = |rho| {
        let cfg = SimConfig { refractory_s: rho, horizon_s: 1000.0, ..SimConfig::default() };
        simulate(&net, &inj, cfg).unwrap().at(b).count()
    };
    // rho 100: 130 passes strand 0, is refused by strand 1 at 150 (busy until
    // 160) and keeps strand 0 busy until 250, past 200
    assert_eq!(count(100.0), 1);
    // rho 140: 130 is refused by strand 0, leaving both strands free for 200
    assert_eq!(count(140.0), 2);
}
