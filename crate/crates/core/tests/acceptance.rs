//! Acceptance run. Prints one PASS/FAIL line per criterion and exits non-zero
//! if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use myceliumsim::capacity::{format_sig, processor_count, DensitySpec};
use myceliumsim::ephys::{
    classify_trains, detect_spikes, detect_spikes_with, generate_synthetic, spike_stats, spikes_to_csv,
    ChannelSpec, DetectedSpike, DetectorParams, Recording, SynthSpec, TrainClass,
};
use myceliumsim::growth::{grow, grow_ensemble, inoculate, GrowthParams, Inoculum};
use myceliumsim::logic::{
    brute_force_oracle, classify_function, geometry_sweep, realize_truth_table, FunctionClass, GeometryEdit,
    PortAssignment,
};
use myceliumsim::netfile::network_to_string;
use myceliumsim::network::{shapes, NodeKind, StrandId};
use myceliumsim::spike::{simulate, CollisionRule, Injection, SimConfig};
use myceliumsim::{Execution, MyceliumNetwork, SubstrateField};
use num_rational::BigRational;
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// SHA-256 of the pipeline output in [`pipeline`].
const PIPELINE_SHA256: &str = "746d58eb65486097ba89f2e5be5924dec088b419aaece324e1b67995963a1a85";

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn within_budget(elapsed: Duration, budget_s: f64) -> bool {
    elapsed.as_secs_f64() < budget_s
}

fn timing() -> Outcome {
    let start = Instant::now();
    let cfg = SimConfig::default();
    let mut net = MyceliumNetwork::new(2).unwrap();
    let s = net.add_node([0.0, 0.0, 0.0], NodeKind::FruitBody);
    let e = net.add_node([30.0, 0.0, 0.0], NodeKind::FruitBody);
    net.add_strand(s, e).unwrap();
    let log = simulate(&net, &[Injection { node: s.0, time_s: 0.0, amplitude_mv: 1.0 }], cfg).unwrap();
    let t30 = log.at(e).map(|x| x.time_s).next();

    // 20 mm over two strands that meet at an angle
    let mut bent = MyceliumNetwork::new(2).unwrap();
    let p = bent.add_node([0.0, 0.0, 0.0], NodeKind::FruitBody);
    let q = bent.add_node([12.0, 0.0, 0.0], NodeKind::Junction);
    let r = bent.add_node([12.0, 8.0, 0.0], NodeKind::Tip);
    bent.add_strand(p, q).unwrap();
    bent.add_strand(q, r).unwrap();
    let log = simulate(&bent, &[Injection { node: p.0, time_s: 0.0, amplitude_mv: 1.0 }], cfg).unwrap();
    let t20 = log.at(r).map(|x| x.time_s).next();
    let elapsed = start.elapsed();

    let ok30 = t30.is_some_and(|t| (t - 60.0).abs() <= 1e-9);
    let ok20 = t20.is_some_and(|t| (t - 40.0).abs() <= 1e-9);
    outcome(
        ok30 && ok20 && within_budget(elapsed, 1.0),
        format!("30 mm -> {t30:?} s, 20 mm -> {t20:?} s, {elapsed:.2?}"),
    )
}

fn collision_case(la: f64, lb: f64, rule: CollisionRule, want: FunctionClass) -> Outcome {
    let start = Instant::now();
    let (net, a, b, _, c) = shapes::y_junction(la, lb, 10.0);
    let ports = PortAssignment::new(vec![a, b], c, (0.0, 100.0));
    let cfg = SimConfig { rule, ..SimConfig::default() };
    let engine = realize_truth_table(&net, &ports, &cfg).unwrap().table;
    let oracle = brute_force_oracle(&net, &ports, &cfg).unwrap();
    let elapsed = start.elapsed();
    let class = classify_function(&engine);
    outcome(
        class == want && engine == oracle && within_budget(elapsed, 1.0),
        format!(
            "Y {la}/{lb} mm {}: engine {engine} ({class}), oracle {oracle}, {elapsed:.2?}",
            rule.as_str()
        ),
    )
}

fn geometry() -> Outcome {
    let (net, a, b, _, c) = shapes::y_junction(10.0, 10.0, 10.0);
    let ports = PortAssignment::new(vec![a, b], c, (0.0, 100.0));
    let edits = vec![
        GeometryEdit::Lengthen { strand: StrandId(1), length_mm: 40.0 },
        GeometryEdit::Lengthen { strand: StrandId(0), length_mm: 12.0 },
        GeometryEdit::Abandon { strand: StrandId(0) },
        GeometryEdit::Abandon { strand: StrandId(2) },
    ];
    let sweep = geometry_sweep(&net, &edits, &ports, &SimConfig::default(), Execution::Parallel);
    let mut classes: Vec<String> = sweep.iter().filter_map(|e| e.class.as_ref().map(|c| c.to_string())).collect();
    let all = classes.join(", ");
    classes.sort();
    classes.dedup();
    outcome(classes.len() >= 2, format!("{} distinct classes over [{all}]", classes.len()))
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut runner = TestRunner::new_with_rng(
        Config::default(),
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    );
    let strategy = common::logic_case(20);
    let mut mismatches = 0;
    let mut unsupported = 0;
    for _ in 0..500 {
        let case = strategy.new_tree(&mut runner).unwrap().current();
        let engine = realize_truth_table(&case.network, &case.ports, &case.config).unwrap().table;
        match brute_force_oracle(&case.network, &case.ports, &case.config) {
            Ok(t) if t == engine => {}
            Ok(_) => mismatches += 1,
            Err(_) => unsupported += 1,
        }
    }
    let elapsed = start.elapsed();
    outcome(
        mismatches == 0 && unsupported == 0 && within_budget(elapsed, 60.0),
        format!("500 networks, {mismatches} mismatches, {unsupported} outside oracle domain, {elapsed:.2?}"),
    )
}

fn round_trip() -> Outcome {
    let start = Instant::now();
    let spec = SynthSpec::reference();
    let params = DetectorParams::default();
    let seeds: Vec<u64> = (0..50).collect();
    let per_seed = Execution::Parallel.map(&seeds, |&seed| {
        let synth = generate_synthetic(&spec, seed).unwrap();
        let found = detect_spikes_with(&synth.recording, &params, Execution::Sequential).unwrap().spikes;
        (0..spec.channels.len())
            .map(|ch| {
                let got: Vec<DetectedSpike> = found.iter().filter(|s| s.channel == ch).copied().collect();
                (got.len(), spike_stats(&got).amplitude_mean_mv)
            })
            .collect::<Vec<_>>()
    });
    let elapsed = start.elapsed();

    let mut worst_count = String::new();
    let mut worst_rel: f64 = 0.0;
    let mut aggregate = Vec::new();
    for (ch, c) in spec.channels.iter().enumerate() {
        let mut sum = 0.0;
        let mut n = 0usize;
        for (seed, row) in per_seed.iter().enumerate() {
            let (count, mean) = row[ch];
            if count != c.spikes && worst_count.is_empty() {
                worst_count = format!("{} seed {seed}: {count} of {}", c.label, c.spikes);
            }
            worst_rel = worst_rel.max((mean - c.amplitude_mean_mv).abs() / c.amplitude_mean_mv);
            sum += mean * count as f64;
            n += count;
        }
        let agg = sum / n as f64;
        aggregate.push((c.label.clone(), agg, (agg - c.amplitude_mean_mv).abs() / c.amplitude_mean_mv));
    }
    let agg_ok = aggregate.iter().all(|(_, _, rel)| *rel <= 0.05);
    let agg_text: Vec<String> = aggregate
        .iter()
        .map(|(l, m, rel)| format!("{l} {m:.3} mV ({:.1}%)", rel * 100.0))
        .collect();
    outcome(
        worst_count.is_empty() && worst_rel <= 0.10 && agg_ok && within_budget(elapsed, 30.0),
        format!(
            "counts {}, worst per-seed mean error {:.1}%, aggregate {}, {elapsed:.2?}",
            if worst_count.is_empty() { "exact".to_string() } else { worst_count },
            worst_rel * 100.0,
            agg_text.join(", ")
        ),
    )
}

fn train_spec(label: &str, spikes: usize, period_s: f64, width_s: f64) -> ChannelSpec {
    ChannelSpec {
        label: label.into(),
        spikes,
        amplitude_mean_mv: 1.5,
        amplitude_sd_mv: 0.2,
        width_mean_s: width_s,
        width_sd_s: width_s / 6.0,
        period_mean_s: Some(period_s),
        period_sd_s: period_s / 8.0,
        noise_sd_mv: 0.1,
        amplitude_min_mv: 1.0,
        width_min_s: width_s / 2.0,
        width_max_s: width_s * 2.0,
        min_gap_s: 30.0,
        ..ChannelSpec::default()
    }
}

fn train_params() -> DetectorParams {
    DetectorParams {
        smoothing_s: 10.0,
        min_width_s: 30.0,
        merge_gap_s: 20.0,
        ..DetectorParams::default()
    }
}

fn high() -> ChannelSpec {
    train_spec("HF", 10, 2.6 * 60.0, 60.0)
}

fn low() -> ChannelSpec {
    train_spec("LF", 6, 14.0 * 60.0, 300.0)
}

/// One channel holding a high-frequency train, then a low-frequency one more
/// than two hours later.
fn mixed(seed: u64) -> (Recording, Vec<DetectedSpike>) {
    let first = generate_synthetic(&SynthSpec::new(4.0 * 3600.0, vec![high()]), seed).unwrap();
    let second = generate_synthetic(&SynthSpec::new(6.0 * 3600.0, vec![low()]), seed ^ 0x5eed).unwrap();
    let offset = first.recording.duration_s() + first.recording.sample_interval_s;
    let mut x = first.recording.channels[0].clone();
    x.extend_from_slice(&second.recording.channels[0]);
    let mut truth = first.truth;
    truth.extend(second.truth.iter().map(|s| DetectedSpike {
        onset_s: s.onset_s + offset,
        peak_s: s.peak_s + offset,
        ..*s
    }));
    let rec = Recording::new(vec!["mixed".into()], 0.0, 1.0, vec![x]).unwrap();
    (rec, truth)
}

fn trains_match(rec: &Recording, want: &[(usize, TrainClass)]) -> bool {
    let params = train_params();
    let found = detect_spikes(rec, &params).unwrap().spikes;
    let trains = classify_trains(&found, &params);
    trains.len() == want.len()
        && trains
            .iter()
            .zip(want)
            .all(|(t, (n, class))| t.spikes.len() == *n && t.class == *class)
}

fn train_classification() -> Outcome {
    let start = Instant::now();
    let seeds: Vec<u64> = (0..50).collect();
    let results = Execution::Parallel.map(&seeds, |&seed| {
        let hf = generate_synthetic(&SynthSpec::new(4.0 * 3600.0, vec![high()]), seed).unwrap();
        let lf = generate_synthetic(&SynthSpec::new(6.0 * 3600.0, vec![low()]), seed).unwrap();
        let (mix, _) = mixed(seed);
        [
            trains_match(&hf.recording, &[(10, TrainClass::HighFrequency)]),
            trains_match(&lf.recording, &[(6, TrainClass::LowFrequency)]),
            trains_match(&mix, &[(10, TrainClass::HighFrequency), (6, TrainClass::LowFrequency)]),
        ]
    });
    let elapsed = start.elapsed();
    let count = |k: usize| results.iter().filter(|r| r[k]).count();
    let (h, l, m) = (count(0), count(1), count(2));
    outcome(
        h == 50 && l == 50 && m == 50,
        format!("2.6 min {h}/50, 14 min {l}/50, mixed {m}/50, {elapsed:.2?}"),
    )
}

fn bootstrap_ci(xs: &[f64], seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = xs.len();
    let mut means: Vec<f64> = (0..10_000)
        .map(|_| (0..n).map(|_| xs[rng.random_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    (means[249], means[9_749])
}

fn growth_monotonicity() -> Outcome {
    let start = Instant::now();
    let params = GrowthParams { branching: 0.3, max_steps: 20, ..GrowthParams::default() };
    let seeds: Vec<u64> = (0..100).collect();
    let branches = |c: f64| -> Vec<f64> {
        let field = SubstrateField::uniform(&[80, 80], 1.0, c).unwrap();
        let inoculum = Inoculum { position: vec![40.0, 40.0], heading: vec![1.0, 0.0], fruit_body: true };
        let net = inoculate(&field, &params, &[inoculum]).unwrap();
        grow_ensemble(&net, &field, &params, &seeds, Execution::Parallel)
            .into_iter()
            .map(|r| r.unwrap().branches as f64)
            .collect()
    };
    let (rich, poor) = (branches(0.8), branches(0.2));
    let (rlo, rhi) = bootstrap_ci(&rich, 1);
    let (plo, phi) = bootstrap_ci(&poor, 2);
    let elapsed = start.elapsed();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    outcome(
        rlo > phi && within_budget(elapsed, 30.0),
        format!(
            "c=0.8 mean {:.2} [{rlo:.2}, {rhi:.2}], c=0.2 mean {:.2} [{plo:.2}, {phi:.2}], {elapsed:.2?}",
            mean(&rich),
            mean(&poor)
        ),
    )
}

fn capacity() -> Outcome {
    let spec = DensitySpec::parse("10:20", "1.5:3", "1", "1").unwrap();
    let base = processor_count(&spec).unwrap();
    let shown = (format_sig(&base.min_exact, 3), format_sig(&base.max_exact, 3));
    let range_ok = shown.0 == "3.33e9" && shown.1 == "1.33e10";
    let mut linear = true;
    for k in 1..=10i64 {
        let v = BigRational::new(k.into(), 7.into());
        let one = processor_count(&spec.with_volume(v.clone())).unwrap();
        let two = processor_count(&spec.with_volume(v * BigRational::from_integer(2.into()))).unwrap();
        let double = BigRational::from_integer(2.into());
        linear &= two.min_exact == &one.min_exact * &double && two.max_exact == &one.max_exact * &double;
    }
    outcome(
        range_ok && linear,
        format!("1 m^3 -> ({}, {}), doubling exact over 10 volumes: {linear}", shown.0, shown.1),
    )
}

/// grow -> simulate -> enumerate -> analyze, serialized into one byte stream.
fn pipeline() -> Vec<u8> {
    let mut out = Vec::new();
    let field = SubstrateField::uniform(&[40, 40], 1.0, 0.6).unwrap();
    let params = GrowthParams { branching: 0.15, max_steps: 15, ..GrowthParams::default() };
    let inoculum = Inoculum { position: vec![20.0, 20.0], heading: vec![1.0, 0.0], fruit_body: true };
    let start = inoculate(&field, &params, &[inoculum]).unwrap();
    let mut net = grow(&start, &field, &params, 2024).unwrap().network;
    out.extend(network_to_string(&net).into_bytes());

    let fruit = net.nodes().iter().find(|n| n.kind == NodeKind::FruitBody).unwrap().id;
    let log = simulate(&net, &[Injection { node: fruit.0, time_s: 0.0, amplitude_mv: 1.0 }], SimConfig::default())
        .unwrap();
    out.extend(log.to_csv().into_bytes());

    let tips: Vec<_> = net.nodes().iter().filter(|n| n.kind == NodeKind::Tip).map(|n| n.id).collect();
    let output = *tips.last().unwrap();
    net.set_kind(tips[0], NodeKind::FruitBody).unwrap();
    let ports = PortAssignment::new(vec![fruit, tips[0]], output, (0.0, 200.0));
    let table = realize_truth_table(&net, &ports, &SimConfig::default()).unwrap().table;
    out.extend(format!("{table} {}\n", classify_function(&table)).into_bytes());

    let synth = generate_synthetic(&SynthSpec::reference(), 99).unwrap();
    let params = DetectorParams::default();
    let found = detect_spikes(&synth.recording, &params).unwrap().spikes;
    out.extend(spikes_to_csv(&synth.recording, &found).into_bytes());
    out.extend(format!("{:?}\n{:?}\n", spike_stats(&found), classify_trains(&found, &params)).into_bytes());
    out
}

fn determinism() -> Outcome {
    let a = pipeline();
    let b = pipeline();
    let digest = hex::encode(Sha256::digest(&a));
    let golden = digest == PIPELINE_SHA256;
    outcome(
        a == b && golden,
        format!("{} bytes, sha256 {digest}, golden {}", a.len(), if golden { "matches" } else { "differs" }),
    )
}

fn main() {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("1 propagation timing", timing),
        ("2a symmetric Y, annihilate -> XOR", || {
            collision_case(10.0, 10.0, CollisionRule::Annihilate, FunctionClass::Xor)
        }),
        ("2b symmetric Y, priority-pass -> OR", || {
            collision_case(10.0, 10.0, CollisionRule::PriorityPass, FunctionClass::Or)
        }),
        ("2c asymmetric Y, annihilate -> OR", || {
            collision_case(10.0, 40.0, CollisionRule::Annihilate, FunctionClass::Or)
        }),
        ("3 geometry dependence", geometry),
        ("4 oracle equivalence", oracle_equivalence),
        ("5 detection round trip", round_trip),
        ("6 train classification", train_classification),
        ("7 growth monotonicity", growth_monotonicity),
        ("8 capacity arithmetic", capacity),
        ("9 pipeline determinism", determinism),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let o = run();
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
