use myceliumsim::geometry::distance;
use myceliumsim::growth::{grow, grow_step, inoculate, GrowthParams, Inoculum};
use myceliumsim::netfile::network_to_string;
use myceliumsim::network::{MyceliumNetwork, PruneMode, StrandId};
use myceliumsim::SubstrateField;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn params() -> impl Strategy<Value = GrowthParams> {
    (0.0..0.6f64, 0.0..0.5f64, 10.0..80.0f64, 5u32..40).prop_map(
        |(branching, noise, angle, steps)| GrowthParams {
            step_length_mm: 1.0,
            branching,
            angular_noise_rad: noise,
            branch_angle_deg: angle,
            max_steps: steps,
            max_nodes: 2_000,
            ..GrowthParams::default()
        },
    )
}

fn holed_field(c: f64) -> SubstrateField {
    let mut field = SubstrateField::uniform(&[40, 40], 1.0, c).unwrap();
    // a wall right of the inoculum and a round hole above it
    field.forbid(|p| (p[0] >= 26.0 && p[0] < 28.0 && p[1] > 10.0) || distance(p, [20.0, 30.0, 0.0]) < 5.0);
    field
}

fn start(field: &SubstrateField, params: &GrowthParams) -> MyceliumNetwork {
    inoculate(
        field,
        params,
        &[Inoculum {
            position: vec![20.0, 20.0],
            heading: vec![1.0, 0.0],
            fruit_body: true,
        }],
    )
    .unwrap()
}

fn lengths_consistent(net: &MyceliumNetwork) -> Result<(), TestCaseError> {
    for s in net.strands() {
        let a = net.node(s.a).unwrap().position;
        let b = net.node(s.b).unwrap().position;
        prop_assert!((s.length - distance(a, b)).abs() <= 1e-9, "strand {}", s.id);
        prop_assert!(s.a != s.b);
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn growth_is_deterministic(p in params(), c in 0.1..1.0f64, seed in any::<u64>()) {
        let field = holed_field(c);
        let net = start(&field, &p);
        let a = grow(&net, &field, &p, seed).unwrap();
        let b = grow(&net, &field, &p, seed).unwrap();
        prop_assert_eq!(network_to_string(&a.network), network_to_string(&b.network));
        prop_assert_eq!(a.branches, b.branches);
        prop_assert_eq!(a.termination, b.termination);
    }

    #[test]
    fn nodes_stay_out_of_forbidden_cells(p in params(), c in 0.1..1.0f64, seed in any::<u64>()) {
        let field = holed_field(c);
        let mut net = start(&field, &p);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..p.max_steps {
            let report = grow_step(&mut net, &field, &p, &mut rng).unwrap();
            for n in net.nodes() {
                prop_assert!(field.is_growable(n.position), "node {} at {:?}", n.id, n.position);
            }
            lengths_consistent(&net)?;
            if report.no_tips {
                break;
            }
        }
        net.validate(Some(&field), true).unwrap();
    }

    #[test]
    fn pruning_twice_equals_pruning_once(
        p in params(),
        seed in any::<u64>(),
        picks in prop::collection::vec(any::<prop::sample::Index>(), 0..8),
        enhance in any::<bool>(),
    ) {
        let field = holed_field(0.6);
        let net = grow(&start(&field, &p), &field, &p, seed).unwrap().network;
        let ids: Vec<StrandId> = net.strands().iter().map(|s| s.id).collect();
        prop_assume!(!ids.is_empty());
        let targets: Vec<StrandId> = picks.iter().map(|i| ids[i.index(ids.len())]).collect();
        let mode = if enhance { PruneMode::Enhance } else { PruneMode::Abandon };
        let once = net.electrical_prune(&targets, mode).unwrap();
        let twice = once.electrical_prune(&targets, mode).unwrap();
        prop_assert_eq!(&once, &twice);
        prop_assert_eq!(once.nodes(), net.nodes());
        lengths_consistent(&once)?;
    }
}

#[test]
fn richer_nutrient_branches_more_on_average() {
    let p = GrowthParams {
        branching: 0.3,
        max_steps: 15,
        ..GrowthParams::default()
    };
    let mean = |c: f64| {
        let field = SubstrateField::uniform(&[60, 60], 1.0, c).unwrap();
        let net = start(&field, &p);
        (0..100u64)
            .map(|s| grow(&net, &field, &p, s).unwrap().branches as f64)
            .sum::<f64>()
            / 100.0
    };
    let (rich, poor) = (mean(0.8), mean(0.2));
    assert!(rich > poor, "c=0.8 mean {rich} vs c=0.2 mean {poor}");
}
