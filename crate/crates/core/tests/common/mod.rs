#![allow(dead_code)]

use myceliumsim::logic::PortAssignment;
use myceliumsim::network::{MyceliumNetwork, NodeId, NodeKind, StrandId, StrandState};
use myceliumsim::spike::{CollisionRule, SimConfig};
use proptest::prelude::*;
use proptest::sample::Index;

/// A random tree network with ports and a simulation config.
#[derive(Debug, Clone)]
pub struct LogicCase {
    pub network: MyceliumNetwork,
    pub ports: PortAssignment,
    pub config: SimConfig,
}

#[derive(Debug, Clone)]
pub struct Limb {
    parent: Index,
    length_mm: u32,
    angle_deg: u32,
    fruit: bool,
    abandon: bool,
}

fn limb() -> impl Strategy<Value = Limb> {
    (any::<Index>(), 3u32..=40, 0u32..360, any::<bool>(), prop::bool::weighted(0.1)).prop_map(
        |(parent, length_mm, angle_deg, fruit, abandon)| Limb {
            parent,
            length_mm,
            angle_deg,
            fruit,
            abandon,
        },
    )
}

/// Tree with one strand per limb. Leaves are tips or fruit bodies, inner
/// nodes are junctions.
pub fn build_tree(limbs: &[Limb]) -> MyceliumNetwork {
    let mut pos = vec![[0.0, 0.0, 0.0]];
    let mut edges = Vec::new();
    for (k, l) in limbs.iter().enumerate() {
        let p = l.parent.index(k + 1);
        let a = (l.angle_deg as f64).to_radians();
        let base = pos[p];
        pos.push([
            base[0] + l.length_mm as f64 * a.cos(),
            base[1] + l.length_mm as f64 * a.sin(),
            0.0,
        ]);
        edges.push((p, k + 1));
    }
    let mut degree = vec![0; pos.len()];
    for &(a, b) in &edges {
        degree[a] += 1;
        degree[b] += 1;
    }
    let mut net = MyceliumNetwork::new(2).unwrap();
    for (i, p) in pos.iter().enumerate() {
        let fruit = i == 0 || limbs[i - 1].fruit;
        let kind = match (degree[i], fruit) {
            (1, true) => NodeKind::FruitBody,
            (1, false) => NodeKind::Tip,
            _ => NodeKind::Junction,
        };
        net.add_node(*p, kind);
    }
    for (k, &(a, b)) in edges.iter().enumerate() {
        let s = net.add_strand(NodeId(a as u32), NodeId(b as u32)).unwrap();
        if limbs[k].abandon {
            net.set_strand_state(s, StrandState::Abandoned).unwrap();
        }
    }
    net
}

pub fn rule() -> impl Strategy<Value = CollisionRule> {
    prop_oneof![
        Just(CollisionRule::Annihilate),
        Just(CollisionRule::PriorityPass),
        Just(CollisionRule::Fuse)
    ]
}

/// Acyclic networks of at most `max_strands` strands with up to three inputs.
pub fn logic_case(max_strands: usize) -> impl Strategy<Value = LogicCase> {
    (
        prop::collection::vec(limb(), 1..=max_strands),
        1usize..=3,
        any::<Index>(),
        any::<Index>(),
        rule(),
        prop::sample::select(vec![0.0, 0.5, 1.0, 2.5]),
        prop::sample::select(vec![0.0, 10.0, 120.0, 600.0]),
        prop::sample::select(vec![40.0, 100.0, 250.0, 1000.0]),
    )
        .prop_map(|(limbs, n, out_pick, in_pick, rule, tau, rho, hi)| {
            let mut network = build_tree(&limbs);
            let leaves: Vec<NodeId> = network
                .nodes()
                .iter()
                .filter(|node| node.kind.is_terminal())
                .map(|node| node.id)
                .collect();
            let output = leaves[out_pick.index(leaves.len())];
            let others: Vec<NodeId> = leaves.iter().copied().filter(|l| *l != output).collect();
            let start = in_pick.index(others.len());
            let inputs: Vec<NodeId> = (0..n.min(others.len()))
                .map(|k| others[(start + k) % others.len()])
                .collect();
            for id in &inputs {
                network.set_kind(*id, NodeKind::FruitBody).unwrap();
            }
            let config = SimConfig {
                rule,
                coincidence_window_s: tau,
                refractory_s: rho,
                ..SimConfig::default()
            };
            LogicCase {
                network,
                ports: PortAssignment::new(inputs, output, (0.0, hi)),
                config,
            }
        })
}

/// Straight chain of strands with the given lengths, fruit body to tip.
pub fn chain(lengths: &[f64]) -> (MyceliumNetwork, NodeId, NodeId) {
    let mut net = MyceliumNetwork::new(2).unwrap();
    let mut x = 0.0;
    let first = net.add_node([x, 0.0, 0.0], NodeKind::FruitBody);
    let mut prev = first;
    for (k, l) in lengths.iter().enumerate() {
        x += l;
        let kind = if k + 1 == lengths.len() { NodeKind::Tip } else { NodeKind::Junction };
        let n = net.add_node([x, 0.0, 0.0], kind);
        net.add_strand(prev, n).unwrap();
        prev = n;
    }
    (net, first, prev)
}

pub fn strand_ids(net: &MyceliumNetwork) -> Vec<StrandId> {
    net.strands().iter().map(|s| s.id).collect()
}
