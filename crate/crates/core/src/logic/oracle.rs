//! Queue-free reference evaluation of truth tables on forests.
//!
//! On a forest every spike copy descending from an injected spike follows a
//! unique path, so its arrival time at any node is plain path arithmetic from
//! the injection site. The oracle precomputes every such candidate arrival,
//! sorts them once, and sweeps them in time order, deciding collisions at
//! junctions by coincidence checks and strand availability by refractory
//! windows. Group decisions are applied before any later candidate is read;
//! this is sound because every conducting strand takes longer to traverse
//! than the coincidence window.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use super::{LogicError, PortAssignment, TruthTable};
use crate::network::{MyceliumNetwork, NodeKind};
use crate::spike::{CollisionRule, SimConfig};

pub const ORACLE_MAX_STRANDS: usize = 50;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("instance outside the oracle's domain: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Logic(#[from] LogicError),
}

struct Forest<'a> {
    net: &'a MyceliumNetwork,
    /// Conducting strand indices per node index, ascending by strand id.
    adj: Vec<Vec<usize>>,
    ends: Vec<(usize, usize)>,
    travel: Vec<f64>,
}

impl<'a> Forest<'a> {
    fn build(net: &'a MyceliumNetwork, config: &SimConfig) -> Result<Self, OracleError> {
        if net.strands().len() > ORACLE_MAX_STRANDS {
            return Err(OracleError::Unsupported(format!(
                "{} strands exceed the limit of {ORACLE_MAX_STRANDS}",
                net.strands().len()
            )));
        }
        let n = net.nodes().len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut adj = vec![Vec::new(); n];
        let mut ends = Vec::new();
        let mut travel = Vec::new();
        let mut by_id: Vec<usize> = (0..net.strands().len()).collect();
        by_id.sort_by_key(|&k| net.strands()[k].id);
        for (k, s) in net.strands().iter().enumerate() {
            let a = net.node_position(s.a).expect("endpoint");
            let b = net.node_position(s.b).expect("endpoint");
            ends.push((a, b));
            travel.push(config.travel_time(s.length));
            if !s.state.conducts() {
                continue;
            }
            if travel[k] <= config.coincidence_window_s {
                return Err(OracleError::Unsupported(format!(
                    "strand {} is traversed in {} s, not longer than the coincidence window",
                    s.id, travel[k]
                )));
            }
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra == rb {
                return Err(OracleError::Unsupported(format!("strand {} closes a cycle", s.id)));
            }
            parent[ra] = rb;
        }
        for &k in &by_id {
            if net.strands()[k].state.conducts() {
                adj[ends[k].0].push(k);
                adj[ends[k].1].push(k);
            }
        }
        Ok(Self { net, adj, ends, travel })
    }

    fn other(&self, strand: usize, node: usize) -> usize {
        let (a, b) = self.ends[strand];
        if node == a {
            b
        } else {
            a
        }
    }

    fn terminal(&self, node: usize) -> bool {
        self.net.nodes()[node].kind.is_terminal()
    }
}

/// A possible arrival of the copy of root `root` at `node`.
#[derive(Debug, Clone, Copy)]
struct Candidate {
    root: usize,
    node: usize,
    via: usize,
    time: f64,
}

fn evaluate_vector(
    forest: &Forest<'_>,
    assignment: &PortAssignment,
    config: &SimConfig,
    vector: usize,
) -> bool {
    let net = forest.net;
    let horizon = assignment.window.1;
    let (lo, hi) = assignment.window;
    let output = net.node_position(assignment.output).expect("validated output");

    // Roots are injected spikes, ranked the way injection ids are issued:
    // by input order, then by strand id.
    let mut roots: Vec<(usize, usize)> = Vec::new(); // (input node, first strand)
    for id in assignment.firing(vector) {
        let s = net.node_position(id).expect("validated input");
        for &e in &forest.adj[s] {
            roots.push((s, e));
        }
    }

    let mut candidates = Vec::new();
    for (rank, &(source, first)) in roots.iter().enumerate() {
        let mut stack = vec![(source, first, 0.0f64)];
        while let Some((from, via, t0)) = stack.pop() {
            let node = forest.other(via, from);
            let time = t0 + forest.travel[via];
            candidates.push(Candidate { root: rank, node, via, time });
            if forest.terminal(node) {
                continue;
            }
            for &next in &forest.adj[node] {
                if next != via {
                    stack.push((node, next, time));
                }
            }
        }
    }
    candidates.sort_by(|x, y| {
        x.time
            .total_cmp(&y.time)
            .then(net.nodes()[x.node].id.cmp(&net.nodes()[y.node].id))
            .then(x.root.cmp(&y.root))
    });

    let mut windows: Vec<Vec<(f64, f64)>> = vec![Vec::new(); forest.ends.len()];
    let mut accepted: HashMap<(usize, usize), bool> = HashMap::new();
    let claim = |windows: &mut Vec<Vec<(f64, f64)>>, strand: usize, t: f64| -> bool {
        if windows[strand].iter().any(|&(a, b)| a <= t && t < b) {
            return false;
        }
        windows[strand].push((t, t + forest.travel[strand] + config.refractory_s));
        true
    };

    // Injections all leave at t = 0, taken in node-id order.
    let mut order: Vec<usize> = (0..roots.len()).collect();
    order.sort_by_key(|&r| (net.nodes()[roots[r].0].id, r));
    for r in order {
        let ok = claim(&mut windows, roots[r].1, 0.0);
        accepted.insert((r, roots[r].1), ok);
    }

    // open groups: node -> (deadline, members as (root, via, time))
    let mut open: HashMap<usize, (f64, Vec<(usize, usize, f64)>)> = HashMap::new();
    let mut pending: BTreeMap<(u64, u32), usize> = BTreeMap::new();

    let resolve = |node: usize,
                       open: &mut HashMap<usize, (f64, Vec<(usize, usize, f64)>)>,
                       windows: &mut Vec<Vec<(f64, f64)>>,
                       accepted: &mut HashMap<(usize, usize), bool>| {
        let (_, members) = open.remove(&node).expect("pending group is open");
        let winner = match (members.len(), config.rule) {
            (1, _) => Some(members[0]),
            (_, CollisionRule::Annihilate) => None,
            // equal birth times: first arrival, then the lowest root rank
            _ => members
                .iter()
                .min_by(|x, y| x.2.total_cmp(&y.2).then(x.0.cmp(&y.0)))
                .copied(),
        };
        if let Some((root, _, t)) = winner {
            for &e in &forest.adj[node] {
                if members.iter().any(|m| m.1 == e) {
                    continue;
                }
                let ok = claim(windows, e, t);
                accepted.insert((root, e), ok);
            }
        }
    };

    for c in candidates {
        if c.time > horizon {
            break;
        }
        while let Some((&key, &node)) = pending.iter().next() {
            if f64::from_bits(key.0) < c.time {
                pending.remove(&key);
                resolve(node, &mut open, &mut windows, &mut accepted);
            } else {
                break;
            }
        }
        if !accepted.get(&(c.root, c.via)).copied().unwrap_or(false) {
            continue;
        }
        if forest.terminal(c.node) {
            if c.node == output && c.time >= lo && c.time <= hi {
                return true;
            }
            continue;
        }
        match open.get_mut(&c.node) {
            Some((deadline, members)) if c.time <= *deadline => members.push((c.root, c.via, c.time)),
            _ => {
                let deadline = c.time + config.coincidence_window_s;
                open.insert(c.node, (deadline, vec![(c.root, c.via, c.time)]));
                if deadline <= horizon {
                    pending.insert((deadline.to_bits(), net.nodes()[c.node].id.0), c.node);
                }
            }
        }
    }
    false
}

/// Computes the truth table without the event queue. Supports networks with
/// at most [`ORACLE_MAX_STRANDS`] strands whose conducting part is a forest
/// and whose conducting strands all take longer than the coincidence window
/// to traverse.
pub fn brute_force_oracle(
    network: &MyceliumNetwork,
    assignment: &PortAssignment,
    config: &SimConfig,
) -> Result<TruthTable, OracleError> {
    assignment.validate(network)?;
    let config = assignment.readout_config(config);
    config.validate().map_err(LogicError::from)?;
    let forest = Forest::build(network, &config)?;
    debug_assert!(assignment
        .inputs
        .iter()
        .all(|i| network.node(*i).map(|n| n.kind) == Some(NodeKind::FruitBody)));
    let n = assignment.arity();
    let bits = (0..1usize << n)
        .map(|v| evaluate_vector(&forest, assignment, &config, v))
        .collect();
    Ok(TruthTable::new(n, bits)?)
}
