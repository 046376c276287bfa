//! Discrete-event propagation of voltage spikes along strands.
//!
//! Spikes travel at a fixed speed. A spike reaching a tip or fruit body is
//! logged and stops. Spikes reaching a junction within the coincidence window
//! of the first arrival there form a collision group that is resolved when the
//! window closes:
//!
//! * a lone spike fans out onto every other conducting strand;
//! * `annihilate`: two or more colliding spikes all die;
//! * `priority-pass`: the earliest-injected spike survives, and among spikes
//!   injected together the first to arrive;
//! * `fuse`: the priority-pass survivor goes on carrying the summed
//!   amplitude.
//!
//! A survivor leaves at its own arrival time and never goes back along a
//! strand that delivered a member of its group. Every strand that accepts a
//! spike refuses new ones from departure until the refractory period has
//! elapsed after arrival. Simultaneous events are ordered by time, then
//! arrivals before departures before group resolutions, then node id, then
//! spike id.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{MyceliumNetwork, NodeId, NodeKind, StrandId};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    Config(String),
    #[error("node {0} does not exist")]
    UnknownNode(NodeId),
    #[error("node {0} is not a fruit body and cannot take injections")]
    Port(NodeId),
    #[error("injection at {time} s is before the simulation clock {clock} s")]
    Chronology { time: f64, clock: f64 },
    #[error("spike amplitude must be positive and finite, got {0}")]
    Amplitude(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CollisionRule {
    #[default]
    Annihilate,
    PriorityPass,
    Fuse,
}

impl CollisionRule {
    pub fn as_str(self) -> &'static str {
        match self {
            CollisionRule::Annihilate => "annihilate",
            CollisionRule::PriorityPass => "priority-pass",
            CollisionRule::Fuse => "fuse",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "annihilate" => Some(CollisionRule::Annihilate),
            "priority-pass" | "priority" => Some(CollisionRule::PriorityPass),
            "fuse" => Some(CollisionRule::Fuse),
            _ => None,
        }
    }

    /// Every rule other than annihilation lets one spike through a collision.
    pub fn always_passes(self) -> bool {
        !matches!(self, CollisionRule::Annihilate)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub speed_mm_per_s: f64,
    pub rule: CollisionRule,
    pub coincidence_window_s: f64,
    pub refractory_s: f64,
    pub horizon_s: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            speed_mm_per_s: 0.5,
            rule: CollisionRule::Annihilate,
            coincidence_window_s: 1.0,
            refractory_s: 120.0,
            horizon_s: 600.0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::Config(m.to_string()));
        if !(self.speed_mm_per_s > 0.0 && self.speed_mm_per_s.is_finite()) {
            return bad("propagation speed must be positive");
        }
        if !(self.coincidence_window_s >= 0.0 && self.coincidence_window_s.is_finite()) {
            return bad("coincidence window must be non-negative");
        }
        if !(self.refractory_s >= 0.0 && self.refractory_s.is_finite()) {
            return bad("refractory period must be non-negative");
        }
        if !(self.horizon_s > 0.0) {
            return bad("horizon must be positive");
        }
        Ok(())
    }

    /// Travel time along a strand of the given length.
    pub fn travel_time(&self, length_mm: f64) -> f64 {
        length_mm / self.speed_mm_per_s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SpikeId(pub u64);

/// A spike and the leg it is currently travelling.
#[derive(Debug, Clone, PartialEq)]
pub struct Spike {
    pub id: SpikeId,
    /// The injected spike this one descends from.
    pub root: SpikeId,
    pub strand: Option<StrandId>,
    /// Endpoint the spike is heading for.
    pub toward: Option<NodeId>,
    pub departed_s: f64,
    pub amplitude_mv: f64,
    /// Injection time of the root spike.
    pub birth_s: f64,
}

impl Spike {
    /// Distance travelled along the current strand at time `t`, clamped to
    /// the strand.
    pub fn position_at(&self, t: f64, speed: f64, strand_length: f64) -> f64 {
        ((t - self.departed_s) * speed).clamp(0.0, strand_length)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Arrival {
    pub node: NodeId,
    pub time_s: f64,
    pub amplitude_mv: f64,
    pub spike: SpikeId,
}

/// Arrivals at tips and fruit bodies, ordered by time.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ArrivalLog {
    pub records: Vec<Arrival>,
}

pub const ARRIVAL_CSV_HEADER: &str = "node_id,arrival_s,amplitude_mV,spike_id";

impl ArrivalLog {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn at(&self, node: NodeId) -> impl Iterator<Item = &Arrival> {
        self.records.iter().filter(move |a| a.node == node)
    }

    /// True if `node` saw an arrival with `lo <= t <= hi`.
    pub fn hit_within(&self, node: NodeId, lo: f64, hi: f64) -> bool {
        self.at(node).any(|a| a.time_s >= lo && a.time_s <= hi)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(ARRIVAL_CSV_HEADER);
        out.push('\n');
        for a in &self.records {
            writeln!(out, "{},{:?},{:?},{}", a.node, a.time_s, a.amplitude_mv, a.spike.0).unwrap();
        }
        out
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LogSummary {
    pub count: usize,
    pub first_s: Option<f64>,
    pub last_s: Option<f64>,
    pub per_node: BTreeMap<NodeId, usize>,
}

/// Aggregate counts and the first and last arrival time.
pub fn estimate_runtime_stats(log: &ArrivalLog) -> LogSummary {
    let mut summary = LogSummary::default();
    for a in &log.records {
        summary.count += 1;
        summary.first_s = Some(summary.first_s.map_or(a.time_s, |f| f.min(a.time_s)));
        summary.last_s = Some(summary.last_s.map_or(a.time_s, |l| l.max(a.time_s)));
        *summary.per_node.entry(a.node).or_default() += 1;
    }
    summary
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Phase {
    Arrive = 0,
    Depart = 1,
    Resolve = 2,
}

#[derive(Debug, Clone, Copy)]
enum Action {
    Depart { spike: usize, strand: usize, from: usize },
    Arrive { spike: usize, strand: usize, node: usize },
    Resolve { node: usize },
}

#[derive(Debug, Clone, Copy)]
struct Event {
    time: f64,
    phase: Phase,
    node: NodeId,
    spike: u64,
    action: Action,
}

impl Event {
    fn key(&self) -> (Phase, NodeId, u64) {
        (self.phase, self.node, self.spike)
    }
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then_with(|| self.key().cmp(&other.key()))
    }
}

#[derive(Debug, Clone, Copy)]
struct Member {
    spike: usize,
    strand: usize,
    time: f64,
}

#[derive(Debug, Default)]
struct Group {
    deadline: f64,
    members: Vec<Member>,
}

/// Counters describing one run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunStats {
    pub events: usize,
    pub collisions: usize,
    pub refractory_rejections: usize,
}

/// Event-driven simulation state over one network.
pub struct SpikeSim<'a> {
    network: &'a MyceliumNetwork,
    config: SimConfig,
    incidence: Vec<Vec<usize>>,
    strand_ends: Vec<(usize, usize)>,
    clock: f64,
    queue: BinaryHeap<Reverse<Event>>,
    spikes: Vec<Spike>,
    windows: Vec<Vec<(f64, f64)>>,
    groups: HashMap<usize, Group>,
    log: ArrivalLog,
    stats: RunStats,
}

impl<'a> SpikeSim<'a> {
    pub fn new(network: &'a MyceliumNetwork, config: SimConfig) -> Result<Self, SimError> {
        config.validate()?;
        let mut incidence = vec![Vec::new(); network.nodes().len()];
        let strand_ends: Vec<(usize, usize)> = network
            .strands()
            .iter()
            .map(|s| {
                (
                    network.node_position(s.a).expect("validated endpoint"),
                    network.node_position(s.b).expect("validated endpoint"),
                )
            })
            .collect();
        let mut order: Vec<usize> = (0..network.strands().len()).collect();
        order.sort_by_key(|&i| network.strands()[i].id);
        for &k in &order {
            let s = &network.strands()[k];
            if s.state.conducts() {
                incidence[strand_ends[k].0].push(k);
                incidence[strand_ends[k].1].push(k);
            }
        }
        Ok(Self {
            network,
            config,
            incidence,
            strand_ends,
            clock: 0.0,
            queue: BinaryHeap::new(),
            spikes: Vec::new(),
            windows: vec![Vec::new(); network.strands().len()],
            groups: HashMap::new(),
            log: ArrivalLog::default(),
            stats: RunStats::default(),
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn stats(&self) -> &RunStats {
        &self.stats
    }

    pub fn spikes(&self) -> &[Spike] {
        &self.spikes
    }

    fn node_id(&self, idx: usize) -> NodeId {
        self.network.nodes()[idx].id
    }

    fn new_spike(&mut self, root: Option<SpikeId>, amplitude_mv: f64, birth_s: f64) -> usize {
        let id = SpikeId(self.spikes.len() as u64);
        self.spikes.push(Spike {
            id,
            root: root.unwrap_or(id),
            strand: None,
            toward: None,
            departed_s: birth_s,
            amplitude_mv,
            birth_s,
        });
        self.spikes.len() - 1
    }

    /// Schedules one spike per conducting strand at fruit body `node`,
    /// leaving at `time_s`. Returns the new spike ids, which may be empty.
    pub fn inject_spike(
        &mut self,
        node: NodeId,
        time_s: f64,
        amplitude_mv: f64,
    ) -> Result<Vec<SpikeId>, SimError> {
        let idx = self
            .network
            .node_position(node)
            .ok_or(SimError::UnknownNode(node))?;
        if self.network.nodes()[idx].kind != NodeKind::FruitBody {
            return Err(SimError::Port(node));
        }
        if !(time_s >= self.clock) || !time_s.is_finite() {
            return Err(SimError::Chronology {
                time: time_s,
                clock: self.clock,
            });
        }
        if !(amplitude_mv > 0.0 && amplitude_mv.is_finite()) {
            return Err(SimError::Amplitude(amplitude_mv));
        }
        let strands = self.incidence[idx].clone();
        let mut ids = Vec::with_capacity(strands.len());
        for strand in strands {
            let spike = self.new_spike(None, amplitude_mv, time_s);
            ids.push(self.spikes[spike].id);
            self.queue.push(Reverse(Event {
                time: time_s,
                phase: Phase::Depart,
                node,
                spike: spike as u64,
                action: Action::Depart {
                    spike,
                    strand,
                    from: idx,
                },
            }));
        }
        Ok(ids)
    }

    fn try_depart(&mut self, spike: usize, strand: usize, from: usize, t: f64) {
        if self.windows[strand].iter().any(|&(lo, hi)| lo <= t && t < hi) {
            self.stats.refractory_rejections += 1;
            return;
        }
        let s = &self.network.strands()[strand];
        let travel = self.config.travel_time(s.length);
        let arrive_at = t + travel;
        self.windows[strand].push((t, arrive_at + self.config.refractory_s));
        let (a, b) = self.strand_ends[strand];
        let to = if from == a { b } else { a };
        let to_id = self.node_id(to);
        let sp = &mut self.spikes[spike];
        sp.strand = Some(s.id);
        sp.toward = Some(to_id);
        sp.departed_s = t;
        self.queue.push(Reverse(Event {
            time: arrive_at,
            phase: Phase::Arrive,
            node: to_id,
            spike: spike as u64,
            action: Action::Arrive {
                spike,
                strand,
                node: to,
            },
        }));
    }

    fn arrive(&mut self, spike: usize, strand: usize, node: usize, t: f64) {
        if self.network.nodes()[node].kind.is_terminal() {
            let sp = &self.spikes[spike];
            self.log.records.push(Arrival {
                node: self.node_id(node),
                time_s: t,
                amplitude_mv: sp.amplitude_mv,
                spike: sp.id,
            });
            return;
        }
        let member = Member { spike, strand, time: t };
        if let Some(group) = self.groups.get_mut(&node) {
            if t <= group.deadline {
                group.members.push(member);
                return;
            }
        }
        let deadline = t + self.config.coincidence_window_s;
        self.groups.insert(
            node,
            Group {
                deadline,
                members: vec![member],
            },
        );
        self.queue.push(Reverse(Event {
            time: deadline,
            phase: Phase::Resolve,
            node: self.node_id(node),
            spike: spike as u64,
            action: Action::Resolve { node },
        }));
    }

    fn resolve(&mut self, node: usize) {
        let Some(mut group) = self.groups.remove(&node) else {
            return;
        };
        group
            .members
            .sort_by(|x, y| x.time.total_cmp(&y.time).then(x.spike.cmp(&y.spike)));
        let survivor = if group.members.len() == 1 {
            Some((group.members[0], self.spikes[group.members[0].spike].amplitude_mv))
        } else {
            self.stats.collisions += 1;
            let earliest = || {
                *group
                    .members
                    .iter()
                    .min_by(|x, y| {
                        let (sx, sy) = (&self.spikes[x.spike], &self.spikes[y.spike]);
                        sx.birth_s
                            .total_cmp(&sy.birth_s)
                            .then(x.time.total_cmp(&y.time))
                            .then(sx.root.cmp(&sy.root))
                            .then(x.spike.cmp(&y.spike))
                    })
                    .expect("non-empty group")
            };
            match self.config.rule {
                CollisionRule::Annihilate => None,
                CollisionRule::PriorityPass => {
                    let m = earliest();
                    Some((m, self.spikes[m.spike].amplitude_mv))
                }
                CollisionRule::Fuse => {
                    let total = group
                        .members
                        .iter()
                        .map(|m| self.spikes[m.spike].amplitude_mv)
                        .sum();
                    Some((earliest(), total))
                }
            }
        };
        let Some((winner, amplitude)) = survivor else {
            return;
        };
        let (root, birth) = {
            let sp = &self.spikes[winner.spike];
            (sp.root, sp.birth_s)
        };
        let incoming: Vec<usize> = group.members.iter().map(|m| m.strand).collect();
        let outgoing: Vec<usize> = self.incidence[node]
            .iter()
            .copied()
            .filter(|s| !incoming.contains(s))
            .collect();
        for strand in outgoing {
            let child = self.new_spike(Some(root), amplitude, birth);
            self.try_depart(child, strand, node, winner.time);
        }
    }

    /// Processes events up to the horizon and returns the arrival log.
    pub fn run(&mut self) -> ArrivalLog {
        while let Some(Reverse(ev)) = self.queue.peek().copied() {
            if ev.time > self.config.horizon_s {
                break;
            }
            self.queue.pop();
            self.stats.events += 1;
            self.clock = self.clock.max(ev.time);
            match ev.action {
                Action::Depart { spike, strand, from } => self.try_depart(spike, strand, from, ev.time),
                Action::Arrive { spike, strand, node } => self.arrive(spike, strand, node, ev.time),
                Action::Resolve { node } => self.resolve(node),
            }
        }
        self.log.records.sort_by(|x, y| {
            x.time_s
                .total_cmp(&y.time_s)
                .then(x.node.cmp(&y.node))
                .then(x.spike.cmp(&y.spike))
        });
        self.log.clone()
    }
}

/// One injection request.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Injection {
    pub node: u32,
    #[serde(default)]
    pub time_s: f64,
    #[serde(default = "default_amplitude")]
    pub amplitude_mv: f64,
}

fn default_amplitude() -> f64 {
    1.0
}

/// Runs one simulation from a fresh state. Injections are applied in time
/// order (stable for equal times).
pub fn simulate(
    network: &MyceliumNetwork,
    injections: &[Injection],
    config: SimConfig,
) -> Result<ArrivalLog, SimError> {
    let mut sim = SpikeSim::new(network, config)?;
    let mut ordered = injections.to_vec();
    ordered.sort_by(|a, b| a.time_s.total_cmp(&b.time_s));
    for inj in ordered {
        sim.inject_spike(NodeId(inj.node), inj.time_s, inj.amplitude_mv)?;
    }
    Ok(sim.run())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{shapes, PruneMode};

    fn single_strand(len: f64) -> (MyceliumNetwork, NodeId, NodeId) {
        let mut net = MyceliumNetwork::new(2).unwrap();
        let a = net.add_node([0.0, 0.0, 0.0], NodeKind::FruitBody);
        let b = net.add_node([len, 0.0, 0.0], NodeKind::FruitBody);
        net.add_strand(a, b).unwrap();
        (net, a, b)
    }

    #[test]
    fn thirty_mm_takes_sixty_seconds() {
        let (net, a, b) = single_strand(30.0);
        let mut sim = SpikeSim::new(&net, SimConfig::default()).unwrap();
        sim.inject_spike(a, 0.0, 1.0).unwrap();
        let log = sim.run();
        assert_eq!(log.len(), 1);
        assert_eq!(log.records[0].node, b);
        assert!((log.records[0].time_s - 60.0).abs() < 1e-9);
    }

    #[test]
    fn path_through_junction_takes_forty_seconds() {
        let (net, a, _, b) = shapes::path(10.0, 10.0);
        let log = simulate(&net, &[Injection { node: a.0, time_s: 0.0, amplitude_mv: 1.0 }], SimConfig::default()).unwrap();
        assert_eq!(log.len(), 1);
        assert_eq!(log.records[0].node, b);
        assert!((log.records[0].time_s - 40.0).abs() < 1e-9);
        let summary = estimate_runtime_stats(&log);
        assert_eq!(summary.per_node[&b], 1);
        assert_eq!(summary.first_s, Some(log.records[0].time_s));
    }

    #[test]
    fn isolated_fruit_body_schedules_nothing() {
        let (net, a, _) = single_strand(5.0);
        let net = net.electrical_prune(&[StrandId(0)], PruneMode::Abandon).unwrap();
        let mut sim = SpikeSim::new(&net, SimConfig::default()).unwrap();
        assert!(sim.inject_spike(a, 0.0, 1.0).unwrap().is_empty());
        assert!(sim.run().is_empty());
    }

    #[test]
    fn repeated_injections_get_distinct_ids() {
        let (net, a, _) = single_strand(5.0);
        let mut sim = SpikeSim::new(&net, SimConfig::default()).unwrap();
        let first = sim.inject_spike(a, 0.0, 1.0).unwrap();
        let second = sim.inject_spike(a, 0.0, 1.0).unwrap();
        assert_eq!(first.len(), 1);
        assert_eq!(second.len(), 1);
        assert_ne!(first, second);
    }

    #[test]
    fn injection_errors() {
        let (net, _, j, _) = shapes::path(10.0, 10.0);
        let mut sim = SpikeSim::new(&net, SimConfig::default()).unwrap();
        assert_eq!(sim.inject_spike(j, 0.0, 1.0), Err(SimError::Port(j)));
        assert_eq!(sim.inject_spike(NodeId(42), 0.0, 1.0), Err(SimError::UnknownNode(NodeId(42))));
        assert!(matches!(sim.inject_spike(NodeId(0), 0.0, 0.0), Err(SimError::Amplitude(_))));
        sim.inject_spike(NodeId(0), 5.0, 1.0).unwrap();
        sim.run();
        assert!(matches!(
            sim.inject_spike(NodeId(0), 1.0, 1.0),
            Err(SimError::Chronology { .. })
        ));
    }

    #[test]
    fn non_positive_horizon_is_config_error() {
        let (net, ..) = shapes::path(1.0, 1.0);
        let cfg = SimConfig { horizon_s: 0.0, ..Default::default() };
        assert!(matches!(SpikeSim::new(&net, cfg), Err(SimError::Config(_))));
        let cfg = SimConfig { speed_mm_per_s: -1.0, ..Default::default() };
        assert!(matches!(SpikeSim::new(&net, cfg), Err(SimError::Config(_))));
    }

    fn y_run(la: f64, lb: f64, fire: &[bool], rule: CollisionRule) -> ArrivalLog {
        let (net, a, b, _, _) = shapes::y_junction(la, lb, 10.0);
        let mut inj = Vec::new();
        if fire[0] {
            inj.push(Injection { node: a.0, time_s: 0.0, amplitude_mv: 1.0 });
        }
        if fire[1] {
            inj.push(Injection { node: b.0, time_s: 0.0, amplitude_mv: 1.0 });
        }
        simulate(&net, &inj, SimConfig { rule, ..Default::default() }).unwrap()
    }

    #[test]
    fn symmetric_collision_annihilates() {
        let c = NodeId(3);
        let log = y_run(10.0, 10.0, &[true, true], CollisionRule::Annihilate);
        assert_eq!(log.at(c).count(), 0);
        let log = y_run(10.0, 10.0, &[true, false], CollisionRule::Annihilate);
        assert_eq!(log.at(c).count(), 1);
        assert!((log.at(c).next().unwrap().time_s - 40.0).abs() < 1e-9);
    }

    #[test]
    fn fuse_sums_amplitudes() {
        let log = y_run(10.0, 10.0, &[true, true], CollisionRule::Fuse);
        let hits: Vec<_> = log.at(NodeId(3)).collect();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].amplitude_mv, 2.0);
        let log = y_run(10.0, 10.0, &[true, true], CollisionRule::PriorityPass);
        let hits: Vec<_> = log.at(NodeId(3)).collect();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].amplitude_mv, 1.0);
    }

    #[test]
    fn zero_window_still_collides_on_exact_ties() {
        let (net, a, b, _, c) = shapes::y_junction(10.0, 10.0, 10.0);
        let cfg = SimConfig { coincidence_window_s: 0.0, ..Default::default() };
        let log = simulate(
            &net,
            &[
                Injection { node: a.0, time_s: 0.0, amplitude_mv: 1.0 },
                Injection { node: b.0, time_s: 0.0, amplitude_mv: 1.0 },
            ],
            cfg,
        )
        .unwrap();
        assert_eq!(log.at(c).count(), 0);
    }

    #[test]
    fn refractory_stops_echo_on_a_cycle() {
        // triangle of junctions with a fruit body hanging off one corner
        let mut net = MyceliumNetwork::new(2).unwrap();
        let f = net.add_node([-5.0, 0.0, 0.0], NodeKind::FruitBody);
        let j0 = net.add_node([0.0, 0.0, 0.0], NodeKind::Junction);
        let j1 = net.add_node([10.0, 0.0, 0.0], NodeKind::Junction);
        let j2 = net.add_node([5.0, 8.0, 0.0], NodeKind::Junction);
        net.add_strand(f, j0).unwrap();
        net.add_strand(j0, j1).unwrap();
        net.add_strand(j1, j2).unwrap();
        net.add_strand(j2, j0).unwrap();
        let cfg = SimConfig { horizon_s: 5000.0, ..Default::default() };
        let mut sim = SpikeSim::new(&net, cfg).unwrap();
        sim.inject_spike(f, 0.0, 1.0).unwrap();
        sim.run();
        assert!(sim.stats().events < 100);
    }

    #[test]
    fn arrival_csv_format() {
        let (net, a, _) = single_strand(30.0);
        let log = simulate(&net, &[Injection { node: a.0, time_s: 0.0, amplitude_mv: 1.5 }], SimConfig::default()).unwrap();
        assert_eq!(log.to_csv(), "node_id,arrival_s,amplitude_mV,spike_id\n1,60.0,1.5,0\n");
    }

    #[test]
    fn empty_log_summary() {
        let s = estimate_runtime_stats(&ArrivalLog::default());
        assert_eq!(s.count, 0);
        assert!(s.first_s.is_none() && s.per_node.is_empty());
    }

    #[test]
    fn spike_position_is_clamped() {
        let s = Spike {
            id: SpikeId(0),
            root: SpikeId(0),
            strand: Some(StrandId(0)),
            toward: Some(NodeId(1)),
            departed_s: 10.0,
            amplitude_mv: 1.0,
            birth_s: 10.0,
        };
        assert_eq!(s.position_at(20.0, 0.5, 30.0), 5.0);
        assert_eq!(s.position_at(500.0, 0.5, 30.0), 30.0);
        assert_eq!(s.position_at(0.0, 0.5, 30.0), 0.0);
    }
}
