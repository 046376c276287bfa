//! Mycelium networks as geometric graphs.
//!
//! Nodes are tips, junctions or fruit bodies; strands are straight segments
//! between two distinct nodes whose stored length always equals the distance
//! between their endpoints.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::field::SubstrateField;
use crate::geometry::{distance, Point};
use thiserror::Error;

/// Tolerance for the strand-length invariant, in millimetres.
pub const LENGTH_TOLERANCE_MM: f64 = 1e-9;

/// Consecutive rejected advances after which a tip stops growing.
pub const BLOCK_AFTER_REJECTIONS: u8 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StrandId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for StrandId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Tip,
    Junction,
    FruitBody,
}

impl NodeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Tip => "tip",
            NodeKind::Junction => "junction",
            NodeKind::FruitBody => "fruit",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "tip" => Some(NodeKind::Tip),
            "junction" => Some(NodeKind::Junction),
            "fruit" | "fruit-body" | "fruit_body" => Some(NodeKind::FruitBody),
            _ => None,
        }
    }

    /// Ports terminate spikes and record arrivals.
    pub fn is_terminal(self) -> bool {
        matches!(self, NodeKind::Tip | NodeKind::FruitBody)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StrandState {
    Active,
    Abandoned,
    Enhanced,
}

impl StrandState {
    pub fn as_str(self) -> &'static str {
        match self {
            StrandState::Active => "active",
            StrandState::Abandoned => "abandoned",
            StrandState::Enhanced => "enhanced",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "active" => Some(StrandState::Active),
            "abandoned" => Some(StrandState::Abandoned),
            "enhanced" => Some(StrandState::Enhanced),
            _ => None,
        }
    }

    /// Enhanced strands conduct exactly like active ones.
    pub fn conducts(self) -> bool {
        !matches!(self, StrandState::Abandoned)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub position: Point,
    pub kind: NodeKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Strand {
    pub id: StrandId,
    pub a: NodeId,
    pub b: NodeId,
    pub length: f64,
    pub state: StrandState,
}

impl Strand {
    pub fn other(&self, node: NodeId) -> NodeId {
        if node == self.a {
            self.b
        } else {
            self.a
        }
    }
}

/// Growth bookkeeping carried by every tip node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TipState {
    /// Unit growth direction.
    pub heading: Point,
    /// Consecutive rejected advances.
    pub rejections: u8,
}

impl TipState {
    pub fn new(heading: Point) -> Self {
        Self {
            heading,
            rejections: 0,
        }
    }

    pub fn is_blocked(&self) -> bool {
        self.rejections >= BLOCK_AFTER_REJECTIONS
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum NetworkError {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("unknown strand {0}")]
    UnknownStrand(StrandId),
    #[error("duplicate node id {0}")]
    DuplicateNode(NodeId),
    #[error("duplicate strand id {0}")]
    DuplicateStrand(StrandId),
    #[error("strand {0} connects node {1} to itself")]
    SelfLoop(StrandId, NodeId),
    #[error("strand {id} length {stored} differs from endpoint distance {actual}")]
    LengthMismatch { id: StrandId, stored: f64, actual: f64 },
    #[error("node {0} lies outside the growable region")]
    ForbiddenPosition(NodeId),
    #[error("fruit body {0} has no strands")]
    IsolatedFruitBody(NodeId),
    #[error("network is {network}D but field is {field}D")]
    DimensionMismatch { network: usize, field: usize },
    #[error("dimension must be 2 or 3, got {0}")]
    InvalidDimension(usize),
    #[error("node {0} has a non-finite coordinate")]
    NonFinitePosition(NodeId),
    #[error("node {0} is not a tip")]
    NotATip(NodeId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PruneMode {
    /// High-amplitude, high-frequency stimulation: listed strands die.
    Abandon,
    /// Low-amplitude, low-frequency stimulation: listed strands strengthen and
    /// their junction neighbours are abandoned.
    Enhance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MyceliumNetwork {
    dim: usize,
    seed: u64,
    age: u32,
    nodes: Vec<Node>,
    strands: Vec<Strand>,
    tips: BTreeMap<NodeId, TipState>,
    node_index: HashMap<NodeId, usize>,
    strand_index: HashMap<StrandId, usize>,
}

impl MyceliumNetwork {
    pub fn new(dim: usize) -> Result<Self, NetworkError> {
        if !(2..=3).contains(&dim) {
            return Err(NetworkError::InvalidDimension(dim));
        }
        Ok(Self {
            dim,
            seed: 0,
            age: 0,
            nodes: Vec::new(),
            strands: Vec::new(),
            tips: BTreeMap::new(),
            node_index: HashMap::new(),
            strand_index: HashMap::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Seed of the generator that produced this network (0 if hand-built).
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
    }

    /// Number of growth steps applied so far.
    pub fn age(&self) -> u32 {
        self.age
    }

    pub(crate) fn set_age(&mut self, age: u32) {
        self.age = age;
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn strands(&self) -> &[Strand] {
        &self.strands
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.node_index.get(&id).map(|&i| &self.nodes[i])
    }

    pub fn strand(&self, id: StrandId) -> Option<&Strand> {
        self.strand_index.get(&id).map(|&i| &self.strands[i])
    }

    pub fn node_position(&self, id: NodeId) -> Option<usize> {
        self.node_index.get(&id).copied()
    }

    pub fn strand_position(&self, id: StrandId) -> Option<usize> {
        self.strand_index.get(&id).copied()
    }

    pub fn tip_state(&self, id: NodeId) -> Option<&TipState> {
        self.tips.get(&id)
    }

    pub fn tip_states(&self) -> impl Iterator<Item = (NodeId, &TipState)> {
        self.tips.iter().map(|(id, s)| (*id, s))
    }

    pub(crate) fn tip_state_mut(&mut self, id: NodeId) -> Option<&mut TipState> {
        self.tips.get_mut(&id)
    }

    pub fn tip_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.kind == NodeKind::Tip).count()
    }

    /// Tips that can still advance, ascending by id.
    pub fn growing_tips(&self) -> Vec<NodeId> {
        self.tips
            .iter()
            .filter(|(_, s)| !s.is_blocked())
            .map(|(id, _)| *id)
            .collect()
    }

    fn next_node_id(&self) -> NodeId {
        NodeId(self.nodes.iter().map(|n| n.id.0 + 1).max().unwrap_or(0))
    }

    fn next_strand_id(&self) -> StrandId {
        StrandId(self.strands.iter().map(|s| s.id.0 + 1).max().unwrap_or(0))
    }

    /// Adds a node with the next free id. Tips get a default +x heading.
    pub fn add_node(&mut self, position: Point, kind: NodeKind) -> NodeId {
        let id = self.next_node_id();
        self.insert_node(Node { id, position, kind })
            .expect("fresh id is unique");
        id
    }

    /// Inserts a node with an explicit id.
    pub fn insert_node(&mut self, node: Node) -> Result<(), NetworkError> {
        if self.node_index.contains_key(&node.id) {
            return Err(NetworkError::DuplicateNode(node.id));
        }
        if node.position.iter().any(|c| !c.is_finite()) {
            return Err(NetworkError::NonFinitePosition(node.id));
        }
        let mut node = node;
        if self.dim == 2 {
            node.position[2] = 0.0;
        }
        if node.kind == NodeKind::Tip {
            self.tips.insert(node.id, TipState::new([1.0, 0.0, 0.0]));
        }
        self.node_index.insert(node.id, self.nodes.len());
        self.nodes.push(node);
        Ok(())
    }

    pub fn set_tip_state(&mut self, id: NodeId, state: TipState) -> Result<(), NetworkError> {
        match self.node(id) {
            None => Err(NetworkError::UnknownNode(id)),
            Some(n) if n.kind != NodeKind::Tip => Err(NetworkError::NotATip(id)),
            Some(_) => {
                self.tips.insert(id, state);
                Ok(())
            }
        }
    }

    pub fn set_kind(&mut self, id: NodeId, kind: NodeKind) -> Result<(), NetworkError> {
        let i = self.node_position(id).ok_or(NetworkError::UnknownNode(id))?;
        self.nodes[i].kind = kind;
        if kind == NodeKind::Tip {
            self.tips.entry(id).or_insert(TipState::new([1.0, 0.0, 0.0]));
        } else {
            self.tips.remove(&id);
        }
        Ok(())
    }

    /// Adds an active strand with the next free id.
    pub fn add_strand(&mut self, a: NodeId, b: NodeId) -> Result<StrandId, NetworkError> {
        let id = self.next_strand_id();
        self.insert_strand(id, a, b, StrandState::Active)?;
        Ok(id)
    }

    /// Inserts a strand with an explicit id; the length is derived from the
    /// endpoint positions.
    pub fn insert_strand(
        &mut self,
        id: StrandId,
        a: NodeId,
        b: NodeId,
        state: StrandState,
    ) -> Result<(), NetworkError> {
        if self.strand_index.contains_key(&id) {
            return Err(NetworkError::DuplicateStrand(id));
        }
        if a == b {
            return Err(NetworkError::SelfLoop(id, a));
        }
        let pa = self.node(a).ok_or(NetworkError::UnknownNode(a))?.position;
        let pb = self.node(b).ok_or(NetworkError::UnknownNode(b))?.position;
        self.strand_index.insert(id, self.strands.len());
        self.strands.push(Strand {
            id,
            a,
            b,
            length: distance(pa, pb),
            state,
        });
        Ok(())
    }

    pub fn set_strand_state(&mut self, id: StrandId, state: StrandState) -> Result<(), NetworkError> {
        let i = self.strand_position(id).ok_or(NetworkError::UnknownStrand(id))?;
        self.strands[i].state = state;
        Ok(())
    }

    /// Moves a node and refreshes the length of every incident strand.
    pub fn move_node(&mut self, id: NodeId, position: Point) -> Result<(), NetworkError> {
        let i = self.node_position(id).ok_or(NetworkError::UnknownNode(id))?;
        if position.iter().any(|c| !c.is_finite()) {
            return Err(NetworkError::NonFinitePosition(id));
        }
        self.nodes[i].position = position;
        if self.dim == 2 {
            self.nodes[i].position[2] = 0.0;
        }
        for k in 0..self.strands.len() {
            let (a, b) = (self.strands[k].a, self.strands[k].b);
            if a == id || b == id {
                let pa = self.nodes[self.node_index[&a]].position;
                let pb = self.nodes[self.node_index[&b]].position;
                self.strands[k].length = distance(pa, pb);
            }
        }
        Ok(())
    }

    /// Strand ids incident to each node, ascending.
    pub fn incidence(&self) -> BTreeMap<NodeId, Vec<StrandId>> {
        let mut inc: BTreeMap<NodeId, Vec<StrandId>> =
            self.nodes.iter().map(|n| (n.id, Vec::new())).collect();
        for s in &self.strands {
            inc.get_mut(&s.a).expect("validated endpoint").push(s.id);
            inc.get_mut(&s.b).expect("validated endpoint").push(s.id);
        }
        for list in inc.values_mut() {
            list.sort_unstable();
        }
        inc
    }

    /// Number of strands (any state) touching `id`.
    pub fn degree(&self, id: NodeId) -> usize {
        self.strands.iter().filter(|s| s.a == id || s.b == id).count()
    }

    /// Number of conducting strands touching `id`.
    pub fn conducting_degree(&self, id: NodeId) -> usize {
        self.strands
            .iter()
            .filter(|s| (s.a == id || s.b == id) && s.state.conducts())
            .count()
    }

    /// Checks the structural invariants. The fruit-body degree rule only
    /// applies to grown networks, so it is opt-in.
    pub fn validate(
        &self,
        field: Option<&SubstrateField>,
        require_connected_fruit: bool,
    ) -> Result<(), NetworkError> {
        if let Some(f) = field {
            if f.dim() != self.dim {
                return Err(NetworkError::DimensionMismatch {
                    network: self.dim,
                    field: f.dim(),
                });
            }
        }
        for s in &self.strands {
            if s.a == s.b {
                return Err(NetworkError::SelfLoop(s.id, s.a));
            }
            let pa = self.node(s.a).ok_or(NetworkError::UnknownNode(s.a))?.position;
            let pb = self.node(s.b).ok_or(NetworkError::UnknownNode(s.b))?.position;
            let actual = distance(pa, pb);
            if (actual - s.length).abs() > LENGTH_TOLERANCE_MM {
                return Err(NetworkError::LengthMismatch {
                    id: s.id,
                    stored: s.length,
                    actual,
                });
            }
        }
        if let Some(f) = field {
            if let Some(n) = self.nodes.iter().find(|n| !f.is_growable(n.position)) {
                return Err(NetworkError::ForbiddenPosition(n.id));
            }
        }
        if require_connected_fruit {
            if let Some(n) = self
                .nodes
                .iter()
                .find(|n| n.kind == NodeKind::FruitBody && self.degree(n.id) == 0)
            {
                return Err(NetworkError::IsolatedFruitBody(n.id));
            }
        }
        Ok(())
    }

    /// Applies an electrical stimulation regime to `targets`, returning the
    /// modified network. The node set never changes.
    ///
    /// `Enhance` also abandons every unlisted strand that shares a branching
    /// junction (degree three or more) with an enhanced strand.
    pub fn electrical_prune(
        &self,
        targets: &[StrandId],
        mode: PruneMode,
    ) -> Result<MyceliumNetwork, NetworkError> {
        for id in targets {
            if self.strand(*id).is_none() {
                return Err(NetworkError::UnknownStrand(*id));
            }
        }
        let mut out = self.clone();
        match mode {
            PruneMode::Abandon => {
                for id in targets {
                    out.set_strand_state(*id, StrandState::Abandoned)?;
                }
            }
            PruneMode::Enhance => {
                let listed: BTreeSet<StrandId> = targets.iter().copied().collect();
                let incidence = self.incidence();
                let mut hubs = BTreeSet::new();
                for id in &listed {
                    let s = self.strand(*id).expect("checked above");
                    for end in [s.a, s.b] {
                        let node = self.node(end).expect("validated endpoint");
                        if node.kind == NodeKind::Junction && incidence[&end].len() >= 3 {
                            hubs.insert(end);
                        }
                    }
                }
                for hub in hubs {
                    for sid in &incidence[&hub] {
                        if !listed.contains(sid) {
                            out.set_strand_state(*sid, StrandState::Abandoned)?;
                        }
                    }
                }
                for id in &listed {
                    out.set_strand_state(*id, StrandState::Enhanced)?;
                }
            }
        }
        Ok(out)
    }
}

/// Builders for small hand-made networks used in examples and tests.
pub mod shapes {
    use super::*;

    /// Two fruit bodies joined through one junction: `A -la- J -lb- B`.
    /// Returns `(network, a, j, b)`.
    pub fn path(la: f64, lb: f64) -> (MyceliumNetwork, NodeId, NodeId, NodeId) {
        let mut net = MyceliumNetwork::new(2).expect("2D");
        let a = net.add_node([0.0, 0.0, 0.0], NodeKind::FruitBody);
        let j = net.add_node([la, 0.0, 0.0], NodeKind::Junction);
        let b = net.add_node([la + lb, 0.0, 0.0], NodeKind::FruitBody);
        net.add_strand(a, j).expect("distinct nodes");
        net.add_strand(j, b).expect("distinct nodes");
        (net, a, j, b)
    }

    /// Y junction with input arms of length `la`, `lb` and output arm `lc`,
    /// all fruit bodies at the ends. Strands are `0: A-J`, `1: B-J`, `2: J-C`.
    /// Returns `(network, a, b, j, c)`.
    pub fn y_junction(
        la: f64,
        lb: f64,
        lc: f64,
    ) -> (MyceliumNetwork, NodeId, NodeId, NodeId, NodeId) {
        let mut net = MyceliumNetwork::new(2).expect("2D");
        let a = net.add_node([-la, 0.0, 0.0], NodeKind::FruitBody);
        let b = net.add_node([0.0, -lb, 0.0], NodeKind::FruitBody);
        let jn = net.add_node([0.0, 0.0, 0.0], NodeKind::Junction);
        let c = net.add_node([lc, 0.0, 0.0], NodeKind::FruitBody);
        net.add_strand(a, jn).expect("distinct nodes");
        net.add_strand(b, jn).expect("distinct nodes");
        net.add_strand(jn, c).expect("distinct nodes");
        (net, a, b, jn, c)
    }
}
