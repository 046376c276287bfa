//! Boolean functions realized by spike collisions.
//!
//! Inputs are fruit bodies that fire together at `t = 0`. The output bit for
//! an input vector is 1 when at least one spike reaches the output node inside
//! the readout window. Bit `k` of a vector index selects input `k`.

mod oracle;
mod sweep;

pub use oracle::{brute_force_oracle, OracleError, ORACLE_MAX_STRANDS};
pub use sweep::{geometry_sweep, GeometryEdit, SweepEntry};

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::exec::Execution;
use crate::network::{MyceliumNetwork, NetworkError, NodeId, NodeKind};
use crate::spike::{ArrivalLog, SimConfig, SimError, SpikeSim};

/// Largest supported input count; enumeration costs `2^n` simulations.
pub const MAX_ARITY: usize = 16;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum LogicError {
    #[error("{0} inputs exceed the limit of {MAX_ARITY}")]
    Arity(usize),
    #[error("invalid port assignment: {0}")]
    Assignment(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("invalid edit: {0}")]
    Edit(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PortAssignment {
    pub inputs: Vec<NodeId>,
    pub output: NodeId,
    pub amplitude_mv: f64,
    /// Inclusive readout window `[lo, hi]` in seconds.
    pub window: (f64, f64),
}

impl PortAssignment {
    pub fn new(inputs: Vec<NodeId>, output: NodeId, window: (f64, f64)) -> Self {
        Self {
            inputs,
            output,
            amplitude_mv: 1.0,
            window,
        }
    }

    pub fn arity(&self) -> usize {
        self.inputs.len()
    }

    pub fn validate(&self, network: &MyceliumNetwork) -> Result<(), LogicError> {
        if self.inputs.len() > MAX_ARITY {
            return Err(LogicError::Arity(self.inputs.len()));
        }
        let bad = |m: String| Err(LogicError::Assignment(m));
        let mut seen = BTreeSet::new();
        for id in self.inputs.iter().chain(std::iter::once(&self.output)) {
            if !seen.insert(*id) {
                return bad(format!("port {id} is listed twice"));
            }
        }
        for id in &self.inputs {
            match network.node(*id) {
                None => return bad(format!("input {id} does not exist")),
                Some(n) if n.kind != NodeKind::FruitBody => {
                    return bad(format!("input {id} is not a fruit body"))
                }
                _ => {}
            }
        }
        match network.node(self.output) {
            None => return bad(format!("output {} does not exist", self.output)),
            Some(n) if !n.kind.is_terminal() => {
                return bad(format!("output {} is a junction and never records arrivals", self.output))
            }
            _ => {}
        }
        let (lo, hi) = self.window;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi && hi > 0.0) {
            return bad(format!("readout window [{lo}, {hi}] is empty"));
        }
        if !(self.amplitude_mv > 0.0 && self.amplitude_mv.is_finite()) {
            return bad("injection amplitude must be positive".into());
        }
        Ok(())
    }

    /// The simulation config used for readout: horizon equals the window end.
    pub fn readout_config(&self, config: &SimConfig) -> SimConfig {
        SimConfig {
            horizon_s: self.window.1,
            ..*config
        }
    }

    /// Input nodes firing for vector index `v`, in assignment order.
    pub fn firing(&self, v: usize) -> impl Iterator<Item = NodeId> + '_ {
        self.inputs
            .iter()
            .enumerate()
            .filter(move |(k, _)| v >> k & 1 == 1)
            .map(|(_, id)| *id)
    }
}

/// Output bit per input vector; `bits[v]` is the response to vector `v`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TruthTable {
    arity: usize,
    bits: Vec<bool>,
}

impl TruthTable {
    pub fn new(arity: usize, bits: Vec<bool>) -> Result<Self, LogicError> {
        if arity > MAX_ARITY {
            return Err(LogicError::Arity(arity));
        }
        if bits.len() != 1 << arity {
            return Err(LogicError::Assignment(format!(
                "table of arity {arity} needs {} entries, got {}",
                1usize << arity,
                bits.len()
            )));
        }
        Ok(Self { arity, bits })
    }

    /// Parses a bit string such as `"0110"`.
    pub fn from_bit_str(s: &str) -> Result<Self, LogicError> {
        let bits: Vec<bool> = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(LogicError::Assignment(format!("bad bit {c:?}"))),
            })
            .collect::<Result<_, _>>()?;
        if !bits.len().is_power_of_two() {
            return Err(LogicError::Assignment(format!("length {} is not a power of two", bits.len())));
        }
        Self::new(bits.len().trailing_zeros() as usize, bits)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, v: usize) -> bool {
        self.bits[v]
    }

    /// Hex encoding of the table with entry `v` as bit `v`, most significant
    /// nibble first.
    pub fn index_hex(&self) -> String {
        let nibbles = self.bits.len().div_ceil(4);
        (0..nibbles)
            .rev()
            .map(|n| {
                let mut d = 0u32;
                for b in 0..4 {
                    if self.bits.get(n * 4 + b).copied().unwrap_or(false) {
                        d |= 1 << b;
                    }
                }
                char::from_digit(d, 16).expect("nibble")
            })
            .collect()
    }

    /// Adding a firing input never turns a 1 into a 0.
    pub fn is_monotone(&self) -> bool {
        (0..self.bits.len()).all(|v| {
            !self.bits[v] || (0..self.arity).all(|k| self.bits[v | (1 << k)])
        })
    }

    /// The table obtained when input `k` of the new ordering is input
    /// `perm[k]` of this one.
    pub fn permute_inputs(&self, perm: &[usize]) -> TruthTable {
        let bits = (0..self.bits.len())
            .map(|v| {
                let mut old = 0;
                for (k, &src) in perm.iter().enumerate() {
                    if v >> k & 1 == 1 {
                        old |= 1 << src;
                    }
                }
                self.bits[old]
            })
            .collect();
        TruthTable {
            arity: self.arity,
            bits,
        }
    }
}

impl fmt::Display for TruthTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bits {
            f.write_str(if *b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FunctionClass {
    False,
    True,
    And,
    Or,
    Xor,
    Nand,
    Nor,
    Xnor,
    Other { arity: usize, index_hex: String },
}

impl fmt::Display for FunctionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionClass::False => f.write_str("FALSE"),
            FunctionClass::True => f.write_str("TRUE"),
            FunctionClass::And => f.write_str("AND"),
            FunctionClass::Or => f.write_str("OR"),
            FunctionClass::Xor => f.write_str("XOR"),
            FunctionClass::Nand => f.write_str("NAND"),
            FunctionClass::Nor => f.write_str("NOR"),
            FunctionClass::Xnor => f.write_str("XNOR"),
            FunctionClass::Other { arity, index_hex } => write!(f, "other(n={arity},0x{index_hex})"),
        }
    }
}

/// Names constant tables of any arity and the six two-input gates.
pub fn classify_function(table: &TruthTable) -> FunctionClass {
    let bits = table.bits();
    if bits.iter().all(|b| !b) {
        return FunctionClass::False;
    }
    if bits.iter().all(|b| *b) {
        return FunctionClass::True;
    }
    if table.arity() == 2 {
        match bits {
            [false, false, false, true] => return FunctionClass::And,
            [false, true, true, true] => return FunctionClass::Or,
            [false, true, true, false] => return FunctionClass::Xor,
            [true, true, true, false] => return FunctionClass::Nand,
            [true, false, false, false] => return FunctionClass::Nor,
            [true, false, false, true] => return FunctionClass::Xnor,
            _ => {}
        }
    }
    FunctionClass::Other {
        arity: table.arity(),
        index_hex: table.index_hex(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub table: TruthTable,
    /// Arrival log for each input vector, by vector index.
    pub logs: Vec<ArrivalLog>,
    /// The output cannot be reached from any input over conducting strands.
    pub unreachable_output: bool,
}

/// True if some input reaches the output over conducting strands.
pub fn output_reachable(network: &MyceliumNetwork, assignment: &PortAssignment) -> bool {
    let incidence = network.incidence();
    let mut seen = BTreeSet::from([assignment.output]);
    let mut queue = VecDeque::from([assignment.output]);
    while let Some(n) = queue.pop_front() {
        if assignment.inputs.contains(&n) {
            return true;
        }
        for sid in &incidence[&n] {
            let s = network.strand(*sid).expect("incident strand exists");
            if s.state.conducts() {
                let next = s.other(n);
                if seen.insert(next) {
                    queue.push_back(next);
                }
            }
        }
    }
    false
}

/// Runs one fresh simulation for input vector `v`.
pub fn simulate_vector(
    network: &MyceliumNetwork,
    assignment: &PortAssignment,
    config: &SimConfig,
    v: usize,
) -> Result<ArrivalLog, LogicError> {
    let mut sim = SpikeSim::new(network, assignment.readout_config(config))?;
    for node in assignment.firing(v) {
        sim.inject_spike(node, 0.0, assignment.amplitude_mv)?;
    }
    Ok(sim.run())
}

/// Enumerates all `2^n` input vectors, one independent simulation each.
pub fn realize_truth_table(
    network: &MyceliumNetwork,
    assignment: &PortAssignment,
    config: &SimConfig,
) -> Result<Realization, LogicError> {
    realize_truth_table_with(network, assignment, config, Execution::default())
}

pub fn realize_truth_table_with(
    network: &MyceliumNetwork,
    assignment: &PortAssignment,
    config: &SimConfig,
    exec: Execution,
) -> Result<Realization, LogicError> {
    assignment.validate(network)?;
    assignment.readout_config(config).validate()?;
    let n = assignment.arity();
    let logs = exec
        .map_range(1 << n, |v| simulate_vector(network, assignment, config, v))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let (lo, hi) = assignment.window;
    let bits = logs
        .iter()
        .map(|log| log.hit_within(assignment.output, lo, hi))
        .collect();
    Ok(Realization {
        table: TruthTable::new(n, bits)?,
        logs,
        unreachable_output: !output_reachable(network, assignment),
    })
}
