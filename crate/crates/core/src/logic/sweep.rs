//! Re-deriving the realized function under small geometry edits.

use super::{classify_function, realize_truth_table_with, FunctionClass, LogicError, PortAssignment, TruthTable};
use crate::exec::Execution;
use crate::geometry::{add, normalize, scale, sub};
use crate::network::{MyceliumNetwork, NodeId, StrandId, StrandState};
use crate::spike::SimConfig;

#[derive(Debug, Clone, PartialEq)]
pub enum GeometryEdit {
    /// Sets a strand's length by sliding its free (degree-1) endpoint along
    /// the strand direction.
    Lengthen { strand: StrandId, length_mm: f64 },
    Abandon { strand: StrandId },
    AddStrand { a: NodeId, b: NodeId },
    Combined(Vec<GeometryEdit>),
}

impl GeometryEdit {
    pub fn apply(&self, net: &mut MyceliumNetwork) -> Result<(), LogicError> {
        match self {
            GeometryEdit::Lengthen { strand, length_mm } => {
                if !(length_mm.is_finite() && *length_mm > 0.0) {
                    return Err(LogicError::Edit(format!("length {length_mm} must be positive")));
                }
                let s = net
                    .strand(*strand)
                    .ok_or_else(|| LogicError::Edit(format!("unknown strand {strand}")))?
                    .clone();
                let (fixed, free) = if net.degree(s.b) == 1 {
                    (s.a, s.b)
                } else if net.degree(s.a) == 1 {
                    (s.b, s.a)
                } else {
                    return Err(LogicError::Edit(format!(
                        "strand {strand} has no free endpoint to move"
                    )));
                };
                let p0 = net.node(fixed).expect("endpoint").position;
                let p1 = net.node(free).expect("endpoint").position;
                let dir = normalize(sub(p1, p0))
                    .ok_or_else(|| LogicError::Edit(format!("strand {strand} has zero length")))?;
                net.move_node(free, add(p0, scale(dir, *length_mm)))?;
            }
            GeometryEdit::Abandon { strand } => {
                net.set_strand_state(*strand, StrandState::Abandoned)?;
            }
            GeometryEdit::AddStrand { a, b } => {
                net.add_strand(*a, *b)?;
            }
            GeometryEdit::Combined(edits) => {
                for e in edits {
                    e.apply(net)?;
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepEntry {
    /// `None` for the unedited base network.
    pub edit: Option<GeometryEdit>,
    pub result: Result<TruthTable, LogicError>,
    pub class: Option<FunctionClass>,
    /// The class differs from the base class.
    pub changed: bool,
}

/// Realizes the base network and then each edited copy. A failing edit is
/// recorded in its entry and the sweep continues.
pub fn geometry_sweep(
    base: &MyceliumNetwork,
    edits: &[GeometryEdit],
    assignment: &PortAssignment,
    config: &SimConfig,
    exec: Execution,
) -> Vec<SweepEntry> {
    let run = |edit: Option<&GeometryEdit>| -> Result<TruthTable, LogicError> {
        let mut net = base.clone();
        if let Some(e) = edit {
            e.apply(&mut net)?;
        }
        // parallelism is spent across edits, so each table runs sequentially
        Ok(realize_truth_table_with(&net, assignment, config, Execution::Sequential)?.table)
    };
    let base_result = run(None);
    let base_class = base_result.as_ref().ok().map(classify_function);
    let mut out = vec![SweepEntry {
        edit: None,
        class: base_class.clone(),
        result: base_result,
        changed: false,
    }];
    out.extend(exec.map(edits, |e| {
        let result = run(Some(e));
        let class = result.as_ref().ok().map(classify_function);
        SweepEntry {
            edit: Some(e.clone()),
            changed: class.is_some() && class != base_class,
            class,
            result,
        }
    }));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::shapes;
    use std::collections::BTreeSet;

    #[test]
    fn lengthening_an_arm_turns_xor_into_or() {
        let (net, a, b, _, c) = shapes::y_junction(10.0, 10.0, 10.0);
        let ports = PortAssignment::new(vec![a, b], c, (0.0, 200.0));
        let edits = vec![
            GeometryEdit::Lengthen { strand: StrandId(1), length_mm: 40.0 },
            GeometryEdit::Abandon { strand: StrandId(0) },
            GeometryEdit::Lengthen { strand: StrandId(9), length_mm: 4.0 },
        ];
        let sweep = geometry_sweep(&net, &edits, &ports, &SimConfig::default(), Execution::Sequential);
        assert_eq!(sweep.len(), 4);
        assert_eq!(sweep[0].class, Some(FunctionClass::Xor));
        assert_eq!(sweep[1].class, Some(FunctionClass::Or));
        assert!(sweep[1].changed);
        assert_eq!(sweep[2].result.as_ref().unwrap().to_string(), "0011");
        assert!(sweep[3].result.is_err());
        assert!(!sweep[3].changed);
        let classes: BTreeSet<String> =
            sweep.iter().filter_map(|e| e.class.as_ref().map(|c| c.to_string())).collect();
        assert!(classes.len() >= 2);
    }

    #[test]
    fn lengthen_moves_the_leaf() {
        let (mut net, a, _, _, _) = shapes::y_junction(10.0, 10.0, 10.0);
        GeometryEdit::Lengthen { strand: StrandId(0), length_mm: 25.0 }
            .apply(&mut net)
            .unwrap();
        assert_eq!(net.node(a).unwrap().position, [-25.0, 0.0, 0.0]);
        assert_eq!(net.strand(StrandId(0)).unwrap().length, 25.0);
    }

    #[test]
    fn sweep_is_execution_independent() {
        let (net, a, b, _, c) = shapes::y_junction(10.0, 12.0, 10.0);
        let ports = PortAssignment::new(vec![a, b], c, (0.0, 200.0));
        let edits: Vec<_> = (1..8)
            .map(|k| GeometryEdit::Lengthen { strand: StrandId(1), length_mm: 5.0 * k as f64 })
            .collect();
        let cfg = SimConfig::default();
        assert_eq!(
            geometry_sweep(&net, &edits, &ports, &cfg, Execution::Sequential),
            geometry_sweep(&net, &edits, &ports, &cfg, Execution::Parallel)
        );
    }
}
