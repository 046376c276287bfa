//! Programmable tip growth.
//!
//! Every growing tip advances one step length per step. Its direction is the
//! previous heading biased up the attractant gradient and down the repellent
//! gradient, then perturbed by a Gaussian angular jitter. A tip that advances
//! branches with probability `min(1, k_b * c * boost)`, where `c` is the
//! nutrient concentration of the cell it leaves. Steps that would enter a
//! forbidden cell are rejected; three consecutive rejections retire the tip.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Execution;
use crate::field::{Layer, SubstrateField};
use crate::geometry::{self, Point};
use crate::network::{MyceliumNetwork, NetworkError, NodeKind, TipState};
use crate::normal::standard_normal;

pub const GROWTH_FORMAT: &str = "myceliumsim/growth/v1";

#[derive(Debug, Error, PartialEq)]
pub enum GrowthError {
    #[error("invalid growth parameter: {0}")]
    Params(String),
    #[error("network is {network}D but field is {field}D")]
    Dimension { network: usize, field: usize },
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("inoculation site {0:?} is not growable")]
    ForbiddenInoculum(Point),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GrowthParams {
    /// Advance per step, mm.
    pub step_length_mm: f64,
    /// Branching coefficient `k_b`.
    pub branching: f64,
    /// Attractant gradient weight.
    pub tropism: f64,
    /// Repellent gradient weight.
    pub repulsion: f64,
    /// Standard deviation of the per-step heading jitter, radians.
    pub angular_noise_rad: f64,
    /// Deviation of a new branch from its parent heading, degrees.
    pub branch_angle_deg: f64,
    pub max_steps: u32,
    pub max_nodes: usize,
    /// Branching multiplier while a high-voltage pulse is applied.
    pub boost: f64,
    /// Half-open range of network ages `[start, end)` during which the boost
    /// applies. `None` means no stimulus.
    pub boost_window: Option<(u32, u32)>,
}

impl Default for GrowthParams {
    fn default() -> Self {
        Self {
            step_length_mm: 1.0,
            branching: 0.1,
            tropism: 0.0,
            repulsion: 0.0,
            angular_noise_rad: 0.1,
            branch_angle_deg: 45.0,
            max_steps: 50,
            max_nodes: 10_000,
            boost: 1.0,
            boost_window: None,
        }
    }
}

impl GrowthParams {
    pub fn validate(&self) -> Result<(), GrowthError> {
        let bad = |m: &str| Err(GrowthError::Params(m.to_string()));
        if !(self.step_length_mm > 0.0 && self.step_length_mm.is_finite()) {
            return bad("step length must be positive");
        }
        if !(self.branching >= 0.0 && self.branching.is_finite()) {
            return bad("branching coefficient must be non-negative");
        }
        if !(self.tropism >= 0.0 && self.repulsion >= 0.0) {
            return bad("tropism and repulsion weights must be non-negative");
        }
        if !(self.angular_noise_rad >= 0.0 && self.angular_noise_rad.is_finite()) {
            return bad("angular noise must be non-negative");
        }
        if !self.branch_angle_deg.is_finite() {
            return bad("branch angle must be finite");
        }
        if !(self.boost >= 1.0 && self.boost.is_finite()) {
            return bad("branching boost must be at least 1");
        }
        if let Some((a, b)) = self.boost_window {
            if a > b {
                return bad("boost window start exceeds end");
            }
        }
        Ok(())
    }

    /// Boost factor in effect for a network of the given age.
    pub fn boost_at(&self, age: u32) -> f64 {
        match self.boost_window {
            Some((start, end)) if (start..end).contains(&age) => self.boost,
            _ => 1.0,
        }
    }
}

/// A growth starting point. Fruit-body inocula create the fruit body plus
/// a first tip one step length away along `heading`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Inoculum {
    pub position: Vec<f64>,
    pub heading: Vec<f64>,
    #[serde(default)]
    pub fruit_body: bool,
}

fn to_point(v: &[f64]) -> Point {
    let mut p = [0.0; 3];
    for (slot, x) in p.iter_mut().zip(v) {
        *slot = *x;
    }
    p
}

/// Builds the starting network for a set of inocula.
pub fn inoculate(
    field: &SubstrateField,
    params: &GrowthParams,
    inocula: &[Inoculum],
) -> Result<MyceliumNetwork, GrowthError> {
    params.validate()?;
    let mut net = MyceliumNetwork::new(field.dim())?;
    for site in inocula {
        let mut pos = to_point(&site.position);
        let mut heading = to_point(&site.heading);
        if field.dim() == 2 {
            pos[2] = 0.0;
            heading[2] = 0.0;
        }
        let heading = geometry::normalize(heading)
            .ok_or_else(|| GrowthError::Params("inoculum heading must be non-zero".into()))?;
        if !field.is_growable(pos) {
            return Err(GrowthError::ForbiddenInoculum(pos));
        }
        if site.fruit_body {
            let fruit = net.add_node(pos, NodeKind::FruitBody);
            let tip_pos = geometry::add(pos, geometry::scale(heading, params.step_length_mm));
            if !segment_growable(field, pos, tip_pos) {
                return Err(GrowthError::ForbiddenInoculum(tip_pos));
            }
            let tip = net.add_node(tip_pos, NodeKind::Tip);
            net.set_tip_state(tip, TipState::new(heading))?;
            net.add_strand(fruit, tip)?;
        } else {
            let tip = net.add_node(pos, NodeKind::Tip);
            net.set_tip_state(tip, TipState::new(heading))?;
        }
    }
    Ok(net)
}

/// Checks that a straight advance stays inside growable cells, sampling at
/// a quarter-cell spacing.
fn segment_growable(field: &SubstrateField, from: Point, to: Point) -> bool {
    let len = geometry::distance(from, to);
    let samples = ((len / (field.cell_size() * 0.25)).ceil() as usize).max(1);
    (1..=samples).all(|k| {
        let t = k as f64 / samples as f64;
        field.is_growable(geometry::add(from, geometry::scale(geometry::sub(to, from), t)))
    })
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StepReport {
    pub advanced: usize,
    pub branches: usize,
    pub rejected: usize,
    pub newly_blocked: usize,
    /// The network had no tip able to grow; nothing was done.
    pub no_tips: bool,
    /// The node budget stopped the step early.
    pub budget_exhausted: bool,
}

struct Draws {
    jitter: f64,
    spin: f64,
    branch: f64,
    branch_left: bool,
}

fn turn(dim: usize, dir: Point, angle: f64, spin: f64) -> Point {
    if dim == 2 {
        geometry::rotate_z(dir, angle)
    } else {
        let axis = geometry::rotate_about(
            geometry::any_perpendicular(dir),
            dir,
            std::f64::consts::TAU * spin,
        );
        geometry::rotate_about(dir, axis, angle)
    }
}

/// Advances every growing tip once. Tips are visited in ascending id order
/// and consume a fixed number of random draws each, so the outcome depends
/// only on the inputs and the generator state.
pub fn grow_step<R: Rng + ?Sized>(
    network: &mut MyceliumNetwork,
    field: &SubstrateField,
    params: &GrowthParams,
    rng: &mut R,
) -> Result<StepReport, GrowthError> {
    params.validate()?;
    if network.dim() != field.dim() {
        return Err(GrowthError::Dimension {
            network: network.dim(),
            field: field.dim(),
        });
    }
    let mut report = StepReport::default();
    let tips = network.growing_tips();
    if tips.is_empty() {
        report.no_tips = true;
        return Ok(report);
    }
    let boost = params.boost_at(network.age());
    let dim = network.dim();
    let branch_angle = params.branch_angle_deg.to_radians();

    for tip in tips {
        let draws = Draws {
            jitter: standard_normal(rng) * params.angular_noise_rad,
            spin: rng.random::<f64>(),
            branch: rng.random::<f64>(),
            branch_left: rng.random::<bool>(),
        };
        let pos = network.node(tip).expect("tip exists").position;
        let state = *network.tip_state(tip).expect("tip has state");

        let bias = geometry::sub(
            geometry::scale(field.gradient(Layer::Attractant, pos), params.tropism),
            geometry::scale(field.gradient(Layer::Repellent, pos), params.repulsion),
        );
        let mut base = geometry::add(state.heading, bias);
        if dim == 2 {
            base[2] = 0.0;
        }
        let dir = geometry::normalize(base).unwrap_or(state.heading);
        let dir = turn(dim, dir, draws.jitter, draws.spin);
        let target = geometry::add(pos, geometry::scale(dir, params.step_length_mm));

        if !segment_growable(field, pos, target) {
            let s = network.tip_state_mut(tip).expect("tip has state");
            s.rejections += 1;
            report.rejected += 1;
            if s.is_blocked() {
                report.newly_blocked += 1;
            }
            continue;
        }

        let p_branch = (params.branching * field.value_at(Layer::Nutrient, pos) * boost).min(1.0);
        let signed = if draws.branch_left { branch_angle } else { -branch_angle };
        let branch_dir = turn(dim, dir, signed, draws.spin);
        let branch_target = geometry::add(pos, geometry::scale(branch_dir, params.step_length_mm));
        let mut branching =
            draws.branch < p_branch && segment_growable(field, pos, branch_target);

        let room = params.max_nodes.saturating_sub(network.nodes().len());
        if room == 0 {
            report.budget_exhausted = true;
            break;
        }
        if branching && room < 2 {
            branching = false;
            report.budget_exhausted = true;
        }

        network.set_kind(tip, NodeKind::Junction)?;
        let next = network.add_node(target, NodeKind::Tip);
        network.set_tip_state(next, TipState::new(dir))?;
        network.add_strand(tip, next)?;
        report.advanced += 1;
        if branching {
            let side = network.add_node(branch_target, NodeKind::Tip);
            network.set_tip_state(side, TipState::new(branch_dir))?;
            network.add_strand(tip, side)?;
            report.branches += 1;
        }
    }
    network.set_age(network.age() + 1);
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    MaxSteps,
    MaxNodes,
    AllTipsBlocked,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::MaxSteps => "max-steps",
            Termination::MaxNodes => "max-nodes",
            Termination::AllTipsBlocked => "all-tips-blocked",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthOutcome {
    pub network: MyceliumNetwork,
    pub steps: u32,
    pub branches: usize,
    pub termination: Termination,
}

/// Grows `network` from `seed` until the step or node budget runs out or no
/// tip can advance. A zero step budget returns the input unchanged.
pub fn grow(
    network: &MyceliumNetwork,
    field: &SubstrateField,
    params: &GrowthParams,
    seed: u64,
) -> Result<GrowthOutcome, GrowthError> {
    params.validate()?;
    if network.dim() != field.dim() {
        return Err(GrowthError::Dimension {
            network: network.dim(),
            field: field.dim(),
        });
    }
    let mut net = network.clone();
    if params.max_steps == 0 {
        return Ok(GrowthOutcome {
            network: net,
            steps: 0,
            branches: 0,
            termination: Termination::MaxSteps,
        });
    }
    net.set_seed(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut branches = 0;
    let mut steps = 0;
    let mut termination = Termination::MaxSteps;
    while steps < params.max_steps {
        if net.nodes().len() >= params.max_nodes {
            termination = Termination::MaxNodes;
            break;
        }
        let report = grow_step(&mut net, field, params, &mut rng)?;
        if report.no_tips {
            termination = Termination::AllTipsBlocked;
            break;
        }
        steps += 1;
        branches += report.branches;
        if report.budget_exhausted {
            termination = Termination::MaxNodes;
            break;
        }
    }
    if termination == Termination::MaxSteps && net.growing_tips().is_empty() {
        termination = Termination::AllTipsBlocked;
    }
    Ok(GrowthOutcome {
        network: net,
        steps,
        branches,
        termination,
    })
}

/// Grows one network per seed.
pub fn grow_ensemble(
    network: &MyceliumNetwork,
    field: &SubstrateField,
    params: &GrowthParams,
    seeds: &[u64],
    exec: Execution,
) -> Vec<Result<GrowthOutcome, GrowthError>> {
    exec.map(seeds, |&seed| grow(network, field, params, seed))
}

/// On-disk growth configuration: parameters plus inoculation sites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthConfig {
    pub format: String,
    #[serde(default)]
    pub growth: GrowthParams,
    #[serde(default, rename = "inoculum")]
    pub inocula: Vec<Inoculum>,
}

impl GrowthConfig {
    pub fn from_toml(text: &str) -> Result<Self, GrowthError> {
        let cfg: GrowthConfig =
            toml::from_str(text).map_err(|e| GrowthError::Params(e.to_string()))?;
        if cfg.format != GROWTH_FORMAT {
            return Err(GrowthError::Params(format!(
                "expected format \"{GROWTH_FORMAT}\", found \"{}\"",
                cfg.format
            )));
        }
        cfg.growth.validate()?;
        Ok(cfg)
    }
}
