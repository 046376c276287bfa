//! Simulation and analysis toolkit for fungal computing.
//!
//! The crate covers four areas:
//!
//! * [`field`], [`network`], [`growth`] and [`netfile`]: mycelium networks as
//!   geometric graphs embedded in a substrate, grown under nutrient,
//!   chemotactic, geometric and electrical control.
//! * [`spike`] and [`scenario`]: a discrete-event engine moving voltage spikes
//!   along strands with collision rules at junctions.
//! * [`logic`]: truth-table enumeration of the Boolean function a network
//!   realizes between fruit-body ports, with an analytical oracle.
//! * [`ephys`]: slow multi-channel recordings, drift removal, spike detection,
//!   statistics, spike-train classification and synthetic data generation.
//!
//! [`capacity`] estimates junction counts from hyphal tip density.
//!
//! Batch entry points accept an [`Execution`] policy. With the `parallel`
//! feature (on by default) the parallel policy fans work out over rayon;
//! without it every policy runs sequentially. Results are identical either way.

pub mod capacity;
pub mod ephys;
pub mod exec;
pub mod field;
pub mod geometry;
pub mod growth;
pub mod logic;
pub mod netfile;
pub mod network;
pub mod normal;
pub mod scenario;
pub mod spike;

pub use exec::Execution;
pub use field::SubstrateField;
pub use growth::{GrowthParams, Inoculum};
pub use network::{MyceliumNetwork, NodeId, NodeKind, StrandId, StrandState};
pub use spike::{ArrivalLog, CollisionRule, SimConfig, SpikeSim};
