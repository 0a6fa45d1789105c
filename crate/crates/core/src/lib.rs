//! Max-plus algebra and simulation of acyclic fork-join queueing networks.
//!
//! The service completion times of an acyclic fork-join network evolve as
//! `x(k) = A(k) ⊗ x(k-1)` over the max-plus semiring, with `A(k)` built
//! from the per-cycle service times and the network's support matrix.
//! The long-run cycle time equals the largest mean service time, whatever
//! the topology; [`security`] applies this to a six-stage incident
//! handling model.

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod maxplus;
pub mod network;
pub mod oracle;
pub mod security;
pub mod timing;
pub mod verify;

pub use error::{Error, Result};
pub use maxplus::{Matrix, MaxPlus};
pub use network::{Network, NetworkSpec, NodeSpec, Permutation, SupportKind, SupportMatrix};
pub use timing::{
    Coupling, DistributionSpec, ScenarioSampler, ServiceSource, ServiceTable, ServiceTimeMatrix,
};
