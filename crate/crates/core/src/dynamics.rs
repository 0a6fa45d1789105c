//! The max-plus recurrence `x(k) = A(k) ⊗ x(k-1)` and cycle-time estimation.
//!
//! `A(k) = ⊕_{j=0}^{p} (T_k ⊗ Gᵀ)^j ⊗ T_k`, where `G` is the support matrix
//! and `p` the longest path length. The tandem counterpart `B(k)` uses the
//! shift matrix `H` and runs the sum up to `j = n`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::maxplus::{norm, Matrix, MaxPlus};
use crate::network::{Network, SupportMatrix};
use crate::timing::{ScenarioSampler, ServiceSource, ServiceTimeMatrix};

/// `x(k)`: the k-th service completion time at every node.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    values: Vec<MaxPlus>,
    k: u64,
}

impl StateVector {
    pub fn new(values: Vec<MaxPlus>, k: u64) -> Self {
        StateVector { values, k }
    }

    /// `x(0) = (0, …, 0)`, the idle start.
    pub fn zeros(n: usize) -> Self {
        StateVector {
            values: vec![MaxPlus::ONE; n],
            k: 0,
        }
    }

    pub fn from_f64(values: &[f64], k: u64) -> Result<Self> {
        Ok(StateVector {
            values: values
                .iter()
                .map(|&v| MaxPlus::from_extended(v))
                .collect::<Result<_>>()?,
            k,
        })
    }

    pub fn values(&self) -> &[MaxPlus] {
        &self.values
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.value()).collect()
    }

    pub fn cycle(&self) -> u64 {
        self.k
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `‖x‖ = max_i x_i`.
    pub fn norm(&self) -> Result<MaxPlus> {
        norm(&self.values)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransitionKind {
    Network,
    Tandem,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransitionMatrix {
    matrix: Matrix,
    kind: TransitionKind,
}

impl TransitionMatrix {
    pub fn new(matrix: Matrix, kind: TransitionKind) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                op: "transition",
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        Ok(TransitionMatrix { matrix, kind })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn kind(&self) -> TransitionKind {
        self.kind
    }
}

/// `⊕_{j=0}^{depth} (T ⊗ Sᵀ)^j ⊗ T`, evaluated Horner-style as
/// `acc ← (T ⊗ Sᵀ ⊗ acc) ⊕ E`, then `acc ⊗ T`.
fn transition_sum(t: &ServiceTimeMatrix, support: &Matrix, depth: usize) -> Result<Matrix> {
    let tm = t.matrix();
    if tm.shape() != support.shape() {
        return Err(Error::DimensionMismatch {
            op: "build_transition",
            left: tm.shape(),
            right: support.shape(),
        });
    }
    let n = tm.rows();
    let step = tm.otimes(&support.transpose())?;
    let identity = Matrix::identity(n);
    let mut acc = identity.clone();
    for _ in 0..depth {
        acc = step.otimes(&acc)?.oplus(&identity)?;
    }
    acc.otimes(tm)
}

/// Builds `A(k)` for a network with support matrix `g` and longest path `p`.
pub fn build_a(t: &ServiceTimeMatrix, g: &SupportMatrix, p: usize) -> Result<TransitionMatrix> {
    TransitionMatrix::new(transition_sum(t, g.matrix(), p)?, TransitionKind::Network)
}

/// Builds the tandem `B(k)` from `H`, summing up to `j = n`.
pub fn build_b(t: &ServiceTimeMatrix, h: &SupportMatrix) -> Result<TransitionMatrix> {
    TransitionMatrix::new(
        transition_sum(t, h.matrix(), h.size())?,
        TransitionKind::Tandem,
    )
}

/// `x(k) = A(k) ⊗ x(k-1)`.
pub fn step(x_prev: &StateVector, a: &TransitionMatrix) -> Result<StateVector> {
    Ok(StateVector {
        values: a.matrix().apply(&x_prev.values)?,
        k: x_prev.k + 1,
    })
}

/// Iterator over `x(1), x(2), …` driven by any [`ServiceSource`].
pub struct Recurrence<'a, S: ServiceSource> {
    support: SupportMatrix,
    depth: usize,
    source: &'a S,
    state: StateVector,
}

impl<'a, S: ServiceSource> Recurrence<'a, S> {
    pub fn new(network: &Network, source: &'a S, x0: StateVector) -> Result<Self> {
        let n = network.node_count();
        for (what, len) in [("service source", source.node_count()), ("x0", x0.len())] {
            if len != n {
                return Err(Error::DimensionMismatch {
                    op: what,
                    left: (n, 1),
                    right: (len, 1),
                });
            }
        }
        Ok(Recurrence {
            support: network.support_matrix(),
            depth: network.longest_path_length(),
            source,
            state: x0,
        })
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }
}

impl<S: ServiceSource> Iterator for Recurrence<'_, S> {
    type Item = StateVector;

    fn next(&mut self) -> Option<StateVector> {
        let t = self.source.service_times(self.state.k + 1);
        let a = build_a(&t, &self.support, self.depth).expect("shapes checked in Recurrence::new");
        self.state = step(&self.state, &a).expect("shapes checked in Recurrence::new");
        Some(self.state.clone())
    }
}

/// Summary of one simulated trajectory.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    #[serde(serialize_with = "serialize_state")]
    pub final_state: StateVector,
    /// `(k, ‖x(k)‖)` at every `thin`-th cycle, plus the last one.
    pub norms: Vec<(u64, f64)>,
    /// `max_i (x_i(K) - x_i(K0)) / (K - K0)`, see [`gamma_from_states`].
    pub gamma_hat: f64,
}

fn serialize_state<S: serde::Serializer>(
    x: &StateVector,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(x.values.iter().map(|v| v.value()))
}

/// Burn-in cycle used by the cycle-time estimator for a run of `steps`.
pub fn burn_in(steps: u64) -> u64 {
    if steps < 2 {
        0
    } else {
        (steps / 2).max(1)
    }
}

/// Cycle time from two states `x(K0)` and `x(K)` with `K0 < K`:
/// `‖x(K) − x(K0)‖ / (K − K0)`.
///
/// With `K0 ≥ 1` this is exact for deterministic service times: the
/// completion times of the slowest node grow by exactly `max τ` per cycle
/// from the first cycle on, and no node grows faster.
pub fn gamma_from_states(early: &StateVector, late: &StateVector) -> f64 {
    let span = (late.k - early.k) as f64;
    late.values
        .iter()
        .zip(&early.values)
        .map(|(l, e)| l.value() - e.value())
        .fold(f64::NEG_INFINITY, f64::max)
        / span
}

/// Runs `steps` cycles from `x0`, keeping every `thin`-th norm.
pub fn simulate<S: ServiceSource>(
    network: &Network,
    source: &S,
    steps: u64,
    x0: StateVector,
    thin: u64,
) -> Result<Trajectory> {
    if steps == 0 {
        return Err(Error::ZeroCount("steps"));
    }
    let thin = thin.max(1);
    // cycles are counted from the supplied state
    let x0 = StateVector { k: 0, ..x0 };
    let start = x0.clone();
    let k0 = burn_in(steps);
    let mut anchor = if k0 == 0 { Some(start) } else { None };
    let mut norms = Vec::new();
    let mut last = None;
    for x in Recurrence::new(network, source, x0)?.take(steps as usize) {
        let k = x.k;
        if k % thin == 0 || k == steps {
            norms.push((k, x.norm()?.value()));
        }
        if k == k0 {
            anchor = Some(x.clone());
        }
        last = Some(x);
    }
    let final_state = last.expect("steps >= 1");
    let gamma_hat = gamma_from_states(anchor.as_ref().expect("burn-in within run"), &final_state);
    Ok(Trajectory {
        final_state,
        norms,
        gamma_hat,
    })
}

/// Monte Carlo estimate of the cycle time `γ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CycleTimeEstimate {
    pub gamma_hat: f64,
    pub steps: u64,
    pub replications: u64,
    /// Standard error of `gamma_hat` across replications (0 for one run).
    pub stderr: f64,
    /// Per-replication estimates, in replication order.
    pub per_replication: Vec<f64>,
}

/// Averages independent replications, each started from `x(0) = 0` and
/// driven by [`ScenarioSampler::replication`]. Replications run on the
/// rayon pool; results do not depend on scheduling.
pub fn estimate_cycle_time(
    network: &Network,
    sampler: &ScenarioSampler,
    steps: u64,
    replications: u64,
) -> Result<CycleTimeEstimate> {
    if steps == 0 {
        return Err(Error::ZeroCount("steps"));
    }
    if replications == 0 {
        return Err(Error::ZeroCount("replications"));
    }
    let n = network.node_count();
    let per_replication = (0..replications)
        .into_par_iter()
        .map(|r| {
            let s = sampler.replication(r);
            simulate(network, &s, steps, StateVector::zeros(n), steps).map(|t| t.gamma_hat)
        })
        .collect::<Result<Vec<f64>>>()?;
    let (mean, stderr) = mean_and_stderr(&per_replication);
    Ok(CycleTimeEstimate {
        gamma_hat: mean,
        steps,
        replications,
        stderr,
        per_replication,
    })
}

pub(crate) fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let r = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / r;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (r - 1.0);
    (mean, (var / r).sqrt())
}

/// `γ = max_i E[τ_i1]`, the closed-form cycle time of an acyclic network.
pub fn analytic_cycle_time(sampler: &ScenarioSampler) -> f64 {
    sampler.means().into_iter().fold(0.0, f64::max)
}
