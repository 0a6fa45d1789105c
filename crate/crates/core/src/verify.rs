//! Empirical checks of the tandem upper bound and of engine/oracle agreement.
//!
//! For a network numbered so that `G` is strictly upper triangular and a
//! nonnegative diagonal `T`, the following hold elementwise:
//!
//! * `A(k) ≤ B(k)`: a fork-join network is dominated by the tandem queue
//!   with the same service times;
//! * `G^q ≤ H ⊕ H² ⊕ … ⊕ Hⁿ` for `q ≥ 1`;
//! * `H^q ⊗ T ≤ (H ⊗ T)^q` for `q > 1`;
//! * `(G ⊗ T)^q ≤ (H ⊗ T) ⊕ … ⊕ (H ⊗ T)ⁿ` for `q ≥ 1`.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::Serialize;

use crate::dynamics::{build_a, build_b, Recurrence, StateVector};
use crate::error::{Error, Result};
use crate::maxplus::Matrix;
use crate::network::{Network, SupportMatrix};
use crate::oracle::unfolded_completion_times;
use crate::timing::{ServiceSource, ServiceTable, ServiceTimeMatrix};

/// Outcome of the four tandem-bound inequalities for one `T`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TandemBoundCheck {
    pub transition_bound: bool,
    pub support_power_bound: bool,
    pub shifted_power_bound: bool,
    pub weighted_power_bound: bool,
}

impl TandemBoundCheck {
    pub fn all_hold(&self) -> bool {
        self.transition_bound
            && self.support_power_bound
            && self.shifted_power_bound
            && self.weighted_power_bound
    }
}

/// Evaluates every tandem-bound inequality for `network` and `t`, with
/// exponents `q` up to `n`. The network must be topologically numbered.
pub fn check_tandem_bound(network: &Network, t: &ServiceTimeMatrix) -> Result<TandemBoundCheck> {
    if !network.is_topologically_numbered() {
        return Err(Error::BadOrder(
            "tandem bound needs a topologically numbered network".to_string(),
        ));
    }
    let n = network.node_count();
    let g = network.support_matrix();
    let h = SupportMatrix::tandem(n)?;
    let tm = t.matrix();
    let nq = n as u32;

    let a = build_a(t, &g, network.longest_path_length())?;
    let b = build_b(t, &h)?;
    let transition_bound = a.matrix().leq(b.matrix())?;

    let h_sum = h.matrix().power_sum(1, nq)?;
    let mut support_power_bound = true;
    for q in 1..=nq {
        support_power_bound &= g.matrix().power(q)?.leq(&h_sum)?;
    }

    let ht = h.matrix().otimes(tm)?;
    let mut shifted_power_bound = true;
    for q in 2..=nq.max(2) {
        let lhs = h.matrix().power(q)?.otimes(tm)?;
        shifted_power_bound &= lhs.leq(&ht.power(q)?)?;
    }

    let gt = g.matrix().otimes(tm)?;
    let ht_sum = ht.power_sum(1, nq)?;
    let mut weighted_power_bound = true;
    for q in 1..=nq {
        weighted_power_bound &= gt.power(q)?.leq(&ht_sum)?;
    }

    Ok(TandemBoundCheck {
        transition_bound,
        support_power_bound,
        shifted_power_bound,
        weighted_power_bound,
    })
}

/// Engine trajectory `x(1..=K)` from `x(0) = 0` as plain floats.
pub fn engine_completion_times(network: &Network, table: &ServiceTable) -> Result<Vec<Vec<f64>>> {
    let n = network.node_count();
    Ok(Recurrence::new(network, table, StateVector::zeros(n))?
        .take(table.steps())
        .map(|x| x.to_f64())
        .collect())
}

/// Number of cycles on which engine and oracle differ for `table`.
pub fn oracle_mismatches(network: &Network, table: &ServiceTable) -> Result<usize> {
    let engine = engine_completion_times(network, table)?;
    let oracle = unfolded_completion_times(network, table, &vec![0.0; network.node_count()])?;
    Ok(engine.iter().zip(&oracle).filter(|(a, b)| a != b).count())
}

/// Table of `steps` cycles with integer service times in `0..=max`.
pub fn random_integer_table(
    rng: &mut ChaCha8Rng,
    n: usize,
    steps: usize,
    max: u64,
) -> ServiceTable {
    let cycles = (0..steps)
        .map(|_| {
            (0..n)
                .map(|_| (rng.next_u64() % (max + 1)) as f64)
                .collect()
        })
        .collect();
    ServiceTable::new(n, cycles).expect("integer draws are valid service times")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerificationSummary {
    pub oracle_trials: usize,
    pub oracle_failures: usize,
    pub bound_trials: usize,
    pub transition_bound_failures: usize,
    pub support_power_bound_failures: usize,
    pub shifted_power_bound_failures: usize,
    pub weighted_power_bound_failures: usize,
}

impl VerificationSummary {
    pub fn passed(&self) -> usize {
        self.oracle_trials - self.oracle_failures + self.bound_trials * 4
            - self.failed_bound_checks()
    }

    pub fn failed(&self) -> usize {
        self.oracle_failures + self.failed_bound_checks()
    }

    fn failed_bound_checks(&self) -> usize {
        self.transition_bound_failures
            + self.support_power_bound_failures
            + self.shifted_power_bound_failures
            + self.weighted_power_bound_failures
    }

    pub fn all_passed(&self) -> bool {
        self.failed() == 0
    }
}

/// Runs `trials` engine/oracle comparisons of `steps` cycles and `trials`
/// tandem-bound checks on `network`, with integer service times in
/// `0..=10` drawn from `seed`.
pub fn verify_network(
    network: &Network,
    trials: usize,
    steps: usize,
    seed: u64,
) -> Result<VerificationSummary> {
    if trials == 0 {
        return Err(Error::ZeroCount("trials"));
    }
    if steps == 0 {
        return Err(Error::ZeroCount("steps"));
    }
    let n = network.node_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (renumbered, _) = network.topological_renumber();
    let mut summary = VerificationSummary {
        oracle_trials: trials,
        oracle_failures: 0,
        bound_trials: trials,
        transition_bound_failures: 0,
        support_power_bound_failures: 0,
        shifted_power_bound_failures: 0,
        weighted_power_bound_failures: 0,
    };
    for _ in 0..trials {
        let table = random_integer_table(&mut rng, n, steps, 10);
        if oracle_mismatches(network, &table)? > 0 {
            summary.oracle_failures += 1;
        }
        let t = random_integer_table(&mut rng, n, 1, 10).service_times(1);
        let check = check_tandem_bound(&renumbered, &t)?;
        summary.transition_bound_failures += usize::from(!check.transition_bound);
        summary.support_power_bound_failures += usize::from(!check.support_power_bound);
        summary.shifted_power_bound_failures += usize::from(!check.shifted_power_bound);
        summary.weighted_power_bound_failures += usize::from(!check.weighted_power_bound);
    }
    Ok(summary)
}

/// `true` when `m` has only `0`/`ε` entries.
pub fn is_support_pattern(m: &Matrix) -> bool {
    m.entries()
        .iter()
        .all(|e| e.is_epsilon() || e.value() == 0.0)
}
