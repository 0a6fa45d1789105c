//! Service-time laws and the per-cycle sampler producing `T_k`.
//!
//! Sampling is a pure function of `(seed, k)`: every cycle gets its own
//! ChaCha8 stream keyed by the seed, so any cycle can be drawn in isolation
//! and replications can run on separate threads without coordination.
//! All families are sampled by inverse transform from uniforms, which is
//! what lets the common-shock coupling keep every node's marginal law.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maxplus::{Matrix, MaxPlus};

/// Law of one node's i.i.d. service times. All samples are `≥ 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum DistributionSpec {
    Deterministic {
        value: f64,
    },
    Exponential {
        mean: f64,
    },
    Uniform {
        low: f64,
        high: f64,
    },
    /// Sum of `shape` exponential phases with total mean `mean`.
    Erlang {
        shape: u32,
        mean: f64,
    },
}

impl DistributionSpec {
    pub fn family(&self) -> &'static str {
        match self {
            DistributionSpec::Deterministic { .. } => "deterministic",
            DistributionSpec::Exponential { .. } => "exponential",
            DistributionSpec::Uniform { .. } => "uniform",
            DistributionSpec::Erlang { .. } => "erlang",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |reason: String| {
            Err(Error::InvalidDistribution {
                family: self.family(),
                reason,
            })
        };
        let check = |name: &str, v: f64| -> std::result::Result<(), String> {
            if !v.is_finite() {
                Err(format!("{name} = {v} is not finite"))
            } else if v < 0.0 {
                Err(format!("{name} = {v} is negative"))
            } else {
                Ok(())
            }
        };
        let checked = match *self {
            DistributionSpec::Deterministic { value } => check("value", value),
            DistributionSpec::Exponential { mean } => check("mean", mean),
            DistributionSpec::Uniform { low, high } => check("low", low)
                .and_then(|_| check("high", high))
                .and_then(|_| {
                    if low > high {
                        Err(format!("low = {low} exceeds high = {high}"))
                    } else {
                        Ok(())
                    }
                }),
            DistributionSpec::Erlang { shape, mean } => check("mean", mean).and_then(|_| {
                if shape == 0 {
                    Err("shape must be at least 1".to_string())
                } else {
                    Ok(())
                }
            }),
        };
        checked.or_else(fail)
    }

    /// Closed-form expectation.
    pub fn mean(&self) -> Result<f64> {
        self.validate()?;
        Ok(match *self {
            DistributionSpec::Deterministic { value } => value,
            DistributionSpec::Exponential { mean } => mean,
            DistributionSpec::Uniform { low, high } => (low + high) / 2.0,
            DistributionSpec::Erlang { mean, .. } => mean,
        })
    }

    /// Closed-form variance.
    pub fn variance(&self) -> Result<f64> {
        self.validate()?;
        Ok(match *self {
            DistributionSpec::Deterministic { .. } => 0.0,
            DistributionSpec::Exponential { mean } => mean * mean,
            DistributionSpec::Uniform { low, high } => (high - low).powi(2) / 12.0,
            DistributionSpec::Erlang { shape, mean } => mean * mean / f64::from(shape),
        })
    }

    /// The same law with every time parameter multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> DistributionSpec {
        match *self {
            DistributionSpec::Deterministic { value } => DistributionSpec::Deterministic {
                value: value * factor,
            },
            DistributionSpec::Exponential { mean } => DistributionSpec::Exponential {
                mean: mean * factor,
            },
            DistributionSpec::Uniform { low, high } => DistributionSpec::Uniform {
                low: low * factor,
                high: high * factor,
            },
            DistributionSpec::Erlang { shape, mean } => DistributionSpec::Erlang {
                shape,
                mean: mean * factor,
            },
        }
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(self, DistributionSpec::Deterministic { .. })
    }

    /// Draws one sample. `u` is the driving uniform on `(0, 1)`; Erlang
    /// phases beyond the first pull private uniforms from `rng`.
    fn sample(&self, u: f64, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            DistributionSpec::Deterministic { value } => value,
            DistributionSpec::Exponential { mean } => exp_quantile(mean, u),
            DistributionSpec::Uniform { low, high } => low + u * (high - low),
            DistributionSpec::Erlang { shape, mean } => {
                let phase = mean / f64::from(shape);
                let mut total = exp_quantile(phase, u);
                for _ in 1..shape {
                    total += exp_quantile(phase, open_uniform(rng));
                }
                total
            }
        }
    }
}

fn exp_quantile(mean: f64, u: f64) -> f64 {
    // -ln(1 - u) is nonnegative for u in (0, 1)
    -mean * (-u).ln_1p()
}

/// Uniform on the open interval `(0, 1)` from 53 random bits.
fn open_uniform(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64
}

/// Within-cycle dependence between nodes. Cycles are always independent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Coupling {
    #[default]
    Independent,
    /// Each cycle draws a shared uniform `U`; node `i` is driven by
    /// `F(λ·U + (1−λ)·U_i)`, where `F` is the CDF of that blend, so the
    /// driving uniform stays exactly uniform and marginals are unchanged.
    CommonShock { weight: f64 },
}

impl Coupling {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Coupling::CommonShock { weight } if !(0.0..=1.0).contains(&weight) => {
                Err(Error::InvalidCouplingWeight(weight))
            }
            _ => Ok(()),
        }
    }
}

/// CDF of `a·U + b·V` for independent uniforms with `a + b = 1`.
fn blend_cdf(weight: f64, s: f64) -> f64 {
    let lo = weight.min(1.0 - weight);
    let hi = weight.max(1.0 - weight);
    if lo == 0.0 {
        return s;
    }
    if s <= lo {
        s * s / (2.0 * lo * hi)
    } else if s <= hi {
        (s - lo / 2.0) / hi
    } else {
        1.0 - (1.0 - s) * (1.0 - s) / (2.0 * lo * hi)
    }
}

/// Diagonal service-time matrix `T_k = diag(τ_1k, …, τ_nk)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ServiceTimeMatrix {
    durations: Vec<f64>,
    matrix: Matrix,
}

impl ServiceTimeMatrix {
    /// Rejects negative or non-finite durations.
    pub fn new(durations: Vec<f64>) -> Result<Self> {
        let diag = durations
            .iter()
            .enumerate()
            .map(|(i, &value)| {
                if value.is_finite() && value >= 0.0 {
                    MaxPlus::new(value)
                } else {
                    Err(Error::InvalidServiceTime { node: i + 1, value })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ServiceTimeMatrix {
            matrix: Matrix::diagonal(&diag),
            durations,
        })
    }

    pub fn durations(&self) -> &[f64] {
        &self.durations
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn len(&self) -> usize {
        self.durations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.durations.is_empty()
    }
}

/// Anything that can hand out `T_k` for cycle `k ≥ 1`.
pub trait ServiceSource {
    fn node_count(&self) -> usize;
    fn service_times(&self, k: u64) -> ServiceTimeMatrix;
}

/// Seeded sampler for `T_1, T_2, …`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioSampler {
    distributions: Vec<DistributionSpec>,
    coupling: Coupling,
    seed: u64,
}

impl ScenarioSampler {
    pub fn new(
        distributions: Vec<DistributionSpec>,
        coupling: Coupling,
        seed: u64,
    ) -> Result<Self> {
        for d in &distributions {
            d.validate()?;
        }
        coupling.validate()?;
        Ok(ScenarioSampler {
            distributions,
            coupling,
            seed,
        })
    }

    pub fn distributions(&self) -> &[DistributionSpec] {
        &self.distributions
    }

    pub fn coupling(&self) -> Coupling {
        self.coupling
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        ScenarioSampler {
            seed,
            ..self.clone()
        }
    }

    /// Sampler for replication `r`, with a seed derived from this one.
    pub fn replication(&self, r: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(r);
        // cycle draws start at word 0 of their stream; read far past them
        rng.set_word_pos(1 << 32);
        self.with_seed(rng.next_u64())
    }

    /// Per-node means.
    pub fn means(&self) -> Vec<f64> {
        self.distributions
            .iter()
            .map(|d| d.mean().expect("validated at construction"))
            .collect()
    }

    /// Draws `T_k`. Same seed and `k` always give the same matrix.
    pub fn sample_cycle(&self, k: u64) -> ServiceTimeMatrix {
        ServiceTimeMatrix::new(self.sample_durations(k))
            .expect("samples are finite and nonnegative")
    }

    /// The raw `τ_1k, …, τ_nk` behind [`ScenarioSampler::sample_cycle`].
    pub fn sample_durations(&self, k: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(k);
        let shared = match self.coupling {
            Coupling::CommonShock { weight } => Some((weight, open_uniform(&mut rng))),
            Coupling::Independent => None,
        };
        self.distributions
            .iter()
            .map(|d| {
                let private = open_uniform(&mut rng);
                let u = match shared {
                    Some((w, shock)) => blend_cdf(w, w * shock + (1.0 - w) * private)
                        .clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON),
                    None => private,
                };
                d.sample(u, &mut rng).max(0.0)
            })
            .collect()
    }

    /// Copy with node `node` (1-based) pinned to `deterministic(0)`.
    pub fn set_node_to_zero(&self, node: usize) -> Result<Self> {
        let count = self.distributions.len();
        if node == 0 || node > count {
            return Err(Error::BadNodeIndex { index: node, count });
        }
        let mut out = self.clone();
        out.distributions[node - 1] = DistributionSpec::Deterministic { value: 0.0 };
        Ok(out)
    }
}

impl ServiceSource for ScenarioSampler {
    fn node_count(&self) -> usize {
        self.distributions.len()
    }

    fn service_times(&self, k: u64) -> ServiceTimeMatrix {
        self.sample_cycle(k)
    }
}

/// Precomputed `τ_ik` table, row `k-1` holding cycle `k`. Lets the engine
/// and the path oracle consume identical draws.
#[derive(Clone, Debug, PartialEq)]
pub struct ServiceTable {
    n: usize,
    cycles: Vec<Vec<f64>>,
}

impl ServiceTable {
    pub fn new(n: usize, cycles: Vec<Vec<f64>>) -> Result<Self> {
        for (k, row) in cycles.iter().enumerate() {
            if row.len() != n {
                return Err(Error::ServiceTableShape {
                    cycle: k + 1,
                    expected: n,
                    found: row.len(),
                });
            }
            for (i, &v) in row.iter().enumerate() {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::InvalidServiceTime {
                        node: i + 1,
                        value: v,
                    });
                }
            }
        }
        Ok(ServiceTable { n, cycles })
    }

    /// Draws cycles `1..=steps` from a sampler.
    pub fn from_sampler(sampler: &ScenarioSampler, steps: u64) -> Self {
        ServiceTable {
            n: sampler.node_count(),
            cycles: (1..=steps).map(|k| sampler.sample_durations(k)).collect(),
        }
    }

    pub fn steps(&self) -> usize {
        self.cycles.len()
    }

    /// `τ_ik` for 1-based cycle `k` and 0-based node `i`.
    pub fn get(&self, k: usize, i: usize) -> f64 {
        self.cycles[k - 1][i]
    }

    pub fn cycles(&self) -> &[Vec<f64>] {
        &self.cycles
    }
}

impl ServiceSource for ServiceTable {
    fn node_count(&self) -> usize {
        self.n
    }

    /// Panics when `k` is outside the table.
    fn service_times(&self, k: u64) -> ServiceTimeMatrix {
        let row = usize::try_from(k)
            .ok()
            .filter(|&k| k >= 1 && k <= self.cycles.len())
            .unwrap_or_else(|| panic!("cycle {k} outside table of {} cycles", self.cycles.len()));
        ServiceTimeMatrix::new(self.cycles[row - 1].clone()).expect("validated at construction")
    }
}
