//! Security incident handling as a fork-join network.
//!
//! The built-in model has six procedures:
//!
//! | id | procedure                              |
//! |----|----------------------------------------|
//! | 1  | security attack detection              |
//! | 2  | software and data integrity analysis   |
//! | 3  | vulnerability analysis                 |
//! | 4  | software and data recovery procedures  |
//! | 5  | development of countermeasures         |
//! | 6  | security system modification           |
//!
//! Node 1's service time is the interval between attacks, so its mean is
//! the attack cycle time `T_A`. The recovery cycle time `T_S` is the cycle
//! time under maximum traffic, i.e. with node 1 pinned to zero. Their ratio
//! `R = T_S / T_A` is the long-run fraction of time spent in recovery when
//! `T_S ≤ T_A`.
//!
//! Every operation here also works on an arbitrary validated network with
//! a designated arrival node.

use serde::Serialize;

use crate::dynamics::{estimate_cycle_time, CycleTimeEstimate};
use crate::error::Result;
use crate::network::{Network, NetworkSpec, NodeSpec};
use crate::timing::{Coupling, DistributionSpec, ScenarioSampler};

pub const BUILTIN_MODEL: &str = "paper-fig3";

pub const SECURITY_LABELS: [&str; 6] = [
    "Security Attacks Detection",
    "Software and Data Integrity Analysis",
    "Vulnerabilities Analysis",
    "Software and Data Recovery Procedures",
    "Development of Countermeasures",
    "Security System Modification",
];

pub const SECURITY_ARCS: [(usize, usize); 7] =
    [(1, 2), (1, 3), (2, 4), (3, 4), (3, 5), (4, 6), (5, 6)];

/// Default timings of the built-in model: exponential with these means.
pub const DEFAULT_MEANS: [f64; 6] = [10.0, 5.0, 4.0, 3.0, 6.0, 2.0];

/// The six-node network spec with the given per-node timings.
pub fn security_network_spec(timings: [DistributionSpec; 6]) -> NetworkSpec {
    let mut spec = NetworkSpec::new(
        timings
            .into_iter()
            .enumerate()
            .map(|(i, t)| NodeSpec::new(i + 1, SECURITY_LABELS[i], t))
            .collect(),
        SECURITY_ARCS.to_vec(),
    );
    spec.arrival_node = Some(1);
    spec
}

#[derive(Clone, Debug, PartialEq)]
pub struct SecurityModel {
    network: Network,
}

impl SecurityModel {
    /// The built-in six-node model.
    pub fn with_timings(timings: [DistributionSpec; 6]) -> Result<Self> {
        Ok(SecurityModel {
            network: security_network_spec(timings).validate()?,
        })
    }

    /// Built-in model with exponential timings of [`DEFAULT_MEANS`].
    pub fn builtin() -> Self {
        Self::with_timings(DEFAULT_MEANS.map(|mean| DistributionSpec::Exponential { mean }))
            .expect("built-in model is valid")
    }

    /// Any validated network; its arrival node plays the role of node 1.
    pub fn from_network(network: Network) -> Self {
        SecurityModel { network }
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn arrival_node(&self) -> usize {
        self.network.arrival_node()
    }

    fn mean_of(&self, id: usize) -> f64 {
        self.network
            .node(id)
            .expect("id from this network")
            .timing
            .mean()
            .expect("validated network")
    }

    /// `T_A`: mean of the arrival node's service time.
    pub fn attack_cycle_time(&self) -> f64 {
        self.mean_of(self.arrival_node())
    }

    /// Non-arrival nodes by descending mean; ties by ascending id.
    pub fn bottleneck_ranking(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = (1..=self.network.node_count())
            .filter(|&id| id != self.arrival_node())
            .collect();
        ids.sort_by(|&a, &b| self.mean_of(b).total_cmp(&self.mean_of(a)).then(a.cmp(&b)));
        ids
    }

    /// Sampler over this model's timings.
    pub fn sampler(&self, coupling: Coupling, seed: u64) -> Result<ScenarioSampler> {
        ScenarioSampler::new(self.network.distributions(), coupling, seed)
    }

    /// `T_S`, analytically or by simulation under maximum traffic.
    pub fn recovery_cycle_time(&self, mode: &EvaluationMode) -> Result<RecoveryCycleTime> {
        match mode {
            EvaluationMode::Analytic => Ok(RecoveryCycleTime {
                value: self
                    .bottleneck_ranking()
                    .first()
                    .map_or(0.0, |&id| self.mean_of(id)),
                estimate: None,
            }),
            EvaluationMode::Simulated(settings) => {
                let estimate = self.max_traffic_estimate(settings)?;
                Ok(RecoveryCycleTime {
                    value: estimate.gamma_hat,
                    estimate: Some(estimate),
                })
            }
        }
    }

    /// Cycle-time estimate with the arrival node pinned to zero.
    pub fn max_traffic_estimate(&self, settings: &SimulationSettings) -> Result<CycleTimeEstimate> {
        let sampler = self
            .sampler(settings.coupling, settings.seed)?
            .set_node_to_zero(self.arrival_node())?;
        estimate_cycle_time(
            &self.network,
            &sampler,
            settings.steps,
            settings.replications,
        )
    }

    /// `T_A`, `T_S`, `R` and the bottleneck ranking.
    pub fn performance_ratio(&self, mode: &EvaluationMode) -> Result<PerformanceReport> {
        Ok(self.report_for(self.recovery_cycle_time(mode)?))
    }

    /// Assembles the report around an already computed `T_S`.
    pub fn report_for(&self, recovery: RecoveryCycleTime) -> PerformanceReport {
        let attack = self.attack_cycle_time();
        let mut warnings = Vec::new();
        let ratio = if attack > 0.0 {
            Some(recovery.value / attack)
        } else {
            warnings.push(format!(
                "attack cycle time is 0 (node {} has zero mean); R is undefined",
                self.arrival_node()
            ));
            None
        };
        if attack > 0.0 && recovery.value > attack {
            warnings.push(format!(
                "recovery cycle time {} exceeds attack cycle time {}; R is not a time fraction",
                recovery.value, attack
            ));
        }
        PerformanceReport {
            attack_cycle_time: attack,
            recovery_cycle_time: recovery.value,
            ratio,
            bottleneck_ranking: self.bottleneck_ranking(),
            recovery_estimate: recovery.estimate,
            warnings,
        }
    }

    /// Copy with every time parameter multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<SecurityModel> {
        let timings = self
            .network
            .distributions()
            .iter()
            .map(|d| d.scaled(factor))
            .collect();
        Ok(SecurityModel {
            network: self.network.with_distributions(timings)?,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimulationSettings {
    pub steps: u64,
    pub replications: u64,
    pub seed: u64,
    pub coupling: Coupling,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EvaluationMode {
    Analytic,
    Simulated(SimulationSettings),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryCycleTime {
    pub value: f64,
    pub estimate: Option<CycleTimeEstimate>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerformanceReport {
    #[serde(rename = "T_A")]
    pub attack_cycle_time: f64,
    #[serde(rename = "T_S")]
    pub recovery_cycle_time: f64,
    /// `None` when `T_A = 0`.
    #[serde(rename = "R")]
    pub ratio: Option<f64>,
    pub bottleneck_ranking: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recovery_estimate: Option<CycleTimeEstimate>,
    pub warnings: Vec<String>,
}
