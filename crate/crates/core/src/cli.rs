//! `fjnet run`: load a network, evaluate it, emit a JSON or CSV report.
//!
//! Network files are JSON:
//!
//! ```json
//! {
//!   "nodes": [
//!     { "id": 1, "label": "detect", "distribution": { "family": "exponential", "mean": 10.0 } },
//!     { "id": 2, "label": "repair", "distribution": { "family": "uniform", "low": 1.0, "high": 3.0 } }
//!   ],
//!   "arcs": [[1, 2]],
//!   "arrival_node": 1,
//!   "coupling": { "kind": "common_shock", "weight": 0.5 }
//! }
//! ```
//!
//! `arrival_node` and `coupling` are optional. The reserved name
//! `paper-fig3` selects the built-in six-node security model.
//!
//! Reports contain no timestamps or timings, so the same configuration
//! always produces byte-identical output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::dynamics::{analytic_cycle_time, estimate_cycle_time, simulate, StateVector};
use crate::error::{Error, Result};
use crate::network::{Network, NetworkSpec, NodeSpec, Permutation};
use crate::security::{
    EvaluationMode, RecoveryCycleTime, SecurityModel, SimulationSettings, BUILTIN_MODEL,
};
use crate::timing::Coupling;
use crate::verify::{verify_network, VerificationSummary};

/// Trials per suite in `verify` mode.
pub const VERIFY_TRIALS: usize = 200;
/// Upper bound on cycles per engine/oracle trial in `verify` mode.
pub const VERIFY_MAX_STEPS: u64 = 25;
/// Norm samples kept from the first replication in `simulate` mode.
pub const NORM_SAMPLES: u64 = 100;

#[derive(Debug, Parser)]
#[command(
    name = "fjnet",
    version,
    about = "Max-plus evaluation of acyclic fork-join networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a network and write a report.
    Run(RunConfig),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Analytic,
    Simulate,
    Verify,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Debug, clap::Args)]
pub struct RunConfig {
    /// Network file, or `paper-fig3` for the built-in model.
    #[arg(long)]
    pub network: String,
    #[arg(long, value_enum, default_value_t = Mode::Analytic)]
    pub mode: Mode,
    /// Cycles per replication.
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub steps: u64,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub replications: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Pin the arrival node's service time to zero.
    #[arg(long)]
    pub max_traffic: bool,
    /// Report destination; standard output when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

impl RunConfig {
    pub fn new(network: impl Into<String>, mode: Mode) -> Self {
        RunConfig {
            network: network.into(),
            mode,
            steps: 100_000,
            replications: 10,
            seed: 0,
            max_traffic: false,
            output: None,
            format: Format::Json,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    nodes: Vec<NodeSpec>,
    #[serde(default)]
    arcs: Vec<(usize, usize)>,
    #[serde(default)]
    arrival_node: Option<usize>,
    #[serde(default)]
    coupling: Coupling,
}

/// A network ready for evaluation.
#[derive(Clone, Debug)]
pub struct LoadedNetwork {
    /// Renumbered so every arc `(i, j)` has `i < j`.
    pub network: Network,
    /// Old-to-new ids; identity for files already in topological order.
    pub permutation: Permutation,
    pub coupling: Coupling,
}

impl LoadedNetwork {
    /// Id in the source file for a renumbered id.
    pub fn original_id(&self, new_id: usize) -> usize {
        self.permutation
            .as_slice()
            .iter()
            .position(|&v| v == new_id)
            .map(|i| i + 1)
            .expect("permutation covers every node")
    }
}

/// Resolves `paper-fig3` or reads, validates and renumbers a network file.
pub fn load_network(name_or_path: &str) -> Result<LoadedNetwork> {
    if name_or_path == BUILTIN_MODEL {
        let network = SecurityModel::builtin().network().clone();
        let permutation = Permutation::identity(network.node_count());
        return Ok(LoadedNetwork {
            network,
            permutation,
            coupling: Coupling::Independent,
        });
    }
    let path = Path::new(name_or_path);
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_network(path, &text)
}

/// Parses network JSON; `path` is used for diagnostics only.
pub fn parse_network(path: &Path, text: &str) -> Result<LoadedNetwork> {
    let file: NetworkFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let wrap = |source: Error| Error::InvalidNetworkFile {
        path: path.to_path_buf(),
        source: Box::new(source),
    };
    file.coupling.validate().map_err(wrap)?;
    let spec = NetworkSpec {
        nodes: file.nodes,
        arcs: file.arcs,
        arrival_node: file.arrival_node,
    };
    let (network, permutation) = spec.validate().map_err(wrap)?.topological_renumber();
    Ok(LoadedNetwork {
        network,
        permutation,
        coupling: file.coupling,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationSection {
    pub gamma_hat: f64,
    pub stderr: f64,
    pub steps: u64,
    pub replications: u64,
    pub per_replication: Vec<f64>,
    /// `[k, ‖x(k)‖]` from the first replication.
    pub norm_samples: Vec<(u64, f64)>,
}

/// Everything `run` reports. Node ids refer to the input file.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub network: String,
    pub mode: Mode,
    pub node_count: usize,
    pub arrival_node: usize,
    pub longest_path: usize,
    /// `renumbering[old - 1] = new`, present only when not the identity.
    pub renumbering: Option<Vec<usize>>,
    pub seed: u64,
    pub max_traffic: bool,
    /// `max_i E[τ_i]`, after the max-traffic edit when requested.
    pub cycle_time: f64,
    #[serde(rename = "T_A")]
    pub attack_cycle_time: f64,
    #[serde(rename = "T_S")]
    pub recovery_cycle_time: f64,
    #[serde(rename = "R")]
    pub ratio: Option<f64>,
    pub bottleneck_ranking: Vec<usize>,
    pub warnings: Vec<String>,
    pub simulation: Option<SimulationSection>,
    pub verification: Option<VerificationSummary>,
}

impl Report {
    /// Verification failures make the run fail; other modes always succeed.
    pub fn success(&self) -> bool {
        self.verification
            .as_ref()
            .is_none_or(VerificationSummary::all_passed)
    }
}

/// Evaluates the configured network. Writes nothing.
pub fn evaluate(config: &RunConfig) -> Result<Report> {
    if config.steps == 0 {
        return Err(Error::ZeroCount("steps"));
    }
    if config.replications == 0 {
        return Err(Error::ZeroCount("replications"));
    }
    let loaded = load_network(&config.network)?;
    let network = &loaded.network;
    let model = SecurityModel::from_network(network.clone());
    let arrival = network.arrival_node();

    let mut sampler = model.sampler(loaded.coupling, config.seed)?;
    if config.max_traffic {
        sampler = sampler.set_node_to_zero(arrival)?;
    }
    let settings = SimulationSettings {
        steps: config.steps,
        replications: config.replications,
        seed: config.seed,
        coupling: loaded.coupling,
    };

    let (perf, simulation) = match config.mode {
        Mode::Simulate => {
            let estimate =
                estimate_cycle_time(network, &sampler, config.steps, config.replications)?;
            let first = sampler.replication(0);
            let thin = (config.steps / NORM_SAMPLES).max(1);
            let trace = simulate(
                network,
                &first,
                config.steps,
                StateVector::zeros(network.node_count()),
                thin,
            )?;
            // with --max-traffic the main run already is the recovery-time run
            let recovery = if config.max_traffic {
                estimate.clone()
            } else {
                model.max_traffic_estimate(&settings)?
            };
            let perf = model.report_for(RecoveryCycleTime {
                value: recovery.gamma_hat,
                estimate: Some(recovery),
            });
            let section = SimulationSection {
                gamma_hat: estimate.gamma_hat,
                stderr: estimate.stderr,
                steps: estimate.steps,
                replications: estimate.replications,
                per_replication: estimate.per_replication,
                norm_samples: trace.norms,
            };
            (perf, Some(section))
        }
        Mode::Analytic | Mode::Verify => {
            (model.performance_ratio(&EvaluationMode::Analytic)?, None)
        }
    };

    let verification = match config.mode {
        Mode::Verify => Some(verify_network(
            network,
            VERIFY_TRIALS,
            config.steps.min(VERIFY_MAX_STEPS) as usize,
            config.seed,
        )?),
        _ => None,
    };

    Ok(Report {
        network: config.network.clone(),
        mode: config.mode,
        node_count: network.node_count(),
        arrival_node: loaded.original_id(arrival),
        longest_path: network.longest_path_length(),
        renumbering: (!loaded.permutation.is_identity())
            .then(|| loaded.permutation.as_slice().to_vec()),
        seed: config.seed,
        max_traffic: config.max_traffic,
        cycle_time: analytic_cycle_time(&sampler),
        attack_cycle_time: perf.attack_cycle_time,
        recovery_cycle_time: perf.recovery_cycle_time,
        ratio: perf.ratio,
        bottleneck_ranking: perf
            .bottleneck_ranking
            .iter()
            .map(|&id| loaded.original_id(id))
            .collect(),
        warnings: perf.warnings,
        simulation,
        verification,
    })
}

/// Renders a report in the requested format.
pub fn render(report: &Report, format: Format) -> Result<String> {
    match format {
        Format::Json => {
            let mut s =
                serde_json::to_string_pretty(report).map_err(|e| Error::Output(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => render_csv(report),
    }
}

/// One row per replication, then a summary row.
fn render_csv(report: &Report) -> Result<String> {
    let out = |e: csv::Error| Error::Output(e.to_string());
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "row",
        "replication",
        "gamma_hat",
        "stderr",
        "cycle_time",
        "T_A",
        "T_S",
        "R",
        "checks_passed",
        "checks_failed",
    ])
    .map_err(out)?;
    let blank = String::new;
    if let Some(sim) = &report.simulation {
        for (r, g) in sim.per_replication.iter().enumerate() {
            w.write_record([
                "replication".to_string(),
                r.to_string(),
                g.to_string(),
                blank(),
                blank(),
                blank(),
                blank(),
                blank(),
                blank(),
                blank(),
            ])
            .map_err(out)?;
        }
    }
    let opt = |v: Option<String>| v.unwrap_or_default();
    w.write_record([
        "summary".to_string(),
        blank(),
        opt(report.simulation.as_ref().map(|s| s.gamma_hat.to_string())),
        opt(report.simulation.as_ref().map(|s| s.stderr.to_string())),
        report.cycle_time.to_string(),
        report.attack_cycle_time.to_string(),
        report.recovery_cycle_time.to_string(),
        opt(report.ratio.map(|r| r.to_string())),
        opt(report.verification.as_ref().map(|v| v.passed().to_string())),
        opt(report.verification.as_ref().map(|v| v.failed().to_string())),
    ])
    .map_err(out)?;
    let bytes = w.into_inner().map_err(|e| Error::Output(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Output(e.to_string()))
}

/// Evaluates, renders and writes the report. Returns whether the run
/// succeeded (only `verify` mode can fail after evaluation).
pub fn run(config: &RunConfig) -> Result<bool> {
    let report = evaluate(config)?;
    let text = render(&report, config.format)?;
    match &config.output {
        Some(path) => fs::write(path, text).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?,
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| Error::Output(e.to_string()))?,
    }
    Ok(report.success())
}
