//! Acceptance suite. Prints one `criterion N: PASS|FAIL` line per criterion,
//! then fails if any criterion failed.
//!
//! Run with `cargo test -p fjnet --test acceptance -- --nocapture`.

mod common;

use std::process::Command;
use std::time::{Duration, Instant};

use common::*;
use fjnet::cli::{evaluate, render, Format, Mode, RunConfig};
use fjnet::dynamics::{analytic_cycle_time, estimate_cycle_time};
use fjnet::maxplus::Matrix;
use fjnet::security::{EvaluationMode, SecurityModel, SimulationSettings, BUILTIN_MODEL};
use fjnet::verify::{check_tandem_bound, oracle_mismatches, random_integer_table};
use fjnet::{Coupling, ScenarioSampler, ServiceTimeMatrix};
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

const BOTTLENECK_MEANS: [f64; 6] = [2.0, 5.0, 4.0, 3.0, 6.0, 1.0];
const MC_STEPS: u64 = 200_000;
const MC_REPLICATIONS: u64 = 10;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn relative_error(value: f64, target: f64) -> f64 {
    (value - target).abs() / target
}

fn support_matrix_and_depth() -> Outcome {
    let e = f64::NEG_INFINITY;
    let expected = Matrix::from_f64_rows(&[
        vec![e, 0.0, 0.0, e, e, e],
        vec![e, e, e, 0.0, e, e],
        vec![e, e, e, 0.0, 0.0, e],
        vec![e, e, e, e, e, 0.0],
        vec![e, e, e, e, e, 0.0],
        vec![e, e, e, e, e, e],
    ])
    .unwrap();
    let net = network_from(vec![det(1.0); 6], &SIX_NODE_ARCS);
    let g_ok = net.support_matrix().matrix() == &expected;
    let p = net.longest_path_length();
    outcome(g_ok && p == 3, format!("G matches: {g_ok}, p = {p}"))
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut mismatches = 0;
    let mut cycles = 0;
    for _ in 0..200 {
        let net = random_dag(&mut rng, 7);
        let steps = 1 + below(&mut rng, 25) as usize;
        let table = random_integer_table(&mut rng, net.node_count(), steps, 10);
        mismatches += oracle_mismatches(&net, &table).unwrap();
        cycles += steps;
    }
    outcome(
        mismatches == 0,
        format!("{mismatches} mismatched cycles out of {cycles}"),
    )
}

fn tandem_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut violations = [0usize; 4];
    for draw in 0..1000 {
        let (net, _) = random_dag(&mut rng, 8).topological_renumber();
        let n = net.node_count();
        let raw = random_integer_table(&mut rng, n, 1, 40).cycles()[0].clone();
        // alternate integer and quarter-unit service times
        let durations = if draw % 2 == 0 {
            raw
        } else {
            raw.iter().map(|v| v / 4.0).collect()
        };
        let check = check_tandem_bound(&net, &ServiceTimeMatrix::new(durations).unwrap()).unwrap();
        for (count, holds) in violations.iter_mut().zip([
            check.transition_bound,
            check.support_power_bound,
            check.shifted_power_bound,
            check.weighted_power_bound,
        ]) {
            *count += usize::from(!holds);
        }
    }
    outcome(
        violations.iter().all(|&v| v == 0),
        format!(
            "violations A<=B {}, G^q {}, H^q T {}, (GT)^q {}",
            violations[0], violations[1], violations[2], violations[3]
        ),
    )
}

fn bottleneck_cycle_time() -> Outcome {
    let net = network_from(BOTTLENECK_MEANS.map(exp).to_vec(), &SIX_NODE_ARCS);
    let sampler = ScenarioSampler::new(net.distributions(), Coupling::Independent, 4).unwrap();
    let est = estimate_cycle_time(&net, &sampler, MC_STEPS, MC_REPLICATIONS).unwrap();
    let shocked = ScenarioSampler::new(
        net.distributions(),
        Coupling::CommonShock { weight: 0.5 },
        4,
    )
    .unwrap();
    let coupled = estimate_cycle_time(&net, &shocked, MC_STEPS, MC_REPLICATIONS).unwrap();
    let pass = relative_error(est.gamma_hat, 6.0) < 0.02 && est.stderr < 0.06;
    outcome(
        pass,
        format!(
            "γ̂ = {:.4} (stderr {:.4}); common shock λ=0.5: γ̂ = {:.4} (stderr {:.4})",
            est.gamma_hat, est.stderr, coupled.gamma_hat, coupled.stderr
        ),
    )
}

fn deterministic_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut failures = 0;
    let mut runs = 0;
    for _ in 0..100 {
        let net = random_dag(&mut rng, 8);
        let n = net.node_count();
        let times: Vec<f64> = random_integer_table(&mut rng, n, 1, 20).cycles()[0]
            .iter()
            .map(|v| v / 2.0)
            .collect();
        let sampler = ScenarioSampler::new(
            times.iter().map(|&v| det(v)).collect(),
            Coupling::Independent,
            0,
        )
        .unwrap();
        let target = times.iter().copied().fold(0.0, f64::max);
        for steps in [n as u64, n as u64 + 1, 2 * n as u64 + 3, 50] {
            runs += 1;
            let est = estimate_cycle_time(&net, &sampler, steps.max(2), 1).unwrap();
            failures += usize::from(est.gamma_hat != target);
        }
    }
    outcome(
        failures == 0,
        format!("{failures} inexact estimates out of {runs}"),
    )
}

fn performance_ratio() -> Outcome {
    let model = SecurityModel::builtin();
    let analytic = model.performance_ratio(&EvaluationMode::Analytic).unwrap();
    let simulated = model
        .performance_ratio(&EvaluationMode::Simulated(SimulationSettings {
            steps: MC_STEPS,
            replications: MC_REPLICATIONS,
            seed: 7,
            coupling: Coupling::Independent,
        }))
        .unwrap();
    let pass = analytic.attack_cycle_time == 10.0
        && analytic.ratio == Some(0.6)
        && relative_error(simulated.recovery_cycle_time, 6.0) < 0.03;
    outcome(
        pass,
        format!(
            "T_A = {}, analytic R = {:?}, simulated T_S = {:.4}",
            analytic.attack_cycle_time, analytic.ratio, simulated.recovery_cycle_time
        ),
    )
}

fn topology_independence() -> Outcome {
    // a diamond-and-branch layout and a differently shaped one, listed out of order
    let other_arcs = [(6, 2), (6, 4), (2, 1), (4, 3), (3, 1), (1, 5)];
    let timings = BOTTLENECK_MEANS.map(exp).to_vec();
    let first = network_from(timings.clone(), &SIX_NODE_ARCS);
    let second = network_from(timings, &other_arcs);
    let sampler = ScenarioSampler::new(first.distributions(), Coupling::Independent, 31).unwrap();
    let target = analytic_cycle_time(&sampler);
    let a = estimate_cycle_time(&first, &sampler, MC_STEPS, MC_REPLICATIONS)
        .unwrap()
        .gamma_hat;
    // independent draws, so agreement is not an artefact of shared randomness
    let b = estimate_cycle_time(&second, &sampler.with_seed(32), MC_STEPS, MC_REPLICATIONS)
        .unwrap()
        .gamma_hat;
    let pass = relative_error(a, b) < 0.03
        && relative_error(a, target) < 0.03
        && relative_error(b, target) < 0.03;
    outcome(
        pass,
        format!("γ̂ = {a:.4} and {b:.4}, max of means {target}"),
    )
}

fn determinism() -> Outcome {
    let mut config = RunConfig::new(BUILTIN_MODEL, Mode::Simulate);
    config.steps = 20_000;
    config.replications = 4;
    config.seed = 99;
    let once = |format| render(&evaluate(&config).unwrap(), format).unwrap();
    let library =
        once(Format::Json) == once(Format::Json) && once(Format::Csv) == once(Format::Csv);
    let binary = || {
        Command::new(env!("CARGO_BIN_EXE_fjnet"))
            .args([
                "run",
                "--network",
                BUILTIN_MODEL,
                "--mode",
                "simulate",
                "--steps",
                "20000",
                "--replications",
                "4",
                "--seed",
                "99",
            ])
            .output()
            .unwrap()
            .stdout
    };
    let first = binary();
    let process = first == binary() && first == once(Format::Json).into_bytes();
    outcome(
        library && process,
        format!("library reports identical: {library}, process reports identical: {process}"),
    )
}

#[test]
fn acceptance() {
    let criteria: [(fn() -> Outcome, Duration); 8] = [
        (support_matrix_and_depth, Duration::from_secs(1)),
        (oracle_equivalence, Duration::from_secs(30)),
        (tandem_bound, Duration::from_secs(30)),
        (bottleneck_cycle_time, Duration::from_secs(60)),
        (deterministic_exactness, Duration::from_secs(1)),
        (performance_ratio, Duration::from_secs(60)),
        (topology_independence, Duration::from_secs(120)),
        (determinism, Duration::from_secs(60)),
    ];
    let mut failed = Vec::new();
    for (i, (criterion, limit)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = criterion();
        let elapsed = start.elapsed();
        let pass = result.pass && elapsed < limit;
        println!(
            "criterion {}: {} ({}; {:.2?} of {:?})",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            result.detail,
            elapsed,
            limit
        );
        if !pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
