#![allow(dead_code)]

use fjnet::{DistributionSpec, Network, NetworkSpec, NodeSpec};
use rand_chacha::ChaCha8Rng;
use rand_core::RngCore;

pub fn below(rng: &mut ChaCha8Rng, n: u64) -> u64 {
    rng.next_u64() % n
}

pub fn det(value: f64) -> DistributionSpec {
    DistributionSpec::Deterministic { value }
}

pub fn exp(mean: f64) -> DistributionSpec {
    DistributionSpec::Exponential { mean }
}

pub fn network_from(timings: Vec<DistributionSpec>, arcs: &[(usize, usize)]) -> Network {
    NetworkSpec::new(
        timings
            .into_iter()
            .enumerate()
            .map(|(i, t)| NodeSpec::new(i + 1, format!("node {}", i + 1), t))
            .collect(),
        arcs.to_vec(),
    )
    .validate()
    .unwrap()
}

pub const SIX_NODE_ARCS: [(usize, usize); 7] =
    [(1, 2), (1, 3), (2, 4), (3, 4), (3, 5), (4, 6), (5, 6)];

/// Random DAG on `n` nodes: arcs follow a hidden random order, so ids are
/// usually not topologically numbered.
pub fn random_dag_arcs(
    rng: &mut ChaCha8Rng,
    n: usize,
    density_percent: u64,
) -> Vec<(usize, usize)> {
    let mut hidden: Vec<usize> = (1..=n).collect();
    for i in (1..n).rev() {
        let j = below(rng, i as u64 + 1) as usize;
        hidden.swap(i, j);
    }
    let mut arcs = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if below(rng, 100) < density_percent {
                arcs.push((hidden[a], hidden[b]));
            }
        }
    }
    arcs
}

pub fn random_dag(rng: &mut ChaCha8Rng, max_n: usize) -> Network {
    let n = 1 + below(rng, max_n as u64) as usize;
    let density = 20 + below(rng, 60);
    let arcs = random_dag_arcs(rng, n, density);
    network_from(vec![det(1.0); n], &arcs)
}

/// Longest path by enumerating every directed path with plain recursion.
pub fn brute_force_longest_path(n: usize, arcs: &[(usize, usize)]) -> usize {
    fn walk(v: usize, arcs: &[(usize, usize)]) -> usize {
        arcs.iter()
            .filter(|&&(a, _)| a == v)
            .map(|&(_, b)| 1 + walk(b, arcs))
            .max()
            .unwrap_or(0)
    }
    (1..=n).map(|v| walk(v, arcs)).max().unwrap_or(0)
}

/// Every topological order of the graph, by filtering all permutations.
pub fn all_topological_orders(n: usize, arcs: &[(usize, usize)]) -> Vec<Vec<usize>> {
    fn permute(prefix: &mut Vec<usize>, rest: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..rest.len() {
            let v = rest.remove(i);
            prefix.push(v);
            permute(prefix, rest, out);
            prefix.pop();
            rest.insert(i, v);
        }
    }
    let mut all = Vec::new();
    permute(&mut Vec::new(), &mut (1..=n).collect(), &mut all);
    all.into_iter()
        .filter(|order| {
            let pos = |id: usize| order.iter().position(|&v| v == id).unwrap();
            arcs.iter().all(|&(a, b)| pos(a) < pos(b))
        })
        .collect()
}
