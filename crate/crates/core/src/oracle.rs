//! Brute-force completion times from the fork-join start rule.
//!
//! The k-th service at node `i` starts once node `i` has finished its
//! (k-1)-th service and every predecessor has finished its k-th one:
//!
//! `x_i(k) = τ_ik + max(x_i(k-1), max_{j → i} x_j(k))`.
//!
//! This module works on plain `f64`s and never touches the matrix algebra,
//! so it can be used to check [`crate::dynamics`] independently.

use crate::error::{Error, Result};
use crate::network::Network;
use crate::timing::ServiceTable;

/// Completion times `x(1), …, x(K)` for every cycle in `service_times`.
///
/// Nodes are evaluated in an order found by repeatedly scanning for a node
/// whose predecessors are all done.
pub fn unfolded_completion_times(
    network: &Network,
    service_times: &ServiceTable,
    x0: &[f64],
) -> Result<Vec<Vec<f64>>> {
    let n = network.node_count();
    let mut done = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let next = (1..=n)
            .find(|&id| !done[id - 1] && network.predecessors(id).all(|p| done[p - 1]))
            .expect("validated networks are acyclic");
        done[next - 1] = true;
        order.push(next);
    }
    unfolded_completion_times_in_order(network, service_times, x0, &order)
}

/// Same as [`unfolded_completion_times`] with a caller-chosen evaluation
/// order, which must be a topological order of `network` (1-based ids).
pub fn unfolded_completion_times_in_order(
    network: &Network,
    service_times: &ServiceTable,
    x0: &[f64],
    order: &[usize],
) -> Result<Vec<Vec<f64>>> {
    let n = network.node_count();
    if x0.len() != n {
        return Err(Error::DimensionMismatch {
            op: "oracle x0",
            left: (n, 1),
            right: (x0.len(), 1),
        });
    }
    if let Some(row) = service_times.cycles().iter().find(|row| row.len() != n) {
        return Err(Error::DimensionMismatch {
            op: "oracle service table",
            left: (n, 1),
            right: (row.len(), 1),
        });
    }
    check_order(network, order)?;

    let mut history = Vec::with_capacity(service_times.steps());
    let mut prev = x0.to_vec();
    for tau in service_times.cycles() {
        let mut current = vec![f64::NEG_INFINITY; n];
        for &id in order {
            let i = id - 1;
            let ready = network
                .predecessors(id)
                .map(|p| current[p - 1])
                .fold(prev[i], f64::max);
            current[i] = tau[i] + ready;
        }
        history.push(current.clone());
        prev = current;
    }
    Ok(history)
}

fn check_order(network: &Network, order: &[usize]) -> Result<()> {
    let n = network.node_count();
    let mut position = vec![usize::MAX; n];
    for (pos, &id) in order.iter().enumerate() {
        if id == 0 || id > n || position[id - 1] != usize::MAX {
            return Err(Error::BadOrder(format!(
                "{order:?} is not a permutation of 1..={n}"
            )));
        }
        position[id - 1] = pos;
    }
    if order.len() != n {
        return Err(Error::BadOrder(format!(
            "{order:?} is not a permutation of 1..={n}"
        )));
    }
    for &(a, b) in network.arcs() {
        if position[a - 1] > position[b - 1] {
            return Err(Error::BadOrder(format!("arc ({a}, {b}) runs backwards")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{NetworkSpec, NodeSpec};
    use crate::timing::DistributionSpec;

    fn network(n: usize, arcs: &[(usize, usize)]) -> Network {
        NetworkSpec::new(
            (1..=n)
                .map(|id| NodeSpec::new(id, "", DistributionSpec::Deterministic { value: 1.0 }))
                .collect(),
            arcs.to_vec(),
        )
        .validate()
        .unwrap()
    }

    #[test]
    fn tandem_first_cycle() {
        let net = network(2, &[(1, 2)]);
        let table = ServiceTable::new(2, vec![vec![1.0, 2.0]; 3]).unwrap();
        let xs = unfolded_completion_times(&net, &table, &[0.0, 0.0]).unwrap();
        assert_eq!(xs, vec![vec![1.0, 3.0], vec![2.0, 5.0], vec![3.0, 7.0]]);
    }

    #[test]
    fn single_node_accumulates() {
        let net = network(1, &[]);
        let table = ServiceTable::new(1, vec![vec![2.5]; 8]).unwrap();
        let xs = unfolded_completion_times(&net, &table, &[0.0]).unwrap();
        for (k, x) in xs.iter().enumerate() {
            assert_eq!(x[0], 2.5 * (k + 1) as f64);
        }
    }

    #[test]
    fn six_node_depths() {
        let net = network(6, &[(1, 2), (1, 3), (2, 4), (3, 4), (3, 5), (4, 6), (5, 6)]);
        let table = ServiceTable::new(6, vec![vec![1.0; 6]]).unwrap();
        let xs = unfolded_completion_times(&net, &table, &[0.0; 6]).unwrap();
        assert_eq!(xs[0], vec![1.0, 2.0, 2.0, 3.0, 3.0, 4.0]);
    }

    #[test]
    fn order_must_be_topological() {
        let net = network(3, &[(1, 2), (2, 3)]);
        let table = ServiceTable::new(3, vec![vec![1.0; 3]]).unwrap();
        assert!(unfolded_completion_times_in_order(&net, &table, &[0.0; 3], &[2, 1, 3]).is_err());
        assert!(unfolded_completion_times_in_order(&net, &table, &[0.0; 3], &[1, 2]).is_err());
        assert!(unfolded_completion_times_in_order(&net, &table, &[0.0; 3], &[1, 1, 3]).is_err());
        assert!(unfolded_completion_times_in_order(&net, &table, &[0.0; 3], &[1, 2, 3]).is_ok());
    }

    #[test]
    fn any_topological_order_agrees() {
        let net = network(4, &[(1, 3), (1, 2), (2, 4), (3, 4)]);
        let table =
            ServiceTable::new(4, vec![vec![3.0, 1.0, 4.0, 1.0], vec![5.0, 9.0, 2.0, 6.0]]).unwrap();
        let a = unfolded_completion_times_in_order(&net, &table, &[0.0; 4], &[1, 2, 3, 4]).unwrap();
        let b = unfolded_completion_times_in_order(&net, &table, &[0.0; 4], &[1, 3, 2, 4]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_arrival_node_stays_at_start() {
        let net = network(3, &[(1, 2), (1, 3)]);
        let table = ServiceTable::new(3, vec![vec![0.0, 2.0, 1.0]; 10]).unwrap();
        let xs = unfolded_completion_times(&net, &table, &[0.0; 3]).unwrap();
        assert!(xs.iter().all(|x| x[0] == 0.0));
    }
}
