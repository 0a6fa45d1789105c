//! Acyclic fork-join network topologies and their support matrices.
//!
//! Node ids are 1-based everywhere outside this module. A [`NetworkSpec`]
//! is the raw, deserializable description; [`NetworkSpec::validate`] turns
//! it into an immutable [`Network`] that every other module consumes.
//! Disconnected graphs are accepted.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maxplus::{Matrix, MaxPlus};
use crate::timing::DistributionSpec;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    pub id: usize,
    #[serde(default)]
    pub label: String,
    #[serde(rename = "distribution")]
    pub timing: DistributionSpec,
}

impl NodeSpec {
    pub fn new(id: usize, label: impl Into<String>, timing: DistributionSpec) -> Self {
        NodeSpec {
            id,
            label: label.into(),
            timing,
        }
    }
}

/// Unvalidated network description, as read from a network file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub nodes: Vec<NodeSpec>,
    #[serde(default)]
    pub arcs: Vec<(usize, usize)>,
    /// Node whose service time models the interval between arrivals.
    /// Defaults to node 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arrival_node: Option<usize>,
}

impl NetworkSpec {
    pub fn new(nodes: Vec<NodeSpec>, arcs: Vec<(usize, usize)>) -> Self {
        NetworkSpec {
            nodes,
            arcs,
            arrival_node: None,
        }
    }

    /// Checks ids, arcs and acyclicity.
    ///
    /// Ids must be exactly `1..=n` in any listing order. Arcs must reference
    /// existing nodes, may not repeat, and may not be self-loops. On a cycle
    /// the error carries one offending cycle as a closed id sequence.
    pub fn validate(self) -> Result<Network> {
        let n = self.nodes.len();
        if n == 0 {
            return Err(Error::EmptyNetwork);
        }
        let mut slots: Vec<Option<NodeSpec>> = vec![None; n];
        for node in self.nodes {
            if node.id == 0 || node.id > n {
                return Err(Error::NodeIdOutOfRange {
                    id: node.id,
                    count: n,
                });
            }
            node.timing.validate()?;
            let slot = &mut slots[node.id - 1];
            if slot.is_some() {
                return Err(Error::DuplicateNodeId(node.id));
            }
            *slot = Some(node);
        }
        let nodes: Vec<NodeSpec> = slots
            .into_iter()
            .map(|s| s.expect("all ids seen"))
            .collect();

        let mut seen = BTreeSet::new();
        let mut successors = vec![Vec::new(); n];
        let mut predecessors = vec![Vec::new(); n];
        for &(from, to) in &self.arcs {
            if from == 0 || from > n || to == 0 || to > n {
                return Err(Error::DanglingArc { from, to });
            }
            if from == to {
                return Err(Error::SelfLoop(from));
            }
            if !seen.insert((from, to)) {
                return Err(Error::DuplicateArc { from, to });
            }
            successors[from - 1].push(to - 1);
            predecessors[to - 1].push(from - 1);
        }
        if let Some(cycle) = find_cycle(&successors) {
            return Err(Error::Cycle(cycle.into_iter().map(|i| i + 1).collect()));
        }

        let arrival_node = self.arrival_node.unwrap_or(1);
        if arrival_node == 0 || arrival_node > n {
            return Err(Error::BadNodeIndex {
                index: arrival_node,
                count: n,
            });
        }

        Ok(Network {
            nodes,
            arcs: self.arcs,
            successors,
            predecessors,
            arrival_node,
        })
    }
}

/// DFS with colouring; returns one cycle (0-based, closed: first == last).
fn find_cycle(successors: &[Vec<usize>]) -> Option<Vec<usize>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Colour {
        White,
        Grey,
        Black,
    }
    let n = successors.len();
    let mut colour = vec![Colour::White; n];
    let mut parent = vec![usize::MAX; n];

    for root in 0..n {
        if colour[root] != Colour::White {
            continue;
        }
        // explicit stack of (node, next successor index)
        let mut stack = vec![(root, 0usize)];
        colour[root] = Colour::Grey;
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            if let Some(&w) = successors[v].get(*next) {
                *next += 1;
                match colour[w] {
                    Colour::White => {
                        colour[w] = Colour::Grey;
                        parent[w] = v;
                        stack.push((w, 0));
                    }
                    Colour::Grey => {
                        let mut cycle = vec![w];
                        let mut u = v;
                        while u != w {
                            cycle.push(u);
                            u = parent[u];
                        }
                        cycle.push(w);
                        cycle.reverse();
                        return Some(cycle);
                    }
                    Colour::Black => {}
                }
            } else {
                colour[v] = Colour::Black;
                stack.pop();
            }
        }
    }
    None
}

/// Old-to-new id mapping produced by [`Network::topological_renumber`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation((1..=n).collect())
    }

    /// New id of 1-based `old`.
    pub fn apply(&self, old: usize) -> usize {
        self.0[old - 1]
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &v)| v == i + 1)
    }

    /// `mapping[old - 1] = new`.
    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

/// A validated acyclic network.
#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    nodes: Vec<NodeSpec>,
    arcs: Vec<(usize, usize)>,
    successors: Vec<Vec<usize>>,
    predecessors: Vec<Vec<usize>>,
    arrival_node: usize,
}

impl Network {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes ordered by id.
    pub fn nodes(&self) -> &[NodeSpec] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> Option<&NodeSpec> {
        id.checked_sub(1).and_then(|i| self.nodes.get(i))
    }

    /// Arcs in their original listing order (1-based).
    pub fn arcs(&self) -> &[(usize, usize)] {
        &self.arcs
    }

    /// 1-based predecessors of 1-based `id`.
    pub fn predecessors(&self, id: usize) -> impl Iterator<Item = usize> + '_ {
        self.predecessors[id - 1].iter().map(|&p| p + 1)
    }

    pub fn successors(&self, id: usize) -> impl Iterator<Item = usize> + '_ {
        self.successors[id - 1].iter().map(|&s| s + 1)
    }

    pub fn arrival_node(&self) -> usize {
        self.arrival_node
    }

    pub fn distributions(&self) -> Vec<DistributionSpec> {
        self.nodes.iter().map(|n| n.timing.clone()).collect()
    }

    /// Copy with node timings replaced, in id order.
    pub fn with_distributions(&self, timings: Vec<DistributionSpec>) -> Result<Network> {
        if timings.len() != self.nodes.len() {
            return Err(Error::DimensionMismatch {
                op: "with_distributions",
                left: (self.nodes.len(), 1),
                right: (timings.len(), 1),
            });
        }
        for t in &timings {
            t.validate()?;
        }
        let mut out = self.clone();
        for (node, t) in out.nodes.iter_mut().zip(timings) {
            node.timing = t;
        }
        Ok(out)
    }

    /// Converts back to the raw description.
    pub fn to_spec(&self) -> NetworkSpec {
        NetworkSpec {
            nodes: self.nodes.clone(),
            arcs: self.arcs.clone(),
            arrival_node: Some(self.arrival_node),
        }
    }

    /// Topological order as 1-based ids, ties broken by ascending id.
    pub fn topological_order(&self) -> Vec<usize> {
        let n = self.nodes.len();
        let mut indegree: Vec<usize> = self.predecessors.iter().map(Vec::len).collect();
        let mut ready: BinaryHeap<Reverse<usize>> =
            (0..n).filter(|&i| indegree[i] == 0).map(Reverse).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(Reverse(v)) = ready.pop() {
            order.push(v + 1);
            for &w in &self.successors[v] {
                indegree[w] -= 1;
                if indegree[w] == 0 {
                    ready.push(Reverse(w));
                }
            }
        }
        debug_assert_eq!(order.len(), n, "validated networks are acyclic");
        order
    }

    /// Relabels nodes so that every arc `(i, j)` has `i < j`.
    ///
    /// Returns the renumbered network and the old-to-new permutation,
    /// which is the identity when the input already satisfies `i < j`.
    pub fn topological_renumber(&self) -> (Network, Permutation) {
        let order = self.topological_order();
        let mut mapping = vec![0; order.len()];
        for (new_index, &old) in order.iter().enumerate() {
            mapping[old - 1] = new_index + 1;
        }
        let perm = Permutation(mapping);
        let spec = NetworkSpec {
            nodes: self
                .nodes
                .iter()
                .map(|node| NodeSpec {
                    id: perm.apply(node.id),
                    ..node.clone()
                })
                .collect(),
            arcs: self
                .arcs
                .iter()
                .map(|&(a, b)| (perm.apply(a), perm.apply(b)))
                .collect(),
            arrival_node: Some(perm.apply(self.arrival_node)),
        };
        let renumbered = spec.validate().expect("relabelling preserves validity");
        (renumbered, perm)
    }

    /// True when every arc `(i, j)` satisfies `i < j`.
    pub fn is_topologically_numbered(&self) -> bool {
        self.arcs.iter().all(|&(a, b)| a < b)
    }

    /// `p`: the largest number of arcs on a directed path.
    pub fn longest_path_length(&self) -> usize {
        let mut depth = vec![0usize; self.nodes.len()];
        for v in self.topological_order() {
            for &w in &self.successors[v - 1] {
                depth[w] = depth[w].max(depth[v - 1] + 1);
            }
        }
        depth.into_iter().max().unwrap_or(0)
    }

    /// `G` with `g_ij = 0` iff arc `(i, j)` exists, `ε` otherwise.
    pub fn support_matrix(&self) -> SupportMatrix {
        let n = self.nodes.len();
        let mut m = Matrix::null(n, n);
        for &(a, b) in &self.arcs {
            m.set(a - 1, b - 1, MaxPlus::ONE);
        }
        SupportMatrix {
            matrix: m,
            kind: SupportKind::General,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SupportKind {
    General,
    Tandem,
}

/// A 0/ε adjacency matrix: `G` for a general network, `H` for a tandem.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportMatrix {
    matrix: Matrix,
    kind: SupportKind,
}

impl SupportMatrix {
    /// `H` for an `n`-node tandem: `h_ij = 0` iff `i + 1 = j`.
    pub fn tandem(n: usize) -> Result<SupportMatrix> {
        if n == 0 {
            return Err(Error::ZeroCount("tandem node count"));
        }
        let mut m = Matrix::null(n, n);
        for i in 0..n - 1 {
            m.set(i, i + 1, MaxPlus::ONE);
        }
        Ok(SupportMatrix {
            matrix: m,
            kind: SupportKind::Tandem,
        })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn kind(&self) -> SupportKind {
        self.kind
    }

    pub fn size(&self) -> usize {
        self.matrix.rows()
    }

    /// All entries strictly below or on the diagonal are `ε`.
    pub fn is_strictly_upper_triangular(&self) -> bool {
        let n = self.matrix.rows();
        (0..n).all(|i| (0..=i).all(|j| self.matrix.get(i, j).is_epsilon()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn det(v: f64) -> DistributionSpec {
        DistributionSpec::Deterministic { value: v }
    }

    fn spec(ids: &[usize], arcs: &[(usize, usize)]) -> NetworkSpec {
        NetworkSpec::new(
            ids.iter()
                .map(|&id| NodeSpec::new(id, format!("n{id}"), det(1.0)))
                .collect(),
            arcs.to_vec(),
        )
    }

    const SIX_NODE_ARCS: [(usize, usize); 7] =
        [(1, 2), (1, 3), (2, 4), (3, 4), (3, 5), (4, 6), (5, 6)];

    #[test]
    fn six_node_model_is_valid() {
        let net = spec(&[1, 2, 3, 4, 5, 6], &SIX_NODE_ARCS)
            .validate()
            .unwrap();
        assert_eq!(net.longest_path_length(), 3);
        assert!(net.topological_renumber().1.is_identity());
    }

    #[test]
    fn single_node() {
        let net = spec(&[1], &[]).validate().unwrap();
        assert_eq!(net.longest_path_length(), 0);
        let g = net.support_matrix();
        assert_eq!(g.matrix().shape(), (1, 1));
        assert!(g.matrix().get(0, 0).is_epsilon());
    }

    #[test]
    fn two_cycle_rejected() {
        let err = spec(&[1, 2], &[(1, 2), (2, 1)]).validate().unwrap_err();
        match err {
            Error::Cycle(c) => {
                assert_eq!(c.first(), c.last());
                assert_eq!(c.len(), 3);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn longer_cycle_named() {
        let err = spec(&[1, 2, 3, 4], &[(1, 2), (2, 3), (3, 4), (4, 2)])
            .validate()
            .unwrap_err();
        assert_eq!(err.to_string(), "cycle detected: 2 -> 3 -> 4 -> 2");
    }

    #[test]
    fn malformed_arcs_rejected() {
        assert!(matches!(
            spec(&[1, 2], &[(1, 3)]).validate(),
            Err(Error::DanglingArc { from: 1, to: 3 })
        ));
        assert!(matches!(
            spec(&[1, 2], &[(2, 2)]).validate(),
            Err(Error::SelfLoop(2))
        ));
        assert!(matches!(
            spec(&[1, 2], &[(1, 2), (1, 2)]).validate(),
            Err(Error::DuplicateArc { from: 1, to: 2 })
        ));
        assert!(matches!(
            spec(&[1, 1], &[]).validate(),
            Err(Error::DuplicateNodeId(1))
        ));
        assert!(matches!(
            spec(&[1, 3], &[]).validate(),
            Err(Error::NodeIdOutOfRange { id: 3, .. })
        ));
        assert!(matches!(
            spec(&[], &[]).validate(),
            Err(Error::EmptyNetwork)
        ));
    }

    #[test]
    fn reverse_order_gets_reversing_permutation() {
        let net = spec(&[1, 2, 3, 4], &[(4, 3), (3, 2), (2, 1)])
            .validate()
            .unwrap();
        let (renumbered, perm) = net.topological_renumber();
        assert_eq!(perm.as_slice(), &[4, 3, 2, 1]);
        assert_eq!(renumbered.arcs(), &[(1, 2), (2, 3), (3, 4)]);
        assert_eq!(renumbered.node(1).unwrap().label, "n4");
    }

    #[test]
    fn tie_break_by_ascending_id() {
        let net = spec(&[1, 2, 3], &[(3, 1)]).validate().unwrap();
        assert_eq!(net.topological_order(), vec![2, 3, 1]);
    }

    #[test]
    fn tandem_support_matrix() {
        assert!(SupportMatrix::tandem(0).is_err());
        assert!(SupportMatrix::tandem(1).unwrap().matrix().is_null());
        let h2 = SupportMatrix::tandem(2).unwrap();
        assert_eq!(
            h2.matrix(),
            &Matrix::from_f64_rows(&[vec![f64::NEG_INFINITY, 0.0], vec![f64::NEG_INFINITY; 2]])
                .unwrap()
        );
        let h6 = SupportMatrix::tandem(6).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(!h6.matrix().get(i, j).is_epsilon(), i + 1 == j);
            }
        }
        assert_eq!(h6.kind(), SupportKind::Tandem);
    }

    #[test]
    fn two_node_support() {
        let net = spec(&[1, 2], &[(1, 2)]).validate().unwrap();
        assert_eq!(
            net.support_matrix().matrix(),
            SupportMatrix::tandem(2).unwrap().matrix()
        );
    }

    #[test]
    fn tandem_longest_path() {
        for n in 1..8 {
            let ids: Vec<usize> = (1..=n).collect();
            let arcs: Vec<_> = (1..n).map(|i| (i, i + 1)).collect();
            assert_eq!(
                spec(&ids, &arcs).validate().unwrap().longest_path_length(),
                n - 1
            );
        }
    }

    #[test]
    fn arrival_node_follows_renumbering() {
        let mut s = spec(&[1, 2], &[(2, 1)]);
        s.arrival_node = Some(2);
        let (renumbered, _) = s.validate().unwrap().topological_renumber();
        assert_eq!(renumbered.arrival_node(), 1);
        let mut bad = spec(&[1], &[]);
        bad.arrival_node = Some(4);
        assert!(bad.validate().is_err());
    }
}
