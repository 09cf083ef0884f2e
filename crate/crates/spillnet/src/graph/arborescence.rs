//! Maximum spanning arborescence by the Chu-Liu/Edmonds algorithm.
//!
//! The root is the vertex with the largest weighted out-degree (ties broken
//! by lexicographic label). Each remaining vertex picks its best incoming
//! edge; cycles are contracted into supernodes with rescored incoming edges
//! (incoming score minus the displaced in-cycle edge), the reduced problem is
//! solved recursively, and contractions are unwound by breaking one cycle
//! edge per level.

use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::SpilloverNetwork;

/// One root-to-leaf path through the arborescence.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TreePath {
    /// Vertex indices from root to leaf.
    pub vertices: Vec<usize>,
    /// Edge count along the path.
    pub steps: usize,
    /// Sum of edge weights along the path.
    pub weight: f64,
}

/// Rooted spanning tree maximizing total edge weight.
#[derive(Debug, Clone, PartialEq)]
pub struct Arborescence {
    pub labels: Vec<String>,
    pub root: usize,
    /// `parent[v]` is `Some((parent index, edge weight))` for every non-root
    /// vertex, `None` for the root.
    pub parent: Vec<Option<(usize, f64)>>,
    pub total_weight: f64,
    /// Root-to-leaf paths, one per leaf, children visited in index order.
    pub paths: Vec<TreePath>,
}

impl Arborescence {
    pub fn root_label(&self) -> &str {
        &self.labels[self.root]
    }

    /// Child lists in index order.
    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.labels.len()];
        for (v, p) in self.parent.iter().enumerate() {
            if let Some((u, _)) = p {
                out[*u].push(v);
            }
        }
        out
    }

    /// The path with the largest weight sum (ties: first in path order).
    pub fn max_weight_path(&self) -> Option<&TreePath> {
        self.paths
            .iter()
            .reduce(|best, p| if p.weight > best.weight { p } else { best })
    }

    /// The path with the smallest weight sum (ties: first in path order).
    pub fn min_weight_path(&self) -> Option<&TreePath> {
        self.paths
            .iter()
            .reduce(|best, p| if p.weight < best.weight { p } else { best })
    }
}

/// Pick the root per the max-out-degree rule and return the maximum spanning
/// arborescence of the requested view. Only positive-weight edges exist;
/// vertices unreachable from the root over those edges are an error.
pub fn max_spanning_arborescence(
    net: &SpilloverNetwork,
    filtered: bool,
) -> Result<Arborescence> {
    let w = net.view(filtered);
    let n = net.n();
    if n == 0 {
        return Err(Error::InsufficientData {
            what: "arborescence",
            needed: 1,
            have: 0,
        });
    }

    // Root: max weighted out-degree, ties to the lexicographically smallest label.
    let mut root = 0usize;
    let mut best_out = f64::NEG_INFINITY;
    for i in 0..n {
        let out: f64 = w.row(i).iter().sum();
        if out > best_out || (out == best_out && net.labels[i] < net.labels[root]) {
            best_out = out;
            root = i;
        }
    }

    // Reachability over positive edges.
    let mut seen = vec![false; n];
    let mut stack = vec![root];
    seen[root] = true;
    while let Some(u) = stack.pop() {
        for v in 0..n {
            if !seen[v] && w[(u, v)] > 0.0 {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    let unreachable: Vec<String> = (0..n)
        .filter(|&v| !seen[v])
        .map(|v| net.labels[v].clone())
        .collect();
    if !unreachable.is_empty() {
        return Err(Error::PartialCoverage {
            root: net.labels[root].clone(),
            unreachable,
        });
    }

    // Scores: positive edges only, everything else absent.
    let mut scores = DMatrix::from_fn(n, n, |i, j| {
        if i != j && w[(i, j)] > 0.0 {
            w[(i, j)]
        } else {
            f64::NEG_INFINITY
        }
    });
    let mut active = vec![true; n];
    let parents = contract(&mut scores, &mut active, root);

    let mut parent = vec![None; n];
    let mut total_weight = 0.0;
    for v in 0..n {
        if v == root {
            continue;
        }
        let u = parents[v].expect("non-root vertex must have a parent");
        let weight = w[(u, v)];
        parent[v] = Some((u, weight));
        total_weight += weight;
    }

    let paths = enumerate_paths(&parent, root, n);
    Ok(Arborescence {
        labels: net.labels.clone(),
        root,
        parent,
        total_weight,
        paths,
    })
}

/// One level of Chu-Liu/Edmonds: pick best parents, contract the first
/// cycle if any, recurse, then expand.
fn contract(scores: &mut DMatrix<f64>, active: &mut [bool], root: usize) -> Vec<Option<usize>> {
    let n = scores.nrows();
    let mut parents: Vec<Option<usize>> = vec![None; n];
    for v in 0..n {
        if !active[v] || v == root {
            continue;
        }
        let mut best = f64::NEG_INFINITY;
        let mut arg = None;
        for u in 0..n {
            if active[u] && u != v && scores[(u, v)] > best {
                best = scores[(u, v)];
                arg = Some(u);
            }
        }
        parents[v] = arg;
    }

    let cycle = match find_cycle(&parents, active, root) {
        Some(c) => c,
        None => return parents,
    };
    let rep = cycle[0];
    let in_cycle = |v: usize| cycle.contains(&v);

    // Rescore edges in and out of the contracted cycle through the
    // representative vertex. For incoming edges the displaced in-cycle edge
    // is charged against the candidate, which is what makes the greedy
    // choice after contraction globally optimal.
    let mut enter_at: HashMap<usize, usize> = HashMap::new();
    let mut leave_from: HashMap<usize, usize> = HashMap::new();
    let saved_scores = scores.clone();
    for v in 0..n {
        if !active[v] || in_cycle(v) {
            continue;
        }
        let mut best_in = f64::NEG_INFINITY;
        let mut best_in_u = None;
        let mut best_out = f64::NEG_INFINITY;
        let mut best_out_u = None;
        for &u in &cycle {
            let cycle_edge = scores[(parents[u].expect("cycle vertex has parent"), u)];
            let adjusted = scores[(v, u)] - cycle_edge;
            if adjusted > best_in {
                best_in = adjusted;
                best_in_u = Some(u);
            }
            if scores[(u, v)] > best_out {
                best_out = scores[(u, v)];
                best_out_u = Some(u);
            }
        }
        scores[(v, rep)] = best_in;
        scores[(rep, v)] = best_out;
        if let Some(u) = best_in_u {
            enter_at.insert(v, u);
        }
        if let Some(u) = best_out_u {
            leave_from.insert(v, u);
        }
    }
    for &u in &cycle {
        if u != rep {
            active[u] = false;
        }
    }

    let mut sub = contract(scores, active, root);

    // Expand: the edge chosen into the representative decides where the
    // cycle is broken; edges leaving the representative map back to their
    // real cycle endpoints.
    for &u in &cycle {
        if u != rep {
            active[u] = true;
        }
    }
    *scores = saved_scores;

    let entering = sub[rep].expect("contracted vertex must receive an edge");
    let broken = *enter_at
        .get(&entering)
        .expect("entering vertex was rescored");
    for v in 0..n {
        if active[v] && v != rep && sub[v] == Some(rep) {
            sub[v] = Some(leave_from[&v]);
        }
    }
    for &u in &cycle {
        sub[u] = parents[u];
    }
    sub[broken] = Some(entering);
    sub
}

/// First cycle in the parent function, if any, listed in cycle order.
fn find_cycle(parents: &[Option<usize>], active: &[bool], root: usize) -> Option<Vec<usize>> {
    let n = parents.len();
    // 0 = unvisited, 1 = on current walk, 2 = settled
    let mut mark = vec![0u8; n];
    mark[root] = 2;
    for start in 0..n {
        if !active[start] || mark[start] != 0 {
            continue;
        }
        let mut walk = Vec::new();
        let mut v = start;
        while mark[v] == 0 {
            mark[v] = 1;
            walk.push(v);
            match parents[v] {
                Some(p) => v = p,
                None => break,
            }
        }
        if mark[v] == 1 {
            // closed a cycle at v
            let pos = walk.iter().position(|&u| u == v).unwrap();
            let cycle = walk[pos..].to_vec();
            for &u in &walk {
                mark[u] = 2;
            }
            return Some(cycle);
        }
        for &u in &walk {
            mark[u] = 2;
        }
    }
    None
}

fn enumerate_paths(parent: &[Option<(usize, f64)>], root: usize, n: usize) -> Vec<TreePath> {
    let mut children = vec![Vec::new(); n];
    for (v, p) in parent.iter().enumerate() {
        if let Some((u, _)) = p {
            children[*u].push(v);
        }
    }
    let mut paths = Vec::new();
    let mut trail: Vec<usize> = vec![root];
    let mut weight_trail: Vec<f64> = vec![0.0];
    // Iterative DFS preserving index order.
    fn dfs(
        v: usize,
        children: &[Vec<usize>],
        parent: &[Option<(usize, f64)>],
        trail: &mut Vec<usize>,
        weight_trail: &mut Vec<f64>,
        paths: &mut Vec<TreePath>,
    ) {
        if children[v].is_empty() {
            paths.push(TreePath {
                vertices: trail.clone(),
                steps: trail.len() - 1,
                weight: *weight_trail.last().unwrap(),
            });
            return;
        }
        for &c in &children[v] {
            let w = parent[c].unwrap().1;
            trail.push(c);
            weight_trail.push(weight_trail.last().unwrap() + w);
            dfs(c, children, parent, trail, weight_trail, paths);
            trail.pop();
            weight_trail.pop();
        }
    }
    dfs(
        root,
        &children,
        parent,
        &mut trail,
        &mut weight_trail,
        &mut paths,
    );
    paths
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::test_network;
    use nalgebra::DMatrix;

    #[test]
    fn two_vertices_single_edge() {
        let mut w = DMatrix::zeros(2, 2);
        w[(0, 1)] = 0.4; // A -> B
        w[(1, 0)] = 0.1;
        let net = test_network(&["A", "B"], w);
        let arb = max_spanning_arborescence(&net, false).unwrap();
        assert_eq!(arb.root_label(), "A");
        assert_eq!(arb.parent[1], Some((0, 0.4)));
        assert!((arb.total_weight - 0.4).abs() < 1e-15);
        assert_eq!(arb.paths.len(), 1);
        assert_eq!(arb.paths[0].steps, 1);
    }

    #[test]
    fn cycle_contraction_fixture() {
        // w_AB = w_BC = w_CA = 0.9, w_AC = 0.8; rooted at A the optimum is
        // {A->B, B->C} with total 1.8, not the greedy per-vertex picks.
        let mut w = DMatrix::zeros(3, 3);
        w[(0, 1)] = 0.9;
        w[(1, 2)] = 0.9;
        w[(2, 0)] = 0.9;
        w[(0, 2)] = 0.8;
        let net = test_network(&["A", "B", "C"], w);
        let arb = max_spanning_arborescence(&net, false).unwrap();
        assert_eq!(arb.root_label(), "A");
        assert_eq!(arb.parent[1], Some((0, 0.9)));
        assert_eq!(arb.parent[2], Some((1, 0.9)));
        assert!((arb.total_weight - 1.8).abs() < 1e-12);
    }

    #[test]
    fn unreachable_vertices_error() {
        let mut w = DMatrix::zeros(3, 3);
        w[(0, 1)] = 0.5; // C is isolated
        let net = test_network(&["A", "B", "C"], w);
        match max_spanning_arborescence(&net, false) {
            Err(Error::PartialCoverage { unreachable, .. }) => {
                assert_eq!(unreachable, vec!["C".to_string()]);
            }
            other => panic!("expected PartialCoverage, got {other:?}"),
        }
    }

    #[test]
    fn root_tie_breaks_lexicographically() {
        // B and A have the same out-degree; A wins the tie.
        let mut w = DMatrix::zeros(3, 3);
        w[(1, 0)] = 0.5; // B -> A
        w[(0, 1)] = 0.5; // A -> B
        w[(0, 2)] = 0.0;
        w[(1, 2)] = 0.0;
        // give both a path to C so spanning works
        w[(0, 2)] = 0.2;
        w[(1, 2)] = 0.2;
        let net = test_network(&["A", "B", "C"], w);
        let arb = max_spanning_arborescence(&net, false).unwrap();
        assert_eq!(arb.root_label(), "A");
    }

    #[test]
    fn path_statistics_match_tree() {
        // root 0 -> 1 -> {2, 3}; leaf count = path count
        let mut w = DMatrix::zeros(4, 4);
        w[(0, 1)] = 0.9;
        w[(1, 2)] = 0.4;
        w[(1, 3)] = 0.3;
        let net = test_network(&["A", "B", "C", "D"], w);
        let arb = max_spanning_arborescence(&net, false).unwrap();
        assert_eq!(arb.paths.len(), 2);
        let max = arb.max_weight_path().unwrap();
        assert_eq!(max.vertices, vec![0, 1, 2]);
        assert!((max.weight - 1.3).abs() < 1e-12);
        assert_eq!(max.steps, 2);
        let min = arb.min_weight_path().unwrap();
        assert!((min.weight - 1.2).abs() < 1e-12);
    }
}
