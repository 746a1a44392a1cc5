//! Small graph helpers over index-based adjacency lists.

use std::collections::{BTreeSet, VecDeque};

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

/// Connected components of the subgraph induced on `members`.
///
/// Components come out sorted by their smallest member, members ascending.
pub fn components<F, I>(members: &BTreeSet<usize>, neighbors: F) -> Vec<Vec<usize>>
where
    F: Fn(usize) -> I,
    I: IntoIterator<Item = usize>,
{
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for &start in members {
        if !seen.insert(start) {
            continue;
        }
        let mut comp = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for v in neighbors(u) {
                if members.contains(&v) && seen.insert(v) {
                    comp.push(v);
                    queue.push_back(v);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

pub fn is_connected<F, I>(members: &BTreeSet<usize>, neighbors: F) -> bool
where
    F: Fn(usize) -> I,
    I: IntoIterator<Item = usize>,
{
    components(members, neighbors).len() <= 1
}

/// Strongly connected components of a digraph on `0..n`, plus a flag per
/// vertex telling whether it lies on a directed cycle (self-loops count).
pub fn scc(n: usize, arcs: &[(usize, usize)]) -> (Vec<Vec<usize>>, Vec<bool>) {
    let mut g: DiGraph<(), ()> = DiGraph::with_capacity(n, arcs.len());
    for _ in 0..n {
        g.add_node(());
    }
    let mut looped = vec![false; n];
    for &(a, b) in arcs {
        if a == b {
            looped[a] = true;
        }
        g.add_edge(NodeIndex::new(a), NodeIndex::new(b), ());
    }
    let mut comps: Vec<Vec<usize>> = tarjan_scc(&g)
        .into_iter()
        .map(|c| {
            let mut c: Vec<usize> = c.into_iter().map(|i| i.index()).collect();
            c.sort_unstable();
            c
        })
        .collect();
    comps.sort();
    let mut cyclic = looped;
    for c in &comps {
        if c.len() > 1 {
            for &v in c {
                cyclic[v] = true;
            }
        }
    }
    (comps, cyclic)
}

/// Reachability closure of a small DAG given as successor lists.
pub fn reachability(succ: &[BTreeSet<usize>]) -> Vec<BTreeSet<usize>> {
    let n = succ.len();
    let mut reach: Vec<Option<BTreeSet<usize>>> = vec![None; n];
    fn visit(u: usize, succ: &[BTreeSet<usize>], reach: &mut Vec<Option<BTreeSet<usize>>>) {
        if reach[u].is_some() {
            return;
        }
        reach[u] = Some(BTreeSet::new());
        let mut acc = BTreeSet::new();
        for &v in &succ[u] {
            visit(v, succ, reach);
            acc.insert(v);
            acc.extend(reach[v].as_ref().unwrap().iter().copied());
        }
        reach[u] = Some(acc);
    }
    for u in 0..n {
        visit(u, succ, &mut reach);
    }
    reach.into_iter().map(Option::unwrap).collect()
}

/// Transitive reduction of a DAG given by its reachability sets.
pub fn transitive_reduction(reach: &[BTreeSet<usize>]) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for (u, ru) in reach.iter().enumerate() {
        for &v in ru {
            let implied = ru.iter().any(|&w| w != v && reach[w].contains(&v));
            if !implied {
                edges.push((u, v));
            }
        }
    }
    edges
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn components_of_path_with_gap() {
        let nb = |u: usize| -> Vec<usize> {
            match u {
                0 => vec![1],
                1 => vec![0, 2],
                2 => vec![1],
                _ => vec![],
            }
        };
        let members: BTreeSet<usize> = [0, 2, 3].into();
        assert_eq!(components(&members, nb), vec![vec![0], vec![2], vec![3]]);
        let members: BTreeSet<usize> = [0, 1, 2].into();
        assert_eq!(components(&members, nb), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn scc_marks_cycles_and_loops() {
        let (comps, cyc) = scc(4, &[(0, 1), (1, 0), (2, 2), (2, 3)]);
        assert_eq!(comps, vec![vec![0, 1], vec![2], vec![3]]);
        assert_eq!(cyc, vec![true, true, true, false]);
    }

    #[test]
    fn reduction_drops_shortcuts() {
        let succ: Vec<BTreeSet<usize>> = vec![[1, 2].into(), [2].into(), BTreeSet::new()];
        let reach = reachability(&succ);
        assert_eq!(transitive_reduction(&reach), vec![(0, 1), (1, 2)]);
    }
}
