//! Combinatorial Morse decompositions of flow models.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph;
use crate::model::{FlowModel, Kind, NodeId, NodeSet};
use crate::quotient::{self, Partition};

/// Morse sets and the connecting sets between them. Atoms are node ids for
/// flow models and box indices for grid computations.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MorseGraph<A> {
    pub morse_sets: Vec<Vec<A>>,
    pub edges: Vec<MorseEdge<A>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MorseEdge<A> {
    pub from: usize,
    pub to: usize,
    pub connecting: Vec<A>,
}

impl<A> MorseGraph<A> {
    pub fn edge_pairs(&self) -> BTreeSet<(usize, usize)> {
        self.edges.iter().map(|e| (e.from, e.to)).collect()
    }

    /// True when the edges admit no directed cycle.
    pub fn is_acyclic(&self) -> bool {
        let arcs: Vec<(usize, usize)> = self.edges.iter().map(|e| (e.from, e.to)).collect();
        let (_, cyclic) = graph::scc(self.morse_sets.len(), &arcs);
        !cyclic.into_iter().any(|c| c)
    }
}

/// Arcs `a -> x` for `a` in alpha(x), `x -> w` for `w` in omega(x), and a
/// loop on every closed or recurrent node.
pub fn chain_arcs(m: &FlowModel) -> Vec<(usize, usize)> {
    let mut arcs = Vec::new();
    for x in 0..m.len() {
        arcs.extend(m.alpha(x).iter().map(|&a| (a, x)));
        arcs.extend(m.omega(x).iter().map(|&w| (x, w)));
        if m.kind(x) != Kind::Nonrecurrent {
            arcs.push((x, x));
        }
    }
    arcs
}

/// Nodes on a directed cycle of the chain digraph.
pub fn chain_recurrent_nodes(m: &FlowModel) -> Vec<bool> {
    graph::scc(m.len(), &chain_arcs(m)).1
}

#[derive(Clone, Debug)]
pub struct MorseDecomposition {
    pub graph: MorseGraph<NodeId>,
    /// Blocks are the Morse sets and the nonempty connecting sets.
    pub partition: Partition,
    /// Morse set of each node, if any.
    pub morse_of: Vec<Option<usize>>,
}

fn morse_components(m: &FlowModel, cr: &[bool]) -> Vec<Vec<usize>> {
    let set: NodeSet = (0..m.len()).filter(|&i| cr[i]).collect();
    graph::components(&set, |u| {
        let mut nb: Vec<usize> = m.neighbors(u).iter().copied().collect();
        nb.extend(m.closure(u));
        nb.extend((0..m.len()).filter(|&v| m.closure(v).contains(&u)));
        nb
    })
}

/// The single Morse set holding the limit set `lim` of node `n`.
fn limit_target(m: &FlowModel, n: usize, lim: &NodeSet, morse_of: &[Option<usize>], side: &str) -> Result<usize> {
    let mut targets = BTreeSet::new();
    for &a in lim {
        match morse_of[a] {
            Some(j) => {
                targets.insert(j);
            }
            None => {
                return Err(Error::Inconsistent(format!(
                    "{side}-limit of `{}` contains `{}`, which is not chain recurrent",
                    m.id(n),
                    m.id(a)
                )))
            }
        }
    }
    match targets.len() {
        1 => Ok(*targets.iter().next().unwrap()),
        0 => Err(Error::Inconsistent(format!("`{}` has an empty {side}-limit", m.id(n)))),
        _ => Err(Error::Inconsistent(format!("{side}-limit of `{}` straddles several Morse sets", m.id(n)))),
    }
}

/// Builds the Morse graph of a valid compact model.
///
/// Chain-recurrent nodes are those on cycles of the chain digraph. Their
/// connected components are taken as Morse sets; a non-recurrent node whose
/// limit sets close a cycle through those sets is absorbed and the
/// components are recomputed.
pub fn morse_graph(m: &FlowModel) -> Result<MorseDecomposition> {
    m.ensure_valid()?;
    if !m.flags().compact {
        return Err(Error::Precondition("Morse graphs need a compact model".into()));
    }
    let mut cr = chain_recurrent_nodes(m);
    loop {
        let comps = morse_components(m, &cr);
        let mut morse_of = vec![None; m.len()];
        for (j, c) in comps.iter().enumerate() {
            for &i in c {
                morse_of[i] = Some(j);
            }
        }
        let rest: Vec<usize> = (0..m.len()).filter(|&i| !cr[i]).collect();
        let mut ends = Vec::with_capacity(rest.len());
        for &n in &rest {
            let j = limit_target(m, n, m.alpha(n), &morse_of, "alpha")?;
            let k = limit_target(m, n, m.omega(n), &morse_of, "omega")?;
            ends.push((j, k));
        }

        // Contract each Morse set to a vertex and look for cycles through
        // the remaining nodes.
        let k0 = comps.len();
        let mut arcs = Vec::new();
        for (t, &(j, k)) in ends.iter().enumerate() {
            arcs.push((j, k0 + t));
            arcs.push((k0 + t, k));
        }
        let (_, cyclic) = graph::scc(k0 + rest.len(), &arcs);
        let absorbed: Vec<usize> = (0..rest.len()).filter(|&t| cyclic[k0 + t]).map(|t| rest[t]).collect();
        if !absorbed.is_empty() {
            for n in absorbed {
                cr[n] = true;
            }
            continue;
        }

        let mut connecting: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (t, &n) in rest.iter().enumerate() {
            connecting.entry(ends[t]).or_default().push(n);
        }
        let mut groups: Vec<Vec<usize>> = comps.clone();
        groups.extend(connecting.values().cloned());
        let partition = Partition::from_groups(m.len(), groups);
        let graph = MorseGraph {
            morse_sets: comps.iter().map(|c| m.ids_of(c)).collect(),
            edges: connecting
                .into_iter()
                .map(|((from, to), nodes)| MorseEdge { from, to, connecting: m.ids_of(&nodes) })
                .collect(),
        };
        return Ok(MorseDecomposition { graph, partition, morse_of });
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MorseCheck {
    /// AO blocks that are not inside a single Morse or connecting set.
    pub offending_blocks: Vec<String>,
    /// Connecting blocks whose limit sets disagree with the edge direction.
    pub misdirected_blocks: Vec<String>,
    pub acyclic: bool,
}

impl MorseCheck {
    pub fn passed(&self) -> bool {
        self.offending_blocks.is_empty() && self.misdirected_blocks.is_empty() && self.acyclic
    }
}

/// Checks that the AO partition refines the Morse partition and that each
/// connecting block runs from the Morse set holding its alpha-limit to the
/// one holding its omega-limit.
pub fn verify_morse_quotient(m: &FlowModel, morse: &MorseDecomposition) -> Result<MorseCheck> {
    m.ensure_valid()?;
    let ao = quotient::ao_partition(m);
    let p = &morse.partition;
    let mut offending = Vec::new();
    let mut misdirected = Vec::new();
    for b in ao.blocks() {
        if b.iter().any(|&i| p.block_of(i) != p.block_of(b[0])) {
            offending.push(m.id(b[0]).to_string());
            continue;
        }
        if morse.morse_of[b[0]].is_some() {
            continue;
        }
        let edge = morse
            .graph
            .edges
            .iter()
            .find(|e| e.connecting.iter().any(|c| c == m.id(b[0])))
            .expect("non-recurrent node lies on an edge");
        let inside = |lim: NodeSet, target: usize| lim.iter().all(|&a| morse.morse_of[a] == Some(target));
        let alpha = quotient::union_alpha(m, b);
        let omega = quotient::union_omega(m, b);
        if !inside(alpha, edge.from) || !inside(omega, edge.to) {
            misdirected.push(m.id(b[0]).to_string());
        }
    }
    Ok(MorseCheck { offending_blocks: offending, misdirected_blocks: misdirected, acyclic: morse.graph.is_acyclic() })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UnstableCell {
    /// Label of the singular block the cell flows out of.
    pub center: String,
    pub members: Vec<NodeId>,
}

/// Unstable-manifold decomposition of a Morse-shaped model: one cell per
/// singular block, holding the block and every non-recurrent node whose
/// alpha-limit lies in it.
pub fn unstable_decomposition(m: &FlowModel) -> Result<Vec<UnstableCell>> {
    m.ensure_valid()?;
    if !m.flags().compact {
        return Err(Error::Precondition("unstable decomposition needs a compact model".into()));
    }
    let awo = quotient::awo_partition(m);
    for i in 0..m.len() {
        match m.kind(i) {
            Kind::Periodic => {
                return Err(Error::Precondition(format!("`{}` is a periodic orbit; limit sets must be singular", m.id(i))))
            }
            Kind::RecurrentNonclosed => {
                return Err(Error::Precondition(format!("`{}` is recurrent; limit sets must be singular", m.id(i))))
            }
            _ => {}
        }
    }
    let mut cells: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (b, members) in awo.blocks().iter().enumerate() {
        if m.kind(members[0]) == Kind::Singular {
            cells.insert(b, members.clone());
        }
    }
    for i in (0..m.len()).filter(|&i| m.kind(i) == Kind::Nonrecurrent) {
        let blocks = awo.blocks_meeting(m.alpha(i));
        if blocks.len() != 1 {
            return Err(Error::Precondition(format!("alpha-limit of `{}` is not a single singular block", m.id(i))));
        }
        cells.get_mut(blocks.iter().next().unwrap()).unwrap().push(i);
    }
    Ok(cells
        .into_iter()
        .map(|(b, mut members)| {
            members.sort_unstable();
            UnstableCell { center: m.id(awo.block(b)[0]).to_string(), members: m.ids_of(&members) }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Flags, OrbitNode};

    fn sphere_grad() -> FlowModel {
        FlowModel::with_contact_adjacency(
            Flags::surface(2, false),
            vec![
                OrbitNode::new("s+", Kind::Singular),
                OrbitNode::new("s-", Kind::Singular),
                OrbitNode::new("A", Kind::Nonrecurrent).family().alpha(["s+"]).omega(["s-"]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn sphere_gradient_has_source_to_sink_edge() {
        let d = morse_graph(&sphere_grad()).unwrap();
        assert_eq!(d.graph.morse_sets, vec![vec!["s+".to_string()], vec!["s-".to_string()]]);
        assert_eq!(d.graph.edges, vec![MorseEdge { from: 0, to: 1, connecting: vec!["A".to_string()] }]);
        let check = verify_morse_quotient(&sphere_grad(), &d).unwrap();
        assert!(check.passed());
    }

    #[test]
    fn homoclinic_loop_is_chain_recurrent() {
        let m = FlowModel::with_contact_adjacency(
            Flags::compact_hausdorff(),
            vec![
                OrbitNode::new("s", Kind::Singular),
                OrbitNode::new("o", Kind::Nonrecurrent).alpha(["s"]).omega(["s"]),
                OrbitNode::new("c", Kind::Singular),
                OrbitNode::new("A", Kind::Periodic).family().tb(["c", "o", "s"]),
            ],
        )
        .unwrap();
        assert!(chain_recurrent_nodes(&m).into_iter().all(|c| c));
        let d = morse_graph(&m).unwrap();
        assert_eq!(d.graph.morse_sets.len(), 1);
        assert!(d.graph.edges.is_empty());
    }

    #[test]
    fn non_compact_refused() {
        let mut flags = Flags::compact_hausdorff();
        flags.compact = false;
        let m = FlowModel::new(flags, vec![OrbitNode::new("p", Kind::Singular)], vec![]).unwrap();
        assert!(matches!(morse_graph(&m), Err(Error::Precondition(_))));
    }

    #[test]
    fn periodic_limit_blocks_unstable_decomposition() {
        let m = FlowModel::with_contact_adjacency(
            Flags::compact_hausdorff(),
            vec![
                OrbitNode::new("g", Kind::Periodic),
                OrbitNode::new("h", Kind::Periodic),
                OrbitNode::new("U", Kind::Nonrecurrent).family().alpha(["g"]).omega(["h"]),
            ],
        )
        .unwrap();
        assert!(matches!(unstable_decomposition(&m), Err(Error::Precondition(_))));
    }

    #[test]
    fn sphere_gradient_unstable_cells() {
        let cells = unstable_decomposition(&sphere_grad()).unwrap();
        assert_eq!(cells.len(), 2);
        assert_eq!(cells[0].members, vec!["A".to_string(), "s+".to_string()]);
        assert_eq!(cells[1].members, vec!["s-".to_string()]);
    }
}
