//! Invariants of flows of finite type on compact surfaces.
//!
//! Every node of a surface model carries a [`SurfaceTag`]; the functions here
//! read the local types from the tags and the global structure from the
//! abstract weak orbit space.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{FlowModel, Kind, NodeId, NodeSet, SurfaceTag};
use crate::quotient::{self, Level, QuotientSpace};
use crate::topology::{FinitePoset, MultiGraph};

/// The five kinds of abstract weak orbits of a flow of finite type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AwoType {
    SingularPoint,
    SemiMultiSaddleSeparatrix,
    PeriodicComponent,
    TrivialFlowBox,
    TransverseAnnulus,
}

/// How much of the connection diagram is kept.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagramConvention {
    /// Multi-saddles and their separatrices only.
    Hamiltonian,
    /// Also sinks, sources and limit circuits.
    General,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelClass {
    Gradient,
    Hamiltonian,
    General,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MscDiagram {
    pub convention: DiagramConvention,
    pub nodes: BTreeSet<NodeId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Stratification {
    pub model_class: ModelClass,
    /// `S<=0`, `S<=1`, `S<=2`.
    pub strata: [BTreeSet<NodeId>; 3],
    pub nested: bool,
    /// Whether the top stratum is what the model class predicts: the
    /// periodic nodes for Hamiltonian flows, the non-recurrent nodes off the
    /// diagram for gradient flows. `None` for general flows.
    pub top_stratum_matches: Option<bool>,
    /// Height of each abstract weak orbit under the boundary order.
    pub heights: BTreeMap<String, usize>,
    pub height: usize,
    pub height_bound: usize,
    /// A longest chain, bottom first.
    pub witness: Vec<String>,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IndexEntry {
    pub node: NodeId,
    pub tag: SurfaceTag,
    /// Twice the index, so that boundary points stay integral.
    pub doubled_index: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EulerReport {
    pub table: Vec<IndexEntry>,
    pub doubled_index_sum: i64,
    /// `None` when the sum is a half-integer.
    pub index_sum: Option<i64>,
    pub euler_characteristic: i64,
    pub passes: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SurfaceReport {
    pub is_finite_type: bool,
    pub awo_types: BTreeMap<String, AwoType>,
    /// Blocks that fit none of the five types, with the reason.
    pub unclassified: BTreeMap<String, String>,
    pub msc_diagram: MscDiagram,
    pub stratification: Option<Stratification>,
    pub euler: EulerReport,
    pub height_bound_ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReebGraph {
    pub poset: FinitePoset,
    pub graph: MultiGraph,
}

fn require_surface(m: &FlowModel) -> Result<()> {
    if m.flags().surface.is_none() {
        return Err(Error::Precondition("not a surface model".into()));
    }
    Ok(())
}

fn tag(m: &FlowModel, i: usize) -> Option<SurfaceTag> {
    m.node(i).surface_tag
}

fn require_tags(m: &FlowModel) -> Result<()> {
    // No tag describes non-closed recurrence, so those nodes are exempt.
    let missing: Vec<&str> = (0..m.len())
        .filter(|&i| tag(m, i).is_none() && m.kind(i) != Kind::RecurrentNonclosed)
        .map(|i| m.id(i))
        .collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(Error::Precondition(format!("missing surface_tag on {}", missing.join(", "))))
    }
}

/// No sinks, sources, limit cycles, flow boxes or recurrence; every
/// singular point is a center or a multi-saddle.
pub fn is_hamiltonian_shaped(m: &FlowModel) -> Result<bool> {
    require_surface(m)?;
    Ok((0..m.len()).all(|i| match (m.kind(i), tag(m, i)) {
        (_, None) => false,
        (Kind::Singular, Some(t)) => t == SurfaceTag::Center || t.is_saddle(),
        (Kind::Periodic, Some(t)) => t == SurfaceTag::PeriodicAnnulus,
        (Kind::Nonrecurrent, Some(t)) => t == SurfaceTag::Separatrix,
        (Kind::RecurrentNonclosed, _) => false,
    }))
}

fn is_gradient_shaped(m: &FlowModel) -> bool {
    (0..m.len()).all(|i| matches!(m.kind(i), Kind::Singular | Kind::Nonrecurrent))
}

fn model_class(m: &FlowModel) -> Result<ModelClass> {
    Ok(if is_hamiltonian_shaped(m)? {
        ModelClass::Hamiltonian
    } else if is_gradient_shaped(m) {
        ModelClass::Gradient
    } else {
        ModelClass::General
    })
}

pub(crate) fn classify_block(m: &FlowModel, block: &[usize]) -> std::result::Result<AwoType, String> {
    let i = block[0];
    let tags: BTreeSet<SurfaceTag> = block.iter().filter_map(|&j| tag(m, j)).collect();
    let single = block.len() == 1 && !m.is_family(i);
    let Some(&t) = tags.iter().next() else {
        return Err("untagged".into());
    };
    let uniform = tags.len() == 1 || tags.iter().all(|t| t.is_saddle());
    match m.kind(i) {
        Kind::RecurrentNonclosed => Err("non-closed recurrent orbits".into()),
        Kind::Singular if !single => Err("non-isolated singular points".into()),
        Kind::Singular if matches!(t, SurfaceTag::Center) || t.is_saddle() || t.is_sink_or_source() => {
            Ok(AwoType::SingularPoint)
        }
        Kind::Singular => Err(format!("tag {t:?} on a singular point")),
        Kind::Periodic if matches!(t, SurfaceTag::PeriodicAnnulus | SurfaceTag::LimitCycle) && uniform => {
            Ok(AwoType::PeriodicComponent)
        }
        Kind::Periodic => Err(format!("tag {t:?} on periodic orbits")),
        Kind::Nonrecurrent if !uniform => Err("mixed tags".into()),
        Kind::Nonrecurrent => {
            let limits: NodeSet = block.iter().flat_map(|&j| m.alpha(j).iter().chain(m.omega(j))).copied().collect();
            match t {
                SurfaceTag::Separatrix if limits.iter().any(|&l| tag(m, l).is_some_and(SurfaceTag::is_saddle)) => {
                    Ok(AwoType::SemiMultiSaddleSeparatrix)
                }
                SurfaceTag::Separatrix => Err("separatrix without a multi-saddle in its limit sets".into()),
                SurfaceTag::TrivialFlowBox if m.is_family(i) => Ok(AwoType::TrivialFlowBox),
                SurfaceTag::TransverseAnnulus if m.is_family(i) => Ok(AwoType::TransverseAnnulus),
                _ => Err(format!("tag {t:?} on non-recurrent orbits")),
            }
        }
    }
}

fn saddle_nodes(m: &FlowModel) -> NodeSet {
    (0..m.len()).filter(|&i| tag(m, i).is_some_and(SurfaceTag::is_saddle)).collect()
}

/// Multi-saddle connection diagram. Separatrices are single non-closed
/// orbits with a multi-saddle in a limit set; families of orbits are never
/// part of the diagram.
pub fn msc_diagram(m: &FlowModel) -> Result<MscDiagram> {
    require_surface(m)?;
    let saddles = saddle_nodes(m);
    let mut d: NodeSet = saddles.clone();
    for i in (0..m.len()).filter(|&i| !m.kind(i).is_closed() && !m.is_family(i)) {
        if m.alpha(i).iter().chain(m.omega(i)).any(|l| saddles.contains(l)) {
            d.insert(i);
        }
    }
    let convention = if is_hamiltonian_shaped(m)? { DiagramConvention::Hamiltonian } else { DiagramConvention::General };
    if convention == DiagramConvention::General {
        for i in 0..m.len() {
            if tag(m, i).is_some_and(|t| t.is_sink_or_source() || t == SurfaceTag::LimitCycle) {
                d.insert(i);
            }
            // Limit circuits: limit sets made of more than closed orbits.
            for lim in [m.alpha(i), m.omega(i)] {
                if lim.iter().any(|&l| !m.kind(l).is_closed()) {
                    d.extend(lim.iter().copied());
                }
            }
        }
    }
    Ok(MscDiagram { convention, nodes: m.names(&d) })
}

fn awo_space(m: &FlowModel) -> Result<QuotientSpace> {
    quotient::compute_quotient(m, Level::Awo)
}

/// Filtration by singular points, the connection diagram and everything,
/// with the height of the boundary order checked against the bound for the
/// model class.
pub fn stratification(m: &FlowModel) -> Result<Stratification> {
    let report = classify_awos(m)?;
    report
        .stratification
        .ok_or_else(|| Error::Precondition(format!("not of finite type: {}", describe(&report.unclassified))))
}

fn describe(unclassified: &BTreeMap<String, String>) -> String {
    unclassified.iter().map(|(b, r)| format!("{b} ({r})")).collect::<Vec<_>>().join(", ")
}

fn build_stratification(m: &FlowModel, awo: &QuotientSpace, d: &MscDiagram) -> Result<Stratification> {
    let class = model_class(m)?;
    let sing: BTreeSet<NodeId> = m.names(&(0..m.len()).filter(|&i| m.kind(i) == Kind::Singular).collect());
    let s1: BTreeSet<NodeId> = sing.union(&d.nodes).cloned().collect();
    let all: BTreeSet<NodeId> = (0..m.len()).map(|i| m.id(i).to_string()).collect();
    let nested = sing.is_subset(&s1) && s1.is_subset(&all);
    let top: BTreeSet<NodeId> = all.difference(&s1).cloned().collect();
    let of_kind = |k: Kind| -> BTreeSet<NodeId> { m.names(&(0..m.len()).filter(|&i| m.kind(i) == k).collect()) };
    let top_stratum_matches = match class {
        ModelClass::Hamiltonian => Some(top == of_kind(Kind::Periodic)),
        ModelClass::Gradient => Some(top == of_kind(Kind::Nonrecurrent).difference(&d.nodes).cloned().collect()),
        ModelClass::General => None,
    };
    let hs = awo.order.heights();
    let heights: BTreeMap<String, usize> = awo.labels().into_iter().zip(hs.iter().copied()).collect();
    let height = hs.iter().copied().max().unwrap_or(0);
    let height_bound = match class {
        ModelClass::Gradient | ModelClass::Hamiltonian => 2,
        ModelClass::General => 3,
    };
    let witness = awo.order.longest_chain().into_iter().map(|x| awo.order.label(x).to_string()).collect();
    Ok(Stratification {
        model_class: class,
        strata: [sing, s1, all],
        nested,
        top_stratum_matches,
        heights,
        height,
        height_bound,
        witness,
        ok: nested && height <= height_bound && top_stratum_matches != Some(false),
    })
}

fn doubled_index(t: SurfaceTag) -> Option<i64> {
    Some(match t {
        SurfaceTag::Center | SurfaceTag::Sink | SurfaceTag::Source => 2,
        SurfaceTag::Saddle(k) => 2 - k as i64,
        SurfaceTag::BoundarySink | SurfaceTag::BoundarySource => 1,
        // The double of a boundary point with k sectors has 2k sectors.
        SurfaceTag::BoundarySaddle(k) => 1 - k as i64,
        _ => return None,
    })
}

/// Sum of the indices of the singular points against the declared Euler
/// characteristic.
pub fn euler_check(m: &FlowModel) -> Result<EulerReport> {
    require_surface(m)?;
    let chi = m.flags().surface.as_ref().unwrap().euler_characteristic;
    let mut table = Vec::new();
    for i in (0..m.len()).filter(|&i| m.kind(i) == Kind::Singular) {
        let t = tag(m, i).ok_or_else(|| Error::Precondition(format!("singular node `{}` has no surface_tag", m.id(i))))?;
        if m.is_family(i) {
            return Err(Error::Precondition(format!("`{}` is not an isolated singular point", m.id(i))));
        }
        let doubled = doubled_index(t)
            .ok_or_else(|| Error::Precondition(format!("tag {t:?} on singular node `{}`", m.id(i))))?;
        table.push(IndexEntry { node: m.id(i).to_string(), tag: t, doubled_index: doubled });
    }
    let doubled_index_sum: i64 = table.iter().map(|e| e.doubled_index).sum();
    Ok(EulerReport {
        table,
        doubled_index_sum,
        index_sum: (doubled_index_sum % 2 == 0).then_some(doubled_index_sum / 2),
        euler_characteristic: chi,
        passes: doubled_index_sum == 2 * chi,
    })
}

/// Classifies every abstract weak orbit and collects the other surface
/// invariants. Stratification is only computed for flows of finite type.
pub fn classify_awos(m: &FlowModel) -> Result<SurfaceReport> {
    require_surface(m)?;
    m.ensure_valid()?;
    require_tags(m)?;
    let awo = awo_space(m)?;
    let mut awo_types = BTreeMap::new();
    let mut unclassified = BTreeMap::new();
    for (b, label) in awo.partition.blocks().iter().zip(awo.labels()) {
        match classify_block(m, b) {
            Ok(t) => {
                awo_types.insert(label, t);
            }
            Err(r) => {
                unclassified.insert(label, r);
            }
        }
    }
    let is_finite_type = unclassified.is_empty();
    let msc = msc_diagram(m)?;
    let stratification = if is_finite_type { Some(build_stratification(m, &awo, &msc)?) } else { None };
    Ok(SurfaceReport {
        is_finite_type,
        awo_types,
        unclassified,
        msc_diagram: msc,
        height_bound_ok: stratification.as_ref().is_some_and(|s| s.height <= s.height_bound),
        stratification,
        euler: euler_check(m)?,
    })
}

/// The extended weak orbit space of a Hamiltonian flow read as a graph:
/// periodic annuli are the edges, everything else the vertices.
pub fn reeb_abstract_graph(m: &FlowModel) -> Result<ReebGraph> {
    m.ensure_valid()?;
    if !is_hamiltonian_shaped(m)? {
        return Err(Error::Precondition("expected a Hamiltonian surface flow".into()));
    }
    let ext = quotient::compute_quotient(m, Level::Extended)?;
    let poset = FinitePoset::new(ext.order.clone()).map_err(|e| Error::Inconsistent(e.to_string()))?;
    let graph = poset
        .as_multigraph()
        .map_err(|r| Error::Inconsistent(format!("extended orbit space is not a graph: {r}")))?;
    let periodic_family = |label: &str| -> bool {
        let i = m.index_of(label).unwrap();
        m.kind(i) == Kind::Periodic && m.is_family(i)
    };
    for v in &graph.vertices {
        if periodic_family(v) {
            return Err(Error::Inconsistent(format!("periodic annulus `{v}` has no end")));
        }
    }
    for e in &graph.edges {
        if !periodic_family(&e.label) {
            return Err(Error::Inconsistent(format!("edge `{}` is not a periodic annulus", e.label)));
        }
    }
    Ok(ReebGraph { poset, graph })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::model::{Flags, OrbitNode};

    fn counts(r: &SurfaceReport) -> BTreeMap<AwoType, usize> {
        let mut c = BTreeMap::new();
        for t in r.awo_types.values() {
            *c.entry(*t).or_insert(0) += 1;
        }
        c
    }

    #[test]
    fn ham_disk_types() {
        let r = classify_awos(&corpus::load("ham-disk").unwrap()).unwrap();
        assert!(r.is_finite_type);
        let c = counts(&r);
        assert_eq!(c[&AwoType::SingularPoint], 3);
        assert_eq!(c[&AwoType::SemiMultiSaddleSeparatrix], 2);
        assert_eq!(c[&AwoType::PeriodicComponent], 3);
        assert_eq!(c.len(), 3);
    }

    #[test]
    fn sphere_grad_types() {
        let r = classify_awos(&corpus::load("sphere-grad").unwrap()).unwrap();
        let c = counts(&r);
        assert_eq!(c[&AwoType::SingularPoint], 2);
        assert_eq!(c[&AwoType::TransverseAnnulus], 1);
    }

    #[test]
    fn recurrence_is_not_finite_type() {
        let r = classify_awos(&corpus::load("minimal-torus").unwrap()).unwrap();
        assert!(!r.is_finite_type);
        assert!(r.stratification.is_none());
        assert!(matches!(stratification(&corpus::load("minimal-torus").unwrap()), Err(Error::Precondition(_))));
    }

    #[test]
    fn diagram_conventions() {
        let d = msc_diagram(&corpus::load("ham-disk").unwrap()).unwrap();
        assert_eq!(d.convention, DiagramConvention::Hamiltonian);
        assert_eq!(d.nodes, ["O1", "O2", "s"].iter().map(|s| s.to_string()).collect());
        let d = msc_diagram(&corpus::load("sphere-grad").unwrap()).unwrap();
        assert_eq!(d.convention, DiagramConvention::General);
        assert_eq!(d.nodes, ["s+", "s-"].iter().map(|s| s.to_string()).collect());
        for id in ["ham-trivial-annulus", "ham-trivial-disk", "ham-trivial-sphere"] {
            assert!(msc_diagram(&corpus::load(id).unwrap()).unwrap().nodes.is_empty(), "{id}");
        }
    }

    #[test]
    fn ham_disk_heights() {
        let s = stratification(&corpus::load("ham-disk").unwrap()).unwrap();
        let mut hs: Vec<usize> = s.heights.values().copied().collect();
        hs.sort();
        assert_eq!(hs, vec![0, 0, 0, 1, 1, 2, 2, 2]);
        assert!(s.ok);
        assert_eq!(s.top_stratum_matches, Some(true));
    }

    #[test]
    fn euler_sums() {
        let r = euler_check(&corpus::load("sphere-grad").unwrap()).unwrap();
        assert_eq!((r.index_sum, r.passes), (Some(2), true));
        let r = euler_check(&corpus::load("ham-disk").unwrap()).unwrap();
        assert_eq!((r.index_sum, r.passes), (Some(1), true));
        let r = euler_check(&corpus::load("disk-grad").unwrap()).unwrap();
        assert_eq!((r.index_sum, r.passes), (Some(1), true));
        let m = FlowModel::with_contact_adjacency(
            Flags::surface(2, false),
            vec![
                OrbitNode::new("a", Kind::Singular).tag(SurfaceTag::Saddle(4)),
                OrbitNode::new("b", Kind::Singular).tag(SurfaceTag::Saddle(4)),
            ],
        )
        .unwrap();
        let r = euler_check(&m).unwrap();
        assert_eq!((r.index_sum, r.passes), (Some(-2), false));
    }

    #[test]
    fn ham_disk_reeb_graph() {
        let g = reeb_abstract_graph(&corpus::load("ham-disk").unwrap()).unwrap().graph;
        assert_eq!(g.vertices.len(), 3);
        assert_eq!(g.edges.len(), 3);
    }

    #[test]
    fn gradient_has_no_reeb_graph() {
        assert!(matches!(reeb_abstract_graph(&corpus::load("sphere-grad").unwrap()), Err(Error::Precondition(_))));
    }
}
