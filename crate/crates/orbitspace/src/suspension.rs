//! Discrete-time models, their suspension flows, and the comparison between
//! a flow and its time-one map.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Flags, FlowModel, Granularity, Kind, NodeId, OrbitNode, PeriodType, Violation};
use crate::quotient::{self, Level, QuotientSpace};
use crate::surface;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MapKind {
    Fixed,
    /// Periodic point of the given least period, at least 2.
    Periodic(u32),
    NonperiodicRecurrent,
    Nonrecurrent,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapNode {
    pub id: NodeId,
    pub kind: MapKind,
    #[serde(default)]
    pub granularity: Granularity,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub alpha: BTreeSet<NodeId>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub omega: BTreeSet<NodeId>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub transverse_boundary: BTreeSet<NodeId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period_type: Option<PeriodType>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<String>,
}

/// A homeomorphism of a space, described by orbits of the map.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapModel {
    pub flags: Flags,
    pub nodes: Vec<MapNode>,
    #[serde(default)]
    pub adjacency: Vec<(NodeId, NodeId)>,
}

impl MapModel {
    pub fn from_json(text: &str) -> Result<Self> {
        let m: MapModel = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if let Some(n) = m.nodes.iter().find(|n| matches!(n.kind, MapKind::Periodic(k) if k < 2)) {
            return Err(Error::Parse(format!("`{}`: periodic points need period at least 2", n.id)));
        }
        // Structural id checks are shared with flow models.
        m.flow_nodes_model()?;
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("map model serializes")
    }

    fn flow_nodes_model(&self) -> Result<FlowModel> {
        let nodes = self
            .nodes
            .iter()
            .map(|n| OrbitNode {
                id: n.id.clone(),
                kind: match n.kind {
                    MapKind::Fixed | MapKind::Periodic(_) => Kind::Periodic,
                    MapKind::NonperiodicRecurrent => Kind::RecurrentNonclosed,
                    MapKind::Nonrecurrent => Kind::Nonrecurrent,
                },
                granularity: n.granularity,
                alpha: n.alpha.clone(),
                omega: n.omega.clone(),
                transverse_boundary: n.transverse_boundary.clone(),
                period_type: n.period_type,
                surface_tag: None,
                embedding: n.embedding.clone(),
            })
            .collect();
        let flags = Flags { surface: None, ..self.flags };
        FlowModel::new(flags, nodes, self.adjacency.clone())
    }

    /// Map models obey the same rules as their suspensions.
    pub fn validate(&self) -> Vec<Violation> {
        self.flow_nodes_model().map(|m| m.validate()).unwrap_or_default()
    }
}

/// Suspension flow: fixed and periodic points become periodic orbits,
/// recurrent points recurrent orbits, the rest non-recurrent orbits. Limit
/// data and adjacency carry over unchanged.
pub fn suspend(map: &MapModel) -> Result<FlowModel> {
    let flow = map.flow_nodes_model()?;
    flow.ensure_valid()?;
    Ok(flow)
}

/// True when `flow` has one node per map orbit with the matching kind.
pub fn is_suspension_of(map: &MapModel, flow: &FlowModel) -> bool {
    map.nodes.len() == flow.len()
        && map.nodes.iter().all(|n| {
            flow.index_of(&n.id).is_some_and(|i| {
                let want = match n.kind {
                    MapKind::Fixed | MapKind::Periodic(_) => Kind::Periodic,
                    MapKind::NonperiodicRecurrent => Kind::RecurrentNonclosed,
                    MapKind::Nonrecurrent => Kind::Nonrecurrent,
                };
                flow.kind(i) == want
            })
        })
}

/// Period type per periodic node.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PeriodAnnotation(pub BTreeMap<NodeId, PeriodType>);

impl PeriodAnnotation {
    pub fn from_model(m: &FlowModel) -> Self {
        PeriodAnnotation(m.nodes().iter().filter_map(|n| n.period_type.map(|p| (n.id.clone(), p))).collect())
    }

    pub fn with(mut self, id: &str, p: PeriodType) -> Self {
        self.0.insert(id.to_string(), p);
        self
    }

    /// Sets every annotated or periodic node to `p`.
    pub fn all(m: &FlowModel, p: PeriodType) -> Self {
        PeriodAnnotation(
            m.nodes().iter().filter(|n| n.kind == Kind::Periodic).map(|n| (n.id.clone(), p)).collect(),
        )
    }

    pub fn get(&self, id: &str) -> Option<PeriodType> {
        self.0.get(id).copied()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TimeOneReport {
    /// Blocks of the time-one map at the first level. Blocks listed in
    /// `level1_split` stand for classes the map breaks into smaller pieces.
    pub level1: QuotientSpace,
    pub level1_split: Vec<String>,
    pub level1_equal: bool,
    pub level2: QuotientSpace,
    pub level2_equal: bool,
}

/// Compares the abstract weak orbit space of a Morse-Smale-shaped flow with
/// that of its time-one map, at the first two levels.
///
/// A non-recurrent block keeps its class under the time-one map unless one
/// of its limit sets is a periodic orbit with rational period; then the
/// class splits. Regrouping by limit blocks at the second level undoes this.
pub fn time_one_awo_space(flow: &FlowModel, periods: &PeriodAnnotation) -> Result<TimeOneReport> {
    flow.ensure_valid()?;
    let awo = quotient::awo_partition(flow);
    for i in 0..flow.len() {
        if flow.kind(i) == Kind::RecurrentNonclosed {
            return Err(Error::Precondition(format!("`{}` is recurrent; expected a Morse-Smale-shaped flow", flow.id(i))));
        }
        if flow.kind(i) == Kind::Periodic && flow.is_family(i) {
            return Err(Error::Precondition(format!("`{}` is a family of periodic orbits; expected isolated ones", flow.id(i))));
        }
    }
    let mut split = Vec::new();
    for b in awo.blocks().iter().filter(|b| flow.kind(b[0]) == Kind::Nonrecurrent) {
        let mut rational = false;
        for lim in [quotient::union_alpha(flow, b), quotient::union_omega(flow, b)] {
            let blocks = awo.blocks_meeting(&lim);
            let target = match blocks.iter().next() {
                Some(&t) if blocks.len() == 1 && flow.kind(awo.block(t)[0]).is_closed() => t,
                _ => {
                    return Err(Error::Precondition(format!(
                        "limit set of `{}` is not a single closed orbit",
                        flow.id(b[0])
                    )))
                }
            };
            let g = awo.block(target)[0];
            if flow.kind(g) != Kind::Periodic {
                continue;
            }
            match periods.get(flow.id(g)) {
                None => return Err(Error::Precondition(format!("missing period annotation on `{}`", flow.id(g)))),
                Some(PeriodType::MixedDense) => {
                    return Err(Error::Argument(format!("`{}` is a single orbit; MIXED_DENSE does not apply", flow.id(g))))
                }
                Some(PeriodType::Rational) => rational = true,
                Some(PeriodType::Irrational) => {}
            }
        }
        if rational {
            split.push(flow.id(b[0]).to_string());
        }
    }
    let level1 = QuotientSpace::from_partition(flow, Level::AwoK(1), awo.clone());
    let (p2, _) = quotient::kth_partition(flow, 2, false)?;
    let level2_equal = p2 == awo;
    Ok(TimeOneReport {
        level1,
        level1_equal: split.is_empty(),
        level1_split: split,
        level2: QuotientSpace::from_partition(flow, Level::AwoK(2), p2),
        level2_equal,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FamilyResolution {
    pub family: NodeId,
    pub period: PeriodType,
    /// True when the time-one classes inside the family are single orbits.
    pub resolves_to_orbits: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HamReconstruction {
    pub verdict: bool,
    pub families: Vec<FamilyResolution>,
}

/// Decides whether the time-one map of a Hamiltonian surface flow recovers
/// the orbit space: every periodic family must mix rational and irrational
/// periods densely.
pub fn ham_reconstruction_check(flow: &FlowModel, periods: &PeriodAnnotation) -> Result<HamReconstruction> {
    flow.ensure_valid()?;
    if !surface::is_hamiltonian_shaped(flow)? {
        return Err(Error::Precondition("expected a Hamiltonian surface flow".into()));
    }
    let mut families = Vec::new();
    for i in (0..flow.len()).filter(|&i| flow.kind(i) == Kind::Periodic && flow.is_family(i)) {
        let id = flow.id(i);
        let period = periods
            .get(id)
            .ok_or_else(|| Error::Precondition(format!("missing period annotation on `{id}`")))?;
        families.push(FamilyResolution {
            family: id.to_string(),
            period,
            resolves_to_orbits: period == PeriodType::MixedDense,
        });
    }
    Ok(HamReconstruction { verdict: families.iter().all(|f| f.resolves_to_orbits), families })
}
