//! Finite flow models: node data, JSON format and validation.
//!
//! A node stands for one orbit or a connected family of orbits sharing the
//! same kind and the same limit data. Limit sets and transverse boundaries are
//! recorded as the sets of nodes they meet.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph;

pub type NodeId = String;
/// Set of node indices into a [`FlowModel`].
pub type NodeSet = BTreeSet<usize>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Kind {
    Singular,
    Periodic,
    Nonrecurrent,
    RecurrentNonclosed,
}

impl Kind {
    pub fn is_closed(self) -> bool {
        matches!(self, Kind::Singular | Kind::Periodic)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Granularity {
    #[default]
    SingleOrbit,
    Family,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PeriodType {
    Rational,
    Irrational,
    MixedDense,
}

/// Local type of a node on a surface. Saddle variants carry the number of
/// hyperbolic sectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SurfaceTag {
    Center,
    Saddle(u32),
    BoundarySaddle(u32),
    Sink,
    Source,
    BoundarySink,
    BoundarySource,
    Separatrix,
    PeriodicAnnulus,
    TransverseAnnulus,
    TrivialFlowBox,
    LimitCycle,
}

impl SurfaceTag {
    pub fn is_saddle(self) -> bool {
        matches!(self, SurfaceTag::Saddle(_) | SurfaceTag::BoundarySaddle(_))
    }

    pub fn is_sink_or_source(self) -> bool {
        matches!(
            self,
            SurfaceTag::Sink | SurfaceTag::Source | SurfaceTag::BoundarySink | SurfaceTag::BoundarySource
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitNode {
    pub id: NodeId,
    pub kind: Kind,
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
    pub surface_tag: Option<SurfaceTag>,
    /// Free-form embedding data such as the cyclic order of separatrices
    /// around a saddle. Carried through but never used by invariants.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<String>,
}

fn ids<I, S>(items: I) -> BTreeSet<NodeId>
where
    I: IntoIterator<Item = S>,
    S: Into<NodeId>,
{
    items.into_iter().map(Into::into).collect()
}

impl OrbitNode {
    pub fn new(id: impl Into<NodeId>, kind: Kind) -> Self {
        OrbitNode {
            id: id.into(),
            kind,
            granularity: Granularity::SingleOrbit,
            alpha: BTreeSet::new(),
            omega: BTreeSet::new(),
            transverse_boundary: BTreeSet::new(),
            period_type: None,
            surface_tag: None,
            embedding: None,
        }
    }

    pub fn family(mut self) -> Self {
        self.granularity = Granularity::Family;
        self
    }

    pub fn alpha<I: IntoIterator<Item = S>, S: Into<NodeId>>(mut self, a: I) -> Self {
        self.alpha = ids(a);
        self
    }

    pub fn omega<I: IntoIterator<Item = S>, S: Into<NodeId>>(mut self, w: I) -> Self {
        self.omega = ids(w);
        self
    }

    pub fn tb<I: IntoIterator<Item = S>, S: Into<NodeId>>(mut self, t: I) -> Self {
        self.transverse_boundary = ids(t);
        self
    }

    pub fn tag(mut self, tag: SurfaceTag) -> Self {
        self.surface_tag = Some(tag);
        self
    }

    pub fn period(mut self, p: PeriodType) -> Self {
        self.period_type = Some(p);
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceFlags {
    pub closed: bool,
    pub euler_characteristic: i64,
    pub has_boundary: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Flags {
    pub hausdorff: bool,
    pub compact: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surface: Option<SurfaceFlags>,
}

impl Flags {
    pub fn compact_hausdorff() -> Self {
        Flags { hausdorff: true, compact: true, surface: None }
    }

    pub fn surface(euler_characteristic: i64, has_boundary: bool) -> Self {
        Flags {
            hausdorff: true,
            compact: true,
            surface: Some(SurfaceFlags { closed: !has_boundary, euler_characteristic, has_boundary }),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    flags: Flags,
    nodes: Vec<OrbitNode>,
    #[serde(default)]
    adjacency: Vec<(NodeId, NodeId)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    UnknownReference,
    AdjacencySelfLoop,
    ClosedOrbitLimitData,
    RecurrenceContradiction,
    MissingSelfRecurrence,
    EmptyAlphaLimit,
    EmptyOmegaLimit,
    TransverseBoundarySelf,
    TransverseBoundaryOverlap,
    RecurrentTransverseBoundary,
    RecurrentClosure,
    LimitSetNotClosed,
    ClosureNotClosed,
    OrbitClassCollision,
    AdjacencyWithoutContact,
    ContactWithoutAdjacency,
    DisconnectedLimitSet,
    LimitSetNotChainRecurrent,
    PeriodTypeOnNonPeriodic,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).unwrap();
        write!(f, "{}", s.as_str().unwrap())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Violation {
    pub node: NodeId,
    pub rule: Rule,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} ({})", self.node, self.rule, self.detail)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundaryDecomposition {
    pub coborder: BTreeSet<NodeId>,
    pub perp: BTreeSet<NodeId>,
    pub pitchfork: BTreeSet<NodeId>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct KindPartition {
    pub sing: Vec<NodeId>,
    pub per: Vec<NodeId>,
    pub p: Vec<NodeId>,
    pub r: Vec<NodeId>,
}

impl KindPartition {
    pub fn cl(&self) -> Vec<NodeId> {
        let mut v: Vec<NodeId> = self.sing.iter().chain(&self.per).cloned().collect();
        v.sort();
        v
    }
}

#[derive(Clone, Debug)]
struct Dangling {
    owner: usize,
    field: &'static str,
    target: NodeId,
}

/// A validated-on-demand flow model. Nodes are kept sorted by id, so node
/// indices follow the lexicographic order of ids.
#[derive(Clone, Debug)]
pub struct FlowModel {
    flags: Flags,
    nodes: Vec<OrbitNode>,
    adjacency: Vec<(NodeId, NodeId)>,
    index: HashMap<NodeId, usize>,
    alpha: Vec<NodeSet>,
    omega: Vec<NodeSet>,
    tb: Vec<NodeSet>,
    nbrs: Vec<NodeSet>,
    dangling: Vec<Dangling>,
    self_loops: Vec<NodeId>,
}

impl PartialEq for FlowModel {
    fn eq(&self, other: &Self) -> bool {
        self.flags == other.flags && self.nodes == other.nodes && self.adjacency == other.adjacency
    }
}

impl FlowModel {
    /// Builds a model. Fails only on structural problems (empty or
    /// duplicate ids); semantic problems are left to [`FlowModel::validate`].
    pub fn new(flags: Flags, mut nodes: Vec<OrbitNode>, adjacency: Vec<(NodeId, NodeId)>) -> Result<Self> {
        nodes.sort_by(|a, b| a.id.cmp(&b.id));
        let mut index = HashMap::new();
        for (i, n) in nodes.iter().enumerate() {
            if n.id.is_empty() {
                return Err(Error::Parse("empty node id".into()));
            }
            if index.insert(n.id.clone(), i).is_some() {
                return Err(Error::Parse(format!("duplicate node id `{}`", n.id)));
            }
        }
        let mut dangling = Vec::new();
        let mut resolve = |owner: usize, field: &'static str, set: &BTreeSet<NodeId>| -> NodeSet {
            let mut out = NodeSet::new();
            for t in set {
                match index.get(t) {
                    Some(&j) => {
                        out.insert(j);
                    }
                    None => dangling.push(Dangling { owner, field, target: t.clone() }),
                }
            }
            out
        };
        let mut alpha = Vec::with_capacity(nodes.len());
        let mut omega = Vec::with_capacity(nodes.len());
        let mut tb = Vec::with_capacity(nodes.len());
        for (i, n) in nodes.iter().enumerate() {
            alpha.push(resolve(i, "alpha", &n.alpha));
            omega.push(resolve(i, "omega", &n.omega));
            tb.push(resolve(i, "transverse_boundary", &n.transverse_boundary));
        }

        let mut pairs: BTreeSet<(NodeId, NodeId)> = BTreeSet::new();
        for (a, b) in adjacency {
            if a <= b {
                pairs.insert((a, b));
            } else {
                pairs.insert((b, a));
            }
        }
        let mut nbrs = vec![NodeSet::new(); nodes.len()];
        let mut self_loops = Vec::new();
        for (a, b) in &pairs {
            if a == b {
                self_loops.push(a.clone());
                continue;
            }
            match (index.get(a), index.get(b)) {
                (Some(&i), Some(&j)) => {
                    nbrs[i].insert(j);
                    nbrs[j].insert(i);
                }
                (ia, ib) => {
                    let owner = ia.or(ib).copied().unwrap_or(usize::MAX);
                    for (x, ix) in [(a, ia), (b, ib)] {
                        if ix.is_none() {
                            dangling.push(Dangling { owner, field: "adjacency", target: x.clone() });
                        }
                    }
                }
            }
        }

        Ok(FlowModel {
            flags,
            nodes,
            adjacency: pairs.into_iter().collect(),
            index,
            alpha,
            omega,
            tb,
            nbrs,
            dangling,
            self_loops,
        })
    }

    /// Builds a model whose adjacency is exactly the closure-contact relation.
    pub fn with_contact_adjacency(flags: Flags, nodes: Vec<OrbitNode>) -> Result<Self> {
        let m = FlowModel::new(flags, nodes, Vec::new())?;
        let mut adj = Vec::new();
        for i in 0..m.len() {
            for j in i + 1..m.len() {
                if m.in_contact(i, j) {
                    adj.push((m.id(i).to_string(), m.id(j).to_string()));
                }
            }
        }
        FlowModel::new(m.flags, m.nodes, adj)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        FlowModel::new(file.flags, file.nodes, file.adjacency)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        FlowModel::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        let file = ModelFile { flags: self.flags, nodes: self.nodes.clone(), adjacency: self.adjacency.clone() };
        serde_json::to_string_pretty(&file).expect("model serializes")
    }

    pub fn flags(&self) -> &Flags {
        &self.flags
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[OrbitNode] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &OrbitNode {
        &self.nodes[i]
    }

    pub fn id(&self, i: usize) -> &str {
        &self.nodes[i].id
    }

    pub fn kind(&self, i: usize) -> Kind {
        self.nodes[i].kind
    }

    pub fn is_family(&self, i: usize) -> bool {
        self.nodes[i].granularity == Granularity::Family
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn lookup(&self, id: &str) -> Result<usize> {
        self.index_of(id).ok_or_else(|| Error::UnknownNode(id.to_string()))
    }

    pub fn adjacency(&self) -> &[(NodeId, NodeId)] {
        &self.adjacency
    }

    pub fn alpha(&self, i: usize) -> &NodeSet {
        &self.alpha[i]
    }

    pub fn omega(&self, i: usize) -> &NodeSet {
        &self.omega[i]
    }

    pub fn tb(&self, i: usize) -> &NodeSet {
        &self.tb[i]
    }

    pub fn neighbors(&self, i: usize) -> &NodeSet {
        &self.nbrs[i]
    }

    /// Nodes met by the closure of node `i`, including `i` itself.
    pub fn closure(&self, i: usize) -> NodeSet {
        let mut c: NodeSet = self.alpha[i].union(&self.omega[i]).copied().collect();
        c.extend(self.tb[i].iter().copied());
        c.insert(i);
        c
    }

    /// Closure of a union of nodes.
    pub fn closure_of(&self, set: &NodeSet) -> NodeSet {
        set.iter().flat_map(|&i| self.closure(i)).collect()
    }

    /// True when the union of the two nodes is connected.
    pub fn in_contact(&self, i: usize, j: usize) -> bool {
        i != j && (self.closure(i).contains(&j) || self.closure(j).contains(&i))
    }

    pub fn names(&self, set: &NodeSet) -> BTreeSet<NodeId> {
        set.iter().map(|&i| self.id(i).to_string()).collect()
    }

    pub fn kind_partition(&self) -> KindPartition {
        let mut kp = KindPartition::default();
        for n in &self.nodes {
            let bucket = match n.kind {
                Kind::Singular => &mut kp.sing,
                Kind::Periodic => &mut kp.per,
                Kind::Nonrecurrent => &mut kp.p,
                Kind::RecurrentNonclosed => &mut kp.r,
            };
            bucket.push(n.id.clone());
        }
        kp
    }

    pub fn boundary_decomposition(&self, id: &str) -> Result<BoundaryDecomposition> {
        let i = self.lookup(id)?;
        let mut perp: NodeSet = self.alpha[i].union(&self.omega[i]).copied().collect();
        perp.remove(&i);
        let pitchfork = self.tb[i].clone();
        let coborder: NodeSet = perp.union(&pitchfork).copied().collect();
        Ok(BoundaryDecomposition {
            coborder: self.names(&coborder),
            perp: self.names(&perp),
            pitchfork: self.names(&pitchfork),
        })
    }

    /// Errors with [`Error::Invalid`] unless the model passes validation.
    pub fn ensure_valid(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Invalid(v))
        }
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for d in &self.dangling {
            let node = if d.owner == usize::MAX { "?".to_string() } else { self.id(d.owner).to_string() };
            out.push(Violation {
                node,
                rule: Rule::UnknownReference,
                detail: format!("{} refers to `{}`", d.field, d.target),
            });
        }
        for s in &self.self_loops {
            out.push(Violation { node: s.clone(), rule: Rule::AdjacencySelfLoop, detail: "adjacency pair is a loop".into() });
        }
        let mut push = |i: usize, rule: Rule, detail: String| {
            out.push(Violation { node: self.id(i).to_string(), rule, detail });
        };

        let f = self.flags;
        let closures: Vec<NodeSet> = (0..self.len()).map(|i| self.closure(i)).collect();
        for i in 0..self.len() {
            let n = &self.nodes[i];
            let (a, w, t) = (&self.alpha[i], &self.omega[i], &self.tb[i]);
            match n.kind {
                Kind::Singular | Kind::Periodic => {
                    if !a.is_empty() || !w.is_empty() {
                        push(i, Rule::ClosedOrbitLimitData, "closed orbits carry no alpha/omega data".into());
                    }
                }
                Kind::Nonrecurrent => {
                    if a.contains(&i) || w.contains(&i) {
                        push(i, Rule::RecurrenceContradiction, "non-recurrent node lies in its own limit set".into());
                    }
                }
                Kind::RecurrentNonclosed => {
                    if !a.contains(&i) && !w.contains(&i) {
                        push(i, Rule::MissingSelfRecurrence, "recurrent node missing from its own limit sets".into());
                    }
                }
            }
            if f.compact && !n.kind.is_closed() {
                if a.is_empty() {
                    push(i, Rule::EmptyAlphaLimit, "empty alpha-limit on a compact model".into());
                }
                if w.is_empty() {
                    push(i, Rule::EmptyOmegaLimit, "empty omega-limit on a compact model".into());
                }
            }
            if t.contains(&i) {
                push(i, Rule::TransverseBoundarySelf, "node lists itself in its transverse boundary".into());
            }
            if n.period_type.is_some() && n.kind != Kind::Periodic {
                push(i, Rule::PeriodTypeOnNonPeriodic, "period_type is only meaningful on periodic nodes".into());
            }
            if !f.hausdorff {
                continue;
            }
            if t.iter().any(|j| a.contains(j) || w.contains(j)) {
                push(i, Rule::TransverseBoundaryOverlap, "transverse boundary meets the limit sets".into());
            }
            if n.kind == Kind::RecurrentNonclosed {
                if !t.is_empty() {
                    push(i, Rule::RecurrentTransverseBoundary, "recurrent node has a transverse boundary".into());
                }
                if (a.contains(&i) && !w.is_subset(a)) || (w.contains(&i) && !a.is_subset(w)) {
                    push(i, Rule::RecurrentClosure, "the limit set containing the node must contain the other".into());
                }
            }
            for (name, lim) in [("alpha", a), ("omega", w)] {
                for &m in lim {
                    if m != i && !self.is_family(m) && !closures[m].is_subset(lim) {
                        push(i, Rule::LimitSetNotClosed, format!("{} misses part of the closure of `{}`", name, self.id(m)));
                    }
                }
            }
            for &m in &closures[i] {
                if m != i && !self.is_family(m) && !closures[m].is_subset(&closures[i]) {
                    push(i, Rule::ClosureNotClosed, format!("closure misses part of the closure of `{}`", self.id(m)));
                }
            }
            if n.kind != Kind::RecurrentNonclosed {
                for j in 0..self.len() {
                    if j != i && closures[j] == closures[i] {
                        push(i, Rule::OrbitClassCollision, format!("same closure as `{}`", self.id(j)));
                    }
                }
            }
            for j in i + 1..self.len() {
                let contact = closures[i].contains(&j) || closures[j].contains(&i);
                let adjacent = self.nbrs[i].contains(&j);
                if adjacent && !contact {
                    push(i, Rule::AdjacencyWithoutContact, format!("adjacent to `{}` without closure contact", self.id(j)));
                }
                if contact && !adjacent {
                    push(i, Rule::ContactWithoutAdjacency, format!("closure contact with `{}` is not an adjacency", self.id(j)));
                }
            }
        }

        if f.hausdorff && f.compact {
            let recurrent = crate::morse::chain_recurrent_nodes(self);
            for i in 0..self.len() {
                for (name, lim) in [("alpha", &self.alpha[i]), ("omega", &self.omega[i])] {
                    if !graph::is_connected(lim, |u| self.nbrs[u].iter().copied().collect::<Vec<_>>()) {
                        push(i, Rule::DisconnectedLimitSet, format!("{} is not connected", name));
                    }
                    if let Some(&m) = lim.iter().find(|&&m| !recurrent[m]) {
                        push(i, Rule::LimitSetNotChainRecurrent, format!("{} contains `{}`", name, self.id(m)));
                    }
                }
            }
        }

        out.sort();
        out.dedup();
        out
    }

    pub fn ids_of(&self, set: &[usize]) -> Vec<NodeId> {
        set.iter().map(|&i| self.id(i).to_string()).collect()
    }

    /// Collects node ids by kind, keyed for display.
    pub fn summary(&self) -> BTreeMap<&'static str, usize> {
        let kp = self.kind_partition();
        BTreeMap::from([("sing", kp.sing.len()), ("per", kp.per.len()), ("p", kp.p.len()), ("r", kp.r.len())])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere_grad() -> FlowModel {
        FlowModel::with_contact_adjacency(
            Flags::surface(2, false),
            vec![
                OrbitNode::new("s+", Kind::Singular).tag(SurfaceTag::Source),
                OrbitNode::new("s-", Kind::Singular).tag(SurfaceTag::Sink),
                OrbitNode::new("A", Kind::Nonrecurrent).family().alpha(["s+"]).omega(["s-"]),
            ],
        )
        .unwrap()
    }

    fn rules(m: &FlowModel) -> Vec<Rule> {
        m.validate().into_iter().map(|v| v.rule).collect()
    }

    #[test]
    fn sphere_gradient_is_valid() {
        let m = sphere_grad();
        assert!(m.validate().is_empty(), "{:?}", m.validate());
        let kp = m.kind_partition();
        assert_eq!(kp.sing, vec!["s+", "s-"]);
        assert_eq!(kp.p, vec!["A"]);
        assert!(kp.per.is_empty() && kp.r.is_empty());
    }

    #[test]
    fn recurrence_contradiction() {
        let m = FlowModel::new(
            Flags { hausdorff: false, compact: false, surface: None },
            vec![OrbitNode::new("x", Kind::Nonrecurrent).alpha(["x"])],
            vec![],
        )
        .unwrap();
        assert_eq!(rules(&m), vec![Rule::RecurrenceContradiction]);
    }

    #[test]
    fn empty_alpha_on_compact() {
        let m = FlowModel::with_contact_adjacency(
            Flags::compact_hausdorff(),
            vec![OrbitNode::new("p", Kind::Singular), OrbitNode::new("x", Kind::Nonrecurrent).omega(["p"])],
        )
        .unwrap();
        assert_eq!(rules(&m), vec![Rule::EmptyAlphaLimit]);
    }

    #[test]
    fn closed_orbit_with_limits_rejected() {
        let m = FlowModel::new(
            Flags { hausdorff: false, compact: false, surface: None },
            vec![OrbitNode::new("p", Kind::Singular), OrbitNode::new("q", Kind::Periodic).alpha(["p"])],
            vec![],
        )
        .unwrap();
        assert_eq!(rules(&m), vec![Rule::ClosedOrbitLimitData]);
    }

    #[test]
    fn transverse_boundary_overlap_on_hausdorff() {
        let m = FlowModel::with_contact_adjacency(
            Flags::compact_hausdorff(),
            vec![
                OrbitNode::new("p", Kind::Singular),
                OrbitNode::new("q", Kind::Singular),
                OrbitNode::new("x", Kind::Nonrecurrent).family().alpha(["p"]).omega(["q"]).tb(["q"]),
            ],
        )
        .unwrap();
        assert!(rules(&m).contains(&Rule::TransverseBoundaryOverlap));
    }

    #[test]
    fn unknown_reference_is_semantic() {
        let m = FlowModel::new(
            Flags { hausdorff: false, compact: false, surface: None },
            vec![OrbitNode::new("x", Kind::Nonrecurrent).alpha(["ghost"])],
            vec![("x".into(), "nobody".into())],
        )
        .unwrap();
        let v = m.validate();
        assert_eq!(v.len(), 2);
        assert!(v.iter().all(|v| v.rule == Rule::UnknownReference));
    }

    #[test]
    fn structural_errors_are_parse_errors() {
        let dup = r#"{"flags":{"hausdorff":true,"compact":true},
            "nodes":[{"id":"a","kind":"SINGULAR"},{"id":"a","kind":"SINGULAR"}]}"#;
        assert!(matches!(FlowModel::from_json(dup), Err(Error::Parse(_))));
        let empty = r#"{"flags":{"hausdorff":true,"compact":true},"nodes":[{"id":"","kind":"SINGULAR"}]}"#;
        assert!(matches!(FlowModel::from_json(empty), Err(Error::Parse(_))));
        let extra = r#"{"flags":{"hausdorff":true,"compact":true},"nodes":[],"colour":1}"#;
        assert!(matches!(FlowModel::from_json(extra), Err(Error::Parse(_))));
        let bad_field = r#"{"flags":{"hausdorff":true,"compact":true},"nodes":[{"id":"a","kind":"SINGULAR","mass":2}]}"#;
        assert!(matches!(FlowModel::from_json(bad_field), Err(Error::Parse(_))));
    }

    #[test]
    fn contact_and_adjacency_must_agree() {
        let nodes = vec![
            OrbitNode::new("p", Kind::Singular),
            OrbitNode::new("q", Kind::Singular),
            OrbitNode::new("x", Kind::Nonrecurrent).alpha(["p"]).omega(["q"]),
        ];
        let missing = FlowModel::new(Flags::compact_hausdorff(), nodes.clone(), vec![("p".into(), "x".into())]).unwrap();
        assert!(rules(&missing).contains(&Rule::ContactWithoutAdjacency));
        let extra = FlowModel::new(
            Flags::compact_hausdorff(),
            nodes,
            vec![("p".into(), "x".into()), ("q".into(), "x".into()), ("p".into(), "q".into())],
        )
        .unwrap();
        assert_eq!(rules(&extra), vec![Rule::AdjacencyWithoutContact]);
    }

    #[test]
    fn boundary_decomposition_splits_coborder() {
        let m = FlowModel::with_contact_adjacency(
            Flags::compact_hausdorff(),
            vec![
                OrbitNode::new("p", Kind::Singular),
                OrbitNode::new("q", Kind::Singular),
                OrbitNode::new("r", Kind::Singular),
                OrbitNode::new("x", Kind::Nonrecurrent).family().alpha(["p"]).omega(["q"]).tb(["r"]),
            ],
        )
        .unwrap();
        let b = m.boundary_decomposition("x").unwrap();
        assert_eq!(b.perp, ids(["p", "q"]));
        assert_eq!(b.pitchfork, ids(["r"]));
        assert_eq!(b.coborder, ids(["p", "q", "r"]));
        assert!(matches!(m.boundary_decomposition("zz"), Err(Error::UnknownNode(_))));
    }

    #[test]
    fn json_round_trip_preserves_model() {
        let m = sphere_grad();
        let again = FlowModel::from_json(&m.to_json()).unwrap();
        assert_eq!(m, again);
    }
}
