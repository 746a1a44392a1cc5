//! Partitions of a flow model into orbit classes, abstract weak orbits and
//! their coarsenings, each carrying the quotient-topology order.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph;
use crate::model::{FlowModel, Kind, NodeId, NodeSet};
use crate::topology::{BoolMatrix, FinitePreorder};

/// A partition of node indices. Blocks are sorted by their smallest member,
/// which is also the lexicographically smallest id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
    block_of: Vec<usize>,
}

impl Partition {
    pub fn from_groups(n: usize, groups: Vec<Vec<usize>>) -> Self {
        let mut blocks: Vec<Vec<usize>> = groups
            .into_iter()
            .filter(|g| !g.is_empty())
            .map(|mut g| {
                g.sort_unstable();
                g.dedup();
                g
            })
            .collect();
        blocks.sort();
        let mut block_of = vec![usize::MAX; n];
        for (b, g) in blocks.iter().enumerate() {
            for &i in g {
                assert_eq!(block_of[i], usize::MAX, "node in two blocks");
                block_of[i] = b;
            }
        }
        assert!(block_of.iter().all(|&b| b != usize::MAX), "partition does not cover every node");
        Partition { blocks, block_of }
    }

    pub fn discrete(n: usize) -> Self {
        Self::from_groups(n, (0..n).map(|i| vec![i]).collect())
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block(&self, b: usize) -> &[usize] {
        &self.blocks[b]
    }

    pub fn block_of(&self, i: usize) -> usize {
        self.block_of[i]
    }

    pub fn members(&self, b: usize) -> NodeSet {
        self.blocks[b].iter().copied().collect()
    }

    /// Indices of blocks meeting `set`.
    pub fn blocks_meeting(&self, set: &NodeSet) -> BTreeSet<usize> {
        set.iter().map(|&i| self.block_of[i]).collect()
    }

    /// Union of the blocks meeting `set`.
    pub fn saturate(&self, set: &NodeSet) -> NodeSet {
        self.blocks_meeting(set).into_iter().flat_map(|b| self.blocks[b].iter().copied()).collect()
    }

    /// True when every block of `self` sits inside a block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.blocks.iter().all(|g| g.iter().all(|&i| coarser.block_of[i] == coarser.block_of[g[0]]))
    }

    pub fn labels(&self, m: &FlowModel) -> Vec<String> {
        self.blocks.iter().map(|g| m.id(g[0]).to_string()).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Level {
    Orbit,
    WeakClass,
    Class,
    Awo,
    Ao,
    AwoK(usize),
    AoK(usize),
    Extended,
    Morse,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Level::Orbit => write!(f, "orbit"),
            Level::WeakClass => write!(f, "weak-class"),
            Level::Class => write!(f, "class"),
            Level::Awo => write!(f, "awo"),
            Level::Ao => write!(f, "ao"),
            Level::AwoK(k) => write!(f, "awo-{k}"),
            Level::AoK(k) => write!(f, "ao-{k}"),
            Level::Extended => write!(f, "extended"),
            Level::Morse => write!(f, "morse"),
        }
    }
}

/// Accepts the `Display` forms, so `awo-2` is `AwoK(2)`.
impl FromStr for Level {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let fixed = [
            Level::Orbit,
            Level::WeakClass,
            Level::Class,
            Level::Awo,
            Level::Ao,
            Level::Extended,
            Level::Morse,
        ];
        if let Some(l) = fixed.into_iter().find(|l| l.to_string() == s) {
            return Ok(l);
        }
        let bad = || Error::Argument(format!("unknown level `{s}`"));
        let (base, k) = s.rsplit_once('-').ok_or_else(bad)?;
        let k: usize = k.parse().map_err(|_| bad())?;
        match base {
            "awo" => Ok(Level::AwoK(k)),
            "ao" => Ok(Level::AoK(k)),
            _ => Err(bad()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Block {
    pub label: String,
    pub members: Vec<NodeId>,
}

/// A partition together with the specialization order of the quotient
/// topology: `X <= Y` iff X lies in the closure of Y in the quotient.
#[derive(Clone, Debug, Serialize)]
pub struct QuotientSpace {
    pub level: Level,
    pub blocks: Vec<Block>,
    pub order: FinitePreorder,
    #[serde(skip)]
    pub partition: Partition,
}

impl QuotientSpace {
    pub fn from_partition(m: &FlowModel, level: Level, partition: Partition) -> Self {
        let labels = partition.labels(m);
        let blocks = partition
            .blocks()
            .iter()
            .zip(&labels)
            .map(|(g, l)| Block { label: l.clone(), members: m.ids_of(g) })
            .collect();
        let order = FinitePreorder::generated_by(labels, &contact_matrix(m, &partition));
        QuotientSpace { level, blocks, order, partition }
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn labels(&self) -> Vec<String> {
        self.blocks.iter().map(|b| b.label.clone()).collect()
    }

    pub fn block_of(&self, m: &FlowModel, id: &str) -> Result<&Block> {
        Ok(&self.blocks[self.partition.block_of(m.lookup(id)?)])
    }

    /// Block member lists, for comparisons in tests and reports.
    pub fn member_sets(&self) -> BTreeSet<BTreeSet<NodeId>> {
        self.blocks.iter().map(|b| b.members.iter().cloned().collect()).collect()
    }
}

/// `X` meets the closure of `Y`, for blocks of `p`.
pub(crate) fn contact_matrix(m: &FlowModel, p: &Partition) -> BoolMatrix {
    let closures: Vec<BTreeSet<usize>> = (0..p.len()).map(|b| p.blocks_meeting(&m.closure_of(&p.members(b)))).collect();
    BoolMatrix::from_fn(p.len(), |x, y| x == y || closures[y].contains(&x))
}

pub(crate) fn union_alpha(m: &FlowModel, members: &[usize]) -> NodeSet {
    members.iter().flat_map(|&i| m.alpha(i).iter().copied()).collect()
}

pub(crate) fn union_omega(m: &FlowModel, members: &[usize]) -> NodeSet {
    members.iter().flat_map(|&i| m.omega(i).iter().copied()).collect()
}

fn nodes_of_kind(m: &FlowModel, kind: Kind) -> NodeSet {
    (0..m.len()).filter(|&i| m.kind(i) == kind).collect()
}

fn adjacency_components(m: &FlowModel, set: &NodeSet) -> Vec<Vec<usize>> {
    graph::components(set, |u| m.neighbors(u).iter().copied().collect::<Vec<_>>())
}

/// Groups `set` by `key`, optionally splitting each group into connected
/// pieces.
fn group_by<K: Ord>(m: &FlowModel, set: &NodeSet, split: bool, key: impl Fn(usize) -> K) -> Vec<Vec<usize>> {
    let mut groups: BTreeMap<K, NodeSet> = BTreeMap::new();
    for &i in set {
        groups.entry(key(i)).or_default().insert(i);
    }
    groups
        .into_values()
        .flat_map(|g| if split { adjacency_components(m, &g) } else { vec![g.into_iter().collect()] })
        .collect()
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum RecurrentRule {
    LimitSets,
    Closure,
}

fn closed_groups(m: &FlowModel) -> Vec<Vec<usize>> {
    let mut g = adjacency_components(m, &nodes_of_kind(m, Kind::Singular));
    g.extend(adjacency_components(m, &nodes_of_kind(m, Kind::Periodic)));
    g
}

fn recurrent_groups(m: &FlowModel, rule: RecurrentRule) -> Vec<Vec<usize>> {
    let r = nodes_of_kind(m, Kind::RecurrentNonclosed);
    match rule {
        RecurrentRule::LimitSets => group_by(m, &r, false, |i| (m.alpha(i).clone(), m.omega(i).clone())),
        RecurrentRule::Closure => group_by(m, &r, false, |i| m.closure(i)),
    }
}

fn base_partition(m: &FlowModel, rule: RecurrentRule) -> Partition {
    let mut groups = closed_groups(m);
    groups.extend(group_by(m, &nodes_of_kind(m, Kind::Nonrecurrent), true, |i| {
        (m.alpha(i).clone(), m.omega(i).clone())
    }));
    groups.extend(recurrent_groups(m, rule));
    Partition::from_groups(m.len(), groups)
}

pub fn awo_partition(m: &FlowModel) -> Partition {
    base_partition(m, RecurrentRule::LimitSets)
}

pub fn ao_partition(m: &FlowModel) -> Partition {
    base_partition(m, RecurrentRule::Closure)
}

pub fn class_partition(m: &FlowModel) -> Partition {
    let all: NodeSet = (0..m.len()).collect();
    Partition::from_groups(m.len(), group_by(m, &all, false, |i| m.closure(i)))
}

pub fn weak_class_partition(m: &FlowModel) -> Partition {
    let all: NodeSet = (0..m.len()).collect();
    Partition::from_groups(
        m.len(),
        group_by(m, &all, false, |i| (m.closure(i), m.alpha(i).clone(), m.omega(i).clone())),
    )
}

/// One refinement step: non-recurrent nodes are regrouped by the blocks of
/// `prev` met by their limit sets, then split into connected pieces.
fn kth_step(m: &FlowModel, prev: &Partition, rule: RecurrentRule) -> Partition {
    let mut groups = closed_groups(m);
    groups.extend(group_by(m, &nodes_of_kind(m, Kind::Nonrecurrent), true, |i| {
        (prev.blocks_meeting(m.alpha(i)), prev.blocks_meeting(m.omega(i)))
    }));
    groups.extend(recurrent_groups(m, rule));
    Partition::from_groups(m.len(), groups)
}

/// The k-th partition and the index at which the sequence stabilizes.
pub fn kth_partition(m: &FlowModel, k: usize, ao: bool) -> Result<(Partition, usize)> {
    if k < 1 {
        return Err(Error::Argument("k must be at least 1".into()));
    }
    let rule = if ao { RecurrentRule::Closure } else { RecurrentRule::LimitSets };
    let mut seq = vec![base_partition(m, rule)];
    let mut stable = None;
    // Each step coarsens, so the sequence settles within n steps.
    while stable.is_none() || seq.len() < k {
        let next = kth_step(m, seq.last().unwrap(), rule);
        if stable.is_none() && &next == seq.last().unwrap() {
            stable = Some(seq.len());
        }
        seq.push(next);
    }
    Ok((seq.swap_remove(k - 1), stable.unwrap()))
}

/// Closed connected unions of AWO blocks that receive both an alpha-limit
/// and an omega-limit of outside non-recurrent blocks, with the
/// separatrix blocks attached to them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuasiSaddleData {
    pub quasi_saddles: Vec<BTreeSet<NodeId>>,
    pub connections: Vec<Connection>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Connection {
    pub members: BTreeSet<NodeId>,
    pub closed: bool,
}

/// Candidate cores are the saturated limit sets of non-recurrent blocks.
pub fn quasi_saddles(m: &FlowModel, awo: &Partition) -> QuasiSaddleData {
    let p_blocks: Vec<(NodeSet, NodeSet, NodeSet)> = (0..awo.len())
        .filter(|&b| m.kind(awo.block(b)[0]) == Kind::Nonrecurrent)
        .map(|b| (awo.members(b), union_alpha(m, awo.block(b)), union_omega(m, awo.block(b))))
        .collect();
    let is_closed = |s: &NodeSet| m.closure_of(s).is_subset(s);
    let connected = |s: &NodeSet| graph::is_connected(s, |u| m.neighbors(u).iter().copied().collect::<Vec<_>>());

    let mut candidates: BTreeSet<NodeSet> = BTreeSet::new();
    for (_, a, w) in &p_blocks {
        for lim in [a, w] {
            let s = awo.saturate(lim);
            if !s.is_empty() && is_closed(&s) && connected(&s) {
                candidates.insert(s);
            }
        }
    }

    let mut cores = Vec::new();
    let mut diagram = NodeSet::new();
    for s in candidates {
        let outside = |b: &&(NodeSet, NodeSet, NodeSet)| b.0.is_disjoint(&s);
        let alpha_in = p_blocks.iter().filter(outside).any(|b| b.1.is_subset(&s));
        let omega_in = p_blocks.iter().filter(outside).any(|b| b.2.is_subset(&s));
        if !(alpha_in && omega_in) {
            continue;
        }
        for b in p_blocks.iter().filter(outside) {
            if b.1.is_subset(&s) || b.2.is_subset(&s) {
                diagram.extend(b.0.iter().copied());
            }
        }
        diagram.extend(s.iter().copied());
        cores.push(s);
    }

    // Components are taken over blocks so that no block is ever split.
    let diagram_blocks: NodeSet = awo.blocks_meeting(&diagram);
    let block_nbrs = |b: usize| -> Vec<usize> {
        awo.block(b)
            .iter()
            .flat_map(|&i| m.neighbors(i).iter().map(|&j| awo.block_of(j)))
            .collect()
    };
    let connections = graph::components(&diagram_blocks, block_nbrs)
        .into_iter()
        .map(|comp| {
            let members: NodeSet = comp.iter().flat_map(|&b| awo.block(b).iter().copied()).collect();
            Connection { closed: is_closed(&members), members: m.names(&members) }
        })
        .collect();
    QuasiSaddleData { quasi_saddles: cores.iter().map(|s| m.names(s)).collect(), connections }
}

/// AWO partition with every closed quasi-saddle connection collapsed.
pub fn extended_partition(m: &FlowModel) -> (Partition, QuasiSaddleData) {
    let awo = awo_partition(m);
    let data = quasi_saddles(m, &awo);
    let mut merged_into: Vec<Option<usize>> = vec![None; m.len()];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for c in data.connections.iter().filter(|c| c.closed) {
        let g: Vec<usize> = c.members.iter().map(|id| m.index_of(id).unwrap()).collect();
        for &i in &g {
            merged_into[i] = Some(groups.len());
        }
        groups.push(g);
    }
    for b in awo.blocks() {
        if merged_into[b[0]].is_none() {
            groups.push(b.clone());
        }
    }
    (Partition::from_groups(m.len(), groups), data)
}

pub fn partition_at(m: &FlowModel, level: Level) -> Result<Partition> {
    Ok(match level {
        Level::Orbit => Partition::discrete(m.len()),
        Level::WeakClass => weak_class_partition(m),
        Level::Class => class_partition(m),
        Level::Awo => awo_partition(m),
        Level::Ao => ao_partition(m),
        Level::AwoK(k) => kth_partition(m, k, false)?.0,
        Level::AoK(k) => kth_partition(m, k, true)?.0,
        Level::Extended => {
            if !m.flags().hausdorff {
                return Err(Error::Precondition("extended quotient needs a Hausdorff model".into()));
            }
            extended_partition(m).0
        }
        Level::Morse => crate::morse::morse_graph(m)?.partition,
    })
}

/// Quotient of a valid model at the given level.
pub fn compute_quotient(m: &FlowModel, level: Level) -> Result<QuotientSpace> {
    m.ensure_valid()?;
    let p = partition_at(m, level)?;
    Ok(QuotientSpace::from_partition(m, level, p))
}

/// Outcome of checking that each level refines the next one up.
#[derive(Clone, Debug, Serialize)]
pub struct RefinementCheck {
    pub finer: Level,
    pub coarser: Level,
    pub holds: bool,
}

/// Checks the chain ORBIT -> WEAK_CLASS -> {CLASS, AWO} -> AO -> MORSE and
/// AWO -> EXTENDED. MORSE is only included on compact models.
pub fn refinement_chain(m: &FlowModel) -> Result<Vec<RefinementCheck>> {
    m.ensure_valid()?;
    let mut levels = vec![Level::Orbit, Level::WeakClass, Level::Class, Level::Awo, Level::Ao];
    if m.flags().hausdorff {
        levels.push(Level::Extended);
    }
    if m.flags().compact {
        levels.push(Level::Morse);
    }
    let parts: BTreeMap<String, Partition> =
        levels.iter().map(|&l| Ok((l.to_string(), partition_at(m, l)?))).collect::<Result<_>>()?;
    let pairs = [
        (Level::Orbit, Level::WeakClass),
        (Level::WeakClass, Level::Class),
        (Level::WeakClass, Level::Awo),
        (Level::Class, Level::Ao),
        (Level::Awo, Level::Ao),
        (Level::Awo, Level::Extended),
        (Level::Ao, Level::Morse),
    ];
    Ok(pairs
        .iter()
        .filter_map(|&(f, c)| {
            let (pf, pc) = (parts.get(&f.to_string())?, parts.get(&c.to_string())?);
            Some(RefinementCheck { finer: f, coarser: c, holds: pf.refines(pc) })
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Flags, OrbitNode};

    fn set(v: &[&str]) -> BTreeSet<NodeId> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn blocks(q: &QuotientSpace) -> BTreeSet<BTreeSet<NodeId>> {
        q.member_sets()
    }

    #[test]
    fn level_names_round_trip() {
        for l in [Level::Orbit, Level::WeakClass, Level::Awo, Level::AoK(3), Level::AwoK(1), Level::Morse] {
            assert_eq!(l.to_string().parse::<Level>().unwrap(), l);
        }
        assert!("awo-x".parse::<Level>().is_err());
        assert!("reeb".parse::<Level>().is_err());
    }

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
    fn sphere_gradient_awo_has_three_blocks() {
        let q = compute_quotient(&sphere_grad(), Level::Awo).unwrap();
        assert_eq!(q.labels(), vec!["A", "s+", "s-"]);
        // Both poles lie in the closure of the annulus.
        let a = q.order.position("A").unwrap();
        let sp = q.order.position("s+").unwrap();
        assert!(q.order.leq(sp, a) && !q.order.leq(a, sp));
    }

    #[test]
    fn same_limits_but_disconnected_stay_apart() {
        // Two flow boxes between the same poles that do not touch.
        let m = FlowModel::with_contact_adjacency(
            Flags::compact_hausdorff(),
            vec![
                OrbitNode::new("p", Kind::Singular),
                OrbitNode::new("q", Kind::Singular),
                OrbitNode::new("x", Kind::Nonrecurrent).alpha(["p"]).omega(["q"]),
                OrbitNode::new("y", Kind::Nonrecurrent).alpha(["p"]).omega(["q"]),
            ],
        )
        .unwrap();
        let q = compute_quotient(&m, Level::Awo).unwrap();
        assert_eq!(q.len(), 4);
    }

    fn recurrent_pair() -> FlowModel {
        // r1 and r2 share a closure but r2 has a point as its omega-limit.
        FlowModel::with_contact_adjacency(
            Flags::compact_hausdorff(),
            vec![
                OrbitNode::new("c", Kind::Singular),
                OrbitNode::new("r1", Kind::RecurrentNonclosed).family().alpha(["r1", "r2", "c"]).omega(["r1", "r2", "c"]),
                OrbitNode::new("r2", Kind::RecurrentNonclosed).alpha(["r1", "r2", "c"]).omega(["c"]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn ao_merges_equal_closures_awo_does_not() {
        let m = recurrent_pair();
        assert!(m.validate().is_empty(), "{:?}", m.validate());
        let awo = compute_quotient(&m, Level::Awo).unwrap();
        let ao = compute_quotient(&m, Level::Ao).unwrap();
        assert!(blocks(&awo).contains(&set(&["r1"])));
        assert!(blocks(&ao).contains(&set(&["r1", "r2"])));
        assert!(awo.partition.refines(&ao.partition));
    }

    #[test]
    fn k_must_be_positive() {
        assert!(matches!(kth_partition(&sphere_grad(), 0, false), Err(Error::Argument(_))));
    }

    fn split_limit_model() -> FlowModel {
        // q is an arc of fixed points ending at p, so {p, q} is one block;
        // x and y reach that block through different nodes.
        FlowModel::with_contact_adjacency(
            Flags::compact_hausdorff(),
            vec![
                OrbitNode::new("a", Kind::Singular),
                OrbitNode::new("p", Kind::Singular),
                OrbitNode::new("q", Kind::Singular).family().tb(["p"]),
                OrbitNode::new("x", Kind::Nonrecurrent).alpha(["a"]).omega(["p"]),
                OrbitNode::new("y", Kind::Nonrecurrent).family().alpha(["a"]).omega(["p", "q"]).tb(["x"]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn second_partition_coarser_when_limits_split_a_block() {
        let m = split_limit_model();
        assert!(m.validate().is_empty(), "{:?}", m.validate());
        let (p1, stable) = kth_partition(&m, 1, false).unwrap();
        let (p2, _) = kth_partition(&m, 2, false).unwrap();
        assert_eq!(p1, awo_partition(&m));
        assert!(p1.refines(&p2) && p2.len() < p1.len());
        assert_eq!(stable, 2);
    }

    #[test]
    fn kth_equals_awo_when_limits_are_blocks() {
        let m = sphere_grad();
        for k in 1..4 {
            assert_eq!(kth_partition(&m, k, false).unwrap().0, awo_partition(&m));
        }
        assert_eq!(kth_partition(&m, 1, false).unwrap().1, 1);
    }

    #[test]
    fn orbit_level_is_discrete() {
        let q = compute_quotient(&sphere_grad(), Level::Orbit).unwrap();
        assert_eq!(q.len(), 3);
    }

    #[test]
    fn invalid_model_refused() {
        let m = FlowModel::new(Flags::compact_hausdorff(), vec![OrbitNode::new("x", Kind::Nonrecurrent)], vec![]).unwrap();
        assert!(matches!(compute_quotient(&m, Level::Awo), Err(Error::Invalid(_))));
    }
}
