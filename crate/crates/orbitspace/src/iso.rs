//! Isomorphism of finite labeled relations, used to compare quotient spaces
//! of different models.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{FlowModel, Kind};
use crate::quotient::{self, Level, Partition, QuotientSpace};
use crate::relations::{self, RelationName};
use crate::surface::{self, AwoType};
use crate::topology::{BoolMatrix, FinitePreorder};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KindClass {
    Singular,
    Periodic,
    Nonrecurrent,
    Recurrent,
    /// A block with members of several kinds.
    Mixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Cardinality {
    Single,
    Family,
}

/// Label of a block. Embedding data never enters a label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ElementLabel {
    pub kind: KindClass,
    pub awo_type: Option<AwoType>,
    pub cardinality: Cardinality,
}

/// Elements with labels and a reflexive relation between them, usually a
/// partial order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LabeledPoset {
    pub elements: Vec<String>,
    pub labels: Vec<ElementLabel>,
    #[serde(skip)]
    pub relation: BoolMatrix,
}

fn block_label(m: &FlowModel, block: &[usize]) -> ElementLabel {
    let kinds: Vec<Kind> = block.iter().map(|&i| m.kind(i)).collect();
    let kind = if kinds.iter().all(|&k| k == kinds[0]) {
        match kinds[0] {
            Kind::Singular => KindClass::Singular,
            Kind::Periodic => KindClass::Periodic,
            Kind::Nonrecurrent => KindClass::Nonrecurrent,
            Kind::RecurrentNonclosed => KindClass::Recurrent,
        }
    } else {
        KindClass::Mixed
    };
    let awo_type = if m.flags().surface.is_some() && kind != KindClass::Mixed {
        surface::classify_block(m, block).ok()
    } else {
        None
    };
    let cardinality =
        if block.len() == 1 && !m.is_family(block[0]) { Cardinality::Single } else { Cardinality::Family };
    ElementLabel { kind, awo_type, cardinality }
}

impl LabeledPoset {
    pub fn new(elements: Vec<String>, labels: Vec<ElementLabel>, relation: BoolMatrix) -> Result<Self> {
        if elements.len() != labels.len() || elements.len() != relation.size() {
            return Err(Error::Argument("elements, labels and relation differ in size".into()));
        }
        Ok(LabeledPoset { elements, labels, relation })
    }

    /// Blocks of `partition` under the specialization order.
    pub fn from_partition(m: &FlowModel, partition: &Partition) -> Self {
        let q = QuotientSpace::from_partition(m, Level::Awo, partition.clone());
        Self::from_quotient(m, &q)
    }

    pub fn from_quotient(m: &FlowModel, q: &QuotientSpace) -> Self {
        let labels = q.partition.blocks().iter().map(|b| block_label(m, b)).collect();
        LabeledPoset { elements: q.labels(), labels, relation: q.order.matrix().clone() }
    }

    /// Blocks of `partition` under one of the block relations.
    pub fn from_relation(m: &FlowModel, partition: &Partition, name: RelationName) -> Self {
        let r = relations::relation_on(m, partition, name);
        let labels = partition.blocks().iter().map(|b| block_label(m, b)).collect();
        LabeledPoset { elements: r.elements, labels, relation: r.matrix }
    }

    /// The quotient of `m` at `level`, ordered by `relation` when given and by
    /// the specialization order otherwise.
    pub fn of_model(m: &FlowModel, level: Level, relation: Option<RelationName>) -> Result<Self> {
        let q = quotient::compute_quotient(m, level)?;
        Ok(match relation {
            Some(name) => Self::from_relation(m, &q.partition, name),
            None => Self::from_quotient(m, &q),
        })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    fn signatures(&self) -> Vec<Signature> {
        let n = self.len();
        let heights = FinitePreorder::generated_by(self.elements.clone(), &self.relation).heights();
        (0..n)
            .map(|x| Signature {
                label: self.labels[x],
                below: (0..n).filter(|&y| y != x && self.relation.get(y, x)).count(),
                above: (0..n).filter(|&y| y != x && self.relation.get(x, y)).count(),
                height: heights[x],
                looped: self.relation.get(x, x),
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Signature {
    label: ElementLabel,
    below: usize,
    above: usize,
    height: usize,
    looped: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IsoVerdict {
    Isomorphic,
    NotIsomorphic,
    /// The step budget ran out first.
    Undecided,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IsoReport {
    pub verdict: IsoVerdict,
    /// Element of `a` to element of `b`.
    pub witness: Option<BTreeMap<String, String>>,
    pub reason: Option<String>,
    pub steps: u64,
}

impl IsoReport {
    pub fn is_isomorphic(&self) -> bool {
        self.verdict == IsoVerdict::Isomorphic
    }
}

pub const DEFAULT_BUDGET: u64 = 10_000_000;

struct Search<'a> {
    a: &'a LabeledPoset,
    b: &'a LabeledPoset,
    order: Vec<usize>,
    candidates: Vec<Vec<usize>>,
    map: Vec<Option<usize>>,
    used: Vec<bool>,
    steps: u64,
    budget: u64,
}

impl Search<'_> {
    /// `Some(true)` on success, `Some(false)` when exhausted, `None` when out
    /// of budget.
    fn extend(&mut self, depth: usize) -> Option<bool> {
        if depth == self.order.len() {
            return Some(true);
        }
        let x = self.order[depth];
        for ci in 0..self.candidates[x].len() {
            let y = self.candidates[x][ci];
            if self.used[y] {
                continue;
            }
            self.steps += 1;
            if self.steps > self.budget {
                return None;
            }
            let consistent = self.order[..depth].iter().all(|&x2| {
                let y2 = self.map[x2].unwrap();
                self.a.relation.get(x, x2) == self.b.relation.get(y, y2)
                    && self.a.relation.get(x2, x) == self.b.relation.get(y2, y)
            });
            if !consistent {
                continue;
            }
            self.map[x] = Some(y);
            self.used[y] = true;
            match self.extend(depth + 1) {
                Some(false) => {}
                other => return other,
            }
            self.map[x] = None;
            self.used[y] = false;
        }
        Some(false)
    }
}

/// Exact isomorphism test by backtracking over elements with matching
/// label, degrees and height. At most `budget` candidate pairs are tried.
pub fn are_isomorphic(a: &LabeledPoset, b: &LabeledPoset, budget: u64) -> IsoReport {
    let no = |reason: String| IsoReport { verdict: IsoVerdict::NotIsomorphic, witness: None, reason: Some(reason), steps: 0 };
    if a.len() != b.len() {
        return no(format!("{} elements against {}", a.len(), b.len()));
    }
    let (sa, sb) = (a.signatures(), b.signatures());
    let (mut sorted_a, mut sorted_b) = (sa.clone(), sb.clone());
    sorted_a.sort();
    sorted_b.sort();
    if sorted_a != sorted_b {
        let mut la = a.labels.clone();
        let mut lb = b.labels.clone();
        la.sort();
        lb.sort();
        return no(if la != lb { "label multisets differ".into() } else { "degree or height profiles differ".into() });
    }
    let candidates: Vec<Vec<usize>> = (0..a.len()).map(|x| (0..b.len()).filter(|&y| sb[y] == sa[x]).collect()).collect();
    // Rare signatures first, then the most constrained elements.
    let mut order: Vec<usize> = (0..a.len()).collect();
    order.sort_by_key(|&x| (candidates[x].len(), std::cmp::Reverse(sa[x].below + sa[x].above), std::cmp::Reverse(sa[x].height), x));
    let mut search = Search {
        a,
        b,
        order,
        candidates,
        map: vec![None; a.len()],
        used: vec![false; b.len()],
        steps: 0,
        budget,
    };
    let outcome = search.extend(0);
    let steps = search.steps;
    match outcome {
        Some(true) => {
            let witness = (0..a.len())
                .map(|x| (a.elements[x].clone(), b.elements[search.map[x].unwrap()].clone()))
                .collect();
            IsoReport { verdict: IsoVerdict::Isomorphic, witness: Some(witness), reason: None, steps }
        }
        Some(false) => IsoReport { steps, ..no("no order-preserving bijection".into()) },
        None => IsoReport { verdict: IsoVerdict::Undecided, witness: None, reason: Some("step budget exhausted".into()), steps },
    }
}

/// Checks that `witness` is a label- and relation-preserving bijection.
pub fn verify_witness(a: &LabeledPoset, b: &LabeledPoset, witness: &BTreeMap<String, String>) -> bool {
    let pos_b: BTreeMap<&str, usize> = b.elements.iter().enumerate().map(|(i, e)| (e.as_str(), i)).collect();
    let Some(f) = a
        .elements
        .iter()
        .map(|e| witness.get(e).and_then(|t| pos_b.get(t.as_str()).copied()))
        .collect::<Option<Vec<usize>>>()
    else {
        return false;
    };
    let mut image = f.clone();
    image.sort_unstable();
    image.dedup();
    image.len() == b.len()
        && a.len() == b.len()
        && (0..a.len()).all(|x| a.labels[x] == b.labels[f[x]])
        && (0..a.len()).all(|x| (0..a.len()).all(|y| a.relation.get(x, y) == b.relation.get(f[x], f[y])))
}
