//! The limit and closure relations between orbits and between blocks.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{FlowModel, NodeSet};
use crate::quotient::{self, union_alpha, union_omega, Partition};
use crate::topology::{antisymmetry_witness, transitivity_witness, BoolMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelationName {
    /// X meets the alpha-limit set of Y.
    Alpha,
    /// X meets the omega-limit set of Y.
    Omega,
    /// Union of `Alpha` and `Omega`.
    V,
    /// X meets the limit part of the boundary of Y.
    Perp,
    /// X meets the transverse part of the boundary of Y.
    Pitchfork,
    /// X meets the boundary of Y; union of `Perp` and `Pitchfork`.
    Partial,
}

impl RelationName {
    pub const ALL: [RelationName; 6] = [
        RelationName::Alpha,
        RelationName::Omega,
        RelationName::V,
        RelationName::Perp,
        RelationName::Pitchfork,
        RelationName::Partial,
    ];
}

impl fmt::Display for RelationName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RelationName::Alpha => "alpha",
            RelationName::Omega => "omega",
            RelationName::V => "v",
            RelationName::Perp => "perp",
            RelationName::Pitchfork => "pitchfork",
            RelationName::Partial => "partial",
        };
        f.write_str(s)
    }
}

impl FromStr for RelationName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        RelationName::ALL
            .into_iter()
            .find(|r| r.to_string() == s)
            .ok_or_else(|| Error::Argument(format!("unknown relation `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelLevel {
    Node,
    Awo,
    Ao,
    Class,
}

impl fmt::Display for RelLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RelLevel::Node => "node",
            RelLevel::Awo => "awo",
            RelLevel::Ao => "ao",
            RelLevel::Class => "class",
        };
        f.write_str(s)
    }
}

impl FromStr for RelLevel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [RelLevel::Node, RelLevel::Awo, RelLevel::Ao, RelLevel::Class]
            .into_iter()
            .find(|l| l.to_string() == s)
            .ok_or_else(|| Error::Argument(format!("unknown relation level `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationMatrix {
    pub name: RelationName,
    pub level: RelLevel,
    pub elements: Vec<String>,
    pub matrix: BoolMatrix,
}

impl RelationMatrix {
    pub fn position(&self, label: &str) -> Result<usize> {
        self.elements
            .iter()
            .position(|e| e == label)
            .ok_or_else(|| Error::UnknownNode(label.to_string()))
    }

    pub fn holds(&self, x: &str, y: &str) -> Result<bool> {
        Ok(self.matrix.get(self.position(x)?, self.position(y)?))
    }

    /// Non-reflexive related pairs as labels.
    pub fn pairs(&self) -> Vec<(String, String)> {
        self.matrix
            .pairs()
            .into_iter()
            .filter(|(a, b)| a != b)
            .map(|(a, b)| (self.elements[a].clone(), self.elements[b].clone()))
            .collect()
    }
}

impl Serialize for RelationMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct View<'a> {
            name: RelationName,
            level: RelLevel,
            elements: &'a [String],
            pairs: Vec<(String, String)>,
        }
        View { name: self.name, level: self.level, elements: &self.elements, pairs: self.pairs() }.serialize(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PropertyReport {
    pub reflexive: bool,
    pub transitive: bool,
    pub transitivity_witness: Option<(String, String, String)>,
    pub antisymmetric: bool,
    pub antisymmetry_witness: Option<(String, String)>,
}

impl PropertyReport {
    pub fn is_preorder(&self) -> bool {
        self.reflexive && self.transitive
    }

    pub fn is_partial_order(&self) -> bool {
        self.is_preorder() && self.antisymmetric
    }
}

/// Witnesses are the first failures in label order, since elements are
/// kept sorted by label.
pub fn check_properties(r: &RelationMatrix) -> PropertyReport {
    let m = &r.matrix;
    let label = |i: usize| r.elements[i].clone();
    let tw = transitivity_witness(m).map(|(a, b, c)| (label(a), label(b), label(c)));
    let aw = antisymmetry_witness(m).map(|(a, b)| (label(a), label(b)));
    PropertyReport {
        reflexive: (0..m.size()).all(|i| m.get(i, i)),
        transitive: tw.is_none(),
        transitivity_witness: tw,
        antisymmetric: aw.is_none(),
        antisymmetry_witness: aw,
    }
}

/// Limit data of one element: members, alpha, omega and closure.
struct Cell {
    members: NodeSet,
    alpha: NodeSet,
    omega: NodeSet,
    closure: NodeSet,
}

impl Cell {
    fn of_block(m: &FlowModel, members: &[usize]) -> Cell {
        let set: NodeSet = members.iter().copied().collect();
        Cell {
            alpha: union_alpha(m, members),
            omega: union_omega(m, members),
            closure: m.closure_of(&set),
            members: set,
        }
    }

    /// Closure minus the element itself and its limit sets.
    fn transverse(&self) -> NodeSet {
        self.closure
            .iter()
            .filter(|i| !self.members.contains(i) && !self.alpha.contains(i) && !self.omega.contains(i))
            .copied()
            .collect()
    }

    fn limit_boundary(&self) -> NodeSet {
        self.alpha.union(&self.omega).filter(|i| !self.members.contains(i)).copied().collect()
    }

    fn boundary(&self) -> NodeSet {
        self.closure.difference(&self.members).copied().collect()
    }
}

fn meets(a: &NodeSet, b: &NodeSet) -> bool {
    !a.is_disjoint(b)
}

fn block_relation(m: &FlowModel, p: &Partition, name: RelationName, class_level: bool) -> BoolMatrix {
    let cells: Vec<Cell> = p.blocks().iter().map(|b| Cell::of_block(m, b)).collect();
    let alpha = |x: usize, y: usize| meets(&cells[x].members, &cells[y].alpha);
    let omega = |x: usize, y: usize| meets(&cells[x].members, &cells[y].omega);
    let pitch = |x: usize, y: usize| !class_level && meets(&cells[x].members, &cells[y].transverse());
    let perp = |x: usize, y: usize| meets(&cells[x].members, &cells[y].limit_boundary());
    BoolMatrix::from_fn(p.len(), |x, y| {
        x == y
            || match name {
                RelationName::Alpha => alpha(x, y),
                RelationName::Omega => omega(x, y),
                RelationName::V => alpha(x, y) || omega(x, y),
                RelationName::Perp => perp(x, y),
                RelationName::Pitchfork => pitch(x, y),
                RelationName::Partial if class_level => alpha(x, y) || omega(x, y),
                RelationName::Partial => meets(&cells[x].members, &cells[y].boundary()),
            }
    })
}

/// Orbit-level relations between nodes; boundary relations use the AWO
/// block of the upper node.
fn node_relation(m: &FlowModel, name: RelationName) -> BoolMatrix {
    let awo = quotient::awo_partition(m);
    let cells: Vec<Cell> = awo.blocks().iter().map(|b| Cell::of_block(m, b)).collect();
    BoolMatrix::from_fn(m.len(), |x, y| {
        let (bx, by) = (awo.block_of(x), awo.block_of(y));
        let c = &cells[by];
        match name {
            RelationName::Alpha => x == y || m.alpha(y).contains(&x),
            RelationName::Omega => x == y || m.omega(y).contains(&x),
            RelationName::V => x == y || m.alpha(y).contains(&x) || m.omega(y).contains(&x),
            RelationName::Perp => bx == by || c.limit_boundary().contains(&x),
            RelationName::Pitchfork => bx == by || c.transverse().contains(&x),
            RelationName::Partial => bx == by || c.boundary().contains(&x),
        }
    })
}

pub fn compute_relation(m: &FlowModel, name: RelationName, level: RelLevel) -> Result<RelationMatrix> {
    m.ensure_valid()?;
    let (elements, matrix) = match level {
        RelLevel::Node => ((0..m.len()).map(|i| m.id(i).to_string()).collect(), node_relation(m, name)),
        RelLevel::Awo | RelLevel::Ao | RelLevel::Class => {
            let p = match level {
                RelLevel::Awo => quotient::awo_partition(m),
                RelLevel::Ao => quotient::ao_partition(m),
                _ => quotient::class_partition(m),
            };
            (p.labels(m), block_relation(m, &p, name, level == RelLevel::Class))
        }
    };
    Ok(RelationMatrix { name, level, elements, matrix })
}

/// Relation between the blocks of an arbitrary partition.
pub fn relation_on(m: &FlowModel, p: &Partition, name: RelationName) -> RelationMatrix {
    RelationMatrix {
        name,
        level: RelLevel::Awo,
        elements: p.labels(m),
        matrix: block_relation(m, p, name, false),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecompositionViolation {
    pub level: RelLevel,
    /// `partial` or `v`: the relation that differs from its union.
    pub relation: RelationName,
    pub pair: (String, String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecompositionReport {
    pub violations: Vec<DecompositionViolation>,
    pub passed: bool,
}

/// Checks `partial = alpha | omega | pitchfork` and `v = alpha | omega`
/// entrywise at the AWO and AO levels of a Hausdorff model.
pub fn relation_decomposition_check(m: &FlowModel) -> Result<DecompositionReport> {
    m.ensure_valid()?;
    if !m.flags().hausdorff {
        return Err(Error::Precondition("the decomposition needs a Hausdorff model".into()));
    }
    let mut violations = Vec::new();
    for level in [RelLevel::Awo, RelLevel::Ao] {
        let get = |name| compute_relation(m, name, level);
        let (alpha, omega) = (get(RelationName::Alpha)?, get(RelationName::Omega)?);
        let limits = alpha.matrix.union(&omega.matrix);
        let all = limits.union(&get(RelationName::Pitchfork)?.matrix);
        for (name, want) in [(RelationName::Partial, &all), (RelationName::V, &limits)] {
            let r = get(name)?;
            for x in 0..r.elements.len() {
                for y in 0..r.elements.len() {
                    if r.matrix.get(x, y) != want.get(x, y) {
                        violations.push(DecompositionViolation {
                            level,
                            relation: name,
                            pair: (r.elements[x].clone(), r.elements[y].clone()),
                        });
                    }
                }
            }
        }
    }
    Ok(DecompositionReport { passed: violations.is_empty(), violations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Flags, Kind, OrbitNode};

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
    fn decomposition_holds_on_figures() {
        for id in ["fig1", "fig2", "ham-disk", "sphere-grad"] {
            let r = relation_decomposition_check(&crate::corpus::load(id).unwrap()).unwrap();
            assert!(r.passed, "{id}: {:?}", r.violations);
        }
    }

    #[test]
    fn sphere_gradient_relations() {
        let m = sphere_grad();
        let a = compute_relation(&m, RelationName::Alpha, RelLevel::Awo).unwrap();
        assert!(a.holds("s+", "A").unwrap());
        assert!(!a.holds("s-", "A").unwrap());
        let w = compute_relation(&m, RelationName::Omega, RelLevel::Awo).unwrap();
        assert!(w.holds("s-", "A").unwrap());
        let p = compute_relation(&m, RelationName::Pitchfork, RelLevel::Awo).unwrap();
        assert!(p.pairs().is_empty());
        let d = compute_relation(&m, RelationName::Partial, RelLevel::Awo).unwrap();
        assert!(check_properties(&d).is_partial_order());
    }

    #[test]
    fn unknown_label_is_an_error() {
        let r = compute_relation(&sphere_grad(), RelationName::V, RelLevel::Awo).unwrap();
        assert!(r.holds("zz", "A").is_err());
    }

    #[test]
    fn class_level_pitchfork_is_identity() {
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
        let awo = compute_relation(&m, RelationName::Pitchfork, RelLevel::Awo).unwrap();
        assert!(awo.holds("r", "x").unwrap());
        let class = compute_relation(&m, RelationName::Pitchfork, RelLevel::Class).unwrap();
        assert!(class.pairs().is_empty());
    }

    #[test]
    fn names_parse_back() {
        for r in RelationName::ALL {
            assert_eq!(r.to_string().parse::<RelationName>().unwrap(), r);
        }
        assert!("nope".parse::<RelationName>().is_err());
    }
}
