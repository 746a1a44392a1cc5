//! Finite preorders and the finite topologies they encode.
//!
//! `x <= y` is read as "x lies in the closure of y", so open sets are the
//! up-closed subsets.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::ops::Deref;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Dense square boolean matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BoolMatrix {
    n: usize,
    bits: Vec<bool>,
}

impl BoolMatrix {
    pub fn new(n: usize) -> Self {
        BoolMatrix { n, bits: vec![false; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| i == j)
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let mut m = BoolMatrix::new(n);
        for i in 0..n {
            for j in 0..n {
                m.bits[i * n + j] = f(i, j);
            }
        }
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        self.bits[i * self.n + j] = v;
    }

    pub fn union(&self, other: &BoolMatrix) -> BoolMatrix {
        assert_eq!(self.n, other.n);
        BoolMatrix { n: self.n, bits: self.bits.iter().zip(&other.bits).map(|(a, b)| *a || *b).collect() }
    }

    pub fn is_subset(&self, other: &BoolMatrix) -> bool {
        self.n == other.n && self.bits.iter().zip(&other.bits).all(|(a, b)| !*a || *b)
    }

    /// Reflexive-transitive closure (Warshall).
    pub fn closure(&self) -> BoolMatrix {
        let n = self.n;
        let mut m = self.clone();
        for i in 0..n {
            m.set(i, i, true);
        }
        for k in 0..n {
            for i in 0..n {
                if m.get(i, k) {
                    for j in 0..n {
                        if m.get(k, j) {
                            m.set(i, j, true);
                        }
                    }
                }
            }
        }
        m
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in 0..self.n {
                if self.get(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// First failure of transitivity `a <= b <= c` with `a </= c`, scanning
/// indices in order.
pub fn transitivity_witness(m: &BoolMatrix) -> Option<(usize, usize, usize)> {
    let n = m.size();
    for a in 0..n {
        for b in 0..n {
            if !m.get(a, b) {
                continue;
            }
            for c in 0..n {
                if m.get(b, c) && !m.get(a, c) {
                    return Some((a, b, c));
                }
            }
        }
    }
    None
}

/// First pair `a < b` (by index) related both ways.
pub fn antisymmetry_witness(m: &BoolMatrix) -> Option<(usize, usize)> {
    let n = m.size();
    for a in 0..n {
        for b in a + 1..n {
            if m.get(a, b) && m.get(b, a) {
                return Some((a, b));
            }
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinitePreorder {
    elements: Vec<String>,
    leq: BoolMatrix,
}

impl Serialize for FinitePreorder {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct View<'a> {
            elements: &'a [String],
            covering: Vec<(&'a str, &'a str)>,
        }
        let covering = self.covering_pairs().into_iter().map(|(a, b)| (self.label(a), self.label(b))).collect();
        View { elements: &self.elements, covering }.serialize(s)
    }
}

impl FinitePreorder {
    /// Checks that `leq` is reflexive and transitive.
    pub fn new(elements: Vec<String>, leq: BoolMatrix) -> Result<Self> {
        if elements.len() != leq.size() {
            return Err(Error::Argument("element count does not match matrix size".into()));
        }
        if let Some(i) = (0..leq.size()).find(|&i| !leq.get(i, i)) {
            return Err(Error::Argument(format!("not reflexive at `{}`", elements[i])));
        }
        if let Some((a, b, c)) = transitivity_witness(&leq) {
            return Err(Error::Argument(format!(
                "not transitive: {} <= {} <= {} but not {} <= {}",
                elements[a], elements[b], elements[c], elements[a], elements[c]
            )));
        }
        Ok(FinitePreorder { elements, leq })
    }

    /// Reflexive-transitive closure of an arbitrary relation.
    pub fn generated_by(elements: Vec<String>, relation: &BoolMatrix) -> Self {
        let leq = relation.closure();
        FinitePreorder { elements, leq }
    }

    pub fn from_pairs(elements: Vec<String>, pairs: &[(usize, usize)]) -> Self {
        let mut m = BoolMatrix::new(elements.len());
        for &(a, b) in pairs {
            m.set(a, b, true);
        }
        Self::generated_by(elements, &m)
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn label(&self, i: usize) -> &str {
        &self.elements[i]
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.elements.iter().position(|e| e == label)
    }

    pub fn matrix(&self) -> &BoolMatrix {
        &self.leq
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.leq.get(a, b)
    }

    pub fn lt(&self, a: usize, b: usize) -> bool {
        self.leq(a, b) && !self.leq(b, a)
    }

    pub fn is_antisymmetric(&self) -> bool {
        antisymmetry_witness(&self.leq).is_none()
    }

    pub fn down_set(&self, x: usize) -> BTreeSet<usize> {
        (0..self.len()).filter(|&y| self.leq(y, x)).collect()
    }

    pub fn up_set(&self, x: usize) -> BTreeSet<usize> {
        (0..self.len()).filter(|&y| self.leq(x, y)).collect()
    }

    /// Kolmogorov quotient: classes of mutually related elements, each
    /// labelled by its first member. Returns the poset and the class of
    /// every element.
    pub fn t0_tify(&self) -> (FinitePoset, Vec<usize>) {
        let n = self.len();
        let mut class = vec![usize::MAX; n];
        let mut reps = Vec::new();
        for x in 0..n {
            if class[x] != usize::MAX {
                continue;
            }
            let c = reps.len();
            reps.push(x);
            for y in x..n {
                if self.leq(x, y) && self.leq(y, x) {
                    class[y] = c;
                }
            }
        }
        let elements = reps.iter().map(|&r| self.elements[r].clone()).collect();
        let leq = BoolMatrix::from_fn(reps.len(), |a, b| self.leq(reps[a], reps[b]));
        (FinitePoset(FinitePreorder { elements, leq }), class)
    }

    /// Height of each element: length of the longest strict chain with the
    /// element on top. Equivalent elements share a height.
    pub fn heights(&self) -> Vec<usize> {
        let n = self.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&x| self.down_set(x).len());
        let mut h = vec![0usize; n];
        for &x in &order {
            h[x] = order
                .iter()
                .filter(|&&y| self.lt(y, x))
                .map(|&y| h[y] + 1)
                .max()
                .unwrap_or(0);
        }
        h
    }

    /// Height of the whole preorder; -1 for the empty one.
    pub fn height(&self) -> i64 {
        self.heights().into_iter().max().map_or(-1, |h| h as i64)
    }

    /// A longest strict chain, bottom first.
    pub fn longest_chain(&self) -> Vec<usize> {
        let h = self.heights();
        let Some(top) = (0..self.len()).max_by_key(|&x| (h[x], std::cmp::Reverse(x))) else {
            return Vec::new();
        };
        let mut chain = vec![top];
        let mut cur = top;
        while h[cur] > 0 {
            let next = (0..self.len()).find(|&y| self.lt(y, cur) && h[y] + 1 == h[cur]).unwrap();
            chain.push(next);
            cur = next;
        }
        chain.reverse();
        chain
    }

    /// Pairs generating the preorder: a cycle through each equivalence class
    /// and one pair per covering relation between classes.
    pub fn covering_pairs(&self) -> Vec<(usize, usize)> {
        let (poset, class) = self.t0_tify();
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); poset.len()];
        for (x, &c) in class.iter().enumerate() {
            members[c].push(x);
        }
        let mut out = Vec::new();
        for m in &members {
            if m.len() > 1 {
                for k in 0..m.len() {
                    out.push((m[k], m[(k + 1) % m.len()]));
                }
            }
        }
        for (a, b) in poset.hasse_pairs() {
            out.push((members[a][0], members[b][0]));
        }
        out.sort_unstable();
        out
    }

    /// Up-closed subsets as bit masks, i.e. the open sets. Limited to 20
    /// elements.
    pub fn open_sets(&self) -> Result<Vec<u32>> {
        let n = self.len();
        if n > 20 {
            return Err(Error::Argument(format!("open-set enumeration limited to 20 elements, got {n}")));
        }
        let ups: Vec<u32> = (0..n).map(|x| self.up_set(x).iter().fold(0u32, |m, &y| m | (1 << y))).collect();
        Ok((0u32..(1u32 << n))
            .filter(|&mask| (0..n).all(|x| mask & (1 << x) == 0 || mask & ups[x] == ups[x]))
            .collect())
    }

    /// Recovers the specialization preorder from a family of open sets.
    pub fn from_open_sets(elements: Vec<String>, opens: &[u32]) -> Self {
        let n = elements.len();
        let leq = BoolMatrix::from_fn(n, |x, y| opens.iter().all(|&u| u & (1 << x) == 0 || u & (1 << y) != 0));
        FinitePreorder { elements, leq }
    }

    /// Line-oriented text form. `covering` selects the generating pairs
    /// instead of the full relation.
    pub fn to_text(&self, covering: bool) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "preorder {}", if covering { "covering" } else { "full" });
        let _ = writeln!(s, "elements {}", self.elements.join(" "));
        let pairs = if covering {
            self.covering_pairs()
        } else {
            self.leq.pairs().into_iter().filter(|(a, b)| a != b).collect()
        };
        for (a, b) in pairs {
            let _ = writeln!(s, "{} {}", self.elements[a], self.elements[b]);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Parse("empty preorder text".into()))?;
        let covering = match header {
            "preorder covering" => true,
            "preorder full" => false,
            other => return Err(Error::Parse(format!("bad header `{other}`"))),
        };
        let elems = lines.next().and_then(|l| l.strip_prefix("elements")).ok_or_else(|| Error::Parse("missing elements line".into()))?;
        let elements: Vec<String> = elems.split_whitespace().map(String::from).collect();
        let pos = |l: &str| {
            elements.iter().position(|e| e == l).ok_or_else(|| Error::Parse(format!("unknown element `{l}`")))
        };
        let mut m = BoolMatrix::identity(elements.len());
        for line in lines {
            let mut it = line.split_whitespace();
            let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
                return Err(Error::Parse(format!("bad pair line `{line}`")));
            };
            m.set(pos(a)?, pos(b)?, true);
        }
        if covering {
            Ok(Self::generated_by(elements, &m))
        } else {
            Self::new(elements, m).map_err(|e| Error::Parse(e.to_string()))
        }
    }
}

/// A preorder known to be antisymmetric.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FinitePoset(FinitePreorder);

impl Deref for FinitePoset {
    type Target = FinitePreorder;
    fn deref(&self) -> &FinitePreorder {
        &self.0
    }
}

impl FinitePoset {
    pub fn new(p: FinitePreorder) -> Result<Self> {
        match antisymmetry_witness(&p.leq) {
            None => Ok(FinitePoset(p)),
            Some((a, b)) => Err(Error::Argument(format!("not antisymmetric: {} and {}", p.label(a), p.label(b)))),
        }
    }

    pub fn into_inner(self) -> FinitePreorder {
        self.0
    }

    /// Covering pairs `a < b` with nothing strictly between.
    pub fn hasse_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if a != b && self.leq(a, b) && !(0..n).any(|c| c != a && c != b && self.leq(a, c) && self.leq(c, b)) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// Reads the poset as a multigraph: height-0 elements are vertices,
    /// height-1 elements are edges attached to the vertices below them.
    pub fn as_multigraph(&self) -> std::result::Result<MultiGraph, MultigraphRejection> {
        let heights = self.heights();
        let mut vertices = Vec::new();
        let mut edges = Vec::new();
        for x in 0..self.len() {
            let down = self.down_set(x);
            let reject = |rule| MultigraphRejection { element: self.label(x).to_string(), rule };
            if heights[x] > 1 {
                return Err(reject("height exceeds 1"));
            }
            if down.len() > 3 {
                return Err(reject("more than two elements below"));
            }
            if heights[x] == 0 {
                vertices.push(self.label(x).to_string());
            } else {
                let ends = down.iter().filter(|&&y| y != x).map(|&y| self.label(y).to_string()).collect();
                edges.push(MultiEdge { label: self.label(x).to_string(), ends });
            }
        }
        Ok(MultiGraph { vertices, edges })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MultiEdge {
    pub label: String,
    /// One end for a loop or a dangling edge, two otherwise.
    pub ends: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MultiGraph {
    pub vertices: Vec<String>,
    pub edges: Vec<MultiEdge>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MultigraphRejection {
    pub element: String,
    pub rule: &'static str,
}

impl std::fmt::Display for MultigraphRejection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "`{}`: {}", self.element, self.rule)
    }
}
