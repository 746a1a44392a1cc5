//! Box-grid outer approximation of planar flows and the Morse graph of the
//! resulting multivalued map.
//!
//! Images are sampled at the corners and center of each box, so the map is
//! not a rigorous enclosure.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr;
use crate::graph;
use crate::morse::{MorseEdge, MorseGraph};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoxGrid {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    pub nx: usize,
    pub ny: usize,
}

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl BoxGrid {
    pub fn new(domain: [f64; 4], nx: usize, ny: usize) -> Result<Self> {
        let [x0, x1, y0, y1] = domain;
        if nx < 2 || ny < 2 {
            return Err(Error::Argument(format!("resolution {nx}x{ny}: need at least 2 boxes per axis")));
        }
        if !(x0.is_finite() && x1.is_finite() && y0.is_finite() && y1.is_finite()) || x1 <= x0 || y1 <= y0 {
            return Err(Error::Argument(format!("degenerate domain [{x0}, {x1}] x [{y0}, {y1}]")));
        }
        Ok(BoxGrid { x0, x1, y0, y1, nx, ny })
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn box_size(&self) -> (f64, f64) {
        ((self.x1 - self.x0) / self.nx as f64, (self.y1 - self.y0) / self.ny as f64)
    }

    pub fn diagonal(&self) -> f64 {
        let (dx, dy) = self.box_size();
        dx.hypot(dy)
    }

    /// Boxes are numbered row by row from the lower left corner.
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    pub fn coords(&self, b: usize) -> (usize, usize) {
        (b % self.nx, b / self.nx)
    }

    pub fn rect(&self, b: usize) -> Rect {
        let (ix, iy) = self.coords(b);
        let (dx, dy) = self.box_size();
        Rect {
            x0: self.x0 + ix as f64 * dx,
            x1: self.x0 + (ix + 1) as f64 * dx,
            y0: self.y0 + iy as f64 * dy,
            y1: self.y0 + (iy + 1) as f64 * dy,
        }
    }

    pub fn center(&self, b: usize) -> (f64, f64) {
        let r = self.rect(b);
        ((r.x0 + r.x1) / 2.0, (r.y0 + r.y1) / 2.0)
    }

    pub fn box_containing(&self, x: f64, y: f64) -> Option<usize> {
        if !self.contains(x, y) {
            return None;
        }
        let (dx, dy) = self.box_size();
        let ix = (((x - self.x0) / dx) as usize).min(self.nx - 1);
        let iy = (((y - self.y0) / dy) as usize).min(self.ny - 1);
        Some(self.index(ix, iy))
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }

    /// Boxes meeting `r`, clipped to the domain.
    pub fn boxes_meeting(&self, r: &Rect) -> Vec<usize> {
        if r.x1 < self.x0 || r.x0 > self.x1 || r.y1 < self.y0 || r.y0 > self.y1 {
            return Vec::new();
        }
        let (dx, dy) = self.box_size();
        let clamp = |v: f64, n: usize| (v.max(0.0) as usize).min(n - 1);
        let (ix0, ix1) = (clamp((r.x0 - self.x0) / dx, self.nx), clamp((r.x1 - self.x0) / dx, self.nx));
        let (iy0, iy1) = (clamp((r.y0 - self.y0) / dy, self.ny), clamp((r.y1 - self.y0) / dy, self.ny));
        let mut out = Vec::with_capacity((ix1 - ix0 + 1) * (iy1 - iy0 + 1));
        for iy in iy0..=iy1 {
            for ix in ix0..=ix1 {
                out.push(self.index(ix, iy));
            }
        }
        out
    }
}

/// Planar vector field `(x, y) -> (dx, dy)`.
pub type Field = dyn Fn(f64, f64) -> (f64, f64) + Sync;

pub const BUILTIN_FIELDS: &[&str] = &["linear-sink", "linear-saddle", "center", "double-well"];

pub fn builtin_field(name: &str) -> Option<Box<Field>> {
    Some(match name {
        "linear-sink" => Box::new(|x, y| (-x, -y)),
        "linear-saddle" => Box::new(|x, y| (x, -y)),
        "center" => Box::new(|x, y| (y, -x)),
        "double-well" => Box::new(|x, y| (x - x * x * x, -y)),
        _ => return None,
    })
}

/// Domain used for a built-in field when none is given.
pub fn builtin_domain(name: &str) -> Option<[f64; 4]> {
    match name {
        "linear-sink" | "linear-saddle" | "center" => Some([-1.0, 1.0, -1.0, 1.0]),
        "double-well" => Some([-2.0, 2.0, -1.0, 1.0]),
        _ => None,
    }
}

/// A built-in name or an expression `"<dx>, <dy>"`.
pub fn field_from_spec(spec: &str) -> Result<Box<Field>> {
    if let Some(f) = builtin_field(spec) {
        return Ok(f);
    }
    let (fx, fy) = expr::parse_field(spec)?;
    Ok(Box::new(move |x, y| (fx.eval(x, y), fy.eval(x, y))))
}

/// Fixed-step classical Runge-Kutta over time `t`. The step is shrunk so
/// that a whole number of steps fits.
pub fn rk4(field: &Field, p: (f64, f64), t: f64, h: f64) -> Result<(f64, f64)> {
    let steps = (t / h).ceil().max(1.0) as usize;
    let h = t / steps as f64;
    let (mut x, mut y) = p;
    let eval = |x: f64, y: f64| -> Result<(f64, f64)> {
        let (u, v) = field(x, y);
        if u.is_finite() && v.is_finite() {
            Ok((u, v))
        } else {
            Err(Error::Numerical(format!("field is not finite at ({x}, {y})")))
        }
    };
    for _ in 0..steps {
        let k1 = eval(x, y)?;
        let k2 = eval(x + h / 2.0 * k1.0, y + h / 2.0 * k1.1)?;
        let k3 = eval(x + h / 2.0 * k2.0, y + h / 2.0 * k2.1)?;
        let k4 = eval(x + h * k3.0, y + h * k3.1)?;
        x += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        y += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
    }
    if x.is_finite() && y.is_finite() {
        Ok((x, y))
    } else {
        Err(Error::Numerical(format!("trajectory from ({}, {}) blew up", p.0, p.1)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MapParams {
    pub time: f64,
    pub eps: f64,
    pub step: f64,
}

impl MapParams {
    /// Time 1, one box diagonal of inflation, 64 steps.
    pub fn defaults(grid: &BoxGrid) -> Self {
        MapParams { time: 1.0, eps: grid.diagonal(), step: 1.0 / 64.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MultivaluedMap {
    pub grid: BoxGrid,
    pub params: MapParams,
    /// Sorted targets of each box, clipped to the domain.
    pub targets: Vec<Vec<usize>>,
    /// Boxes with a sample image outside the domain.
    pub exiting: Vec<bool>,
}

/// Time-`T` box map: each box goes to the boxes meeting the bounding box of
/// its five sample images, inflated by `eps` on every side.
pub fn build_box_map(field: &Field, grid: BoxGrid, params: MapParams) -> Result<MultivaluedMap> {
    let MapParams { time, eps, step } = params;
    if !(time > 0.0 && time.is_finite()) {
        return Err(Error::Argument(format!("time must be positive, got {time}")));
    }
    if !(step > 0.0) || step > time {
        return Err(Error::Argument(format!("integrator step must lie in (0, T], got {step}")));
    }
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::Argument(format!("eps must be non-negative, got {eps}")));
    }
    let per_box: Vec<(Vec<usize>, bool)> = (0..grid.len())
        .into_par_iter()
        .map(|b| {
            let r = grid.rect(b);
            let (cx, cy) = grid.center(b);
            let samples = [(r.x0, r.y0), (r.x1, r.y0), (r.x0, r.y1), (r.x1, r.y1), (cx, cy)];
            let mut hull = Rect { x0: f64::INFINITY, x1: f64::NEG_INFINITY, y0: f64::INFINITY, y1: f64::NEG_INFINITY };
            let mut exits = false;
            for p in samples {
                let (x, y) = rk4(field, p, time, step)?;
                exits |= !grid.contains(x, y);
                hull = Rect { x0: hull.x0.min(x), x1: hull.x1.max(x), y0: hull.y0.min(y), y1: hull.y1.max(y) };
            }
            let inflated = Rect { x0: hull.x0 - eps, x1: hull.x1 + eps, y0: hull.y0 - eps, y1: hull.y1 + eps };
            Ok((grid.boxes_meeting(&inflated), exits))
        })
        .collect::<Result<_>>()?;
    let (targets, exiting) = per_box.into_iter().unzip();
    Ok(MultivaluedMap { grid, params, targets, exiting })
}

fn reach_from(succ: &[Vec<usize>], start: usize) -> Vec<bool> {
    let mut seen = vec![false; succ.len()];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(u) = queue.pop_front() {
        for &v in &succ[u] {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    seen
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut c = x;
        while self.0[c] != r {
            let next = self.0[c];
            self.0[c] = r;
            c = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
        ra != rb
    }
}

/// The eight boxes around `b`.
fn neighbors8(grid: &BoxGrid, b: usize) -> impl Iterator<Item = usize> + '_ {
    let (ix, iy) = grid.coords(b);
    (-1i64..=1).flat_map(move |dy| (-1i64..=1).map(move |dx| (dx, dy))).filter_map(move |(dx, dy)| {
        let (jx, jy) = (ix as i64 + dx, iy as i64 + dy);
        ((dx, dy) != (0, 0) && jx >= 0 && jy >= 0 && (jx as usize) < grid.nx && (jy as usize) < grid.ny)
            .then(|| grid.index(jx as usize, jy as usize))
    })
}

/// Morse graph of the map restricted to non-exiting boxes.
///
/// Recurrent boxes are those on a cycle of the map. Morse sets are the
/// connected pieces of their union in the plane; whenever the contracted
/// graph still has a cycle, everything on it joins one Morse set, until the
/// graph is acyclic. Edges are the transitive reduction of reachability.
pub fn grid_morse_graph(map: &MultivaluedMap) -> MorseGraph<usize> {
    let grid = &map.grid;
    let n = grid.len();
    let live = |b: usize| !map.exiting[b];
    let arcs: Vec<(usize, usize)> = (0..n)
        .filter(|&b| live(b))
        .flat_map(|b| map.targets[b].iter().filter(|&&t| live(t)).map(move |&t| (b, t)))
        .collect();
    let (comps, cyclic) = graph::scc(n, &arcs);
    let mut in_morse: Vec<bool> = (0..n).map(|b| live(b) && cyclic[b]).collect();
    let mut uf = UnionFind((0..n).collect());
    for c in &comps {
        for w in c.windows(2) {
            uf.union(w[0], w[1]);
        }
    }
    loop {
        for b in (0..n).filter(|&b| in_morse[b]) {
            for c in neighbors8(grid, b).collect::<Vec<_>>() {
                if in_morse[c] {
                    uf.union(b, c);
                }
            }
        }
        let reps: Vec<usize> = (0..n).map(|b| uf.find(b)).collect();
        let contracted: Vec<(usize, usize)> =
            arcs.iter().map(|&(a, b)| (reps[a], reps[b])).filter(|(a, b)| a != b).collect();
        let (ccomps, _) = graph::scc(n, &contracted);
        let mut changed = false;
        for c in ccomps.iter().filter(|c| c.len() > 1) {
            for w in c.windows(2) {
                changed |= uf.union(w[0], w[1]);
            }
        }
        if !changed {
            break;
        }
        // A merged cycle may contain transient boxes: they join the set.
        let mut morse_root = vec![false; n];
        for b in (0..n).filter(|&b| in_morse[b]) {
            morse_root[uf.find(b)] = true;
        }
        for b in (0..n).filter(|&b| live(b)) {
            if morse_root[uf.find(b)] {
                in_morse[b] = true;
            }
        }
    }

    let reps: Vec<usize> = (0..n).map(|b| uf.find(b)).collect();
    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for b in (0..n).filter(|&b| live(b)) {
        members.entry(reps[b]).or_default().push(b);
    }
    let nodes: Vec<usize> = members.keys().copied().collect();
    let pos: BTreeMap<usize, usize> = nodes.iter().enumerate().map(|(i, &r)| (r, i)).collect();
    let mut succ: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); nodes.len()];
    let mut pred: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); nodes.len()];
    for &(a, b) in &arcs {
        let (ca, cb) = (pos[&reps[a]], pos[&reps[b]]);
        if ca != cb {
            succ[ca].insert(cb);
            pred[cb].insert(ca);
        }
    }
    let succ: Vec<Vec<usize>> = succ.into_iter().map(|s| s.into_iter().collect()).collect();
    let pred: Vec<Vec<usize>> = pred.into_iter().map(|s| s.into_iter().collect()).collect();

    let morse: Vec<usize> = (0..nodes.len()).filter(|&k| in_morse[nodes[k]]).collect();
    let forward: Vec<Vec<bool>> = morse.iter().map(|&k| reach_from(&succ, k)).collect();
    let backward: Vec<Vec<bool>> = morse.iter().map(|&k| reach_from(&pred, k)).collect();
    let reach: Vec<BTreeSet<usize>> = (0..morse.len())
        .map(|i| (0..morse.len()).filter(|&j| i != j && forward[i][morse[j]]).collect())
        .collect();

    let mut edges = Vec::new();
    for (i, j) in graph::transitive_reduction(&reach) {
        let connecting: BTreeSet<usize> = (0..nodes.len())
            .filter(|&k| forward[i][k] && backward[j][k] && !in_morse[nodes[k]])
            .flat_map(|k| members[&nodes[k]].iter().copied())
            .collect();
        edges.push(MorseEdge { from: i, to: j, connecting: connecting.into_iter().collect() });
    }
    MorseGraph { morse_sets: morse.iter().map(|&k| members[&nodes[k]].clone()).collect(), edges }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CrossCheck {
    pub grid_vertices: usize,
    pub reference_vertices: usize,
    /// Image of each grid Morse set under the correspondence. Empty when the
    /// vertex counts differ.
    pub assignment: Vec<usize>,
    pub missing_edges: Vec<(usize, usize)>,
    pub extra_edges: Vec<(usize, usize)>,
    pub passed: bool,
}

/// Compares a grid Morse graph with a reference through a correspondence
/// from grid Morse sets to reference vertices. A vertex-count mismatch is a
/// failed check; a correspondence that misses a reference vertex is an
/// error.
pub fn cross_check<A, F>(grid: &MorseGraph<usize>, reference: &MorseGraph<A>, correspondence: F) -> Result<CrossCheck>
where
    F: Fn(&[usize]) -> Option<usize>,
{
    let (g, r) = (grid.morse_sets.len(), reference.morse_sets.len());
    let mut report = CrossCheck {
        grid_vertices: g,
        reference_vertices: r,
        assignment: Vec::new(),
        missing_edges: Vec::new(),
        extra_edges: Vec::new(),
        passed: false,
    };
    if g != r {
        return Ok(report);
    }
    let assignment: Vec<usize> = grid
        .morse_sets
        .iter()
        .enumerate()
        .map(|(i, s)| {
            correspondence(s)
                .filter(|&v| v < r)
                .ok_or_else(|| Error::Argument(format!("grid Morse set {i} has no reference vertex")))
        })
        .collect::<Result<_>>()?;
    let hit: BTreeSet<usize> = assignment.iter().copied().collect();
    if let Some(v) = (0..r).find(|v| !hit.contains(v)) {
        return Err(Error::Argument(format!("correspondence misses reference vertex {v}")));
    }
    let mapped: BTreeSet<(usize, usize)> = grid.edges.iter().map(|e| (assignment[e.from], assignment[e.to])).collect();
    let want = reference.edge_pairs();
    report.missing_edges = want.difference(&mapped).copied().collect();
    report.extra_edges = mapped.difference(&want).copied().collect();
    report.passed = report.missing_edges.is_empty() && report.extra_edges.is_empty();
    report.assignment = assignment;
    Ok(report)
}

/// Reference for `double-well`: the saddle at the origin flows to the
/// sinks at `x = -1` and `x = 1`.
pub fn double_well_reference() -> MorseGraph<String> {
    let edge = |to| MorseEdge { from: 0, to, connecting: Vec::new() };
    MorseGraph {
        morse_sets: vec![vec!["saddle".into()], vec!["sink-left".into()], vec!["sink-right".into()]],
        edges: vec![edge(1), edge(2)],
    }
}

/// Correspondence for [`double_well_reference`] by the mean x coordinate of
/// a Morse set.
pub fn double_well_correspondence(grid: &BoxGrid) -> impl Fn(&[usize]) -> Option<usize> + '_ {
    move |boxes| {
        let mean = boxes.iter().map(|&b| grid.center(b).0).sum::<f64>() / boxes.len() as f64;
        Some(if mean < -0.5 {
            1
        } else if mean > 0.5 {
            2
        } else {
            0
        })
    }
}

/// Box indices grouped by Morse set, for reports.
pub fn morse_set_rects(grid: &BoxGrid, mg: &MorseGraph<usize>) -> BTreeMap<usize, Rect> {
    mg.morse_sets
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let r = s.iter().map(|&b| grid.rect(b)).fold(
                Rect { x0: f64::INFINITY, x1: f64::NEG_INFINITY, y0: f64::INFINITY, y1: f64::NEG_INFINITY },
                |a, b| Rect { x0: a.x0.min(b.x0), x1: a.x1.max(b.x1), y0: a.y0.min(b.y0), y1: a.y1.max(b.y1) },
            );
            (i, r)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(name: &str, n: usize, time: f64) -> (BoxGrid, MultivaluedMap, MorseGraph<usize>) {
        let grid = BoxGrid::new(builtin_domain(name).unwrap(), n, n).unwrap();
        let params = MapParams { time, eps: grid.diagonal(), step: time / 64.0 };
        let map = build_box_map(&*builtin_field(name).unwrap(), grid, params).unwrap();
        let mg = grid_morse_graph(&map);
        (grid, map, mg)
    }

    #[test]
    fn rk4_matches_exponential_decay() {
        let f = builtin_field("linear-sink").unwrap();
        let (x, y) = rk4(&*f, (1.0, -0.5), 1.0, 1.0 / 64.0).unwrap();
        assert!((x - (-1.0f64).exp()).abs() < 1e-9);
        assert!((y + 0.5 * (-1.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn translation_exits_on_the_right() {
        let grid = BoxGrid::new([-1.0, 1.0, -1.0, 1.0], 8, 8).unwrap();
        let f = |_: f64, _: f64| (1.0, 0.0);
        let map = build_box_map(&f, grid, MapParams { time: 0.25, eps: 0.0, step: 0.25 / 8.0 }).unwrap();
        for b in 0..grid.len() {
            let (ix, _) = grid.coords(b);
            assert_eq!(map.exiting[b], ix == 7, "box {b}");
            if ix < 7 {
                assert!(map.targets[b].iter().all(|&t| grid.coords(t).0 > ix));
            }
        }
    }

    #[test]
    fn sink_has_one_morse_set() {
        let (grid, _, mg) = run("linear-sink", 32, 1.0);
        assert_eq!(mg.morse_sets.len(), 1);
        let origin = grid.box_containing(0.0, 0.0).unwrap();
        assert!(mg.morse_sets[0].contains(&origin));
    }

    #[test]
    fn non_finite_field_is_an_error() {
        let grid = BoxGrid::new([-1.0, 1.0, -1.0, 1.0], 4, 4).unwrap();
        let f = |x: f64, _: f64| (1.0 / x, 0.0);
        let p = MapParams { time: 1.0, eps: 0.1, step: 0.1 };
        assert!(matches!(build_box_map(&f, grid, p), Err(Error::Numerical(_))));
    }

    #[test]
    fn bad_grid_and_params() {
        assert!(BoxGrid::new([0.0, 1.0, 0.0, 1.0], 1, 4).is_err());
        assert!(BoxGrid::new([1.0, 1.0, 0.0, 1.0], 4, 4).is_err());
        let grid = BoxGrid::new([0.0, 1.0, 0.0, 1.0], 4, 4).unwrap();
        let f = |x: f64, y: f64| (x, y);
        assert!(build_box_map(&f, grid, MapParams { time: 0.1, eps: 0.0, step: 0.5 }).is_err());
        assert!(build_box_map(&f, grid, MapParams { time: 1.0, eps: -1.0, step: 0.5 }).is_err());
    }

    #[test]
    fn sink_targets_move_inward() {
        let grid = BoxGrid::new([-1.0, 1.0, -1.0, 1.0], 16, 16).unwrap();
        let eps = grid.box_size().0;
        let map = build_box_map(&*builtin_field("linear-sink").unwrap(), grid, MapParams { time: 1.0, eps, step: 1.0 / 64.0 })
            .unwrap();
        let norm = |(x, y): (f64, f64)| x.abs().max(y.abs());
        for b in 0..grid.len() {
            let max = map.targets[b].iter().map(|&t| norm(grid.center(t))).fold(0.0, f64::max);
            assert!(max <= norm(grid.center(b)) + eps + 1e-12, "box {b}");
        }
    }

    #[test]
    fn center_returns_after_full_turn() {
        let grid = BoxGrid::new([-1.0, 1.0, -1.0, 1.0], 16, 16).unwrap();
        let t = 2.0 * std::f64::consts::PI;
        let map = build_box_map(&*builtin_field("center").unwrap(), grid, MapParams { time: t, eps: grid.diagonal(), step: t / 64.0 })
            .unwrap();
        for b in 0..grid.len() {
            assert!(map.targets[b].contains(&b), "box {b}");
        }
    }

    #[test]
    fn saddle_and_center_have_one_morse_set() {
        let (grid, _, mg) = run("linear-saddle", 32, 1.0);
        assert_eq!(mg.morse_sets.len(), 1);
        assert!(mg.edges.is_empty());
        assert!(mg.morse_sets[0].contains(&grid.box_containing(0.0, 0.0).unwrap()));
        let (_, map, mg) = run("center", 32, 1.0);
        assert_eq!(mg.morse_sets.len(), 1);
        assert_eq!(mg.morse_sets[0].len(), map.exiting.iter().filter(|&&e| !e).count());
    }

    #[test]
    fn coarse_grid_merges_double_well() {
        let (grid, _, mg) = run("double-well", 8, 0.5);
        let report = cross_check(&mg, &double_well_reference(), double_well_correspondence(&grid)).unwrap();
        assert!(!report.passed);
        assert_eq!((report.grid_vertices, report.reference_vertices), (1, 3));
    }

    #[test]
    fn non_surjective_correspondence_is_an_error() {
        let (_, _, mg) = run("double-well", 64, 0.5);
        assert!(cross_check(&mg, &double_well_reference(), |_| Some(0)).is_err());
    }

    #[test]
    fn deterministic_and_monotone_in_eps() {
        let grid = BoxGrid::new([-2.0, 2.0, -1.0, 1.0], 32, 32).unwrap();
        let f = builtin_field("double-well").unwrap();
        let small = MapParams { time: 0.5, eps: grid.diagonal(), step: 0.5 / 64.0 };
        let big = MapParams { eps: 2.0 * grid.diagonal(), ..small };
        let a = grid_morse_graph(&build_box_map(&*f, grid, small).unwrap());
        let b = grid_morse_graph(&build_box_map(&*f, grid, small).unwrap());
        assert_eq!(a, b);
        let c = grid_morse_graph(&build_box_map(&*f, grid, big).unwrap());
        // Every Morse set for the small eps lies inside one for the big eps.
        for s in &a.morse_sets {
            assert!(c.morse_sets.iter().any(|t| s.iter().all(|x| t.contains(x))));
        }
    }

    #[test]
    fn double_well_cross_check() {
        let (grid, _, mg) = run("double-well", 64, 0.5);
        assert_eq!(mg.morse_sets.len(), 3);
        let report = cross_check(&mg, &double_well_reference(), double_well_correspondence(&grid)).unwrap();
        assert!(report.passed, "{report:?}");
    }
}
