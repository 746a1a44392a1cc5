use std::collections::BTreeSet;

use proptest::prelude::*;

use orbitspace::corpus;
use orbitspace::dot;
use orbitspace::grid::{self, BoxGrid, MapParams};
use orbitspace::iso::{self, Cardinality, ElementLabel, KindClass, LabeledPoset};
use orbitspace::model::Kind;
use orbitspace::morse;
use orbitspace::quotient::{self, Level};
use orbitspace::random;
use orbitspace::relations::{self, RelLevel, RelationName};
use orbitspace::surface;
use orbitspace::suspension::{self, MapKind, MapModel, MapNode, PeriodAnnotation};
use orbitspace::topology::{BoolMatrix, FinitePreorder};
use orbitspace::{FlowModel, PeriodType};

fn model(seed: u64) -> FlowModel {
    random::random_models(seed, 1, 8).unwrap().remove(0)
}

fn arb_preorder() -> impl Strategy<Value = FinitePreorder> {
    (1usize..=8).prop_flat_map(|n| {
        proptest::collection::vec(any::<bool>(), n * n).prop_map(move |bits| {
            let rel = BoolMatrix::from_fn(n, |i, j| bits[i * n + j] && (i * 7 + j * 3) % 4 != 0);
            FinitePreorder::generated_by((0..n).map(|i| format!("e{i}")).collect(), &rel)
        })
    })
}

fn plain(p: &FinitePreorder) -> LabeledPoset {
    let label = ElementLabel { kind: KindClass::Mixed, awo_type: None, cardinality: Cardinality::Family };
    LabeledPoset::new(p.elements().to_vec(), vec![label; p.len()], p.matrix().clone()).unwrap()
}

fn rel(m: &FlowModel, name: RelationName, level: RelLevel) -> relations::RelationMatrix {
    relations::compute_relation(m, name, level).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn boundary_parts_are_disjoint(seed in any::<u64>()) {
        let m = model(seed);
        for n in m.nodes() {
            let d = m.boundary_decomposition(&n.id).unwrap();
            prop_assert!(!d.coborder.contains(&n.id));
            prop_assert!(d.perp.is_disjoint(&d.pitchfork));
        }
    }

    #[test]
    fn kind_partition_covers_nodes(seed in any::<u64>()) {
        let m = model(seed);
        let kp = m.kind_partition();
        let parts = [&kp.sing, &kp.per, &kp.p, &kp.r];
        let total: usize = parts.iter().map(|p| p.len()).sum();
        let union: BTreeSet<String> = parts.iter().flat_map(|p| p.iter().cloned()).collect();
        prop_assert_eq!(total, m.len());
        prop_assert_eq!(union.len(), m.len());
    }

    #[test]
    fn json_round_trip(seed in any::<u64>()) {
        let m = model(seed);
        let back = FlowModel::from_json(&m.to_json()).unwrap();
        prop_assert_eq!(back.validate(), m.validate());
        prop_assert_eq!(back, m);
    }

    #[test]
    fn node_order_does_not_matter(seed in any::<u64>()) {
        let m = model(seed);
        let mut nodes = m.nodes().to_vec();
        nodes.reverse();
        let mut adj = m.adjacency().to_vec();
        adj.reverse();
        let p = FlowModel::new(*m.flags(), nodes, adj).unwrap();
        for level in [Level::Awo, Level::Ao, Level::Extended] {
            prop_assert_eq!(
                quotient::compute_quotient(&m, level).unwrap().member_sets(),
                quotient::compute_quotient(&p, level).unwrap().member_sets()
            );
        }
    }

    #[test]
    fn t0_quotient_is_idempotent(p in arb_preorder()) {
        let (t0, _) = p.t0_tify();
        let (again, _) = t0.t0_tify();
        let r = iso::are_isomorphic(&plain(&t0), &plain(&again), iso::DEFAULT_BUDGET);
        prop_assert!(r.is_isomorphic());
    }

    #[test]
    fn open_sets_pull_back(p in arb_preorder()) {
        let (t0, class) = p.t0_tify();
        let pulled: BTreeSet<u32> = t0
            .open_sets()
            .unwrap()
            .into_iter()
            .map(|u| (0..p.len()).filter(|&x| u & (1 << class[x]) != 0).fold(0u32, |acc, x| acc | (1 << x)))
            .collect();
        let opens: BTreeSet<u32> = p.open_sets().unwrap().into_iter().collect();
        prop_assert_eq!(pulled, opens);
    }

    #[test]
    fn heights_are_strictly_monotone(p in arb_preorder()) {
        let (t0, _) = p.t0_tify();
        let h = t0.heights();
        for x in 0..t0.len() {
            for y in 0..t0.len() {
                if x != y && t0.leq(x, y) {
                    prop_assert!(h[x] < h[y]);
                }
            }
        }
    }

    #[test]
    fn limit_relations_are_preorders(seed in any::<u64>()) {
        let m = model(seed);
        for level in [RelLevel::Awo, RelLevel::Ao] {
            for name in [RelationName::Alpha, RelationName::Omega] {
                prop_assert!(relations::check_properties(&rel(&m, name, level)).is_preorder());
            }
            prop_assert_eq!(&rel(&m, RelationName::Perp, level).matrix, &rel(&m, RelationName::V, level).matrix);
        }
        prop_assert!(relations::check_properties(&rel(&m, RelationName::V, RelLevel::Awo)).is_preorder());
        prop_assert!(relations::check_properties(&rel(&m, RelationName::V, RelLevel::Ao)).antisymmetric);
    }

    #[test]
    fn boundary_relation_is_a_union(seed in any::<u64>()) {
        let r = relations::relation_decomposition_check(&model(seed)).unwrap();
        prop_assert!(r.passed, "{:?}", r.violations);
    }

    #[test]
    fn boundary_order_is_inside_topology_order(seed in any::<u64>()) {
        let m = model(seed);
        let q = quotient::compute_quotient(&m, Level::Awo).unwrap();
        let d = rel(&m, RelationName::Partial, RelLevel::Awo);
        prop_assert_eq!(&d.elements, &q.labels());
        prop_assert!(d.matrix.is_subset(q.order.matrix()));
    }

    #[test]
    fn blocks_have_one_kind(seed in any::<u64>()) {
        let m = model(seed);
        let awo = quotient::awo_partition(&m);
        for b in awo.blocks() {
            prop_assert!(b.iter().all(|&i| m.kind(i) == m.kind(b[0])));
            if m.kind(b[0]) == Kind::RecurrentNonclosed {
                let whole = m.closure_of(&b.iter().copied().collect());
                for &i in b {
                    prop_assert_eq!(&m.closure(i), &whole);
                }
            }
        }
        let (ext, _) = quotient::extended_partition(&m);
        prop_assert!(awo.refines(&ext));
    }

    #[test]
    fn morse_graph_shape(seed in any::<u64>()) {
        let m = model(seed);
        let d = morse::morse_graph(&m).unwrap();
        prop_assert!(d.graph.is_acyclic());
        let cr = morse::chain_recurrent_nodes(&m);
        for i in 0..m.len() {
            if m.kind(i).is_closed() {
                prop_assert!(cr[i]);
                prop_assert!(d.morse_of[i].is_some());
            }
        }
        prop_assert!(d.graph.morse_sets.len() <= quotient::ao_partition(&m).len());
        prop_assert!(quotient::ao_partition(&m).refines(&d.partition));
    }

    #[test]
    fn quotient_dot_round_trips(seed in any::<u64>()) {
        let m = model(seed);
        let q = quotient::compute_quotient(&m, Level::Ao).unwrap();
        let g = dot::parse_dot(&dot::quotient_dot(&q)).unwrap();
        prop_assert_eq!(g.nodes, q.labels());
        prop_assert_eq!(g.edges.len(), q.order.covering_pairs().len());
    }

    #[test]
    fn suspension_keeps_orbits(seed in any::<u64>()) {
        let m = model(seed);
        let nodes = m
            .nodes()
            .iter()
            .map(|n| MapNode {
                id: n.id.clone(),
                kind: match n.kind {
                    Kind::Singular => MapKind::Fixed,
                    Kind::Periodic => MapKind::Periodic(2),
                    Kind::RecurrentNonclosed => MapKind::NonperiodicRecurrent,
                    Kind::Nonrecurrent => MapKind::Nonrecurrent,
                },
                granularity: n.granularity,
                alpha: n.alpha.clone(),
                omega: n.omega.clone(),
                transverse_boundary: n.transverse_boundary.clone(),
                period_type: None,
                embedding: None,
            })
            .collect();
        let map = MapModel { flags: *m.flags(), nodes, adjacency: m.adjacency().to_vec() };
        prop_assert!(map.validate().is_empty());
        let flow = suspension::suspend(&map).unwrap();
        prop_assert!(suspension::is_suspension_of(&map, &flow));
        prop_assert_eq!(quotient::compute_quotient(&flow, Level::Orbit).unwrap().len(), map.nodes.len());
    }

    #[test]
    fn time_one_monotone_in_annotations(seed in any::<u64>(), flips in proptest::collection::vec(any::<bool>(), 8)) {
        let m = model(seed);
        let periodic: Vec<String> = m.nodes().iter().filter(|n| n.kind == Kind::Periodic).map(|n| n.id.clone()).collect();
        let mut ann = PeriodAnnotation::default();
        for (k, id) in periodic.iter().enumerate() {
            ann = ann.with(id, if flips[k % 8] { PeriodType::Rational } else { PeriodType::Irrational });
        }
        let Ok(before) = suspension::time_one_awo_space(&m, &ann) else { return Ok(()) };
        prop_assert!(before.level2_equal);
        for id in &periodic {
            if ann.get(id) == Some(PeriodType::Rational) {
                let after = suspension::time_one_awo_space(&m, &ann.clone().with(id, PeriodType::Irrational)).unwrap();
                prop_assert!(!before.level1_equal || after.level1_equal);
                prop_assert!(after.level2_equal);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn grid_is_deterministic_and_eps_monotone(a in -1.5f64..1.5, b in -1.5f64..1.5, c in -1.5f64..1.5, d in -1.5f64..1.5) {
        let g = BoxGrid::new([-1.0, 1.0, -1.0, 1.0], 12, 12).unwrap();
        let f = move |x: f64, y: f64| (a * x + b * y, c * x + d * y);
        let small = MapParams { time: 0.5, eps: g.diagonal(), step: 0.5 / 32.0 };
        let big = MapParams { eps: 2.0 * g.diagonal(), ..small };
        let m1 = grid::grid_morse_graph(&grid::build_box_map(&f, g, small).unwrap());
        let m2 = grid::grid_morse_graph(&grid::build_box_map(&f, g, small).unwrap());
        prop_assert_eq!(&m1, &m2);
        prop_assert!(m1.is_acyclic());
        let mb = grid::grid_morse_graph(&grid::build_box_map(&f, g, big).unwrap());
        for s in &m1.morse_sets {
            prop_assert!(mb.morse_sets.iter().any(|t| s.iter().all(|x| t.contains(x))));
        }
    }
}

#[test]
fn boundary_order_converse_fails_on_fig2() {
    let m = corpus::load("fig2").unwrap();
    let q = quotient::compute_quotient(&m, Level::Awo).unwrap();
    let d = rel(&m, RelationName::Partial, RelLevel::Awo);
    assert!(d.matrix.is_subset(q.order.matrix()));
    assert!(!q.order.matrix().is_subset(&d.matrix));
}

#[test]
fn hamiltonian_reeb_counts() {
    for id in ["ham-disk", "ham-trivial-disk", "ham-trivial-sphere", "fig05-a", "fig05-b"] {
        let m = corpus::load(id).unwrap();
        let g = surface::reeb_abstract_graph(&m).unwrap().graph;
        let ext = quotient::compute_quotient(&m, Level::Extended).unwrap();
        assert_eq!(ext.len(), g.vertices.len() + g.edges.len(), "{id}");
        assert!(g.edges.iter().all(|e| (1..=2).contains(&e.ends.len())), "{id}");
    }
    assert!(surface::reeb_abstract_graph(&corpus::load("ham-trivial-annulus").unwrap()).is_err());
}

#[test]
fn surface_corpus_is_classified() {
    for id in corpus::flow_ids() {
        let m = corpus::load(id).unwrap();
        if m.flags().surface.is_none() || id == "minimal-torus" {
            continue;
        }
        let r = surface::classify_awos(&m).unwrap();
        assert!(r.is_finite_type, "{id}: {:?}", r.unclassified);
        assert_eq!(r.awo_types.len(), quotient::compute_quotient(&m, Level::Awo).unwrap().len());
        assert!(r.stratification.unwrap().height <= 3, "{id}");
    }
}

#[test]
fn isomorphism_is_an_equivalence_on_the_corpus() {
    let posets: Vec<(String, LabeledPoset)> = corpus::flow_ids()
        .into_iter()
        .map(|id| (id.to_string(), LabeledPoset::of_model(&corpus::load(id).unwrap(), Level::Awo, None).unwrap()))
        .collect();
    let iso = |a: &LabeledPoset, b: &LabeledPoset| {
        let r = iso::are_isomorphic(a, b, iso::DEFAULT_BUDGET);
        if let Some(w) = &r.witness {
            assert!(iso::verify_witness(a, b, w));
        }
        r.is_isomorphic()
    };
    for (ia, a) in &posets {
        assert!(iso(a, a), "{ia}");
        for (ib, b) in &posets {
            assert_eq!(iso(a, b), iso(b, a), "{ia} {ib}");
            for (_, c) in &posets {
                if iso(a, b) && iso(b, c) {
                    assert!(iso(a, c));
                }
            }
        }
    }
}
