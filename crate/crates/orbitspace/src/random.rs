//! Seeded generator of small valid compact Hausdorff models, for property
//! tests and `corpus --random`.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{Flags, FlowModel, Kind, OrbitNode};

pub const DEFAULT_SEED: u64 = 20_240_601;

const MAX_ATTEMPTS: usize = 10_000;

/// Draws one candidate; it may fail validation.
fn candidate<R: Rng>(rng: &mut R, max_nodes: usize) -> Result<FlowModel> {
    let n = rng.random_range(1..=max_nodes.max(1));
    let mut nodes: Vec<OrbitNode> = Vec::new();
    // Limit sets available to later non-recurrent nodes.
    let mut limits: Vec<Vec<String>> = Vec::new();

    let closed = rng.random_range(1..=n.min(3));
    for k in 0..closed {
        let node = if rng.random_bool(0.7) {
            OrbitNode::new(format!("c{k}"), Kind::Singular)
        } else if rng.random_bool(0.7) {
            OrbitNode::new(format!("c{k}"), Kind::Periodic)
        } else {
            OrbitNode::new(format!("c{k}"), Kind::Periodic).family()
        };
        limits.push(vec![node.id.clone()]);
        nodes.push(node);
    }
    if nodes.len() < n && rng.random_bool(0.25) {
        let mut lim = vec!["r".to_string()];
        if rng.random_bool(0.5) {
            lim.push(nodes[0].id.clone());
        }
        nodes.push(OrbitNode::new("r", Kind::RecurrentNonclosed).family().alpha(lim.clone()).omega(lim.clone()));
        limits.push(lim);
    }
    let mut p = 0;
    while nodes.len() < n {
        let id = format!("p{p}");
        p += 1;
        // A homoclinic loop makes a new limit circuit.
        if nodes.len() + 1 < n && rng.random_bool(0.2) {
            let base = nodes[rng.random_range(0..closed)].id.clone();
            if nodes.iter().any(|x| x.id == base && x.kind == Kind::Singular) {
                nodes.push(OrbitNode::new(id.clone(), Kind::Nonrecurrent).alpha([base.clone()]).omega([base.clone()]));
                limits.push(vec![base, id]);
                continue;
            }
        }
        let a = limits.choose(rng).unwrap().clone();
        let w = limits.choose(rng).unwrap().clone();
        let mut node = OrbitNode::new(id, Kind::Nonrecurrent).alpha(a.clone()).omega(w.clone());
        if rng.random_bool(0.5) {
            node = node.family();
            // Another non-recurrent orbit may sit in the boundary, together
            // with its closure.
            let others: Vec<&OrbitNode> =
                nodes.iter().filter(|x| x.kind == Kind::Nonrecurrent && x.transverse_boundary.is_empty()).collect();
            if let Some(y) = others.choose(rng).filter(|_| rng.random_bool(0.4)) {
                let mut tb: Vec<String> = std::iter::once(y.id.clone())
                    .chain(y.alpha.iter().cloned())
                    .chain(y.omega.iter().cloned())
                    .filter(|z| !a.contains(z) && !w.contains(z))
                    .collect();
                tb.sort();
                tb.dedup();
                node = node.tb(tb);
            }
        }
        nodes.push(node);
    }
    FlowModel::with_contact_adjacency(Flags::compact_hausdorff(), nodes)
}

/// A valid model with at most `max_nodes` nodes.
pub fn random_model<R: Rng>(rng: &mut R, max_nodes: usize) -> Result<FlowModel> {
    for _ in 0..MAX_ATTEMPTS {
        if let Ok(m) = candidate(rng, max_nodes) {
            if m.validate().is_empty() {
                return Ok(m);
            }
        }
    }
    Err(Error::Inconsistent(format!("no valid model after {MAX_ATTEMPTS} attempts")))
}

/// `count` models from one seed; the same seed always gives the same list.
pub fn random_models(seed: u64, count: usize, max_nodes: usize) -> Result<Vec<FlowModel>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_model(&mut rng, max_nodes)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn models_are_valid_and_reproducible() {
        let a = random_models(7, 50, 8).unwrap();
        let b = random_models(7, 50, 8).unwrap();
        assert_eq!(a, b);
        for m in &a {
            assert!(m.len() <= 8);
            assert!(m.validate().is_empty());
        }
    }

    #[test]
    fn variety() {
        let ms = random_models(DEFAULT_SEED, 200, 8).unwrap();
        let has = |k: Kind| ms.iter().filter(|m| (0..m.len()).any(|i| m.kind(i) == k)).count();
        assert!(has(Kind::RecurrentNonclosed) > 10);
        assert!(has(Kind::Periodic) > 10);
        assert!(ms.iter().filter(|m| m.nodes().iter().any(|n| !n.transverse_boundary.is_empty())).count() > 10);
        assert!(ms.iter().filter(|m| m.len() >= 6).count() > 20);
    }
}
