//! Bundled example models, addressable as `corpus:<id>`.

use std::path::Path;

use crate::error::{Error, Result};
use crate::model::FlowModel;
use crate::suspension::MapModel;

const FLOWS: &[(&str, &str)] = &[
    ("disk-grad", include_str!("../corpus/disk-grad.json")),
    ("fig05-a", include_str!("../corpus/fig05-a.json")),
    ("fig05-b", include_str!("../corpus/fig05-b.json")),
    ("fig1", include_str!("../corpus/fig1.json")),
    ("fig2", include_str!("../corpus/fig2.json")),
    ("ham-disk", include_str!("../corpus/ham-disk.json")),
    ("ham-trivial-annulus", include_str!("../corpus/ham-trivial-annulus.json")),
    ("ham-trivial-disk", include_str!("../corpus/ham-trivial-disk.json")),
    ("ham-trivial-sphere", include_str!("../corpus/ham-trivial-sphere.json")),
    ("minimal-torus", include_str!("../corpus/minimal-torus.json")),
    ("morse-sphere", include_str!("../corpus/morse-sphere.json")),
    ("ms-torus-a", include_str!("../corpus/ms-torus-a.json")),
    ("ms-torus-b", include_str!("../corpus/ms-torus-b.json")),
    ("sphere-grad", include_str!("../corpus/sphere-grad.json")),
];

const MAPS: &[(&str, &str)] = &[
    ("map-north-south", include_str!("../corpus/map-north-south.json")),
    ("map-pseudo-anosov", include_str!("../corpus/map-pseudo-anosov.json")),
    ("map-rotation", include_str!("../corpus/map-rotation.json")),
];

pub fn flow_ids() -> Vec<&'static str> {
    FLOWS.iter().map(|(id, _)| *id).collect()
}

pub fn map_ids() -> Vec<&'static str> {
    MAPS.iter().map(|(id, _)| *id).collect()
}

pub fn flow_source(id: &str) -> Option<&'static str> {
    FLOWS.iter().find(|(k, _)| *k == id).map(|(_, s)| *s)
}

pub fn map_source(id: &str) -> Option<&'static str> {
    MAPS.iter().find(|(k, _)| *k == id).map(|(_, s)| *s)
}

pub fn load(id: &str) -> Result<FlowModel> {
    let src = flow_source(id).ok_or_else(|| Error::Argument(format!("no corpus model `{id}`")))?;
    FlowModel::from_json(src)
}

pub fn load_map(id: &str) -> Result<MapModel> {
    let src = map_source(id).ok_or_else(|| Error::Argument(format!("no corpus map `{id}`")))?;
    MapModel::from_json(src)
}

/// Reads `corpus:<id>` from the bundle, anything else from disk.
pub fn resolve(spec: &str) -> Result<FlowModel> {
    match spec.strip_prefix("corpus:") {
        Some(id) => load(id),
        None => FlowModel::from_path(Path::new(spec)),
    }
}

pub fn resolve_map(spec: &str) -> Result<MapModel> {
    match spec.strip_prefix("corpus:") {
        Some(id) => load_map(id),
        None => MapModel::from_json(&std::fs::read_to_string(spec)?),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_bundled_flow_is_valid() {
        for id in flow_ids() {
            let m = load(id).unwrap();
            assert!(m.validate().is_empty(), "{id}: {:?}", m.validate());
        }
    }

    #[test]
    fn every_bundled_map_is_valid() {
        for id in map_ids() {
            let m = load_map(id).unwrap();
            assert!(m.validate().is_empty(), "{id}: {:?}", m.validate());
        }
    }

    #[test]
    fn unknown_id_is_an_argument_error() {
        assert!(matches!(resolve("corpus:nope"), Err(Error::Argument(_))));
    }
}
