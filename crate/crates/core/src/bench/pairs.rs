use std::path::Path;

use nalgebra::Point3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::{sample_entry, write_sample, DatasetManifest, MeshEntry, MeshSource};
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::synth::{gen_shape_pair, make_triplet, CameraModel, ShapePairSpec, ShapeRanges, SplitTag, TactileSampleConfig, TripletMeta};
use crate::voxel::GridFrame;

/// Two-primitive objects seen head-on by a fixed camera.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShapeDatasetConfig {
    pub seed: u64,
    pub train_count: usize,
    pub holdout_count: usize,
    pub grid_dim: usize,
    pub npts: usize,
    /// Edge of the cubic frame centred on the mid-plane centre, meters.
    pub frame_edge: f64,
    pub distance: f64,
    pub ranges: ShapeRanges,
    pub resolution: usize,
    pub camera: CameraModel,
    pub save_clouds: bool,
}

impl Default for ShapeDatasetConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            train_count: 2000,
            holdout_count: 200,
            grid_dim: 20,
            npts: crate::synth::DEFAULT_NPTS,
            frame_edge: 0.22,
            distance: crate::synth::DEFAULT_OBJECT_DISTANCE,
            ranges: ShapeRanges::default(),
            resolution: 32,
            camera: CameraModel::default(),
            save_clouds: false,
        }
    }
}

/// Training pairs are tagged `train_view`, holdout pairs `holdout_mesh`.
pub fn gen_shape_dataset(cfg: &ShapeDatasetConfig, out: &Path) -> Result<DatasetManifest> {
    cfg.camera.validate()?;
    if cfg.train_count == 0 {
        return Err(Error::invalid("shape dataset needs at least one training pair"));
    }
    let center = Point3::new(0.0, 0.0, cfg.distance);
    let frame = GridFrame::cube(center, cfg.frame_edge, cfg.grid_dim)?.quantized();
    std::fs::create_dir_all(out)?;
    let total = cfg.train_count + cfg.holdout_count;
    let results: Vec<(MeshEntry, super::SampleEntry)> = (0..total)
        .into_par_iter()
        .map(|i| {
            let seed = derive_seed(cfg.seed, &[i as u64]);
            let mut spec = ShapePairSpec::sample(seed, &cfg.ranges, center);
            spec.resolution = cfg.resolution;
            if spec.max_half_extent() > cfg.frame_edge / 2.0 {
                return Err(Error::Generation(format!("pair {i} does not fit the {} m frame", cfg.frame_edge)));
            }
            let mesh = gen_shape_pair(&spec)?;
            let split = if i < cfg.train_count { SplitTag::TrainView } else { SplitTag::HoldoutMesh };
            let meta = TripletMeta {
                mesh_id: format!("pair_{i:05}"),
                view_id: 0,
                seed,
                split,
            };
            let parts = make_triplet(&mesh, &cfg.camera, &TactileSampleConfig::new(cfg.npts, seed), &frame, meta.clone())?;
            let entry = sample_entry(meta, cfg.camera, frame, &parts);
            write_sample(out, &entry, &parts, cfg.save_clouds)?;
            Ok((
                MeshEntry {
                    id: entry.mesh_id.clone(),
                    source: MeshSource::ShapePair { spec },
                },
                entry,
            ))
        })
        .collect::<Result<_>>()?;
    let (meshes, samples) = results.into_iter().unzip();
    let manifest = DatasetManifest {
        version: 1,
        seed: cfg.seed,
        grid_dim: cfg.grid_dim,
        npts: cfg.npts,
        clouds: cfg.save_clouds,
        split: None,
        meshes,
        samples,
        config: Some(serde_json::to_value(cfg)?),
    };
    manifest.save(out)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::load_triplets;

    #[test]
    fn small_shape_dataset() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ShapeDatasetConfig {
            train_count: 4,
            holdout_count: 2,
            ..Default::default()
        };
        let m = gen_shape_dataset(&cfg, dir.path()).unwrap();
        assert_eq!(m.samples.len(), 6);
        let train = load_triplets(dir.path(), &m, &[SplitTag::TrainView]).unwrap();
        let hold = load_triplets(dir.path(), &m, &[SplitTag::HoldoutMesh]).unwrap();
        assert_eq!((train.len(), hold.len()), (4, 2));
        for t in train.iter().chain(&hold) {
            assert_eq!(t.depth.dims(), [20; 3]);
            assert!(t.depth.count() > 0 && t.tactile.count() > 0);
            assert!(t.tactile.is_subset_of(&t.ground_truth).unwrap());
        }
    }
}
