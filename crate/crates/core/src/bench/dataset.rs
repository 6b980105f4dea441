//! On-disk dataset layout:
//!
//! ```text
//! <root>/manifest.json
//! <root>/<split>/<meshid>_<view>_{depth,tactile,gt}.vtg
//! <root>/<split>/<meshid>_<view>_{depth,tactile}.xyz   (when clouds are saved)
//! ```
//!
//! Meshes are not copied; the manifest records how to rebuild each one.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use nalgebra::Point3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, SplitSpec};
use crate::cloud::{xyz, PointCloud};
use crate::error::{Error, Result};
use crate::mesh::{io::read_mesh, TriMesh};
use crate::rng::derive_seed;
use crate::synth::corpus::{gen_object, ObjectFamily};
use crate::synth::{
    frame_for_mesh, gen_shape_pair, make_triplet, CameraModel, ObservationTriplet, ShapePairSpec, SplitTag, TactileSampleConfig, TripletMeta,
    TripletParts,
};
use crate::voxel::io::{read_vtg, write_vtg};
use crate::voxel::GridFrame;

pub const MANIFEST_FILE: &str = "manifest.json";
const MANIFEST_VERSION: u32 = 1;

/// How to obtain a mesh in world coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MeshSource {
    /// OBJ or STL file; relative paths resolve against the dataset root.
    File { path: PathBuf },
    Object { family: ObjectFamily, seed: u64, resolution: usize },
    ShapePair { spec: ShapePairSpec },
}

impl MeshSource {
    pub fn build(&self, root: &Path) -> Result<TriMesh> {
        match self {
            MeshSource::File { path } => read_mesh(&root.join(path)),
            MeshSource::Object { family, seed, resolution } => gen_object(*family, *seed, *resolution),
            MeshSource::ShapePair { spec } => gen_shape_pair(spec),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshEntry {
    pub id: String,
    pub source: MeshSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleEntry {
    pub mesh_id: String,
    pub view_id: u32,
    pub split: SplitTag,
    pub seed: u64,
    /// Camera with its world→camera pose; grids and clouds are in its frame.
    pub camera: CameraModel,
    pub frame: GridFrame,
    /// Path prefix relative to the root, e.g. `train_view/mug_002_3`.
    pub stem: String,
    pub depth_points: usize,
    pub tactile_points: usize,
    pub dropped_depth_points: usize,
}

impl SampleEntry {
    pub fn path(&self, root: &Path, suffix: &str) -> PathBuf {
        root.join(format!("{}_{suffix}", self.stem))
    }

    pub fn meta(&self) -> TripletMeta {
        TripletMeta {
            mesh_id: self.mesh_id.clone(),
            view_id: self.view_id,
            seed: self.seed,
            split: self.split,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub version: u32,
    pub seed: u64,
    pub grid_dim: usize,
    pub npts: usize,
    pub clouds: bool,
    pub split: Option<SplitSpec>,
    pub meshes: Vec<MeshEntry>,
    pub samples: Vec<SampleEntry>,
    /// The configuration that produced the dataset, when there is one.
    #[serde(default)]
    pub config: Option<serde_json::Value>,
}

impl DatasetManifest {
    pub fn mesh(&self, id: &str) -> Result<&MeshEntry> {
        self.meshes
            .iter()
            .find(|m| m.id == id)
            .ok_or_else(|| Error::invalid(format!("manifest has no mesh {id}")))
    }

    pub fn save(&self, root: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(root.join(MANIFEST_FILE), text)?;
        Ok(())
    }
}

pub fn load_manifest(root: &Path) -> Result<DatasetManifest> {
    let path = root.join(MANIFEST_FILE);
    let text = std::fs::read_to_string(&path)?;
    let m: DatasetManifest = serde_json::from_str(&text).map_err(|e| Error::format(&path, e.to_string()))?;
    if m.version != MANIFEST_VERSION {
        return Err(Error::format(&path, format!("unsupported manifest version {}", m.version)));
    }
    Ok(m)
}

/// A sample read back from disk.
#[derive(Debug, Clone)]
pub struct LoadedSample {
    pub triplet: ObservationTriplet,
    pub depth_cloud: Option<PointCloud>,
    pub tactile_cloud: Option<PointCloud>,
}

pub fn load_sample(root: &Path, entry: &SampleEntry, clouds: bool) -> Result<LoadedSample> {
    let triplet = ObservationTriplet {
        depth: read_vtg(&entry.path(root, "depth.vtg"))?,
        tactile: read_vtg(&entry.path(root, "tactile.vtg"))?,
        ground_truth: read_vtg(&entry.path(root, "gt.vtg"))?,
        meta: entry.meta(),
    };
    let (depth_cloud, tactile_cloud) = if clouds {
        (
            Some(xyz::read(&entry.path(root, "depth.xyz"))?),
            Some(xyz::read(&entry.path(root, "tactile.xyz"))?),
        )
    } else {
        (None, None)
    };
    Ok(LoadedSample {
        triplet,
        depth_cloud,
        tactile_cloud,
    })
}

/// Triplets of every sample whose split is in `splits`, in manifest order.
pub fn load_triplets(root: &Path, manifest: &DatasetManifest, splits: &[SplitTag]) -> Result<Vec<ObservationTriplet>> {
    manifest
        .samples
        .iter()
        .filter(|s| splits.contains(&s.split))
        .map(|s| Ok(load_sample(root, s, false)?.triplet))
        .collect()
}

pub(crate) fn write_sample(root: &Path, entry: &SampleEntry, parts: &TripletParts, clouds: bool) -> Result<()> {
    if let Some(dir) = entry.path(root, "x").parent() {
        std::fs::create_dir_all(dir)?;
    }
    let t = &parts.triplet;
    write_vtg(&entry.path(root, "depth.vtg"), &t.depth)?;
    write_vtg(&entry.path(root, "tactile.vtg"), &t.tactile)?;
    write_vtg(&entry.path(root, "gt.vtg"), &t.ground_truth)?;
    if clouds {
        xyz::write(&entry.path(root, "depth.xyz"), &parts.depth_cloud)?;
        xyz::write(&entry.path(root, "tactile.xyz"), &parts.tactile_cloud)?;
    }
    Ok(())
}

pub(crate) fn sample_entry(meta: TripletMeta, camera: CameraModel, frame: GridFrame, parts: &TripletParts) -> SampleEntry {
    SampleEntry {
        stem: format!("{}/{}_{}", meta.split, meta.mesh_id, meta.view_id),
        mesh_id: meta.mesh_id,
        view_id: meta.view_id,
        split: meta.split,
        seed: meta.seed,
        camera,
        frame,
        depth_points: parts.depth_cloud.len(),
        tactile_points: parts.tactile_cloud.len(),
        dropped_depth_points: parts.dropped_depth_points,
    }
}

/// Procedural corpus, split and observations for `cfg`, written under `out`.
pub fn generate_dataset(cfg: &ExperimentConfig, out: &Path) -> Result<DatasetManifest> {
    cfg.validate()?;
    let corpus_seed = derive_seed(cfg.seed, &[0xC0]);
    let meshes: Vec<MeshEntry> = (0..cfg.mesh_count)
        .map(|i| {
            let family = ObjectFamily::ALL[i % ObjectFamily::ALL.len()];
            MeshEntry {
                id: format!("{}_{i:03}", family.as_str()),
                source: MeshSource::Object {
                    family,
                    seed: derive_seed(corpus_seed, &[i as u64]),
                    resolution: cfg.mesh_resolution,
                },
            }
        })
        .collect();
    generate_dataset_from_meshes(cfg, meshes, out)
}

/// Observations of the given meshes. Without an explicit split in `cfg`
/// one is drawn from the mesh ids.
pub fn generate_dataset_from_meshes(cfg: &ExperimentConfig, meshes: Vec<MeshEntry>, out: &Path) -> Result<DatasetManifest> {
    cfg.validate()?;
    let ids: Vec<String> = meshes.iter().map(|m| m.id.clone()).collect();
    let split = match &cfg.split {
        Some(s) => s.clone(),
        None => SplitSpec::random(&ids, cfg.holdout_meshes, cfg.views.count(), cfg.holdout_views, derive_seed(cfg.seed, &[0x5B]))?,
    };
    split.validate()?;
    std::fs::create_dir_all(out)?;
    let index: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    let built: Vec<TriMesh> = meshes.par_iter().map(|m| m.source.build(out)).collect::<Result<_>>()?;
    let jobs = split.samples();
    for (m, _, _) in &jobs {
        if !index.contains_key(m.as_str()) {
            return Err(Error::invalid(format!("split names unknown mesh {m}")));
        }
    }
    let samples: Vec<SampleEntry> = jobs
        .par_iter()
        .map(|(mesh_id, view, split_tag)| {
            let mi = index[mesh_id.as_str()];
            let mesh = &built[mi];
            let (lo, hi) = mesh.bounds().ok_or_else(|| Error::invalid(format!("mesh {mesh_id} is empty")))?;
            let (az, el) = cfg.views.angles(*view)?;
            let pose = CameraModel::orbit(nalgebra::center(&lo, &hi), cfg.views.distance, az, el)?.pose;
            let camera = cfg.camera.with_pose(pose);
            let seed = derive_seed(cfg.seed, &[mi as u64, *view as u64]);
            let frame = frame_for_mesh(&mesh.transformed(&pose), cfg.grid_dim)?.quantized();
            let meta = TripletMeta {
                mesh_id: mesh_id.clone(),
                view_id: *view,
                seed,
                split: *split_tag,
            };
            let parts = make_triplet(mesh, &camera, &TactileSampleConfig::new(cfg.npts, seed), &frame, meta.clone())?;
            let entry = sample_entry(meta, camera, frame, &parts);
            write_sample(out, &entry, &parts, cfg.save_clouds)?;
            Ok(entry)
        })
        .collect::<Result<_>>()?;
    let manifest = DatasetManifest {
        version: MANIFEST_VERSION,
        seed: cfg.seed,
        grid_dim: cfg.grid_dim,
        npts: cfg.npts,
        clouds: cfg.save_clouds,
        split: Some(split),
        meshes,
        samples,
        config: Some(serde_json::to_value(cfg)?),
    };
    manifest.save(out)?;
    Ok(manifest)
}

/// Ground-truth mesh of a sample in its camera frame.
pub(crate) fn camera_mesh(world: &TriMesh, entry: &SampleEntry) -> TriMesh {
    world.transformed(&entry.camera.pose)
}

/// Camera origin in the camera frame.
pub(crate) fn camera_origin() -> Point3<f64> {
    Point3::origin()
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn tiny_config() -> ExperimentConfig {
        ExperimentConfig {
            mesh_count: 3,
            holdout_meshes: 1,
            mesh_resolution: 20,
            views: crate::bench::ViewConfig {
                azimuths: 2,
                elevations_deg: vec![30.0],
                ..Default::default()
            },
            holdout_views: 1,
            grid_dim: 12,
            npts: 10,
            ..Default::default()
        }
    }

    #[test]
    fn layout_and_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let m = generate_dataset(&tiny_config(), dir.path()).unwrap();
        assert_eq!(m.samples.len(), 2 * 2 + 1);
        let again = load_manifest(dir.path()).unwrap();
        assert_eq!(again, m);
        for s in &m.samples {
            for suffix in ["depth.vtg", "tactile.vtg", "gt.vtg", "depth.xyz", "tactile.xyz"] {
                let p = s.path(dir.path(), suffix);
                assert!(p.exists(), "{p:?}");
                assert!(p.starts_with(dir.path().join(s.split.as_str())));
            }
            let loaded = load_sample(dir.path(), s, true).unwrap();
            assert!(loaded.triplet.tactile.is_subset_of(&loaded.triplet.ground_truth).unwrap());
            assert_eq!(loaded.depth_cloud.unwrap().len(), s.depth_points);
            assert_eq!(loaded.triplet.frame(), &s.frame);
        }
        let holdout = m.split.as_ref().unwrap().holdout_meshes.clone();
        let train = load_triplets(dir.path(), &m, &[SplitTag::TrainView]).unwrap();
        assert!(train.iter().all(|t| !holdout.contains(&t.meta.mesh_id)));
    }

    #[test]
    fn regeneration_is_byte_identical() {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let ma = generate_dataset(&tiny_config(), a.path()).unwrap();
        generate_dataset(&tiny_config(), b.path()).unwrap();
        for s in &ma.samples {
            for suffix in ["depth.vtg", "tactile.vtg", "gt.vtg", "depth.xyz", "tactile.xyz"] {
                assert_eq!(std::fs::read(s.path(a.path(), suffix)).unwrap(), std::fs::read(s.path(b.path(), suffix)).unwrap());
            }
        }
        assert_eq!(
            std::fs::read(a.path().join(MANIFEST_FILE)).unwrap(),
            std::fs::read(b.path().join(MANIFEST_FILE)).unwrap()
        );
    }
}
