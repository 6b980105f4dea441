use serde::{Deserialize, Serialize};

use crate::baselines::GpisConfig;
use crate::error::{Error, Result};
use crate::meshing::{SmoothParams, DEFAULT_HAUSDORFF_SAMPLES, EVAL_DIM};
use crate::net::TrainConfig;
use crate::rng::{derive_seed, seeded, shuffle};
use crate::synth::{CameraModel, SplitTag, DEFAULT_NPTS};

/// Camera placements on a sphere around the object. View `v` uses azimuth
/// index `v % azimuths` and elevation index `v / azimuths`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ViewConfig {
    pub azimuths: usize,
    pub elevations_deg: Vec<f64>,
    pub azimuth_offset_deg: f64,
    pub distance: f64,
}

impl Default for ViewConfig {
    fn default() -> Self {
        Self {
            azimuths: 8,
            elevations_deg: vec![20.0, 45.0],
            azimuth_offset_deg: 10.0,
            distance: crate::synth::DEFAULT_OBJECT_DISTANCE,
        }
    }
}

impl ViewConfig {
    pub fn count(&self) -> usize {
        self.azimuths * self.elevations_deg.len()
    }

    /// (azimuth, elevation) in radians for a view id.
    pub fn angles(&self, view: u32) -> Result<(f64, f64)> {
        let v = view as usize;
        if v >= self.count() {
            return Err(Error::invalid(format!("view {v} out of range (have {})", self.count())));
        }
        let az = self.azimuth_offset_deg + 360.0 * (v % self.azimuths) as f64 / self.azimuths as f64;
        Ok((az.to_radians(), self.elevations_deg[v / self.azimuths].to_radians()))
    }
}

/// Which meshes and views form each split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_meshes: Vec<String>,
    pub holdout_meshes: Vec<String>,
    /// Views rendered for training meshes (train_view) and holdout meshes
    /// (holdout_mesh).
    pub train_views: Vec<u32>,
    /// Unseen poses of training meshes.
    pub holdout_views: Vec<u32>,
    pub seed: u64,
}

impl SplitSpec {
    /// Shuffles `ids` with `seed` and holds out the first `holdout_meshes`;
    /// view ids are shuffled the same way and `holdout_views` of them held
    /// out.
    pub fn random(ids: &[String], holdout_meshes: usize, views: usize, holdout_views: usize, seed: u64) -> Result<Self> {
        if holdout_meshes >= ids.len() || holdout_views >= views {
            return Err(Error::invalid("holdouts must leave at least one training mesh and view"));
        }
        let mut order: Vec<usize> = (0..ids.len()).collect();
        shuffle(&mut seeded(derive_seed(seed, &[0])), &mut order);
        let mut held: Vec<String> = order[..holdout_meshes].iter().map(|&i| ids[i].clone()).collect();
        let mut train: Vec<String> = order[holdout_meshes..].iter().map(|&i| ids[i].clone()).collect();
        held.sort();
        train.sort();
        let mut vorder: Vec<u32> = (0..views as u32).collect();
        shuffle(&mut seeded(derive_seed(seed, &[1])), &mut vorder);
        let mut hv = vorder[..holdout_views].to_vec();
        let mut tv = vorder[holdout_views..].to_vec();
        hv.sort_unstable();
        tv.sort_unstable();
        let spec = Self {
            train_meshes: train,
            holdout_meshes: held,
            train_views: tv,
            holdout_views: hv,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(m) = self.holdout_meshes.iter().find(|m| self.train_meshes.contains(m)) {
            return Err(Error::invalid(format!("mesh {m} is in both training and holdout splits")));
        }
        if let Some(v) = self.holdout_views.iter().find(|v| self.train_views.contains(v)) {
            return Err(Error::invalid(format!("view {v} is both a training and a holdout view")));
        }
        if self.train_meshes.is_empty() || self.train_views.is_empty() {
            return Err(Error::invalid("split needs at least one training mesh and view"));
        }
        Ok(())
    }

    /// Every (mesh, view, split) in a fixed order.
    pub fn samples(&self) -> Vec<(String, u32, SplitTag)> {
        let mut out = Vec::new();
        for m in &self.train_meshes {
            out.extend(self.train_views.iter().map(|&v| (m.clone(), v, SplitTag::TrainView)));
            out.extend(self.holdout_views.iter().map(|&v| (m.clone(), v, SplitTag::HoldoutView)));
        }
        for m in &self.holdout_meshes {
            out.extend(self.train_views.iter().map(|&v| (m.clone(), v, SplitTag::HoldoutMesh)));
        }
        out
    }
}

/// Everything needed to regenerate a benchmark run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// Procedural objects in the corpus.
    pub mesh_count: usize,
    pub holdout_meshes: usize,
    /// Marching-cubes lattice used to mesh procedural objects.
    pub mesh_resolution: usize,
    pub views: ViewConfig,
    pub holdout_views: usize,
    /// Explicit split; derived from the counts above when absent.
    pub split: Option<SplitSpec>,
    /// Intrinsics; the pose is replaced per view.
    pub camera: CameraModel,
    pub grid_dim: usize,
    pub npts: usize,
    pub save_clouds: bool,
    pub train: TrainConfig,
    pub gpis: GpisConfig,
    pub smooth: SmoothParams,
    pub eval_dim: usize,
    pub hausdorff_samples: usize,
    pub timing_repeats: usize,
    pub threshold: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            mesh_count: 40,
            holdout_meshes: 10,
            mesh_resolution: 48,
            views: ViewConfig {
                azimuths: 4,
                ..Default::default()
            },
            holdout_views: 2,
            split: None,
            camera: CameraModel::default(),
            grid_dim: 32,
            npts: DEFAULT_NPTS,
            save_clouds: true,
            train: TrainConfig::default(),
            gpis: GpisConfig::default(),
            smooth: SmoothParams::default(),
            eval_dim: EVAL_DIM,
            hausdorff_samples: DEFAULT_HAUSDORFF_SAMPLES,
            timing_repeats: 3,
            threshold: 0.5,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.camera.validate()?;
        self.train.validate()?;
        self.gpis.validate()?;
        if self.grid_dim < 4 || self.grid_dim % 4 != 0 {
            return Err(Error::invalid("grid_dim must be a positive multiple of 4"));
        }
        if self.views.count() == 0 || self.eval_dim == 0 || self.timing_repeats == 0 || self.hausdorff_samples == 0 {
            return Err(Error::invalid("views, eval_dim, timing_repeats and hausdorff_samples must be positive"));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::invalid("threshold must lie in (0, 1)"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_split_is_disjoint_and_seeded() {
        let ids: Vec<String> = (0..12).map(|i| format!("m{i}")).collect();
        let a = SplitSpec::random(&ids, 3, 16, 4, 9).unwrap();
        assert_eq!(a, SplitSpec::random(&ids, 3, 16, 4, 9).unwrap());
        assert_eq!(a.holdout_meshes.len(), 3);
        assert!(a.holdout_meshes.iter().all(|m| !a.train_meshes.contains(m)));
        assert_eq!(a.samples().len(), 9 * 16 + 3 * 12);
        let mut bad = a.clone();
        bad.holdout_meshes.push(bad.train_meshes[0].clone());
        assert!(bad.validate().is_err());
    }

    #[test]
    fn config_json_roundtrip_with_defaults() {
        let cfg: ExperimentConfig = serde_json::from_str(r#"{"seed": 4, "grid_dim": 20}"#).unwrap();
        assert_eq!(cfg.seed, 4);
        assert_eq!(cfg.mesh_count, 40);
        let back: ExperimentConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
        cfg.validate().unwrap();
    }

    #[test]
    fn view_angles() {
        let v = ViewConfig::default();
        let (az, el) = v.angles(9).unwrap();
        assert!((az - 55f64.to_radians()).abs() < 1e-12);
        assert!((el - 45f64.to_radians()).abs() < 1e-12);
        assert!(v.angles(16).is_err());
    }
}
