use std::collections::HashMap;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::{camera_mesh, camera_origin, load_sample, DatasetManifest, LoadedSample, SampleEntry};
use crate::baselines::{cnn_completion_at, convex_hull_completion, gpis_completion, partial_completion, GpisConfig};
use crate::error::{Error, Result};
use crate::mesh::TriMesh;
use crate::meshing::{hausdorff, mesh_to_eval_grid, SmoothParams};
use crate::net::{InputMode, NetParams};
use crate::synth::SplitTag;
use crate::voxel::jaccard;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "partial")]
    Partial,
    #[serde(rename = "hull")]
    Hull,
    #[serde(rename = "gpis")]
    Gpis,
    #[serde(rename = "cnn-depth")]
    CnnDepth,
    #[serde(rename = "cnn-tactile")]
    CnnTactile,
    /// The ground-truth mesh itself; a sanity check for the metrics.
    #[serde(rename = "oracle")]
    Oracle,
}

impl Method {
    /// Every method except the oracle.
    pub const COMPARED: [Method; 5] = [Method::Partial, Method::Hull, Method::Gpis, Method::CnnDepth, Method::CnnTactile];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Partial => "partial",
            Method::Hull => "hull",
            Method::Gpis => "gpis",
            Method::CnnDepth => "cnn-depth",
            Method::CnnTactile => "cnn-tactile",
            Method::Oracle => "oracle",
        }
    }

    fn needs_clouds(self) -> bool {
        matches!(self, Method::Partial | Method::Hull | Method::Gpis)
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Method::Partial, Method::Hull, Method::Gpis, Method::CnnDepth, Method::CnnTactile, Method::Oracle]
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown method {s:?}")))
    }
}

/// One (sample, method) result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub method: Method,
    pub split: SplitTag,
    pub mesh_id: String,
    pub view_id: u32,
    /// Intersection over union with the ground truth on the evaluation lattice.
    pub jaccard: Option<f64>,
    /// Symmetric mean surface distance, millimeters.
    pub hausdorff_mm: Option<f64>,
    /// Median wall-clock seconds of the completion call.
    pub time_s: Option<f64>,
    /// The completion mesh was closed and manifold.
    pub watertight: Option<bool>,
    pub error: Option<String>,
}

impl EvalRecord {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

/// Everything a benchmark run reads.
#[derive(Debug, Clone)]
pub struct BenchmarkInputs<'a> {
    pub root: &'a Path,
    pub manifest: &'a DatasetManifest,
    pub cnn_depth: Option<&'a NetParams>,
    pub cnn_tactile: Option<&'a NetParams>,
    pub gpis: GpisConfig,
    pub smooth: SmoothParams,
    pub eval_dim: usize,
    pub hausdorff_samples: usize,
    pub timing_repeats: usize,
    /// Isosurface level for CNN probability fields.
    pub threshold: f64,
}

impl<'a> BenchmarkInputs<'a> {
    pub fn new(root: &'a Path, manifest: &'a DatasetManifest) -> Self {
        let d = super::ExperimentConfig::default();
        Self {
            root,
            manifest,
            cnn_depth: None,
            cnn_tactile: None,
            gpis: d.gpis,
            smooth: d.smooth,
            eval_dim: d.eval_dim,
            hausdorff_samples: d.hausdorff_samples,
            timing_repeats: d.timing_repeats,
            threshold: d.threshold,
        }
    }
}

fn complete(method: Method, inputs: &BenchmarkInputs, sample: &LoadedSample, entry: &SampleEntry, gt: &TriMesh) -> Result<TriMesh> {
    let clouds = || {
        Ok::<_, Error>((
            sample.depth_cloud.as_ref().ok_or_else(|| Error::invalid("dataset has no saved clouds"))?,
            sample.tactile_cloud.as_ref().ok_or_else(|| Error::invalid("dataset has no saved clouds"))?,
        ))
    };
    let t = &sample.triplet;
    let eval_frame = entry.frame.resampled(inputs.eval_dim)?;
    let cnn = |p: &NetParams, mode| cnn_completion_at(p, &t.depth, &t.tactile, mode, inputs.threshold, inputs.smooth);
    match method {
        Method::Partial => {
            let (d, tc) = clouds()?;
            partial_completion(d, tc, &eval_frame, inputs.smooth)
        }
        Method::Hull => {
            let (d, tc) = clouds()?;
            convex_hull_completion(d, tc, inputs.smooth)
        }
        Method::Gpis => {
            let (d, tc) = clouds()?;
            let cfg = GpisConfig {
                seed: entry.seed,
                ..inputs.gpis
            };
            gpis_completion(d, tc, &cfg, &camera_origin(), &eval_frame)
        }
        Method::CnnDepth => cnn(inputs.cnn_depth.expect("checked"), InputMode::DepthOnly),
        Method::CnnTactile => cnn(inputs.cnn_tactile.expect("checked"), InputMode::TactileAndDepth),
        Method::Oracle => Ok(gt.clone()),
    }
}

/// Completes every sample with every method and scores the result against
/// the ground truth. Failures become records with `error` set. Records are
/// ordered by sample, then by the order of `methods`.
pub fn run_benchmark(inputs: &BenchmarkInputs, methods: &[Method], splits: &[SplitTag]) -> Result<Vec<EvalRecord>> {
    if methods.contains(&Method::CnnDepth) && inputs.cnn_depth.is_none() {
        return Err(Error::MissingMethod("cnn-depth needs depth-only network parameters".into()));
    }
    if methods.contains(&Method::CnnTactile) && inputs.cnn_tactile.is_none() {
        return Err(Error::MissingMethod("cnn-tactile needs tactile-and-depth network parameters".into()));
    }
    if inputs.timing_repeats == 0 {
        return Err(Error::invalid("timing_repeats must be at least 1"));
    }
    let need_clouds = methods.iter().any(|m| m.needs_clouds());
    if need_clouds && !inputs.manifest.clouds {
        return Err(Error::invalid("cloud-based methods need a dataset generated with saved clouds"));
    }
    let entries: Vec<&SampleEntry> = inputs.manifest.samples.iter().filter(|s| splits.contains(&s.split)).collect();
    let mut mesh_ids: Vec<&str> = entries.iter().map(|e| e.mesh_id.as_str()).collect();
    mesh_ids.sort_unstable();
    mesh_ids.dedup();
    let worlds: HashMap<&str, TriMesh> = mesh_ids
        .par_iter()
        .map(|id| Ok((*id, inputs.manifest.mesh(id)?.source.build(inputs.root)?)))
        .collect::<Result<_>>()?;

    let per_sample: Vec<Vec<EvalRecord>> = entries
        .par_iter()
        .map(|entry| {
            let sample = load_sample(inputs.root, entry, need_clouds)?;
            let gt_mesh = camera_mesh(&worlds[entry.mesh_id.as_str()], entry);
            let eval_frame = entry.frame.resampled(inputs.eval_dim)?;
            let gt_grid = mesh_to_eval_grid(&gt_mesh, &eval_frame)?.grid;
            Ok(methods
                .iter()
                .map(|&method| {
                    let mut record = EvalRecord {
                        method,
                        split: entry.split,
                        mesh_id: entry.mesh_id.clone(),
                        view_id: entry.view_id,
                        jaccard: None,
                        hausdorff_mm: None,
                        time_s: None,
                        watertight: None,
                        error: None,
                    };
                    let mut times = Vec::with_capacity(inputs.timing_repeats);
                    let mut mesh = None;
                    for _ in 0..inputs.timing_repeats {
                        let start = Instant::now();
                        let out = complete(method, inputs, &sample, entry, &gt_mesh);
                        times.push(start.elapsed().as_secs_f64().max(1e-9));
                        match out {
                            Ok(m) => mesh = Some(m),
                            Err(e) => {
                                record.error = Some(e.to_string());
                                return record;
                            }
                        }
                    }
                    times.sort_by(f64::total_cmp);
                    record.time_s = Some(times[times.len() / 2]);
                    let mesh = mesh.expect("at least one repeat");
                    let scored = (|| -> Result<()> {
                        let vox = mesh_to_eval_grid(&mesh, &eval_frame)?;
                        record.watertight = Some(vox.watertight);
                        record.jaccard = Some(jaccard(&vox.grid, &gt_grid)?);
                        if !mesh.is_empty() {
                            let h = hausdorff(&mesh, &gt_mesh, inputs.hausdorff_samples, entry.seed)?;
                            record.hausdorff_mm = Some(h.symmetric_mean);
                        }
                        Ok(())
                    })();
                    if let Err(e) = scored {
                        record.error = Some(e.to_string());
                    }
                    record
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(per_sample.into_iter().flatten().collect())
}
