use nalgebra::{Cholesky, DMatrix, DVector, Point3};
use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::normals::{estimate_normals, tactile_normals, EstimatedNormals};
use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::mesh::TriMesh;
use crate::meshing::marching_cubes_closed;
use crate::rng::seeded;
use crate::voxel::{GridFrame, ScalarGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GpisConfig {
    /// Depth points kept after downsampling.
    pub m: usize,
    /// Observation noise standard deviation.
    pub noise: f64,
    /// Evaluation grid resolution per axis.
    pub grid_n: usize,
    /// Distance of the signed observations from the surface, in metres.
    pub offset: f64,
    pub k_normals: usize,
    /// Kernel length scale as a fraction of the cloud's bounding-box diagonal.
    pub length_scale_fraction: f64,
    pub seed: u64,
}

impl Default for GpisConfig {
    fn default() -> Self {
        Self {
            m: 300,
            noise: 0.001,
            grid_n: 40,
            offset: 0.0005,
            k_normals: 10,
            length_scale_fraction: 0.2,
            seed: 0,
        }
    }
}

impl GpisConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m < 4 || !(self.noise > 0.0) || self.grid_n < 8 || !(self.offset > 0.0) {
            return Err(Error::invalid("GPIS needs m ≥ 4, noise > 0, grid_n ≥ 8 and offset > 0"));
        }
        if !(self.length_scale_fraction > 0.0 && self.length_scale_fraction <= 1.0) {
            return Err(Error::invalid("GPIS length-scale fraction must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// Squared-exponential GP regression with zero prior mean.
#[derive(Debug, Clone)]
pub struct GpisModel {
    centers: Vec<Point3<f64>>,
    alpha: DVector<f64>,
    length_scale: f64,
    /// Diagonal jitter that had to be added on top of the noise variance.
    pub jitter: f64,
}

impl GpisModel {
    pub fn fit(observations: &[(Point3<f64>, f64)], length_scale: f64, noise: f64) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::invalid("GP fit without observations"));
        }
        if !(length_scale > 0.0) {
            return Err(Error::Numerical(format!("kernel length scale {length_scale}")));
        }
        let n = observations.len();
        let inv = -0.5 / (length_scale * length_scale);
        let mut k = DMatrix::from_fn(n, n, |i, j| (inv * (observations[i].0 - observations[j].0).norm_squared()).exp());
        let s2 = noise * noise;
        for i in 0..n {
            k[(i, i)] += s2;
        }
        let y = DVector::from_iterator(n, observations.iter().map(|o| o.1));
        let mut jitter = 0.0;
        let chol = loop {
            if let Some(c) = Cholesky::new(k.clone()) {
                break c;
            }
            let next = if jitter == 0.0 { 1e-8 * s2 } else { jitter * 10.0 };
            if next > 1e-4 * s2 * (1.0 + 1e-9) {
                return Err(Error::Numerical(format!("GP kernel matrix not positive definite ({n} observations)")));
            }
            for i in 0..n {
                k[(i, i)] += next - jitter;
            }
            jitter = next;
        };
        Ok(Self {
            centers: observations.iter().map(|o| o.0).collect(),
            alpha: chol.solve(&y),
            length_scale,
            jitter,
        })
    }

    /// Posterior mean at `p`.
    pub fn mean(&self, p: &Point3<f64>) -> f64 {
        let inv = -0.5 / (self.length_scale * self.length_scale);
        self.centers.iter().zip(self.alpha.iter()).map(|(c, a)| a * (inv * (c - p).norm_squared()).exp()).sum()
    }

    pub fn length_scale(&self) -> f64 {
        self.length_scale
    }
}

/// `m` points chosen uniformly without replacement. The choice depends only
/// on the set of input points and the seed, not their order.
pub fn downsample(normals: &EstimatedNormals, m: usize, seed: u64) -> EstimatedNormals {
    let cloud = &normals.cloud;
    let mut order: Vec<usize> = (0..cloud.len()).collect();
    let key = |i: usize| {
        let p = cloud.points[i];
        [p.x, p.y, p.z]
    };
    order.sort_by(|&a, &b| {
        let (ka, kb) = (key(a), key(b));
        ka[0].total_cmp(&kb[0]).then(ka[1].total_cmp(&kb[1])).then(ka[2].total_cmp(&kb[2]))
    });
    let chosen: Vec<usize> = if order.len() <= m {
        order
    } else {
        let mut picks = index::sample(&mut seeded(seed), order.len(), m).into_vec();
        picks.sort_unstable();
        picks.into_iter().map(|i| order[i]).collect()
    };
    let ns = cloud.normals.as_ref();
    EstimatedNormals {
        cloud: PointCloud {
            points: chosen.iter().map(|&i| cloud.points[i]).collect(),
            normals: ns.map(|n| chosen.iter().map(|&i| n[i]).collect()),
        },
        valid: chosen.iter().map(|&i| normals.valid[i]).collect(),
    }
}

/// Surface points with target 0 plus offset points at `±offset` along the
/// normal with targets `±offset` (positive outside).
pub fn observations(surface: &EstimatedNormals, offset: f64) -> Vec<(Point3<f64>, f64)> {
    let normals = surface.cloud.normals.as_ref().expect("normals present");
    let mut obs = Vec::with_capacity(3 * surface.cloud.len());
    for ((p, n), ok) in surface.cloud.points.iter().zip(normals).zip(&surface.valid) {
        if *ok {
            obs.push((*p, 0.0));
            obs.push((p + n * offset, offset));
            obs.push((p - n * offset, -offset));
        }
    }
    obs
}

/// Fits the implicit surface model to the clouds; returns the model and
/// the observations it was fitted to.
pub fn fit_gpis(
    depth: &PointCloud,
    tactile: &PointCloud,
    cfg: &GpisConfig,
    camera_origin: &Point3<f64>,
) -> Result<(GpisModel, Vec<(Point3<f64>, f64)>)> {
    cfg.validate()?;
    let mut surface = if depth.len() > cfg.k_normals {
        downsample(&estimate_normals(depth, cfg.k_normals, camera_origin)?, cfg.m, cfg.seed)
    } else {
        EstimatedNormals {
            cloud: PointCloud::with_normals(vec![], vec![])?,
            valid: vec![],
        }
    };
    let touch = tactile_normals(tactile, camera_origin);
    surface.cloud = surface.cloud.concat(&touch.cloud);
    surface.valid.extend(&touch.valid);
    fit_surface(&surface, cfg)
}

/// Fits the model to oriented surface points.
pub fn fit_surface(surface: &EstimatedNormals, cfg: &GpisConfig) -> Result<(GpisModel, Vec<(Point3<f64>, f64)>)> {
    let obs = observations(surface, cfg.offset);
    if obs.is_empty() {
        return Err(Error::invalid("GPIS has no points with valid normals"));
    }
    let (lo, hi) = surface.cloud.bounds().expect("nonempty");
    let diag = (hi - lo).norm();
    let ell = cfg.length_scale_fraction * if diag > 0.0 { diag } else { cfg.offset * 10.0 };
    Ok((GpisModel::fit(&obs, ell, cfg.noise)?, obs))
}

/// Posterior mean sampled at the voxel centres of `frame`. The kernel
/// factorizes over axes, so each centre contributes an outer product of
/// three 1D profiles.
pub fn gpis_field(model: &GpisModel, frame: &GridFrame) -> Result<ScalarGrid> {
    let [nx, ny, nz] = frame.dims;
    let inv = -0.5 / (model.length_scale * model.length_scale);
    let o = frame.origin();
    let axis = |n: usize, o: f64, c: f64| -> Vec<f64> {
        (0..n)
            .map(|i| {
                let d = o + (i as f64 + 0.5) * frame.voxel_size - c;
                (inv * d * d).exp()
            })
            .collect()
    };
    let profiles: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> = model
        .centers
        .iter()
        .map(|c| (axis(nx, o.x, c.x), axis(ny, o.y, c.y), axis(nz, o.z, c.z)))
        .collect();
    let mut values = vec![0.0; frame.len()];
    values.par_chunks_mut(nx * ny).enumerate().for_each(|(k, slab)| {
        for ((ex, ey, ez), a) in profiles.iter().zip(model.alpha.iter()) {
            let wz = a * ez[k];
            if wz == 0.0 {
                continue;
            }
            for (j, row) in slab.chunks_mut(nx).enumerate() {
                let w = wz * ey[j];
                for (v, e) in row.iter_mut().zip(ex) {
                    *v += w * e;
                }
            }
        }
    });
    ScalarGrid::new(*frame, values)
}

/// GPIS completion: the zero level set of the posterior mean on a
/// `grid_n³` lattice spanning `frame`.
pub fn gpis_completion(
    depth: &PointCloud,
    tactile: &PointCloud,
    cfg: &GpisConfig,
    camera_origin: &Point3<f64>,
    frame: &GridFrame,
) -> Result<TriMesh> {
    let (model, _) = fit_gpis(depth, tactile, cfg, camera_origin)?;
    let field = gpis_field(&model, &frame.resampled(cfg.grid_n)?)?;
    // Inside is negative; marching cubes treats larger values as inside.
    Ok(marching_cubes_closed(&field.map(|v| -v), 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use nalgebra::Vector3;
    use rand_distr::{Distribution, StandardNormal};

    fn sphere_samples(n: usize, c: Point3<f64>, r: f64, seed: u64) -> (Vec<Point3<f64>>, Vec<Vector3<f64>>) {
        let mut rng = seeded(seed);
        let mut pts = Vec::new();
        let mut ns = Vec::new();
        for _ in 0..n {
            let v = Vector3::new(
                StandardNormal.sample(&mut rng),
                StandardNormal.sample(&mut rng),
                StandardNormal.sample(&mut rng),
            )
            .normalize();
            pts.push(c + v * r);
            ns.push(v);
        }
        (pts, ns)
    }

    #[test]
    fn posterior_interpolates_observations() {
        let c = Point3::new(0.0, 0.0, 0.8);
        let (pts, ns) = sphere_samples(200, c, 0.05, 1);
        let surface = EstimatedNormals {
            valid: vec![true; pts.len()],
            cloud: PointCloud::with_normals(pts, ns).unwrap(),
        };
        let cfg = GpisConfig::default();
        let obs = observations(&surface, cfg.offset);
        let model = GpisModel::fit(&obs, 0.2 * 0.1 * 3f64.sqrt(), cfg.noise).unwrap();
        let worst = obs.iter().map(|(p, y)| (model.mean(p) - y).abs()).fold(0.0, f64::max);
        assert!(worst <= 3.0 * cfg.noise, "worst residual {worst}");
    }

    #[test]
    fn sphere_reconstruction() {
        let c = Point3::new(0.0, 0.0, 0.8);
        let r = 0.05;
        let (pts, ns) = sphere_samples(200, c, r, 3);
        let surface = EstimatedNormals {
            valid: vec![true; pts.len()],
            cloud: PointCloud::with_normals(pts, ns).unwrap(),
        };
        let cfg = GpisConfig::default();
        let (model, obs) = fit_surface(&surface, &cfg).unwrap();
        let signed = obs.iter().filter(|(_, y)| *y != 0.0);
        let (mut ok, mut total) = (0, 0);
        for (p, y) in signed {
            total += 1;
            if model.mean(p).signum() == y.signum() {
                ok += 1;
            }
        }
        assert!(ok as f64 >= 0.99 * total as f64);
        let frame = GridFrame::cube(c, 1.1 * 2.0 * r, cfg.grid_n).unwrap();
        let field = gpis_field(&model, &frame).unwrap();
        let mesh = marching_cubes_closed(&field.map(|v| -v), 0.0);
        let err = mesh.vertices.iter().map(|v| ((v - c).norm() - r).abs()).sum::<f64>() / mesh.vertices.len() as f64;
        eprintln!("mean radial error {:.4} of radius, {} vertices, components {}", err / r, mesh.vertices.len(), mesh.components());
        assert!(err <= 0.05 * r);
    }

    #[test]
    fn separable_field_matches_direct_mean() {
        let obs: Vec<_> = (0..30).map(|i| (Point3::new(0.01 * i as f64, 0.02 * (i % 7) as f64, 0.003 * i as f64), (i % 3) as f64 - 1.0)).collect();
        let m = GpisModel::fit(&obs, 0.05, 1e-3).unwrap();
        let f = GridFrame::new([5, 6, 7], 0.02, Point3::new(-0.02, 0.0, 0.01)).unwrap();
        let field = gpis_field(&m, &f).unwrap();
        for i in 0..f.len() {
            let direct = m.mean(&f.voxel_center(f.coords(i)));
            assert!((field.values()[i] - direct).abs() <= 1e-9 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn downsample_ignores_input_order() {
        let (pts, ns) = sphere_samples(50, Point3::origin(), 1.0, 2);
        let make = |p: Vec<_>, n: Vec<_>| EstimatedNormals {
            valid: vec![true; p.len()],
            cloud: PointCloud::with_normals(p, n).unwrap(),
        };
        let a = downsample(&make(pts.clone(), ns.clone()), 10, 7);
        let (mut rp, mut rn) = (pts.clone(), ns.clone());
        rp.reverse();
        rn.reverse();
        let b = downsample(&make(rp, rn), 10, 7);
        assert_eq!(a.cloud, b.cloud);
        assert_eq!(a.cloud.len(), 10);
        assert_eq!(downsample(&make(pts, ns), 80, 7).cloud.len(), 50);
    }

    #[test]
    fn jitter_is_not_needed_for_noisy_kernel() {
        let obs = vec![(Point3::origin(), 0.0), (Point3::origin(), 0.0)];
        let m = GpisModel::fit(&obs, 1.0, 1e-3).unwrap();
        assert_eq!(m.jitter, 0.0);
        assert!(GpisModel::fit(&obs, 0.0, 1e-3).is_err());
    }
}
