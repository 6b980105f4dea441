//! Procedural object corpus.
//!
//! Objects are signed-distance solids meshed with marching cubes, so every
//! mesh is watertight. Sizes are in meters with world +z up and the base
//! resting near z = 0.

use nalgebra::{Point3, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::TriMesh;
use crate::meshing::marching_cubes_closed;
use crate::rng::{derive_seed, seeded, SeededRng};
use crate::voxel::{GridFrame, ScalarGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectFamily {
    Block,
    Can,
    Mug,
    Bowl,
    Ring,
    Bracket,
    Dumbbell,
    Channel,
    Banana,
}

impl ObjectFamily {
    pub const ALL: [ObjectFamily; 9] = [
        Self::Block,
        Self::Can,
        Self::Mug,
        Self::Bowl,
        Self::Ring,
        Self::Bracket,
        Self::Dumbbell,
        Self::Channel,
        Self::Banana,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Block => "block",
            Self::Can => "can",
            Self::Mug => "mug",
            Self::Bowl => "bowl",
            Self::Ring => "ring",
            Self::Bracket => "bracket",
            Self::Dumbbell => "dumbbell",
            Self::Channel => "channel",
            Self::Banana => "banana",
        }
    }
}

type Sdf = Box<dyn Fn(&Point3<f64>) -> f64 + Send + Sync>;

fn sd_box(p: &Point3<f64>, c: Point3<f64>, h: Vector3<f64>) -> f64 {
    let q = (p - c).abs() - h;
    q.map(|v| v.max(0.0)).norm() + q.max().min(0.0)
}

fn sd_capsule(p: &Point3<f64>, a: Point3<f64>, b: Point3<f64>, r: f64) -> f64 {
    let (pa, ba) = (p - a, b - a);
    let t = (pa.dot(&ba) / ba.norm_squared()).clamp(0.0, 1.0);
    (pa - ba * t).norm() - r
}

/// Cylinder with axis +z from `z0` to `z1`.
fn sd_cylinder(p: &Point3<f64>, r: f64, z0: f64, z1: f64) -> f64 {
    let d = Vector3::new(p.x.hypot(p.y) - r, (p.z - 0.5 * (z0 + z1)).abs() - 0.5 * (z1 - z0), 0.0);
    d.x.max(d.y).min(0.0) + Vector3::new(d.x.max(0.0), d.y.max(0.0), 0.0).norm()
}

fn sd_torus_xz(p: &Point3<f64>, c: Point3<f64>, major: f64, minor: f64) -> f64 {
    let q = p - c;
    let xz = q.x.hypot(q.z) - major;
    xz.hypot(q.y) - minor
}

fn build(family: ObjectFamily, rng: &mut SeededRng) -> (Sdf, f64) {
    let mut u = |lo: f64, hi: f64| rng.random_range(lo..hi);
    match family {
        ObjectFamily::Block => {
            let h = Vector3::new(u(0.03, 0.08), u(0.03, 0.08), u(0.03, 0.09));
            (Box::new(move |p| sd_box(p, Point3::new(0.0, 0.0, h.z), h)), h.max())
        }
        ObjectFamily::Can => {
            let (r, hz) = (u(0.03, 0.06), u(0.06, 0.16));
            (Box::new(move |p| sd_cylinder(p, r, 0.0, hz)), r.max(hz / 2.0))
        }
        ObjectFamily::Mug => {
            let (r, hz, wall) = (u(0.035, 0.055), u(0.08, 0.13), u(0.008, 0.014));
            let (major, minor) = (u(0.025, 0.035), u(0.006, 0.01));
            let handle = Point3::new(r + 0.4 * major, 0.0, 0.5 * hz);
            (
                Box::new(move |p| {
                    let outer = sd_cylinder(p, r, 0.0, hz);
                    let inner = sd_cylinder(p, r - wall, wall, hz + 0.05);
                    let body = outer.max(-inner);
                    let ring = sd_torus_xz(p, handle, major, minor).max(r - 0.5 * wall - p.x.hypot(p.y));
                    body.min(ring)
                }),
                (r + major + minor).max(hz / 2.0),
            )
        }
        ObjectFamily::Bowl => {
            let (r, wall, flat) = (u(0.05, 0.09), u(0.008, 0.014), u(0.2, 0.5));
            (
                Box::new(move |p| {
                    let c = Point3::new(0.0, 0.0, r);
                    let shell = ((p - c).norm() - (r - 0.5 * wall)).abs() - 0.5 * wall;
                    shell.max(p.z - r).max(flat * r - p.z)
                }),
                r,
            )
        }
        ObjectFamily::Ring => {
            let (major, minor) = (u(0.045, 0.075), u(0.012, 0.022));
            let c = Point3::new(0.0, 0.0, major + minor);
            (Box::new(move |p| sd_torus_xz(p, c, major, minor)), major + minor)
        }
        ObjectFamily::Bracket => {
            let (lx, ly, lz, t) = (u(0.06, 0.1), u(0.03, 0.06), u(0.06, 0.1), u(0.012, 0.025));
            (
                Box::new(move |p| {
                    let base = sd_box(p, Point3::new(0.0, 0.0, t / 2.0), Vector3::new(lx, ly, t / 2.0));
                    let post = sd_box(p, Point3::new(-lx + t / 2.0, 0.0, lz), Vector3::new(t / 2.0, ly, lz));
                    base.min(post)
                }),
                lx.max(lz).max(ly),
            )
        }
        ObjectFamily::Dumbbell => {
            let (half, ra, rb, rod) = (u(0.05, 0.09), u(0.025, 0.04), u(0.025, 0.04), u(0.008, 0.014));
            let z = ra.max(rb);
            let (a, b) = (Point3::new(-half, 0.0, z), Point3::new(half, 0.0, z));
            (
                Box::new(move |p| ((p - a).norm() - ra).min((p - b).norm() - rb).min(sd_capsule(p, a, b, rod))),
                half + z,
            )
        }
        ObjectFamily::Channel => {
            let (hx, hy, hz, t) = (u(0.05, 0.09), u(0.03, 0.06), u(0.03, 0.06), u(0.01, 0.02));
            (
                Box::new(move |p| {
                    let outer = sd_box(p, Point3::new(0.0, 0.0, hz), Vector3::new(hx, hy, hz));
                    let cut = sd_box(p, Point3::new(0.0, 0.0, hz + t), Vector3::new(hx + 0.01, hy - t, hz));
                    outer.max(-cut)
                }),
                hx.max(hy).max(hz),
            )
        }
        ObjectFamily::Banana => {
            let (radius, sweep, thick) = (u(0.06, 0.1), u(1.6, 2.6), u(0.015, 0.025));
            let n = 12;
            let pts: Vec<Point3<f64>> = (0..=n)
                .map(|i| {
                    let a = -sweep / 2.0 + sweep * i as f64 / n as f64;
                    Point3::new(radius * a.sin(), radius * (1.0 - a.cos()) - radius * 0.3, thick)
                })
                .collect();
            let ext = radius + thick;
            (
                Box::new(move |p| {
                    pts.windows(2).enumerate().fold(f64::INFINITY, |acc, (i, w)| {
                        // Taper toward the tips.
                        let s = (i as f64 + 0.5) / n as f64;
                        let r = thick * (0.55 + 0.45 * (std::f64::consts::PI * s).sin());
                        acc.min(sd_capsule(p, w[0], w[1], r))
                    })
                }),
                ext,
            )
        }
    }
}

/// A solid from `family` with parameters drawn from `seed`, meshed on a
/// lattice of `resolution` cells across its bounding cube.
pub fn gen_object(family: ObjectFamily, seed: u64, resolution: usize) -> Result<TriMesh> {
    if resolution < 8 {
        return Err(Error::Generation("object resolution must be at least 8".into()));
    }
    let mut rng = seeded(seed);
    let (sdf, extent) = build(family, &mut rng);
    let edge = 2.4 * extent;
    let frame = GridFrame::cube(Point3::new(0.0, 0.0, extent), edge, resolution)?;
    let field = ScalarGrid::from_fn(frame, |p| -sdf(&p));
    let mut mesh = marching_cubes_closed(&field, 0.0);
    if mesh.is_empty() {
        return Err(Error::Generation(format!("{} solid is empty", family.as_str())));
    }
    // Centre the footprint on the z axis and rest the base on z = 0.
    let (lo, hi) = mesh.bounds().unwrap();
    let shift = Vector3::new(-(lo.x + hi.x) / 2.0, -(lo.y + hi.y) / 2.0, -lo.z);
    mesh = mesh.translated(shift);
    Ok(mesh)
}

/// `count` objects cycling through the families, named `<family>_<index>`.
pub fn gen_corpus(count: usize, seed: u64, resolution: usize) -> Result<Vec<(String, TriMesh)>> {
    (0..count)
        .map(|i| {
            let family = ObjectFamily::ALL[i % ObjectFamily::ALL.len()];
            let mesh = gen_object(family, derive_seed(seed, &[i as u64]), resolution)?;
            Ok((format!("{}_{i:03}", family.as_str()), mesh))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_family_is_watertight_and_sized() {
        for (i, fam) in ObjectFamily::ALL.iter().enumerate() {
            let m = gen_object(*fam, i as u64 + 10, 40).unwrap();
            assert!(m.is_watertight(), "{fam:?}");
            assert!(m.volume() > 0.0, "{fam:?} volume {}", m.volume());
            let (lo, hi) = m.bounds().unwrap();
            let ext = hi - lo;
            assert!(ext.max() < 0.3 && ext.min() > 0.01, "{fam:?} extent {ext:?}");
            assert!(lo.z.abs() < 1e-12);
        }
    }

    #[test]
    fn corpus_is_deterministic() {
        let a = gen_corpus(3, 5, 24).unwrap();
        let b = gen_corpus(3, 5, 24).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[2].0, "mug_002");
    }
}
