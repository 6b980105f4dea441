use nalgebra::{Isometry3, Point3, Vector3};

use crate::error::{Error, Result};

/// Metric 3D points with optional per-point unit normals.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Point3<f64>>,
    pub normals: Option<Vec<Vector3<f64>>>,
}

impl PointCloud {
    pub fn new(points: Vec<Point3<f64>>) -> Self {
        Self {
            points,
            normals: None,
        }
    }

    pub fn with_normals(points: Vec<Point3<f64>>, normals: Vec<Vector3<f64>>) -> Result<Self> {
        if points.len() != normals.len() {
            return Err(Error::invalid(format!(
                "{} points but {} normals",
                points.len(),
                normals.len()
            )));
        }
        Ok(Self {
            points,
            normals: Some(normals),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn check_finite(&self) -> Result<()> {
        match self
            .points
            .iter()
            .position(|p| !p.iter().all(|c| c.is_finite()))
        {
            Some(i) => Err(Error::invalid(format!("point {i} has non-finite coordinates"))),
            None => Ok(()),
        }
    }

    /// Concatenates two clouds. Normals survive only if both sides carry them.
    pub fn concat(&self, other: &PointCloud) -> PointCloud {
        let mut points = self.points.clone();
        points.extend_from_slice(&other.points);
        let normals = match (&self.normals, &other.normals) {
            (Some(a), Some(b)) => {
                let mut n = a.clone();
                n.extend_from_slice(b);
                Some(n)
            }
            _ => None,
        };
        PointCloud { points, normals }
    }

    pub fn transformed(&self, iso: &Isometry3<f64>) -> PointCloud {
        PointCloud {
            points: self.points.iter().map(|p| iso * p).collect(),
            normals: self
                .normals
                .as_ref()
                .map(|ns| ns.iter().map(|n| iso * n).collect()),
        }
    }

    pub fn bounds(&self) -> Option<(Point3<f64>, Point3<f64>)> {
        bounds_of(&self.points)
    }
}

pub(crate) fn bounds_of(points: &[Point3<f64>]) -> Option<(Point3<f64>, Point3<f64>)> {
    let first = points.first()?;
    let mut lo = *first;
    let mut hi = *first;
    for p in points {
        for a in 0..3 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    Some((lo, hi))
}

/// Minimal whitespace-separated `x y z [nx ny nz]` text format (`.xyz`).
pub mod xyz {
    use std::io::{BufRead, BufReader, Write};
    use std::path::Path;

    use nalgebra::{Point3, Vector3};

    use super::PointCloud;
    use crate::error::{Error, Result};

    pub fn write(path: &Path, cloud: &PointCloud) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        for (i, p) in cloud.points.iter().enumerate() {
            match &cloud.normals {
                Some(ns) => {
                    let n = ns[i];
                    writeln!(out, "{} {} {} {} {} {}", p.x, p.y, p.z, n.x, n.y, n.z)?
                }
                None => writeln!(out, "{} {} {}", p.x, p.y, p.z)?,
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<PointCloud> {
        let reader = BufReader::new(std::fs::File::open(path)?);
        let mut points = Vec::new();
        let mut normals = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::format(path, format!("line {}: {e}", lineno + 1)))?;
            match vals.len() {
                3 => points.push(Point3::new(vals[0], vals[1], vals[2])),
                6 => {
                    points.push(Point3::new(vals[0], vals[1], vals[2]));
                    normals.push(Vector3::new(vals[3], vals[4], vals[5]));
                }
                n => {
                    return Err(Error::format(
                        path,
                        format!("line {}: expected 3 or 6 values, got {n}", lineno + 1),
                    ))
                }
            }
        }
        if normals.is_empty() {
            Ok(PointCloud::new(points))
        } else if normals.len() == points.len() {
            PointCloud::with_normals(points, normals)
        } else {
            Err(Error::format(path, "mixed rows with and without normals"))
        }
    }
}
