//! Gaussian process implicit surface on a sphere: fit on 200 surface
//! samples with known normals, mesh the posterior mean, and measure the
//! radial error.

use nalgebra::Point3;
use visuotactile::baselines::{fit_surface, gpis_field, EstimatedNormals, GpisConfig};
use visuotactile::meshing::marching_cubes_closed;
use visuotactile::{GridFrame, PointCloud};

fn main() -> visuotactile::Result<()> {
    let r = 0.1;
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let n = 200;
    let dirs: Vec<_> = (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let rho = (1.0 - z * z).sqrt();
            let t = golden * i as f64;
            nalgebra::Vector3::new(rho * t.cos(), rho * t.sin(), z)
        })
        .collect();
    let points = dirs.iter().map(|d| Point3::from(d * r)).collect();
    let surface = EstimatedNormals {
        cloud: PointCloud::with_normals(points, dirs.clone())?,
        valid: vec![true; n],
    };
    let cfg = GpisConfig {
        m: n,
        ..Default::default()
    };
    let t0 = std::time::Instant::now();
    let (model, obs) = fit_surface(&surface, &cfg)?;
    let field = gpis_field(&model, &GridFrame::cube(Point3::origin(), 0.3, cfg.grid_n)?)?;
    let mesh = marching_cubes_closed(&field.map(|v| -v), 0.0);
    let err: f64 = mesh.vertices.iter().map(|v| (v.coords.norm() - r).abs()).sum::<f64>() / mesh.vertices.len() as f64;
    let signed_ok = obs.iter().filter(|(p, y)| model.mean(p).signum() == y.signum() || *y == 0.0).count();
    println!("length scale {:.4}, jitter {:.1e}", model.length_scale(), model.jitter);
    println!("mesh: {} faces, mean radial error {:.2}% of r", mesh.faces.len(), 100.0 * err / r);
    println!("{signed_ok}/{} observations correctly signed; {:.2}s", obs.len(), t0.elapsed().as_secs_f64());
    Ok(())
}
