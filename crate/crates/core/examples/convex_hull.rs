//! Quickhull over a random cloud plus the convex-hull completion baseline.

use nalgebra::Point3;
use rand::Rng;
use visuotactile::baselines::{convex_hull, convex_hull_completion};
use visuotactile::meshing::SmoothParams;
use visuotactile::rng::seeded;
use visuotactile::PointCloud;

fn main() -> visuotactile::Result<()> {
    let mut rng = seeded(5);
    let pts: Vec<Point3<f64>> = (0..2000)
        .map(|_| Point3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .filter(|p| p.coords.norm() < 1.0)
        .collect();
    let hull = convex_hull(&pts)?;
    println!(
        "{} points -> {} hull vertices, {} faces, volume {:.3} (ball 4.189)",
        pts.len(),
        hull.vertices.len(),
        hull.faces.len(),
        hull.volume()
    );

    let (depth, tactile) = pts.split_at(pts.len() / 2);
    let mesh = convex_hull_completion(&PointCloud::new(depth.to_vec()), &PointCloud::new(tactile.to_vec()), SmoothParams::default())?;
    println!("smoothed completion: volume {:.3}, watertight {}", mesh.volume(), mesh.is_watertight());
    Ok(())
}
