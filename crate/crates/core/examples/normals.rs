//! k-nearest-neighbour PCA normals on a rendered depth cloud, oriented
//! toward the camera.

use nalgebra::Point3;
use visuotactile::baselines::estimate_normals;
use visuotactile::synth::{render_depth, CameraModel};
use visuotactile::TriMesh;

fn main() -> visuotactile::Result<()> {
    let center = Point3::new(0.0, 0.0, 0.8);
    let sphere = TriMesh::icosphere(center, 0.1, 4);
    let cloud = render_depth(&sphere, &CameraModel::default())?;
    let est = estimate_normals(&cloud, 10, &Point3::origin())?;
    let normals = est.cloud.normals.as_ref().expect("normals present");
    let mut worst: f64 = 0.0;
    for ((p, n), ok) in est.cloud.points.iter().zip(normals).zip(&est.valid) {
        if *ok {
            let truth = (p - center).normalize();
            worst = worst.max(n.dot(&truth).clamp(-1.0, 1.0).acos().to_degrees());
        }
    }
    println!("{} points, {} valid normals, worst angular error {worst:.2} deg", cloud.len(), est.valid_count());
    Ok(())
}
