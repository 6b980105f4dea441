//! Build one (depth, tactile, ground truth) triplet and show how much of
//! the solid each observation covers.

use nalgebra::Point3;
use visuotactile::synth::{
    frame_for_mesh, gen_shape_pair, make_triplet, CameraModel, ShapePairSpec, ShapeRanges, SplitTag, TactileSampleConfig,
    TripletMeta,
};
use visuotactile::voxel::{jaccard, merge_grids};

fn main() -> visuotactile::Result<()> {
    let spec = ShapePairSpec::sample(3, &ShapeRanges::default(), Point3::new(0.0, 0.0, 0.8));
    let mesh = gen_shape_pair(&spec)?;
    let cam = CameraModel::default();
    let frame = frame_for_mesh(&mesh, 24)?;
    let meta = TripletMeta {
        mesh_id: "pair".into(),
        view_id: 0,
        seed: 3,
        split: SplitTag::TrainView,
    };
    let parts = make_triplet(&mesh, &cam, &TactileSampleConfig::new(40, 3), &frame, meta)?;
    let t = &parts.triplet;
    println!("depth points {}  tactile contacts {}", parts.depth_cloud.len(), parts.tactile_cloud.len());
    println!("occupied: depth {}  tactile {}  ground truth {}", t.depth.count(), t.tactile.count(), t.ground_truth.count());
    println!("jaccard(depth, gt)          = {:.3}", jaccard(&t.depth, &t.ground_truth)?);
    println!("jaccard(depth+tactile, gt)  = {:.3}", jaccard(&merge_grids(&t.depth, &t.tactile)?, &t.ground_truth)?);
    Ok(())
}
