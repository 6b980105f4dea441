//! Train a small completion network on a handful of shape pairs, save a
//! checkpoint, reload it and complete a holdout shape.

use visuotactile::baselines::cnn_completion;
use visuotactile::bench::{gen_shape_dataset, load_triplets, ShapeDatasetConfig};
use visuotactile::meshing::SmoothParams;
use visuotactile::net::checkpoint::Checkpoint;
use visuotactile::net::{evaluate_jaccard, train, InputMode, NetConfig, TrainConfig};
use visuotactile::synth::SplitTag;

fn main() -> visuotactile::Result<()> {
    let dir = tempfile::tempdir()?;
    let cfg = ShapeDatasetConfig {
        train_count: 64,
        holdout_count: 8,
        grid_dim: 12,
        ..Default::default()
    };
    let manifest = gen_shape_dataset(&cfg, dir.path())?;
    let train_set = load_triplets(dir.path(), &manifest, &[SplitTag::TrainView])?;
    let holdout = load_triplets(dir.path(), &manifest, &[SplitTag::HoldoutMesh])?;
    let tc = TrainConfig {
        learning_rate: 1e-3,
        epochs: 15,
        batch_size: 16,
        ..Default::default()
    };
    let mode = InputMode::TactileAndDepth;
    let out = train(&train_set, &holdout, NetConfig::new(12), &tc, mode, |r| {
        println!("epoch {:>2}  loss {:.4}  holdout jaccard {:.3}", r.epoch, r.train_loss, r.holdout_jaccard.unwrap_or(f64::NAN))
    })?;

    let path = dir.path().join("net.vtck");
    Checkpoint::new(out.final_params.clone(), tc, mode, tc.epochs, serde_json::json!({})).save(&path)?;
    let ck = Checkpoint::load(&path)?;
    let xs: Vec<_> = holdout.iter().map(|t| visuotactile::voxel::merge_grids(&t.depth, &t.tactile)).collect::<Result<_, _>>()?;
    let xs: Vec<_> = xs.iter().collect();
    let ys: Vec<_> = holdout.iter().map(|t| &t.ground_truth).collect();
    println!("reloaded checkpoint: holdout jaccard {:.3}", evaluate_jaccard(&ck.params, &xs, &ys, 0.5)?);

    let t = &holdout[0];
    let mesh = cnn_completion(&ck.params, &t.depth, &t.tactile, mode, SmoothParams::default())?;
    println!("completed {}: {} faces, watertight {}", t.meta.mesh_id, mesh.faces.len(), mesh.is_watertight());
    Ok(())
}
