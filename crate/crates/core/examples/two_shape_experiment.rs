//! Two-primitive fusion experiment: train a depth-only and a
//! tactile-and-depth network on the same shape pairs and compare holdout
//! Jaccard.
//!
//! ```text
//! cargo run --release --example two_shape_experiment -- --train 2000 --epochs 40
//! ```

use clap::Parser;
use visuotactile::bench::{gen_shape_dataset, load_triplets, ShapeDatasetConfig};
use visuotactile::net::{train, InputMode, NetConfig, TrainConfig};
use visuotactile::synth::SplitTag;

#[derive(Parser)]
struct Args {
    #[arg(long, default_value_t = 2000)]
    train: usize,
    #[arg(long, default_value_t = 200)]
    holdout: usize,
    #[arg(long, default_value_t = 40)]
    epochs: usize,
    #[arg(long, default_value_t = 1e-4)]
    lr: f64,
    #[arg(long, default_value_t = 32)]
    batch: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Dataset directory (a temporary one when omitted).
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

fn main() -> visuotactile::Result<()> {
    env_logger::init();
    let args = Args::parse();
    let tmp = tempfile::tempdir()?;
    let root = args.out.clone().unwrap_or_else(|| tmp.path().to_path_buf());
    let cfg = ShapeDatasetConfig {
        seed: args.seed,
        train_count: args.train,
        holdout_count: args.holdout,
        ..Default::default()
    };
    let t0 = std::time::Instant::now();
    let manifest = gen_shape_dataset(&cfg, &root)?;
    println!("generated {} pairs in {:.1}s", manifest.samples.len(), t0.elapsed().as_secs_f64());
    let train_set = load_triplets(&root, &manifest, &[SplitTag::TrainView])?;
    let holdout = load_triplets(&root, &manifest, &[SplitTag::HoldoutMesh])?;
    let tc = TrainConfig {
        learning_rate: args.lr,
        batch_size: args.batch,
        epochs: args.epochs,
        seed: args.seed,
        ..Default::default()
    };
    let mut best = Vec::new();
    for mode in [InputMode::DepthOnly, InputMode::TactileAndDepth] {
        let t0 = std::time::Instant::now();
        let out = train(&train_set, &holdout, NetConfig::new(cfg.grid_dim), &tc, mode, |r| {
            println!(
                "{:<18} epoch {:>3}  loss {:.4}  holdout jaccard {:.4}  ({:.1}s)",
                mode.as_str(),
                r.epoch,
                r.train_loss,
                r.holdout_jaccard.unwrap_or(f64::NAN),
                r.seconds
            )
        })?;
        let j = out.history[out.best_epoch - 1].holdout_jaccard.unwrap_or(f64::NAN);
        println!("{}: best holdout jaccard {j:.4} at epoch {} ({:.0}s)", mode.as_str(), out.best_epoch, t0.elapsed().as_secs_f64());
        best.push(j);
    }
    println!("delta (tactile_and_depth - depth_only) = {:+.4}", best[1] - best[0]);
    Ok(())
}
