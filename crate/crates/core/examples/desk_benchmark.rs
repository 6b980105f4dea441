//! A miniature benchmark: procedural objects, the geometric baselines and
//! the oracle, aggregated into the CSV tables.

use visuotactile::bench::{generate_dataset, run_benchmark, BenchmarkInputs, ExperimentConfig, Method, Tables};
use visuotactile::synth::SplitTag;

fn main() -> visuotactile::Result<()> {
    let dir = tempfile::tempdir()?;
    let mut cfg = ExperimentConfig {
        mesh_count: 4,
        holdout_meshes: 1,
        mesh_resolution: 32,
        grid_dim: 20,
        eval_dim: 40,
        hausdorff_samples: 2000,
        timing_repeats: 1,
        ..Default::default()
    };
    cfg.views.azimuths = 2;
    cfg.views.elevations_deg = vec![30.0];
    cfg.holdout_views = 1;
    let manifest = generate_dataset(&cfg, dir.path())?;
    println!("{} meshes, {} samples", manifest.meshes.len(), manifest.samples.len());

    let mut inputs = BenchmarkInputs::new(dir.path(), &manifest);
    inputs.eval_dim = cfg.eval_dim;
    inputs.hausdorff_samples = cfg.hausdorff_samples;
    inputs.timing_repeats = 1;
    let methods = [Method::Oracle, Method::Partial, Method::Hull, Method::Gpis];
    let records = run_benchmark(&inputs, &methods, &SplitTag::ALL)?;
    let tables = Tables::build(&records);
    println!("jaccard\n{}", tables.jaccard);
    println!("hausdorff (mm)\n{}", tables.hausdorff);
    println!("timing\n{}", tables.timing);
    Ok(())
}
