use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use nalgebra::Point3;
use serde_json::json;

use visuotactile::baselines::{cnn_completion_at, convex_hull_completion, gpis_completion, partial_completion, GpisConfig};
use visuotactile::bench::{
    gen_shape_dataset, generate_dataset, generate_dataset_from_meshes, load_manifest, load_triplets, read_records, run_benchmark,
    write_records, BenchmarkInputs, ExperimentConfig, MeshEntry, MeshSource, Method, ShapeDatasetConfig, Tables,
};
use visuotactile::cloud::{xyz, PointCloud};
use visuotactile::mesh::io::write_obj;
use visuotactile::meshing::SmoothParams;
use visuotactile::net::checkpoint::Checkpoint;
use visuotactile::net::{train, InputMode, NetConfig};
use visuotactile::synth::SplitTag;
use visuotactile::voxel::io::read_vtg;
use visuotactile::{Error, Result};

/// Visuo-tactile shape completion toolkit.
#[derive(Parser)]
#[command(name = "vtg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the two-primitive fusion dataset.
    GenShapes {
        #[arg(long)]
        out: PathBuf,
        /// JSON file with dataset settings; flags override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        train: Option<usize>,
        #[arg(long)]
        holdout: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        grid_dim: Option<usize>,
        #[arg(long)]
        npts: Option<usize>,
        /// Also write depth and tactile point clouds.
        #[arg(long)]
        clouds: bool,
    },
    /// Generate a benchmark dataset from the procedural corpus or a mesh directory.
    GenDataset {
        #[arg(long)]
        out: PathBuf,
        /// Experiment JSON file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Directory of OBJ/STL meshes to use instead of the procedural corpus.
        #[arg(long)]
        meshes: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        grid_dim: Option<usize>,
    },
    /// Train a completion network on the training views of a dataset.
    Train {
        #[arg(long)]
        data: PathBuf,
        /// depth, tactile or both.
        #[arg(long)]
        mode: InputMode,
        /// Checkpoint written after the final epoch.
        #[arg(long)]
        out: PathBuf,
        /// Checkpoint of the epoch with the best holdout Jaccard.
        #[arg(long)]
        best_out: Option<PathBuf>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        batch_size: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Batch shards evaluated in parallel.
        #[arg(long)]
        workers: Option<usize>,
        /// JSON-lines progress file (stdout when omitted).
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Complete one observation with one method and write an OBJ mesh.
    Complete {
        #[arg(long)]
        method: Method,
        /// Dataset root; with --sample fills in every input path.
        #[arg(long)]
        data: Option<PathBuf>,
        /// Sample stem, e.g. holdout_mesh/mug_002_3.
        #[arg(long)]
        sample: Option<String>,
        #[arg(long)]
        depth_cloud: Option<PathBuf>,
        #[arg(long)]
        tactile_cloud: Option<PathBuf>,
        #[arg(long)]
        depth_grid: Option<PathBuf>,
        #[arg(long)]
        tactile_grid: Option<PathBuf>,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Camera origin in the cloud frame, "x,y,z".
        #[arg(long, default_value = "0,0,0")]
        camera_origin: String,
        #[arg(long, default_value_t = 80)]
        eval_dim: usize,
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
        #[arg(long)]
        gpis_config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// JSON timing record.
        #[arg(long)]
        timing: Option<PathBuf>,
    },
    /// Run the benchmark over a dataset and append JSON-lines records.
    Eval {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "partial,hull,gpis,cnn-depth,cnn-tactile")]
        methods: Vec<Method>,
        #[arg(long)]
        depth_ckpt: Option<PathBuf>,
        #[arg(long)]
        tactile_ckpt: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "train_view,holdout_view,holdout_mesh")]
        splits: Vec<String>,
        #[arg(long)]
        out: PathBuf,
        /// Experiment JSON overriding the dataset's own settings.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        eval_dim: Option<usize>,
        #[arg(long)]
        hausdorff_samples: Option<usize>,
        #[arg(long)]
        repeats: Option<usize>,
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Aggregate JSON-lines records into CSV tables.
    Report {
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn parse_split(s: &str) -> Result<SplitTag> {
    SplitTag::ALL
        .into_iter()
        .find(|t| t.as_str() == s)
        .ok_or_else(|| Error::InvalidInput(format!("unknown split {s:?}")))
}

fn parse_point(s: &str) -> Result<Point3<f64>> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::InvalidInput(format!("bad point {s:?}: {e}")))?;
    match v.as_slice() {
        [x, y, z] => Ok(Point3::new(*x, *y, *z)),
        _ => Err(Error::InvalidInput(format!("point {s:?} needs three components"))),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

fn experiment_config(data: &Path, override_path: Option<&Path>) -> Result<ExperimentConfig> {
    if let Some(p) = override_path {
        return ExperimentConfig::load(p);
    }
    let manifest = load_manifest(data)?;
    Ok(match manifest.config {
        Some(v) => serde_json::from_value(v).unwrap_or_default(),
        None => ExperimentConfig::default(),
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenShapes {
            out,
            config,
            train,
            holdout,
            seed,
            grid_dim,
            npts,
            clouds,
        } => {
            let mut cfg: ShapeDatasetConfig = match config {
                Some(p) => read_json(&p)?,
                None => ShapeDatasetConfig::default(),
            };
            cfg.train_count = train.unwrap_or(cfg.train_count);
            cfg.holdout_count = holdout.unwrap_or(cfg.holdout_count);
            cfg.seed = seed.unwrap_or(cfg.seed);
            cfg.grid_dim = grid_dim.unwrap_or(cfg.grid_dim);
            cfg.npts = npts.unwrap_or(cfg.npts);
            cfg.save_clouds |= clouds;
            let m = gen_shape_dataset(&cfg, &out)?;
            println!("{}", json!({"dataset": out, "samples": m.samples.len()}));
        }
        Command::GenDataset {
            out,
            config,
            meshes,
            seed,
            grid_dim,
        } => {
            let mut cfg = match config {
                Some(p) => ExperimentConfig::load(&p)?,
                None => ExperimentConfig::default(),
            };
            cfg.seed = seed.unwrap_or(cfg.seed);
            cfg.grid_dim = grid_dim.unwrap_or(cfg.grid_dim);
            let m = match meshes {
                Some(dir) => {
                    let mut entries = Vec::new();
                    let mut paths: Vec<PathBuf> = std::fs::read_dir(&dir)?
                        .filter_map(|e| e.ok().map(|e| e.path()))
                        .filter(|p| matches!(p.extension().and_then(|e| e.to_str()), Some("obj" | "stl" | "OBJ" | "STL")))
                        .collect();
                    paths.sort();
                    for p in paths {
                        let id = p.file_stem().and_then(|s| s.to_str()).unwrap_or("mesh").to_string();
                        let abs = std::fs::canonicalize(&p)?;
                        entries.push(MeshEntry {
                            id,
                            source: MeshSource::File { path: abs },
                        });
                    }
                    generate_dataset_from_meshes(&cfg, entries, &out)?
                }
                None => generate_dataset(&cfg, &out)?,
            };
            println!("{}", json!({"dataset": out, "meshes": m.meshes.len(), "samples": m.samples.len()}));
        }
        Command::Train {
            data,
            mode,
            out,
            best_out,
            epochs,
            lr,
            batch_size,
            seed,
            workers,
            log,
        } => {
            let manifest = load_manifest(&data)?;
            let mut tc = experiment_config(&data, None)?.train;
            tc.epochs = epochs.unwrap_or(tc.epochs);
            tc.learning_rate = lr.unwrap_or(tc.learning_rate);
            tc.batch_size = batch_size.unwrap_or(tc.batch_size);
            tc.seed = seed.unwrap_or(tc.seed);
            tc.workers = workers.unwrap_or(tc.workers);
            let train_set = load_triplets(&data, &manifest, &[SplitTag::TrainView])?;
            let holdout = load_triplets(&data, &manifest, &[SplitTag::HoldoutView, SplitTag::HoldoutMesh])?;
            let mut sink: Box<dyn Write> = match &log {
                Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p)?)),
                None => Box::new(std::io::stdout()),
            };
            let mut meshes: Vec<&str> = train_set.iter().map(|t| t.meta.mesh_id.as_str()).collect();
            meshes.dedup();
            writeln!(
                sink,
                "{}",
                json!({"event": "start", "mode": mode, "train_samples": train_set.len(), "holdout_samples": holdout.len(), "train_meshes": meshes, "train_cfg": tc})
            )?;
            let mut io_err = None;
            let outcome = train(&train_set, &holdout, NetConfig::new(manifest.grid_dim), &tc, mode, |r| {
                let line = json!({"event": "epoch", "record": r});
                if let Err(e) = writeln!(sink, "{line}").and_then(|_| sink.flush()) {
                    io_err.get_or_insert(e);
                }
            })?;
            if let Some(e) = io_err {
                return Err(e.into());
            }
            let last = outcome.history.last().cloned();
            let metrics = json!({"history": outcome.history});
            Checkpoint::new(outcome.final_params.clone(), tc, mode, tc.epochs, metrics.clone()).save(&out)?;
            if let Some(b) = best_out {
                Checkpoint::new(outcome.best_params.clone(), tc, mode, outcome.best_epoch, metrics).save(&b)?;
            }
            writeln!(sink, "{}", json!({"event": "done", "checkpoint": out, "best_epoch": outcome.best_epoch, "last": last}))?;
        }
        Command::Complete {
            method,
            data,
            sample,
            mut depth_cloud,
            mut tactile_cloud,
            mut depth_grid,
            mut tactile_grid,
            checkpoint,
            camera_origin,
            eval_dim,
            threshold,
            gpis_config,
            out,
            timing,
        } => {
            let mut gpis: GpisConfig = match gpis_config {
                Some(p) => read_json(&p)?,
                None => GpisConfig::default(),
            };
            if let (Some(root), Some(stem)) = (&data, &sample) {
                let manifest = load_manifest(root)?;
                let entry = manifest
                    .samples
                    .iter()
                    .find(|s| &s.stem == stem)
                    .ok_or_else(|| Error::InvalidInput(format!("no sample {stem} in {}", root.display())))?;
                gpis.seed = entry.seed;
                depth_cloud.get_or_insert(entry.path(root, "depth.xyz"));
                tactile_cloud.get_or_insert(entry.path(root, "tactile.xyz"));
                depth_grid.get_or_insert(entry.path(root, "depth.vtg"));
                tactile_grid.get_or_insert(entry.path(root, "tactile.vtg"));
            }
            let smooth = SmoothParams::default();
            let origin = parse_point(&camera_origin)?;
            let need = |p: &Option<PathBuf>, what: &str| p.clone().ok_or_else(|| Error::InvalidInput(format!("--{what} is required for {method}")));
            let clouds = || -> Result<(PointCloud, PointCloud)> {
                let d = xyz::read(&need(&depth_cloud, "depth-cloud")?)?;
                let t = match &tactile_cloud {
                    Some(p) => xyz::read(p)?,
                    None => PointCloud::default(),
                };
                Ok((d, t))
            };
            let grids = || -> Result<_> {
                let d = read_vtg(&need(&depth_grid, "depth-grid")?)?;
                let t = match &tactile_grid {
                    Some(p) => read_vtg(p)?,
                    None => visuotactile::VoxelGrid::empty(*d.frame()),
                };
                Ok((d, t))
            };
            let start;
            let mesh = match method {
                Method::Partial | Method::Gpis => {
                    let (d, t) = clouds()?;
                    let frame = grids()?.0.frame().resampled(eval_dim)?;
                    start = Instant::now();
                    if method == Method::Partial {
                        partial_completion(&d, &t, &frame, smooth)?
                    } else {
                        gpis_completion(&d, &t, &gpis, &origin, &frame)?
                    }
                }
                Method::Hull => {
                    let (d, t) = clouds()?;
                    start = Instant::now();
                    convex_hull_completion(&d, &t, smooth)?
                }
                Method::CnnDepth | Method::CnnTactile => {
                    let ck = Checkpoint::load(need(&checkpoint, "checkpoint")?)?;
                    let (d, t) = grids()?;
                    let mode = if method == Method::CnnDepth { InputMode::DepthOnly } else { InputMode::TactileAndDepth };
                    start = Instant::now();
                    cnn_completion_at(&ck.params, &d, &t, mode, threshold, smooth)?
                }
                Method::Oracle => return Err(Error::MissingMethod("the oracle method only exists inside eval".into())),
            };
            let seconds = start.elapsed().as_secs_f64();
            write_obj(&out, &mesh)?;
            let record = json!({"method": method, "seconds": seconds, "vertices": mesh.vertices.len(), "faces": mesh.faces.len(), "mesh": out});
            match timing {
                Some(p) => std::fs::write(p, record.to_string())?,
                None => println!("{record}"),
            }
        }
        Command::Eval {
            data,
            methods,
            depth_ckpt,
            tactile_ckpt,
            splits,
            out,
            config,
            eval_dim,
            hausdorff_samples,
            repeats,
            threshold,
        } => {
            let cfg = experiment_config(&data, config.as_deref())?;
            let manifest = load_manifest(&data)?;
            let splits = splits.iter().map(|s| parse_split(s)).collect::<Result<Vec<_>>>()?;
            let depth = depth_ckpt.map(Checkpoint::load).transpose()?;
            let tactile = tactile_ckpt.map(Checkpoint::load).transpose()?;
            let mut inputs = BenchmarkInputs::new(&data, &manifest);
            inputs.cnn_depth = depth.as_ref().map(|c| &c.params);
            inputs.cnn_tactile = tactile.as_ref().map(|c| &c.params);
            inputs.gpis = cfg.gpis;
            inputs.smooth = cfg.smooth;
            inputs.eval_dim = eval_dim.unwrap_or(cfg.eval_dim);
            inputs.hausdorff_samples = hausdorff_samples.unwrap_or(cfg.hausdorff_samples);
            inputs.timing_repeats = repeats.unwrap_or(cfg.timing_repeats);
            inputs.threshold = threshold.unwrap_or(cfg.threshold);
            let records = run_benchmark(&inputs, &methods, &splits)?;
            write_records(&out, &records)?;
            let failures = records.iter().filter(|r| r.failed()).count();
            println!("{}", json!({"records": records.len(), "failures": failures, "out": out}));
        }
        Command::Report { records, out_dir } => {
            let rs = read_records(&records)?;
            let tables = Tables::build(&rs);
            tables.write(&out_dir)?;
            println!("jaccard\n{}\nhausdorff_mm\n{}\ntiming\n{}", tables.jaccard, tables.hausdorff, tables.timing);
            if let Some(d) = &tables.delta {
                println!("delta\n{d}");
            }
        }
    }
    Ok(())
}

fn main() {
    env_logger::init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("vtg: {e}");
        std::process::exit(1);
    }
}
