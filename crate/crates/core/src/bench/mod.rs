//! Dataset generation, experiment splits, benchmark evaluation and
//! result tables.

mod config;
mod dataset;
mod eval;
mod pairs;
mod report;

pub use config::{ExperimentConfig, SplitSpec, ViewConfig};
pub use dataset::{
    generate_dataset, generate_dataset_from_meshes, load_manifest, load_sample, load_triplets, DatasetManifest, LoadedSample, MeshEntry,
    MeshSource, SampleEntry, MANIFEST_FILE,
};
pub use eval::{run_benchmark, BenchmarkInputs, EvalRecord, Method};
pub use pairs::{gen_shape_dataset, ShapeDatasetConfig};
pub use report::{aggregate, delta_report, read_records, write_records, AggregateRow, DeltaRow, Tables};
