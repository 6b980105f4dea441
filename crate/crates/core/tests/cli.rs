use std::path::Path;
use std::process::{Command, Output};

use visuotactile::bench::load_manifest;
use visuotactile::mesh::io::read_obj;

fn vtg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vtg")).args(args).output().expect("vtg runs")
}

fn ok(args: &[&str]) -> String {
    let out = vtg(args);
    assert!(out.status.success(), "vtg {args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

const SMALL: &str = r#"{"seed": 9, "mesh_count": 4, "holdout_meshes": 1, "mesh_resolution": 32, "grid_dim": 12, "eval_dim": 32,
    "hausdorff_samples": 500, "timing_repeats": 1, "views": {"azimuths": 2, "elevations_deg": [30.0]}, "holdout_views": 1,
    "train": {"epochs": 2, "batch_size": 3}}"#;

#[test]
fn full_pipeline_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let p = |s: &str| dir.path().join(s).display().to_string();
    std::fs::write(p("exp.json"), SMALL).unwrap();
    ok(&["gen-dataset", "--out", &p("data"), "--config", &p("exp.json")]);
    let manifest = load_manifest(Path::new(&p("data"))).unwrap();

    ok(&["train", "--data", &p("data"), "--mode", "depth", "--out", &p("d.vtck"), "--log", &p("d.jsonl")]);
    ok(&["train", "--data", &p("data"), "--mode", "both", "--out", &p("t.vtck"), "--best-out", &p("tb.vtck")]);

    // Split hygiene: the training log lists only training meshes.
    let log = std::fs::read_to_string(p("d.jsonl")).unwrap();
    let start: serde_json::Value = serde_json::from_str(log.lines().next().unwrap()).unwrap();
    let trained: Vec<&str> = start["train_meshes"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert!(!trained.is_empty());
    for id in &manifest.split.as_ref().unwrap().holdout_meshes {
        assert!(!trained.contains(&id.as_str()), "holdout mesh {id} was trained on");
    }
    assert_eq!(log.lines().filter(|l| l.contains("\"epoch\"")).count(), 3);

    ok(&["eval", "--data", &p("data"), "--depth-ckpt", &p("d.vtck"), "--tactile-ckpt", &p("t.vtck"), "--out", &p("r.jsonl")]);
    let records = std::fs::read_to_string(p("r.jsonl")).unwrap();
    assert_eq!(records.lines().count(), manifest.samples.len() * 5);
    let table = ok(&["report", "--records", &p("r.jsonl"), "--out-dir", &p("tables")]);
    assert!(table.contains("cnn-tactile"));
    for f in ["jaccard.csv", "hausdorff.csv", "timing.csv", "delta.csv"] {
        assert!(dir.path().join("tables").join(f).exists(), "{f}");
    }

    let sample = &manifest.samples[0].stem;
    for method in ["partial", "hull", "gpis", "cnn-depth"] {
        let obj = p(&format!("{method}.obj"));
        let timing = p(&format!("{method}.json"));
        ok(&["complete", "--method", method, "--data", &p("data"), "--sample", sample, "--checkpoint", &p("d.vtck"), "--out", &obj, "--timing", &timing]);
        let mesh = read_obj(Path::new(&obj)).unwrap();
        assert!(!mesh.faces.is_empty(), "{method}");
        let t: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&timing).unwrap()).unwrap();
        assert!(t["seconds"].as_f64().unwrap() > 0.0);
    }
}

#[test]
fn shape_pairs_from_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pairs").display().to_string();
    ok(&["gen-shapes", "--out", &out, "--train", "6", "--holdout", "2", "--grid-dim", "8"]);
    let m = load_manifest(Path::new(&out)).unwrap();
    assert_eq!(m.samples.len(), 8);
    assert_eq!(m.grid_dim, 8);
}

#[test]
fn errors_exit_nonzero_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope").display().to_string();
    for args in [
        vec!["train", "--data", &missing, "--mode", "depth", "--out", "x.vtck"],
        vec!["complete", "--method", "partial", "--out", "x.obj"],
        vec!["report", "--records", &missing, "--out-dir", &missing],
    ] {
        let out = vtg(&args);
        assert!(!out.status.success(), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("vtg: "));
    }
    assert!(!vtg(&["train", "--mode", "sideways"]).status.success());
}
