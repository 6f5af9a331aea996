//! Scenario documents, the runner, output files and the command-line tool.

use std::path::Path;
use std::process::Command;

use twophoton::scenarios::{self, parse_scenario, to_json, RunOptions};
use twophoton::Error;

const MINIMAL: &str = r#"{
  "schema_version": 1,
  "name": "minimal",
  "grid": { "n": 8, "dx": 1.0 },
  "wavelength": 5e-7,
  "sources": [ { "label": "pair", "source": { "type": "entangled_delta", "amplitude": { "kind": "uniform" } } } ],
  "arm1": [ { "type": "identity" } ],
  "arm2": [ { "type": "identity" } ],
  "measurements": [ { "kind": "marginal_2" } ]
}"#;

fn field_of(e: Error) -> String {
    match e {
        Error::Validation { field, .. } => field,
        Error::Parse { path, .. } => path,
        other => panic!("expected a document error, got {other}"),
    }
}

fn edit(f: impl FnOnce(&mut serde_json::Value)) -> String {
    let mut v: serde_json::Value = serde_json::from_str(MINIMAL).unwrap();
    f(&mut v);
    v.to_string()
}

#[test]
fn minimal_document_parses() {
    let s = parse_scenario(MINIMAL).unwrap();
    assert_eq!(s.grid.n, 8);
    assert_eq!(s.sources.len(), 1);
}

#[test]
fn negative_dx_names_the_field() {
    let text = edit(|v| v["grid"]["dx"] = (-1.0).into());
    assert_eq!(field_of(parse_scenario(&text).unwrap_err()), "grid.dx");
}

#[test]
fn marginal_without_arm2_is_rejected() {
    let text = edit(|v| {
        v.as_object_mut().unwrap().remove("arm2");
    });
    let e = parse_scenario(&text).unwrap_err();
    assert!(e.is_validation());
    assert!(field_of(e).starts_with("measurements[0]"));
}

#[test]
fn unknown_keys_are_rejected_with_a_path() {
    let text = edit(|v| v["grid"]["spacing"] = 1.0.into());
    let e = parse_scenario(&text).unwrap_err();
    assert!(matches!(e, Error::Parse { .. }));
    assert!(field_of(e).starts_with("grid"));
    let text = edit(|v| v["arm1"][0]["gain"] = 2.0.into());
    assert!(parse_scenario(&text).is_err());
}

#[test]
fn wrong_schema_version_is_rejected() {
    let text = edit(|v| v["schema_version"] = 2.into());
    assert_eq!(field_of(parse_scenario(&text).unwrap_err()), "schema_version");
}

#[test]
fn range_checks_name_nested_fields() {
    let text = edit(|v| v["arm1"][0] = serde_json::json!({ "type": "free_space", "distance": -0.1 }));
    assert_eq!(field_of(parse_scenario(&text).unwrap_err()), "arm1[0].distance");
    let text = edit(|v| v["sources"][0]["source"]["amplitude"] = serde_json::json!({ "kind": "gaussian", "waist": 0.0 }));
    assert_eq!(field_of(parse_scenario(&text).unwrap_err()), "sources[0].source.amplitude.waist");
    let text = edit(|v| v["measurements"][0] = serde_json::json!({ "kind": "sample", "n": 10 }));
    assert_eq!(field_of(parse_scenario(&text).unwrap_err()), "measurements[0].seed");
}

#[test]
fn demos_round_trip_through_json() {
    for s in scenarios::demo_catalog() {
        let again = parse_scenario(&to_json(&s)).unwrap();
        assert_eq!(again, s, "demo {}", s.name);
    }
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let s = scenarios::demo("ghost-diffraction").unwrap();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let one = RunOptions {
        jobs: Some(1),
        ..Default::default()
    };
    let four = RunOptions {
        jobs: Some(4),
        ..Default::default()
    };
    scenarios::run_scenario(&s, a.path(), &one).unwrap();
    scenarios::run_scenario(&s, b.path(), &four).unwrap();
    let (fa, fb) = (read_all(a.path()), read_all(b.path()));
    assert!(fa.iter().any(|(n, _)| n == "counts_entangled.csv"));
    assert_eq!(fa, fb);
}

#[test]
fn outputs_follow_the_manifest() {
    let s = scenarios::demo("factorizable-null").unwrap();
    let dir = tempfile::tempdir().unwrap();
    let summary = scenarios::run_scenario(&s, dir.path(), &RunOptions::default()).unwrap();
    for files in summary.files.values() {
        for f in files {
            assert!(dir.path().join(f).is_file(), "{f} missing");
        }
    }
    let text = std::fs::read_to_string(dir.path().join("summary.json")).unwrap();
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(json["scenario"], "factorizable-null");
    assert!(json["metrics"]["max_rel_diff_1_product"].as_f64().unwrap() <= 1e-10);
    assert!(json["metrics"]["max_rel_diff_2_product"].as_f64().unwrap() <= 1e-10);
    let csv = std::fs::read_to_string(dir.path().join("marginal_1_product.csv")).unwrap();
    assert!(csv.starts_with("x,p\n"));
    assert_eq!(csv.lines().count(), 257);
    let pgm = std::fs::read_to_string(dir.path().join("joint_product.pgm")).unwrap();
    assert!(pgm.starts_with("P2\n256 256\n65535\n"));
}

#[test]
fn format_override_limits_files() {
    let s = scenarios::demo("factorizable-null").unwrap();
    let dir = tempfile::tempdir().unwrap();
    let opts = RunOptions {
        formats: Some(vec![scenarios::Format::Csv]),
        ..Default::default()
    };
    scenarios::run_scenario(&s, dir.path(), &opts).unwrap();
    let names: Vec<String> = read_all(dir.path()).into_iter().map(|f| f.0).collect();
    assert!(names.iter().all(|n| n.ends_with(".csv")), "{names:?}");
}

#[test]
fn absorbing_gate_reports_measurement_context() {
    let text = edit(|v| v["arm1"][0] = serde_json::json!({ "type": "mask", "profile": { "kind": "opaque" } }));
    let s = parse_scenario(&text).unwrap();
    let e = scenarios::compute(&s, &RunOptions::default()).unwrap_err();
    assert!(!e.is_validation());
    assert!(e.to_string().contains("marginal_2_pair"), "{e}");
}

#[test]
fn demo_claims_hold() {
    let m = scenarios::compute(&scenarios::demo("isoplanatic-correlated").unwrap(), &RunOptions::default())
        .unwrap()
        .metrics;
    assert!(m["max_rel_diff_1_correlated"] <= 1e-10);
    assert!(m["max_rel_diff_1_entangled"] > 1e-2);
    let m = scenarios::compute(&scenarios::demo("partial-coherence").unwrap(), &RunOptions::default())
        .unwrap()
        .metrics;
    let v = ["coherent", "schell_200um", "schell_100um", "schell_50um"].map(|k| m[&format!("visibility_{k}")]);
    assert!(v.windows(2).all(|p| p[1] < p[0]), "{v:?}");
    let m = scenarios::compute(&scenarios::demo("ghost-imaging").unwrap(), &RunOptions::default())
        .unwrap()
        .metrics;
    assert!(m["visibility_entangled"] > 0.9);
    assert!(m["visibility_correlated"] < 0.05);
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_twophoton"))
}

#[test]
fn cli_exit_codes() {
    let out = cli().arg("list-demos").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).lines().count() >= 6);

    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.json");
    std::fs::write(&good, MINIMAL).unwrap();
    assert_eq!(cli().arg("validate").arg(&good).output().unwrap().status.code(), Some(0));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, edit(|v| v["grid"]["dx"] = (-1.0).into())).unwrap();
    let out = cli().arg("validate").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid.dx"));

    let dark = dir.path().join("dark.json");
    std::fs::write(
        &dark,
        edit(|v| v["arm1"][0] = serde_json::json!({ "type": "mask", "profile": { "kind": "opaque" } })),
    )
    .unwrap();
    let status = cli().arg("run").arg(&dark).arg("--out").arg(dir.path().join("o")).output().unwrap().status;
    assert_eq!(status.code(), Some(3));

    let out_dir = dir.path().join("run");
    let status = cli()
        .args(["run", "factorizable-null", "--format", "csv,json", "--jobs", "2", "--out"])
        .arg(&out_dir)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(out_dir.join("summary.json").is_file());
    assert!(!out_dir.join("joint_product.pgm").exists());

    let status = cli().args(["run", "no-such-demo", "--out"]).arg(&out_dir).output().unwrap().status;
    assert_eq!(status.code(), Some(2));
}
