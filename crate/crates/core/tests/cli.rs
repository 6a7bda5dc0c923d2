use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use conelab::cli::run_with;
use conelab::io::{parse_coo, parse_vector_csv};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("conelab").chain(args.iter().copied());
    let code = run_with(argv.map(std::ffi::OsString::from), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

const SMALL_CONFIG: &str = r#"{
  "n": 3,
  "x_max": 1.0,
  "sphere_l_max": 2,
  "h_values": [0.5, 0.25],
  "alpha": -0.5,
  "tau": -1.5,
  "grid": { "nodes": 48, "grading": 2.0 },
  "experiments": ["index-family"]
}"#;

fn small_config(dir: &Path) -> PathBuf {
    let p = dir.join("small.json");
    fs::write(&p, SMALL_CONFIG).unwrap();
    p
}

#[test]
fn malformed_config_exits_2_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    fs::write(&p, "{\n  \"n\": 3,\n  \"x_max\": \"far\"\n}").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_conelab"))
        .args(["verify", "index-family", "--config"])
        .arg(&p)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("x_max") && err.contains("line 3"), "{err}");
}

#[test]
fn unknown_key_and_unknown_experiment_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("typo.json");
    fs::write(&p, SMALL_CONFIG.replace("\"tau\"", "\"tua\"")).unwrap();
    let (code, _, err) = run(&["run", "--config", p.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("tua"), "{err}");
    let (code, _, _) = run(&["verify", "no-such-thing", "--config", p.to_str().unwrap()]);
    assert_eq!(code, 2);
}

#[test]
fn help_exits_0() {
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("spectrum"));
}

#[test]
fn spectrum_prints_root_pattern() {
    let (code, out, _) = run(&["spectrum", "--n", "3", "--cutoff", "3"]);
    assert_eq!(code, 0);
    assert!(out.lines().any(|l| l == "roots: 0, i, -i, 2i, -2i, 3i, -3i"), "{out}");
    let (code, out, _) = run(&["spectrum", "--n", "3", "--cutoff", "2", "--json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v.is_object());
}

#[test]
fn verify_domain_equivalence_on_bundled_config_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("n3_cone.json");
    let (code, out, err) = run(&[
        "verify",
        "domain-equivalence",
        "--config",
        cfg.to_str().unwrap(),
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{out}{err}");
    let saved = fs::read_to_string(dir.path().join("domain-equivalence.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&saved).unwrap();
    assert_eq!(v["verdict"], "PASS");
    assert_eq!(v["experiment"], "domain-equivalence");
}

#[test]
fn eig_and_norms_csv_are_byte_identical_on_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let c = cfg.to_str().unwrap();
    let mut outputs = Vec::new();
    for k in 0..2 {
        let eig = dir.path().join(format!("eig{k}.csv"));
        let vec = dir.path().join(format!("vec{k}.csv"));
        let norms = dir.path().join(format!("norms{k}.csv"));
        let (code, _, err) = run(&[
            "eig", "--config", c, "--mode", "1", "--count", "8",
            "--output", eig.to_str().unwrap(), "--vectors", vec.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "{err}");
        let (code, _, err) = run(&[
            "norms", "--config", c, "--s", "1", "--alpha", "-0.5", "--tau", "-1.5", "--eigs", "5",
            "--output", norms.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "{err}");
        outputs.push([fs::read(&eig).unwrap(), fs::read(&vec).unwrap(), fs::read(&norms).unwrap()]);
    }
    assert_eq!(outputs[0], outputs[1]);
    let header = String::from_utf8(outputs[0][2].clone()).unwrap();
    assert!(header.starts_with("h,ratio,argmax_trial_id,scaled_ratio,predicted_power"));
}

#[test]
fn resolvent_round_trips_through_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let c = cfg.to_str().unwrap();
    let input = dir.path().join("f.csv");
    let xs: Vec<f64> = conelab::radial::RadialGrid::graded(1.0, 48, 2.0).unwrap().dof_positions();
    let vals: Vec<_> = xs.iter().map(|&x| num_complex::Complex64::new(1.0 - x * x, 0.0)).collect();
    fs::write(&input, conelab::io::write_vector_csv(&xs, &vals)).unwrap();
    let output = dir.path().join("u.csv");
    let (code, _, err) = run(&[
        "resolvent", "--config", c, "--h", "0.5", "--lambda", "-1,0.5",
        "--input", input.to_str().unwrap(), "--output", output.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let u = parse_vector_csv(&fs::read_to_string(&output).unwrap()).unwrap();
    assert_eq!(u.len(), xs.len());
    // A_h ≥ 1 and |λ − 1| ≥ 2 bound the solution by the data
    assert!(u.iter().all(|z| z.norm() <= 1.0));
}

#[test]
fn export_writes_parseable_symmetric_coo() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = dir.path().join("s.coo");
    let (code, _, err) = run(&[
        "export", "--config", cfg.to_str().unwrap(), "--h", "0.25", "--matrix", "mass",
        "--output", out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let m = parse_coo(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(m.rows, 48);
    let t = m.to_tridiagonal().unwrap();
    assert!(t.diag.iter().all(|&d| d > 0.0));
}

#[test]
fn index_extended_union_op() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    fs::write(&a, r#"{"cutoff": 3, "entries": [{"re": 0, "im": 0, "k": 0}]}"#).unwrap();
    fs::write(&b, r#"[{"re": 0, "k": 0}, {"re": 1, "k": 0}]"#).unwrap();
    let (code, out, err) = run(&[
        "index", "--op", "extended-union", "--a", a.to_str().unwrap(), "--b", b.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let set = conelab::io::parse_index_set(&out).unwrap();
    assert_eq!(set.max_log(num_complex::Complex64::new(0.0, 0.0)), Some(1));
    let (code, _, _) = run(&["index", "--op", "sum", "--a", a.to_str().unwrap()]);
    assert_eq!(code, 2);
}

#[test]
fn run_reports_every_listed_experiment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let outdir = dir.path().join("reports");
    let (code, _, err) = run(&[
        "run", "--config", cfg.to_str().unwrap(), "--output-dir", outdir.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let first = fs::read(outdir.join("index-family.json")).unwrap();
    run(&["run", "--config", cfg.to_str().unwrap(), "--output-dir", outdir.to_str().unwrap()]);
    assert_eq!(first, fs::read(outdir.join("index-family.json")).unwrap());
}
