use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn sip(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sip"))
        .args(args)
        .env("SIP_OUT_DIR", out)
        .output()
        .expect("sip runs")
}

fn json(out: &Path, args: &[&str]) -> (Value, i32) {
    let mut all = args.to_vec();
    all.push("--json");
    let o = sip(out, &all);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!("bad JSON ({e}): {}", String::from_utf8_lossy(&o.stdout))
    });
    (v, o.status.code().unwrap())
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn list_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let o = sip(tmp.path(), &["list"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 11);
    let (v, code) = json(tmp.path(), &["list"]);
    assert_eq!(code, 0);
    assert_eq!(v.as_array().unwrap().len(), 10);
    let (v, _) = json(tmp.path(), &["list", "--family", "morse"]);
    assert_eq!(v["name"], "morse");
    assert_eq!(v["parameters"].as_array().unwrap().len(), 3);
}

#[test]
fn verify_examples() {
    let tmp = tempfile::tempdir().unwrap();
    let (v, code) = json(tmp.path(), &["verify", "shifted-oscillator", "--omega", "2", "--b", "0"]);
    assert_eq!(code, 0);
    assert!((num(&v["report"]["estimated_constant"]) - 2.0).abs() < 1e-10);
    assert_eq!(v["report"]["passed"], true);
    let (v, code) = json(tmp.path(), &["verify", "morse", "--A", "4", "--B", "4", "--a", "1"]);
    assert_eq!(code, 0);
    assert!((num(&v["report"]["estimated_constant"]) - 7.0).abs() < 1e-10);
}

#[test]
fn usage_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    for args in [
        vec!["verify", "morse", "--A", "-1"],
        vec!["verify", "no-such-family"],
        vec!["verify", "morse", "--omega", "2"],
        vec!["construct", "--K", "1", "--branch", "sinh", "--alpha", "1", "--lambda", "1"],
        vec!["radial", "--ell", "0"],
        vec!["bogus-command"],
    ] {
        let o = sip(tmp.path(), &args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn a_wrong_ladder_fails_verification() {
    let tmp = tempfile::tempdir().unwrap();
    let (_, code) = json(tmp.path(), &["3d", "--seed", "a0=2,a1=1", "--lambda", "2", "--mu", "0.5"]);
    assert_eq!(code, 1);
    let (v, code) = json(tmp.path(), &["scan", "morse", "--candidate", "A=1", "--candidate", "B=1"]);
    assert_eq!(code, 1);
    assert_eq!(v["candidates"][0]["passed"], false);
}

#[test]
fn spectrum_examples() {
    let tmp = tempfile::tempdir().unwrap();
    let (v, code) = json(tmp.path(), &["spectrum", "shifted-oscillator", "--omega", "2", "-n", "4"]);
    assert_eq!(code, 0);
    let e: Vec<f64> = v["algebraic"]["energies"].as_array().unwrap().iter().map(num).collect();
    assert_eq!(e, vec![0.0, 2.0, 4.0, 6.0]);

    let (v, code) = json(tmp.path(), &["spectrum", "morse", "--A", "4", "--B", "4", "--a", "1", "-n", "4", "--oracle"]);
    assert_eq!(code, 0);
    assert!(num(&v["oracle"]["comparison"]["max_deviation"]) < 1e-3);

    let (v, code) = json(tmp.path(), &["spectrum", "morse", "--A", "2", "--a", "1", "-n", "10"]);
    assert_eq!(code, 3);
    assert_eq!(v["algebraic"]["truncated"], true);

    let (v, _) = json(tmp.path(), &["spectrum", "shifted-oscillator", "--omega", "2", "-n", "3", "--offset", "1"]);
    let e: Vec<f64> = v["algebraic"]["energies"].as_array().unwrap().iter().map(num).collect();
    assert_eq!(e, vec![1.0, 3.0, 5.0]);
}

#[test]
fn spectrum_writes_csv_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let o = sip(tmp.path(), &["spectrum", "shifted-oscillator", "-n", "3", "--wavefunctions"]);
    assert!(o.status.success());
    let dir = tmp.path().join("spectrum-shifted-oscillator");
    let csv = std::fs::read_to_string(dir.join("spectrum.csv")).unwrap();
    assert_eq!(csv, "level,energy\n0,0\n1,2\n2,4\n");
    let wf = std::fs::read_to_string(dir.join("wavefunctions.csv")).unwrap();
    assert!(wf.starts_with("x,psi_0,psi_1,psi_2\n"));
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "spectrum");
    assert_eq!(manifest["all_passed"], true);
    assert_eq!(manifest["inputs"]["family"], "shifted-oscillator");
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 2);
}

#[test]
fn construct_inverse_square() {
    let tmp = tempfile::tempdir().unwrap();
    let (v, code) = json(tmp.path(), &["construct", "--K", "0", "--branch", "linear", "--alpha", "1", "--lambda", "1"]);
    assert_eq!(code, 0);
    assert_eq!(v["descriptor"], "W(x) = 1/x");
    assert_eq!(v["passed"], true);
    assert!(tmp.path().join("construct/superpotential.csv").exists());

    // sin seed with poles inside the sampling interval
    let (v, code) = json(
        tmp.path(),
        &["construct", "--K", "1", "--branch", "sin", "--alpha", "1", "--lambda", "3", "--lo", "0.5", "--hi", "5"],
    );
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["intervals"].as_array().unwrap().len(), 2);
    assert!((num(&v["estimated_constant"]) + 5.0).abs() < 1e-8);

    // K = -1, alpha = 1, lambda = 2: -alpha (2 lambda - alpha) K = 3
    let base = ["construct", "--K", "-1", "--branch", "cosh", "--alpha", "1", "--lambda", "2"];
    let (v, code) = json(tmp.path(), &[&base[..], &["--C", "0.5"]].concat());
    assert_eq!(code, 0, "{v}");
    assert!((num(&v["estimated_constant"]) - 4.0).abs() < 1e-9);
    let (v, code) = json(tmp.path(), &[&base[..], &["--c", "1"]].concat());
    assert_eq!(code, 0, "{v}");
    assert!((num(&v["estimated_constant"]) - 2.25).abs() < 1e-9);
    assert_eq!(v["descriptor"], "W(x) = 2tanh(x) + 0.5");
    // both extensions at once break the ladder
    let (v, code) = json(tmp.path(), &[&base[..], &["--C", "0.5", "--c", "1"]].concat());
    assert_eq!(code, 1);
    assert!(v["expected_constant"].is_null());
}

#[test]
fn three_d_and_radial_examples() {
    let tmp = tempfile::tempdir().unwrap();
    let (v, code) = json(tmp.path(), &["3d", "--seed", "a0=2,a1=1", "--lambda", "2", "--mu", "1"]);
    assert_eq!(code, 0);
    assert_eq!(v["shape_invariance"]["passed"], true);
    let seed: Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("3d/seed.json")).unwrap()).unwrap();
    assert_eq!(seed["K"], 0.0);
    let partners = std::fs::read_to_string(tmp.path().join("3d/partners.csv")).unwrap();
    assert_eq!(partners.lines().count(), 1 + 128 * 128);

    let (v, code) = json(tmp.path(), &["radial", "--ell", "3", "--check-bessel"]);
    assert_eq!(code, 0);
    let rows = v["bessel"].as_array().unwrap();
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| num(&r["recurrence"]) < 1e-8 && num(&r["wronskian"]) < 1e-8));
}

#[test]
fn json_is_byte_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["spectrum", "morse", "-n", "3", "--oracle", "--json"];
    let a = sip(tmp.path(), &args);
    let b = sip(tmp.path(), &args);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn batch_runs_in_order() {
    let tmp = tempfile::tempdir().unwrap();
    let jobs = tmp.path().join("jobs.txt");
    std::fs::write(
        &jobs,
        "# demo\nverify morse\nspectrum morse --A 2 -n 10\n\n3d --seed \"a0=2,a1=1\" --lambda 2\nverify shifted-oscillator\n",
    )
    .unwrap();
    let (v, code) = json(tmp.path(), &["--batch", jobs.to_str().unwrap()]);
    assert_eq!(code, 3);
    let items = v.as_array().unwrap();
    let order: Vec<&str> = items.iter().map(|i| i["job"].as_str().unwrap()).collect();
    assert_eq!(order, ["verify morse", "spectrum morse --A 2 -n 10", "3d --seed \"a0=2,a1=1\" --lambda 2", "verify shifted-oscillator"]);
    let codes: Vec<i64> = items.iter().map(|i| i["exit_code"].as_i64().unwrap()).collect();
    assert_eq!(codes, [0, 3, 0, 0]);
    assert!(tmp.path().join("job-002/spectrum-morse/manifest.json").exists());
    assert!(tmp.path().join("job-003/3d/partners.csv").exists());

    std::fs::write(&jobs, "verify morse\nverify morse --A -1\n").unwrap();
    let o = sip(tmp.path(), &["--batch", jobs.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
