//! The binary end to end: exit codes, error objects, artifacts and the
//! determinism of its reports.

use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_downfold");

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env("DOWNFOLD_THREADS", "2").output().expect("binary runs")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn stderr_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stderr)))
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn run_to(dir: &Path, input: &str, extra: &[&str]) -> Value {
    let inp = fixture(input);
    let mut args = vec!["run", inp.to_str().unwrap(), "--out", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = run(&args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    read_json(&dir.join("summary.json"))
}

#[test]
fn missing_input_exits_two() {
    let o = run(&["run", "/nonexistent/h2.fcidump"]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr_json(&o);
    assert!(e["error"]["message"].as_str().unwrap().contains("input not found"));
    assert_eq!(e["error"]["exit_code"], 2);
}

#[test]
fn malformed_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.fcidump");
    std::fs::write(&p, "not a namelist\n").unwrap();
    let o = run(&["run", p.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"]["kind"], "input");
}

#[test]
fn bad_flags_exit_two() {
    let h2 = fixture("h2_sto3g.fcidump");
    for extra in [["--htf-mult", "0.3"], ["--tol", "-1"]] {
        let mut args = vec!["run", h2.to_str().unwrap()];
        args.extend_from_slice(&extra);
        let o = run(&args);
        assert_eq!(o.status.code(), Some(2), "{extra:?}");
        assert_eq!(stderr_json(&o)["error"]["kind"], "usage");
    }
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn h2_run_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let s = run_to(dir.path(), "h2_sto3g.fcidump", &[]);
    let e = s["correlation_energy"].as_f64().unwrap();
    assert!(e.is_finite() && e < 0.0, "{e}");
    assert_eq!(s["hf_check"]["passed"], true);
    assert!(s["residuals"].as_array().unwrap().iter().all(|r| r["converged"] == true));
    for f in ["trace.csv", "trace.json", "factorization.json", "summary.json", "dims.json", "estimate.json", "metadata.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let csv = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(csv.starts_with("step,orbital,iters,residual_norm,e_step,e_cum,wall_ms\n"));
    assert_eq!(csv.lines().count(), 2);
    let f = read_json(&dir.path().join("factorization.json"));
    assert_eq!(f["input"]["n_htf"].as_u64().unwrap(), 2 * f["input"]["n_aux"].as_u64().unwrap());
}

#[test]
fn dense_and_exact_factorized_agree() {
    for input in ["h2_sto3g.fcidump", "h2o_sto3g.fcidump"] {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let dense = run_to(a.path(), input, &["--dense-only"]);
        let fact = run_to(b.path(), input, &["--factorized", "--exact-rank"]);
        let d = (dense["correlation_energy"].as_f64().unwrap() - fact["correlation_energy"].as_f64().unwrap()).abs();
        assert!(d < 1e-6, "{input}: {d:e}");
        let steps = read_json(&b.path().join("factorization.json"))["steps"].clone();
        assert!(steps.as_array().unwrap().iter().any(|s| !s.is_null()));
    }
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    let h2 = fixture("h2_sto3g.fcidump");
    std::fs::write(&cfg, format!("input = {:?}\ntol = 1e-4\nmode = \"factorized\"\n", h2.to_str().unwrap())).unwrap();
    let out = dir.path().join("o");
    let o = run(&["run", "--config", cfg.to_str().unwrap(), "--tol", "1e-10", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s = read_json(&out.join("summary.json"));
    assert_eq!(s["config"]["tol"].as_f64(), Some(1e-10));
    assert_eq!(s["mode"], "factorized");
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let files = ["trace.json", "summary.json", "factorization.json", "dims.json", "estimate.json"];
    let mut snaps = Vec::new();
    for _ in 0..2 {
        run_to(dir.path(), "h2o_sto3g.fcidump", &["--factorized", "--seed", "3"]);
        snaps.push(files.map(|f| std::fs::read(dir.path().join(f)).unwrap()));
    }
    for (k, f) in files.iter().enumerate() {
        assert_eq!(snaps[0][k], snaps[1][k], "{f}");
    }
    let meta = read_json(&dir.path().join("metadata.json"));
    assert!(meta["generated_unix_ms"].as_u64().unwrap() > 0);
}

#[test]
fn verify_blockenc_passes() {
    let o = run(&["verify", "blockenc", "--seed", "1", "--size", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = stdout_json(&o);
    assert_eq!(r["passed"], true);
    for p in ["matmul_isometry", "matmul_unitary_only", "tensor_product", "tensor_contraction", "dot", "hadamard"] {
        assert!(r["worst"][p].as_f64().unwrap() < 1e-10, "{p}");
    }
    let again = run(&["verify", "blockenc", "--seed", "1", "--size", "4"]);
    assert_eq!(o.stdout, again.stdout);
}

#[test]
fn verify_oracle_two_orbitals_passes() {
    let o = run(&["verify", "oracle", "--size", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = stdout_json(&o);
    for p in ["bloch", "nilpotency", "projector", "spectrum", "residual_oracle"] {
        assert!(r["worst"][p].as_f64().is_some(), "{p}");
    }
}

#[test]
fn verify_failure_serializes_counterexample() {
    // With three orbitals P holds excited determinants the amplitudes do
    // not decouple; only the reference column is solved for.
    let o = run(&["verify", "oracle", "--size", "3", "--cases", "4"]);
    assert_eq!(o.status.code(), Some(1));
    let e = stderr_json(&o);
    let cx = &e["error"]["counterexample"];
    assert_eq!(cx["suite"], "oracle");
    assert!(cx["failed"].as_array().unwrap().iter().any(|c| c["property"] == "bloch"));
}

#[test]
fn verify_factorization_passes() {
    let o = run(&["verify", "factorization", "--size", "4", "--cases", "6"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn unknown_suite_exits_two() {
    let o = run(&["verify", "bogus"]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr_json(&o);
    assert_eq!(e["error"]["kind"], "usage");
    assert!(e["error"]["message"].as_str().unwrap().contains("oracle"));
}

#[test]
fn estimate_retinol_quotes_table() {
    let o = run(&["estimate", "--n-o", "79", "--n-v", "992", "--n-aux", "2496", "--n-htf", "2496"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = stdout_json(&o);
    assert_eq!(r["table_reference"]["qubits"], 108);
    assert_eq!(r["table_reference"]["name"], "retinol");
    assert_eq!(r["estimate"]["breakdown"].as_array().unwrap().len(), 11);
    let named = stdout_json(&run(&["estimate", "--molecule", "retinol"]));
    assert_eq!(named, r);
    let other = stdout_json(&run(&["estimate", "--n-o", "3", "--n-v", "5", "--n-aux", "20"]));
    assert!(other["table_reference"].is_null());
}

#[test]
fn estimate_half_precision_is_twice_the_polynomials() {
    for model in ["diophantine", "solovay-kitaev"] {
        let r = stdout_json(&run(&["estimate", "--n-o", "4", "--n-v", "9", "--n-aux", "30", "--eps", "0.5", "--model", model]));
        let poly: u64 = r["estimate"]["breakdown"].as_array().unwrap().iter().map(|e| e["polynomial"].as_u64().unwrap()).sum();
        assert_eq!(r["estimate"]["depth"].as_u64().unwrap(), 2 * poly, "{model}");
    }
}

#[test]
fn diophantine_is_cheaper() {
    for eps in ["1e-2", "1e-3", "1e-6"] {
        let depth = |model| {
            let r = stdout_json(&run(&["estimate", "--molecule", "beta-carotene", "--eps", eps, "--model", model]));
            r["estimate"]["depth"].as_u64().unwrap()
        };
        assert!(depth("diophantine") < depth("solovay-kitaev"), "{eps}");
    }
}

#[test]
fn estimate_from_run_directory() {
    let dir = tempfile::tempdir().unwrap();
    run_to(dir.path(), "h2o_sto3g.fcidump", &[]);
    let o = run(&["estimate", "--dims-from", dir.path().to_str().unwrap(), "--eps", "1e-3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = stdout_json(&o);
    let dims = read_json(&dir.path().join("dims.json"));
    assert_eq!(r["estimate"]["dims"], dims);
    assert_eq!(r["estimate"]["log_factor"], 10);
    let written = read_json(&dir.path().join("estimate.json"));
    assert_eq!(written["estimate"]["dims"], dims);
}

#[test]
fn estimate_without_dims_exits_two() {
    let o = run(&["estimate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr_json(&o)["error"]["message"].as_str().unwrap().contains("missing dims"));
    assert_eq!(run(&["estimate", "--molecule", "aspirin"]).status.code(), Some(2));
    assert_eq!(run(&["estimate", "--n-o", "2", "--n-v", "3", "--n-aux", "5", "--eps", "1.5"]).status.code(), Some(2));
}

#[test]
fn factorize_writes_container() {
    let dir = tempfile::tempdir().unwrap();
    let h2o = fixture("h2o_sto3g.fcidump");
    let o = run(&["factorize", h2o.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "--seed", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rep = stdout_json(&o);
    assert!(rep["eri_relative_error"].as_f64().unwrap() < 1e-3);
    let c = read_json(&dir.path().join("factors.json"));
    let n_aux = rep["n_aux"].as_u64().unwrap();
    assert_eq!(c["cholesky_l"]["dims"][0].as_u64(), Some(n_aux));
    assert_eq!(c["cp_left"]["rank"].as_u64(), Some(2 * n_aux));
    let h = c["cp_left"]["history"].as_array().unwrap();
    assert!(h.windows(2).all(|w| w[1].as_f64().unwrap() <= w[0].as_f64().unwrap() + 1e-12));
}
