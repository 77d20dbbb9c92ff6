use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ionqv"))
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

/// Copy the shipped configs and their inputs into a scratch directory.
fn scratch_configs() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    for entry in fs::read_dir(configs_dir()).unwrap() {
        let p = entry.unwrap().path();
        if p.is_file() {
            fs::copy(&p, dir.path().join(p.file_name().unwrap())).unwrap();
        }
    }
    dir
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn smoke_configs_succeed() {
    let dir = scratch_configs();
    let mut seen = 0;
    for entry in fs::read_dir(dir.path()).unwrap() {
        let p = entry.unwrap().path();
        let name = p.file_name().unwrap().to_string_lossy().into_owned();
        if !name.ends_with("_smoke.json") {
            continue;
        }
        seen += 1;
        let o = run(&["run", p.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{name}: {}", String::from_utf8_lossy(&o.stderr));
        let stem = name.trim_end_matches(".json");
        let out = fs::read_dir(dir.path().join("out"))
            .unwrap()
            .map(|e| e.unwrap().path())
            .find(|q| q.file_stem().unwrap().to_string_lossy() == stem)
            .unwrap_or_else(|| panic!("{name}: no output"));
        assert!(fs::metadata(&out).unwrap().len() > 0, "{name}: empty output");
    }
    assert_eq!(seen, 6);
}

#[test]
fn xeb_is_deterministic() {
    let args = ["xeb", "--qubits", "6", "--n", "1,2", "--circuits", "3", "--seed", "5"];
    let a = run(&args);
    let b = run(&["--threads", "1", args[0], args[1], args[2], args[3], args[4], args[5], args[6], args[7], args[8]]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("N,n,policy,gate_count,statistic,stderr,seed"));
    assert_eq!(lines.count(), 2);
}

#[test]
fn repcode_is_deterministic_across_threads() {
    let base = ["repcode", "--l", "5", "--p", "0.03", "--shots", "3000", "--seed", "9"];
    let a = run(&base);
    let mut threaded = vec!["--threads", "3"];
    threaded.extend(base);
    let b = run(&threaded);
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn missing_seed_is_a_config_error() {
    let o = run(&["xeb", "--qubits", "4"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("seed"));
}

#[test]
fn bad_inputs_exit_2() {
    assert_eq!(code(&run(&["bv", "--secret", "10x"])), 2);
    assert_eq!(code(&run(&["manifold", "--n", "5"])), 2);
    assert_eq!(code(&run(&["run", "/definitely/not/here.json"])), 2);
    assert_eq!(code(&run(&["--threads", "0", "bv", "--secret", "1"])), 2);
}

#[test]
fn unknown_config_keys_are_rejected_with_their_path() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.json");
    fs::write(&p, r#"{"command": "repcode", "seed": 1, "shotz": 10}"#).unwrap();
    let o = run(&["run", p.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("shotz"));
    fs::write(&p, r#"{"command": "repcode", "seed": 1, "p": [0.01, "x"]}"#).unwrap();
    let o = run(&["run", p.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("p[1]"));
    fs::write(&p, r#"{"command": "teleport"}"#).unwrap();
    assert_eq!(code(&run(&["run", p.to_str().unwrap()])), 2);
}

#[test]
fn unwritable_output_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = blocker.join("sub/out.csv");
    let o = run(&["bv", "--secret", "11", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
}

#[test]
fn output_file_matches_stdout_and_leaves_no_temp_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bv.csv");
    let a = run(&["bv", "--secret", "1011"]);
    let b = run(&["bv", "--secret", "1011", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&b), 0);
    assert_eq!(fs::read(&out).unwrap(), a.stdout);
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn compile_single_ion_gate() {
    let dir = scratch_configs();
    let o = run(&[
        "compile",
        "--target",
        dir.path().join("x_gate.txt").to_str().unwrap(),
        "--register",
        dir.path().join("qubit_register.json").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("# method"));
    assert_eq!(text.lines().filter(|l| l.starts_with("R ")).count(), 1);
}

#[test]
fn compile_rejects_non_unitary() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("t.txt");
    let r = dir.path().join("r.json");
    fs::write(&t, "1 0 1 0\n0 0 1 0\n").unwrap();
    fs::write(&r, r#"{"ions": [{"d": 2}]}"#).unwrap();
    let o = run(&["compile", "--target", t.to_str().unwrap(), "--register", r.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn manifold_json_and_sweep() {
    let o = run(&["manifold", "--top-k", "3", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["top"].as_array().unwrap().len(), 3);
    let o = run(&["manifold", "--top-k", "3", "--field-sweep", "10:30:3"]);
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 4);
    assert_eq!(code(&run(&["manifold", "--field-sweep", "10:3"])), 2);
}

#[test]
fn data_dir_overrides_bundled_level_data() {
    let dir = tempfile::tempdir().unwrap();
    let src = fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/ba137_d52.json")).unwrap();
    fs::write(dir.path().join("ba137_d52.json"), &src).unwrap();
    let with = |d: &Path| bin().env("IONQV_DATA_DIR", d).args(["manifold", "--top-k", "2"]).output().unwrap();
    let bundled = run(&["manifold", "--top-k", "2"]);
    let same = with(dir.path());
    assert_eq!(code(&same), 0);
    assert_eq!(same.stdout, bundled.stdout);
    fs::write(dir.path().join("ba137_d52.json"), src.replace("\"g_j\": 1.2", "\"g_j\": 1.1")).unwrap();
    let changed = with(dir.path());
    assert_eq!(code(&changed), 0);
    assert_ne!(changed.stdout, bundled.stdout);
    fs::write(dir.path().join("ba137_d52.json"), "{").unwrap();
    assert_eq!(code(&with(dir.path())), 2);
}
