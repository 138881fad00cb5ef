use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
        .to_str()
        .unwrap()
        .to_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hdopt"))
        .args(args)
        .output()
        .unwrap()
}

fn ok_json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn path(dir: &tempfile::TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_owned()
}

#[test]
fn analyze_reports_hd_and_nhd() {
    let v = ok_json(&["analyze", "-i", &fixture("w_a.json")]);
    assert_eq!(v["hd"], 24);
    assert_eq!(v["nhd"], 1.0);
    let v = ok_json(&[
        "analyze",
        "-i",
        &fixture("w_c.json"),
        "-p",
        &fixture("w_c_clustered_plan.json"),
    ]);
    assert_eq!(v["hd"], 16);
    assert_eq!(v["per_segment"], serde_json::json!([8, 8]));
}

#[test]
fn analyze_csv() {
    let out = run(&["analyze", "-i", &fixture("w_b.json"), "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("hd,nhd,per_segment\n12,"), "{text}");
}

#[test]
fn reorder_greedy_and_exact() {
    let dir = tempfile::tempdir().unwrap();
    let plan = path(&dir, "plan.json");
    let v = ok_json(&["reorder", "-i", &fixture("w_b.json"), "-o", &plan]);
    assert_eq!(v["hd"], 4);
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(&plan).unwrap()).unwrap();
    assert_eq!(
        saved["segments"][0]["order"],
        serde_json::json!([0, 2, 1, 3])
    );
    let v = ok_json(&[
        "reorder",
        "-i",
        &fixture("w_a.json"),
        "-o",
        &plan,
        "--exact",
    ]);
    assert_eq!(v["hd"], 8);
}

#[test]
fn segment_and_cluster_on_w_c() {
    let dir = tempfile::tempdir().unwrap();
    let seg = path(&dir, "seg.json");
    let v = ok_json(&[
        "segment",
        "-i",
        &fixture("w_c.json"),
        "-o",
        &seg,
        "--width",
        "4",
        "--exact",
    ]);
    assert_eq!(v["hd"], 22);
    let cl = path(&dir, "cl.json");
    let v = ok_json(&[
        "cluster",
        "-i",
        &fixture("w_c.json"),
        "-o",
        &cl,
        "--width",
        "4",
        "--exact",
    ]);
    assert_eq!(v["hd"], 16);
    let trace: Value =
        serde_json::from_str(&std::fs::read_to_string(format!("{cl}.trace.json")).unwrap())
            .unwrap();
    let objectives = trace["objectives"].as_array().unwrap();
    assert_eq!(objectives.len(), 21);
    assert_eq!(objectives.last().unwrap(), 16);
}

#[test]
fn cluster_is_byte_identical_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let mut plans = Vec::new();
    for threads in ["1", "4"] {
        let plan = path(&dir, &format!("plan{threads}.json"));
        let trace = path(&dir, &format!("trace{threads}.json"));
        let out = Command::new(env!("CARGO_BIN_EXE_hdopt"))
            .env("HDOPT_THREADS", threads)
            .args([
                "cluster",
                "-i",
                &fixture("w_c.json"),
                "-o",
                &plan,
                "--width",
                "4",
            ])
            .args(["--seed", "7", "--restarts", "6", "--trace", &trace])
            .output()
            .unwrap();
        assert!(out.status.success());
        plans.push((
            std::fs::read(&plan).unwrap(),
            std::fs::read(&trace).unwrap(),
        ));
    }
    assert_eq!(plans[0], plans[1]);
}

#[test]
fn simulate_fixture() {
    let v = ok_json(&[
        "simulate",
        "-i",
        &fixture("w_c.json"),
        "-p",
        &fixture("w_c_clustered_plan.json"),
        "-a",
        &fixture("acts_8ch.json"),
        "-c",
        &fixture("sim_config.json"),
    ]);
    assert_eq!(v["in_segment_flips"], 16);
    assert_eq!(v["outputs"].as_array().unwrap().len(), 2);
}

#[test]
fn simulate_rejects_wide_segment_as_infeasible() {
    let dir = tempfile::tempdir().unwrap();
    let plan = path(&dir, "p.json");
    ok_json(&["reorder", "-i", &fixture("w_c.json"), "-o", &plan]);
    // 8 columns in one segment against a 4-row array
    let out = run(&[
        "simulate",
        "-i",
        &fixture("w_c.json"),
        "-p",
        &plan,
        "-a",
        &fixture("acts_8ch.json"),
        "-c",
        &fixture("sim_config.json"),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn emit_lut_tables() {
    let dir = tempfile::tempdir().unwrap();
    let lut = path(&dir, "lut.json");
    let v = ok_json(&[
        "emit-lut",
        "-p",
        &fixture("w_c_clustered_plan.json"),
        "-D",
        "1024",
        "-o",
        &lut,
    ]);
    assert_eq!(v["tables"], 2);
    assert_eq!(v["memory_bits"], 10240);
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(&lut).unwrap()).unwrap();
    assert_eq!(saved["tables"][1], serde_json::json!([1, 0, 3, 2]));

    ok_json(&[
        "emit-lut",
        "-p",
        &fixture("w_c_clustered_plan.json"),
        "-o",
        &lut,
        "--input-permutation",
    ]);
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(&lut).unwrap()).unwrap();
    assert_eq!(
        saved["tables"][0],
        serde_json::json!([0, 2, 4, 6, 1, 3, 5, 7])
    );

    let out = run(&[
        "emit-lut",
        "-p",
        &fixture("w_c_clustered_plan.json"),
        "-D",
        "2",
        "-o",
        &lut,
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn relayout_writes_both_layers() {
    let dir = tempfile::tempdir().unwrap();
    let plan = path(&dir, "plan.json");
    ok_json(&["reorder", "-i", &fixture("w_b.json"), "-o", &plan]);
    let out_dir = dir.path().join("out");
    ok_json(&[
        "relayout",
        "-1",
        &fixture("w_b.json"),
        "-2",
        &fixture("w_a.json"),
        "-p",
        &plan,
        "-o",
        out_dir.to_str().unwrap(),
    ]);
    let w1: Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("w1.json")).unwrap()).unwrap();
    let v = ok_json(&["analyze", "-i", out_dir.join("w1.json").to_str().unwrap()]);
    assert_eq!(v["hd"], 4);
    assert_eq!(w1["shape"], serde_json::json!([4, 4]));
    assert!(out_dir.join("w2.json").exists());
}

#[test]
fn bench_csv() {
    let dir = tempfile::tempdir().unwrap();
    let shapes = path(&dir, "shapes.json");
    std::fs::write(
        &shapes,
        r#"{"layers":[{"name":"a","c_in":16,"k_out":8},{"name":"b","c_in":4,"k_out":6,"fx":3,"fy":3}]}"#,
    )
    .unwrap();
    let out = run(&[
        "bench",
        "--shapes",
        &shapes,
        "--restarts",
        "2",
        "--iters",
        "4",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "layer,c,k,baseline_hd,plan_hd,reduction,energy");
    assert_eq!(lines.len(), 3);
    assert!(lines[2].starts_with("b,36,6,"));
    let again = run(&[
        "bench",
        "--shapes",
        &shapes,
        "--restarts",
        "2",
        "--iters",
        "4",
    ]);
    assert_eq!(again.stdout, text.as_bytes());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["analyze"]).status.code(), Some(1));
    assert_eq!(
        run(&["analyze", "-i", "/nonexistent/w.json"]).status.code(),
        Some(2)
    );

    let bad = path(&dir, "bad.json");
    std::fs::write(
        &bad,
        r#"{"name":"x","bits":2,"shape":[2,2],"data":[0,1,2,4]}"#,
    )
    .unwrap();
    let out = run(&["analyze", "-i", &bad]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("out of range"));

    let plan = path(&dir, "p.json");
    let out = run(&[
        "cluster",
        "-i",
        &fixture("w_c.json"),
        "-o",
        &plan,
        "--width",
        "2",
        "--clusters",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(3));

    let wide = path(&dir, "wide.json");
    std::fs::write(
        &wide,
        format!(
            r#"{{"name":"w","bits":1,"shape":[13,1],"data":{:?}}}"#,
            vec![0; 13]
        ),
    )
    .unwrap();
    let out = run(&["reorder", "-i", &wide, "-o", &plan, "--exact"]);
    assert_eq!(out.status.code(), Some(3));

    let out = Command::new(env!("CARGO_BIN_EXE_hdopt"))
        .env("HDOPT_THREADS", "zero")
        .args(["analyze", "-i", &fixture("w_a.json")])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_exits_zero() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}
