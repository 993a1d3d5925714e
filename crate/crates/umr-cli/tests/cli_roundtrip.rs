//! End-to-end checks of the binary: artifacts reload through the format
//! layer, output routing honors the environment, and failures map to the
//! documented exit codes with a JSON error record on stderr.

use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use umr_cli::format::{
    load_baseline, load_hierarchy, load_summary, load_ultrametric, trace_header, InstanceFile,
};

fn exe() -> &'static str {
    env!("CARGO_BIN_EXE_umr")
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("umr-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    Command::new(exe()).args(args).stdout(Stdio::piped()).stderr(Stdio::piped()).output().unwrap()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

fn name(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn solve_artifacts_reload_and_agree() {
    let dir = scratch("solve");
    let instance_path = dir.join("instance.txt");
    let out_dir = dir.join("run");

    let gen = run(&[
        "gen",
        "--rows",
        "4",
        "--cols",
        "4",
        "--levels",
        "2",
        "--noise",
        "0.5",
        "--seed",
        "3",
        "--out",
        instance_path.to_str().unwrap(),
    ]);
    assert!(gen.status.success(), "gen failed: {gen:?}");

    let instance = InstanceFile::load(name(&instance_path), &read(&instance_path))
        .expect("generated file parses");
    assert_eq!(instance.graph.num_vertices(), 16);
    assert!(instance.schedule.is_some());

    let solve = run(&[
        "solve",
        instance_path.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(solve.status.success(), "solve failed: {solve:?}");
    let stdout = String::from_utf8(solve.stdout).unwrap();
    assert!(stdout.contains("status=converged"), "unexpected stdout: {stdout}");

    let summary_path = out_dir.join("summary.txt");
    let summary =
        load_summary(name(&summary_path), &read(&summary_path)).expect("summary reloads");
    assert_eq!(summary.status, "converged");
    assert_eq!(summary.levels, 2);
    assert!(summary.gap <= 1e-6);
    assert!(summary.lower_bound <= summary.upper_bound + 1e-9);
    // Distortion bounds are the layer bounds shifted by the fit constant.
    assert!((summary.distortion_upper - summary.distortion_lower)
        .abs()
        .le(&(summary.upper_bound - summary.lower_bound).abs().max(1e-9)));

    let hierarchy_path = out_dir.join("hierarchy.txt");
    let hierarchy =
        load_hierarchy(name(&hierarchy_path), &read(&hierarchy_path), &instance.graph)
            .expect("hierarchy reloads and validates");
    assert_eq!(hierarchy.levels.len(), 2);
    assert_eq!(hierarchy.levels[0].len(), instance.graph.num_edges());

    let metric_path = out_dir.join("ultrametric.txt");
    let distances =
        load_ultrametric(name(&metric_path), &read(&metric_path)).expect("ultrametric reloads");
    assert_eq!(distances.len(), instance.graph.num_edges());
    let schedule = instance.schedule.as_ref().unwrap();
    let deltas = schedule.deltas();
    for (e, d) in distances.iter().enumerate() {
        // Every distance is a schedule value, and a positive one exactly
        // when the finest cut separates the edge.
        let expected = if hierarchy.levels[0][e] {
            let coarsest =
                (1..=2).rev().find(|&l| hierarchy.levels[l - 1][e]).unwrap();
            deltas[coarsest - 1]
        } else {
            0.0
        };
        assert_eq!(*d, expected, "edge {e}");
    }

    let trace = read(&out_dir.join("trace.csv"));
    assert!(trace.starts_with(&trace_header(2)));
    assert!(trace.lines().count() >= 2);

    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn out_dir_env_var_routes_artifacts() {
    let dir = scratch("envout");
    let instance_path = dir.join("instance.txt");
    let gen = run(&[
        "gen",
        "--rows",
        "2",
        "--cols",
        "3",
        "--levels",
        "1",
        "--out",
        instance_path.to_str().unwrap(),
    ]);
    assert!(gen.status.success());

    let routed = dir.join("routed");
    let solve = Command::new(exe())
        .args(["solve", instance_path.to_str().unwrap()])
        .env("UMR_OUT_DIR", &routed)
        .stdout(Stdio::null())
        .status()
        .unwrap();
    assert!(solve.success());
    assert!(routed.join("summary.txt").is_file());
    assert!(routed.join("trace.csv").is_file());

    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn baseline_and_ablate_artifacts_reload() {
    let dir = scratch("reports");
    let instance_path = dir.join("instance.txt");
    let gen = run(&[
        "gen",
        "--rows",
        "4",
        "--cols",
        "3",
        "--levels",
        "2",
        "--noise",
        "1.0",
        "--seed",
        "11",
        "--out",
        instance_path.to_str().unwrap(),
    ]);
    assert!(gen.status.success());

    let base_dir = dir.join("base");
    let baseline = run(&[
        "baseline",
        instance_path.to_str().unwrap(),
        "--out",
        base_dir.to_str().unwrap(),
    ]);
    assert!(baseline.status.success(), "baseline failed: {baseline:?}");
    let baseline_path = base_dir.join("baseline.txt");
    let report =
        load_baseline(name(&baseline_path), &read(&baseline_path)).expect("baseline reloads");
    assert_eq!(report.levels, 2);
    assert_eq!(report.per_level_costs.len(), 2);

    let ablate_dir = dir.join("ablate");
    let ablate = run(&[
        "ablate",
        instance_path.to_str().unwrap(),
        "--out",
        ablate_dir.to_str().unwrap(),
    ]);
    assert!(ablate.status.success(), "ablate failed: {ablate:?}");
    let text = read(&ablate_dir.join("ablate.txt"));
    assert!(text.starts_with("umr-ablate 1"));
    assert!(text.contains("violations"));

    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn bad_input_exits_2_with_json_record() {
    let dir = scratch("badinput");
    let bad = dir.join("bad.txt");
    std::fs::write(&bad, "umr 1\nvertices 3\nedges 1\nedge 0 7 1 1\n").unwrap();

    let out = run(&["solve", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    let line = stderr.lines().last().unwrap();
    assert!(line.starts_with("{\"error\":"), "stderr: {stderr}");
    assert!(line.contains("\"exit\":2"));

    let missing = run(&["solve", dir.join("absent.txt").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(2));

    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn exhausted_budget_exits_3() {
    let dir = scratch("budget");
    let instance_path = dir.join("instance.txt");
    let gen = run(&[
        "gen",
        "--rows",
        "6",
        "--cols",
        "6",
        "--levels",
        "4",
        "--noise",
        "2.0",
        "--seed",
        "5",
        "--out",
        instance_path.to_str().unwrap(),
    ]);
    assert!(gen.status.success());

    let out_dir = dir.join("run");
    let solve = run(&[
        "solve",
        instance_path.to_str().unwrap(),
        "--max-iters",
        "1",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(solve.status.code(), Some(3), "solve: {solve:?}");
    // Artifacts are still written so the partial run can be inspected.
    let summary_path = out_dir.join("summary.txt");
    let summary = load_summary(name(&summary_path), &read(&summary_path))
        .expect("summary written on budget exit");
    assert_eq!(summary.status, "iteration-budget");
    assert_eq!(summary.iterations, 1);

    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn oracle_command_rejects_oversized_instances() {
    let dir = scratch("oracle");
    let instance_path = dir.join("instance.txt");
    let gen = run(&[
        "gen",
        "--rows",
        "4",
        "--cols",
        "4",
        "--levels",
        "2",
        "--out",
        instance_path.to_str().unwrap(),
    ]);
    assert!(gen.status.success());

    let out = run(&["oracle", instance_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "16 vertices exceeds the exhaustive cap");
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("\"kind\":\"input\""), "stderr: {stderr}");

    let small = dir.join("small.txt");
    let gen_small = run(&[
        "gen",
        "--rows",
        "2",
        "--cols",
        "3",
        "--levels",
        "2",
        "--out",
        small.to_str().unwrap(),
    ]);
    assert!(gen_small.status.success());
    let oracle_dir = dir.join("out");
    let ok = run(&[
        "oracle",
        small.to_str().unwrap(),
        "--out",
        oracle_dir.to_str().unwrap(),
    ]);
    assert!(ok.status.success(), "oracle failed: {ok:?}");
    assert!(read(&oracle_dir.join("oracle.txt")).starts_with("umr-oracle 1"));

    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn eval_collates_runs() {
    let dir = scratch("eval");
    let mut run_dirs = Vec::new();
    for seed in [1u64, 2] {
        let instance_path = dir.join(format!("instance-{seed}.txt"));
        let gen = run(&[
            "gen",
            "--rows",
            "3",
            "--cols",
            "4",
            "--levels",
            "2",
            "--noise",
            "1.0",
            "--seed",
            &seed.to_string(),
            "--out",
            instance_path.to_str().unwrap(),
        ]);
        assert!(gen.status.success());
        let out_dir = dir.join(format!("run-{seed}"));
        let solve = run(&[
            "solve",
            instance_path.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert!(solve.status.success());
        let baseline = run(&[
            "baseline",
            instance_path.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert!(baseline.status.success());
        run_dirs.push(out_dir);
    }

    let eval_dir = dir.join("eval");
    let eval = run(&[
        "eval",
        run_dirs[0].to_str().unwrap(),
        run_dirs[1].to_str().unwrap(),
        "--out",
        eval_dir.to_str().unwrap(),
    ]);
    assert!(eval.status.success(), "eval failed: {eval:?}");
    let csv = read(&eval_dir.join("eval.csv"));
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "name,status,lower_bound,upper_bound,gap,baseline_cost,solver_distortion,baseline_distortion,solver_over_baseline,baseline_over_solver"
    );
    assert_eq!(lines.count(), 2);
    let stdout = String::from_utf8(eval.stdout).unwrap();
    assert!(stdout.contains("eval: 2 runs"), "stdout: {stdout}");

    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn gen_to_stdout_parses() {
    let out = run(&["gen", "--rows", "2", "--cols", "2", "--levels", "1"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let parsed = InstanceFile::load("stdout", &text).expect("stdout instance parses");
    assert_eq!(parsed.graph.num_vertices(), 4);
}

#[test]
fn usage_errors_exit_2() {
    let out = run(&["solve"]);
    assert_eq!(out.status.code(), Some(2), "missing argument");
    let unknown = run(&["frobnicate"]);
    assert_eq!(unknown.status.code(), Some(2), "unknown subcommand");
}
