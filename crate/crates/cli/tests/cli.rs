use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use pwt::SolveReport;
use pwt_cli::experiment::{aggregate, run_experiment, ExperimentConfig, RawRow};
use pwt_cli::summarize;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn pwt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pwt"))
        .args(args)
        .output()
        .unwrap()
}

fn report(out: &Output) -> SolveReport {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn toy(extra: &[&str]) -> Vec<String> {
    let mut args = vec![
        "--instance".to_string(),
        data("toy4.ttp"),
        "--tour".into(),
        data("toy4.tour"),
    ];
    args.extend(extra.iter().map(|s| s.to_string()));
    args
}

fn run(cmd: &str, extra: &[&str]) -> Output {
    let mut args = vec![cmd.to_string()];
    args.extend(toy(extra));
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    pwt(&refs)
}

#[test]
fn solve_r3_on_toy4() {
    let r = report(&run("solve", &["--heuristic", "r3"]));
    assert_eq!(r.algorithm, "pack");
    assert_eq!(r.objective, 64.0);
    assert_eq!(r.items, vec![1, 3]);
}

#[test]
fn solve_usage_errors_exit_2() {
    assert_eq!(run("solve", &["--heuristic", "r6"]).status.code(), Some(2));
    assert_eq!(
        run("solve", &["--heuristic", "r5", "--gamma", "2"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run("solve", &["--heuristic", "r3", "--alpha", "0.9"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(
            "solve",
            &[
                "--heuristic",
                "r3",
                "--chance",
                "--alpha",
                "0.9",
                "--delta",
                "1"
            ]
        )
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        run(
            "solve",
            &["--heuristic", "r7", "--chance", "--alpha", "0.9"]
        )
        .status
        .code(),
        Some(2)
    );
    assert_eq!(pwt(&["solve", "--instance", "x"]).status.code(), Some(2));
}

#[test]
fn missing_files_exit_1() {
    let out = pwt(&[
        "solve",
        "--instance",
        "/nonexistent.ttp",
        "--tour-seed",
        "1",
        "--heuristic",
        "r1",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn chance_solve_and_validate() {
    let out = run(
        "solve",
        &[
            "--heuristic",
            "r7",
            "--chance",
            "--alpha",
            "0.9",
            "--delta",
            "2",
        ],
    );
    let r = report(&out);
    assert_eq!(r.algorithm, "pack_sf");
    assert!(r.surrogate_weight.unwrap() <= 15.0);

    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    fs::write(&plan, &out.stdout).unwrap();
    let plan = plan.to_string_lossy().into_owned();
    let args = [
        "validate",
        "--plan",
        &plan,
        "--instance",
        &data("toy4.ttp"),
        "--alpha",
        "0.9",
        "--delta",
        "2",
        "--samples",
        "20000",
    ];
    let v = pwt(&args);
    assert!(v.status.success());
    assert!(String::from_utf8_lossy(&v.stdout).contains("PASS"));

    // All three items weigh at least 17 with delta = 1, beyond B = 15.
    let full = dir.path().join("full.json");
    fs::write(&full, r#"{"selected": [1, 2, 3]}"#).unwrap();
    let full = full.to_string_lossy().into_owned();
    let v = pwt(&[
        "validate",
        "--plan",
        &full,
        "--instance",
        &data("toy4.ttp"),
        "--alpha",
        "0.9",
        "--delta",
        "1",
    ]);
    let text = String::from_utf8_lossy(&v.stdout);
    assert!(
        text.contains("violation rate: 1.000000") && text.contains("FAIL"),
        "{text}"
    );

    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"selected": [7]}"#).unwrap();
    let bad = bad.to_string_lossy().into_owned();
    let v = pwt(&[
        "validate",
        "--plan",
        &bad,
        "--instance",
        &data("toy4.ttp"),
        "--alpha",
        "0.9",
        "--delta",
        "2",
    ]);
    assert_eq!(v.status.code(), Some(1));
}

#[test]
fn hh_initialization_and_determinism() {
    let r = report(&run(
        "hh",
        &["--variant", "HH2", "--iters", "0", "--seed", "3"],
    ));
    assert_eq!(r.objective, 64.0);
    assert_eq!(r.trajectory.as_deref(), Some(&[64.0][..]));

    assert_eq!(
        run("hh", &["--variant", "HH5", "--seed", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(
            "hh",
            &[
                "--variant",
                "HH2",
                "--seed",
                "1",
                "--alpha",
                "0.9",
                "--delta",
                "1"
            ]
        )
        .status
        .code(),
        Some(2)
    );
    assert_eq!(run("hh", &["--variant", "HH2"]).status.code(), Some(2));

    let args = [
        "--variant",
        "HH6",
        "--iters",
        "50",
        "--seed",
        "11",
        "--alpha",
        "0.9",
        "--delta",
        "2",
    ];
    let mut a = report(&run("hh", &args));
    let mut b = report(&run("hh", &args));
    a.runtime_ms = 0.0;
    b.runtime_ms = 0.0;
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
}

#[test]
fn oracle_command() {
    let r = report(&run("oracle", &[]));
    assert_eq!(r.objective, 64.0);
    assert_eq!(r.items, vec![1, 3]);

    let dir = tempfile::tempdir().unwrap();
    let zero = dir.path().join("zero.ttp");
    let text = fs::read_to_string(data("toy4.ttp"))
        .unwrap()
        .replace("KNAPSACK:\t15", "KNAPSACK:\t0");
    fs::write(&zero, text).unwrap();
    let zero = zero.to_string_lossy().into_owned();
    let r = report(&pwt(&[
        "oracle",
        "--instance",
        &zero,
        "--tour",
        &data("toy4.tour"),
    ]));
    assert!(r.items.is_empty());
    assert_eq!(r.objective, -4.0);

    let big = dir.path().join("big.ttp");
    let out = pwt(&[
        "generate",
        "--cities",
        "26",
        "--seed",
        "1",
        "-o",
        &big.to_string_lossy(),
    ]);
    assert!(out.status.success());
    let out = pwt(&[
        "oracle",
        "--instance",
        &big.to_string_lossy(),
        "--tour-seed",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn generated_tour_matches_tour_seed() {
    let dir = tempfile::tempdir().unwrap();
    let inst = data("synth51_n50_unc_01.ttp");
    let tour = dir.path().join("t.tour").to_string_lossy().into_owned();
    assert!(
        pwt(&["tour", "--instance", &inst, "--seed", "5", "-o", &tour])
            .status
            .success()
    );
    let from_file = report(&pwt(&[
        "solve",
        "--instance",
        &inst,
        "--tour",
        &tour,
        "--heuristic",
        "r3",
    ]));
    let from_seed = report(&pwt(&[
        "solve",
        "--instance",
        &inst,
        "--tour-seed",
        "5",
        "--heuristic",
        "r3",
    ]));
    assert_eq!(from_file.objective, from_seed.objective);
}

fn write_config(dir: &std::path::Path, body: &str) -> PathBuf {
    let path = dir.join("exp.toml");
    fs::write(&path, body).unwrap();
    path
}

#[test]
fn experiment_cardinality_and_aggregates() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &format!(
            "instances = [{:?}]\nalgorithms = [\"r1\", \"r3\"]\noutput = \"out\"\n[tours]\ngenerate = 3\n",
            data("toy4.ttp")
        ),
    );
    let out = pwt(&["experiment", &cfg.to_string_lossy()]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let mut raw = csv::Reader::from_path(dir.path().join("out/raw.csv")).unwrap();
    let header: Vec<String> = raw.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        header.join(","),
        "instance,tour_id,algorithm,reward,alpha,delta,bound,seed,objective,total_weight,surrogate_weight,items_packed,evaluations,runtime_ms,error"
    );
    let rows: Vec<RawRow> = raw.deserialize().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 6);
    let order: Vec<(String, usize)> = rows.iter().map(|r| (r.label(), r.tour_id)).collect();
    let mut sorted = order.clone();
    sorted.sort();
    assert_eq!(order, sorted);

    let mut agg = csv::Reader::from_path(dir.path().join("out/aggregate.csv")).unwrap();
    let header: Vec<String> = agg.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        header.join(","),
        "instance,algorithm,alpha,runs,mean_objective,std_objective"
    );
    let agg: Vec<pwt_cli::experiment::AggregateRow> =
        agg.deserialize().map(Result::unwrap).collect();
    assert_eq!(agg.len(), 2);
    for a in &agg {
        let scores: Vec<f64> = rows
            .iter()
            .filter(|r| r.label() == a.algorithm)
            .map(|r| r.objective.unwrap())
            .collect();
        let (mean, std) = summarize(&scores).unwrap();
        assert_eq!((a.runs, a.mean_objective, a.std_objective), (3, mean, std));
    }
}

#[test]
fn experiment_rows_replay_through_solve_and_hh() {
    let dir = tempfile::tempdir().unwrap();
    let inst = data("synth51_n50_bsc_01.ttp");
    let cfg = write_config(
        dir.path(),
        &format!(
            "instances = [{inst:?}]\nalgorithms = [\"r4\", \"r7\", \"HH6\"]\nalphas = [0.9]\ndelta = 20.0\n\
             iterations = 20\nseed = 40\noutput = \"out\"\nformat = \"json\"\n[tours]\ngenerate = 2\nseed = 9\n"
        ),
    );
    let mut config = ExperimentConfig::load(&cfg).unwrap();
    config.output = dir.path().join("out");
    let results = run_experiment(&config).unwrap();
    assert_eq!(results.raw.len(), 6);
    assert_eq!(aggregate(&results.raw).unwrap(), results.aggregate);

    for row in &results.raw {
        let tour_seed = (9 + row.tour_id).to_string();
        let mut args = vec!["--instance", &inst, "--tour-seed", &tour_seed];
        let alpha = row.alpha.map(|a| a.to_string());
        let seed = row.seed.map(|s| s.to_string());
        let r = if row.algorithm == "hh" {
            args.extend([
                "--variant",
                &row.reward,
                "--iters",
                "20",
                "--seed",
                seed.as_deref().unwrap(),
            ]);
            args.extend(["--alpha", alpha.as_deref().unwrap(), "--delta", "20"]);
            report(&pwt(&[&["hh"][..], &args].concat()))
        } else {
            args.extend(["--heuristic", &row.reward]);
            if let Some(a) = alpha.as_deref() {
                args.extend(["--chance", "--alpha", a, "--delta", "20"]);
            }
            report(&pwt(&[&["solve"][..], &args].concat()))
        };
        assert_eq!(Some(r.objective), row.objective, "{row:?}");
    }
}

#[test]
fn experiment_failures_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &format!(
            "instances = [{:?}]\nalgorithms = [\"r9\"]\noutput = \"out\"\n",
            data("toy4.ttp")
        ),
    );
    assert_eq!(
        pwt(&["experiment", &cfg.to_string_lossy()]).status.code(),
        Some(1)
    );
    let cfg = write_config(
        dir.path(),
        &format!(
            "instances = [{:?}]\nalgorithms = [\"r1\"]\noutput = \"out\"\n[tours]\nfiles = [{:?}]\n",
            data("toy4.ttp"),
            data("synth51_n50_unc_01.ttp")
        ),
    );
    assert_eq!(
        pwt(&["experiment", &cfg.to_string_lossy()]).status.code(),
        Some(1)
    );
}
