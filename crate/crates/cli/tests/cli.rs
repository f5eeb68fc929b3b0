//! End-to-end tests driving the `dikt` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn dikt() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dikt"))
}

fn run_ok(args: &[&str]) -> Output {
    let out = dikt().args(args).output().expect("spawn dikt");
    assert!(
        out.status.success(),
        "dikt {args:?} failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn digest(path: &Path) -> String {
    dikt_core::hash::fnv1a64_hex(&fs::read(path).expect("read artifact"))
}

fn write_raw_fixture(dir: &Path) -> (PathBuf, PathBuf) {
    let raw_path = dir.join("raw.jsonl");
    let catalog_path = dir.join("catalog.json");
    let mut lines = Vec::new();
    for i in 0..12 {
        let split = if i % 4 == 0 { "test" } else { "train" };
        // consecutive tutor utterances exercise the merge step
        let line = format!(
            concat!(
                r#"{{"dialogue_id":"d{i}","question_text":"What is {i} + {i}?","#,
                r#""utterances":[{{"speaker":"tutor","text":"hello"}},"#,
                r#"{{"speaker":"tutor","text":"try adding d{i} step one"}},"#,
                r#"{{"speaker":"student","text":"first try in d{i}"}},"#,
                r#"{{"speaker":"tutor","text":"now task two of d{i}"}},"#,
                r#"{{"speaker":"student","text":"second try in d{i}"}},"#,
                r#"{{"speaker":"tutor","text":"finally task three of d{i}"}},"#,
                r#"{{"speaker":"student","text":"third try in d{i}"}}],"#,
                r#""labels":[{{"pair_index":1,"kc_ids":["kc-a"],"correctness":{l1}}},"#,
                r#"{{"pair_index":2,"kc_ids":["kc-b"],"correctness":{l2}}},"#,
                r#"{{"pair_index":3,"kc_ids":["kc-a","kc-c"],"correctness":{l3}}}],"#,
                r#""split_tag":"{split}"}}"#
            ),
            i = i,
            // per-KC correctness rates differ so KC difficulty means spread
            l1 = i % 2,
            l2 = u8::from(i % 3 == 0),
            l3 = u8::from(i % 2 == 0),
            split = split
        );
        lines.push(line);
    }
    fs::write(&raw_path, lines.join("\n") + "\n").unwrap();
    fs::write(
        &catalog_path,
        r#"{"kc-a": "Addition", "kc-b": "Subtraction", "kc-c": "Carrying"}"#,
    )
    .unwrap();
    (raw_path, catalog_path)
}

#[test]
fn help_exits_zero() {
    let out = dikt().arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for sub in [
        "ingest",
        "simulate",
        "train",
        "eval",
        "analyze-difficulty",
        "learning-curve",
        "case-study",
        "recover",
        "plot",
    ] {
        assert!(text.contains(sub), "help lacks {sub}");
    }
}

#[test]
fn unknown_subcommand_exits_two() {
    let out = dikt().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_required_flag_exits_two() {
    let out = dikt().args(["train"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_is_byte_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let args = |out: &Path| {
        vec![
            "simulate".to_string(),
            "--fixture".to_string(),
            "agreement".to_string(),
            "--dialogues".to_string(),
            "25".to_string(),
            "--seed".to_string(),
            "7".to_string(),
            "--out".to_string(),
            out.display().to_string(),
        ]
    };
    run_ok(&args(&a).iter().map(|s| s.as_str()).collect::<Vec<_>>());
    run_ok(&args(&b).iter().map(|s| s.as_str()).collect::<Vec<_>>());
    for name in ["corpus.jsonl", "kc_catalog.json", "ground_truth.json"] {
        assert_eq!(
            digest(&a.join(name)),
            digest(&b.join(name)),
            "{name} differs between identical runs"
        );
    }

    let c = dir.path().join("c");
    let mut other = args(&c);
    let seed_pos = other.iter().position(|a| a == "--seed").unwrap() + 1;
    other[seed_pos] = "8".to_string();
    run_ok(&other.iter().map(|s| s.as_str()).collect::<Vec<_>>());
    assert_ne!(
        digest(&a.join("corpus.jsonl")),
        digest(&c.join("corpus.jsonl"))
    );
}

#[test]
fn full_pipeline_from_ingest_to_plots() {
    let dir = tempfile::tempdir().unwrap();
    let (raw, catalog) = write_raw_fixture(dir.path());
    let ingest_dir = dir.path().join("corpus");
    run_ok(&[
        "ingest",
        "--raw",
        raw.to_str().unwrap(),
        "--catalog",
        catalog.to_str().unwrap(),
        "--out",
        ingest_dir.to_str().unwrap(),
    ]);
    let corpus = ingest_dir.join("corpus.jsonl");
    let kc_catalog = ingest_dir.join("kc_catalog.json");
    assert!(ingest_dir.join("manifest.json").exists());

    // merged consecutive tutor utterances arrive as one newline-joined turn
    let corpus_text = fs::read_to_string(&corpus).unwrap();
    assert!(corpus_text.contains("hello\\ntry adding d0 step one"));

    let train_dir = dir.path().join("train");
    run_ok(&[
        "train",
        "--corpus",
        corpus.to_str().unwrap(),
        "--catalog",
        kc_catalog.to_str().unwrap(),
        "--provider",
        "direct",
        "--lr",
        "0.08",
        "--epochs",
        "4",
        "--seed",
        "3",
        "--val-fraction",
        "0.2",
        "--out",
        train_dir.to_str().unwrap(),
    ]);
    for artifact in [
        "checkpoint.json",
        "adapters.json",
        "history.json",
        "training_log.jsonl",
        "manifest.json",
    ] {
        assert!(train_dir.join(artifact).exists(), "missing {artifact}");
    }

    let eval_dir = dir.path().join("eval");
    run_ok(&[
        "eval",
        "--corpus",
        corpus.to_str().unwrap(),
        "--catalog",
        kc_catalog.to_str().unwrap(),
        "--checkpoint",
        train_dir.to_str().unwrap(),
        "--provider",
        "direct",
        "--split",
        "all",
        "--out",
        eval_dir.to_str().unwrap(),
    ]);
    let predictions = eval_dir.join("predictions.csv");
    let report = eval_dir.join("report.json");
    assert!(predictions.exists() && report.exists());
    let report_json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    // 12 dialogues x 3 labels, minus one masked label per dialogue
    assert_eq!(report_json["n_evaluated"], 24);

    let analysis = dir.path().join("analysis");
    run_ok(&[
        "analyze-difficulty",
        "--predictions",
        predictions.to_str().unwrap(),
        "--corpus",
        corpus.to_str().unwrap(),
        "--catalog",
        kc_catalog.to_str().unwrap(),
        "--min-kc-count",
        "2",
        "--report",
        report.to_str().unwrap(),
        "--out",
        analysis.to_str().unwrap(),
    ]);
    let enriched = analysis.join("report.json");
    assert!(analysis.join("difficulty_agreement.json").exists());

    let curves = dir.path().join("curves");
    run_ok(&[
        "learning-curve",
        "--predictions",
        predictions.to_str().unwrap(),
        "--corpus",
        corpus.to_str().unwrap(),
        "--catalog",
        kc_catalog.to_str().unwrap(),
        "--top",
        "2",
        "--mastery-source",
        "sigmoid_theta",
        "--report",
        enriched.to_str().unwrap(),
        "--out",
        curves.to_str().unwrap(),
    ]);
    let curves_report = curves.join("report.json");

    let case = dir.path().join("case");
    let out = run_ok(&[
        "case-study",
        "--predictions",
        predictions.to_str().unwrap(),
        "--corpus",
        corpus.to_str().unwrap(),
        "--catalog",
        kc_catalog.to_str().unwrap(),
        "--dialogue-id",
        "d1",
        "--display",
        "sigmoid",
        "--report",
        curves_report.to_str().unwrap(),
        "--out",
        case.to_str().unwrap(),
    ]);
    let table = String::from_utf8_lossy(&out.stdout);
    assert!(table.contains("case study: d1"));
    assert!(
        table.contains("--"),
        "first-pair difficulty must render as --"
    );
    let full_report = case.join("report.json");

    let plots = dir.path().join("plots");
    run_ok(&[
        "plot",
        "--report",
        full_report.to_str().unwrap(),
        "--kind",
        "difficulty_scatter",
        "--out",
        plots.to_str().unwrap(),
    ]);
    run_ok(&[
        "plot",
        "--report",
        full_report.to_str().unwrap(),
        "--kind",
        "learning_curves",
        "--out",
        plots.to_str().unwrap(),
    ]);
    run_ok(&[
        "plot",
        "--report",
        full_report.to_str().unwrap(),
        "--kind",
        "dialogue_curve",
        "--out",
        plots.to_str().unwrap(),
    ]);
    assert!(plots.join("difficulty_scatter.svg").exists());
    let curve_count = fs::read_dir(&plots)
        .unwrap()
        .filter(|e| {
            e.as_ref()
                .unwrap()
                .file_name()
                .to_string_lossy()
                .starts_with("learning_curve_")
        })
        .count();
    assert_eq!(curve_count, 2, "one panel per requested KC");
    assert!(plots.join("dialogue_curve_d1.svg").exists());
}

#[test]
fn plot_repeats_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    fs::write(
        &report,
        serde_json::json!({
            "auc": 0.7, "accuracy": 0.6, "n_evaluated": 10,
            "difficulty_agreement": {
                "points": [
                    {"kc_id": "a", "ground_truth": 0.2, "predicted_normalized": 0.1, "sample_count": 9},
                    {"kc_id": "b", "ground_truth": 0.5, "predicted_normalized": 0.55, "sample_count": 20},
                    {"kc_id": "c", "ground_truth": 0.9, "predicted_normalized": 1.0, "sample_count": 5}
                ],
                "pearson_r": 0.98,
                "p_value": 0.01
            }
        })
        .to_string(),
    )
    .unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        run_ok(&[
            "plot",
            "--report",
            report.to_str().unwrap(),
            "--kind",
            "difficulty_scatter",
            "--out",
            out.to_str().unwrap(),
        ]);
    }
    assert_eq!(
        digest(&a.join("difficulty_scatter.svg")),
        digest(&b.join("difficulty_scatter.svg"))
    );
}

#[test]
fn plot_missing_section_exits_one_with_error_name() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    fs::write(
        &report,
        r#"{"auc": 0.5, "accuracy": 0.5, "n_evaluated": 1}"#,
    )
    .unwrap();
    let out = dikt()
        .args([
            "plot",
            "--report",
            report.to_str().unwrap(),
            "--kind",
            "difficulty_scatter",
            "--out",
            dir.path().join("plots").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("MissingSection"), "stderr: {stderr}");
}

#[test]
fn ingest_rejects_invalid_transcripts() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("raw.jsonl");
    // label points past the last pair
    fs::write(
        &raw,
        r#"{"dialogue_id":"bad","question_text":"q","utterances":[{"speaker":"tutor","text":"a"},{"speaker":"student","text":"b"}],"labels":[{"pair_index":5,"kc_ids":["kc"],"correctness":1}]}"#,
    )
    .unwrap();
    let out = dikt()
        .args([
            "ingest",
            "--raw",
            raw.to_str().unwrap(),
            "--out",
            dir.path().join("out").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("InvariantViolation"), "stderr: {stderr}");
    assert!(stderr.contains("DanglingLabel"), "stderr: {stderr}");
}

#[test]
fn mock_provider_cannot_train() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim");
    run_ok(&[
        "simulate",
        "--dialogues",
        "10",
        "--pairs",
        "3",
        "--seed",
        "2",
        "--out",
        sim.to_str().unwrap(),
    ]);
    let out = dikt()
        .args([
            "train",
            "--corpus",
            sim.join("corpus.jsonl").to_str().unwrap(),
            "--catalog",
            sim.join("kc_catalog.json").to_str().unwrap(),
            "--provider",
            "mock",
            "--out",
            dir.path().join("train").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not trainable"));
}

#[test]
fn recover_reports_against_truth() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim");
    run_ok(&[
        "simulate",
        "--dialogues",
        "60",
        "--pairs",
        "6",
        "--kcs",
        "8",
        "--seed",
        "5",
        "--out",
        sim.to_str().unwrap(),
    ]);
    let recover = dir.path().join("recover");
    run_ok(&[
        "recover",
        "--corpus",
        sim.join("corpus.jsonl").to_str().unwrap(),
        "--catalog",
        sim.join("kc_catalog.json").to_str().unwrap(),
        "--truth",
        sim.join("ground_truth.json").to_str().unwrap(),
        "--epochs",
        "30",
        "--seed",
        "5",
        "--out",
        recover.to_str().unwrap(),
    ]);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(recover.join("recovery.json")).unwrap()).unwrap();
    assert!(summary["gap_pearson"].as_f64().unwrap() > 0.8);
    assert!(recover.join("fitted_pairs.csv").exists());
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("dikt.toml");
    fs::write(&config, "seed = 11\n").unwrap();

    // config file supplies the seed
    let from_config = dir.path().join("from_config");
    run_ok(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--dialogues",
        "8",
        "--pairs",
        "3",
        "--out",
        from_config.to_str().unwrap(),
    ]);
    let from_flag = dir.path().join("from_flag");
    run_ok(&[
        "simulate",
        "--seed",
        "11",
        "--dialogues",
        "8",
        "--pairs",
        "3",
        "--out",
        from_flag.to_str().unwrap(),
    ]);
    assert_eq!(
        digest(&from_config.join("corpus.jsonl")),
        digest(&from_flag.join("corpus.jsonl"))
    );

    // an explicit flag wins over the config file
    let override_dir = dir.path().join("override");
    run_ok(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--seed",
        "12",
        "--dialogues",
        "8",
        "--pairs",
        "3",
        "--out",
        override_dir.to_str().unwrap(),
    ]);
    assert_ne!(
        digest(&from_config.join("corpus.jsonl")),
        digest(&override_dir.join("corpus.jsonl"))
    );

    // the DIKT_ environment mirror also supplies the seed
    let from_env = dir.path().join("from_env");
    let out = dikt()
        .env("DIKT_SEED", "11")
        .args([
            "simulate",
            "--dialogues",
            "8",
            "--pairs",
            "3",
            "--out",
            from_env.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(
        digest(&from_config.join("corpus.jsonl")),
        digest(&from_env.join("corpus.jsonl"))
    );
}

#[test]
fn train_table_in_config_file_reaches_the_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let (raw, catalog) = write_raw_fixture(dir.path());
    let ingest_dir = dir.path().join("corpus");
    run_ok(&[
        "ingest",
        "--raw",
        raw.to_str().unwrap(),
        "--catalog",
        catalog.to_str().unwrap(),
        "--out",
        ingest_dir.to_str().unwrap(),
    ]);
    let config = dir.path().join("dikt.toml");
    fs::write(
        &config,
        concat!(
            "seed = 3\n",
            "val_fraction = 0.2\n",
            "[train]\n",
            "learning_rate = 0.02\n",
            "weight_decay = 0.0\n",
            "grad_clip_norm = 2.5\n",
            "epochs = 2\n",
            "loss_reduction = \"mean\"\n",
        ),
    )
    .unwrap();
    let train_dir = dir.path().join("train");
    // --lr on the command line beats the [train] table
    run_ok(&[
        "train",
        "--config",
        config.to_str().unwrap(),
        "--corpus",
        ingest_dir.join("corpus.jsonl").to_str().unwrap(),
        "--catalog",
        ingest_dir.join("kc_catalog.json").to_str().unwrap(),
        "--provider",
        "direct",
        "--lr",
        "0.05",
        "--out",
        train_dir.to_str().unwrap(),
    ]);
    let checkpoint: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(train_dir.join("checkpoint.json")).unwrap())
            .unwrap();
    let cfg = &checkpoint["config"];
    assert_eq!(cfg["learning_rate"], 0.05);
    assert_eq!(cfg["weight_decay"], 0.0);
    assert_eq!(cfg["grad_clip_norm"], 2.5);
    assert_eq!(cfg["epochs"], 2);
    assert_eq!(cfg["loss_reduction"], "mean");
    assert_eq!(cfg["seed"], 3);
}

#[test]
fn manifest_records_digests_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim");
    run_ok(&[
        "simulate",
        "--dialogues",
        "6",
        "--pairs",
        "3",
        "--seed",
        "4",
        "--out",
        sim.to_str().unwrap(),
    ]);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(sim.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["seed"], 4);
    let outputs = manifest["outputs"].as_array().unwrap();
    assert_eq!(outputs.len(), 3);
    for output in outputs {
        let path = PathBuf::from(output["path"].as_str().unwrap());
        let recorded = output["digest"].as_str().unwrap();
        assert_eq!(recorded, format!("fnv1a64:{}", digest(&path)));
    }
    assert!(manifest["finished_at_ms"].as_u64() >= manifest["started_at_ms"].as_u64());
}
