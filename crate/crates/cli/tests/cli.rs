mod support;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use copydesc_cli::PipelineReport;
use copydesc_core::io::write_descriptors;
use copydesc_core::{DescriptorSet, Role};
use sha2::{Digest, Sha256};
use support::fixture::{write_instance, Instance};

fn copydesc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_copydesc")).args(args).output().expect("spawn copydesc")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn report(dir: &Path) -> PipelineReport {
    serde_json::from_slice(&std::fs::read(dir.join("report.json")).unwrap()).unwrap()
}

fn run_pipeline(inst: &Instance, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "pipeline",
        "--queries",
        s(&inst.queries),
        "--refs",
        s(&inst.references),
        "--training",
        s(&inst.training),
        "--truth",
        s(&inst.truth),
        "--out-dir",
        s(out),
    ];
    args.extend_from_slice(extra);
    copydesc(&args)
}

#[test]
fn synthetic_pipeline_scores_perfectly() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), 1, 15, 2, 0, 32);
    let out = dir.path().join("run");
    let o = run_pipeline(&inst, &out, &["--stretch", "off"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    assert_eq!(r.evaluation.micro_ap, 1.0);
    assert_eq!(r.evaluation.recall_at_rank[&1], 1.0);
    for f in ["queries.iscd", "references.iscd", "pairs.csv", "report.json"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.lines().any(|l| l.starts_with("info event=pipeline_done micro_ap=1 ")), "{stderr}");
}

#[test]
fn stretch_on_and_off_give_identical_recall_at_rank() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), 2, 12, 3, 10, 24);
    let (on, off) = (dir.path().join("on"), dir.path().join("off"));
    assert!(run_pipeline(&inst, &on, &["--stretch", "on", "--ranks", "1,5,10"]).status.success());
    assert!(run_pipeline(&inst, &off, &["--stretch", "off", "--ranks", "1,5,10"]).status.success());
    let (a, b) = (report(&on), report(&off));
    assert_eq!(a.evaluation.recall_at_rank, b.evaluation.recall_at_rank);
    assert!(a.stretch.is_some() && b.stretch.is_none());
    assert!(on.join("queries_stretched.iscd").is_file());
}

#[test]
fn mismatched_dims_exit_with_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_instance(dir.path(), 3, 5, 1, 0, 16);
    let other = tempfile::tempdir().unwrap();
    let b = write_instance(other.path(), 3, 5, 1, 0, 12);
    let out = dir.path().join("run");
    let o = copydesc(&[
        "pipeline", "--queries", s(&a.queries), "--refs", s(&b.references), "--truth", s(&a.truth),
        "--stretch", "off", "--out-dir", s(&out),
    ]);
    assert_eq!(o.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("error module=search") && stderr.contains("dimension"), "{stderr}");

    let o = copydesc(&["search", "--queries", s(&a.queries), "--refs", s(&b.references), "--out", s(&out.join("p.csv"))]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(copydesc(&["search"]).status.code(), Some(2));
    assert_eq!(copydesc(&["frobnicate"]).status.code(), Some(2));
    let o = copydesc(&["pipeline", "--stretch", "off"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn numeric_precondition_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), 4, 3, 1, 0, 8);
    // queries that are not unit norm
    let set = DescriptorSet::from_parts(Role::Query, 2, vec!["q".into()], vec![3.0f32, 4.0]).unwrap();
    let q = dir.path().join("raw.iscd");
    write_descriptors(&set, &q).unwrap();
    let t = DescriptorSet::from_parts(Role::Training, 2, (0..5).map(|i| format!("t{i}")).collect(), [1.0f32, 0.0].repeat(5))
        .unwrap();
    let tp = dir.path().join("t2.iscd");
    write_descriptors(&t, &tp).unwrap();
    let o = copydesc(&["stretch", "--queries", s(&q), "--training", s(&tp), "--out", s(&dir.path().join("o.iscd"))]);
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!dir.path().join("o.iscd").exists());
    let _ = inst;
}

#[test]
fn failed_run_leaves_partial_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), 5, 6, 1, 0, 16);
    std::fs::write(&inst.truth, "query_id,reference_id\nsrc000_00,src000\nsrc000_00,src001\n").unwrap();
    let out = dir.path().join("run");
    let o = run_pipeline(&inst, &out, &["--stretch", "off"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(out.join("pairs.csv.partial").is_file());
    assert!(out.join("queries.iscd.partial").is_file());
    assert!(!out.join("pairs.csv").exists() && !out.join("report.json").exists());
}

#[test]
fn config_file_then_flags() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), 6, 8, 2, 4, 16);
    let cfg = dir.path().join("pipeline.toml");
    std::fs::write(
        &cfg,
        "queries = [\"queries.iscd\"]\nreferences = [\"references.iscd\"]\ntraining = [\"training.iscd\"]\n\
         truth = \"truth.csv\"\nout_dir = \"from_config\"\nk = 3\nalpha = 3.0\nranks = [1, 3]\n",
    )
    .unwrap();
    let o = copydesc(&["pipeline", "--config", s(&cfg), "--k", "5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&dir.path().join("from_config"));
    assert_eq!((r.config.k, r.config.alpha, r.config.n), (5, 3.0, 5));
    assert_eq!(r.config.ranks, vec![1, 3]);
    assert_eq!(r.config.queries, vec![inst.queries.clone()]);
    let pairs = std::fs::read_to_string(dir.path().join("from_config/pairs.csv")).unwrap();
    assert_eq!(pairs.lines().count(), 1 + 20 * 5);
}

#[test]
fn subcommands_chain_to_the_pipeline_result() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), 7, 10, 2, 5, 16);
    let out = dir.path().join("pipe");
    assert!(run_pipeline(&inst, &out, &["--k", "4"]).status.success());

    let p = |n: &str| dir.path().join(n);
    let steps: Vec<Vec<String>> = vec![
        vec!["fuse".into(), "--scale".into(), s(&inst.queries).into(), "--out".into(), s(&p("fq.iscd")).into()],
        vec![
            "fuse".into(), "--role".into(), "reference".into(), "--scale".into(), s(&inst.references).into(),
            "--out".into(), s(&p("fr.csv")).into(),
        ],
        vec![
            "fuse".into(), "--role".into(), "training".into(), "--scale".into(), s(&inst.training).into(),
            "--out".into(), s(&p("ft.iscd")).into(),
        ],
        vec![
            "stretch".into(), "--queries".into(), s(&p("fq.iscd")).into(), "--training".into(), s(&p("ft.iscd")).into(),
            "--out".into(), s(&p("sq.iscd")).into(), "--report".into(), s(&p("stretch.json")).into(),
        ],
        vec![
            "search".into(), "--queries".into(), s(&p("sq.iscd")).into(), "--refs".into(), s(&p("fr.csv")).into(),
            "--k".into(), "4".into(), "--out".into(), s(&p("pairs.csv")).into(),
        ],
        vec![
            "eval".into(), "--pairs".into(), s(&p("pairs.csv")).into(), "--truth".into(), s(&inst.truth).into(),
            "--out".into(), s(&p("eval.json")).into(),
        ],
    ];
    for args in &steps {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let o = copydesc(&args);
        assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(std::fs::read(p("pairs.csv")).unwrap(), std::fs::read(out.join("pairs.csv")).unwrap());
    assert_eq!(std::fs::read(p("sq.iscd")).unwrap(), std::fs::read(out.join("queries_stretched.iscd")).unwrap());
    let eval: copydesc_core::EvalReport = serde_json::from_slice(&std::fs::read(p("eval.json")).unwrap()).unwrap();
    assert_eq!(eval, report(&out).evaluation);
    let head = std::fs::read_to_string(p("pairs.csv")).unwrap();
    assert!(head.starts_with("query_id,reference_id,score\n"));
}

#[test]
fn schedule_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("lr.csv");
    let o = copydesc(&["schedule", "--epochs", "25", "--per-epoch", "2", "--base-lr", "0.001", "--out", s(&out)]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<Vec<f64>> =
        text.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(text.lines().next(), Some("iteration,epoch,ratio,lr"));
    assert_eq!(rows.len(), 50);
    assert_eq!(rows[0], vec![0.0, 0.0, 0.01, 0.01 * 0.001]);
    assert_eq!(rows[10][2], 1.0);
    assert!((rows[35][1] - 17.5).abs() < 1e-12 && (rows[35][2] - 0.5).abs() < 1e-12);
}

#[test]
fn selfcheck_is_thread_independent_and_catches_faults() {
    let one = copydesc(&["selfcheck", "--threads", "1"]);
    let many = copydesc(&["selfcheck", "--threads", "4"]);
    assert!(one.status.success() && many.status.success());
    assert_eq!(one.stdout, many.stdout);
    let text = String::from_utf8(one.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS ")).count(), 6);

    let bad = copydesc(&["selfcheck", "--corrupt", "schedule"]);
    assert_eq!(bad.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&bad.stdout).contains("FAIL schedule"));
}

fn tree_digest(root: &Path) -> Vec<(PathBuf, String)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(root).unwrap().to_path_buf(), format!("{:x}", Sha256::digest(std::fs::read(&p).unwrap()))));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn augment_command_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("src");
    std::fs::create_dir(&src).unwrap();
    for i in 0..3u32 {
        image::RgbImage::from_fn(30 + i, 40, |x, y| image::Rgb([(x * 8) as u8, (y * 6) as u8, (i * 70) as u8]))
            .save(src.join(format!("img{i}.png")))
            .unwrap();
    }
    let mut digests = Vec::new();
    for (run, threads) in [("a", "1"), ("b", "3")] {
        let out = dir.path().join(run);
        let o = copydesc(&[
            "augment", "--src", s(&src), "--out", s(&out), "--copies", "4", "--size", "32", "--seed", "42",
            "--threads", threads,
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        digests.push(tree_digest(&out));
    }
    assert_eq!(digests[0], digests[1]);
    assert_eq!(digests[0].iter().filter(|(p, _)| p.starts_with("copies")).count(), 12);

    let bad_cfg = dir.path().join("aug.toml");
    std::fs::write(&bad_cfg, "min_ops = 9").unwrap();
    let o = copydesc(&["augment", "--src", s(&src), "--out", s(&dir.path().join("c")), "--config", s(&bad_cfg)]);
    assert_eq!(o.status.code(), Some(2));
}
