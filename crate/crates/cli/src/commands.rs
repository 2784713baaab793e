use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use copydesc_augment::{generate_corpus, AugConfig, CorpusPlan};
use copydesc_core::io::LoadOptions;
use copydesc_core::pairs::{read_pairs, read_truth, write_pairs};
use copydesc_core::trainmath::{lr_ratio, ScheduleConfig};
use copydesc_core::{evaluate, fuse_multiscale, knn_search, stretch, Error, Role, SearchOptions, StretchConfig};
use log::info;

use crate::artifacts::Staged;
use crate::config::{Overrides, PipelineConfig};
use crate::failure::{Failure, Tag, EXIT_NUMERIC};
use crate::pipeline::{load_set, run_pipeline, write_json, write_set};
use crate::selfcheck::{run_selfcheck, Expected};

#[derive(Debug, Parser)]
#[command(name = "copydesc", version, about = "Copy-detection descriptor pipeline")]
pub struct Cli {
    /// Worker threads for parallel stages (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate edited copies of source images with ground truth and overlay labels.
    Augment(AugmentArgs),
    /// Fuse per-scale descriptor files into one unit-norm set.
    Fuse(FuseArgs),
    /// Scale each query by alpha times its mean top-n training similarity.
    Stretch(StretchArgs),
    /// Exact k-nearest-neighbor search by Euclidean distance.
    Search(SearchArgs),
    /// Score candidate pairs against ground truth.
    Eval(EvalArgs),
    /// Tabulate the learning-rate schedule.
    Schedule(ScheduleArgs),
    /// Fuse, stretch, search and evaluate in one run.
    Pipeline(PipelineArgs),
    /// Run built-in numerical checks.
    Selfcheck(SelfcheckArgs),
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    #[arg(long)]
    pub src: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 19)]
    pub copies: u32,
    #[arg(long, default_value_t = 256)]
    pub size: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Keep every n-th source in sorted order.
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
    /// TOML file with transform policy and ranges.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RoleArg {
    Query,
    Reference,
    Training,
}

impl From<RoleArg> for Role {
    fn from(r: RoleArg) -> Self {
        match r {
            RoleArg::Query => Role::Query,
            RoleArg::Reference => Role::Reference,
            RoleArg::Training => Role::Training,
        }
    }
}

#[derive(Debug, Args)]
pub struct FuseArgs {
    /// One descriptor file per scale, in identical id order.
    #[arg(long = "scale", required = true)]
    pub scales: Vec<PathBuf>,
    /// Role of the inputs (assigned to CSV files, checked for binary files).
    #[arg(long, value_enum, default_value = "query")]
    pub role: RoleArg,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct StretchArgs {
    #[arg(long)]
    pub queries: PathBuf,
    #[arg(long)]
    pub training: PathBuf,
    #[arg(long, default_value_t = 2.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 5)]
    pub n: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Per-query s_n values and summary as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub queries: PathBuf,
    #[arg(long)]
    pub refs: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub pairs: PathBuf,
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "1,10")]
    pub ranks: Vec<usize>,
    /// Report path; printed to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Include the precision-recall curve.
    #[arg(long)]
    pub curve: bool,
}

#[derive(Debug, Args)]
pub struct ScheduleArgs {
    #[arg(long, default_value_t = 25.0)]
    pub epochs: f64,
    #[arg(long, default_value_t = 5.0)]
    pub warmup: f64,
    #[arg(long, default_value_t = 10.0)]
    pub plateau_end: f64,
    #[arg(long, default_value_t = 3.5e-4)]
    pub base_lr: f64,
    /// Iterations per epoch.
    #[arg(long, default_value_t = 8000)]
    pub per_epoch: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// TOML config; flags given here take precedence over it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Query descriptor file per scale (repeatable).
    #[arg(long)]
    pub queries: Vec<PathBuf>,
    #[arg(long)]
    pub refs: Vec<PathBuf>,
    #[arg(long)]
    pub training: Vec<PathBuf>,
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub stretch: Option<Switch>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub ranks: Option<Vec<usize>>,
    #[arg(long)]
    pub curve: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Kernel {
    Distance,
    MicroAp,
    Gem,
    Schedule,
    Stretch,
}

#[derive(Debug, Args)]
pub struct SelfcheckArgs {
    /// Perturb one reference constant to confirm the check catches it.
    #[arg(long, value_enum, hide = true)]
    pub corrupt: Option<Kernel>,
}

pub fn run(cli: Cli) -> Result<(), Failure> {
    let threads = cli.threads;
    match cli.command {
        Command::Augment(a) => augment(a, threads),
        Command::Fuse(a) => fuse(a),
        Command::Stretch(a) => stretch_cmd(a, threads),
        Command::Search(a) => search(a, threads),
        Command::Eval(a) => eval(a),
        Command::Schedule(a) => schedule(a),
        Command::Pipeline(a) => pipeline(a, threads),
        Command::Selfcheck(a) => selfcheck(a, threads),
    }
}

fn augment(a: AugmentArgs, threads: usize) -> Result<(), Failure> {
    let policy = match &a.config {
        Some(p) => AugConfig::load(p).tag("augment")?,
        None => AugConfig::default(),
    };
    let plan = CorpusPlan { copies_per_source: a.copies, output_size: a.size, source_stride: a.stride, policy };
    let manifest = generate_corpus(&a.src, &a.out, &plan, a.seed, threads).tag("augment")?;
    let boxed = manifest.records.iter().filter(|r| !r.overlay_boxes.is_empty()).count();
    info!(
        "event=augmented copies={} with_boxes={} out={:?}",
        manifest.records.len(),
        boxed,
        a.out.display().to_string()
    );
    Ok(())
}

fn fuse(a: FuseArgs) -> Result<(), Failure> {
    let role = Role::from(a.role);
    let sets = a
        .scales
        .iter()
        .map(|p| load_set(p, role, LoadOptions::default()))
        .collect::<Result<Vec<_>, _>>()?;
    let fused = fuse_multiscale(&sets).tag("fusion")?;
    let mut staged = Staged::new();
    staged.stage("fusion", &a.out, |p| write_set(&fused, &a.out, p))?;
    staged.commit()?;
    info!("event=fused scales={} count={} dim={}", sets.len(), fused.len(), fused.dim());
    Ok(())
}

fn stretch_cmd(a: StretchArgs, threads: usize) -> Result<(), Failure> {
    let queries = load_set(&a.queries, Role::Query, LoadOptions::default())?;
    let training = load_set(&a.training, Role::Training, LoadOptions::default())?;
    let cfg = StretchConfig { alpha: a.alpha, n: a.n };
    let (out, report) = stretch(&queries, &training, &cfg, threads).tag("stretch")?;
    let mut staged = Staged::new();
    staged.stage("stretch", &a.out, |p| write_set(&out, &a.out, p))?;
    if let Some(path) = &a.report {
        staged.stage("stretch", path, |p| write_json(&report, p))?;
    }
    staged.commit()?;
    info!(
        "event=stretched queries={} s_n_min={} s_n_mean={} s_n_max={} flagged={}",
        out.len(),
        report.summary.min,
        report.summary.mean,
        report.summary.max,
        report.flagged.len()
    );
    Ok(())
}

fn search(a: SearchArgs, threads: usize) -> Result<(), Failure> {
    // stretched queries may legitimately contain zero rows
    let queries = load_set(&a.queries, Role::Query, LoadOptions { reject_zero: false })?;
    let refs = load_set(&a.refs, Role::Reference, LoadOptions::default())?;
    if queries.dim() != refs.dim() {
        return Err(Error::DimMismatch { expected: queries.dim(), found: refs.dim() }).tag("search");
    }
    let opts = SearchOptions { k: a.k, threads, ..SearchOptions::default() };
    let candidates = knn_search(&queries, &refs, &opts).tag("search")?.into_vec();
    let mut staged = Staged::new();
    staged.stage("search", &a.out, |p| {
        write_pairs(&candidates, BufWriter::new(File::create(p).tag("io")?)).tag("search")
    })?;
    staged.commit()?;
    info!("event=searched queries={} references={} candidates={}", queries.len(), refs.len(), candidates.len());
    Ok(())
}

fn eval(a: EvalArgs) -> Result<(), Failure> {
    let candidates = read_pairs(File::open(&a.pairs).tag("metrics")?).tag("metrics")?;
    let truth = read_truth(File::open(&a.truth).tag("metrics")?).tag("metrics")?;
    if a.ranks.is_empty() || a.ranks.contains(&0) {
        return Err(Failure::usage("metrics", "ranks must be positive integers"));
    }
    let report = evaluate(&candidates, &truth, &a.ranks, a.curve).tag("metrics")?;
    match &a.out {
        Some(path) => {
            let mut staged = Staged::new();
            staged.stage("metrics", path, |p| write_json(&report, p))?;
            staged.commit()?;
        }
        None => println!("{}", serde_json::to_string_pretty(&report).tag("metrics")?),
    }
    info!("event=evaluated micro_ap={} recall_at_p90={}", report.micro_ap, report.recall_at_p90);
    Ok(())
}

/// Writes `iteration,epoch,ratio,lr` for every iteration of the run.
pub fn write_schedule(cfg: &ScheduleConfig, per_epoch: u64, out: &Path) -> Result<u64, Failure> {
    if per_epoch == 0 {
        return Err(Failure::usage("schedule", "per-epoch must be at least 1"));
    }
    cfg.validate().tag("schedule")?;
    let total = (cfg.total_epochs * per_epoch as f64).ceil() as u64;
    let mut w = BufWriter::new(File::create(out).tag("io")?);
    writeln!(w, "iteration,epoch,ratio,lr").tag("io")?;
    for it in 0..total {
        let epoch = it as f64 / per_epoch as f64;
        let ratio = lr_ratio(epoch, cfg).tag("schedule")?;
        writeln!(w, "{it},{epoch},{ratio},{}", ratio * cfg.base_lr).tag("io")?;
    }
    w.flush().tag("io")?;
    Ok(total)
}

fn schedule(a: ScheduleArgs) -> Result<(), Failure> {
    let cfg = ScheduleConfig {
        warmup_epochs: a.warmup,
        plateau_end: a.plateau_end,
        total_epochs: a.epochs,
        base_lr: a.base_lr,
    };
    let mut staged = Staged::new();
    let mut rows = 0;
    staged.stage("schedule", &a.out, |p| {
        rows = write_schedule(&cfg, a.per_epoch, p)?;
        Ok(())
    })?;
    staged.commit()?;
    info!("event=schedule rows={rows}");
    Ok(())
}

fn pipeline(a: PipelineArgs, threads: usize) -> Result<(), Failure> {
    let mut cfg = match &a.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    cfg.apply(Overrides {
        queries: a.queries,
        references: a.refs,
        training: a.training,
        truth: a.truth,
        out_dir: a.out_dir,
        stretch: a.stretch.map(|s| s == Switch::On),
        alpha: a.alpha,
        n: a.n,
        k: a.k,
        ranks: a.ranks,
        curve: a.curve.then_some(true),
    });
    let report = run_pipeline(&cfg, threads)?;
    let ranks: Vec<String> =
        report.evaluation.recall_at_rank.iter().map(|(k, v)| format!("recall_at_{k}={v}")).collect();
    info!(
        "event=pipeline_done micro_ap={} recall_at_p90={} {} out_dir={:?}",
        report.evaluation.micro_ap,
        report.evaluation.recall_at_p90,
        ranks.join(" "),
        cfg.out_dir.display().to_string()
    );
    Ok(())
}

fn selfcheck(a: SelfcheckArgs, threads: usize) -> Result<(), Failure> {
    let mut expected = Expected::default();
    match a.corrupt {
        Some(Kernel::Distance) => expected.distance += 1e-6,
        Some(Kernel::MicroAp) => expected.micro_ap += 1e-6,
        Some(Kernel::Gem) => expected.gem_p64 = 3.0,
        Some(Kernel::Schedule) => expected.schedule[0].1 = 0.0,
        Some(Kernel::Stretch) => expected.stretch += 1e-6,
        None => {}
    }
    let summary = run_selfcheck(&expected, threads);
    print!("{}", summary.render());
    if summary.all_passed() {
        Ok(())
    } else {
        let failed: Vec<&str> = summary.results.iter().filter(|r| !r.passed).map(|r| r.kernel).collect();
        Err(Failure::new("selfcheck", EXIT_NUMERIC, format!("failed kernels: {}", failed.join(","))))
    }
}
