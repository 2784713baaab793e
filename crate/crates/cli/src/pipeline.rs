//! End-to-end test-time flow: fuse scales, stretch queries, search, score.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use copydesc_core::io::{read_descriptors, write_binary, write_csv, LoadOptions};
use copydesc_core::pairs::{read_truth, write_pairs};
use copydesc_core::stretch::StretchReport;
use copydesc_core::{
    evaluate, fuse_multiscale, knn_search, stretch, DescriptorSet, Error, EvalReport, Role, SearchOptions,
};
use log::info;
use serde::{Deserialize, Serialize};

use crate::artifacts::Staged;
use crate::config::PipelineConfig;
use crate::failure::{Failure, Tag};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    /// Effective configuration after defaults, file and flags.
    pub config: PipelineConfig,
    pub stretch: Option<StretchOutcome>,
    pub evaluation: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StretchOutcome {
    pub summary: copydesc_core::stretch::Summary,
    pub flagged: Vec<String>,
}

/// Loads a descriptor file and checks it carries `role`; CSV files are
/// assigned `role`.
pub fn load_set(path: &Path, role: Role, opts: LoadOptions) -> Result<DescriptorSet<f32>, Failure> {
    let set = read_descriptors(path, role, opts)
        .map_err(|e| Failure::new("descriptor", crate::failure::core_code(&e), format!("{}: {e}", path.display())))?;
    if set.role() != role {
        return Err(Error::RoleMismatch { expected: role, found: set.role() }).tag("descriptor");
    }
    Ok(set)
}

/// Loads one file per scale and fuses them.
pub fn load_fused(paths: &[PathBuf], role: Role) -> Result<DescriptorSet<f32>, Failure> {
    let sets = paths
        .iter()
        .map(|p| load_set(p, role, LoadOptions::default()))
        .collect::<Result<Vec<_>, _>>()?;
    fuse_multiscale(&sets).tag("fusion")
}

/// Writes `set` to `tmp` in the format implied by `dest`'s extension.
pub fn write_set(set: &DescriptorSet<f32>, dest: &Path, tmp: &Path) -> Result<(), Failure> {
    let w = BufWriter::new(File::create(tmp).tag("io")?);
    let csv = dest.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if csv { write_csv(set, w) } else { write_binary(set, w) }.tag("io")
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<(), Failure> {
    let mut bytes = serde_json::to_vec_pretty(value).tag("io")?;
    bytes.push(b'\n');
    std::fs::write(path, bytes).tag("io")
}

/// Runs the pipeline, writing into `cfg.out_dir`:
/// `queries.iscd`, `references.iscd`, optionally `training.iscd`,
/// `queries_stretched.iscd` and `stretch.json`, then `pairs.csv` and
/// `report.json`. Files stay as `*.partial` unless every stage succeeds.
pub fn run_pipeline(cfg: &PipelineConfig, threads: usize) -> Result<PipelineReport, Failure> {
    cfg.validate()?;
    let out = &cfg.out_dir;
    let mut staged = Staged::new();

    let queries = load_fused(&cfg.queries, Role::Query)?;
    let references = load_fused(&cfg.references, Role::Reference)?;
    if queries.dim() != references.dim() {
        return Err(Error::DimMismatch { expected: queries.dim(), found: references.dim() }).tag("search");
    }
    info!(
        "event=fused queries={} references={} dim={} scales={}",
        queries.len(),
        references.len(),
        queries.dim(),
        cfg.queries.len()
    );
    let dest = out.join("queries.iscd");
    staged.stage("fusion", &dest, |p| write_set(&queries, &dest, p))?;
    let dest = out.join("references.iscd");
    staged.stage("fusion", &dest, |p| write_set(&references, &dest, p))?;

    let mut stretch_outcome = None;
    let search_queries = if cfg.stretch {
        let training = load_fused(&cfg.training, Role::Training)?;
        let dest = out.join("training.iscd");
    staged.stage("fusion", &dest, |p| write_set(&training, &dest, p))?;
        let (stretched, report): (_, StretchReport) =
            stretch(&queries, &training, &cfg.stretch_config(), threads).tag("stretch")?;
        info!(
            "event=stretched alpha={} n={} s_n_min={} s_n_mean={} s_n_max={} flagged={}",
            report.alpha,
            report.n,
            report.summary.min,
            report.summary.mean,
            report.summary.max,
            report.flagged.len()
        );
        let dest = out.join("queries_stretched.iscd");
    staged.stage("stretch", &dest, |p| write_set(&stretched, &dest, p))?;
        staged.stage("stretch", &out.join("stretch.json"), |p| write_json(&report, p))?;
        stretch_outcome = Some(StretchOutcome { summary: report.summary, flagged: report.flagged });
        stretched
    } else {
        queries
    };

    let opts = SearchOptions { k: cfg.k, threads, ..SearchOptions::default() };
    let candidates = knn_search(&search_queries, &references, &opts).tag("search")?.into_vec();
    info!("event=searched k={} candidates={}", cfg.k, candidates.len());
    staged.stage("search", &out.join("pairs.csv"), |p| {
        write_pairs(&candidates, BufWriter::new(File::create(p).tag("io")?)).tag("search")
    })?;

    let truth_path = cfg.truth.as_ref().expect("validated");
    let truth = read_truth(File::open(truth_path).tag("metrics")?).tag("metrics")?;
    let evaluation = evaluate(&candidates, &truth, &cfg.ranks, cfg.curve).tag("metrics")?;
    info!("event=evaluated micro_ap={} recall_at_p90={}", evaluation.micro_ap, evaluation.recall_at_p90);

    let report = PipelineReport { config: cfg.clone(), stretch: stretch_outcome, evaluation };
    staged.stage("metrics", &out.join("report.json"), |p| write_json(&report, p))?;
    staged.commit()?;
    Ok(report)
}
