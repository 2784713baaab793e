//! Embedded micro-oracles: each kernel is run on a fixed instance and
//! compared against a closed-form value or a naive recomputation.

use copydesc_core::trainmath::{gem_pool, lr_ratio, FeatureMap, GemParams, ScheduleConfig};
use copydesc_core::{
    euclidean_distance, knn_search, micro_ap, stretch, Descriptor, DescriptorSet, GroundTruth, MatchCandidate, Role,
    SearchOptions, StretchConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Reference values the kernels are checked against. Tests corrupt these
/// to confirm that a wrong value is reported.
#[derive(Debug, Clone, PartialEq)]
pub struct Expected {
    /// ‖(1, 2, 2) − 0‖.
    pub distance: f64,
    /// µAP of the three-query toy ranking.
    pub micro_ap: f64,
    /// GeM of {1, 2, 3} at p = 1 and p = 64.
    pub gem_p1: f64,
    pub gem_p64: f64,
    /// (epoch, ratio) pairs of the default schedule.
    pub schedule: [(f64, f64); 5],
    /// First component of the stretched two-dimensional toy query.
    pub stretch: f64,
}

impl Default for Expected {
    fn default() -> Self {
        Self {
            distance: 3.0,
            micro_ap: 5.0 / 9.0,
            gem_p1: 2.0,
            gem_p64: 2.948_942_028_610_598,
            schedule: [(0.0, 0.01), (5.0, 1.0), (7.0, 1.0), (10.0, 1.0), (17.5, 0.5)],
            stretch: 1.707_106_781_186_547_5,
        }
    }
}

const TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelResult {
    pub kernel: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub results: Vec<KernelResult>,
}

impl Summary {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    /// One `PASS|FAIL kernel detail` line per kernel.
    pub fn render(&self) -> String {
        self.results
            .iter()
            .map(|r| format!("{} {} {}\n", if r.passed { "PASS" } else { "FAIL" }, r.kernel, r.detail))
            .collect()
    }
}

fn compare(kernel: &'static str, got: f64, want: f64) -> KernelResult {
    let diff = (got - want).abs();
    KernelResult {
        kernel,
        passed: diff <= TOLERANCE,
        detail: format!("got={got} want={want} diff={diff:e}"),
    }
}

fn failed(kernel: &'static str, e: impl std::fmt::Display) -> KernelResult {
    KernelResult { kernel, passed: false, detail: format!("error={e}") }
}

fn check_distance(exp: &Expected) -> KernelResult {
    match euclidean_distance(&[1.0f64, 2.0, 2.0], &[0.0, 0.0, 0.0]) {
        Ok(d) => compare("distance", d, exp.distance),
        Err(e) => failed("distance", e),
    }
}

fn check_micro_ap(exp: &Expected) -> KernelResult {
    let candidates = [
        MatchCandidate::new("q1", "r1", 0.1),
        MatchCandidate::new("q2", "rx", 0.2),
        MatchCandidate::new("q2", "r2", 0.3),
    ];
    let truth = GroundTruth::from_pairs([("q1", "r1"), ("q2", "r2"), ("q3", "r3")]).expect("unique queries");
    match micro_ap(&candidates, &truth) {
        Ok(v) => compare("micro_ap", v, exp.micro_ap),
        Err(e) => failed("micro_ap", e),
    }
}

fn check_gem(exp: &Expected) -> KernelResult {
    let fm = FeatureMap::new(vec![vec![1.0f64, 2.0, 3.0]]).expect("valid map");
    let pooled = |p: f64| gem_pool(&fm, &GemParams::uniform(1, p)).map(|v| v[0]);
    match (pooled(1.0), pooled(64.0)) {
        (Ok(a), Ok(b)) => {
            let (da, db) = ((a - exp.gem_p1).abs(), (b - exp.gem_p64).abs());
            KernelResult {
                kernel: "gem",
                passed: da <= TOLERANCE && db <= TOLERANCE,
                detail: format!("p1={a} p64={b} diff={:e}", da.max(db)),
            }
        }
        (Err(e), _) | (_, Err(e)) => failed("gem", e),
    }
}

fn check_schedule(exp: &Expected) -> KernelResult {
    let cfg = ScheduleConfig::default();
    let mut worst = 0.0f64;
    for &(epoch, want) in &exp.schedule {
        match lr_ratio(epoch, &cfg) {
            Ok(got) => worst = worst.max((got - want).abs()),
            Err(e) => return failed("schedule", e),
        }
    }
    KernelResult { kernel: "schedule", passed: worst <= TOLERANCE, detail: format!("points=5 max_diff={worst:e}") }
}

fn check_stretch(exp: &Expected, threads: usize) -> KernelResult {
    let h = 0.5f64.sqrt();
    let queries = DescriptorSet::from_descriptors(Role::Query, vec![Descriptor::new("q", vec![1.0f64, 0.0])]);
    let training = DescriptorSet::from_descriptors(
        Role::Training,
        vec![
            Descriptor::new("a", vec![1.0, 0.0]),
            Descriptor::new("b", vec![0.0, 1.0]),
            Descriptor::new("c", vec![h, h]),
        ],
    );
    let result = queries
        .and_then(|q| training.map(|t| (q, t)))
        .and_then(|(q, t)| stretch(&q, &t, &StretchConfig { alpha: 2.0, n: 2 }, threads));
    match result {
        Ok((out, _)) => compare("stretch", out.vector(0)[0], exp.stretch),
        Err(e) => failed("stretch", e),
    }
}

fn random_set(rng: &mut ChaCha8Rng, role: Role, prefix: &str, n: usize, dim: usize) -> DescriptorSet<f32> {
    let ids = (0..n).map(|i| format!("{prefix}{i:03}")).collect();
    let data = (0..n * dim).map(|_| rng.random_range(-1.0f32..1.0)).collect();
    DescriptorSet::from_parts(role, dim, ids, data).expect("random set is valid")
}

/// kNN against a full sort of naively computed distances.
fn check_search(threads: usize) -> KernelResult {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let q = random_set(&mut rng, Role::Query, "q", 24, 16);
    let r = random_set(&mut rng, Role::Reference, "r", 300, 16);
    let k = 7;
    let fast = match knn_search(&q, &r, &SearchOptions { k, threads, ..SearchOptions::default() }) {
        Ok(c) => c.into_vec(),
        Err(e) => return failed("search", e),
    };
    let mut worst = 0.0f64;
    let mut order_ok = fast.len() == q.len() * k;
    for (qi, (_, qv)) in q.iter().enumerate() {
        let mut all: Vec<(f64, &str)> = r
            .iter()
            .map(|(id, rv)| {
                let d: f64 = qv.iter().zip(rv).map(|(a, b)| (*a as f64 - *b as f64).powi(2)).sum();
                (d.sqrt(), id)
            })
            .collect();
        all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(b.1)));
        for (j, (d, id)) in all.iter().take(k).enumerate() {
            let Some(c) = fast.get(qi * k + j) else { break };
            order_ok &= c.reference_id == *id;
            worst = worst.max((c.score - d).abs() / d.max(1e-12));
        }
    }
    KernelResult {
        kernel: "search",
        passed: order_ok && worst <= 1e-9,
        detail: format!("queries=24 references=300 k={k} order_match={order_ok} max_rel_diff_le_1e-9={}", worst <= 1e-9),
    }
}

pub fn run_selfcheck(expected: &Expected, threads: usize) -> Summary {
    Summary {
        results: vec![
            check_distance(expected),
            check_search(threads),
            check_micro_ap(expected),
            check_gem(expected),
            check_schedule(expected),
            check_stretch(expected, threads),
        ],
    }
}
