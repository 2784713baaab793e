//! Synthetic descriptor instances written to disk for end-to-end runs.

use std::path::{Path, PathBuf};

use copydesc_core::io::write_descriptors;
use copydesc_core::{DescriptorSet, Role};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub struct Instance {
    pub queries: PathBuf,
    pub references: PathBuf,
    pub training: PathBuf,
    pub truth: PathBuf,
}

fn unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f32> {
    let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| (x / n) as f32).collect()
}

fn perturbed(rng: &mut ChaCha8Rng, base: &[f32], noise: f64) -> Vec<f32> {
    let v: Vec<f64> = base.iter().map(|x| *x as f64 + noise * rng.sample::<f64, _>(StandardNormal)).collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| (x / n) as f32).collect()
}

fn save(dir: &Path, name: &str, role: Role, ids: Vec<String>, rows: Vec<Vec<f32>>) -> PathBuf {
    let dim = rows[0].len();
    let set = DescriptorSet::from_parts(role, dim, ids, rows.concat()).unwrap();
    let path = dir.join(name);
    write_descriptors(&set, &path).unwrap();
    path
}

/// `sources` references; `copies` noisy copies of each as queries (ids
/// `{source}_{i:02}`), plus `distractors` unrelated queries and a random
/// training set. Truth maps every copy to its source.
pub fn write_instance(dir: &Path, seed: u64, sources: usize, copies: usize, distractors: usize, dim: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ref_ids: Vec<String> = (0..sources).map(|i| format!("src{i:03}")).collect();
    let refs: Vec<Vec<f32>> = (0..sources).map(|_| unit(&mut rng, dim)).collect();
    let mut q_ids = Vec::new();
    let mut queries = Vec::new();
    let mut truth = String::from("query_id,reference_id\n");
    for (id, r) in ref_ids.iter().zip(&refs) {
        for c in 0..copies {
            let qid = format!("{id}_{c:02}");
            truth.push_str(&format!("{qid},{id}\n"));
            q_ids.push(qid);
            queries.push(perturbed(&mut rng, r, 0.05));
        }
    }
    for d in 0..distractors {
        q_ids.push(format!("distractor{d:03}"));
        queries.push(unit(&mut rng, dim));
    }
    let training: Vec<Vec<f32>> = (0..(4 * sources).max(10)).map(|_| unit(&mut rng, dim)).collect();
    let t_ids = (0..training.len()).map(|i| format!("train{i:04}")).collect();
    let truth_path = dir.join("truth.csv");
    std::fs::write(&truth_path, truth).unwrap();
    Instance {
        queries: save(dir, "queries.iscd", Role::Query, q_ids, queries),
        references: save(dir, "references.iscd", Role::Reference, ref_ids, refs),
        training: save(dir, "training.iscd", Role::Training, t_ids, training),
        truth: truth_path,
    }
}
