//! Seeded random instance generators shared by the integration suites.

#![allow(dead_code)]

use copydesc_core::{DescriptorSet, Role};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn gaussian(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f32> {
    (0..dim).map(|_| rng.sample::<f32, _>(StandardNormal)).collect()
}

pub fn unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f32> {
    let v = gaussian(rng, dim);
    let n: f64 = v.iter().map(|x| (*x as f64).powi(2)).sum::<f64>().sqrt();
    v.iter().map(|x| (*x as f64 / n) as f32).collect()
}

pub fn ids(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i:05}")).collect()
}

pub fn set_from_rows(role: Role, prefix: &str, rows: &[Vec<f32>]) -> DescriptorSet<f32> {
    let dim = rows[0].len();
    DescriptorSet::from_parts(role, dim, ids(prefix, rows.len()), rows.concat()).unwrap()
}

pub fn random_set(rng: &mut ChaCha8Rng, role: Role, prefix: &str, n: usize, dim: usize, unit_norm: bool) -> DescriptorSet<f32> {
    let rows: Vec<Vec<f32>> = (0..n)
        .map(|_| if unit_norm { unit(rng, dim) } else { gaussian(rng, dim) })
        .collect();
    set_from_rows(role, prefix, &rows)
}
