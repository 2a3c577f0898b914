#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use tlgc::LabeledDataset;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn unit_vector(rng: &mut ChaCha8Rng, d: usize) -> DVector<f64> {
    let v = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let n = v.norm();
    v / n
}

/// Gaussian classes with random means (scale `sep`) and random anisotropic
/// within-class spread.
pub fn random_problem(
    rng: &mut ChaCha8Rng,
    dim: usize,
    counts: &[usize],
    sep: f64,
) -> LabeledDataset {
    let n: usize = counts.iter().sum();
    let mix = gaussian_matrix(rng, dim, dim) / (dim as f64).sqrt();
    let mut x = DMatrix::zeros(dim, n);
    let mut labels = Vec::with_capacity(n);
    let mut col = 0;
    for (k, &nk) in counts.iter().enumerate() {
        let mean = gaussian_matrix(rng, dim, 1) * sep;
        for _ in 0..nk {
            let noise = &mix * gaussian_matrix(rng, dim, 1);
            x.set_column(col, &(&mean + noise).column(0));
            labels.push(k + 1);
            col += 1;
        }
    }
    LabeledDataset::new(x, labels, counts.len()).unwrap()
}

/// Random small problem: `C ∈ {2, 3}`, `D ≤ max_dim`, `n ≤ max_n`.
pub fn random_small_problem(rng: &mut ChaCha8Rng, max_dim: usize, max_n: usize) -> LabeledDataset {
    let classes = rng.random_range(2..=3usize);
    let dim = rng.random_range(2..=max_dim);
    let per = max_n / classes;
    let counts: Vec<usize> = (0..classes).map(|_| rng.random_range(3..=per)).collect();
    random_problem(rng, dim, &counts, 1.5)
}

/// Angle in degrees between two lines through the origin.
pub fn line_angle_deg(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let c = (a.dot(b) / (a.norm() * b.norm())).abs().min(1.0);
    c.acos().to_degrees()
}
