//! Pairwise between-class and within-class structures.
//!
//! For every class `k` with sample set `U_k` (`n_k` samples) and complement
//! `Ū_k` (`n_k̄` samples):
//!
//! * the L2 dissimilarity matrices sum `(x_i - x_j)(x_i - x_j)ᵀ` over ordered
//!   pairs, weighted by `1/(n_k n_k̄)` (between) or `1/n_k²` (within);
//! * the L1 dispersion matrices keep each weighted difference as a column.
//!
//! Column order is class-major, then `i`, then `j`, with indices ascending
//! within each class. Within-class columns include `i = j` (zero columns).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::hsi_io::LabeledDataset;
use crate::linalg;

#[derive(Debug, Clone, PartialEq)]
pub struct ScatterPair {
    pub between: DMatrix<f64>,
    pub within: DMatrix<f64>,
    pub total: DMatrix<f64>,
}

/// Origin of one dispersion column: class id and the sample indices of the
/// ordered pair `(i, j)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairIndex {
    pub class: usize,
    pub i: usize,
    pub j: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispersionSet {
    pub between: DMatrix<f64>,
    pub within: DMatrix<f64>,
    pub between_pairs: Vec<PairIndex>,
    pub within_pairs: Vec<PairIndex>,
}

impl DispersionSet {
    pub fn dim(&self) -> usize {
        self.between.nrows()
    }

    /// `‖vᵀF‖₁` and `‖vᵀG‖₁`.
    pub fn l1_norms(&self, v: &DVector<f64>) -> (f64, f64) {
        (l1_projection(&self.between, v), l1_projection(&self.within, v))
    }
}

pub(crate) fn l1_projection(cols: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
    let mut acc = 0.0;
    for c in cols.column_iter() {
        acc += linalg::dot(c.as_slice(), v.as_slice()).abs();
    }
    acc
}

fn class_sets(ds: &LabeledDataset) -> Result<Vec<Vec<usize>>> {
    let sets = ds.class_indices();
    let nonempty = sets.iter().filter(|s| !s.is_empty()).count();
    if nonempty < 2 || nonempty != sets.len() {
        return Err(Error::TooFewClasses(nonempty));
    }
    Ok(sets)
}

fn complement(n: usize, set: &[usize]) -> Vec<usize> {
    let mut mask = vec![false; n];
    for &i in set {
        mask[i] = true;
    }
    (0..n).filter(|&i| !mask[i]).collect()
}

/// Σ_{i∈A, j∈B} (x_i - x_j)(x_i - x_j)ᵀ in closed form:
/// `|B|·Σ_A x xᵀ + |A|·Σ_B x xᵀ - s_A s_Bᵀ - s_B s_Aᵀ`.
fn cross_scatter(x: &DMatrix<f64>, a: &[usize], b: &[usize]) -> DMatrix<f64> {
    let xa = x.select_columns(a);
    let xb = x.select_columns(b);
    let sa: DVector<f64> = xa.column_sum();
    let sb: DVector<f64> = xb.column_sum();
    let ga = &xa * xa.transpose();
    let gb = &xb * xb.transpose();
    let cross = &sa * sb.transpose();
    ga * b.len() as f64 + gb * a.len() as f64 - &cross - cross.transpose()
}

pub fn build_scatter(ds: &LabeledDataset) -> Result<ScatterPair> {
    let sets = class_sets(ds)?;
    let d = ds.dim();
    let n = ds.len();
    let x = ds.x();
    let mut between = DMatrix::zeros(d, d);
    let mut within = DMatrix::zeros(d, d);
    for set in &sets {
        let other = complement(n, set);
        let nk = set.len() as f64;
        let nkbar = other.len() as f64;
        between += cross_scatter(x, set, &other) / (nk * nkbar);
        within += cross_scatter(x, set, set) / (nk * nk);
    }
    between = 0.5 * (&between + between.transpose());
    within = 0.5 * (&within + within.transpose());
    let total = &between + &within;
    Ok(ScatterPair {
        between,
        within,
        total,
    })
}

pub fn build_dispersions(ds: &LabeledDataset) -> Result<DispersionSet> {
    let sets = class_sets(ds)?;
    let d = ds.dim();
    let n = ds.len();
    let x = ds.x();

    let pb: usize = sets.iter().map(|s| s.len() * (n - s.len())).sum();
    let pw: usize = sets.iter().map(|s| s.len() * s.len()).sum();
    let mut between = DMatrix::zeros(d, pb);
    let mut within = DMatrix::zeros(d, pw);
    let mut between_pairs = Vec::with_capacity(pb);
    let mut within_pairs = Vec::with_capacity(pw);

    for (k, set) in sets.iter().enumerate() {
        let other = complement(n, set);
        let wb = 1.0 / (set.len() * other.len()) as f64;
        let ww = 1.0 / (set.len() * set.len()) as f64;
        for &i in set {
            for &j in &other {
                let col = between_pairs.len();
                for r in 0..d {
                    between[(r, col)] = (x[(r, i)] - x[(r, j)]) * wb;
                }
                between_pairs.push(PairIndex { class: k + 1, i, j });
            }
            for &j in set {
                let col = within_pairs.len();
                for r in 0..d {
                    within[(r, col)] = (x[(r, i)] - x[(r, j)]) * ww;
                }
                within_pairs.push(PairIndex { class: k + 1, i, j });
            }
        }
    }
    Ok(DispersionSet {
        between,
        within,
        between_pairs,
        within_pairs,
    })
}

fn check_unit(v: &DVector<f64>) -> Result<()> {
    let n = linalg::norm(v.as_slice());
    if (n - 1.0).abs() > 1e-10 {
        return Err(Error::NotUnitNorm(n));
    }
    Ok(())
}

/// `c ← c - v (vᵀ c)` for every column.
pub fn deflate_columns(m: &mut DMatrix<f64>, v: &DVector<f64>) {
    for mut c in m.column_iter_mut() {
        let p = linalg::dot(c.as_slice(), v.as_slice());
        c.axpy(-p, v, 1.0);
    }
}

pub fn deflate_dispersions(disp: &DispersionSet, v: &DVector<f64>) -> Result<DispersionSet> {
    check_unit(v)?;
    if v.len() != disp.dim() {
        return Err(Error::DimensionMismatch(format!(
            "direction has length {}, dispersions have {} rows",
            v.len(),
            disp.dim()
        )));
    }
    let mut out = disp.clone();
    deflate_columns(&mut out.between, v);
    deflate_columns(&mut out.within, v);
    Ok(out)
}

/// `X ← X - v vᵀ X`.
pub fn deflate_samples(x: &DMatrix<f64>, v: &DVector<f64>) -> Result<DMatrix<f64>> {
    check_unit(v)?;
    let mut out = x.clone();
    deflate_columns(&mut out, v);
    Ok(out)
}
