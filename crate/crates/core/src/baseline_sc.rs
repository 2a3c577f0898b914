//! L2 scaling-cut baseline.
//!
//! Maximizes `Tr(Wᵀ S_B W) - Tr(Wᵀ S_W W)` over orthonormal `W`: the leading
//! eigenvectors of `S_B - S_W`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dispersion::{self, ScatterPair};
use crate::error::{Error, Result};
use crate::hsi_io::LabeledDataset;
use crate::linalg;
use crate::tl_solver::ProjectionMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SCConfig {
    pub target_dim: usize,
    /// Project onto this many leading principal components first.
    pub pca_rank: Option<usize>,
}

impl Default for SCConfig {
    fn default() -> Self {
        Self {
            target_dim: 1,
            pca_rank: None,
        }
    }
}

/// Leading principal axes of the (centered) columns of `x`.
fn pca_basis(x: &DMatrix<f64>, rank: usize) -> DMatrix<f64> {
    let n = x.ncols() as f64;
    let mean = x.column_mean();
    let mut centered = x.clone();
    for mut c in centered.column_iter_mut() {
        c -= &mean;
    }
    let cov = &centered * centered.transpose() / n;
    let (_, vecs) = linalg::sym_eigen_desc(&cov);
    vecs.columns(0, rank).into_owned()
}

fn top_directions(scatter: &ScatterPair, d: usize) -> DMatrix<f64> {
    let diff = &scatter.between - &scatter.within;
    let (_, vecs) = linalg::sym_eigen_desc(&diff);
    let mut w = vecs.columns(0, d).into_owned();
    for mut c in w.column_iter_mut() {
        let mut v = c.clone_owned();
        linalg::orient(&mut v);
        c.copy_from(&v);
    }
    w
}

pub fn fit_sc(train: &LabeledDataset, cfg: &SCConfig) -> Result<ProjectionMatrix> {
    let dim = train.dim();
    let limit = cfg.pca_rank.unwrap_or(dim);
    if cfg.pca_rank.is_some_and(|r| r == 0 || r > dim) {
        return Err(Error::InvalidParameter(format!(
            "pca_rank must be in 1..={dim}, got {limit}"
        )));
    }
    if cfg.target_dim == 0 || cfg.target_dim > limit {
        return Err(Error::InvalidParameter(format!(
            "target_dim must be in 1..={limit}, got {}",
            cfg.target_dim
        )));
    }
    let Some(rank) = cfg.pca_rank else {
        let scatter = dispersion::build_scatter(train)?;
        return Ok(ProjectionMatrix::new(top_directions(&scatter, cfg.target_dim)));
    };
    let p = pca_basis(train.x(), rank);
    let reduced = train.with_x(p.transpose() * train.x())?;
    let scatter = dispersion::build_scatter(&reduced)?;
    let mut w = &p * top_directions(&scatter, cfg.target_dim);
    for mut c in w.column_iter_mut() {
        let mut v = c.clone_owned();
        linalg::orient(&mut v);
        c.copy_from(&v);
    }
    Ok(ProjectionMatrix::new(w))
}

/// `Tr(Wᵀ S_B W) / Tr(Wᵀ S_T W)`.
pub fn sc_objective(w: &DMatrix<f64>, scatter: &ScatterPair) -> Result<f64> {
    if w.nrows() != scatter.between.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "projection has {} rows, scatter is {}x{0}",
            w.nrows(),
            scatter.between.nrows()
        )));
    }
    let num = (w.transpose() * &scatter.between * w).trace();
    let den = (w.transpose() * &scatter.total * w).trace();
    if den.abs() <= f64::MIN_POSITIVE || !den.is_finite() {
        return Err(Error::ZeroDenominator);
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_blobs() -> LabeledDataset {
        LabeledDataset::new(
            DMatrix::from_row_slice(2, 4, &[0.0, 0.0, 5.0, 5.0, 0.0, 1.0, 0.0, 1.0]),
            vec![1, 1, 2, 2],
            2,
        )
        .unwrap()
    }

    #[test]
    fn separating_axis_is_found() {
        let p = fit_sc(&two_blobs(), &SCConfig::default()).unwrap();
        assert!((p.matrix[(0, 0)] - 1.0).abs() < 1e-6);
        assert!(p.matrix[(1, 0)].abs() < 1e-6);
    }

    #[test]
    fn full_basis_is_orthonormal() {
        let p = fit_sc(&two_blobs(), &SCConfig { target_dim: 2, pca_rank: None }).unwrap();
        let g = p.matrix.transpose() * &p.matrix;
        assert!((g - DMatrix::<f64>::identity(2, 2)).abs().max() < 1e-8);
    }

    #[test]
    fn pca_prestep_keeps_orthonormal_columns() {
        let cfg = SCConfig { target_dim: 1, pca_rank: Some(2) };
        let p = fit_sc(&two_blobs(), &cfg).unwrap();
        assert!((p.matrix[(0, 0)].abs() - 1.0).abs() < 1e-6);
        assert!(fit_sc(&two_blobs(), &SCConfig { target_dim: 2, pca_rank: Some(1) }).is_err());
    }

    #[test]
    fn toy_ratio() {
        let ds = LabeledDataset::new(
            DMatrix::from_row_slice(1, 3, &[0.0, 2.0, 10.0]),
            vec![1, 1, 2],
            2,
        )
        .unwrap();
        let s = dispersion::build_scatter(&ds).unwrap();
        let r = sc_objective(&DMatrix::from_element(1, 1, 1.0), &s).unwrap();
        assert!((r - 164.0 / 166.0).abs() < 1e-12);
        assert!((r - 0.98795).abs() < 1e-5);
    }

    #[test]
    fn zero_within_scatter_gives_unit_ratio() {
        let ds = LabeledDataset::new(
            DMatrix::from_row_slice(1, 4, &[1.0, 1.0, 3.0, 3.0]),
            vec![1, 1, 2, 2],
            2,
        )
        .unwrap();
        let s = dispersion::build_scatter(&ds).unwrap();
        assert_eq!(sc_objective(&DMatrix::from_element(1, 1, 1.0), &s).unwrap(), 1.0);
    }

    #[test]
    fn degenerate_data_is_an_error() {
        let ds = LabeledDataset::new(DMatrix::from_element(1, 2, 1.0), vec![1, 2], 2).unwrap();
        let s = dispersion::build_scatter(&ds).unwrap();
        assert!(matches!(
            sc_objective(&DMatrix::from_element(1, 1, 1.0), &s),
            Err(Error::ZeroDenominator)
        ));
    }

    #[test]
    fn single_class_is_rejected() {
        let ds = LabeledDataset::new(DMatrix::from_element(1, 2, 1.0), vec![1, 1], 1).unwrap();
        assert!(fit_sc(&ds, &SCConfig::default()).is_err());
    }
}
