//! Projection, classifiers and accuracy metrics.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hsi_io::LabeledDataset;
use crate::tl_solver::ProjectionMatrix;

/// `Y = Vᵀ X` with labels carried over.
pub fn project(ds: &LabeledDataset, v: &ProjectionMatrix) -> Result<LabeledDataset> {
    if v.input_dim() != ds.dim() {
        return Err(Error::DimensionMismatch(format!(
            "projection expects {} features, data has {}",
            v.input_dim(),
            ds.dim()
        )));
    }
    ds.with_x(v.matrix.transpose() * ds.x())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmParams {
    pub c: f64,
    /// Stop when the largest projected-gradient violation of an epoch is
    /// at most this.
    pub tol: f64,
    pub max_epochs: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            tol: 1e-4,
            max_epochs: 1000,
        }
    }
}

/// One-vs-rest linear SVM. Inputs are centered by the training mean before
/// the decision functions `wₖᵀ(x - μ) + bₖ` are applied.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub weights: DMatrix<f64>,
    pub biases: DVector<f64>,
    pub offset: DVector<f64>,
    pub params: SvmParams,
    /// Epochs used by each binary problem.
    pub epochs: Vec<usize>,
}

impl SvmModel {
    pub fn num_classes(&self) -> usize {
        self.biases.len()
    }

    /// Decision values, `classes × samples`.
    pub fn decision_values(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.nrows() != self.offset.len() {
            return Err(Error::DimensionMismatch(format!(
                "model expects {} features, data has {}",
                self.offset.len(),
                x.nrows()
            )));
        }
        let mut centered = x.clone();
        for mut c in centered.column_iter_mut() {
            c -= &self.offset;
        }
        let mut out = self.weights.transpose() * centered;
        for (mut row, b) in out.row_iter_mut().zip(self.biases.iter()) {
            row.add_scalar_mut(*b);
        }
        Ok(out)
    }
}

/// Dual coordinate descent for `min ½‖w‖² + C Σ max(0, 1 - yᵢ wᵀx̃ᵢ)` where
/// `x̃ = (x, 1)` carries the bias.
fn train_binary(x: &DMatrix<f64>, y: &[f64], p: &SvmParams) -> (DVector<f64>, f64, usize) {
    let (d, n) = x.shape();
    let qii: Vec<f64> = x.column_iter().map(|c| c.norm_squared() + 1.0).collect();
    let mut alpha = vec![0.0; n];
    let mut w = DVector::zeros(d);
    let mut b = 0.0;
    let mut epochs = 0;
    while epochs < p.max_epochs {
        epochs += 1;
        let mut max_violation = 0.0f64;
        for i in 0..n {
            let xi = x.column(i);
            let g = y[i] * (w.dot(&xi) + b) - 1.0;
            let pg = if alpha[i] <= 0.0 {
                g.min(0.0)
            } else if alpha[i] >= p.c {
                g.max(0.0)
            } else {
                g
            };
            max_violation = max_violation.max(pg.abs());
            if pg != 0.0 && qii[i] > 0.0 {
                let old = alpha[i];
                alpha[i] = (old - g / qii[i]).clamp(0.0, p.c);
                let step = (alpha[i] - old) * y[i];
                w.axpy(step, &xi, 1.0);
                b += step;
            }
        }
        if max_violation <= p.tol {
            break;
        }
    }
    (w, b, epochs)
}

pub fn train_svm(train: &LabeledDataset, params: SvmParams) -> Result<SvmModel> {
    if train.class_counts().iter().filter(|&&c| c > 0).count() < 2 {
        return Err(Error::TooFewClasses(train.num_classes()));
    }
    if !(params.c > 0.0) {
        return Err(Error::InvalidParameter(format!("C must be > 0, got {}", params.c)));
    }
    let offset = train.x().column_mean();
    let mut x = train.x().clone();
    for mut c in x.column_iter_mut() {
        c -= &offset;
    }
    let classes = train.num_classes();
    let mut weights = DMatrix::zeros(train.dim(), classes);
    let mut biases = DVector::zeros(classes);
    let mut epochs = Vec::with_capacity(classes);
    for k in 1..=classes {
        let y: Vec<f64> = train
            .labels()
            .iter()
            .map(|&l| if l == k { 1.0 } else { -1.0 })
            .collect();
        let (w, b, e) = train_binary(&x, &y, &params);
        weights.set_column(k - 1, &w);
        biases[k - 1] = b;
        epochs.push(e);
    }
    Ok(SvmModel {
        weights,
        biases,
        offset,
        params,
        epochs,
    })
}

/// Class with the largest decision value; ties go to the smaller class id.
pub fn predict_svm(model: &SvmModel, ds: &LabeledDataset) -> Result<Vec<usize>> {
    let scores = model.decision_values(ds.x())?;
    Ok(scores
        .column_iter()
        .map(|c| {
            let mut best = 0;
            for k in 1..c.len() {
                if c[k] > c[best] {
                    best = k;
                }
            }
            best + 1
        })
        .collect())
}

/// Label of the nearest training sample (Euclidean); ties go to the lower
/// training index.
pub fn predict_1nn(train: &LabeledDataset, test: &LabeledDataset) -> Result<Vec<usize>> {
    if train.is_empty() {
        return Err(Error::Empty("1-NN needs at least one training sample"));
    }
    if train.dim() != test.dim() {
        return Err(Error::DimensionMismatch(format!(
            "train has {} features, test has {}",
            train.dim(),
            test.dim()
        )));
    }
    let tx = train.x();
    Ok(test
        .x()
        .column_iter()
        .map(|q| {
            let mut best = (f64::INFINITY, 0);
            for (i, c) in tx.column_iter().enumerate() {
                let mut d2 = 0.0;
                for (a, b) in c.iter().zip(q.iter()) {
                    d2 += (a - b) * (a - b);
                }
                if d2 < best.0 {
                    best = (d2, i);
                }
            }
            train.labels()[best.1]
        })
        .collect())
}

/// Counts indexed by (true class, predicted class), both 1-based ids stored
/// at offset `id - 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(counts: Vec<Vec<u64>>) -> Result<Self> {
        let c = counts.len();
        if counts.iter().any(|r| r.len() != c) {
            return Err(Error::DimensionMismatch("confusion matrix must be square".into()));
        }
        Ok(Self { counts })
    }

    pub fn from_labels(truth: &[usize], predicted: &[usize], classes: usize) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} true labels, {} predictions",
                truth.len(),
                predicted.len()
            )));
        }
        let mut counts = vec![vec![0u64; classes]; classes];
        for (&t, &p) in truth.iter().zip(predicted) {
            if t == 0 || t > classes || p == 0 || p > classes {
                return Err(Error::InvalidParameter(format!(
                    "label pair ({t}, {p}) outside 1..={classes}"
                )));
            }
            counts[t - 1][p - 1] += 1;
        }
        Ok(Self { counts })
    }

    pub fn num_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// Relabels classes: entry `(i, j)` moves to `(perm[i], perm[j])`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let c = self.num_classes();
        let mut counts = vec![vec![0u64; c]; c];
        for i in 0..c {
            for j in 0..c {
                counts[perm[i]][perm[j]] = self.counts[i][j];
            }
        }
        Self { counts }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub oa: f64,
    pub aa: f64,
    pub kappa: f64,
    pub confusion: ConfusionMatrix,
    pub dim: usize,
}

/// Overall accuracy, average per-class recall (0 for classes absent from the
/// truth) and Cohen's kappa.
pub fn score(confusion: &ConfusionMatrix, dim: usize) -> Result<ClassificationReport> {
    let c = confusion.num_classes();
    let total = confusion.total();
    if c == 0 || total == 0 {
        return Err(Error::Empty("confusion matrix has no samples"));
    }
    let t = total as f64;
    let diag: u64 = (0..c).map(|k| confusion.counts[k][k]).sum();
    let oa = diag as f64 / t;
    let mut aa = 0.0;
    let mut pe_num = 0.0;
    for k in 0..c {
        let row: u64 = confusion.counts[k].iter().sum();
        let col: u64 = confusion.counts.iter().map(|r| r[k]).sum();
        if row > 0 {
            aa += confusion.counts[k][k] as f64 / row as f64;
        }
        pe_num += row as f64 * col as f64;
    }
    aa /= c as f64;
    let pe = pe_num / (t * t);
    let kappa = if pe < 1.0 {
        (oa - pe) / (1.0 - pe)
    } else if oa == 1.0 {
        1.0
    } else {
        0.0
    };
    Ok(ClassificationReport {
        oa,
        aa,
        kappa,
        confusion: confusion.clone(),
        dim,
    })
}

/// Fraction of matching labels.
pub fn accuracy(truth: &[usize], predicted: &[usize]) -> f64 {
    let hits = truth.iter().zip(predicted).filter(|(a, b)| a == b).count();
    hits as f64 / truth.len().max(1) as f64
}
