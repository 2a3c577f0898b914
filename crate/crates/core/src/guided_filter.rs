//! Edge-preserving smoothing of every band with a guided filter.
//!
//! Each band `p` is modelled inside every `(2r+1)²` window as an affine
//! function of the guide `I`: `a = cov(I, p) / (var(I) + ε)`,
//! `b = mean(p) - a·mean(I)`. The output averages `a·I + b` over all windows
//! covering a pixel. Windows are truncated at the border, so every mean is
//! an exact mean over in-image pixels.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hsi_io::HsiCube;
use crate::linalg;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuidedFilterParams {
    pub radius: usize,
    pub epsilon: f64,
}

impl Default for GuidedFilterParams {
    fn default() -> Self {
        Self {
            radius: 4,
            epsilon: 0.01,
        }
    }
}

impl GuidedFilterParams {
    pub fn validate(&self) -> Result<()> {
        if self.radius == 0 {
            return Err(Error::InvalidParameter("guided filter radius must be >= 1".into()));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "guided filter epsilon must be finite and >= 0, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// A single-channel image, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub height: usize,
    pub width: usize,
    pub data: Vec<f64>,
}

impl Image {
    pub fn new(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != height * width {
            return Err(Error::DimensionMismatch(format!(
                "image {height}x{width} needs {} values, got {}",
                height * width,
                data.len()
            )));
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }
}

/// First principal-component score of every pixel spectrum, rescaled to
/// `[0, 1]`. The component is oriented so its largest-magnitude loading is
/// positive; a constant score image maps to all zeros.
pub fn compute_guide(cube: &HsiCube) -> Image {
    let npix = cube.pixels();
    let d = cube.bands();
    let mean: Vec<f64> = (0..d)
        .map(|b| cube.band(b).iter().sum::<f64>() / npix as f64)
        .collect();

    let mut cov = DMatrix::<f64>::zeros(d, d);
    for i in 0..d {
        let bi = cube.band(i);
        for j in i..d {
            let bj = cube.band(j);
            let mut acc = 0.0;
            for p in 0..npix {
                acc += (bi[p] - mean[i]) * (bj[p] - mean[j]);
            }
            cov[(i, j)] = acc / npix as f64;
            cov[(j, i)] = cov[(i, j)];
        }
    }
    let mut pc = if d == 1 {
        nalgebra::DVector::from_element(1, 1.0)
    } else {
        linalg::sym_eigen_desc(&cov).1.column(0).into_owned()
    };
    linalg::orient(&mut pc);

    let mut scores = vec![0.0; npix];
    for (b, w) in pc.iter().enumerate() {
        let band = cube.band(b);
        for (s, v) in scores.iter_mut().zip(band) {
            *s += w * (v - mean[b]);
        }
    }
    let lo = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    // relative test: a constant image can still carry rounding noise
    let data = if span > 1e-12 * hi.abs().max(lo.abs()).max(1e-300) {
        scores.iter().map(|s| (s - lo) / span).collect()
    } else {
        vec![0.0; npix]
    };
    Image {
        height: cube.height(),
        width: cube.width(),
        data,
    }
}

/// Window sums over truncated `(2r+1)²` windows via a summed-area table,
/// paired with the per-pixel window size.
struct BoxSum {
    height: usize,
    width: usize,
    radius: usize,
    counts: Vec<f64>,
}

impl BoxSum {
    fn new(height: usize, width: usize, radius: usize) -> Self {
        let mut counts = vec![0.0; height * width];
        for r in 0..height {
            let rows = r.min(radius) + (height - 1 - r).min(radius) + 1;
            for c in 0..width {
                let cols = c.min(radius) + (width - 1 - c).min(radius) + 1;
                counts[r * width + c] = (rows * cols) as f64;
            }
        }
        Self {
            height,
            width,
            radius,
            counts,
        }
    }

    fn mean(&self, src: &[f64]) -> Vec<f64> {
        let (h, w, r) = (self.height, self.width, self.radius);
        let stride = w + 1;
        let mut sat = vec![0.0; (h + 1) * stride];
        for y in 0..h {
            let mut row = 0.0;
            for x in 0..w {
                row += src[y * w + x];
                sat[(y + 1) * stride + x + 1] = sat[y * stride + x + 1] + row;
            }
        }
        let mut out = vec![0.0; h * w];
        for y in 0..h {
            let y0 = y.saturating_sub(r);
            let y1 = (y + r + 1).min(h);
            for x in 0..w {
                let x0 = x.saturating_sub(r);
                let x1 = (x + r + 1).min(w);
                let s = sat[y1 * stride + x1] - sat[y0 * stride + x1] - sat[y1 * stride + x0]
                    + sat[y0 * stride + x0];
                out[y * w + x] = s / self.counts[y * w + x];
            }
        }
        out
    }
}

/// Filters one band plane with a precomputed guide.
pub fn guided_filter_plane(
    band: &[f64],
    guide: &Image,
    params: GuidedFilterParams,
) -> Result<Vec<f64>> {
    params.validate()?;
    if band.len() != guide.data.len() {
        return Err(Error::DimensionMismatch(format!(
            "band has {} pixels, guide has {}",
            band.len(),
            guide.data.len()
        )));
    }
    if band.is_empty() {
        return Ok(Vec::new());
    }
    // The filter commutes with adding a constant to the band; filtering
    // `band - band[0]` keeps constant bands exact.
    let pivot = band[0];
    let band: Vec<f64> = band.iter().map(|v| v - pivot).collect();
    let boxes = BoxSum::new(guide.height, guide.width, params.radius);
    let i = &guide.data;
    let mean_i = boxes.mean(i);
    let mean_p = boxes.mean(&band);
    let ip: Vec<f64> = i.iter().zip(&band).map(|(a, b)| a * b).collect();
    let ii: Vec<f64> = i.iter().map(|a| a * a).collect();
    let corr_ip = boxes.mean(&ip);
    let corr_ii = boxes.mean(&ii);

    let n = band.len();
    let mut a = vec![0.0; n];
    let mut b = vec![0.0; n];
    for k in 0..n {
        let cov = corr_ip[k] - mean_i[k] * mean_p[k];
        let var = corr_ii[k] - mean_i[k] * mean_i[k];
        let denom = var + params.epsilon;
        a[k] = if denom != 0.0 { cov / denom } else { 0.0 };
        b[k] = mean_p[k] - a[k] * mean_i[k];
    }
    let mean_a = boxes.mean(&a);
    let mean_b = boxes.mean(&b);
    Ok((0..n).map(|k| mean_a[k] * i[k] + mean_b[k] + pivot).collect())
}

pub fn guided_filter(cube: &HsiCube, guide: &Image, params: GuidedFilterParams) -> Result<HsiCube> {
    if guide.height != cube.height() || guide.width != cube.width() {
        return Err(Error::DimensionMismatch(format!(
            "cube is {}x{}, guide is {}x{}",
            cube.height(),
            cube.width(),
            guide.height,
            guide.width
        )));
    }
    let mut data = Vec::with_capacity(cube.data().len());
    for b in 0..cube.bands() {
        data.extend(guided_filter_plane(cube.band(b), guide, params)?);
    }
    HsiCube::new(cube.height(), cube.width(), cube.bands(), data)
}
