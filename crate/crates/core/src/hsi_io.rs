//! Hyperspectral cube containers, labeled datasets and the data-preparation
//! steps of the experiment protocol (splitting, standardization, noise).
//!
//! # Container format
//!
//! A cube file is a single JSON header line followed by the raw payload:
//!
//! ```text
//! {"magic":"HSIC","version":1,"height":H,"width":W,"bands":D,"dtype":"f64","layout":"BSQ"}\n
//! <H*W*D little-endian f64, band-sequential: band-major, then row-major pixels>
//! ```
//!
//! Label maps use the same scheme with `"magic":"HSIL"`, `"bands":1` and
//! `"dtype":"u16"`, followed by `H*W` little-endian `u16` labels.

use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

const CUBE_MAGIC: &str = "HSIC";
const LABEL_MAGIC: &str = "HSIL";
const MAX_HEADER_LEN: usize = 4096;

/// A hyperspectral cube stored band-sequentially.
#[derive(Debug, Clone, PartialEq)]
pub struct HsiCube {
    height: usize,
    width: usize,
    bands: usize,
    data: Vec<f64>,
}

impl HsiCube {
    pub fn new(height: usize, width: usize, bands: usize, data: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 || bands == 0 {
            return Err(Error::InvalidParameter(format!(
                "cube dimensions must be positive, got {height}x{width}x{bands}"
            )));
        }
        let expected = height * width * bands;
        if data.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "cube {height}x{width}x{bands} needs {expected} values, got {}",
                data.len()
            )));
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { index });
        }
        Ok(Self {
            height,
            width,
            bands,
            data,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    pub fn pixels(&self) -> usize {
        self.height * self.width
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// The `height × width` plane of one band, row-major.
    pub fn band(&self, b: usize) -> &[f64] {
        let p = self.pixels();
        &self.data[b * p..(b + 1) * p]
    }

    pub fn band_mut(&mut self, b: usize) -> &mut [f64] {
        let p = self.pixels();
        &mut self.data[b * p..(b + 1) * p]
    }

    pub fn get(&self, row: usize, col: usize, band: usize) -> f64 {
        self.data[band * self.pixels() + row * self.width + col]
    }

    /// Spectral vector of the pixel at row-major index `pixel`.
    pub fn spectrum(&self, pixel: usize) -> Vec<f64> {
        let p = self.pixels();
        (0..self.bands).map(|b| self.data[b * p + pixel]).collect()
    }
}

/// Ground-truth labels, `0` = unlabeled, `1..=C` = class ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    height: usize,
    width: usize,
    labels: Vec<u16>,
}

impl LabelMap {
    pub fn new(height: usize, width: usize, labels: Vec<u16>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidParameter(format!(
                "label map dimensions must be positive, got {height}x{width}"
            )));
        }
        if labels.len() != height * width {
            return Err(Error::DimensionMismatch(format!(
                "label map {height}x{width} needs {} labels, got {}",
                height * width,
                labels.len()
            )));
        }
        Ok(Self {
            height,
            width,
            labels,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn labels(&self) -> &[u16] {
        &self.labels
    }

    /// Number of classes `C`, checking that ids `1..=C` all occur.
    pub fn num_classes(&self) -> Result<usize> {
        let max = self.labels.iter().copied().max().unwrap_or(0) as usize;
        let mut seen = vec![false; max + 1];
        for &l in &self.labels {
            seen[l as usize] = true;
        }
        if let Some(missing) = (1..=max).find(|&k| !seen[k]) {
            return Err(Error::NonContiguousClasses { missing, max });
        }
        Ok(max)
    }
}

/// Samples as columns of a `bands × n` matrix together with class ids in
/// `1..=num_classes`. `class_counts[k-1]` is the number of samples of class
/// `k`; test subsets may leave some classes empty.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    x: DMatrix<f64>,
    labels: Vec<usize>,
    num_classes: usize,
    class_counts: Vec<usize>,
}

impl LabeledDataset {
    pub fn new(x: DMatrix<f64>, labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        if x.ncols() != labels.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} sample columns but {} labels",
                x.ncols(),
                labels.len()
            )));
        }
        let mut class_counts = vec![0usize; num_classes];
        for &l in &labels {
            if l == 0 || l > num_classes {
                return Err(Error::InvalidParameter(format!(
                    "label {l} outside 1..={num_classes}"
                )));
            }
            class_counts[l - 1] += 1;
        }
        Ok(Self {
            x,
            labels,
            num_classes,
            class_counts,
        })
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn class_counts(&self) -> &[usize] {
        &self.class_counts
    }

    /// Feature dimension `D`.
    pub fn dim(&self) -> usize {
        self.x.nrows()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Sample indices of each class, in ascending order.
    pub fn class_indices(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_classes];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l - 1].push(i);
        }
        out
    }

    /// The columns at `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> LabeledDataset {
        let x = self.x.select_columns(indices);
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        LabeledDataset::new(x, labels, self.num_classes).expect("subset of a valid dataset")
    }

    pub fn with_x(&self, x: DMatrix<f64>) -> Result<LabeledDataset> {
        LabeledDataset::new(x, self.labels.clone(), self.num_classes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub samples_per_class: usize,
    pub seed: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    magic: String,
    version: u32,
    height: usize,
    width: usize,
    bands: usize,
    dtype: String,
    layout: String,
}

fn header_line(magic: &str, height: usize, width: usize, bands: usize, dtype: &str) -> String {
    // Field order is part of the format; do not route through serde.
    format!(
        "{{\"magic\":\"{magic}\",\"version\":1,\"height\":{height},\"width\":{width},\"bands\":{bands},\"dtype\":\"{dtype}\",\"layout\":\"BSQ\"}}\n"
    )
}

fn split_header<'a>(bytes: &'a [u8], magic: &str, dtype: &str) -> Result<(Header, &'a [u8])> {
    let limit = bytes.len().min(MAX_HEADER_LEN);
    let nl = bytes[..limit]
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::MalformedHeader("no header line found".into()))?;
    let text = std::str::from_utf8(&bytes[..nl])
        .map_err(|_| Error::MalformedHeader("header is not UTF-8".into()))?;
    let header: Header =
        serde_json::from_str(text).map_err(|e| Error::MalformedHeader(e.to_string()))?;
    if header.magic != magic {
        return Err(Error::MalformedHeader(format!(
            "magic {:?}, expected {magic:?}",
            header.magic
        )));
    }
    if header.version != 1 {
        return Err(Error::MalformedHeader(format!(
            "unsupported version {}",
            header.version
        )));
    }
    if header.dtype != dtype {
        return Err(Error::MalformedHeader(format!(
            "dtype {:?}, expected {dtype:?}",
            header.dtype
        )));
    }
    if header.layout != "BSQ" {
        return Err(Error::MalformedHeader(format!(
            "layout {:?}, expected \"BSQ\"",
            header.layout
        )));
    }
    if header.height == 0 || header.width == 0 || header.bands == 0 {
        return Err(Error::MalformedHeader("dimensions must be positive".into()));
    }
    Ok((header, &bytes[nl + 1..]))
}

fn check_payload(payload: &[u8], count: usize, width: usize) -> Result<()> {
    let expected = count * width;
    if payload.len() < expected {
        return Err(Error::TruncatedPayload {
            expected: count,
            found: payload.len() / width,
        });
    }
    if payload.len() > expected {
        return Err(Error::TrailingBytes(payload.len() - expected));
    }
    Ok(())
}

pub fn encode_cube(cube: &HsiCube) -> Vec<u8> {
    let header = header_line(CUBE_MAGIC, cube.height, cube.width, cube.bands, "f64");
    let mut out = Vec::with_capacity(header.len() + cube.data.len() * 8);
    out.extend_from_slice(header.as_bytes());
    for v in &cube.data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_cube(bytes: &[u8]) -> Result<HsiCube> {
    let (h, payload) = split_header(bytes, CUBE_MAGIC, "f64")?;
    let count = h
        .height
        .checked_mul(h.width)
        .and_then(|p| p.checked_mul(h.bands))
        .ok_or_else(|| Error::MalformedHeader("dimensions overflow".into()))?;
    check_payload(payload, count, 8)?;
    let data = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    HsiCube::new(h.height, h.width, h.bands, data)
}

pub fn encode_labels(labels: &LabelMap) -> Vec<u8> {
    let header = header_line(LABEL_MAGIC, labels.height, labels.width, 1, "u16");
    let mut out = Vec::with_capacity(header.len() + labels.labels.len() * 2);
    out.extend_from_slice(header.as_bytes());
    for v in &labels.labels {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_labels(bytes: &[u8]) -> Result<LabelMap> {
    let (h, payload) = split_header(bytes, LABEL_MAGIC, "u16")?;
    if h.bands != 1 {
        return Err(Error::MalformedHeader(format!(
            "label map must have bands = 1, got {}",
            h.bands
        )));
    }
    let count = h
        .height
        .checked_mul(h.width)
        .ok_or_else(|| Error::MalformedHeader("dimensions overflow".into()))?;
    check_payload(payload, count, 2)?;
    let labels = payload
        .chunks_exact(2)
        .map(|c| u16::from_le_bytes([c[0], c[1]]))
        .collect();
    LabelMap::new(h.height, h.width, labels)
}

pub fn load_cube(path: impl AsRef<Path>) -> Result<HsiCube> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_cube(&bytes)
}

pub fn save_cube(cube: &HsiCube, path: impl AsRef<Path>) -> Result<()> {
    write_all(path.as_ref(), &encode_cube(cube))
}

pub fn load_labels(path: impl AsRef<Path>) -> Result<LabelMap> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_labels(&bytes)
}

pub fn save_labels(labels: &LabelMap, path: impl AsRef<Path>) -> Result<()> {
    write_all(path.as_ref(), &encode_labels(labels))
}

fn write_all(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))?;
    f.flush().map_err(|e| Error::io(path, e))
}

/// One column per labeled pixel (label ≠ 0), in row-major pixel order.
pub fn extract_dataset(cube: &HsiCube, labels: &LabelMap) -> Result<LabeledDataset> {
    if cube.height != labels.height || cube.width != labels.width {
        return Err(Error::DimensionMismatch(format!(
            "cube is {}x{}, label map is {}x{}",
            cube.height, cube.width, labels.height, labels.width
        )));
    }
    let num_classes = labels.num_classes()?;
    let pixels: Vec<usize> = (0..cube.pixels())
        .filter(|&p| labels.labels[p] != 0)
        .collect();
    let npix = cube.pixels();
    let x = DMatrix::from_fn(cube.bands, pixels.len(), |b, j| {
        cube.data[b * npix + pixels[j]]
    });
    let y = pixels.iter().map(|&p| labels.labels[p] as usize).collect();
    LabeledDataset::new(x, y, num_classes)
}

/// Index sets `(train, test)` of a seeded per-class split, both ascending.
pub fn split_indices(ds: &LabeledDataset, spec: SplitSpec) -> Result<(Vec<usize>, Vec<usize>)> {
    if spec.samples_per_class == 0 {
        return Err(Error::InvalidParameter("samples_per_class must be positive".into()));
    }
    let mut rng = rng::stream(spec.seed, rng::STREAM_SPLIT);
    let mut train = Vec::new();
    for (k, mut idx) in ds.class_indices().into_iter().enumerate() {
        if idx.len() < spec.samples_per_class {
            return Err(Error::InsufficientSamples {
                class: k + 1,
                available: idx.len(),
                requested: spec.samples_per_class,
            });
        }
        let (chosen, _) = idx.partial_shuffle(&mut rng, spec.samples_per_class);
        train.extend_from_slice(chosen);
    }
    train.sort_unstable();
    let mut is_train = vec![false; ds.len()];
    for &i in &train {
        is_train[i] = true;
    }
    let test: Vec<usize> = (0..ds.len()).filter(|&i| !is_train[i]).collect();
    if test.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    Ok((train, test))
}

pub fn split_train_test(
    ds: &LabeledDataset,
    spec: SplitSpec,
) -> Result<(LabeledDataset, LabeledDataset)> {
    let (train, test) = split_indices(ds, spec)?;
    Ok((ds.subset(&train), ds.subset(&test)))
}

/// Per-band affine map `(x - mean) / scale` fitted on training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Scaler {
    pub fn fit(x: &DMatrix<f64>) -> Result<Self> {
        let n = x.ncols();
        if n == 0 {
            return Err(Error::Empty("standardize needs a nonempty training set"));
        }
        let mut mean = Vec::with_capacity(x.nrows());
        let mut scale = Vec::with_capacity(x.nrows());
        for row in x.row_iter() {
            let m = row.iter().sum::<f64>() / n as f64;
            let var = row.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n as f64;
            let sd = var.sqrt();
            mean.push(m);
            // zero variance up to rounding of the mean
            scale.push(if sd > 1e-12 * m.abs().max(1.0) { sd } else { 1.0 });
        }
        Ok(Self { mean, scale })
    }

    pub fn transform(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(x.nrows(), x.ncols(), |b, j| {
            (x[(b, j)] - self.mean[b]) / self.scale[b]
        })
    }
}

pub fn standardize(
    train: &LabeledDataset,
    test: &LabeledDataset,
) -> Result<(LabeledDataset, LabeledDataset, Scaler)> {
    if train.dim() != test.dim() {
        return Err(Error::DimensionMismatch(format!(
            "train has {} bands, test has {}",
            train.dim(),
            test.dim()
        )));
    }
    let scaler = Scaler::fit(train.x())?;
    let tr = train.with_x(scaler.transform(train.x()))?;
    let te = test.with_x(scaler.transform(test.x()))?;
    Ok((tr, te, scaler))
}

/// Population variance of a slice.
pub fn variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let m = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n
}

/// Adds zero-mean Gaussian noise with variance `percent/100 · Var(band)` to
/// every band; band `b` draws from its own stream so the result does not
/// depend on processing order.
pub fn inject_noise(cube: &HsiCube, percent: f64, seed: u64) -> Result<HsiCube> {
    if !(percent >= 0.0 && percent.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "noise percent must be a finite value >= 0, got {percent}"
        )));
    }
    let mut out = cube.clone();
    if percent == 0.0 {
        return Ok(out);
    }
    for b in 0..cube.bands {
        let sd = (percent / 100.0 * variance(cube.band(b))).sqrt();
        if sd == 0.0 {
            continue;
        }
        let mut rng = rng::stream(seed, rng::STREAM_NOISE + b as u64);
        for v in out.band_mut(b) {
            let z: f64 = StandardNormal.sample(&mut rng);
            *v += sd * z;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube(h: usize, w: usize, d: usize) -> HsiCube {
        let data = (0..h * w * d).map(|i| i as f64 * 0.5 - 1.0).collect();
        HsiCube::new(h, w, d, data).unwrap()
    }

    #[test]
    fn save_then_load_is_identity() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.hsic");
        let c = cube(2, 2, 3);
        save_cube(&c, &path).unwrap();
        let bytes = fs::read(&path).unwrap();
        assert_eq!(load_cube(&path).unwrap(), c);
        save_cube(&load_cube(&path).unwrap(), &path).unwrap();
        assert_eq!(fs::read(&path).unwrap(), bytes);
    }

    #[test]
    fn single_value_cube_layout() {
        let c = HsiCube::new(1, 1, 1, vec![0.0]).unwrap();
        let bytes = encode_cube(&c);
        let header = header_line("HSIC", 1, 1, 1, "f64");
        assert_eq!(
            header,
            "{\"magic\":\"HSIC\",\"version\":1,\"height\":1,\"width\":1,\"bands\":1,\"dtype\":\"f64\",\"layout\":\"BSQ\"}\n"
        );
        assert_eq!(bytes.len(), header.len() + 8);
        assert_eq!(&bytes[header.len()..], &[0u8; 8]);
    }

    #[test]
    fn truncated_payload_is_rejected() {
        let mut bytes = header_line("HSIC", 4, 4, 5, "f64").into_bytes();
        for i in 0..79 {
            bytes.extend_from_slice(&(i as f64).to_le_bytes());
        }
        match decode_cube(&bytes) {
            Err(Error::TruncatedPayload { expected, found }) => {
                assert_eq!((expected, found), (80, 79));
            }
            other => panic!("expected truncation error, got {other:?}"),
        }
    }

    #[test]
    fn nan_payload_is_rejected() {
        let mut bytes = header_line("HSIC", 1, 1, 2, "f64").into_bytes();
        bytes.extend_from_slice(&1.0f64.to_le_bytes());
        bytes.extend_from_slice(&f64::NAN.to_le_bytes());
        assert!(matches!(
            decode_cube(&bytes),
            Err(Error::NonFiniteValue { index: 1 })
        ));
    }

    #[test]
    fn malformed_headers_are_rejected() {
        assert!(matches!(decode_cube(b"not json\n"), Err(Error::MalformedHeader(_))));
        assert!(matches!(decode_cube(b"{}"), Err(Error::MalformedHeader(_))));
        let wrong_magic = header_line("HSIL", 1, 1, 1, "f64");
        assert!(matches!(
            decode_cube(wrong_magic.as_bytes()),
            Err(Error::MalformedHeader(_))
        ));
        let mut extra = encode_cube(&cube(1, 1, 1));
        extra.push(0);
        assert!(matches!(decode_cube(&extra), Err(Error::TrailingBytes(1))));
    }

    #[test]
    fn save_to_missing_directory_fails() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("missing").join("c.hsic");
        assert!(matches!(save_cube(&cube(1, 1, 1), &path), Err(Error::Io { .. })));
    }

    #[test]
    fn label_round_trip() {
        let l = LabelMap::new(2, 3, vec![0, 1, 2, 2, 1, 0]).unwrap();
        assert_eq!(decode_labels(&encode_labels(&l)).unwrap(), l);
    }

    #[test]
    fn extract_skips_unlabeled() {
        let c = HsiCube::new(2, 1, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let l = LabelMap::new(2, 1, vec![1, 0]).unwrap();
        let ds = extract_dataset(&c, &l).unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.x().column(0).as_slice(), &[1.0, 3.0]);
    }

    #[test]
    fn extract_all_labeled() {
        let c = cube(2, 3, 2);
        let l = LabelMap::new(2, 3, vec![1, 2, 1, 2, 1, 2]).unwrap();
        let ds = extract_dataset(&c, &l).unwrap();
        assert_eq!(ds.len(), 6);
        assert_eq!(ds.class_counts(), &[3, 3]);
        assert_eq!(ds.x().column(4).as_slice(), c.spectrum(4).as_slice());
    }

    #[test]
    fn extract_rejects_gaps_and_mismatch() {
        let c = cube(1, 2, 1);
        let l = LabelMap::new(1, 2, vec![1, 3]).unwrap();
        assert!(matches!(
            extract_dataset(&c, &l),
            Err(Error::NonContiguousClasses { missing: 2, max: 3 })
        ));
        let l = LabelMap::new(2, 1, vec![1, 1]).unwrap();
        assert!(matches!(extract_dataset(&c, &l), Err(Error::DimensionMismatch(_))));
    }

    fn three_class(nk: usize) -> LabeledDataset {
        let n = 3 * nk;
        let x = DMatrix::from_fn(2, n, |r, c| (r * n + c) as f64);
        let labels = (0..n).map(|i| i % 3 + 1).collect();
        LabeledDataset::new(x, labels, 3).unwrap()
    }

    #[test]
    fn split_counts_and_disjointness() {
        let ds = three_class(20);
        let spec = SplitSpec {
            samples_per_class: 10,
            seed: 5,
        };
        let (tr, te) = split_indices(&ds, spec).unwrap();
        assert_eq!((tr.len(), te.len()), (30, 30));
        assert!(tr.iter().all(|i| !te.contains(i)));
        let (train, _) = split_train_test(&ds, spec).unwrap();
        assert_eq!(train.class_counts(), &[10, 10, 10]);
        assert_eq!(split_indices(&ds, spec).unwrap().0, tr);
    }

    #[test]
    fn split_errors() {
        let ds = three_class(4);
        let all = SplitSpec {
            samples_per_class: 4,
            seed: 0,
        };
        assert!(matches!(split_indices(&ds, all), Err(Error::EmptyTestSet)));
        let too_many = SplitSpec {
            samples_per_class: 5,
            seed: 0,
        };
        assert!(matches!(
            split_indices(&ds, too_many),
            Err(Error::InsufficientSamples { .. })
        ));
    }

    #[test]
    fn standardize_examples() {
        let train = LabeledDataset::new(
            DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 5.0, 5.0]),
            vec![1, 2],
            2,
        )
        .unwrap();
        let test =
            LabeledDataset::new(DMatrix::from_row_slice(2, 1, &[4.0, 5.0]), vec![1], 2).unwrap();
        let (tr, te, _) = standardize(&train, &test).unwrap();
        assert_eq!(tr.x().row(0).iter().copied().collect::<Vec<_>>(), vec![-1.0, 1.0]);
        assert_eq!(tr.x().row(1).iter().copied().collect::<Vec<_>>(), vec![0.0, 0.0]);
        assert_eq!(te.x()[(0, 0)], 3.0);
    }

    #[test]
    fn zero_percent_noise_is_identity() {
        let c = cube(3, 3, 2);
        assert_eq!(inject_noise(&c, 0.0, 1).unwrap(), c);
    }

    #[test]
    fn constant_band_is_untouched_by_noise() {
        let mut data = vec![3.0; 50];
        data.extend((0..50).map(|i| i as f64));
        let c = HsiCube::new(5, 10, 2, data).unwrap();
        let noisy = inject_noise(&c, 10.0, 9).unwrap();
        assert_eq!(noisy.band(0), c.band(0));
        assert_ne!(noisy.band(1), c.band(1));
        assert_eq!(inject_noise(&c, 10.0, 9).unwrap(), noisy);
    }
}
