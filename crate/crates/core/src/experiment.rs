//! Multi-trial experiment runner and report writer.
//!
//! Per noise level and trial: inject noise → guided filter (optional) →
//! extract labeled pixels → per-class split → standardize on the training
//! split → fit each method once at the largest requested dimension → project
//! onto leading prefixes → classify → score. All methods of a trial share
//! the same split.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::baseline_sc::{self, SCConfig};
use crate::error::{Error, Result, StageExt};
use crate::evaluation::{self, ClassificationReport, ConfusionMatrix, SvmParams};
use crate::guided_filter::{self, GuidedFilterParams};
use crate::hsi_io::{self, HsiCube, LabelMap, LabeledDataset, SplitSpec};
use crate::rng;
use crate::synth::{self, SynthSpec};
use crate::tl_solver::{self, ProjectionMatrix, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Trace-lasso regularized L1 graph cut.
    TlL1gc,
    /// The same solver with δ = 0.
    L1gc,
    /// L2 scaling cut.
    ScL2,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::TlL1gc, Method::L1gc, Method::ScL2];

    pub fn name(self) -> &'static str {
        match self {
            Method::TlL1gc => "tl_l1gc",
            Method::L1gc => "l1gc",
            Method::ScL2 => "sc_l2",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown method `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classifier {
    Svm,
    #[serde(rename = "1nn")]
    OneNn,
}

impl Classifier {
    pub fn name(self) -> &'static str {
        match self {
            Classifier::Svm => "svm",
            Classifier::OneNn => "1nn",
        }
    }
}

impl std::str::FromStr for Classifier {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "svm" => Ok(Classifier::Svm),
            "1nn" => Ok(Classifier::OneNn),
            _ => Err(Error::InvalidConfig(format!("unknown classifier `{s}`"))),
        }
    }
}

/// Generated scene used instead of container files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSource {
    #[serde(default)]
    pub spec: SynthSpec,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub cube: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    /// Used when `cube`/`labels` are absent.
    pub synthetic: Option<SyntheticSource>,
    pub methods: Vec<Method>,
    pub use_filter: bool,
    pub filter: GuidedFilterParams,
    pub samples_per_class: usize,
    pub trials: usize,
    pub dims: Vec<usize>,
    pub delta: f64,
    pub noise_percents: Vec<f64>,
    pub classifier: Classifier,
    pub svm_c: f64,
    pub seed: u64,
    pub out: PathBuf,
    pub tol: f64,
    pub max_inner_iters: usize,
    pub refresh_s: bool,
    pub safeguard: bool,
    pub sc_pca_rank: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let solver = SolverConfig::default();
        Self {
            cube: None,
            labels: None,
            synthetic: None,
            methods: Method::ALL.to_vec(),
            use_filter: false,
            filter: GuidedFilterParams::default(),
            samples_per_class: 10,
            trials: 5,
            dims: (4..=60).step_by(2).collect(),
            delta: 0.4,
            noise_percents: vec![0.0],
            classifier: Classifier::Svm,
            svm_c: 1.0,
            seed: 42,
            out: PathBuf::from("results"),
            tol: solver.tol,
            max_inner_iters: solver.max_inner_iters,
            refresh_s: solver.refresh_s,
            safeguard: solver.safeguard,
            sc_pca_rank: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }

    /// Checks that do not need the data.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.cube.is_some() != self.labels.is_some() {
            return bad("cube and labels must be given together".into());
        }
        if self.cube.is_none() && self.synthetic.is_none() {
            return bad("no data: set cube and labels, or synthetic".into());
        }
        if self.methods.is_empty() {
            return bad("methods must not be empty".into());
        }
        if self.trials == 0 {
            return bad("trials must be >= 1".into());
        }
        if self.samples_per_class == 0 {
            return bad("samples_per_class must be >= 1".into());
        }
        if self.dims.is_empty() || self.dims.contains(&0) {
            return bad("dims must be a nonempty list of positive integers".into());
        }
        if self.noise_percents.is_empty() {
            return bad("noise_percents must not be empty".into());
        }
        if let Some(p) = self
            .noise_percents
            .iter()
            .find(|p| !(0.0..=100.0).contains(*p))
        {
            return bad(format!("noise percent {p} outside [0, 100]"));
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return bad(format!("delta must be finite and >= 0, got {}", self.delta));
        }
        if !(self.svm_c > 0.0 && self.svm_c.is_finite()) {
            return bad(format!("svm_c must be > 0, got {}", self.svm_c));
        }
        self.filter
            .validate()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        self.solver_config(Method::TlL1gc, 1, 0)
            .validate(1)
            .map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    fn solver_config(&self, method: Method, target_dim: usize, seed: u64) -> SolverConfig {
        SolverConfig {
            delta: if method == Method::L1gc { 0.0 } else { self.delta },
            target_dim,
            tol: self.tol,
            max_inner_iters: self.max_inner_iters,
            seed,
            refresh_s: self.refresh_s,
            safeguard: self.safeguard,
            ..SolverConfig::default()
        }
    }

    fn max_dim(&self) -> usize {
        self.dims.iter().copied().max().unwrap_or(1)
    }
}

/// Sub-stream indices under a trial seed.
const SEED_NOISE: u64 = 1;
const SEED_SOLVER: u64 = 2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub method: Method,
    pub noise_percent: f64,
    pub trial: usize,
    pub trial_seed: u64,
    pub report: ClassificationReport,
    /// Solver directions (among the first `dim`) that met the step tolerance.
    pub converged_directions: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stat {
    pub mean: f64,
    /// Sample standard deviation (0 for a single trial).
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Stat {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Stat { mean, std, min, max }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub method: Method,
    pub noise_percent: f64,
    pub dim: usize,
    pub trials: usize,
    pub oa: Stat,
    pub aa: Stat,
    pub kappa: Stat,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StageTimings {
    pub load: Duration,
    pub noise: Duration,
    pub filter: Duration,
    pub split: Duration,
    pub fit: Duration,
    pub classify: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetInfo {
    pub height: usize,
    pub width: usize,
    pub bands: usize,
    pub classes: usize,
    pub labeled: usize,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub dataset: DatasetInfo,
    pub records: Vec<TrialRecord>,
    pub summary: Vec<SummaryRow>,
    pub timings: StageTimings,
}

impl ExperimentResult {
    pub fn row(&self, method: Method, noise_percent: f64, dim: usize) -> Option<&SummaryRow> {
        self.summary
            .iter()
            .find(|r| r.method == method && r.noise_percent == noise_percent && r.dim == dim)
    }
}

pub fn load_data(cfg: &ExperimentConfig) -> Result<(HsiCube, LabelMap)> {
    match (&cfg.cube, &cfg.labels, &cfg.synthetic) {
        (Some(c), Some(l), _) => Ok((hsi_io::load_cube(c)?, hsi_io::load_labels(l)?)),
        (None, None, Some(s)) => synth::make_synthetic(&s.spec, s.seed),
        _ => Err(Error::InvalidConfig("no usable data source".into())),
    }
}

/// Loads the configured data and runs the experiment. Nothing is written.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate().stage("config")?;
    let start = Instant::now();
    let (cube, labels) = load_data(cfg).stage("load")?;
    let load = start.elapsed();
    let mut result = run_experiment_on(cfg, &cube, &labels)?;
    result.timings.load = load;
    Ok(result)
}

fn fit_method(
    cfg: &ExperimentConfig,
    method: Method,
    train: &LabeledDataset,
    trial_seed: u64,
) -> Result<ProjectionMatrix> {
    let d = cfg.max_dim();
    match method {
        Method::TlL1gc | Method::L1gc => {
            let seed = rng::derive_seed(trial_seed, SEED_SOLVER);
            tl_solver::fit(train, &cfg.solver_config(method, d, seed))
        }
        Method::ScL2 => baseline_sc::fit_sc(
            train,
            &SCConfig {
                target_dim: d,
                pca_rank: cfg.sc_pca_rank,
            },
        ),
    }
}

fn classify(
    cfg: &ExperimentConfig,
    train: &LabeledDataset,
    test: &LabeledDataset,
) -> Result<Vec<usize>> {
    match cfg.classifier {
        Classifier::Svm => {
            let params = SvmParams {
                c: cfg.svm_c,
                ..SvmParams::default()
            };
            let model = evaluation::train_svm(train, params)?;
            evaluation::predict_svm(&model, test)
        }
        Classifier::OneNn => evaluation::predict_1nn(train, test),
    }
}

/// Runs the experiment on an in-memory scene.
pub fn run_experiment_on(
    cfg: &ExperimentConfig,
    cube: &HsiCube,
    labels: &LabelMap,
) -> Result<ExperimentResult> {
    cfg.validate().stage("config")?;
    if cube.height() != labels.height() || cube.width() != labels.width() {
        return Err(Error::DimensionMismatch(format!(
            "cube is {}x{}, labels are {}x{}",
            cube.height(),
            cube.width(),
            labels.height(),
            labels.width()
        )))
        .stage("load");
    }
    let bands = cube.bands();
    if let Some(&d) = cfg.dims.iter().find(|&&d| d > bands) {
        return Err(Error::InvalidConfig(format!(
            "dimension {d} exceeds the {bands} available bands"
        )))
        .stage("config");
    }
    let classes = labels.num_classes().stage("load")?;
    let mut timings = StageTimings::default();
    let mut records = Vec::new();
    let mut labeled = 0;

    for &noise in &cfg.noise_percents {
        // the noise-free scene is identical for every trial
        let shared = if noise == 0.0 {
            Some(prepare_scene(cfg, cube, labels, noise, 0, &mut timings)?)
        } else {
            None
        };
        for trial in 0..cfg.trials {
            let trial_seed = rng::derive_seed(cfg.seed, trial as u64);
            let ds = match &shared {
                Some(ds) => ds.clone(),
                None => prepare_scene(cfg, cube, labels, noise, trial_seed, &mut timings)?,
            };
            labeled = ds.len();

            let t = Instant::now();
            let split = SplitSpec {
                samples_per_class: cfg.samples_per_class,
                seed: trial_seed,
            };
            let (train, test) = hsi_io::split_train_test(&ds, split).stage("split")?;
            let (train, test, _) = hsi_io::standardize(&train, &test).stage("standardize")?;
            timings.split += t.elapsed();

            for &method in &cfg.methods {
                let t = Instant::now();
                let projection = fit_method(cfg, method, &train, trial_seed).stage("fit")?;
                timings.fit += t.elapsed();

                let t = Instant::now();
                for &dim in &cfg.dims {
                    let p = projection.truncated(dim);
                    let tr = evaluation::project(&train, &p).stage("project")?;
                    let te = evaluation::project(&test, &p).stage("project")?;
                    let predicted = classify(cfg, &tr, &te).stage("classify")?;
                    let cm = ConfusionMatrix::from_labels(te.labels(), &predicted, classes)
                        .stage("score")?;
                    let report = evaluation::score(&cm, dim).stage("score")?;
                    records.push(TrialRecord {
                        method,
                        noise_percent: noise,
                        trial,
                        trial_seed,
                        report,
                        converged_directions: p.records.iter().filter(|r| r.converged).count(),
                    });
                }
                timings.classify += t.elapsed();
            }
        }
    }

    let summary = summarize(cfg, &records);
    Ok(ExperimentResult {
        config: cfg.clone(),
        dataset: DatasetInfo {
            height: cube.height(),
            width: cube.width(),
            bands,
            classes,
            labeled,
        },
        records,
        summary,
        timings,
    })
}

fn prepare_scene(
    cfg: &ExperimentConfig,
    cube: &HsiCube,
    labels: &LabelMap,
    noise: f64,
    trial_seed: u64,
    timings: &mut StageTimings,
) -> Result<LabeledDataset> {
    let t = Instant::now();
    let noisy = if noise == 0.0 {
        None
    } else {
        let seed = rng::derive_seed(trial_seed, SEED_NOISE);
        Some(hsi_io::inject_noise(cube, noise, seed).stage("noise")?)
    };
    let noisy = noisy.as_ref().unwrap_or(cube);
    timings.noise += t.elapsed();

    let t = Instant::now();
    let filtered = if cfg.use_filter {
        let guide = guided_filter::compute_guide(noisy);
        Some(guided_filter::guided_filter(noisy, &guide, cfg.filter).stage("filter")?)
    } else {
        None
    };
    timings.filter += t.elapsed();
    hsi_io::extract_dataset(filtered.as_ref().unwrap_or(noisy), labels).stage("extract")
}

fn summarize(cfg: &ExperimentConfig, records: &[TrialRecord]) -> Vec<SummaryRow> {
    let mut rows = Vec::new();
    for &noise in &cfg.noise_percents {
        for &method in &cfg.methods {
            for &dim in &cfg.dims {
                let sel: Vec<&TrialRecord> = records
                    .iter()
                    .filter(|r| {
                        r.method == method && r.noise_percent == noise && r.report.dim == dim
                    })
                    .collect();
                if sel.is_empty() {
                    continue;
                }
                let pick = |f: fn(&ClassificationReport) -> f64| {
                    Stat::of(&sel.iter().map(|r| f(&r.report)).collect::<Vec<_>>())
                };
                rows.push(SummaryRow {
                    method,
                    noise_percent: noise,
                    dim,
                    trials: sel.len(),
                    oa: pick(|r| r.oa),
                    aa: pick(|r| r.aa),
                    kappa: pick(|r| r.kappa),
                });
            }
        }
    }
    rows
}

/// Header of `trials.csv`.
pub const TRIALS_HEADER: &str =
    "method,noise_percent,trial,trial_seed,dim,oa,aa,kappa,test_samples,converged_directions";
/// Header of `summary.csv`.
pub const SUMMARY_HEADER: &str = "method,noise_percent,dim,trials,oa_mean,oa_std,aa_mean,aa_std,kappa_mean,kappa_std";

pub fn trials_csv(result: &ExperimentResult) -> String {
    let mut s = String::from(TRIALS_HEADER);
    s.push('\n');
    for r in &result.records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{}",
            r.method.name(),
            r.noise_percent,
            r.trial,
            r.trial_seed,
            r.report.dim,
            r.report.oa,
            r.report.aa,
            r.report.kappa,
            r.report.confusion.total(),
            r.converged_directions
        );
    }
    s
}

pub fn summary_csv(result: &ExperimentResult) -> String {
    let mut s = String::from(SUMMARY_HEADER);
    s.push('\n');
    for r in &result.summary {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{}",
            r.method.name(),
            r.noise_percent,
            r.dim,
            r.trials,
            r.oa.mean,
            r.oa.std,
            r.aa.mean,
            r.aa.std,
            r.kappa.mean,
            r.kappa.std
        );
    }
    s
}

/// Human-readable table: one row per (noise, method, dim), accuracies in %.
pub fn report_table(result: &ExperimentResult) -> String {
    let cfg = &result.config;
    let d = &result.dataset;
    let mut s = String::new();
    let _ = writeln!(s, "TL-L1GC experiment report");
    let _ = writeln!(
        s,
        "data: {}x{} pixels, {} bands, {} classes, {} labeled",
        d.height, d.width, d.bands, d.classes, d.labeled
    );
    let _ = writeln!(
        s,
        "protocol: {} samples/class, {} trials, seed {}, classifier {}, filter {}, delta {}",
        cfg.samples_per_class,
        cfg.trials,
        cfg.seed,
        cfg.classifier.name(),
        if cfg.use_filter { "on" } else { "off" },
        cfg.delta
    );
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "{:>7}  {:<8} {:>4}  {:>15}  {:>15}  {:>15}",
        "noise%", "method", "dim", "OA (%)", "AA (%)", "k"
    );
    for r in &result.summary {
        let _ = writeln!(
            s,
            "{:>7}  {:<8} {:>4}  {:>7.2} ± {:<5.2}  {:>7.2} ± {:<5.2}  {:>7.4} ± {:<5.4}",
            r.noise_percent,
            r.method.name(),
            r.dim,
            100.0 * r.oa.mean,
            100.0 * r.oa.std,
            100.0 * r.aa.mean,
            100.0 * r.aa.std,
            r.kappa.mean,
            r.kappa.std
        );
    }
    s
}

/// Writes `report.txt`, `trials.csv`, `summary.csv` and
/// `config.resolved.json` into `dir`. The files contain no timings, so
/// identical configurations give byte-identical output.
pub fn emit_report(result: &ExperimentResult, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files = [
        ("report.txt", report_table(result)),
        ("trials.csv", trials_csv(result)),
        ("summary.csv", summary_csv(result)),
        ("config.resolved.json", result.config.to_json()),
    ];
    for (name, body) in files {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            synthetic: Some(SyntheticSource {
                spec: SynthSpec {
                    height: 6,
                    width: 8,
                    classes: 2,
                    informative: 2,
                    nuisance: 2,
                    noise_bands: 1,
                    ..SynthSpec::default()
                },
                seed: 3,
            }),
            samples_per_class: 4,
            trials: 2,
            dims: vec![1, 2],
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn defaults_follow_the_protocol() {
        let c = ExperimentConfig::default();
        assert_eq!((c.delta, c.samples_per_class, c.trials), (0.4, 10, 5));
        assert_eq!((c.dims[0], *c.dims.last().unwrap()), (4, 60));
    }

    #[test]
    fn config_round_trips_and_rejects_unknown_keys() {
        let c = small();
        assert_eq!(ExperimentConfig::from_json(&c.to_json()).unwrap(), c);
        assert!(ExperimentConfig::from_json(r#"{"deltta": 1}"#).is_err());
        let partial = ExperimentConfig::from_json(r#"{"cube": "a", "labels": "b"}"#).unwrap();
        assert_eq!(partial.trials, 5);
    }

    #[test]
    fn validation() {
        assert!(ExperimentConfig::default().validate().is_err());
        assert!(small().validate().is_ok());
        assert!(ExperimentConfig { trials: 0, ..small() }.validate().is_err());
        assert!(ExperimentConfig { dims: vec![], ..small() }.validate().is_err());
        assert!(ExperimentConfig { noise_percents: vec![101.0], ..small() }.validate().is_err());
        let too_big = ExperimentConfig { dims: vec![9], ..small() };
        let err = run_experiment(&too_big).unwrap_err();
        assert_eq!(err.stage(), Some("config"));
        assert!(matches!(err, Error::Stage { source, .. } if matches!(*source, Error::InvalidConfig(_))));
    }

    #[test]
    fn summary_matches_records() {
        let r = run_experiment(&small()).unwrap();
        assert_eq!(r.records.len(), 2 * 3 * 2);
        for row in &r.summary {
            let oas: Vec<f64> = r
                .records
                .iter()
                .filter(|t| t.method == row.method && t.report.dim == row.dim)
                .map(|t| t.report.oa)
                .collect();
            assert_eq!(oas.len(), 2);
            assert!((row.oa.mean - (oas[0] + oas[1]) / 2.0).abs() < 1e-12);
            assert!(row.oa.min <= row.oa.mean && row.oa.mean <= row.oa.max);
        }
        let csv = trials_csv(&r);
        assert_eq!(csv.lines().count(), 1 + r.records.len());
    }

    #[test]
    fn method_names_parse() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("lda".parse::<Method>().is_err());
        assert_eq!("1nn".parse::<Classifier>().unwrap(), Classifier::OneNn);
    }
}
