//! `tlgc` — run dimensionality-reduction experiments on HSIC/HSIL data.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tlgc::experiment::{self, Classifier, ExperimentConfig, Method, SyntheticSource};
use tlgc::hsi_io;
use tlgc::{Error, Result, StageExt, SynthSpec};

#[derive(Parser)]
#[command(name = "tlgc", version, about = "TL-L1GC dimensionality reduction experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write report.txt, trials.csv, summary.csv and
    /// config.resolved.json into the output directory.
    Run(RunArgs),
    /// Generate a synthetic scene as HSIC/HSIL files.
    Synth(SynthArgs),
    /// Validate HSIC/HSIL container files and print their shape.
    ConvertCheck(CheckArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON config; omitted keys take their defaults.
    config: Option<PathBuf>,
    #[arg(long)]
    cube: Option<PathBuf>,
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Use a default synthetic scene with this seed instead of files.
    #[arg(long, value_name = "SEED")]
    synthetic: Option<u64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Comma-separated list, e.g. 4,8,16.
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    /// Comma-separated subset of tl_l1gc, l1gc, sc_l2.
    #[arg(long, value_delimiter = ',')]
    method: Option<Vec<String>>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    use_filter: Option<bool>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    samples_per_class: Option<usize>,
    /// Comma-separated noise percentages in [0, 100].
    #[arg(long, value_delimiter = ',')]
    noise: Option<Vec<f64>>,
    /// svm or 1nn.
    #[arg(long)]
    classifier: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the resolved config and exit without running.
    #[arg(long)]
    dry_run: bool,
}

#[derive(Args)]
struct SynthArgs {
    /// Output cube path (HSIC).
    #[arg(long)]
    cube: PathBuf,
    /// Output label path (HSIL).
    #[arg(long)]
    labels: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// JSON generator spec; flags below override its fields.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    height: Option<usize>,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    classes: Option<usize>,
    #[arg(long)]
    informative: Option<usize>,
    #[arg(long)]
    nuisance: Option<usize>,
    #[arg(long)]
    noise_bands: Option<usize>,
    #[arg(long)]
    separation: Option<f64>,
    #[arg(long)]
    class_std: Option<f64>,
    #[arg(long)]
    nuisance_noise: Option<f64>,
    #[arg(long)]
    noise_std: Option<f64>,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    cube: Option<PathBuf>,
    #[arg(long)]
    labels: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(a) => run(a),
        Command::Synth(a) => synth(a),
        Command::ConvertCheck(a) => convert_check(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn resolve(a: &RunArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &a.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if a.cube.is_some() || a.labels.is_some() {
        cfg.cube = a.cube.clone().or(cfg.cube);
        cfg.labels = a.labels.clone().or(cfg.labels);
        cfg.synthetic = None;
    }
    if let Some(seed) = a.synthetic {
        cfg.cube = None;
        cfg.labels = None;
        cfg.synthetic = Some(SyntheticSource {
            spec: cfg.synthetic.map(|s| s.spec).unwrap_or_default(),
            seed,
        });
    }
    if let Some(v) = a.delta {
        cfg.delta = v;
    }
    if let Some(v) = &a.dims {
        cfg.dims = v.clone();
    }
    if let Some(v) = &a.method {
        cfg.methods = v.iter().map(|m| m.trim().parse::<Method>()).collect::<Result<_>>()?;
    }
    if let Some(v) = a.use_filter {
        cfg.use_filter = v;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if let Some(v) = a.trials {
        cfg.trials = v;
    }
    if let Some(v) = a.samples_per_class {
        cfg.samples_per_class = v;
    }
    if let Some(v) = &a.noise {
        cfg.noise_percents = v.clone();
    }
    if let Some(v) = &a.classifier {
        cfg.classifier = v.parse::<Classifier>()?;
    }
    if let Some(v) = &a.out {
        cfg.out = v.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(a: RunArgs) -> Result<()> {
    let cfg = resolve(&a).stage("config")?;
    if a.dry_run {
        print!("{}", cfg.to_json());
        return Ok(());
    }
    let result = experiment::run_experiment(&cfg)?;
    experiment::emit_report(&result, &cfg.out).stage("emit")?;
    print!("{}", experiment::report_table(&result));
    eprintln!(
        "wrote {} (load {:.2?}, fit {:.2?}, classify {:.2?})",
        cfg.out.display(),
        result.timings.load,
        result.timings.fit,
        result.timings.classify
    );
    Ok(())
}

fn synth_spec(a: &SynthArgs) -> Result<SynthSpec> {
    let mut s = match &a.spec {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::Io {
                path: p.clone(),
                source: e,
            })?;
            serde_json::from_str(&text).map_err(|e| Error::InvalidConfig(e.to_string()))?
        }
        None => SynthSpec::default(),
    };
    macro_rules! set {
        ($($f:ident),*) => {$( if let Some(v) = a.$f { s.$f = v; } )*};
    }
    set!(height, width, classes, informative, nuisance, noise_bands);
    set!(separation, class_std, nuisance_noise, noise_std);
    s.validate()?;
    Ok(s)
}

fn synth(a: SynthArgs) -> Result<()> {
    let spec = synth_spec(&a).stage("config")?;
    let (cube, labels) = tlgc::make_synthetic(&spec, a.seed).stage("synth")?;
    hsi_io::save_cube(&cube, &a.cube).stage("write")?;
    hsi_io::save_labels(&labels, &a.labels).stage("write")?;
    println!(
        "{}x{}x{} cube -> {}, {} classes -> {}",
        cube.height(),
        cube.width(),
        cube.bands(),
        a.cube.display(),
        spec.classes,
        a.labels.display()
    );
    Ok(())
}

fn convert_check(a: CheckArgs) -> Result<()> {
    if a.cube.is_none() && a.labels.is_none() {
        return Err(Error::InvalidConfig("give --cube and/or --labels".into())).stage("config");
    }
    let cube = match &a.cube {
        Some(p) => {
            let c = hsi_io::load_cube(p).stage("load")?;
            println!("cube {}: {} x {} x {} bands", p.display(), c.height(), c.width(), c.bands());
            Some(c)
        }
        None => None,
    };
    let labels = match &a.labels {
        Some(p) => {
            let l = hsi_io::load_labels(p).stage("load")?;
            let classes = l.num_classes().stage("load")?;
            let labeled = l.labels().iter().filter(|&&v| v != 0).count();
            println!(
                "labels {}: {} x {}, {} classes, {} labeled pixels",
                p.display(),
                l.height(),
                l.width(),
                classes,
                labeled
            );
            Some(l)
        }
        None => None,
    };
    if let (Some(c), Some(l)) = (&cube, &labels) {
        let ds = hsi_io::extract_dataset(c, l).stage("extract")?;
        let counts: Vec<String> = ds.class_counts().iter().map(|n| n.to_string()).collect();
        println!("per-class counts: {}", counts.join(","));
    }
    Ok(())
}
