//! Command-line surface: corpus synthesis, descriptor extraction, model
//! training, and intra-/cross-corpus evaluation as composable subcommands.
//!
//! Subcommands never mutate their inputs. Every output is written by the
//! invocation that owns it; when a command fails, files it had started
//! writing are removed. All randomness (corpus synthesis, fold assignment)
//! flows from the `--seed` flags, so equal seeds give byte-identical
//! outputs regardless of `--jobs`.

use crate::classify::io::{load_model, save_model, sidecar_path};
use crate::classify::{KernelKind, TrainConfig};
use crate::corpus::synth::{generate_corpus, SubjectSplit, SynthParams};
use crate::corpus::load_manifest;
use crate::error::{Error, Result};
use crate::eval::protocol::{
    roc_csv, run_cross_protocol, run_intra_protocol, score_report, train_protocol_model,
    IntraOutcome, ProtocolConfig, Report,
};
use crate::eval::RocCurve;
use crate::extract::{extract_features, load_features, save_features, ExtractOptions, FeatureSet};
use crate::imaging::ColorSpace;
use crate::texture::{LbpParams, Sampling};

use clap::{Args, Parser, Subcommand};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

const EXIT_CODES: &str = "Exit codes:
  0  success
  2  invalid parameters or flag usage
  3  file system failure (missing input, unwritable output)
  4  malformed corpus manifest
  5  malformed feature or model file
  6  image decoding or geometry failure
  7  descriptor layout mismatch between inputs
  8  degenerate training data
  9  a split or scenario had no scores to evaluate

Set CHROMATEX_LOG (error|warn|info|debug|trace) to control log output.";

#[derive(Debug, Parser)]
#[command(
    name = "chromatex",
    version,
    about = "Color texture descriptors and presentation-attack evaluation toolkit",
    after_help = EXIT_CODES,
    propagate_version = true
)]
pub struct Cli {
    /// Worker threads for extraction, training, and evaluation
    /// [default: all cores]
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic labeled face-video corpus
    Synth(SynthArgs),
    /// Extract windowed color texture descriptors from a corpus manifest
    Extract(ExtractArgs),
    /// Tune hyperparameters and train a classifier on extracted descriptors
    Train(TrainArgs),
    /// Report error rates per scenario on a corpus' test split
    Eval(EvalArgs),
    /// Train on one corpus and report the transfer error on another
    Crosseval(CrossArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output corpus directory (frames plus manifest.jsonl); must be new or
    /// empty
    #[arg(long)]
    pub out: PathBuf,
    /// Number of subjects
    #[arg(long, default_value_t = SynthParams::default().n_subjects)]
    pub subjects: usize,
    /// Subjects assigned to the train split
    #[arg(long, default_value_t = SynthParams::default().split.train)]
    pub train: usize,
    /// Subjects assigned to the development split
    #[arg(long, default_value_t = SynthParams::default().split.dev)]
    pub dev: usize,
    /// Subjects assigned to the test split
    #[arg(long, default_value_t = SynthParams::default().split.test)]
    pub test: usize,
    /// Frames per video
    #[arg(long, default_value_t = SynthParams::default().frames_per_video)]
    pub frames: usize,
    /// Frame rate of the synthesized videos
    #[arg(long, default_value_t = SynthParams::default().fps)]
    pub fps: f64,
    /// Recapture chroma compression toward neutral in [0, 1] (1 keeps
    /// chroma)
    #[arg(long, default_value_t = SynthParams::default().gamut_compression)]
    pub gamut: f64,
    /// Recapture color cast as comma-separated R,G,B offsets
    #[arg(long, value_delimiter = ',', num_args = 1..,
          default_values_t = SynthParams::default().color_cast)]
    pub cast: Vec<f64>,
    /// Recapture Gaussian blur sigma in pixels
    #[arg(long, default_value_t = SynthParams::default().blur_radius)]
    pub blur: f64,
    /// Recapture chroma noise sigma
    #[arg(long, default_value_t = SynthParams::default().chroma_noise_sigma)]
    pub noise: f64,
    /// Recapture moire amplitude on luma
    #[arg(long, default_value_t = SynthParams::default().moire_amplitude)]
    pub moire: f64,
    /// Master random seed
    #[arg(long, default_value_t = SynthParams::default().seed)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct DescriptorArgs {
    /// Single color space to describe [default: ycbcr]
    #[arg(long, value_parser = ColorSpace::from_str, conflicts_with = "fuse")]
    pub space: Option<ColorSpace>,
    /// Concatenate descriptors of several color spaces, e.g. `ycbcr+hsv`
    #[arg(long, value_parser = ColorSpace::from_str, value_delimiter = '+')]
    pub fuse: Option<Vec<ColorSpace>>,
    /// Neighbors per pixel of the binary pattern operator
    #[arg(long, default_value_t = 8)]
    pub p: u32,
    /// Neighborhood radius in pixels
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    /// Neighbor sampling: bilinear interpolation or integer offsets
    #[arg(long, value_parser = Sampling::from_str, default_value = "interp")]
    pub sampling: Sampling,
}

impl DescriptorArgs {
    fn spaces(&self) -> Vec<ColorSpace> {
        match (&self.space, &self.fuse) {
            (Some(space), _) => vec![*space],
            (None, Some(fused)) => fused.clone(),
            (None, None) => vec![ColorSpace::YCbCr],
        }
    }
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Corpus manifest produced by `synth`
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output descriptor file (JSON lines)
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub descriptor: DescriptorArgs,
    /// Temporal window length in seconds
    #[arg(long = "window-len", default_value_t = 3.0)]
    pub window_len: f64,
    /// Temporal window stride in seconds
    #[arg(long = "window-stride", default_value_t = 1.0)]
    pub window_stride: f64,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    /// Comma-separated soft-margin C candidates
    /// [default: 0.1,1,10,100,1000]
    #[arg(long = "c-grid", value_delimiter = ',', num_args = 1..)]
    pub c_grid: Option<Vec<f64>>,
    /// Comma-separated RBF gamma candidates [default: 2^-7..2^3]
    #[arg(long = "gamma-grid", value_delimiter = ',', num_args = 1..)]
    pub gamma_grid: Option<Vec<f64>>,
    /// Cross-validation folds used when the corpus has no dev split
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    /// Seed for fold assignment
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
}

impl TuneArgs {
    fn config(&self) -> ProtocolConfig {
        let mut train = TrainConfig::default();
        if let Some(grid) = &self.c_grid {
            train.c_grid = grid.clone();
        }
        if let Some(grid) = &self.gamma_grid {
            train.gamma_grid = grid.clone();
        }
        ProtocolConfig {
            train,
            folds: self.folds,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Descriptor file produced by `extract`
    #[arg(long)]
    pub features: PathBuf,
    /// Output model file (a JSON sidecar is written next to it)
    #[arg(long)]
    pub out: PathBuf,
    /// Kernel family to tune over
    #[arg(long, value_parser = KernelKind::from_str, default_value = "rbf")]
    pub kernel: KernelKind,
    #[command(flatten)]
    pub tune: TuneArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Descriptor file(s); repeat the flag to evaluate several descriptor
    /// configurations side by side
    #[arg(long, required = true)]
    pub features: Vec<PathBuf>,
    /// Trained model from `train`; omit to tune and train in place
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Output report directory
    #[arg(long)]
    pub out: PathBuf,
    /// Kernel family to tune over when no model is given
    #[arg(long, value_parser = KernelKind::from_str, default_value = "rbf")]
    pub kernel: KernelKind,
    #[command(flatten)]
    pub tune: TuneArgs,
}

#[derive(Debug, Args)]
pub struct CrossArgs {
    /// Descriptor file of the corpus to train on
    #[arg(long = "features-a")]
    pub features_a: PathBuf,
    /// Descriptor file of the held-out corpus
    #[arg(long = "features-b")]
    pub features_b: PathBuf,
    /// Output report directory
    #[arg(long)]
    pub out: PathBuf,
    /// Kernel families to compare: linear, rbf, or both
    #[arg(long, default_value = "both")]
    pub kernel: KernelSelect,
    #[command(flatten)]
    pub tune: TuneArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelSelect {
    Linear,
    Rbf,
    Both,
}

impl FromStr for KernelSelect {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "linear" => Ok(KernelSelect::Linear),
            "rbf" => Ok(KernelSelect::Rbf),
            "both" => Ok(KernelSelect::Both),
            other => Err(Error::InvalidParams(format!(
                "unknown kernel selection {other:?} (expected linear|rbf|both)"
            ))),
        }
    }
}

impl KernelSelect {
    fn kinds(self) -> Vec<KernelKind> {
        match self {
            KernelSelect::Linear => vec![KernelKind::Linear],
            KernelSelect::Rbf => vec![KernelKind::Rbf],
            KernelSelect::Both => vec![KernelKind::Linear, KernelKind::Rbf],
        }
    }
}

/// Removes this run's outputs unless `commit` was called, so failed
/// commands never leave partial files behind.
struct OutputGuard {
    files: Vec<PathBuf>,
    /// A directory whose contents (and, when `created_dir`, the directory
    /// itself) are removed on failure.
    dir: Option<(PathBuf, bool)>,
    committed: bool,
}

impl OutputGuard {
    fn new() -> Self {
        OutputGuard {
            files: Vec::new(),
            dir: None,
            committed: false,
        }
    }

    fn track_file(&mut self, path: &Path) {
        self.files.push(path.to_path_buf());
    }

    /// Claims `dir` as this run's output directory: it must not exist yet
    /// or be empty, and is created if missing.
    fn claim_dir(&mut self, dir: &Path) -> Result<()> {
        if dir.exists() {
            let mut entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
            if entries.next().is_some() {
                return Err(Error::InvalidParams(format!(
                    "output directory {} is not empty",
                    dir.display()
                )));
            }
            self.dir = Some((dir.to_path_buf(), false));
        } else {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            self.dir = Some((dir.to_path_buf(), true));
        }
        Ok(())
    }

    fn commit(mut self) {
        self.committed = true;
    }
}

impl Drop for OutputGuard {
    fn drop(&mut self) {
        if self.committed {
            return;
        }
        for path in &self.files {
            let _ = fs::remove_file(path);
        }
        if let Some((dir, created)) = &self.dir {
            if *created {
                let _ = fs::remove_dir_all(dir);
            } else if let Ok(entries) = fs::read_dir(dir) {
                for entry in entries.flatten() {
                    let path = entry.path();
                    let _ = if path.is_dir() {
                        fs::remove_dir_all(&path)
                    } else {
                        fs::remove_file(&path)
                    };
                }
            }
        }
    }
}

fn load_feature_file(path: &Path) -> Result<FeatureSet> {
    let set = load_features(path)?;
    log::info!(
        "loaded {} windows of {} ({} dims) from {}",
        set.records().len(),
        set.descriptor_name(),
        set.stamp().dim(),
        path.display()
    );
    Ok(set)
}

fn write_report_files(dir: &Path, report: &Report, guard: &mut OutputGuard) -> Result<()> {
    let text = dir.join("report.txt");
    guard.track_file(&text);
    fs::write(&text, report.text_table()).map_err(|e| Error::io(&text, e))?;
    let csv = dir.join("report.csv");
    guard.track_file(&csv);
    fs::write(&csv, report.csv()).map_err(|e| Error::io(&csv, e))?;
    Ok(())
}

fn write_roc_file(
    dir: &Path,
    descriptor: &str,
    points: &[(f64, f64, f64)],
    guard: &mut OutputGuard,
) -> Result<()> {
    let path = dir.join(format!("roc_{descriptor}.csv"));
    guard.track_file(&path);
    fs::write(&path, roc_csv(points)).map_err(|e| Error::io(&path, e))
}

pub fn cmd_synth(args: &SynthArgs) -> Result<()> {
    if args.cast.len() != 3 {
        return Err(Error::InvalidParams(format!(
            "--cast needs exactly three offsets, got {}",
            args.cast.len()
        )));
    }
    let params = SynthParams {
        n_subjects: args.subjects,
        frames_per_video: args.frames,
        fps: args.fps,
        split: SubjectSplit {
            train: args.train,
            dev: args.dev,
            test: args.test,
        },
        gamut_compression: args.gamut,
        color_cast: [args.cast[0], args.cast[1], args.cast[2]],
        blur_radius: args.blur,
        chroma_noise_sigma: args.noise,
        moire_amplitude: args.moire,
        seed: args.seed,
    };
    params.validate()?;
    let mut guard = OutputGuard::new();
    guard.claim_dir(&args.out)?;
    let manifest = generate_corpus(&params, &args.out)?;
    guard.commit();
    println!(
        "wrote corpus: {} ({} videos, {} subjects)",
        args.out.join("manifest.jsonl").display(),
        manifest.entries().len(),
        params.n_subjects
    );
    Ok(())
}

pub fn cmd_extract(args: &ExtractArgs) -> Result<()> {
    let opts = ExtractOptions {
        spaces: args.descriptor.spaces(),
        lbp: LbpParams::new(args.descriptor.p, args.descriptor.r, args.descriptor.sampling)?,
        window_length: args.window_len,
        window_stride: args.window_stride,
    };
    let manifest = load_manifest(&args.manifest)?;
    let set = extract_features(&manifest, &opts)?;
    let mut guard = OutputGuard::new();
    guard.track_file(&args.out);
    save_features(&set, &args.out)?;
    guard.commit();
    println!(
        "wrote features: {} ({} windows, {} dims, descriptor {})",
        args.out.display(),
        set.records().len(),
        set.stamp().dim(),
        set.descriptor_name()
    );
    Ok(())
}

pub fn cmd_train(args: &TrainArgs) -> Result<()> {
    let features = load_feature_file(&args.features)?;
    let trained = train_protocol_model(&features, args.kernel, &args.tune.config())?;
    let mut guard = OutputGuard::new();
    guard.track_file(&args.out);
    guard.track_file(&sidecar_path(&args.out));
    save_model(&args.out, &trained.model)?;
    guard.commit();
    println!(
        "wrote model: {} (kernel {}, C {}, held-out EER {:.4}, threshold {:.6}, {} support vectors)",
        args.out.display(),
        trained.model.kernel(),
        trained.tuned.c,
        trained.tuned.cv_eer,
        trained.threshold,
        trained.model.support().len()
    );
    Ok(())
}

pub fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let mut report = Report::default();
    let mut rocs: Vec<(String, RocCurve)> = Vec::new();

    if let Some(model_path) = &args.model {
        if args.features.len() != 1 {
            return Err(Error::InvalidParams(
                "--model evaluates exactly one --features file".into(),
            ));
        }
        let model = load_model(model_path)?;
        let features = load_feature_file(&args.features[0])?;
        if let Some(stamp) = model.stamp() {
            if stamp != features.stamp() {
                return Err(Error::DimMismatch {
                    expected: stamp.dim(),
                    actual: features.stamp().dim(),
                });
            }
        }
        let (part, roc) = score_report(&features, &model)?;
        report.merge(part);
        rocs.push((features.descriptor_name(), roc));
    } else {
        let sets: Vec<FeatureSet> = args
            .features
            .iter()
            .map(|p| load_feature_file(p))
            .collect::<Result<_>>()?;
        let refs: Vec<&FeatureSet> = sets.iter().collect();
        let (full, outcomes) = run_intra_protocol(&refs, args.kernel, &args.tune.config())?;
        report = full;
        for IntraOutcome {
            descriptor,
            trained,
            roc,
        } in outcomes
        {
            println!(
                "{descriptor}: kernel {}, C {}, held-out EER {:.4}, threshold {:.6}",
                trained.model.kernel(),
                trained.tuned.c,
                trained.tuned.cv_eer,
                trained.threshold
            );
            rocs.push((descriptor, roc));
        }
    }

    let mut guard = OutputGuard::new();
    guard.claim_dir(&args.out)?;
    write_report_files(&args.out, &report, &mut guard)?;
    for (descriptor, roc) in &rocs {
        write_roc_file(&args.out, descriptor, roc, &mut guard)?;
    }
    guard.commit();
    print!("{}", report.text_table());
    Ok(())
}

pub fn cmd_crosseval(args: &CrossArgs) -> Result<()> {
    let a = load_feature_file(&args.features_a)?;
    let b = load_feature_file(&args.features_b)?;
    let (report, models) =
        run_cross_protocol(&a, &b, &args.kernel.kinds(), &args.tune.config())?;
    for trained in &models {
        println!(
            "trained on A: kernel {}, C {}, held-out EER {:.4}, threshold {:.6}",
            trained.model.kernel(),
            trained.tuned.c,
            trained.tuned.cv_eer,
            trained.threshold
        );
    }
    let mut guard = OutputGuard::new();
    guard.claim_dir(&args.out)?;
    write_report_files(&args.out, &report, &mut guard)?;
    guard.commit();
    print!("{}", report.text_table());
    Ok(())
}

/// Applies `--jobs` to the global worker pool. Call once, before any
/// parallel work.
pub fn configure_jobs(jobs: Option<usize>) -> Result<()> {
    let Some(jobs) = jobs else {
        return Ok(());
    };
    if jobs == 0 {
        return Err(Error::InvalidParams("--jobs must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build_global()
        .map_err(|e| Error::InvalidParams(format!("worker pool: {e}")))
}

pub fn run(cli: &Cli) -> Result<()> {
    configure_jobs(cli.jobs)?;
    match &cli.command {
        Command::Synth(args) => cmd_synth(args),
        Command::Extract(args) => cmd_extract(args),
        Command::Train(args) => cmd_train(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Crosseval(args) => cmd_crosseval(args),
    }
}
