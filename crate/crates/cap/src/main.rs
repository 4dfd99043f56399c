use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use cap::config::{PathMode, PipelineConfig};
use cap::features::{load_features, write_corpus};
use cap::labels::{load_ground_truth, read_segmentations, write_ground_truth, write_segmentations};
use cap::pipeline::{decode_corpus, refine_corpus, run_pipeline, score_corpus, select_path, write_outputs};
use cap::plot::plot_segmentation;
use cap::presets::Preset;
use cap::report::format_report;
use cap::store::{load_json, load_model, save_json, PoolArtifact, TemporalArtifact};
use cap_core::cooccur::{build_cooccurrence, occurrence_ratios, select_salience_pool};
use cap_core::synth::{generate, SynthSpec};
use cap_core::{build_histograms, evaluate, fit_clusters, CooccurrenceStats, KMeansConfig, PathConfig, RefineConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "cap", version, about = "Unsupervised temporal segmentation by co-occurrence action parsing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic corpus with ground truth.
    Synth(SynthArgs),
    /// Fit k-means clusters and per-cluster Gaussians.
    Cluster(ClusterArgs),
    /// Build co-occurrence statistics and per-sequence salience pools.
    Parse(ParseArgs),
    /// Build temporal histograms and extract the temporal path.
    Path(PathArgs),
    /// Decode sequences into segmentations.
    Decode(DecodeArgs),
    /// Evaluate predicted segmentations against ground truth.
    Eval(EvalArgs),
    /// Run the full pipeline.
    Run(RunArgs),
    /// Plot ground truth and prediction of one sequence as SVG.
    Plot(PlotArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// TOML synth spec; overrides --preset.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = PresetArg::Recovery)]
    preset: PresetArg,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; receives `features/` and `gt/`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    Recovery,
    Absence,
    MultiOccurrence,
}

#[derive(Args)]
struct FeatureArgs {
    /// Manifest, `.capf` or `.csv` feature file.
    #[arg(long)]
    features: PathBuf,
}

#[derive(Args)]
struct KMeansArgs {
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    #[arg(long, default_value_t = 300)]
    max_iters: usize,
}

impl KMeansArgs {
    fn config(&self) -> KMeansConfig {
        KMeansConfig {
            k: self.k,
            seed: self.seed,
            restarts: self.restarts,
            max_iters: self.max_iters,
            ..KMeansConfig::default()
        }
    }
}

#[derive(Args)]
struct RefineArgs {
    #[arg(long, default_value_t = 0.1)]
    tau1: f64,
    #[arg(long, default_value_t = 0.1)]
    tau2: f64,
    #[arg(long, default_value_t = 0.5)]
    eta: f64,
}

impl RefineArgs {
    fn config(&self) -> RefineConfig {
        RefineConfig {
            tau1: self.tau1,
            tau2: self.tau2,
            eta: self.eta,
        }
    }
}

#[derive(Args)]
struct ClusterArgs {
    #[command(flatten)]
    input: FeatureArgs,
    #[command(flatten)]
    kmeans: KMeansArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ParseArgs {
    #[command(flatten)]
    input: FeatureArgs,
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    refine: RefineArgs,
    /// Output directory for `cooccurrence.json` and `pools.json`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PathArgs {
    #[command(flatten)]
    input: FeatureArgs,
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value_t = 20)]
    bins: usize,
    #[arg(long, default_value_t = 0.15)]
    theta: f64,
    #[arg(long, value_enum, default_value_t = PathModeArg::Multi)]
    mode: PathModeArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum PathModeArg {
    Off,
    Single,
    Multi,
}

impl From<PathModeArg> for PathMode {
    fn from(m: PathModeArg) -> Self {
        match m {
            PathModeArg::Off => PathMode::Off,
            PathModeArg::Single => PathMode::Single,
            PathModeArg::Multi => PathMode::Multi,
        }
    }
}

#[derive(Args)]
struct DecodeArgs {
    #[command(flatten)]
    input: FeatureArgs,
    #[arg(long)]
    model: PathBuf,
    /// Co-occurrence stats from `parse`; enables score refinement.
    #[arg(long)]
    stats: Option<PathBuf>,
    #[arg(long, default_value_t = 0.1)]
    tau2: f64,
    #[arg(long, default_value_t = 0.5)]
    eta: f64,
    /// Temporal artifact from `path`; without it frames are decoded by argmax.
    #[arg(long)]
    path: Option<PathBuf>,
    #[arg(long)]
    stay_log_prob: Option<f64>,
    #[arg(long)]
    advance_log_prob: Option<f64>,
    /// Output directory for `<id>.txt` label files.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    input: FeatureArgs,
    /// Directory of predicted label files.
    #[arg(long)]
    pred: PathBuf,
    /// Directory of ground-truth label files.
    #[arg(long)]
    gt: PathBuf,
    /// Number of clusters; inferred from the predictions when absent.
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Args)]
struct RunArgs {
    /// TOML pipeline config; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    features: Option<PathBuf>,
    #[arg(long)]
    gt: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tau1: Option<f64>,
    #[arg(long)]
    tau2: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    theta: Option<f64>,
    /// Skip co-occurrence refinement.
    #[arg(long)]
    no_cooccurrence: bool,
    #[arg(long, value_enum)]
    path_mode: Option<PathModeArg>,
}

#[derive(Args)]
struct PlotArgs {
    #[command(flatten)]
    input: FeatureArgs,
    #[arg(long)]
    gt: PathBuf,
    /// Directory of predicted label files; omit for a ground-truth-only plot.
    #[arg(long)]
    pred: Option<PathBuf>,
    /// Sequence to plot.
    #[arg(long)]
    id: String,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Synth(a) => synth(a),
        Command::Cluster(a) => cluster(a),
        Command::Parse(a) => parse(a),
        Command::Path(a) => path(a),
        Command::Decode(a) => decode(a),
        Command::Eval(a) => eval(a),
        Command::Run(a) => run(a),
        Command::Plot(a) => plot(a),
    }
}

fn load(path: &Path) -> Result<cap_core::Corpus> {
    load_features(path).context("[load] reading features")
}

fn synth(a: SynthArgs) -> Result<()> {
    let mut spec: SynthSpec = match &a.spec {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("[synth] reading {}", p.display()))?;
            toml::from_str(&text).with_context(|| format!("[synth] parsing {}", p.display()))?
        }
        None => {
            let preset = match a.preset {
                PresetArg::Recovery => Preset::Recovery,
                PresetArg::Absence => Preset::Absence,
                PresetArg::MultiOccurrence => Preset::MultiOccurrence,
            };
            preset.spec(a.seed.unwrap_or(0))
        }
    };
    if let Some(seed) = a.seed {
        spec.seed = seed;
    }
    let (corpus, gt) = generate(&spec).context("[synth]")?;
    let manifest = write_corpus(&corpus, &a.out.join("features")).context("[write]")?;
    write_ground_truth(&a.out.join("gt"), &gt).context("[write]")?;
    println!("wrote {} sequences; manifest {}", corpus.len(), manifest.display());
    Ok(())
}

fn cluster(a: ClusterArgs) -> Result<()> {
    let corpus = load(&a.input.features)?;
    let model = fit_clusters(&corpus, &a.kmeans.config()).context("[cluster]")?;
    save_json(&model, &a.out).context("[write]")?;
    Ok(())
}

fn parse(a: ParseArgs) -> Result<()> {
    let corpus = load(&a.input.features)?;
    let model = load_model(&a.model).context("[load]")?;
    let cfg = a.refine.config();
    let stats = build_cooccurrence(&model, &corpus, &cfg).context("[cooccurrence]")?;
    let mut pools = PoolArtifact::new();
    for seq in &corpus {
        let ratios = occurrence_ratios(&model, seq.id()).context("[refine]")?;
        pools.insert(seq.id().to_string(), select_salience_pool(&ratios, &stats, &cfg));
    }
    save_json(&stats, &a.out.join("cooccurrence.json")).context("[write]")?;
    save_json(&pools, &a.out.join("pools.json")).context("[write]")?;
    Ok(())
}

fn path(a: PathArgs) -> Result<()> {
    let corpus = load(&a.input.features)?;
    let model = load_model(&a.model).context("[load]")?;
    let cfg = PipelineConfig {
        path: PathConfig {
            bin_count: a.bins,
            theta: a.theta,
        },
        path_mode: a.mode.into(),
        ..PipelineConfig::default()
    };
    let histograms = build_histograms(&model, &corpus, &cfg.path).context("[histogram]")?;
    let path = select_path(&histograms, &cfg).context("[path]")?;
    match &path {
        Some(p) => println!("path: {:?}", p.steps()),
        None => println!("path: none (argmax decoding)"),
    }
    let artifact = TemporalArtifact {
        bin_count: a.bins,
        theta: a.theta,
        histograms,
        path,
    };
    save_json(&artifact, &a.out).context("[write]")?;
    Ok(())
}

fn decode(a: DecodeArgs) -> Result<()> {
    let corpus = load(&a.input.features)?;
    let model = load_model(&a.model).context("[load]")?;
    let mut scores = score_corpus(&model, &corpus).context("[score]")?;
    if let Some(stats_path) = &a.stats {
        let stats: CooccurrenceStats = load_json(stats_path).context("[load]")?;
        let cfg = RefineConfig {
            tau1: stats.tau1(),
            tau2: a.tau2,
            eta: a.eta,
        };
        scores = refine_corpus(&model, &scores, &stats, &cfg).context("[refine]")?.1;
    }
    let path = match &a.path {
        Some(p) => load_json::<TemporalArtifact>(p).context("[load]")?.path,
        None => None,
    };
    let mut decode_cfg = cap_core::DecodeConfig::default();
    if let Some(v) = a.stay_log_prob {
        decode_cfg.stay_log_prob = v;
    }
    if let Some(v) = a.advance_log_prob {
        decode_cfg.advance_log_prob = v;
    }
    let segmentations = decode_corpus(&scores, path.as_ref(), &decode_cfg).context("[decode]")?;
    write_segmentations(&a.out, &segmentations).context("[write]")?;
    Ok(())
}

fn eval(a: EvalArgs) -> Result<()> {
    let corpus = load(&a.input.features)?;
    let gt = load_ground_truth(&a.gt, &corpus).context("[load] ground truth")?;
    let preds = read_segmentations(&a.pred, &corpus).context("[load] predictions")?;
    let k = a.k.unwrap_or_else(|| {
        preds
            .iter()
            .flat_map(|s| s.labels().iter().copied())
            .max()
            .map_or(1, |m| m + 1)
    });
    let report = evaluate(&preds, &gt, k).context("[eval]")?;
    print!("{}", format_report(&report));
    Ok(())
}

fn run(a: RunArgs) -> Result<()> {
    let mut cfg = match &a.config {
        Some(p) => PipelineConfig::from_file(p).context("[load] config")?,
        None => PipelineConfig::default(),
    };
    if let Some(v) = a.features {
        cfg.features = Some(v);
    }
    if let Some(v) = a.gt {
        cfg.ground_truth = Some(v);
    }
    if let Some(v) = a.out {
        cfg.output = Some(v);
    }
    if let Some(v) = a.k {
        cfg.kmeans.k = v;
    }
    if let Some(v) = a.seed {
        cfg.kmeans.seed = v;
    }
    if let Some(v) = a.tau1 {
        cfg.refine.tau1 = v;
    }
    if let Some(v) = a.tau2 {
        cfg.refine.tau2 = v;
    }
    if let Some(v) = a.eta {
        cfg.refine.eta = v;
    }
    if let Some(v) = a.bins {
        cfg.path.bin_count = v;
    }
    if let Some(v) = a.theta {
        cfg.path.theta = v;
    }
    if a.no_cooccurrence {
        cfg.use_cooccurrence = false;
    }
    if let Some(m) = a.path_mode {
        cfg.path_mode = m.into();
    }
    let Some(features) = cfg.features.clone() else {
        bail!("[load] no feature file given (--features or `features` in the config)");
    };
    let corpus = load(&features)?;
    let gt = match &cfg.ground_truth {
        Some(dir) => Some(load_ground_truth(dir, &corpus).context("[load] ground truth")?),
        None => None,
    };
    let output = run_pipeline(&corpus, gt.as_ref(), &cfg)?;
    if let Some(dir) = &cfg.output {
        write_outputs(dir, &corpus, &output, &cfg)?;
    }
    match &output.path {
        Some(p) => println!("path: {:?}", p.steps()),
        None => println!("path: none (argmax decoding)"),
    }
    if let Some(report) = &output.report {
        print!("{}", format_report(report));
    }
    Ok(())
}

fn plot(a: PlotArgs) -> Result<()> {
    let corpus = load(&a.input.features)?;
    let gt = load_ground_truth(&a.gt, &corpus).context("[load] ground truth")?;
    let truth = gt
        .get(&a.id)
        .with_context(|| format!("[plot] unknown sequence `{}`", a.id))?;
    let mut mapped = Vec::new();
    if let Some(pred_dir) = &a.pred {
        let preds = read_segmentations(pred_dir, &corpus).context("[load] predictions")?;
        let k = preds
            .iter()
            .flat_map(|s| s.labels().iter().copied())
            .max()
            .map_or(1, |m| m + 1);
        let report = evaluate(&preds, &gt, k).context("[eval]")?;
        let seg = preds
            .iter()
            .find(|s| s.sequence_id() == a.id)
            .with_context(|| format!("[plot] no prediction for `{}`", a.id))?;
        // unmapped clusters get ids past the ground-truth vocabulary
        mapped = seg
            .labels()
            .iter()
            .map(|&c| report.mapping.get(c).unwrap_or(gt.n_labels() + c))
            .collect();
    }
    let predictions: Vec<(&str, &[usize])> = if a.pred.is_some() {
        vec![("prediction", mapped.as_slice())]
    } else {
        Vec::new()
    };
    plot_segmentation(truth, &predictions, gt.vocabulary(), &a.out).context("[write]")?;
    Ok(())
}
