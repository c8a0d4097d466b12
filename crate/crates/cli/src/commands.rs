//! Subcommand implementations. Each command prints its effective config
//! as one `config: {json}` line before doing any work.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::Serialize;
use udderid::dataset_io::{export_features, extract_dataset, import_features, load_manifest};
use udderid::synthetic::{generate_records, write_records, GeometryPrior, HerdConfig, NoiseModel};
use udderid::{
    accuracy_curve, export_report, fit, Algorithm, CurveConfig, Dataset, Error, EvaluationReport,
    FeatureLayout, Hyperparams, SplitMode, TrainedModel,
};

pub const DEFAULT_SEED: u64 = 42;

/// Group sizes used when `--n` is not given. Sizes above the number of
/// eligible cows are dropped.
pub const DEFAULT_N_VALUES: [usize; 16] = [2, 5, 10, 15, 20, 25, 30, 35, 40, 45, 50, 55, 60, 65, 70, 75];

/// Failure of a command: a list of messages, one per problem.
#[derive(Debug)]
pub struct CommandError(pub Vec<String>);

impl From<Error> for CommandError {
    fn from(e: Error) -> Self {
        CommandError(vec![format!("{}: {e}", e.kind())])
    }
}

impl From<Vec<Error>> for CommandError {
    fn from(errs: Vec<Error>) -> Self {
        CommandError(errs.iter().map(|e| format!("{}: {e}", e.kind())).collect())
    }
}

impl From<std::io::Error> for CommandError {
    fn from(e: std::io::Error) -> Self {
        CommandError(vec![format!("io-error: {e}")])
    }
}

pub type CmdResult = Result<(), CommandError>;

fn echo(out: &mut dyn Write, config: &impl Serialize) -> std::io::Result<()> {
    writeln!(out, "config: {}", serde_json::to_string(config).expect("config serializes"))
}

/// Where samples come from: manifests (features extracted on the fly) or
/// previously exported feature CSVs.
#[derive(Debug, Clone, Args, Serialize)]
pub struct InputArgs {
    /// Manifest JSON file; repeat for several collections.
    #[arg(long = "manifest")]
    pub manifests: Vec<PathBuf>,
    /// Feature CSV from `extract`; repeatable.
    #[arg(long = "features", conflicts_with = "manifests")]
    pub features: Vec<PathBuf>,
    /// Layout to extract from manifests.
    #[arg(long, default_value = "geometry-17")]
    pub layout: FeatureLayout,
    /// Divide distances and sizes by the udder box.
    #[arg(long)]
    pub normalize: bool,
}

impl InputArgs {
    fn load(&self) -> Result<Dataset, CommandError> {
        if self.manifests.is_empty() && self.features.is_empty() {
            return Err(CommandError(vec!["invalid-argument: give --manifest or --features".into()]));
        }
        if !self.manifests.is_empty() {
            let manifests = self
                .manifests
                .iter()
                .map(load_manifest)
                .collect::<Result<Vec<_>, _>>()?;
            return Ok(extract_dataset(&manifests, self.layout, self.normalize)?);
        }
        let mut ds = Dataset::default();
        for path in &self.features {
            ds = ds.merge(import_features(path)?)?;
        }
        Ok(ds)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ExtractArgs {
    #[arg(long = "manifest", required = true)]
    pub manifests: Vec<PathBuf>,
    #[arg(long, default_value = "geometry-17")]
    pub layout: FeatureLayout,
    #[arg(long)]
    pub normalize: bool,
    /// Output feature CSV.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn extract(args: &ExtractArgs, out: &mut dyn Write) -> CmdResult {
    echo(out, args)?;
    let manifests = args.manifests.iter().map(load_manifest).collect::<Result<Vec<_>, _>>()?;
    let ds = extract_dataset(&manifests, args.layout, args.normalize)?;
    export_features(&ds, args.layout, &args.out)?;
    writeln!(out, "wrote {} samples to {}", ds.len(), args.out.display())?;
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// One of knn, logreg, svm, tree, forest, or `all`.
    #[arg(long, default_value = "all")]
    pub algorithm: String,
    /// Comma-separated group sizes.
    #[arg(long = "n", value_delimiter = ',')]
    pub n_values: Vec<usize>,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value = "consecutive-day")]
    pub mode: SplitMode,
    /// JSON file overriding classifier hyperparameters.
    #[arg(long)]
    pub hyperparams: Option<PathBuf>,
    /// Output report CSV.
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_algorithms(s: &str) -> Result<Vec<Algorithm>, CommandError> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(Algorithm::ALL.to_vec());
    }
    s.split(',').map(|a| a.trim().parse().map_err(CommandError::from)).collect()
}

fn load_hyper(path: Option<&Path>) -> Result<Hyperparams, CommandError> {
    match path {
        None => Ok(Hyperparams::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CommandError(vec![format!("io-error: {}: {e}", p.display())]))?;
            serde_json::from_str(&text)
                .map_err(|e| CommandError(vec![format!("parse-error: {}: {e}", p.display())]))
        }
    }
}

#[derive(Serialize)]
struct EffectiveEvaluate<'a> {
    #[serde(flatten)]
    args: &'a EvaluateArgs,
    algorithms: Vec<Algorithm>,
    effective_n_values: Vec<usize>,
    hyper: &'a Hyperparams,
}

pub fn evaluate(args: &EvaluateArgs, out: &mut dyn Write) -> CmdResult {
    let algorithms = parse_algorithms(&args.algorithm)?;
    let hyper = load_hyper(args.hyperparams.as_deref())?;
    let ds = args.input.load()?;
    let n_values = if args.n_values.is_empty() {
        let available = udderid::split_protocol(&ds, args.mode)?.eligible_cows().len();
        DEFAULT_N_VALUES.iter().copied().filter(|&n| n <= available).collect()
    } else {
        args.n_values.clone()
    };
    echo(
        out,
        &EffectiveEvaluate { args, algorithms: algorithms.clone(), effective_n_values: n_values.clone(), hyper: &hyper },
    )?;
    let mut report = EvaluationReport::default();
    for alg in algorithms {
        let cfg = CurveConfig {
            algorithm: alg,
            mode: args.mode,
            n_values: n_values.clone(),
            trials: args.trials,
            master_seed: args.seed,
            hyper: hyper.clone(),
        };
        let part = accuracy_curve(&ds, &cfg)?;
        for e in &part.entries {
            writeln!(out, "{} n={} mean={:.4} std={:.4}", e.algorithm, e.n, e.mean_accuracy, e.std_accuracy)?;
        }
        report.extend(part);
    }
    export_report(&report, &args.out)?;
    writeln!(out, "wrote {} rows to {}", report.entries.len(), args.out.display())?;
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SynthArgs {
    /// Cows per collection.
    #[arg(long, default_value_t = 75, value_parser = clap::value_parser!(u64).range(1..))]
    pub count: u64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=2))]
    pub collections: u32,
    /// Cows present in both collections; defaults to all of them.
    #[arg(long)]
    pub shared: Option<usize>,
    /// Teat center jitter, pixels.
    #[arg(long, default_value_t = 1.0)]
    pub center_sigma: f64,
    /// Relative box size jitter.
    #[arg(long, default_value_t = 0.02)]
    pub box_sigma: f64,
    /// Relative global scale jitter.
    #[arg(long, default_value_t = 0.02)]
    pub scale_sigma: f64,
    /// Drift factor for the second collection (>= 1).
    #[arg(long, default_value_t = 1.0)]
    pub drift: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Also render a PNG frame per session.
    #[arg(long)]
    pub render: bool,
    /// Rendered frame size in pixels (square).
    #[arg(long, default_value_t = 400)]
    pub size: u32,
    #[arg(long)]
    pub out_dir: PathBuf,
}

pub fn synth(args: &SynthArgs, out: &mut dyn Write) -> CmdResult {
    let args = &SynthArgs { shared: Some(args.shared.unwrap_or(args.count as usize)), ..args.clone() };
    echo(out, args)?;
    let noise = NoiseModel::new(args.center_sigma, args.box_sigma, args.scale_sigma, args.drift)?;
    let count = args.count as usize;
    let cfg = HerdConfig {
        count,
        collections: args.collections,
        shared: args.shared.unwrap_or(count),
        noise,
        seed: args.seed,
        prior: GeometryPrior::default(),
    };
    let records = generate_records(&cfg)?;
    let render = args.render.then_some((args.size, args.size));
    let manifests = write_records(&records, &args.out_dir, render)?;
    for m in manifests {
        writeln!(out, "wrote {}", m.display())?;
    }
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EnrollArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value = "knn")]
    pub algorithm: Algorithm,
    /// Collection whose samples are enrolled; defaults to the lowest one.
    #[arg(long)]
    pub collection: Option<u32>,
    /// Session day to enroll.
    #[arg(long, default_value_t = 1)]
    pub day: u32,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub hyperparams: Option<PathBuf>,
    /// Output model JSON.
    #[arg(long)]
    pub out: PathBuf,
}

fn select(ds: &Dataset, collection: Option<u32>, day: u32) -> Vec<(udderid::FeatureVector, String)> {
    let collection = collection.or_else(|| ds.collections().into_iter().next());
    ds.samples()
        .iter()
        .filter(|s| Some(s.collection) == collection && s.day == day)
        .map(|s| (s.features.clone(), s.cow_id.clone()))
        .collect()
}

pub fn enroll(args: &EnrollArgs, out: &mut dyn Write) -> CmdResult {
    echo(out, args)?;
    let hyper = load_hyper(args.hyperparams.as_deref())?;
    let ds = args.input.load()?;
    let gallery = select(&ds, args.collection, args.day);
    let model = fit(args.algorithm, &gallery, &hyper, args.seed)?;
    model.save(&args.out)?;
    writeln!(out, "enrolled {} cows into {}", model.labels().len(), args.out.display())?;
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct IdentifyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Model JSON from `enroll`.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub collection: Option<u32>,
    /// Session day to identify.
    #[arg(long, default_value_t = 2)]
    pub day: u32,
    /// Output predictions CSV.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn identify(args: &IdentifyArgs, out: &mut dyn Write) -> CmdResult {
    echo(out, args)?;
    let model = TrainedModel::load(&args.model)?;
    let ds = args.input.load()?;
    let probes = select(&ds, args.collection, args.day);
    let mut csv = String::from("cow_id,predicted,correct\n");
    let mut correct = 0usize;
    for (v, id) in &probes {
        let predicted = model.predict(v)?;
        let hit = &predicted == id;
        correct += hit as usize;
        csv.push_str(&format!("{id},{predicted},{hit}\n"));
    }
    std::fs::write(&args.out, csv)?;
    let acc = if probes.is_empty() { 0.0 } else { correct as f64 / probes.len() as f64 };
    writeln!(out, "rank-1 accuracy {acc:.4} ({correct}/{})", probes.len())?;
    Ok(())
}
