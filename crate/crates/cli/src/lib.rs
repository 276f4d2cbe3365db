//! Command-line front end for `gazecal-core`.
//!
//! All subcommands share `--seed`, `--config` and `--out`. Failures print a
//! single `error[<kind>]: <message>` line on stderr and exit with 1; usage
//! errors exit with 2.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use gazecal_core::costmodel::{self, GAZE_INPUTS};
use gazecal_core::harness::{self, ExperimentConfig, ResultRow};
use gazecal_core::profile;
use gazecal_core::simulate::{self, HeadMode, SceneConfig};
use gazecal_core::{calibrator_predict, evaluate, Error, Method};

/// Rough sustained throughput of a multi-core desktop CPU, FLOP/s.
pub const DEFAULT_THROUGHPUT: f64 = 1e11;

#[derive(Debug, Parser)]
#[command(name = "gazecal", version, about = "Webcam gaze-to-screen calibration toolkit")]
pub struct Cli {
    /// Seed override (scene seed for `simulate`, base seed for experiments,
    /// optimizer seed for `calibrate`).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Experiment config file, or `demo` for the built-in configuration.
    #[arg(long, global = true)]
    pub config: Option<String>,
    /// Output file (default: stdout, or the config's `output` for experiments).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic calibration dataset.
    Simulate(SimulateArgs),
    /// Fit one calibration method on a dataset and write its profile.
    Calibrate(CalibrateArgs),
    /// Apply a saved profile to the samples of a dataset.
    Predict(PredictArgs),
    /// Compare methods at a fixed calibration size.
    Compare(ExperimentArgs),
    /// Sweep the number of calibration points.
    LearningCurve(ExperimentArgs),
    /// Print CNN FLOPs and frame rates for the gaze input crops.
    Flops(FlopsArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scene file (default: built-in demo scene).
    #[arg(long)]
    pub scene: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    pub n_train: usize,
    #[arg(long, default_value_t = 200)]
    pub n_test: usize,
    /// Training grid as COLSxROWS.
    #[arg(long, default_value = "5x5", value_parser = parse_grid)]
    pub grid: (usize, usize),
    #[arg(long)]
    pub head_mode: Option<HeadMode>,
    #[arg(long)]
    pub noise_deg: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Dataset file produced by `simulate`.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub method: Method,
    /// Ridge regularization strength.
    #[arg(long, default_value_t = gazecal_core::calibration::DEFAULT_RIDGE_LAMBDA)]
    pub lambda: f64,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub profile: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Which split of the dataset to predict.
    #[arg(long, default_value = "test", value_parser = ["train", "test"])]
    pub split: String,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Scene file overriding the config's scene.
    #[arg(long)]
    pub scene: Option<PathBuf>,
    /// Record wall-clock fit times (makes the CSV non-reproducible).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct FlopsArgs {
    /// Device throughput in FLOP/s.
    #[arg(long, default_value_t = DEFAULT_THROUGHPUT)]
    pub throughput: f64,
    /// Layer-list file; default is the VGG16 preset.
    #[arg(long)]
    pub net: Option<PathBuf>,
}

fn parse_grid(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected COLSxROWS, got '{s}'"))?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("'{v}': {e}"));
    Ok((parse(a)?, parse(b)?))
}

type CliResult<T> = std::result::Result<T, Error>;

/// Run the CLI; returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(stdout, "{text}");
            } else {
                let _ = write!(stderr, "{text}");
            }
            return code;
        }
    };
    match dispatch(&cli, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            let _ = writeln!(stderr, "error[{}]: {msg}", e.kind());
            1
        }
    }
}

fn dispatch(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    match &cli.command {
        Command::Simulate(a) => simulate_cmd(cli, a, stdout),
        Command::Calibrate(a) => calibrate_cmd(cli, a, stdout, stderr),
        Command::Predict(a) => predict_cmd(cli, a, stdout, stderr),
        Command::Compare(a) => {
            let cfg = experiment_config(cli, a)?;
            let rows = harness::run_comparison(&cfg)?;
            finish_experiment(&cfg, &rows, stderr)
        }
        Command::LearningCurve(a) => {
            let cfg = experiment_config(cli, a)?;
            let rows = harness::run_learning_curve(&cfg)?;
            finish_experiment(&cfg, &rows, stderr)
        }
        Command::Flops(a) => flops_cmd(cli, a, stdout),
    }
}

fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        }),
        None => stdout.write_all(text.as_bytes()).map_err(|e| Error::Io {
            path: PathBuf::from("<stdout>"),
            source: e,
        }),
    }
}

fn simulate_cmd(cli: &Cli, a: &SimulateArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let mut scene = match &a.scene {
        Some(p) => simulate::load_scene(p)?,
        None => SceneConfig::demo(),
    };
    if let Some(seed) = cli.seed {
        scene.seed = seed;
    }
    if let Some(h) = a.head_mode {
        scene.head_mode = h;
    }
    if let Some(n) = a.noise_deg {
        scene.noise_deg = n;
    }
    let data = simulate::generate_dataset(&scene, a.n_train, a.n_test, a.grid)?;
    emit(cli.out.as_deref(), &simulate::dataset_to_string(&data)?, stdout)
}

fn calibrate_cmd(
    cli: &Cli,
    a: &CalibrateArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> CliResult<()> {
    let data = simulate::load_dataset(&a.data)?;
    let mut cfg = ExperimentConfig {
        ridge_lambda: a.lambda,
        ..ExperimentConfig::demo()
    };
    if let Some(path) = cli.config.as_deref().filter(|c| *c != "demo") {
        let loaded = harness::load_config(Path::new(path))?;
        cfg.de = loaded.de;
        cfg.hybrid_bounds = loaded.hybrid_bounds;
    }
    let mut data = data;
    if let Some(seed) = cli.seed {
        data.scene.seed = seed;
    }
    let model = harness::fit_method(a.method, &data, &cfg)?;
    let train = evaluate(&model, &data.train, data.scene.diagonal())?;
    let _ = writeln!(
        stderr,
        "{}: training error mean {} mm over {} samples",
        a.method,
        harness::format_sig(train.mean_mm, 6),
        train.n
    );
    emit(cli.out.as_deref(), &profile::profile_to_string(&model)?, stdout)
}

fn predict_cmd(
    cli: &Cli,
    a: &PredictArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> CliResult<()> {
    let model = profile::load_profile(&a.profile)?;
    let data = simulate::load_dataset(&a.data)?;
    let samples = if a.split == "train" { &data.train } else { &data.test };
    let fmt = |v: f64| harness::format_sig(v, 6);
    let mut text = String::from("index,pred_x_mm,pred_y_mm,target_x_mm,target_y_mm,err_mm\n");
    for (i, s) in samples.iter().enumerate() {
        let (px, py, err) = match calibrator_predict(&model, s.eye_ccs, s.gaze) {
            Ok(p) => (p.x, p.y, p.distance(&s.target)),
            Err(_) => (f64::NAN, f64::NAN, f64::NAN),
        };
        text.push_str(&format!(
            "{i},{},{},{},{},{}\n",
            fmt(px),
            fmt(py),
            fmt(s.target.x),
            fmt(s.target.y),
            fmt(err)
        ));
    }
    if !samples.is_empty() {
        let stats = evaluate(&model, samples, data.scene.diagonal())?;
        let _ = writeln!(
            stderr,
            "{}: mean {} mm, std {} mm, max {} mm, {} failed",
            model.method(),
            fmt(stats.mean_mm),
            fmt(stats.std_mm),
            fmt(stats.max_mm),
            stats.failures
        );
    }
    emit(cli.out.as_deref(), &text, stdout)
}

/// Resolve the experiment config from `--config`, `--scene`, `--seed`,
/// `--out` and `--timing`.
pub fn experiment_config(cli: &Cli, a: &ExperimentArgs) -> CliResult<ExperimentConfig> {
    let mut cfg = match cli.config.as_deref() {
        None | Some("demo") => ExperimentConfig::demo(),
        Some(path) => harness::load_config(Path::new(path))?,
    };
    if let Some(p) = &a.scene {
        cfg.scene = simulate::load_scene(p)?;
        cfg.scene_path = Some(p.clone());
    }
    if let Some(seed) = cli.seed {
        cfg.base_seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output = out.clone();
    }
    cfg.record_timing |= a.timing;
    cfg.validate()?;
    Ok(cfg)
}

fn finish_experiment(
    cfg: &ExperimentConfig,
    rows: &[ResultRow],
    stderr: &mut dyn Write,
) -> CliResult<()> {
    harness::write_csv(rows, &cfg.output)?;
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    let flagged = rows.iter().filter(|r| r.flagged).count();
    let _ = writeln!(stderr, "wrote {} rows to {}", rows.len(), cfg.output.display());
    if flagged > 0 {
        let _ = writeln!(
            stderr,
            "note: {flagged} geometric rows were fitted with a static anchor on moving-head samples"
        );
    }
    for r in rows.iter().filter(|r| r.error.is_some()).take(5) {
        let _ = writeln!(
            stderr,
            "warning: {} {} noise={} n={} trial={}: {}",
            r.method,
            r.head_mode,
            r.noise_deg,
            r.n_calib,
            r.trial,
            r.error.as_deref().unwrap_or_default()
        );
    }
    if failed > 5 {
        let _ = writeln!(stderr, "warning: {} more failed cells", failed - 5);
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlopsRow {
    pub label: String,
    pub height: usize,
    pub width: usize,
    pub flops: u64,
    pub fps: f64,
    pub real_time: bool,
    /// The preset's final pool was replaced by a 1×1 adaptive pool.
    pub adaptive: bool,
}

/// Cost of every gaze input crop, for the VGG16 preset or a custom network.
pub fn flops_table(
    net: Option<&gazecal_core::ConvNetSpec>,
    throughput: f64,
) -> CliResult<Vec<FlopsRow>> {
    GAZE_INPUTS
        .iter()
        .map(|(label, input)| {
            let (total, adaptive) = match net {
                Some(spec) => (costmodel::flops(spec, *input)?, false),
                None => {
                    let (spec, adaptive) = costmodel::vgg16_for_input(*input)?;
                    (costmodel::flops(&spec, *input)?, adaptive)
                }
            };
            let fps = costmodel::fps_at(total as f64, throughput)?;
            Ok(FlopsRow {
                label: label.to_string(),
                height: input.height,
                width: input.width,
                flops: total,
                fps,
                real_time: costmodel::is_real_time(fps),
                adaptive,
            })
        })
        .collect()
}

fn flops_cmd(cli: &Cli, a: &FlopsArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let net = a.net.as_deref().map(costmodel::load_spec).transpose()?;
    let rows = flops_table(net.as_ref(), a.throughput)?;
    let name = net.as_ref().map_or("vgg16", |n| n.name.as_str());
    let mut text = format!(
        "# network: {name}; device throughput: {} FLOP/s; real-time threshold: {} fps\n",
        harness::format_sig(a.throughput, 6),
        costmodel::REAL_TIME_FPS
    );
    text.push_str("input,height,width,flops,fps,real_time,adaptive_pool\n");
    for r in &rows {
        text.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.label,
            r.height,
            r.width,
            r.flops,
            harness::format_sig(r.fps, 6),
            if r.real_time { "yes" } else { "no" },
            if r.adaptive { "yes" } else { "no" },
        ));
    }
    emit(cli.out.as_deref(), &text, stdout)
}
