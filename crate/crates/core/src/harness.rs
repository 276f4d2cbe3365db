//! Experiment runner: calibration comparisons and learning-curve sweeps over
//! methods, head modes, noise levels and trials, written out as CSV.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Deserialize;

use crate::calibration::{
    evaluate, geometric_fit, hybrid_fit, ridge_fit, CalibratorModel, ErrorStats, HybridBounds,
    Method, DEFAULT_RIDGE_LAMBDA,
};
use crate::error::{Error, Result};
use crate::optimize::DeConfig;
use crate::simulate::{generate_dataset, load_scene, with_path, Dataset, HeadMode, SceneConfig};

pub const CSV_HEADER: &str =
    "method,head_mode,noise_deg,n_calib,trial,mean_err_mm,std_err_mm,max_err_mm,fit_millis";

pub const DEFAULT_LEARNING_CURVE: [usize; 7] = [2, 4, 9, 16, 36, 64, 100];

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scene: SceneConfig,
    /// Where the scene came from, if it was loaded from a file.
    pub scene_path: Option<PathBuf>,
    pub methods: Vec<Method>,
    pub head_modes: Vec<HeadMode>,
    pub noise_levels: Vec<f64>,
    /// Learning-curve grid of calibration set sizes.
    pub n_train: Vec<usize>,
    /// Calibration set size and grid used by [`run_comparison`].
    pub compare_n_train: usize,
    pub compare_grid: (usize, usize),
    pub n_test: usize,
    pub trials: usize,
    pub base_seed: u64,
    pub output: PathBuf,
    pub ridge_lambda: f64,
    pub de: DeConfig,
    pub hybrid_bounds: HybridBounds,
    /// Record wall-clock fit time. Off by default: timings make the CSV
    /// non-reproducible, so `fit_millis` is written as 0.
    pub record_timing: bool,
}

impl ExperimentConfig {
    /// The built-in `demo` configuration on [`SceneConfig::demo`].
    pub fn demo() -> Self {
        Self {
            scene: SceneConfig::demo(),
            scene_path: None,
            methods: Method::ALL.to_vec(),
            head_modes: vec![HeadMode::Static, HeadMode::Moving],
            noise_levels: vec![2.0],
            n_train: DEFAULT_LEARNING_CURVE.to_vec(),
            compare_n_train: 100,
            compare_grid: (5, 5),
            n_test: 200,
            trials: 5,
            base_seed: 2020,
            output: PathBuf::from("results.csv"),
            ridge_lambda: DEFAULT_RIDGE_LAMBDA,
            de: DeConfig::default(),
            hybrid_bounds: HybridBounds::default(),
            record_timing: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.scene.validate()?;
        let empty = |what: &str| Error::Config(format!("{what} must not be empty"));
        if self.methods.is_empty() {
            return Err(empty("methods"));
        }
        if self.head_modes.is_empty() {
            return Err(empty("head_modes"));
        }
        if self.noise_levels.is_empty() {
            return Err(empty("noise_deg"));
        }
        if self.n_train.is_empty() {
            return Err(empty("n_train"));
        }
        if self.n_train.contains(&0) || self.compare_n_train == 0 || self.n_test == 0 {
            return Err(Error::Config("calibration and test sizes must be >= 1".into()));
        }
        if self.noise_levels.iter().any(|n| !(*n >= 0.0 && n.is_finite())) {
            return Err(Error::Config("noise levels must be >= 0".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        let (cx, cy) = self.compare_grid;
        if cx == 0 || cy == 0 || self.compare_n_train % (cx * cy) != 0 {
            return Err(Error::Config(format!(
                "compare_n_train = {} must be a positive multiple of the {cx}x{cy} grid",
                self.compare_n_train
            )));
        }
        self.de.validate()?;
        self.hybrid_bounds.to_bounds()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub method: Method,
    pub head_mode: HeadMode,
    pub noise_deg: f64,
    pub n_calib: usize,
    pub trial: usize,
    pub mean_err_mm: f64,
    pub std_err_mm: f64,
    pub max_err_mm: f64,
    pub fit_millis: f64,
    /// Test samples charged the screen-diagonal penalty.
    pub failures: usize,
    /// Geometric fit on moving-head samples (the anchor is static).
    pub flagged: bool,
    /// Set when the cell could not be fitted; the error columns are NaN.
    pub error: Option<String>,
}

impl ResultRow {
    fn sort_key_cmp(&self, other: &Self) -> Ordering {
        (self.method, self.head_mode)
            .cmp(&(other.method, other.head_mode))
            .then(self.noise_deg.total_cmp(&other.noise_deg))
            .then((self.n_calib, self.trial).cmp(&(other.n_calib, other.trial)))
    }
}

/// Per-trial seed. XOR keeps existing trials fixed when more are added.
pub fn trial_seed(base_seed: u64, trial: usize) -> u64 {
    base_seed ^ trial as u64
}

/// Grid for `n` calibration points: the largest `k×k` grid with `k²`
/// dividing `n`. If that is only `1×1` and `n > 1`, the most square
/// factorization `a×b = n` (`a ≥ b`, `a` along the screen width) is used
/// instead, so every point still lands in its own stratum column.
pub fn grid_for(n: usize) -> (usize, usize) {
    let k = (1..=n).take_while(|k| k * k <= n).filter(|k| n % (k * k) == 0).last().unwrap_or(1);
    if k > 1 || n <= 1 {
        return (k, k);
    }
    let b = (1..=n).take_while(|b| b * b <= n).filter(|b| n % b == 0).last().unwrap_or(1);
    (n / b, b)
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    method: Method,
    head_mode: HeadMode,
    noise_deg: f64,
    n_calib: usize,
    grid: (usize, usize),
    trial: usize,
}

/// Fit one method on a dataset's training split.
pub fn fit_method(
    method: Method,
    data: &Dataset,
    cfg: &ExperimentConfig,
) -> Result<CalibratorModel> {
    Ok(match method {
        Method::Geometric => CalibratorModel::Geometric(geometric_fit(&data.anchor, &data.train)?),
        Method::Ridge => CalibratorModel::Ridge(ridge_fit(&data.train, cfg.ridge_lambda)?),
        Method::Hybrid => CalibratorModel::Hybrid(
            hybrid_fit(&data.train, &cfg.hybrid_bounds, &cfg.de, data.scene.seed)?.params,
        ),
    })
}

/// The scene for one (head mode, noise, trial) combination.
pub fn cell_scene(cfg: &ExperimentConfig, head_mode: HeadMode, noise_deg: f64, trial: usize) -> SceneConfig {
    SceneConfig {
        head_mode,
        noise_deg,
        seed: trial_seed(cfg.base_seed, trial),
        ..cfg.scene.clone()
    }
}

fn run_cell(cfg: &ExperimentConfig, cell: Cell) -> ResultRow {
    let mut row = ResultRow {
        method: cell.method,
        head_mode: cell.head_mode,
        noise_deg: cell.noise_deg,
        n_calib: cell.n_calib,
        trial: cell.trial,
        mean_err_mm: f64::NAN,
        std_err_mm: f64::NAN,
        max_err_mm: f64::NAN,
        fit_millis: 0.0,
        failures: 0,
        flagged: cell.method == Method::Geometric && cell.head_mode == HeadMode::Moving,
        error: None,
    };
    let scene = cell_scene(cfg, cell.head_mode, cell.noise_deg, cell.trial);
    let outcome = (|| -> Result<(ErrorStats, f64)> {
        let data = generate_dataset(&scene, cell.n_calib, cfg.n_test, cell.grid)?;
        let start = Instant::now();
        let model = fit_method(cell.method, &data, cfg)?;
        let millis = start.elapsed().as_secs_f64() * 1e3;
        Ok((evaluate(&model, &data.test, scene.diagonal())?, millis))
    })();
    match outcome {
        Ok((stats, millis)) => {
            row.mean_err_mm = stats.mean_mm;
            row.std_err_mm = stats.std_mm;
            row.max_err_mm = stats.max_mm;
            row.failures = stats.failures;
            if cfg.record_timing {
                row.fit_millis = millis;
            }
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

fn run_cells(cfg: &ExperimentConfig, cells: Vec<Cell>) -> Vec<ResultRow> {
    let mut rows: Vec<ResultRow> = cells.into_par_iter().map(|c| run_cell(cfg, c)).collect();
    rows.sort_by(ResultRow::sort_key_cmp);
    rows
}

/// One row per method × head mode × noise level × trial at the fixed
/// comparison size, each on a fresh dataset.
pub fn run_comparison(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let cells = product(cfg, &[cfg.compare_n_train], |_| cfg.compare_grid);
    Ok(run_cells(cfg, cells))
}

/// One row per method × head mode × noise level × calibration size × trial.
pub fn run_learning_curve(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let cells = product(cfg, &cfg.n_train, grid_for);
    Ok(run_cells(cfg, cells))
}

fn product(
    cfg: &ExperimentConfig,
    sizes: &[usize],
    grid: impl Fn(usize) -> (usize, usize),
) -> Vec<Cell> {
    let mut cells = Vec::new();
    for &method in &cfg.methods {
        for &head_mode in &cfg.head_modes {
            for &noise_deg in &cfg.noise_levels {
                for &n_calib in sizes {
                    for trial in 0..cfg.trials {
                        cells.push(Cell {
                            method,
                            head_mode,
                            noise_deg,
                            n_calib,
                            grid: grid(n_calib),
                            trial,
                        });
                    }
                }
            }
        }
    }
    cells
}

/// Mean and pooled statistics of a group of rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupSummary {
    pub method: Method,
    pub head_mode: HeadMode,
    pub noise_deg: f64,
    pub n_calib: usize,
    pub trials: usize,
    /// Mean of the per-trial mean errors.
    pub mean_err_mm: f64,
    /// Root mean square of the per-trial error standard deviations.
    pub pooled_std_mm: f64,
}

/// Collapse trials: one summary per (method, head mode, noise, n) in row
/// order. Rows with errors are skipped.
pub fn summarize(rows: &[ResultRow]) -> Vec<GroupSummary> {
    let mut out: Vec<(GroupSummary, f64)> = Vec::new();
    for r in rows.iter().filter(|r| r.error.is_none()) {
        let same = |g: &GroupSummary| {
            g.method == r.method
                && g.head_mode == r.head_mode
                && g.noise_deg == r.noise_deg
                && g.n_calib == r.n_calib
        };
        match out.iter_mut().find(|(g, _)| same(g)) {
            Some((g, var_sum)) => {
                g.trials += 1;
                g.mean_err_mm += r.mean_err_mm;
                *var_sum += r.std_err_mm * r.std_err_mm;
            }
            None => out.push((
                GroupSummary {
                    method: r.method,
                    head_mode: r.head_mode,
                    noise_deg: r.noise_deg,
                    n_calib: r.n_calib,
                    trials: 1,
                    mean_err_mm: r.mean_err_mm,
                    pooled_std_mm: 0.0,
                },
                r.std_err_mm * r.std_err_mm,
            )),
        }
    }
    out.into_iter()
        .map(|(mut g, var_sum)| {
            let n = g.trials as f64;
            g.mean_err_mm /= n;
            g.pooled_std_mm = (var_sum / n).sqrt();
            g
        })
        .collect()
}

/// `%g`-style formatting with `sig` significant digits.
pub fn format_sig(x: f64, sig: usize) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sig = sig.max(1);
    let sci = format!("{:.*e}", sig - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= sig as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        let decimals = (sig as i32 - 1 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn rows_to_csv(rows: &[ResultRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.method,
            r.head_mode,
            format_sig(r.noise_deg, 6),
            r.n_calib,
            r.trial,
            format_sig(r.mean_err_mm, 6),
            format_sig(r.std_err_mm, 6),
            format_sig(r.max_err_mm, 6),
            format_sig(r.fit_millis, 6),
        );
    }
    out
}

pub fn write_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    std::fs::write(path, rows_to_csv(rows)).map_err(|e| Error::io(path, e))
}

// ---------------------------------------------------------------------------
// Experiment config files (TOML). Relative paths resolve against the config
// file's directory. Every key except `version` is optional and falls back
// to the demo configuration.

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigRecord {
    version: u32,
    scene: Option<PathBuf>,
    methods: Option<Vec<String>>,
    head_modes: Option<Vec<String>>,
    noise_deg: Option<Vec<f64>>,
    n_train: Option<Vec<usize>>,
    compare_n_train: Option<usize>,
    compare_grid: Option<[usize; 2]>,
    n_test: Option<usize>,
    trials: Option<usize>,
    base_seed: Option<u64>,
    output: Option<PathBuf>,
    ridge_lambda: Option<f64>,
    timing: Option<bool>,
    de: Option<DeRecord>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DeRecord {
    population_size: Option<usize>,
    weight_f: Option<f64>,
    crossover_cr: Option<f64>,
    max_generations: Option<usize>,
    tolerance: Option<f64>,
    patience: Option<usize>,
}

pub fn config_from_str(text: &str, base_dir: &Path) -> Result<ExperimentConfig> {
    let rec: ConfigRecord = toml::from_str(text).map_err(|e| Error::parse("config", e))?;
    if rec.version != CONFIG_VERSION {
        return Err(Error::parse(
            "config",
            format!("unsupported version {} (expected {CONFIG_VERSION})", rec.version),
        ));
    }
    let mut cfg = ExperimentConfig::demo();
    if let Some(p) = rec.scene {
        let path = base_dir.join(p);
        cfg.scene = load_scene(&path)?;
        cfg.scene_path = Some(path);
    }
    if let Some(m) = rec.methods {
        cfg.methods = m.iter().map(|s| s.parse()).collect::<Result<_>>()?;
    }
    if let Some(h) = rec.head_modes {
        cfg.head_modes = h.iter().map(|s| s.parse()).collect::<Result<_>>()?;
    }
    if let Some(v) = rec.noise_deg {
        cfg.noise_levels = v;
    }
    if let Some(v) = rec.n_train {
        cfg.n_train = v;
    }
    if let Some(v) = rec.compare_n_train {
        cfg.compare_n_train = v;
    }
    if let Some([x, y]) = rec.compare_grid {
        cfg.compare_grid = (x, y);
    }
    if let Some(v) = rec.n_test {
        cfg.n_test = v;
    }
    if let Some(v) = rec.trials {
        cfg.trials = v;
    }
    if let Some(v) = rec.base_seed {
        cfg.base_seed = v;
    }
    if let Some(v) = rec.output {
        cfg.output = base_dir.join(v);
    }
    if let Some(v) = rec.ridge_lambda {
        cfg.ridge_lambda = v;
    }
    if let Some(v) = rec.timing {
        cfg.record_timing = v;
    }
    if let Some(de) = rec.de {
        let d = &mut cfg.de;
        d.population_size = de.population_size.unwrap_or(d.population_size);
        d.weight_f = de.weight_f.unwrap_or(d.weight_f);
        d.crossover_cr = de.crossover_cr.unwrap_or(d.crossover_cr);
        d.max_generations = de.max_generations.unwrap_or(d.max_generations);
        d.tolerance = de.tolerance.unwrap_or(d.tolerance);
        d.patience = de.patience.unwrap_or(d.patience);
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    config_from_str(&text, dir).map_err(|e| with_path(e, path))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> ExperimentConfig {
        ExperimentConfig {
            n_train: vec![4, 9],
            noise_levels: vec![0.0],
            head_modes: vec![HeadMode::Static],
            n_test: 20,
            trials: 2,
            compare_n_train: 25,
            de: DeConfig { max_generations: 60, ..DeConfig::default() },
            ..ExperimentConfig::demo()
        }
    }

    #[test]
    fn format_sig_examples() {
        assert_eq!(format_sig(1.23456789, 6), "1.23457");
        assert_eq!(format_sig(0.0, 6), "0");
        assert_eq!(format_sig(5.0, 6), "5");
        assert_eq!(format_sig(2.5, 6), "2.5");
        assert_eq!(format_sig(123456.7, 6), "123457");
        assert_eq!(format_sig(1234567.0, 6), "1.23457e+06");
        assert_eq!(format_sig(0.0001234567, 6), "0.000123457");
        assert_eq!(format_sig(1.5e-7, 6), "1.5e-07");
        assert_eq!(format_sig(9.9999996, 6), "10");
        assert_eq!(format_sig(-3.25, 6), "-3.25");
        assert_eq!(format_sig(f64::NAN, 6), "NaN");
    }

    #[test]
    fn grid_choice() {
        assert_eq!(grid_for(1), (1, 1));
        assert_eq!(grid_for(2), (2, 1));
        assert_eq!(grid_for(4), (2, 2));
        assert_eq!(grid_for(9), (3, 3));
        assert_eq!(grid_for(16), (4, 4));
        assert_eq!(grid_for(36), (6, 6));
        assert_eq!(grid_for(64), (8, 8));
        assert_eq!(grid_for(100), (10, 10));
        assert_eq!(grid_for(8), (2, 2));
        assert_eq!(grid_for(5), (5, 1));
        assert_eq!(grid_for(6), (3, 2));
        for n in 1..200 {
            let (a, b) = grid_for(n);
            assert_eq!(n % (a * b), 0, "{n}");
        }
    }

    #[test]
    fn trial_seeds_are_stable() {
        assert_eq!(trial_seed(2020, 0), 2020);
        assert_eq!(trial_seed(2020, 3), 2020 ^ 3);
    }

    #[test]
    fn empty_rows_give_header_only() {
        assert_eq!(rows_to_csv(&[]), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn row_counts_follow_the_factor_product() {
        let cfg = small_cfg();
        let rows = run_learning_curve(&cfg).unwrap();
        assert_eq!(rows.len(), 3 * 1 * 1 * 2 * 2);
        let rows = run_comparison(&cfg).unwrap();
        assert_eq!(rows.len(), 3 * 2);
        assert!(rows.iter().all(|r| r.n_calib == 25));
    }

    #[test]
    fn rows_are_sorted() {
        let rows = run_learning_curve(&small_cfg()).unwrap();
        assert!(rows.windows(2).all(|w| w[0].sort_key_cmp(&w[1]) != Ordering::Greater));
        assert_eq!(rows[0].method, Method::Geometric);
        assert_eq!(rows.last().unwrap().method, Method::Hybrid);
    }

    #[test]
    fn failing_cell_becomes_error_row() {
        let mut cfg = small_cfg();
        cfg.methods = vec![Method::Ridge];
        cfg.ridge_lambda = 0.0;
        // A static head gives constant eye features: rank deficient at lambda 0.
        let rows = run_learning_curve(&cfg).unwrap();
        assert!(rows.iter().all(|r| r.error.is_some() && r.mean_err_mm.is_nan()));
        assert!(rows_to_csv(&rows).contains(",NaN,NaN,NaN,"));
    }

    #[test]
    fn geometric_on_moving_is_flagged() {
        let cfg = ExperimentConfig {
            methods: vec![Method::Geometric],
            head_modes: vec![HeadMode::Moving],
            ..small_cfg()
        };
        let rows = run_comparison(&cfg).unwrap();
        assert!(rows.iter().all(|r| r.flagged && r.error.is_none()));
    }

    #[test]
    fn config_overrides_and_validation() {
        let text = r#"
            version = 1
            methods = ["ridge", "hybrid"]
            head_modes = ["moving"]
            noise_deg = [0.5, 1.0]
            n_train = [4]
            trials = 3
            base_seed = 9
            output = "out.csv"
            [de]
            max_generations = 50
        "#;
        let cfg = config_from_str(text, Path::new("/tmp/x")).unwrap();
        assert_eq!(cfg.methods, vec![Method::Ridge, Method::Hybrid]);
        assert_eq!(cfg.head_modes, vec![HeadMode::Moving]);
        assert_eq!(cfg.noise_levels, vec![0.5, 1.0]);
        assert_eq!(cfg.trials, 3);
        assert_eq!(cfg.output, PathBuf::from("/tmp/x/out.csv"));
        assert_eq!(cfg.de.max_generations, 50);
        assert_eq!(cfg.de.population_size, 40);

        assert!(config_from_str("version = 1\ntrials = 0", Path::new(".")).is_err());
        assert!(config_from_str("version = 1\nmethods = []", Path::new(".")).is_err());
        assert!(config_from_str("version = 1\nbogus = 3", Path::new(".")).is_err());
        assert!(config_from_str("version = 2", Path::new(".")).is_err());
        let err = config_from_str("version = 1\nscene = \"missing.toml\"", Path::new("/nonexistent"))
            .unwrap_err();
        assert!(err.to_string().contains("missing.toml"));
    }

    #[test]
    fn summarize_pools_trials() {
        let mk = |trial, mean, std| ResultRow {
            method: Method::Ridge,
            head_mode: HeadMode::Static,
            noise_deg: 1.0,
            n_calib: 4,
            trial,
            mean_err_mm: mean,
            std_err_mm: std,
            max_err_mm: mean,
            fit_millis: 0.0,
            failures: 0,
            flagged: false,
            error: None,
        };
        let s = summarize(&[mk(0, 2.0, 3.0), mk(1, 4.0, 4.0)]);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].trials, 2);
        assert_eq!(s[0].mean_err_mm, 3.0);
        assert!((s[0].pooled_std_mm - 12.5f64.sqrt()).abs() < 1e-12);
    }
}
