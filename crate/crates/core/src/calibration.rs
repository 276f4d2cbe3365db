//! Screen calibration: fit a camera-to-screen mapping from user-annotated
//! samples and predict on-screen gaze points.
//!
//! Three calibrators are provided:
//!
//! * **Geometric**: an anchor fixation (user looks perpendicular at the
//!   screen from a known distance) pins the eye in screen space; each further
//!   sample yields one camera-pitch estimate, the estimates are averaged and
//!   the translation follows from the anchor.
//! * **Ridge**: linear ridge regression from `(pitch, yaw, eye_x, eye_y,
//!   eye_z)` to the screen point.
//! * **Hybrid**: the geometric model's four parameters fitted by
//!   differential evolution on the summed squared reprojection error.

use std::f64::consts::FRAC_PI_4;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{
    ccs_to_scs, pitch_rotation, project_gaze, vector_to_angles, ExtrinsicParams, ScreenPoint,
    Vec3,
};
use crate::optimize::{differential_evolution, solve_ridge, Bounds, DeConfig};

/// Number of ridge input features.
pub const FEATURES: usize = 5;

pub const DEFAULT_RIDGE_LAMBDA: f64 = 1.0;

/// Reprojection penalty (mm²) for a sample whose gaze ray misses the screen.
pub const NO_INTERSECTION_PENALTY: f64 = 1e12;

const SCALE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationSample {
    /// Unit gaze direction in the camera frame, `z > 0`.
    pub gaze: Vec3,
    /// Eye position in the camera frame, mm.
    pub eye_ccs: Vec3,
    /// Ground-truth screen point, mm.
    pub target: ScreenPoint,
}

impl CalibrationSample {
    pub fn validate(&self) -> Result<()> {
        if !(self.gaze.is_finite() && (self.gaze.norm() - 1.0).abs() <= 1e-9) {
            return Err(Error::InvalidArgument(format!(
                "gaze must be a unit vector, got norm {}",
                self.gaze.norm()
            )));
        }
        if self.gaze.z <= 0.0 {
            return Err(Error::OutOfHemisphere { z: self.gaze.z });
        }
        if !self.eye_ccs.is_finite() || !self.target.is_finite() {
            return Err(Error::InvalidArgument("non-finite sample".into()));
        }
        Ok(())
    }
}

/// The perpendicular-gaze annotation: the marked point and the seating
/// distance give the eye position in screen space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnchorSample {
    pub eye_ccs: Vec3,
    pub marked: ScreenPoint,
    pub distance_z: f64,
}

impl AnchorSample {
    pub fn eye_scs(&self) -> Vec3 {
        Vec3::new(self.marked.x, self.marked.y, self.distance_z)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.distance_z > 0.0 && self.distance_z.is_finite()) {
            return Err(Error::InvalidAnchor(format!(
                "distance must be > 0 mm, got {}",
                self.distance_z
            )));
        }
        if !self.eye_ccs.is_finite() || !self.marked.is_finite() {
            return Err(Error::InvalidAnchor("non-finite anchor".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RidgeModel {
    /// Row `k` maps `[1, standardized features]` to screen axis `k`.
    pub weights: [[f64; FEATURES + 1]; 2],
    pub feature_means: [f64; FEATURES],
    pub feature_scales: [f64; FEATURES],
}

impl RidgeModel {
    pub fn predict(&self, eye_ccs: Vec3, gaze: Vec3) -> Result<ScreenPoint> {
        let f = ridge_features(eye_ccs, gaze)?;
        let mut out = [0.0; 2];
        for (k, w) in self.weights.iter().enumerate() {
            out[k] = w[0]
                + (0..FEATURES)
                    .map(|j| w[j + 1] * (f[j] - self.feature_means[j]) / self.feature_scales[j])
                    .sum::<f64>();
        }
        Ok(ScreenPoint::new(out[0], out[1]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Geometric,
    Ridge,
    Hybrid,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Geometric, Method::Ridge, Method::Hybrid];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Geometric => "geometric",
            Method::Ridge => "ridge",
            Method::Hybrid => "hybrid",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "geometric" | "geometry" => Ok(Method::Geometric),
            "ridge" | "ml" => Ok(Method::Ridge),
            "hybrid" => Ok(Method::Hybrid),
            other => Err(Error::Config(format!(
                "unknown method '{other}' (expected geometric, ridge or hybrid)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CalibratorModel {
    Geometric(ExtrinsicParams),
    Ridge(RidgeModel),
    Hybrid(ExtrinsicParams),
}

impl CalibratorModel {
    pub fn method(&self) -> Method {
        match self {
            CalibratorModel::Geometric(_) => Method::Geometric,
            CalibratorModel::Ridge(_) => Method::Ridge,
            CalibratorModel::Hybrid(_) => Method::Hybrid,
        }
    }

    pub fn predict(&self, eye_ccs: Vec3, gaze: Vec3) -> Result<ScreenPoint> {
        calibrator_predict(self, eye_ccs, gaze)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorStats {
    pub mean_mm: f64,
    pub std_mm: f64,
    pub max_mm: f64,
    pub n: usize,
    /// Samples whose prediction failed and were charged the penalty distance.
    pub failures: usize,
}

/// Anchor-based geometric calibration.
///
/// Each sample gives `ρᵢ = atan((y_target − y_eye)/z_eye) − αᵢ` using the
/// anchor's eye position; `ρ` is the mean of the `ρᵢ` and the translation is
/// `e_scs − R(ρ)·e_ccs` at the anchor. Per-sample yaw is unused.
pub fn geometric_fit(
    anchor: &AnchorSample,
    samples: &[CalibrationSample],
) -> Result<ExtrinsicParams> {
    anchor.validate()?;
    if samples.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let eye_scs = anchor.eye_scs();
    let mut sum = 0.0;
    for s in samples {
        let pitch = vector_to_angles(s.gaze)?.pitch;
        sum += ((s.target.y - eye_scs.y) / eye_scs.z).atan() - pitch;
    }
    let rho = sum / samples.len() as f64;
    let t = eye_scs - pitch_rotation(rho)? * anchor.eye_ccs;
    Ok(ExtrinsicParams::new(rho, t))
}

pub fn calibrator_predict(
    model: &CalibratorModel,
    eye_ccs: Vec3,
    gaze: Vec3,
) -> Result<ScreenPoint> {
    match model {
        CalibratorModel::Geometric(p) | CalibratorModel::Hybrid(p) => {
            let eye_scs = ccs_to_scs(eye_ccs, p)?;
            project_gaze(eye_scs, vector_to_angles(gaze)?, p.rho)
        }
        CalibratorModel::Ridge(m) => m.predict(eye_ccs, gaze),
    }
}

/// `(pitch, yaw, eye_x, eye_y, eye_z)`.
pub fn ridge_features(eye_ccs: Vec3, gaze: Vec3) -> Result<[f64; FEATURES]> {
    let a = vector_to_angles(gaze)?;
    Ok([a.pitch, a.yaw, eye_ccs.x, eye_ccs.y, eye_ccs.z])
}

/// Fit ridge regression on standardized features with an unpenalized bias.
pub fn ridge_fit(samples: &[CalibrationSample], lambda: f64) -> Result<RidgeModel> {
    if samples.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: samples.len(),
        });
    }
    let raw = samples
        .iter()
        .map(|s| ridge_features(s.eye_ccs, s.gaze))
        .collect::<Result<Vec<_>>>()?;
    let (means, scales) = standardization(&raw);
    let design: Vec<Vec<f64>> = raw
        .iter()
        .map(|f| (0..FEATURES).map(|j| (f[j] - means[j]) / scales[j]).collect())
        .collect();
    let targets: Vec<[f64; 2]> = samples.iter().map(|s| [s.target.x, s.target.y]).collect();
    let w = solve_ridge(&design, &targets, lambda)?;

    let mut weights = [[0.0; FEATURES + 1]; 2];
    for (j, row) in w.iter().enumerate() {
        weights[0][j] = row[0];
        weights[1][j] = row[1];
    }
    Ok(RidgeModel {
        weights,
        feature_means: means,
        feature_scales: scales,
    })
}

/// Column means and population standard deviations (floored). A column
/// whose entries are all identical gets that value as its exact mean, so it
/// standardizes to exact zeros.
fn standardization(rows: &[[f64; FEATURES]]) -> ([f64; FEATURES], [f64; FEATURES]) {
    let n = rows.len() as f64;
    let mut means = [0.0; FEATURES];
    let mut scales = [0.0; FEATURES];
    for j in 0..FEATURES {
        let first = rows[0][j];
        let mean = if rows.iter().all(|r| r[j] == first) {
            first
        } else {
            rows.iter().map(|r| r[j]).sum::<f64>() / n
        };
        let var = rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
        means[j] = mean;
        scales[j] = var.sqrt().max(SCALE_FLOOR);
    }
    (means, scales)
}

/// Sum of squared reprojection errors of the geometric model with `params`.
/// Samples that cannot be projected contribute [`NO_INTERSECTION_PENALTY`].
pub fn reprojection_objective(params: &ExtrinsicParams, samples: &[CalibrationSample]) -> f64 {
    let Ok(r) = pitch_rotation(params.rho) else {
        return NO_INTERSECTION_PENALTY * samples.len().max(1) as f64;
    };
    samples
        .iter()
        .map(|s| {
            let eye_scs = r * s.eye_ccs + params.t;
            match vector_to_angles(s.gaze).and_then(|a| project_gaze(eye_scs, a, params.rho)) {
                Ok(p) => {
                    let (dx, dy) = (s.target.x - p.x, s.target.y - p.y);
                    let d2 = dx * dx + dy * dy;
                    if d2.is_finite() {
                        d2.min(NO_INTERSECTION_PENALTY)
                    } else {
                        NO_INTERSECTION_PENALTY
                    }
                }
                Err(_) => NO_INTERSECTION_PENALTY,
            }
        })
        .sum()
}

/// Search box for `[rho, dx, dy, dz]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HybridBounds {
    pub rho: (f64, f64),
    pub dx: (f64, f64),
    pub dy: (f64, f64),
    pub dz: (f64, f64),
}

impl Default for HybridBounds {
    fn default() -> Self {
        Self {
            rho: (-FRAC_PI_4, FRAC_PI_4),
            dx: (-500.0, 500.0),
            dy: (-500.0, 500.0),
            dz: (-200.0, 200.0),
        }
    }
}

impl HybridBounds {
    pub fn to_bounds(&self) -> Result<Bounds> {
        Bounds::new(vec![self.rho, self.dx, self.dy, self.dz])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HybridFit {
    pub params: ExtrinsicParams,
    pub objective: f64,
    pub initial_best: f64,
    pub generations: usize,
}

/// Fit `[rho, dx, dy, dz]` by differential evolution on the reprojection
/// objective. A single sample is accepted but leaves the problem
/// under-determined.
pub fn hybrid_fit(
    samples: &[CalibrationSample],
    bounds: &HybridBounds,
    de: &DeConfig,
    seed: u64,
) -> Result<HybridFit> {
    if samples.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let b = bounds.to_bounds()?;
    let res = differential_evolution(
        |x| reprojection_objective(&ExtrinsicParams::from_vector(x), samples),
        &b,
        de,
        seed,
    )?;
    Ok(HybridFit {
        params: ExtrinsicParams::from_vector(&res.best_x),
        objective: res.best_value,
        initial_best: res.initial_best,
        generations: res.generations,
    })
}

/// Per-sample Euclidean error statistics (population std). Failed
/// predictions are charged `penalty_mm` and counted in `failures`.
pub fn evaluate(
    model: &CalibratorModel,
    test: &[CalibrationSample],
    penalty_mm: f64,
) -> Result<ErrorStats> {
    if test.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let mut failures = 0;
    let errors: Vec<f64> = test
        .iter()
        .map(|s| match model.predict(s.eye_ccs, s.gaze) {
            Ok(p) if p.is_finite() => p.distance(&s.target),
            _ => {
                failures += 1;
                penalty_mm
            }
        })
        .collect();
    Ok(error_stats(&errors, failures))
}

pub(crate) fn error_stats(errors: &[f64], failures: usize) -> ErrorStats {
    let n = errors.len();
    let mean = errors.iter().sum::<f64>() / n as f64;
    let var = errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n as f64;
    ErrorStats {
        mean_mm: mean,
        std_mm: var.sqrt(),
        max_mm: errors.iter().copied().fold(0.0, f64::max),
        n,
        failures,
    }
}
