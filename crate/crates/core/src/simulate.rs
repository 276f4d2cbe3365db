//! Synthetic scenes: a screen, a camera with known extrinsics, an eye that
//! is either static or jitters per sample, and Gaussian angular noise
//! standing in for a gaze CNN.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::calibration::{AnchorSample, CalibrationSample};
use crate::error::{Error, Result};
use crate::geometry::{
    angles_to_vector, scs_to_ccs, ExtrinsicParams, GazeAngles, ScreenPoint, Vec3,
};
use crate::rng::{self, Stream};

pub const SCENE_FILE_VERSION: u32 = 1;
pub const DATASET_FILE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeadMode {
    Static,
    Moving,
}

impl HeadMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            HeadMode::Static => "static",
            HeadMode::Moving => "moving",
        }
    }
}

impl fmt::Display for HeadMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for HeadMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "static" => Ok(HeadMode::Static),
            "moving" => Ok(HeadMode::Moving),
            other => Err(Error::Config(format!(
                "unknown head mode '{other}' (expected static or moving)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneConfig {
    pub screen_w: f64,
    pub screen_h: f64,
    pub true_extrinsics: ExtrinsicParams,
    pub eye_base_scs: Vec3,
    pub head_mode: HeadMode,
    /// Per-axis half-range of the uniform head jitter. Ignored when static.
    pub motion_amplitude: Vec3,
    /// Standard deviation of the additive angular noise per gaze axis.
    pub noise_deg: f64,
    pub seed: u64,
}

impl SceneConfig {
    /// A laptop-like setup: 520×320 mm screen, camera 10 mm above the top
    /// edge pitched 10°, eye 550 mm in front of the screen centre.
    pub fn demo() -> Self {
        Self {
            screen_w: 520.0,
            screen_h: 320.0,
            true_extrinsics: ExtrinsicParams::new(10f64.to_radians(), Vec3::new(260.0, -10.0, 0.0)),
            eye_base_scs: Vec3::new(260.0, 160.0, 550.0),
            head_mode: HeadMode::Static,
            motion_amplitude: Vec3::new(30.0, 30.0, 30.0),
            noise_deg: 0.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.screen_w > 0.0 && self.screen_h > 0.0)
            || !(self.screen_w.is_finite() && self.screen_h.is_finite())
        {
            return Err(Error::Config("screen dimensions must be > 0".into()));
        }
        self.true_extrinsics
            .validate()
            .map_err(|e| Error::Config(format!("true extrinsics: {e}")))?;
        if !(self.eye_base_scs.is_finite() && self.eye_base_scs.z > 0.0) {
            return Err(Error::Config("eye base must be finite with z > 0".into()));
        }
        let a = self.motion_amplitude;
        if !(a.is_finite() && a.x >= 0.0 && a.y >= 0.0 && a.z >= 0.0) {
            return Err(Error::Config("motion amplitudes must be >= 0".into()));
        }
        if !(self.noise_deg >= 0.0 && self.noise_deg.is_finite()) {
            return Err(Error::Config("noise_deg must be >= 0".into()));
        }
        Ok(())
    }

    pub fn effective_amplitude(&self) -> Vec3 {
        match self.head_mode {
            HeadMode::Static => Vec3::ZERO,
            HeadMode::Moving => self.motion_amplitude,
        }
    }

    pub fn diagonal(&self) -> f64 {
        self.screen_w.hypot(self.screen_h)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub train: Vec<CalibrationSample>,
    pub test: Vec<CalibrationSample>,
    pub anchor: AnchorSample,
    pub scene: SceneConfig,
}

/// Stratified points: `per_cell` uniform points in each cell of a
/// `cells_x × cells_y` grid, cells in row-major order.
pub fn grid_points<R: Rng>(
    screen_w: f64,
    screen_h: f64,
    cells_x: usize,
    cells_y: usize,
    per_cell: usize,
    rng: &mut R,
) -> Vec<ScreenPoint> {
    let (cw, ch) = (screen_w / cells_x as f64, screen_h / cells_y as f64);
    let mut out = Vec::with_capacity(cells_x * cells_y * per_cell);
    for cy in 0..cells_y {
        for cx in 0..cells_x {
            for _ in 0..per_cell {
                let u: f64 = rng.random();
                let v: f64 = rng.random();
                out.push(ScreenPoint::new(
                    (cx as f64 + u) * cw,
                    (cy as f64 + v) * ch,
                ));
            }
        }
    }
    out
}

/// Exact gaze angles from `e_scs` to the screen point `q` for a camera
/// pitched by `p.rho`.
pub fn true_angles(p: &ExtrinsicParams, e_scs: Vec3, q: ScreenPoint) -> GazeAngles {
    GazeAngles::new(
        ((q.y - e_scs.y) / e_scs.z).atan() - p.rho,
        ((q.x - e_scs.x) / e_scs.z).atan(),
    )
}

/// One observation of the user looking at `q`.
///
/// Draws three jitter and two noise variates per call regardless of mode,
/// so static and moving scenes with the same seed see the same stream.
pub fn sample_gaze<R: Rng>(
    scene: &SceneConfig,
    q: ScreenPoint,
    rng: &mut R,
) -> Result<CalibrationSample> {
    let amp = scene.effective_amplitude();
    let mut jitter = [0.0; 3];
    for j in &mut jitter {
        *j = rng.random_range(-1.0..=1.0);
    }
    let eye_scs = scene.eye_base_scs
        + Vec3::new(jitter[0] * amp.x, jitter[1] * amp.y, jitter[2] * amp.z);
    if !(eye_scs.z > 0.0) {
        return Err(Error::SceneDegenerate(format!(
            "jittered eye at z = {} mm is not in front of the screen",
            eye_scs.z
        )));
    }
    let sigma = scene.noise_deg.to_radians();
    let n_pitch: f64 = StandardNormal.sample(rng);
    let n_yaw: f64 = StandardNormal.sample(rng);
    let truth = true_angles(&scene.true_extrinsics, eye_scs, q);
    let observed = GazeAngles::new(truth.pitch + sigma * n_pitch, truth.yaw + sigma * n_yaw);
    let gaze = angles_to_vector(observed)
        .map_err(|e| Error::SceneDegenerate(format!("gaze toward {q:?}: {e}")))?;
    Ok(CalibrationSample {
        gaze,
        eye_ccs: scs_to_ccs(eye_scs, &scene.true_extrinsics)?,
        target: q,
    })
}

/// The perpendicular-gaze annotation a user at the base eye position makes.
pub fn make_anchor(scene: &SceneConfig) -> Result<AnchorSample> {
    let e = scene.eye_base_scs;
    Ok(AnchorSample {
        eye_ccs: scs_to_ccs(e, &scene.true_extrinsics)?,
        marked: ScreenPoint::new(e.x, e.y),
        distance_z: e.z,
    })
}

/// Grid-stratified training set and uniformly placed test set. Train and
/// test draw from separate streams of the scene seed, so the test set does
/// not depend on `n_train`.
pub fn generate_dataset(
    scene: &SceneConfig,
    n_train: usize,
    n_test: usize,
    grid_cells: (usize, usize),
) -> Result<Dataset> {
    scene.validate()?;
    let (cx, cy) = grid_cells;
    if n_train == 0 || n_test == 0 {
        return Err(Error::Config("n_train and n_test must be >= 1".into()));
    }
    if cx == 0 || cy == 0 {
        return Err(Error::Config("grid must have at least one cell per axis".into()));
    }
    let cells = cx * cy;
    if n_train % cells != 0 {
        return Err(Error::Config(format!(
            "n_train = {n_train} is not divisible by the {cx}x{cy} grid ({cells} cells); \
             choose a multiple of {cells} or a different grid"
        )));
    }

    let mut train_rng: ChaCha8Rng = rng::stream(scene.seed, Stream::TrainPoints);
    let points = grid_points(scene.screen_w, scene.screen_h, cx, cy, n_train / cells, &mut train_rng);
    let train = points
        .into_iter()
        .map(|q| sample_gaze(scene, q, &mut train_rng))
        .collect::<Result<Vec<_>>>()?;

    let mut test_rng: ChaCha8Rng = rng::stream(scene.seed, Stream::TestPoints);
    let mut test = Vec::with_capacity(n_test);
    for _ in 0..n_test {
        let q = ScreenPoint::new(
            test_rng.random::<f64>() * scene.screen_w,
            test_rng.random::<f64>() * scene.screen_h,
        );
        test.push(sample_gaze(scene, q, &mut test_rng)?);
    }

    Ok(Dataset {
        train,
        test,
        anchor: make_anchor(scene)?,
        scene: scene.clone(),
    })
}

// ---------------------------------------------------------------------------
// Scene and dataset files (TOML).

/// On-disk scene schema. Angles in degrees, lengths in millimetres.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneRecord {
    version: u32,
    screen_w_mm: f64,
    screen_h_mm: f64,
    camera_pitch_deg: f64,
    camera_offset_mm: Vec3,
    eye_base_mm: Vec3,
    head_mode: HeadMode,
    #[serde(default)]
    motion_amplitude_mm: Vec3,
    #[serde(default)]
    noise_deg: f64,
    #[serde(default)]
    seed: u64,
}

impl From<&SceneConfig> for SceneRecord {
    fn from(s: &SceneConfig) -> Self {
        Self {
            version: SCENE_FILE_VERSION,
            screen_w_mm: s.screen_w,
            screen_h_mm: s.screen_h,
            camera_pitch_deg: s.true_extrinsics.rho.to_degrees(),
            camera_offset_mm: s.true_extrinsics.t,
            eye_base_mm: s.eye_base_scs,
            head_mode: s.head_mode,
            motion_amplitude_mm: s.motion_amplitude,
            noise_deg: s.noise_deg,
            seed: s.seed,
        }
    }
}

impl SceneRecord {
    fn into_scene(self) -> Result<SceneConfig> {
        if self.version != SCENE_FILE_VERSION {
            return Err(Error::parse(
                "scene",
                format!("unsupported version {} (expected {SCENE_FILE_VERSION})", self.version),
            ));
        }
        let scene = SceneConfig {
            screen_w: self.screen_w_mm,
            screen_h: self.screen_h_mm,
            true_extrinsics: ExtrinsicParams::new(
                self.camera_pitch_deg.to_radians(),
                self.camera_offset_mm,
            ),
            eye_base_scs: self.eye_base_mm,
            head_mode: self.head_mode,
            motion_amplitude: self.motion_amplitude_mm,
            noise_deg: self.noise_deg,
            seed: self.seed,
        };
        scene.validate()?;
        Ok(scene)
    }
}

pub fn scene_to_string(scene: &SceneConfig) -> Result<String> {
    toml::to_string(&SceneRecord::from(scene)).map_err(|e| Error::parse("scene", e))
}

pub fn scene_from_str(text: &str) -> Result<SceneConfig> {
    toml::from_str::<SceneRecord>(text)
        .map_err(|e| Error::parse("scene", e))?
        .into_scene()
}

pub fn load_scene(path: &Path) -> Result<SceneConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    scene_from_str(&text).map_err(|e| with_path(e, path))
}

pub fn save_scene(scene: &SceneConfig, path: &Path) -> Result<()> {
    std::fs::write(path, scene_to_string(scene)?).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SampleRecord {
    gaze: Vec3,
    eye_ccs_mm: Vec3,
    target_mm: ScreenPoint,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnchorRecord {
    eye_ccs_mm: Vec3,
    marked_mm: ScreenPoint,
    distance_mm: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetRecord {
    version: u32,
    scene: SceneRecord,
    anchor: AnchorRecord,
    train: Vec<SampleRecord>,
    test: Vec<SampleRecord>,
}

fn sample_record(s: &CalibrationSample) -> SampleRecord {
    SampleRecord {
        gaze: s.gaze,
        eye_ccs_mm: s.eye_ccs,
        target_mm: s.target,
    }
}

fn sample_from_record(r: SampleRecord) -> Result<CalibrationSample> {
    let s = CalibrationSample {
        gaze: r.gaze,
        eye_ccs: r.eye_ccs_mm,
        target: r.target_mm,
    };
    s.validate()?;
    Ok(s)
}

pub fn dataset_to_string(d: &Dataset) -> Result<String> {
    let rec = DatasetRecord {
        version: DATASET_FILE_VERSION,
        scene: SceneRecord::from(&d.scene),
        anchor: AnchorRecord {
            eye_ccs_mm: d.anchor.eye_ccs,
            marked_mm: d.anchor.marked,
            distance_mm: d.anchor.distance_z,
        },
        train: d.train.iter().map(sample_record).collect(),
        test: d.test.iter().map(sample_record).collect(),
    };
    toml::to_string(&rec).map_err(|e| Error::parse("dataset", e))
}

pub fn dataset_from_str(text: &str) -> Result<Dataset> {
    let rec: DatasetRecord = toml::from_str(text).map_err(|e| Error::parse("dataset", e))?;
    if rec.version != DATASET_FILE_VERSION {
        return Err(Error::parse(
            "dataset",
            format!("unsupported version {} (expected {DATASET_FILE_VERSION})", rec.version),
        ));
    }
    let anchor = AnchorSample {
        eye_ccs: rec.anchor.eye_ccs_mm,
        marked: rec.anchor.marked_mm,
        distance_z: rec.anchor.distance_mm,
    };
    anchor.validate()?;
    let convert = |v: Vec<SampleRecord>| v.into_iter().map(sample_from_record).collect::<Result<Vec<_>>>();
    Ok(Dataset {
        scene: rec.scene.into_scene()?,
        anchor,
        train: convert(rec.train)?,
        test: convert(rec.test)?,
    })
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    dataset_from_str(&text).map_err(|e| with_path(e, path))
}

pub fn save_dataset(d: &Dataset, path: &Path) -> Result<()> {
    std::fs::write(path, dataset_to_string(d)?).map_err(|e| Error::io(path, e))
}

pub(crate) fn with_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Parse { what, msg } => Error::Parse {
            what: format!("{what} file {}", path.display()),
            msg,
        },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calibration::{calibrator_predict, CalibratorModel};
    use crate::geometry::{ccs_to_scs, project_gaze, vector_to_angles};
    use rand::SeedableRng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn grid_two_by_two_one_per_quadrant() {
        let pts = grid_points(100.0, 100.0, 2, 2, 1, &mut rng(1));
        assert_eq!(pts.len(), 4);
        let quadrant = |p: &ScreenPoint| ((p.x >= 50.0) as usize, (p.y >= 50.0) as usize);
        let mut seen: Vec<_> = pts.iter().map(quadrant).collect();
        seen.sort();
        assert_eq!(seen, vec![(0, 0), (0, 1), (1, 0), (1, 1)]);
    }

    #[test]
    fn grid_occupancy_and_bounds() {
        let pts = grid_points(520.0, 320.0, 3, 3, 4, &mut rng(2));
        assert_eq!(pts.len(), 36);
        let mut counts = [[0usize; 3]; 3];
        for p in &pts {
            assert!((0.0..=520.0).contains(&p.x) && (0.0..=320.0).contains(&p.y));
            let cx = ((p.x / (520.0 / 3.0)) as usize).min(2);
            let cy = ((p.y / (320.0 / 3.0)) as usize).min(2);
            counts[cy][cx] += 1;
        }
        assert!(counts.iter().flatten().all(|&c| c == 4), "{counts:?}");
    }

    #[test]
    fn true_angles_examples() {
        let p = ExtrinsicParams::default();
        let e = Vec3::new(100.0, 50.0, 500.0);
        assert_eq!(true_angles(&p, e, ScreenPoint::new(100.0, 50.0)), GazeAngles::new(0.0, 0.0));
        let p = ExtrinsicParams::new(0.1, Vec3::ZERO);
        assert_eq!(true_angles(&p, e, ScreenPoint::new(100.0, 50.0)), GazeAngles::new(-0.1, 0.0));
    }

    #[test]
    fn noiseless_static_closure() {
        let scene = SceneConfig {
            true_extrinsics: ExtrinsicParams::new(0.2, Vec3::new(30.0, -60.0, 15.0)),
            ..SceneConfig::demo()
        };
        let model = CalibratorModel::Geometric(scene.true_extrinsics);
        let mut r = rng(3);
        let mut eyes = Vec::new();
        for q in grid_points(scene.screen_w, scene.screen_h, 4, 4, 2, &mut r) {
            let s = sample_gaze(&scene, q, &mut r).unwrap();
            let p = calibrator_predict(&model, s.eye_ccs, s.gaze).unwrap();
            assert!(p.distance(&q) < 1e-9);
            eyes.push(s.eye_ccs);
        }
        assert!(eyes.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn moving_jitter_within_amplitude() {
        let scene = SceneConfig {
            head_mode: HeadMode::Moving,
            motion_amplitude: Vec3::new(20.0, 20.0, 20.0),
            ..SceneConfig::demo()
        };
        let mut r = rng(4);
        let mut moved = false;
        for _ in 0..500 {
            let s = sample_gaze(&scene, ScreenPoint::new(100.0, 100.0), &mut r).unwrap();
            let e = ccs_to_scs(s.eye_ccs, &scene.true_extrinsics).unwrap() - scene.eye_base_scs;
            assert!(e.x.abs() <= 20.0 + 1e-9 && e.y.abs() <= 20.0 + 1e-9 && e.z.abs() <= 20.0 + 1e-9);
            moved |= e.norm() > 1.0;
        }
        assert!(moved);
    }

    #[test]
    fn degenerate_jitter_reported() {
        let scene = SceneConfig {
            head_mode: HeadMode::Moving,
            eye_base_scs: Vec3::new(100.0, 100.0, 5.0),
            motion_amplitude: Vec3::new(0.0, 0.0, 50.0),
            ..SceneConfig::demo()
        };
        let mut r = rng(5);
        let any_err = (0..100).any(|_| {
            matches!(
                sample_gaze(&scene, ScreenPoint::new(0.0, 0.0), &mut r),
                Err(Error::SceneDegenerate(_))
            )
        });
        assert!(any_err);
    }

    #[test]
    fn angular_noise_std() {
        let scene = SceneConfig { noise_deg: 2.0, ..SceneConfig::demo() };
        let mut r = rng(6);
        let q = ScreenPoint::new(300.0, 200.0);
        let truth = true_angles(&scene.true_extrinsics, scene.eye_base_scs, q);
        let n = 100_000;
        let diffs: Vec<f64> = (0..n)
            .map(|_| {
                let s = sample_gaze(&scene, q, &mut r).unwrap();
                (vector_to_angles(s.gaze).unwrap().pitch - truth.pitch).to_degrees()
            })
            .collect();
        let mean = diffs.iter().sum::<f64>() / n as f64;
        let std = (diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
        assert!((std - 2.0).abs() < 0.05, "std {std}");
    }

    #[test]
    fn anchor_examples() {
        let scene = SceneConfig {
            eye_base_scs: Vec3::new(260.0, 160.0, 500.0),
            true_extrinsics: ExtrinsicParams::default(),
            ..SceneConfig::demo()
        };
        let a = make_anchor(&scene).unwrap();
        assert_eq!(a.marked, ScreenPoint::new(260.0, 160.0));
        assert_eq!(a.distance_z, 500.0);
        assert_eq!(a.eye_ccs, scene.eye_base_scs);

        let general = SceneConfig::demo();
        let a = make_anchor(&general).unwrap();
        let back = ccs_to_scs(a.eye_ccs, &general.true_extrinsics).unwrap();
        assert!((back - general.eye_base_scs).norm() < 1e-10);
    }

    #[test]
    fn dataset_counts_and_determinism() {
        let scene = SceneConfig { noise_deg: 1.0, seed: 9, ..SceneConfig::demo() };
        let d = generate_dataset(&scene, 100, 50, (5, 5)).unwrap();
        assert_eq!(d.train.len(), 100);
        assert_eq!(d.test.len(), 50);
        let cw = scene.screen_w / 5.0;
        let ch = scene.screen_h / 5.0;
        let mut counts = [0usize; 25];
        for s in &d.train {
            let cx = ((s.target.x / cw) as usize).min(4);
            let cy = ((s.target.y / ch) as usize).min(4);
            counts[cy * 5 + cx] += 1;
        }
        assert!(counts.iter().all(|&c| c == 4));
        assert_eq!(d, generate_dataset(&scene, 100, 50, (5, 5)).unwrap());
        // The test split is independent of the training size.
        assert_eq!(d.test, generate_dataset(&scene, 25, 50, (5, 5)).unwrap().test);
    }

    #[test]
    fn dataset_indivisible_is_config_error() {
        let err = generate_dataset(&SceneConfig::demo(), 10, 5, (3, 3)).unwrap_err();
        assert!(matches!(err, Error::Config(ref m) if m.contains("divisible")));
    }

    #[test]
    fn noiseless_projection_with_truth() {
        let scene = SceneConfig { head_mode: HeadMode::Moving, ..SceneConfig::demo() };
        let d = generate_dataset(&scene, 16, 16, (4, 4)).unwrap();
        for s in d.train.iter().chain(&d.test) {
            let e = ccs_to_scs(s.eye_ccs, &scene.true_extrinsics).unwrap();
            let p = project_gaze(e, vector_to_angles(s.gaze).unwrap(), scene.true_extrinsics.rho)
                .unwrap();
            assert!(p.distance(&s.target) < 1e-9);
        }
    }

    #[test]
    fn scene_file_round_trip() {
        let scene = SceneConfig {
            head_mode: HeadMode::Moving,
            noise_deg: 1.5,
            seed: 77,
            ..SceneConfig::demo()
        };
        let text = scene_to_string(&scene).unwrap();
        let back = scene_from_str(&text).unwrap();
        assert_eq!(back.seed, 77);
        assert_eq!(back.head_mode, HeadMode::Moving);
        assert!((back.true_extrinsics.rho - scene.true_extrinsics.rho).abs() < 1e-15);
        assert_eq!(back.eye_base_scs, scene.eye_base_scs);
    }

    #[test]
    fn scene_file_rejects_bad_input() {
        assert!(matches!(scene_from_str("version = 1"), Err(Error::Parse { .. })));
        let text = scene_to_string(&SceneConfig::demo()).unwrap().replace("version = 1", "version = 9");
        assert!(scene_from_str(&text).is_err());
        let text = scene_to_string(&SceneConfig::demo()).unwrap().replace("screen_w_mm = 520.0", "screen_w_mm = -1.0");
        assert!(matches!(scene_from_str(&text), Err(Error::Config(_))));
    }

    #[test]
    fn dataset_file_round_trip_is_exact() {
        let scene = SceneConfig { noise_deg: 2.0, head_mode: HeadMode::Moving, seed: 3, ..SceneConfig::demo() };
        let d = generate_dataset(&scene, 9, 7, (3, 3)).unwrap();
        let back = dataset_from_str(&dataset_to_string(&d).unwrap()).unwrap();
        assert_eq!(back.train, d.train);
        assert_eq!(back.test, d.test);
        assert_eq!(back.anchor, d.anchor);
    }
}
