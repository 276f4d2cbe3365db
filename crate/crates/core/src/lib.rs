//! Webcam gaze-to-screen calibration.
//!
//! Maps camera-frame gaze vectors to points on a screen using one of three
//! calibrators ([`calibration`]), evaluates them on synthetic scenes
//! ([`simulate`], [`harness`]) and estimates the inference cost of the gaze
//! CNN at different input crops ([`costmodel`]).

pub mod calibration;
pub mod costmodel;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod optimize;
pub mod profile;
pub mod rng;
pub mod simulate;

pub use calibration::{
    calibrator_predict, evaluate, geometric_fit, hybrid_fit, reprojection_objective, ridge_features,
    ridge_fit, AnchorSample, CalibrationSample, CalibratorModel, ErrorStats, HybridBounds,
    HybridFit, Method, RidgeModel,
};
pub use costmodel::{flops, fps_at, is_real_time, vgg16, vgg16_for_input, ConvNetSpec, InputSpec, Layer};
pub use error::{Error, Result};
pub use geometry::{
    angles_to_vector, apply_to_gaze, ccs_to_scs, normalization_transform, pitch_rotation,
    project_gaze, scs_to_ccs, vector_to_angles, ExtrinsicParams, GazeAngles, Mat3,
    NormalizationTransform, ScreenPoint, Vec3,
};
pub use harness::{run_comparison, run_learning_curve, write_csv, ExperimentConfig, ResultRow};
pub use optimize::{differential_evolution, solve_ridge, Bounds, DeConfig, DeResult};
pub use simulate::{
    generate_dataset, grid_points, make_anchor, sample_gaze, true_angles, Dataset, HeadMode,
    SceneConfig,
};
