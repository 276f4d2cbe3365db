//! Calibration profiles: a fitted [`CalibratorModel`] persisted as TOML.
//!
//! ```toml
//! version = 1
//! method = "hybrid"          # geometric | ridge | hybrid
//!
//! [extrinsics]               # geometric and hybrid only
//! rho_rad = 0.17453292519943295
//! t_mm = [260.0, -10.0, 0.0]
//!
//! [ridge]                    # ridge only
//! feature_means = [..5 values..]
//! feature_scales = [..5 values..]
//! weights_x = [..6 values, bias first..]
//! weights_y = [..6 values, bias first..]
//! ```
//!
//! Floats are written in shortest round-trip form, so save/load is exact.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::calibration::{CalibratorModel, Method, RidgeModel, FEATURES};
use crate::error::{Error, Result};
use crate::geometry::{ExtrinsicParams, Vec3};
use crate::simulate::with_path;

pub const PROFILE_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileRecord {
    version: u32,
    method: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    extrinsics: Option<ExtrinsicsRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ridge: Option<RidgeRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExtrinsicsRecord {
    rho_rad: f64,
    t_mm: Vec3,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RidgeRecord {
    feature_means: [f64; FEATURES],
    feature_scales: [f64; FEATURES],
    weights_x: [f64; FEATURES + 1],
    weights_y: [f64; FEATURES + 1],
}

pub fn profile_to_string(model: &CalibratorModel) -> Result<String> {
    let mut rec = ProfileRecord {
        version: PROFILE_VERSION,
        method: model.method().as_str().to_string(),
        extrinsics: None,
        ridge: None,
    };
    match model {
        CalibratorModel::Geometric(p) | CalibratorModel::Hybrid(p) => {
            rec.extrinsics = Some(ExtrinsicsRecord {
                rho_rad: p.rho,
                t_mm: p.t,
            });
        }
        CalibratorModel::Ridge(m) => {
            rec.ridge = Some(RidgeRecord {
                feature_means: m.feature_means,
                feature_scales: m.feature_scales,
                weights_x: m.weights[0],
                weights_y: m.weights[1],
            });
        }
    }
    toml::to_string(&rec).map_err(|e| Error::parse("profile", e))
}

pub fn profile_from_str(text: &str) -> Result<CalibratorModel> {
    let rec: ProfileRecord = toml::from_str(text).map_err(|e| Error::parse("profile", e))?;
    if rec.version != PROFILE_VERSION {
        return Err(Error::parse(
            "profile",
            format!("unsupported version {} (expected {PROFILE_VERSION})", rec.version),
        ));
    }
    let method: Method = rec.method.parse().map_err(|e| Error::parse("profile", e))?;
    let missing = |section: &str| Error::parse("profile", format!("method {method} requires a [{section}] table"));
    match method {
        Method::Geometric | Method::Hybrid => {
            let e = rec.extrinsics.ok_or_else(|| missing("extrinsics"))?;
            let p = ExtrinsicParams::new(e.rho_rad, e.t_mm);
            p.validate()?;
            Ok(if method == Method::Geometric {
                CalibratorModel::Geometric(p)
            } else {
                CalibratorModel::Hybrid(p)
            })
        }
        Method::Ridge => {
            let r = rec.ridge.ok_or_else(|| missing("ridge"))?;
            if r.feature_scales.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
                return Err(Error::parse("profile", "feature scales must be > 0"));
            }
            let finite = r
                .weights_x
                .iter()
                .chain(&r.weights_y)
                .chain(&r.feature_means)
                .all(|v| v.is_finite());
            if !finite {
                return Err(Error::parse("profile", "non-finite ridge parameters"));
            }
            Ok(CalibratorModel::Ridge(RidgeModel {
                weights: [r.weights_x, r.weights_y],
                feature_means: r.feature_means,
                feature_scales: r.feature_scales,
            }))
        }
    }
}

pub fn save_profile(model: &CalibratorModel, path: &Path) -> Result<()> {
    std::fs::write(path, profile_to_string(model)?).map_err(|e| Error::io(path, e))
}

pub fn load_profile(path: &Path) -> Result<CalibratorModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    profile_from_str(&text).map_err(|e| with_path(e, path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn finite() -> impl Strategy<Value = f64> {
        prop_oneof![
            -1e6..1e6f64,
            any::<f64>().prop_filter("finite", |v| v.is_finite()),
        ]
    }

    proptest! {
        #[test]
        fn extrinsic_profiles_round_trip_bit_exact(
            rho in -1.5..1.5f64, t in prop::array::uniform3(finite()), hybrid: bool,
        ) {
            let p = ExtrinsicParams::new(rho, t.into());
            let m = if hybrid { CalibratorModel::Hybrid(p) } else { CalibratorModel::Geometric(p) };
            let back = profile_from_str(&profile_to_string(&m).unwrap()).unwrap();
            prop_assert_eq!(back, m);
        }

        #[test]
        fn ridge_profiles_round_trip_bit_exact(
            means in prop::array::uniform5(finite()),
            scales in prop::array::uniform5(1e-12..1e6f64),
            wx in prop::array::uniform6(finite()),
            wy in prop::array::uniform6(finite()),
        ) {
            let m = CalibratorModel::Ridge(RidgeModel {
                weights: [wx, wy],
                feature_means: means,
                feature_scales: scales,
            });
            let text = profile_to_string(&m).unwrap();
            let back = profile_from_str(&text).unwrap();
            prop_assert_eq!(back, m);
        }
    }

    #[test]
    fn rejects_missing_section_and_bad_version() {
        assert!(profile_from_str("version = 1\nmethod = \"ridge\"\n").is_err());
        assert!(profile_from_str("version = 2\nmethod = \"hybrid\"\n[extrinsics]\nrho_rad = 0.0\nt_mm = [0.0, 0.0, 0.0]\n").is_err());
        assert!(profile_from_str("version = 1\nmethod = \"svr\"\n").is_err());
        let ok = "version = 1\nmethod = \"hybrid\"\n[extrinsics]\nrho_rad = 0.1\nt_mm = [1.0, 2.0, 3.0]\n";
        assert_eq!(
            profile_from_str(ok).unwrap(),
            CalibratorModel::Hybrid(ExtrinsicParams::new(0.1, Vec3::new(1.0, 2.0, 3.0)))
        );
    }
}
