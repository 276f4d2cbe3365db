//! Coordinate frames and the camera-to-screen projection.
//!
//! Conventions used throughout the crate:
//!
//! * **Screen frame (SCS)**: origin at the top-left corner of the active
//!   screen area, `+x` to the right, `+y` downward, `+z` out of the screen
//!   plane toward the user. An eye in front of the screen has `z > 0`.
//! * **Gaze directions** are stored with `+x` right, `+y` up and `+z` from
//!   the user toward the screen, so every valid gaze has `z > 0`. Pitch
//!   `α > 0` looks down the screen, yaw `γ > 0` looks toward `+x`.
//! * **Camera frame (CCS)** is related to the screen frame by a pitch-only
//!   rotation and a translation: `e_scs = R(ρ)·e_ccs + t`.
//!
//! Datasets recorded with the opposite z-sign for gaze vectors must be
//! flipped when ingested.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(&self, other: &Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }

    /// Unit vector in the same direction, or `None` for a zero vector.
    pub fn normalized(&self) -> Option<Vec3> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self.scale(1.0 / n))
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        v.to_array()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Row-major 3x3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3 {
    pub m: [[f64; 3]; 3],
}

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3 {
        m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    pub const fn from_rows(m: [[f64; 3]; 3]) -> Self {
        Self { m }
    }

    pub fn diag(a: f64, b: f64, c: f64) -> Self {
        Self::from_rows([[a, 0.0, 0.0], [0.0, b, 0.0], [0.0, 0.0, c]])
    }

    pub fn transpose(&self) -> Mat3 {
        let m = &self.m;
        Mat3::from_rows([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|v| v.is_finite())
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_abs_diff(&self, other: &Mat3) -> f64 {
        self.m
            .iter()
            .flatten()
            .zip(other.m.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Mul<Vec3> for Mat3 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        let m = &self.m;
        Vec3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }
}

impl Mul for Mat3 {
    type Output = Mat3;
    fn mul(self, rhs: Mat3) -> Mat3 {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| self.m[i][k] * rhs.m[k][j]).sum();
            }
        }
        Mat3::from_rows(out)
    }
}

/// Gaze pitch and yaw relative to the camera, in radians.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GazeAngles {
    pub pitch: f64,
    pub yaw: f64,
}

impl GazeAngles {
    pub const fn new(pitch: f64, yaw: f64) -> Self {
        Self { pitch, yaw }
    }
}

/// Camera-to-screen extrinsics: pitch `rho` about the x-axis and a
/// translation `t` in millimetres. Roll and yaw are assumed zero.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ExtrinsicParams {
    pub rho: f64,
    pub t: Vec3,
}

impl ExtrinsicParams {
    pub const fn new(rho: f64, t: Vec3) -> Self {
        Self { rho, t }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.rho.is_finite() || self.rho.abs() > std::f64::consts::FRAC_PI_2 {
            return Err(Error::InvalidArgument(format!(
                "camera pitch {} outside [-pi/2, pi/2]",
                self.rho
            )));
        }
        if !self.t.is_finite() {
            return Err(Error::InvalidArgument("non-finite translation".into()));
        }
        Ok(())
    }

    /// Parameter vector in optimizer order `[rho, dx, dy, dz]`.
    pub fn to_vector(&self) -> [f64; 4] {
        [self.rho, self.t.x, self.t.y, self.t.z]
    }

    pub fn from_vector(v: &[f64]) -> Self {
        Self::new(v[0], Vec3::new(v[1], v[2], v[3]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct ScreenPoint {
    pub x: f64,
    pub y: f64,
}

impl ScreenPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &ScreenPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<[f64; 2]> for ScreenPoint {
    fn from(a: [f64; 2]) -> Self {
        ScreenPoint::new(a[0], a[1])
    }
}

impl From<ScreenPoint> for [f64; 2] {
    fn from(p: ScreenPoint) -> Self {
        [p.x, p.y]
    }
}

/// Head-pose normalization: `m = S·R` with `S = diag(1, 1, d/‖e‖)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationTransform {
    pub m: Mat3,
    pub distance: f64,
}

/// Rotation about the x-axis by `rho` radians.
pub fn pitch_rotation(rho: f64) -> Result<Mat3> {
    if !rho.is_finite() {
        return Err(Error::InvalidArgument(format!("non-finite pitch {rho}")));
    }
    let (s, c) = rho.sin_cos();
    Ok(Mat3::from_rows([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]]))
}

/// Pitch/yaw of a gaze direction. Invariant to positive scaling of `g`.
pub fn vector_to_angles(g: Vec3) -> Result<GazeAngles> {
    if !g.is_finite() {
        return Err(Error::InvalidArgument("non-finite gaze vector".into()));
    }
    if g.norm() == 0.0 {
        return Err(Error::InvalidArgument("zero gaze vector".into()));
    }
    if g.z <= 0.0 {
        return Err(Error::OutOfHemisphere { z: g.z });
    }
    Ok(GazeAngles::new((-g.y).atan2(g.z), g.x.atan2(g.z)))
}

/// Unit gaze direction for the given angles; inverse of [`vector_to_angles`].
pub fn angles_to_vector(a: GazeAngles) -> Result<Vec3> {
    use std::f64::consts::FRAC_PI_2;
    if !(a.pitch.is_finite() && a.yaw.is_finite())
        || a.pitch.abs() >= FRAC_PI_2
        || a.yaw.abs() >= FRAC_PI_2
    {
        return Err(Error::InvalidArgument(format!(
            "gaze angles ({}, {}) outside the open forward hemisphere",
            a.pitch, a.yaw
        )));
    }
    Vec3::new(a.yaw.tan(), -a.pitch.tan(), 1.0)
        .normalized()
        .ok_or_else(|| Error::InvalidArgument("degenerate gaze angles".into()))
}

pub fn ccs_to_scs(e_ccs: Vec3, p: &ExtrinsicParams) -> Result<Vec3> {
    let r = pitch_rotation(p.rho)?;
    check_finite(e_ccs, p)?;
    Ok(r * e_ccs + p.t)
}

pub fn scs_to_ccs(e_scs: Vec3, p: &ExtrinsicParams) -> Result<Vec3> {
    let r = pitch_rotation(p.rho)?;
    check_finite(e_scs, p)?;
    Ok(r.transpose() * (e_scs - p.t))
}

fn check_finite(v: Vec3, p: &ExtrinsicParams) -> Result<()> {
    if v.is_finite() && p.t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument("non-finite position".into()))
    }
}

/// Intersect the gaze ray from `e_scs` with the screen plane.
pub fn project_gaze(e_scs: Vec3, a: GazeAngles, rho: f64) -> Result<ScreenPoint> {
    use std::f64::consts::FRAC_PI_2;
    if !(e_scs.z > 0.0) {
        return Err(Error::EyeBehindScreen { z: e_scs.z });
    }
    let pitch = a.pitch + rho;
    if !(pitch.abs() < FRAC_PI_2 && a.yaw.abs() < FRAC_PI_2) {
        return Err(Error::NoIntersection);
    }
    Ok(ScreenPoint::new(
        e_scs.z * a.yaw.tan() + e_scs.x,
        e_scs.z * pitch.tan() + e_scs.y,
    ))
}

pub fn normalization_transform(
    head_rot: Mat3,
    e_ccs: Vec3,
    distance: f64,
) -> Result<NormalizationTransform> {
    if !(distance > 0.0 && distance.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "normalization distance must be > 0, got {distance}"
        )));
    }
    let n = e_ccs.norm();
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::InvalidArgument("zero or non-finite eye vector".into()));
    }
    if !head_rot.is_finite() {
        return Err(Error::InvalidArgument("non-finite head rotation".into()));
    }
    let s = Mat3::diag(1.0, 1.0, distance / n);
    Ok(NormalizationTransform {
        m: s * head_rot,
        distance,
    })
}

/// `M·g`, not re-normalized.
pub fn apply_to_gaze(n: &NormalizationTransform, g: Vec3) -> Vec3 {
    n.m * g
}
