//! Camera poses, pose errors and correctness labels.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum absolute deviation allowed in `RᵀR − I` and `det R − 1`.
pub const ORTHONORMAL_TOL: f64 = 1e-6;

/// World-to-camera euclidean transform `[R | t]`, translation in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
}

impl Pose {
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        check_rotation(&rotation)?;
        if !translation.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidPose("translation is not finite".into()));
        }
        Ok(Self { rotation, translation })
    }

    /// Builds a pose from a row-major rotation and a translation vector.
    pub fn from_row_major(rotation: [f64; 9], translation: [f64; 3]) -> Result<Self> {
        Self::new(Matrix3::from_row_slice(&rotation), Vector3::from_column_slice(&translation))
    }

    pub fn identity() -> Self {
        Self { rotation: Matrix3::identity(), translation: Vector3::zeros() }
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3<f64> {
        &self.translation
    }

    pub fn rotation_row_major(&self) -> [f64; 9] {
        let r = &self.rotation;
        [r[(0, 0)], r[(0, 1)], r[(0, 2)], r[(1, 0)], r[(1, 1)], r[(1, 2)], r[(2, 0)], r[(2, 1)], r[(2, 2)]]
    }

    pub fn translation_array(&self) -> [f64; 3] {
        [self.translation.x, self.translation.y, self.translation.z]
    }

    /// Camera center in world coordinates, `−Rᵀt`.
    pub fn camera_center(&self) -> Vector3<f64> {
        -(self.rotation.transpose() * self.translation)
    }
}

fn check_rotation(r: &Matrix3<f64>) -> Result<()> {
    if !r.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidPose("rotation is not finite".into()));
    }
    let deviation = (r.transpose() * r - Matrix3::identity()).amax();
    if deviation > ORTHONORMAL_TOL {
        return Err(Error::InvalidPose(format!("rotation is not orthonormal (max |RᵀR − I| = {deviation:.3e})")));
    }
    let det = r.determinant();
    if (det - 1.0).abs() > ORTHONORMAL_TOL {
        return Err(Error::InvalidPose(format!("rotation determinant is {det}, expected +1")));
    }
    Ok(())
}

/// Correctness bounds: a pose is correct when both errors are strictly below them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorThreshold {
    /// Meters.
    pub max_translation: f64,
    /// Degrees.
    pub max_rotation: f64,
}

impl ErrorThreshold {
    pub fn new(max_translation: f64, max_rotation: f64) -> Result<Self> {
        if !(max_translation > 0.0 && max_translation.is_finite()) {
            return Err(Error::InvalidThreshold(format!("translation bound must be positive, got {max_translation}")));
        }
        if !(max_rotation > 0.0 && max_rotation <= 180.0) {
            return Err(Error::InvalidThreshold(format!("rotation bound must lie in (0, 180], got {max_rotation}")));
        }
        Ok(Self { max_translation, max_rotation })
    }

    /// The (1 m, 10°) bound used for training labels.
    pub fn standard() -> Self {
        Self { max_translation: 1.0, max_rotation: 10.0 }
    }
}

impl Default for ErrorThreshold {
    fn default() -> Self {
        Self::standard()
    }
}

impl std::fmt::Display for ErrorThreshold {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} m, {} deg", self.max_translation, self.max_rotation)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseError {
    /// Meters, `>= 0`.
    pub translation_error: f64,
    /// Degrees in `[0, 180]`.
    pub rotation_error: f64,
}

impl PoseError {
    pub fn between(estimated: &Pose, ground_truth: &Pose) -> Self {
        Self {
            translation_error: translation_error(estimated, ground_truth),
            rotation_error: rotation_error(estimated, ground_truth),
        }
    }
}

/// Distance between the two camera centers, in meters.
pub fn translation_error(estimated: &Pose, ground_truth: &Pose) -> f64 {
    (estimated.camera_center() - ground_truth.camera_center()).norm()
}

/// Geodesic angle between the two rotations, in degrees.
pub fn rotation_error(estimated: &Pose, ground_truth: &Pose) -> f64 {
    let relative = ground_truth.rotation.transpose() * estimated.rotation;
    let cos = ((relative.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
    cos.acos().to_degrees()
}

pub fn is_correct(error: &PoseError, threshold: &ErrorThreshold) -> bool {
    error.translation_error < threshold.max_translation && error.rotation_error < threshold.max_rotation
}
