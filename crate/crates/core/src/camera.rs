//! Pinhole camera model.
//!
//! A [`CameraModel`] holds zero-skew intrinsics `(fx, fy, cx, cy)`, a
//! world-to-camera rotation `R` and translation `t`, and the sensor size.
//! World points map to pixels through `P = K [R | t]`:
//!
//! ```text
//! d * (u, v, 1)^T = P * (x, y, z, 1)^T
//! ```
//!
//! Image coordinates are continuous: pixel `(i, j)` covers `[i, i+1) x [j, j+1)`,
//! so its center sits at `(i + 0.5, j + 0.5)`.

use nalgebra::{Matrix3, Matrix3x4, Point3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Orthonormality tolerance on each entry of `R * R^T - I`.
pub const ROTATION_TOLERANCE: f64 = 1e-9;

/// Points closer than this to the principal plane have no defined projection.
pub const MIN_DEPTH: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CameraModel {
    name: String,
    fx: f64,
    fy: f64,
    cx: f64,
    cy: f64,
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
    image_w: u32,
    image_h: u32,
}

/// Result of projecting a world point: continuous pixel coordinates plus the
/// homogeneous scale `d` (camera-frame depth for a calibrated camera).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelProjection {
    pub u: f64,
    pub v: f64,
    pub depth: f64,
}

impl CameraModel {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        fx: f64,
        fy: f64,
        cx: f64,
        cy: f64,
        rotation: Matrix3<f64>,
        translation: Vector3<f64>,
        image_w: u32,
        image_h: u32,
    ) -> Result<Self> {
        let name = name.into();
        if !(fx > 0.0 && fy > 0.0 && fx.is_finite() && fy.is_finite()) {
            return Err(Error::InvalidCamera(format!(
                "{name}: focal lengths must be positive and finite (fx={fx}, fy={fy})"
            )));
        }
        if !(cx.is_finite() && cy.is_finite()) {
            return Err(Error::InvalidCamera(format!(
                "{name}: principal point must be finite"
            )));
        }
        if image_w == 0 || image_h == 0 {
            return Err(Error::InvalidCamera(format!(
                "{name}: image size must be at least 1x1 (got {image_w}x{image_h})"
            )));
        }
        if translation.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidCamera(format!(
                "{name}: translation must be finite"
            )));
        }
        let deviation = rotation * rotation.transpose() - Matrix3::identity();
        if deviation
            .iter()
            .any(|d| d.is_nan() || d.abs() >= ROTATION_TOLERANCE)
        {
            return Err(Error::InvalidCamera(format!(
                "{name}: rotation is not orthonormal (max deviation {:e})",
                deviation.amax()
            )));
        }
        Ok(Self {
            name,
            fx,
            fy,
            cx,
            cy,
            rotation,
            translation,
            image_w,
            image_h,
        })
    }

    /// Identity intrinsics and pose; handy for tests and examples.
    pub fn identity(image_w: u32, image_h: u32) -> Self {
        Self::new(
            "identity",
            1.0,
            1.0,
            0.0,
            0.0,
            Matrix3::identity(),
            Vector3::zeros(),
            image_w,
            image_h,
        )
        .expect("identity camera is valid")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn fx(&self) -> f64 {
        self.fx
    }

    pub fn fy(&self) -> f64 {
        self.fy
    }

    pub fn cx(&self) -> f64 {
        self.cx
    }

    pub fn cy(&self) -> f64 {
        self.cy
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3<f64> {
        &self.translation
    }

    pub fn image_width(&self) -> u32 {
        self.image_w
    }

    pub fn image_height(&self) -> u32 {
        self.image_h
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// With a new sensor size, e.g. after downsampling the image.
    pub fn with_image_size(mut self, image_w: u32, image_h: u32) -> Result<Self> {
        if image_w == 0 || image_h == 0 {
            return Err(Error::InvalidCamera(format!(
                "{}: image size must be at least 1x1",
                self.name
            )));
        }
        self.image_w = image_w;
        self.image_h = image_h;
        Ok(self)
    }

    pub fn intrinsics(&self) -> Matrix3<f64> {
        Matrix3::new(
            self.fx, 0.0, self.cx, //
            0.0, self.fy, self.cy, //
            0.0, 0.0, 1.0,
        )
    }

    /// `P = K [R | t]`.
    pub fn projection_matrix(&self) -> Matrix3x4<f64> {
        let mut extrinsic = Matrix3x4::zeros();
        extrinsic
            .fixed_view_mut::<3, 3>(0, 0)
            .copy_from(&self.rotation);
        extrinsic
            .fixed_view_mut::<3, 1>(0, 3)
            .copy_from(&self.translation);
        self.intrinsics() * extrinsic
    }

    /// Camera center in world coordinates, `-R^T t`.
    pub fn center(&self) -> Point3<f64> {
        Point3::from(-(self.rotation.transpose() * self.translation))
    }

    /// World point expressed in the camera frame, `R X + t`.
    pub fn to_camera(&self, world: &Point3<f64>) -> Vector3<f64> {
        self.rotation * world.coords + self.translation
    }

    /// Project a world point. Fails when the point is on the principal plane.
    pub fn project_point(&self, world: &Point3<f64>) -> Result<PixelProjection> {
        let pc = self.to_camera(world);
        let depth = pc.z;
        if depth.abs() < MIN_DEPTH {
            return Err(Error::DegenerateProjection { depth });
        }
        Ok(PixelProjection {
            u: self.fx * pc.x / depth + self.cx,
            v: self.fy * pc.y / depth + self.cy,
            depth,
        })
    }

    /// In front of the camera and inside the closed rectangle
    /// `[0, bounds_w] x [0, bounds_h]`.
    pub fn is_valid(&self, world: &Point3<f64>, bounds_w: f64, bounds_h: f64) -> bool {
        match self.project_point(world) {
            Ok(p) => {
                p.depth > 0.0 && (0.0..=bounds_w).contains(&p.u) && (0.0..=bounds_h).contains(&p.v)
            }
            Err(_) => false,
        }
    }

    /// Intrinsics for an image resized by `scale` and then shifted by
    /// `(shift_u, shift_v)` pixels. Extrinsics are untouched.
    pub fn adjust_intrinsics(&self, scale: f64, shift_u: f64, shift_v: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidScale(scale));
        }
        let mut out = self.clone();
        out.fx = self.fx * scale;
        out.fy = self.fy * scale;
        out.cx = self.cx * scale + shift_u;
        out.cy = self.cy * scale + shift_v;
        Ok(out)
    }

    /// Adds `noise` to the translation vector.
    pub fn perturb_extrinsics(&self, noise: &Vector3<f64>) -> Self {
        let mut out = self.clone();
        out.translation += noise;
        out
    }

    /// Unit direction (world frame) of the ray through continuous pixel `(u, v)`.
    pub fn ray_direction(&self, u: f64, v: f64) -> Vector3<f64> {
        let cam = Vector3::new((u - self.cx) / self.fx, (v - self.cy) / self.fy, 1.0);
        (self.rotation.transpose() * cam).normalize()
    }
}

/// One camera entry of a calibration file. `R` is row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRecord {
    pub name: String,
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    #[serde(rename = "R")]
    pub rotation: [f64; 9],
    pub t: [f64; 3],
    pub width: u32,
    pub height: u32,
}

impl From<&CameraModel> for CalibrationRecord {
    fn from(cam: &CameraModel) -> Self {
        let r = cam.rotation;
        Self {
            name: cam.name.clone(),
            fx: cam.fx,
            fy: cam.fy,
            cx: cam.cx,
            cy: cam.cy,
            rotation: [
                r[(0, 0)],
                r[(0, 1)],
                r[(0, 2)],
                r[(1, 0)],
                r[(1, 1)],
                r[(1, 2)],
                r[(2, 0)],
                r[(2, 1)],
                r[(2, 2)],
            ],
            t: [cam.translation.x, cam.translation.y, cam.translation.z],
            width: cam.image_w,
            height: cam.image_h,
        }
    }
}

impl TryFrom<CalibrationRecord> for CameraModel {
    type Error = Error;

    fn try_from(rec: CalibrationRecord) -> Result<Self> {
        CameraModel::new(
            rec.name,
            rec.fx,
            rec.fy,
            rec.cx,
            rec.cy,
            Matrix3::from_row_slice(&rec.rotation),
            Vector3::from(rec.t),
            rec.width,
            rec.height,
        )
    }
}
