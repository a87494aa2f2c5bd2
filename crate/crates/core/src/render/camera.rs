use std::path::Path;

use nalgebra::{Matrix3, Matrix4};
use serde::{Deserialize, Serialize};

use crate::{Error, Result, Vec2, Vec3};

/// Pinhole camera. Camera space is `+x` right, `+y` down, `+z` forward;
/// pixel `(i, j)` is centered on image coordinate `(i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Camera {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    /// World-to-camera rigid transform.
    pub extrinsics: Matrix4<f64>,
    pub width: usize,
    pub height: usize,
}

/// On-disk camera description.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CameraFile {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    /// Row-major 4x4 world-to-camera matrix.
    pub extrinsics: Vec<f64>,
    pub width: usize,
    pub height: usize,
}

impl Camera {
    pub fn new(
        fx: f64,
        fy: f64,
        cx: f64,
        cy: f64,
        extrinsics: Matrix4<f64>,
        width: usize,
        height: usize,
    ) -> Result<Self> {
        let cam = Self {
            fx,
            fy,
            cx,
            cy,
            extrinsics,
            width,
            height,
        };
        cam.validate()?;
        Ok(cam)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fx > 0.0 && self.fy > 0.0) {
            return Err(Error::invalid("focal lengths must be positive"));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::invalid("image size must be nonzero"));
        }
        if self.extrinsics.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("extrinsics contain non-finite values"));
        }
        let r: Matrix3<f64> = self.extrinsics.fixed_view::<3, 3>(0, 0).into_owned();
        let err = (r.transpose() * r - Matrix3::identity()).abs().max();
        if err > 1e-6 || (r.determinant() - 1.0).abs() > 1e-6 {
            return Err(Error::invalid(format!(
                "extrinsic rotation is not orthonormal (error {err:e})"
            )));
        }
        let last = self.extrinsics.row(3);
        if last[0] != 0.0 || last[1] != 0.0 || last[2] != 0.0 || last[3] != 1.0 {
            return Err(Error::invalid("extrinsics bottom row must be [0, 0, 0, 1]"));
        }
        Ok(())
    }

    /// Camera at `eye` looking at `target`; `up` fixes the roll. The focal
    /// length is in pixels and the principal point is the image center.
    pub fn look_at(eye: Vec3, target: Vec3, up: Vec3, focal: f64, width: usize, height: usize) -> Result<Self> {
        let forward = (target - eye).try_normalize(1e-12).ok_or_else(|| Error::invalid("eye equals target"))?;
        let right = forward
            .cross(&up)
            .try_normalize(1e-12)
            .ok_or_else(|| Error::invalid("up vector is parallel to the view direction"))?;
        let down = forward.cross(&right);
        let r = Matrix3::from_rows(&[right.transpose(), down.transpose(), forward.transpose()]);
        let t = -(r * eye);
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&r);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&t);
        Self::new(
            focal,
            focal,
            (width as f64 - 1.0) / 2.0,
            (height as f64 - 1.0) / 2.0,
            m,
            width,
            height,
        )
    }

    /// Camera on a sphere of `radius` around `target` with a `+y` up world.
    /// Azimuth 0 looks along `-z` from the `+z` side; elevation raises the
    /// camera toward `+y`.
    pub fn orbit(
        target: Vec3,
        radius: f64,
        azimuth_deg: f64,
        elevation_deg: f64,
        focal: f64,
        width: usize,
        height: usize,
    ) -> Result<Self> {
        let (az, el) = (azimuth_deg.to_radians(), elevation_deg.to_radians());
        let offset = Vec3::new(el.cos() * az.sin(), el.sin(), el.cos() * az.cos()) * radius;
        Self::look_at(target + offset, target, Vec3::y(), focal, width, height)
    }

    #[inline]
    pub fn to_camera(&self, p: &Vec3) -> Vec3 {
        let h = self.extrinsics * p.push(1.0);
        Vec3::new(h.x, h.y, h.z)
    }

    /// Image position of a camera-space point (`z` must be positive).
    #[inline]
    pub fn project(&self, p: &Vec3) -> Vec2 {
        Vec2::new(self.fx * p.x / p.z + self.cx, self.fy * p.y / p.z + self.cy)
    }

    pub fn to_file(&self) -> CameraFile {
        CameraFile {
            fx: self.fx,
            fy: self.fy,
            cx: self.cx,
            cy: self.cy,
            extrinsics: self.extrinsics.transpose().as_slice().to_vec(),
            width: self.width,
            height: self.height,
        }
    }

    pub fn from_file(f: &CameraFile) -> Result<Self> {
        if f.extrinsics.len() != 16 {
            return Err(Error::invalid(format!(
                "extrinsics must have 16 entries, found {}",
                f.extrinsics.len()
            )));
        }
        Self::new(
            f.fx,
            f.fy,
            f.cx,
            f.cy,
            Matrix4::from_row_slice(&f.extrinsics),
            f.width,
            f.height,
        )
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::from(e).in_file(path))?;
        let file: CameraFile = serde_json::from_slice(&bytes).map_err(|e| Error::from(e).in_file(path))?;
        Self::from_file(&file).map_err(|e| e.in_file(path))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, serde_json::to_vec_pretty(&self.to_file())?).map_err(|e| Error::from(e).in_file(path))
    }
}
