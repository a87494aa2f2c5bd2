use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::image::{check_dims, Mask};
use crate::{Error, Result};

/// 16-bit level used for nearness 0; level 0 marks invalid pixels.
const LEVEL_OFFSET: f64 = 1.0;
const LEVEL_RANGE: f64 = 65534.0;

/// Sidecar metadata of a stored depth map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthMeta {
    pub d_near: f64,
    pub d_far: f64,
    pub width: usize,
    pub height: usize,
}

/// Nearness map over the hair region: larger values are closer to the camera.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
    valid: Mask,
    /// Camera distance mapped to nearness 1.
    pub d_near: f64,
    /// Camera distance mapped to nearness 0.
    pub d_far: f64,
}

impl DepthMap {
    /// Builds a map from nearness values; entries outside `valid` are zeroed.
    pub fn new(valid: Mask, mut values: Vec<f64>, d_near: f64, d_far: f64) -> Result<Self> {
        let (width, height) = valid.dims();
        if values.len() != width * height {
            return Err(Error::invalid(format!(
                "depth buffer has {} entries, expected {}x{}",
                values.len(),
                width,
                height
            )));
        }
        for (v, &ok) in values.iter_mut().zip(valid.as_slice()) {
            if !ok {
                *v = 0.0;
            } else if !v.is_finite() {
                return Err(Error::invalid("non-finite depth value on valid pixel"));
            }
        }
        Ok(Self {
            width,
            height,
            values,
            valid,
            d_near,
            d_far,
        })
    }

    /// Empty (all-invalid) map.
    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            values: vec![0.0; width * height],
            valid: Mask::new(width, height),
            d_near: 0.0,
            d_far: 0.0,
        }
    }

    /// Min-max nearness normalization of camera distances over `valid`:
    /// the closest pixel maps to 1, the farthest to 0. A constant distance
    /// maps to 1 everywhere.
    pub fn from_distances(valid: Mask, distances: &[f64]) -> Result<Self> {
        let (w, h) = valid.dims();
        if distances.len() != w * h {
            return Err(Error::invalid("distance buffer does not match mask"));
        }
        let (mut near, mut far) = (f64::INFINITY, f64::NEG_INFINITY);
        for (&d, &ok) in distances.iter().zip(valid.as_slice()) {
            if ok {
                near = near.min(d);
                far = far.max(d);
            }
        }
        if !near.is_finite() {
            return Ok(Self::empty(w, h));
        }
        let range = far - near;
        let values = distances
            .iter()
            .zip(valid.as_slice())
            .map(|(&d, &ok)| match (ok, range > 0.0) {
                (false, _) => 0.0,
                (true, true) => (far - d) / range,
                (true, false) => 1.0,
            })
            .collect();
        Self::new(valid, values, near, far)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    /// Value at a pixel if it is valid.
    #[inline]
    pub fn value(&self, x: usize, y: usize) -> Option<f64> {
        self.valid.get(x, y).then(|| self.get(x, y))
    }

    pub fn valid(&self) -> &Mask {
        &self.valid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn meta(&self) -> DepthMeta {
        DepthMeta {
            d_near: self.d_near,
            d_far: self.d_far,
            width: self.width,
            height: self.height,
        }
    }

    /// Same map with values snapped to the 16-bit storage grid.
    pub fn quantized(&self) -> Self {
        let values = self
            .values
            .iter()
            .zip(self.valid.as_slice())
            .map(|(&v, &ok)| if ok { (to_level(v) as f64 - LEVEL_OFFSET) / LEVEL_RANGE } else { 0.0 })
            .collect();
        Self {
            values,
            valid: self.valid.clone(),
            ..*self
        }
    }

    /// Writes a 16-bit grayscale PNG (0 = invalid) and a JSON sidecar with
    /// the same stem and a `.json` extension.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let buf: Vec<u16> = self
            .values
            .iter()
            .zip(self.valid.as_slice())
            .map(|(&v, &ok)| if ok { to_level(v) } else { 0 })
            .collect();
        ::image::ImageBuffer::<::image::Luma<u16>, _>::from_raw(
            self.width as u32,
            self.height as u32,
            buf,
        )
        .expect("buffer size matches dimensions")
        .save(path)
        .map_err(|e| Error::from(e).in_file(path))?;

        let meta_path = path.with_extension("json");
        std::fs::write(&meta_path, serde_json::to_vec_pretty(&self.meta())?)
            .map_err(|e| Error::from(e).in_file(&meta_path))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let meta_path = path.with_extension("json");
        let meta: DepthMeta = serde_json::from_slice(
            &std::fs::read(&meta_path).map_err(|e| Error::from(e).in_file(&meta_path))?,
        )
        .map_err(|e| Error::from(e).in_file(&meta_path))?;
        let img = ::image::open(path)
            .map_err(|e| Error::from(e).in_file(path))?
            .to_luma16();
        let dims = (img.width() as usize, img.height() as usize);
        check_dims((meta.width, meta.height), dims).map_err(|e| e.in_file(path))?;

        let levels: Vec<u16> = img.pixels().map(|p| p.0[0]).collect();
        let valid = Mask::from_vec(dims.0, dims.1, levels.iter().map(|&l| l > 0).collect())?;
        let values = levels
            .iter()
            .map(|&l| if l > 0 { (l as f64 - LEVEL_OFFSET) / LEVEL_RANGE } else { 0.0 })
            .collect();
        Self::new(valid, values, meta.d_near, meta.d_far)
    }
}

#[inline]
fn to_level(v: f64) -> u16 {
    (LEVEL_OFFSET + v.clamp(0.0, 1.0) * LEVEL_RANGE).round() as u16
}
