use std::path::Path;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, Vec3};

/// Occupancy at or above this value counts as inside the hair volume.
pub const OCCUPIED: f32 = 0.5;

/// Axis-aligned box in canonical head space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Aabb {
    pub fn new(min: Vec3, max: Vec3) -> Result<Self> {
        let b = Self {
            min: min.into(),
            max: max.into(),
        };
        b.validate()?;
        Ok(b)
    }

    /// Cube centered on the given bounds, enlarged by `margin` on every side.
    pub fn cube_around(lo: Vec3, hi: Vec3, margin: f64) -> Result<Self> {
        let c = (lo + hi) / 2.0;
        let half = (hi - lo).max() / 2.0 + margin;
        Self::new(c.add_scalar(-half), c.add_scalar(half))
    }

    pub fn validate(&self) -> Result<()> {
        for k in 0..3 {
            if !(self.min[k].is_finite() && self.max[k].is_finite() && self.min[k] < self.max[k]) {
                return Err(Error::invalid(format!(
                    "bounding box axis {k} is empty or non-finite: [{}, {}]",
                    self.min[k], self.max[k]
                )));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn lo(&self) -> Vec3 {
        Vec3::from(self.min)
    }

    #[inline]
    pub fn hi(&self) -> Vec3 {
        Vec3::from(self.max)
    }

    #[inline]
    pub fn contains(&self, p: &Vec3) -> bool {
        (0..3).all(|k| p[k] >= self.min[k] && p[k] <= self.max[k])
    }

    #[inline]
    pub fn clamp(&self, p: &Vec3) -> Vec3 {
        p.sup(&self.lo()).inf(&self.hi())
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct GridHeader {
    dims: [usize; 3],
    bbox: Aabb,
}

/// Voxelized occupancy and orientation fields.
///
/// Voxel `(i, j, k)` is stored at `i + nx * (j + ny * k)` and its center
/// sits at `min + (index + 0.5) * voxel_size` on each axis.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeGrid {
    pub dims: [usize; 3],
    pub bbox: Aabb,
    pub occupancy: Vec<f32>,
    pub orientation: Vec<Vector3<f32>>,
}

/// Interpolated field value at a continuous position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub occupancy: f64,
    /// Unit vector, or zero where the blended orientations cancel.
    pub orientation: Vec3,
}

impl VolumeGrid {
    /// Empty grid: zero occupancy and orientation everywhere.
    pub fn new(dims: [usize; 3], bbox: Aabb) -> Result<Self> {
        bbox.validate()?;
        if dims.contains(&0) {
            return Err(Error::invalid(format!("grid dimensions must be nonzero, got {dims:?}")));
        }
        let n = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::invalid("grid is too large"))?;
        Ok(Self {
            dims,
            bbox,
            occupancy: vec![0.0; n],
            orientation: vec![Vector3::zeros(); n],
        })
    }

    /// Builds a grid by evaluating `f` at every voxel center.
    pub fn from_fn(dims: [usize; 3], bbox: Aabb, mut f: impl FnMut(Vec3) -> (f32, Vector3<f32>)) -> Result<Self> {
        let mut g = Self::new(dims, bbox)?;
        for idx in 0..g.len() {
            let (occ, o) = f(g.center(g.coords(idx)));
            g.occupancy[idx] = occ;
            g.orientation[idx] = o;
        }
        Ok(g)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.occupancy.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.occupancy.is_empty()
    }

    #[inline]
    pub fn voxel_size(&self) -> Vec3 {
        (self.bbox.hi() - self.bbox.lo()).component_div(&Vec3::new(
            self.dims[0] as f64,
            self.dims[1] as f64,
            self.dims[2] as f64,
        ))
    }

    #[inline]
    pub fn index(&self, [i, j, k]: [usize; 3]) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let [nx, ny, _] = self.dims;
        [idx % nx, (idx / nx) % ny, idx / (nx * ny)]
    }

    #[inline]
    pub fn center(&self, [i, j, k]: [usize; 3]) -> Vec3 {
        let s = self.voxel_size();
        Vec3::new(
            self.bbox.min[0] + (i as f64 + 0.5) * s.x,
            self.bbox.min[1] + (j as f64 + 0.5) * s.y,
            self.bbox.min[2] + (k as f64 + 0.5) * s.z,
        )
    }

    /// Voxel containing `p`, with positions on the far faces assigned to the
    /// last voxel. `None` outside the box.
    pub fn voxel_of(&self, p: &Vec3) -> Option<[usize; 3]> {
        if !self.bbox.contains(p) {
            return None;
        }
        let s = self.voxel_size();
        let mut out = [0; 3];
        for a in 0..3 {
            let c = ((p[a] - self.bbox.min[a]) / s[a]).floor() as isize;
            out[a] = c.clamp(0, self.dims[a] as isize - 1) as usize;
        }
        Some(out)
    }

    #[inline]
    pub fn is_occupied(&self, idx: usize) -> bool {
        self.occupancy[idx] >= OCCUPIED
    }

    pub fn occupied_count(&self) -> usize {
        self.occupancy.iter().filter(|&&o| o >= OCCUPIED).count()
    }

    /// Checks the field invariant: occupancy in `[0, 1]`, unit orientation on
    /// occupied voxels and zero orientation elsewhere.
    pub fn validate(&self) -> Result<()> {
        self.bbox.validate()?;
        let n: usize = self.dims.iter().product();
        if self.occupancy.len() != n || self.orientation.len() != n {
            return Err(Error::invalid(format!(
                "grid of {n} voxels has {} occupancy and {} orientation entries",
                self.occupancy.len(),
                self.orientation.len()
            )));
        }
        for (idx, (&occ, o)) in self.occupancy.iter().zip(&self.orientation).enumerate() {
            if !(0.0..=1.0).contains(&occ) {
                return Err(Error::invalid(format!("voxel {idx}: occupancy {occ} outside [0, 1]")));
            }
            let norm = o.norm();
            if occ >= OCCUPIED && (norm - 1.0).abs() > 1e-4 {
                return Err(Error::invalid(format!("voxel {idx}: occupied but orientation norm is {norm}")));
            }
            if occ < OCCUPIED && norm != 0.0 {
                return Err(Error::invalid(format!("voxel {idx}: empty but orientation is nonzero")));
            }
        }
        Ok(())
    }

    /// Trilinear interpolation between voxel centers, clamped to the outer
    /// centers near the faces. `None` when `p` is outside the box.
    pub fn sample(&self, p: &Vec3) -> Option<FieldSample> {
        if !self.bbox.contains(p) {
            return None;
        }
        let s = self.voxel_size();
        let mut base = [0usize; 3];
        let mut frac = [0f64; 3];
        for a in 0..3 {
            let n = self.dims[a];
            let c = ((p[a] - self.bbox.min[a]) / s[a] - 0.5).clamp(0.0, (n - 1) as f64);
            let b = (c.floor() as usize).min(n.saturating_sub(2));
            base[a] = b;
            frac[a] = c - b as f64;
        }
        let mut occ = 0.0;
        let mut o = Vec3::zeros();
        for corner in 0..8 {
            let mut w = 1.0;
            let mut at = base;
            for a in 0..3 {
                let hi = (corner >> a) & 1 == 1;
                if hi {
                    w *= frac[a];
                    at[a] = (at[a] + 1).min(self.dims[a] - 1);
                } else {
                    w *= 1.0 - frac[a];
                }
            }
            if w == 0.0 {
                continue;
            }
            let idx = self.index(at);
            occ += w * self.occupancy[idx] as f64;
            o += self.orientation[idx].cast::<f64>() * w;
        }
        let norm = o.norm();
        Some(FieldSample {
            occupancy: occ,
            orientation: if norm < 1e-6 { Vec3::zeros() } else { o / norm },
        })
    }

    /// Writes the raw little-endian voxel block (`occ, ox, oy, oz` as `f32`
    /// per voxel, x fastest) to `path` and a `{dims, bbox}` header to
    /// `path` with a `.json` extension appended.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut bytes = Vec::with_capacity(self.len() * 16);
        for (occ, o) in self.occupancy.iter().zip(&self.orientation) {
            for v in [*occ, o.x, o.y, o.z] {
                bytes.extend_from_slice(&v.to_le_bytes());
            }
        }
        std::fs::write(path, bytes).map_err(|e| Error::from(e).in_file(path))?;
        let header = GridHeader {
            dims: self.dims,
            bbox: self.bbox,
        };
        let hpath = header_path(path);
        std::fs::write(&hpath, serde_json::to_vec_pretty(&header)?).map_err(|e| Error::from(e).in_file(&hpath))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let hpath = header_path(path);
        let hbytes = std::fs::read(&hpath).map_err(|e| Error::from(e).in_file(&hpath))?;
        let header: GridHeader = serde_json::from_slice(&hbytes).map_err(|e| Error::from(e).in_file(&hpath))?;
        let mut g = Self::new(header.dims, header.bbox).map_err(|e| e.in_file(&hpath))?;
        let bytes = std::fs::read(path).map_err(|e| Error::from(e).in_file(path))?;
        let expected = g.len() * 16;
        if bytes.len() != expected {
            return Err(Error::Parse {
                offset: bytes.len().min(expected) as u64,
                message: format!("expected {expected} bytes for {:?} voxels, found {}", g.dims, bytes.len()),
            }
            .in_file(path));
        }
        for (idx, chunk) in bytes.chunks_exact(16).enumerate() {
            let f = |k: usize| f32::from_le_bytes(chunk[4 * k..4 * k + 4].try_into().unwrap());
            g.occupancy[idx] = f(0);
            g.orientation[idx] = Vector3::new(f(1), f(2), f(3));
        }
        Ok(g)
    }
}

fn header_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    s.into()
}
