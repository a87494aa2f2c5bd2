use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::grid::VolumeGrid;
use crate::{Error, Result, Vec3};

/// Training point with labels read from the containing voxel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SamplePoint {
    pub position: Vec3,
    pub occ_label: u8,
    pub orient_label: Vec3,
    /// Drawn from the band around the occupancy boundary.
    pub near_surface: bool,
}

/// Face shared by two 6-adjacent voxels on opposite sides of the boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryFace {
    /// Lower voxel of the pair along `axis`.
    pub voxel: [usize; 3],
    pub axis: usize,
}

impl BoundaryFace {
    pub fn center(&self, grid: &VolumeGrid) -> Vec3 {
        let mut c = grid.center(self.voxel);
        c[self.axis] += grid.voxel_size()[self.axis] / 2.0;
        c
    }
}

/// Every face between an occupied and an unoccupied voxel, in raster order.
pub fn boundary_faces(grid: &VolumeGrid) -> Vec<BoundaryFace> {
    let mut out = Vec::new();
    for idx in 0..grid.len() {
        let c = grid.coords(idx);
        let occ = grid.is_occupied(idx);
        for axis in 0..3 {
            if c[axis] + 1 >= grid.dims[axis] {
                continue;
            }
            let mut n = c;
            n[axis] += 1;
            if grid.is_occupied(grid.index(n)) != occ {
                out.push(BoundaryFace { voxel: c, axis });
            }
        }
    }
    out
}

/// Draws `n` labelled points: half uniformly in the box and half within
/// `band` voxel edges of the occupancy boundary.
///
/// Near-surface points start at a random boundary face center and move by a
/// uniform offset inside a ball of radius `band` (in voxel units); offsets
/// that leave the box are redrawn. A grid without a boundary yields only
/// uniform points.
pub fn sample_points(grid: &VolumeGrid, band: f64, n: usize, seed: u64) -> Result<Vec<SamplePoint>> {
    if !n.is_multiple_of(2) {
        return Err(Error::invalid(format!("sample count must be even, got {n}")));
    }
    if !(band > 0.0 && band.is_finite()) {
        return Err(Error::invalid(format!("surface band must be positive, got {band}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (grid.bbox.lo(), grid.bbox.hi());
    let uniform = |rng: &mut ChaCha8Rng| Vec3::from_fn(|a, _| rng.random_range(lo[a]..=hi[a]));

    let faces = boundary_faces(grid);
    if faces.is_empty() {
        log::warn!("grid has no occupancy boundary; drawing all {n} points uniformly");
    }
    let size = grid.voxel_size();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let surface = i >= n / 2 && !faces.is_empty();
        let p = if surface {
            loop {
                let f = faces[rng.random_range(0..faces.len())];
                let off = loop {
                    let v = Vec3::from_fn(|_, _| rng.random_range(-1.0..=1.0));
                    if v.norm_squared() <= 1.0 {
                        break v * band;
                    }
                };
                let p = f.center(grid) + off.component_mul(&size);
                if grid.bbox.contains(&p) {
                    break p;
                }
            }
        } else {
            uniform(&mut rng)
        };
        let idx = grid.index(grid.voxel_of(&p).expect("sample lies in the box"));
        let occ = grid.is_occupied(idx);
        out.push(SamplePoint {
            position: p,
            occ_label: occ as u8,
            orient_label: if occ { grid.orientation[idx].cast() } else { Vec3::zeros() },
            near_surface: surface,
        });
    }
    Ok(out)
}
