use std::collections::VecDeque;

use nalgebra::Vector3;
use rayon::prelude::*;

use super::grid::{Aabb, VolumeGrid};
use super::strand::HairModel;
use crate::{Error, Result, Vec3};

#[derive(Debug, Clone)]
pub struct Voxelized {
    pub grid: VolumeGrid,
    /// Voxels whose tangent sum cancelled and took a neighbour's orientation.
    pub flagged: Vec<usize>,
    /// Strand points moved onto the box before splatting.
    pub clamped_points: usize,
}

/// Converts strands to occupancy and orientation fields.
///
/// Strands are resampled at no more than half the smallest voxel edge. Each
/// sample occupies its own voxel and every voxel whose center lies within
/// `radius` voxel edges of it, adding its unit tangent to their sums.
pub fn strands_to_fields(model: &HairModel, dims: [usize; 3], bbox: Aabb, radius: f64) -> Result<Voxelized> {
    model.validate()?;
    if !(radius >= 0.0 && radius.is_finite()) {
        return Err(Error::invalid(format!("radius must be finite and non-negative, got {radius}")));
    }
    let mut grid = VolumeGrid::new(dims, bbox)?;
    let size = grid.voxel_size();
    let spacing = 0.5 * size.min();

    let per_strand: Vec<(Vec<(Vec3, Vec3)>, usize)> = model
        .strands
        .par_iter()
        .map(|s| {
            let clamped = s.points.iter().filter(|p| !bbox.contains(&p.cast::<f64>())).count();
            (resample(s.points.iter().map(|p| bbox.clamp(&p.cast::<f64>())), spacing), clamped)
        })
        .collect();
    let clamped_points: usize = per_strand.iter().map(|(_, c)| c).sum();
    if clamped_points > 0 {
        log::warn!("{clamped_points} strand points outside the bounding box were clamped");
    }

    // Fixed strand order keeps the f64 sums reproducible.
    let mut sums = vec![Vec3::zeros(); grid.len()];
    let reach: [isize; 3] = std::array::from_fn(|_| radius.floor() as isize + 1);
    let r2 = radius * radius;
    for (samples, _) in &per_strand {
        for (p, t) in samples {
            let home = grid.voxel_of(p).expect("clamped point lies in the box");
            for dk in -reach[2]..=reach[2] {
                for dj in -reach[1]..=reach[1] {
                    for di in -reach[0]..=reach[0] {
                        let c = [home[0] as isize + di, home[1] as isize + dj, home[2] as isize + dk];
                        if (0..3).any(|a| c[a] < 0 || c[a] >= dims[a] as isize) {
                            continue;
                        }
                        let c = [c[0] as usize, c[1] as usize, c[2] as usize];
                        let own = di == 0 && dj == 0 && dk == 0;
                        if !own {
                            let d = (grid.center(c) - p).component_div(&size);
                            if d.norm_squared() > r2 {
                                continue;
                            }
                        }
                        let idx = grid.index(c);
                        grid.occupancy[idx] = 1.0;
                        sums[idx] += t;
                    }
                }
            }
        }
    }

    let mut flagged = Vec::new();
    for idx in 0..grid.len() {
        if grid.occupancy[idx] < 1.0 {
            continue;
        }
        let n = sums[idx].norm();
        if n < 1e-6 {
            flagged.push(idx);
        } else {
            grid.orientation[idx] = (sums[idx] / n).cast::<f32>();
        }
    }
    if !flagged.is_empty() {
        log::warn!("{} voxels had cancelling tangents; orientation copied from neighbours", flagged.len());
        fill_from_nearest(&mut grid, &flagged);
    }
    Ok(Voxelized {
        grid,
        flagged,
        clamped_points,
    })
}

/// Samples along the polyline with spacing at most `spacing`, each paired
/// with the unit direction of the segment it came from.
fn resample(points: impl Iterator<Item = Vec3>, spacing: f64) -> Vec<(Vec3, Vec3)> {
    let pts: Vec<Vec3> = points.collect();
    let mut out = Vec::new();
    let mut last_t = None;
    for w in pts.windows(2) {
        let d = w[1] - w[0];
        let len = d.norm();
        if len == 0.0 {
            continue;
        }
        let t = d / len;
        let k = (len / spacing).ceil().max(1.0) as usize;
        for i in 0..k {
            out.push((w[0] + d * (i as f64 / k as f64), t));
        }
        last_t = Some((w[1], t));
    }
    out.extend(last_t);
    out
}

/// Copies each flagged voxel's orientation from the closest (by 6-neighbour
/// steps) occupied voxel with a defined orientation, or `+z` if none exists.
fn fill_from_nearest(grid: &mut VolumeGrid, flagged: &[usize]) {
    let n = grid.len();
    let mut source: Vec<u32> = vec![u32::MAX; n];
    let mut queue = VecDeque::new();
    let is_flagged = {
        let mut f = vec![false; n];
        for &i in flagged {
            f[i] = true;
        }
        f
    };
    for idx in 0..n {
        if grid.is_occupied(idx) && !is_flagged[idx] {
            source[idx] = idx as u32;
            queue.push_back(idx);
        }
    }
    let dims = grid.dims;
    while let Some(idx) = queue.pop_front() {
        let c = grid.coords(idx);
        for a in 0..3 {
            for step in [-1isize, 1] {
                let v = c[a] as isize + step;
                if v < 0 || v >= dims[a] as isize {
                    continue;
                }
                let mut nc = c;
                nc[a] = v as usize;
                let nidx = grid.index(nc);
                if source[nidx] == u32::MAX {
                    source[nidx] = source[idx];
                    queue.push_back(nidx);
                }
            }
        }
    }
    for &idx in flagged {
        grid.orientation[idx] = match source[idx] {
            u32::MAX => Vector3::z(),
            s => grid.orientation[s as usize],
        };
    }
}
