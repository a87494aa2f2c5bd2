use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{Aabb, VolumeGrid};
use super::strand::{HairModel, Strand};
use crate::{Error, Result, Vec3};

/// Starting point and initial unit direction of one grown strand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub position: Vec3,
    pub direction: Vec3,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScalpRoots {
    pub roots: Vec<Root>,
}

impl ScalpRoots {
    /// Roots at each strand's first point, pointing along its first segment.
    pub fn from_model(model: &HairModel) -> Self {
        let roots = model
            .strands
            .iter()
            .filter(|s| s.points.len() >= 2)
            .filter_map(|s| {
                let d = (s.point(1) - s.point(0)).try_normalize(0.0)?;
                Some(Root {
                    position: s.point(0),
                    direction: d,
                })
            })
            .collect();
        Self { roots }
    }

    /// `count` roots spread uniformly over the cap of a sphere within
    /// `max_polar_deg` of `+y`, each pointing along the outward normal.
    pub fn hemisphere(center: Vec3, radius: f64, max_polar_deg: f64, count: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let min_cos = max_polar_deg.to_radians().cos();
        let roots = (0..count)
            .map(|_| {
                let n = random_cap_direction(&mut rng, min_cos);
                Root {
                    position: center + n * radius,
                    direction: n,
                }
            })
            .collect();
        Self { roots }
    }

    pub fn validate(&self, bbox: &Aabb) -> Result<()> {
        for (i, r) in self.roots.iter().enumerate() {
            if !bbox.contains(&r.position) {
                return Err(Error::invalid(format!("root {i} lies outside the bounding box")));
            }
            if (r.direction.norm() - 1.0).abs() > 1e-6 {
                return Err(Error::invalid(format!("root {i} direction is not unit length")));
            }
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::from(e).in_file(path))?;
        serde_json::from_slice(&bytes).map_err(|e| Error::from(e).in_file(path))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, serde_json::to_vec(self)?).map_err(|e| Error::from(e).in_file(path))
    }
}

/// Unit vector uniform over the spherical cap `y >= min_cos`.
pub(crate) fn random_cap_direction(rng: &mut impl Rng, min_cos: f64) -> Vec3 {
    let y: f64 = rng.random_range(min_cos..=1.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let r = (1.0 - y * y).max(0.0).sqrt();
    Vec3::new(r * phi.cos(), y, r * phi.sin())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowParams {
    /// Advance per iteration, in canonical units.
    pub step: f64,
    pub occ_threshold: f64,
    pub max_steps: usize,
    /// Weight of the previous direction in the blend.
    pub inertia: f64,
}

impl GrowParams {
    /// Defaults for a grid: half a voxel edge per step.
    pub fn for_grid(grid: &VolumeGrid) -> Self {
        Self {
            step: 0.5 * grid.voxel_size().min(),
            occ_threshold: 0.5,
            max_steps: 300,
            inertia: 0.3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::invalid(format!("step must be positive, got {}", self.step)));
        }
        if !(self.occ_threshold > 0.0 && self.occ_threshold < 1.0) {
            return Err(Error::invalid(format!(
                "occupancy threshold must lie in (0, 1), got {}",
                self.occ_threshold
            )));
        }
        if !(0.0..=1.0).contains(&self.inertia) {
            return Err(Error::invalid(format!("inertia must lie in [0, 1], got {}", self.inertia)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct Grown {
    pub model: HairModel,
    /// Index of the root each output strand grew from.
    pub root_index: Vec<usize>,
    /// Roots with zero orientation or low occupancy at the start.
    pub skipped_roots: Vec<usize>,
    /// Roots that terminated before producing a segment.
    pub dropped_roots: Vec<usize>,
    /// Number of steps that reversed the sampled orientation.
    pub flips: usize,
}

enum Outcome {
    Strand(Vec<Vec3>, usize),
    Skipped,
    Dropped,
}

/// Integrates streamlines of the orientation field from every root.
///
/// Each step blends the previous direction with the field orientation
/// (reversed when it opposes the previous direction) and advances by
/// `step`. Growth ends after the first point with occupancy below the
/// threshold or outside the box, or after `max_steps` steps; that last point
/// is kept.
pub fn grow_strands(grid: &VolumeGrid, roots: &ScalpRoots, params: &GrowParams) -> Result<Grown> {
    params.validate()?;
    let outcomes: Vec<Outcome> = roots.roots.par_iter().map(|r| grow_one(grid, r, params)).collect();

    let mut out = Grown::default();
    for (i, o) in outcomes.into_iter().enumerate() {
        match o {
            Outcome::Strand(points, flips) => {
                out.flips += flips;
                out.root_index.push(i);
                out.model.strands.push(Strand {
                    points: points.iter().map(|p| p.cast()).collect(),
                });
            }
            Outcome::Skipped => out.skipped_roots.push(i),
            Outcome::Dropped => out.dropped_roots.push(i),
        }
    }
    if !out.skipped_roots.is_empty() {
        log::warn!(
            "{} of {} roots skipped: no orientation or occupancy at the root",
            out.skipped_roots.len(),
            roots.roots.len()
        );
    }
    Ok(out)
}

fn grow_one(grid: &VolumeGrid, root: &Root, params: &GrowParams) -> Outcome {
    let Some(start) = grid.sample(&root.position) else {
        return Outcome::Skipped;
    };
    if start.occupancy < params.occ_threshold || start.orientation == Vec3::zeros() {
        return Outcome::Skipped;
    }
    let mut p = root.position;
    let mut prev = root.direction.try_normalize(0.0).unwrap_or(start.orientation);
    let mut points = vec![p];
    let mut flips = 0;
    let mut field = start;
    for _ in 0..params.max_steps {
        let mut o = field.orientation;
        if o.dot(&prev) < 0.0 {
            o = -o;
            flips += 1;
        }
        let Some(d) = (prev * params.inertia + o * (1.0 - params.inertia)).try_normalize(1e-12) else {
            break;
        };
        p += d * params.step;
        prev = d;
        points.push(p);
        match grid.sample(&p) {
            Some(s) if s.occupancy >= params.occ_threshold => field = s,
            _ => break,
        }
    }
    if points.len() < 2 {
        Outcome::Dropped
    } else {
        Outcome::Strand(points, flips)
    }
}
