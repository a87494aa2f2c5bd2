use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::grow::random_cap_direction;
use super::strand::{HairModel, Strand};
use crate::{Error, Result, Vec3};

/// Shape controls for [`procedural_wig`]. Units are head radii with the head
/// sphere centered at the origin and `+y` up.
#[derive(Debug, Clone, PartialEq)]
pub struct WigParams {
    pub strands: usize,
    /// Vertices per strand.
    pub vertices: usize,
    pub head_radius: f64,
    /// Roots cover the cap within this angle of `+y`.
    pub max_polar_deg: f64,
    pub min_length: f64,
    pub max_length: f64,
    /// Per-segment pull toward `-y`.
    pub gravity: f64,
    /// Amplitude of per-strand waviness.
    pub curl: f64,
}

impl Default for WigParams {
    fn default() -> Self {
        Self {
            strands: 2000,
            vertices: 32,
            head_radius: 1.0,
            max_polar_deg: 100.0,
            min_length: 0.8,
            max_length: 1.6,
            gravity: 0.12,
            curl: 0.15,
        }
    }
}

/// Seeded synthetic hairstyle: strands start just above a head sphere,
/// leave along the surface normal, fall under gravity and are kept outside
/// the head.
pub fn procedural_wig(params: &WigParams, seed: u64) -> Result<HairModel> {
    if params.strands == 0 || params.vertices < 2 {
        return Err(Error::invalid("a wig needs at least one strand of two vertices"));
    }
    if !(params.head_radius > 0.0 && params.min_length > 0.0 && params.min_length <= params.max_length) {
        return Err(Error::invalid("head radius and strand lengths must be positive and ordered"));
    }
    let strands = (0..params.strands)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            wig_strand(params, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HairModel::new(strands))
}

fn wig_strand(params: &WigParams, rng: &mut ChaCha8Rng) -> Result<Strand> {
    let r = params.head_radius;
    let shell = r * 1.02;
    let normal = random_cap_direction(rng, params.max_polar_deg.to_radians().cos());
    let length = rng.random_range(params.min_length..=params.max_length) * r;
    let seg = length / (params.vertices - 1) as f64;
    let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let freq: f64 = rng.random_range(2.0..5.0);

    let mut p = normal * shell;
    let mut d = normal;
    let mut points = Vec::with_capacity(params.vertices);
    points.push(p);
    for k in 1..params.vertices {
        let t = k as f64 / (params.vertices - 1) as f64;
        let side = d.cross(&Vec3::y()).try_normalize(1e-9).unwrap_or_else(Vec3::x);
        let wave = side * (params.curl * (phase + freq * std::f64::consts::TAU * t).sin());
        d = (d - Vec3::y() * params.gravity + wave * 0.3).normalize();
        let mut next = p + d * seg;
        if next.norm() < shell {
            next = next.normalize() * shell;
        }
        d = (next - p).try_normalize(1e-12).unwrap_or(d);
        p = next;
        points.push(p);
    }
    Strand::from_f64(&points)
}
