//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use hairstep::hair3d::{Aabb, HairModel, VolumeGrid};
use hairstep::image::Mask;
use hairstep::metrics::PairLabel;
use hairstep::render::Camera;
use hairstep::repr::{DepthMap, StrandMap};
use hairstep::Vec3;
use nalgebra::Vector3;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Winner of the point-splat z-test at one pixel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Splat {
    pub depth: f64,
    pub strand: u32,
    pub segment: u32,
}

fn world_to_camera(cam: &Camera, p: [f64; 3]) -> [f64; 3] {
    let m = &cam.extrinsics;
    let mut out = [0.0; 3];
    for (r, o) in out.iter_mut().enumerate() {
        *o = m[(r, 0)] * p[0] + m[(r, 1)] * p[1] + m[(r, 2)] * p[2] + m[(r, 3)];
    }
    out
}

/// Brute-force renderer: every segment is replaced by `samples + 1` points
/// evenly spaced in screen space, each splatted into the pixel that
/// contains it. Segments must lie in front of the camera.
pub fn splat_render(model: &HairModel, cam: &Camera, samples: usize) -> Vec<Option<Splat>> {
    let (w, h) = (cam.width as i64, cam.height as i64);
    let mut buf: Vec<Option<Splat>> = vec![None; (w * h) as usize];
    for (si, strand) in model.strands.iter().enumerate() {
        for k in 0..strand.points.len().saturating_sub(1) {
            let pa = strand.points[k];
            let pb = strand.points[k + 1];
            let a = world_to_camera(cam, [pa.x as f64, pa.y as f64, pa.z as f64]);
            let b = world_to_camera(cam, [pb.x as f64, pb.y as f64, pb.z as f64]);
            assert!(a[2] > 1e-3 && b[2] > 1e-3, "oracle expects geometry in front of the camera");
            let ua = [cam.fx * a[0] / a[2] + cam.cx, cam.fy * a[1] / a[2] + cam.cy];
            let ub = [cam.fx * b[0] / b[2] + cam.cx, cam.fy * b[1] / b[2] + cam.cy];
            if ua == ub {
                continue;
            }
            for i in 0..=samples {
                let s = i as f64 / samples as f64;
                let u = ua[0] + (ub[0] - ua[0]) * s;
                let v = ua[1] + (ub[1] - ua[1]) * s;
                let depth = 1.0 / ((1.0 - s) / a[2] + s / b[2]);
                let (x, y) = (u.round() as i64, v.round() as i64);
                if x < 0 || y < 0 || x >= w || y >= h {
                    continue;
                }
                let cand = Splat {
                    depth,
                    strand: si as u32,
                    segment: k as u32,
                };
                let slot = &mut buf[(y * w + x) as usize];
                let better = match slot {
                    None => true,
                    Some(cur) => (cand.depth, cand.strand, cand.segment) < (cur.depth, cur.strand, cur.segment),
                };
                if better {
                    *slot = Some(cand);
                }
            }
        }
    }
    buf
}

// ---------------------------------------------------------------- metrics

fn raw_dir(p: [f64; 3]) -> (f64, f64) {
    let (x, y) = (2.0 * p[1] - 1.0, 2.0 * p[2] - 1.0);
    let n = (x * x + y * y).sqrt();
    if n > 0.0 {
        (x / n, y / n)
    } else {
        (0.0, 0.0)
    }
}

/// Per-pixel directed angle errors in degrees over the shared mask, raster order.
pub fn angle_errors(a: &StrandMap, b: &StrandMap) -> Vec<f64> {
    let mut out = Vec::new();
    let (pa, pb) = (a.as_slice(), b.as_slice());
    for i in 0..pa.len() {
        if pa[i][0] >= 0.5 && pb[i][0] >= 0.5 {
            let (ax, ay) = raw_dir(pa[i]);
            let (bx, by) = raw_dir(pb[i]);
            let mut dot = ax * bx + ay * by;
            if dot > 1.0 {
                dot = 1.0;
            }
            if dot < -1.0 {
                dot = -1.0;
            }
            out.push(dot.acos() * 180.0 / std::f64::consts::PI);
        }
    }
    out
}

pub fn hair_sale_oracle(a: &StrandMap, b: &StrandMap) -> Option<f64> {
    let e = angle_errors(a, b);
    if e.is_empty() {
        return None;
    }
    let mut s = 0.0;
    for v in &e {
        s += v;
    }
    Some(s / e.len() as f64)
}

pub fn hair_sale_undirected_oracle(a: &StrandMap, b: &StrandMap) -> Option<f64> {
    let e = angle_errors(a, b);
    if e.is_empty() {
        return None;
    }
    let mut s = 0.0;
    for v in &e {
        s += if *v > 90.0 { 180.0 - v } else { *v };
    }
    Some(s / e.len() as f64)
}

pub fn hair_rida_oracle(d: &DepthMap, pairs: &[PairLabel], region: &Mask) -> Option<f64> {
    let (mut q, mut score) = (0u32, 0.0);
    for p in pairs {
        let inside = |c: [u32; 2]| {
            (c[0] as usize) < region.width() && (c[1] as usize) < region.height() && region.get(c[0] as usize, c[1] as usize)
        };
        if !inside(p.p1) || !inside(p.p2) {
            continue;
        }
        q += 1;
        let diff = d.get(p.p1[0] as usize, p.p1[1] as usize) - d.get(p.p2[0] as usize, p.p2[1] as usize);
        let sign = if diff == 0.0 { 0.0 } else { diff.signum() };
        score += f64::max(0.0, p.r as f64 * sign);
    }
    (q > 0).then(|| score / q as f64)
}

pub fn iou_oracle(a: &Mask, b: &Mask) -> f64 {
    let (mut inter, mut union) = (0u32, 0u32);
    for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
        inter += (*x && *y) as u32;
        union += (*x || *y) as u32;
    }
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

pub fn occupancy_precision_oracle(pred: &VolumeGrid, gt: &VolumeGrid, threshold: f32) -> Option<f64> {
    let (mut p, mut tp) = (0u64, 0u64);
    for k in 0..pred.dims[2] {
        for j in 0..pred.dims[1] {
            for i in 0..pred.dims[0] {
                let idx = i + pred.dims[0] * (j + pred.dims[1] * k);
                if pred.occupancy[idx] >= threshold {
                    p += 1;
                    if gt.occupancy[idx] >= threshold {
                        tp += 1;
                    }
                }
            }
        }
    }
    (p > 0).then(|| tp as f64 / p as f64)
}

pub fn orientation_l2_oracle(pred: &VolumeGrid, gt: &VolumeGrid) -> Option<f64> {
    let (mut n, mut s) = (0u64, 0.0);
    for idx in 0..gt.occupancy.len() {
        if gt.occupancy[idx] >= 0.5 {
            n += 1;
            let (a, b) = (pred.orientation[idx], gt.orientation[idx]);
            let dx = a.x as f64 - b.x as f64;
            let dy = a.y as f64 - b.y as f64;
            let dz = a.z as f64 - b.z as f64;
            s += (dx * dx + dy * dy + dz * dz).sqrt();
        }
    }
    (n > 0).then(|| s / n as f64)
}

pub fn l_strand_l1_oracle(pred: &StrandMap, gt: &StrandMap) -> Option<f64> {
    let (mut m, mut s) = (0u64, 0.0);
    for (p, g) in pred.as_slice().iter().zip(gt.as_slice()) {
        if g[0] >= 0.5 {
            m += 1;
        }
        for c in 0..3 {
            s += (p[c] - g[c]).abs();
        }
    }
    (m > 0).then(|| s / (3.0 * m as f64))
}

pub fn l_rank_oracle(d: &DepthMap, pairs: &[PairLabel], eps: f64) -> f64 {
    let mut s = 0.0;
    for p in pairs {
        let diff = d.get(p.p1[0] as usize, p.p1[1] as usize) - d.get(p.p2[0] as usize, p.p2[1] as usize);
        let v = -diff * p.r as f64 + eps;
        if v > 0.0 {
            s += v;
        }
    }
    s / pairs.len() as f64
}

pub fn l_depth_oracle(d: &DepthMap, pseudo: &DepthMap, pairs: &[PairLabel], eps: f64, beta: f64) -> f64 {
    let (w, h) = d.dims();
    let (mut m, mut s) = (0u64, 0.0);
    for y in 0..h {
        for x in 0..w {
            if d.valid().get(x, y) {
                m += 1;
                s += (d.get(x, y) - pseudo.get(x, y)).abs();
            }
        }
    }
    beta * (s / m as f64) + l_rank_oracle(d, pairs, eps)
}

// ---------------------------------------------------------------- random instances

pub fn random_strand_map(rng: &mut ChaCha8Rng, w: usize, h: usize, hair: f64) -> StrandMap {
    StrandMap::from_fn(w, h, |_, _| {
        if rng.random_bool(hair) {
            let t: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            [1.0, t.cos() / 2.0 + 0.5, t.sin() / 2.0 + 0.5]
        } else {
            [0.0, 0.5, 0.5]
        }
    })
}

pub fn random_depth(rng: &mut ChaCha8Rng, w: usize, h: usize, valid: f64, levels: Option<u32>) -> DepthMap {
    let mask = Mask::from_fn(w, h, |_, _| rng.random_bool(valid));
    let values = (0..w * h)
        .map(|_| match levels {
            Some(n) => rng.random_range(0..n) as f64 / n as f64,
            None => rng.random_range(0.0..1.0),
        })
        .collect();
    DepthMap::new(mask, values, 1.0, 2.0).unwrap()
}

pub fn random_pairs(rng: &mut ChaCha8Rng, w: usize, h: usize, n: usize) -> Vec<PairLabel> {
    (0..n)
        .map(|_| {
            let p1 = [rng.random_range(0..w as u32), rng.random_range(0..h as u32)];
            let mut p2 = p1;
            while p2 == p1 {
                p2 = [rng.random_range(0..w as u32), rng.random_range(0..h as u32)];
            }
            PairLabel::new(p1, p2, if rng.random_bool(0.5) { 1 } else { -1 })
        })
        .collect()
}

pub fn random_grid(rng: &mut ChaCha8Rng, dims: [usize; 3], fill: f64) -> VolumeGrid {
    let bbox = Aabb::new(Vec3::zeros(), Vec3::new(1.0, 2.0, 1.5)).unwrap();
    VolumeGrid::from_fn(dims, bbox, |_| {
        if rng.random_bool(fill) {
            let v = Vector3::new(
                rng.random_range(-1.0f32..1.0),
                rng.random_range(-1.0f32..1.0),
                rng.random_range(-1.0f32..1.0),
            );
            (rng.random_range(0.5f32..=1.0), v.normalize())
        } else {
            (rng.random_range(0.0f32..0.5), Vector3::zeros())
        }
    })
    .unwrap()
}

// ---------------------------------------------------------------- fields

/// Direct 8-corner weighted sum with explicit clamping at the outer centers.
pub fn trilinear_oracle(grid: &VolumeGrid, p: Vec3) -> (f64, [f64; 3]) {
    let size = grid.voxel_size();
    let mut lo = [0usize; 3];
    let mut hi = [0usize; 3];
    let mut t = [0f64; 3];
    for a in 0..3 {
        let n = grid.dims[a] as f64;
        let mut c = (p[a] - grid.bbox.min[a]) / size[a] - 0.5;
        if c < 0.0 {
            c = 0.0;
        }
        if c > n - 1.0 {
            c = n - 1.0;
        }
        lo[a] = c.floor() as usize;
        hi[a] = (lo[a] + 1).min(grid.dims[a] - 1);
        t[a] = c - lo[a] as f64;
    }
    let mut occ = 0.0;
    let mut o = [0.0; 3];
    for (ci, wx) in [(lo[0], 1.0 - t[0]), (hi[0], t[0])] {
        for (cj, wy) in [(lo[1], 1.0 - t[1]), (hi[1], t[1])] {
            for (ck, wz) in [(lo[2], 1.0 - t[2]), (hi[2], t[2])] {
                let w = wx * wy * wz;
                let idx = ci + grid.dims[0] * (cj + grid.dims[1] * ck);
                occ += w * grid.occupancy[idx] as f64;
                let v = grid.orientation[idx];
                o[0] += w * v.x as f64;
                o[1] += w * v.y as f64;
                o[2] += w * v.z as f64;
            }
        }
    }
    let n = (o[0] * o[0] + o[1] * o[1] + o[2] * o[2]).sqrt();
    if n < 1e-6 {
        (occ, [0.0; 3])
    } else {
        (occ, [o[0] / n, o[1] / n, o[2] / n])
    }
}

/// Distance from `p` to the nearest face between an occupied and an empty
/// voxel, by scanning every voxel pair.
pub fn distance_to_boundary(grid: &VolumeGrid, p: Vec3) -> f64 {
    let size = grid.voxel_size();
    let [nx, ny, nz] = grid.dims;
    let occ = |i: usize, j: usize, k: usize| grid.occupancy[i + nx * (j + ny * k)] >= 0.5;
    let mut best = f64::INFINITY;
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                for axis in 0..3 {
                    let (mut i2, mut j2, mut k2) = (i, j, k);
                    match axis {
                        0 => i2 += 1,
                        1 => j2 += 1,
                        _ => k2 += 1,
                    }
                    if i2 >= nx || j2 >= ny || k2 >= nz || occ(i, j, k) == occ(i2, j2, k2) {
                        continue;
                    }
                    // closest point on the axis-aligned square face
                    let lo = [
                        grid.bbox.min[0] + i as f64 * size.x,
                        grid.bbox.min[1] + j as f64 * size.y,
                        grid.bbox.min[2] + k as f64 * size.z,
                    ];
                    let mut d2 = 0.0;
                    for a in 0..3 {
                        let (fmin, fmax) = if a == axis {
                            let f = lo[a] + size[a];
                            (f, f)
                        } else {
                            (lo[a], lo[a] + size[a])
                        };
                        let q = p[a].clamp(fmin, fmax);
                        d2 += (p[a] - q) * (p[a] - q);
                    }
                    best = best.min(d2.sqrt());
                }
            }
        }
    }
    best
}

/// Grid over `[-half, half]^2 x [-2, 2]` with unit voxels holding the
/// circulating field `(-y, x, 0) / |(x, y)|` inside a torus of ring radius
/// `ring` and tube radius `tube`.
pub fn circular_field(half: f64, ring: f64, tube: f64) -> VolumeGrid {
    let n = (2.0 * half).round() as usize;
    let bbox = Aabb::new(Vec3::new(-half, -half, -2.0), Vec3::new(half, half, 2.0)).unwrap();
    VolumeGrid::from_fn([n, n, 4], bbox, |p| {
        let r = (p.x * p.x + p.y * p.y).sqrt();
        let inside = ((r - ring).powi(2) + p.z * p.z).sqrt() <= tube;
        if inside && r > 0.0 {
            (1.0, Vector3::new((-p.y / r) as f32, (p.x / r) as f32, 0.0))
        } else {
            (0.0, Vector3::zeros())
        }
    })
    .unwrap()
}

// ---------------------------------------------------------------- interpolation

/// Solves the Laplace equation for both direction components over `mask`
/// with Dirichlet values at constrained pixels and reflecting boundaries,
/// by successive over-relaxation until the update falls below `tol`.
pub fn laplace_fill(mask: &Mask, constraints: &[(usize, usize, f64, f64)], tol: f64) -> Vec<Option<(f64, f64)>> {
    let (w, h) = mask.dims();
    let mut fixed = vec![false; w * h];
    let mut u = vec![[0.0f64; 2]; w * h];
    for &(x, y, dx, dy) in constraints {
        fixed[y * w + x] = true;
        u[y * w + x] = [dx, dy];
    }
    let omega = 1.9;
    loop {
        let mut change: f64 = 0.0;
        for y in 0..h {
            for x in 0..w {
                let i = y * w + x;
                if !mask.get(x, y) || fixed[i] {
                    continue;
                }
                let mut sum = [0.0; 2];
                let mut n = 0.0;
                let nbrs = [(x.wrapping_sub(1), y), (x + 1, y), (x, y.wrapping_sub(1)), (x, y + 1)];
                for (nx, ny) in nbrs {
                    if nx < w && ny < h && mask.get(nx, ny) {
                        let v = u[ny * w + nx];
                        sum[0] += v[0];
                        sum[1] += v[1];
                        n += 1.0;
                    }
                }
                if n == 0.0 {
                    continue;
                }
                for c in 0..2 {
                    let new = u[i][c] + omega * (sum[c] / n - u[i][c]);
                    change = change.max((new - u[i][c]).abs());
                    u[i][c] = new;
                }
            }
        }
        if change < tol {
            break;
        }
    }
    (0..w * h)
        .map(|i| mask.as_slice()[i].then(|| (u[i][0], u[i][1])))
        .collect()
}
