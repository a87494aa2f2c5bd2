//! Evaluation metrics and reference loss functions.
//!
//! Every metric over an empty region returns [`Error::Undefined`] instead of
//! a number.

use serde::{Deserialize, Serialize};

use crate::hair3d::{VolumeGrid, OCCUPIED};
use crate::image::{check_dims, Mask};
use crate::render::compute_iou;
use crate::repr::{DepthMap, StrandMap};
use crate::{Error, Result, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    /// Ranking margin.
    pub epsilon: f64,
    /// Weight of the pseudo-label prior.
    pub beta: f64,
    /// Perceptual weight; carried for completeness, no term uses it.
    pub alpha: f64,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.05,
            beta: 0.1,
            alpha: 0.1,
        }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) || !(self.beta >= 0.0) {
            return Err(Error::invalid("epsilon must be positive and beta non-negative"));
        }
        Ok(())
    }
}

/// Ordinal depth label: `r = +1` when `p1` is closer, `-1` when `p2` is.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PairLabel {
    pub p1: [u32; 2],
    pub p2: [u32; 2],
    pub r: i8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_id: Option<String>,
}

impl PairLabel {
    pub fn new(p1: [u32; 2], p2: [u32; 2], r: i8) -> Self {
        Self { p1, p2, r, image_id: None }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p1 == self.p2 {
            return Err(Error::invalid(format!("pair endpoints coincide at {:?}", self.p1)));
        }
        if self.r != 1 && self.r != -1 {
            return Err(Error::invalid(format!("pair label must be +1 or -1, got {}", self.r)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MetricReport {
    pub hair_sale: Option<f64>,
    pub hair_sale_undirected: Option<f64>,
    pub hair_rida: Option<f64>,
    pub iou: Option<f64>,
    /// Pixels in both masks.
    pub pixel_count: usize,
    /// Pairs inside both masks.
    pub pair_count: usize,
}

fn unit_or_zero(map: &StrandMap, x: usize, y: usize) -> Vec2 {
    map.direction(x, y).unwrap_or_else(Vec2::zeros)
}

fn angle_deg(a: Vec2, b: Vec2) -> f64 {
    a.dot(&b).clamp(-1.0, 1.0).acos().to_degrees()
}

fn per_pixel_angles(rendered: &StrandMap, gt: &StrandMap) -> Result<Vec<f64>> {
    check_dims(gt.dims(), rendered.dims())?;
    let (w, h) = gt.dims();
    let mut out = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if rendered.is_hair(x, y) && gt.is_hair(x, y) {
                out.push(angle_deg(unit_or_zero(rendered, x, y), unit_or_zero(gt, x, y)));
            }
        }
    }
    if out.is_empty() {
        return Err(Error::undefined("strand maps share no hair pixels"));
    }
    Ok(out)
}

/// Mean angle in degrees between decoded directions over the shared hair
/// mask, with the number of shared pixels.
pub fn hair_sale(rendered: &StrandMap, gt: &StrandMap) -> Result<(f64, usize)> {
    let angles = per_pixel_angles(rendered, gt)?;
    let k = angles.len();
    let mean = angles.iter().sum::<f64>() / k as f64;
    debug_assert!((0.0..=180.0).contains(&mean));
    Ok((mean, k))
}

/// As [`hair_sale`] but with opposite directions identified, so each pixel
/// contributes `min(θ, 180° - θ)`.
pub fn hair_sale_undirected(rendered: &StrandMap, gt: &StrandMap) -> Result<(f64, usize)> {
    let angles = per_pixel_angles(rendered, gt)?;
    let k = angles.len();
    let mean = angles.iter().map(|&t| t.min(180.0 - t)).sum::<f64>() / k as f64;
    debug_assert!((0.0..=90.0).contains(&mean));
    Ok((mean, k))
}

fn in_region(mask: &Mask, p: [u32; 2]) -> bool {
    (p[0] as usize) < mask.width() && (p[1] as usize) < mask.height() && mask.get(p[0] as usize, p[1] as usize)
}

/// Fraction of labelled pairs inside `region` whose depth order agrees with
/// the label. Equal depths count as disagreement.
pub fn hair_rida(rendered: &DepthMap, pairs: &[PairLabel], region: &Mask) -> Result<(f64, usize)> {
    check_dims(rendered.dims(), region.dims())?;
    let mut q = 0usize;
    let mut hits = 0usize;
    for pair in pairs {
        if !(in_region(region, pair.p1) && in_region(region, pair.p2)) {
            continue;
        }
        q += 1;
        let diff = depth_at(rendered, pair.p1) - depth_at(rendered, pair.p2);
        let s = if diff > 0.0 {
            1
        } else if diff < 0.0 {
            -1
        } else {
            0
        };
        if pair.r as i32 * s > 0 {
            hits += 1;
        }
    }
    if q == 0 {
        return Err(Error::undefined("no labelled pair lies inside the evaluation region"));
    }
    Ok((hits as f64 / q as f64, q))
}

#[inline]
fn depth_at(d: &DepthMap, p: [u32; 2]) -> f64 {
    d.get(p[0] as usize, p[1] as usize)
}

fn check_pairs_in_frame(depth: &DepthMap, pairs: &[PairLabel]) -> Result<()> {
    let (w, h) = depth.dims();
    for p in pairs {
        for q in [p.p1, p.p2] {
            if q[0] as usize >= w || q[1] as usize >= h {
                return Err(Error::invalid(format!("pair point {q:?} is outside the {w}x{h} depth map")));
            }
        }
    }
    Ok(())
}

/// Occupancy precision at `threshold`: the share of predicted-occupied
/// voxels that are also occupied in `gt`.
pub fn occupancy_precision(pred: &VolumeGrid, gt: &VolumeGrid, threshold: f32) -> Result<f64> {
    check_same_grid(pred, gt)?;
    let mut predicted = 0usize;
    let mut both = 0usize;
    for (&p, &g) in pred.occupancy.iter().zip(&gt.occupancy) {
        if p >= threshold {
            predicted += 1;
            if g >= threshold {
                both += 1;
            }
        }
    }
    if predicted == 0 {
        return Err(Error::undefined("prediction occupies no voxel"));
    }
    Ok(both as f64 / predicted as f64)
}

/// Mean Euclidean distance between orientations over voxels occupied in `gt`.
pub fn orientation_l2(pred: &VolumeGrid, gt: &VolumeGrid) -> Result<f64> {
    check_same_grid(pred, gt)?;
    let mut n = 0usize;
    let mut sum = 0.0;
    for idx in 0..gt.len() {
        if gt.occupancy[idx] >= OCCUPIED {
            n += 1;
            sum += (pred.orientation[idx].cast::<f64>() - gt.orientation[idx].cast::<f64>()).norm();
        }
    }
    if n == 0 {
        return Err(Error::undefined("ground truth occupies no voxel"));
    }
    Ok(sum / n as f64)
}

fn check_same_grid(a: &VolumeGrid, b: &VolumeGrid) -> Result<()> {
    if a.dims != b.dims || a.bbox != b.bbox {
        return Err(Error::invalid(format!(
            "grids differ: {:?} in {:?} vs {:?} in {:?}",
            a.dims, a.bbox, b.dims, b.bbox
        )));
    }
    Ok(())
}

/// Pixel-wise L1 distance over all three channels, normalized by three
/// times the ground-truth mask area.
pub fn l_strand_l1(pred: &StrandMap, gt: &StrandMap) -> Result<f64> {
    check_dims(gt.dims(), pred.dims())?;
    let m = gt.mask().count();
    if m == 0 {
        return Err(Error::undefined("ground-truth strand map has an empty mask"));
    }
    let sum: f64 = pred
        .as_slice()
        .iter()
        .zip(gt.as_slice())
        .map(|(a, b)| (0..3).map(|c| (a[c] - b[c]).abs()).sum::<f64>())
        .sum();
    Ok(sum / (3 * m) as f64)
}

/// Margin ranking loss averaged over `pairs`.
pub fn l_rank(depth: &DepthMap, pairs: &[PairLabel], cfg: &LossConfig) -> Result<f64> {
    cfg.validate()?;
    if pairs.is_empty() {
        return Err(Error::invalid("ranking loss needs at least one pair"));
    }
    check_pairs_in_frame(depth, pairs)?;
    let sum: f64 = pairs
        .iter()
        .map(|p| {
            let diff = depth_at(depth, p.p1) - depth_at(depth, p.p2);
            (-diff * p.r as f64 + cfg.epsilon).max(0.0)
        })
        .sum();
    Ok(sum / pairs.len() as f64)
}

/// `beta` times the mean absolute difference to the pseudo label over the
/// shared mask, plus the ranking loss.
pub fn l_depth(depth: &DepthMap, pseudo: &DepthMap, pairs: &[PairLabel], cfg: &LossConfig) -> Result<f64> {
    check_dims(depth.dims(), pseudo.dims())?;
    if depth.valid() != pseudo.valid() {
        return Err(Error::invalid("depth and pseudo-label masks differ"));
    }
    let m = depth.valid().count();
    if m == 0 {
        return Err(Error::undefined("depth mask is empty"));
    }
    let l1: f64 = depth
        .valid()
        .pixels()
        .map(|(x, y)| (depth.get(x, y) - pseudo.get(x, y)).abs())
        .sum::<f64>()
        / m as f64;
    Ok(cfg.beta * l1 + l_rank(depth, pairs, cfg)?)
}

/// Scores a predicted strand map (and optionally depth) against ground truth.
/// Metrics that are undefined for this input are left empty.
pub fn evaluate(
    rendered: &StrandMap,
    gt: &StrandMap,
    depth: Option<&DepthMap>,
    pairs: &[PairLabel],
) -> Result<MetricReport> {
    check_dims(gt.dims(), rendered.dims())?;
    let (rm, gm) = (rendered.mask(), gt.mask());
    let region = rm.intersection(&gm)?;
    let mut report = MetricReport {
        pixel_count: region.count(),
        iou: Some(compute_iou(&rm, &gm)?),
        ..Default::default()
    };
    if let Ok((a, _)) = hair_sale(rendered, gt) {
        report.hair_sale = Some(a);
        report.hair_sale_undirected = Some(hair_sale_undirected(rendered, gt)?.0);
    }
    if let Some(d) = depth {
        match hair_rida(d, pairs, &region) {
            Ok((v, q)) => {
                report.hair_rida = Some(v);
                report.pair_count = q;
            }
            Err(Error::Undefined(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hair3d::Aabb;
    use crate::Vec3;
    use nalgebra::Vector3;

    fn uniform(w: usize, h: usize, d: Vec2) -> StrandMap {
        let mut m = StrandMap::new(w, h);
        for y in 0..h {
            for x in 0..w {
                m.set_direction(x, y, d);
            }
        }
        m
    }

    #[test]
    fn hair_sale_examples() {
        let a = uniform(4, 3, Vec2::new(0.6, 0.8));
        assert_eq!(hair_sale(&a, &a).unwrap(), (0.0, 12));
        let b = uniform(4, 3, Vec2::new(-0.6, -0.8));
        assert!((hair_sale(&a, &b).unwrap().0 - 180.0).abs() < 1e-6);
        assert!(hair_sale_undirected(&a, &b).unwrap().0 < 1e-6);
        let c = uniform(4, 3, Vec2::new(-0.8, 0.6));
        assert!((hair_sale_undirected(&a, &c).unwrap().0 - 90.0).abs() < 1e-9);
        assert!(matches!(hair_sale(&a, &StrandMap::new(4, 3)), Err(Error::Undefined(_))));
        assert!(matches!(hair_sale(&a, &StrandMap::new(3, 3)), Err(Error::DimensionMismatch { .. })));
    }

    fn depth(values: Vec<f64>, w: usize, h: usize) -> DepthMap {
        DepthMap::new(Mask::from_fn(w, h, |_, _| true), values, 1.0, 2.0).unwrap()
    }

    #[test]
    fn hair_rida_examples() {
        let d = depth(vec![0.9, 0.5, 0.1, 0.5], 4, 1);
        let region = Mask::from_fn(4, 1, |x, _| x < 3);
        let pairs = vec![
            PairLabel::new([0, 0], [1, 0], 1),
            PairLabel::new([2, 0], [1, 0], -1),
            PairLabel::new([1, 0], [3, 0], 1),
        ];
        assert_eq!(hair_rida(&d, &pairs, &region).unwrap(), (1.0, 2));
        let flat = depth(vec![0.5; 4], 4, 1);
        assert_eq!(hair_rida(&flat, &pairs, &region).unwrap(), (0.0, 2));
        assert!(matches!(hair_rida(&d, &pairs[2..], &region), Err(Error::Undefined(_))));
    }

    #[test]
    fn ranking_loss_spot_values() {
        let cfg = LossConfig::default();
        let d = depth(vec![0.6, 0.5, 0.51], 3, 1);
        let p = |a: u32, b: u32, r| vec![PairLabel::new([a, 0], [b, 0], r)];
        assert!(l_rank(&d, &p(0, 1, 1), &cfg).unwrap().abs() < 1e-12);
        assert!((l_rank(&d, &p(2, 1, 1), &cfg).unwrap() - 0.04).abs() < 1e-12);
        assert!((l_rank(&d, &p(0, 1, -1), &cfg).unwrap() - 0.15).abs() < 1e-12);
        assert!(l_rank(&d, &[], &cfg).is_err());
        assert!(l_rank(&d, &p(0, 5, 1), &cfg).is_err());
    }

    #[test]
    fn depth_loss_decomposes() {
        let cfg = LossConfig::default();
        let d = depth(vec![0.5, 0.5], 2, 1);
        let pairs = vec![PairLabel::new([0, 0], [1, 0], 1)];
        assert!((l_depth(&d, &d, &pairs, &cfg).unwrap() - 0.05).abs() < 1e-12);
        let other = DepthMap::new(Mask::from_fn(2, 1, |x, _| x == 0), vec![0.5, 0.0], 1.0, 2.0).unwrap();
        assert!(l_depth(&d, &other, &pairs, &cfg).is_err());
    }

    #[test]
    fn strand_l1_single_pixel() {
        let mut gt = StrandMap::new(2, 2);
        gt.set(0, 0, [1.0, 0.5, 0.5]);
        let mut pred = gt.clone();
        assert_eq!(l_strand_l1(&pred, &gt).unwrap(), 0.0);
        pred.set(0, 0, [0.7, 0.5, 0.5]);
        assert!((l_strand_l1(&pred, &gt).unwrap() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn grid_metrics() {
        let bbox = Aabb::new(Vec3::zeros(), Vec3::repeat(4.0)).unwrap();
        let gt = VolumeGrid::from_fn([4, 4, 4], bbox, |p| {
            if p.x < 1.0 {
                (1.0, Vector3::x())
            } else {
                (0.0, Vector3::zeros())
            }
        })
        .unwrap();
        assert_eq!(occupancy_precision(&gt, &gt, 0.5).unwrap(), 1.0);
        assert_eq!(orientation_l2(&gt, &gt).unwrap(), 0.0);
        let pred = VolumeGrid::from_fn([4, 4, 4], bbox, |p| {
            if p.x < 1.0 || p.x > 3.0 {
                (1.0, Vector3::y())
            } else {
                (0.0, Vector3::zeros())
            }
        })
        .unwrap();
        assert_eq!(occupancy_precision(&pred, &gt, 0.5).unwrap(), 0.5);
        assert!((orientation_l2(&pred, &gt).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        let empty = VolumeGrid::new([4, 4, 4], bbox).unwrap();
        assert!(matches!(occupancy_precision(&empty, &gt, 0.5), Err(Error::Undefined(_))));
    }
}
