use crate::hair3d::HairModel;
use crate::image::{check_dims, Mask};
use crate::render::Camera;
use crate::repr::{DepthMap, StrandMap};
use crate::{Result, Vec2, Vec3};

#[derive(Debug, Clone)]
pub struct RenderOptions {
    /// Stroke width in pixels. Widths up to 1 cover the pixels hit by dense
    /// samples along the projected segment; wider lines cover pixel centers
    /// within half the width of the segment.
    pub line_width: f64,
    /// Camera-space depth of the near clipping plane.
    pub near: f64,
    /// Pixels removed from the hair mask after visibility (e.g. a body
    /// mask drawn in front of the hair).
    pub occluder: Option<Mask>,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            line_width: 1.0,
            near: 1e-3,
            occluder: None,
        }
    }
}

/// The segment visible at a pixel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fragment {
    /// Camera-space depth of the nearest sample of the segment in the pixel.
    pub depth: f64,
    pub strand: u32,
    pub segment: u32,
    /// Unit root-to-tip direction of the projected segment.
    pub direction: Vec2,
}

impl Fragment {
    /// Z-test order: nearer first, then lower strand and segment index.
    #[inline]
    fn beats(&self, other: &Fragment) -> bool {
        self.depth
            .total_cmp(&other.depth)
            .then(self.strand.cmp(&other.strand))
            .then(self.segment.cmp(&other.segment))
            .is_lt()
    }
}

#[derive(Debug, Clone)]
pub struct RenderOutput {
    pub strand_map: StrandMap,
    pub depth_map: DepthMap,
    /// Winning camera-space depth per pixel; `+inf` off the mask.
    pub raw_distance: Vec<f64>,
    pub mask: Mask,
    /// Winning fragment per pixel (before occluder removal).
    pub fragments: Vec<Option<Fragment>>,
    /// Nothing of the model landed in the frame.
    pub empty: bool,
    /// Segments shortened at the near plane.
    pub clipped_segments: usize,
}

/// Projects every strand segment and keeps, per pixel, the nearest one.
///
/// Distances are camera-space depths, so the depth map is a strictly
/// decreasing (min-max) function of depth over the covered pixels. Colors
/// come from the projected segment direction, root to tip.
pub fn render_hair(model: &HairModel, cam: &Camera, opts: &RenderOptions) -> Result<RenderOutput> {
    cam.validate()?;
    let (w, h) = (cam.width, cam.height);
    if let Some(occ) = &opts.occluder {
        check_dims((w, h), occ.dims())?;
    }
    let mut zbuf: Vec<Option<Fragment>> = vec![None; w * h];
    let mut clipped_segments = 0;

    let mut write = |x: i64, y: i64, frag: Fragment| {
        if x < 0 || y < 0 || x >= w as i64 || y >= h as i64 {
            return;
        }
        let slot = &mut zbuf[y as usize * w + x as usize];
        if slot.is_none_or(|cur| frag.beats(&cur)) {
            *slot = Some(frag);
        }
    };

    for (si, strand) in model.strands.iter().enumerate() {
        let pts: Vec<Vec3> = strand.points.iter().map(|p| cam.to_camera(&p.cast::<f64>())).collect();
        for (k, seg) in pts.windows(2).enumerate() {
            let (mut a, mut b) = (seg[0], seg[1]);
            if a.z < opts.near && b.z < opts.near {
                continue;
            }
            if a.z < opts.near || b.z < opts.near {
                let t = (opts.near - a.z) / (b.z - a.z);
                let p = a + (b - a) * t;
                if a.z < opts.near {
                    a = p;
                } else {
                    b = p;
                }
                a.z = a.z.max(opts.near);
                b.z = b.z.max(opts.near);
                clipped_segments += 1;
            }
            let (pa, pb) = (cam.project(&a), cam.project(&b));
            let Some(direction) = (pb - pa).try_normalize(1e-12) else {
                continue;
            };
            let (za, zb) = (a.z, b.z);
            // z along the screen-space parameter (1/z is affine in it)
            let depth_at = |s: f64| 1.0 / ((1.0 - s) / za + s / zb);
            let frag = |depth| Fragment {
                depth,
                strand: si as u32,
                segment: k as u32,
                direction,
            };
            if opts.line_width <= 1.0 {
                sample_segment(pa, pb, |x, y, s| write(x, y, frag(depth_at(s))));
            } else {
                cover_capsule(pa, pb, opts.line_width / 2.0, w, h, |x, y, s| write(x, y, frag(depth_at(s))));
            }
        }
    }

    let mut mask = Mask::new(w, h);
    let mut strand_map = StrandMap::new(w, h);
    let mut raw_distance = vec![f64::INFINITY; w * h];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let Some(f) = zbuf[i] else { continue };
            if opts.occluder.as_ref().is_some_and(|o| o.get(x, y)) {
                continue;
            }
            mask.set(x, y, true);
            strand_map.set_direction(x, y, f.direction);
            raw_distance[i] = f.depth;
        }
    }
    let empty = zbuf.iter().all(Option::is_none);
    if empty {
        log::warn!("hair model does not project into the image");
    }
    let depth_map = DepthMap::from_distances(mask.clone(), &raw_distance)?;
    Ok(RenderOutput {
        strand_map,
        depth_map,
        raw_distance,
        mask,
        fragments: zbuf,
        empty,
        clipped_segments,
    })
}

/// Minimum number of screen-space samples per segment for thin lines.
pub const SEGMENT_SAMPLES: usize = 100;

/// Visits the pixel containing each of `n + 1` evenly spaced points on the
/// segment `a -> b`, with the point's segment parameter. `n` is at least
/// [`SEGMENT_SAMPLES`] and keeps samples at most a quarter pixel apart.
/// Pixel `(i, j)` is the cell around image coordinate `(i, j)`.
pub(crate) fn sample_segment(a: Vec2, b: Vec2, mut visit: impl FnMut(i64, i64, f64)) {
    let len = (b - a).norm();
    let n = SEGMENT_SAMPLES.max((4.0 * len).ceil() as usize);
    for i in 0..=n {
        let s = i as f64 / n as f64;
        let x = a.x + (b.x - a.x) * s;
        let y = a.y + (b.y - a.y) * s;
        visit(x.round() as i64, y.round() as i64, s);
    }
}

/// Visits pixel centers within `radius` of the segment, with the segment
/// parameter of the closest point.
fn cover_capsule(a: Vec2, b: Vec2, radius: f64, w: usize, h: usize, mut visit: impl FnMut(i64, i64, f64)) {
    let d = b - a;
    let len2 = d.norm_squared();
    let x0 = (a.x.min(b.x) - radius).floor().max(0.0) as i64;
    let x1 = (a.x.max(b.x) + radius).ceil().min(w as f64 - 1.0) as i64;
    let y0 = (a.y.min(b.y) - radius).floor().max(0.0) as i64;
    let y1 = (a.y.max(b.y) + radius).ceil().min(h as f64 - 1.0) as i64;
    for y in y0..=y1 {
        for x in x0..=x1 {
            let c = Vec2::new(x as f64, y as f64);
            let s = ((c - a).dot(&d) / len2).clamp(0.0, 1.0);
            if (a + d * s - c).norm() <= radius {
                visit(x, y, s);
            }
        }
    }
}

/// Intersection over union of two masks; 1 when both are empty.
pub fn compute_iou(a: &Mask, b: &Mask) -> Result<f64> {
    check_dims(a.dims(), b.dims())?;
    let (mut inter, mut union) = (0usize, 0usize);
    for (&p, &q) in a.as_slice().iter().zip(b.as_slice()) {
        inter += (p && q) as usize;
        union += (p || q) as usize;
    }
    Ok(if union == 0 { 1.0 } else { inter as f64 / union as f64 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hair3d::Strand;
    use nalgebra::{Matrix4, Vector3};

    fn identity_cam(w: usize, h: usize) -> Camera {
        Camera::new(20.0, 20.0, (w as f64 - 1.0) / 2.0, (h as f64 - 1.0) / 2.0, Matrix4::identity(), w, h).unwrap()
    }

    fn strand(pts: &[[f32; 3]]) -> Strand {
        Strand {
            points: pts.iter().map(|p| Vector3::from(*p)).collect(),
        }
    }

    #[test]
    fn vertical_strand_renders_downward_column() {
        let model = HairModel::new(vec![strand(&[[0.0, -0.5, 2.0], [0.0, 0.5, 2.0]])]);
        let out = render_hair(&model, &identity_cam(21, 21), &RenderOptions::default()).unwrap();
        let px: Vec<_> = out.mask.pixels().collect();
        assert_eq!(px.len(), 11);
        assert!(px.iter().all(|&(x, _)| x == 10));
        for (x, y) in px {
            assert_eq!(out.strand_map.direction(x, y), Some(Vec2::new(0.0, 1.0)));
            assert_eq!(out.raw_distance[y * 21 + x], 2.0);
        }
    }

    #[test]
    fn nearer_strand_wins() {
        let far = strand(&[[-0.5, 0.0, 2.0], [0.5, 0.0, 2.0]]);
        let near = strand(&[[0.2, 0.0, 1.0], [-0.2, 0.0, 1.0]]);
        for model in [
            HairModel::new(vec![far.clone(), near.clone()]),
            HairModel::new(vec![near.clone(), far.clone()]),
        ] {
            let out = render_hair(&model, &identity_cam(21, 21), &RenderOptions::default()).unwrap();
            assert_eq!(out.raw_distance[10 * 21 + 10], 1.0);
            assert_eq!(out.strand_map.direction(10, 10), Some(Vec2::new(-1.0, 0.0)));
            assert_eq!(out.raw_distance[10 * 21 + 15], 2.0);
        }
    }

    #[test]
    fn behind_camera_is_empty() {
        let model = HairModel::new(vec![strand(&[[0.0, 0.0, -1.0], [0.0, 0.3, -2.0]])]);
        let out = render_hair(&model, &identity_cam(8, 8), &RenderOptions::default()).unwrap();
        assert!(out.empty);
        assert!(out.mask.is_empty());
    }

    #[test]
    fn near_plane_clipping() {
        let model = HairModel::new(vec![strand(&[[0.0, 0.0, -1.0], [0.0, 0.1, 1.0]])]);
        let out = render_hair(&model, &identity_cam(64, 64), &RenderOptions::default()).unwrap();
        assert_eq!(out.clipped_segments, 1);
        assert!(!out.empty);
        assert!(out.raw_distance.iter().filter(|d| d.is_finite()).all(|&d| d >= 1e-3));
    }

    #[test]
    fn occluder_removes_pixels() {
        let model = HairModel::new(vec![strand(&[[-0.5, 0.0, 2.0], [0.5, 0.0, 2.0]])]);
        let occluder = Mask::from_fn(21, 21, |x, _| x < 10);
        let opts = RenderOptions {
            occluder: Some(occluder),
            ..Default::default()
        };
        let out = render_hair(&model, &identity_cam(21, 21), &opts).unwrap();
        assert!(out.mask.pixels().all(|(x, _)| x >= 10));
        assert_eq!(out.mask, out.strand_map.mask());
        assert_eq!(&out.mask, out.depth_map.valid());
    }

    #[test]
    fn wide_lines_cover_more() {
        let model = HairModel::new(vec![strand(&[[-0.5, 0.0, 2.0], [0.5, 0.0, 2.0]])]);
        let thin = render_hair(&model, &identity_cam(21, 21), &RenderOptions::default()).unwrap();
        let thick = render_hair(
            &model,
            &identity_cam(21, 21),
            &RenderOptions {
                line_width: 3.0,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(thin.mask.count(), 11);
        assert_eq!(thick.mask.count(), 39);
    }

    #[test]
    fn samples_reach_both_ends() {
        let mut cells = Vec::new();
        sample_segment(Vec2::new(0.0, 0.0), Vec2::new(3.0, 1.2), |x, y, _| cells.push((x, y)));
        cells.dedup();
        assert_eq!(cells.first(), Some(&(0, 0)));
        assert_eq!(cells.last(), Some(&(3, 1)));
        assert!(cells.windows(2).all(|c| (c[0].0 - c[1].0).abs() + (c[0].1 - c[1].1).abs() <= 2));
        let mut n = 0;
        sample_segment(Vec2::zeros(), Vec2::new(100.0, 0.0), |_, _, _| n += 1);
        assert_eq!(n, 401);
    }

    #[test]
    fn iou_examples() {
        let a = Mask::from_fn(10, 10, |x, _| x < 5);
        let b = Mask::from_fn(10, 10, |x, _| x >= 5);
        let full = Mask::from_fn(10, 10, |_, _| true);
        assert_eq!(compute_iou(&a, &a).unwrap(), 1.0);
        assert_eq!(compute_iou(&a, &b).unwrap(), 0.0);
        assert_eq!(compute_iou(&a, &full).unwrap(), 0.5);
        assert_eq!(compute_iou(&Mask::new(3, 3), &Mask::new(3, 3)).unwrap(), 1.0);
    }
}
