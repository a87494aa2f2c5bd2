use crate::image::{check_dims, Mask};
use crate::repr::{DepthMap, StrandMap};
use crate::{Error, Result, Vec2};

/// Similarity transform applied about the image center.
///
/// The source is first mirrored horizontally (if `hflip`), then rotated by
/// `rotation_deg` and scaled by `scale` around the center, then translated.
/// Rotation uses the raster frame (`+y` down), so a positive angle turns
/// `(1, 0)` toward `(0, 1)`, i.e. clockwise on screen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transform2d {
    pub rotation_deg: f64,
    pub scale: f64,
    pub translation: [f64; 2],
    pub hflip: bool,
}

impl Default for Transform2d {
    fn default() -> Self {
        Self {
            rotation_deg: 0.0,
            scale: 1.0,
            translation: [0.0, 0.0],
            hflip: false,
        }
    }
}

impl Transform2d {
    /// Maps a direction vector (no scale, no translation).
    pub fn apply_direction(&self, d: Vec2) -> Vec2 {
        let d = if self.hflip { Vec2::new(-d.x, d.y) } else { d };
        let (s, c) = self.rotation_deg.to_radians().sin_cos();
        Vec2::new(c * d.x - s * d.y, s * d.x + c * d.y)
    }

    /// Source position sampled by output pixel `q`.
    fn source_of(&self, q: Vec2, center: Vec2, width: usize) -> Vec2 {
        let (s, c) = self.rotation_deg.to_radians().sin_cos();
        let r = q - Vec2::from(self.translation) - center;
        let unrot = Vec2::new(c * r.x + s * r.y, -s * r.x + c * r.y) / self.scale + center;
        if self.hflip {
            Vec2::new((width - 1) as f64 - unrot.x, unrot.y)
        } else {
            unrot
        }
    }
}

#[derive(Debug, Clone)]
pub struct Augmented {
    pub map: StrandMap,
    pub depth: DepthMap,
    /// The transform moved every hair pixel out of frame.
    pub empty: bool,
}

/// Resamples a strand map and its depth map with the same transform, using
/// nearest-neighbour lookup so masks and stored values are never blended.
/// Directions are rotated (and mirrored) before re-encoding; depth values are
/// carried over unchanged.
pub fn augment_2d(map: &StrandMap, depth: &DepthMap, t: &Transform2d) -> Result<Augmented> {
    check_dims(map.dims(), depth.dims())?;
    if !(t.scale > 0.0 && t.scale.is_finite()) {
        return Err(Error::invalid("scale must be positive"));
    }
    let (w, h) = map.dims();
    let center = Vec2::new((w as f64 - 1.0) / 2.0, (h as f64 - 1.0) / 2.0);

    let mut out = StrandMap::new(w, h);
    let mut values = vec![0.0; w * h];
    let mut valid = Mask::new(w, h);
    for y in 0..h {
        for x in 0..w {
            let src = t.source_of(Vec2::new(x as f64, y as f64), center, w);
            let (sx, sy) = (src.x.round(), src.y.round());
            if sx < 0.0 || sy < 0.0 || sx >= w as f64 || sy >= h as f64 {
                continue;
            }
            let (sx, sy) = (sx as usize, sy as usize);
            if map.is_hair(sx, sy) {
                match map.direction(sx, sy) {
                    Some(d) => out.set_direction(x, y, t.apply_direction(d)),
                    None => out.set(x, y, [1.0, 0.5, 0.5]),
                }
            }
            if let Some(v) = depth.value(sx, sy) {
                values[y * w + x] = v;
                valid.set(x, y, true);
            }
        }
    }
    let empty = out.as_slice().iter().all(|p| p[0] < 0.5);
    let depth = DepthMap::new(valid, values, depth.d_near, depth.d_far)?;
    Ok(Augmented {
        map: out,
        depth,
        empty,
    })
}
