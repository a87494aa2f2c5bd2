use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::image::Mask;
use crate::repr::StrandMap;
use crate::{Error, Result, Vec2};

/// Directed polylines drawn over one image, each running from hair root
/// toward the tip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StrokeSet {
    pub image_id: String,
    pub strokes: Vec<Vec<[f64; 2]>>,
}

impl StrokeSet {
    pub fn validate(&self) -> Result<()> {
        if self.strokes.is_empty() {
            return Err(Error::invalid("stroke set is empty"));
        }
        for (i, s) in self.strokes.iter().enumerate() {
            if s.len() < 2 {
                return Err(Error::invalid(format!("stroke {i} has fewer than two points")));
            }
            if s.iter().flatten().any(|c| !c.is_finite()) {
                return Err(Error::invalid(format!("stroke {i} has a non-finite coordinate")));
            }
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::from(e).in_file(path))?;
        serde_json::from_slice(&bytes).map_err(|e| Error::from(e).in_file(path))
    }
}

/// Strokes skipped by [`rasterize_strokes`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RasterizeReport {
    /// Fewer than two distinct pixels after rounding.
    pub degenerate: usize,
    /// No pixel of the stroke lands on the hair mask.
    pub off_mask: usize,
}

impl RasterizeReport {
    pub fn warnings(&self) -> usize {
        self.degenerate + self.off_mask
    }
}

#[derive(Debug, Clone)]
pub struct RasterizedStrokes {
    /// Sparse strand map: only stroke pixels are marked as hair.
    pub map: StrandMap,
    pub report: RasterizeReport,
}

/// Draws every stroke as a 1-px line colored with its local tangent.
///
/// Segment pixels take the unit segment direction; interior vertices take
/// the normalized average of the two adjoining segments. Pixels outside the
/// mask (or the frame) are dropped and later strokes overwrite earlier ones.
pub fn rasterize_strokes(strokes: &StrokeSet, mask: &Mask) -> Result<RasterizedStrokes> {
    strokes.validate()?;
    let (w, h) = mask.dims();
    let mut map = StrandMap::new(w, h);
    let mut report = RasterizeReport::default();

    for stroke in &strokes.strokes {
        // Drop vertices that collapse onto the previous pixel.
        let mut pts: Vec<(Vec2, (i64, i64))> = Vec::with_capacity(stroke.len());
        for &[x, y] in stroke {
            let px = (x.round() as i64, y.round() as i64);
            if pts.last().is_none_or(|&(_, last)| last != px) {
                pts.push((Vec2::new(x, y), px));
            }
        }
        if pts.len() < 2 {
            log::warn!("stroke collapses to a single pixel; skipped");
            report.degenerate += 1;
            continue;
        }

        let dirs: Vec<Vec2> = pts.windows(2).map(|s| (s[1].0 - s[0].0).normalize()).collect();
        let mut painted: Vec<((i64, i64), Vec2)> = Vec::new();
        for (k, seg) in pts.windows(2).enumerate() {
            for px in line_pixels(seg[0].1, seg[1].1) {
                painted.push((px, dirs[k]));
            }
        }
        for k in 1..dirs.len() {
            let avg = dirs[k - 1] + dirs[k];
            let d = if avg.norm() > 1e-12 { avg.normalize() } else { dirs[k] };
            painted.push((pts[k].1, d));
        }

        let on_mask: Vec<_> = painted
            .into_iter()
            .filter(|&((x, y), _)| mask.get_signed(x, y))
            .collect();
        if on_mask.is_empty() {
            log::warn!("stroke lies entirely outside the hair mask; skipped");
            report.off_mask += 1;
            continue;
        }
        for ((x, y), d) in on_mask {
            map.set_direction(x as usize, y as usize, d);
        }
    }
    Ok(RasterizedStrokes { map, report })
}

/// Bresenham line between two pixels, both endpoints included.
pub(crate) fn line_pixels(a: (i64, i64), b: (i64, i64)) -> Vec<(i64, i64)> {
    let (mut x, mut y) = a;
    let dx = (b.0 - a.0).abs();
    let dy = -(b.1 - a.1).abs();
    let sx = if a.0 < b.0 { 1 } else { -1 };
    let sy = if a.1 < b.1 { 1 } else { -1 };
    let mut err = dx + dy;
    let mut out = Vec::with_capacity((dx - dy + 1) as usize);
    loop {
        out.push((x, y));
        if (x, y) == b {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
    out
}
