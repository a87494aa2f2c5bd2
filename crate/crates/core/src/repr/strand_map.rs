use std::path::Path;

use crate::image::{check_dims, Mask};
use crate::repr::DirectionField;
use crate::{Error, Result, Vec2};

/// Off-mask pixel value. `(0.5, 0.5)` in the direction channels decodes to
/// the zero vector.
pub const BACKGROUND: [f64; 3] = [0.0, 0.5, 0.5];

/// Maximum deviation from unit length accepted by [`encode_strand_map`].
const UNIT_TOLERANCE: f64 = 1e-3;

/// RGB image holding the hair mask in the first channel and the directed
/// growth direction `d` as `d / 2 + 0.5` in the other two.
///
/// Channels are stored as `f64` in `[0, 1]`; [`StrandMap::quantized`] and the
/// PNG I/O snap them to the 8-bit grid.
#[derive(Debug, Clone, PartialEq)]
pub struct StrandMap {
    width: usize,
    height: usize,
    data: Vec<[f64; 3]>,
}

impl StrandMap {
    /// All-background map.
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![BACKGROUND; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [f64; 3]) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> [f64; 3] {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, px: [f64; 3]) {
        self.data[y * self.width + x] = px;
    }

    /// Sets an on-mask pixel from a (not necessarily unit) direction.
    #[inline]
    pub fn set_direction(&mut self, x: usize, y: usize, d: Vec2) {
        self.set(x, y, encode_pixel(d));
    }

    pub fn as_slice(&self) -> &[[f64; 3]] {
        &self.data
    }

    #[inline]
    pub fn is_hair(&self, x: usize, y: usize) -> bool {
        self.get(x, y)[0] >= 0.5
    }

    /// Hair mask, thresholding the first channel at 0.5.
    pub fn mask(&self) -> Mask {
        Mask::from_vec(
            self.width,
            self.height,
            self.data.iter().map(|p| p[0] >= 0.5).collect(),
        )
        .expect("dimensions match")
    }

    /// Decoded unit direction at a pixel; `None` off the mask or when the
    /// stored vector has zero length.
    #[inline]
    pub fn direction(&self, x: usize, y: usize) -> Option<Vec2> {
        let p = self.get(x, y);
        if p[0] < 0.5 {
            return None;
        }
        let v = raw_vector(p);
        let n = v.norm();
        (n > 0.0).then(|| v / n)
    }

    /// Same map with every channel rounded to the nearest multiple of 1/255.
    pub fn quantized(&self) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .map(|p| p.map(|c| (c.clamp(0.0, 1.0) * 255.0).round() / 255.0))
                .collect(),
        }
    }

    pub fn to_rgb8(&self) -> ::image::RgbImage {
        let buf: Vec<u8> = self
            .data
            .iter()
            .flat_map(|p| p.map(|c| (c.clamp(0.0, 1.0) * 255.0).round() as u8))
            .collect();
        ::image::RgbImage::from_raw(self.width as u32, self.height as u32, buf)
            .expect("buffer size matches dimensions")
    }

    pub fn from_rgb8(img: &::image::RgbImage) -> Self {
        let (w, h) = img.dimensions();
        Self {
            width: w as usize,
            height: h as usize,
            data: img.pixels().map(|p| p.0.map(|c| c as f64 / 255.0)).collect(),
        }
    }

    /// Writes an 8-bit RGB PNG with channel order (mask, g, b).
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        self.to_rgb8()
            .save(path)
            .map_err(|e| Error::from(e).in_file(path))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let img = ::image::open(path).map_err(|e| Error::from(e).in_file(path))?;
        Ok(Self::from_rgb8(&img.to_rgb8()))
    }
}

#[inline]
fn raw_vector(p: [f64; 3]) -> Vec2 {
    Vec2::new(2.0 * p[1] - 1.0, 2.0 * p[2] - 1.0)
}

#[inline]
pub(crate) fn encode_pixel(d: Vec2) -> [f64; 3] {
    [1.0, d.x / 2.0 + 0.5, d.y / 2.0 + 0.5]
}

/// Builds a strand map from a hair mask and a unit direction per mask pixel.
pub fn encode_strand_map(mask: &Mask, dirs: &DirectionField) -> Result<StrandMap> {
    check_dims(mask.dims(), dirs.dims())?;
    let mut map = StrandMap::new(mask.width(), mask.height());
    for (x, y) in mask.pixels() {
        let d = dirs.get(x, y);
        let n = d.norm();
        if !n.is_finite() || (n - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::invalid(format!(
                "direction at ({x}, {y}) has norm {n}, expected unit length"
            )));
        }
        map.set_direction(x, y, d);
    }
    Ok(map)
}

/// Result of [`decode_strand_map`].
#[derive(Debug, Clone)]
pub struct DecodedStrandMap {
    pub mask: Mask,
    pub directions: DirectionField,
    /// Mask pixels whose stored vector had zero length; their direction is
    /// reported as `(0, 1)`.
    pub flagged: Vec<(usize, usize)>,
}

pub fn decode_strand_map(map: &StrandMap) -> DecodedStrandMap {
    let mask = map.mask();
    let mut directions = DirectionField::new(map.width(), map.height());
    let mut flagged = Vec::new();
    for (x, y) in mask.pixels() {
        match map.direction(x, y) {
            Some(d) => directions.set(x, y, d),
            None => {
                directions.set(x, y, Vec2::new(0.0, 1.0));
                flagged.push((x, y));
            }
        }
    }
    DecodedStrandMap {
        mask,
        directions,
        flagged,
    }
}

/// Per-pixel orientation modulo 180 degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct UndirectedOrientationMap {
    pub mask: Mask,
    /// Degrees in `[0, 180)`; zero off the mask.
    pub angles: Vec<f64>,
}

impl UndirectedOrientationMap {
    #[inline]
    pub fn angle(&self, x: usize, y: usize) -> Option<f64> {
        self.mask
            .get(x, y)
            .then(|| self.angles[y * self.mask.width() + x])
    }

    /// Direction-channel encoding of the orientation, picking the
    /// representative in `[0, 180)`.
    pub fn to_strand_map(&self) -> StrandMap {
        let (w, h) = self.mask.dims();
        let mut map = StrandMap::new(w, h);
        for (x, y) in self.mask.pixels() {
            let a = self.angles[y * w + x].to_radians();
            map.set_direction(x, y, Vec2::new(a.cos(), a.sin()));
        }
        map
    }
}

/// Orientation of `d` in degrees, reduced to `[0, 180)`.
pub fn undirected_angle_deg(d: Vec2) -> f64 {
    let a = d.y.atan2(d.x).to_degrees().rem_euclid(180.0);
    // rem_euclid can round up to exactly 180 for tiny negative inputs
    if a >= 180.0 {
        a - 180.0
    } else {
        a
    }
}

pub fn to_undirected(map: &StrandMap) -> UndirectedOrientationMap {
    let decoded = decode_strand_map(map);
    let (w, h) = map.dims();
    let mut angles = vec![0.0; w * h];
    for (x, y) in decoded.mask.pixels() {
        angles[y * w + x] = undirected_angle_deg(decoded.directions.get(x, y));
    }
    UndirectedOrientationMap {
        mask: decoded.mask,
        angles,
    }
}
