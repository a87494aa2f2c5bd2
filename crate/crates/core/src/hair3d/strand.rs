use std::path::Path;

use nalgebra::Vector3;

use crate::{Error, Result, Vec3};

/// One hair strand as a root-to-tip polyline, stored at file precision.
#[derive(Debug, Clone, PartialEq)]
pub struct Strand {
    pub points: Vec<Vector3<f32>>,
}

impl Strand {
    /// Checked constructor: at least two points, finite, consecutive
    /// points distinct.
    pub fn new(points: Vec<Vector3<f32>>) -> Result<Self> {
        let s = Self { points };
        s.validate()?;
        Ok(s)
    }

    pub fn from_f64(points: &[Vec3]) -> Result<Self> {
        Self::new(points.iter().map(|p| p.cast::<f32>()).collect())
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.len() < 2 {
            return Err(Error::invalid("strand needs at least two points"));
        }
        if self.points.iter().any(|p| p.iter().any(|c| !c.is_finite())) {
            return Err(Error::invalid("strand has a non-finite coordinate"));
        }
        if self.points.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("strand has repeated consecutive points"));
        }
        Ok(())
    }

    #[inline]
    pub fn point(&self, i: usize) -> Vec3 {
        self.points[i].cast::<f64>()
    }

    pub fn length(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (w[1] - w[0]).cast::<f64>().norm())
            .sum()
    }
}

/// Ordered strand set in canonical head space.
///
/// Models read from disk keep every strand as stored, including the
/// single-vertex strands some datasets use for bald roots; geometry
/// operations simply find no segments in those.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HairModel {
    pub strands: Vec<Strand>,
}

impl HairModel {
    pub fn new(strands: Vec<Strand>) -> Self {
        Self { strands }
    }

    pub fn validate(&self) -> Result<()> {
        if self.strands.is_empty() {
            return Err(Error::invalid("hair model has no strands"));
        }
        for (i, s) in self.strands.iter().enumerate() {
            if s.points.iter().any(|p| p.iter().any(|c| !c.is_finite())) {
                return Err(Error::invalid(format!("strand {i} has a non-finite coordinate")));
            }
        }
        Ok(())
    }

    pub fn segment_count(&self) -> usize {
        self.strands.iter().map(|s| s.points.len().saturating_sub(1)).sum()
    }

    /// Axis-aligned bounds of all points, `None` for a model without points.
    pub fn bounds(&self) -> Option<(Vec3, Vec3)> {
        let mut it = self.strands.iter().flat_map(|s| s.points.iter());
        let first = it.next()?.cast::<f64>();
        Some(it.fold((first, first), |(lo, hi), p| {
            let p = p.cast::<f64>();
            (lo.inf(&p), hi.sup(&p))
        }))
    }

    /// Little-endian binary layout: `i32` strand count, then per strand an
    /// `i32` vertex count followed by `x y z` as `f32` triples.
    pub fn to_bytes(&self) -> Vec<u8> {
        let total: usize = self.strands.iter().map(|s| 4 + 12 * s.points.len()).sum();
        let mut out = Vec::with_capacity(4 + total);
        out.extend_from_slice(&(self.strands.len() as i32).to_le_bytes());
        for s in &self.strands {
            out.extend_from_slice(&(s.points.len() as i32).to_le_bytes());
            for p in &s.points {
                for c in p.iter() {
                    out.extend_from_slice(&c.to_le_bytes());
                }
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        let n = r.count("strand count")?;
        let mut strands = Vec::with_capacity(n.min(bytes.len() / 4));
        for i in 0..n {
            let nv = r.count(&format!("vertex count of strand {i}"))?;
            let need = nv as u64 * 12;
            if (bytes.len() - r.pos) as u64 >= need {
                let mut points = Vec::with_capacity(nv);
                for _ in 0..nv {
                    points.push(Vector3::new(r.f32()?, r.f32()?, r.f32()?));
                }
                strands.push(Strand { points });
            } else {
                return Err(Error::Parse {
                    offset: bytes.len() as u64,
                    message: format!(
                        "strand {i} declares {nv} vertices ({need} bytes) but only {} bytes remain",
                        bytes.len() - r.pos
                    ),
                });
            }
        }
        if r.pos != bytes.len() {
            return Err(Error::Parse {
                offset: r.pos as u64,
                message: format!("{} trailing bytes after {n} strands", bytes.len() - r.pos),
            });
        }
        Ok(Self { strands })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::from(e).in_file(path))?;
        Self::from_bytes(&bytes).map_err(|e| e.in_file(path))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::from(e).in_file(path))
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take4(&mut self, what: &str) -> Result<[u8; 4]> {
        let end = self.pos + 4;
        let Some(b) = self.bytes.get(self.pos..end) else {
            return Err(Error::Parse {
                offset: self.bytes.len() as u64,
                message: format!("file ends while reading {what}"),
            });
        };
        self.pos = end;
        Ok(b.try_into().unwrap())
    }

    fn count(&mut self, what: &str) -> Result<usize> {
        let at = self.pos;
        let v = i32::from_le_bytes(self.take4(what)?);
        if v < 0 {
            return Err(Error::Parse {
                offset: at as u64,
                message: format!("negative {what}: {v}"),
            });
        }
        Ok(v as usize)
    }

    fn f32(&mut self) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take4("vertex data")?))
    }
}
