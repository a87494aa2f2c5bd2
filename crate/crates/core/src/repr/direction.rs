use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Vec2};

/// Per-pixel 2D direction, unit length on the hair mask and zero elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionField {
    width: usize,
    height: usize,
    data: Vec<Vec2>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    width: usize,
    height: usize,
}

impl DirectionField {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![Vec2::zeros(); width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> Vec2) -> Self {
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
    pub fn get(&self, x: usize, y: usize) -> Vec2 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: Vec2) {
        self.data[y * self.width + x] = v;
    }

    pub fn as_slice(&self) -> &[Vec2] {
        &self.data
    }

    /// Writes raw little-endian `f32` pairs (row-major) to `path` and a JSON
    /// header `{width, height}` next to it with a `.json` extension.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let header = path.with_extension("json");
        std::fs::write(
            &header,
            serde_json::to_vec_pretty(&Header {
                width: self.width,
                height: self.height,
            })?,
        )
        .map_err(|e| Error::from(e).in_file(&header))?;

        let file = File::create(path).map_err(|e| Error::from(e).in_file(path))?;
        let mut out = BufWriter::new(file);
        for v in &self.data {
            out.write_all(&(v.x as f32).to_le_bytes())?;
            out.write_all(&(v.y as f32).to_le_bytes())?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let header_path = path.with_extension("json");
        let header: Header = serde_json::from_slice(
            &std::fs::read(&header_path).map_err(|e| Error::from(e).in_file(&header_path))?,
        )
        .map_err(|e| Error::from(e).in_file(&header_path))?;

        let mut bytes = Vec::new();
        BufReader::new(File::open(path).map_err(|e| Error::from(e).in_file(path))?)
            .read_to_end(&mut bytes)?;
        let expected = header.width * header.height * 8;
        if bytes.len() != expected {
            return Err(Error::Parse {
                offset: bytes.len().min(expected) as u64,
                message: format!("expected {expected} bytes of direction data, found {}", bytes.len()),
            }
            .in_file(path));
        }
        let data = bytes
            .chunks_exact(8)
            .map(|c| {
                let x = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
                let y = f32::from_le_bytes([c[4], c[5], c[6], c[7]]);
                Vec2::new(x as f64, y as f64)
            })
            .collect();
        Ok(Self {
            width: header.width,
            height: header.height,
            data,
        })
    }
}
