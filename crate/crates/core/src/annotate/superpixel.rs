use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::path::Path;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::image::{check_dims, GrayImage, Mask};
use crate::{Error, Result};

const NEIGHBOURS: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlicParams {
    /// Weight of spatial distance relative to intensity (intensity on a
    /// 0-100 scale).
    pub compactness: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for SlicParams {
    fn default() -> Self {
        Self {
            compactness: 10.0,
            iterations: 10,
            seed: 0,
        }
    }
}

/// Super-pixel labelling of the hair region.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperPixelMap {
    width: usize,
    height: usize,
    /// Per-pixel label, 0 off the hair mask, otherwise in `1..=count`.
    labels: Vec<u32>,
    count: u32,
    /// Unordered adjacent label pairs stored as `(low, high)`.
    adjacency: BTreeSet<(u32, u32)>,
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    count: u32,
    adjacency: Vec<[u32; 2]>,
}

impl SuperPixelMap {
    /// Wraps a label image, deriving the count and adjacency.
    pub fn from_labels(width: usize, height: usize, labels: Vec<u32>) -> Result<Self> {
        if labels.len() != width * height {
            return Err(Error::invalid("label buffer does not match dimensions"));
        }
        let count = labels.iter().copied().max().unwrap_or(0);
        let mut seen = vec![false; count as usize + 1];
        for &l in &labels {
            seen[l as usize] = true;
        }
        if let Some(l) = (1..=count as usize).find(|&l| !seen[l]) {
            return Err(Error::invalid(format!("super-pixel {l} is empty")));
        }
        let adjacency = adjacency_of(width, height, &labels);
        Ok(Self {
            width,
            height,
            labels,
            count,
            adjacency,
        })
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
    pub fn label(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn count(&self) -> u32 {
        self.count
    }

    pub fn adjacency(&self) -> &BTreeSet<(u32, u32)> {
        &self.adjacency
    }

    /// Pixels of every label in raster order; index 0 holds off-mask pixels.
    pub fn members(&self) -> Vec<Vec<(u32, u32)>> {
        let mut out = vec![Vec::new(); self.count as usize + 1];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l as usize].push(((i % self.width) as u32, (i / self.width) as u32));
        }
        out
    }

    /// Writes a 16-bit label PNG plus a `{count, adjacency}` JSON sidecar.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        if self.count > u16::MAX as u32 {
            return Err(Error::invalid("too many super-pixels for a 16-bit label image"));
        }
        let buf: Vec<u16> = self.labels.iter().map(|&l| l as u16).collect();
        ::image::ImageBuffer::<::image::Luma<u16>, _>::from_raw(
            self.width as u32,
            self.height as u32,
            buf,
        )
        .expect("buffer size matches dimensions")
        .save(path)
        .map_err(|e| Error::from(e).in_file(path))?;
        let sidecar = Sidecar {
            count: self.count,
            adjacency: self.adjacency.iter().map(|&(a, b)| [a, b]).collect(),
        };
        let side_path = path.with_extension("json");
        std::fs::write(&side_path, serde_json::to_vec_pretty(&sidecar)?)
            .map_err(|e| Error::from(e).in_file(&side_path))
    }

    /// Loads a label PNG. Adjacency is recomputed from the labels and checked
    /// against the sidecar.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let img = ::image::open(path)
            .map_err(|e| Error::from(e).in_file(path))?
            .to_luma16();
        let map = Self::from_labels(
            img.width() as usize,
            img.height() as usize,
            img.pixels().map(|p| p.0[0] as u32).collect(),
        )
        .map_err(|e| e.in_file(path))?;
        let side_path = path.with_extension("json");
        if let Ok(bytes) = std::fs::read(&side_path) {
            let side: Sidecar =
                serde_json::from_slice(&bytes).map_err(|e| Error::from(e).in_file(&side_path))?;
            let adj: BTreeSet<(u32, u32)> = side.adjacency.iter().map(|&[a, b]| (a.min(b), a.max(b))).collect();
            if side.count != map.count || adj != map.adjacency {
                return Err(Error::invalid("sidecar does not match the label image").in_file(&side_path));
            }
        }
        Ok(map)
    }
}

fn adjacency_of(width: usize, height: usize, labels: &[u32]) -> BTreeSet<(u32, u32)> {
    let mut adj = BTreeSet::new();
    for y in 0..height {
        for x in 0..width {
            let a = labels[y * width + x];
            if a == 0 {
                continue;
            }
            for (nx, ny) in [(x + 1, y), (x, y + 1)] {
                if nx < width && ny < height {
                    let b = labels[ny * width + nx];
                    if b != 0 && b != a {
                        adj.insert((a.min(b), a.max(b)));
                    }
                }
            }
        }
    }
    adj
}

/// Number of super-pixels requested for a hair region: the density-derived
/// base count scaled by the hair/face area ratio.
pub fn target_count(hair_area: usize, face_area: usize, density: f64) -> usize {
    let base = hair_area as f64 / density;
    let k = if face_area == 0 {
        base.round().max(1.0)
    } else {
        (hair_area as f64 / face_area as f64 * base).round().max(2.0)
    };
    (k as usize).min(hair_area)
}

/// SLIC-style clustering on (intensity, x, y) restricted to the hair mask.
///
/// The cluster count comes from [`target_count`]. Every returned super-pixel
/// is non-empty and 4-connected; the final count can differ from the target
/// when clusters vanish or split.
pub fn generate_superpixels(
    image: &GrayImage,
    hair: &Mask,
    face: &Mask,
    density: f64,
    params: &SlicParams,
) -> Result<SuperPixelMap> {
    check_dims(image.dims(), hair.dims())?;
    check_dims(image.dims(), face.dims())?;
    if !(density > 0.0) {
        return Err(Error::invalid("density must be positive"));
    }
    let hair_px: Vec<(usize, usize)> = hair.pixels().collect();
    if hair_px.is_empty() {
        return Err(Error::invalid("hair mask is empty"));
    }
    let face_area = face.count();
    if face_area == 0 {
        log::warn!("face mask is empty; super-pixel count falls back to hair area / density");
    }
    let k = target_count(hair_px.len(), face_area, density);
    let (w, h) = image.dims();
    let spacing = (hair_px.len() as f64 / k as f64).sqrt();

    let centers = initial_centers(hair, &hair_px, k, spacing, params.seed);
    let intensity = |x: usize, y: usize| image.get(x, y) * 100.0;
    let mut clusters: Vec<[f64; 3]> = centers
        .iter()
        .map(|&(x, y)| [intensity(x, y), x as f64, y as f64])
        .collect();

    let m2_over_s2 = (params.compactness / spacing).powi(2);
    let window = spacing.ceil() as i64;
    let mut assign = vec![u32::MAX; w * h];
    for _ in 0..params.iterations.max(1) {
        let mut best = vec![f64::INFINITY; w * h];
        assign.iter_mut().for_each(|a| *a = u32::MAX);
        for (ci, c) in clusters.iter().enumerate() {
            let (cx, cy) = (c[1].round() as i64, c[2].round() as i64);
            for y in (cy - window).max(0)..=(cy + window).min(h as i64 - 1) {
                for x in (cx - window).max(0)..=(cx + window).min(w as i64 - 1) {
                    let (xu, yu) = (x as usize, y as usize);
                    if !hair.get(xu, yu) {
                        continue;
                    }
                    let d = slic_distance(c, intensity(xu, yu), xu, yu, m2_over_s2);
                    let i = yu * w + xu;
                    if d < best[i] {
                        best[i] = d;
                        assign[i] = ci as u32;
                    }
                }
            }
        }
        // Pixels outside every search window go to the globally closest center.
        for &(x, y) in &hair_px {
            let i = y * w + x;
            if assign[i] == u32::MAX {
                let v = intensity(x, y);
                assign[i] = (0..clusters.len())
                    .min_by(|&a, &b| {
                        slic_distance(&clusters[a], v, x, y, m2_over_s2)
                            .total_cmp(&slic_distance(&clusters[b], v, x, y, m2_over_s2))
                    })
                    .unwrap() as u32;
            }
        }
        let mut sums = vec![[0.0f64; 4]; clusters.len()];
        for &(x, y) in &hair_px {
            let s = &mut sums[assign[y * w + x] as usize];
            s[0] += intensity(x, y);
            s[1] += x as f64;
            s[2] += y as f64;
            s[3] += 1.0;
        }
        for (c, s) in clusters.iter_mut().zip(&sums) {
            if s[3] > 0.0 {
                *c = [s[0] / s[3], s[1] / s[3], s[2] / s[3]];
            }
        }
    }

    let mut labels: Vec<u32> = assign
        .iter()
        .map(|&a| if a == u32::MAX { 0 } else { a + 1 })
        .collect();
    enforce_connectivity(w, h, &mut labels);
    relabel(&mut labels);
    SuperPixelMap::from_labels(w, h, labels)
}

#[inline]
fn slic_distance(c: &[f64; 3], v: f64, x: usize, y: usize, m2_over_s2: f64) -> f64 {
    let dc = c[0] - v;
    let dx = c[1] - x as f64;
    let dy = c[2] - y as f64;
    dc * dc + (dx * dx + dy * dy) * m2_over_s2
}

/// Grid seeds over the mask bounding box; trimmed with a seeded subsample
/// or topped up by farthest-point sampling to reach exactly `k`.
fn initial_centers(
    hair: &Mask,
    hair_px: &[(usize, usize)],
    k: usize,
    spacing: f64,
    seed: u64,
) -> Vec<(usize, usize)> {
    let (x0, x1) = hair_px.iter().fold((usize::MAX, 0), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let (y0, y1) = hair_px.iter().fold((usize::MAX, 0), |(a, b), p| (a.min(p.1), b.max(p.1)));
    let mut grid = Vec::new();
    let mut gy = y0 as f64 + spacing / 2.0 - 0.5;
    while gy <= y1 as f64 + 0.5 {
        let mut gx = x0 as f64 + spacing / 2.0 - 0.5;
        while gx <= x1 as f64 + 0.5 {
            let (px, py) = (gx.round() as usize, gy.round() as usize);
            if px <= x1 && py <= y1 && hair.get(px, py) && grid.last() != Some(&(px, py)) {
                grid.push((px, py));
            }
            gx += spacing;
        }
        gy += spacing;
    }
    grid.dedup();

    if grid.len() > k {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut keep = sample(&mut rng, grid.len(), k).into_vec();
        keep.sort_unstable();
        return keep.into_iter().map(|i| grid[i]).collect();
    }

    let mut min_d2: Vec<f64> = hair_px
        .iter()
        .map(|&(x, y)| {
            grid.iter()
                .map(|&(cx, cy)| dist2(x, y, cx, cy))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    while grid.len() < k {
        let (best, _) = min_d2
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, bd), (i, &d)| if d > bd { (i, d) } else { (bi, bd) });
        let c = hair_px[best];
        grid.push(c);
        for (d, &(x, y)) in min_d2.iter_mut().zip(hair_px) {
            *d = d.min(dist2(x, y, c.0, c.1));
        }
    }
    grid
}

#[inline]
fn dist2(x: usize, y: usize, cx: usize, cy: usize) -> f64 {
    let dx = x as f64 - cx as f64;
    let dy = y as f64 - cy as f64;
    dx * dx + dy * dy
}

/// 4-connected components of equal nonzero label, as (label, pixel indices).
fn components(w: usize, h: usize, labels: &[u32]) -> Vec<(u32, Vec<usize>)> {
    let mut seen = vec![false; w * h];
    let mut out = Vec::new();
    for start in 0..w * h {
        if labels[start] == 0 || seen[start] {
            continue;
        }
        let l = labels[start];
        let mut px = Vec::new();
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(i) = queue.pop_front() {
            px.push(i);
            let (x, y) = ((i % w) as i64, (i / w) as i64);
            for (dx, dy) in NEIGHBOURS {
                let (nx, ny) = (x + dx, y + dy);
                if nx >= 0 && ny >= 0 && (nx as usize) < w && (ny as usize) < h {
                    let j = ny as usize * w + nx as usize;
                    if !seen[j] && labels[j] == l {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
        out.push((l, px));
    }
    out
}

/// Keeps the largest component of each label and merges the other
/// fragments into the neighbouring label they share the longest border
/// with. Isolated fragments become labels of their own.
fn enforce_connectivity(w: usize, h: usize, labels: &mut [u32]) {
    let mut next_label = labels.iter().copied().max().unwrap_or(0) + 1;
    loop {
        let comps = components(w, h, labels);
        let mut largest: BTreeMap<u32, usize> = BTreeMap::new();
        for (ci, (l, px)) in comps.iter().enumerate() {
            let e = largest.entry(*l).or_insert(ci);
            if comps[*e].1.len() < px.len() {
                *e = ci;
            }
        }
        let mut changed = false;
        for (ci, (l, px)) in comps.iter().enumerate() {
            if largest[l] == ci {
                continue;
            }
            let mut border: BTreeMap<u32, usize> = BTreeMap::new();
            for &i in px {
                let (x, y) = ((i % w) as i64, (i / w) as i64);
                for (dx, dy) in NEIGHBOURS {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx >= 0 && ny >= 0 && (nx as usize) < w && (ny as usize) < h {
                        let o = labels[ny as usize * w + nx as usize];
                        if o != 0 && o != *l {
                            *border.entry(o).or_default() += 1;
                        }
                    }
                }
            }
            let target = match border.iter().max_by_key(|(&o, &n)| (n, std::cmp::Reverse(o))) {
                Some((&o, _)) => o,
                None => {
                    next_label += 1;
                    next_label - 1
                }
            };
            for &i in px {
                labels[i] = target;
            }
            changed = true;
        }
        if !changed {
            return;
        }
    }
}

/// Renumbers labels to `1..=count` by first occurrence in raster order.
fn relabel(labels: &mut [u32]) {
    let mut map: BTreeMap<u32, u32> = BTreeMap::new();
    for l in labels.iter_mut() {
        if *l == 0 {
            continue;
        }
        let next = map.len() as u32 + 1;
        *l = *map.entry(*l).or_insert(next);
    }
}
