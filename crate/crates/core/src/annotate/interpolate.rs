use std::collections::VecDeque;

use crate::image::{check_dims, Mask};
use crate::repr::StrandMap;
use crate::{Error, Result, Vec2};

const NEIGHBOURS: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

#[derive(Debug, Clone)]
pub struct Interpolated {
    pub map: StrandMap,
    /// Mask components holding no constraint, filled from the nearest
    /// constraint instead of solved.
    pub unconstrained_components: usize,
    /// Pixels whose interpolated vector vanished; encoded as `(0, 1)`.
    pub degenerate: Vec<(usize, usize)>,
}

/// Dense strand map from sparse stroke pixels.
///
/// Stroke pixels inside `mask` are Dirichlet constraints. The two direction
/// channels are filled by harmonic interpolation over the 4-connected mask
/// graph (so the mask border is a zero-flux boundary) and renormalized to
/// unit length afterwards.
pub fn interpolate_strand_map(sparse: &StrandMap, mask: &Mask) -> Result<Interpolated> {
    check_dims(mask.dims(), sparse.dims())?;
    let (w, h) = mask.dims();
    let n = w * h;

    let mut fixed: Vec<Option<Vec2>> = vec![None; n];
    let mut n_fixed = 0;
    for (x, y) in mask.pixels() {
        if let Some(d) = sparse.direction(x, y) {
            fixed[y * w + x] = Some(d);
            n_fixed += 1;
        }
    }
    if n_fixed == 0 {
        return Err(Error::invalid("no stroke pixel lies inside the hair mask"));
    }

    let neighbours = |i: usize| {
        let (x, y) = ((i % w) as i64, (i / w) as i64);
        NEIGHBOURS.iter().filter_map(move |&(dx, dy)| {
            mask.get_signed(x + dx, y + dy)
                .then(|| (y + dy) as usize * w + (x + dx) as usize)
        })
    };

    // Label mask components and note which contain a constraint.
    let mut component = vec![usize::MAX; n];
    let mut constrained = Vec::new();
    for start in 0..n {
        if !mask.as_slice()[start] || component[start] != usize::MAX {
            continue;
        }
        let id = constrained.len();
        let mut has = false;
        let mut queue = VecDeque::from([start]);
        component[start] = id;
        while let Some(i) = queue.pop_front() {
            has |= fixed[i].is_some();
            for j in neighbours(i) {
                if component[j] == usize::MAX {
                    component[j] = id;
                    queue.push_back(j);
                }
            }
        }
        constrained.push(has);
    }

    // Unknowns: free pixels in constrained components.
    let mut slot = vec![usize::MAX; n];
    let mut free = Vec::new();
    for i in 0..n {
        if mask.as_slice()[i] && fixed[i].is_none() && constrained[component[i]] {
            slot[i] = free.len();
            free.push(i);
        }
    }

    let mut values: Vec<Vec2> = vec![Vec2::zeros(); n];
    for (i, f) in fixed.iter().enumerate() {
        if let Some(d) = f {
            values[i] = *d;
        }
    }

    if !free.is_empty() {
        let rows: Vec<Row> = free
            .iter()
            .map(|&i| {
                let mut row = Row {
                    degree: 0.0,
                    coupled: Vec::new(),
                    rhs: Vec2::zeros(),
                };
                for j in neighbours(i) {
                    row.degree += 1.0;
                    match fixed[j] {
                        Some(d) => row.rhs += d,
                        None => row.coupled.push(slot[j]),
                    }
                }
                row
            })
            .collect();
        for channel in 0..2 {
            let b: Vec<f64> = rows.iter().map(|r| r.rhs[channel]).collect();
            let x = conjugate_gradient(&rows, &b);
            for (k, &i) in free.iter().enumerate() {
                values[i][channel] = x[k];
            }
        }
    }

    // Unconstrained components: copy the nearest constraint, measured as
    // 4-connected path length over the whole frame.
    let unconstrained_components = constrained.iter().filter(|&&c| !c).count();
    if unconstrained_components > 0 {
        let mut source = vec![usize::MAX; n];
        let mut queue: VecDeque<usize> = (0..n).filter(|&i| fixed[i].is_some()).collect();
        for &i in &queue {
            source[i] = i;
        }
        while let Some(i) = queue.pop_front() {
            let (x, y) = ((i % w) as i64, (i / w) as i64);
            for (dx, dy) in NEIGHBOURS {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if source[j] == usize::MAX {
                    source[j] = source[i];
                    queue.push_back(j);
                }
            }
        }
        for i in 0..n {
            if mask.as_slice()[i] && !constrained[component[i]] {
                values[i] = values[source[i]];
            }
        }
        log::warn!("{unconstrained_components} mask component(s) had no stroke; filled from nearest stroke");
    }

    let mut map = StrandMap::new(w, h);
    let mut degenerate = Vec::new();
    for (x, y) in mask.pixels() {
        let v = values[y * w + x];
        let norm = v.norm();
        if norm > 1e-12 {
            map.set_direction(x, y, v / norm);
        } else {
            map.set_direction(x, y, Vec2::new(0.0, 1.0));
            degenerate.push((x, y));
        }
    }
    Ok(Interpolated {
        map,
        unconstrained_components,
        degenerate,
    })
}

struct Row {
    degree: f64,
    coupled: Vec<usize>,
    rhs: Vec2,
}

fn apply(rows: &[Row], x: &[f64], out: &mut [f64]) {
    for (k, r) in rows.iter().enumerate() {
        out[k] = r.degree * x[k] - r.coupled.iter().map(|&j| x[j]).sum::<f64>();
    }
}

/// Jacobi-preconditioned CG on the (SPD) reduced graph Laplacian.
fn conjugate_gradient(rows: &[Row], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let b_norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if b_norm == 0.0 {
        return x;
    }
    let inv_diag: Vec<f64> = rows.iter().map(|r| 1.0 / r.degree).collect();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, b)| a * b).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let tol = 1e-12 * b_norm;

    for _ in 0..(10 * n).max(100) {
        apply(rows, &p, &mut ap);
        let alpha = rz / p.iter().zip(&ap).map(|(a, b)| a * b).sum::<f64>();
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        if r.iter().map(|v| v * v).sum::<f64>().sqrt() < tol {
            break;
        }
        for k in 0..n {
            z[k] = r[k] * inv_diag[k];
        }
        let rz_next: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_next / rz;
        rz = rz_next;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
    }
    x
}
