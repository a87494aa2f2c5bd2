use rayon::prelude::*;

use crate::image::{check_dims, GrayImage, Mask};
use crate::repr::UndirectedOrientationMap;
use crate::{Error, Result};

/// Gabor filter bank configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaborParams {
    /// Number of evenly spaced orientations over `[0, 180)`.
    pub num_orients: usize,
    /// Wavelength of the carrier, in pixels.
    pub wavelength: f64,
    /// Gaussian envelope standard deviation across the orientation, in pixels.
    pub sigma: f64,
    /// Envelope aspect ratio; values below 1 elongate the kernel along the
    /// orientation.
    pub aspect: f64,
}

impl Default for GaborParams {
    fn default() -> Self {
        Self {
            num_orients: 180,
            wavelength: 4.0,
            sigma: 2.0,
            aspect: 0.5,
        }
    }
}

impl GaborParams {
    fn half_size(&self) -> usize {
        (3.0 * self.sigma / self.aspect.min(1.0)).ceil() as usize
    }

    pub fn angle_deg(&self, bin: usize) -> f64 {
        bin as f64 * 180.0 / self.num_orients as f64
    }
}

/// Zero-mean even Gabor kernel tuned to lines running along `angle_deg`
/// (image convention, `+y` down). Returned row-major with side
/// `2 * half + 1`.
pub fn gabor_kernel(params: &GaborParams, angle_deg: f64) -> (usize, Vec<f64>) {
    let half = params.half_size() as i64;
    let (s, c) = angle_deg.to_radians().sin_cos();
    let two_sigma2 = 2.0 * params.sigma * params.sigma;
    let gamma2 = params.aspect * params.aspect;
    let mut k = Vec::with_capacity(((2 * half + 1) * (2 * half + 1)) as usize);
    for dy in -half..=half {
        for dx in -half..=half {
            let (x, y) = (dx as f64, dy as f64);
            let along = x * c + y * s;
            let across = -x * s + y * c;
            let env = (-(gamma2 * along * along + across * across) / two_sigma2).exp();
            k.push(env * (std::f64::consts::TAU * across / params.wavelength).cos());
        }
    }
    let mean = k.iter().sum::<f64>() / k.len() as f64;
    k.iter_mut().for_each(|v| *v -= mean);
    ((2 * half + 1) as usize, k)
}

/// Per masked pixel, the filter orientation with the largest absolute
/// response. Ties go to the smallest angle.
///
/// Responses are taken relative to the center pixel, which the zero-mean
/// kernel makes equivalent to plain correlation while keeping constant
/// regions exactly at zero response.
pub fn gabor_orientation(
    gray: &GrayImage,
    mask: &Mask,
    params: &GaborParams,
) -> Result<UndirectedOrientationMap> {
    check_dims(gray.dims(), mask.dims())?;
    if params.num_orients < 2 {
        return Err(Error::invalid("need at least two orientations"));
    }
    if !(params.wavelength > 0.0 && params.sigma > 0.0 && params.aspect > 0.0) {
        return Err(Error::invalid("gabor wavelength, sigma and aspect must be positive"));
    }
    let side = 2 * params.half_size() + 1;
    if side > gray.width() || side > gray.height() {
        return Err(Error::invalid(format!(
            "gabor kernel of {side}x{side} does not fit a {}x{} image",
            gray.width(),
            gray.height()
        )));
    }

    let bank: Vec<Vec<f64>> = (0..params.num_orients)
        .map(|b| gabor_kernel(params, params.angle_deg(b)).1)
        .collect();
    let half = params.half_size() as i64;

    let pixels: Vec<(usize, usize)> = mask.pixels().collect();
    let best: Vec<usize> = pixels
        .par_iter()
        .map(|&(x, y)| {
            let center = gray.get(x, y);
            let mut patch = Vec::with_capacity(side * side);
            for dy in -half..=half {
                for dx in -half..=half {
                    patch.push(gray.get_clamped(x as i64 + dx, y as i64 + dy) - center);
                }
            }
            let mut best_bin = 0;
            let mut best_resp = f64::NEG_INFINITY;
            for (bin, k) in bank.iter().enumerate() {
                let r = k.iter().zip(&patch).map(|(a, b)| a * b).sum::<f64>().abs();
                if r > best_resp {
                    best_resp = r;
                    best_bin = bin;
                }
            }
            best_bin
        })
        .collect();

    let w = gray.width();
    let mut angles = vec![0.0; w * gray.height()];
    for (&(x, y), &bin) in pixels.iter().zip(&best) {
        angles[y * w + x] = params.angle_deg(bin);
    }
    Ok(UndirectedOrientationMap {
        mask: mask.clone(),
        angles,
    })
}
