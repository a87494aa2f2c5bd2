use std::path::Path;

use anyhow::Context;
use hairstep::hair3d::HairModel;
use hairstep::image::Mask;
use hairstep::render::{render_hair, Camera, RenderOptions, RenderOutput};
use hairstep::Vec3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::create_dir;
use crate::cli::{RenderArgs, ViewArgs};
use crate::exit;

pub(super) fn run(args: &RenderArgs) -> anyhow::Result<()> {
    let model = HairModel::load(&args.hair)?;
    model.validate().map_err(|e| exit::invalid(format!("{}: {e}", args.hair.display())))?;
    let opts = RenderOptions {
        line_width: args.line_width,
        occluder: args.occluder.as_deref().map(Mask::load).transpose()?,
        ..Default::default()
    };
    create_dir(&args.out)?;

    let mut empty = 0;
    if let Some(path) = &args.camera {
        let cam = Camera::load(path)?;
        let out = render_hair(&model, &cam, &opts)?;
        empty += out.empty as usize;
        write_outputs(&out, &args.out)?;
    } else {
        for (k, cam) in random_cameras(&model, &args.views)?.iter().enumerate() {
            let dir = args.out.join(format!("view_{k:03}"));
            create_dir(&dir)?;
            let out = render_hair(&model, cam, &opts)?;
            empty += out.empty as usize;
            write_outputs(&out, &dir)?;
            cam.save(dir.join("camera.json"))?;
        }
    }
    if empty > 0 {
        return Err(exit::empty(format!("{empty} render(s) have an empty hair mask")));
    }
    Ok(())
}

/// Orbit cameras around the model's bounding-box center with azimuth and
/// elevation drawn uniformly from the requested ranges.
pub(super) fn random_cameras(model: &HairModel, v: &ViewArgs) -> anyhow::Result<Vec<Camera>> {
    let seed = v.seed.context("random views need --seed")?;
    let (lo, hi) = model.bounds().context("model has no points")?;
    let center: Vec3 = (lo + hi) / 2.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..v.views)
        .map(|_| {
            let az = rng.random_range(v.azimuth.0..=v.azimuth.1);
            let el = rng.random_range(v.elevation.0..=v.elevation.1);
            Camera::orbit(center, v.distance, az, el, v.focal, v.width, v.height).map_err(|e| exit::invalid(e.to_string()))
        })
        .collect()
}

pub(super) fn write_outputs(out: &RenderOutput, dir: &Path) -> anyhow::Result<()> {
    out.strand_map.save(dir.join("strand_map.png"))?;
    out.depth_map.save(dir.join("depth.png"))?;
    out.mask.save(dir.join("mask.png"))?;
    if out.clipped_segments > 0 {
        log::warn!("{}: {} segments clipped at the near plane", dir.display(), out.clipped_segments);
    }
    Ok(())
}
