use std::time::Instant;

use hairstep::hair3d::{grow_strands, procedural_wig, strands_to_fields, Aabb, GrowParams, ScalpRoots, WigParams};
use hairstep::metrics::hair_sale;
use hairstep::render::{compute_iou, render_hair, Camera, RenderOptions};
use serde::Serialize;

use super::render::write_outputs;
use super::{create_dir, write_json};
use crate::cli::ClosedLoopArgs;
use crate::exit;

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ViewScore {
    pub azimuth: f64,
    pub hair_sale: f64,
    pub iou: f64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LoopReport {
    pub seed: u64,
    pub strands: usize,
    pub grown_strands: usize,
    pub occupied_voxels: usize,
    pub views: Vec<ViewScore>,
    pub mean_hair_sale: f64,
    pub mean_iou: f64,
    pub seconds: f64,
}

/// Generates a wig, converts it to fields, regrows it from its own roots and
/// compares renders of both from evenly spaced azimuths.
pub fn closed_loop(args: &ClosedLoopArgs) -> anyhow::Result<LoopReport> {
    let start = Instant::now();
    let wig = procedural_wig(
        &WigParams {
            strands: args.strands,
            ..Default::default()
        },
        args.seed,
    )?;
    let (lo, hi) = wig.bounds().expect("wig has points");
    let fields = strands_to_fields(&wig, [args.grid; 3], Aabb::cube_around(lo, hi, 0.05)?, args.radius)?;
    let grown = grow_strands(&fields.grid, &ScalpRoots::from_model(&wig), &GrowParams::for_grid(&fields.grid))?;
    if grown.model.strands.is_empty() {
        return Err(exit::empty("no strands grown"));
    }

    let target = (lo + hi) / 2.0;
    let mut views = Vec::with_capacity(args.views);
    for k in 0..args.views {
        let azimuth = 360.0 * k as f64 / args.views as f64;
        let cam = Camera::orbit(target, 6.0, azimuth, 15.0, args.focal, args.size, args.size)?;
        let a = render_hair(&wig, &cam, &RenderOptions::default())?;
        let b = render_hair(&grown.model, &cam, &RenderOptions::default())?;
        let (sale, _) = hair_sale(&a.strand_map, &b.strand_map)?;
        let iou = compute_iou(&a.mask, &b.mask)?;
        if let Some(dir) = &args.out {
            for (name, out) in [("original", &a), ("regrown", &b)] {
                let d = dir.join(format!("view_{k:03}")).join(name);
                create_dir(&d)?;
                write_outputs(out, &d)?;
            }
        }
        views.push(ViewScore {
            azimuth,
            hair_sale: sale,
            iou,
        });
    }
    let n = views.len().max(1) as f64;
    Ok(LoopReport {
        seed: args.seed,
        strands: wig.strands.len(),
        grown_strands: grown.model.strands.len(),
        occupied_voxels: fields.grid.occupied_count(),
        mean_hair_sale: views.iter().map(|v| v.hair_sale).sum::<f64>() / n,
        mean_iou: views.iter().map(|v| v.iou).sum::<f64>() / n,
        views,
        seconds: start.elapsed().as_secs_f64(),
    })
}

pub(super) fn run(args: &ClosedLoopArgs) -> anyhow::Result<()> {
    let report = closed_loop(args)?;
    if let Some(dir) = &args.out {
        create_dir(dir)?;
        write_json(&dir.join("report.json"), &report)?;
    }
    println!("{}", serde_json::to_string(&report)?);
    Ok(())
}
