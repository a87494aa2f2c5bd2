use hairstep::hair3d::{
    grow_strands, procedural_wig, sample_points, strands_to_fields, Aabb, GrowParams, HairModel, ScalpRoots,
    VolumeGrid, WigParams,
};
use hairstep::Vec3;

use super::write_jsonl;
use crate::cli::{GrowArgs, Strands2fieldsArgs, SynthWigArgs};
use crate::exit;

pub(super) fn strands2fields(args: &Strands2fieldsArgs) -> anyhow::Result<()> {
    let model = HairModel::load(&args.hair)?;
    let bbox = match args.bbox {
        Some(b) => Aabb::new(Vec3::new(b[0], b[1], b[2]), Vec3::new(b[3], b[4], b[5]))?,
        None => {
            let (lo, hi) = model.bounds().ok_or_else(|| exit::invalid("strand model is empty"))?;
            Aabb::cube_around(lo, hi, args.margin)?
        }
    };
    let v = strands_to_fields(&model, args.dims, bbox, args.radius)?;
    log::info!(
        "{} of {} voxels occupied, {} orientations borrowed from neighbours",
        v.grid.occupied_count(),
        v.grid.len(),
        v.flagged.len()
    );
    v.grid.save(&args.out)?;

    if let (Some(n), Some(seed), Some(path)) = (args.samples, args.seed, &args.samples_out) {
        let points = sample_points(&v.grid, args.band, n, seed)?;
        write_jsonl(path, &points)?;
    }
    Ok(())
}

pub(super) fn grow(args: &GrowArgs) -> anyhow::Result<()> {
    let grid = VolumeGrid::load(&args.fields)?;
    let roots = match (&args.roots, &args.roots_from) {
        (Some(path), _) => ScalpRoots::load(path)?,
        (None, Some(path)) => ScalpRoots::from_model(&HairModel::load(path)?),
        (None, None) => unreachable!("clap requires one root source"),
    };
    roots.validate(&grid.bbox)?;
    let params = GrowParams {
        step: args.step.unwrap_or_else(|| GrowParams::for_grid(&grid).step),
        occ_threshold: args.threshold,
        max_steps: args.max_steps,
        inertia: args.inertia,
    };
    let grown = grow_strands(&grid, &roots, &params)?;
    if grown.model.strands.is_empty() {
        return Err(exit::empty("no strands grown"));
    }
    log::info!(
        "{} strands grown from {} roots ({} skipped, {} dropped, {} orientation flips)",
        grown.model.strands.len(),
        roots.roots.len(),
        grown.skipped_roots.len(),
        grown.dropped_roots.len(),
        grown.flips
    );
    grown.model.save(&args.out)?;
    Ok(())
}

pub(super) fn synth_wig(args: &SynthWigArgs) -> anyhow::Result<()> {
    let params = WigParams {
        strands: args.strands,
        vertices: args.vertices,
        ..Default::default()
    };
    procedural_wig(&params, args.seed)?.save(&args.out)?;
    Ok(())
}
