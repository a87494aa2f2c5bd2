use hairstep::annotate::{
    aggregate_answers, generate_superpixels, interpolate_strand_map, rasterize_strokes, sample_pairs as draw_pairs,
    tag_pairs, AnnotationAnswer, SlicParams, StrokeSet, SuperPixelMap,
};
use hairstep::image::{GrayImage, Mask};
use hairstep::repr::{gabor_orientation, GaborParams};

use super::{read_jsonl, write_json, write_jsonl};
use crate::cli::{AggregateArgs, GaborArgs, SamplePairsArgs, Strokes2mapArgs, SuperpixelsArgs};
use crate::exit;

pub(super) fn strokes2map(args: &Strokes2mapArgs) -> anyhow::Result<()> {
    let strokes = StrokeSet::load(&args.strokes)?;
    let mask = Mask::load(&args.mask)?;
    let sparse = rasterize_strokes(&strokes, &mask)?;
    if sparse.report.degenerate > 0 {
        log::warn!("{} degenerate strokes skipped", sparse.report.degenerate);
    }
    if sparse.report.off_mask > 0 {
        log::warn!("{} strokes miss the hair mask", sparse.report.off_mask);
    }
    if let Some(path) = &args.sparse {
        sparse.map.save(path)?;
    }
    let dense = interpolate_strand_map(&sparse.map, &mask)?;
    if dense.unconstrained_components > 0 {
        log::warn!(
            "{} mask components without strokes were filled from the nearest stroke",
            dense.unconstrained_components
        );
    }
    if !dense.degenerate.is_empty() {
        log::warn!("{} pixels had a vanishing direction", dense.degenerate.len());
    }
    dense.map.save(&args.out)?;
    Ok(())
}

pub(super) fn superpixels(args: &SuperpixelsArgs) -> anyhow::Result<()> {
    let image = GrayImage::load(&args.image)?;
    let hair = Mask::load(&args.hair)?;
    let face = Mask::load(&args.face)?;
    let params = SlicParams {
        compactness: args.compactness,
        iterations: args.iterations,
        seed: args.seed,
    };
    let sp = generate_superpixels(&image, &hair, &face, args.density, &params)?;
    log::info!("{} super-pixels, {} adjacent pairs", sp.count(), sp.adjacency().len());
    sp.save(&args.out)?;
    Ok(())
}

pub(super) fn sample_pairs(args: &SamplePairsArgs) -> anyhow::Result<()> {
    let sp = SuperPixelMap::load(&args.superpixels)?;
    let mut pairs = draw_pairs(&sp, args.per_adjacency, args.seed)?;
    if pairs.is_empty() {
        return Err(exit::empty("no adjacent super-pixels to draw pairs from"));
    }
    if let Some(id) = &args.image_id {
        tag_pairs(&mut pairs, id);
    }
    write_jsonl(&args.out, &pairs)
}

pub(super) fn aggregate(args: &AggregateArgs) -> anyhow::Result<()> {
    let answers: Vec<AnnotationAnswer> = read_jsonl(&args.answers)?;
    let (labels, stats) = aggregate_answers(&answers)?;
    write_jsonl(&args.out, &labels)?;
    if let Some(path) = &args.stats {
        write_json(path, &stats)?;
    }
    println!("{}", serde_json::to_string(&stats)?);
    Ok(())
}

pub(super) fn gabor(args: &GaborArgs) -> anyhow::Result<()> {
    let image = GrayImage::load(&args.image)?;
    let mask = Mask::load(&args.mask)?;
    let params = GaborParams {
        num_orients: args.orientations,
        wavelength: args.wavelength,
        sigma: args.sigma,
        aspect: args.aspect,
    };
    gabor_orientation(&image, &mask, &params)?.to_strand_map().save(&args.out)?;
    Ok(())
}
