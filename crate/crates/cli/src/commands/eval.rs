use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::Context;
use hairstep::metrics::{evaluate, MetricReport, PairLabel};
use hairstep::repr::{DepthMap, StrandMap};
use serde::{Deserialize, Serialize};

use super::{create_dir, read_jsonl, write_json, write_jsonl};
use crate::cli::EvalArgs;
use crate::exit;

/// Per-image metrics as written to `metrics.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ImageRecord {
    pub image: String,
    #[serde(flatten)]
    pub report: MetricReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailedImage {
    pub image: String,
    pub error: String,
}

/// Mean of one metric over the images where it is defined.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricMean {
    pub metric: &'static str,
    pub mean: Option<f64>,
    pub images: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalSummary {
    pub scored: usize,
    pub means: Vec<MetricMean>,
    pub failed: Vec<FailedImage>,
    /// Files present in only one of the two directories.
    pub unmatched: Vec<String>,
    #[serde(skip)]
    pub records: Vec<ImageRecord>,
}

pub(super) fn run(args: &EvalArgs) -> anyhow::Result<()> {
    let pairs: Vec<PairLabel> = match &args.pairs {
        Some(p) => read_jsonl(p)?,
        None => Vec::new(),
    };
    for (i, p) in pairs.iter().enumerate() {
        p.validate()
            .map_err(|e| exit::invalid(format!("{} record {}: {e}", args.pairs.as_ref().unwrap().display(), i + 1)))?;
    }
    let summary = evaluate_dirs(&args.pred, &args.gt, args.depth.as_deref(), &pairs)?;
    for f in &summary.failed {
        log::warn!("{}: {}", f.image, f.error);
    }
    for u in &summary.unmatched {
        log::warn!("unmatched: {u}");
    }

    create_dir(&args.out)?;
    write_jsonl(&args.out.join("metrics.jsonl"), &summary.records)?;
    write_json(&args.out.join("summary.json"), &summary)?;
    let csv_path = args.out.join("summary.csv");
    let mut csv = csv::Writer::from_path(&csv_path).with_context(|| format!("cannot create {}", csv_path.display()))?;
    csv.write_record(["metric", "mean", "images"])?;
    for m in &summary.means {
        let mean = m.mean.map(|v| v.to_string()).unwrap_or_default();
        csv.write_record([m.metric, mean.as_str(), m.images.to_string().as_str()])?;
    }
    csv.flush()?;
    println!("{}", serde_json::to_string(&summary)?);

    if summary.scored == 0 {
        return Err(exit::empty("no image could be scored"));
    }
    Ok(())
}

fn png_stems(dir: &Path) -> anyhow::Result<BTreeSet<String>> {
    let mut out = BTreeSet::new();
    for entry in std::fs::read_dir(dir).with_context(|| format!("cannot list {}", dir.display()))? {
        let path = entry?.path();
        let is_png = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("png"));
        if path.is_file() && is_png {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                out.insert(stem.to_string());
            }
        }
    }
    Ok(out)
}

fn png_in(dir: &Path, stem: &str) -> PathBuf {
    dir.join(format!("{stem}.png"))
}

fn score_one(
    id: &str,
    pred: &Path,
    gt: &Path,
    depth: Option<&Path>,
    pairs: &[PairLabel],
) -> hairstep::Result<MetricReport> {
    let p = StrandMap::load(png_in(pred, id))?;
    let g = StrandMap::load(png_in(gt, id))?;
    let depth_map = match depth {
        Some(dir) if png_in(dir, id).is_file() => Some(DepthMap::load(png_in(dir, id))?),
        Some(dir) => {
            log::warn!("{id}: no depth map in {}; HairRida skipped", dir.display());
            None
        }
        None => None,
    };
    let mine: Vec<PairLabel> = pairs
        .iter()
        .filter(|q| q.image_id.as_deref().is_none_or(|i| i == id))
        .cloned()
        .collect();
    evaluate(&p, &g, depth_map.as_ref(), &mine)
}

/// Scores every `<image>.png` present in both directories. Images are
/// processed in sorted order so results do not depend on directory listing
/// order.
pub fn evaluate_dirs(pred: &Path, gt: &Path, depth: Option<&Path>, pairs: &[PairLabel]) -> anyhow::Result<EvalSummary> {
    let (ps, gs) = (png_stems(pred)?, png_stems(gt)?);
    let matched: Vec<&String> = ps.intersection(&gs).collect();
    let mut unmatched: Vec<String> = ps
        .difference(&gs)
        .map(|s| png_in(pred, s).display().to_string())
        .chain(gs.difference(&ps).map(|s| png_in(gt, s).display().to_string()))
        .collect();
    unmatched.sort();
    if matched.is_empty() {
        return Err(exit::empty(format!(
            "no strand maps with matching names in {} and {}",
            pred.display(),
            gt.display()
        )));
    }

    let mut records = Vec::new();
    let mut failed = Vec::new();
    for id in matched {
        match score_one(id, pred, gt, depth, pairs) {
            Ok(report) => records.push(ImageRecord { image: id.clone(), report }),
            Err(e) => failed.push(FailedImage { image: id.clone(), error: e.to_string() }),
        }
    }

    let mean_of = |metric: &'static str, f: fn(&MetricReport) -> Option<f64>| {
        let vals: Vec<f64> = records.iter().filter_map(|r| f(&r.report)).collect();
        MetricMean {
            metric,
            mean: (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64),
            images: vals.len(),
        }
    };
    let means = vec![
        mean_of("hairSale", |r| r.hair_sale),
        mean_of("hairSaleUndirected", |r| r.hair_sale_undirected),
        mean_of("hairRida", |r| r.hair_rida),
        mean_of("iou", |r| r.iou),
    ];
    Ok(EvalSummary {
        scored: records.len(),
        means,
        failed,
        unmatched,
        records,
    })
}
