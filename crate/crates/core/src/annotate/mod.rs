//! Ground truth from human annotation: stroke maps interpolated into dense
//! strand maps, and super-pixel pair sampling plus answer aggregation for
//! ordinal depth labels.

mod aggregate;
mod interpolate;
mod pairs;
mod strokes;
mod superpixel;

pub use aggregate::{aggregate_answers, AggregateStats, AggregatedLabel, AnnotationAnswer, Choice, GROUPS};
pub use interpolate::{interpolate_strand_map, Interpolated};
pub use pairs::{sample_pairs, tag_pairs, PairSample};
pub use strokes::{rasterize_strokes, RasterizeReport, RasterizedStrokes, StrokeSet};
pub use superpixel::{generate_superpixels, target_count, SlicParams, SuperPixelMap};

