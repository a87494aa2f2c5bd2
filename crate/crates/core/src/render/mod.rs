//! Strand models to ground-truth maps: pinhole projection with a per-pixel
//! z-test.

mod camera;
mod raster;

pub use camera::{Camera, CameraFile};
pub use raster::{compute_iou, render_hair, Fragment, RenderOptions, RenderOutput, SEGMENT_SAMPLES};
