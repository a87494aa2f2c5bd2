//! Strand maps, nearness depth maps and the tooling around them.
//!
//! The crate is split by pipeline stage:
//!
//! - [`repr`]: the strand map / depth map image representation, its codec,
//!   undirected conversion, a Gabor orientation baseline and 2D augmentation.
//! - [`annotate`]: stroke rasterization and interpolation into dense strand
//!   maps, super-pixel generation, pair sampling and answer aggregation for
//!   ordinal depth labels.
//! - [`render`]: z-buffered projection of 3D strand models into strand,
//!   depth and mask images.
//! - [`hair3d`]: strand file I/O, voxel occupancy/orientation fields, point
//!   sampling, trilinear queries and strand growing.
//! - [`metrics`]: angular and ordinal-depth metrics, 3D field metrics and the
//!   reference loss functions.
//!
//! Image coordinates follow raster order: `+x` right, `+y` down, and pixel
//! `(i, j)` is centered on the continuous coordinate `(i, j)`.

pub mod annotate;
mod error;
pub mod hair3d;
pub mod image;
pub mod metrics;
pub mod render;
pub mod repr;

pub use error::{Error, Result};

/// 2D vector in image space.
pub type Vec2 = nalgebra::Vector2<f64>;
/// 3D vector in camera or canonical head space.
pub type Vec3 = nalgebra::Vector3<f64>;
