//! Strand geometry, voxel fields and streamline growing.

mod grid;
mod grow;
mod sampling;
mod strand;
mod synth;
mod voxelize;

pub use grid::{Aabb, FieldSample, VolumeGrid, OCCUPIED};
pub use grow::{grow_strands, GrowParams, Grown, Root, ScalpRoots};
pub use sampling::{boundary_faces, sample_points, BoundaryFace, SamplePoint};
pub use strand::{HairModel, Strand};
pub use synth::{procedural_wig, WigParams};
pub use voxelize::{strands_to_fields, Voxelized};
