//! The image-space representation: a strand map (mask + directed growth
//! direction) paired with a nearness depth map.

mod augment;
mod depth;
mod direction;
mod gabor;
mod strand_map;

pub use augment::{augment_2d, Augmented, Transform2d};
pub use depth::{DepthMap, DepthMeta};
pub use direction::DirectionField;
pub use gabor::{gabor_kernel, gabor_orientation, GaborParams};
pub use strand_map::{
    decode_strand_map, encode_strand_map, to_undirected, undirected_angle_deg, DecodedStrandMap,
    StrandMap, UndirectedOrientationMap, BACKGROUND,
};
