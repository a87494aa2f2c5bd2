use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::annotate::SuperPixelMap;
use crate::{Error, Result};

/// A pixel pair shown to annotators; `p1` is drawn red, `p2` blue.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PairSample {
    pub pair_id: String,
    /// Source image, when the pair has been tagged with one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_id: Option<String>,
    pub p1: [u32; 2],
    pub p2: [u32; 2],
    /// Super-pixel labels of `p1` and `p2`.
    pub super_pixels: [u32; 2],
}

/// Draws `per_adjacency` pairs for every adjacent super-pixel pair, in
/// adjacency order. Each endpoint is uniform within its super-pixel and which
/// super-pixel supplies the red point is a fair coin flip.
///
/// Pair ids are the running index as a decimal string.
pub fn sample_pairs(sp: &SuperPixelMap, per_adjacency: usize, seed: u64) -> Result<Vec<PairSample>> {
    if per_adjacency == 0 {
        return Err(Error::invalid("per_adjacency must be at least 1"));
    }
    let members = sp.members();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(sp.adjacency().len() * per_adjacency);
    for &(a, b) in sp.adjacency() {
        let (pa, pb) = (&members[a as usize], &members[b as usize]);
        for _ in 0..per_adjacency {
            let qa = pa[rng.random_range(0..pa.len())];
            let qb = pb[rng.random_range(0..pb.len())];
            let (p1, p2, labels) = if rng.random_bool(0.5) {
                (qa, qb, [a, b])
            } else {
                (qb, qa, [b, a])
            };
            out.push(PairSample {
                pair_id: out.len().to_string(),
                image_id: None,
                p1: [p1.0, p1.1],
                p2: [p2.0, p2.1],
                super_pixels: labels,
            });
        }
    }
    Ok(out)
}

/// Attaches an image id and prefixes pair ids with it (`"<image>:<n>"`), so
/// ids stay unique when pairs from many images share one file.
pub fn tag_pairs(pairs: &mut [PairSample], image_id: &str) {
    for p in pairs {
        p.pair_id = format!("{image_id}:{}", p.pair_id);
        p.image_id = Some(image_id.to_string());
    }
}
