//! `K10` inference from identical cipher blocks of a chosen probe image.
//!
//! Two identical plain blocks encrypt identically when their indices differ
//! by a multiple of the subkey period and their local seeds coincide. The
//! gcd of the colliding index distances therefore bounds the period.

use std::collections::HashMap;

use crate::cipher::{gcd, subkey_period};
use crate::error::{Error, Result};
use crate::image::{Rgb, RgbImage, BLOCK_PIXELS};

/// Image whose blocks all carry the same pattern of 16 distinct pixels,
/// `(16t, 16t + 1, 16t + 2)` for `t = 0..15`.
pub fn craft_probe_image(width: usize, height: usize) -> Result<RgbImage> {
    let img = RgbImage::from_fn(width, height, |x, y| {
        let t = ((y * width + x) % BLOCK_PIXELS) as u8;
        [16 * t, 16 * t + 1, 16 * t + 2]
    })?;
    img.check_blockable()?;
    Ok(img)
}

/// Groups of byte-identical cipher blocks. Every unordered pair inside a
/// group is a collision.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IdenticalPairSet {
    /// Each group is sorted and holds at least two block indices; groups
    /// are ordered by their first index.
    pub groups: Vec<Vec<usize>>,
}

impl IdenticalPairSet {
    /// Builds the set from explicit pairs, one group per pair.
    pub fn from_pairs(pairs: &[(usize, usize)]) -> Self {
        let mut groups: Vec<Vec<usize>> = pairs
            .iter()
            .filter(|(a, b)| a != b)
            .map(|&(a, b)| vec![a.min(b), a.max(b)])
            .collect();
        groups.sort();
        IdenticalPairSet { groups }
    }

    pub fn pair_count(&self) -> usize {
        self.groups.iter().map(|g| g.len() * (g.len() - 1) / 2).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// All pairs `(k0, k1)` with `k0 < k1`, sorted.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.pair_count());
        for g in &self.groups {
            for (i, &a) in g.iter().enumerate() {
                for &b in &g[i + 1..] {
                    out.push((a, b));
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// gcd of all pair distances, or `None` when empty.
    pub fn distance_gcd(&self) -> Option<usize> {
        // Consecutive distances within a group generate every pair distance.
        self.groups
            .iter()
            .flat_map(|g| g.windows(2).map(|w| w[1] - w[0]))
            .reduce(|a, b| gcd(a as u32, b as u32) as usize)
    }
}

pub fn find_identical_cipher_blocks(cipher: &RgbImage) -> Result<IdenticalPairSet> {
    cipher.check_blockable()?;
    let mut seen: HashMap<&[Rgb], Vec<usize>> = HashMap::new();
    for (k, chunk) in cipher.pixels().chunks_exact(BLOCK_PIXELS).enumerate() {
        seen.entry(chunk).or_default().push(k);
    }
    let mut groups: Vec<Vec<usize>> = seen.into_values().filter(|g| g.len() > 1).collect();
    groups.sort();
    Ok(IdenticalPairSet { groups })
}

/// Outcome of [`infer_k10_candidates`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct K10Inference {
    /// gcd of the collision distances; the subkey period divides it if every
    /// collision is genuine.
    pub t_bound: usize,
    /// Ascending.
    pub candidates: Vec<u8>,
    /// Fewer than three pairs: treat the narrowing as a hint only.
    pub advisory: bool,
    pub warning: Option<String>,
}

/// Minimum number of collision pairs for a non-advisory result.
pub const MIN_CONFIDENT_PAIRS: usize = 3;

/// Every `K10` whose subkey period divides the gcd of the collision
/// distances. `K10 = 0` (period 1) is kept only when nothing else fits.
pub fn infer_k10_candidates(pairs: &IdenticalPairSet) -> Result<K10Inference> {
    let g = pairs.distance_gcd().ok_or(Error::EmptyEvidence)?;
    let fits: Vec<u8> = (0..=255u8)
        .filter(|&k| g % subkey_period(k) as usize == 0)
        .collect();
    let mut warning = None;
    let candidates = if fits.len() > 1 {
        fits.into_iter().filter(|&k| k != 0).collect()
    } else {
        warning = Some(format!(
            "collision distances have gcd {g}; only K10 = 0 fits, the collisions are probably chance matches"
        ));
        fits
    };
    let advisory = pairs.pair_count() < MIN_CONFIDENT_PAIRS;
    if advisory && warning.is_none() {
        warning = Some(format!("only {} collision pair(s); candidate set is advisory", pairs.pair_count()));
    }
    Ok(K10Inference {
        t_bound: g,
        candidates,
        advisory,
        warning,
    })
}

/// Probability that two blocks sharing `B2` with `m` one-bits draw the same
/// 24 sampled bits: `((m/24)^2 + (1 - m/24)^2)^24`.
pub fn p_b_collision(m: u32) -> f64 {
    let q = f64::from(m) / 24.0;
    (q * q + (1.0 - q) * (1.0 - q)).powi(24)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cipher::encrypt_image;
    use crate::key::SecretKey;

    #[test]
    fn probe_shape() {
        let img = craft_probe_image(64, 8).unwrap();
        let blocks = img.blocks().unwrap();
        assert!(blocks.iter().all(|b| b.pixels == blocks[0].pixels));
        for i in 0..16 {
            for j in 0..i {
                assert_ne!(blocks[0].pixels[i], blocks[0].pixels[j]);
            }
        }
        assert_eq!(craft_probe_image(512, 512).unwrap().num_blocks().unwrap(), 16384);
        assert!(matches!(craft_probe_image(5, 5), Err(Error::BadDimensions { .. })));
    }

    #[test]
    fn table_distances_give_three_candidates() {
        let pairs = IdenticalPairSet::from_pairs(&[
            (1941, 3161),
            (2015, 7083),
            (3023, 15255),
            (4159, 9163),
            (5061, 12113),
            (5507, 16355),
            (9166, 12454),
            (9655, 12259),
            (11090, 13102),
        ]);
        let inf = infer_k10_candidates(&pairs).unwrap();
        assert_eq!(inf.t_bound, 4);
        assert_eq!(inf.candidates, vec![64, 128, 192]);
        assert!(!inf.advisory);
        assert!(inf.warning.is_none());
    }

    #[test]
    fn inference_edge_cases() {
        let one = infer_k10_candidates(&IdenticalPairSet::from_pairs(&[(10, 266)])).unwrap();
        assert_eq!(one.t_bound, 256);
        assert_eq!(one.candidates.len(), 255);
        assert!(one.advisory);

        let chance = infer_k10_candidates(&IdenticalPairSet::from_pairs(&[(0, 3), (10, 15)])).unwrap();
        assert_eq!(chance.t_bound, 1);
        assert_eq!(chance.candidates, vec![0]);
        assert!(chance.warning.is_some());

        assert_eq!(infer_k10_candidates(&IdenticalPairSet::default()), Err(Error::EmptyEvidence));
    }

    #[test]
    fn inference_contains_true_k10_for_genuine_collisions() {
        for k10 in 1..=255u8 {
            let t = subkey_period(k10) as usize;
            let pairs = IdenticalPairSet::from_pairs(&[(7, 7 + 3 * t), (100, 100 + 5 * t), (40, 40 + 7 * t)]);
            let inf = infer_k10_candidates(&pairs).unwrap();
            assert!(inf.candidates.contains(&k10), "k10 {k10}");
        }
    }

    #[test]
    fn collision_probability() {
        assert_eq!(p_b_collision(0), 1.0);
        assert_eq!(p_b_collision(24), 1.0);
        assert_eq!(p_b_collision(12), 2f64.powi(-24));
        for m in 1..12 {
            assert!((p_b_collision(m) - p_b_collision(24 - m)).abs() < 1e-18);
        }
    }

    #[test]
    fn groups_and_pairs() {
        let key: SecretKey = "2A84BCF35D70664E4740".parse().unwrap();
        let zero_k10 = key.with_k(10, 0);
        let probe = craft_probe_image(16, 4).unwrap();
        // K10 = 0 leaves the probe unchanged: every block collides.
        let set = find_identical_cipher_blocks(&encrypt_image(&probe, &zero_k10).unwrap()).unwrap();
        assert_eq!(set.groups, vec![vec![0, 1, 2, 3]]);
        assert_eq!(set.pair_count(), 6);
        assert_eq!(set.pairs()[0], (0, 1));
        assert_eq!(set.distance_gcd(), Some(1));
    }
}
