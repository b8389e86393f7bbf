//! Known-key classification of per-position encryption functions.
//!
//! Used as ground truth when checking what the attacks observe.

use crate::algebra::CompositeFn;
use crate::cipher::{block_composites, block_contexts};
use crate::error::Result;
use crate::exec::Exec;
use crate::image::{RgbImage, BLOCK_PIXELS};
use crate::key::SecretKey;

/// Reduced encryption functions of every pixel of a `width x height` image,
/// in raster order, one per channel.
pub fn position_composites(key: &SecretKey, width: usize, height: usize, exec: Exec) -> Result<Vec<[CompositeFn; 3]>> {
    let num_blocks = RgbImage::filled(width, height, [0; 3])?.check_blockable()?;
    let contexts = block_contexts(key, num_blocks)?;
    let per_block = exec.map(&contexts, block_composites);
    let mut out = Vec::with_capacity(num_blocks * BLOCK_PIXELS);
    for block in per_block {
        out.extend(block?);
    }
    Ok(out)
}

/// `Some(gamma)` at every (pixel, channel) whose encryption function is
/// `x ^ gamma`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XorMap {
    pub width: usize,
    pub height: usize,
    pub gammas: Vec<[Option<u8>; 3]>,
}

impl XorMap {
    pub fn is_xor(&self, pixel: usize, channel: usize) -> bool {
        self.gammas[pixel][channel].is_some()
    }

    pub fn count(&self) -> usize {
        self.gammas.iter().flatten().filter(|g| g.is_some()).count()
    }

    pub fn count_channel(&self, channel: usize) -> usize {
        self.gammas.iter().filter(|g| g[channel].is_some()).count()
    }

    /// Share of all channel bytes.
    pub fn fraction(&self) -> f64 {
        self.count() as f64 / (3 * self.gammas.len()) as f64
    }
}

pub fn xor_equivalence_map(key: &SecretKey, width: usize, height: usize, exec: Exec) -> Result<XorMap> {
    let composites = position_composites(key, width, height, exec)?;
    let gammas = exec.map(&composites, |fs| [0, 1, 2].map(|c| fs[c].xor_constant()));
    Ok(XorMap { width, height, gammas })
}

/// For each channel byte, whether the masking attack recovers `target_plain`
/// from a known pair under `key`: `E(t) ^ E(k) == t ^ k`, with `E` the
/// position's encryption function. XOR-equivalent positions always qualify;
/// the rest qualify only by coincidence of the two plaintext bytes.
pub fn mask_recovery_oracle(
    key: &SecretKey,
    known_plain: &RgbImage,
    target_plain: &RgbImage,
    exec: Exec,
) -> Result<Vec<[bool; 3]>> {
    known_plain.same_dimensions(target_plain)?;
    let composites = position_composites(key, known_plain.width(), known_plain.height(), exec)?;
    Ok(composites
        .iter()
        .zip(known_plain.pixels().iter().zip(target_plain.pixels()))
        .map(|(fs, (k, t))| [0, 1, 2].map(|c| fs[c].apply(k[c]) ^ fs[c].apply(t[c]) == k[c] ^ t[c]))
        .collect())
}

/// Histogram of reduced composite lengths over all (pixel, channel) pairs;
/// index `len` counts composites of that length.
pub fn length_histogram(composites: &[[CompositeFn; 3]], k10: u8) -> Vec<u64> {
    let mut hist = vec![0u64; usize::from(k10) + 1];
    for f in composites.iter().flatten() {
        hist[f.len()] += 1;
    }
    hist
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cipher::encrypt_image;

    fn key(hex: &str) -> SecretKey {
        hex.parse().unwrap()
    }

    #[test]
    fn composites_predict_ciphertext() {
        let k = key("8DB87A1613D75ADF2D06");
        let img = RgbImage::noise(16, 16, 3).unwrap();
        let enc = encrypt_image(&img, &k).unwrap();
        let fs = position_composites(&k, 16, 16, Exec::Sequential).unwrap();
        for (i, (p, c)) in img.pixels().iter().zip(enc.pixels()).enumerate() {
            for ch in 0..3 {
                assert_eq!(fs[i][ch].apply(p[ch]), c[ch]);
            }
        }
    }

    #[test]
    fn xor_map_matches_encryption_of_all_byte_values() {
        let k = key("8DB87A1613D75ADF2D06");
        let map = xor_equivalence_map(&k, 8, 8, Exec::Parallel).unwrap();
        let encs: Vec<RgbImage> = (0..=255u8)
            .map(|v| encrypt_image(&RgbImage::filled(8, 8, [v; 3]).unwrap(), &k).unwrap())
            .collect();
        for pixel in 0..64 {
            for c in 0..3 {
                let gamma = encs[0].pixels()[pixel][c];
                let is_xor = (0..256).all(|v| encs[v].pixels()[pixel][c] == v as u8 ^ gamma);
                assert_eq!(map.is_xor(pixel, c), is_xor);
                if is_xor {
                    assert_eq!(map.gammas[pixel][c], Some(gamma));
                }
            }
        }
        assert!(map.count() > 0);
    }

    #[test]
    fn weak_channel_is_entirely_xor() {
        let map = xor_equivalence_map(&key("3C1DE8FF0151FF012840"), 16, 16, Exec::Sequential).unwrap();
        // Block 0 uses the raw subkeys, which satisfy the red leak condition.
        assert!((0..16).all(|p| map.is_xor(p, 0)));
    }

    #[test]
    fn length_histogram_totals() {
        let k = key("2A84BCF25E6A664E4C41");
        let fs = position_composites(&k, 8, 8, Exec::Sequential).unwrap();
        let hist = length_histogram(&fs, k.k10());
        assert_eq!(hist.iter().sum::<u64>(), 3 * 64);
    }

    #[test]
    fn mask_oracle_covers_xor_positions() {
        let k = key("8DB87A1613D75ADF2D06");
        let a = RgbImage::noise(16, 16, 1).unwrap();
        let b = RgbImage::gradient(16, 16, 2).unwrap();
        let map = xor_equivalence_map(&k, 16, 16, Exec::Sequential).unwrap();
        let rec = mask_recovery_oracle(&k, &a, &b, Exec::Sequential).unwrap();
        for (p, r) in rec.iter().enumerate() {
            for c in 0..3 {
                assert!(!map.is_xor(p, c) || r[c]);
            }
        }
    }
}
