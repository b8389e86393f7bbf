//! Known-plaintext masking attack.
//!
//! Every position whose encryption function is `x ^ gamma` leaks `gamma`
//! through one known plain/cipher pair. XORing another ciphertext of the
//! same size with that mask recovers those positions exactly.

use crate::error::Result;
use crate::image::RgbImage;

/// `known_plain ^ known_cipher`, byte by byte.
pub fn masking_image(known_plain: &RgbImage, known_cipher: &RgbImage) -> Result<RgbImage> {
    known_plain.xor(known_cipher)
}

pub fn kpa_mask_attack(known_plain: &RgbImage, known_cipher: &RgbImage, target_cipher: &RgbImage) -> Result<RgbImage> {
    let mask = masking_image(known_plain, known_cipher)?;
    target_cipher.xor(&mask)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::xor_equivalence_map;
    use crate::cipher::encrypt_image;
    use crate::error::Error;
    use crate::exec::Exec;
    use crate::key::SecretKey;

    #[test]
    fn known_image_is_recovered_exactly() {
        let k: SecretKey = "8DB87A1613D75ADF2D06".parse().unwrap();
        let p = RgbImage::gradient(16, 16, 1).unwrap();
        let c = encrypt_image(&p, &k).unwrap();
        assert_eq!(kpa_mask_attack(&p, &c, &c).unwrap(), p);
    }

    #[test]
    fn xor_positions_are_recovered() {
        let k: SecretKey = "8DB87A1613D75ADF2D06".parse().unwrap();
        let known = RgbImage::noise(16, 16, 1).unwrap();
        let target = RgbImage::gradient(16, 16, 2).unwrap();
        let rec = kpa_mask_attack(
            &known,
            &encrypt_image(&known, &k).unwrap(),
            &encrypt_image(&target, &k).unwrap(),
        )
        .unwrap();
        let map = xor_equivalence_map(&k, 16, 16, Exec::Sequential).unwrap();
        for (i, (r, t)) in rec.pixels().iter().zip(target.pixels()).enumerate() {
            for c in 0..3 {
                if map.is_xor(i, c) {
                    assert_eq!(r[c], t[c]);
                }
            }
        }
    }

    #[test]
    fn dimension_mismatch() {
        let a = RgbImage::noise(16, 16, 1).unwrap();
        let b = RgbImage::noise(16, 8, 1).unwrap();
        assert!(matches!(kpa_mask_attack(&a, &a, &b), Err(Error::DimensionMismatch(..))));
    }
}
