//! RGB raster container and its 16-pixel block view.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type Rgb = [u8; 3];

/// Pixels per cipher block.
pub const BLOCK_PIXELS: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    pixels: Vec<Rgb>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, pixels: Vec<Rgb>) -> Result<Self> {
        if width == 0 || height == 0 || pixels.len() != width * height {
            return Err(Error::BadDimensions { width, height });
        }
        Ok(RgbImage { width, height, pixels })
    }

    pub fn filled(width: usize, height: usize, value: Rgb) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn<F: FnMut(usize, usize) -> Rgb>(width: usize, height: usize, mut f: F) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    /// Uniform noise from a seeded generator.
    pub fn noise(width: usize, height: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::from_fn(width, height, |_, _| rng.gen())
    }

    /// Smooth diagonal gradient with a little seeded texture.
    pub fn gradient(width: usize, height: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (w, h) = (width.max(2) - 1, height.max(2) - 1);
        Self::from_fn(width, height, |x, y| {
            let r = (x * 255 / w) as u8;
            let g = (y * 255 / h) as u8;
            let b = (((x + y) * 255) / (w + h)) as u8;
            let jitter: u8 = rng.gen_range(0..8);
            [r ^ jitter, g, b.wrapping_add(jitter)]
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[Rgb] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [Rgb] {
        &mut self.pixels
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn same_dimensions(&self, other: &RgbImage) -> Result<()> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::DimensionMismatch(
                self.width,
                self.height,
                other.width,
                other.height,
            ));
        }
        Ok(())
    }

    pub fn check_blockable(&self) -> Result<usize> {
        if !self.pixels.len().is_multiple_of(BLOCK_PIXELS) {
            return Err(Error::BadDimensions {
                width: self.width,
                height: self.height,
            });
        }
        Ok(self.pixels.len() / BLOCK_PIXELS)
    }

    pub fn num_blocks(&self) -> Result<usize> {
        self.check_blockable()
    }

    /// Raster-order 16-pixel blocks, numbered from 0.
    pub fn blocks(&self) -> Result<Vec<PixelBlock>> {
        self.check_blockable()?;
        Ok(self
            .pixels
            .chunks_exact(BLOCK_PIXELS)
            .enumerate()
            .map(|(index, chunk)| {
                let mut pixels = [[0u8; 3]; BLOCK_PIXELS];
                pixels.copy_from_slice(chunk);
                PixelBlock { index, pixels }
            })
            .collect())
    }

    pub fn block(&self, index: usize) -> Result<PixelBlock> {
        let n = self.check_blockable()?;
        if index >= n {
            return Err(Error::OutOfRange(format!("block {index} of {n}")));
        }
        let mut pixels = [[0u8; 3]; BLOCK_PIXELS];
        pixels.copy_from_slice(&self.pixels[index * BLOCK_PIXELS..(index + 1) * BLOCK_PIXELS]);
        Ok(PixelBlock { index, pixels })
    }

    pub fn from_blocks(width: usize, height: usize, blocks: &[PixelBlock]) -> Result<Self> {
        let pixels = blocks.iter().flat_map(|b| b.pixels).collect();
        Self::new(width, height, pixels)
    }

    /// Byte-wise XOR of two equally sized images.
    pub fn xor(&self, other: &RgbImage) -> Result<RgbImage> {
        self.same_dimensions(other)?;
        let pixels = self
            .pixels
            .iter()
            .zip(&other.pixels)
            .map(|(a, b)| [a[0] ^ b[0], a[1] ^ b[1], a[2] ^ b[2]])
            .collect();
        Ok(RgbImage {
            width: self.width,
            height: self.height,
            pixels,
        })
    }

    /// Every channel byte XORed with `value`.
    pub fn xor_scalar(&self, value: u8) -> RgbImage {
        let pixels = self
            .pixels
            .iter()
            .map(|p| [p[0] ^ value, p[1] ^ value, p[2] ^ value])
            .collect();
        RgbImage {
            width: self.width,
            height: self.height,
            pixels,
        }
    }
}

/// 16 RGB pixels and the block's raster index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PixelBlock {
    pub index: usize,
    pub pixels: [Rgb; BLOCK_PIXELS],
}

/// Block indices grouped by residue modulo `period`; set `j` holds every `k`
/// with `k % period == j`.
pub fn partition_by_period(num_blocks: usize, period: usize) -> Vec<Vec<usize>> {
    let period = period.max(1);
    let mut sets = vec![Vec::with_capacity(num_blocks / period + 1); period];
    for k in 0..num_blocks {
        sets[k % period].push(k);
    }
    sets
}

/// Per-channel agreement statistics between two images.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffStats {
    pub pixel_count: usize,
    pub identical: [usize; 3],
    /// `xor_histogram[c][v]` counts channel-`c` bytes whose XOR difference is `v`.
    pub xor_histogram: [[usize; 256]; 3],
}

impl DiffStats {
    pub fn fraction_identical(&self, channel: usize) -> f64 {
        self.identical[channel] as f64 / self.pixel_count as f64
    }

    pub fn fraction_identical_total(&self) -> f64 {
        self.identical.iter().sum::<usize>() as f64 / (3 * self.pixel_count) as f64
    }

    /// Distinct nonzero XOR differences observed in `channel`.
    pub fn nonzero_differences(&self, channel: usize) -> Vec<u8> {
        (1..=255u8)
            .filter(|&v| self.xor_histogram[channel][v as usize] > 0)
            .collect()
    }
}

pub fn diff_images(a: &RgbImage, b: &RgbImage) -> Result<DiffStats> {
    a.same_dimensions(b)?;
    let mut identical = [0usize; 3];
    let mut xor_histogram = [[0usize; 256]; 3];
    for (pa, pb) in a.pixels.iter().zip(&b.pixels) {
        for c in 0..3 {
            let d = pa[c] ^ pb[c];
            xor_histogram[c][d as usize] += 1;
            if d == 0 {
                identical[c] += 1;
            }
        }
    }
    Ok(DiffStats {
        pixel_count: a.pixels.len(),
        identical,
        xor_histogram,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn block_counts() {
        let img = RgbImage::filled(512, 512, [0, 0, 0]).unwrap();
        assert_eq!(img.blocks().unwrap().len(), 16384);
        let small = RgbImage::filled(5, 5, [1, 2, 3]).unwrap();
        assert_eq!(small.blocks(), Err(Error::BadDimensions { width: 5, height: 5 }));
    }

    #[test]
    fn four_by_four_is_one_raster_block() {
        let img = RgbImage::from_fn(4, 4, |x, y| [(y * 4 + x) as u8, 0, 0]).unwrap();
        let blocks = img.blocks().unwrap();
        assert_eq!(blocks.len(), 1);
        for (t, p) in blocks[0].pixels.iter().enumerate() {
            assert_eq!(p[0] as usize, t);
        }
    }

    #[test]
    fn partition_examples() {
        let sets = partition_by_period(16384, 4);
        assert!(sets.iter().all(|s| s.len() == 4096));
        assert_eq!(partition_by_period(7, 1), vec![(0..7).collect::<Vec<_>>()]);
        let sizes: Vec<usize> = partition_by_period(10, 4).iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![3, 3, 2, 2]);
    }

    #[test]
    fn diff_examples() {
        let a = RgbImage::noise(8, 8, 1).unwrap();
        let same = diff_images(&a, &a).unwrap();
        assert_eq!(same.fraction_identical_total(), 1.0);
        let flipped = a.xor_scalar(128);
        let d = diff_images(&a, &flipped).unwrap();
        assert_eq!(d.fraction_identical_total(), 0.0);
        for c in 0..3 {
            assert_eq!(d.xor_histogram[c][128], 64);
            assert_eq!(d.nonzero_differences(c), vec![128]);
        }
        let other = RgbImage::noise(8, 4, 1).unwrap();
        assert!(matches!(diff_images(&a, &other), Err(Error::DimensionMismatch(..))));
    }

    proptest! {
        #[test]
        fn blocks_concatenate_to_pixels(w in 1usize..40, h in 1usize..40, seed in any::<u64>()) {
            let img = RgbImage::noise(w, h, seed).unwrap();
            match img.blocks() {
                Ok(blocks) => {
                    let back = RgbImage::from_blocks(w, h, &blocks).unwrap();
                    prop_assert_eq!(back, img);
                }
                Err(_) => prop_assert!((w * h) % 16 != 0),
            }
        }

        #[test]
        fn period_sets_partition(n in 0usize..2000, t in 1usize..300) {
            let sets = partition_by_period(n, t);
            prop_assert_eq!(sets.len(), t);
            let mut seen = vec![false; n];
            for (j, set) in sets.iter().enumerate() {
                for &k in set {
                    prop_assert_eq!(k % t, j);
                    prop_assert!(!seen[k]);
                    seen[k] = true;
                }
            }
            prop_assert!(seen.into_iter().all(|s| s));
        }

        #[test]
        fn diff_counts_sum(seed in any::<u64>()) {
            let a = RgbImage::noise(6, 6, seed).unwrap();
            let b = RgbImage::noise(6, 6, seed ^ 1).unwrap();
            let d = diff_images(&a, &b).unwrap();
            for c in 0..3 {
                prop_assert_eq!(d.xor_histogram[c].iter().sum::<usize>(), 36);
                prop_assert_eq!(d.xor_histogram[c][0], d.identical[c]);
            }
        }
    }
}
