//! The chaos-based RGB block cipher.
//!
//! A global logistic map, seeded from `K4..K9`, threads through the image.
//! Each 16-pixel block draws 24 window states from it to seed a local map;
//! every pixel then consumes `K10` local window states, each selecting one of
//! eight byte subfunctions applied to R, G and B with channel-specific
//! parameters. After each block, `K1..K9` advance by `K10` modulo 256.

use crate::algebra::{CompositeFn, Term};
use crate::chaos::{in_window, ChaoticStream, WINDOW_LOW};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::image::{PixelBlock, Rgb, RgbImage, BLOCK_PIXELS};
use crate::key::SecretKey;

/// Window draws consumed from the global map per block.
pub const SEED_DRAWS: usize = 24;

const TWO_POW_24: u32 = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Encrypt,
    Decrypt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Channel {
    Red = 0,
    Green = 1,
    Blue = 2,
}

impl Channel {
    pub const ALL: [Channel; 3] = [Channel::Red, Channel::Green, Channel::Blue];

    pub fn index(self) -> usize {
        self as usize
    }

    /// `(a0, b0, a1, b1)` as 1-based subkey numbers.
    pub fn subkey_wiring(self) -> (usize, usize, usize, usize) {
        match self {
            Channel::Red => (4, 5, 7, 8),
            Channel::Green => (5, 6, 8, 9),
            Channel::Blue => (6, 4, 9, 7),
        }
    }
}

/// Parameters `(a0, b0, a1, b1)` of the subfunctions for one channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ChannelParams {
    pub a0: u8,
    pub b0: u8,
    pub a1: u8,
    pub b1: u8,
}

/// The eight subfunction rows, in table order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SubfunctionKind {
    Complement,
    XorA0,
    AddA0B0,
    XorNotA0,
    XorA1,
    AddA1B1,
    XorNotA1,
    Identity,
}

/// Ordered boundaries of the 24 half-open subintervals of `[0.1, 0.9)`.
/// Subinterval `i` maps to row `i % 8`.
const BOUNDARIES: [f64; 25] = [
    0.10, 0.13, 0.16, 0.19, 0.22, 0.25, 0.28, 0.31, 0.34, 0.37, 0.40, 0.43, 0.46, 0.49, 0.52,
    0.55, 0.58, 0.62, 0.66, 0.70, 0.74, 0.78, 0.82, 0.86, 0.90,
];

const ROWS: [SubfunctionKind; 8] = [
    SubfunctionKind::Complement,
    SubfunctionKind::XorA0,
    SubfunctionKind::AddA0B0,
    SubfunctionKind::XorNotA0,
    SubfunctionKind::XorA1,
    SubfunctionKind::AddA1B1,
    SubfunctionKind::XorNotA1,
    SubfunctionKind::Identity,
];

impl SubfunctionKind {
    pub const ALL: [SubfunctionKind; 8] = ROWS;

    #[inline]
    pub fn apply(self, x: u8, p: &ChannelParams, direction: Direction) -> u8 {
        match self {
            SubfunctionKind::Complement => x ^ 0xff,
            SubfunctionKind::XorA0 => x ^ p.a0,
            SubfunctionKind::XorNotA0 => x ^ !p.a0,
            SubfunctionKind::XorA1 => x ^ p.a1,
            SubfunctionKind::XorNotA1 => x ^ !p.a1,
            SubfunctionKind::Identity => x,
            SubfunctionKind::AddA0B0 => shift(x, p.a0.wrapping_add(p.b0), direction),
            SubfunctionKind::AddA1B1 => shift(x, p.a1.wrapping_add(p.b1), direction),
        }
    }

    /// The subfunction as an XOR or ADD term (forward direction).
    pub fn term(self, p: &ChannelParams) -> Term {
        match self {
            SubfunctionKind::Complement => Term::Xor(0xff),
            SubfunctionKind::XorA0 => Term::Xor(p.a0),
            SubfunctionKind::XorNotA0 => Term::Xor(!p.a0),
            SubfunctionKind::XorA1 => Term::Xor(p.a1),
            SubfunctionKind::XorNotA1 => Term::Xor(!p.a1),
            SubfunctionKind::Identity => Term::Xor(0),
            SubfunctionKind::AddA0B0 => Term::Add(p.a0.wrapping_add(p.b0)),
            SubfunctionKind::AddA1B1 => Term::Add(p.a1.wrapping_add(p.b1)),
        }
    }
}

#[inline]
fn shift(x: u8, by: u8, direction: Direction) -> u8 {
    match direction {
        Direction::Encrypt => x.wrapping_add(by),
        Direction::Decrypt => x.wrapping_sub(by),
    }
}

pub fn apply_subfunction(kind: SubfunctionKind, x: u8, params: &ChannelParams, inverse: bool) -> u8 {
    let direction = if inverse { Direction::Decrypt } else { Direction::Encrypt };
    kind.apply(x, params, direction)
}

/// Row selected by a window state.
pub fn select_subfunction(y: f64) -> Result<SubfunctionKind> {
    if !in_window(y) {
        return Err(Error::OutOfWindow(y));
    }
    Ok(select_in_window(y))
}

#[inline]
fn select_in_window(y: f64) -> SubfunctionKind {
    let upper = BOUNDARIES.partition_point(|&b| b <= y);
    ROWS[(upper - 1) % 8]
}

/// `P = floor(24 (x - 0.1) / 0.8) + 1`, clamped to `1..=24`.
#[inline]
pub fn bit_position(x: f64) -> u32 {
    let t = 24.0 * (x - WINDOW_LOW) / 0.8;
    (t.floor() as u32 + 1).clamp(1, 24)
}

/// Period of the dynamic subkey sequence for a given `K10`.
pub fn subkey_period(k10: u8) -> u32 {
    256 / gcd(u32::from(k10), 256)
}

pub(crate) fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Seed of the global map:
/// `X0 = (S1 / 2^24 + S2 / 96) mod 1` with
/// `S1 = K4 + K5 * 2^8 + K6 * 2^16` and `S2` the nibble sum of `K7..K9`.
pub fn derive_global_seed(key: &SecretKey) -> Result<f64> {
    let x0 = global_seed_value(key);
    if x0 == 0.0 {
        return Err(Error::InvalidKey);
    }
    Ok(x0)
}

pub(crate) fn global_seed_sums(key: &SecretKey) -> (u32, u32) {
    let s1 = u32::from(key.k(4)) | u32::from(key.k(5)) << 8 | u32::from(key.k(6)) << 16;
    let s2 = (7..=9)
        .map(|j| u32::from(key.k(j) & 0x0f) + u32::from(key.k(j) >> 4))
        .sum();
    (s1, s2)
}

/// `X0` without the zero check.
pub fn global_seed_value(key: &SecretKey) -> f64 {
    let (s1, s2) = global_seed_sums(key);
    let sum = f64::from(s1) / f64::from(TWO_POW_24) + f64::from(s2) / 96.0;
    sum - sum.floor()
}

/// Draws 24 window states from `global` and derives the local seed `Y0`.
/// A zero result is replaced by `2^-24`.
pub fn derive_block_seed(global: &mut ChaoticStream, b2: u32) -> Result<f64> {
    let mut sampled = 0u32;
    for j in 0..SEED_DRAWS {
        let x = global.next_window_state()?;
        let p = bit_position(x);
        sampled |= ((b2 >> (p - 1)) & 1) << j;
    }
    Ok(block_seed_from_bits(b2, sampled))
}

pub(crate) fn block_seed_from_bits(b2: u32, sampled: u32) -> f64 {
    let numerator = (b2 + sampled) % TWO_POW_24;
    f64::from(numerator.max(1)) / f64::from(TWO_POW_24)
}

/// Per-block cipher state: the current (updated) `K1..K9`, `K10`, and the
/// local seed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlockContext {
    subkeys: [u8; 9],
    k10: u8,
    y0: f64,
}

impl BlockContext {
    pub fn new(subkeys: [u8; 9], k10: u8, y0: f64) -> Result<Self> {
        if !(y0 > 0.0 && y0 < 1.0) {
            return Err(Error::OutOfRange(format!("local seed {y0} not in (0, 1)")));
        }
        Ok(BlockContext { subkeys, k10, y0 })
    }

    /// Context with the key's initial subkeys.
    pub fn initial(key: &SecretKey, y0: f64) -> Result<Self> {
        Self::new(key.dynamic_subkeys(), key.k10(), y0)
    }

    /// Subkey `K_i`, `i` in `1..=9`.
    pub fn k(&self, i: usize) -> u8 {
        self.subkeys[i - 1]
    }

    pub fn subkeys(&self) -> &[u8; 9] {
        &self.subkeys
    }

    pub fn k10(&self) -> u8 {
        self.k10
    }

    pub fn y0(&self) -> f64 {
        self.y0
    }

    pub fn with_y0(self, y0: f64) -> Result<Self> {
        Self::new(self.subkeys, self.k10, y0)
    }

    /// `B2 = K1 + K2 * 2^8 + K3 * 2^16` from the current subkeys.
    pub fn b2(&self) -> u32 {
        b2_of(&self.subkeys)
    }

    pub fn channel_params(&self, channel: Channel) -> ChannelParams {
        let (a0, b0, a1, b1) = channel.subkey_wiring();
        ChannelParams {
            a0: self.k(a0),
            b0: self.k(b0),
            a1: self.k(a1),
            b1: self.k(b1),
        }
    }

    /// `K_i <- (K_i + K10) mod 256` for `i = 1..9`.
    pub fn update_subkeys(&self) -> Self {
        let mut next = *self;
        advance_subkeys(&mut next.subkeys, self.k10, 1);
        next
    }
}

fn b2_of(subkeys: &[u8; 9]) -> u32 {
    u32::from(subkeys[0]) | u32::from(subkeys[1]) << 8 | u32::from(subkeys[2]) << 16
}

fn advance_subkeys(subkeys: &mut [u8; 9], k10: u8, steps: usize) {
    let delta = (u64::from(k10) * steps as u64 % 256) as u8;
    for k in subkeys.iter_mut() {
        *k = k.wrapping_add(delta);
    }
}

/// Subkeys `K1..K9` in effect for block `index`.
pub fn subkeys_at_block(key: &SecretKey, index: usize) -> [u8; 9] {
    let mut subkeys = key.dynamic_subkeys();
    advance_subkeys(&mut subkeys, key.k10(), index);
    subkeys
}

/// Fills `kinds` with the subfunctions selected by the next `kinds.len()`
/// local window states.
#[inline]
fn draw_kinds(local: &mut ChaoticStream, kinds: &mut [SubfunctionKind]) -> Result<()> {
    for slot in kinds.iter_mut() {
        *slot = select_in_window(local.next_window_state()?);
    }
    Ok(())
}

fn transform_pixels(pixels: &mut [Rgb], ctx: &BlockContext, direction: Direction) -> Result<()> {
    let params = Channel::ALL.map(|c| ctx.channel_params(c));
    let mut local = ChaoticStream::new(ctx.y0);
    let mut kinds = vec![SubfunctionKind::Identity; usize::from(ctx.k10)];
    for px in pixels.iter_mut() {
        draw_kinds(&mut local, &mut kinds)?;
        for (c, p) in params.iter().enumerate() {
            px[c] = apply_sequence(&kinds, px[c], p, direction);
        }
    }
    Ok(())
}

/// Encrypts or decrypts one block under `ctx`.
pub fn process_block(block: &PixelBlock, ctx: &BlockContext, direction: Direction) -> Result<PixelBlock> {
    let mut out = *block;
    transform_pixels(&mut out.pixels, ctx, direction)?;
    Ok(out)
}

/// Block contexts for the first `num_blocks` blocks, in raster order. This
/// is the whole sequential part of the cipher.
pub fn block_contexts(key: &SecretKey, num_blocks: usize) -> Result<Vec<BlockContext>> {
    let mut global = ChaoticStream::new(derive_global_seed(key)?);
    let mut subkeys = key.dynamic_subkeys();
    let mut out = Vec::with_capacity(num_blocks);
    for _ in 0..num_blocks {
        let y0 = derive_block_seed(&mut global, b2_of(&subkeys))?;
        out.push(BlockContext {
            subkeys,
            k10: key.k10(),
            y0,
        });
        advance_subkeys(&mut subkeys, key.k10(), 1);
    }
    Ok(out)
}

pub fn process_image(img: &RgbImage, key: &SecretKey, direction: Direction) -> Result<RgbImage> {
    process_image_with(img, key, direction, Exec::default())
}

/// [`process_image`] with an explicit execution mode. Block contexts are
/// derived sequentially; the blocks themselves are independent.
pub fn process_image_with(img: &RgbImage, key: &SecretKey, direction: Direction, exec: Exec) -> Result<RgbImage> {
    let num_blocks = img.check_blockable()?;
    let contexts = block_contexts(key, num_blocks)?;
    let mut out = img.clone();
    exec.try_zip_chunks_mut(out.pixels_mut(), BLOCK_PIXELS, &contexts, |chunk, ctx| {
        transform_pixels(chunk, ctx, direction)
    })?;
    Ok(out)
}

/// Processes several same-sized images under one key. Each pixel's
/// subfunction sequence is drawn once and applied to every image.
pub fn process_images_with(
    images: &[RgbImage],
    key: &SecretKey,
    direction: Direction,
    exec: Exec,
) -> Result<Vec<RgbImage>> {
    let Some(first) = images.first() else {
        return Ok(Vec::new());
    };
    for img in &images[1..] {
        first.same_dimensions(img)?;
    }
    let num_blocks = first.check_blockable()?;
    let contexts = block_contexts(key, num_blocks)?;
    let per_block = exec.map_range(num_blocks, |b| -> Result<Vec<Rgb>> {
        let ctx = &contexts[b];
        let start = b * BLOCK_PIXELS;
        let params = Channel::ALL.map(|c| ctx.channel_params(c));
        let mut local = ChaoticStream::new(ctx.y0);
        let mut kinds = vec![SubfunctionKind::Identity; usize::from(ctx.k10)];
        let mut out = Vec::with_capacity(BLOCK_PIXELS * images.len());
        for j in 0..BLOCK_PIXELS {
            draw_kinds(&mut local, &mut kinds)?;
            for img in images {
                let mut px = img.pixels()[start + j];
                for (c, p) in params.iter().enumerate() {
                    px[c] = apply_sequence(&kinds, px[c], p, direction);
                }
                out.push(px);
            }
        }
        Ok(out)
    });
    let mut outs: Vec<RgbImage> = images.to_vec();
    let n = images.len();
    for (b, block) in per_block.into_iter().enumerate() {
        let block = block?;
        for j in 0..BLOCK_PIXELS {
            for (i, img) in outs.iter_mut().enumerate() {
                img.pixels_mut()[b * BLOCK_PIXELS + j] = block[j * n + i];
            }
        }
    }
    Ok(outs)
}

#[inline]
fn apply_sequence(kinds: &[SubfunctionKind], mut x: u8, p: &ChannelParams, direction: Direction) -> u8 {
    match direction {
        Direction::Encrypt => {
            for kind in kinds {
                x = kind.apply(x, p, direction);
            }
        }
        Direction::Decrypt => {
            for kind in kinds.iter().rev() {
                x = kind.apply(x, p, direction);
            }
        }
    }
    x
}

/// Whether encrypting `plain` under `ctx` gives `cipher`, stopping at the
/// first mismatching pixel.
pub fn block_matches(plain: &PixelBlock, cipher: &PixelBlock, ctx: &BlockContext) -> Result<bool> {
    let params = Channel::ALL.map(|c| ctx.channel_params(c));
    let mut local = ChaoticStream::new(ctx.y0);
    let mut kinds = vec![SubfunctionKind::Identity; usize::from(ctx.k10)];
    for (p, c) in plain.pixels.iter().zip(&cipher.pixels) {
        draw_kinds(&mut local, &mut kinds)?;
        for ch in 0..3 {
            if apply_sequence(&kinds, p[ch], &params[ch], Direction::Encrypt) != c[ch] {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

pub fn encrypt_image(img: &RgbImage, key: &SecretKey) -> Result<RgbImage> {
    process_image(img, key, Direction::Encrypt)
}

pub fn decrypt_image(img: &RgbImage, key: &SecretKey) -> Result<RgbImage> {
    process_image(img, key, Direction::Decrypt)
}

/// The subfunction sequence of every pixel of a block, in encryption order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockTrace {
    pub pixels: Vec<Vec<SubfunctionKind>>,
}

pub fn trace_block(ctx: &BlockContext) -> Result<BlockTrace> {
    let mut local = ChaoticStream::new(ctx.y0);
    let mut pixels = Vec::with_capacity(BLOCK_PIXELS);
    for _ in 0..BLOCK_PIXELS {
        let mut kinds = vec![SubfunctionKind::Identity; usize::from(ctx.k10)];
        draw_kinds(&mut local, &mut kinds)?;
        pixels.push(kinds);
    }
    Ok(BlockTrace { pixels })
}

/// The reduced encryption function of every (pixel, channel) of a block.
pub fn block_composites(ctx: &BlockContext) -> Result<Vec<[CompositeFn; 3]>> {
    let trace = trace_block(ctx)?;
    let params = Channel::ALL.map(|c| ctx.channel_params(c));
    Ok(trace
        .pixels
        .iter()
        .map(|kinds| params.map(|p| CompositeFn::reduce(kinds.iter().map(|k| k.term(&p)))))
        .collect())
}
