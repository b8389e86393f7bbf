//! Exhaustive `(Y0, K10)` search on the first block.
//!
//! Block 0 is encrypted with the raw subkeys and a local seed that is a
//! multiple of `2^-24`, so a known plain/cipher block pair can be matched
//! against every `(Y0, K10)` guess. The channel parameters come from
//! `K4..K9`, which the caller supplies as a hypothesis.

use crate::cipher::{block_matches, BlockContext};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::image::PixelBlock;

const SEED_BITS: u32 = 24;
const CHUNK: u64 = 4096;

/// Local seed of grid point `t` on a `2^bits` grid; the zero point maps to
/// `2^-24`, the value a zero seed is replaced with.
fn grid_seed(t: u64, bits: u32) -> f64 {
    let numerator = (t << (SEED_BITS - bits)).max(1);
    numerator as f64 / f64::from(1u32 << SEED_BITS)
}

/// Every `(Y0, K10)` on the grid that maps `plain` to `cipher`, sorted by
/// `K10` then `Y0`.
///
/// `subkeys` is the `K1..K9` hypothesis; only `K4..K9` influence the
/// result. The grid holds `2^y0_grid_bits` seeds; at 24 bits it covers
/// every reachable seed. Fails with `BudgetExceeded` when
/// `|k10_candidates| * 2^y0_grid_bits` exceeds `trial_cap`.
pub fn first_block_search(
    plain: &PixelBlock,
    cipher: &PixelBlock,
    subkeys: &[u8; 9],
    k10_candidates: &[u8],
    y0_grid_bits: u32,
    trial_cap: u64,
    exec: Exec,
) -> Result<Vec<(f64, u8)>> {
    if !(1..=SEED_BITS).contains(&y0_grid_bits) {
        return Err(Error::OutOfRange(format!("grid bits {y0_grid_bits} not in 1..=24")));
    }
    if plain.index != 0 || cipher.index != 0 {
        return Err(Error::OutOfRange("the search needs block 0".into()));
    }
    let mut k10s = k10_candidates.to_vec();
    k10s.sort_unstable();
    k10s.dedup();
    let grid = 1u64 << y0_grid_bits;
    // At full resolution t = 0 duplicates t = 1.
    let first = u64::from(y0_grid_bits == SEED_BITS);
    let per_k10 = grid - first;
    let trials = per_k10 * k10s.len() as u64;
    if trials > trial_cap {
        return Err(Error::BudgetExceeded {
            requested: trials,
            cap: trial_cap,
        });
    }
    let chunks = trials.div_ceil(CHUNK) as usize;
    let found = exec.map_range(chunks, |c| -> Result<Vec<(f64, u8)>> {
        let mut hits = Vec::new();
        let start = c as u64 * CHUNK;
        for trial in start..(start + CHUNK).min(trials) {
            let k10 = k10s[(trial / per_k10) as usize];
            let y0 = grid_seed(first + trial % per_k10, y0_grid_bits);
            let ctx = BlockContext::new(*subkeys, k10, y0)?;
            if block_matches(plain, cipher, &ctx)? {
                hits.push((y0, k10));
            }
        }
        Ok(hits)
    });
    let mut out = Vec::new();
    for hits in found {
        out.extend(hits?);
    }
    Ok(out)
}
