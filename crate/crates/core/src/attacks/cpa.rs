//! Chosen-plaintext recovery of `K4..K10 mod 128`.
//!
//! The attacker encrypts `I_l = I_0 ^ l` for `l = 0..127`. At each position
//! the 128 ciphertext bytes reveal whether the encryption function is a
//! plain XOR, and if so its constant. Those constants, taken mod 128 and
//! grouped by block residue, span small XOR subspaces determined by the
//! channel's `(a0, a1)` subkeys, which can then be searched per `K10` guess.

use std::collections::BTreeSet;

use crate::algebra::{alpha_star_set, pair_candidates};
use crate::cipher::{subkey_period, Channel};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::image::{RgbImage, BLOCK_PIXELS};
use crate::key::SecretKey;

/// The 13 offsets sufficient for a cheaper, slightly less exact step 1.
pub const ECONOMY_OFFSETS: [u8; 13] = [0, 1, 2, 3, 4, 7, 8, 15, 16, 31, 32, 63, 64];

/// Images of the full chosen set.
pub const FULL_IMAGE_COUNT: usize = 128;

/// `base ^ l` for `l = 0..count`.
pub fn craft_cpa_images(base: &RgbImage, count: usize) -> Result<Vec<RgbImage>> {
    if !(1..=FULL_IMAGE_COUNT).contains(&count) {
        return Err(Error::OutOfRange(format!("image count {count} not in 1..=128")));
    }
    Ok((0..count).map(|l| base.xor_scalar(l as u8)).collect())
}

/// `base ^ l` for each listed offset.
pub fn craft_cpa_images_with_offsets(base: &RgbImage, offsets: &[u8]) -> Vec<RgbImage> {
    offsets.iter().map(|&l| base.xor_scalar(l)).collect()
}

/// One XOR-equivalent (channel, block, pixel) position and its constant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct XorEquivalentRecord {
    pub channel: Channel,
    pub block: usize,
    /// Pixel within the block, `0..16`.
    pub pixel: usize,
    /// `gamma` with `E(x) = x ^ gamma`.
    pub gamma: u8,
}

/// Result of testing every position against the chosen pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XorScan {
    pub width: usize,
    pub height: usize,
    /// XOR offset of each pair's plaintext relative to the first pair.
    pub offsets: Vec<u8>,
    /// Per position and channel, the index of the first pair that
    /// contradicts `E(x) = x ^ gamma`, or `offsets.len()` if none does.
    pub first_failure: Vec<[u16; 3]>,
    /// `cipher ^ plain` of the first pair; the XOR constant where flagged.
    pub gammas: Vec<[u8; 3]>,
}

impl XorScan {
    pub fn is_flagged(&self, pixel: usize, channel: usize) -> bool {
        usize::from(self.first_failure[pixel][channel]) == self.offsets.len()
    }

    pub fn flagged_count(&self) -> usize {
        self.detections_with(self.offsets.len())
    }

    /// Positions (over all channels) that pass the test on the first
    /// `images` pairs alone.
    pub fn detections_with(&self, images: usize) -> usize {
        self.first_failure
            .iter()
            .flatten()
            .filter(|&&f| usize::from(f) >= images)
            .count()
    }

    /// Flagged positions per channel, ordered by block then pixel.
    pub fn records(&self) -> [Vec<XorEquivalentRecord>; 3] {
        Channel::ALL.map(|ch| {
            let c = ch.index();
            (0..self.gammas.len())
                .filter(|&i| self.is_flagged(i, c))
                .map(|i| XorEquivalentRecord {
                    channel: ch,
                    block: i / BLOCK_PIXELS,
                    pixel: i % BLOCK_PIXELS,
                    gamma: self.gammas[i][c],
                })
                .collect()
        })
    }
}

/// Tests each position of the chosen pairs for XOR-equivalence.
///
/// Pair `l` must hold `plain_0 ^ d_l` for a distinct offset `d_l`, which is
/// read off the first byte. With the 128 offsets `0..127` the test is exact
/// for this cipher, because its encryption functions all satisfy
/// `E(x ^ 128) = E(x) ^ 128`.
pub fn scan_xor_positions(pairs: &[(RgbImage, RgbImage)], exec: Exec) -> Result<XorScan> {
    let (plain0, cipher0) = pairs.first().ok_or(Error::EmptyEvidence)?;
    plain0.check_blockable()?;
    let mut offsets = Vec::with_capacity(pairs.len());
    for (p, c) in pairs {
        plain0.same_dimensions(p)?;
        plain0.same_dimensions(c)?;
        let d = p.pixels()[0][0] ^ plain0.pixels()[0][0];
        if offsets.contains(&d) || *p != plain0.xor_scalar(d) {
            return Err(Error::NotXorFamily);
        }
        offsets.push(d);
    }
    let scanned = exec.map_range(plain0.len(), |i| {
        let p0 = plain0.pixels()[i];
        let c0 = cipher0.pixels()[i];
        let gamma = [0, 1, 2].map(|c| p0[c] ^ c0[c]);
        let fail = [0, 1, 2].map(|c| {
            pairs
                .iter()
                .zip(&offsets)
                .position(|((_, ci), &d)| ci.pixels()[i][c] ^ c0[c] != d)
                .unwrap_or(offsets.len()) as u16
        });
        (fail, gamma)
    });
    let (first_failure, gammas) = scanned.into_iter().unzip();
    Ok(XorScan {
        width: plain0.width(),
        height: plain0.height(),
        offsets,
        first_failure,
        gammas,
    })
}

/// Step 1: XOR-equivalent positions per channel.
pub fn cpa_step1_collect(pairs: &[(RgbImage, RgbImage)], exec: Exec) -> Result<[Vec<XorEquivalentRecord>; 3]> {
    Ok(scan_xor_positions(pairs, exec)?.records())
}

/// Estimated A* sets for one `K10` guess, indexed `[channel][class]`, with
/// `max(T/2, 1)` residue classes of block indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassSets {
    pub k10: u8,
    pub sets: [Vec<BTreeSet<u8>>; 3],
}

impl ClassSets {
    pub fn classes(&self) -> usize {
        self.sets[0].len()
    }
}

/// Residue classes used for `k10`: blocks `T/2` apart have subkeys that
/// differ by 128 and so agree mod 128.
pub fn residue_classes(k10: u8) -> usize {
    (subkey_period(k10) as usize / 2).max(1)
}

/// XOR span of `values ∪ {0, 127}`, or `None` once it exceeds 8 elements.
fn bounded_span(values: impl IntoIterator<Item = u8>) -> Option<BTreeSet<u8>> {
    let mut span: Vec<u8> = vec![0, 127];
    for v in values {
        if span.contains(&v) {
            continue;
        }
        if span.len() == 8 {
            return None;
        }
        let shifted: Vec<u8> = span.iter().map(|s| s ^ v).collect();
        span.extend(shifted);
    }
    Some(span.into_iter().collect())
}

/// Step 2: groups constants mod 128 by block residue and closes each group
/// under XOR together with `{0, 127}`. Returns `None` (guess eliminated)
/// when a closure exceeds 8 elements.
pub fn cpa_step2_prune(records: &[Vec<XorEquivalentRecord>; 3], k10_guess: u8) -> Option<ClassSets> {
    let classes = residue_classes(k10_guess);
    let mut sets: [Vec<BTreeSet<u8>>; 3] = Default::default();
    for (c, recs) in records.iter().enumerate() {
        let mut raw = vec![BTreeSet::new(); classes];
        for r in recs {
            raw[r.block % classes].insert(r.gamma & 0x7f);
        }
        for group in raw {
            sets[c].push(bounded_span(group)?);
        }
    }
    Some(ClassSets { k10: k10_guess, sets })
}

/// `K4..K9` and `K10`, each modulo 128.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CandidateKeyFragment {
    pub k10: u8,
    /// `K4..K9 mod 128`.
    pub subkeys: [u8; 6],
}

impl CandidateKeyFragment {
    pub fn new(subkeys: [u8; 6], k10: u8) -> Self {
        CandidateKeyFragment {
            k10: k10 & 0x7f,
            subkeys: subkeys.map(|k| k & 0x7f),
        }
    }

    pub fn from_key(key: &SecretKey) -> Self {
        Self::new(std::array::from_fn(|i| key.k(i + 4)), key.k10())
    }

    /// `K_i mod 128`, `i` in `4..=9`.
    pub fn k(&self, i: usize) -> u8 {
        self.subkeys[i - 4]
    }

    /// Fragments the verification cannot tell apart from this one: any
    /// per-channel swap of `(a0, a1)`, optionally combined with
    /// complementing every subkey and mirroring `K10` to `128 - K10`.
    /// Sorted, without duplicates; includes `self`.
    pub fn orbit(&self) -> Vec<Self> {
        let mut out = Vec::with_capacity(16);
        for mask in 0..8 {
            let mut s = self.subkeys;
            for c in 0..3 {
                if mask & (1 << c) != 0 {
                    s.swap(c, c + 3);
                }
            }
            out.push(Self::new(s, self.k10));
            out.push(Self::new(s.map(|k| k ^ 0x7f), 128 - self.k10));
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    pub const CSV_HEADER: &'static str = "k4,k5,k6,k7,k8,k9,k10";

    pub fn to_csv_row(&self) -> String {
        let s = &self.subkeys;
        format!("{},{},{},{},{},{},{}", s[0], s[1], s[2], s[3], s[4], s[5], self.k10)
    }
}

fn star_mask(a: u8, b: u8) -> u128 {
    alpha_star_set(a, b).into_iter().fold(0, |m, x| m | 1u128 << x)
}

fn set_mask(set: &BTreeSet<u8>) -> u128 {
    set.iter().fold(0, |m, &x| m | 1u128 << x)
}

/// Surviving `(a0*, a1*)` at block 0 for one channel.
fn channel_pairs(sets: &[BTreeSet<u8>], k10: u8) -> Vec<(u8, u8)> {
    let w = k10 & 0x7f;
    let (k0, largest) = sets
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.len().cmp(&b.1.len()).then(b.0.cmp(&a.0)))
        .expect("at least one residue class");
    let Ok(at_k0) = pair_candidates(largest) else {
        return Vec::new();
    };
    let masks: Vec<u128> = sets.iter().map(set_mask).collect();
    let shift = |v: u8, k: usize| ((usize::from(v) + k * usize::from(w)) % 128) as u8;
    let back = |v: u8| ((usize::from(v) + 128 - (k0 * usize::from(w)) % 128) % 128) as u8;
    at_k0
        .into_iter()
        .map(|(x, y)| (back(x), back(y)))
        .filter(|&(a, b)| {
            masks
                .iter()
                .enumerate()
                .all(|(k, &m)| m & !star_mask(shift(a, k), shift(b, k)) == 0)
        })
        .collect()
}

/// Step 3: candidate fragments for every surviving guess, with their
/// indistinguishable orbits, sorted and deduplicated. Fails with
/// `NoCandidate` when every guess is eliminated.
pub fn cpa_step3_recover(survivors: &[ClassSets]) -> Result<Vec<CandidateKeyFragment>> {
    let mut out = BTreeSet::new();
    for cs in survivors {
        let per_channel = cs.sets.each_ref().map(|sets| channel_pairs(sets, cs.k10));
        if per_channel.iter().any(Vec::is_empty) {
            continue;
        }
        for &(r0, r1) in &per_channel[0] {
            for &(g0, g1) in &per_channel[1] {
                for &(b0, b1) in &per_channel[2] {
                    let f = CandidateKeyFragment::new([r0, g0, b0, r1, g1, b1], cs.k10);
                    out.extend(f.orbit());
                }
            }
        }
    }
    if out.is_empty() {
        return Err(Error::NoCandidate);
    }
    Ok(out.into_iter().collect())
}

/// All three steps over every `K10` guess.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CpaOutcome {
    /// Guesses that passed step 2.
    pub step2_survivors: Vec<u8>,
    pub fragments: Vec<CandidateKeyFragment>,
}

pub fn run_cpa(pairs: &[(RgbImage, RgbImage)], exec: Exec) -> Result<CpaOutcome> {
    let records = cpa_step1_collect(pairs, exec)?;
    let guesses: Vec<u8> = (0..=255).collect();
    let survivors: Vec<ClassSets> = exec
        .map(&guesses, |&g| cpa_step2_prune(&records, g))
        .into_iter()
        .flatten()
        .collect();
    let fragments = cpa_step3_recover(&survivors)?;
    Ok(CpaOutcome {
        step2_survivors: survivors.iter().map(|s| s.k10).collect(),
        fragments,
    })
}
