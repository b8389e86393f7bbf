//! Invalid, weak and partially equivalent keys.

use std::fmt::Write as _;

use crate::cipher::{global_seed_sums, global_seed_value, subkey_period};
use crate::key::SecretKey;

/// Witness value reported for the all-zero `S1 = S2 = 0` case, which makes
/// `X0 = 0` through the modulo wrap rather than through a `C` in `0..=30`.
pub const ZERO_WRAP_WITNESS: u8 = 32;

/// Number of invalid `(K4..K9)` combinations, `ceil(16^6 / 3)`.
pub const INVALID_X0_SUBKEY_COUNT: u64 = 5_592_406;

/// Returns `C` when `S2 = 3C` and `S1 = 2^19 (32 - C)`, i.e. when the key
/// drives the global map to the fixed point 0. The all-zero `K4..K9` case,
/// where both sums vanish, reports [`ZERO_WRAP_WITNESS`].
pub fn is_invalid_x0(key: &SecretKey) -> Option<u8> {
    let (s1, s2) = global_seed_sums(key);
    if s1 == 0 && s2 == 0 {
        return Some(ZERO_WRAP_WITNESS);
    }
    if s2 % 3 != 0 {
        return None;
    }
    let c = s2 / 3;
    (c <= 30 && s1 == (1 << 19) * (32 - c)).then_some(c as u8)
}

/// Number of vectors in `{0..15}^n` whose component sum is `r` modulo 3.
pub fn count_mod3(n: u32, r: u32) -> u64 {
    let total = 16u64.pow(n);
    if r.is_multiple_of(3) {
        total.div_ceil(3)
    } else {
        total / 3
    }
}

/// Probability that a block seed evaluates to 0, given `m` zero bits in `B2`
/// and `n` zero bits in `2^24 - B2`, with bit positions drawn uniformly.
pub fn probability_y0_zero(m: u32, n: u32) -> f64 {
    let (m, n) = (f64::from(m), f64::from(n));
    m.powf(n) * (24.0 - m).powf(24.0 - n) / 24f64.powi(24)
}

/// Visual-leak flags: a channel leaks when its parameters make every
/// subfunction the identity or the complement.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct VisualLeak {
    pub red: bool,
    pub green: bool,
    pub blue: bool,
    pub whole_image: bool,
}

impl VisualLeak {
    pub fn any(&self) -> bool {
        self.red || self.green || self.blue || self.whole_image
    }

    pub fn channel(&self, c: usize) -> bool {
        [self.red, self.green, self.blue][c]
    }
}

fn leaky_pair(a: u8, b: u8) -> bool {
    matches!((a, b), (0, 0) | (255, 1))
}

pub fn audit_weak_visual(key: &SecretKey) -> VisualLeak {
    let k = |i| key.k(i);
    let red = leaky_pair(k(4), k(5)) && leaky_pair(k(7), k(8));
    let green = leaky_pair(k(5), k(6)) && leaky_pair(k(8), k(9));
    let blue = leaky_pair(k(6), k(4)) && leaky_pair(k(9), k(7));
    let whole_image = (4..=9).all(|i| k(i) == 0);
    VisualLeak {
        red,
        green,
        blue,
        whole_image,
    }
}

/// Weak-key findings that depend on `K10` alone.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct K10Assessment {
    pub k10: u8,
    pub period: u32,
    /// `K10 = 0`: no subfunction is applied, ciphertext equals plaintext.
    pub identity: bool,
    /// `K10 = 1`: each pixel passes through a single subfunction.
    pub major_weak: bool,
    /// Subkey period below 256, i.e. even `K10`.
    pub short_period: bool,
    /// Below the recommended minimum of 8 subfunctions per pixel.
    pub below_recommended: bool,
}

pub fn assess_k10(k10: u8) -> K10Assessment {
    let period = subkey_period(k10);
    K10Assessment {
        k10,
        period,
        identity: k10 == 0,
        major_weak: k10 == 1,
        short_period: period < 256,
        below_recommended: k10 < 8,
    }
}

/// Keys obtained by independently swapping the nibbles of `K7`, `K8`, `K9`.
/// The audited key comes first; duplicates are removed.
pub fn class1_equivalents(key: &SecretKey) -> Vec<SecretKey> {
    let mut out = vec![*key];
    for mask in 1u8..8 {
        let mut k = *key;
        for (bit, i) in [7usize, 8, 9].into_iter().enumerate() {
            if mask & (1 << bit) != 0 {
                k.set_k(i, k.k(i).rotate_left(4));
            }
        }
        if !out.contains(&k) {
            out.push(k);
        }
    }
    out
}

/// The audited key followed by every key that flips the top bit of exactly
/// two of `K7`, `K8`, `K9` while keeping the global seed unchanged (one of the
/// pair below 128, the other at or above).
pub fn class2_equivalents(key: &SecretKey) -> Vec<SecretKey> {
    let mut out = vec![*key];
    for (i, j) in [(7usize, 8usize), (7, 9), (8, 9)] {
        if (key.k(i) >= 128) != (key.k(j) >= 128) {
            out.push(key.with_k(i, key.k(i) ^ 0x80).with_k(j, key.k(j) ^ 0x80));
        }
    }
    out
}

/// Rough log2 size of the effective key space after removing invalid keys,
/// merging partially equivalent keys, and discarding weak `K10` values.
pub fn estimated_log2_keyspace() -> f64 {
    let k1_k3 = 24.0;
    let k4_k6 = (2f64.powi(24) * (1.0 - INVALID_X0_SUBKEY_COUNT as f64 / 2f64.powi(48))).log2();
    let k7_k9 = (136f64.powi(3) / 2.0).log2();
    let k10 = 126f64.log2();
    k1_k3 + k4_k6 + k7_k9 + k10
}

#[derive(Clone, Debug, PartialEq)]
pub struct KeyAuditReport {
    pub key: SecretKey,
    pub x0: f64,
    pub invalid_x0: Option<u8>,
    pub k10: K10Assessment,
    pub visual_leak: VisualLeak,
    pub class1_orbit: Vec<SecretKey>,
    pub class2_orbit: Vec<SecretKey>,
    pub estimated_log2_keyspace: f64,
}

pub fn audit_key(key: &SecretKey) -> KeyAuditReport {
    KeyAuditReport {
        key: *key,
        x0: global_seed_value(key),
        invalid_x0: is_invalid_x0(key),
        k10: assess_k10(key.k10()),
        visual_leak: audit_weak_visual(key),
        class1_orbit: class1_equivalents(key),
        class2_orbit: class2_equivalents(key),
        estimated_log2_keyspace: estimated_log2_keyspace(),
    }
}

fn join_keys(keys: &[SecretKey], sep: &str) -> String {
    keys.iter().map(SecretKey::to_hex).collect::<Vec<_>>().join(sep)
}

impl KeyAuditReport {
    /// Any finding beyond the always-present equivalence orbits.
    pub fn is_flagged(&self) -> bool {
        self.invalid_x0.is_some()
            || self.visual_leak.any()
            || self.k10.identity
            || self.k10.major_weak
            || self.k10.short_period
            || self.k10.below_recommended
    }

    /// `name = value` lines.
    pub fn to_kv_text(&self) -> String {
        let mut s = String::new();
        let witness = self.invalid_x0.map_or("none".to_string(), |c| c.to_string());
        let v = &self.visual_leak;
        let k = &self.k10;
        let _ = writeln!(s, "key = {}", self.key);
        let _ = writeln!(s, "x0 = {:.17}", self.x0);
        let _ = writeln!(s, "invalid_x0 = {}", self.invalid_x0.is_some());
        let _ = writeln!(s, "invalid_x0_witness = {witness}");
        let _ = writeln!(s, "k10 = {}", k.k10);
        let _ = writeln!(s, "k10_period = {}", k.period);
        let _ = writeln!(s, "k10_identity = {}", k.identity);
        let _ = writeln!(s, "k10_major_weak = {}", k.major_weak);
        let _ = writeln!(s, "k10_short_period = {}", k.short_period);
        let _ = writeln!(s, "k10_below_recommended = {}", k.below_recommended);
        let _ = writeln!(s, "leak_red = {}", v.red);
        let _ = writeln!(s, "leak_green = {}", v.green);
        let _ = writeln!(s, "leak_blue = {}", v.blue);
        let _ = writeln!(s, "leak_whole_image = {}", v.whole_image);
        let _ = writeln!(s, "class1_orbit = {}", join_keys(&self.class1_orbit, " "));
        let _ = writeln!(s, "class2_orbit = {}", join_keys(&self.class2_orbit, " "));
        let _ = writeln!(s, "estimated_log2_keyspace = {:.4}", self.estimated_log2_keyspace);
        s
    }

    pub const CSV_HEADER: &'static str = "key,x0,invalid_x0,witness,k10,period,identity,major_weak,short_period,below_recommended,leak_red,leak_green,leak_blue,leak_whole,class1_orbit,class2_orbit,log2_keyspace";

    /// One CSV row matching [`Self::CSV_HEADER`]; orbit lists are `;`-separated.
    pub fn to_csv_row(&self) -> String {
        let v = &self.visual_leak;
        let k = &self.k10;
        format!(
            "{},{:.17},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{:.4}",
            self.key,
            self.x0,
            self.invalid_x0.is_some(),
            self.invalid_x0.map_or(String::new(), |c| c.to_string()),
            k.k10,
            k.period,
            k.identity,
            k.major_weak,
            k.short_period,
            k.below_recommended,
            v.red,
            v.green,
            v.blue,
            v.whole_image,
            join_keys(&self.class1_orbit, ";"),
            join_keys(&self.class2_orbit, ";"),
            self.estimated_log2_keyspace
        )
    }
}
