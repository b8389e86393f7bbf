//! Composition calculus for byte maps built from XOR and modular addition.
//!
//! Every subfunction of the cipher is either `x ^ alpha` or
//! `(x + beta) mod 256`. Adjacent terms of the same kind merge, so each
//! per-channel encryption function reduces to an alternating chain. The
//! helpers here reason about when such a chain collapses to a single XOR and
//! what the XOR constant can be.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Xor(u8),
    Add(u8),
}

impl Term {
    #[inline]
    pub fn apply(self, x: u8) -> u8 {
        match self {
            Term::Xor(a) => x ^ a,
            Term::Add(b) => x.wrapping_add(b),
        }
    }

    pub fn value(self) -> u8 {
        match self {
            Term::Xor(v) | Term::Add(v) => v,
        }
    }

    pub fn is_xor(self) -> bool {
        matches!(self, Term::Xor(_))
    }
}

/// A reduced chain of terms, applied left to right.
///
/// Adjacent terms always differ in kind and no term carries the value 0.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct CompositeFn {
    terms: Vec<Term>,
}

impl CompositeFn {
    pub fn identity() -> Self {
        Self::default()
    }

    /// Builds the reduced form of `chain`.
    pub fn reduce<I: IntoIterator<Item = Term>>(chain: I) -> Self {
        let mut f = CompositeFn::identity();
        for t in chain {
            f.push(t);
        }
        f
    }

    /// Appends `term` (applied after the current chain) keeping the chain
    /// reduced.
    pub fn push(&mut self, term: Term) {
        let merged = match (self.terms.last().copied(), term) {
            (Some(Term::Xor(a)), Term::Xor(b)) => Some(Term::Xor(a ^ b)),
            (Some(Term::Add(a)), Term::Add(b)) => Some(Term::Add(a.wrapping_add(b))),
            _ => None,
        };
        match merged {
            Some(t) => {
                self.terms.pop();
                if t.value() != 0 {
                    self.terms.push(t);
                }
            }
            None if term.value() != 0 => self.terms.push(term),
            None => {}
        }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Number of terms after reduction.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn has_add(&self) -> bool {
        self.terms.iter().any(|t| !t.is_xor())
    }

    #[inline]
    pub fn apply(&self, x: u8) -> u8 {
        self.terms.iter().fold(x, |acc, t| t.apply(acc))
    }

    pub fn table(&self) -> [u8; 256] {
        let mut out = [0u8; 256];
        for (x, slot) in out.iter_mut().enumerate() {
            *slot = self.apply(x as u8);
        }
        out
    }

    /// XOR of all XOR-term values.
    pub fn xor_aggregate(&self) -> u8 {
        self.terms
            .iter()
            .filter_map(|t| match t {
                Term::Xor(a) => Some(*a),
                Term::Add(_) => None,
            })
            .fold(0, |acc, a| acc ^ a)
    }

    /// Exhaustive check: `Some(gamma)` iff `f(x) == x ^ gamma` for all 256
    /// inputs.
    pub fn xor_constant(&self) -> Option<u8> {
        let gamma = self.apply(0);
        (1..=255u8)
            .all(|x| self.apply(x) == x ^ gamma)
            .then_some(gamma)
    }
}

/// How many XOR offsets the equivalence test probes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProbeBudget {
    /// Offsets `1..=255`; decides XOR-equivalence for any byte map.
    Full,
    /// Offsets `1..=127`; sufficient for XOR/ADD composites, where
    /// `f(x ^ 128) == f(x) ^ 128` always holds.
    Half,
}

impl ProbeBudget {
    pub fn max_offset(self) -> u8 {
        match self {
            ProbeBudget::Full => 255,
            ProbeBudget::Half => 127,
        }
    }
}

/// Tests `f(0) ^ f(d) == d` for every probed offset `d` and returns
/// `gamma = f(0)` when all hold.
pub fn is_xor_equivalent<F: Fn(u8) -> u8>(f: F, budget: ProbeBudget) -> Option<u8> {
    let anchor = f(0);
    (1..=budget.max_offset())
        .all(|d| anchor ^ f(d) == d)
        .then_some(anchor)
}

/// Residue modulo 128 that any XOR constant of `composite` must share.
///
/// Whenever `composite` is extensionally `x ^ gamma`, `gamma` is either the
/// XOR aggregate of its XOR terms or that aggregate with the top bit flipped.
pub fn theorem1_gamma(composite: &CompositeFn) -> u8 {
    composite.xor_aggregate() & 0x7f
}

/// The set of feasible XOR aggregates for parameters `a0`, `a1`:
/// `{255, a0, a1, !a0, !a1, a0^a1, a0^a1^255}`.
///
/// Together with 0 it is closed under XOR. The companion set of feasible
/// addition aggregates, `{z1*(a0+b0) + z2*(a1+b1) : z1 + z2 <= K10}`, is never
/// enumerated; no attack consumes it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AlphaSet {
    pub a0: u8,
    pub a1: u8,
}

impl AlphaSet {
    pub fn new(a0: u8, a1: u8) -> Self {
        AlphaSet { a0, a1 }
    }

    pub fn members(&self) -> BTreeSet<u8> {
        let (a0, a1) = (self.a0, self.a1);
        [255, a0, a1, a0 ^ 255, a1 ^ 255, a0 ^ a1, a0 ^ a1 ^ 255]
            .into_iter()
            .collect()
    }

    pub fn with_zero(&self) -> BTreeSet<u8> {
        let mut s = self.members();
        s.insert(0);
        s
    }

    /// Projection of `members() ∪ {0}` modulo 128.
    pub fn mod128(&self) -> BTreeSet<u8> {
        self.with_zero().into_iter().map(|x| x & 0x7f).collect()
    }
}

/// `A* = {0, 127, a0*, a1*, a0*^127, a1*^127, a0*^a1*, a0*^a1*^127}` for the
/// 7-bit residues of `a0`, `a1`.
pub fn alpha_star_set(a0: u8, a1: u8) -> BTreeSet<u8> {
    let (a, b) = (a0 & 0x7f, a1 & 0x7f);
    [0, 127, a, b, a ^ 127, b ^ 127, a ^ b, a ^ b ^ 127]
        .into_iter()
        .collect()
}

/// Every `(a0*, a1*)` pair whose A* set equals `astar`.
///
/// Sizes 2, 4 and 8 yield 4, 12 and 24 pairs. For sizes 2 and 4 this is a
/// superset of the shorter published lists, which omit pairs such as
/// `(0, 0)` or `(a, 0)` that generate the same set.
pub fn pair_candidates(astar: &BTreeSet<u8>) -> Result<Vec<(u8, u8)>> {
    let well_formed = astar.contains(&0) && astar.contains(&127) && astar.iter().all(|&x| x < 128);
    if !well_formed || !matches!(astar.len(), 2 | 4 | 8) {
        return Err(Error::MalformedSet(astar.len()));
    }
    let mut pairs = Vec::with_capacity(24);
    for &x in astar {
        for &y in astar {
            if alpha_star_set(x, y) == *astar {
                pairs.push((x, y));
            }
        }
    }
    if pairs.is_empty() {
        // Right size but not a subspace spanned by 127 and two residues.
        return Err(Error::MalformedSet(astar.len()));
    }
    Ok(pairs)
}

/// The four `(a0*, a1*, K10*)` triples that the chosen-plaintext
/// verification cannot tell apart, the input triple first.
pub fn fact5_orbit(a0: u8, a1: u8, k10: u8) -> [(u8, u8, u8); 4] {
    let (a0, a1, w) = (a0 & 0x7f, a1 & 0x7f, k10 & 0x7f);
    let mirrored = (128 - w) & 0x7f;
    [
        (a0, a1, w),
        (a0 ^ 127, a1 ^ 127, mirrored),
        (a1, a0, w),
        (a1 ^ 127, a0 ^ 127, mirrored),
    ]
}

/// Probability that composing `n` maps, each `x ^ a` with probability `p` and
/// identity otherwise, yields `x ^ a`.
pub fn composition_xor_probability(n: u32, p: f64) -> f64 {
    (1.0 - (1.0 - 2.0 * p).powi(n as i32)) / 2.0
}

/// Upper bound on the probability that an encryption function keeps all
/// `k10` subfunctions after reduction.
pub fn len_equals_k10_bound(k10: u8) -> f64 {
    let pair: f64 = 5.0 / 32.0;
    if k10.is_multiple_of(2) {
        2.0 * pair.powi(i32::from(k10 / 2))
    } else {
        pair.powi(i32::from(k10 / 2)) * (7.0 / 8.0)
    }
}
