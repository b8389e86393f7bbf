//! Attacks on the cipher: the first-block search, `K10` inference from
//! colliding blocks, the chosen-plaintext recovery of `K4..K10 mod 128`, and
//! the known-plaintext masking attack.

pub mod cpa;
pub mod first_block;
pub mod kpa;
pub mod probe;

pub use cpa::{
    cpa_step1_collect, cpa_step2_prune, cpa_step3_recover, craft_cpa_images, scan_xor_positions, CandidateKeyFragment,
    XorEquivalentRecord, XorScan, ECONOMY_OFFSETS,
};
pub use first_block::first_block_search;
pub use kpa::{kpa_mask_attack, masking_image};
pub use probe::{craft_probe_image, find_identical_cipher_blocks, infer_k10_candidates, p_b_collision, IdenticalPairSet, K10Inference};
