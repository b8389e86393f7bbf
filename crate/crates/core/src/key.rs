use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};

/// The 80-bit secret key `K1..K10`, one byte per subkey.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SecretKey([u8; 10]);

impl SecretKey {
    pub const fn new(subkeys: [u8; 10]) -> Self {
        SecretKey(subkeys)
    }

    /// Subkey `K_i` with the usual 1-based numbering.
    ///
    /// Panics if `i` is not in `1..=10`.
    pub fn k(&self, i: usize) -> u8 {
        assert!((1..=10).contains(&i), "subkey index {i} out of range");
        self.0[i - 1]
    }

    pub fn set_k(&mut self, i: usize, value: u8) {
        assert!((1..=10).contains(&i), "subkey index {i} out of range");
        self.0[i - 1] = value;
    }

    pub fn with_k(mut self, i: usize, value: u8) -> Self {
        self.set_k(i, value);
        self
    }

    pub fn k10(&self) -> u8 {
        self.0[9]
    }

    pub fn bytes(&self) -> &[u8; 10] {
        &self.0
    }

    /// `K1..K9`, the subkeys touched by the per-block update.
    pub fn dynamic_subkeys(&self) -> [u8; 9] {
        let mut out = [0u8; 9];
        out.copy_from_slice(&self.0[..9]);
        out
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut bytes = [0u8; 10];
        rng.fill(&mut bytes);
        SecretKey(bytes)
    }

    pub fn to_hex(&self) -> String {
        hex::encode_upper(self.0)
    }
}

impl FromStr for SecretKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.len() != 20 {
            return Err(Error::KeyFormat(s.to_string()));
        }
        let mut bytes = [0u8; 10];
        hex::decode_to_slice(s, &mut bytes).map_err(|_| Error::KeyFormat(s.to_string()))?;
        Ok(SecretKey(bytes))
    }
}

impl fmt::Display for SecretKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl From<[u8; 10]> for SecretKey {
    fn from(bytes: [u8; 10]) -> Self {
        SecretKey(bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_upper_and_lower_case() {
        let upper: SecretKey = "2A84BCF25E6A664E4C41".parse().unwrap();
        let lower: SecretKey = "2a84bcf25e6a664e4c41".parse().unwrap();
        assert_eq!(upper, lower);
        assert_eq!(upper.k(1), 0x2A);
        assert_eq!(upper.k(4), 0xF2);
        assert_eq!(upper.k10(), 0x41);
        assert_eq!(upper.to_string(), "2A84BCF25E6A664E4C41");
    }

    #[test]
    fn rejects_bad_text() {
        for bad in ["", "2A84", "2A84BCF25E6A664E4C4", "2A84BCF25E6A664E4C411", "+A84BCF25E6A664E4C41", "ZZ84BCF25E6A664E4C41"] {
            assert!(matches!(bad.parse::<SecretKey>(), Err(Error::KeyFormat(_))), "{bad}");
        }
    }

    proptest! {
        #[test]
        fn hex_text_roundtrips(bytes in any::<[u8; 10]>()) {
            let key = SecretKey::new(bytes);
            let text = key.to_string();
            prop_assert_eq!(text.len(), 20);
            prop_assert_eq!(text.parse::<SecretKey>().unwrap(), key);
        }
    }
}
