use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// A finite word over `{0, 1}`, displayed as e.g. `"0110"`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DigitString(Vec<u8>);

impl DigitString {
    pub fn new() -> Self {
        Self::default()
    }

    /// Panics if a digit is not 0 or 1.
    pub fn from_digits(digits: Vec<u8>) -> Self {
        assert!(digits.iter().all(|&d| d <= 1), "digits must be 0 or 1");
        Self(digits)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn ones(n: usize) -> Self {
        Self(vec![1; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn push(&mut self, digit: u8) {
        assert!(digit <= 1, "digits must be 0 or 1");
        self.0.push(digit);
    }

    pub fn extend_from(&mut self, other: &DigitString) {
        self.0.extend_from_slice(&other.0);
    }

    /// First `n` digits.
    pub fn truncated(&self, n: usize) -> DigitString {
        Self(self.0[..n.min(self.0.len())].to_vec())
    }

    /// Swaps every 0 and 1.
    pub fn complement(&self) -> DigitString {
        Self(self.0.iter().map(|d| 1 - d).collect())
    }

    /// The `n` digits encoded in the low bits of `mask`, bit `i` holding digit `i + 1`.
    pub fn from_mask(mask: u64, n: usize) -> DigitString {
        Self((0..n).map(|i| (mask >> i & 1) as u8).collect())
    }
}

impl fmt::Display for DigitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.0 {
            f.write_str(if *d == 0 { "0" } else { "1" })?;
        }
        Ok(())
    }
}

impl FromStr for DigitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.trim()
            .chars()
            .filter(|ch| !matches!(ch, ',' | ' ' | '_'))
            .map(|ch| match ch {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::Parse(format!("digit {other:?} is not 0 or 1"))),
            })
            .collect::<Result<Vec<u8>>>()
            .map(DigitString)
    }
}

impl Serialize for DigitString {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}
