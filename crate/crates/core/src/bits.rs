//! Packed fixed-width bit strings.
//!
//! A [`BitString`] holds measurement outcomes, flip masks and physical qubit
//! states. Bit `i` is qubit `i` (or slot `i` for a per-qubit measurement
//! sequence). When a string is read as a basis-state index, bit 0 is the least
//! significant bit, so `"10"` (qubit 0 set) is index 1.
//!
//! The text form lists bits in index order, left to right.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{BitXor, BitXorAssign, Range};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use smallvec::{smallvec, SmallVec};

use crate::error::{Error, Result};

const WORD: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitString {
    width: usize,
    words: SmallVec<[u64; 2]>,
}

fn word_count(width: usize) -> usize {
    width.div_ceil(WORD)
}

impl BitString {
    pub fn zeros(width: usize) -> Self {
        Self {
            width,
            words: smallvec![0; word_count(width)],
        }
    }

    pub fn ones(width: usize) -> Self {
        let mut s = Self::zeros(width);
        for w in s.words.iter_mut() {
            *w = u64::MAX;
        }
        s.mask_tail();
        s
    }

    /// Builds a string of `width` bits from the low bits of `index`.
    pub fn from_index(index: u64, width: usize) -> Self {
        let mut s = Self::zeros(width);
        if width > 0 {
            s.words[0] = index;
            s.mask_tail();
        }
        s
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let bits: Vec<bool> = bits.into_iter().collect();
        let mut s = Self::zeros(bits.len());
        for (i, b) in bits.into_iter().enumerate() {
            if b {
                s.set(i, true);
            }
        }
        s
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.width, "bit {i} out of range for width {}", self.width);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.width, "bit {i} out of range for width {}", self.width);
        let bit = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= bit;
        } else {
            self.words[i / WORD] &= !bit;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.width, "bit {i} out of range for width {}", self.width);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// XOR-fold of all bits.
    pub fn parity(&self) -> bool {
        self.count_ones() % 2 == 1
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_ones(&self) -> bool {
        self.count_ones() == self.width
    }

    /// Basis-state index; only defined for widths up to 64.
    pub fn to_index(&self) -> u64 {
        assert!(self.width <= WORD, "width {} does not fit an index", self.width);
        self.words.first().copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.width).map(move |i| self.get(i))
    }

    /// Copies bits `range` into a new string of width `range.len()`.
    pub fn slice(&self, range: Range<usize>) -> BitString {
        assert!(
            range.end <= self.width,
            "slice {range:?} exceeds width {}",
            self.width
        );
        let mut out = BitString::zeros(range.len());
        for (k, i) in range.enumerate() {
            if self.get(i) {
                out.set(k, true);
            }
        }
        out
    }

    /// Number of set bits within `range`, modulo 2.
    pub fn parity_in(&self, range: Range<usize>) -> bool {
        assert!(
            range.end <= self.width,
            "range {range:?} exceeds width {}",
            self.width
        );
        let mut ones = 0usize;
        for i in range {
            ones += self.get(i) as usize;
        }
        ones % 2 == 1
    }

    pub fn try_xor(&self, other: &BitString) -> Result<BitString> {
        if self.width != other.width {
            return Err(Error::DimensionMismatch {
                expected: self.width,
                actual: other.width,
            });
        }
        Ok(self ^ other)
    }

    /// XOR of all strings in `strings`; `None` for an empty input.
    pub fn xor_fold<'a, I>(strings: I) -> Option<BitString>
    where
        I: IntoIterator<Item = &'a BitString>,
    {
        let mut it = strings.into_iter();
        let first = it.next()?.clone();
        Some(it.fold(first, |acc, s| acc ^ s))
    }

    fn mask_tail(&mut self) {
        let rem = self.width % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl BitXorAssign<&BitString> for BitString {
    fn bitxor_assign(&mut self, rhs: &BitString) {
        assert_eq!(self.width, rhs.width, "xor of strings with different widths");
        for (a, b) in self.words.iter_mut().zip(rhs.words.iter()) {
            *a ^= b;
        }
    }
}

impl BitXor<&BitString> for &BitString {
    type Output = BitString;

    fn bitxor(self, rhs: &BitString) -> BitString {
        let mut out = self.clone();
        out ^= rhs;
        out
    }
}

impl BitXor<&BitString> for BitString {
    type Output = BitString;

    fn bitxor(mut self, rhs: &BitString) -> BitString {
        self ^= rhs;
        self
    }
}

impl Ord for BitString {
    fn cmp(&self, other: &Self) -> Ordering {
        self.width
            .cmp(&other.width)
            .then_with(|| self.words.iter().rev().cmp(other.words.iter().rev()))
    }
}

impl PartialOrd for BitString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut out = BitString::zeros(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => out.set(i, true),
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "invalid bit character {other:?} in {s:?}"
                    )))
                }
            }
        }
        Ok(out)
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
