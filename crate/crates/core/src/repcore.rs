//! Characters of (Z/2)^k, representations as multisets of characters, and
//! sphere-product dimension tuples.
//!
//! A character is an element alpha of (Z/2)^k, stored as a bitmask with
//! coordinate 0 in the least significant bit. It names the one-dimensional
//! real representation on which the j-th generator acts by -1 exactly when
//! coordinate j of alpha is 1. A representation is an ordered list of
//! characters (its direct summands); the order is preserved because
//! derivation certificates reference summand positions, but all memo keys
//! erase it.

use std::fmt;

use crate::error::{Error, Result};

/// Largest supported group rank. Characters fit in a machine word and all
/// instances of interest are far below this.
pub const MAX_RANK: usize = 16;

/// An element of (Z/2)^k. Coordinate j (0-based) is bit j of `bits`;
/// coordinate 0 is the leftmost symbol in the textual form.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Character {
    bits: u16,
    rank: u8,
}

impl Character {
    /// Build a character from a raw bitmask. Panics if `k` exceeds
    /// [`MAX_RANK`] or if `bits` has bits at or above position `k`; both are
    /// internal contract violations, user input goes through [`Character::parse`].
    pub fn from_bits(bits: u16, k: usize) -> Self {
        assert!(k <= MAX_RANK, "rank {k} exceeds MAX_RANK {MAX_RANK}");
        assert!(
            k == 16 || bits < (1u16 << k),
            "mask {bits:#b} does not fit rank {k}"
        );
        Character { bits, rank: k as u8 }
    }

    /// The zero character (the trivial representation of rank k).
    pub fn zero(k: usize) -> Self {
        Self::from_bits(0, k)
    }

    /// The basis character epsilon_j (0-based), acting non-trivially on
    /// factor j only.
    pub fn basis(j: usize, k: usize) -> Self {
        assert!(j < k, "factor index {j} out of range for rank {k}");
        Self::from_bits(1 << j, k)
    }

    /// Parse a bitstring of length exactly `k` (leftmost symbol is
    /// coordinate 0).
    pub fn parse(text: &str, k: usize) -> Result<Self> {
        if k > MAX_RANK {
            return Err(Error::InvalidArgument(format!(
                "rank {k} exceeds the supported maximum {MAX_RANK}"
            )));
        }
        if text.len() != k {
            return Err(Error::Parse(format!(
                "character {text:?} has length {}, expected {k}",
                text.len()
            )));
        }
        let mut bits = 0u16;
        for (j, c) in text.chars().enumerate() {
            match c {
                '0' => {}
                '1' => bits |= 1 << j,
                other => {
                    return Err(Error::Parse(format!(
                        "character {text:?} contains illegal symbol {other:?}"
                    )))
                }
            }
        }
        Ok(Character { bits, rank: k as u8 })
    }

    /// Inner product with the basis element epsilon_j (0-based), i.e. the
    /// j-th coordinate of alpha. Panics on out-of-range indices.
    pub fn pairing(&self, j: usize) -> u8 {
        assert!(
            j < self.rank as usize,
            "factor index {j} out of range for rank {}",
            self.rank
        );
        ((self.bits >> j) & 1) as u8
    }

    /// Number of non-zero coordinates.
    pub fn weight(&self) -> u32 {
        self.bits.count_ones()
    }

    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    pub fn rank(&self) -> usize {
        self.rank as usize
    }

    pub fn bits(&self) -> u16 {
        self.bits
    }

    /// Delete coordinate i (0-based), producing a character of rank k-1.
    /// Used when a zero-dimensional sphere factor is forgotten. Panics on
    /// out-of-range indices.
    pub fn project_forget(&self, i: usize) -> Character {
        let k = self.rank as usize;
        assert!(i < k, "factor index {i} out of range for rank {k}");
        let low = self.bits & ((1u16 << i) - 1);
        let high = (self.bits >> (i + 1)) << i;
        Character {
            bits: low | high,
            rank: (k - 1) as u8,
        }
    }

    pub fn render(&self) -> String {
        (0..self.rank as usize)
            .map(|j| if self.bits >> j & 1 == 1 { '1' } else { '0' })
            .collect()
    }
}

impl fmt::Display for Character {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl fmt::Debug for Character {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Character({})", self.render())
    }
}

/// A real (Z/2)^k-representation given as an ordered direct sum of
/// characters. `dim` equals the number of summands.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Representation {
    k: usize,
    summands: Vec<Character>,
}

impl Representation {
    pub fn new(k: usize, summands: Vec<Character>) -> Result<Self> {
        if k > MAX_RANK {
            return Err(Error::InvalidArgument(format!(
                "rank {k} exceeds the supported maximum {MAX_RANK}"
            )));
        }
        for s in &summands {
            if s.rank() != k {
                return Err(Error::RankMismatch {
                    dims_k: k,
                    rep_k: s.rank(),
                });
            }
        }
        Ok(Representation { k, summands })
    }

    pub fn empty(k: usize) -> Self {
        Representation {
            k,
            summands: Vec::new(),
        }
    }

    /// Parse a comma-separated list of characters, each optionally carrying
    /// a multiplicity suffix `^m` ("110^3" expands to three copies). An
    /// empty string parses to the zero representation.
    pub fn parse(text: &str, k: usize) -> Result<Self> {
        let mut summands = Vec::new();
        if text.is_empty() {
            return Representation::new(k, summands);
        }
        for token in text.split(',') {
            let (body, count) = match token.split_once('^') {
                Some((body, mult)) => {
                    let count: usize = mult.parse().map_err(|_| {
                        Error::Parse(format!("bad multiplicity in {token:?}"))
                    })?;
                    if count > 1_000_000 {
                        return Err(Error::Parse(format!(
                            "multiplicity {count} in {token:?} is unreasonably large"
                        )));
                    }
                    (body, count)
                }
                None => (token, 1),
            };
            let alpha = Character::parse(body, k)?;
            summands.extend(std::iter::repeat_n(alpha, count));
        }
        Representation::new(k, summands)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Dimension of the representation (= number of summands).
    pub fn dim(&self) -> usize {
        self.summands.len()
    }

    pub fn summands(&self) -> &[Character] {
        &self.summands
    }

    pub fn is_empty(&self) -> bool {
        self.summands.is_empty()
    }

    /// Direct sum, preserving the order of both operand lists.
    pub fn concat(&self, other: &Representation) -> Result<Representation> {
        if self.k != other.k {
            return Err(Error::RankMismatch {
                dims_k: self.k,
                rep_k: other.k,
            });
        }
        let mut summands = self.summands.clone();
        summands.extend_from_slice(&other.summands);
        Ok(Representation { k: self.k, summands })
    }

    /// Summand multiset as sorted bitmasks (the canonical order).
    pub fn sorted_masks(&self) -> Vec<u16> {
        let mut masks: Vec<u16> = self.summands.iter().map(|c| c.bits).collect();
        masks.sort_unstable();
        masks
    }

    pub fn render(&self) -> String {
        self.summands
            .iter()
            .map(|c| c.render())
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Render with the multiplicity syntax, grouping consecutive equal
    /// summands ("11,11,11" becomes "11^3"). Order is preserved.
    pub fn render_compact(&self) -> String {
        let mut parts: Vec<String> = Vec::new();
        let mut iter = self.summands.iter().peekable();
        while let Some(first) = iter.next() {
            let mut count = 1usize;
            while iter.peek() == Some(&first) {
                iter.next();
                count += 1;
            }
            if count == 1 {
                parts.push(first.render());
            } else {
                parts.push(format!("{}^{count}", first.render()));
            }
        }
        parts.join(",")
    }
}

impl fmt::Debug for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Representation(k={}, [{}])", self.k, self.render())
    }
}

/// The representation receiving the pairwise inner products of k vectors:
/// one summand for each character of Hamming weight 2, ordered by the pair
/// (i, j), i < j, lexicographically. Has exactly k(k-1)/2 summands.
pub fn gram_representation(k: usize) -> Representation {
    assert!(k <= MAX_RANK, "rank {k} exceeds MAX_RANK {MAX_RANK}");
    let mut summands = Vec::with_capacity(k * k.saturating_sub(1) / 2);
    for i in 0..k {
        for j in (i + 1)..k {
            summands.push(Character::from_bits((1 << i) | (1 << j), k));
        }
    }
    Representation { k, summands }
}

/// The tuple (n_1, ..., n_k) of sphere dimensions, entries >= 0.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SphereDims {
    dims: Vec<u32>,
}

impl SphereDims {
    pub fn new(dims: Vec<u32>) -> Self {
        SphereDims { dims }
    }

    /// Parse a comma-separated list of non-negative integers; the empty
    /// string is the rank-0 (empty product) configuration.
    pub fn parse(text: &str) -> Result<Self> {
        if text.is_empty() {
            return Ok(SphereDims { dims: Vec::new() });
        }
        let dims = text
            .split(',')
            .map(|t| {
                t.parse::<u32>()
                    .map_err(|_| Error::Parse(format!("bad sphere dimension {t:?}")))
            })
            .collect::<Result<Vec<u32>>>()?;
        if dims.len() > MAX_RANK {
            return Err(Error::InvalidArgument(format!(
                "{} sphere factors exceed the supported maximum {MAX_RANK}",
                dims.len()
            )));
        }
        Ok(SphereDims { dims })
    }

    pub fn k(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[u32] {
        &self.dims
    }

    /// Total dimension of the product of spheres.
    pub fn total(&self) -> u64 {
        self.dims.iter().map(|&n| n as u64).sum()
    }

    pub fn render(&self) -> String {
        self.dims
            .iter()
            .map(|n| n.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl fmt::Debug for SphereDims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SphereDims({})", self.render())
    }
}

/// Memoization key: the dims vector plus the summand multiset. Summand
/// order is erased; the multiset is stored run-length encoded (sorted
/// distinct masks with multiplicities), so keys stay small for the highly
/// repetitive representations the closed-form families produce.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct CanonicalKey {
    pub(crate) dims: Vec<u32>,
    pub(crate) runs: Vec<(u16, u32)>,
}

pub fn canonical_key(dims: &SphereDims, rep: &Representation) -> CanonicalKey {
    CanonicalKey {
        dims: dims.dims().to_vec(),
        runs: compress_masks(&rep.sorted_masks()),
    }
}

/// Run-length encode a sorted mask list.
pub(crate) fn compress_masks(sorted_masks: &[u16]) -> Vec<(u16, u32)> {
    let mut runs: Vec<(u16, u32)> = Vec::new();
    for &m in sorted_masks {
        match runs.last_mut() {
            Some((mask, count)) if *mask == m => *count += 1,
            _ => runs.push((m, 1)),
        }
    }
    runs
}
