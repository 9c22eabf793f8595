//! Multiqubit Pauli operators without phase tracking.
//!
//! Single-qubit Paulis are stored as symplectic bit pairs `(x, z)` so that
//! commutation reduces to a parity of bitwise products. Only the commutation
//! sign is ever needed downstream, so products and phases are not modelled.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Largest support `enumerate_on_support` will expand (4^12 operators).
pub const MAX_ENUMERATION_SUPPORT: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PauliError {
    #[error("support of size {size} exceeds the enumeration cap of {MAX_ENUMERATION_SUPPORT}")]
    SupportTooLarge { size: usize },
    #[error("vertex {0} appears more than once")]
    DuplicateVertex(usize),
    #[error("cannot parse Pauli term `{0}`")]
    Parse(String),
}

/// Single-qubit Pauli, encoded as `x | (z << 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum SinglePauli {
    I = 0b00,
    X = 0b01,
    Z = 0b10,
    Y = 0b11,
}

impl SinglePauli {
    /// Non-identity Paulis in enumeration order.
    pub const NON_IDENTITY: [SinglePauli; 3] = [SinglePauli::X, SinglePauli::Y, SinglePauli::Z];

    #[inline]
    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => SinglePauli::I,
            (true, false) => SinglePauli::X,
            (false, true) => SinglePauli::Z,
            (true, true) => SinglePauli::Y,
        }
    }

    #[inline]
    pub fn x_bit(self) -> bool {
        (self as u8) & 0b01 != 0
    }

    #[inline]
    pub fn z_bit(self) -> bool {
        (self as u8) & 0b10 != 0
    }

    #[inline]
    pub fn is_identity(self) -> bool {
        self == SinglePauli::I
    }

    pub fn letter(self) -> char {
        match self {
            SinglePauli::I => 'I',
            SinglePauli::X => 'X',
            SinglePauli::Y => 'Y',
            SinglePauli::Z => 'Z',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        match c {
            'I' => Some(SinglePauli::I),
            'X' => Some(SinglePauli::X),
            'Y' => Some(SinglePauli::Y),
            'Z' => Some(SinglePauli::Z),
            _ => None,
        }
    }
}

/// True iff `a` and `b` are both non-identity and differ.
#[inline]
pub fn anticommutes_single(a: SinglePauli, b: SinglePauli) -> bool {
    let (a, b) = (a as u8, b as u8);
    // symplectic form x_a z_b + z_a x_b
    let s = (a & (b >> 1)) ^ ((a >> 1) & b);
    s & 1 != 0
}

/// Sparse Pauli operator: a sorted list of `(vertex, Pauli)` with no identities.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct SparsePauli {
    terms: Vec<(usize, SinglePauli)>,
}

impl SparsePauli {
    pub fn identity() -> Self {
        Self::default()
    }

    /// Builds an operator from arbitrary `(vertex, Pauli)` pairs. Identity
    /// entries are dropped; a vertex listed twice is an error.
    pub fn from_terms<I>(terms: I) -> Result<Self, PauliError>
    where
        I: IntoIterator<Item = (usize, SinglePauli)>,
    {
        let mut terms: Vec<_> = terms.into_iter().filter(|(_, p)| !p.is_identity()).collect();
        terms.sort_unstable_by_key(|&(v, _)| v);
        if let Some(w) = terms.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(PauliError::DuplicateVertex(w[0].0));
        }
        Ok(Self { terms })
    }

    /// Caller guarantees ascending, duplicate-free vertices and no identities.
    pub(crate) fn from_sorted_unchecked(terms: Vec<(usize, SinglePauli)>) -> Self {
        debug_assert!(terms.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(terms.iter().all(|(_, p)| !p.is_identity()));
        Self { terms }
    }

    pub fn single(vertex: usize, pauli: SinglePauli) -> Self {
        if pauli.is_identity() {
            Self::identity()
        } else {
            Self {
                terms: vec![(vertex, pauli)],
            }
        }
    }

    pub fn weight(&self) -> usize {
        self.terms.len()
    }

    pub fn is_identity(&self) -> bool {
        self.terms.is_empty()
    }

    /// Vertex ids in ascending order.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.terms.iter().map(|&(v, _)| v)
    }

    pub fn terms(&self) -> &[(usize, SinglePauli)] {
        &self.terms
    }

    /// The local Pauli at `vertex` (I when outside the support).
    pub fn get(&self, vertex: usize) -> SinglePauli {
        match self.terms.binary_search_by_key(&vertex, |&(v, _)| v) {
            Ok(i) => self.terms[i].1,
            Err(_) => SinglePauli::I,
        }
    }

    /// Keeps only the terms whose vertex satisfies `keep`.
    pub fn restricted(&self, mut keep: impl FnMut(usize) -> bool) -> Self {
        Self {
            terms: self.terms.iter().copied().filter(|&(v, _)| keep(v)).collect(),
        }
    }

    pub fn overlaps(&self, other: &SparsePauli) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < other.terms.len() {
            match self.terms[i].0.cmp(&other.terms[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }
}

/// True iff `e` and `s` anticommute, i.e. an odd number of shared sites carry
/// anticommuting local Paulis.
pub fn anticommutes(e: &SparsePauli, s: &SparsePauli) -> bool {
    let (a, b) = (&e.terms, &s.terms);
    let (mut i, mut j) = (0, 0);
    let mut odd = false;
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                odd ^= anticommutes_single(a[i].1, b[j].1);
                i += 1;
                j += 1;
            }
        }
    }
    odd
}

impl fmt::Display for SparsePauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("I");
        }
        for (k, (v, p)) in self.terms.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}{}", p.letter(), v)?;
        }
        Ok(())
    }
}

impl FromStr for SparsePauli {
    type Err = PauliError;

    /// Parses the canonical text form `"X3 Z7 Z9"`; `"I"` or an empty string
    /// is the identity.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() || s == "I" {
            return Ok(Self::identity());
        }
        let mut terms = Vec::new();
        for token in s.split_whitespace() {
            let mut chars = token.chars();
            let pauli = chars
                .next()
                .and_then(SinglePauli::from_letter)
                .ok_or_else(|| PauliError::Parse(token.to_string()))?;
            let vertex: usize = chars
                .as_str()
                .parse()
                .map_err(|_| PauliError::Parse(token.to_string()))?;
            terms.push((vertex, pauli));
        }
        Self::from_terms(terms)
    }
}

impl Serialize for SparsePauli {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SparsePauli {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Pauli on at most 32 positions packed as x and z bit masks. Bit `k`
/// refers to position `k` of some external support list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct PackedPauli {
    pub x: u32,
    pub z: u32,
}

impl PackedPauli {
    #[inline]
    pub fn weight(self) -> u32 {
        (self.x | self.z).count_ones()
    }

    #[inline]
    pub fn anticommutes(self, other: PackedPauli) -> bool {
        ((self.x & other.z) ^ (self.z & other.x)).count_ones() & 1 == 1
    }

    #[inline]
    pub fn get(self, pos: usize) -> SinglePauli {
        SinglePauli::from_bits(self.x >> pos & 1 == 1, self.z >> pos & 1 == 1)
    }

    pub fn set(&mut self, pos: usize, p: SinglePauli) {
        let bit = 1u32 << pos;
        self.x = (self.x & !bit) | if p.x_bit() { bit } else { 0 };
        self.z = (self.z & !bit) | if p.z_bit() { bit } else { 0 };
    }

    /// Expands into a sparse operator using `support[k]` as the vertex of bit `k`.
    pub fn to_sparse(self, support: &[usize]) -> SparsePauli {
        let terms = support
            .iter()
            .enumerate()
            .map(|(k, &v)| (v, self.get(k)))
            .filter(|(_, p)| !p.is_identity());
        SparsePauli::from_terms(terms).expect("support vertices must be distinct")
    }
}

/// Local Pauli of a base-4 digit in enumeration order I < X < Y < Z.
const DIGIT_ORDER: [SinglePauli; 4] = [SinglePauli::I, SinglePauli::X, SinglePauli::Y, SinglePauli::Z];

/// Iterator over every Pauli on `n` packed positions, in lexicographic order of
/// the word `(P_0, …, P_{n-1})` with `P_0` most significant and I < X < Y < Z.
#[derive(Debug, Clone)]
pub struct PackedEnumeration {
    n: usize,
    next: u64,
    end: u64,
    min_weight: u32,
}

impl PackedEnumeration {
    pub fn new(n: usize, min_weight: usize) -> Result<Self, PauliError> {
        if n > MAX_ENUMERATION_SUPPORT {
            return Err(PauliError::SupportTooLarge { size: n });
        }
        Ok(Self {
            n,
            next: 0,
            end: 1u64 << (2 * n),
            min_weight: min_weight as u32,
        })
    }

    #[inline]
    fn decode(&self, code: u64) -> PackedPauli {
        let mut out = PackedPauli::default();
        for pos in 0..self.n {
            let digit = (code >> (2 * (self.n - 1 - pos))) & 0b11;
            out.set(pos, DIGIT_ORDER[digit as usize]);
        }
        out
    }
}

impl Iterator for PackedEnumeration {
    type Item = PackedPauli;

    fn next(&mut self) -> Option<PackedPauli> {
        while self.next < self.end {
            let code = self.next;
            self.next += 1;
            let p = self.decode(code);
            if p.weight() >= self.min_weight {
                return Some(p);
            }
        }
        None
    }
}

/// Every operator supported within `support` with weight at least
/// `min_weight`, each exactly once, in a fixed lexicographic order.
pub fn enumerate_on_support(
    support: &[usize],
    min_weight: usize,
) -> Result<impl Iterator<Item = SparsePauli> + '_, PauliError> {
    let mut sorted = support.to_vec();
    sorted.sort_unstable();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(PauliError::DuplicateVertex(w[0]));
    }
    Ok(PackedEnumeration::new(support.len(), min_weight)?.map(move |p| p.to_sparse(support)))
}

#[cfg(test)]
mod tests {
    use super::SinglePauli::*;
    use super::*;

    fn star() -> SparsePauli {
        SparsePauli::from_terms([(0, X), (1, Z), (2, Z), (3, Z), (4, Z)]).unwrap()
    }

    #[test]
    fn single_commutation_table() {
        assert!(anticommutes_single(X, Z));
        assert!(!anticommutes_single(X, X));
        assert!(!anticommutes_single(I, Y));
        for a in [I, X, Y, Z] {
            for b in [I, X, Y, Z] {
                let expected = a != I && b != I && a != b;
                assert_eq!(anticommutes_single(a, b), expected, "{a:?} {b:?}");
            }
        }
    }

    #[test]
    fn star_stabilizer_examples() {
        let s = star();
        assert!(anticommutes(&SparsePauli::single(0, Z), &s));
        assert!(!anticommutes(&SparsePauli::single(1, Z), &s));
        let two = SparsePauli::from_terms([(0, Y), (1, X)]).unwrap();
        assert!(!anticommutes(&two, &s));
    }

    #[test]
    fn construction_drops_identity_and_rejects_duplicates() {
        let p = SparsePauli::from_terms([(4, I), (2, Z), (7, X)]).unwrap();
        assert_eq!(p.weight(), 2);
        assert_eq!(p.support().collect::<Vec<_>>(), vec![2, 7]);
        assert_eq!(p.get(4), I);
        assert_eq!(
            SparsePauli::from_terms([(1, X), (1, Z)]),
            Err(PauliError::DuplicateVertex(1))
        );
    }

    #[test]
    fn text_form() {
        let p = SparsePauli::from_terms([(9, Z), (3, X), (7, Z)]).unwrap();
        assert_eq!(p.to_string(), "X3 Z7 Z9");
        assert_eq!("X3 Z7 Z9".parse::<SparsePauli>().unwrap(), p);
        assert_eq!(SparsePauli::identity().to_string(), "I");
        assert!("".parse::<SparsePauli>().unwrap().is_identity());
        assert!("Q3".parse::<SparsePauli>().is_err());
        assert!("X".parse::<SparsePauli>().is_err());
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, "\"X3 Z7 Z9\"");
        assert_eq!(serde_json::from_str::<SparsePauli>(&json).unwrap(), p);
    }

    #[test]
    fn enumeration_counts() {
        let support = [10, 11, 12, 13, 14];
        assert_eq!(enumerate_on_support(&support, 0).unwrap().count(), 1024);
        assert_eq!(enumerate_on_support(&support, 1).unwrap().count(), 1023);
        let w2 = enumerate_on_support(&support, 0)
            .unwrap()
            .filter(|p| p.weight() == 2)
            .count();
        assert_eq!(w2, 90);
    }

    #[test]
    fn enumeration_order_is_lexicographic() {
        let ops: Vec<String> = enumerate_on_support(&[5, 8], 0)
            .unwrap()
            .map(|p| p.to_string())
            .collect();
        assert_eq!(&ops[..6], &["I", "X8", "Y8", "Z8", "X5", "X5 X8"]);
        assert_eq!(ops.last().unwrap(), "Z5 Z8");
    }

    #[test]
    fn enumeration_cap() {
        let support: Vec<usize> = (0..13).collect();
        assert!(matches!(
            enumerate_on_support(&support, 0).map(|_| ()),
            Err(PauliError::SupportTooLarge { size: 13 })
        ));
        assert!(enumerate_on_support(&support[..12], 12).is_ok());
    }

    #[test]
    fn weight_one_anticommuting_count_is_two_per_site() {
        for d in 1..=6usize {
            let support: Vec<usize> = (0..=d).collect();
            let s = SparsePauli::from_terms(std::iter::once((0, X)).chain((1..=d).map(|u| (u, Z)))).unwrap();
            let n = enumerate_on_support(&support, 1)
                .unwrap()
                .filter(|e| e.weight() == 1 && anticommutes(e, &s))
                .count();
            assert_eq!(n, 2 * (d + 1));
        }
    }

    #[test]
    fn packed_and_sparse_agree() {
        let support = [0, 1, 2, 3];
        let pattern = {
            let mut p = PackedPauli::default();
            p.set(0, X);
            for k in 1..4 {
                p.set(k, Z);
            }
            p
        };
        let sparse_pattern = pattern.to_sparse(&support);
        for e in PackedEnumeration::new(4, 0).unwrap() {
            assert_eq!(
                e.anticommutes(pattern),
                anticommutes(&e.to_sparse(&support), &sparse_pattern)
            );
        }
    }
}
