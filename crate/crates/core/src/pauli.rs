//! Bit-packed Pauli strings over the symplectic representation.
//!
//! Each qubit carries a `(z, x)` bit pair: `00 = I`, `01 = X`, `10 = Z`,
//! `11 = Y`. Products are computed by XOR with the phase discarded. The text
//! form lists one letter per qubit, qubit 0 leftmost.
//!
//! Dense distributions over `4^N` outcomes are indexed by the interleaved
//! integer whose most significant pair belongs to qubit 0, with the `z` bit
//! above the `x` bit inside each pair.

use std::fmt;
use std::ops::{BitXor, BitXorAssign};
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct PauliString {
    n_qubits: usize,
    z: Vec<u64>,
    x: Vec<u64>,
}

/// A Bell-sampling outcome shares the Pauli-string layout, so the XOR of two
/// outcomes is directly a Pauli string.
pub type BellOutcome = PauliString;

fn words_for(n_qubits: usize) -> usize {
    n_qubits.div_ceil(64).max(1)
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Self {
        let w = words_for(n_qubits);
        Self { n_qubits, z: vec![0; w], x: vec![0; w] }
    }

    /// Builds a string from per-qubit `(z, x)` bits.
    pub fn from_bits(z: &[bool], x: &[bool]) -> Result<Self> {
        if z.len() != x.len() {
            return Err(Error::DimensionMismatch { expected: z.len(), got: x.len() });
        }
        let mut p = Self::identity(z.len());
        for (q, (&zb, &xb)) in z.iter().zip(x).enumerate() {
            p.set(q, zb, xb);
        }
        Ok(p)
    }

    /// Decodes a dense interleaved index (see module docs).
    pub fn from_index(n_qubits: usize, index: usize) -> Self {
        let mut p = Self::identity(n_qubits);
        for q in 0..n_qubits {
            let pair = (index >> (2 * (n_qubits - 1 - q))) & 3;
            p.set(q, pair & 2 != 0, pair & 1 != 0);
        }
        p
    }

    /// Dense interleaved index; only meaningful for `n_qubits <= 31`.
    pub fn index(&self) -> usize {
        debug_assert!(self.n_qubits <= 31);
        (0..self.n_qubits).fold(0usize, |acc, q| {
            (acc << 2) | ((self.z_bit(q) as usize) << 1) | self.x_bit(q) as usize
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn z_words(&self) -> &[u64] {
        &self.z
    }

    pub fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub fn z_bit(&self, q: usize) -> bool {
        self.z[q / 64] >> (q % 64) & 1 == 1
    }

    pub fn x_bit(&self, q: usize) -> bool {
        self.x[q / 64] >> (q % 64) & 1 == 1
    }

    pub fn set(&mut self, q: usize, z: bool, x: bool) {
        assert!(q < self.n_qubits, "qubit {q} out of range");
        let (w, b) = (q / 64, q % 64);
        self.z[w] = (self.z[w] & !(1 << b)) | ((z as u64) << b);
        self.x[w] = (self.x[w] & !(1 << b)) | ((x as u64) << b);
    }

    pub fn letter(&self, q: usize) -> char {
        match (self.z_bit(q), self.x_bit(q)) {
            (false, false) => 'I',
            (false, true) => 'X',
            (true, false) => 'Z',
            (true, true) => 'Y',
        }
    }

    /// Number of non-identity letters.
    pub fn weight(&self) -> usize {
        self.z.iter().zip(&self.x).map(|(z, x)| (z | x).count_ones() as usize).sum()
    }

    /// Number of `Y` letters, i.e. pairs whose two bits are both set.
    pub fn y_count(&self) -> usize {
        self.z.iter().zip(&self.x).map(|(z, x)| (z & x).count_ones() as usize).sum()
    }

    /// AND bit of the pair for qubit `q` (set iff the letter is `Y`).
    pub fn and_bit(&self, q: usize) -> bool {
        self.z_bit(q) && self.x_bit(q)
    }

    /// Parity of the per-pair AND string.
    pub fn and_parity(&self) -> bool {
        self.y_count() % 2 == 1
    }

    pub fn is_identity(&self) -> bool {
        self.z.iter().chain(&self.x).all(|&w| w == 0)
    }

    pub fn xor_assign_words(&mut self, z: &[u64], x: &[u64]) {
        for (a, b) in self.z.iter_mut().zip(z) {
            *a ^= b;
        }
        for (a, b) in self.x.iter_mut().zip(x) {
            *a ^= b;
        }
    }
}

impl BitXorAssign<&PauliString> for PauliString {
    fn bitxor_assign(&mut self, rhs: &PauliString) {
        assert_eq!(self.n_qubits, rhs.n_qubits, "qubit count mismatch");
        self.xor_assign_words(&rhs.z, &rhs.x);
    }
}

impl BitXor for &PauliString {
    type Output = PauliString;
    fn bitxor(self, rhs: &PauliString) -> PauliString {
        let mut out = self.clone();
        out ^= rhs;
        out
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n_qubits {
            write!(f, "{}", self.letter(q))?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let letters: Vec<char> = s.trim().chars().collect();
        let mut p = Self::identity(letters.len());
        for (q, c) in letters.into_iter().enumerate() {
            let (z, x) = match c.to_ascii_uppercase() {
                'I' => (false, false),
                'X' => (false, true),
                'Z' => (true, false),
                'Y' => (true, true),
                other => return Err(Error::Parse(format!("invalid Pauli letter {other:?}"))),
            };
            p.set(q, z, x);
        }
        Ok(p)
    }
}

/// Symplectic product `sum_q (a.z b.x + a.x b.z) mod 2`; 1 iff the strings anticommute.
pub fn symplectic_product(a: &PauliString, b: &PauliString) -> u8 {
    assert_eq!(a.n_qubits, b.n_qubits, "qubit count mismatch");
    let mut acc = 0u32;
    for i in 0..a.z.len() {
        acc ^= ((a.z[i] & b.x[i]) ^ (a.x[i] & b.z[i])).count_ones();
    }
    (acc & 1) as u8
}

/// Hilbert-Schmidt norm of the commutator divided by its dimension: 0 or 2.
pub fn check_commute(a: &PauliString, b: &PauliString) -> u8 {
    2 * symplectic_product(a, b)
}

/// `check_commute(a ^ b, c ^ d)` without allocating the intermediate strings.
pub fn check_commute_xor(a: &PauliString, b: &PauliString, c: &PauliString, d: &PauliString) -> u8 {
    let mut acc = 0u32;
    for i in 0..a.z.len() {
        let (lz, lx) = (a.z[i] ^ b.z[i], a.x[i] ^ b.x[i]);
        let (rz, rx) = (c.z[i] ^ d.z[i], c.x[i] ^ d.x[i]);
        acc ^= ((lz & rx) ^ (lx & rz)).count_ones();
    }
    2 * (acc & 1) as u8
}

/// Mask of the `x` bits in an interleaved dense index.
const X_BITS: u64 = 0x5555_5555_5555_5555;

/// Swaps `z` and `x` within every pair of a dense index.
pub fn swap_pairs(index: usize) -> usize {
    let i = index as u64;
    (((i & X_BITS) << 1) | ((i >> 1) & X_BITS)) as usize
}

/// Symplectic product of two dense indices.
pub fn dense_symplectic(a: usize, b: usize) -> u8 {
    ((a & swap_pairs(b)).count_ones() & 1) as u8
}

/// Parity of the per-pair AND string of a dense index.
pub fn dense_and_parity(index: usize) -> bool {
    let i = index as u64;
    ((i >> 1) & i & X_BITS).count_ones() % 2 == 1
}

/// Spreads the low 32 bits of `v` onto the even bit positions.
pub fn spread_bits(v: usize) -> usize {
    let mut v = v as u64 & 0xffff_ffff;
    v = (v | (v << 16)) & 0x0000_ffff_0000_ffff;
    v = (v | (v << 8)) & 0x00ff_00ff_00ff_00ff;
    v = (v | (v << 4)) & 0x0f0f_0f0f_0f0f_0f0f;
    v = (v | (v << 2)) & 0x3333_3333_3333_3333;
    v = (v | (v << 1)) & X_BITS;
    v as usize
}

/// Inverse of [`spread_bits`]: gathers the even bit positions.
pub fn gather_bits(v: usize) -> usize {
    let mut v = v as u64 & X_BITS;
    v = (v | (v >> 1)) & 0x3333_3333_3333_3333;
    v = (v | (v >> 2)) & 0x0f0f_0f0f_0f0f_0f0f;
    v = (v | (v >> 4)) & 0x00ff_00ff_00ff_00ff;
    v = (v | (v >> 8)) & 0x0000_ffff_0000_ffff;
    v = (v | (v >> 16)) & 0x0000_0000_ffff_ffff;
    v as usize
}

/// Dense index from basis-ordered `z` and `x` masks (qubit `q` is bit `N-1-q`).
pub fn interleave(z_mask: usize, x_mask: usize) -> usize {
    (spread_bits(z_mask) << 1) | spread_bits(x_mask)
}

/// Splits a dense index into basis-ordered `(z_mask, x_mask)`.
pub fn deinterleave(index: usize) -> (usize, usize) {
    (gather_bits(index >> 1), gather_bits(index))
}
