//! Polynomials over GF(2) and the CRC encoder/checker built on them.
//!
//! Bit sequences are `&[u8]` holding 0/1 values. When a sequence is read as a
//! polynomial, its first bit is the highest-degree coefficient, so a message
//! `f_0 f_1 ... f_{k-1}` is `f_0 x^{k-1} + ... + f_{k-1}`. A CRC codeword is the
//! message followed by the `m` remainder bits.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Largest supported CRC degree.
pub const MAX_CRC_DEGREE: usize = 16;

/// A polynomial over GF(2). Coefficients are stored lowest degree first with
/// no trailing zeros, so the zero polynomial is the empty vector.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct BinaryPolynomial {
    coeffs: Vec<u8>,
}

impl BinaryPolynomial {
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self { coeffs: vec![1] }
    }

    /// `x^degree`.
    pub fn monomial(degree: usize) -> Self {
        let mut coeffs = vec![0; degree + 1];
        coeffs[degree] = 1;
        Self { coeffs }
    }

    /// Builds a polynomial from coefficients given lowest degree first.
    /// Any nonzero entry counts as a one.
    pub fn from_coeffs(coeffs: impl IntoIterator<Item = u8>) -> Self {
        let mut p = Self {
            coeffs: coeffs.into_iter().map(|c| u8::from(c != 0)).collect(),
        };
        p.normalize();
        p
    }

    /// Reads a bit sequence whose first bit is the highest-degree coefficient.
    pub fn from_bits_msb_first(bits: &[u8]) -> Self {
        Self::from_coeffs(bits.iter().rev().copied())
    }

    /// Bit `i` of `value` is the coefficient of `x^i`.
    pub fn from_u64(value: u64) -> Self {
        Self::from_coeffs((0..64).map(|i| ((value >> i) & 1) as u8))
    }

    /// Packs the polynomial into an integer, if its degree is below 64.
    pub fn to_u64(&self) -> Option<u64> {
        if self.coeffs.len() > 64 {
            return None;
        }
        Some(
            self.coeffs
                .iter()
                .enumerate()
                .fold(0u64, |acc, (i, &c)| acc | (u64::from(c) << i)),
        )
    }

    /// Writes the coefficients into exactly `len` bits, highest degree first.
    /// Returns `None` if the polynomial does not fit.
    pub fn to_bits_msb_first(&self, len: usize) -> Option<Vec<u8>> {
        if self.coeffs.len() > len {
            return None;
        }
        Some((0..len).rev().map(|i| self.coeff(i)).collect())
    }

    fn normalize(&mut self) {
        while self.coeffs.last() == Some(&0) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree of the highest set coefficient; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> u8 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    /// Coefficients lowest degree first.
    pub fn coeffs(&self) -> &[u8] {
        &self.coeffs
    }

    pub fn weight(&self) -> usize {
        self.coeffs.iter().filter(|&&c| c == 1).count()
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        Self::from_coeffs((0..len).map(|i| self.coeff(i) ^ other.coeff(i)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![0u8; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 1 {
                for (j, &b) in other.coeffs.iter().enumerate() {
                    out[i + j] ^= b;
                }
            }
        }
        Self::from_coeffs(out)
    }

    /// Multiplies by `x^shift`.
    pub fn shl(&self, shift: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![0; shift];
        coeffs.extend_from_slice(&self.coeffs);
        Self { coeffs }
    }

    /// Long division: returns `(q, r)` with `self = q * divisor + r` and
    /// `deg r < deg divisor`.
    pub fn divmod(&self, divisor: &Self) -> Result<(Self, Self)> {
        let db = divisor.degree().ok_or(Error::ZeroDivisor)?;
        let mut rem = self.coeffs.clone();
        let Some(da) = self.degree() else {
            return Ok((Self::zero(), Self::zero()));
        };
        if da < db {
            return Ok((Self::zero(), self.clone()));
        }
        let mut quot = vec![0u8; da - db + 1];
        for shift in (0..=da - db).rev() {
            if rem[shift + db] == 1 {
                quot[shift] = 1;
                for (j, &c) in divisor.coeffs.iter().enumerate() {
                    rem[shift + j] ^= c;
                }
            }
        }
        Ok((Self::from_coeffs(quot), Self::from_coeffs(rem)))
    }

    pub fn rem(&self, divisor: &Self) -> Result<Self> {
        self.divmod(divisor).map(|(_, r)| r)
    }
}

impl fmt::Display for BinaryPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = (0..self.coeffs.len())
            .rev()
            .filter(|&i| self.coeffs[i] == 1)
            .map(|i| match i {
                0 => "1".to_string(),
                1 => "x".to_string(),
                _ => format!("x^{i}"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

/// Free-function form of [`BinaryPolynomial::divmod`].
pub fn poly_divmod(
    a: &BinaryPolynomial,
    b: &BinaryPolynomial,
) -> Result<(BinaryPolynomial, BinaryPolynomial)> {
    a.divmod(b)
}

/// A degree-`m` CRC generator.
///
/// Written in hex as an `(m+1)`-bit value whose most significant bit is the
/// `x^m` coefficient: `0x43` is `x^6 + x + 1`. Degree 0 (`0x1`) is the trivial
/// code that accepts every word; it stands for "no CRC".
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CrcCode {
    generator: BinaryPolynomial,
    /// Generator packed as an integer, bit `i` = coefficient of `x^i`.
    packed: u32,
    m: usize,
}

impl CrcCode {
    pub fn new(generator: BinaryPolynomial) -> Result<Self> {
        let m = generator.degree().ok_or(Error::ZeroDivisor)?;
        if m > MAX_CRC_DEGREE {
            return Err(Error::CrcDegree(m));
        }
        let packed = generator.to_u64().expect("degree checked") as u32;
        Ok(Self {
            generator,
            packed,
            m,
        })
    }

    /// The trivial degree-0 code.
    pub fn none() -> Self {
        Self::new(BinaryPolynomial::one()).expect("degree 0 is valid")
    }

    pub fn from_value(value: u32) -> Result<Self> {
        if value == 0 {
            return Err(Error::ZeroDivisor);
        }
        Self::new(BinaryPolynomial::from_u64(u64::from(value)))
    }

    pub fn from_hex(label: &str) -> Result<Self> {
        let digits = label
            .trim()
            .strip_prefix("0x")
            .or_else(|| label.trim().strip_prefix("0X"))
            .unwrap_or(label.trim());
        let value =
            u32::from_str_radix(digits, 16).map_err(|_| Error::InvalidHex(label.to_string()))?;
        if value == 0 {
            return Err(Error::InvalidHex(label.to_string()));
        }
        Self::from_value(value)
    }

    pub fn generator(&self) -> &BinaryPolynomial {
        &self.generator
    }

    /// Degree `m`, i.e. the number of parity bits.
    pub fn degree(&self) -> usize {
        self.m
    }

    /// Generator as an integer, bit `i` = coefficient of `x^i`.
    pub fn value(&self) -> u32 {
        self.packed
    }

    pub fn hex_label(&self) -> String {
        format!("0x{:X}", self.packed)
    }

    /// One step of the bitwise division register: shifts `bit` into the
    /// running remainder `reg` (which is kept below `x^m`).
    #[inline]
    pub fn step(&self, reg: u32, bit: u8) -> u32 {
        let r = (reg << 1) | u32::from(bit);
        if r >> self.m & 1 == 1 {
            r ^ self.packed
        } else {
            r
        }
    }

    /// Remainder of the word (first bit = highest degree) modulo the generator,
    /// packed with bit `i` = coefficient of `x^i`.
    pub fn remainder(&self, word: &[u8]) -> u32 {
        word.iter().fold(0, |reg, &b| self.step(reg, b))
    }

    /// Appends the `m` parity bits so the result is divisible by the generator.
    pub fn encode(&self, message: &[u8]) -> Result<Vec<u8>> {
        if message.is_empty() {
            return Err(Error::EmptyInput("CRC message"));
        }
        let reg = (0..self.m).fold(self.remainder(message), |r, _| self.step(r, 0));
        let mut out = Vec::with_capacity(message.len() + self.m);
        out.extend_from_slice(message);
        out.extend((0..self.m).rev().map(|i| ((reg >> i) & 1) as u8));
        Ok(out)
    }

    /// True iff the word, read as a polynomial, is divisible by the generator.
    pub fn check(&self, word: &[u8]) -> Result<bool> {
        if word.len() <= self.m {
            return Err(Error::WordTooShort {
                len: word.len(),
                m: self.m,
            });
        }
        Ok(self.remainder(word) == 0)
    }
}

impl FromStr for CrcCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_hex(s)
    }
}

impl fmt::Display for CrcCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.hex_label())
    }
}

pub fn crc_encode(message: &[u8], crc: &CrcCode) -> Result<Vec<u8>> {
    crc.encode(message)
}

pub fn crc_check(word: &[u8], crc: &CrcCode) -> Result<bool> {
    crc.check(word)
}
