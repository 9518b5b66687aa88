//! Feedforward rate-1/N convolutional codes, their trellis tables, and the
//! terminated encoder.
//!
//! Generators are given in octal and expand MSB-first to taps
//! `g_0 g_1 ... g_v`, where `g_0` multiplies the current input bit:
//! `13` (octal) is `1011`, i.e. `1 + D^2 + D^3`.
//!
//! A trellis state holds the last `v` inputs with the most recent one in bit
//! `v-1`, so the input that led into state `s` is `s >> (v-1)` and the two
//! predecessors of `s` differ only in bit 0.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::gf2::CrcCode;

pub const MAX_MEMORY: usize = 14;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ConvCode {
    generators: Vec<u32>,
    memory: usize,
}

impl ConvCode {
    /// `generators` are tap masks whose bit `v` is `g_0`.
    pub fn new(generators: Vec<u32>, memory: usize) -> Result<Self> {
        if !(1..=MAX_MEMORY).contains(&memory) {
            return Err(Error::InvalidCode(format!(
                "memory {memory} outside 1..={MAX_MEMORY}"
            )));
        }
        if generators.is_empty() {
            return Err(Error::InvalidCode("no generators".into()));
        }
        let head = 1u32 << memory;
        for (i, &g) in generators.iter().enumerate() {
            if g == 0 {
                return Err(Error::InvalidCode(format!("generator {i} is zero")));
            }
            if g >> (memory + 1) != 0 {
                return Err(Error::InvalidCode(format!(
                    "generator {g:o} has more than v+1 = {} taps",
                    memory + 1
                )));
            }
            if g & head == 0 && g & 1 == 0 {
                return Err(Error::InvalidCode(format!(
                    "generator {g:o} has neither the D^0 nor the D^{memory} tap"
                )));
            }
            if generators[..i].contains(&g) {
                return Err(Error::InvalidCode(format!("generator {g:o} repeated")));
            }
        }
        if generators.iter().all(|g| g & 1 == 0) {
            return Err(Error::InvalidCode(format!(
                "no generator uses memory element {memory}"
            )));
        }
        if generators.iter().all(|g| g & head == 0) {
            return Err(Error::InvalidCode(
                "no generator taps the current input".into(),
            ));
        }
        Ok(Self { generators, memory })
    }

    /// Parses comma-separated octal generators such as `13,17`; the memory is
    /// the longest generator's length minus one.
    pub fn from_octal(spec: &str) -> Result<Self> {
        let generators = spec
            .split(',')
            .map(|s| {
                let s = s.trim();
                u32::from_str_radix(s, 8)
                    .map_err(|_| Error::InvalidCode(format!("bad octal generator {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let len = generators
            .iter()
            .map(|g| 32 - g.leading_zeros() as usize)
            .max()
            .unwrap_or(0);
        Self::new(generators, len.saturating_sub(1))
    }

    pub fn generators(&self) -> &[u32] {
        &self.generators
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn rate_inverse(&self) -> usize {
        self.generators.len()
    }

    /// `13,17` style label.
    pub fn octal_label(&self) -> String {
        self.generators
            .iter()
            .map(|g| format!("{g:o}"))
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl FromStr for ConvCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_octal(s)
    }
}

impl fmt::Display for ConvCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.octal_label())
    }
}

/// Precomputed state-transition and output tables.
#[derive(Clone, Debug)]
pub struct TrellisCode {
    code: ConvCode,
    num_states: usize,
    next_state: Vec<[u32; 2]>,
    /// Output pattern per branch: bit `j` is the output of generator `j`.
    outputs: Vec<[u32; 2]>,
}

impl TrellisCode {
    pub fn new(code: ConvCode) -> Self {
        let v = code.memory;
        let num_states = 1usize << v;
        let mut next_state = Vec::with_capacity(num_states);
        let mut outputs = Vec::with_capacity(num_states);
        for s in 0..num_states as u32 {
            let mut ns = [0; 2];
            let mut out = [0; 2];
            for b in 0..2u32 {
                let reg = (b << v) | s;
                ns[b as usize] = (s >> 1) | (b << (v - 1));
                out[b as usize] = code
                    .generators
                    .iter()
                    .enumerate()
                    .fold(0, |acc, (j, g)| acc | (((g & reg).count_ones() & 1) << j));
            }
            next_state.push(ns);
            outputs.push(out);
        }
        Self {
            code,
            num_states,
            next_state,
            outputs,
        }
    }

    pub fn code(&self) -> &ConvCode {
        &self.code
    }

    pub fn memory(&self) -> usize {
        self.code.memory
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn rate_inverse(&self) -> usize {
        self.code.rate_inverse()
    }

    #[inline]
    pub fn next_state(&self, state: u32, bit: u8) -> u32 {
        self.next_state[state as usize][bit as usize]
    }

    /// Packed branch output, bit `j` = generator `j`.
    #[inline]
    pub fn output_pattern(&self, state: u32, bit: u8) -> u32 {
        self.outputs[state as usize][bit as usize]
    }

    /// Branch output in wire order.
    pub fn output_bits(&self, state: u32, bit: u8) -> Vec<u8> {
        let p = self.output_pattern(state, bit);
        (0..self.rate_inverse())
            .map(|j| ((p >> j) & 1) as u8)
            .collect()
    }

    /// Hamming weight of a branch output.
    #[inline]
    pub fn output_weight(&self, state: u32, bit: u8) -> u32 {
        self.output_pattern(state, bit).count_ones()
    }

    /// The two predecessors of `state`, lower-numbered first, and the input
    /// bit on both branches.
    #[inline]
    pub fn predecessors(&self, state: u32) -> ([u32; 2], u8) {
        let v = self.code.memory;
        let mask = (self.num_states - 1) as u32;
        let p0 = (state << 1) & mask;
        ([p0, p0 | 1], (state >> (v - 1)) as u8)
    }

    /// Input bit carried by any branch entering `state`.
    #[inline]
    pub fn input_into(&self, state: u32) -> u8 {
        (state >> (self.code.memory - 1)) as u8
    }
}

/// Validated free-function form of [`TrellisCode::new`].
pub fn build_trellis(code: &ConvCode) -> Result<TrellisCode> {
    Ok(TrellisCode::new(code.clone()))
}

/// Encodes `input` starting from the zero state and appends `v` zero
/// termination bits, so the output has `N * (len + v)` bits.
pub fn conv_encode(input: &[u8], trellis: &TrellisCode) -> Result<Vec<u8>> {
    if input.is_empty() {
        return Err(Error::EmptyInput("convolutional encoder input"));
    }
    let n_out = trellis.rate_inverse();
    let v = trellis.memory();
    let mut out = Vec::with_capacity(n_out * (input.len() + v));
    let mut state = 0u32;
    for &b in input.iter().chain(std::iter::repeat_n(&0u8, v)) {
        let p = trellis.output_pattern(state, b);
        out.extend((0..n_out).map(|j| ((p >> j) & 1) as u8));
        state = trellis.next_state(state, b);
    }
    debug_assert_eq!(state, 0);
    Ok(out)
}

/// Frame dimensions for a CC-CRC pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FrameLayout {
    /// Message bits.
    pub k: usize,
    /// CRC degree.
    pub m: usize,
    /// Encoder memory (termination bits).
    pub v: usize,
    /// Coded bits per trellis stage.
    pub rate_inverse: usize,
}

impl FrameLayout {
    pub fn new(k: usize, crc: &CrcCode, code: &ConvCode) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        Ok(Self {
            k,
            m: crc.degree(),
            v: code.memory(),
            rate_inverse: code.rate_inverse(),
        })
    }

    /// Trellis input bits before termination, `k + m`.
    pub fn n(&self) -> usize {
        self.k + self.m
    }

    /// Trellis stages including termination, `k + m + v`.
    pub fn stages(&self) -> usize {
        self.k + self.m + self.v
    }

    /// Channel bits `N (k + m + v)`.
    pub fn channel_bits(&self) -> usize {
        self.rate_inverse * self.stages()
    }

    pub fn log2_num_codewords(&self) -> usize {
        self.n()
    }

    pub fn log2_num_crc_codewords(&self) -> usize {
        self.k
    }

    /// `|C| = 2^(k+m)` when it fits.
    pub fn num_codewords(&self) -> Option<u128> {
        1u128.checked_shl(self.n() as u32)
    }

    /// `|C_CRC| = 2^k` when it fits.
    pub fn num_crc_codewords(&self) -> Option<u128> {
        1u128.checked_shl(self.k as u32)
    }

    /// `|C_notCRC| = 2^(k+m) - 2^k` when it fits.
    pub fn num_non_crc_codewords(&self) -> Option<u128> {
        Some(self.num_codewords()? - self.num_crc_codewords()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn trellis(spec: &str) -> TrellisCode {
        TrellisCode::new(ConvCode::from_octal(spec).unwrap())
    }

    /// Shift-register encoder written directly from the tap definition.
    fn shift_register_encode(gens: &[&[u8]], input: &[u8], v: usize) -> Vec<u8> {
        let mut reg = vec![0u8; v + 1];
        let mut out = Vec::new();
        for &b in input.iter().chain(std::iter::repeat_n(&0u8, v)) {
            reg.rotate_right(1);
            reg[0] = b;
            for g in gens {
                out.push(g.iter().zip(&reg).fold(0, |acc, (x, y)| acc ^ (x & y)));
            }
        }
        out
    }

    #[test]
    fn table_one_state_counts() {
        let t = trellis("13,17");
        assert_eq!((t.memory(), t.num_states()), (3, 8));
        let t = trellis("27,31");
        assert_eq!((t.memory(), t.num_states()), (4, 16));
        assert_eq!(trellis("2473,3217").num_states(), 1024);
    }

    #[test]
    fn two_state_code_by_hand() {
        // (3,1): g = 1+D and D. State = previous input.
        let t = trellis("3,1");
        assert_eq!(t.num_states(), 2);
        // (state, input) -> (next, [out_g0, out_g1])
        let table = [
            (0, 0, 0, [0, 0]),
            (0, 1, 1, [1, 0]),
            (1, 0, 0, [1, 1]),
            (1, 1, 1, [0, 1]),
        ];
        for (s, b, ns, out) in table {
            assert_eq!(t.next_state(s, b), ns);
            assert_eq!(t.output_bits(s, b), out.to_vec());
        }
    }

    #[test]
    fn trellis_structure() {
        for spec in ["13,17", "27,31", "133,171", "5,7,3"] {
            let t = trellis(spec);
            let mut into = vec![0usize; t.num_states()];
            for s in 0..t.num_states() as u32 {
                let a = t.next_state(s, 0);
                let b = t.next_state(s, 1);
                assert_ne!(a, b);
                into[a as usize] += 1;
                into[b as usize] += 1;
                for bit in 0..2 {
                    let ns = t.next_state(s, bit);
                    let (preds, pb) = t.predecessors(ns);
                    assert!(preds.contains(&s));
                    assert_eq!(pb, bit);
                }
            }
            assert!(into.iter().all(|&c| c == 2));
            assert_eq!(t.output_pattern(0, 0), 0);
        }
    }

    #[test]
    fn invalid_codes() {
        assert!(ConvCode::new(vec![0o13, 0o17], 2).is_err()); // too many taps
        assert!(ConvCode::new(vec![0o13, 0o13], 3).is_err());
        assert!(ConvCode::new(vec![0o6, 0o4], 3).is_err()); // last memory unused
        assert!(ConvCode::new(vec![0o13, 0o17], 0).is_err());
        assert!(ConvCode::new(vec![0o13, 0o17], 15).is_err());
        assert!(ConvCode::from_octal("13,1x").is_err());
    }

    #[test]
    fn octal_round_trip() {
        let c = ConvCode::from_octal("247, 371").unwrap();
        assert_eq!(c.memory(), 7);
        assert_eq!(c.octal_label(), "247,371");
        assert_eq!(c.to_string(), "(247,371)");
    }

    #[test]
    fn tap_orientation() {
        // 13 = 1 + D^2 + D^3: a single 1 produces g0 outputs 1,0,1,1
        let t = trellis("13,17");
        let out = conv_encode(&[1], &t).unwrap();
        let g0: Vec<u8> = out.iter().step_by(2).copied().collect();
        let g1: Vec<u8> = out.iter().skip(1).step_by(2).copied().collect();
        assert_eq!(g0, vec![1, 0, 1, 1]);
        assert_eq!(g1, vec![1, 1, 1, 1]);
    }

    #[test]
    fn zero_input_and_lengths() {
        let t = trellis("13,17");
        assert!(conv_encode(&[0; 10], &t).unwrap().iter().all(|&b| b == 0));
        assert_eq!(conv_encode(&[1; 262], &t).unwrap().len(), 530);
        assert!(conv_encode(&[], &t).is_err());
    }

    #[test]
    fn exhaustive_n6_matches_shift_register() {
        let t = trellis("13,17");
        let gens: [&[u8]; 2] = [&[1, 0, 1, 1], &[1, 1, 1, 1]];
        let mut ours = BTreeSet::new();
        let mut oracle = BTreeSet::new();
        for x in 0u32..64 {
            let input: Vec<u8> = (0..6).map(|i| ((x >> (5 - i)) & 1) as u8).collect();
            let a = conv_encode(&input, &t).unwrap();
            let b = shift_register_encode(&gens, &input, 3);
            assert_eq!(a, b);
            ours.insert(a);
            oracle.insert(b);
        }
        assert_eq!(ours, oracle);
        assert_eq!(ours.len(), 64);
    }

    #[test]
    fn codeword_count_is_two_to_the_n() {
        let t = trellis("27,31");
        for n in [4usize, 8, 12] {
            let set: BTreeSet<Vec<u8>> = (0u32..1 << n)
                .map(|x| {
                    let input: Vec<u8> = (0..n).map(|i| ((x >> i) & 1) as u8).collect();
                    conv_encode(&input, &t).unwrap()
                })
                .collect();
            assert_eq!(set.len(), 1 << n);
        }
    }

    #[test]
    fn layout_sizes() {
        let crc = CrcCode::from_hex("0x43").unwrap();
        let code = ConvCode::from_octal("13,17").unwrap();
        let l = FrameLayout::new(8, &crc, &code).unwrap();
        assert_eq!((l.n(), l.stages(), l.channel_bits()), (14, 17, 34));
        assert_eq!(l.num_codewords(), Some(1 << 14));
        assert_eq!(l.num_crc_codewords(), Some(1 << 8));
        assert_eq!(l.num_non_crc_codewords(), Some((1 << 14) - (1 << 8)));
        let big = FrameLayout::new(256, &crc, &code).unwrap();
        assert_eq!(big.num_codewords(), None);
        assert_eq!(big.channel_bits(), 530);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn linear_and_terminated(a in prop::collection::vec(0u8..2, 30), b in prop::collection::vec(0u8..2, 30)) {
            let t = trellis("13,17");
            let sum: Vec<u8> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
            let ea = conv_encode(&a, &t).unwrap();
            let eb = conv_encode(&b, &t).unwrap();
            let es = conv_encode(&sum, &t).unwrap();
            let xor: Vec<u8> = ea.iter().zip(&eb).map(|(x, y)| x ^ y).collect();
            prop_assert_eq!(es, xor);
            let mut state = 0;
            for &bit in a.iter().chain([0u8; 3].iter()) {
                state = t.next_state(state, bit);
            }
            prop_assert_eq!(state, 0);
        }
    }
}
