//! Distance spectrum of a terminated CC-CRC frame and the union-bound family
//! built on it.
//!
//! `B_d` counts nonzero codewords of Hamming weight `d` in the terminated
//! frame and `A_d` counts those whose `n`-bit input is divisible by the CRC
//! generator. By linearity these are the error patterns around any transmitted
//! codeword, with every start position (and every combination of separate
//! error events) counted once.
//!
//! The counts come from a forward recursion over (encoder state, CRC
//! remainder, accumulated weight) with weights above `d_max` dropped. After the
//! last stage, state 0 with remainder 0 holds `A_d` and state 0 summed over all
//! remainders holds `B_d`.

use std::ops::AddAssign;

use crate::channel::pairwise_error_prob;
use crate::convcode::{FrameLayout, TrellisCode};
use crate::error::{Error, Result};
use crate::gf2::CrcCode;

/// Default cap on DP cell updates.
pub const DEFAULT_BUDGET: u64 = 20_000_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceSpectrum {
    layout: FrameLayout,
    crc_label: String,
    /// `(B_d, A_d)` for `d = 0..=d_max`; entry 0 is always `(0, 0)`.
    counts: Vec<(u128, u128)>,
}

impl DistanceSpectrum {
    pub fn layout(&self) -> &FrameLayout {
        &self.layout
    }

    pub fn crc_label(&self) -> &str {
        &self.crc_label
    }

    pub fn d_max(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn b(&self, d: usize) -> u128 {
        self.counts.get(d).map_or(0, |c| c.0)
    }

    pub fn a(&self, d: usize) -> u128 {
        self.counts.get(d).map_or(0, |c| c.1)
    }

    /// Smallest `d` with `B_d > 0`, if within `d_max`.
    pub fn d_free(&self) -> Option<usize> {
        self.counts.iter().position(|c| c.0 > 0)
    }

    /// Smallest `d` with `A_d > 0`, if within `d_max`.
    pub fn d_crc(&self) -> Option<usize> {
        self.counts.iter().position(|c| c.1 > 0)
    }

    /// `(d, B_d, A_d)` rows from 1 to `d_max`.
    pub fn rows(&self) -> impl Iterator<Item = (usize, u128, u128)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .skip(1)
            .map(|(d, &(b, a))| (d, b, a))
    }

    /// Same spectrum cut at a smaller depth.
    pub fn truncated(&self, d_max: usize) -> Self {
        let mut out = self.clone();
        out.counts.truncate(d_max.min(self.d_max()) + 1);
        out
    }

    fn require(&self, d: usize) -> Result<()> {
        if d > self.d_max() {
            return Err(Error::SpectrumTruncated {
                what: "requested distance",
                d_max: self.d_max(),
            });
        }
        Ok(())
    }

    /// `sum_{d=d_crc}^{d_tilde} A_d Q(sqrt(d γs))`, clamped to 1.
    pub fn union_bound_ue(&self, gamma_s: f64, d_tilde: usize) -> Result<f64> {
        self.require(d_tilde)?;
        self.weighted_sum(gamma_s, d_tilde, |_, a| a)
    }

    /// `sum_{d=d_free}^{d_tilde} (B_d - A_d) Q(sqrt(d γs))`, clamped to 1.
    pub fn union_bound_nack(&self, gamma_s: f64, d_tilde: usize) -> Result<f64> {
        self.require(d_tilde)?;
        self.weighted_sum(gamma_s, d_tilde, |b, a| b - a)
    }

    fn weighted_sum(&self, gamma_s: f64, d_tilde: usize, count: impl Fn(u128, u128) -> u128) -> Result<f64> {
        let mut total = 0.0;
        for d in 1..=d_tilde {
            let c = count(self.b(d), self.a(d));
            if c > 0 {
                total += c as f64 * pairwise_error_prob(d, gamma_s)?;
            }
        }
        Ok(total.min(1.0))
    }

    /// Nearest-neighbour approximation of the `L = 1` erasure probability,
    /// `(B_{d_free} - A_{d_free}) Q(sqrt(d_free γs))`.
    pub fn nna_nack(&self, gamma_s: f64) -> Result<f64> {
        let d = self.d_free().ok_or(Error::SpectrumTruncated {
            what: "d_free",
            d_max: self.d_max(),
        })?;
        Ok((self.b(d) - self.a(d)) as f64 * pairwise_error_prob(d, gamma_s)?)
    }

    /// The erasure approximation with the coefficient `A_{d_free}` taken
    /// literally. It vanishes whenever `d_crc > d_free`.
    pub fn nna_nack_literal(&self, gamma_s: f64) -> Result<f64> {
        let d = self.d_free().ok_or(Error::SpectrumTruncated {
            what: "d_free",
            d_max: self.d_max(),
        })?;
        Ok(self.a(d) as f64 * pairwise_error_prob(d, gamma_s)?)
    }

    /// `A_{d_crc} Q(sqrt(d_crc γs))`.
    pub fn nna_ue(&self, gamma_s: f64) -> Result<f64> {
        let d = self.d_crc().ok_or(Error::SpectrumTruncated {
            what: "d_crc",
            d_max: self.d_max(),
        })?;
        Ok(self.a(d) as f64 * pairwise_error_prob(d, gamma_s)?)
    }

    /// CSV with columns `d,B_d,A_d`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("d,B_d,A_d\n");
        for (d, b, a) in self.rows() {
            out.push_str(&format!("{d},{b},{a}\n"));
        }
        out
    }
}

/// Free-function forms of the bounds.
pub fn union_bound_ue(spec: &DistanceSpectrum, gamma_s: f64, d_tilde: usize) -> Result<f64> {
    spec.union_bound_ue(gamma_s, d_tilde)
}

pub fn union_bound_nack(spec: &DistanceSpectrum, gamma_s: f64, d_tilde: usize) -> Result<f64> {
    spec.union_bound_nack(gamma_s, d_tilde)
}

pub fn nna_nack(spec: &DistanceSpectrum, gamma_s: f64) -> Result<f64> {
    spec.nna_nack(gamma_s)
}

pub fn nna_ue(spec: &DistanceSpectrum, gamma_s: f64) -> Result<f64> {
    spec.nna_ue(gamma_s)
}

/// Low-SNR reference values for a degree-`m` CRC.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LowSnrLimits {
    /// Limit of `P_UE^1` as the SNR goes to minus infinity, `2^-m`.
    pub ue_list_one: f64,
    /// Limit of `P_UE^{|C|}`, `|C_CRC^-| / |C_CRC| = 1 - 2^-k`.
    pub ue_full_list: f64,
    m: usize,
}

impl LowSnrLimits {
    /// The conjectured bound `P_UE^1 <= 2^-m P_Fail^1`.
    pub fn conjecture(&self, p_fail_list_one: f64) -> f64 {
        p_fail_list_one * 0.5f64.powi(self.m as i32)
    }
}

pub fn low_snr_limits(m: usize, layout: &FrameLayout) -> LowSnrLimits {
    LowSnrLimits {
        ue_list_one: 0.5f64.powi(m as i32),
        ue_full_list: 1.0 - 0.5f64.powi(layout.k as i32),
        m,
    }
}

/// Counter types for the spectrum recursion.
pub(crate) trait Count: Copy + Default + AddAssign + PartialEq + Send + Sync {
    const ONE: Self;
    fn to_u128(self) -> u128;
}

impl Count for u64 {
    const ONE: Self = 1;
    fn to_u128(self) -> u128 {
        u128::from(self)
    }
}

impl Count for u128 {
    const ONE: Self = 1;
    fn to_u128(self) -> u128 {
        self
    }
}

/// Cell updates needed to enumerate up to `d_max`.
pub fn enumeration_cost(trellis: &TrellisCode, crc: &CrcCode, layout: &FrameLayout, d_max: usize) -> u64 {
    layout.stages() as u64
        * trellis.num_states() as u64
        * (1u64 << crc.degree())
        * 2
        * (d_max as u64 + 1)
}

/// Runs the recursion and returns `(B_d, A_d)` for `d = 0..=d_max`.
pub(crate) fn weight_counts<C: Count>(
    trellis: &TrellisCode,
    crc: &CrcCode,
    layout: &FrameLayout,
    d_max: usize,
) -> Vec<(u128, u128)> {
    let s_count = trellis.num_states();
    let r_count = 1usize << crc.degree();
    let width = d_max + 1;
    let n = layout.n();
    let cell = |s: usize, r: usize| (s * r_count + r) * width;
    let next_rem: [Vec<usize>; 2] = [0u8, 1].map(|b| {
        (0..r_count as u32)
            .map(|r| crc.step(r, b) as usize)
            .collect()
    });
    let mut cur = vec![C::default(); s_count * r_count * width];
    let mut nxt = cur.clone();
    // nonzero[s][r]: whether the (s, r) slice has any mass
    let mut live = vec![false; s_count * r_count];
    let mut live_next = live.clone();
    cur[0] = C::ONE;
    live[0] = true;

    for t in 0..layout.stages() {
        nxt.fill(C::default());
        live_next.fill(false);
        let bits: &[u8] = if t < n { &[0, 1] } else { &[0] };
        for s in 0..s_count {
            for &b in bits {
                let ns = trellis.next_state(s as u32, b) as usize;
                let w = trellis.output_weight(s as u32, b) as usize;
                if w > d_max {
                    continue;
                }
                for r in 0..r_count {
                    if !live[s * r_count + r] {
                        continue;
                    }
                    let nr = if t < n { next_rem[b as usize][r] } else { r };
                    let src = &cur[cell(s, r)..cell(s, r) + width - w];
                    let dst_start = cell(ns, nr) + w;
                    let dst = &mut nxt[dst_start..dst_start + width - w];
                    for (d, &x) in dst.iter_mut().zip(src) {
                        *d += x;
                    }
                    live_next[ns * r_count + nr] = true;
                }
            }
        }
        std::mem::swap(&mut cur, &mut nxt);
        std::mem::swap(&mut live, &mut live_next);
    }

    (0..width)
        .map(|d| {
            let b: u128 = (0..r_count).map(|r| cur[cell(0, r) + d].to_u128()).sum();
            let a = cur[cell(0, 0) + d].to_u128();
            if d == 0 {
                (0, 0)
            } else {
                (b, a)
            }
        })
        .collect()
}


/// Exact `(B_d, A_d)` for `d <= d_max` under the default budget.
pub fn enumerate_spectrum(
    trellis: &TrellisCode,
    crc: &CrcCode,
    layout: &FrameLayout,
    d_max: usize,
) -> Result<DistanceSpectrum> {
    enumerate_spectrum_with_budget(trellis, crc, layout, d_max, DEFAULT_BUDGET)
}

/// As [`enumerate_spectrum`], failing with [`Error::BudgetExceeded`] (carrying
/// the deepest spectrum that fits) when the recursion would need more than
/// `budget` cell updates.
pub fn enumerate_spectrum_with_budget(
    trellis: &TrellisCode,
    crc: &CrcCode,
    layout: &FrameLayout,
    d_max: usize,
    budget: u64,
) -> Result<DistanceSpectrum> {
    if layout.m != crc.degree() || layout.v != trellis.memory() {
        return Err(Error::InvalidArgument(
            "layout does not match the code and CRC".into(),
        ));
    }
    if d_max == 0 {
        return Err(Error::InvalidArgument("d_max must be positive".into()));
    }
    let required = enumeration_cost(trellis, crc, layout, d_max);
    if required > budget {
        let per_level = enumeration_cost(trellis, crc, layout, 0);
        let fits = (budget / per_level).saturating_sub(1) as usize;
        let partial = (fits >= 1).then(|| {
            Box::new(DistanceSpectrum {
                layout: *layout,
                crc_label: crc.hex_label(),
                counts: weight_counts::<u128>(trellis, crc, layout, fits),
            })
        });
        return Err(Error::BudgetExceeded {
            required,
            budget,
            partial,
        });
    }
    let spectrum = DistanceSpectrum {
        layout: *layout,
        crc_label: crc.hex_label(),
        counts: weight_counts::<u128>(trellis, crc, layout, d_max),
    };
    if spectrum.d_free().is_none() {
        return Err(Error::SpectrumTruncated {
            what: "d_free",
            d_max,
        });
    }
    Ok(spectrum)
}

/// Enumerates deeper and deeper until `d_crc` appears (or `d_limit` is hit).
pub fn spectrum_through_d_crc(
    trellis: &TrellisCode,
    crc: &CrcCode,
    layout: &FrameLayout,
    d_limit: usize,
) -> Result<DistanceSpectrum> {
    let mut d_max = 8usize.min(d_limit);
    loop {
        match enumerate_spectrum(trellis, crc, layout, d_max) {
            Ok(spec) if spec.d_crc().is_some() => return Ok(spec),
            Ok(_) | Err(Error::SpectrumTruncated { .. }) => {}
            Err(e) => return Err(e),
        }
        if d_max >= d_limit {
            return Err(Error::SpectrumTruncated {
                what: "d_crc",
                d_max,
            });
        }
        d_max = (d_max + 4).min(d_limit);
    }
}

/// A nonzero trellis input sequence together with the weight of its codeword.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LowWeightWord {
    /// The `n = k + m` input bits.
    pub inputs: Vec<u8>,
    pub weight: usize,
}

/// Lists every nonzero input whose codeword weight lies in `d_lo..=d_hi` and
/// whose input is divisible by the CRC generator (pass [`CrcCode::none`] to
/// drop that condition). Fails if more than `limit` words qualify.
pub fn low_weight_words(
    trellis: &TrellisCode,
    crc: &CrcCode,
    layout: &FrameLayout,
    d_lo: usize,
    d_hi: usize,
    limit: usize,
) -> Result<Vec<LowWeightWord>> {
    let s_count = trellis.num_states();
    let r_count = 1usize << crc.degree();
    let stages = layout.stages();
    let n = layout.n();
    const UNREACHABLE: u16 = u16::MAX;
    // least weight needed to finish in state 0, remainder 0 from (t, s, r)
    let idx = |t: usize, s: usize, r: usize| (t * s_count + s) * r_count + r;
    let mut to_go = vec![UNREACHABLE; (stages + 1) * s_count * r_count];
    to_go[idx(stages, 0, 0)] = 0;
    for t in (0..stages).rev() {
        let bits: &[u8] = if t < n { &[0, 1] } else { &[0] };
        for s in 0..s_count {
            for r in 0..r_count {
                let mut best = UNREACHABLE;
                for &b in bits {
                    let ns = trellis.next_state(s as u32, b) as usize;
                    let nr = if t < n { crc.step(r as u32, b) as usize } else { r };
                    let rest = to_go[idx(t + 1, ns, nr)];
                    if rest != UNREACHABLE {
                        best = best.min(rest + trellis.output_weight(s as u32, b) as u16);
                    }
                }
                to_go[idx(t, s, r)] = best;
            }
        }
    }

    struct Walk<'a> {
        trellis: &'a TrellisCode,
        crc: &'a CrcCode,
        to_go: &'a [u16],
        s_count: usize,
        r_count: usize,
        n: usize,
        stages: usize,
        d_lo: usize,
        d_hi: usize,
        limit: usize,
        path: Vec<u8>,
        out: Vec<LowWeightWord>,
    }

    impl Walk<'_> {
        fn visit(&mut self, t: usize, s: u32, r: u32, w: usize) -> bool {
            if t == self.stages {
                if w >= self.d_lo && w > 0 {
                    if self.out.len() == self.limit {
                        return false;
                    }
                    self.out.push(LowWeightWord {
                        inputs: self.path[..self.n].to_vec(),
                        weight: w,
                    });
                }
                return true;
            }
            let bits: &[u8] = if t < self.n { &[0, 1] } else { &[0] };
            for &b in bits {
                let ns = self.trellis.next_state(s, b);
                let nr = if t < self.n { self.crc.step(r, b) } else { r };
                let bw = self.trellis.output_weight(s, b) as usize;
                let rest = self.to_go
                    [((t + 1) * self.s_count + ns as usize) * self.r_count + nr as usize];
                if rest == u16::MAX || w + bw + rest as usize > self.d_hi {
                    continue;
                }
                self.path.push(b);
                let ok = self.visit(t + 1, ns, nr, w + bw);
                self.path.pop();
                if !ok {
                    return false;
                }
            }
            true
        }
    }

    let mut walk = Walk {
        trellis,
        crc,
        to_go: &to_go,
        s_count,
        r_count,
        n,
        stages,
        d_lo,
        d_hi,
        limit,
        path: Vec::with_capacity(stages),
        out: Vec::new(),
    };
    if !walk.visit(0, 0, 0, 0) {
        return Err(Error::InvalidArgument(format!(
            "more than {limit} words with weight in {d_lo}..={d_hi}"
        )));
    }
    Ok(walk.out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convcode::{conv_encode, ConvCode};
    use rand::{Rng, SeedableRng};

    fn parts(cc: &str, crc: &str, k: usize) -> (TrellisCode, CrcCode, FrameLayout) {
        let code = ConvCode::from_octal(cc).unwrap();
        let crc = CrcCode::from_hex(crc).unwrap();
        let layout = FrameLayout::new(k, &crc, &code).unwrap();
        (TrellisCode::new(code), crc, layout)
    }

    fn weight(bits: &[u8]) -> usize {
        bits.iter().filter(|&&b| b == 1).count()
    }

    /// Encodes every input of length n and tallies (B_d, A_d) around `center`.
    fn exhaustive(t: &TrellisCode, crc: &CrcCode, l: &FrameLayout, d_max: usize, center: u32) -> Vec<(u128, u128)> {
        let n = l.n();
        let bits = |x: u32| -> Vec<u8> { (0..n).map(|i| ((x >> (n - 1 - i)) & 1) as u8).collect() };
        let c0 = conv_encode(&bits(center), t).unwrap();
        let mut counts = vec![(0u128, 0u128); d_max + 1];
        for x in 0u32..1 << n {
            if x == center {
                continue;
            }
            let c = conv_encode(&bits(x), t).unwrap();
            let d = c.iter().zip(&c0).filter(|(a, b)| a != b).count();
            let diff = bits(x ^ center);
            let passes = crate::gf2::BinaryPolynomial::from_bits_msb_first(&diff)
                .rem(crc.generator())
                .unwrap()
                .is_zero();
            if d <= d_max {
                counts[d].0 += 1;
                if passes {
                    counts[d].1 += 1;
                }
            }
        }
        counts
    }

    #[test]
    fn k256_fixture() {
        let (t, crc, l) = parts("13,17", "0x43", 256);
        let spec = enumerate_spectrum(&t, &crc, &l, 24).unwrap();
        assert_eq!(spec.d_free(), Some(6));
        assert_eq!(spec.b(6), 261);
        assert_eq!(spec.d_crc(), Some(12));
        assert_eq!(spec.a(12), 668);
        for (_, b, a) in spec.rows() {
            assert!(a <= b);
        }
    }

    #[test]
    fn matches_exhaustive_enumeration() {
        for (cc, crc, k) in [("13,17", "0x9", 7), ("13,17", "0x43", 6), ("27,31", "0x15", 8), ("5,7", "0xB", 9)] {
            let (t, crc, l) = parts(cc, crc, k);
            let spec = enumerate_spectrum(&t, &crc, &l, 20).unwrap();
            let oracle = exhaustive(&t, &crc, &l, 20, 0);
            for d in 1..=20 {
                assert_eq!((spec.b(d), spec.a(d)), oracle[d], "{cc} d={d}");
            }
        }
    }

    #[test]
    fn counts_do_not_depend_on_the_reference_codeword() {
        let (t, crc, l) = parts("13,17", "0x9", 8);
        let base = exhaustive(&t, &crc, &l, 16, 0);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..4 {
            // recenter on a random CRC codeword
            let msg: Vec<u8> = (0..8).map(|_| rng.random_range(0..2)).collect();
            let word = crc.encode(&msg).unwrap();
            let center = word.iter().fold(0u32, |acc, &b| (acc << 1) | u32::from(b));
            assert_eq!(exhaustive(&t, &crc, &l, 16, center), base);
        }
    }

    #[test]
    fn union_bound_properties() {
        let (t, crc, l) = parts("13,17", "0x43", 256);
        let spec = enumerate_spectrum(&t, &crc, &l, 24).unwrap();
        let single = spec.truncated(12);
        for db in [2.0, 4.0, 6.0] {
            let g = crate::channel::db_to_linear(db);
            let one_term = 668.0 * crate::channel::q_function((12.0 * g).sqrt());
            assert!((single.union_bound_ue(g, 12).unwrap() - one_term).abs() < 1e-15);
            assert!((spec.nna_ue(g).unwrap() - one_term).abs() < 1e-15);
            let nack = 261.0 * crate::channel::q_function((6.0 * g).sqrt());
            assert!((spec.nna_nack(g).unwrap() - nack).abs() < 1e-15);
            assert_eq!(spec.nna_nack_literal(g).unwrap(), 0.0);
        }
        let mut last = f64::INFINITY;
        for i in 0..40 {
            let g = crate::channel::db_to_linear(i as f64 * 0.25);
            let ub = spec.union_bound_ue(g, 24).unwrap();
            assert!(ub <= last);
            last = ub;
            let mut prev = 0.0;
            for d in 12..=24 {
                let x = spec.union_bound_ue(g, d).unwrap();
                assert!(x >= prev);
                prev = x;
            }
        }
        let huge = crate::channel::db_to_linear(40.0);
        assert!(spec.union_bound_ue(huge, 24).unwrap() < 1e-300);
        assert!(spec.nna_nack(huge).unwrap() < 1e-300);
        assert!(spec.union_bound_ue(1.0, 25).is_err());
    }

    #[test]
    fn low_snr_reference_values() {
        let (_, _, l) = parts("13,17", "0x43", 256);
        let lim = low_snr_limits(6, &l);
        assert_eq!(lim.ue_list_one, 0.015625);
        assert_eq!(lim.conjecture(1.0), 0.015625);
        assert_eq!(low_snr_limits(0, &l).ue_list_one, 1.0);
        assert!((lim.ue_full_list - 1.0).abs() < 1e-15);
    }

    #[test]
    fn budget_exceeded_reports_partial() {
        let (t, crc, l) = parts("13,17", "0x43", 64);
        let per_level = enumeration_cost(&t, &crc, &l, 0);
        match enumerate_spectrum_with_budget(&t, &crc, &l, 24, per_level * 10) {
            Err(Error::BudgetExceeded { partial: Some(p), .. }) => {
                assert_eq!(p.d_max(), 9);
                assert_eq!(p.b(6), enumerate_spectrum(&t, &crc, &l, 9).unwrap().b(6));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn low_weight_words_agree_with_counts() {
        let (t, crc, l) = parts("13,17", "0x43", 256);
        let spec = enumerate_spectrum(&t, &crc, &l, 14).unwrap();
        let words = low_weight_words(&t, &crc, &l, 12, 13, 10_000).unwrap();
        let at = |d| words.iter().filter(|w| w.weight == d).count() as u128;
        assert_eq!(at(12), 668);
        assert_eq!(at(13), spec.a(13));
        for w in words.iter().take(50) {
            assert!(crc.check(&w.inputs).unwrap());
            assert_eq!(weight(&conv_encode(&w.inputs, &t).unwrap()), w.weight);
        }
        let all = low_weight_words(&t, &CrcCode::none(), &l, 6, 6, 1000).unwrap();
        assert_eq!(all.len(), 261);
        assert!(low_weight_words(&t, &crc, &l, 12, 12, 10).is_err());
    }

    #[test]
    fn table_one_pairs_have_d_crc_above_d_free() {
        for (cc, crc) in [
            ("13,17", "0x43"),
            ("27,31", "0x709"),
            ("13,17", "0x9"),
            ("53,75", "0x25"),
            ("133,171", "0xF"),
            ("247,371", "0x9"),
        ] {
            let (t, crc, l) = parts(cc, crc, 64);
            let spec = spectrum_through_d_crc(&t, &crc, &l, 30).unwrap();
            let d_crc = spec.d_crc().unwrap();
            assert!(spec.a(d_crc) > 0);
            assert!(d_crc > spec.d_free().unwrap());
        }
    }
}
