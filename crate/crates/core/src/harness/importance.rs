//! Importance sampling for small undetected-error probabilities.
//!
//! The all-zero codeword is sent (the code is linear and the channel
//! symmetric). Noise is drawn from a mixture of the true noise law and copies
//! of it shifted halfway towards each low-weight CRC codeword, so the
//! decision regions that dominate `P_UE` are hit often. Each sample is weighted
//! by the likelihood ratio `φ(z) / q(z)`, which the unshifted component keeps
//! below `1 / defensive_weight`.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::Simulator;
use crate::channel::{q_function, ChannelConfig, AMPLITUDE};
use crate::convcode::conv_encode;
use crate::error::{Error, Result};
use crate::rng::frame_rng;
use crate::slva::{ListDecoder, Verdict};
use crate::spectrum::{low_weight_words, spectrum_through_d_crc};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IsOptions {
    pub samples: u64,
    pub seed: u64,
    /// Shift towards CRC codewords of weight `d_crc..=d_crc + extra_distance`.
    pub extra_distance: usize,
    /// Mixture weight of the unshifted noise law.
    pub defensive_weight: f64,
    /// Refuse to build mixtures with more components than this.
    pub max_components: usize,
}

impl Default for IsOptions {
    fn default() -> Self {
        Self {
            samples: 20_000,
            seed: 1,
            extra_distance: 2,
            defensive_weight: 0.1,
            max_components: 200_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IsEstimate {
    pub p_ue: f64,
    pub std_err: f64,
    pub samples: u64,
    /// Samples that ended in an undetected error.
    pub hits: u64,
    pub components: usize,
}

impl IsEstimate {
    /// Normal-theory 95% interval.
    pub fn ci95(&self) -> (f64, f64) {
        let h = super::Z95 * self.std_err;
        ((self.p_ue - h).max(0.0), self.p_ue + h)
    }
}

struct Mixture {
    /// Flattened supports of the shifted components.
    support: Vec<u32>,
    offsets: Vec<usize>,
    ln_weight: Vec<f64>,
    cumulative: Vec<f64>,
    defensive: f64,
}

impl Mixture {
    fn component(&self, j: usize) -> &[u32] {
        &self.support[self.offsets[j]..self.offsets[j + 1]]
    }

    fn len(&self) -> usize {
        self.ln_weight.len()
    }
}

/// `P_UE` of `sim` at `snr_db` by importance sampling.
pub fn estimate_p_ue_importance(sim: &Simulator, snr_db: f64, opts: &IsOptions) -> Result<IsEstimate> {
    if opts.samples < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    if !(opts.defensive_weight > 0.0 && opts.defensive_weight < 1.0) {
        return Err(Error::InvalidArgument("defensive weight must lie in (0, 1)".into()));
    }
    let channel = ChannelConfig::from_db(snr_db)?;
    let gamma = channel.gamma_s();
    let sigma = channel.noise_std();
    let d_crc = match sim.spectrum() {
        Some(s) => s.d_crc(),
        None => spectrum_through_d_crc(sim.trellis(), sim.crc(), sim.layout(), 48)?.d_crc(),
    }
    .ok_or(Error::SpectrumTruncated { what: "d_crc", d_max: 48 })?;

    let words = low_weight_words(
        sim.trellis(),
        sim.crc(),
        sim.layout(),
        d_crc,
        d_crc + opts.extra_distance,
        opts.max_components,
    )?;
    let mut support = Vec::new();
    let mut offsets = vec![0];
    let mut raw = Vec::with_capacity(words.len());
    for w in &words {
        let coded = conv_encode(&w.inputs, sim.trellis())?;
        support.extend(
            coded
                .iter()
                .enumerate()
                .filter(|(_, &b)| b == 1)
                .map(|(i, _)| i as u32),
        );
        offsets.push(support.len());
        raw.push(q_function((w.weight as f64 * gamma).sqrt()));
    }
    let total: f64 = raw.iter().sum();
    let shifted = 1.0 - opts.defensive_weight;
    let mut acc = opts.defensive_weight;
    let cumulative = raw
        .iter()
        .map(|r| {
            acc += shifted * r / total;
            acc
        })
        .collect();
    let mix = Mixture {
        support,
        offsets,
        ln_weight: raw.iter().map(|r| (shifted * r / total).ln()).collect(),
        cumulative,
        defensive: opts.defensive_weight,
    };

    let layout = *sim.layout();
    let point = u64::MAX;
    let values: Vec<(f64, bool)> = (0..opts.samples)
        .into_par_iter()
        .map_init(
            || {
                (
                    ListDecoder::new(sim.trellis(), sim.crc(), layout).expect("layout checked"),
                    vec![0.0; layout.channel_bits()],
                )
            },
            |(decoder, received), i| {
                let mut rng = frame_rng(opts.seed, point, i);
                let u: f64 = rng.random();
                let chosen = (u >= mix.defensive).then(|| {
                    mix.cumulative
                        .partition_point(|&c| c <= u)
                        .min(mix.len() - 1)
                });
                for y in received.iter_mut() {
                    let z: f64 = rng.sample(StandardNormal);
                    *y = sigma * z;
                }
                if let Some(j) = chosen {
                    for &p in mix.component(j) {
                        received[p as usize] -= AMPLITUDE;
                    }
                }
                let ln_lr = -ln_mixture_ratio(&mix, received, sigma);
                for y in received.iter_mut() {
                    *y += AMPLITUDE;
                }
                let out = decoder
                    .decode(received, sim.list_size())
                    .expect("buffers sized from the layout");
                let hit = matches!(&out.verdict, Verdict::Message(m) if m.contains(&1));
                (if hit { ln_lr.exp() } else { 0.0 }, hit)
            },
        )
        .collect();

    let n = opts.samples as f64;
    let mean = values.iter().map(|v| v.0).sum::<f64>() / n;
    let var = values.iter().map(|v| (v.0 - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(IsEstimate {
        p_ue: mean,
        std_err: (var / n).sqrt(),
        samples: opts.samples,
        hits: values.iter().filter(|v| v.1).count() as u64,
        components: mix.len(),
    })
}

/// `ln(q(z) / φ(z))` for noise `z`.
fn ln_mixture_ratio(mix: &Mixture, z: &[f64], sigma: f64) -> f64 {
    let inv_var = 1.0 / (sigma * sigma);
    let exponents: Vec<f64> = (0..mix.len())
        .map(|j| {
            let s = mix.component(j);
            let dot: f64 = s.iter().map(|&p| z[p as usize]).sum();
            mix.ln_weight[j] + (-AMPLITUDE * dot - s.len() as f64 * AMPLITUDE * AMPLITUDE / 2.0) * inv_var
        })
        .collect();
    let top = exponents
        .iter()
        .copied()
        .fold(mix.defensive.ln(), f64::max);
    let sum = (mix.defensive.ln() - top).exp() + exponents.iter().map(|e| (e - top).exp()).sum::<f64>();
    top + sum.ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convcode::ConvCode;
    use crate::gf2::CrcCode;
    use crate::harness::{ListSize, MessageMode};

    #[test]
    fn agrees_with_plain_monte_carlo_where_both_work() {
        let sim = Simulator::new(
            &ConvCode::from_octal("13,17").unwrap(),
            &CrcCode::from_hex("0x9").unwrap(),
            16,
            ListSize::Max,
        )
        .unwrap();
        let snr = 2.0;
        let plain = sim.run_frames(snr, 4, 0, 0, 200_000, MessageMode::AllZero).unwrap();
        let opts = IsOptions {
            samples: 20_000,
            seed: 8,
            ..IsOptions::default()
        };
        let is = estimate_p_ue_importance(&sim, snr, &opts).unwrap();
        let p = plain.p_ue().unwrap();
        let se_plain = (p * (1.0 - p) / plain.frames as f64).sqrt();
        let se = (se_plain.powi(2) + is.std_err.powi(2)).sqrt();
        assert!((is.p_ue - p).abs() < 4.0 * se, "IS {} +- {} vs MC {p}", is.p_ue, is.std_err);
        assert!(is.hits > 1000);
    }
}
