//! QPSK over AWGN and the pairwise error probability.
//!
//! Each coded bit occupies one real dimension (a QPSK symbol is two
//! consecutive dimensions) with amplitude `±sqrt(Es/2)`, bit 0 mapping to the
//! positive sign. With `Es = 1` the noise variance per dimension is
//! `N0/2 = 1/(2 γs)`, and two words at Hamming distance `d` are `2d` apart in
//! squared Euclidean distance, which gives `P(d) = Q(sqrt(d γs))`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Amplitude of one real dimension when `Es = 1`.
pub const AMPLITUDE: f64 = std::f64::consts::FRAC_1_SQRT_2;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelConfig {
    gamma_s: f64,
}

impl ChannelConfig {
    /// `gamma_s` is `Es/N0` as a linear ratio; `f64::INFINITY` is the noiseless
    /// channel.
    pub fn new(gamma_s: f64) -> Result<Self> {
        if gamma_s.is_nan() || gamma_s <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "Es/N0 must be positive, got {gamma_s}"
            )));
        }
        Ok(Self { gamma_s })
    }

    pub fn from_db(db: f64) -> Result<Self> {
        Self::new(db_to_linear(db))
    }

    pub fn gamma_s(&self) -> f64 {
        self.gamma_s
    }

    pub fn snr_db(&self) -> f64 {
        linear_to_db(self.gamma_s)
    }

    pub fn es(&self) -> f64 {
        1.0
    }

    pub fn n0(&self) -> f64 {
        self.es() / self.gamma_s
    }

    pub fn noise_variance(&self) -> f64 {
        self.n0() / 2.0
    }

    pub fn noise_std(&self) -> f64 {
        self.noise_variance().sqrt()
    }
}

pub fn modulate(coded_bits: &[u8]) -> Vec<f64> {
    let mut out = vec![0.0; coded_bits.len()];
    modulate_into(coded_bits, &mut out);
    out
}

pub fn modulate_into(coded_bits: &[u8], out: &mut [f64]) {
    for (o, &b) in out.iter_mut().zip(coded_bits) {
        *o = if b == 0 { AMPLITUDE } else { -AMPLITUDE };
    }
}

pub fn add_noise<R: Rng + ?Sized>(signal: &[f64], cfg: &ChannelConfig, rng: &mut R) -> Vec<f64> {
    let mut out = signal.to_vec();
    add_noise_in_place(&mut out, cfg, rng);
    out
}

/// Adds i.i.d. `N(0, N0/2)` samples. One normal draw is consumed per
/// dimension even when the channel is noiseless, so stream positions do not
/// depend on the SNR.
pub fn add_noise_in_place<R: Rng + ?Sized>(signal: &mut [f64], cfg: &ChannelConfig, rng: &mut R) {
    let sigma = cfg.noise_std();
    for x in signal.iter_mut() {
        let z: f64 = rng.sample(StandardNormal);
        *x += sigma * z;
    }
}

/// Gaussian tail `Q(x) = erfc(x / sqrt 2) / 2`.
///
/// Uses the `libm` complementary error function, whose relative error is
/// below 1e-15 over the range used here (`|x| < 38`).
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// `P(d) = Q(sqrt(d γs))`.
pub fn pairwise_error_prob(d: usize, gamma_s: f64) -> Result<f64> {
    if d == 0 {
        return Err(Error::InvalidArgument(
            "error events have distance at least 1".into(),
        ));
    }
    if gamma_s.is_nan() || gamma_s < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "Es/N0 must be nonnegative, got {gamma_s}"
        )));
    }
    Ok(q_function((d as f64 * gamma_s).sqrt()))
}
