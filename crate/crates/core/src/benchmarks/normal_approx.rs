//! Normal approximation to the finite-blocklength error probability of the
//! binary-input AWGN channel, used as the reference the SNR gaps are
//! measured against.
//!
//! With the mapping of [`crate::channel`] each coded bit sees a BPSK channel
//! with per-dimension SNR `γs`, i.e. inputs `±1` and noise variance `1/γs`.

use std::sync::OnceLock;

use crate::channel::{db_to_linear, q_function};
use crate::error::{Error, Result};

/// Nodes used for the reported values; a smaller rule checks convergence.
const NODES: usize = 128;
const CHECK_NODES: usize = 96;
/// The integrand bends sharply near `y = 0` at high SNR, where the two
/// rules differ by up to ~1e-6; well below what matters for `n C`.
const AGREEMENT: f64 = 1e-5;

/// Gauss-Hermite nodes and weights for `∫ f(x) exp(-x²) dx`, by Newton
/// iteration on the orthonormal Hermite recurrence.
pub fn gauss_hermite(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one node".into()));
    }
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    let mut z = 0.0f64;
    for i in 0..n.div_ceil(2) {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        let mut converged = false;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-14 * z.abs().max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Convergence("Gauss-Hermite node iteration"));
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    Ok((x, w))
}

fn rule(n: usize) -> Result<&'static (Vec<f64>, Vec<f64>)> {
    static MAIN: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    static CHECK: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    let cell = match n {
        NODES => &MAIN,
        CHECK_NODES => &CHECK,
        _ => unreachable!("only two rules are cached"),
    };
    if let Some(r) = cell.get() {
        return Ok(r);
    }
    let r = gauss_hermite(n)?;
    Ok(cell.get_or_init(|| r))
}

/// `log2(1 + e^-u)` without overflow.
fn log2_one_plus_exp_neg(u: f64) -> f64 {
    let nat = if u > 0.0 { (-u).exp().ln_1p() } else { -u + u.exp().ln_1p() };
    nat / std::f64::consts::LN_2
}

fn moments(gamma_s: f64, n: usize) -> Result<(f64, f64)> {
    let (x, w) = rule(n)?;
    Ok(moments_with(x, w, gamma_s))
}

fn moments_with(x: &[f64], w: &[f64], gamma_s: f64) -> (f64, f64) {
    let sigma = (1.0 / gamma_s).sqrt();
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    for (&xi, &wi) in x.iter().zip(w) {
        let y = 1.0 + sigma * std::f64::consts::SQRT_2 * xi;
        let info = 1.0 - log2_one_plus_exp_neg(2.0 * y * gamma_s);
        m1 += wi * info;
        m2 += wi * info * info;
    }
    let norm = std::f64::consts::PI.sqrt();
    let c = m1 / norm;
    (c, (m2 / norm - c * c).max(0.0))
}

/// Capacity `C` (bits per channel use) and dispersion `V` (bits²) of the
/// binary-input AWGN channel at per-dimension SNR `gamma_s`.
pub fn biawgn_capacity_dispersion(gamma_s: f64) -> Result<(f64, f64)> {
    if !(gamma_s > 0.0) || !gamma_s.is_finite() {
        return Err(Error::InvalidArgument(format!("SNR must be positive and finite, got {gamma_s}")));
    }
    let (c, v) = moments(gamma_s, NODES)?;
    let (c2, v2) = moments(gamma_s, CHECK_NODES)?;
    if (c - c2).abs() > AGREEMENT || (v - v2).abs() > AGREEMENT {
        return Err(Error::Convergence("Gauss-Hermite rules disagree"));
    }
    Ok((c, v))
}

/// `Q((n C - k + log2(n) / 2) / sqrt(n V))` for `n_c` channel bits carrying
/// `k_info` message bits.
pub fn finite_blocklength_benchmark(n_c: usize, k_info: usize, gamma_s: f64) -> Result<f64> {
    if n_c < 64 {
        return Err(Error::InvalidArgument(format!(
            "the normal approximation needs n_c >= 64, got {n_c}"
        )));
    }
    let (c, v) = biawgn_capacity_dispersion(gamma_s)?;
    let n = n_c as f64;
    let num = n * c - k_info as f64 + 0.5 * n.log2();
    if v == 0.0 {
        return Ok(if num > 0.0 { 0.0 } else { 1.0 });
    }
    Ok(q_function(num / (n * v).sqrt()))
}

/// SNR in dB at which the benchmark equals `target`.
pub fn benchmark_snr_db(n_c: usize, k_info: usize, target: f64) -> Result<f64> {
    if !(target > 0.0 && target < 0.5) {
        return Err(Error::InvalidArgument(format!("target must lie in (0, 0.5), got {target}")));
    }
    let eval = |db: f64| finite_blocklength_benchmark(n_c, k_info, db_to_linear(db));
    let (mut lo, mut hi) = (-20.0, 30.0);
    if eval(lo)? < target || eval(hi)? > target {
        return Err(Error::Convergence("target outside the SNR window"));
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if eval(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
