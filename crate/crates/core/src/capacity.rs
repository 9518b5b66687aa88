//! The coded channel seen by the message: each `k`-bit message is delivered
//! correctly, erased, or replaced by another message. Capacities are in bits
//! per codeword.
//!
//! With `ε = P_UE` and `α = P_NACK` every model shares the term
//! `(1 - α)[k - h(ε / (1 - α))]` and differs in how `ε` is spread over the
//! `2^k - 1` wrong messages:
//!
//! * loose lower bound: uniformly,
//! * nearest-neighbour lower bound: `ε*` on each of `N` nearest neighbours and
//!   the rest uniformly over the others,
//! * nearest-neighbour upper bound: uniformly over the `N` nearest neighbours,
//! * true channel: the measured row `p_1, ..., p_{2^k - 1}`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::channel::ChannelConfig;
use crate::convcode::{conv_encode, FrameLayout, TrellisCode};
use crate::error::{Error, Result};
use crate::gf2::CrcCode;
use crate::harness::{wilson_interval, FrameOutcome, MessageMode, Simulator, Z95};

/// Largest `k` for which an explicit row is built.
pub const MAX_ROW_K: usize = 12;

/// `-p log2 p - (1-p) log2 (1-p)`, zero at both ends.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// Entropy in bits of a probability vector; zero entries contribute nothing.
pub fn entropy_bits(probs: &[f64]) -> f64 {
    probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum()
}

/// `log2(2^k - c)` without forming `2^k`.
fn log2_pow2_minus(k: usize, c: f64) -> f64 {
    k as f64 + (-c * 0.5f64.powi(k as i32)).ln_1p() / std::f64::consts::LN_2
}

#[derive(Clone, Debug, PartialEq)]
pub struct CodedChannelModel {
    pub k: usize,
    /// `ε`, total probability of an undetected error.
    pub epsilon: f64,
    /// `α`, erasure probability.
    pub alpha: f64,
    /// `N`, the number of nearest-neighbour messages.
    pub nn_count: Option<u128>,
    /// `ε*`, probability of one particular nearest neighbour.
    pub eps_star: Option<f64>,
    /// `p_1, ..., p_{2^k - 1}` indexed by `decoded XOR sent`; entry 0 unused.
    pub row: Option<Vec<f64>>,
}

impl CodedChannelModel {
    pub fn new(k: usize, epsilon: f64, alpha: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        if !(epsilon >= 0.0 && alpha >= 0.0 && epsilon + alpha <= 1.0 + 1e-12) {
            return Err(Error::InvalidArgument(format!(
                "need ε, α >= 0 and ε + α <= 1, got ε = {epsilon}, α = {alpha}"
            )));
        }
        Ok(Self {
            k,
            epsilon,
            alpha,
            nn_count: None,
            eps_star: None,
            row: None,
        })
    }

    pub fn with_nearest_neighbors(mut self, n: u128, eps_star: Option<f64>) -> Self {
        self.nn_count = Some(n);
        self.eps_star = eps_star;
        self
    }

    /// Attaches an explicit row; it must have `2^k` entries and sum to `ε`
    /// over indices `1..`.
    pub fn with_row(mut self, row: Vec<f64>) -> Result<Self> {
        if self.k > MAX_ROW_K {
            return Err(Error::InvalidArgument(format!(
                "explicit rows need k <= {MAX_ROW_K}"
            )));
        }
        if row.len() != 1 << self.k {
            return Err(Error::LengthMismatch {
                expected: 1 << self.k,
                actual: row.len(),
            });
        }
        let sum: f64 = row[1..].iter().sum();
        if (sum - self.epsilon).abs() > 1e-9 || row.iter().any(|&p| p < 0.0) {
            return Err(Error::InvalidArgument(format!(
                "row sums to {sum}, expected ε = {}",
                self.epsilon
            )));
        }
        self.row = Some(row);
        Ok(self)
    }

    /// `(1 - α)[k - h(ε / (1 - α))]`.
    fn common_term(&self) -> f64 {
        let keep = 1.0 - self.alpha;
        if keep <= 0.0 {
            return 0.0;
        }
        keep * (self.k as f64 - binary_entropy((self.epsilon / keep).min(1.0)))
    }

    fn nn(&self) -> Result<f64> {
        let n = self
            .nn_count
            .ok_or_else(|| Error::InvalidArgument("nearest-neighbour count not set".into()))?;
        if n == 0 {
            return Err(Error::InvalidArgument("need at least one nearest neighbour".into()));
        }
        Ok(n as f64)
    }
}

/// Open interval `(ε / (2^k - 1), ε / N)` that `ε*` must lie in.
pub fn eps_star_interval(model: &CodedChannelModel) -> Result<(f64, f64)> {
    let n = model.nn()?;
    let others = 2f64.powf(log2_pow2_minus(model.k, 1.0));
    Ok((model.epsilon / others, model.epsilon / n))
}

/// Loose lower bound: `ε` spread evenly over all wrong messages.
pub fn capacity_llb(model: &CodedChannelModel) -> f64 {
    model.common_term() - model.epsilon * log2_pow2_minus(model.k, 1.0)
}

/// Nearest-neighbour lower bound.
pub fn capacity_nnlb(model: &CodedChannelModel) -> Result<f64> {
    let eps = model.epsilon;
    if eps == 0.0 {
        return Ok(model.common_term());
    }
    let n = model.nn()?;
    let eps_star = model
        .eps_star
        .ok_or_else(|| Error::InvalidArgument("ε* not set".into()))?;
    let (lo, hi) = eps_star_interval(model)?;
    if !(eps_star > lo && eps_star < hi) {
        return Err(Error::OutOfInterval {
            value: eps_star,
            lo,
            hi,
        });
    }
    let near = n * eps_star;
    Ok(model.common_term()
        - eps * binary_entropy(near / eps)
        - near * n.log2()
        - (eps - near) * log2_pow2_minus(model.k, 1.0 + n))
}

/// Nearest-neighbour upper bound: `ε` spread over the `N` nearest neighbours.
pub fn capacity_nnub(model: &CodedChannelModel) -> Result<f64> {
    if model.epsilon == 0.0 {
        return Ok(model.common_term());
    }
    Ok(model.common_term() - model.epsilon * model.nn()?.log2())
}

/// True capacity from the explicit row. The closed form is cross-checked
/// against a direct evaluation of `I(X; Y)`.
pub fn capacity_true(model: &CodedChannelModel) -> Result<f64> {
    let closed = capacity_true_closed_form(model)?;
    let direct = mutual_information_direct(model)?;
    if (closed - direct).abs() > 1e-9 * model.k as f64 {
        return Err(Error::Inconsistent(format!(
            "true capacity {closed} vs I(X;Y) {direct}"
        )));
    }
    Ok(closed)
}

/// `(1 - α)[k - h(ε/(1-α))] - ε H(p_1/ε, ..., p_{2^k-1}/ε)`.
pub fn capacity_true_closed_form(model: &CodedChannelModel) -> Result<f64> {
    let row = model
        .row
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("true capacity needs an explicit row".into()))?;
    let eps = model.epsilon;
    if eps == 0.0 {
        return Ok(model.common_term());
    }
    let normalized: Vec<f64> = row[1..].iter().map(|p| p / eps).collect();
    Ok(model.common_term() - eps * entropy_bits(&normalized))
}

/// `I(X; Y)` for uniform `X` over the `2^k` messages and output alphabet
/// messages plus erasure, built from the full transition matrix.
pub fn mutual_information_direct(model: &CodedChannelModel) -> Result<f64> {
    let row = model
        .row
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("direct evaluation needs an explicit row".into()))?;
    let size = 1usize << model.k;
    let correct = 1.0 - model.epsilon - model.alpha;
    let transition = |x: usize, y: usize| if x == y { correct.max(0.0) } else { row[x ^ y] };
    let px = 1.0 / size as f64;
    let mut h_y_given_x = 0.0;
    let mut p_y = vec![0.0; size];
    for x in 0..size {
        let mut h = entropy_bits(&[model.alpha]);
        for (y, py) in p_y.iter_mut().enumerate() {
            let p = transition(x, y);
            *py += px * p;
            if p > 0.0 {
                h -= p * p.log2();
            }
        }
        h_y_given_x += px * h;
    }
    let h_y = entropy_bits(&p_y) + entropy_bits(&[model.alpha]);
    Ok(h_y - h_y_given_x)
}

/// Capacity per channel use.
pub fn per_channel_use(capacity: f64, layout: &FrameLayout) -> f64 {
    capacity / layout.channel_bits() as f64
}

/// Messages whose CRC codeword has the smallest nonzero weight, as indices
/// (first message bit most significant), with that weight.
pub fn nearest_neighbor_messages(
    trellis: &TrellisCode,
    crc: &CrcCode,
    layout: &FrameLayout,
) -> Result<(usize, Vec<u64>)> {
    if layout.k > 20 {
        return Err(Error::InvalidArgument("nearest neighbours are listed for k <= 20".into()));
    }
    let k = layout.k;
    let mut best = usize::MAX;
    let mut out = Vec::new();
    for idx in 1u64..1 << k {
        let msg: Vec<u8> = (0..k).map(|i| ((idx >> (k - 1 - i)) & 1) as u8).collect();
        let word = crc.encode(&msg)?;
        let w = conv_encode(&word, trellis)?.iter().filter(|&&b| b == 1).count();
        if w < best {
            best = w;
            out.clear();
        }
        if w == best {
            out.push(idx);
        }
    }
    Ok((best, out))
}

/// Simulated row of the coded channel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrueRowEstimate {
    pub k: usize,
    pub frames: u64,
    pub correct: u64,
    pub erasures: u64,
    /// Counts indexed by `decoded XOR sent`; entry 0 is always 0.
    pub row_counts: Vec<u64>,
}

impl TrueRowEstimate {
    pub fn undetected(&self) -> u64 {
        self.row_counts.iter().sum()
    }

    pub fn epsilon(&self) -> f64 {
        self.undetected() as f64 / self.frames as f64
    }

    pub fn alpha(&self) -> f64 {
        self.erasures as f64 / self.frames as f64
    }

    pub fn epsilon_ci(&self) -> (f64, f64) {
        wilson_interval(self.undetected(), self.frames, Z95)
    }

    pub fn alpha_ci(&self) -> (f64, f64) {
        wilson_interval(self.erasures, self.frames, Z95)
    }

    pub fn row(&self) -> Vec<f64> {
        self.row_counts
            .iter()
            .map(|&c| c as f64 / self.frames as f64)
            .collect()
    }

    /// Row probabilities sorted in decreasing order (the staircase).
    pub fn sorted_row(&self) -> Vec<f64> {
        let mut r = self.row()[1..].to_vec();
        r.sort_by(|a, b| b.total_cmp(a));
        r
    }

    pub fn model(&self) -> Result<CodedChannelModel> {
        let row = self.row();
        let eps = row[1..].iter().sum();
        CodedChannelModel::new(self.k, eps, self.alpha())?.with_row(row)
    }

    /// Model with `N` and `ε*` taken from the given nearest-neighbour set:
    /// `ε*` is their mean simulated probability, clamped into its open interval.
    pub fn model_with_neighbors(&self, neighbors: &[u64]) -> Result<CodedChannelModel> {
        let base = self.model()?.with_nearest_neighbors(neighbors.len() as u128, None);
        let row = base.row.as_ref().expect("row attached");
        let mean = neighbors.iter().map(|&i| row[i as usize]).sum::<f64>() / neighbors.len() as f64;
        let (lo, hi) = eps_star_interval(&base)?;
        let margin = (hi - lo) * 1e-9;
        let eps_star = mean.clamp(lo + margin, hi - margin);
        Ok(CodedChannelModel {
            eps_star: Some(eps_star),
            ..base
        })
    }

    /// Multinomial resample with the same number of frames.
    pub fn resample(&self, rng: &mut ChaCha8Rng) -> Result<Self> {
        let mut left = self.frames;
        let mut mass = 1.0f64;
        let mut draw = |count: u64, left: &mut u64, mass: &mut f64| -> Result<u64> {
            if *left == 0 || count == 0 {
                return Ok(0);
            }
            let p = (count as f64 / self.frames as f64 / *mass).min(1.0);
            let x = Binomial::new(*left, p)
                .map_err(|e| Error::InvalidArgument(e.to_string()))?
                .sample(rng);
            *left -= x;
            *mass -= count as f64 / self.frames as f64;
            Ok(x)
        };
        let erasures = draw(self.erasures, &mut left, &mut mass)?;
        let mut row_counts = vec![0u64; self.row_counts.len()];
        for (dst, &c) in row_counts.iter_mut().zip(&self.row_counts) {
            *dst = draw(c, &mut left, &mut mass)?;
        }
        Ok(Self {
            k: self.k,
            frames: self.frames,
            correct: left,
            erasures,
            row_counts,
        })
    }
}

/// Monte Carlo row of the coded channel at `snr_db`, with `sim`'s list size.
pub fn estimate_true_row(
    sim: &Simulator,
    snr_db: f64,
    frames: u64,
    seed: u64,
    mode: MessageMode,
) -> Result<TrueRowEstimate> {
    let k = sim.layout().k;
    if k > MAX_ROW_K {
        return Err(Error::InvalidArgument(format!(
            "explicit rows need k <= {MAX_ROW_K}, got {k}"
        )));
    }
    if frames == 0 {
        return Err(Error::EmptyStats);
    }
    let channel = ChannelConfig::from_db(snr_db)?;
    sim.worker()?;
    let outcomes: Vec<FrameOutcome> = (0..frames)
        .into_par_iter()
        .map_init(
            || sim.worker().expect("worker validated"),
            |w, f| w.run(&channel, seed, 0, f, mode).outcome,
        )
        .collect();
    let mut est = TrueRowEstimate {
        k,
        frames,
        correct: 0,
        erasures: 0,
        row_counts: vec![0; 1 << k],
    };
    for o in outcomes {
        match o {
            FrameOutcome::Correct => est.correct += 1,
            FrameOutcome::Erasure => est.erasures += 1,
            FrameOutcome::Undetected { error_index } => {
                est.row_counts[error_index.expect("k <= 12") as usize] += 1
            }
        }
    }
    Ok(est)
}

/// The four capacities of one estimated channel, `C_NNUB` shown with its
/// `ε log2 N` term added back.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CapacityBundle {
    pub llb: f64,
    pub nnlb: f64,
    pub true_capacity: f64,
    pub nnub_plus: f64,
}

pub fn capacity_bundle(est: &TrueRowEstimate, neighbors: &[u64]) -> Result<CapacityBundle> {
    let model = est.model_with_neighbors(neighbors)?;
    let nnub = capacity_nnub(&model)?;
    Ok(CapacityBundle {
        llb: capacity_llb(&model),
        nnlb: capacity_nnlb(&model)?,
        true_capacity: capacity_true_closed_form(&model)?,
        nnub_plus: nnub + model.epsilon * (neighbors.len() as f64).log2(),
    })
}

/// Bundles for `replicates` multinomial resamples of `est`.
pub fn bootstrap_bundles(
    est: &TrueRowEstimate,
    neighbors: &[u64],
    replicates: usize,
    seed: u64,
) -> Result<Vec<CapacityBundle>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..replicates)
        .map(|_| capacity_bundle(&est.resample(&mut rng)?, neighbors))
        .collect()
}

/// `C_LLB` at one list size, with a delta-method 95% half-width.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CapacityPoint {
    pub list_size: u64,
    pub epsilon: f64,
    pub alpha: f64,
    pub capacity: f64,
    pub ci_half_width: f64,
}

/// `C_LLB(L)` for each `L` in `grid` from one batch of frames at `sim`'s
/// list size, which must cover the grid.
pub fn capacity_vs_list_size(
    sim: &Simulator,
    snr_db: f64,
    grid: &[u64],
    frames: u64,
    seed: u64,
) -> Result<Vec<CapacityPoint>> {
    let stats = sim.run_frames(snr_db, seed, 0, 0, frames, MessageMode::Random)?;
    let k = sim.layout().k;
    let n = stats.frames as f64;
    grid.iter()
        .map(|&l| {
            let eps = stats.p_ue_at(l)?;
            let alpha = stats.p_nack_at(l)?;
            let f = |e: f64, a: f64| -> Result<f64> {
                Ok(capacity_llb(&CodedChannelModel::new(k, e.max(0.0), a.max(0.0))?))
            };
            let c = f(eps, alpha)?;
            let he = 1e-7_f64.max(eps * 1e-4);
            let ha = 1e-7_f64.max(alpha * 1e-4);
            let ge = (f(eps + he, alpha)? - f((eps - he).max(0.0), alpha)?) / (eps + he - (eps - he).max(0.0));
            let ga = (f(eps, alpha + ha)? - f(eps, (alpha - ha).max(0.0))?) / (alpha + ha - (alpha - ha).max(0.0));
            let var = (ge * ge * eps * (1.0 - eps) + ga * ga * alpha * (1.0 - alpha) - 2.0 * ge * ga * eps * alpha) / n;
            Ok(CapacityPoint {
                list_size: l,
                epsilon: eps,
                alpha,
                capacity: c,
                ci_half_width: Z95 * var.max(0.0).sqrt(),
            })
        })
        .collect()
}
