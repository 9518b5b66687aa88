//! Per-point counters and the estimates derived from them.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Two-sided normal quantile for 95% intervals.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// How a frame ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrameOutcome {
    Correct,
    /// A wrong message passed the CRC. `error_index` is decoded XOR sent,
    /// read as a `k`-bit integer (first message bit most significant), when
    /// `k <= 64`.
    Undetected { error_index: Option<u64> },
    Erasure,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FrameRecord {
    pub outcome: FrameOutcome,
    pub n_lva: u64,
    pub insertions: u64,
}

/// Counts for one SNR point. Merging is exact, so totals do not depend on
/// how frames were split between threads.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PointStats {
    pub snr_db: f64,
    pub seed: u64,
    pub list_size: u64,
    pub frames: u64,
    pub correct: u64,
    pub undetected: u64,
    pub erasures: u64,
    pub sum_n_lva: u64,
    pub sum_n_lva_sq: u128,
    pub max_n_lva: u64,
    pub sum_insertions: u64,
    /// Frames whose first CRC pass came at a given rank and was correct.
    pub rank_correct: BTreeMap<u64, u64>,
    /// Frames whose first CRC pass came at a given rank and was wrong.
    pub rank_wrong: BTreeMap<u64, u64>,
}

impl PointStats {
    pub fn new(snr_db: f64, seed: u64, list_size: u64) -> Self {
        Self {
            snr_db,
            seed,
            list_size,
            ..Self::default()
        }
    }

    pub fn record(&mut self, r: &FrameRecord) {
        self.frames += 1;
        self.sum_n_lva += r.n_lva;
        self.sum_n_lva_sq += u128::from(r.n_lva) * u128::from(r.n_lva);
        self.max_n_lva = self.max_n_lva.max(r.n_lva);
        self.sum_insertions += r.insertions;
        match r.outcome {
            FrameOutcome::Correct => {
                self.correct += 1;
                *self.rank_correct.entry(r.n_lva).or_default() += 1;
            }
            FrameOutcome::Undetected { .. } => {
                self.undetected += 1;
                *self.rank_wrong.entry(r.n_lva).or_default() += 1;
            }
            FrameOutcome::Erasure => self.erasures += 1,
        }
    }

    pub fn merge(mut self, other: Self) -> Self {
        self.frames += other.frames;
        self.correct += other.correct;
        self.undetected += other.undetected;
        self.erasures += other.erasures;
        self.sum_n_lva += other.sum_n_lva;
        self.sum_n_lva_sq += other.sum_n_lva_sq;
        self.max_n_lva = self.max_n_lva.max(other.max_n_lva);
        self.sum_insertions += other.sum_insertions;
        for (r, c) in other.rank_correct {
            *self.rank_correct.entry(r).or_default() += c;
        }
        for (r, c) in other.rank_wrong {
            *self.rank_wrong.entry(r).or_default() += c;
        }
        self
    }

    fn require_frames(&self) -> Result<f64> {
        if self.frames == 0 {
            Err(Error::EmptyStats)
        } else {
            Ok(self.frames as f64)
        }
    }

    pub fn failures(&self) -> u64 {
        self.undetected + self.erasures
    }

    /// `P_Fail = P_UE + P_NACK`.
    pub fn fer(&self) -> Result<f64> {
        Ok(self.failures() as f64 / self.require_frames()?)
    }

    pub fn p_ue(&self) -> Result<f64> {
        Ok(self.undetected as f64 / self.require_frames()?)
    }

    pub fn p_nack(&self) -> Result<f64> {
        Ok(self.erasures as f64 / self.require_frames()?)
    }

    pub fn fer_ci(&self) -> (f64, f64) {
        wilson_interval(self.failures(), self.frames, Z95)
    }

    pub fn p_ue_ci(&self) -> (f64, f64) {
        wilson_interval(self.undetected, self.frames, Z95)
    }

    pub fn p_nack_ci(&self) -> (f64, f64) {
        wilson_interval(self.erasures, self.frames, Z95)
    }

    /// `E[N_LVA]`.
    pub fn e_nlva(&self) -> Result<f64> {
        Ok(self.sum_n_lva as f64 / self.require_frames()?)
    }

    /// Unbiased sample variance of `N_LVA` (0 for a single frame).
    pub fn var_nlva(&self) -> Result<f64> {
        let n = self.require_frames()?;
        if self.frames == 1 {
            return Ok(0.0);
        }
        let mean = self.sum_n_lva as f64 / n;
        let ss = self.sum_n_lva_sq as f64 - n * mean * mean;
        Ok((ss / (n - 1.0)).max(0.0))
    }

    /// `E[I_LVA]`.
    pub fn e_ilva(&self) -> Result<f64> {
        Ok(self.sum_insertions as f64 / self.require_frames()?)
    }

    fn check_list(&self, list_size: u64) -> Result<()> {
        if list_size == 0 || list_size > self.list_size {
            return Err(Error::InvalidArgument(format!(
                "list size {list_size} outside 1..={} covered by the run",
                self.list_size
            )));
        }
        Ok(())
    }

    /// Frames that would end in a NACK with list size `list_size`.
    pub fn erasures_at(&self, list_size: u64) -> Result<u64> {
        self.check_list(list_size)?;
        let beyond = |h: &BTreeMap<u64, u64>| h.range(list_size + 1..).map(|(_, c)| c).sum::<u64>();
        Ok(self.erasures + beyond(&self.rank_correct) + beyond(&self.rank_wrong))
    }

    /// Frames that would end in an undetected error with list size `list_size`.
    pub fn undetected_at(&self, list_size: u64) -> Result<u64> {
        self.check_list(list_size)?;
        Ok(self.rank_wrong.range(..=list_size).map(|(_, c)| c).sum())
    }

    /// `P_NACK^L` from the rank histogram, for any `L` up to the run's list size.
    pub fn p_nack_at(&self, list_size: u64) -> Result<f64> {
        Ok(self.erasures_at(list_size)? as f64 / self.require_frames()?)
    }

    /// `P_UE^L` from the rank histogram.
    pub fn p_ue_at(&self, list_size: u64) -> Result<f64> {
        Ok(self.undetected_at(list_size)? as f64 / self.require_frames()?)
    }

    /// `E[N_LVA]` had the list size been `list_size`.
    pub fn e_nlva_at(&self, list_size: u64) -> Result<f64> {
        let n = self.require_frames()?;
        let capped = |h: &BTreeMap<u64, u64>| -> u128 {
            h.iter()
                .map(|(&r, &c)| u128::from(r.min(list_size)) * u128::from(c))
                .sum()
        };
        let total = capped(&self.rank_correct)
            + capped(&self.rank_wrong)
            + u128::from(self.erasures) * u128::from(list_size);
        self.check_list(list_size)?;
        Ok(total as f64 / n)
    }
}

/// `(P_NACK^L, P_UE^L)` for one list size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TradeoffPoint {
    pub list_size: u64,
    pub p_nack: f64,
    pub p_ue: f64,
}

/// Trade-off between erasures and undetected errors for every `L` in
/// `1..=stats.list_size` (capped at `max_points`), from one run.
pub fn tradeoff_curves(stats: &PointStats, max_points: u64) -> Result<Vec<TradeoffPoint>> {
    let top = stats.list_size.min(max_points);
    (1..=top)
        .map(|l| {
            Ok(TradeoffPoint {
                list_size: l,
                p_nack: stats.p_nack_at(l)?,
                p_ue: stats.p_ue_at(l)?,
            })
        })
        .collect()
}
