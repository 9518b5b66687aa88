//! Distance-spectrum-optimal CRC search.
//!
//! Every degree-`m` generator with both end coefficients set is scored by its
//! profile `(A_1, A_2, ..., A_depth)` of CRC-passing error events, and the
//! profiles are compared lexicographically. Leading zeros come first in that
//! order, so the winner maximizes `d_crc` and then minimizes `A_{d_crc}`,
//! `A_{d_crc+1}` and so on.
//!
//! Candidates are deepened progressively: all of them are scored at a shallow
//! depth, and only those tied with the best prefix are rescored deeper.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::convcode::{FrameLayout, TrellisCode};
use crate::error::{Error, Result};
use crate::gf2::{CrcCode, MAX_CRC_DEGREE};
use crate::spectrum::weight_counts;

/// Largest degree the search accepts.
pub const MAX_SEARCH_DEGREE: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankedCandidate {
    pub crc: CrcCode,
    /// `A_d` for `d = 1..=resolved_depth`, index 0 holding `A_1`.
    pub profile: Vec<u64>,
    /// Depth this candidate was scored to. Eliminated candidates stop early.
    pub resolved_depth: usize,
}

impl RankedCandidate {
    pub fn d_crc(&self) -> Option<usize> {
        self.profile.iter().position(|&a| a > 0).map(|i| i + 1)
    }

    pub fn a(&self, d: usize) -> Option<u64> {
        if d == 0 || d > self.resolved_depth {
            None
        } else {
            Some(self.profile[d - 1])
        }
    }
}

#[derive(Clone, Debug)]
pub struct CrcCandidateReport {
    pub m: usize,
    pub k: usize,
    pub depth: usize,
    pub d_free: usize,
    /// All candidates, best first.
    pub ranked: Vec<RankedCandidate>,
    pub winner: CrcCode,
    /// Candidates sharing the winner's profile through `depth`, winner
    /// included. Empty when the winner is unique.
    pub tie_set: Vec<CrcCode>,
}

impl CrcCandidateReport {
    /// Whether `crc` is the winner or in the tie set.
    pub fn is_optimal(&self, crc: &CrcCode) -> bool {
        self.winner == *crc || self.tie_set.contains(crc)
    }

    /// CSV with one row per candidate in rank order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rank,crc,d_crc,resolved_depth,tied_with_winner,profile\n");
        for (i, c) in self.ranked.iter().enumerate() {
            let tied = c.crc == self.winner || self.tie_set.contains(&c.crc);
            let d_crc = c.d_crc().map_or(String::from("none"), |d| d.to_string());
            let profile = c
                .d_crc()
                .map(|d| {
                    c.profile[d - 1..]
                        .iter()
                        .map(u64::to_string)
                        .collect::<Vec<_>>()
                        .join(" ")
                })
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                i + 1,
                c.crc.hex_label(),
                d_crc,
                c.resolved_depth,
                tied,
                profile
            ));
        }
        out
    }
}

/// All degree-`m` generators with nonzero constant term, in increasing order.
pub fn candidate_generators(m: usize) -> Result<Vec<CrcCode>> {
    if m == 0 || m > MAX_CRC_DEGREE {
        return Err(Error::CrcDegree(m));
    }
    let top = 1u32 << m;
    (0..1u32 << (m - 1))
        .map(|mid| CrcCode::from_value(top | (mid << 1) | 1))
        .collect()
}

/// `A_d` profile for `d = 1..=depth`.
pub fn crc_profile(trellis: &TrellisCode, crc: &CrcCode, k: usize, depth: usize) -> Vec<u64> {
    let layout = layout_for(trellis, crc.degree(), k);
    weight_counts::<u64>(trellis, crc, &layout, depth)
        .into_iter()
        .skip(1)
        .map(|(_, a)| a as u64)
        .collect()
}

fn layout_for(trellis: &TrellisCode, m: usize, k: usize) -> FrameLayout {
    FrameLayout {
        k,
        m,
        v: trellis.memory(),
        rate_inverse: trellis.rate_inverse(),
    }
}

/// Free distance of the terminated code for `k` message bits and `m` CRC bits.
fn free_distance(trellis: &TrellisCode, m: usize, k: usize) -> Result<usize> {
    let layout = layout_for(trellis, m, k);
    let none = CrcCode::none();
    let mut depth = 8;
    loop {
        let counts = weight_counts::<u64>(trellis, &none, &layout, depth);
        if let Some(d) = counts.iter().position(|c| c.0 > 0) {
            return Ok(d);
        }
        if depth > 64 {
            return Err(Error::Convergence("free distance above 64"));
        }
        depth *= 2;
    }
}

/// Searches all `2^(m-1)` candidates of degree `m` for message length `k`,
/// comparing profiles through `depth`.
pub fn search_crc(trellis: &TrellisCode, k: usize, m: usize, depth: usize) -> Result<CrcCandidateReport> {
    if !(3..=MAX_SEARCH_DEGREE).contains(&m) {
        return Err(Error::InvalidArgument(format!(
            "CRC degree must be between 3 and {MAX_SEARCH_DEGREE}, got {m}"
        )));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let d_free = free_distance(trellis, m, k)?;
    if depth < d_free {
        return Err(Error::InvalidArgument(format!(
            "search depth {depth} is below d_free = {d_free}"
        )));
    }

    let mut scored: Vec<RankedCandidate> = Vec::new();
    let mut alive = candidate_generators(m)?;
    let mut level = (d_free + 4).min(depth);
    loop {
        let round: Vec<RankedCandidate> = alive
            .par_iter()
            .map(|crc| RankedCandidate {
                crc: crc.clone(),
                profile: crc_profile(trellis, crc, k, level),
                resolved_depth: level,
            })
            .collect();
        let best = round
            .iter()
            .map(|c| &c.profile)
            .min()
            .expect("candidate list is nonempty")
            .clone();
        let (keep, drop): (Vec<_>, Vec<_>) = round.into_iter().partition(|c| c.profile == best);
        scored.extend(drop);
        if keep.len() == 1 || level == depth {
            scored.extend(keep);
            break;
        }
        alive = keep.into_iter().map(|c| c.crc).collect();
        level = (level + 2).min(depth);
    }

    scored.sort_by(|a, b| compare(a, b));
    let winner = scored[0].crc.clone();
    let tied: Vec<CrcCode> = scored
        .iter()
        .take_while(|c| c.resolved_depth == depth && c.profile == scored[0].profile)
        .map(|c| c.crc.clone())
        .collect();
    let tie_set = if tied.len() > 1 { tied } else { Vec::new() };
    Ok(CrcCandidateReport {
        m,
        k,
        depth,
        d_free,
        ranked: scored,
        winner,
        tie_set,
    })
}

/// Deeper-resolved candidates outrank shallower ones (they survived more
/// rounds); within a depth, lexicographic profile order, then generator value.
fn compare(a: &RankedCandidate, b: &RankedCandidate) -> Ordering {
    b.resolved_depth
        .cmp(&a.resolved_depth)
        .then_with(|| a.profile.cmp(&b.profile))
        .then_with(|| a.crc.value().cmp(&b.crc.value()))
}
