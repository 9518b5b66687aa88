//! Soft Viterbi forward pass and the serial list Viterbi algorithm.
//!
//! The list is produced tree-trellis style. The forward pass keeps, for every
//! trellis node, the survivor predecessor and the metric gap `Δ` to the losing
//! branch. A path that has been emitted can spawn one child per node on the
//! part of it that follows survivors: the child takes the losing branch into
//! that node, follows survivors before it, and shares the parent's suffix
//! after it. Its metric is the parent's plus `Δ`. Every trellis path has
//! exactly one parent, so popping children from a sorted set in metric order
//! yields all paths in non-decreasing metric order.
//!
//! Candidates live in an ordered set that never holds more entries than the
//! remaining list budget, which is what the insertion count `I_LVA` measures.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use crate::channel::AMPLITUDE;
use crate::convcode::{FrameLayout, TrellisCode};
use crate::error::{Error, Result};
use crate::gf2::CrcCode;
use crate::spectrum::DistanceSpectrum;

/// Per-node results of the add-compare-select recursion.
///
/// Metrics are squared Euclidean distances between the received vector and
/// the modulated partial path. Unreachable nodes carry `+inf`.
#[derive(Clone, Debug, Default)]
pub struct ForwardPass {
    stages: usize,
    inputs: usize,
    num_states: usize,
    metrics: Vec<f64>,
    /// Index (0 or 1) of the surviving predecessor, per node at times `1..=T`.
    survivor: Vec<u8>,
    /// Losing minus winning metric, per node at times `1..=T`.
    delta: Vec<f64>,
}

impl ForwardPass {
    /// Trellis stages `T = n + v`.
    pub fn stages(&self) -> usize {
        self.stages
    }

    pub fn metric(&self, time: usize, state: u32) -> f64 {
        self.metrics[time * self.num_states + state as usize]
    }

    /// Metric of the best terminated path.
    pub fn best_metric(&self) -> f64 {
        self.metric(self.stages, 0)
    }

    /// Surviving predecessor of node `(time, state)`, `1 <= time <= T`.
    pub fn survivor(&self, trellis: &TrellisCode, time: usize, state: u32) -> u32 {
        let (preds, _) = trellis.predecessors(state);
        preds[self.survivor[(time - 1) * self.num_states + state as usize] as usize]
    }

    fn loser(&self, trellis: &TrellisCode, time: usize, state: u32) -> u32 {
        let (preds, _) = trellis.predecessors(state);
        preds[1 - self.survivor[(time - 1) * self.num_states + state as usize] as usize]
    }

    /// Metric gap `Δ >= 0` at node `(time, state)`; `+inf` if the losing
    /// branch is unreachable.
    pub fn delta(&self, time: usize, state: u32) -> f64 {
        self.delta[(time - 1) * self.num_states + state as usize]
    }

    /// Input bits (`n` of them) of the maximum-likelihood path.
    pub fn best_path_inputs(&self, trellis: &TrellisCode) -> Vec<u8> {
        let mut state = 0u32;
        let mut bits = vec![0u8; self.stages];
        for t in (1..=self.stages).rev() {
            bits[t - 1] = trellis.input_into(state);
            state = self.survivor(trellis, t, state);
        }
        bits.truncate(self.inputs);
        bits
    }

    fn compute(&mut self, received: &[f64], trellis: &TrellisCode, inputs: usize) {
        let n_out = trellis.rate_inverse();
        let s_count = trellis.num_states();
        let stages = received.len() / n_out;
        self.stages = stages;
        self.inputs = inputs;
        self.num_states = s_count;
        self.metrics.clear();
        self.metrics.resize((stages + 1) * s_count, f64::INFINITY);
        self.metrics[0] = 0.0;
        self.survivor.clear();
        self.survivor.resize(stages * s_count, 0);
        self.delta.clear();
        self.delta.resize(stages * s_count, f64::INFINITY);

        let patterns = 1usize << n_out;
        let mut pattern_metric = vec![0.0f64; patterns];
        for t in 1..=stages {
            let y = &received[(t - 1) * n_out..t * n_out];
            for (p, pm) in pattern_metric.iter_mut().enumerate() {
                *pm = y
                    .iter()
                    .enumerate()
                    .map(|(j, &yj)| {
                        let x = if (p >> j) & 1 == 0 { AMPLITUDE } else { -AMPLITUDE };
                        (yj - x) * (yj - x)
                    })
                    .sum();
            }
            let (prev, next) = self.metrics.split_at_mut(t * s_count);
            let prev = &prev[(t - 1) * s_count..];
            let next = &mut next[..s_count];
            let surv = &mut self.survivor[(t - 1) * s_count..t * s_count];
            let delta = &mut self.delta[(t - 1) * s_count..t * s_count];
            let terminating = t > inputs;
            for s in 0..s_count as u32 {
                let ([p0, p1], b) = trellis.predecessors(s);
                if terminating && b == 1 {
                    continue;
                }
                let m0 = prev[p0 as usize] + pattern_metric[trellis.output_pattern(p0, b) as usize];
                let m1 = prev[p1 as usize] + pattern_metric[trellis.output_pattern(p1, b) as usize];
                let i = s as usize;
                // ties go to the lower-numbered predecessor
                if m0 <= m1 {
                    next[i] = m0;
                    surv[i] = 0;
                    delta[i] = if m1.is_finite() { m1 - m0 } else { f64::INFINITY };
                } else {
                    next[i] = m1;
                    surv[i] = 1;
                    delta[i] = if m0.is_finite() { m0 - m1 } else { f64::INFINITY };
                }
            }
        }
    }
}

fn check_length(received: &[f64], layout: &FrameLayout) -> Result<()> {
    let expected = layout.channel_bits();
    if received.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            actual: received.len(),
        });
    }
    Ok(())
}

fn check_layout(trellis: &TrellisCode, layout: &FrameLayout) -> Result<()> {
    if layout.v != trellis.memory() || layout.rate_inverse != trellis.rate_inverse() {
        return Err(Error::InvalidArgument(format!(
            "layout (v={}, N={}) does not match trellis (v={}, N={})",
            layout.v,
            layout.rate_inverse,
            trellis.memory(),
            trellis.rate_inverse()
        )));
    }
    Ok(())
}

/// Runs the add-compare-select recursion over a terminated frame.
pub fn viterbi_forward(
    received: &[f64],
    trellis: &TrellisCode,
    layout: &FrameLayout,
) -> Result<ForwardPass> {
    check_layout(trellis, layout)?;
    check_length(received, layout)?;
    let mut fwd = ForwardPass::default();
    fwd.compute(received, trellis, layout.n());
    Ok(fwd)
}

/// Final verdict of one S-LVA run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// The `k` message bits of the first candidate that passed the CRC.
    Message(Vec<u8>),
    /// No candidate within the list passed the CRC (NACK).
    Erasure,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeOutcome {
    pub verdict: Verdict,
    /// Candidates checked against the CRC, `N_LVA`.
    pub n_lva: u64,
    /// Insertions into the sorted candidate set, `I_LVA`.
    pub insertions: u64,
}

impl DecodeOutcome {
    /// Rank of the accepted codeword; equals `n_lva` on success.
    pub fn list_rank(&self) -> Option<u64> {
        match self.verdict {
            Verdict::Message(_) => Some(self.n_lva),
            Verdict::Erasure => None,
        }
    }

    pub fn is_erasure(&self) -> bool {
        self.verdict == Verdict::Erasure
    }
}

/// A path emitted by the list enumeration.
#[derive(Clone, Debug, PartialEq)]
pub struct RankedPath {
    /// The `n = k + m` trellis input bits.
    pub inputs: Vec<u8>,
    pub metric: f64,
}

#[derive(Clone, Copy, Debug)]
struct Candidate {
    metric: f64,
    seq: u64,
    parent: u32,
    time: u32,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.metric
            .total_cmp(&other.metric)
            .then(self.seq.cmp(&other.seq))
    }
}

/// Reusable S-LVA decoder for one CC-CRC pair and frame layout.
#[derive(Clone, Debug)]
pub struct ListDecoder {
    trellis: TrellisCode,
    crc: CrcCode,
    layout: FrameLayout,
    fwd: ForwardPass,
    /// States of every emitted path, `T + 1` entries per path.
    states: Vec<u16>,
    path_metric: Vec<f64>,
    /// Time of the detour that created each path (`T + 1` for the ML path).
    path_detour: Vec<u32>,
    pending: BTreeSet<Candidate>,
    seq: u64,
    insertions: u64,
    input_buf: Vec<u8>,
}

impl ListDecoder {
    pub fn new(trellis: &TrellisCode, crc: &CrcCode, layout: FrameLayout) -> Result<Self> {
        check_layout(trellis, &layout)?;
        if layout.m != crc.degree() {
            return Err(Error::InvalidArgument(format!(
                "layout has m={} but CRC {} has degree {}",
                layout.m,
                crc,
                crc.degree()
            )));
        }
        Ok(Self {
            trellis: trellis.clone(),
            crc: crc.clone(),
            layout,
            fwd: ForwardPass::default(),
            states: Vec::new(),
            path_metric: Vec::new(),
            path_detour: Vec::new(),
            pending: BTreeSet::new(),
            seq: 0,
            insertions: 0,
            input_buf: Vec::new(),
        })
    }

    pub fn layout(&self) -> &FrameLayout {
        &self.layout
    }

    pub fn trellis(&self) -> &TrellisCode {
        &self.trellis
    }

    pub fn crc(&self) -> &CrcCode {
        &self.crc
    }

    /// Forward pass of the most recent run.
    pub fn forward_pass(&self) -> &ForwardPass {
        &self.fwd
    }

    /// Decodes with list size `list_size`, stopping at the first candidate
    /// that passes the CRC.
    pub fn decode(&mut self, received: &[f64], list_size: u64) -> Result<DecodeOutcome> {
        if list_size == 0 {
            return Err(Error::InvalidArgument("list size must be at least 1".into()));
        }
        let k = self.layout.k;
        let crc = self.crc.clone();
        let mut accepted = None;
        let n_lva = self.enumerate(received, list_size, |inputs, _| {
            if crc.remainder(inputs) == 0 {
                accepted = Some(inputs[..k].to_vec());
                true
            } else {
                false
            }
        })?;
        Ok(DecodeOutcome {
            verdict: accepted.map_or(Verdict::Erasure, Verdict::Message),
            n_lva,
            insertions: self.insertions,
        })
    }

    /// The `count` best paths in emission order, ignoring the CRC.
    pub fn ranked_paths(&mut self, received: &[f64], count: u64) -> Result<Vec<RankedPath>> {
        let mut out = Vec::new();
        self.enumerate(received, count, |inputs, metric| {
            out.push(RankedPath {
                inputs: inputs.to_vec(),
                metric,
            });
            false
        })?;
        Ok(out)
    }

    /// Emits paths in metric order to `visit` until it returns `true` or
    /// `limit` paths have been emitted. Returns the number emitted.
    fn enumerate<F>(&mut self, received: &[f64], limit: u64, mut visit: F) -> Result<u64>
    where
        F: FnMut(&[u8], f64) -> bool,
    {
        check_length(received, &self.layout)?;
        let n = self.layout.n();
        self.fwd.compute(received, &self.trellis, n);
        let stages = self.fwd.stages;
        let width = stages + 1;
        self.states.clear();
        self.path_metric.clear();
        self.path_detour.clear();
        self.pending.clear();
        self.seq = 0;
        self.insertions = 0;

        // maximum-likelihood path
        self.states.resize(width, 0);
        for t in (1..=stages).rev() {
            self.states[t - 1] = self.fwd.survivor(&self.trellis, t, u32::from(self.states[t])) as u16;
        }
        self.path_metric.push(self.fwd.best_metric());
        self.path_detour.push(stages as u32 + 1);

        let mut emitted = 0u64;
        loop {
            let id = emitted as usize;
            emitted += 1;
            self.collect_inputs(id, n);
            let metric = self.path_metric[id];
            if visit(&self.input_buf, metric) || emitted >= limit {
                return Ok(emitted);
            }
            self.spawn_children(id, limit - emitted);
            let Some(next) = self.pending.pop_first() else {
                return Ok(emitted);
            };
            self.materialize(next);
        }
    }

    fn collect_inputs(&mut self, id: usize, n: usize) {
        let width = self.fwd.stages + 1;
        let path = &self.states[id * width..(id + 1) * width];
        self.input_buf.clear();
        self.input_buf
            .extend(path[1..=n].iter().map(|&s| self.trellis.input_into(u32::from(s))));
    }

    fn spawn_children(&mut self, id: usize, remaining: u64) {
        let remaining = usize::try_from(remaining).unwrap_or(usize::MAX);
        while self.pending.len() > remaining {
            self.pending.pop_last();
        }
        if remaining == 0 {
            return;
        }
        let width = self.fwd.stages + 1;
        let base = self.path_metric[id];
        let detour = self.path_detour[id] as usize;
        for t in 1..detour {
            let state = u32::from(self.states[id * width + t]);
            let d = self.fwd.delta(t, state);
            if !d.is_finite() {
                continue;
            }
            let cand = Candidate {
                metric: base + d,
                seq: self.seq,
                parent: id as u32,
                time: t as u32,
            };
            if self.pending.len() >= remaining {
                match self.pending.last() {
                    Some(worst) if cand >= *worst => continue,
                    _ => {}
                }
                self.pending.pop_last();
            }
            self.seq += 1;
            self.pending.insert(cand);
            self.insertions += 1;
        }
    }

    fn materialize(&mut self, cand: Candidate) {
        let width = self.fwd.stages + 1;
        let parent = cand.parent as usize;
        let t = cand.time as usize;
        let start = self.states.len();
        self.states.resize(start + width, 0);
        self.states
            .copy_within(parent * width + t..parent * width + width, start + t);
        let mut state = self.fwd.loser(&self.trellis, t, u32::from(self.states[start + t]));
        self.states[start + t - 1] = state as u16;
        for u in (1..t).rev() {
            state = self.fwd.survivor(&self.trellis, u, state);
            self.states[start + u - 1] = state as u16;
        }
        self.path_metric.push(cand.metric);
        self.path_detour.push(cand.time);
    }
}

/// One-shot form of [`ListDecoder::decode`].
pub fn slva_decode(
    received: &[f64],
    trellis: &TrellisCode,
    crc: &CrcCode,
    layout: FrameLayout,
    list_size: u64,
) -> Result<DecodeOutcome> {
    ListDecoder::new(trellis, crc, layout)?.decode(received, list_size)
}

/// List size beyond which S-LVA cannot need more attempts:
/// `sum_{d=d_free}^{d_crc} B_d - A_{d_crc} + 1`.
pub fn max_list_size(spectrum: &DistanceSpectrum) -> Result<u128> {
    let d_free = spectrum.d_free().ok_or(Error::SpectrumTruncated {
        what: "d_free",
        d_max: spectrum.d_max(),
    })?;
    let d_crc = spectrum.d_crc().ok_or(Error::SpectrumTruncated {
        what: "d_crc",
        d_max: spectrum.d_max(),
    })?;
    let sum: u128 = (d_free..=d_crc).map(|d| spectrum.b(d)).sum();
    Ok(sum - spectrum.a(d_crc) + 1)
}
