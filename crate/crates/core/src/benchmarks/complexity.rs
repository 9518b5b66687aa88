//! Operation-count model of S-LVA relative to one Viterbi pass.

use crate::convcode::FrameLayout;
use crate::error::{Error, Result};

/// Hardware constants: `c1` weighs traceback steps, `c2` weighs insertions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexityParams {
    pub c1: f64,
    pub c2: f64,
}

impl ComplexityParams {
    pub fn new(c1: f64, c2: f64) -> Result<Self> {
        if !(c1 > 0.0 && c2 > 0.0 && c1.is_finite() && c2.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "C1 and C2 must be positive, got {c1} and {c2}"
            )));
        }
        Ok(Self { c1, c2 })
    }
}

impl Default for ComplexityParams {
    fn default() -> Self {
        Self { c1: 1.5, c2: 2.2 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexityReport {
    pub n_viterbi: f64,
    pub r_trace: f64,
    pub r_ins: f64,
    pub r_total: f64,
    pub e_nlva: f64,
    pub e_ilva: f64,
    /// `r_total * n_viterbi`.
    pub scaled_ops: f64,
}

/// `C1 [2(k+m+v) + 1.5(k+m)]`, the cost of one traceback.
pub fn traceback_ops(layout: &FrameLayout, params: &ComplexityParams) -> f64 {
    let (k, m, v) = (layout.k as f64, layout.m as f64, layout.v as f64);
    params.c1 * (2.0 * (k + m + v) + 1.5 * (k + m))
}

/// `5(2^v - 1) + 3(k+m-v) 2^v + C1 [2(k+m+v) + 1.5(k+m)]`.
pub fn n_viterbi(layout: &FrameLayout, params: &ComplexityParams) -> f64 {
    let states = (1u64 << layout.v) as f64;
    let (k, m, v) = (layout.k as f64, layout.m as f64, layout.v as f64);
    5.0 * (states - 1.0) + 3.0 * (k + m - v) * states + traceback_ops(layout, params)
}

/// The same count summed term by term:
/// `(2+1)(k+m-v) 2^v + 2 sum_{i=1}^v 2^i + sum_{i=0}^{v-1} 2^i + C1 [...]`.
pub fn n_viterbi_expanded(layout: &FrameLayout, params: &ComplexityParams) -> f64 {
    let v = layout.v;
    let states = (1u64 << v) as f64;
    let acs = (2.0 + 1.0) * (layout.k + layout.m) as f64 * states - (2.0 + 1.0) * v as f64 * states;
    let opening: u64 = 2 * (1..=v).map(|i| 1u64 << i).sum::<u64>();
    let closing: u64 = (0..v).map(|i| 1u64 << i).sum();
    acs + opening as f64 + closing as f64 + traceback_ops(layout, params)
}

/// Time ratios for measured `E[N_LVA]` and `E[I_LVA]`. The insertion term
/// uses `log2` and is 0 when `E[I_LVA] <= 1` (no sorting work to speak of).
pub fn complexity_report(
    layout: &FrameLayout,
    params: &ComplexityParams,
    e_nlva: f64,
    e_ilva: f64,
) -> Result<ComplexityReport> {
    if !(e_nlva >= 1.0) || !(e_ilva >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need E[N_LVA] >= 1 and E[I_LVA] >= 0, got {e_nlva} and {e_ilva}"
        )));
    }
    let nv = n_viterbi(layout, params);
    let r_trace = e_nlva * traceback_ops(layout, params) / nv;
    let r_ins = if e_ilva <= 1.0 {
        0.0
    } else {
        e_ilva * params.c2 * e_ilva.log2() / nv
    };
    let r_total = 1.0 + r_trace + r_ins;
    Ok(ComplexityReport {
        n_viterbi: nv,
        r_trace,
        r_ins,
        r_total,
        e_nlva,
        e_ilva,
        scaled_ops: r_total * nv,
    })
}
