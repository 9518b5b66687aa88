//! Analytic complexity model, list-size bounds, the finite-blocklength
//! benchmark and the CC-CRC design sweep.

mod complexity;
mod design;
mod list_bounds;
mod normal_approx;

pub use complexity::{
    complexity_report, n_viterbi, n_viterbi_expanded, traceback_ops, ComplexityParams, ComplexityReport,
};
pub use design::{
    design_point, design_sweep, design_to_csv, parse_pairs, snr_for_target_fer, DesignOptions, DesignPair,
    DesignPoint, DESIGN_CSV_HEADER,
};
pub use list_bounds::{chebyshev_list_bound, markov_list_bound, min_list_for_targets};
pub use normal_approx::{
    benchmark_snr_db, biawgn_capacity_dispersion, finite_blocklength_benchmark, gauss_hermite,
};
