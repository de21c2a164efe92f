//! Exact and floating-point machinery for sparse-polynomial character sums
//! over prime fields, collinear-triple counts of subgroups, multiplicative
//! energy, and sumset coverage.

pub mod bounds;
pub mod calibration;
pub mod charsum;
pub mod energy;
pub mod error;
pub mod field;
pub mod incidence;
mod kahan;
mod ntt;
pub mod sumsets;
pub mod sweep;

pub use bounds::{bound_report, gcd_params, BoundReport, CoverageRegime, GcdParams, Regime};
pub use charsum::{
    additive_char, eval_sparse_sum, eval_sum_subgroup_decomposed, eval_trilinear, mult_char, CharacterId, SparsePoly,
    WeightTable,
};
pub use energy::{d_times, dx_vs_t_check, energy_deviation_report, mult_energy, t_energy_relation, EnergyReport};
pub use error::{Error, Result};
pub use field::{make_field, FieldContext, Subgroup};
pub use incidence::{
    collinear_triples, collinear_triples_bruteforce, iota_moments, line_histogram, triple_deviation_report,
    IotaMoments, LineHistogram, TripleCountReport,
};
pub use kahan::CompensatedSum;
pub use sumsets::{ratio_shift_set, romanoff_coverage, three_fold_sumset, SumsetReport};
