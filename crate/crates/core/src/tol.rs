//! Tolerances and numerical floors used across the library.
//!
//! Every threshold that appears in a contract or a report is named here;
//! nothing else in the crate hard-codes a tolerance.

/// Default shrink tolerance for the separability criterion.
///
/// A cover whose conditional states all lie within this Hilbert-Schmidt
/// distance of each other is treated as a single point. The distance noise
/// floor of the phase-aligned evaluation is ~1e-14, so 1e-6 leaves a wide
/// margin on both sides of the decision band.
pub const SHRINK_TOL: f64 = 1e-6;

/// Default tolerance for cover identity and motion equivalence.
pub const MOTION_TOL: f64 = 1e-8;

/// Conditioning nodes with weight density below this floor are inactive.
///
/// The conditional state divides by the weight density; nodes carrying no
/// mass have no defined conditional and are excluded from shrink tests and
/// distance matrices. Their mass still counts toward totals.
pub const WEIGHT_FLOOR: f64 = 1e-12;

/// Discrete norm of a constructed state must be 1 within this bound.
pub const NORM_TOL: f64 = 1e-10;

/// Norm deviation allowed for vectors entering a distance computation.
pub const DISTANCE_NORM_TOL: f64 = 1e-6;

/// Oracle singular-value ratio at or below which the Schmidt oracle calls a
/// state separable. Ratios in (1e-6, 1e-3) are a borderline band that test
/// generation excludes; verdicts there are diagnostic, not trusted.
pub const ORACLE_SEP_RATIO: f64 = 1e-6;

/// Lower edge of the oracle's "clearly entangled" regime.
pub const ORACLE_ENTANGLED_RATIO: f64 = 1e-3;

/// Asymmetry allowed in a quadratic-form matrix before it is rejected.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Generator samples at interval edges above this fraction of the peak
/// magnitude trigger a truncation warning.
pub const TRUNCATION_RATIO: f64 = 1e-8;

/// Residual allowed in the weighted-unitarity check of a kernel.
pub const UNITARITY_TOL: f64 = 1e-10;

/// Norm below which a raw coefficient tensor is rejected as zero.
pub const ZERO_NORM_FLOOR: f64 = 1e-14;

/// Gram determinants below -1e-8 raise a numerical-health diagnostic;
/// anything negative above that is clamped to zero silently.
pub const GRAM_NEGATIVE_ALERT: f64 = -1e-8;

/// Distance matrices are materialized only up to this many conditioning
/// nodes; larger covers fall back to per-pair evaluation.
pub const DISTANCE_MATRIX_CAP: usize = 4096;

/// Factor reconstruction must reproduce coefficients within
/// `FACTOR_RESIDUAL_FACTOR * shrink_tol` in max norm.
pub const FACTOR_RESIDUAL_FACTOR: f64 = 10.0;
