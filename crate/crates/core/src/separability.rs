//! Separability decisions via the shrink-to-point criterion.
//!
//! A state is separable across a bipartition exactly when its cover shrinks
//! to a single point: all conditional states coincide. Both covers of the
//! pair must agree (they shrink together or not at all); a numerical
//! disagreement is surfaced as a diagnostic rather than silently resolved.
//! An independent Schmidt oracle (SVD of the weight-absorbed matricization)
//! cross-checks every verdict.

use num_complex::Complex64;
use serde::Serialize;

use crate::cover::{build_crc_pair, ConvexRigidCover};
use crate::error::{Error, Result};
use crate::partition::{dematricize, enumerate_bipartitions, matricize, Bipartition};
use crate::state::PureState;
use crate::tol;

/// Outcome of the criterion for one bipartition, with the oracle cross-check.
#[derive(Debug, Clone, Serialize)]
pub struct SeparabilityVerdict {
    /// The bipartition, rendered as "r|s".
    pub partition: String,
    pub separable: bool,
    /// Largest conditional-state distance found across both covers.
    pub max_pair_distance: f64,
    /// σ₂/σ₁ from the Schmidt oracle.
    pub oracle_sigma_ratio: f64,
    /// Criterion verdict equals the oracle verdict.
    pub agreement: bool,
}

/// The two covers returned different shrink verdicts. Signals tolerance
/// miscalibration on borderline states; never a silent pass.
#[derive(Debug, Clone, Serialize)]
pub struct PairDisagreement {
    pub r_shrinks: bool,
    pub s_shrinks: bool,
    pub max_r: f64,
    pub max_s: f64,
}

/// Verdict plus any diagnostics raised while producing it.
#[derive(Debug, Clone)]
pub struct SeparabilityAnalysis {
    pub verdict: SeparabilityVerdict,
    pub pair_disagreement: Option<PairDisagreement>,
}

/// Does the cover shrink to one point at tolerance `shrink_tol`?
///
/// The active row of largest weight serves as reference. If every other
/// active row sits within `shrink_tol/2` of it, the triangle inequality
/// bounds all pairwise distances by `shrink_tol` and the cover shrinks;
/// the reference radius is returned. Otherwise the distance is upgraded to
/// the true pairwise maximum over the active rows (over the offending rows
/// plus the reference when the cover is too large to materialize).
pub fn shrink_to_point(cover: &ConvexRigidCover, shrink_tol: f64) -> Result<(bool, f64)> {
    let reference = cover.heaviest_active()?;
    let active: Vec<usize> = (0..cover.n_nodes())
        .filter(|&k| cover.active()[k])
        .collect();
    let mut max_ref = 0.0_f64;
    for &k in &active {
        if k != reference {
            max_ref = max_ref.max(cover.row_distance(reference, k)?);
        }
    }
    if max_ref <= 0.5 * shrink_tol {
        return Ok((true, max_ref));
    }
    let subset: Vec<usize> = if active.len() <= tol::DISTANCE_MATRIX_CAP {
        active
    } else {
        let mut offending: Vec<usize> = Vec::new();
        offending.push(reference);
        for &k in &active {
            if k != reference && cover.row_distance(reference, k)? > 0.5 * shrink_tol {
                offending.push(k);
            }
        }
        offending
    };
    let mut max_pair = max_ref;
    for (i, &a) in subset.iter().enumerate() {
        for &b in &subset[i + 1..] {
            max_pair = max_pair.max(cover.row_distance(a, b)?);
        }
    }
    Ok((false, max_pair))
}

/// Singular values (descending) of the weight-absorbed matricization.
///
/// Row a is scaled by √(Π r-side weights at a) and column b by
/// √(Π s-side weights at b), so the SVD respects the weighted inner
/// product; Σσ² equals the discrete state norm (1).
pub fn schmidt_oracle(state: &PureState, part: &Bipartition) -> Result<Vec<f64>> {
    let m = matricize(state, part)?;
    let w_r = crate::cover::flat_weights(state.modes(), &part.r_axes());
    let w_s = crate::cover::flat_weights(state.modes(), &part.s_axes());
    let scaled = nalgebra::DMatrix::from_fn(m.nrows(), m.ncols(), |a, b| {
        m[[a, b]] * (w_r[a] * w_s[b]).sqrt()
    });
    let mut sv: Vec<f64> = scaled.singular_values().iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    Ok(sv)
}

fn oracle_ratio(singular_values: &[f64]) -> f64 {
    if singular_values.len() < 2 || singular_values[0] == 0.0 {
        return 0.0;
    }
    (singular_values[1] / singular_values[0]).clamp(0.0, 1.0)
}

/// Run the shrink criterion on both covers of the pair and cross-check the
/// Schmidt oracle. Uses `tol::WEIGHT_FLOOR` for cover construction.
pub fn is_partially_separable(
    state: &PureState,
    part: &Bipartition,
    shrink_tol: f64,
) -> Result<SeparabilityAnalysis> {
    let pair = build_crc_pair(state, part, tol::WEIGHT_FLOOR)?;
    let (_, max_s) = shrink_to_point(&pair.s_conditioned, shrink_tol)?;
    let (_, max_r) = shrink_to_point(&pair.r_conditioned, shrink_tol)?;
    let s_shrinks = max_s <= shrink_tol;
    let r_shrinks = max_r <= shrink_tol;

    let pair_disagreement = if s_shrinks != r_shrinks {
        Some(PairDisagreement {
            r_shrinks,
            s_shrinks,
            max_r,
            max_s,
        })
    } else {
        None
    };

    let max_pair_distance = max_r.max(max_s);
    let separable = max_pair_distance <= shrink_tol;
    let sv = schmidt_oracle(state, part)?;
    let ratio = oracle_ratio(&sv);
    let oracle_separable = ratio <= tol::ORACLE_SEP_RATIO;

    Ok(SeparabilityAnalysis {
        verdict: SeparabilityVerdict {
            partition: part.to_string(),
            separable,
            max_pair_distance,
            oracle_sigma_ratio: ratio,
            agreement: separable == oracle_separable,
        },
        pair_disagreement,
    })
}

/// Separability across every bipartition; true only if all verdicts are.
pub fn is_fully_separable(
    state: &PureState,
    shrink_tol: f64,
) -> Result<(bool, Vec<SeparabilityAnalysis>)> {
    let mut analyses = Vec::new();
    for part in enumerate_bipartitions(state.n_modes())? {
        analyses.push(is_partially_separable(state, &part, shrink_tol)?);
    }
    let all = analyses.iter().all(|a| a.verdict.separable);
    Ok((all, analyses))
}

/// Extract the two factors of a separable state.
///
/// The r-factor is the reference conditional row of the s-conditioned cover;
/// the s-factor comes from the r-conditioned cover. Each factor's phase is
/// fixed by making its largest-magnitude coefficient real positive. The
/// tensor product must reproduce the original coefficients (up to a global
/// phase) within `tol::FACTOR_RESIDUAL_FACTOR · shrink_tol` in max norm.
pub fn factor_state(
    state: &PureState,
    part: &Bipartition,
    shrink_tol: f64,
) -> Result<(PureState, PureState)> {
    let analysis = is_partially_separable(state, part, shrink_tol)?;
    if !analysis.verdict.separable {
        return Err(Error::NotSeparable(analysis.verdict.max_pair_distance));
    }
    let pair = build_crc_pair(state, part, tol::WEIGHT_FLOOR)?;
    let r_vec = fix_phase(
        pair.s_conditioned
            .row(pair.s_conditioned.heaviest_active()?)?,
    );
    let s_vec = fix_phase(
        pair.r_conditioned
            .row(pair.r_conditioned.heaviest_active()?)?,
    );

    // Reconstruction residual in the matricized layout, global phase aligned.
    let m = matricize(state, part)?;
    let mut inner = Complex64::new(0.0, 0.0);
    for a in 0..m.nrows() {
        for b in 0..m.ncols() {
            inner += m[[a, b]] * (r_vec[a] * s_vec[b]).conj();
        }
    }
    let phase = if inner.norm() > 0.0 {
        inner / inner.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    // Both factors are weight-normalized, so phase·(r ⊗ s) is the candidate
    // product; the gap to the original coefficients is the residual.
    let mut residual = 0.0_f64;
    for a in 0..m.nrows() {
        for b in 0..m.ncols() {
            let rec = phase * r_vec[a] * s_vec[b];
            residual = residual.max((m[[a, b]] - rec).norm());
        }
    }
    let allowed = tol::FACTOR_RESIDUAL_FACTOR * shrink_tol;
    if residual > allowed {
        return Err(Error::ReconstructionFailed { residual, allowed });
    }

    let to_state = |vec: Vec<Complex64>, axes: &[usize]| -> Result<PureState> {
        let modes: Vec<_> = axes.iter().map(|&a| state.modes()[a].clone()).collect();
        let shape: Vec<usize> = modes.iter().map(|g| g.count()).collect();
        let tensor = ndarray::ArrayD::from_shape_vec(ndarray::IxDyn(&shape), vec)
            .expect("row length matches side shape");
        PureState::from_tensor(modes, tensor)
    };
    let r_state = to_state(r_vec, &part.r_axes())?;
    let s_state = to_state(s_vec, &part.s_axes())?;
    Ok((r_state, s_state))
}

fn fix_phase(row: &[Complex64]) -> Vec<Complex64> {
    let mut best = 0usize;
    for (k, c) in row.iter().enumerate() {
        if c.norm() > row[best].norm() {
            best = k;
        }
    }
    let phase = if row[best].norm() > 0.0 {
        row[best] / row[best].norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    row.iter().map(|c| c * phase.conj()).collect()
}

/// Rebuild a full state from two factors (test and CLI support).
pub fn tensor_product(
    r_state: &PureState,
    s_state: &PureState,
    part: &Bipartition,
) -> Result<PureState> {
    let mut modes = vec![None; part.n_total()];
    for (k, &ax) in part.r_axes().iter().enumerate() {
        modes[ax] = Some(r_state.modes()[k].clone());
    }
    for (k, &ax) in part.s_axes().iter().enumerate() {
        modes[ax] = Some(s_state.modes()[k].clone());
    }
    let modes: Vec<_> = modes.into_iter().map(Option::unwrap).collect();
    let rows = r_state.coeffs().len();
    let cols = s_state.coeffs().len();
    let r_flat: Vec<Complex64> = r_state.coeffs().iter().copied().collect();
    let s_flat: Vec<Complex64> = s_state.coeffs().iter().copied().collect();
    let mut m = ndarray::Array2::<Complex64>::zeros((rows, cols));
    for a in 0..rows {
        for b in 0..cols {
            m[[a, b]] = r_flat[a] * s_flat[b];
        }
    }
    let shape: Vec<usize> = modes.iter().map(|g| g.count()).collect();
    let tensor = dematricize(&m, part, &shape)?;
    PureState::from_tensor(modes, tensor)
}
