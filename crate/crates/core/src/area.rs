//! Area-pair invariant: surface measure of the cover image over a region.
//!
//! The conditioning parameters sweep the conditional projector ρ(μ) through
//! Hilbert-Schmidt space; the cover image is a P-dimensional surface (P =
//! number of conditioning modes). Its measure over a truncated region Ω is
//!
//!   S_Ω = ∫_Ω √(det G) dμ,   G_ij = ⟨∂_i ρ, ∂_j ρ⟩,
//!
//! with tangents taken by second-order finite differences and the Gram
//! entries assembled from conditional-state overlaps only: for pure
//! projectors ⟨ρ_a, ρ_b⟩ = |⟨φ_a, φ_b⟩|², so with zero-sum stencil
//! coefficients only F = |⟨φ_a, φ_b⟩|² − 1 = S²/4 − S enters, where S is
//! the phase-aligned gap. No operator is ever materialized. For P = 1 the
//! integrand reduces to the arc length ‖dρ/dμ‖.
//!
//! Interior nodes use central differences; nodes on the grid boundary fall
//! back to one-sided differences of matching order (counted in the detail
//! report). A node whose stencil touches an inactive neighbor is skipped
//! and its measure reported as excluded. Region membership is half-open
//! (lo ≤ p < hi) so abutting regions tile exactly; stencils never depend on
//! the region, which makes the integral additive over disjoint regions.

use rayon::prelude::*;
use serde::Serialize;

use crate::cover::{aligned_gap, lin_index, unlin_index, ConvexRigidCover, Side};
use crate::error::{Error, Result};
use crate::partition::Bipartition;
use crate::state::PureState;
use crate::tol;

/// Per-mode integration intervals (Ω^N). `None` means the full mode interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    intervals: Vec<Option<(f64, f64)>>,
}

impl Region {
    /// The full product region of all mode intervals.
    pub fn full(n_modes: usize) -> Self {
        Self {
            intervals: vec![None; n_modes],
        }
    }

    pub fn new(intervals: Vec<Option<(f64, f64)>>) -> Self {
        Self { intervals }
    }

    pub fn n_modes(&self) -> usize {
        self.intervals.len()
    }

    /// Concrete interval for one mode, validated against its grid.
    fn resolve(&self, mode: usize, state: &PureState) -> Result<(f64, f64)> {
        let grid = &state.modes()[mode];
        match self.intervals[mode] {
            None => Ok((grid.lower(), grid.upper())),
            Some((lo, hi)) => {
                let eps = 1e-12 * (grid.upper() - grid.lower());
                let ordered = lo.is_finite() && hi.is_finite() && lo < hi;
                if !ordered || lo < grid.lower() - eps || hi > grid.upper() + eps {
                    return Err(Error::RegionOutOfBounds {
                        mode: mode + 1,
                        lo,
                        hi,
                        grid_lo: grid.lower(),
                        grid_hi: grid.upper(),
                    });
                }
                Ok((lo, hi))
            }
        }
    }

    /// Resolved intervals for every mode.
    pub fn resolve_all(&self, state: &PureState) -> Result<Vec<(f64, f64)>> {
        (0..self.n_modes()).map(|m| self.resolve(m, state)).collect()
    }
}

/// Everything measured while integrating one side's surface.
#[derive(Debug, Clone, Serialize)]
pub struct AreaDetail {
    pub value: f64,
    /// Conditioning measure of in-region nodes skipped because a stencil
    /// neighbor was inactive.
    pub excluded_measure: f64,
    /// In-region nodes that used one-sided differences at the grid boundary.
    pub boundary_nodes: usize,
    /// Smallest Gram eigenvalue encountered (PSD up to rounding).
    pub min_gram_eigenvalue: f64,
    /// A Gram determinant fell below the numerical-health alert threshold.
    pub negative_det_alert: bool,
}

/// The pair of surface measures of one bipartition over a region.
#[derive(Debug, Clone, Serialize)]
pub struct AreaPair {
    pub partition: String,
    /// Surface over the r-conditioned parameters (traced in s-side space).
    pub area_r_surface: f64,
    /// Surface over the s-conditioned parameters (traced in r-side space).
    pub area_s_surface: f64,
    /// Resolved Ω intervals, one per mode.
    pub region: Vec<(f64, f64)>,
    pub detail_r: AreaDetail,
    pub detail_s: AreaDetail,
}

/// Stencil of (offset, coefficient) pairs for d/dμ at one node.
fn stencil(index: usize, count: usize, h: f64) -> Vec<(isize, f64)> {
    let inv = 1.0 / (2.0 * h);
    if index == 0 {
        vec![(0, -3.0 * inv), (1, 4.0 * inv), (2, -inv)]
    } else if index == count - 1 {
        vec![(0, 3.0 * inv), (-1, -4.0 * inv), (-2, inv)]
    } else {
        vec![(-1, -inv), (1, inv)]
    }
}

/// Deterministic pairwise tree sum; bit-stable regardless of thread count.
fn tree_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n => {
            let mid = n / 2;
            tree_sum(&values[..mid]) + tree_sum(&values[mid..])
        }
    }
}

/// Surface measure of the cover conditioned on `side`, over `region`.
pub fn cover_area(
    state: &PureState,
    part: &Bipartition,
    side: Side,
    region: &Region,
) -> Result<AreaDetail> {
    if region.n_modes() != state.n_modes() {
        return Err(Error::ShapeMismatch {
            expected: vec![state.n_modes()],
            got: vec![region.n_modes()],
        });
    }
    let resolved = region.resolve_all(state)?;
    let cond_axes = match side {
        Side::R => part.r_axes(),
        Side::S => part.s_axes(),
    };
    for &ax in &cond_axes {
        if state.modes()[ax].count() < 3 {
            return Err(Error::DegenerateGrid {
                mode: ax + 1,
                count: state.modes()[ax].count(),
            });
        }
    }
    let cover = ConvexRigidCover::build(state, part, side, tol::WEIGHT_FLOOR)?;
    let p = cond_axes.len();
    let shape = cover.cond_shape().to_vec();
    let spacings: Vec<f64> = cond_axes.iter().map(|&ax| state.modes()[ax].spacing()).collect();

    struct NodeOutcome {
        term: f64,
        excluded: f64,
        boundary: bool,
        min_eig: f64,
        alert: bool,
    }

    let outcomes: Vec<Option<NodeOutcome>> = (0..cover.n_nodes())
        .into_par_iter()
        .map(|flat| {
            let idx = unlin_index(flat, &shape);
            // Region membership of the conditioning point. Half-open [lo, hi)
            // never drops a node of the full region: midpoint nodes stay
            // strictly below the grid upper bound.
            for (k, &ax) in cond_axes.iter().enumerate() {
                let point = state.modes()[ax].points()[idx[k]];
                let (lo, hi) = resolved[ax];
                if point < lo || point >= hi {
                    return None;
                }
            }
            let weight: f64 = cover.cond_weights()[flat];
            let stencils: Vec<Vec<(isize, f64)>> = (0..p)
                .map(|k| stencil(idx[k], shape[k], spacings[k]))
                .collect();
            let boundary = (0..p).any(|k| idx[k] == 0 || idx[k] == shape[k] - 1);

            // All stencil points must be active.
            let neighbor = |axis: usize, off: isize| -> usize {
                let mut jdx = idx.clone();
                jdx[axis] = (jdx[axis] as isize + off) as usize;
                lin_index(&jdx, &shape)
            };
            for (axis, sten) in stencils.iter().enumerate() {
                for &(off, _) in sten {
                    if !cover.active()[neighbor(axis, off)] {
                        return Some(NodeOutcome {
                            term: 0.0,
                            excluded: weight,
                            boundary,
                            min_eig: f64::INFINITY,
                            alert: false,
                        });
                    }
                }
            }

            // F(a, b) = |⟨φ_a, φ_b⟩|² − 1 from the phase-aligned gap.
            let f_pair = |a: usize, b: usize| -> f64 {
                if a == b {
                    return 0.0;
                }
                let s = aligned_gap(
                    cover.row(a).expect("active"),
                    cover.row(b).expect("active"),
                    cover.opp_weights(),
                );
                0.25 * s * s - s
            };
            let mut gram = nalgebra::DMatrix::<f64>::zeros(p, p);
            for i in 0..p {
                for j in i..p {
                    let mut acc = 0.0;
                    for &(off_i, ci) in &stencils[i] {
                        for &(off_j, cj) in &stencils[j] {
                            let a = neighbor(i, off_i);
                            let b = neighbor(j, off_j);
                            acc += ci * cj * f_pair(a, b);
                        }
                    }
                    gram[(i, j)] = acc;
                    gram[(j, i)] = acc;
                }
            }
            let det = gram.determinant();
            let min_eig = gram
                .symmetric_eigenvalues()
                .iter()
                .fold(f64::INFINITY, |m, &e| m.min(e));
            Some(NodeOutcome {
                term: weight * det.max(0.0).sqrt(),
                excluded: 0.0,
                boundary,
                min_eig,
                alert: det < tol::GRAM_NEGATIVE_ALERT,
            })
        })
        .collect();

    let mut terms = Vec::new();
    let mut excluded = Vec::new();
    let mut boundary_nodes = 0;
    let mut min_eig = f64::INFINITY;
    let mut alert = false;
    for outcome in outcomes.into_iter().flatten() {
        terms.push(outcome.term);
        excluded.push(outcome.excluded);
        if outcome.boundary && outcome.excluded == 0.0 {
            boundary_nodes += 1;
        }
        min_eig = min_eig.min(outcome.min_eig);
        alert |= outcome.alert;
    }
    Ok(AreaDetail {
        value: tree_sum(&terms),
        excluded_measure: tree_sum(&excluded),
        boundary_nodes,
        min_gram_eigenvalue: if min_eig.is_finite() { min_eig } else { 0.0 },
        negative_det_alert: alert,
    })
}

/// Both sides' surface measures. The pair is reported as-is, never
/// symmetrized: the two values generally differ unless both vanish.
pub fn area_pair(state: &PureState, part: &Bipartition, region: &Region) -> Result<AreaPair> {
    let detail_r = cover_area(state, part, Side::R, region)?;
    let detail_s = cover_area(state, part, Side::S, region)?;
    Ok(AreaPair {
        partition: part.to_string(),
        area_r_surface: detail_r.value,
        area_s_surface: detail_s.value,
        region: region.resolve_all(state)?,
        detail_r,
        detail_s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::ModeGrid;
    use crate::state::GaussianSpec;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    fn grid(lo: f64, hi: f64, n: usize) -> ModeGrid {
        ModeGrid::uniform(lo, hi, n).unwrap()
    }

    fn gaussian(a: &[Vec<f64>], grids: Vec<ModeGrid>) -> PureState {
        PureState::gaussian(&GaussianSpec::from_real(a), grids).unwrap().0
    }

    fn correlated(n: usize) -> PureState {
        gaussian(
            &[vec![1.0, -0.8], vec![-0.8, 1.0]],
            vec![grid(-5.0, 5.0, n), grid(-5.0, 5.0, n)],
        )
    }

    #[test]
    fn product_state_has_vanishing_pair() {
        let s = gaussian(
            &[vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![grid(-5.0, 5.0, 32), grid(-5.0, 5.0, 32)],
        );
        let part = Bipartition::new(&[1], 2).unwrap();
        let pair = area_pair(&s, &part, &Region::full(2)).unwrap();
        assert!(pair.area_r_surface < 1e-6, "r {}", pair.area_r_surface);
        assert!(pair.area_s_surface < 1e-6, "s {}", pair.area_s_surface);
    }

    #[test]
    fn correlated_gaussian_arc_length_regression() {
        // Frozen three-resolution self-convergence study; the successive
        // differences shrink at second order (ratio ~4).
        let part = Bipartition::new(&[1], 2).unwrap();
        let values: Vec<f64> = [32, 64, 128]
            .iter()
            .map(|&n| {
                cover_area(&correlated(n), &part, Side::S, &Region::full(2))
                    .unwrap()
                    .value
            })
            .collect();
        assert_abs_diff_eq!(values[0], 7.686829318, epsilon = 1e-6);
        assert_abs_diff_eq!(values[1], 7.827807115, epsilon = 1e-6);
        assert_abs_diff_eq!(values[2], 7.868485627, epsilon = 1e-6);
        let ratio = (values[1] - values[0]).abs() / (values[2] - values[1]).abs();
        assert!((3.0..=5.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn both_sides_positive_and_equal_for_symmetric_quadratic() {
        let s = correlated(32);
        let part = Bipartition::new(&[1], 2).unwrap();
        let pair = area_pair(&s, &part, &Region::full(2)).unwrap();
        assert!(pair.area_r_surface > 1e-3);
        assert!(pair.area_s_surface > 1e-3);
        assert_abs_diff_eq!(pair.area_r_surface, pair.area_s_surface, epsilon = 1e-9);
    }

    #[test]
    fn region_restriction_is_monotone() {
        let s = correlated(32);
        let part = Bipartition::new(&[1], 2).unwrap();
        let full = cover_area(&s, &part, Side::S, &Region::full(2)).unwrap().value;
        let half = cover_area(
            &s,
            &part,
            Side::S,
            &Region::new(vec![None, Some((-2.5, 2.5))]),
        )
        .unwrap()
        .value;
        let cell = cover_area(
            &s,
            &part,
            Side::S,
            &Region::new(vec![None, Some((-0.2, 0.2))]),
        )
        .unwrap()
        .value;
        assert!(full > half, "{full} vs {half}");
        assert!(half > cell, "{half} vs {cell}");
        assert!(cell > 0.0);
    }

    #[test]
    fn abutting_regions_tile_the_full_area() {
        let s = correlated(32);
        let part = Bipartition::new(&[1], 2).unwrap();
        let full = cover_area(&s, &part, Side::S, &Region::full(2)).unwrap().value;
        let left = cover_area(&s, &part, Side::S, &Region::new(vec![None, Some((-5.0, 0.3))]))
            .unwrap()
            .value;
        let right = cover_area(&s, &part, Side::S, &Region::new(vec![None, Some((0.3, 5.0))]))
            .unwrap()
            .value;
        assert_abs_diff_eq!(left + right, full, epsilon = 1e-8);
    }

    #[test]
    fn out_of_bounds_region_is_rejected() {
        let s = correlated(16);
        let part = Bipartition::new(&[1], 2).unwrap();
        let result = cover_area(
            &s,
            &part,
            Side::S,
            &Region::new(vec![None, Some((-6.0, 5.0))]),
        );
        assert!(matches!(result, Err(Error::RegionOutOfBounds { .. })));
        let empty = cover_area(
            &s,
            &part,
            Side::S,
            &Region::new(vec![None, Some((2.0, 1.0))]),
        );
        assert!(matches!(empty, Err(Error::RegionOutOfBounds { .. })));
    }

    #[test]
    fn degenerate_grid_is_rejected() {
        let modes = vec![grid(0.0, 1.0, 2), grid(0.0, 1.0, 4)];
        let raw = ndarray::ArrayD::from_elem(ndarray::IxDyn(&[2, 4]), Complex64::new(1.0, 0.0));
        let s = PureState::from_tensor(modes, raw).unwrap();
        let part = Bipartition::new(&[1], 2).unwrap();
        assert!(matches!(
            cover_area(&s, &part, Side::R, &Region::full(2)),
            Err(Error::DegenerateGrid { mode: 1, count: 2 })
        ));
    }

    #[test]
    fn gram_matrices_stay_psd() {
        let s = correlated(24);
        let part = Bipartition::new(&[1], 2).unwrap();
        let detail = cover_area(&s, &part, Side::S, &Region::full(2)).unwrap();
        assert!(detail.min_gram_eigenvalue >= -1e-10);
        assert!(!detail.negative_det_alert);
    }

    #[test]
    fn gaussian_with_one_sided_coupling_has_degenerate_surface() {
        // Mode 1 couples to mode 2 only: conditioned on (μ2, μ3) the
        // conditional over mode 1 depends on one combination, so the
        // 2-parameter surface has zero 2-dimensional measure while the
        // 1-parameter side has a genuine arc length. The pair is asymmetric.
        let s = gaussian(
            &[
                vec![1.0, -0.55, 0.0],
                vec![-0.55, 1.3, -0.35],
                vec![0.0, -0.35, 0.9],
            ],
            vec![grid(-6.0, 6.0, 20), grid(-6.0, 6.0, 20), grid(-6.0, 6.0, 20)],
        );
        let part = Bipartition::new(&[1], 3).unwrap();
        let pair = area_pair(&s, &part, &Region::full(3)).unwrap();
        assert_abs_diff_eq!(pair.area_r_surface, 5.920367, epsilon = 1e-4);
        assert!(pair.area_s_surface < 1e-6, "s {}", pair.area_s_surface);
        let rel = (pair.area_r_surface - pair.area_s_surface).abs()
            / pair.area_r_surface.max(pair.area_s_surface);
        assert!(rel > 0.1);
    }

    #[test]
    fn excluded_measure_is_reported_for_wide_grids() {
        let s = gaussian(
            &[
                vec![1.0, -0.55, 0.0],
                vec![-0.55, 1.3, -0.35],
                vec![0.0, -0.35, 0.9],
            ],
            vec![grid(-6.0, 6.0, 20), grid(-6.0, 6.0, 20), grid(-6.0, 6.0, 20)],
        );
        let part = Bipartition::new(&[1], 3).unwrap();
        let detail = cover_area(&s, &part, Side::S, &Region::full(3)).unwrap();
        assert!(detail.excluded_measure > 0.0);
        assert!(detail.excluded_measure < 144.0);
    }
}
