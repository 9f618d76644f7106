//! Convex rigid covers: conditional pure-state families with weight density.
//!
//! For a state and a bipartition r∥s, fixing the s-side values at a grid node
//! leaves a normalized conditional state over the r side, with weight density
//! λ equal to the marginal probability density of the conditioning values.
//! The family of conditional states, one per conditioning node, together with
//! λ is the cover; the pair of covers (conditioned on s, conditioned on r)
//! covers both orientations of the split.
//!
//! Distances between points of a cover are Hilbert-Schmidt distances between
//! the pure projectors |φ⟩⟨φ|. For normalized v, w with weighted overlap o,
//!
//!   d² = 2 − 2|o|² = 2S − S²/2,   S = Σ w |v − w·(o/|o|)|² = 2 − 2|o|.
//!
//! The right-hand form evaluates the same identity through the phase-aligned
//! difference S, a sum of nonnegative terms. Near coincident states the
//! overlap form loses everything to cancellation (floor ~1e-8) while the
//! aligned form resolves distances down to ~1e-15, which the shrink tests
//! rely on.

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{weighted_dot, weighted_norm_sq, ModeGrid};
use crate::partition::{matricize, Bipartition};
use crate::state::PureState;
use crate::tol;

/// Which side of the bipartition supplies the conditioning values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    R,
    S,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::R => Side::S,
            Side::S => Side::R,
        }
    }
}

/// Conditional pure-state family + weight density for one conditioning side.
#[derive(Debug, Clone)]
pub struct ConvexRigidCover {
    partition: Bipartition,
    conditioning_side: Side,
    cond_shape: Vec<usize>,
    cond_weights: Vec<f64>,
    lambda: Vec<f64>,
    active: Vec<bool>,
    rows: Array2<Complex64>,
    opp_weights: Vec<f64>,
    weight_floor: f64,
}

/// The two covers of one bipartition.
#[derive(Debug, Clone)]
pub struct CrcPair {
    /// Conditioned on s-side values; rows are states over the r side.
    pub s_conditioned: ConvexRigidCover,
    /// Conditioned on r-side values; rows are states over the s side.
    pub r_conditioned: ConvexRigidCover,
}

/// Pairwise distances between the active rows of a cover.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    /// Flat conditioning indices of the active rows, in grid order.
    pub active_nodes: Vec<usize>,
    /// Symmetric matrix over `active_nodes`, zero diagonal.
    pub values: Array2<f64>,
}

/// Product of per-mode quadrature weights over the given 0-based axes,
/// flattened row-major in axis order.
pub(crate) fn flat_weights(modes: &[ModeGrid], axes: &[usize]) -> Vec<f64> {
    let mut out = vec![1.0];
    for &ax in axes {
        let w = modes[ax].weights();
        let mut next = Vec::with_capacity(out.len() * w.len());
        for &a in &out {
            for &b in w {
                next.push(a * b);
            }
        }
        out = next;
    }
    out
}

/// Row-major linear index of a multi-index.
pub(crate) fn lin_index(idx: &[usize], shape: &[usize]) -> usize {
    idx.iter().zip(shape).fold(0, |acc, (&i, &n)| acc * n + i)
}

/// Inverse of [`lin_index`].
pub(crate) fn unlin_index(mut flat: usize, shape: &[usize]) -> Vec<usize> {
    let mut idx = vec![0; shape.len()];
    for k in (0..shape.len()).rev() {
        idx[k] = flat % shape[k];
        flat /= shape[k];
    }
    idx
}

/// Phase-aligned gap S = 2 − 2|⟨v,w⟩| = Σ w |v − w·(o/|o|)|².
pub(crate) fn aligned_gap(v: &[Complex64], w: &[Complex64], wts: &[f64]) -> f64 {
    let o = weighted_dot(v, w, wts);
    let m = o.norm();
    if m == 0.0 {
        return 2.0;
    }
    let phase = o / m;
    v.iter()
        .zip(w)
        .zip(wts)
        .map(|((a, b), wk)| wk * (a - b * phase).norm_sqr())
        .sum()
}

/// Distance between the projectors of two normalized vectors, d = √(2 − 2|o|²),
/// evaluated through the aligned gap.
pub(crate) fn hs_distance_flat(v: &[Complex64], w: &[Complex64], wts: &[f64]) -> f64 {
    let s = aligned_gap(v, w, wts);
    (2.0 * s - 0.5 * s * s).max(0.0).sqrt()
}

/// Hilbert-Schmidt distance between |v⟩⟨v| and |w⟩⟨w| over the given grids.
///
/// Errors if either vector deviates from unit weighted norm by more than
/// `tol::DISTANCE_NORM_TOL`.
pub fn hs_distance(v: &[Complex64], w: &[Complex64], grids: &[ModeGrid]) -> Result<f64> {
    let axes: Vec<usize> = (0..grids.len()).collect();
    let wts = flat_weights(grids, &axes);
    if v.len() != wts.len() || w.len() != wts.len() {
        return Err(Error::LengthMismatch {
            expected: wts.len(),
            got: if v.len() != wts.len() { v.len() } else { w.len() },
        });
    }
    for vec in [v, w] {
        let dev = (weighted_norm_sq(vec, &wts).sqrt() - 1.0).abs();
        if dev > tol::DISTANCE_NORM_TOL {
            return Err(Error::NotNormalized(dev));
        }
    }
    Ok(hs_distance_flat(v, w, &wts))
}

/// Weight density λ at every conditioning node of the chosen side:
/// λ(node) = Σ over opposite-side nodes of (Π opposite weights)·|c|².
pub fn marginal_weight(state: &PureState, part: &Bipartition, side: Side) -> Result<Vec<f64>> {
    let m = matricize(state, part)?;
    let (opp_w, n_cond) = match side {
        Side::S => (flat_weights(state.modes(), &part.r_axes()), m.ncols()),
        Side::R => (flat_weights(state.modes(), &part.s_axes()), m.nrows()),
    };
    let mut lambda = vec![0.0; n_cond];
    match side {
        Side::S => {
            for (a, row) in m.rows().into_iter().enumerate() {
                for (b, c) in row.iter().enumerate() {
                    lambda[b] += opp_w[a] * c.norm_sqr();
                }
            }
        }
        Side::R => {
            for (a, row) in m.rows().into_iter().enumerate() {
                lambda[a] = row
                    .iter()
                    .zip(&opp_w)
                    .map(|(c, w)| w * c.norm_sqr())
                    .sum();
            }
        }
    }
    Ok(lambda)
}

/// Normalized conditional state at one conditioning node of the chosen side.
pub fn conditional_state(
    state: &PureState,
    part: &Bipartition,
    side: Side,
    node: &[usize],
) -> Result<Vec<Complex64>> {
    let cover = ConvexRigidCover::build(state, part, side, tol::WEIGHT_FLOOR)?;
    let flat = lin_index(node, &cover.cond_shape);
    if !cover.active[flat] {
        return Err(Error::UndefinedConditional {
            node: node.to_vec(),
            lambda: cover.lambda[flat],
            floor: cover.weight_floor,
        });
    }
    Ok(cover.rows.row(flat).to_vec())
}

impl ConvexRigidCover {
    /// Build the cover of `state` conditioned on the chosen side of `part`.
    pub fn build(
        state: &PureState,
        part: &Bipartition,
        side: Side,
        weight_floor: f64,
    ) -> Result<Self> {
        let m = matricize(state, part)?;
        let w_r = flat_weights(state.modes(), &part.r_axes());
        let w_s = flat_weights(state.modes(), &part.s_axes());
        let shape_of = |axes: &[usize]| -> Vec<usize> {
            axes.iter().map(|&a| state.shape()[a]).collect()
        };

        let (cond_shape, cond_weights, opp_weights, n_cond, dim_opp) = match side {
            Side::S => (shape_of(&part.s_axes()), w_s, w_r, m.ncols(), m.nrows()),
            Side::R => (shape_of(&part.r_axes()), w_r, w_s, m.nrows(), m.ncols()),
        };

        let mut lambda = vec![0.0; n_cond];
        let mut rows = Array2::<Complex64>::zeros((n_cond, dim_opp));
        for k in 0..n_cond {
            let slice: Vec<Complex64> = match side {
                Side::S => m.column(k).to_vec(),
                Side::R => m.row(k).to_vec(),
            };
            lambda[k] = weighted_norm_sq(&slice, &opp_weights);
            let eta = lambda[k].sqrt();
            if lambda[k] >= weight_floor {
                for (a, c) in slice.iter().enumerate() {
                    rows[[k, a]] = c / eta;
                }
            }
        }
        let active: Vec<bool> = lambda.iter().map(|&l| l >= weight_floor).collect();
        if active.iter().all(|&a| !a) {
            return Err(Error::AllInactive(weight_floor));
        }

        Ok(Self {
            partition: part.clone(),
            conditioning_side: side,
            cond_shape,
            cond_weights,
            lambda,
            active,
            rows,
            opp_weights,
            weight_floor,
        })
    }

    pub fn partition(&self) -> &Bipartition {
        &self.partition
    }

    pub fn conditioning_side(&self) -> Side {
        self.conditioning_side
    }

    /// Shape of the conditioning grid (counts per conditioning mode).
    pub fn cond_shape(&self) -> &[usize] {
        &self.cond_shape
    }

    /// Π quadrature weights at each conditioning node (flat, row-major).
    pub fn cond_weights(&self) -> &[f64] {
        &self.cond_weights
    }

    /// Weight density λ at each conditioning node.
    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn active(&self) -> &[bool] {
        &self.active
    }

    pub fn weight_floor(&self) -> f64 {
        self.weight_floor
    }

    pub fn n_nodes(&self) -> usize {
        self.lambda.len()
    }

    pub fn n_active(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    /// Dimension of the opposite side (length of each conditional row).
    pub fn opp_dim(&self) -> usize {
        self.rows.ncols()
    }

    /// Π quadrature weights over the opposite-side flat index.
    pub fn opp_weights(&self) -> &[f64] {
        &self.opp_weights
    }

    /// Normalized conditional row at a flat conditioning index.
    pub fn row(&self, flat: usize) -> Result<&[Complex64]> {
        if !self.active[flat] {
            return Err(Error::UndefinedConditional {
                node: unlin_index(flat, &self.cond_shape),
                lambda: self.lambda[flat],
                floor: self.weight_floor,
            });
        }
        Ok(self.rows.row(flat).to_slice().expect("rows are contiguous"))
    }

    /// Σ (Π conditioning weights)·λ over all nodes; 1 for a normalized state.
    pub fn total_mass(&self) -> f64 {
        self.lambda
            .iter()
            .zip(&self.cond_weights)
            .map(|(l, w)| l * w)
            .sum()
    }

    /// Flat index of the active row with the largest weight density.
    pub fn heaviest_active(&self) -> Result<usize> {
        self.active
            .iter()
            .enumerate()
            .filter(|(_, &a)| a)
            .map(|(k, _)| k)
            .max_by(|&a, &b| self.lambda[a].total_cmp(&self.lambda[b]))
            .ok_or(Error::NoActiveRows)
    }

    /// Distance between the conditional projectors at two flat indices.
    pub fn row_distance(&self, i: usize, j: usize) -> Result<f64> {
        let a = self.row(i)?;
        let b = self.row(j)?;
        Ok(hs_distance_flat(a, b, &self.opp_weights))
    }

    /// Weighted sum Σ (Π cond weights)·λ·|φ⟩⟨φ| over active nodes: the
    /// centre of mass of the cover, a density operator over the opposite
    /// side. Hermitian by construction; its weighted trace is the active
    /// mass (1 up to the floor).
    pub fn centroid(&self) -> Array2<Complex64> {
        let dim = self.opp_dim();
        let mut rho = Array2::<Complex64>::zeros((dim, dim));
        for k in 0..self.n_nodes() {
            if !self.active[k] {
                continue;
            }
            let mass = self.cond_weights[k] * self.lambda[k];
            let row = self.rows.row(k);
            for a in 0..dim {
                let ra = row[a];
                for b in a..dim {
                    rho[[a, b]] += mass * ra * row[b].conj();
                }
            }
        }
        for a in 0..dim {
            for b in 0..a {
                rho[[a, b]] = rho[[b, a]].conj();
            }
        }
        rho
    }

    /// Eigenvalues (descending) of the centroid as an operator on the
    /// weighted space, i.e. of W^{1/2} ρ W^{1/2}. For the centroid of a pure
    /// state these are the squared Schmidt values.
    pub fn centroid_spectrum(&self) -> Vec<f64> {
        let rho = self.centroid();
        let dim = self.opp_dim();
        let m = nalgebra::DMatrix::from_fn(dim, dim, |a, b| {
            rho[[a, b]] * (self.opp_weights[a] * self.opp_weights[b]).sqrt()
        });
        let mut eigs: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        eigs.sort_by(|x, y| y.total_cmp(x));
        eigs
    }
}

/// Both covers of the bipartition; `weight_floor` defaults to
/// `tol::WEIGHT_FLOOR` via [`build_crc_pair_default`].
pub fn build_crc_pair(state: &PureState, part: &Bipartition, weight_floor: f64) -> Result<CrcPair> {
    Ok(CrcPair {
        s_conditioned: ConvexRigidCover::build(state, part, Side::S, weight_floor)?,
        r_conditioned: ConvexRigidCover::build(state, part, Side::R, weight_floor)?,
    })
}

pub fn build_crc_pair_default(state: &PureState, part: &Bipartition) -> Result<CrcPair> {
    build_crc_pair(state, part, tol::WEIGHT_FLOOR)
}

impl CrcPair {
    pub fn cover(&self, side: Side) -> &ConvexRigidCover {
        match side {
            Side::S => &self.s_conditioned,
            Side::R => &self.r_conditioned,
        }
    }
}

/// Full pairwise distance matrix over the active rows of a cover.
///
/// Materialized only up to `tol::DISTANCE_MATRIX_CAP` active rows; larger
/// covers must use per-pair evaluation via [`ConvexRigidCover::row_distance`].
pub fn distance_matrix(cover: &ConvexRigidCover) -> Result<DistanceMatrix> {
    let active_nodes: Vec<usize> = (0..cover.n_nodes()).filter(|&k| cover.active[k]).collect();
    let m = active_nodes.len();
    if m > tol::DISTANCE_MATRIX_CAP {
        return Err(Error::CoverTooLarge {
            nodes: m,
            cap: tol::DISTANCE_MATRIX_CAP,
        });
    }
    let pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| ((i + 1)..m).map(move |j| (i, j)))
        .collect();
    let dists: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| {
            cover
                .row_distance(active_nodes[i], active_nodes[j])
                .expect("active rows have conditionals")
        })
        .collect();
    let mut values = Array2::<f64>::zeros((m, m));
    for (&(i, j), &d) in pairs.iter().zip(&dists) {
        values[[i, j]] = d;
        values[[j, i]] = d;
    }
    Ok(DistanceMatrix {
        active_nodes,
        values,
    })
}
