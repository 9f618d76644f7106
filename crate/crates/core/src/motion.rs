//! Local unitaries and the motion picture of cover geometry.
//!
//! A local unitary is one kernel per mode, each unitary with respect to that
//! mode's weighted inner product: K† W K = W, where W is the diagonal of
//! quadrature weights. Kernels act by plain contraction along their tensor
//! axis, so the identity kernel leaves the state untouched and the weighted
//! adjoint W⁻¹K†W inverts the action exactly.
//!
//! Two covers are identical when their weight densities and pairwise
//! distance matrices agree pointwise in the shared grid parameterization;
//! two states are motion equivalent when all covers of all bipartitions are
//! identical. Diagonal (phase) kernels preserve every cover pointwise.
//! Dense kernels preserve a cover when they act on its non-conditioning
//! side only; on the conditioning side they mix nodes, which moves λ and
//! the distance matrix (permutation kernels permute both).

use ndarray::{Array2, ArrayD, IxDyn};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::cover::{build_crc_pair, distance_matrix, ConvexRigidCover};
use crate::error::{Error, Result};
use crate::grid::ModeGrid;
use crate::partition::enumerate_bipartitions;
use crate::state::PureState;
use crate::tol;

/// One weight-unitary kernel per mode.
#[derive(Debug, Clone)]
pub struct LocalUnitary {
    kernels: Vec<Array2<Complex64>>,
}

impl LocalUnitary {
    /// Validate weighted unitarity of every kernel against its grid.
    pub fn new(kernels: Vec<Array2<Complex64>>, grids: &[ModeGrid]) -> Result<Self> {
        if kernels.len() != grids.len() {
            return Err(Error::ShapeMismatch {
                expected: vec![grids.len()],
                got: vec![kernels.len()],
            });
        }
        for (mode, (k, g)) in kernels.iter().zip(grids).enumerate() {
            if k.nrows() != g.count() || k.ncols() != g.count() {
                return Err(Error::KernelSizeMismatch {
                    mode,
                    kernel: k.nrows(),
                    grid: g.count(),
                });
            }
            let residual = weighted_unitarity_residual(k, g.weights());
            if residual > tol::UNITARITY_TOL {
                return Err(Error::NotWeightUnitary { mode, residual });
            }
        }
        Ok(Self { kernels })
    }

    pub fn kernels(&self) -> &[Array2<Complex64>] {
        &self.kernels
    }

    /// Identity on every mode.
    pub fn identity(grids: &[ModeGrid]) -> Self {
        let kernels = grids
            .iter()
            .map(|g| Array2::from_diag_elem(g.count(), Complex64::new(1.0, 0.0)))
            .collect();
        Self { kernels }
    }

    /// The inverse local unitary, built from the weighted adjoints
    /// W⁻¹ K† W of the kernels.
    pub fn inverse(&self, grids: &[ModeGrid]) -> Self {
        let kernels = self
            .kernels
            .iter()
            .zip(grids)
            .map(|(k, g)| {
                let w = g.weights();
                let n = g.count();
                Array2::from_shape_fn((n, n), |(i, j)| k[[j, i]].conj() * w[j] / w[i])
            })
            .collect();
        Self { kernels }
    }
}

/// Max-norm residual of K† W K − W.
pub fn weighted_unitarity_residual(kernel: &Array2<Complex64>, weights: &[f64]) -> f64 {
    let n = kernel.nrows();
    let mut residual = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..n {
                acc += kernel[[k, i]].conj() * weights[k] * kernel[[k, j]];
            }
            let target = if i == j {
                Complex64::new(weights[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            };
            residual = residual.max((acc - target).norm());
        }
    }
    residual
}

/// Diagonal kernel exp(i·phase_k); exactly weight-unitary for any weights.
pub fn make_phase_unitary(grid: &ModeGrid, phase: &[f64]) -> Result<Array2<Complex64>> {
    if phase.len() != grid.count() {
        return Err(Error::LengthMismatch {
            expected: grid.count(),
            got: phase.len(),
        });
    }
    let mut k = Array2::zeros((grid.count(), grid.count()));
    for (i, &p) in phase.iter().enumerate() {
        k[[i, i]] = Complex64::new(0.0, p).exp();
    }
    Ok(k)
}

/// Haar-style random weight-unitary kernel, deterministic per seed.
///
/// Draws a complex Gaussian matrix, takes its QR with the R-diagonal phase
/// fix to get a Haar-distributed standard unitary Q, then conjugates:
/// K = W^(−1/2) Q W^(1/2). On uniform grids W ∝ I and K is Q itself.
pub fn make_random_unitary(grid: &ModeGrid, seed: u64) -> Array2<Complex64> {
    let n = grid.count();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut z = nalgebra::DMatrix::<Complex64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            z[(i, j)] = Complex64::new(re, im);
        }
    }
    let qr = z.qr();
    let r = qr.r();
    let mut q = qr.q();
    // Fix the diagonal phases of R so Q is Haar-distributed.
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    let w = grid.weights();
    Array2::from_shape_fn((n, n), |(i, j)| {
        q[(i, j)] * (w[j] / w[i]).sqrt()
    })
}

/// Contract kernel i against tensor axis i for every mode.
pub fn apply_lu(state: &PureState, lu: &LocalUnitary) -> Result<PureState> {
    if lu.kernels.len() != state.n_modes() {
        return Err(Error::ShapeMismatch {
            expected: vec![state.n_modes()],
            got: vec![lu.kernels.len()],
        });
    }
    for (mode, k) in lu.kernels.iter().enumerate() {
        let n = state.modes()[mode].count();
        if k.nrows() != n || k.ncols() != n {
            return Err(Error::KernelSizeMismatch {
                mode,
                kernel: k.nrows(),
                grid: n,
            });
        }
    }
    let mut tensor = state.coeffs().clone();
    for (axis, kernel) in lu.kernels.iter().enumerate() {
        tensor = contract_axis(&tensor, kernel, axis);
    }
    PureState::from_tensor(state.modes().to_vec(), tensor)
}

/// new_c[j, rest] = Σ_k kernel[j, k] · c[k, rest] along the given axis.
fn contract_axis(tensor: &ArrayD<Complex64>, kernel: &Array2<Complex64>, axis: usize) -> ArrayD<Complex64> {
    let n = tensor.shape()[axis];
    let ndim = tensor.ndim();
    // Move `axis` to the front and flatten the rest.
    let mut perm: Vec<usize> = vec![axis];
    perm.extend((0..ndim).filter(|&a| a != axis));
    let moved = tensor.view().permuted_axes(perm.clone());
    let rest: usize = moved.shape()[1..].iter().product();
    let flat = moved
        .as_standard_layout()
        .into_owned()
        .into_shape_with_order((n, rest))
        .expect("element count preserved");
    let mut out = Array2::<Complex64>::zeros((n, rest));
    for j in 0..n {
        for k in 0..n {
            let kjk = kernel[[j, k]];
            if kjk == Complex64::new(0.0, 0.0) {
                continue;
            }
            for r in 0..rest {
                out[[j, r]] += kjk * flat[[k, r]];
            }
        }
    }
    // Restore the original axis order.
    let mut shape: Vec<usize> = vec![n];
    shape.extend(moved.shape()[1..].iter().copied());
    let reshaped = out
        .into_shape_with_order(IxDyn(&shape))
        .expect("element count preserved");
    let mut inverse = vec![0; ndim];
    for (pos, &orig) in perm.iter().enumerate() {
        inverse[orig] = pos;
    }
    reshaped
        .permuted_axes(inverse)
        .as_standard_layout()
        .into_owned()
}

/// Pointwise identity of two covers: λ agrees at every node and the distance
/// matrices agree at every active pair, in the shared parameterization.
pub fn crc_identical(a: &ConvexRigidCover, b: &ConvexRigidCover, tol: f64) -> Result<bool> {
    if a.cond_shape() != b.cond_shape() {
        return Err(Error::ShapeMismatch {
            expected: a.cond_shape().to_vec(),
            got: b.cond_shape().to_vec(),
        });
    }
    if a.active() != b.active() {
        return Ok(false);
    }
    Ok(cover_deviation(a, b)?.is_some_and(|d| d <= tol))
}

/// Largest deviation between two covers (λ pointwise, distances pairwise),
/// or None when the active masks differ.
pub fn cover_deviation(a: &ConvexRigidCover, b: &ConvexRigidCover) -> Result<Option<f64>> {
    if a.active() != b.active() {
        return Ok(None);
    }
    let mut dev = 0.0_f64;
    for (la, lb) in a.lambda().iter().zip(b.lambda()) {
        dev = dev.max((la - lb).abs());
    }
    let da = distance_matrix(a)?;
    let db = distance_matrix(b)?;
    for (x, y) in da.values.iter().zip(db.values.iter()) {
        dev = dev.max((x - y).abs());
    }
    Ok(Some(dev))
}

/// Per-partition outcome of a motion-equivalence check.
#[derive(Debug, Clone, Serialize)]
pub struct PartitionMotionCheck {
    pub partition: String,
    pub identical: bool,
    /// Largest λ/distance deviation, when the active masks matched.
    pub max_deviation: Option<f64>,
}

/// Result of comparing two states across all bipartitions.
#[derive(Debug, Clone, Serialize)]
pub struct MotionReport {
    pub equivalent: bool,
    pub first_failing_partition: Option<String>,
    pub checks: Vec<PartitionMotionCheck>,
}

/// Are the two states' covers identical for every bipartition?
pub fn motion_equivalent(a: &PureState, b: &PureState, tol: f64) -> Result<MotionReport> {
    if a.modes() != b.modes() {
        return Err(Error::GridMismatch);
    }
    let mut checks = Vec::new();
    let mut first_failing = None;
    for part in enumerate_bipartitions(a.n_modes())? {
        let pa = build_crc_pair(a, &part, tol::WEIGHT_FLOOR)?;
        let pb = build_crc_pair(b, &part, tol::WEIGHT_FLOOR)?;
        let mut max_dev: Option<f64> = Some(0.0);
        for (ca, cb) in [
            (&pa.s_conditioned, &pb.s_conditioned),
            (&pa.r_conditioned, &pb.r_conditioned),
        ] {
            match (max_dev, cover_deviation(ca, cb)?) {
                (Some(acc), Some(d)) => max_dev = Some(acc.max(d)),
                _ => max_dev = None,
            }
        }
        let identical = max_dev.is_some_and(|d| d <= tol);
        if !identical && first_failing.is_none() {
            first_failing = Some(part.to_string());
        }
        checks.push(PartitionMotionCheck {
            partition: part.to_string(),
            identical,
            max_deviation: max_dev,
        });
    }
    Ok(MotionReport {
        equivalent: first_failing.is_none(),
        first_failing_partition: first_failing,
        checks,
    })
}
