//! Pure states as complex coefficient tensors over product grids.
//!
//! A state of N modes holds a coefficient c at every node of the product
//! grid, unit-normalized under the product quadrature:
//! Σ (Π_i w_i) |c|² = 1. Coefficients are stored as plain node values; every
//! inner product applies the weights explicitly.

use ndarray::{ArrayD, IxDyn};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::ModeGrid;
use crate::tol;

/// Normalized pure state over N ≥ 2 mode grids.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    modes: Vec<ModeGrid>,
    coeffs: ArrayD<Complex64>,
}

/// Gaussian generator c ∝ exp(−½ μᵀAμ + bᵀμ).
///
/// A is complex symmetric with positive-definite real part, b a complex
/// vector. Used to build product states (diagonal A) and correlated test
/// states (off-diagonal A).
#[derive(Debug, Clone)]
pub struct GaussianSpec {
    pub quadratic: Vec<Vec<Complex64>>,
    pub linear: Vec<Complex64>,
}

/// Non-fatal conditions noticed while building a state.
#[derive(Debug, Clone, PartialEq)]
pub enum BuildWarning {
    /// A generator sample on the boundary of the index hyperrectangle
    /// exceeds `tol::TRUNCATION_RATIO` of the peak magnitude; the interval
    /// truncates the state visibly.
    Truncation { edge_ratio: f64 },
}

impl std::fmt::Display for BuildWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BuildWarning::Truncation { edge_ratio } => write!(
                f,
                "truncation: edge sample reaches {edge_ratio:.3e} of peak magnitude (limit {:.0e})",
                tol::TRUNCATION_RATIO
            ),
        }
    }
}

impl GaussianSpec {
    pub fn new(quadratic: Vec<Vec<Complex64>>, linear: Vec<Complex64>) -> Self {
        Self { quadratic, linear }
    }

    /// Zero-mean spec from a real quadratic form.
    pub fn from_real(quadratic: &[Vec<f64>]) -> Self {
        let n = quadratic.len();
        Self {
            quadratic: quadratic
                .iter()
                .map(|row| row.iter().map(|&x| Complex64::new(x, 0.0)).collect())
                .collect(),
            linear: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn n_modes(&self) -> usize {
        self.quadratic.len()
    }

    /// Symmetry of A and positive-definiteness of Re(A).
    pub fn validate(&self) -> Result<()> {
        let n = self.n_modes();
        if self.linear.len() != n || self.quadratic.iter().any(|row| row.len() != n) {
            return Err(Error::ShapeMismatch {
                expected: vec![n, n],
                got: vec![self.quadratic.len(), self.linear.len()],
            });
        }
        let mut asym: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                asym = asym.max((self.quadratic[i][j] - self.quadratic[j][i]).norm());
            }
        }
        if asym > tol::SYMMETRY_TOL {
            return Err(Error::NotSymmetric(asym));
        }
        let re = nalgebra::DMatrix::from_fn(n, n, |i, j| {
            0.5 * (self.quadratic[i][j].re + self.quadratic[j][i].re)
        });
        let eigs = re.symmetric_eigenvalues();
        let mut sorted: Vec<(usize, f64)> = eigs.iter().copied().enumerate().collect();
        sorted.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (index, value) = sorted[0];
        if value <= 0.0 {
            return Err(Error::NotPositiveDefinite { index, value });
        }
        Ok(())
    }
}

impl PureState {
    /// Normalize a raw coefficient tensor to discrete norm 1.
    pub fn from_tensor(modes: Vec<ModeGrid>, raw: ArrayD<Complex64>) -> Result<Self> {
        let expected: Vec<usize> = modes.iter().map(ModeGrid::count).collect();
        if raw.shape() != expected.as_slice() {
            return Err(Error::ShapeMismatch {
                expected,
                got: raw.shape().to_vec(),
            });
        }
        let norm_sq = discrete_norm_sq(&raw, &modes);
        let norm = norm_sq.sqrt();
        if norm < tol::ZERO_NORM_FLOOR {
            return Err(Error::ZeroTensor(norm));
        }
        let coeffs = raw.mapv(|c| c / norm);
        Ok(Self { modes, coeffs })
    }

    /// Sample a Gaussian generator on the grids and normalize.
    ///
    /// Also reports a truncation warning when any sample on the boundary of
    /// the index hyperrectangle exceeds `tol::TRUNCATION_RATIO` of the peak.
    pub fn gaussian(spec: &GaussianSpec, modes: Vec<ModeGrid>) -> Result<(Self, Vec<BuildWarning>)> {
        spec.validate()?;
        let n = spec.n_modes();
        if modes.len() != n {
            return Err(Error::ShapeMismatch {
                expected: vec![n],
                got: vec![modes.len()],
            });
        }
        let shape: Vec<usize> = modes.iter().map(ModeGrid::count).collect();
        let mut raw = ArrayD::<Complex64>::zeros(IxDyn(&shape));
        let mut mu = vec![0.0; n];
        for (idx, value) in raw.indexed_iter_mut() {
            for i in 0..n {
                mu[i] = modes[i].points()[idx[i]];
            }
            let mut expo = Complex64::new(0.0, 0.0);
            for i in 0..n {
                for j in 0..n {
                    expo -= 0.5 * spec.quadratic[i][j] * mu[i] * mu[j];
                }
                expo += spec.linear[i] * mu[i];
            }
            *value = expo.exp();
        }

        let mut warnings = Vec::new();
        let peak = raw.iter().map(|c| c.norm()).fold(0.0_f64, f64::max);
        let mut edge_ratio = 0.0_f64;
        for (idx, value) in raw.indexed_iter() {
            let on_edge = (0..n).any(|i| idx[i] == 0 || idx[i] == shape[i] - 1);
            if on_edge {
                edge_ratio = edge_ratio.max(value.norm() / peak);
            }
        }
        if edge_ratio > tol::TRUNCATION_RATIO {
            warnings.push(BuildWarning::Truncation { edge_ratio });
        }

        let state = Self::from_tensor(modes, raw)?;
        Ok((state, warnings))
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn modes(&self) -> &[ModeGrid] {
        &self.modes
    }

    pub fn coeffs(&self) -> &ArrayD<Complex64> {
        &self.coeffs
    }

    pub fn shape(&self) -> &[usize] {
        self.coeffs.shape()
    }

    /// Σ (Π w) |c|², which is 1 for a constructed state.
    pub fn norm_sq(&self) -> f64 {
        discrete_norm_sq(&self.coeffs, &self.modes)
    }

    /// Weighted overlap Σ (Π w) a conj(b) between states on identical grids.
    pub fn overlap(&self, other: &PureState) -> Result<Complex64> {
        if self.modes != other.modes {
            return Err(Error::GridMismatch);
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for ((idx, a), b) in self.coeffs.indexed_iter().zip(other.coeffs.iter()) {
            let mut w = 1.0;
            for (i, grid) in self.modes.iter().enumerate() {
                w *= grid.weights()[idx[i]];
            }
            acc += w * *a * b.conj();
        }
        Ok(acc)
    }
}

fn discrete_norm_sq(tensor: &ArrayD<Complex64>, modes: &[ModeGrid]) -> f64 {
    let mut acc = 0.0;
    for (idx, c) in tensor.indexed_iter() {
        let mut w = 1.0;
        for (i, grid) in modes.iter().enumerate() {
            w *= grid.weights()[idx[i]];
        }
        acc += w * c.norm_sqr();
    }
    acc
}
