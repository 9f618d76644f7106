//! Quadrature grids for single continuous variables.
//!
//! Each mode μ_i ∈ (a_i, b_i) is discretized by the midpoint rule: nodes at
//! cell centers, uniform weights h = (b−a)/n. Integrals over a mode become
//! weighted sums, and the weighted inner product Σ w f conj(g) is the
//! discrete analogue of ∫ f ḡ dμ.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One continuous variable discretized on an interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeGrid {
    lower: f64,
    upper: f64,
    count: usize,
    #[serde(skip)]
    points: Vec<f64>,
    #[serde(skip)]
    weights: Vec<f64>,
}

impl ModeGrid {
    /// Midpoint rule on (lower, upper) with `count` cells: nodes at
    /// lower + (k+½)h, weights all equal to h.
    pub fn uniform(lower: f64, upper: f64, count: usize) -> Result<Self> {
        if !lower.is_finite() || !upper.is_finite() || lower >= upper {
            return Err(Error::InvalidInterval { lower, upper });
        }
        if count < 2 {
            return Err(Error::InvalidCount(count));
        }
        let h = (upper - lower) / count as f64;
        let points = (0..count).map(|k| lower + (k as f64 + 0.5) * h).collect();
        let weights = vec![h; count];
        Ok(Self {
            lower,
            upper,
            count,
            points,
            weights,
        })
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Node spacing. Uniform for the midpoint rule.
    pub fn spacing(&self) -> f64 {
        (self.upper - self.lower) / self.count as f64
    }

    /// Rebuild nodes and weights after deserialization (they are not stored).
    pub(crate) fn rehydrate(&mut self) -> Result<()> {
        *self = ModeGrid::uniform(self.lower, self.upper, self.count)?;
        Ok(())
    }
}

/// Weighted inner product Σ_k w_k f_k conj(g_k), linear in the first slot.
pub fn weighted_inner_product(f: &[Complex64], g: &[Complex64], grid: &ModeGrid) -> Result<Complex64> {
    if f.len() != grid.count() {
        return Err(Error::LengthMismatch {
            expected: grid.count(),
            got: f.len(),
        });
    }
    if g.len() != grid.count() {
        return Err(Error::LengthMismatch {
            expected: grid.count(),
            got: g.len(),
        });
    }
    Ok(weighted_dot(f, g, grid.weights()))
}

/// Σ w f conj(g) over pre-matched slices. Callers guarantee equal lengths.
pub(crate) fn weighted_dot(f: &[Complex64], g: &[Complex64], w: &[f64]) -> Complex64 {
    f.iter()
        .zip(g)
        .zip(w)
        .map(|((a, b), wk)| *wk * *a * b.conj())
        .sum()
}

/// Σ w |f|² as a real number.
pub(crate) fn weighted_norm_sq(f: &[Complex64], w: &[f64]) -> f64 {
    f.iter().zip(w).map(|(a, wk)| wk * a.norm_sqr()).sum()
}
