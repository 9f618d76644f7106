//! Bipartitions of the mode index set and tensor matricization.
//!
//! A bipartition splits {1..N} into two sorted, disjoint, nonempty sides
//! r and s. Matricizing a state across a bipartition reorders the tensor
//! axes (r-modes first, then s-modes) and flattens each group row-major;
//! no coefficient values change.

use ndarray::{ArrayD, Ix2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::PureState;

/// Ordered split (r)_P ∥ (s)_Q of the 1-based mode indices {1..N}.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bipartition {
    r: Vec<usize>,
    s: Vec<usize>,
    n_total: usize,
}

impl Bipartition {
    /// Build from the r-side; s is the complement. Indices are 1-based.
    pub fn new(r: &[usize], n_total: usize) -> Result<Self> {
        if n_total < 2 {
            return Err(Error::InvalidBipartition(format!(
                "need at least 2 modes, got {n_total}"
            )));
        }
        let mut r: Vec<usize> = r.to_vec();
        r.sort_unstable();
        if r.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidBipartition(format!(
                "repeated mode index in {r:?}"
            )));
        }
        if r.is_empty() || r.len() >= n_total {
            return Err(Error::InvalidBipartition(format!(
                "r side must be a proper nonempty subset of 1..={n_total}"
            )));
        }
        if r.iter().any(|&i| i == 0 || i > n_total) {
            return Err(Error::InvalidBipartition(format!(
                "mode indices must lie in 1..={n_total}"
            )));
        }
        let s: Vec<usize> = (1..=n_total).filter(|i| !r.contains(i)).collect();
        Ok(Self { r, s, n_total })
    }

    /// Build from both sides, validating that they partition {1..N}.
    pub fn from_sides(r: &[usize], s: &[usize], n_total: usize) -> Result<Self> {
        let part = Self::new(r, n_total)?;
        let mut s_sorted: Vec<usize> = s.to_vec();
        s_sorted.sort_unstable();
        if part.s != s_sorted {
            return Err(Error::InvalidBipartition(format!(
                "sides do not partition 1..={n_total}: r={:?}, s={:?}",
                part.r, s
            )));
        }
        Ok(part)
    }

    /// Parse the CLI syntax "1,3|2" (r side, pipe, s side).
    pub fn parse(text: &str, n_total: usize) -> Result<Self> {
        let (left, right) = text.split_once('|').ok_or_else(|| {
            Error::InvalidBipartition(format!("expected 'r|s' syntax, got {text:?}"))
        })?;
        let parse_side = |side: &str| -> Result<Vec<usize>> {
            side.split(',')
                .map(|tok| {
                    tok.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::InvalidBipartition(format!("bad mode index {tok:?}")))
                })
                .collect()
        };
        Self::from_sides(&parse_side(left)?, &parse_side(right)?, n_total)
    }

    pub fn r(&self) -> &[usize] {
        &self.r
    }

    pub fn s(&self) -> &[usize] {
        &self.s
    }

    pub fn n_total(&self) -> usize {
        self.n_total
    }

    /// Number of modes on the r side (P).
    pub fn p(&self) -> usize {
        self.r.len()
    }

    /// Number of modes on the s side (Q = N − P).
    pub fn q(&self) -> usize {
        self.s.len()
    }

    /// The same split with the side roles exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            r: self.s.clone(),
            s: self.r.clone(),
            n_total: self.n_total,
        }
    }

    /// 0-based axis indices of the r side.
    pub(crate) fn r_axes(&self) -> Vec<usize> {
        self.r.iter().map(|&i| i - 1).collect()
    }

    /// 0-based axis indices of the s side.
    pub(crate) fn s_axes(&self) -> Vec<usize> {
        self.s.iter().map(|&i| i - 1).collect()
    }
}

impl std::fmt::Display for Bipartition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let join = |v: &[usize]| {
            v.iter()
                .map(usize::to_string)
                .collect::<Vec<_>>()
                .join(",")
        };
        write!(f, "{}|{}", join(&self.r), join(&self.s))
    }
}

/// All 2^(n−1) − 1 unordered bipartitions of {1..n}, with the side holding
/// mode 1 taken as r, sorted lexicographically by r.
pub fn enumerate_bipartitions(n: usize) -> Result<Vec<Bipartition>> {
    if n < 2 {
        return Err(Error::InvalidBipartition(format!(
            "need at least 2 modes, got {n}"
        )));
    }
    let rest: Vec<usize> = (2..=n).collect();
    let mut parts = Vec::with_capacity((1usize << (n - 1)) - 1);
    // Subsets of {2..n} joined with mode 1, except the full set (s nonempty).
    for mask in 0..(1u64 << rest.len()) {
        let mut r = vec![1];
        for (bit, &m) in rest.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                r.push(m);
            }
        }
        if r.len() == n {
            continue;
        }
        parts.push(Bipartition::new(&r, n)?);
    }
    parts.sort_by(|a, b| a.r.cmp(&b.r));
    Ok(parts)
}

/// Reshape a state's tensor to a matrix: rows run over the r-side multi-index
/// (row-major in sorted r order), columns over the s side. Pure reindexing.
pub fn matricize(state: &PureState, part: &Bipartition) -> Result<ndarray::Array2<Complex64>> {
    if part.n_total() != state.n_modes() {
        return Err(Error::ShapeMismatch {
            expected: vec![state.n_modes()],
            got: vec![part.n_total()],
        });
    }
    let perm: Vec<usize> = part.r_axes().into_iter().chain(part.s_axes()).collect();
    let shape = state.shape();
    let rows: usize = part.r_axes().iter().map(|&a| shape[a]).product();
    let cols: usize = part.s_axes().iter().map(|&a| shape[a]).product();
    let permuted = state.coeffs().view().permuted_axes(perm);
    let standard = permuted.as_standard_layout().into_owned();
    let matrix = standard
        .into_shape_with_order((rows, cols))
        .expect("axis permutation preserves element count")
        .into_dimensionality::<Ix2>()
        .expect("two-dimensional by construction");
    Ok(matrix)
}

/// Inverse of [`matricize`]: rebuild the tensor in natural mode order.
pub fn dematricize(
    matrix: &ndarray::Array2<Complex64>,
    part: &Bipartition,
    shape: &[usize],
) -> Result<ArrayD<Complex64>> {
    let perm: Vec<usize> = part.r_axes().into_iter().chain(part.s_axes()).collect();
    let permuted_shape: Vec<usize> = perm.iter().map(|&a| shape[a]).collect();
    let expected: usize = permuted_shape.iter().product();
    if matrix.len() != expected {
        return Err(Error::ShapeMismatch {
            expected: permuted_shape,
            got: matrix.shape().to_vec(),
        });
    }
    let tensor = matrix
        .to_owned()
        .into_shape_with_order(permuted_shape.clone())
        .expect("checked element count")
        .into_dyn();
    // Invert the permutation: axis perm[k] of the original sits at k now.
    let mut inverse = vec![0; perm.len()];
    for (k, &p) in perm.iter().enumerate() {
        inverse[p] = k;
    }
    let restored = tensor.permuted_axes(inverse);
    Ok(restored.as_standard_layout().into_owned())
}
