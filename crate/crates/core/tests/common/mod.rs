//! Shared generators and independent oracles for the integration suites.
//!
//! Oracles here deliberately avoid the library's cover/partition machinery:
//! the partial trace contracts raw tensor indices with its own bookkeeping,
//! and the direct Frobenius distance materializes both projectors.

#![allow(dead_code)]

use ndarray::{Array2, ArrayD, IxDyn};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crcover::motion::{make_phase_unitary, make_random_unitary, LocalUnitary};
use crcover::{Bipartition, GaussianSpec, ModeGrid, PureState};

pub fn grid(lo: f64, hi: f64, n: usize) -> ModeGrid {
    ModeGrid::uniform(lo, hi, n).unwrap()
}

pub fn rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Random product Gaussian: diagonal quadratic form, small random centers.
pub fn random_product_gaussian(rng: &mut ChaCha12Rng, grids: Vec<ModeGrid>) -> PureState {
    let n = grids.len();
    let mut quad = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for (i, row) in quad.iter_mut().enumerate() {
        row[i] = Complex64::new(rng.random_range(0.6..2.0), 0.0);
    }
    let linear: Vec<Complex64> = (0..n)
        .map(|_| {
            Complex64::new(
                rng.random_range(-0.4..0.4),
                rng.random_range(-0.3..0.3),
            )
        })
        .collect();
    PureState::gaussian(&GaussianSpec::new(quad, linear), grids)
        .unwrap()
        .0
}

/// Random correlated Gaussian whose every bipartition is clearly entangled
/// (oracle ratio above the borderline band). Retries until the draw both is
/// positive-definite and clears the band.
pub fn random_entangled_gaussian(rng: &mut ChaCha12Rng, grids: Vec<ModeGrid>) -> PureState {
    let n = grids.len();
    loop {
        let mut quad = vec![vec![Complex64::new(0.0, 0.0); n]; n];
        for (i, row) in quad.iter_mut().enumerate() {
            row[i] = Complex64::new(rng.random_range(0.9..1.4), 0.0);
        }
        for (i, j) in (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))) {
            let c = rng.random_range(0.25..0.6) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            quad[i][j] = Complex64::new(c, 0.0);
            quad[j][i] = Complex64::new(c, 0.0);
        }
        let spec = GaussianSpec::new(quad, vec![Complex64::new(0.0, 0.0); n]);
        if spec.validate().is_err() {
            continue;
        }
        let state = PureState::gaussian(&spec, grids.clone()).unwrap().0;
        if clears_entangled_band(&state) {
            return state;
        }
    }
}

/// Superposition of two displaced product Gaussians (GHZ-like), clearly
/// entangled across every bipartition.
pub fn two_term_superposition(rng: &mut ChaCha12Rng, grids: Vec<ModeGrid>) -> PureState {
    loop {
        let centers_a: Vec<f64> = grids.iter().map(|_| rng.random_range(-3.0..-1.5)).collect();
        let centers_b: Vec<f64> = grids.iter().map(|_| rng.random_range(1.5..3.0)).collect();
        let mix = Complex64::new(rng.random_range(0.7..1.3), rng.random_range(-0.3..0.3));
        let raw = displaced_product(&grids, &centers_a) + &(displaced_product(&grids, &centers_b) * mix);
        let state = PureState::from_tensor(grids.clone(), raw).unwrap();
        if clears_entangled_band(&state) {
            return state;
        }
    }
}

/// Low-rank mixture of random product vectors: Σ_k α_k ⊗_i v_i^(k).
pub fn low_rank_mixture(rng: &mut ChaCha12Rng, grids: Vec<ModeGrid>, terms: usize) -> PureState {
    loop {
        let shape: Vec<usize> = grids.iter().map(ModeGrid::count).collect();
        let mut raw = ArrayD::<Complex64>::zeros(IxDyn(&shape));
        for _ in 0..terms {
            let alpha = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let factors: Vec<Vec<Complex64>> = shape
                .iter()
                .map(|&count| {
                    (0..count)
                        .map(|_| {
                            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                        })
                        .collect()
                })
                .collect();
            for (idx, value) in raw.indexed_iter_mut() {
                let mut term = alpha;
                for (axis, factor) in factors.iter().enumerate() {
                    term *= factor[idx[axis]];
                }
                *value += term;
            }
        }
        let Ok(state) = PureState::from_tensor(grids.clone(), raw) else {
            continue;
        };
        if terms == 1 || clears_entangled_band(&state) {
            return state;
        }
    }
}

/// Product of independent random per-mode vectors (separable by construction).
pub fn random_product_vectors(rng: &mut ChaCha12Rng, grids: Vec<ModeGrid>) -> PureState {
    low_rank_mixture(rng, grids, 1)
}

fn displaced_product(grids: &[ModeGrid], centers: &[f64]) -> ArrayD<Complex64> {
    let shape: Vec<usize> = grids.iter().map(ModeGrid::count).collect();
    let mut raw = ArrayD::<Complex64>::zeros(IxDyn(&shape));
    for (idx, value) in raw.indexed_iter_mut() {
        let mut expo = 0.0;
        for (axis, g) in grids.iter().enumerate() {
            let x = g.points()[idx[axis]] - centers[axis];
            expo -= 0.5 * x * x;
        }
        *value = Complex64::new(expo.exp(), 0.0);
    }
    raw
}

/// Every bipartition's oracle ratio is above the clearly-entangled floor.
pub fn clears_entangled_band(state: &PureState) -> bool {
    crcover::enumerate_bipartitions(state.n_modes())
        .unwrap()
        .iter()
        .all(|part| {
            let sv = crcover::schmidt_oracle(state, part).unwrap();
            sv.len() >= 2 && sv[1] / sv[0] > crcover::tol::ORACLE_ENTANGLED_RATIO
        })
}

/// Random diagonal-phase local unitary.
pub fn random_phase_lu(rng: &mut ChaCha12Rng, modes: &[ModeGrid]) -> LocalUnitary {
    let kernels = modes
        .iter()
        .map(|g| {
            let phases: Vec<f64> = (0..g.count())
                .map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
                .collect();
            make_phase_unitary(g, &phases).unwrap()
        })
        .collect();
    LocalUnitary::new(kernels, modes).unwrap()
}

/// Random dense weight-unitary local unitary.
pub fn random_dense_lu(rng: &mut ChaCha12Rng, modes: &[ModeGrid]) -> LocalUnitary {
    let kernels = modes
        .iter()
        .map(|g| make_random_unitary(g, rng.random::<u64>()))
        .collect();
    LocalUnitary::new(kernels, modes).unwrap()
}

// ---------------------------------------------------------------------------
// Independent oracles
// ---------------------------------------------------------------------------

/// Partial trace over the conditioning axes by direct index contraction on
/// the raw tensor: ρ[a, a'] = Σ_b (Π w_cond) c(a, b) conj(c(a', b)), with the
/// kept axes flattened row-major. Independent of the cover machinery.
pub fn partial_trace_oracle(state: &PureState, keep_axes: &[usize]) -> Array2<Complex64> {
    let shape = state.shape();
    let n = shape.len();
    let traced_axes: Vec<usize> = (0..n).filter(|a| !keep_axes.contains(a)).collect();
    let kept_dim: usize = keep_axes.iter().map(|&a| shape[a]).product();
    let mut rho = Array2::<Complex64>::zeros((kept_dim, kept_dim));

    let flatten = |idx: &[usize], axes: &[usize]| -> usize {
        axes.iter().fold(0, |acc, &a| acc * shape[a] + idx[a])
    };
    let coeffs = state.coeffs();
    // Group entries by traced multi-index.
    let traced_dim: usize = traced_axes.iter().map(|&a| shape[a]).product();
    let mut groups: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); traced_dim];
    for (idx, &c) in coeffs.indexed_iter() {
        let idx: Vec<usize> = (0..n).map(|a| idx[a]).collect();
        groups[flatten(&idx, &traced_axes)].push((flatten(&idx, keep_axes), c));
    }
    for (b_flat, entries) in groups.iter().enumerate() {
        let mut w = 1.0;
        let mut rem = b_flat;
        for &a in traced_axes.iter().rev() {
            w *= state.modes()[a].weights()[rem % shape[a]];
            rem /= shape[a];
        }
        for &(a1, c1) in entries {
            for &(a2, c2) in entries {
                rho[[a1, a2]] += w * c1 * c2.conj();
            }
        }
    }
    rho
}

/// Direct weighted-Frobenius distance ‖|v⟩⟨v| − |w⟩⟨w|‖, materializing both
/// projectors. Quadratic in the dimension; test-scale only.
pub fn frobenius_distance_direct(v: &[Complex64], w: &[Complex64], wts: &[f64]) -> f64 {
    let dim = v.len();
    let mut acc = 0.0;
    for a in 0..dim {
        for b in 0..dim {
            let entry = v[a] * v[b].conj() - w[a] * w[b].conj();
            acc += wts[a] * wts[b] * entry.norm_sqr();
        }
    }
    acc.sqrt()
}

/// High-resolution midpoint reference for 1-D integrals.
pub fn reference_integral(lo: f64, hi: f64, points: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = (hi - lo) / points as f64;
    let mut acc = 0.0;
    for k in 0..points {
        acc += f(lo + (k as f64 + 0.5) * h);
    }
    acc * h
}

/// Flat product-weight vector over the given axes (test-local bookkeeping).
pub fn flat_weights_of(state: &PureState, axes: &[usize]) -> Vec<f64> {
    let mut out = vec![1.0];
    for &ax in axes {
        let w = state.modes()[ax].weights();
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

/// Largest elementwise gap between two complex matrices.
pub fn max_entry_gap(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Convenience: bipartition from 1-based r side.
pub fn part(r: &[usize], n: usize) -> Bipartition {
    Bipartition::new(r, n).unwrap()
}
