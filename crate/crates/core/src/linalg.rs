//! Small dense complex linear-algebra helpers on top of `nalgebra`.
//!
//! Everything in the crate works with dynamically sized complex matrices.
//! Covariances of the form `I + Σ s_i B_i B_iᴴ` are never formed and inverted;
//! [`GramFactor`] keeps them in square-root form so that solves stay accurate
//! when the interference terms dominate the unit noise floor by eight orders
//! of magnitude.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector, SymmetricEigen, QR, SVD};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// `(A + Aᴴ) / 2`.
pub fn hermitian_part(a: &CMat) -> CMat {
    (a + a.adjoint()).scale(0.5)
}

/// Draws an `rows × cols` matrix of i.i.d. CN(0, 1) entries.
///
/// Entries are drawn row-major, real part before imaginary part, each with
/// variance 1/2.
pub fn random_gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = CMat::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            out[(i, j)] = c(re * scale, im * scale);
        }
    }
    out
}

/// Rotates `v` so that its largest-magnitude entry is real and positive.
///
/// Ties on magnitude go to the lowest index.
pub fn normalize_phase(v: &mut CVec) {
    let mut best = 0;
    let mut best_mag = -1.0;
    for (i, z) in v.iter().enumerate() {
        let mag = z.norm();
        if mag > best_mag * (1.0 + 1e-12) {
            best = i;
            best_mag = mag;
        }
    }
    if best_mag > 0.0 {
        let phase = v[best] / best_mag;
        let rot = phase.conj();
        v.iter_mut().for_each(|z| *z *= rot);
        v[best] = c(v[best].re, 0.0);
    }
}

fn lexicographic(a: &CVec, b: &CVec) -> Ordering {
    let round = |x: f64| (x * 1e8).round();
    for (x, y) in a.iter().zip(b.iter()) {
        let ord = round(x.re)
            .partial_cmp(&round(y.re))
            .unwrap_or(Ordering::Equal)
            .then(
                round(x.im)
                    .partial_cmp(&round(y.im))
                    .unwrap_or(Ordering::Equal),
            );
        if ord != Ordering::Equal {
            return ord;
        }
    }
    Ordering::Equal
}

/// Hermitian eigendecomposition with eigenvalues in ascending order.
///
/// Each eigenvector is phase-normalized (see [`normalize_phase`]); numerically
/// tied eigenvalues are ordered by the rounded entries of their eigenvectors
/// so the output is a deterministic function of the input.
pub fn eigh_ascending(a: &CMat) -> (Vec<f64>, CMat) {
    let n = a.nrows();
    let eig = SymmetricEigen::new(hermitian_part(a));
    let scale = eig.eigenvalues.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let tie = 1e-12 * scale;
    let mut pairs: Vec<(f64, CVec)> = (0..n)
        .map(|i| {
            let mut v: CVec = eig.eigenvectors.column(i).into_owned();
            normalize_phase(&mut v);
            (eig.eigenvalues[i], v)
        })
        .collect();
    pairs.sort_by(|(la, va), (lb, vb)| {
        if (la - lb).abs() <= tie {
            lexicographic(va, vb)
        } else {
            la.partial_cmp(lb).unwrap_or(Ordering::Equal)
        }
    });
    let values = pairs.iter().map(|(l, _)| *l).collect();
    let mut vectors = CMat::zeros(n, n);
    for (j, (_, v)) in pairs.iter().enumerate() {
        vectors.set_column(j, v);
    }
    (values, vectors)
}

/// Orthonormal eigenvectors for the `count` smallest eigenvalues.
pub fn smallest_eigenvectors(a: &CMat, count: usize) -> CMat {
    let (_, vectors) = eigh_ascending(a);
    vectors.columns(0, count).into_owned()
}

/// Thin SVD `A = U diag(s) Vᴴ` with singular values in descending order.
/// Returns `(U, s, V)`.
pub fn svd_desc(a: &CMat) -> (CMat, Vec<f64>, CMat) {
    let svd = SVD::new(a.clone(), true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v = svd.v_t.expect("right singular vectors requested").adjoint();
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| {
        svd.singular_values[j]
            .partial_cmp(&svd.singular_values[i])
            .unwrap_or(Ordering::Equal)
    });
    let s: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let mut us = CMat::zeros(u.nrows(), order.len());
    let mut vs = CMat::zeros(v.nrows(), order.len());
    for (j, &i) in order.iter().enumerate() {
        us.set_column(j, &u.column(i));
        vs.set_column(j, &v.column(i));
    }
    (us, s, vs)
}

pub fn singular_values(a: &CMat) -> Vec<f64> {
    let mut s: Vec<f64> = a.singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.partial_cmp(x).unwrap_or(Ordering::Equal));
    s
}

/// Number of singular values above `max_dim · σ_max · 1e-10`.
pub fn numerical_rank(a: &CMat) -> usize {
    let s = singular_values(a);
    let Some(&top) = s.first() else { return 0 };
    if top == 0.0 {
        return 0;
    }
    let thresh = a.nrows().max(a.ncols()) as f64 * top * 1e-10;
    s.iter().filter(|&&x| x > thresh).count()
}

/// Gram–Schmidt with one reorthogonalization pass.
///
/// Equivalent to a QR factorization whose triangular factor has a real,
/// positive diagonal. A column that is numerically dependent on its
/// predecessors is replaced by its (renormalized) residual.
pub fn orthonormalize(a: &CMat) -> CMat {
    let mut q = a.clone();
    for j in 0..q.ncols() {
        let mut col: CVec = q.column(j).into_owned();
        for _ in 0..2 {
            for i in 0..j {
                let qi = q.column(i);
                let proj = qi.dotc(&col);
                col.axpy(-proj, &qi.into_owned(), c(1.0, 0.0));
            }
        }
        let norm = col.norm();
        if norm > 0.0 {
            col.unscale_mut(norm);
        }
        q.set_column(j, &col);
    }
    q
}

/// Scales every non-zero column to unit 2-norm.
pub fn normalize_columns(a: &CMat) -> CMat {
    let mut out = a.clone();
    for mut col in out.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col.unscale_mut(norm);
        }
    }
    out
}

/// Largest entry magnitude of `AᴴA − I`.
pub fn orthonormality_deviation(a: &CMat) -> f64 {
    let gram = a.adjoint() * a - identity(a.ncols());
    gram.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// Largest deviation of a column norm from one.
pub fn unit_column_deviation(a: &CMat) -> f64 {
    a.column_iter()
        .fold(0.0, |m, col| m.max((col.norm() - 1.0).abs()))
}

/// `min_φ ‖a − e^{jφ} b‖`, evaluated without cancellation.
pub fn phase_aligned_distance(a: &CVec, b: &CVec) -> f64 {
    let inner = b.dotc(a);
    let mag = inner.norm();
    let rot = if mag > 0.0 { inner / mag } else { c(1.0, 0.0) };
    (a - b * rot).norm()
}

/// Covariance `I + A Aᴴ` held as the triangular factor of the stacked
/// matrix `[Aᴴ; I]`.
///
/// `Rᴴ R = I + A Aᴴ`, so solves only touch quantities whose magnitude is the
/// square root of the covariance's.
#[derive(Debug, Clone)]
pub struct GramFactor {
    r: CMat,
}

impl GramFactor {
    /// Builds the factor of `I_n + Σ_i scale_i · B_i B_iᴴ`.
    pub fn new<'a, I>(n: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (f64, &'a CMat)>,
    {
        let mut rows: Vec<CMat> = Vec::new();
        let mut total = 0;
        for (scale, block) in terms {
            debug_assert_eq!(block.nrows(), n);
            if scale == 0.0 || block.ncols() == 0 {
                continue;
            }
            assert!(scale > 0.0, "covariance weights must be nonnegative");
            let part = block.adjoint().scale(scale.sqrt());
            total += part.nrows();
            rows.push(part);
        }
        if total == 0 {
            return Self { r: identity(n) };
        }
        let mut stacked = CMat::zeros(total + n, n);
        let mut offset = 0;
        for part in &rows {
            stacked.rows_mut(offset, part.nrows()).copy_from(part);
            offset += part.nrows();
        }
        stacked.rows_mut(offset, n).fill_with_identity();
        let r = QR::new(stacked).r();
        Self { r }
    }

    pub fn dim(&self) -> usize {
        self.r.nrows()
    }

    /// Solves `(I + A Aᴴ) X = rhs`.
    pub fn solve(&self, rhs: &CMat) -> CMat {
        let y = self
            .r
            .adjoint()
            .solve_lower_triangular(rhs)
            .expect("triangular factor of I + AAᴴ is nonsingular");
        self.r
            .solve_upper_triangular(&y)
            .expect("triangular factor of I + AAᴴ is nonsingular")
    }

    pub fn solve_vec(&self, rhs: &CVec) -> CVec {
        let rhs = CMat::from_column_slice(rhs.len(), 1, rhs.as_slice());
        self.solve(&rhs).column(0).into_owned()
    }

    /// `R⁻ᴴ rhs`, so that `‖R⁻ᴴ x‖² = xᴴ (I + AAᴴ)⁻¹ x`.
    pub fn whiten(&self, rhs: &CMat) -> CMat {
        self.r
            .adjoint()
            .solve_lower_triangular(rhs)
            .expect("triangular factor of I + AAᴴ is nonsingular")
    }

    /// Natural logarithm of `det(I + A Aᴴ)`.
    pub fn ln_det(&self) -> f64 {
        2.0 * self.r.diagonal().iter().map(|z| z.norm().ln()).sum::<f64>()
    }

    /// `xᴴ (I + A Aᴴ)⁻¹ x`, computed as `‖R⁻ᴴ x‖²`.
    pub fn quadratic_inverse(&self, x: &CVec) -> f64 {
        let rhs = CMat::from_column_slice(x.len(), 1, x.as_slice());
        self.whiten(&rhs).norm_squared()
    }

    /// Explicit covariance `Rᴴ R`, for diagnostics and tests.
    pub fn covariance(&self) -> CMat {
        self.r.adjoint() * &self.r
    }
}
