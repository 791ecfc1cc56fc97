//! Dense complex Hermitian operators and the spectral primitives built on them.
//!
//! Spectral questions (supports, kernels, overlaps of subspaces, norms) are
//! answered by the Hermitian eigendecomposition [`eigh`]; principal angles use
//! the Jacobi singular value decomposition [`svd_jacobi`]. Rank decisions are
//! relative to the largest absolute eigenvalue.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Relative tolerances used by every numerical decision in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub tol_herm: f64,
    pub tol_rank: f64,
    pub tol_comm: f64,
    pub tol_psd: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tol_herm: 1e-10,
            tol_rank: 1e-8,
            tol_comm: 1e-8,
            tol_psd: 1e-9,
        }
    }
}

impl Tolerances {
    pub fn new(tol_herm: f64, tol_rank: f64, tol_comm: f64, tol_psd: f64) -> Result<Self> {
        let tol = Self {
            tol_herm,
            tol_rank,
            tol_comm,
            tol_psd,
        };
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("tol_herm", self.tol_herm),
            ("tol_rank", self.tol_rank),
            ("tol_comm", self.tol_comm),
            ("tol_psd", self.tol_psd),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be strictly positive, got {value}"
                )));
            }
        }
        Ok(())
    }

    pub fn with_comm(mut self, tol_comm: f64) -> Self {
        self.tol_comm = tol_comm;
        self
    }

    pub fn with_rank(mut self, tol_rank: f64) -> Self {
        self.tol_rank = tol_rank;
        self
    }
}

/// Eigenvalues in ascending order with the matching orthonormal eigenvectors
/// stored column-wise.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Spectrum {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Columns whose eigenvalue passes `keep`.
    pub fn select<F: Fn(f64) -> bool>(&self, keep: F) -> CMatrix {
        let idx: Vec<usize> = (0..self.values.len())
            .filter(|&i| keep(self.values[i]))
            .collect();
        self.vectors.select_columns(idx.iter())
    }
}

/// Hermitian eigendecomposition of `m`, which must already be Hermitian.
pub fn eigh(m: &CMatrix) -> Spectrum {
    let n = m.nrows();
    if n == 0 {
        return Spectrum {
            values: Vec::new(),
            vectors: CMatrix::zeros(0, 0),
        };
    }
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = eig.eigenvectors.select_columns(order.iter());
    Spectrum { values, vectors }
}

/// Thin singular value decomposition `M V = U Σ` of a matrix with at least
/// as many rows as columns, singular values in descending order.
///
/// Columns of `U` belonging to vanishing singular values are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ThinSvd {
    pub u: CMatrix,
    pub singular_values: Vec<f64>,
    pub v: CMatrix,
}

const JACOBI_SWEEPS: usize = 60;

/// One-sided (Hestenes) Jacobi SVD; singular vectors are accurate relative to
/// each singular value, including the small ones.
pub fn svd_jacobi(m: &CMatrix) -> ThinSvd {
    let (rows, n) = m.shape();
    assert!(rows >= n, "svd_jacobi expects rows >= cols, got {rows}x{n}");
    let mut a = m.clone();
    let mut v = CMatrix::identity(n, n);
    for _ in 0..JACOBI_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dotc(&a.column(q));
                let g = gamma.norm();
                if g == 0.0 || g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // make the off-diagonal entry real, then rotate as in the real case
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for mat in [&mut a, &mut v] {
                    for i in 0..mat.nrows() {
                        let xp = mat[(i, p)];
                        let xq = mat[(i, q)] * phase.conj();
                        mat[(i, p)] = xp * c - xq * s;
                        mat[(i, q)] = xp * s + xq * c;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..n).map(|j| a.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let mut u = CMatrix::zeros(rows, n);
    for (k, &j) in order.iter().enumerate() {
        if norms[j] > 0.0 {
            u.set_column(k, &(a.column(j) / Complex64::new(norms[j], 0.0)));
        }
    }
    ThinSvd {
        u,
        singular_values: order.iter().map(|&j| norms[j]).collect(),
        v: v.select_columns(order.iter()),
    }
}

pub fn frobenius_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `u v†`
pub fn outer(u: &CVector, v: &CVector) -> CMatrix {
    u * v.adjoint()
}

/// `⟨u|v⟩`, conjugate-linear in `u`.
pub fn inner(u: &CVector, v: &CVector) -> Complex64 {
    u.dotc(v)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    check_square(a)?;
    check_square(b)?;
    if a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: b.nrows(),
        });
    }
    Ok(a * b - b * a)
}

fn check_square(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(())
}

/// A square complex matrix that is self-adjoint to working precision.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: CMatrix,
    hermiticity_residual: f64,
}

impl HermitianOperator {
    /// Accepts `m` if `‖M − M†‖_F ≤ tol_herm · max(1, ‖M‖_F)` and stores
    /// the symmetrized `(M + M†)/2`.
    pub fn new(m: CMatrix, tol: &Tolerances) -> Result<Self> {
        check_square(&m)?;
        if m.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite);
        }
        let residual = frobenius_norm(&(&m - m.adjoint()));
        let scale = frobenius_norm(&m).max(1.0);
        if residual > tol.tol_herm * scale {
            return Err(Error::NotHermitian {
                residual: residual / scale,
            });
        }
        let mut op = Self::symmetrized(m);
        op.hermiticity_residual = residual;
        Ok(op)
    }

    /// Symmetrizes without checking; for products that are Hermitian by
    /// construction (e.g. `A B A`).
    pub fn symmetrized(m: CMatrix) -> Self {
        let herm = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        Self {
            matrix: herm,
            hermiticity_residual: 0.0,
        }
    }

    pub fn from_real(dim: usize, entries: &[f64]) -> Self {
        let m = CMatrix::from_row_iterator(dim, dim, entries.iter().map(|&x| Complex64::new(x, 0.0)));
        Self::symmetrized(m)
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        Self::symmetrized(m)
    }

    pub fn zeros(dim: usize) -> Self {
        Self::symmetrized(CMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self::symmetrized(CMatrix::identity(dim, dim))
    }

    /// `Σ w_i |v_i⟩⟨v_i|`
    pub fn from_spectrum(weights: &[f64], vectors: &CMatrix) -> Self {
        let mut m = CMatrix::zeros(vectors.nrows(), vectors.nrows());
        for (i, &w) in weights.iter().enumerate() {
            let v = vectors.column(i).into_owned();
            m += outer(&v, &v) * Complex64::new(w, 0.0);
        }
        Self::symmetrized(m)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn hermiticity_residual(&self) -> f64 {
        self.hermiticity_residual
    }

    pub fn eigh(&self) -> Spectrum {
        eigh(&self.matrix)
    }

    /// Operator (spectral) norm, the largest absolute eigenvalue.
    pub fn spectral_norm(&self) -> f64 {
        self.eigh().max_abs()
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius_norm(&self.matrix)
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigh().values.first().copied().unwrap_or(0.0)
    }

    /// Smallest eigenvalue is at least `−tol_psd · max|λ|`.
    pub fn is_psd(&self, tol: &Tolerances) -> bool {
        let spec = self.eigh();
        let min = spec.values.first().copied().unwrap_or(0.0);
        min >= -tol.tol_psd * spec.max_abs()
    }

    /// `X A X†`, re-symmetrized.
    pub fn sandwich(&self, outer_left: &CMatrix) -> Self {
        Self::symmetrized(outer_left * &self.matrix * outer_left.adjoint())
    }

    /// `U A U†`
    pub fn conjugate(&self, u: &CMatrix) -> Self {
        self.sandwich(u)
    }

    /// `V† A V` for an isometry `V` (columns orthonormal).
    pub fn compress(&self, v: &CMatrix) -> Self {
        Self::symmetrized(v.adjoint() * &self.matrix * v)
    }

    /// `V A V†`, the inverse of [`compress`](Self::compress) on the range of `V`.
    pub fn embed(&self, v: &CMatrix) -> Self {
        Self::symmetrized(v * &self.matrix * v.adjoint())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::symmetrized(&self.matrix * Complex64::new(factor, 0.0))
    }

    pub fn mul(&self, other: &HermitianOperator) -> CMatrix {
        &self.matrix * &other.matrix
    }
}

/// An orthogonal projector together with its rank.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    operator: HermitianOperator,
    rank: usize,
}

impl Projector {
    /// Checks `‖P² − P‖_F ≤ tol_rank · max(1, ‖P‖_F)` and that the trace is
    /// within 0.5 of an integer rank.
    pub fn new(m: CMatrix, tol: &Tolerances) -> Result<Self> {
        let op = HermitianOperator::new(m, tol)?;
        let p = op.matrix();
        let residual = frobenius_norm(&(p * p - p));
        if residual > tol.tol_rank * op.frobenius_norm().max(1.0) {
            return Err(Error::NotProjector { residual });
        }
        let trace = op.trace();
        let rank = trace.round().max(0.0);
        if (trace - rank).abs() >= 0.5 {
            return Err(Error::NotProjector {
                residual: (trace - rank).abs(),
            });
        }
        Ok(Self {
            operator: op,
            rank: rank as usize,
        })
    }

    /// `Q Q†` for a matrix `Q` with orthonormal columns.
    pub fn from_orthonormal_columns(q: &CMatrix) -> Self {
        Self {
            operator: HermitianOperator::symmetrized(q * q.adjoint()),
            rank: q.ncols(),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            operator: HermitianOperator::zeros(dim),
            rank: 0,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            operator: HermitianOperator::identity(dim),
            rank: dim,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.operator.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        self.operator.matrix()
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.operator
    }

    /// Orthonormal columns spanning the range.
    pub fn basis(&self) -> CMatrix {
        let spec = self.operator.eigh();
        let n = spec.values.len();
        let idx: Vec<usize> = (n - self.rank..n).rev().collect();
        spec.vectors.select_columns(idx.iter())
    }

    pub fn complement(&self) -> Projector {
        let n = self.dim();
        Self {
            operator: HermitianOperator::symmetrized(CMatrix::identity(n, n) - self.matrix()),
            rank: n - self.rank,
        }
    }
}

fn rank_threshold(spec: &Spectrum, tol: &Tolerances) -> f64 {
    tol.tol_rank * spec.max_abs()
}

/// Orthonormal eigenvectors spanning the support, ordered by descending
/// absolute eigenvalue.
pub fn support_basis(a: &HermitianOperator, tol: &Tolerances) -> CMatrix {
    let spec = a.eigh();
    let max = spec.max_abs();
    if max == 0.0 {
        return CMatrix::zeros(a.dim(), 0);
    }
    let thr = rank_threshold(&spec, tol);
    let mut idx: Vec<usize> = (0..spec.values.len())
        .filter(|&i| spec.values[i].abs() > thr)
        .collect();
    idx.sort_by(|&i, &j| spec.values[j].abs().total_cmp(&spec.values[i].abs()));
    spec.vectors.select_columns(idx.iter())
}

/// Orthonormal eigenvectors spanning the kernel.
pub fn kernel_basis(a: &HermitianOperator, tol: &Tolerances) -> CMatrix {
    let spec = a.eigh();
    let max = spec.max_abs();
    if max == 0.0 {
        return CMatrix::identity(a.dim(), a.dim());
    }
    let thr = rank_threshold(&spec, tol);
    spec.select(|v| v.abs() <= thr)
}

pub fn support_projector(a: &HermitianOperator, tol: &Tolerances) -> Projector {
    Projector::from_orthonormal_columns(&support_basis(a, tol))
}

pub fn kernel_projector(a: &HermitianOperator, tol: &Tolerances) -> Projector {
    Projector::from_orthonormal_columns(&kernel_basis(a, tol))
}

pub fn rank(a: &HermitianOperator, tol: &Tolerances) -> usize {
    support_basis(a, tol).ncols()
}

/// Projector onto the (not necessarily direct) sum of the ranges of the
/// given projectors: the support of `Σ P_i`.
pub fn span_projector(dim: usize, parts: &[&Projector], tol: &Tolerances) -> Result<Projector> {
    let mut sum = CMatrix::zeros(dim, dim);
    for p in parts {
        if p.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.dim(),
            });
        }
        sum += p.matrix();
    }
    Ok(support_projector(&HermitianOperator::symmetrized(sum), tol))
}

/// Largest principal cosine between two supports and whether they
/// intersect only in the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportOverlap {
    pub disjoint: bool,
    pub max_overlap: f64,
}

/// The largest singular value of `G_A G_B` is obtained as the square root of
/// the largest eigenvalue of `G_A G_B G_A`.
pub fn disjoint_supports(
    a: &HermitianOperator,
    b: &HermitianOperator,
    tol: &Tolerances,
) -> Result<SupportOverlap> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let ga = support_projector(a, tol);
    let gb = support_projector(b, tol);
    Ok(projector_overlap(&ga, &gb, tol))
}

pub fn projector_overlap(ga: &Projector, gb: &Projector, tol: &Tolerances) -> SupportOverlap {
    if ga.rank() == 0 || gb.rank() == 0 {
        return SupportOverlap {
            disjoint: true,
            max_overlap: 0.0,
        };
    }
    let m = ga.matrix() * gb.matrix() * ga.matrix();
    let top = eigh(&HermitianOperator::symmetrized(m).into_matrix())
        .values
        .last()
        .copied()
        .unwrap_or(0.0);
    let max_overlap = top.clamp(0.0, 1.0).sqrt();
    SupportOverlap {
        disjoint: max_overlap < 1.0 - tol.tol_rank,
        max_overlap,
    }
}

/// `‖c‖_F / Π_i ‖f_i‖`, with spectral norms of the factors; zero when any
/// factor vanishes.
pub fn relative_comm_norm(c: &CMatrix, factors: &[&HermitianOperator]) -> f64 {
    let norms: Vec<f64> = factors.iter().map(|f| f.spectral_norm()).collect();
    relative_norm_with(c, &norms)
}

/// Same as [`relative_comm_norm`] with precomputed factor norms.
pub fn relative_norm_with(c: &CMatrix, factor_norms: &[f64]) -> f64 {
    let denom: f64 = factor_norms.iter().product();
    if denom == 0.0 {
        return 0.0;
    }
    frobenius_norm(c) / denom
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn jacobi_svd_reconstructs_rank_deficient_complex_input() {
        let mut rng = crate::random::seeded(17);
        let left = crate::random::gaussian_matrix(6, 3, &mut rng);
        let right = crate::random::gaussian_matrix(3, 5, &mut rng);
        let m = left * right;
        let svd = svd_jacobi(&m);
        let sigma = CMatrix::from_diagonal(&CVector::from_iterator(5, svd.singular_values.iter().map(|&s| c(s))));
        assert!(frobenius_norm(&(&m * &svd.v - &svd.u * &sigma)) < 1e-12);
        assert!(frobenius_norm(&(svd.v.adjoint() * &svd.v - CMatrix::identity(5, 5))) < 1e-13);
        let u3 = svd.u.columns(0, 3).into_owned();
        assert!(frobenius_norm(&(u3.adjoint() * &u3 - CMatrix::identity(3, 3))) < 1e-13);
        assert!(svd.singular_values[3] < 1e-12 * svd.singular_values[0]);
        assert!(svd.singular_values.windows(2).all(|w| w[0] >= w[1]));
    }

    fn ones2() -> HermitianOperator {
        HermitianOperator::from_real(2, &[1.0, 1.0, 1.0, 1.0])
    }

    #[test]
    fn commutator_examples() {
        let a = HermitianOperator::diagonal(&[1.0, 2.0]);
        let zero = commutator(a.matrix(), a.matrix()).unwrap();
        assert_eq!(frobenius_norm(&zero), 0.0);

        let c1 = commutator(a.matrix(), ones2().matrix()).unwrap();
        let expected = CMatrix::from_row_slice(2, 2, &[c(0.0), c(-1.0), c(1.0), c(0.0)]);
        assert_abs_diff_eq!(frobenius_norm(&(c1 - expected)), 0.0, epsilon = 1e-15);

        let d = HermitianOperator::diagonal(&[3.0, 4.0]);
        assert_eq!(frobenius_norm(&commutator(a.matrix(), d.matrix()).unwrap()), 0.0);
    }

    #[test]
    fn commutator_rejects_mismatch() {
        let a = CMatrix::zeros(2, 2);
        let b = CMatrix::zeros(3, 3);
        assert!(matches!(
            commutator(&a, &b),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn hermitian_construction_symmetrizes_or_rejects() {
        let tol = Tolerances::default();
        let mut m = CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.5), c(0.5), c(2.0)]);
        m[(0, 1)] += Complex64::new(1e-13, 0.0);
        let op = HermitianOperator::new(m.clone(), &tol).unwrap();
        assert_eq!(op.matrix()[(0, 1)], op.matrix()[(1, 0)].conj());
        assert!(op.hermiticity_residual() > 0.0);

        m[(0, 1)] += Complex64::new(0.0, 1e-3);
        assert!(matches!(
            HermitianOperator::new(m, &tol),
            Err(Error::NotHermitian { .. })
        ));
        let rect = CMatrix::zeros(2, 3);
        assert!(matches!(
            HermitianOperator::new(rect, &tol),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn eigh_handles_complex_entries() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[c(1.0), Complex64::new(0.0, -1.0), Complex64::new(0.0, 1.0), c(1.0)],
        );
        let spec = eigh(&m);
        assert_abs_diff_eq!(spec.values[0], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(spec.values[1], 2.0, epsilon = 1e-14);
        let v = spec.vectors.column(1).into_owned();
        let mv = &m * &v;
        assert_abs_diff_eq!((mv - v * c(2.0)).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn support_projector_examples() {
        let tol = Tolerances::default();
        let p = support_projector(&HermitianOperator::diagonal(&[1.0, 0.0, 2.0]), &tol);
        assert_eq!(p.rank(), 2);
        let expected = HermitianOperator::diagonal(&[1.0, 0.0, 1.0]);
        assert_abs_diff_eq!(frobenius_norm(&(p.matrix() - expected.matrix())), 0.0, epsilon = 1e-14);

        let p = support_projector(&ones2(), &tol);
        assert_eq!(p.rank(), 1);
        let half = HermitianOperator::from_real(2, &[0.5, 0.5, 0.5, 0.5]);
        assert_abs_diff_eq!(frobenius_norm(&(p.matrix() - half.matrix())), 0.0, epsilon = 1e-14);

        let p = support_projector(&HermitianOperator::zeros(3), &tol);
        assert_eq!(p.rank(), 0);
        assert_eq!(frobenius_norm(p.matrix()), 0.0);
    }

    #[test]
    fn support_threshold_is_relative() {
        let tol = Tolerances::default();
        let tiny = HermitianOperator::diagonal(&[1e-30, 0.0, 3e-30]);
        assert_eq!(rank(&tiny, &tol), 2);
        let noisy = HermitianOperator::diagonal(&[1.0, 1e-12, 0.0]);
        assert_eq!(rank(&noisy, &tol), 1);
    }

    #[test]
    fn disjoint_supports_examples() {
        let tol = Tolerances::default();
        let e0 = HermitianOperator::diagonal(&[1.0, 0.0]);
        let e1 = HermitianOperator::diagonal(&[0.0, 1.0]);
        let r = disjoint_supports(&e0, &e1, &tol).unwrap();
        assert!(r.disjoint);
        assert_eq!(r.max_overlap, 0.0);

        let r = disjoint_supports(&e0, &ones2(), &tol).unwrap();
        assert!(r.disjoint);
        assert_abs_diff_eq!(r.max_overlap, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-14);

        let a = HermitianOperator::diagonal(&[1.0, 2.0, 0.0]);
        let r = disjoint_supports(&a, &a, &tol).unwrap();
        assert!(!r.disjoint);
        assert_abs_diff_eq!(r.max_overlap, 1.0, epsilon = 1e-12);

        assert!(disjoint_supports(&e0, &HermitianOperator::zeros(3), &tol).is_err());
    }

    #[test]
    fn relative_comm_norm_examples() {
        let a = HermitianOperator::diagonal(&[1.0, 2.0]);
        let b = ones2();
        let zero = CMatrix::zeros(2, 2);
        assert_eq!(relative_comm_norm(&zero, &[&a, &b]), 0.0);

        let cm = CMatrix::from_row_slice(2, 2, &[c(0.0), c(-2.0), c(2.0), c(0.0)]);
        let r = relative_comm_norm(&cm, &[&a, &a, &b, &a]);
        assert_abs_diff_eq!(r, 2.0 * 2f64.sqrt() / 16.0, epsilon = 1e-14);

        let z = HermitianOperator::zeros(2);
        assert_eq!(relative_comm_norm(&cm, &[&a, &z]), 0.0);
    }

    #[test]
    fn projector_checks() {
        let tol = Tolerances::default();
        let p = Projector::new(ones2().scaled(0.5).into_matrix(), &tol).unwrap();
        assert_eq!(p.rank(), 1);
        assert!(matches!(
            Projector::new(ones2().into_matrix(), &tol),
            Err(Error::NotProjector { .. })
        ));
        let basis = p.basis();
        assert_eq!(basis.ncols(), 1);
        assert_eq!(p.complement().rank(), 1);
    }

    #[test]
    fn tolerances_must_be_positive() {
        assert!(Tolerances::new(1e-10, 0.0, 1e-8, 1e-9).is_err());
        assert!(Tolerances::new(1e-10, 1e-8, 1e-8, 1e-9).is_ok());
    }
}
