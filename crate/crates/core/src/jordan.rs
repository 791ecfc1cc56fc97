//! Jordan (principal) bases of subspace pairs, the constructive algorithm for
//! diagonalizing Jordan bases of two self-adjoint operators, and the common
//! block structure they induce.

use std::cmp::Ordering;
use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::criteria::{three_commutator_test, CriterionReport};
use crate::error::{Error, Result};
use crate::operator::{
    commutator, disjoint_supports, eigh, frobenius_norm, inner, relative_norm_with,
    support_projector, svd_jacobi, CMatrix, CVector, HermitianOperator, Projector, Tolerances,
};

/// Residual bound for bases built from operators that passed the commutator
/// test at `tol_comm`.
const CONSTRUCTION_RESIDUAL: f64 = 1e-8;
/// Singular values of `Q_A† Q_B` below this (relative) are exact zeros.
const SVD_NULL: f64 = 1e-13;

/// Orthonormal bases `α` of `P_A ℋ` and `β` of `P_B ℋ`, stored column-wise,
/// with `⟨α_i|β_j⟩ = δ_ij cos ϑ_i` for `i, j < angles.len()` and zero for
/// every other pair.
#[derive(Debug, Clone, PartialEq)]
pub struct JordanPair {
    pub alpha: CMatrix,
    pub beta: CMatrix,
    /// Non-decreasing, in `[0, π/2]`; one per index up to the smaller rank.
    pub angles: Vec<f64>,
}

/// Worst-case deviations from the defining relations of a [`JordanPair`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JordanResiduals {
    pub alpha_orthonormality: f64,
    pub beta_orthonormality: f64,
    pub biorthogonality: f64,
    /// `max_i |⟨α_i|β_i⟩ − cos ϑ_i|`, including any imaginary part.
    pub cosine_mismatch: f64,
    pub angles_in_range: bool,
    pub angles_sorted: bool,
}

impl JordanResiduals {
    pub fn max_residual(&self) -> f64 {
        self.alpha_orthonormality
            .max(self.beta_orthonormality)
            .max(self.biorthogonality)
            .max(self.cosine_mismatch)
    }

    pub fn holds(&self, bound: f64) -> bool {
        self.max_residual() <= bound && self.angles_in_range && self.angles_sorted
    }
}

impl JordanPair {
    pub fn cosines(&self) -> Vec<f64> {
        self.angles.iter().map(|t| t.cos()).collect()
    }

    pub fn alpha_vector(&self, i: usize) -> CVector {
        self.alpha.column(i).into_owned()
    }

    pub fn beta_vector(&self, i: usize) -> CVector {
        self.beta.column(i).into_owned()
    }

    pub fn residuals(&self) -> JordanResiduals {
        let orth = |q: &CMatrix| {
            let n = q.ncols();
            frobenius_norm(&(q.adjoint() * q - CMatrix::identity(n, n)))
        };
        let gram = self.alpha.adjoint() * &self.beta;
        let mut biorthogonality = 0.0_f64;
        let mut cosine_mismatch = 0.0_f64;
        for i in 0..gram.nrows() {
            for j in 0..gram.ncols() {
                let g = gram[(i, j)];
                if i == j && i < self.angles.len() {
                    let c = Complex64::new(self.angles[i].cos(), 0.0);
                    cosine_mismatch = cosine_mismatch.max((g - c).norm());
                } else {
                    biorthogonality = biorthogonality.max(g.norm());
                }
            }
        }
        JordanResiduals {
            alpha_orthonormality: orth(&self.alpha),
            beta_orthonormality: orth(&self.beta),
            biorthogonality,
            cosine_mismatch,
            angles_in_range: self
                .angles
                .iter()
                .all(|&t| (0.0..=FRAC_PI_2).contains(&t)),
            angles_sorted: self.angles.windows(2).all(|w| w[0] <= w[1]),
        }
    }
}

fn angle_from_cosine(c: f64) -> f64 {
    c.clamp(0.0, 1.0).acos()
}

/// Orthonormal basis of the part of `span(q)` orthogonal to the columns of `taken`.
fn complement_within(q: &CMatrix, taken: &CMatrix) -> CMatrix {
    let rest = q * q.adjoint() - taken * taken.adjoint();
    let spec = eigh(&HermitianOperator::symmetrized(rest).into_matrix());
    let mut cols = spec.select(|v| v > 0.5);
    // eigh orders ascending; present the completion in descending order
    let n = cols.ncols();
    if n > 1 {
        let idx: Vec<usize> = (0..n).rev().collect();
        cols = cols.select_columns(idx.iter());
    }
    cols
}

/// Multiplies `v` by the phase that makes `⟨reference|v⟩` real and
/// non-negative.
fn align_phase(reference: &CVector, v: &mut CVector) -> f64 {
    let ov = inner(reference, v);
    let n = ov.norm();
    if n > 0.0 {
        *v *= ov.conj() / n;
    }
    n
}

/// Jordan bases of the ranges of two projectors, from the singular value
/// decomposition of `Q_A† Q_B`.
pub fn jordan_bases(pa: &Projector, pb: &Projector, _tol: &Tolerances) -> Result<JordanPair> {
    if pa.dim() != pb.dim() {
        return Err(Error::DimensionMismatch {
            expected: pa.dim(),
            found: pb.dim(),
        });
    }
    let qa = pa.basis();
    let qb = pb.basis();
    let (ra, rb) = (qa.ncols(), qb.ncols());
    if ra == 0 || rb == 0 {
        return Ok(JordanPair {
            alpha: qa,
            beta: qb,
            angles: Vec::new(),
        });
    }
    // thin SVD of the taller of Qa†Qb and Qb†Qa
    let m = qa.adjoint() * &qb;
    let swap = ra < rb;
    let svd = if swap { svd_jacobi(&m.adjoint()) } else { svd_jacobi(&m) };
    let k = ra.min(rb);
    let (q_left, q_right) = if swap { (&qb, &qa) } else { (&qa, &qb) };
    let scale = svd.singular_values.first().copied().unwrap_or(0.0).max(1.0);

    let mut left_cols = Vec::with_capacity(k);
    let mut right_cols = Vec::with_capacity(k);
    for i in 0..k {
        let right = q_right * svd.v.column(i);
        if svd.singular_values[i] > SVD_NULL * scale {
            left_cols.push(q_left * svd.u.column(i));
        }
        right_cols.push(right);
    }
    // partners of vanishing cosines: any orthonormal completion on the left side
    let good = left_cols.len();
    if good < k {
        let taken = if good == 0 {
            CMatrix::zeros(q_left.nrows(), 0)
        } else {
            CMatrix::from_columns(&left_cols)
        };
        let extra = complement_within(q_left, &taken);
        left_cols.extend(extra.columns(0, k - good).column_iter().map(|c| c.into_owned()));
    }
    let (alpha_cols, mut beta_cols) = if swap {
        (right_cols, left_cols)
    } else {
        (left_cols, right_cols)
    };
    let mut angles = Vec::with_capacity(k);
    for i in 0..k {
        let c = align_phase(&alpha_cols[i].clone(), &mut beta_cols[i]);
        angles.push(if i < good { angle_from_cosine(c) } else { FRAC_PI_2 });
    }
    let mut alpha = CMatrix::from_columns(&alpha_cols);
    let mut beta = CMatrix::from_columns(&beta_cols);
    if ra > k {
        let extra = complement_within(&qa, &alpha);
        alpha = hstack(&alpha, &extra);
    }
    if rb > k {
        let extra = complement_within(&qb, &beta);
        beta = hstack(&beta, &extra);
    }
    // monotone angles after acos
    for i in 1..angles.len() {
        if angles[i] < angles[i - 1] {
            angles[i] = angles[i - 1];
        }
    }
    Ok(JordanPair {
        alpha,
        beta,
        angles,
    })
}

fn hstack(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}

/// Orthonormal basis of `restriction`'s range made of joint eigenvectors of
/// all `ops` (restricted to that range).
///
/// Deterministic recursive refinement: diagonalize the first operator, split
/// into clusters of eigenvalues closer than `tol_rank · ‖op‖`, and
/// diagonalize the next operator inside each cluster.
pub fn simultaneous_diagonalize(
    ops: &[HermitianOperator],
    restriction: &Projector,
    tol: &Tolerances,
) -> Result<CMatrix> {
    let q = restriction.basis();
    let dim = restriction.dim();
    let restricted: Vec<CMatrix> = ops
        .iter()
        .map(|op| {
            if op.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: op.dim(),
                });
            }
            Ok(HermitianOperator::symmetrized(q.adjoint() * op.matrix() * &q).into_matrix())
        })
        .collect::<Result<_>>()?;
    let scales: Vec<f64> = restricted
        .iter()
        .map(|m| eigh(m).max_abs())
        .collect();

    for i in 0..restricted.len() {
        for j in i + 1..restricted.len() {
            let c = commutator(&restricted[i], &restricted[j])?;
            let norm = relative_norm_with(&c, &[scales[i], scales[j]]);
            if norm > tol.tol_comm {
                return Err(Error::NonCommuting {
                    label: format!("[O{i},O{j}]"),
                    norm,
                });
            }
        }
    }

    let r = q.ncols();
    let mut out = Vec::with_capacity(r);
    refine(&restricted, &scales, 0, CMatrix::identity(r, r), tol, &mut out);
    if out.is_empty() {
        return Ok(CMatrix::zeros(dim, 0));
    }
    Ok(q * CMatrix::from_columns(&out))
}

fn refine(
    ops: &[CMatrix],
    scales: &[f64],
    level: usize,
    basis: CMatrix,
    tol: &Tolerances,
    out: &mut Vec<CVector>,
) {
    if basis.ncols() == 0 {
        return;
    }
    if level == ops.len() {
        out.extend(basis.column_iter().map(|c| c.into_owned()));
        return;
    }
    let local = HermitianOperator::symmetrized(basis.adjoint() * &ops[level] * &basis).into_matrix();
    let spec = eigh(&local);
    let gap = tol.tol_rank * scales[level];
    let mut start = 0;
    for i in 1..=spec.values.len() {
        if i == spec.values.len() || spec.values[i] - spec.values[i - 1] > gap {
            let idx: Vec<usize> = (start..i).collect();
            let cluster = &basis * spec.vectors.select_columns(idx.iter());
            if cluster.ncols() == 1 {
                out.push(cluster.column(0).into_owned());
            } else {
                refine(ops, scales, level + 1, cluster, tol, out);
            }
            start = i;
        }
    }
}

/// Intermediate quantities of the construction: the joint eigenbasis `|k⟩`
/// of `A`, `ABA`, `AB²A` on `supp A`, their eigenvalues `w_k` (of `ABA`) and
/// `v_k` (of `AB²A`), and the completion vectors `|ν⟩` of `supp B` with their
/// `B`-eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct DJBConstructionTrace {
    pub k_basis: CMatrix,
    pub w_values: Vec<f64>,
    pub v_values: Vec<f64>,
    pub nu_vectors: CMatrix,
    pub b_nu: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalizingJordanBases {
    pub jordan: JordanPair,
    /// `A α_i = a_i α_i`
    pub a_eigenvalues: Vec<f64>,
    /// `B β_j = b_j β_j`
    pub b_eigenvalues: Vec<f64>,
    pub trace: DJBConstructionTrace,
}

impl DiagonalizingJordanBases {
    /// Largest `‖A α_i − a_i α_i‖` and `‖B β_j − b_j β_j‖` relative to the
    /// respective spectral norms.
    pub fn eigen_residual(&self, a: &HermitianOperator, b: &HermitianOperator) -> f64 {
        let res = |op: &HermitianOperator, basis: &CMatrix, vals: &[f64]| {
            let scale = op.spectral_norm();
            if scale == 0.0 {
                return 0.0;
            }
            (0..basis.ncols())
                .map(|i| {
                    let v = basis.column(i).into_owned();
                    (op.matrix() * &v - &v * Complex64::new(vals[i], 0.0)).norm() / scale
                })
                .fold(0.0, f64::max)
        };
        res(a, &self.jordan.alpha, &self.a_eigenvalues)
            .max(res(b, &self.jordan.beta, &self.b_eigenvalues))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum JordanOutcome {
    Exists(Box<DiagonalizingJordanBases>),
    NotExists(CriterionReport),
}

impl JordanOutcome {
    pub fn exists(&self) -> bool {
        matches!(self, JordanOutcome::Exists(_))
    }
}

/// Diagonalizing Jordan bases of two self-adjoint operators with disjoint
/// supports, or the failing criterion report when none exist.
pub fn diagonalizing_jordan_bases(
    a: &HermitianOperator,
    b: &HermitianOperator,
    tol: &Tolerances,
) -> Result<JordanOutcome> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let overlap = disjoint_supports(a, b, tol)?;
    if !overlap.disjoint {
        return Err(Error::OverlappingSupports {
            overlap: overlap.max_overlap,
        });
    }
    diagonalizing_jordan_bases_relaxed(a, b, tol)
}

/// As [`diagonalizing_jordan_bases`] without the disjoint-support
/// precondition: the construction only needs the three commutators to
/// vanish, so overlapping pairs are diagnosed instead of rejected.
pub fn diagonalizing_jordan_bases_relaxed(
    a: &HermitianOperator,
    b: &HermitianOperator,
    tol: &Tolerances,
) -> Result<JordanOutcome> {
    let report = three_commutator_test(a, b, tol)?;
    if !report.norms_within_tolerance() {
        return Ok(JordanOutcome::NotExists(report));
    }
    let djb = construct(a, b, tol)?;

    let eig_res = djb.eigen_residual(a, b);
    let jr = djb.jordan.residuals();
    if eig_res > CONSTRUCTION_RESIDUAL || !jr.holds(CONSTRUCTION_RESIDUAL) {
        return Err(Error::ToleranceBreakdown(format!(
            "diagonalizing Jordan bases violate their invariants (eigen residual {eig_res:e}, Jordan residual {:e})",
            jr.max_residual()
        )));
    }
    Ok(JordanOutcome::Exists(Box::new(djb)))
}

struct Pairing {
    alpha: CVector,
    beta: Option<CVector>,
    cosine: f64,
}

fn construct(
    a: &HermitianOperator,
    b: &HermitianOperator,
    tol: &Tolerances,
) -> Result<DiagonalizingJordanBases> {
    let (am, bm) = (a.matrix(), b.matrix());
    let b_norm = b.spectral_norm();
    let a_norm = a.spectral_norm();
    let product = |m: CMatrix, scale: f64| {
        let op = HermitianOperator::symmetrized(m);
        if op.spectral_norm() <= tol.tol_rank * scale {
            HermitianOperator::zeros(op.dim())
        } else {
            op
        }
    };
    let aba = product(am * bm * am, a_norm * a_norm * b_norm);
    let abba = product(am * bm * bm * am, a_norm * a_norm * b_norm * b_norm);

    let ga = support_projector(a, tol);
    let gb = support_projector(b, tol);
    let k_basis = simultaneous_diagonalize(&[a.clone(), aba.clone(), abba.clone()], &ga, tol)?;

    let mut w_values = Vec::with_capacity(k_basis.ncols());
    let mut v_values = Vec::with_capacity(k_basis.ncols());
    let mut pairings = Vec::with_capacity(k_basis.ncols());
    for k in k_basis.column_iter() {
        let k = k.into_owned();
        w_values.push(inner(&k, &(aba.matrix() * &k)).re);
        v_values.push(inner(&k, &(abba.matrix() * &k)).re);

        let ak = am * &k;
        let ak_norm = ak.norm();
        let alpha = &ak / Complex64::new(ak_norm, 0.0);
        let bak = bm * &ak;
        let bak_norm = bak.norm();
        let (beta, cosine) = if bak_norm > tol.tol_rank * b_norm * ak_norm {
            let mut beta = bak / Complex64::new(bak_norm, 0.0);
            let c = align_phase(&alpha, &mut beta);
            (Some(beta), c)
        } else {
            (None, 0.0)
        };
        pairings.push(Pairing {
            alpha,
            beta,
            cosine,
        });
    }

    let betas: Vec<CVector> = pairings.iter().filter_map(|p| p.beta.clone()).collect();
    let taken = if betas.is_empty() {
        CMatrix::zeros(a.dim(), 0)
    } else {
        CMatrix::from_columns(&betas)
    };
    let rest = complement_within(&gb.basis(), &taken);
    let nu_vectors = if rest.ncols() == 0 {
        rest
    } else {
        simultaneous_diagonalize(
            std::slice::from_ref(b),
            &Projector::from_orthonormal_columns(&rest),
            tol,
        )?
    };
    let b_nu: Vec<f64> = nu_vectors
        .column_iter()
        .map(|n| {
            let n = n.into_owned();
            inner(&n, &(bm * &n)).re
        })
        .collect();

    // genuine pairs by descending cosine, then α vectors whose BA|k⟩ vanished
    pairings.sort_by(|x, y| match (&x.beta, &y.beta) {
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        _ => y.cosine.total_cmp(&x.cosine),
    });
    let ra = pairings.len();
    let rb = betas.len() + nu_vectors.ncols();
    let n_angles = ra.min(rb);

    let mut alpha_cols = Vec::with_capacity(ra);
    let mut beta_cols = Vec::with_capacity(rb);
    let mut cosines = Vec::with_capacity(n_angles);
    for p in &pairings {
        alpha_cols.push(p.alpha.clone());
        if let Some(beta) = &p.beta {
            beta_cols.push(beta.clone());
            cosines.push(p.cosine);
        }
    }
    beta_cols.extend(nu_vectors.column_iter().map(|c| c.into_owned()));
    cosines.resize(n_angles, 0.0);

    let mut angles: Vec<f64> = cosines.iter().map(|&c| angle_from_cosine(c)).collect();
    for i in 1..angles.len() {
        if angles[i] < angles[i - 1] {
            angles[i] = angles[i - 1];
        }
    }
    let dim = a.dim();
    let to_matrix = |cols: &[CVector]| {
        if cols.is_empty() {
            CMatrix::zeros(dim, 0)
        } else {
            CMatrix::from_columns(cols)
        }
    };
    let alpha = to_matrix(&alpha_cols);
    let beta = to_matrix(&beta_cols);
    let a_eigenvalues = alpha_cols.iter().map(|v| inner(v, &(am * v)).re).collect();
    let b_eigenvalues = beta_cols.iter().map(|v| inner(v, &(bm * v)).re).collect();

    Ok(DiagonalizingJordanBases {
        jordan: JordanPair {
            alpha,
            beta,
            angles,
        },
        a_eigenvalues,
        b_eigenvalues,
        trace: DJBConstructionTrace {
            k_basis,
            w_values,
            v_values,
            nu_vectors,
            b_nu,
        },
    })
}

/// A projection-valued measure `{Π_k}`: mutually orthogonal projectors
/// summing to the identity.
///
/// Structures produced by [`extract_cbs`] have every rank at most two; the
/// type itself also represents coarser structures such as the trivial `{𝟙}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockStructure {
    pub projectors: Vec<Projector>,
    pub block_ranks: Vec<usize>,
    /// Jordan angle of each rank-2 block; `None` for other blocks.
    pub angles: Vec<Option<f64>>,
}

impl BlockStructure {
    pub fn new(projectors: Vec<Projector>) -> Result<Self> {
        let n = projectors.len();
        let bs = Self {
            block_ranks: projectors.iter().map(|p| p.rank()).collect(),
            angles: vec![None; n],
            projectors,
        };
        bs.validate()?;
        Ok(bs)
    }

    pub fn trivial(dim: usize) -> Self {
        Self {
            projectors: vec![Projector::identity(dim)],
            block_ranks: vec![dim],
            angles: vec![None],
        }
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.projectors.first().map(|p| p.dim()).unwrap_or(0)
    }

    pub fn max_rank(&self) -> usize {
        self.block_ranks.iter().copied().max().unwrap_or(0)
    }

    /// `max_{j≠k} ‖Π_j Π_k‖_F`
    pub fn orthogonality_residual(&self) -> f64 {
        let mut worst = 0.0_f64;
        for j in 0..self.len() {
            for k in j + 1..self.len() {
                worst = worst.max(frobenius_norm(
                    &(self.projectors[j].matrix() * self.projectors[k].matrix()),
                ));
            }
        }
        worst
    }

    /// `‖Σ Π_k − 𝟙‖_F`
    pub fn completeness_residual(&self) -> f64 {
        let d = self.dim();
        let mut sum = CMatrix::zeros(d, d);
        for p in &self.projectors {
            sum += p.matrix();
        }
        frobenius_norm(&(sum - CMatrix::identity(d, d)))
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if let Some(p) = self.projectors.iter().find(|p| p.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: p.dim(),
            });
        }
        let orth = self.orthogonality_residual();
        if orth > 1e-10 {
            return Err(Error::InvalidBlockStructure(format!(
                "blocks are not orthogonal (residual {orth:e})"
            )));
        }
        let comp = self.completeness_residual();
        if comp > 1e-9 {
            return Err(Error::InvalidBlockStructure(format!(
                "blocks do not sum to the identity (residual {comp:e})"
            )));
        }
        Ok(())
    }

    /// `max_k ‖[X, Π_k]‖_F / ‖X‖_F`, zero for `X = 0`.
    pub fn commutation_residual(&self, op: &HermitianOperator) -> f64 {
        let scale = op.frobenius_norm();
        if scale == 0.0 {
            return 0.0;
        }
        self.projectors
            .iter()
            .map(|p| frobenius_norm(&(op.matrix() * p.matrix() - p.matrix() * op.matrix())) / scale)
            .fold(0.0, f64::max)
    }

    /// Whether every listed operator commutes with every block within `bound`.
    pub fn is_cbs_of(&self, ops: &[&HermitianOperator], bound: f64) -> bool {
        ops.iter().all(|op| self.commutation_residual(op) <= bound)
    }
}

fn lexicographic(a: &CMatrix, b: &CMatrix) -> Ordering {
    for (x, y) in a.transpose().iter().zip(b.transpose().iter()) {
        match x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

/// Blocks `span{α_i, β_i}` for every Jordan pair with `0 < cos ϑ_i < 1`,
/// rank-1 blocks for every other basis vector, and rank-1 blocks spanning
/// the orthogonal complement of `supp A + supp B`.
pub fn extract_cbs(
    djb: &DiagonalizingJordanBases,
    dim: usize,
    tol: &Tolerances,
) -> Result<BlockStructure> {
    let jp = &djb.jordan;
    if jp.alpha.nrows() != dim || jp.beta.nrows() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: jp.alpha.nrows(),
        });
    }
    let zero_cos = tol.tol_rank;
    let mut blocks: Vec<(Projector, Option<f64>)> = Vec::new();
    let mut covered = CMatrix::zeros(dim, dim);
    let mut push = |cols: &[CVector], angle: Option<f64>, covered: &mut CMatrix| {
        let q = CMatrix::from_columns(cols);
        let p = Projector::from_orthonormal_columns(&q);
        *covered += p.matrix();
        blocks.push((p, angle));
    };

    let n_pairs = jp.angles.len();
    for i in 0..n_pairs {
        let alpha = jp.alpha_vector(i);
        let beta = jp.beta_vector(i);
        let c = inner(&alpha, &beta).norm();
        if c >= 1.0 - tol.tol_rank {
            return Err(Error::ToleranceBreakdown(format!(
                "Jordan pair {i} has cosine {c}, contradicting disjoint supports"
            )));
        }
        if c <= zero_cos {
            push(&[alpha], None, &mut covered);
            push(&[beta], None, &mut covered);
        } else {
            let perp = &beta - &alpha * inner(&alpha, &beta);
            let perp = &perp / Complex64::new(perp.norm(), 0.0);
            push(&[alpha, perp], Some(jp.angles[i]), &mut covered);
        }
    }
    for i in n_pairs..jp.alpha.ncols() {
        push(&[jp.alpha_vector(i)], None, &mut covered);
    }
    for i in n_pairs..jp.beta.ncols() {
        push(&[jp.beta_vector(i)], None, &mut covered);
    }
    let rest = HermitianOperator::symmetrized(CMatrix::identity(dim, dim) - &covered);
    let spec = rest.eigh();
    let complement = spec.select(|v| v > 0.5);
    for c in complement.column_iter() {
        push(&[c.into_owned()], None, &mut covered);
    }

    blocks.sort_by(|(p, ta), (q, tb)| {
        q.rank()
            .cmp(&p.rank())
            .then_with(|| {
                ta.unwrap_or(FRAC_PI_2)
                    .total_cmp(&tb.unwrap_or(FRAC_PI_2))
            })
            .then_with(|| lexicographic(p.matrix(), q.matrix()))
    });

    let bs = BlockStructure {
        block_ranks: blocks.iter().map(|(p, _)| p.rank()).collect(),
        angles: blocks.iter().map(|(_, t)| *t).collect(),
        projectors: blocks.into_iter().map(|(p, _)| p).collect(),
    };
    bs.validate().map_err(|e| {
        Error::ToleranceBreakdown(format!("extracted block structure is invalid: {e}"))
    })?;
    Ok(bs)
}
