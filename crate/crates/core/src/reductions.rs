//! Weighted states and the three success-probability preserving reductions
//! of an unambiguous discrimination problem.
//!
//! `τ0` compresses both operators onto `ker γ1 + ker γ2`; `τ1` and `τ2` pinch
//! them with the projectors onto `ker γ1 + supp γ2` and `ker γ2 + supp γ1`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jordan::BlockStructure;
use crate::operator::{
    frobenius_norm, kernel_basis, support_basis, CMatrix, HermitianOperator,
    Projector, Tolerances,
};

const TRACE_SLACK: f64 = 1e-12;
const PAIR_TRACE_SLACK: f64 = 1e-9;
const ROUTE_AGREEMENT: f64 = 1e-7;

/// `γ = p·ρ`: a positive semi-definite operator with trace at most one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedState {
    gamma: HermitianOperator,
    weight: f64,
}

impl WeightedState {
    pub fn new(gamma: HermitianOperator, tol: &Tolerances) -> Result<Self> {
        let spec = gamma.eigh();
        let min = spec.values.first().copied().unwrap_or(0.0);
        if min < -tol.tol_psd * spec.max_abs() {
            return Err(Error::NotPositive {
                min_eigenvalue: min,
            });
        }
        let weight = gamma.trace();
        if weight > 1.0 + TRACE_SLACK {
            return Err(Error::TraceExceeded { trace: weight });
        }
        Ok(Self { gamma, weight })
    }

    pub fn from_matrix(m: CMatrix, tol: &Tolerances) -> Result<Self> {
        Self::new(HermitianOperator::new(m, tol)?, tol)
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            gamma: HermitianOperator::zeros(dim),
            weight: 0.0,
        }
    }

    pub fn gamma(&self) -> &HermitianOperator {
        &self.gamma
    }

    pub fn matrix(&self) -> &CMatrix {
        self.gamma.matrix()
    }

    /// The trace `tr γ = p`.
    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn dim(&self) -> usize {
        self.gamma.dim()
    }

    /// Compression `V† γ V` by an isometry; positivity and trace bound are
    /// inherited.
    pub fn compress(&self, v: &CMatrix) -> Self {
        let gamma = self.gamma.compress(v);
        let weight = gamma.trace();
        Self { gamma, weight }
    }

    /// `P γ P`
    pub fn project(&self, p: &Projector) -> Self {
        let gamma = self.gamma.sandwich(p.matrix());
        let weight = gamma.trace();
        Self { gamma, weight }
    }

    /// Drops eigenvalues not exceeding `tol_rank·scale`, where `scale` is the
    /// norm of the operator this one was derived from; removes round-off
    /// left behind by projections onto (near-)kernels.
    pub fn truncated(&self, scale: f64, tol: &Tolerances) -> Self {
        let spec = self.gamma.eigh();
        let thr = tol.tol_rank * scale;
        let keep: Vec<usize> = (0..spec.values.len())
            .filter(|&i| spec.values[i].abs() > thr)
            .collect();
        let weights: Vec<f64> = keep.iter().map(|&i| spec.values[i]).collect();
        let gamma = HermitianOperator::from_spectrum(&weights, &spec.vectors.select_columns(keep.iter()));
        let weight = gamma.trace();
        Self { gamma, weight }
    }

    /// `P γ P + (𝟙−P) γ (𝟙−P)`
    pub fn pinch(&self, p: &Projector) -> Self {
        let q = p.complement();
        let m = p.matrix() * self.matrix() * p.matrix() + q.matrix() * self.matrix() * q.matrix();
        let gamma = HermitianOperator::symmetrized(m);
        let weight = gamma.trace();
        Self { gamma, weight }
    }
}

/// Checks that two weighted states act on the same space and that their
/// traces sum to at most one.
pub fn validate_pair(g1: &WeightedState, g2: &WeightedState) -> Result<()> {
    if g1.dim() != g2.dim() {
        return Err(Error::DimensionMismatch {
            expected: g1.dim(),
            found: g2.dim(),
        });
    }
    let total = g1.weight() + g2.weight();
    if total > 1.0 + PAIR_TRACE_SLACK {
        return Err(Error::TraceExceeded { trace: total });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReductionKind {
    Tau0,
    Tau1,
    Tau2,
}

impl ReductionKind {
    pub fn index(self) -> usize {
        match self {
            ReductionKind::Tau0 => 0,
            ReductionKind::Tau1 => 1,
            ReductionKind::Tau2 => 2,
        }
    }

    pub fn from_index(i: usize) -> Result<Self> {
        match i {
            0 => Ok(ReductionKind::Tau0),
            1 => Ok(ReductionKind::Tau1),
            2 => Ok(ReductionKind::Tau2),
            _ => Err(Error::InvalidParameter(format!("no reduction tau{i}"))),
        }
    }
}

impl std::fmt::Display for ReductionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "tau{}", self.index())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionStep {
    pub which: ReductionKind,
    pub projector_used: Projector,
    pub input_pair: (WeightedState, WeightedState),
    pub output_pair: (WeightedState, WeightedState),
    /// For `τ0`: orthonormal basis of the retained subspace, used to drop
    /// the discarded part of the space and to lift measurements back.
    pub embedding: Option<CMatrix>,
}

/// Projector onto the span of the columns of `x`, from a column-pivoted QR
/// factorization.
fn column_span(x: &CMatrix, tol: &Tolerances) -> Projector {
    let d = x.nrows();
    if x.ncols() == 0 {
        return Projector::zero(d);
    }
    let qr = x.clone().col_piv_qr();
    let r = qr.r();
    let q = qr.q();
    let diag: Vec<f64> = (0..r.nrows().min(r.ncols())).map(|i| r[(i, i)].norm()).collect();
    let lead = diag.iter().fold(0.0_f64, |m, &z| m.max(z));
    let thr = tol.tol_rank.sqrt() * lead;
    let rank = diag.iter().take_while(|&&z| z > thr).count();
    Projector::from_orthonormal_columns(&q.columns(0, rank).into_owned())
}

fn hstack(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}

/// `P_0`, `P_1` or `P_2`, computed both as the span of the two defining
/// subspaces and as the support of `2𝟙 − G1 − G2`, `𝟙 − G1 + G2` or
/// `𝟙 − G2 + G1` (`G_μ` the support projector of `γ_μ`).
pub fn projector_p(
    which: ReductionKind,
    g1: &WeightedState,
    g2: &WeightedState,
    tol: &Tolerances,
) -> Result<Projector> {
    validate_pair(g1, g2)?;
    let d = g1.dim();
    let (s1, s2) = (support_basis(g1.gamma(), tol), support_basis(g2.gamma(), tol));
    let (k1, k2) = (kernel_basis(g1.gamma(), tol), kernel_basis(g2.gamma(), tol));
    let (p1, p2) = (
        Projector::from_orthonormal_columns(&s1),
        Projector::from_orthonormal_columns(&s2),
    );
    let id = CMatrix::identity(d, d);

    let (span, combination) = match which {
        ReductionKind::Tau0 => (
            column_span(&hstack(&k1, &k2), tol),
            &id * Complex64::new(2.0, 0.0) - p1.matrix() - p2.matrix(),
        ),
        ReductionKind::Tau1 => (
            column_span(&hstack(&k1, &s2), tol),
            &id - p1.matrix() + p2.matrix(),
        ),
        ReductionKind::Tau2 => (
            column_span(&hstack(&k2, &s1), tol),
            &id - p2.matrix() + p1.matrix(),
        ),
    };
    let spec = HermitianOperator::symmetrized(combination).eigh();
    let thr = tol.tol_rank * spec.max_abs().max(1.0);
    let via_support = Projector::from_orthonormal_columns(&spec.select(|v| v > thr));
    let mismatch = frobenius_norm(&(span.matrix() - via_support.matrix()));
    if mismatch > ROUTE_AGREEMENT || span.rank() != via_support.rank() {
        return Err(Error::ToleranceBreakdown(format!(
            "projector P{} differs between routes by {mismatch:e}",
            which.index()
        )));
    }
    Ok(via_support)
}

/// Compresses both operators onto `ker γ1 + ker γ2`, after which their
/// supports intersect only in the origin.
pub fn reduce_tau0(g1: &WeightedState, g2: &WeightedState, tol: &Tolerances) -> Result<ReductionStep> {
    let p0 = projector_p(ReductionKind::Tau0, g1, g2, tol)?;
    let output_pair = (
        g1.project(&p0).truncated(g1.gamma().spectral_norm(), tol),
        g2.project(&p0).truncated(g2.gamma().spectral_norm(), tol),
    );
    Ok(ReductionStep {
        which: ReductionKind::Tau0,
        embedding: Some(p0.basis()),
        projector_used: p0,
        input_pair: (g1.clone(), g2.clone()),
        output_pair,
    })
}

/// Pinching reduction `τ1` or `τ2`.
pub fn reduce_tau(
    which: ReductionKind,
    g1: &WeightedState,
    g2: &WeightedState,
    tol: &Tolerances,
) -> Result<ReductionStep> {
    if which == ReductionKind::Tau0 {
        return Err(Error::InvalidParameter(
            "tau0 is a compression, not a pinching".into(),
        ));
    }
    let p = projector_p(which, g1, g2, tol)?;
    let output_pair = (
        g1.pinch(&p).truncated(g1.gamma().spectral_norm(), tol),
        g2.pinch(&p).truncated(g2.gamma().spectral_norm(), tol),
    );
    Ok(ReductionStep {
        which,
        projector_used: p,
        input_pair: (g1.clone(), g2.clone()),
        output_pair,
        embedding: None,
    })
}

/// Whether `cbs`, a block structure of the step's input pair, is also one of
/// its output pair.
pub fn cbs_is_preserved(step: &ReductionStep, cbs: &BlockStructure, tol: &Tolerances) -> Result<bool> {
    let (i1, i2) = &step.input_pair;
    if cbs.dim() != i1.dim() {
        return Err(Error::DimensionMismatch {
            expected: i1.dim(),
            found: cbs.dim(),
        });
    }
    let input_residual = cbs
        .commutation_residual(i1.gamma())
        .max(cbs.commutation_residual(i2.gamma()));
    if input_residual > tol.tol_comm {
        return Err(Error::InvalidBlockStructure(format!(
            "not a block structure of the input pair (residual {input_residual:e})"
        )));
    }
    let (o1, o2) = &step.output_pair;
    Ok(cbs.is_cbs_of(&[o1.gamma(), o2.gamma()], tol.tol_comm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::disjoint_supports;
    use approx::assert_abs_diff_eq;

    fn ws(diag: &[f64]) -> WeightedState {
        WeightedState::new(HermitianOperator::diagonal(diag), &Tolerances::default()).unwrap()
    }

    fn dist(a: &CMatrix, b: &CMatrix) -> f64 {
        frobenius_norm(&(a - b))
    }

    #[test]
    fn weighted_state_validation() {
        let tol = Tolerances::default();
        assert!(matches!(
            WeightedState::new(HermitianOperator::diagonal(&[0.5, -0.1]), &tol),
            Err(Error::NotPositive { .. })
        ));
        assert!(matches!(
            WeightedState::new(HermitianOperator::diagonal(&[0.7, 0.6]), &tol),
            Err(Error::TraceExceeded { .. })
        ));
        assert!(validate_pair(&ws(&[0.6, 0.0]), &ws(&[0.0, 0.6])).is_err());
    }

    #[test]
    fn p0_orthogonal_lines_is_identity() {
        let tol = Tolerances::default();
        let p0 = projector_p(ReductionKind::Tau0, &ws(&[0.5, 0.0]), &ws(&[0.0, 1.0 / 3.0]), &tol).unwrap();
        assert_abs_diff_eq!(dist(p0.matrix(), &CMatrix::identity(2, 2)), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn p0_with_full_rank_partner() {
        let tol = Tolerances::default();
        let p0 = projector_p(ReductionKind::Tau0, &ws(&[0.5, 0.0]), &ws(&[0.25, 0.25]), &tol).unwrap();
        assert_abs_diff_eq!(dist(p0.matrix(), HermitianOperator::diagonal(&[0.0, 1.0]).matrix()), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn p1_with_vanishing_second_state_is_kernel_of_first() {
        let tol = Tolerances::default();
        let g1 = ws(&[0.5, 0.0, 0.2]);
        let p1 = projector_p(ReductionKind::Tau1, &g1, &WeightedState::zero(3), &tol).unwrap();
        assert_abs_diff_eq!(dist(p1.matrix(), HermitianOperator::diagonal(&[0.0, 1.0, 0.0]).matrix()), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn tau0_examples() {
        let tol = Tolerances::default();
        let (g1, g2) = (ws(&[0.5, 0.0]), ws(&[0.0, 0.25]));
        let step = reduce_tau0(&g1, &g2, &tol).unwrap();
        assert_abs_diff_eq!(dist(step.output_pair.0.matrix(), g1.matrix()), 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(dist(step.output_pair.1.matrix(), g2.matrix()), 0.0, epsilon = 1e-10);

        let step = reduce_tau0(&ws(&[0.5, 0.0]), &ws(&[0.25, 0.25]), &tol).unwrap();
        assert_abs_diff_eq!(frobenius_norm(step.output_pair.0.matrix()), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            dist(step.output_pair.1.matrix(), HermitianOperator::diagonal(&[0.0, 0.25]).matrix()),
            0.0,
            epsilon = 1e-12
        );
        assert_eq!(step.embedding.as_ref().unwrap().ncols(), 1);
        let o = &step.output_pair;
        assert!(disjoint_supports(o.0.gamma(), o.1.gamma(), &tol).unwrap().disjoint);
    }

    #[test]
    fn tau1_with_vanishing_second_state_is_identity() {
        let tol = Tolerances::default();
        let g1 = WeightedState::new(
            HermitianOperator::from_real(3, &[0.2, 0.1, 0.0, 0.1, 0.3, 0.0, 0.0, 0.0, 0.0]),
            &tol,
        )
        .unwrap();
        let step = reduce_tau(ReductionKind::Tau1, &g1, &WeightedState::zero(3), &tol).unwrap();
        assert_abs_diff_eq!(dist(step.output_pair.0.matrix(), g1.matrix()), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn pinching_fixes_pairs_commuting_with_the_projector() {
        let tol = Tolerances::default();
        let (g1, g2) = (ws(&[0.2, 0.1, 0.0]), ws(&[0.0, 0.0, 0.3]));
        for which in [ReductionKind::Tau1, ReductionKind::Tau2] {
            let step = reduce_tau(which, &g1, &g2, &tol).unwrap();
            assert_abs_diff_eq!(dist(step.output_pair.0.matrix(), g1.matrix()), 0.0, epsilon = 1e-10);
            assert_abs_diff_eq!(dist(step.output_pair.1.matrix(), g2.matrix()), 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn pinching_matches_entrywise_recomputation() {
        let tol = Tolerances::default();
        let mut rng = crate::random::seeded(17);
        let a = crate::random::psd(4, 2, 0.1, 1.0, &mut rng).scaled(0.2);
        let b = crate::random::psd(4, 3, 0.1, 1.0, &mut rng).scaled(0.1);
        let (g1, g2) = (WeightedState::new(a, &tol).unwrap(), WeightedState::new(b, &tol).unwrap());
        for which in [ReductionKind::Tau1, ReductionKind::Tau2] {
            let step = reduce_tau(which, &g1, &g2, &tol).unwrap();
            let p = step.projector_used.matrix();
            let q = CMatrix::identity(4, 4) - p;
            for (input, output) in [(&g1, &step.output_pair.0), (&g2, &step.output_pair.1)] {
                let g = input.matrix();
                let mut worst = 0.0_f64;
                for i in 0..4 {
                    for j in 0..4 {
                        let mut want = Complex64::new(0.0, 0.0);
                        for k in 0..4 {
                            for l in 0..4 {
                                want += p[(i, k)] * g[(k, l)] * p[(l, j)] + q[(i, k)] * g[(k, l)] * q[(l, j)];
                            }
                        }
                        worst = worst.max((output.matrix()[(i, j)] - want).norm());
                    }
                }
                assert!(worst < 1e-12, "{which:?}: {worst:e}");
            }
        }
    }

    #[test]
    fn comparison_instance_is_fixed_by_tau0() {
        let tol = Tolerances::default();
        let (g1, g2) = crate::comparison::two_out_of_n_instance(3, std::f64::consts::FRAC_PI_4).unwrap();
        let step = reduce_tau0(&g1, &g2, &tol).unwrap();
        assert!(dist(step.output_pair.0.matrix(), g1.matrix()) < 1e-10);
        assert!(dist(step.output_pair.1.matrix(), g2.matrix()) < 1e-10);
    }

    #[test]
    fn reduce_tau_rejects_tau0() {
        let tol = Tolerances::default();
        assert!(reduce_tau(ReductionKind::Tau0, &ws(&[0.1]), &ws(&[0.1]), &tol).is_err());
    }

    #[test]
    fn trivial_cbs_is_always_preserved() {
        let tol = Tolerances::default();
        let step = reduce_tau0(&ws(&[0.5, 0.0]), &ws(&[0.25, 0.25]), &tol).unwrap();
        assert!(cbs_is_preserved(&step, &BlockStructure::trivial(2), &tol).unwrap());
    }

    #[test]
    fn invalid_cbs_is_rejected() {
        let tol = Tolerances::default();
        let g1 = WeightedState::new(HermitianOperator::from_real(2, &[0.25, 0.25, 0.25, 0.25]), &tol).unwrap();
        let step = reduce_tau0(&g1, &WeightedState::zero(2), &tol).unwrap();
        let axes = BlockStructure::new(vec![
            Projector::from_orthonormal_columns(&CMatrix::identity(2, 2).columns(0, 1).into_owned()),
            Projector::from_orthonormal_columns(&CMatrix::identity(2, 2).columns(1, 1).into_owned()),
        ])
        .unwrap();
        assert!(matches!(
            cbs_is_preserved(&step, &axes, &tol),
            Err(Error::InvalidBlockStructure(_))
        ));
    }
}
