//! Optimal unambiguous discrimination of two weighted states that share a
//! two-dimensional common block structure.
//!
//! Each block carries at most one pure state of each kind. Blocks holding
//! both are solved with the two-pure-state optimum; blocks holding one state
//! are identified perfectly; empty blocks go to the inconclusive outcome.
//! The assembled measurement is lifted back through the reductions applied
//! before the structure was extracted.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::criteria::{three_commutator_test, CriterionReport};
use crate::error::{Error, Result};
use crate::jordan::{diagonalizing_jordan_bases, extract_cbs, BlockStructure, JordanOutcome};
use crate::operator::{
    frobenius_norm, inner, outer, CMatrix, CVector, HermitianOperator, Projector, Tolerances,
};
use crate::reductions::{reduce_tau, reduce_tau0, validate_pair, ReductionKind, ReductionStep, WeightedState};

const COMPLETENESS_BOUND: f64 = 1e-8;
const ERROR_TRACE_BOUND: f64 = 1e-9;
const P_SUCC_CONSISTENCY: f64 = 1e-10;

/// POVM `{E_1, E_2, E_?}`.
#[derive(Debug, Clone, PartialEq)]
pub struct USDMeasurement {
    pub e1: HermitianOperator,
    pub e2: HermitianOperator,
    pub e_fail: HermitianOperator,
}

impl USDMeasurement {
    /// The measurement that never answers.
    pub fn always_inconclusive(dim: usize) -> Self {
        Self {
            e1: HermitianOperator::zeros(dim),
            e2: HermitianOperator::zeros(dim),
            e_fail: HermitianOperator::identity(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.e1.dim()
    }

    /// `‖E_1 + E_2 + E_? − 𝟙‖_F`
    pub fn completeness_residual(&self) -> f64 {
        let d = self.dim();
        frobenius_norm(
            &(self.e1.matrix() + self.e2.matrix() + self.e_fail.matrix() - CMatrix::identity(d, d)),
        )
    }

    /// `tr(E_1 γ_1) + tr(E_2 γ_2)`
    pub fn success_probability(&self, g1: &WeightedState, g2: &WeightedState) -> f64 {
        trace_product(self.e1.matrix(), g1.matrix()) + trace_product(self.e2.matrix(), g2.matrix())
    }
}

fn trace_product(a: &CMatrix, b: &CMatrix) -> f64 {
    (a * b).trace().re
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub min_eigenvalue_e1: f64,
    pub min_eigenvalue_e2: f64,
    pub min_eigenvalue_e_fail: f64,
    pub completeness_residual: f64,
    /// `tr(E_1 γ_2)`
    pub error_trace_12: f64,
    /// `tr(E_2 γ_1)`
    pub error_trace_21: f64,
    pub p_succ: f64,
    pub pass: bool,
}

/// Checks positivity, completeness and the two zero-error conditions.
pub fn validate(
    measurement: &USDMeasurement,
    g1: &WeightedState,
    g2: &WeightedState,
    tol: &Tolerances,
) -> Result<ValidationReport> {
    validate_pair(g1, g2)?;
    if measurement.dim() != g1.dim() {
        return Err(Error::DimensionMismatch {
            expected: g1.dim(),
            found: measurement.dim(),
        });
    }
    let spec1 = measurement.e1.eigh();
    let spec2 = measurement.e2.eigh();
    let spec_f = measurement.e_fail.eigh();
    let min = |s: &crate::operator::Spectrum| s.values.first().copied().unwrap_or(0.0);
    let scale = spec1.max_abs().max(spec2.max_abs()).max(spec_f.max_abs()).max(1.0);

    let report_min = (min(&spec1), min(&spec2), min(&spec_f));
    let completeness_residual = measurement.completeness_residual();
    let error_trace_12 = trace_product(measurement.e1.matrix(), g2.matrix());
    let error_trace_21 = trace_product(measurement.e2.matrix(), g1.matrix());
    let floor = -tol.tol_psd * scale;
    let pass = report_min.0 >= floor
        && report_min.1 >= floor
        && report_min.2 >= floor
        && completeness_residual <= COMPLETENESS_BOUND
        && error_trace_12.abs() <= ERROR_TRACE_BOUND
        && error_trace_21.abs() <= ERROR_TRACE_BOUND;
    Ok(ValidationReport {
        min_eigenvalue_e1: report_min.0,
        min_eigenvalue_e2: report_min.1,
        min_eigenvalue_e_fail: report_min.2,
        completeness_residual,
        error_trace_12,
        error_trace_21,
        p_succ: measurement.success_probability(g1, g2),
        pass,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PureRegime {
    /// Both states identified with non-zero probability.
    Interior,
    /// Projective measurement identifying only the first state.
    FirstOnly,
    /// Projective measurement identifying only the second state.
    SecondOnly,
}

/// Optimal failure probability for weighted pure states `a1·|u⟩`, `a2·|v⟩`
/// with overlap `s = |⟨u|v⟩|`.
///
/// `q = 2√(a1 a2)·s` when `s ≤ √(a2/a1) ≤ 1/s`, otherwise
/// `q = min(a1,a2) + max(a1,a2)·s²`.
pub fn pure_pair_failure(a1: f64, a2: f64, s: f64) -> (f64, PureRegime) {
    let s2 = s * s;
    if a2 < a1 * s2 {
        (a1 * s2 + a2, PureRegime::FirstOnly)
    } else if a1 < a2 * s2 {
        (a2 * s2 + a1, PureRegime::SecondOnly)
    } else {
        (2.0 * (a1 * a2).sqrt() * s, PureRegime::Interior)
    }
}

/// POVM elements of one block (embedded in the full space) and the failure
/// probability they achieve.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalPovm {
    pub e1: CMatrix,
    pub e2: CMatrix,
    pub e_fail: CMatrix,
    pub failure: f64,
    pub overlap: f64,
    pub regime: PureRegime,
}

/// Optimal unambiguous measurement for the weighted pure states
/// `a1·|u⟩⟨u|` and `a2·|v⟩⟨v|` on the plane spanned by `u` and `v`.
pub fn pure_block_usd(u: &CVector, v: &CVector, a1: f64, a2: f64, tol: &Tolerances) -> Result<LocalPovm> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    if !(a1 > 0.0 && a2 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "weights must be positive, got ({a1}, {a2})"
        )));
    }
    let u = u / Complex64::new(u.norm(), 0.0);
    let v = v / Complex64::new(v.norm(), 0.0);
    let uv = inner(&u, &v);
    let s = uv.norm();
    if s >= 1.0 - tol.tol_rank {
        return Err(Error::IndistinguishableStates { overlap: s });
    }
    let sin2 = 1.0 - s * s;
    // unit vectors of the plane orthogonal to v and to u
    let v_perp = (&u - &v * uv.conj()) / Complex64::new(sin2.sqrt(), 0.0);
    let u_perp = (&v - &u * uv) / Complex64::new(sin2.sqrt(), 0.0);

    let (failure, regime) = pure_pair_failure(a1, a2, s);
    let (c1, c2) = match regime {
        PureRegime::FirstOnly => (1.0, 0.0),
        PureRegime::SecondOnly => (0.0, 1.0),
        PureRegime::Interior => {
            let r = (a2 / a1).sqrt();
            ((1.0 - r * s) / sin2, (1.0 - s / r) / sin2)
        }
    };
    let e1 = outer(&v_perp, &v_perp) * Complex64::new(c1, 0.0);
    let e2 = outer(&u_perp, &u_perp) * Complex64::new(c2, 0.0);
    let plane = outer(&u, &u) + outer(&u_perp, &u_perp);
    let e_fail = HermitianOperator::symmetrized(&plane - &e1 - &e2);
    let min = e_fail.min_eigenvalue();
    if min < -tol.tol_psd {
        return Err(Error::ToleranceBreakdown(format!(
            "inconclusive element of a pure block is not positive (eigenvalue {min:e})"
        )));
    }
    Ok(LocalPovm {
        e1,
        e2,
        e_fail: e_fail.into_matrix(),
        failure,
        overlap: s,
        regime,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockAssignment {
    Inconclusive,
    First,
    Second,
    PurePair(PureRegime),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockSource {
    /// A block of the extracted common block structure.
    Structure,
    /// A subspace settled by a reduction before the structure was extracted.
    Reduction(ReductionKind),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockReport {
    pub source: BlockSource,
    /// Block projector on the original space.
    pub projector: Projector,
    pub rank_gamma1: usize,
    pub rank_gamma2: usize,
    pub overlap: Option<f64>,
    /// `tr(Π γ_1 Π)`, `tr(Π γ_2 Π)`
    pub weights: (f64, f64),
    pub failure: f64,
    pub assignment: BlockAssignment,
}

#[derive(Debug, Clone, PartialEq)]
pub struct USDSolution {
    pub measurement: USDMeasurement,
    pub p_succ: f64,
    pub block_report: Vec<BlockReport>,
    pub reductions_applied: Vec<ReductionStep>,
    /// Structure found on the reduced space (after all reductions).
    pub cbs: BlockStructure,
    pub validation: ValidationReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Unsolvable {
    pub report: CriterionReport,
    pub reductions_applied: Vec<ReductionStep>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveOutcome {
    Solved(Box<USDSolution>),
    Unsolvable(Box<Unsolvable>),
}

impl SolveOutcome {
    pub fn solution(&self) -> Option<&USDSolution> {
        match self {
            SolveOutcome::Solved(s) => Some(s),
            SolveOutcome::Unsolvable(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveOptions {
    /// Also apply the pinching reductions `τ1`, `τ2`.
    pub apply_tau12: bool,
    /// How many `τ1, τ2` passes to make when enabled.
    pub tau12_rounds: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            apply_tau12: false,
            tau12_rounds: 1,
        }
    }
}

impl SolveOptions {
    pub fn with_tau12(apply: bool) -> Self {
        Self {
            apply_tau12: apply,
            ..Self::default()
        }
    }
}

/// Working problem: the current pair on a subspace of the original space,
/// the isometry embedding that subspace, and the already-settled parts of the
/// measurement.
struct Frame {
    isometry: CMatrix,
    pair: (WeightedState, WeightedState),
    e1: CMatrix,
    e2: CMatrix,
    e_fail: CMatrix,
    blocks: Vec<BlockReport>,
    steps: Vec<ReductionStep>,
}

impl Frame {
    fn lift(&self, m: &CMatrix) -> CMatrix {
        &self.isometry * m * self.isometry.adjoint()
    }

    /// Restricts the working space to the range of `keep`, settling its
    /// complement with `assignment`.
    fn restrict(
        &mut self,
        keep: &Projector,
        assignment: BlockAssignment,
        source: BlockSource,
        originals: (&WeightedState, &WeightedState),
        tol: &Tolerances,
    ) {
        let dropped = keep.complement();
        if dropped.rank() > 0 {
            let lifted = self.lift(dropped.matrix());
            let (w1, w2) = (
                trace_product(&lifted, originals.0.matrix()),
                trace_product(&lifted, originals.1.matrix()),
            );
            let failure = match assignment {
                BlockAssignment::First => w2,
                BlockAssignment::Second => w1,
                _ => w1 + w2,
            };
            match assignment {
                BlockAssignment::First => self.e1 += &lifted,
                BlockAssignment::Second => self.e2 += &lifted,
                _ => self.e_fail += &lifted,
            }
            self.blocks.push(BlockReport {
                source,
                projector: Projector::from_orthonormal_columns(&(&self.isometry * dropped.basis())),
                rank_gamma1: 0,
                rank_gamma2: 0,
                overlap: None,
                weights: (w1, w2),
                failure,
                assignment,
            });
        }
        let v = keep.basis();
        self.pair = (
            self.pair.0.compress(&v).truncated(originals.0.gamma().spectral_norm(), tol),
            self.pair.1.compress(&v).truncated(originals.1.gamma().spectral_norm(), tol),
        );
        self.isometry = &self.isometry * v;
    }
}

/// Solves the discrimination of `g1` against `g2` block by block, or reports
/// why no two-dimensional block structure exists after the reductions.
pub fn solve_usd(
    g1: &WeightedState,
    g2: &WeightedState,
    tol: &Tolerances,
    options: SolveOptions,
) -> Result<SolveOutcome> {
    validate_pair(g1, g2)?;
    let d = g1.dim();
    let mut frame = Frame {
        isometry: CMatrix::identity(d, d),
        pair: (g1.clone(), g2.clone()),
        e1: CMatrix::zeros(d, d),
        e2: CMatrix::zeros(d, d),
        e_fail: CMatrix::zeros(d, d),
        blocks: Vec::new(),
        steps: Vec::new(),
    };

    apply_tau0(&mut frame, tol, (g1, g2))?;
    if options.apply_tau12 {
        for _ in 0..options.tau12_rounds {
            for which in [ReductionKind::Tau1, ReductionKind::Tau2] {
                let step = reduce_tau(which, &frame.pair.0, &frame.pair.1, tol)?;
                let keep = step.projector_used.clone();
                frame.steps.push(step);
                // the pinched-off part holds only the state of the same index
                let assignment = if which == ReductionKind::Tau1 {
                    BlockAssignment::First
                } else {
                    BlockAssignment::Second
                };
                frame.restrict(&keep, assignment, BlockSource::Reduction(which), (g1, g2), tol);
            }
            apply_tau0(&mut frame, tol, (g1, g2))?;
        }
    }

    let (w1, w2) = frame.pair.clone();
    let r = w1.dim();
    let cbs = if r == 0 {
        BlockStructure {
            projectors: Vec::new(),
            block_ranks: Vec::new(),
            angles: Vec::new(),
        }
    } else {
        let report = three_commutator_test(w1.gamma(), w2.gamma(), tol)?;
        if !report.pass {
            return Ok(SolveOutcome::Unsolvable(Box::new(Unsolvable {
                report,
                reductions_applied: frame.steps,
            })));
        }
        let djb = match diagonalizing_jordan_bases(w1.gamma(), w2.gamma(), tol)? {
            JordanOutcome::Exists(djb) => djb,
            JordanOutcome::NotExists(report) => {
                return Ok(SolveOutcome::Unsolvable(Box::new(Unsolvable {
                    report,
                    reductions_applied: frame.steps,
                })))
            }
        };
        extract_cbs(&djb, r, tol)?
    };

    let norms = (w1.gamma().spectral_norm(), w2.gamma().spectral_norm());
    let mut block_success = 0.0;
    for p in &cbs.projectors {
        let br = solve_block(p, &w1, &w2, norms, tol, &mut frame)?;
        block_success += br.weights.0 + br.weights.1 - br.failure;
        frame.blocks.push(br);
    }
    for b in frame.blocks.iter().filter(|b| b.source != BlockSource::Structure) {
        block_success += b.weights.0 + b.weights.1 - b.failure;
    }

    let measurement = USDMeasurement {
        e1: HermitianOperator::symmetrized(frame.e1),
        e2: HermitianOperator::symmetrized(frame.e2),
        e_fail: HermitianOperator::symmetrized(frame.e_fail),
    };
    let validation = validate(&measurement, g1, g2, tol)?;
    if !validation.pass {
        return Err(Error::ToleranceBreakdown(format!(
            "assembled measurement fails validation: {validation:?}"
        )));
    }
    let p_succ = validation.p_succ;
    if (p_succ - block_success).abs() > P_SUCC_CONSISTENCY {
        return Err(Error::ToleranceBreakdown(format!(
            "success probability {p_succ} disagrees with the block sum {block_success}"
        )));
    }
    Ok(SolveOutcome::Solved(Box::new(USDSolution {
        measurement,
        p_succ,
        block_report: frame.blocks,
        reductions_applied: frame.steps,
        cbs,
        validation,
    })))
}

fn apply_tau0(frame: &mut Frame, tol: &Tolerances, originals: (&WeightedState, &WeightedState)) -> Result<()> {
    let step = reduce_tau0(&frame.pair.0, &frame.pair.1, tol)?;
    let keep = step.projector_used.clone();
    frame.steps.push(step);
    // the discarded part is the intersection of the supports
    frame.restrict(
        &keep,
        BlockAssignment::Inconclusive,
        BlockSource::Reduction(ReductionKind::Tau0),
        originals,
        tol,
    );
    Ok(())
}

/// Top eigenvector and rank of `Π γ Π`, ranks counted against the norm of
/// the whole operator.
fn local_state(p: &Projector, g: &WeightedState, global_norm: f64, tol: &Tolerances) -> (usize, Option<CVector>, f64) {
    let local = g.gamma().sandwich(p.matrix());
    let spec = local.eigh();
    let thr = tol.tol_rank * global_norm;
    let rank = spec.values.iter().filter(|v| v.abs() > thr).count();
    let top = spec
        .values
        .last()
        .filter(|_| rank > 0)
        .map(|_| spec.vectors.column(spec.values.len() - 1).into_owned());
    (rank, top, local.trace())
}

fn solve_block(
    p: &Projector,
    w1: &WeightedState,
    w2: &WeightedState,
    norms: (f64, f64),
    tol: &Tolerances,
    frame: &mut Frame,
) -> Result<BlockReport> {
    let (r1, u, a1) = local_state(p, w1, norms.0, tol);
    let (r2, v, a2) = local_state(p, w2, norms.1, tol);
    let lifted = frame.lift(p.matrix());
    let (assignment, failure, overlap) = match (r1, r2) {
        (0, 0) => {
            frame.e_fail += &lifted;
            (BlockAssignment::Inconclusive, a1 + a2, None)
        }
        (_, 0) => {
            frame.e1 += &lifted;
            (BlockAssignment::First, a2, None)
        }
        (0, _) => {
            frame.e2 += &lifted;
            (BlockAssignment::Second, a1, None)
        }
        (1, 1) => {
            let (u, v) = (u.expect("rank one"), v.expect("rank one"));
            let local = pure_block_usd(&u, &v, a1, a2, tol)?;
            frame.e1 += frame.lift(&local.e1);
            frame.e2 += frame.lift(&local.e2);
            frame.e_fail += frame.lift(&local.e_fail);
            // a block wider than span{u, v} would leave part of it unassigned
            let leftover = frobenius_norm(&(p.matrix() - plane_projector(&u, &v)));
            if leftover > COMPLETENESS_BOUND.sqrt() {
                return Err(Error::ToleranceBreakdown(format!(
                    "pure block is not spanned by its two states (residual {leftover:e})"
                )));
            }
            (BlockAssignment::PurePair(local.regime), local.failure, Some(local.overlap))
        }
        _ => {
            return Err(Error::ToleranceBreakdown(format!(
                "block holds ranks ({r1}, {r2}), too many for a two-dimensional block with disjoint supports"
            )))
        }
    };
    Ok(BlockReport {
        source: BlockSource::Structure,
        projector: Projector::from_orthonormal_columns(&(&frame.isometry * p.basis())),
        rank_gamma1: r1,
        rank_gamma2: r2,
        overlap,
        weights: (a1, a2),
        failure,
        assignment,
    })
}

/// Projector onto span{u, v} for unit `u`.
fn plane_projector(u: &CVector, v: &CVector) -> CMatrix {
    let w = v - u * inner(u, v);
    let n = w.norm();
    let mut p = outer(u, u);
    if n > 0.0 {
        let w = w / Complex64::new(n, 0.0);
        p += outer(&w, &w);
    }
    p
}
