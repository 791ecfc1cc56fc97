use serde::Serialize;

use usd_cbs::criteria::{
    fourth_commutator_norm, laffey_test, mutual_commutation_test, three_commutator_test,
    CriterionReport,
};
use usd_cbs::jordan::{diagonalizing_jordan_bases, extract_cbs, JordanOutcome};
use usd_cbs::operator::{disjoint_supports, rank, SupportOverlap};
use usd_cbs::oracle::{brute_force_usd, OracleOptions, OracleResult};
use usd_cbs::reductions::{reduce_tau, reduce_tau0, ReductionKind, ReductionStep, WeightedState};
use usd_cbs::usd::{
    solve_usd, BlockAssignment, BlockSource, SolveOptions, SolveOutcome, ValidationReport,
};
use usd_cbs::Tolerances;

use crate::io::{matrix_to_json, InstanceMetadata, JsonMatrix};
use crate::CliError;

/// Largest dimension the oracle cross-check accepts.
pub const ORACLE_MAX_DIM: usize = 6;

#[derive(Debug, Clone, Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

impl ToolInfo {
    pub fn current() -> Self {
        Self {
            name: "usd-cbs",
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InputSummary {
    pub dim: usize,
    pub traces: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl InputSummary {
    pub fn new(g1: &WeightedState, g2: &WeightedState, meta: Option<&InstanceMetadata>) -> Self {
        Self {
            dim: g1.dim(),
            traces: [g1.weight(), g2.weight()],
            label: meta.and_then(|m| m.label.clone()),
            seed: meta.and_then(|m| m.seed),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StageCriteria {
    pub ranks: [usize; 2],
    pub support_overlap: SupportOverlap,
    pub three_commutator: CriterionReport,
    pub laffey: CriterionReport,
    pub mutual_commutation: CriterionReport,
    pub fourth_commutator: f64,
}

impl StageCriteria {
    pub fn evaluate(g1: &WeightedState, g2: &WeightedState, tol: &Tolerances) -> Result<Self, CliError> {
        let (a, b) = (g1.gamma(), g2.gamma());
        Ok(Self {
            ranks: [rank(a, tol), rank(b, tol)],
            support_overlap: disjoint_supports(a, b, tol)?,
            three_commutator: three_commutator_test(a, b, tol)?,
            laffey: laffey_test(a, b, tol)?,
            mutual_commutation: mutual_commutation_test(&[a.clone(), b.clone()], tol)?,
            fourth_commutator: fourth_commutator_norm(a, b)?,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReductionSummary {
    pub which: ReductionKind,
    pub projector_rank: usize,
    pub traces_after: [f64; 2],
}

impl ReductionSummary {
    pub fn of(step: &ReductionStep) -> Self {
        Self {
            which: step.which,
            projector_rank: step.projector_used.rank(),
            traces_after: [step.output_pair.0.weight(), step.output_pair.1.weight()],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Input,
    Reduced,
}

#[derive(Debug, Clone, Serialize)]
pub struct JordanSummary {
    pub stage: Stage,
    pub angles: Vec<f64>,
    pub a_eigenvalues: Vec<f64>,
    pub b_eigenvalues: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockSummary {
    pub rank: usize,
    pub angle: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub tool: ToolInfo,
    pub tolerances: Tolerances,
    pub input: InputSummary,
    /// Three-commutator verdict on the pair as given.
    pub pass: bool,
    /// Three-commutator verdict after the reductions.
    pub pass_after_reduction: bool,
    pub criteria: StageCriteria,
    pub reductions: Vec<ReductionSummary>,
    pub reduced: StageCriteria,
    pub jordan: Option<JordanSummary>,
    pub blocks: Vec<BlockSummary>,
}

/// `τ0`, optionally followed by `τ1`, `τ2` and another `τ0`, on the full space.
pub fn reduce(
    g1: &WeightedState,
    g2: &WeightedState,
    tol: &Tolerances,
    tau12: bool,
) -> Result<(Vec<ReductionStep>, (WeightedState, WeightedState)), CliError> {
    let mut steps = vec![reduce_tau0(g1, g2, tol)?];
    if tau12 {
        for which in [ReductionKind::Tau1, ReductionKind::Tau2, ReductionKind::Tau0] {
            let (a, b) = steps.last().expect("non-empty").output_pair.clone();
            steps.push(if which == ReductionKind::Tau0 {
                reduce_tau0(&a, &b, tol)?
            } else {
                reduce_tau(which, &a, &b, tol)?
            });
        }
    }
    let out = steps.last().expect("non-empty").output_pair.clone();
    Ok((steps, out))
}

pub fn analyze(
    g1: &WeightedState,
    g2: &WeightedState,
    tol: &Tolerances,
    tau12: bool,
    meta: Option<&InstanceMetadata>,
) -> Result<AnalysisReport, CliError> {
    let criteria = StageCriteria::evaluate(g1, g2, tol)?;
    let (steps, (r1, r2)) = reduce(g1, g2, tol, tau12)?;
    let reduced = StageCriteria::evaluate(&r1, &r2, tol)?;

    let target = if criteria.three_commutator.pass {
        Some((Stage::Input, g1, g2))
    } else if reduced.three_commutator.pass {
        Some((Stage::Reduced, &r1, &r2))
    } else {
        None
    };
    let mut jordan = None;
    let mut blocks = Vec::new();
    if let Some((stage, a, b)) = target {
        if let JordanOutcome::Exists(djb) = diagonalizing_jordan_bases(a.gamma(), b.gamma(), tol)? {
            let cbs = extract_cbs(&djb, a.dim(), tol)?;
            blocks = cbs
                .block_ranks
                .iter()
                .zip(&cbs.angles)
                .map(|(&rank, &angle)| BlockSummary { rank, angle })
                .collect();
            jordan = Some(JordanSummary {
                stage,
                angles: djb.jordan.angles.clone(),
                a_eigenvalues: djb.a_eigenvalues.clone(),
                b_eigenvalues: djb.b_eigenvalues.clone(),
            });
        }
    }
    Ok(AnalysisReport {
        tool: ToolInfo::current(),
        tolerances: *tol,
        input: InputSummary::new(g1, g2, meta),
        pass: criteria.three_commutator.pass,
        pass_after_reduction: reduced.three_commutator.pass,
        criteria,
        reductions: steps.iter().map(ReductionSummary::of).collect(),
        reduced,
        jordan,
        blocks,
    })
}

impl AnalysisReport {
    pub fn summary(&self) -> String {
        let tc = &self.criteria.three_commutator;
        let mut s = format!(
            "dim {}  traces ({:.6}, {:.6})\nthree-commutator: {} (max norm {:.3e}, disjoint supports {})\n",
            self.input.dim,
            self.input.traces[0],
            self.input.traces[1],
            verdict(self.pass),
            tc.max_norm(),
            tc.precondition_ok
        );
        s += &format!(
            "after reductions: {} (max norm {:.3e})\n",
            verdict(self.pass_after_reduction),
            self.reduced.three_commutator.max_norm()
        );
        if let Some(j) = &self.jordan {
            s += &format!("jordan angles: {:?}\nblocks: {}\n", j.angles, self.blocks.len());
        }
        s
    }
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "fail"
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockEntry {
    pub source: BlockSource,
    pub rank: usize,
    pub ranks: [usize; 2],
    pub overlap: Option<f64>,
    pub weights: [f64; 2],
    pub failure: f64,
    pub assignment: BlockAssignment,
}

#[derive(Debug, Clone, Serialize)]
pub struct MeasurementJson {
    pub e1: JsonMatrix,
    pub e2: JsonMatrix,
    pub e_fail: JsonMatrix,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleSummary {
    pub p_succ: Option<f64>,
    pub converged: Option<bool>,
    pub certificate_gap: Option<f64>,
    pub iterations: Option<usize>,
    /// Solver minus oracle success probability.
    pub difference: Option<f64>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

impl OracleSummary {
    fn skipped(seed: u64, reason: String) -> Self {
        Self {
            p_succ: None,
            converged: None,
            certificate_gap: None,
            iterations: None,
            difference: None,
            seed,
            skipped: Some(reason),
        }
    }

    fn from_result(r: &OracleResult, solver: Option<f64>, seed: u64) -> Self {
        Self {
            p_succ: Some(r.p_succ),
            converged: Some(r.converged),
            certificate_gap: Some(r.certificate_gap),
            iterations: Some(r.iterations),
            difference: solver.map(|p| p - r.p_succ),
            seed,
            skipped: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Solved,
    Unsolvable,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub tool: ToolInfo,
    pub tolerances: Tolerances,
    pub input: InputSummary,
    pub status: SolveStatus,
    pub p_succ: Option<f64>,
    pub validation: Option<ValidationReport>,
    pub reductions: Vec<ReductionSummary>,
    pub blocks: Vec<BlockEntry>,
    /// Failing criterion when no block structure exists.
    pub criterion: Option<CriterionReport>,
    pub measurement: Option<MeasurementJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSummary>,
}

pub struct SolveSettings {
    pub tau12: bool,
    pub oracle: bool,
    pub seed: u64,
}

pub fn solve(
    g1: &WeightedState,
    g2: &WeightedState,
    tol: &Tolerances,
    settings: &SolveSettings,
    meta: Option<&InstanceMetadata>,
) -> Result<SolveReport, CliError> {
    let outcome = solve_usd(g1, g2, tol, SolveOptions::with_tau12(settings.tau12))?;
    let mut report = SolveReport {
        tool: ToolInfo::current(),
        tolerances: *tol,
        input: InputSummary::new(g1, g2, meta),
        status: SolveStatus::Unsolvable,
        p_succ: None,
        validation: None,
        reductions: Vec::new(),
        blocks: Vec::new(),
        criterion: None,
        measurement: None,
        oracle: None,
    };
    match &outcome {
        SolveOutcome::Solved(sol) => {
            report.status = SolveStatus::Solved;
            report.p_succ = Some(sol.p_succ);
            report.validation = Some(sol.validation);
            report.reductions = sol.reductions_applied.iter().map(ReductionSummary::of).collect();
            report.blocks = sol
                .block_report
                .iter()
                .map(|b| BlockEntry {
                    source: b.source,
                    rank: b.projector.rank(),
                    ranks: [b.rank_gamma1, b.rank_gamma2],
                    overlap: b.overlap,
                    weights: [b.weights.0, b.weights.1],
                    failure: b.failure,
                    assignment: b.assignment,
                })
                .collect();
            let m = &sol.measurement;
            report.measurement = Some(MeasurementJson {
                e1: matrix_to_json(m.e1.matrix()),
                e2: matrix_to_json(m.e2.matrix()),
                e_fail: matrix_to_json(m.e_fail.matrix()),
            });
        }
        SolveOutcome::Unsolvable(u) => {
            report.reductions = u.reductions_applied.iter().map(ReductionSummary::of).collect();
            report.criterion = Some(u.report.clone());
        }
    }
    if settings.oracle {
        report.oracle = Some(if g1.dim() > ORACLE_MAX_DIM {
            OracleSummary::skipped(
                settings.seed,
                format!("dimension {} exceeds {ORACLE_MAX_DIM}", g1.dim()),
            )
        } else {
            let opts = OracleOptions {
                require_disjoint: false,
                seed: settings.seed,
                ..OracleOptions::default()
            };
            let r = brute_force_usd(g1, g2, tol, opts)?;
            OracleSummary::from_result(&r, report.p_succ, settings.seed)
        });
    }
    Ok(report)
}

impl SolveReport {
    pub fn summary(&self) -> String {
        let mut s = match self.status {
            SolveStatus::Solved => format!(
                "solved: p_succ = {:.12} over {} blocks\n",
                self.p_succ.unwrap_or(0.0),
                self.blocks.len()
            ),
            SolveStatus::Unsolvable => format!(
                "unsolvable: {} max norm {:.3e}\n",
                self.criterion.as_ref().map(|c| c.criterion_name.as_str()).unwrap_or("?"),
                self.criterion.as_ref().map(|c| c.max_norm()).unwrap_or(0.0)
            ),
        };
        if let Some(o) = &self.oracle {
            match (&o.skipped, o.p_succ) {
                (Some(reason), _) => s += &format!("oracle skipped: {reason}\n"),
                (None, Some(p)) => s += &format!("oracle: p_succ = {p:.12}\n"),
                _ => {}
            }
        }
        s
    }
}
