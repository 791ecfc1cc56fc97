//! Reference machinery for tests: a direct numerical optimizer for
//! unambiguous discrimination at small dimension, and generators of random
//! pairs with a known two-dimensional block structure.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::jordan::BlockStructure;
use crate::operator::{
    disjoint_supports, eigh, kernel_basis, outer, CMatrix, CVector, HermitianOperator, Projector,
    Spectrum, Tolerances,
};
use crate::random::{hermitian, seeded, unitary, SeededRng};
use crate::reductions::{validate_pair, WeightedState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    /// Target bound on the duality gap.
    pub precision: f64,
    pub starts: usize,
    pub max_dim: usize,
    pub require_disjoint: bool,
    pub seed: u64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            precision: 1e-6,
            starts: 8,
            max_dim: 6,
            require_disjoint: true,
            seed: 0,
        }
    }
}

impl OracleOptions {
    pub fn with_precision(precision: f64) -> Self {
        Self {
            precision,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleResult {
    pub p_succ: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Upper bound on `p_opt − p_succ`.
    pub certificate_gap: f64,
    /// Spread of the per-start values.
    pub start_spread: f64,
}

/// Orthonormal basis of `m×m` Hermitian matrices under `⟨X,Y⟩ = tr(XY)`.
fn hermitian_basis(m: usize) -> Vec<CMatrix> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut basis = Vec::with_capacity(m * m);
    for k in 0..m {
        let mut e = CMatrix::zeros(m, m);
        e[(k, k)] = Complex64::new(1.0, 0.0);
        basis.push(e);
    }
    for k in 0..m {
        for l in k + 1..m {
            let mut s = CMatrix::zeros(m, m);
            s[(k, l)] = Complex64::new(r, 0.0);
            s[(l, k)] = Complex64::new(r, 0.0);
            basis.push(s);
            let mut a = CMatrix::zeros(m, m);
            a[(k, l)] = Complex64::new(0.0, r);
            a[(l, k)] = Complex64::new(0.0, -r);
            basis.push(a);
        }
    }
    basis
}

/// `tr(XY)` for Hermitian `X`, `Y`.
fn tr_prod(x: &CMatrix, y: &CMatrix) -> f64 {
    x.iter().zip(y.transpose().iter()).map(|(a, b)| (a * b).re).sum()
}

/// Spectrum of a positive definite matrix, `None` otherwise.
fn pd_spectrum(m: &CMatrix) -> Option<Spectrum> {
    let spec = eigh(&((m + m.adjoint()) * Complex64::new(0.5, 0.0)));
    let floor = f64::EPSILON * spec.max_abs();
    spec.values.iter().all(|&v| v > floor).then_some(spec)
}

fn inverse_if_pd(m: &CMatrix) -> Option<CMatrix> {
    if m.nrows() == 0 {
        return Some(CMatrix::zeros(0, 0));
    }
    let spec = pd_spectrum(m)?;
    let inv: Vec<f64> = spec.values.iter().map(|v| v.recip()).collect();
    Some(HermitianOperator::from_spectrum(&inv, &spec.vectors).into_matrix())
}

fn log_det_pd(m: &CMatrix) -> Option<f64> {
    if m.nrows() == 0 {
        return Some(0.0);
    }
    Some(pd_spectrum(m)?.values.iter().map(|v| v.ln()).sum())
}

/// The barrier problem over `E_1 = V_2 X_1 V_2†`, `E_2 = V_1 X_2 V_1†`,
/// where `V_μ` spans `ker γ_μ`.
struct Problem {
    dim: usize,
    /// Lifted basis directions for all coordinates.
    lifted: Vec<CMatrix>,
    /// Local basis directions with the block they belong to.
    local: Vec<(usize, CMatrix)>,
    block_dims: [usize; 2],
    /// Objective gradient `tr(G_i γ_μ)`.
    cost: DVector<f64>,
}

struct Point {
    x: [CMatrix; 2],
    slack: CMatrix,
}

impl Problem {
    fn new(g1: &WeightedState, g2: &WeightedState, tol: &Tolerances) -> Self {
        let dim = g1.dim();
        // X_1 lives on ker γ2, X_2 on ker γ1
        let v = [kernel_basis(g2.gamma(), tol), kernel_basis(g1.gamma(), tol)];
        let gammas = [g1.matrix(), g2.matrix()];
        let mut lifted = Vec::new();
        let mut local = Vec::new();
        let mut cost = Vec::new();
        for mu in 0..2 {
            for h in hermitian_basis(v[mu].ncols()) {
                let g = &v[mu] * &h * v[mu].adjoint();
                cost.push(tr_prod(&g, gammas[mu]));
                lifted.push(g);
                local.push((mu, h));
            }
        }
        Self {
            dim,
            lifted,
            local,
            block_dims: [v[0].ncols(), v[1].ncols()],
            cost: DVector::from_vec(cost),
        }
    }

    fn n(&self) -> usize {
        self.lifted.len()
    }

    /// Number of logarithmic barrier terms, weighted by their dimensions.
    fn barrier_degree(&self) -> f64 {
        (self.block_dims[0] + self.block_dims[1] + self.dim) as f64
    }

    fn point(&self, z: &DVector<f64>) -> Point {
        let mut x = [
            CMatrix::zeros(self.block_dims[0], self.block_dims[0]),
            CMatrix::zeros(self.block_dims[1], self.block_dims[1]),
        ];
        let mut slack = CMatrix::identity(self.dim, self.dim);
        for (i, (mu, h)) in self.local.iter().enumerate() {
            let c = Complex64::new(z[i], 0.0);
            x[*mu] += h * c;
            slack -= &self.lifted[i] * c;
        }
        Point { x, slack }
    }

    fn barrier_value(&self, z: &DVector<f64>, t: f64) -> Option<f64> {
        let p = self.point(z);
        let l0 = log_det_pd(&p.x[0])?;
        let l1 = log_det_pd(&p.x[1])?;
        let ls = log_det_pd(&p.slack)?;
        Some(t * self.cost.dot(z) + l0 + l1 + ls)
    }

    /// Gradient and Hessian of `t·f + Σ log det`.
    fn derivatives(&self, z: &DVector<f64>, t: f64) -> Option<(DVector<f64>, DMatrix<f64>)> {
        let p = self.point(z);
        let xinv = [inverse_if_pd(&p.x[0])?, inverse_if_pd(&p.x[1])?];
        let sinv = inverse_if_pd(&p.slack)?;
        let n = self.n();
        let mut grad = &self.cost * t;
        let mut hess = DMatrix::<f64>::zeros(n, n);

        let s_dirs: Vec<CMatrix> = self.lifted.iter().map(|g| &sinv * g * &sinv).collect();
        let x_dirs: Vec<CMatrix> = self
            .local
            .iter()
            .map(|(mu, h)| &xinv[*mu] * h * &xinv[*mu])
            .collect();
        for i in 0..n {
            let (mu_i, h_i) = &self.local[i];
            grad[i] += tr_prod(&xinv[*mu_i], h_i) - tr_prod(&sinv, &self.lifted[i]);
            for j in 0..=i {
                let (mu_j, h_j) = &self.local[j];
                let mut v = -tr_prod(&s_dirs[i], &self.lifted[j]);
                if mu_i == mu_j {
                    v -= tr_prod(&x_dirs[i], h_j);
                }
                hess[(i, j)] = v;
                hess[(j, i)] = v;
            }
        }
        Some((grad, hess))
    }

    fn objective(&self, z: &DVector<f64>) -> f64 {
        self.cost.dot(z)
    }

    /// Interior point `X_μ = ρ_μ` with `‖ρ_μ‖ ≤ 0.45`, so the slack is at least `0.1·𝟙`.
    fn random_start(&self, rng: &mut SeededRng, first: bool) -> DVector<f64> {
        let mut z = DVector::zeros(self.n());
        let mut offset = 0;
        for mu in 0..2 {
            let m = self.block_dims[mu];
            if m == 0 {
                continue;
            }
            let x = if first {
                CMatrix::identity(m, m) * Complex64::new(0.25, 0.0)
            } else {
                let u = unitary(m, rng);
                let w: Vec<f64> = (0..m).map(|_| rng.random_range(0.05..=0.45)).collect();
                HermitianOperator::from_spectrum(&w, &u).into_matrix()
            };
            for (k, h) in hermitian_basis(m).iter().enumerate() {
                z[offset + k] = tr_prod(h, &x);
            }
            offset += m * m;
        }
        z
    }
}

const NEWTON_DECREMENT: f64 = 1e-11;
const MAX_NEWTON: usize = 200;
const BARRIER_GROWTH: f64 = 10.0;

struct Run {
    value: f64,
    iterations: usize,
    gap: f64,
    centered: bool,
}

fn barrier_run(problem: &Problem, mut z: DVector<f64>, precision: f64) -> Run {
    let m = problem.barrier_degree();
    let mut t = 1.0;
    let mut iterations = 0;
    loop {
        // centering by damped Newton steps; `residual` is the Newton
        // decrement left over when centering stops early
        let mut residual = f64::INFINITY;
        for _ in 0..MAX_NEWTON {
            iterations += 1;
            let Some((g, h)) = problem.derivatives(&z, t) else {
                break;
            };
            let neg = -h;
            let Some(chol) = neg.cholesky() else {
                break;
            };
            let step = chol.solve(&g);
            let decrement = g.dot(&step);
            residual = decrement;
            if decrement / 2.0 <= NEWTON_DECREMENT {
                residual = 0.0;
                break;
            }
            let f0 = problem.barrier_value(&z, t).unwrap_or(f64::NEG_INFINITY);
            let mut alpha = 1.0;
            let mut moved = false;
            while alpha > 1e-14 {
                let trial = &z + &step * alpha;
                if let Some(f) = problem.barrier_value(&trial, t) {
                    if f >= f0 + 0.25 * alpha * decrement {
                        z = trial;
                        moved = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !moved {
                break;
            }
        }
        if m / t <= precision {
            return Run {
                value: problem.objective(&z),
                iterations,
                gap: (m + residual / 2.0) / t,
                centered: residual / 2.0 <= m,
            };
        }
        t *= BARRIER_GROWTH;
    }
}

/// Maximizes `tr(E_1γ_1) + tr(E_2γ_2)` over unambiguous POVMs by a
/// log-barrier interior-point method, from several interior starting points.
pub fn brute_force_usd(
    g1: &WeightedState,
    g2: &WeightedState,
    tol: &Tolerances,
    options: OracleOptions,
) -> Result<OracleResult> {
    validate_pair(g1, g2)?;
    let dim = g1.dim();
    if dim > options.max_dim {
        return Err(Error::DimensionGuard {
            dim,
            max: options.max_dim,
        });
    }
    if options.precision.is_nan() || options.precision <= 0.0 || options.starts == 0 {
        return Err(Error::InvalidParameter(
            "oracle needs a positive precision and at least one start".into(),
        ));
    }
    if options.require_disjoint {
        let overlap = disjoint_supports(g1.gamma(), g2.gamma(), tol)?;
        if !overlap.disjoint {
            return Err(Error::OverlappingSupports {
                overlap: overlap.max_overlap,
            });
        }
    }
    let problem = Problem::new(g1, g2, tol);
    if problem.n() == 0 {
        return Ok(OracleResult {
            p_succ: 0.0,
            iterations: 0,
            converged: true,
            certificate_gap: 0.0,
            start_spread: 0.0,
        });
    }
    let mut rng = seeded(options.seed);
    let mut best: Option<Run> = None;
    let mut iterations = 0;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut all_centered = true;
    for s in 0..options.starts {
        let z0 = problem.random_start(&mut rng, s == 0);
        let run = barrier_run(&problem, z0, options.precision);
        iterations += run.iterations;
        lo = lo.min(run.value);
        hi = hi.max(run.value);
        all_centered &= run.centered;
        // ties keep the lowest start index
        if best.as_ref().is_none_or(|b| run.value > b.value) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one start");
    Ok(OracleResult {
        p_succ: best.value.max(0.0),
        iterations,
        converged: all_centered && best.gap <= 1e-5,
        certificate_gap: best.gap,
        start_spread: hi - lo,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstructedInstance {
    pub pair: (WeightedState, WeightedState),
    pub truth_cbs: BlockStructure,
    /// Angle between the two states of each block holding one of each, in
    /// block order; other blocks are skipped.
    pub truth_angles: Vec<f64>,
    pub block_spec: Vec<(usize, usize)>,
    pub seed: u64,
}

const EIGEN_RANGE: (f64, f64) = (0.1, 1.0);
const ANGLE_RANGE: (f64, f64) = (0.15, std::f64::consts::FRAC_PI_2 - 0.05);

/// Parses `"1,1/2,0"` into a block specification.
pub fn parse_block_spec(text: &str) -> Result<Vec<(usize, usize)>> {
    let parse = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| Error::InvalidParameter(format!("bad rank '{s}' in block spec '{text}'")))
    };
    text.split('/')
        .map(|block| {
            let parts: Vec<&str> = block.split(',').collect();
            if parts.len() != 2 {
                return Err(Error::InvalidParameter(format!(
                    "block '{block}' must be 'r1,r2'"
                )));
            }
            Ok((parse(parts[0])?, parse(parts[1])?))
        })
        .collect()
}

fn check_spec(spec: &[(usize, usize)]) -> Result<()> {
    if spec.is_empty() {
        return Err(Error::EmptyInput);
    }
    for &(r1, r2) in spec {
        if r1 + r2 > 2 {
            return Err(Error::InvalidParameter(format!(
                "block ranks ({r1}, {r2}) exceed a two-dimensional block"
            )));
        }
    }
    Ok(())
}

/// Direct sum of random blocks, conjugated by a seeded random unitary and
/// normalized to total trace one. A block has dimension `max(1, r1 + r2)`.
pub fn random_block_instance(spec: &[(usize, usize)], seed: u64) -> Result<ConstructedInstance> {
    check_spec(spec)?;
    let mut rng = seeded(seed);
    let dim: usize = spec.iter().map(|&(r1, r2)| (r1 + r2).max(1)).sum();
    let mut g = [CMatrix::zeros(dim, dim), CMatrix::zeros(dim, dim)];
    let mut truth_angles = Vec::new();
    let mut ranges = Vec::new();
    let mut offset = 0;
    let basis = |k: usize| {
        let mut e = CVector::zeros(dim);
        e[k] = Complex64::new(1.0, 0.0);
        e
    };
    for &(r1, r2) in spec {
        let bd = (r1 + r2).max(1);
        let mut weight = || rng.random_range(EIGEN_RANGE.0..=EIGEN_RANGE.1);
        match (r1, r2) {
            (1, 1) => {
                let (w1, w2) = (weight(), weight());
                let phi = rng.random_range(ANGLE_RANGE.0..=ANGLE_RANGE.1);
                let chi = rng.random_range(0.0..std::f64::consts::TAU);
                let u = basis(offset);
                let v = basis(offset) * Complex64::new(phi.cos(), 0.0)
                    + basis(offset + 1) * Complex64::from_polar(phi.sin(), chi);
                g[0] += outer(&u, &u) * Complex64::new(w1, 0.0);
                g[1] += outer(&v, &v) * Complex64::new(w2, 0.0);
                truth_angles.push(phi);
            }
            _ => {
                for k in 0..r1 {
                    let e = basis(offset + k);
                    let w = weight();
                    g[0] += outer(&e, &e) * Complex64::new(w, 0.0);
                }
                for k in 0..r2 {
                    let e = basis(offset + r1 + k);
                    let w = weight();
                    g[1] += outer(&e, &e) * Complex64::new(w, 0.0);
                }
            }
        }
        ranges.push((offset, bd));
        offset += bd;
    }
    let u = unitary(dim, &mut rng);
    let total = (g[0].trace() + g[1].trace()).re;
    let scale = Complex64::new(if total > 0.0 { 1.0 / total } else { 1.0 }, 0.0);
    let tol = Tolerances::default();
    let conj = |m: &CMatrix| HermitianOperator::symmetrized(&u * m * u.adjoint() * scale);
    let pair = (
        WeightedState::new(conj(&g[0]), &tol)?,
        WeightedState::new(conj(&g[1]), &tol)?,
    );
    let projectors = ranges
        .iter()
        .map(|&(o, bd)| Projector::from_orthonormal_columns(&u.columns(o, bd).into_owned()))
        .collect();
    Ok(ConstructedInstance {
        pair,
        truth_cbs: BlockStructure::new(projectors)?,
        truth_angles,
        block_spec: spec.to_vec(),
        seed,
    })
}

/// Like [`random_block_instance`] but every block is two-dimensional (one
/// dimensional if both ranks are zero or the pair is `(1,0)`/`(0,1)`) and may
/// carry up to rank two of each operator, so the supports can overlap.
pub fn random_cbs_instance(spec: &[(usize, usize)], seed: u64) -> Result<ConstructedInstance> {
    if spec.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut rng = seeded(seed);
    let dims: Vec<usize> = spec
        .iter()
        .map(|&(r1, r2)| {
            if r1 > 2 || r2 > 2 {
                Err(Error::InvalidParameter(format!("block ranks ({r1}, {r2}) exceed two")))
            } else {
                Ok(r1.max(r2).max((r1 + r2).min(2)).max(1))
            }
        })
        .collect::<Result<_>>()?;
    let dim: usize = dims.iter().sum();
    let mut g = [CMatrix::zeros(dim, dim), CMatrix::zeros(dim, dim)];
    let mut offset = 0;
    for (&(r1, r2), &bd) in spec.iter().zip(&dims) {
        for (mu, r) in [(0, r1), (1, r2)] {
            let local = crate::random::psd(bd, r, EIGEN_RANGE.0, EIGEN_RANGE.1, &mut rng);
            let mut view = g[mu].view_mut((offset, offset), (bd, bd));
            view += local.matrix();
        }
        offset += bd;
    }
    let u = unitary(dim, &mut rng);
    let total = (g[0].trace() + g[1].trace()).re;
    let scale = Complex64::new(if total > 0.0 { 1.0 / total } else { 1.0 }, 0.0);
    let tol = Tolerances::default();
    let conj = |m: &CMatrix| HermitianOperator::symmetrized(&u * m * u.adjoint() * scale);
    let pair = (
        WeightedState::new(conj(&g[0]), &tol)?,
        WeightedState::new(conj(&g[1]), &tol)?,
    );
    let mut projectors = Vec::new();
    let mut offset = 0;
    for &bd in &dims {
        projectors.push(Projector::from_orthonormal_columns(&u.columns(offset, bd).into_owned()));
        offset += bd;
    }
    Ok(ConstructedInstance {
        pair,
        truth_cbs: BlockStructure::new(projectors)?,
        truth_angles: Vec::new(),
        block_spec: spec.to_vec(),
        seed,
    })
}

/// Adds `ε·‖γ‖·R` with a fresh random Hermitian `R` of unit norm to each
/// operator, keeps the original number of leading eigenvalues (clipped at
/// zero) and rescales if the traces then exceed one.
pub fn perturb_instance(inst: &ConstructedInstance, epsilon: f64, seed: u64) -> Result<(WeightedState, WeightedState)> {
    if epsilon.is_nan() || epsilon < 0.0 {
        return Err(Error::InvalidParameter(format!("epsilon must be non-negative, got {epsilon}")));
    }
    if epsilon == 0.0 {
        return Ok(inst.pair.clone());
    }
    let tol = Tolerances::default();
    let mut rng = seeded(seed);
    let mut out = Vec::with_capacity(2);
    for g in [&inst.pair.0, &inst.pair.1] {
        let dim = g.dim();
        let keep = crate::operator::rank(g.gamma(), &tol);
        let r = hermitian(dim, &mut rng);
        let noisy = g.matrix() + r.matrix() * Complex64::new(epsilon * g.gamma().spectral_norm(), 0.0);
        let spec = eigh(&noisy);
        let top = dim - keep;
        let weights: Vec<f64> = spec.values[top..].iter().map(|w| w.max(0.0)).collect();
        let vectors = spec.vectors.columns(top, keep).into_owned();
        out.push(HermitianOperator::from_spectrum(&weights, &vectors));
    }
    let total = out[0].trace() + out[1].trace();
    let factor = if total > 1.0 { 1.0 / total } else { 1.0 };
    let g2 = out.pop().expect("two operators").scaled(factor);
    let g1 = out.pop().expect("two operators").scaled(factor);
    Ok((WeightedState::new(g1, &tol)?, WeightedState::new(g2, &tol)?))
}
