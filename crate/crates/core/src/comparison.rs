//! Unambiguous comparison of symmetric pure states.
//!
//! `N` states with a common real overlap `cos θ` are prepared `C` times; the
//! task is to tell "all copies identical" (`γ1`) from "not all identical"
//! (`γ2`). For `C = 2` the pair has a two-dimensional common block structure.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operator::{frobenius_norm, outer, CMatrix, CVector, HermitianOperator, Tolerances};
use crate::reductions::WeightedState;

/// Largest product dimension `N^C` accepted by the generators.
pub const DEFAULT_DIMENSION_CAP: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEnsemble {
    pub n: usize,
    pub theta: f64,
    /// Columns are the states `ψ_1 … ψ_N`.
    pub vectors: CMatrix,
    /// `‖V†V − G‖_F` for the target Gram matrix `G`.
    pub gram_residual: f64,
}

impl SymmetricEnsemble {
    pub fn vector(&self, k: usize) -> CVector {
        self.vectors.column(k).into_owned()
    }
}

fn check_params(n: usize, theta: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need at least two states, got {n}")));
    }
    if !(theta > 0.0 && theta <= std::f64::consts::FRAC_PI_2) {
        return Err(Error::InvalidParameter(format!(
            "angle must lie in (0, π/2], got {theta}"
        )));
    }
    Ok(())
}

/// Target Gram matrix `(1 − cos θ)𝟙 + cos θ·J`.
pub fn gram_matrix(n: usize, theta: f64) -> CMatrix {
    let c = theta.cos();
    CMatrix::from_fn(n, n, |i, j| Complex64::new(if i == j { 1.0 } else { c }, 0.0))
}

/// `n` unit vectors in `ℂⁿ` with pairwise overlap `cos θ`, taken as the
/// columns of the principal square root of the Gram matrix.
pub fn symmetric_states(n: usize, theta: f64) -> Result<SymmetricEnsemble> {
    check_params(n, theta)?;
    let c = theta.cos();
    // G = (1−c)𝟙 + c J has eigenvalue 1−c+nc on the all-ones vector and 1−c elsewhere
    let low = (1.0 - c).sqrt();
    let high = (1.0 - c + n as f64 * c).sqrt();
    let off = (high - low) / n as f64;
    let vectors = CMatrix::from_fn(n, n, |i, j| {
        Complex64::new(if i == j { low + off } else { off }, 0.0)
    });
    let gram_residual = frobenius_norm(&(vectors.adjoint() * &vectors - gram_matrix(n, theta)));
    Ok(SymmetricEnsemble {
        n,
        theta,
        vectors,
        gram_residual,
    })
}

fn check_cap(n: usize, c: usize, cap: usize) -> Result<usize> {
    let dim = (0..c).try_fold(1usize, |acc, _| acc.checked_mul(n));
    match dim {
        Some(d) if d <= cap => Ok(d),
        _ => Err(Error::DimensionGuard {
            dim: dim.unwrap_or(usize::MAX),
            max: cap,
        }),
    }
}

fn kron_power(v: &CVector, c: usize) -> CVector {
    let mut out = v.clone();
    for _ in 1..c {
        out = out.kronecker(v);
    }
    out
}

fn weighted(m: CMatrix) -> Result<WeightedState> {
    WeightedState::new(HermitianOperator::symmetrized(m), &Tolerances::default())
}

/// `γ1 = N⁻² Σ_k |ψ_kψ_k⟩⟨ψ_kψ_k|`, `γ2 = N⁻² Σ_{k≠l} |ψ_kψ_l⟩⟨ψ_kψ_l|`
/// on `ℂ^{N²}` with index `(k, l) ↦ k·N + l`.
pub fn two_out_of_n_instance(n: usize, theta: f64) -> Result<(WeightedState, WeightedState)> {
    let ens = symmetric_states(n, theta)?;
    let d = n * n;
    let w = Complex64::new(1.0 / d as f64, 0.0);
    let mut g1 = CMatrix::zeros(d, d);
    let mut g2 = CMatrix::zeros(d, d);
    for k in 0..n {
        for l in 0..n {
            let v = ens.vector(k).kronecker(&ens.vector(l));
            if k == l {
                g1 += outer(&v, &v) * w;
            } else {
                g2 += outer(&v, &v) * w;
            }
        }
    }
    Ok((weighted(g1)?, weighted(g2)?))
}

/// `C`-fold generalization: `γ1` mixes the `N` products `ψ_k^{⊗C}`, `γ2` the
/// remaining `N^C − N` products, each with weight `N^{−C}`.
pub fn c_out_of_n_instance(n: usize, c: usize, theta: f64) -> Result<(WeightedState, WeightedState)> {
    c_out_of_n_instance_capped(n, c, theta, DEFAULT_DIMENSION_CAP)
}

pub fn c_out_of_n_instance_capped(
    n: usize,
    c: usize,
    theta: f64,
    cap: usize,
) -> Result<(WeightedState, WeightedState)> {
    if c < 2 {
        return Err(Error::InvalidParameter(format!("need at least two copies, got {c}")));
    }
    check_params(n, theta)?;
    let d = check_cap(n, c, cap)?;
    let ens = symmetric_states(n, theta)?;
    let w = Complex64::new(1.0 / d as f64, 0.0);

    let mut g1 = CMatrix::zeros(d, d);
    for k in 0..n {
        let v = kron_power(&ens.vector(k), c);
        g1 += outer(&v, &v) * w;
    }
    // the sum over all tuples factorizes into (Σ_k |ψ_k⟩⟨ψ_k|)^{⊗C}
    let single = &ens.vectors * ens.vectors.adjoint();
    let mut all = single.clone();
    for _ in 1..c {
        all = all.kronecker(&single);
    }
    let g2 = all * w - &g1;
    Ok((weighted(g1)?, weighted(g2)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::three_commutator_test;
    use crate::operator::disjoint_supports;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn two_states_realize_the_overlap() {
        let e = symmetric_states(2, 0.4).unwrap();
        let ip = (e.vector(0).adjoint() * e.vector(1))[(0, 0)];
        assert_abs_diff_eq!(ip.re, 0.4f64.cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(ip.im, 0.0);
    }

    #[test]
    fn right_angle_gives_orthonormal_set() {
        let e = symmetric_states(5, FRAC_PI_2).unwrap();
        assert!(frobenius_norm(&(&e.vectors - CMatrix::identity(5, 5))) < 1e-15);
    }

    #[test]
    fn gram_residual_is_tiny() {
        let e = symmetric_states(4, 0.7).unwrap();
        // recompute independently of the stored residual
        let g = e.vectors.adjoint() * &e.vectors;
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 1.0 } else { 0.7f64.cos() };
                assert!((g[(i, j)].re - want).abs() < 1e-12 && g[(i, j)].im.abs() < 1e-12);
            }
        }
        assert!(e.gram_residual < 1e-12);
    }

    #[test]
    fn parameters_are_checked() {
        assert!(symmetric_states(1, 0.5).is_err());
        assert!(symmetric_states(3, 0.0).is_err());
        assert!(symmetric_states(3, 1.6).is_err());
        assert!(matches!(
            c_out_of_n_instance(5, 6, 0.5),
            Err(Error::DimensionGuard { .. })
        ));
    }

    #[test]
    fn traces_follow_the_definition() {
        for n in 2..=5 {
            let (g1, g2) = two_out_of_n_instance(n, 0.9).unwrap();
            assert_abs_diff_eq!(g1.weight(), 1.0 / n as f64, epsilon = 1e-13);
            assert_abs_diff_eq!(g2.weight(), 1.0 - 1.0 / n as f64, epsilon = 1e-13);
        }
    }

    #[test]
    fn supports_are_disjoint_and_commutators_vanish() {
        let tol = Tolerances::default();
        let (g1, g2) = two_out_of_n_instance(3, FRAC_PI_4).unwrap();
        assert!(disjoint_supports(g1.gamma(), g2.gamma(), &tol).unwrap().disjoint);
        let r = three_commutator_test(g1.gamma(), g2.gamma(), &tol).unwrap();
        assert!(r.pass);
        assert!(r.max_norm() < 1e-12, "{r:?}");
    }

    #[test]
    fn two_copies_match_the_dedicated_generator() {
        let (a1, a2) = two_out_of_n_instance(4, 0.6).unwrap();
        let (b1, b2) = c_out_of_n_instance(4, 2, 0.6).unwrap();
        assert!(frobenius_norm(&(a1.matrix() - b1.matrix())) < 1e-15);
        assert!(frobenius_norm(&(a2.matrix() - b2.matrix())) < 1e-14);
    }

    #[test]
    fn three_copies_break_the_third_commutator() {
        let tol = Tolerances::default();
        let (g1, g2) = c_out_of_n_instance(3, 3, FRAC_PI_4).unwrap();
        let r = three_commutator_test(g1.gamma(), g2.gamma(), &tol).unwrap();
        assert!(r.norm("[B,BA^2B]").unwrap() > 1e-3, "{r:?}");
        assert!(!r.pass);
    }

    #[test]
    fn relabeling_leaves_the_pair_invariant() {
        let n = 4;
        let (g1, g2) = two_out_of_n_instance(n, 1.1).unwrap();
        let perm = [2usize, 0, 3, 1];
        let p = CMatrix::from_fn(n, n, |i, j| {
            Complex64::new(if perm[j] == i { 1.0 } else { 0.0 }, 0.0)
        });
        let pp = p.kronecker(&p);
        for g in [&g1, &g2] {
            let moved = &pp * g.matrix() * pp.adjoint();
            assert!(frobenius_norm(&(moved - g.matrix())) < 1e-10);
        }
    }
}
