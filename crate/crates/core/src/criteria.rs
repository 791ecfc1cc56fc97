//! Commutator tests for the existence of common block structures.
//!
//! Every reported norm is a Frobenius norm divided by the product of the
//! spectral norms of the literal factors of the commutator. Verdicts are
//! unchanged by `A → λA`, `B → μB`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{
    commutator, disjoint_supports, relative_norm_with, CMatrix, HermitianOperator, Tolerances,
};

pub const THREE_COMMUTATOR: &str = "three-commutator";
pub const LAFFEY: &str = "laffey";
pub const MUTUAL_COMMUTATION: &str = "mutual-commutation";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedNorm {
    pub label: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub criterion_name: String,
    pub norms: Vec<NamedNorm>,
    pub pass: bool,
    pub tol_used: f64,
    pub precondition_ok: bool,
}

impl CriterionReport {
    fn new(name: &str, norms: Vec<NamedNorm>, tol_used: f64, precondition_ok: bool) -> Self {
        // ties at the tolerance pass
        let pass = precondition_ok && norms.iter().all(|n| n.value <= tol_used);
        Self {
            criterion_name: name.to_string(),
            norms,
            pass,
            tol_used,
            precondition_ok,
        }
    }

    pub fn norm(&self, label: &str) -> Option<f64> {
        self.norms.iter().find(|n| n.label == label).map(|n| n.value)
    }

    pub fn max_norm(&self) -> f64 {
        self.norms.iter().fold(0.0, |m, n| m.max(n.value))
    }

    /// Whether every norm is within tolerance, ignoring the precondition.
    pub fn norms_within_tolerance(&self) -> bool {
        self.norms.iter().all(|n| n.value <= self.tol_used)
    }
}

fn check_pair(a: &HermitianOperator, b: &HermitianOperator) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(())
}

fn named(label: &str, c: &CMatrix, factor_norms: &[f64]) -> NamedNorm {
    NamedNorm {
        label: label.to_string(),
        value: relative_norm_with(c, factor_norms),
    }
}

/// `[A,ABA]`, `[A,AB²A]` and `[B,BA²B]`; passes only for disjoint supports.
pub fn three_commutator_test(
    a: &HermitianOperator,
    b: &HermitianOperator,
    tol: &Tolerances,
) -> Result<CriterionReport> {
    check_pair(a, b)?;
    let overlap = disjoint_supports(a, b, tol)?;
    let (am, bm) = (a.matrix(), b.matrix());
    let (na, nb) = (a.spectral_norm(), b.spectral_norm());

    let ab = am * bm;
    let aba = &ab * am;
    let abba = &ab * bm * am;
    let baab = bm * am * am * bm;

    let norms = vec![
        named("[A,ABA]", &commutator(am, &aba)?, &[na, na, nb, na]),
        named("[A,AB^2A]", &commutator(am, &abba)?, &[na, na, nb, nb, na]),
        named("[B,BA^2B]", &commutator(bm, &baab)?, &[nb, nb, na, na, nb]),
    ];
    Ok(CriterionReport::new(
        THREE_COMMUTATOR,
        norms,
        tol.tol_comm,
        overlap.disjoint,
    ))
}

/// Relative norm of `[B,BAB]`, which vanishes whenever the three-commutator
/// test passes on a pair with disjoint supports.
pub fn fourth_commutator_norm(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    check_pair(a, b)?;
    let (am, bm) = (a.matrix(), b.matrix());
    let (na, nb) = (a.spectral_norm(), b.spectral_norm());
    let bab = bm * am * bm;
    Ok(relative_norm_with(&commutator(bm, &bab)?, &[nb, nb, na, nb]))
}

/// Six commutators `[[X,Y]², X]` characterizing a two-dimensional common
/// block structure of two positive semi-definite operators.
pub fn laffey_test(
    a: &HermitianOperator,
    b: &HermitianOperator,
    tol: &Tolerances,
) -> Result<CriterionReport> {
    check_pair(a, b)?;
    let precondition_ok = a.is_psd(tol) && b.is_psd(tol);
    let (am, bm) = (a.matrix(), b.matrix());
    let (na, nb) = (a.spectral_norm(), b.spectral_norm());
    let a2 = am * am;
    let b2 = bm * bm;

    // [[x,y]^2, z]
    let term = |x: &CMatrix, y: &CMatrix, z: &CMatrix| -> Result<CMatrix> {
        let c = commutator(x, y)?;
        commutator(&(&c * &c), z)
    };

    let norms = vec![
        named("[[A,B]^2,A]", &term(am, bm, am)?, &[na, nb, na, nb, na]),
        named("[[B,A]^2,B]", &term(bm, am, bm)?, &[nb, na, nb, na, nb]),
        named(
            "[[A,B^2]^2,A]",
            &term(am, &b2, am)?,
            &[na, nb, nb, na, nb, nb, na],
        ),
        named(
            "[[B,A^2]^2,B]",
            &term(bm, &a2, bm)?,
            &[nb, na, na, nb, na, na, nb],
        ),
        named(
            "[[A^2,B]^2,A]",
            &term(&a2, bm, am)?,
            &[na, na, nb, na, na, nb, na],
        ),
        named(
            "[[B^2,A]^2,B]",
            &term(&b2, am, bm)?,
            &[nb, nb, na, nb, nb, na, nb],
        ),
    ];
    Ok(CriterionReport::new(LAFFEY, norms, tol.tol_comm, precondition_ok))
}

/// Pairwise commutators of a family; passing means a common eigenbasis exists.
pub fn mutual_commutation_test(
    ops: &[HermitianOperator],
    tol: &Tolerances,
) -> Result<CriterionReport> {
    let first = ops.first().ok_or(Error::EmptyInput)?;
    for op in ops {
        check_pair(first, op)?;
    }
    let spectral: Vec<f64> = ops.iter().map(|o| o.spectral_norm()).collect();
    let mut norms = Vec::new();
    for i in 0..ops.len() {
        for j in i + 1..ops.len() {
            let c = commutator(ops[i].matrix(), ops[j].matrix())?;
            norms.push(named(
                &format!("[O{i},O{j}]"),
                &c,
                &[spectral[i], spectral[j]],
            ));
        }
    }
    Ok(CriterionReport::new(
        MUTUAL_COMMUTATION,
        norms,
        tol.tol_comm,
        true,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn ones2() -> HermitianOperator {
        HermitianOperator::from_real(2, &[1.0, 1.0, 1.0, 1.0])
    }

    #[test]
    fn commuting_disjoint_pair_passes() {
        let tol = Tolerances::default();
        let a = HermitianOperator::diagonal(&[1.0, 0.0]);
        let b = HermitianOperator::diagonal(&[0.0, 2.0]);
        let r = three_commutator_test(&a, &b, &tol).unwrap();
        assert!(r.pass);
        assert!(r.norms.iter().all(|n| n.value == 0.0));
        assert_eq!(r.norms.len(), 3);
    }

    #[test]
    fn counterexample_fails_with_recomputed_norm() {
        let tol = Tolerances::default();
        let a = HermitianOperator::diagonal(&[1.0, 2.0]);
        let b = ones2();
        let r = three_commutator_test(&a, &b, &tol).unwrap();
        assert!(!r.pass);
        assert!(!r.precondition_ok);
        // ‖[A,ABA]‖_F = 2√2 before division by ‖A‖³‖B‖ = 16
        assert_abs_diff_eq!(r.norm("[A,ABA]").unwrap(), 2.0 * 2f64.sqrt() / 16.0, epsilon = 1e-14);
        assert!(r.norm("[A,AB^2A]").unwrap() > 0.0);
    }

    #[test]
    fn overlapping_supports_fail_even_with_zero_norms() {
        let tol = Tolerances::default();
        let a = HermitianOperator::diagonal(&[1.0, 2.0]);
        let r = three_commutator_test(&a, &a, &tol).unwrap();
        assert!(r.norms_within_tolerance());
        assert!(!r.pass);
    }

    #[test]
    fn laffey_commuting_pair_passes() {
        let tol = Tolerances::default();
        let a = HermitianOperator::diagonal(&[1.0, 3.0, 0.0]);
        let b = HermitianOperator::diagonal(&[2.0, 0.0, 5.0]);
        let r = laffey_test(&a, &b, &tol).unwrap();
        assert!(r.pass);
        assert_eq!(r.norms.len(), 6);
        assert_eq!(r.max_norm(), 0.0);
    }

    #[test]
    fn laffey_precondition_requires_psd() {
        let tol = Tolerances::default();
        let a = HermitianOperator::diagonal(&[1.0, -3.0]);
        let b = HermitianOperator::diagonal(&[2.0, 1.0]);
        let r = laffey_test(&a, &b, &tol).unwrap();
        assert!(!r.precondition_ok);
        assert!(!r.pass);
    }

    #[test]
    fn laffey_any_2d_pair_passes() {
        // every 2×2 pair is trivially quasi-diagonal
        let tol = Tolerances::default();
        let a = HermitianOperator::diagonal(&[1.0, 2.0]);
        let r = laffey_test(&a, &ones2(), &tol).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn mutual_commutation_examples() {
        let tol = Tolerances::default();
        let a = HermitianOperator::diagonal(&[1.0, 2.0]);
        let d = HermitianOperator::diagonal(&[3.0, 4.0]);
        assert!(mutual_commutation_test(&[a.clone(), d], &tol).unwrap().pass);

        let r = mutual_commutation_test(&[a.clone(), ones2()], &tol).unwrap();
        assert!(!r.pass);
        assert_abs_diff_eq!(r.norms[0].value, 2f64.sqrt() / 4.0, epsilon = 1e-14);

        let single = mutual_commutation_test(&[a], &tol).unwrap();
        assert!(single.pass);
        assert!(single.norms.is_empty());

        assert!(matches!(
            mutual_commutation_test(&[], &tol),
            Err(Error::EmptyInput)
        ));
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let tol = Tolerances::default();
        let a = HermitianOperator::diagonal(&[1.0, 2.0]);
        let b = HermitianOperator::diagonal(&[1.0, 2.0, 3.0]);
        assert!(three_commutator_test(&a, &b, &tol).is_err());
        assert!(laffey_test(&a, &b, &tol).is_err());
        assert!(mutual_commutation_test(&[a, b], &tol).is_err());
    }

    #[test]
    fn tie_at_tolerance_passes() {
        let r = CriterionReport::new("t", vec![NamedNorm { label: "x".into(), value: 1e-8 }], 1e-8, true);
        assert!(r.pass);
    }
}
