//! Seeded random matrices. Every generator takes the RNG explicitly.

use nalgebra::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::operator::{CMatrix, CVector, HermitianOperator};

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex<f64> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(re, im)
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    let entries: Vec<Complex<f64>> = (0..rows * cols).map(|_| gaussian(rng)).collect();
    CMatrix::from_row_slice(rows, cols, &entries)
}

pub fn unit_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    loop {
        let v = CVector::from_iterator(dim, (0..dim).map(|_| gaussian(rng)));
        let n = v.norm();
        if n > 1e-8 {
            return v / Complex::new(n, 0.0);
        }
    }
}

/// Haar-distributed unitary: QR of a complex Gaussian matrix with the phases
/// of `R`'s diagonal folded back into `Q`.
pub fn unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let g = gaussian_matrix(dim, dim, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let n = d.norm();
        let phase = if n > 0.0 { d / n } else { Complex::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Orthonormal columns spanning a random `k`-dimensional subspace.
pub fn isometry<R: Rng + ?Sized>(dim: usize, k: usize, rng: &mut R) -> CMatrix {
    unitary(dim, rng).columns(0, k).into_owned()
}

/// Hermitian matrix with unit spectral norm.
pub fn hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianOperator {
    let g = gaussian_matrix(dim, dim, rng);
    let h = HermitianOperator::symmetrized(&g + g.adjoint());
    let n = h.spectral_norm();
    if n == 0.0 {
        h
    } else {
        h.scaled(1.0 / n)
    }
}

/// Positive semi-definite operator of the given rank with eigenvalues drawn
/// uniformly from `[lo, hi]` on a random eigenbasis.
pub fn psd<R: Rng + ?Sized>(dim: usize, rank: usize, lo: f64, hi: f64, rng: &mut R) -> HermitianOperator {
    let v = isometry(dim, rank, rng);
    let w: Vec<f64> = (0..rank).map(|_| rng.random_range(lo..=hi)).collect();
    HermitianOperator::from_spectrum(&w, &v)
}
