#![allow(dead_code)]

use langevin_core::rng::{self, StreamRng};
use langevin_core::{quadratic_target, TargetPotential};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// `Q diag(λ) Qᵀ` with `Q` from the QR factorisation of a Gaussian matrix
/// and `λ` uniform in `[lo, hi]`.
pub fn random_spd(rng: &mut StreamRng, p: usize, lo: f64, hi: f64) -> DMatrix<f64> {
    let g = DMatrix::from_fn(p, p, |_, _| rng::standard_normal(rng, 1)[0]);
    let q = g.qr().q();
    let eig = DVector::from_fn(p, |_, _| rng.random_range(lo..=hi));
    let a = &q * DMatrix::from_diagonal(&eig) * q.transpose();
    (&a + a.transpose()) * 0.5
}

pub fn random_quadratic(rng: &mut StreamRng, p: usize, lo: f64, hi: f64) -> TargetPotential {
    let mean = rng::standard_normal(rng, p);
    quadratic_target(mean, random_spd(rng, p, lo, hi)).unwrap()
}
