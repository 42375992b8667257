//! Bound-vs-oracle sweep: every W2 bound is compared against the exact law
//! of the chain on random Gaussian targets.

use langevin_core::bounds::{init_w2_from_mean, theorem1_bound, theorem2_bound, BoundInputs};
use langevin_core::gaussian_oracle::{gaussian_w2, moments_after_k, w2_init_exact, GaussianMoments};
use langevin_core::rng::{self, stream};
use langevin_core::{quadratic_target, Result, TargetPotential};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

pub const DIMENSIONS: [usize; 4] = [1, 2, 5, 10];
pub const STEP_FRACTIONS: usize = 20;
pub const ITERATIONS: [usize; 4] = [1, 10, 100, 1000];
const EIGEN_RANGE: (f64, f64) = (1.0, 10.0);
const SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub cells: usize,
    pub failures: usize,
    pub min_slack: f64,
    pub first_counterexample: Option<String>,
}

/// Quadratic with precision `Q diag(λ) Qᵀ`, `λ` uniform in `EIGEN_RANGE`,
/// plus a start point about three standard units from the mean.
fn random_target(seed: u64, p: usize) -> Result<(TargetPotential, DVector<f64>)> {
    let mut r = stream(seed, 0, rng::DIFFUSION);
    let g = DMatrix::from_fn(p, p, |_, _| rng::standard_normal(&mut r, 1)[0]);
    let q = g.qr().q();
    let eig = DVector::from_fn(p, |_, _| r.random_range(EIGEN_RANGE.0..=EIGEN_RANGE.1));
    let precision = &q * DMatrix::from_diagonal(&eig) * q.transpose();
    let mean = rng::standard_normal(&mut r, p);
    let theta0 = &mean + rng::standard_normal(&mut r, p) * 3.0;
    Ok((quadratic_target(mean, precision)?, theta0))
}

struct Cell {
    slack: f64,
    describe: String,
}

fn sweep_instance(seed: u64, p: usize) -> Result<Vec<Cell>> {
    let (target, theta0) = random_target(seed, p)?;
    let spec = target.quadratic().expect("quadratic target");
    let (m, big_m) = (target.m(), target.big_m());
    let pi = GaussianMoments::target(spec);
    let w0 = w2_init_exact(spec, &theta0)?;
    let mut cells = Vec::new();

    let d2 = (&theta0 - &spec.mean).norm_squared();
    let from_mean = init_w2_from_mean(d2, p as u64, m)?;
    cells.push(Cell {
        slack: from_mean * (1.0 + 1e-12) - w0,
        describe: format!("initial distance p={p} seed={seed}: exact {w0} > bound {from_mean}"),
    });

    for j in 1..=STEP_FRACTIONS {
        let h = (2.0 / big_m) * j as f64 / (STEP_FRACTIONS + 1) as f64;
        let mut law = GaussianMoments::point_mass(theta0.clone());
        let mut done = 0;
        for k in ITERATIONS {
            law = moments_after_k(spec, &law, h, k - done)?;
            done = k;
            let exact = gaussian_w2(&law, &pi)?;
            let inputs = BoundInputs::new(m, big_m, h, k as u64, p as u64, w0);
            let one = theorem1_bound(&inputs)?.value;
            let two = theorem2_bound(&inputs)?.value;
            let ctx = format!("p={p} seed={seed} m={m} M={big_m} h={h} K={k}");
            cells.push(Cell {
                slack: one + SLACK - exact,
                describe: format!("exact-gradient bound {ctx}: W2 = {exact} > {one}"),
            });
            cells.push(Cell {
                slack: two + SLACK - exact,
                describe: format!("noisy-gradient bound (sigma = 0) {ctx}: W2 = {exact} > {two}"),
            });
        }
    }
    Ok(cells)
}

pub fn run(seed: u64, instances: usize) -> Result<ValidationReport> {
    let jobs: Vec<(u64, usize)> = DIMENSIONS
        .iter()
        .enumerate()
        .flat_map(|(d, &p)| {
            (0..instances as u64).map(move |i| (seed.wrapping_add(10_000 * d as u64 + i), p))
        })
        .collect();
    let per_job: Vec<Vec<Cell>> = jobs
        .par_iter()
        .map(|&(s, p)| sweep_instance(s, p))
        .collect::<Result<_>>()?;
    let cells: Vec<Cell> = per_job.into_iter().flatten().collect();
    let failures = cells.iter().filter(|c| c.slack < 0.0).count();
    Ok(ValidationReport {
        cells: cells.len(),
        failures,
        min_slack: cells.iter().map(|c| c.slack).fold(f64::INFINITY, f64::min),
        first_counterexample: cells
            .iter()
            .find(|c| c.slack < 0.0)
            .map(|c| c.describe.clone()),
    })
}
