//! Smooth strongly convex potentials `f` and the densities `π ∝ exp(-f)` they define.
//!
//! A [`TargetPotential`] carries the potential together with its curvature
//! constants: `m` (strong convexity) and `M` (Lipschitz constant of the
//! gradient). Shipped instances are the Gaussian (quadratic) target, whose
//! law is known exactly, and ridge-regularised logistic regression, whose
//! potential is a sum over observations and therefore supports subsampled
//! gradients.
//!
//! Integrability of `exp(-f)` is not checked for user-supplied potentials;
//! it holds automatically for every potential with `m > 0`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, LangevinError, Result};
use crate::rng;

const SYMMETRY_TOL: f64 = 1e-12;

/// A differentiable potential `f: R^p -> R`.
pub trait Potential: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    fn value(&self, theta: &DVector<f64>) -> f64;

    fn gradient(&self, theta: &DVector<f64>) -> DVector<f64>;

    /// Number of data terms `n` when `f = Σ_i ℓ_i + r`.
    fn observation_count(&self) -> Option<usize> {
        None
    }

    /// `scale · Σ_{i ∈ indices} ∇ℓ_i(θ) + ∇r(θ)`.
    ///
    /// With `indices = 0..n` and `scale = 1` this must agree bit-for-bit with
    /// [`Potential::gradient`].
    fn partial_gradient(
        &self,
        _indices: &[usize],
        _scale: f64,
        _theta: &DVector<f64>,
    ) -> Option<DVector<f64>> {
        None
    }
}

/// Gaussian target `N(mean, precision⁻¹)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticSpec {
    pub mean: DVector<f64>,
    pub precision: DMatrix<f64>,
}

impl QuadraticSpec {
    /// Validates symmetry and positive definiteness, returning the spec with
    /// an exactly symmetric precision and its eigenvalues in ascending order.
    pub fn new(mean: DVector<f64>, precision: DMatrix<f64>) -> Result<(Self, Vec<f64>)> {
        let p = mean.len();
        if p == 0 {
            return Err(invalid("mean", "dimension must be positive"));
        }
        if precision.nrows() != p || precision.ncols() != p {
            return Err(LangevinError::DimensionMismatch {
                expected: p,
                got: precision.nrows().max(precision.ncols()),
            });
        }
        let scale = precision.amax().max(f64::MIN_POSITIVE);
        let asymmetry = (&precision - precision.transpose()).amax();
        if asymmetry > SYMMETRY_TOL * scale {
            return Err(LangevinError::NotSymmetric { asymmetry });
        }
        let precision = (&precision + precision.transpose()) * 0.5;
        let eigenvalues = sorted_eigenvalues(&precision);
        if let Some((index, &eigenvalue)) =
            eigenvalues.iter().enumerate().find(|(_, &ev)| ev <= 0.0)
        {
            return Err(LangevinError::NotPositiveDefinite { index, eigenvalue });
        }
        Ok((Self { mean, precision }, eigenvalues))
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Covariance `A⁻¹` of the target law.
    pub fn covariance(&self) -> DMatrix<f64> {
        let inv = self
            .precision
            .clone()
            .cholesky()
            .expect("precision validated positive definite")
            .inverse();
        (&inv + inv.transpose()) * 0.5
    }
}

pub(crate) fn sorted_eigenvalues(sym: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(sym.clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

#[derive(Debug)]
struct Quadratic(QuadraticSpec);

impl Potential for Quadratic {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn value(&self, theta: &DVector<f64>) -> f64 {
        let d = theta - &self.0.mean;
        0.5 * d.dot(&(&self.0.precision * &d))
    }

    fn gradient(&self, theta: &DVector<f64>) -> DVector<f64> {
        &self.0.precision * (theta - &self.0.mean)
    }
}

/// `Σ_i softplus(x_iᵀθ) − y_i x_iᵀθ + (λ/2)‖θ‖²`.
#[derive(Debug)]
struct RidgeLogistic {
    features: DMatrix<f64>,
    labels: DVector<f64>,
    ridge: f64,
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl RidgeLogistic {
    fn accumulate(&self, indices: impl Iterator<Item = usize>, theta: &DVector<f64>) -> DVector<f64> {
        let mut acc = DVector::zeros(theta.len());
        for i in indices {
            let row = self.features.row(i);
            let z = row.dot(&theta.transpose());
            let w = sigmoid(z) - self.labels[i];
            for (a, x) in acc.iter_mut().zip(row.iter()) {
                *a += w * x;
            }
        }
        acc
    }
}

impl Potential for RidgeLogistic {
    fn dim(&self) -> usize {
        self.features.ncols()
    }

    fn value(&self, theta: &DVector<f64>) -> f64 {
        let z = &self.features * theta;
        let data: f64 = z
            .iter()
            .zip(self.labels.iter())
            .map(|(&zi, &yi)| softplus(zi) - yi * zi)
            .sum();
        data + 0.5 * self.ridge * theta.norm_squared()
    }

    fn gradient(&self, theta: &DVector<f64>) -> DVector<f64> {
        self.accumulate(0..self.labels.len(), theta) * 1.0 + theta * self.ridge
    }

    fn observation_count(&self) -> Option<usize> {
        Some(self.labels.len())
    }

    fn partial_gradient(
        &self,
        indices: &[usize],
        scale: f64,
        theta: &DVector<f64>,
    ) -> Option<DVector<f64>> {
        Some(self.accumulate(indices.iter().copied(), theta) * scale + theta * self.ridge)
    }
}

/// A potential with certified curvature constants `0 < m ≤ M`.
///
/// Immutable after construction and cheap to clone; share freely across
/// threads.
#[derive(Clone)]
pub struct TargetPotential {
    inner: Arc<dyn Potential>,
    m: f64,
    big_m: f64,
    temperature: f64,
    quadratic: Option<QuadraticSpec>,
}

impl fmt::Debug for TargetPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TargetPotential")
            .field("dim", &self.dim())
            .field("m", &self.m)
            .field("M", &self.big_m)
            .field("temperature", &self.temperature)
            .field("potential", &self.inner)
            .finish()
    }
}

fn check_constants(m: f64, big_m: f64) -> Result<()> {
    if !(m.is_finite() && m > 0.0) {
        return Err(invalid("m", format!("must be positive and finite, got {m}")));
    }
    if !(big_m.is_finite() && big_m >= m) {
        return Err(invalid("M", format!("must satisfy M >= m = {m}, got {big_m}")));
    }
    Ok(())
}

impl TargetPotential {
    /// Wraps a caller-supplied potential with declared constants.
    ///
    /// The constants are trusted; use [`check_curvature`] to spot-check them.
    pub fn custom(potential: impl Potential + 'static, m: f64, big_m: f64) -> Result<Self> {
        check_constants(m, big_m)?;
        Ok(Self {
            inner: Arc::new(potential),
            m,
            big_m,
            temperature: 1.0,
            quadratic: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    /// Strong-convexity constant `m`.
    pub fn m(&self) -> f64 {
        self.m
    }

    /// Gradient Lipschitz constant `M`.
    pub fn big_m(&self) -> f64 {
        self.big_m
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    /// Exact law descriptor; present for quadratic targets (tempered or not).
    pub fn quadratic(&self) -> Option<&QuadraticSpec> {
        self.quadratic.as_ref()
    }

    pub fn value(&self, theta: &DVector<f64>) -> f64 {
        self.inner.value(theta) / self.temperature
    }

    pub fn gradient(&self, theta: &DVector<f64>) -> DVector<f64> {
        self.inner.gradient(theta) / self.temperature
    }

    pub fn observation_count(&self) -> Option<usize> {
        self.inner.observation_count()
    }

    pub fn partial_gradient(
        &self,
        indices: &[usize],
        scale: f64,
        theta: &DVector<f64>,
    ) -> Option<DVector<f64>> {
        self.inner
            .partial_gradient(indices, scale, theta)
            .map(|g| g / self.temperature)
    }

    pub fn check_dim(&self, theta: &DVector<f64>) -> Result<()> {
        if theta.len() != self.dim() {
            return Err(LangevinError::DimensionMismatch {
                expected: self.dim(),
                got: theta.len(),
            });
        }
        Ok(())
    }

    /// `f_τ = f/τ`: same minimiser, constants `m/τ` and `M/τ`.
    pub fn temper(&self, tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(invalid("tau", format!("must be positive, got {tau}")));
        }
        Ok(Self {
            inner: Arc::clone(&self.inner),
            m: self.m / tau,
            big_m: self.big_m / tau,
            temperature: self.temperature * tau,
            quadratic: self.quadratic.as_ref().map(|q| QuadraticSpec {
                mean: q.mean.clone(),
                precision: &q.precision / tau,
            }),
        })
    }
}

/// `f(θ) = ½(θ−μ)ᵀA(θ−μ)`, with `m = λ_min(A)` and `M = λ_max(A)`.
pub fn quadratic_target(mean: DVector<f64>, precision: DMatrix<f64>) -> Result<TargetPotential> {
    let (spec, eigenvalues) = QuadraticSpec::new(mean, precision)?;
    Ok(TargetPotential {
        inner: Arc::new(Quadratic(spec.clone())),
        m: eigenvalues[0],
        big_m: *eigenvalues.last().expect("non-empty spectrum"),
        temperature: 1.0,
        quadratic: Some(spec),
    })
}

/// Ridge-regularised logistic regression negative log-likelihood.
///
/// `features` is `n × p`, `labels` are in `{0, 1}`. Uses `m = λ` and
/// `M = λ + ¼ λ_max(XᵀX)`.
pub fn logistic_target(
    features: DMatrix<f64>,
    labels: DVector<f64>,
    ridge: f64,
) -> Result<TargetPotential> {
    let n = features.nrows();
    if n == 0 || features.ncols() == 0 {
        return Err(invalid("features", "need at least one row and one column"));
    }
    if labels.len() != n {
        return Err(LangevinError::DimensionMismatch {
            expected: n,
            got: labels.len(),
        });
    }
    if let Some((index, &value)) = labels
        .iter()
        .enumerate()
        .find(|(_, &y)| y != 0.0 && y != 1.0)
    {
        return Err(LangevinError::InvalidLabel { index, value });
    }
    if !(ridge.is_finite() && ridge > 0.0) {
        return Err(invalid("lambda", format!("must be positive, got {ridge}")));
    }
    let gram = features.transpose() * &features;
    let top = sorted_eigenvalues(&gram).last().copied().unwrap_or(0.0).max(0.0);
    let potential = RidgeLogistic {
        features,
        labels,
        ridge,
    };
    TargetPotential::custom(potential, ridge, ridge + 0.25 * top)
}

/// Worst observed violation of the two curvature inequalities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureReport {
    pub pairs: usize,
    /// Largest `(m/2)‖d‖² − Bregman(θ, θ′)` relative to the term magnitudes.
    pub convexity_excess: f64,
    /// Largest `‖∇f(θ) − ∇f(θ′)‖ − M‖d‖` relative to `M‖d‖`.
    pub lipschitz_excess: f64,
}

impl CurvatureReport {
    pub fn holds(&self, slack: f64) -> bool {
        self.convexity_excess <= slack && self.lipschitz_excess <= slack
    }
}

/// Randomised spot check of
/// `f(θ) − f(θ′) − ∇f(θ′)ᵀ(θ−θ′) ≥ (m/2)‖θ−θ′‖²` and
/// `‖∇f(θ) − ∇f(θ′)‖ ≤ M‖θ−θ′‖` on pairs drawn around `center`.
pub fn check_curvature<R: Rng + ?Sized>(
    target: &TargetPotential,
    center: &DVector<f64>,
    radius: f64,
    pairs: usize,
    rng: &mut R,
) -> CurvatureReport {
    let p = target.dim();
    let mut report = CurvatureReport {
        pairs,
        convexity_excess: f64::NEG_INFINITY,
        lipschitz_excess: f64::NEG_INFINITY,
    };
    for _ in 0..pairs {
        let a = center + rng::standard_normal(rng, p) * radius;
        let b = center + rng::standard_normal(rng, p) * radius;
        let d = &a - &b;
        let (fa, fb) = (target.value(&a), target.value(&b));
        let (ga, gb) = (target.gradient(&a), target.gradient(&b));
        let linear = gb.dot(&d);
        let quad = 0.5 * target.m() * d.norm_squared();
        let scale = fa.abs() + fb.abs() + linear.abs() + quad;
        let excess = (quad - (fa - fb - linear)) / scale.max(f64::MIN_POSITIVE);
        report.convexity_excess = report.convexity_excess.max(excess);
        let lip = target.big_m() * d.norm();
        let excess = ((&ga - &gb).norm() - lip) / lip.max(f64::MIN_POSITIVE);
        report.lipschitz_excess = report.lipschitz_excess.max(excess);
    }
    report
}
