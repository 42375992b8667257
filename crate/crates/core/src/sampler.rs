//! Langevin Monte Carlo chains.
//!
//! All chains share one update, `ϑ ← ϑ − h·drift + √(2h)·ξ`, and differ in
//! where the drift comes from: the exact gradient (LMC), a noisy or
//! subsampled gradient (nLMC), or the tempered form with `h = τ/M` applied
//! to `f/τ`. Letting `τ → 0` in the tempered chain gives gradient descent.
//!
//! Noise is never drawn inside the step functions; they take `ξ` as an
//! argument. The `run_*` drivers draw `ξ` from the diffusion stream and any
//! oracle randomness from a separate oracle stream (see [`crate::rng`]), so a
//! noiseless nLMC run reproduces plain LMC exactly.

use std::io::Write;
use std::sync::Arc;
use std::time::{Duration, Instant};

use nalgebra::DVector;
use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, LangevinError, Result};
use crate::rng::{self, StreamRng};
use crate::targets::TargetPotential;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseLaw {
    Gaussian,
    /// Independent ±1 components.
    Rademacher,
}

/// How the chain observes `∇f`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum GradientOracle {
    #[default]
    Exact,
    /// `Y = ∇f(ϑ) + σζ` with `E ζ = 0`, `E‖ζ‖² = p`.
    GaussianNoise { sigma: f64, law: NoiseLaw },
    /// `Y = (n/b) Σ_{i∈B} ∇ℓ_i(ϑ) + ∇r(ϑ)` over a uniform size-`b` subset `B`
    /// drawn without replacement.
    Subsampled { batch: usize },
}

impl GradientOracle {
    pub fn gaussian(sigma: f64) -> Self {
        GradientOracle::GaussianNoise {
            sigma,
            law: NoiseLaw::Gaussian,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GradientOracle::Exact => "exact",
            GradientOracle::GaussianNoise { .. } => "gaussian_noise",
            GradientOracle::Subsampled { .. } => "subsampled",
        }
    }

    pub fn validate(&self, target: &TargetPotential) -> Result<()> {
        match *self {
            GradientOracle::Exact => Ok(()),
            GradientOracle::GaussianNoise { sigma, .. } => {
                if sigma.is_finite() && sigma >= 0.0 {
                    Ok(())
                } else {
                    Err(invalid("sigma", format!("must be >= 0, got {sigma}")))
                }
            }
            GradientOracle::Subsampled { batch } => {
                let n = target
                    .observation_count()
                    .ok_or(LangevinError::NotSumStructured)?;
                if batch == 0 || batch > n {
                    return Err(invalid("batch", format!("must be in 1..={n}, got {batch}")));
                }
                Ok(())
            }
        }
    }

    /// One gradient observation at `theta`, consuming oracle randomness from `rng`.
    pub fn observe(
        &self,
        target: &TargetPotential,
        theta: &DVector<f64>,
        rng: &mut StreamRng,
    ) -> Result<DVector<f64>> {
        match *self {
            GradientOracle::Exact => Ok(target.gradient(theta)),
            GradientOracle::GaussianNoise { sigma, law } => {
                let grad = target.gradient(theta);
                if sigma == 0.0 {
                    return Ok(grad);
                }
                let zeta = match law {
                    NoiseLaw::Gaussian => rng::standard_normal(rng, theta.len()),
                    NoiseLaw::Rademacher => rng::rademacher(rng, theta.len()),
                };
                Ok(grad + zeta * sigma)
            }
            GradientOracle::Subsampled { batch } => {
                let n = target
                    .observation_count()
                    .ok_or(LangevinError::NotSumStructured)?;
                let mut picked = if batch == n {
                    (0..n).collect::<Vec<_>>()
                } else {
                    index::sample(rng, n, batch).into_vec()
                };
                picked.sort_unstable();
                target
                    .partial_gradient(&picked, n as f64 / batch as f64, theta)
                    .ok_or(LangevinError::NotSumStructured)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LmcConfig {
    /// Step size `h`.
    pub step_size: f64,
    /// Number of iterations `K`.
    pub iterations: usize,
    pub seed: u64,
    #[serde(default)]
    pub oracle: GradientOracle,
}

impl LmcConfig {
    pub fn new(step_size: f64, iterations: usize, seed: u64) -> Self {
        Self {
            step_size,
            iterations,
            seed,
            oracle: GradientOracle::Exact,
        }
    }

    pub fn with_oracle(mut self, oracle: GradientOracle) -> Self {
        self.oracle = oracle;
        self
    }

    fn validate(&self, target: &TargetPotential) -> Result<()> {
        let h = self.step_size;
        if !(h.is_finite() && h > 0.0) {
            return Err(invalid("h", format!("must be positive, got {h}")));
        }
        if h >= 2.0 / target.big_m() {
            log::warn!(
                "step size h = {h} is >= 2/M = {}; convergence guarantees do not apply",
                2.0 / target.big_m()
            );
        }
        self.oracle.validate(target)
    }
}

pub type InitialSampler = Arc<dyn Fn(&mut StreamRng) -> DVector<f64> + Send + Sync>;

/// Law of `ϑ⁽⁰⁾`.
#[derive(Clone)]
pub enum Initial {
    Point(DVector<f64>),
    /// Random start; draws come from the replica's dedicated initial stream.
    Sampler(InitialSampler),
}

impl std::fmt::Debug for Initial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Initial::Point(p) => f.debug_tuple("Point").field(p).finish(),
            Initial::Sampler(_) => f.write_str("Sampler(..)"),
        }
    }
}

impl From<DVector<f64>> for Initial {
    fn from(p: DVector<f64>) -> Self {
        Initial::Point(p)
    }
}

impl Initial {
    fn draw(&self, seed: u64, replica: u64) -> DVector<f64> {
        match self {
            Initial::Point(p) => p.clone(),
            Initial::Sampler(s) => s(&mut rng::stream(seed, replica, rng::INITIAL)),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub iterates: Vec<DVector<f64>>,
    pub config: LmcConfig,
    pub wall_time: Duration,
}

/// Compact JSON view of a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySummary {
    pub iterations: usize,
    pub final_iterate: Vec<f64>,
    /// Coordinate-wise average of `ϑ⁽⁰⁾, …, ϑ⁽ᴷ⁾`.
    pub running_mean: Vec<f64>,
}

impl Trajectory {
    pub fn last(&self) -> &DVector<f64> {
        self.iterates.last().expect("trajectory always holds the initial point")
    }

    pub fn dim(&self) -> usize {
        self.last().len()
    }

    pub fn summary(&self) -> TrajectorySummary {
        let mut mean = DVector::zeros(self.dim());
        for x in &self.iterates {
            mean += x;
        }
        mean /= self.iterates.len() as f64;
        TrajectorySummary {
            iterations: self.iterates.len() - 1,
            final_iterate: self.last().iter().copied().collect(),
            running_mean: mean.iter().copied().collect(),
        }
    }

    /// CSV with header `k,theta_0,…,theta_{p-1}`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        write!(out, "k")?;
        for j in 0..self.dim() {
            write!(out, ",theta_{j}")?;
        }
        writeln!(out)?;
        for (k, x) in self.iterates.iter().enumerate() {
            write!(out, "{k}")?;
            for v in x.iter() {
                write!(out, ",{v:e}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// `state − h·drift + √(2h)·noise`.
pub fn langevin_update(
    state: &DVector<f64>,
    drift: &DVector<f64>,
    h: f64,
    noise: &DVector<f64>,
) -> Result<DVector<f64>> {
    for v in [drift, noise] {
        if v.len() != state.len() {
            return Err(LangevinError::DimensionMismatch {
                expected: state.len(),
                got: v.len(),
            });
        }
    }
    if !(h > 0.0) {
        return Err(invalid("h", format!("must be positive, got {h}")));
    }
    Ok(state - drift * h + noise * (2.0 * h).sqrt())
}

/// One exact-gradient LMC step with caller-supplied `ξ`.
pub fn lmc_step(
    state: &DVector<f64>,
    target: &TargetPotential,
    h: f64,
    noise: &DVector<f64>,
) -> Result<DVector<f64>> {
    target.check_dim(state)?;
    langevin_update(state, &target.gradient(state), h, noise)
}

/// One noisy-gradient step, given the observed gradient `Y` and `ξ`.
pub fn nlmc_step(
    state: &DVector<f64>,
    observed_gradient: &DVector<f64>,
    h: f64,
    noise: &DVector<f64>,
) -> Result<DVector<f64>> {
    langevin_update(state, observed_gradient, h, noise)
}

/// One step of LMC on `f/τ` with `h = τ/M`:
/// `ϑ − (1/M)∇f(ϑ) + √(2τ/M)·ξ`, where `∇f` and `M` belong to `target`.
pub fn tempered_step(
    state: &DVector<f64>,
    target: &TargetPotential,
    tau: f64,
    noise: &DVector<f64>,
) -> Result<DVector<f64>> {
    target.check_dim(state)?;
    if noise.len() != state.len() {
        return Err(LangevinError::DimensionMismatch {
            expected: state.len(),
            got: noise.len(),
        });
    }
    if !(tau >= 0.0) {
        return Err(invalid("tau", format!("must be >= 0, got {tau}")));
    }
    let big_m = target.big_m();
    Ok(state - target.gradient(state) / big_m + noise * (2.0 * tau / big_m).sqrt())
}

fn chain(
    target: &TargetPotential,
    config: &LmcConfig,
    initial: &Initial,
    replica: u64,
    record: bool,
) -> Result<Vec<DVector<f64>>> {
    let mut state = initial.draw(config.seed, replica);
    target.check_dim(&state)?;
    let p = state.len();
    let mut xi_rng = rng::stream(config.seed, replica, rng::DIFFUSION);
    let mut oracle_rng = rng::stream(config.seed, replica, rng::ORACLE);
    let mut iterates = Vec::with_capacity(if record { config.iterations + 1 } else { 1 });
    for _ in 0..config.iterations {
        let xi = rng::standard_normal(&mut xi_rng, p);
        let y = config.oracle.observe(target, &state, &mut oracle_rng)?;
        let next = langevin_update(&state, &y, config.step_size, &xi)?;
        if record {
            iterates.push(std::mem::replace(&mut state, next));
        } else {
            state = next;
        }
    }
    iterates.push(state);
    Ok(iterates)
}

/// Exact-gradient LMC; deterministic in `(config.seed, initial)`.
pub fn run_lmc(
    target: &TargetPotential,
    config: &LmcConfig,
    initial: impl Into<Initial>,
) -> Result<Trajectory> {
    if config.oracle != GradientOracle::Exact {
        return Err(LangevinError::OracleMismatch(config.oracle.name()));
    }
    run_nlmc(target, config, initial)
}

/// LMC driven by `config.oracle`; with the exact oracle or `σ = 0` this is
/// identical to [`run_lmc`].
pub fn run_nlmc(
    target: &TargetPotential,
    config: &LmcConfig,
    initial: impl Into<Initial>,
) -> Result<Trajectory> {
    config.validate(target)?;
    let start = Instant::now();
    let iterates = chain(target, config, &initial.into(), 0, true)?;
    Ok(Trajectory {
        iterates,
        config: config.clone(),
        wall_time: start.elapsed(),
    })
}

/// Final states `ϑ⁽ᴷ⁾` of `replicas` independent chains, computed in
/// parallel. Replica `r` uses streams `(seed, r)`; replica 0 equals
/// [`run_nlmc`]'s last iterate.
pub fn final_states(
    target: &TargetPotential,
    config: &LmcConfig,
    initial: impl Into<Initial>,
    replicas: usize,
) -> Result<Vec<DVector<f64>>> {
    config.validate(target)?;
    let initial = initial.into();
    (0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            chain(target, config, &initial, r, false)
                .map(|mut v| v.pop().expect("chain returns its final state"))
        })
        .collect()
}

/// Tempered chain `ϑ − (1/M)∇f + √(2τ/M)ξ`; `τ = 0` is gradient descent
/// with `h = 1/M`.
pub fn run_tempered_lmc(
    target: &TargetPotential,
    tau: f64,
    iterations: usize,
    seed: u64,
    initial: &DVector<f64>,
) -> Result<Trajectory> {
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(invalid("tau", format!("must be >= 0, got {tau}")));
    }
    let start = Instant::now();
    let config = LmcConfig::new(tau / target.big_m(), iterations, seed);
    if tau == 0.0 {
        let iterates = gradient_descent(target, 1.0 / target.big_m(), iterations, initial)?;
        return Ok(Trajectory {
            iterates,
            config,
            wall_time: start.elapsed(),
        });
    }
    target.check_dim(initial)?;
    let mut xi_rng = rng::stream(seed, 0, rng::DIFFUSION);
    let mut iterates = Vec::with_capacity(iterations + 1);
    iterates.push(initial.clone());
    for _ in 0..iterations {
        let xi = rng::standard_normal(&mut xi_rng, initial.len());
        let next = tempered_step(iterates.last().unwrap(), target, tau, &xi)?;
        iterates.push(next);
    }
    Ok(Trajectory {
        iterates,
        config,
        wall_time: start.elapsed(),
    })
}

/// `θ⁽ᵏ⁺¹⁾ = θ⁽ᵏ⁾ − h∇f(θ⁽ᵏ⁾)`; returns all `K + 1` points.
pub fn gradient_descent(
    target: &TargetPotential,
    h: f64,
    iterations: usize,
    initial: &DVector<f64>,
) -> Result<Vec<DVector<f64>>> {
    target.check_dim(initial)?;
    if !(h.is_finite() && h > 0.0) {
        return Err(invalid("h", format!("must be positive, got {h}")));
    }
    let mut path = Vec::with_capacity(iterations + 1);
    path.push(initial.clone());
    for _ in 0..iterations {
        let x = path.last().unwrap();
        let next = x - target.gradient(x) * h;
        path.push(next);
    }
    Ok(path)
}

/// Coordinate-wise moments of a batch of replica end states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicaSummary {
    pub replicas: usize,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    pub mean_std_error: Vec<f64>,
    pub variance_std_error: Vec<f64>,
}

impl ReplicaSummary {
    pub fn from_states(states: &[DVector<f64>]) -> Result<Self> {
        let n = states.len();
        if n < 2 {
            return Err(LangevinError::EmptySample);
        }
        let p = states[0].len();
        let nf = n as f64;
        let mut mean = vec![0.0; p];
        for s in states {
            for (m, v) in mean.iter_mut().zip(s.iter()) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= nf);
        let mut m2 = vec![0.0; p];
        let mut m4 = vec![0.0; p];
        for s in states {
            for j in 0..p {
                let d = s[j] - mean[j];
                m2[j] += d * d;
                m4[j] += d * d * d * d;
            }
        }
        let variance: Vec<f64> = m2.iter().map(|v| v / (nf - 1.0)).collect();
        let mean_std_error = variance.iter().map(|v| (v / nf).sqrt()).collect();
        let variance_std_error = (0..p)
            .map(|j| {
                let mu2 = m2[j] / nf;
                let mu4 = m4[j] / nf;
                ((mu4 - mu2 * mu2).max(0.0) / nf).sqrt()
            })
            .collect();
        Ok(Self {
            replicas: n,
            mean,
            variance,
            mean_std_error,
            variance_std_error,
        })
    }
}
