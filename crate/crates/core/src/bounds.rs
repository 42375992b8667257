//! Closed-form upper bounds on `W2(ν_K, π)`.
//!
//! * [`theorem1_bound`]: exact-gradient LMC, `h ∈ (0, 2/M)`.
//! * [`theorem2_bound`]: noisy-gradient LMC with noise level `σ`.
//! * [`dm_bound`]: the earlier Durmus–Moulines bound, valid for `h ≤ 2/(m+M)`.
//!
//! Each bound splits into a contraction term that decays geometrically in
//! `K` and a bias term that does not. Numerical constants are used exactly
//! as published.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, LangevinError, Result};

const THM1_BIAS: f64 = 1.82;
const THM2_BIAS_A: f64 = 3.3;
const THM2_BIAS_B: f64 = 6.6;

/// Arguments shared by all bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub m: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
    pub h: f64,
    #[serde(rename = "K")]
    pub k: u64,
    pub p: u64,
    /// `W2(ν₀, π)`.
    pub w2_init: f64,
    #[serde(default)]
    pub sigma: f64,
}

impl BoundInputs {
    pub fn new(m: f64, big_m: f64, h: f64, k: u64, p: u64, w2_init: f64) -> Self {
        Self {
            m,
            big_m,
            h,
            k,
            p,
            w2_init,
            sigma: 0.0,
        }
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    /// `2/(m+M)`, where the two regimes meet.
    pub fn crossover(&self) -> f64 {
        crossover(self.m, self.big_m)
    }

    fn validate(&self) -> Result<()> {
        validate_constants(self.m, self.big_m)?;
        if !(self.w2_init.is_finite() && self.w2_init >= 0.0) {
            return Err(invalid("w2_init", format!("must be >= 0, got {}", self.w2_init)));
        }
        if self.p == 0 {
            return Err(invalid("p", "must be positive"));
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(invalid("sigma", format!("must be >= 0, got {}", self.sigma)));
        }
        Ok(())
    }
}

pub fn crossover(m: f64, big_m: f64) -> f64 {
    2.0 / (m + big_m)
}

fn validate_constants(m: f64, big_m: f64) -> Result<()> {
    if !(m.is_finite() && m > 0.0) {
        return Err(invalid("m", format!("must be positive, got {m}")));
    }
    if !(big_m.is_finite() && big_m >= m) {
        return Err(invalid("M", format!("must satisfy M >= m, got M = {big_m}, m = {m}")));
    }
    Ok(())
}

fn check_open_step(m: f64, big_m: f64, h: f64) -> Result<()> {
    validate_constants(m, big_m)?;
    let upper = 2.0 / big_m;
    if !(h > 0.0 && h < upper) {
        return Err(LangevinError::StepOutOfRange {
            h,
            range: format!("(0, 2/M = {upper})"),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// `h ≤ 2/(m+M)`.
    A,
    /// `h > 2/(m+M)`.
    B,
}

impl Regime {
    pub fn of(m: f64, big_m: f64, h: f64) -> Self {
        if h <= crossover(m, big_m) {
            Regime::A
        } else {
            Regime::B
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub value: f64,
    pub regime: Regime,
    /// Per-step contraction factor of the bound.
    pub gamma: f64,
    pub contraction_term: f64,
    pub bias_term: f64,
}

impl BoundReport {
    fn new(regime: Regime, gamma: f64, contraction_term: f64, bias_term: f64) -> Self {
        Self {
            value: contraction_term + bias_term,
            regime,
            gamma,
            contraction_term,
            bias_term,
        }
    }

    /// `γ = 0`: only possible for `m = M`, `h = 1/M`.
    pub fn is_exact_contraction(&self) -> bool {
        self.gamma == 0.0
    }
}

/// `γ = |1 − mh|` for `h ≤ 2/(m+M)`, else `|1 − Mh|`.
pub fn contraction_factor(m: f64, big_m: f64, h: f64) -> Result<f64> {
    check_open_step(m, big_m, h)?;
    Ok(match Regime::of(m, big_m, h) {
        Regime::A => (1.0 - m * h).abs(),
        Regime::B => (1.0 - big_m * h).abs(),
    })
}

fn pow_k(base: f64, k: u64) -> f64 {
    if k == 0 {
        1.0
    } else {
        base.powf(k as f64)
    }
}

/// Theorem 1 evaluated in a caller-chosen regime (both are valid at the
/// crossover).
pub fn theorem1_in_regime(inputs: &BoundInputs, regime: Regime) -> BoundReport {
    let BoundInputs { m, big_m, h, k, p, w2_init, .. } = *inputs;
    let root = (h * p as f64).sqrt();
    match regime {
        Regime::A => {
            let gamma = 1.0 - m * h;
            BoundReport::new(regime, gamma.abs(), pow_k(gamma, k) * w2_init, THM1_BIAS * (big_m / m) * root)
        }
        Regime::B => {
            let gamma = big_m * h - 1.0;
            let bias = THM1_BIAS * (big_m * h / (2.0 - big_m * h)) * root;
            BoundReport::new(regime, gamma.abs(), pow_k(gamma, k) * w2_init, bias)
        }
    }
}

/// Bound on `W2(ν_K, π)` for exact-gradient LMC.
///
/// Regime a: `(1−mh)^K·W0 + 1.82(M/m)(hp)^½`.
/// Regime b: `(Mh−1)^K·W0 + 1.82·Mh/(2−Mh)·(hp)^½`.
pub fn theorem1_bound(inputs: &BoundInputs) -> Result<BoundReport> {
    inputs.validate()?;
    check_open_step(inputs.m, inputs.big_m, inputs.h)?;
    Ok(theorem1_in_regime(inputs, Regime::of(inputs.m, inputs.big_m, inputs.h)))
}

pub fn theorem2_in_regime(inputs: &BoundInputs, regime: Regime) -> BoundReport {
    let BoundInputs { m, big_m, h, k, p, w2_init, sigma } = *inputs;
    let p = p as f64;
    let s2 = sigma * sigma;
    match regime {
        Regime::A => {
            let gamma = 1.0 - m * h / 2.0;
            let bias = (2.0 * h * p / m).sqrt() * (s2 + THM2_BIAS_A * big_m * big_m / m).sqrt();
            BoundReport::new(regime, gamma, pow_k(gamma, k) * w2_init, bias)
        }
        Regime::B => {
            let gamma = big_m * h / 2.0;
            let gap = 2.0 - big_m * h;
            let bias = (2.0 * h * h * p / gap).sqrt() * (s2 + THM2_BIAS_B * big_m / gap).sqrt();
            BoundReport::new(regime, gamma, pow_k(gamma, k) * w2_init, bias)
        }
    }
}

/// Bound on `W2(ν_K, π)` for noisy-gradient LMC with noise level `σ`.
///
/// Regime a: `(1−mh/2)^K·W0 + (2hp/m)^½·(σ² + 3.3M²/m)^½`.
/// Regime b: `(Mh/2)^K·W0 + (2h²p/(2−Mh))^½·(σ² + 6.6M/(2−Mh))^½`.
pub fn theorem2_bound(inputs: &BoundInputs) -> Result<BoundReport> {
    inputs.validate()?;
    check_open_step(inputs.m, inputs.big_m, inputs.h)?;
    Ok(theorem2_in_regime(inputs, Regime::of(inputs.m, inputs.big_m, inputs.h)))
}

/// `W2²` bias part of the Durmus–Moulines bound (the `K → ∞` limit).
pub fn dm_bias_squared(m: f64, big_m: f64, h: f64, p: u64) -> f64 {
    let s = m + big_m;
    (big_m * h * p as f64 / m)
        * s
        * (h + s / (2.0 * m * big_m))
        * (2.0 + big_m * big_m * h / m + big_m * big_m * h * h / 6.0)
}

/// Square root of
/// `2(1 − mMh/(m+M))^K·W0² + (Mhp/m)(m+M)(h + (m+M)/(2mM))(2 + M²h/m + M²h²/6)`.
pub fn dm_bound(inputs: &BoundInputs) -> Result<f64> {
    inputs.validate()?;
    let BoundInputs { m, big_m, h, k, p, w2_init, .. } = *inputs;
    let upper = crossover(m, big_m);
    if !(h > 0.0 && h <= upper) {
        return Err(LangevinError::StepOutOfRange {
            h,
            range: format!("(0, 2/(m+M) = {upper}]"),
        });
    }
    let rate = 1.0 - m * big_m * h / (m + big_m);
    let contraction = 2.0 * pow_k(rate, k) * w2_init * w2_init;
    Ok((contraction + dm_bias_squared(m, big_m, h, p)).sqrt())
}

/// `(‖θ₀ − θ̄‖² + p/m)^½ ≥ W2(δ_θ₀, π)`.
pub fn init_w2_from_mean(dist2_to_mean: f64, p: u64, m: f64) -> Result<f64> {
    if !(dist2_to_mean >= 0.0) {
        return Err(invalid("dist2", format!("must be >= 0, got {dist2_to_mean}")));
    }
    if !(m > 0.0) {
        return Err(invalid("m", format!("must be positive, got {m}")));
    }
    Ok((dist2_to_mean + p as f64 / m).sqrt())
}

/// `((2/m)(f(θ₀) − L + p))^½ ≥ W2(δ_θ₀, π)`, where `L ≤ ∫f dπ`
/// (`L = 0` whenever `f ≥ 0`).
pub fn init_w2_from_f(f_at_theta0: f64, p: u64, m: f64, f_lower_bound: f64) -> Result<f64> {
    if !(m > 0.0) {
        return Err(invalid("m", format!("must be positive, got {m}")));
    }
    let radicand = (2.0 / m) * (f_at_theta0 - f_lower_bound + p as f64);
    if radicand < 0.0 || radicand.is_nan() {
        return Err(LangevinError::NegativeRadicand(radicand));
    }
    Ok(radicand.sqrt())
}
