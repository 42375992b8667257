//! Choosing `(h, K)` for a target precision `ε`.
//!
//! [`plan_for_epsilon`] gives the analytic sufficient choice: half of the
//! budget for the bias, half for the contraction term. The searches
//! [`minimal_k_our`] and [`minimal_k_dm`] instead find the smallest `K` for
//! which *some* step on a grid brings the respective bound under `ε`, and
//! [`figure1_curves`] tabulates both across dimensions.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{crossover, dm_bias_squared, theorem1_bound, theorem1_in_regime, BoundInputs, Regime};
use crate::error::{invalid, LangevinError, Result};

/// Largest iteration count the searches consider.
pub const K_MAX: u64 = 1_000_000_000_000;

/// Which of the two step-size caps was active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Binding {
    /// `h = m²ε²/(14M²p)`: the bias budget.
    Accuracy,
    /// `h = 2/(m+M)`.
    StepCap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub epsilon: f64,
    pub h: f64,
    #[serde(rename = "K")]
    pub k: u64,
    pub predicted_bound: f64,
    pub binding: Binding,
    /// The initial law is already within `ε/2`; no iterations needed.
    pub zero_iterations: bool,
}

fn check_problem(m: f64, big_m: f64, p: u64, w2_init: f64, epsilon: f64) -> Result<()> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(invalid("eps", format!("must be positive, got {epsilon}")));
    }
    if !(m.is_finite() && m > 0.0 && big_m.is_finite() && big_m >= m) {
        return Err(invalid("m/M", format!("need 0 < m <= M, got m = {m}, M = {big_m}")));
    }
    if p == 0 {
        return Err(invalid("p", "must be positive"));
    }
    if !(w2_init.is_finite() && w2_init >= 0.0) {
        return Err(invalid("w2init", format!("must be >= 0, got {w2_init}")));
    }
    Ok(())
}

/// `h = min(m²ε²/(14M²p), 2/(m+M))`, `K = ⌈log(2·W0/ε)/(mh)⌉`.
pub fn plan_for_epsilon(m: f64, big_m: f64, p: u64, w2_init: f64, epsilon: f64) -> Result<Plan> {
    check_problem(m, big_m, p, w2_init, epsilon)?;
    let accuracy_step = m * m * epsilon * epsilon / (14.0 * big_m * big_m * p as f64);
    let cap = crossover(m, big_m);
    let (h, binding) = if accuracy_step <= cap {
        (accuracy_step, Binding::Accuracy)
    } else {
        (cap, Binding::StepCap)
    };
    let zero_iterations = w2_init <= epsilon / 2.0;
    let k = if zero_iterations {
        0
    } else {
        ((2.0 * w2_init / epsilon).ln() / (m * h)).ceil() as u64
    };
    let predicted_bound = theorem1_bound(&BoundInputs::new(m, big_m, h, k, p, w2_init))?.value;
    Ok(Plan {
        epsilon,
        h,
        k,
        predicted_bound,
        binding,
        zero_iterations,
    })
}

/// Candidate step sizes, ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct StepGrid {
    steps: Vec<f64>,
}

impl StepGrid {
    pub const DEFAULT_POINTS: usize = 1_000_000;

    /// `n` geometrically spaced points from `lo` to `hi` inclusive.
    pub fn geometric(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(invalid("grid", format!("need 0 < lo <= hi, got [{lo}, {hi}]")));
        }
        if n < 2 {
            return Err(invalid("grid-size", format!("need at least 2 points, got {n}")));
        }
        let ratio = (hi / lo).ln();
        let last = (n - 1) as f64;
        let mut steps: Vec<f64> = (0..n).map(|i| lo * (ratio * i as f64 / last).exp()).collect();
        steps[0] = lo;
        steps[n - 1] = hi;
        Ok(Self { steps })
    }

    /// `[2/((m+M)·10⁶), 2/(m+M)]`.
    pub fn standard(m: f64, big_m: f64, n: usize) -> Result<Self> {
        let hi = crossover(m, big_m);
        Self::geometric(hi * 1e-6, hi, n)
    }

    /// Like [`StepGrid::standard`], with the lower end pushed down to a tenth
    /// of `m²ε²/(14M²p)` when that is smaller, so that the bias-optimal steps
    /// for large `p` or small `ε` are covered.
    pub fn for_precision(m: f64, big_m: f64, p: u64, epsilon: f64, n: usize) -> Result<Self> {
        let hi = crossover(m, big_m);
        let accuracy_step = m * m * epsilon * epsilon / (14.0 * big_m * big_m * p as f64);
        Self::geometric((hi * 1e-6).min(accuracy_step / 10.0), hi, n)
    }

    /// Inserts the geometric midpoint between neighbours: `2n − 1` points
    /// containing the original grid.
    pub fn refined(&self) -> Self {
        let mut steps = Vec::with_capacity(2 * self.steps.len() - 1);
        for w in self.steps.windows(2) {
            steps.push(w[0]);
            steps.push((w[0] * w[1]).sqrt());
        }
        steps.push(*self.steps.last().expect("grid has at least two points"));
        Self { steps }
    }

    pub fn steps(&self) -> &[f64] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Result of a minimal-`K` search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepChoice {
    #[serde(rename = "K")]
    pub k: u64,
    pub h: f64,
}

/// Smallest `K` over the grid with `within(h, K)`; `within` must be monotone
/// in `K`. Binary search per step, skipping steps that cannot beat the
/// incumbent.
fn search<F>(grid: &StepGrid, within: F) -> Option<StepChoice>
where
    F: Fn(f64, u64) -> bool,
{
    let mut best: Option<StepChoice> = None;
    for &h in grid.steps() {
        let mut hi = match best {
            Some(StepChoice { k: 0, .. }) => break,
            Some(b) if !within(h, b.k - 1) => continue,
            Some(b) => b.k - 1,
            None if !within(h, K_MAX) => continue,
            None => K_MAX,
        };
        let mut lo = 0;
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if within(h, mid) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        best = Some(StepChoice { k: lo, h });
    }
    best
}

fn check_grid(grid: &StepGrid, m: f64, big_m: f64) -> Result<()> {
    let cap = crossover(m, big_m);
    match (grid.steps().first(), grid.steps().last()) {
        (Some(&lo), Some(&hi)) if lo > 0.0 && hi <= cap => Ok(()),
        _ => Err(invalid("grid", format!("steps must lie in (0, 2/(m+M) = {cap}]"))),
    }
}

/// `K_our = min{K : ∃ h in grid, theorem1_bound(h, K) ≤ ε}`.
pub fn minimal_k_our(
    m: f64,
    big_m: f64,
    p: u64,
    w2_init: f64,
    epsilon: f64,
    grid: &StepGrid,
) -> Result<StepChoice> {
    check_problem(m, big_m, p, w2_init, epsilon)?;
    check_grid(grid, m, big_m)?;
    let bound = |h: f64, k: u64| {
        theorem1_in_regime(&BoundInputs::new(m, big_m, h, k, p, w2_init), Regime::A).value
    };
    search(grid, |h, k| bound(h, k) <= epsilon).ok_or_else(|| {
        LangevinError::UnreachablePrecision {
            epsilon,
            infimum: bound(grid.steps()[0], u64::MAX),
        }
    })
}

/// Same search under the Durmus–Moulines bound.
pub fn minimal_k_dm(
    m: f64,
    big_m: f64,
    p: u64,
    w2_init: f64,
    epsilon: f64,
    grid: &StepGrid,
) -> Result<StepChoice> {
    check_problem(m, big_m, p, w2_init, epsilon)?;
    check_grid(grid, m, big_m)?;
    let rate = |h: f64| 1.0 - m * big_m * h / (m + big_m);
    let bound = |h: f64, k: u64| {
        let contraction = if k == 0 { 1.0 } else { rate(h).powf(k as f64) };
        (2.0 * contraction * w2_init * w2_init + dm_bias_squared(m, big_m, h, p)).sqrt()
    };
    search(grid, |h, k| bound(h, k) <= epsilon).ok_or_else(|| {
        LangevinError::UnreachablePrecision {
            epsilon,
            infimum: dm_bias_squared(m, big_m, grid.steps()[0], p).sqrt(),
        }
    })
}

/// One row of the `K_our` vs `K_DM` comparison. `None` marks a precision
/// that the bound cannot reach on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub p: u64,
    pub epsilon: f64,
    pub k_our: Option<u64>,
    pub k_dm: Option<u64>,
}

impl CurvePoint {
    pub fn ratio(&self) -> Option<f64> {
        match (self.k_our, self.k_dm) {
            (Some(a), Some(b)) if a > 0 => Some(b as f64 / a as f64),
            _ => None,
        }
    }
}

fn reachable(r: Result<StepChoice>) -> Result<Option<u64>> {
    match r {
        Ok(c) => Ok(Some(c.k)),
        Err(LangevinError::UnreachablePrecision { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// `w2_init = (p + p/m)^½`, i.e. `‖θ⁽⁰⁾ − θ̄‖² = p` combined with the
/// `p/m` variance bound.
pub fn figure1_w2_init(p: u64, m: f64) -> f64 {
    (p as f64 + p as f64 / m).sqrt()
}

/// Minimal iteration counts under both bounds for each `(ε, p)`, ordered
/// by `ε` then `p`.
pub fn figure1_curves(
    m: f64,
    big_m: f64,
    epsilons: &[f64],
    p_values: &[u64],
    grid_points: usize,
) -> Result<Vec<CurvePoint>> {
    let cells: Vec<(f64, u64)> = epsilons
        .iter()
        .flat_map(|&e| p_values.iter().map(move |&p| (e, p)))
        .collect();
    cells
        .into_par_iter()
        .map(|(epsilon, p)| {
            check_problem(m, big_m, p, 1.0, epsilon)?;
            let grid = StepGrid::for_precision(m, big_m, p, epsilon, grid_points)?;
            let w2_init = figure1_w2_init(p, m);
            Ok(CurvePoint {
                p,
                epsilon,
                k_our: reachable(minimal_k_our(m, big_m, p, w2_init, epsilon, &grid))?,
                k_dm: reachable(minimal_k_dm(m, big_m, p, w2_init, epsilon, &grid))?,
            })
        })
        .collect()
}

pub const FIGURE1_CSV_HEADER: &str = "p,epsilon,k_our,k_dm,log10_k_our,log10_k_dm,ratio";

/// CSV with header [`FIGURE1_CSV_HEADER`]; unreachable entries are written
/// as `unreachable`.
pub fn write_figure1_csv<W: Write>(points: &[CurvePoint], mut out: W) -> std::io::Result<()> {
    fn k(v: Option<u64>) -> String {
        v.map_or_else(|| "unreachable".into(), |k| k.to_string())
    }
    fn lg(v: Option<u64>) -> String {
        v.map_or_else(|| "unreachable".into(), |k| format!("{:.6}", (k as f64).log10()))
    }
    writeln!(out, "{FIGURE1_CSV_HEADER}")?;
    for c in points {
        let ratio = c.ratio().map_or_else(|| "nan".into(), |r| format!("{r:.6}"));
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            c.p,
            c.epsilon,
            k(c.k_our),
            k(c.k_dm),
            lg(c.k_our),
            lg(c.k_dm),
            ratio
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plan_reference_instance() {
        let w = (10.0f64 + 2.5).sqrt();
        let plan = plan_for_epsilon(4.0, 5.0, 10, w, 0.1).unwrap();
        assert!((plan.h - 0.16 / 3500.0).abs() < 1e-20);
        assert_eq!(plan.binding, Binding::Accuracy);
        // ⌈log(2w/ε)/(4h)⌉ evaluated independently.
        assert_eq!(plan.k, 23290);
        assert!(plan.predicted_bound <= 0.1);
        assert!((plan.predicted_bound - 0.09861476921644319).abs() < 1e-12);
    }

    #[test]
    fn plan_warm_start_needs_no_iterations() {
        let plan = plan_for_epsilon(4.0, 5.0, 10, 0.05, 0.1).unwrap();
        assert_eq!(plan.k, 0);
        assert!(plan.zero_iterations);
        assert!(plan.predicted_bound <= 0.1);
    }

    #[test]
    fn plan_step_cap_binds_for_loose_precision() {
        let plan = plan_for_epsilon(1.0, 1.0, 1, 10.0, 20.0).unwrap();
        assert_eq!(plan.binding, Binding::StepCap);
        assert_eq!(plan.h, 1.0);
    }

    #[test]
    fn plan_rejects_bad_precision() {
        assert!(plan_for_epsilon(4.0, 5.0, 10, 1.0, 0.0).is_err());
        assert!(plan_for_epsilon(4.0, 5.0, 10, 1.0, -1.0).is_err());
    }

    #[test]
    fn grid_endpoints_and_refinement() {
        let g = StepGrid::standard(4.0, 5.0, 11).unwrap();
        assert_eq!(g.steps()[10], 2.0 / 9.0);
        assert!((g.steps()[0] - 2.0 / 9.0 * 1e-6).abs() < 1e-20);
        assert!(g.steps().windows(2).all(|w| w[0] < w[1]));
        let r = g.refined();
        assert_eq!(r.len(), 21);
        for (i, h) in g.steps().iter().enumerate() {
            assert_eq!(r.steps()[2 * i], *h);
        }
    }

    #[test]
    fn search_zero_iterations_when_already_precise() {
        let g = StepGrid::standard(4.0, 5.0, 100).unwrap();
        let c = minimal_k_our(4.0, 5.0, 1, 0.01, 1.0, &g).unwrap();
        assert_eq!(c.k, 0);
    }

    #[test]
    fn search_reports_unreachable_with_infimum() {
        let g = StepGrid::standard(4.0, 5.0, 100).unwrap();
        match minimal_k_our(4.0, 5.0, 10_000, 100.0, 1e-4, &g) {
            Err(LangevinError::UnreachablePrecision { infimum, .. }) => assert!(infimum > 1e-4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn search_rejects_grid_beyond_step_cap() {
        let g = StepGrid::geometric(0.01, 0.3, 10).unwrap();
        assert!(minimal_k_our(4.0, 5.0, 1, 1.0, 0.5, &g).is_err());
    }

    #[test]
    fn search_matches_brute_force_on_small_grid() {
        // Exhaustive scan over K for every grid point.
        let g = StepGrid::standard(4.0, 5.0, 40).unwrap();
        let (p, w, eps) = (3, 2.0, 0.5);
        let mut brute = u64::MAX;
        for &h in g.steps() {
            for k in 0..200_000u64 {
                let v = theorem1_in_regime(&BoundInputs::new(4.0, 5.0, h, k, p, w), Regime::A).value;
                if v <= eps {
                    brute = brute.min(k);
                    break;
                }
            }
        }
        assert_eq!(minimal_k_our(4.0, 5.0, p, w, eps, &g).unwrap().k, brute);
    }

    #[test]
    fn csv_marks_unreachable() {
        let pts = [CurvePoint { p: 10, epsilon: 0.1, k_our: Some(100), k_dm: None }];
        let mut buf = Vec::new();
        write_figure1_csv(&pts, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(FIGURE1_CSV_HEADER));
        assert!(text.contains("10,0.1,100,unreachable,2.000000,unreachable,nan"));
    }
}
