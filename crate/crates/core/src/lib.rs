//! Langevin Monte Carlo for smooth strongly log-concave densities.
//!
//! * [`targets`]: potentials `f` with curvature constants `(m, M)`, tempering.
//! * [`sampler`]: LMC, noisy-gradient LMC, tempered LMC, gradient descent.
//! * [`gaussian_oracle`]: exact laws of LMC iterates on Gaussian targets and W2.
//! * [`bounds`]: closed-form Wasserstein-2 convergence bounds.
//! * [`planner`]: step size / iteration count for a requested precision.
//!
//! ```
//! use langevin_core::{bounds, quadratic_target, run_lmc, LmcConfig};
//! use nalgebra::{dmatrix, dvector};
//!
//! let target = quadratic_target(dvector![0.0, 0.0], dmatrix![4.0, 0.0; 0.0, 5.0]).unwrap();
//! let chain = run_lmc(&target, &LmcConfig::new(0.1, 100, 7), dvector![1.0, 1.0]).unwrap();
//! assert_eq!(chain.iterates.len(), 101);
//!
//! let report = bounds::theorem1_bound(&bounds::BoundInputs::new(4.0, 5.0, 0.1, 10, 2, 1.5)).unwrap();
//! assert!((report.value - report.contraction_term - report.bias_term).abs() < 1e-12);
//! assert!(report.contraction_term > 0.0);
//! ```

pub mod bounds;
pub mod descriptor;
pub mod error;
pub mod gaussian_oracle;
pub mod planner;
pub mod rng;
pub mod sampler;
pub mod targets;

pub use bounds::{BoundInputs, BoundReport, Regime};
pub use descriptor::TargetDescriptor;
pub use error::{LangevinError, Result};
pub use gaussian_oracle::GaussianMoments;
pub use planner::{CurvePoint, Plan, StepChoice, StepGrid};
pub use sampler::{
    final_states, gradient_descent, lmc_step, nlmc_step, run_lmc, run_nlmc, run_tempered_lmc,
    GradientOracle, Initial, LmcConfig, NoiseLaw, ReplicaSummary, Trajectory,
};
pub use targets::{logistic_target, quadratic_target, Potential, QuadraticSpec, TargetPotential};
