//! The compact genetic algorithm (cGA), its exact mean-field drift, and the
//! limiting ODE `dX/dt = f(X)` whose stable fixed points are the strict
//! local maxima of an injective pseudo-boolean fitness function.
//!
//! * [`landscape`] fitness functions, injectivity and the local-maximum oracle
//! * [`cga`] the stochastic algorithm and its continuous-time interpolation
//! * [`drift`] winner/loser distributions, the drift field and its Jacobians
//! * [`ode`] RK4 integration, limits, corner stability and path distances
//! * [`harness`] Monte Carlo campaigns, step-size sweeps and report writers
//!
//! ```
//! use cga_ode::{drift::drift, FitnessSpec, Landscape, ProbabilityVector};
//!
//! let land = Landscape::new(FitnessSpec::binval(2))?;
//! let f = drift(&ProbabilityVector::center(2), &land)?;
//! assert_eq!(f.as_slice(), &[0.5, 0.25]);
//! # Ok::<(), cga_ode::Error>(())
//! ```

pub mod cga;
pub mod cli;
pub mod drift;
pub mod error;
pub mod harness;
pub mod landscape;
pub mod ode;
pub mod provenance;
pub mod pv;

pub use error::{Error, Result};
pub use landscape::{FitnessSpec, Landscape, LocalMaxStatus, Solution};
pub use pv::ProbabilityVector;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/landscapes.md")]
    mod landscapes {}
    #[doc = include_str!("../../../book/src/cga.md")]
    mod cga {}
    #[doc = include_str!("../../../book/src/drift.md")]
    mod drift {}
    #[doc = include_str!("../../../book/src/ode.md")]
    mod ode {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
