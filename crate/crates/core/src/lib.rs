//! Exact simulation of first-passage events of tempered stable
//! subordinators across non-increasing barriers.
//!
//! The crate samples the crossing time, the undershoot and the overshoot
//! of a (tempered) stable subordinator `S` over a barrier `b`, without any
//! discretisation bias. The building blocks are exposed individually:
//!
//! * [`zolotarev`]: Zolotarev's functions, stable densities and CDFs, and
//!   the quadrature-based weights needed by the undershoot sampler.
//! * [`rootfind`]: certified Newton inversion and Householder iteration.
//! * [`variates`]: random streams and exact samplers for the marginal laws.
//! * [`undershoot`]: the stable undershoot law conditional on the crossing time.
//! * [`passage`]: first-passage triplets for stable and tempered stable
//!   subordinators, with [`boundary`] describing the barriers.
//! * [`bv`]: first passage of a difference of two tempered stable subordinators.
//! * [`apps`]: barrier option pricing and a Monte Carlo FPDE solver.
//! * [`validation`]: KS tests, direct-inversion references, invariant grids
//!   and work-counter benchmarks.

pub mod apps;
pub mod boundary;
pub mod bv;
pub mod cli;
pub mod error;
pub mod parallel;
pub mod params;
pub mod passage;
pub mod quadrature;
pub mod rng;
pub mod rootfind;
pub mod special;
pub mod undershoot;
pub mod validation;
pub mod variates;
pub mod zolotarev;

pub use boundary::Boundary;
pub use error::{Error, Result};
pub use params::{Precision, StableParams, TemperedParams};
pub use passage::PassageTriplet;
pub use quadrature::QuadratureSpec;
pub use rng::{RngStream, WorkCounters};
