//! Evaluation, sequencing and schedule optimization for stochastic
//! appointment systems.
//!
//! A session consists of `n` patients with independent random service times.
//! Waiting and idle times follow the Lindley recursion
//! `W[i+1] = (W[i] + B - x)^+`, `I[i+1] = (W[i] + B - x)^-`, and the objective
//! is `omega * total idle + (1 - omega) * total wait`. This crate provides:
//!
//! * a service-time distribution catalogue ([`dist`]) with moments,
//!   quantiles, grid discretization and dilation-order certificates,
//! * exact evaluators for the cost of any sequence and schedule
//!   ([`lindley`]): a grid-pmf convolution engine and a closed-form
//!   exponential-mixture engine, plus a seeded Monte Carlo oracle,
//! * schedule builders and optimal-schedule solvers ([`schedule`]),
//! * sequence search with smallest-variance-first (SVF) comparison,
//!   largest-variance-last pruning and exchangeability reduction
//!   ([`sequence`]),
//! * computable worst-case bounds on the SVF approximation ratio
//!   ([`bounds`]),
//! * instance generators and CSV study drivers ([`experiments`]).
//!
//! Enumeration and Monte Carlo loops are data-parallel via rayon when the
//! `parallel` feature (default) is enabled; results are bit-identical to the
//! sequential fallback.

pub mod bounds;
pub mod dist;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod io;
pub mod lindley;
pub mod math;
pub mod mixexp;
pub mod pmf;
pub mod schedule;
pub mod sequence;

pub use dist::{DilationCertificate, DilationStatus, ServiceDistribution};
pub use error::{Error, Result};
pub use lindley::{CostBreakdown, Instance, McCost, Schedule, Sequence};
pub use pmf::GridPMF;
pub use sequence::SearchReport;
