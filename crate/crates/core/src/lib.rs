//! Polyharmonic Hardy-space analysis on the ball of the quadric
//! `{z·theta : z in C, theta in S^(d-1)}` with `(z, theta) ~ (-z, -theta)`.
//!
//! The crate works with functions written in per-mode form
//!
//! ```text
//! f(z, theta) = sum_{k,l} sum_j c_{k,l;j} z^(k+2j) Y_{k,l}(theta)
//! ```
//!
//! where `Y_{k,l}` is a fixed real orthonormal spherical-harmonic basis.
//! Square-summable coefficient tables form a Hilbert space in which
//! polyharmonic polynomials are dense; everything here is phrased in terms
//! of those tables:
//!
//! * [`sphere`] — harmonic bases, zonal and Gegenbauer functions, sphere
//!   quadrature rules;
//! * [`almansi`] — conversion between multivariate polynomials, sampled
//!   functions and coefficient tables, plus series evaluation;
//! * [`hardy`] — norms, inner products, boundary traces, admissibility
//!   checks, reconstruction from boundary data, sup-norm certificates;
//! * [`kernels`] — Cauchy-type, complexified Poisson and Hua-Aronszajn
//!   kernels with series and closed forms, and the reproducing formula;
//! * [`bvp`] — the Dirichlet problem for iterated Laplacians in harmonic
//!   coordinates (triangular mode systems, forward and inverse maps);
//! * [`interp`] — per-mode radial interpolation and a computable sup-norm
//!   error majorant;
//! * [`cubature`] — pseudo-positive measures, moment-matched quadrature
//!   weights, the per-mode cubature rule and its error majorant;
//! * [`verify`] — the self-check suites run by the `verify` CLI command and
//!   the acceptance tests.

pub mod almansi;
pub mod bvp;
pub mod cubature;
mod error;
pub mod hardy;
pub mod interp;
pub mod kernels;
pub mod sphere;
mod util;
pub mod verify;

pub use error::{Error, Result};
