//! Numerical verification toolkit for uniqueness of backward parabolic equations
//! with coefficients that are Osgood-continuous in time away from `t = 0`.
//!
//! The crate computes on periodic grids ([`spectral`]) and provides the Carleman
//! weight ([`weight`]), Littlewood-Paley blocks ([`littlewood_paley`]), modified
//! Bony paraproducts ([`paraproduct`]), time mollification of coefficients
//! ([`coefficients`]), a Carleman-inequality harness ([`carleman`]) and the
//! explicit non-uniqueness example for a coefficient that is Hölder of every
//! order but not Osgood ([`counterexample`]). [`suite`] ties them into
//! machine-readable verification reports.

pub mod carleman;
pub mod coefficients;
pub mod counterexample;
pub mod ensemble;
pub mod error;
pub mod littlewood_paley;
pub mod modulus;
pub mod paraproduct;
pub mod quadrature;
pub mod report;
pub mod smooth;
pub mod spectral;
pub mod suite;
pub mod weight;

pub use error::{Error, Result};
