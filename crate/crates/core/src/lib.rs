//! Almost unimodular systems with pairwise disjoint spectra on compact groups.

pub mod group;
pub mod constructor;
pub mod dyadic;
pub mod rademacher;
pub mod report;
pub mod spectral;
pub mod verifier;
