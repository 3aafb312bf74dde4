//! Geometric deep learning building blocks written from scratch.
//!
//! Everything differentiates through the scalar tape in [`autodiff`]:
//! fully connected networks ([`nn`]), Deep Sets ([`deepsets`]) and
//! message-passing graph networks ([`gnn`]). [`groups`] makes finite group
//! actions executable (orbits, symmetrization, invariance checks), [`wl`]
//! implements Weisfeiler-Lehman refinement next to a brute-force isomorphism
//! oracle, and [`analysis`] evaluates KL divergences, the Catoni PAC-Bayes
//! bound and the symmetrization gap on finite estimator families.
//! [`experiments`] reproduces small, seeded experiments on top of all that.

pub mod analysis;
pub mod autodiff;
pub mod checkpoint;
pub mod config;
pub mod data;
pub mod deepsets;
pub mod error;
pub mod experiments;
pub mod gnn;
pub mod graph;
pub mod groups;
pub mod nn;
pub mod rng;
pub mod training;
pub mod wl;

pub use error::{Error, Result};
