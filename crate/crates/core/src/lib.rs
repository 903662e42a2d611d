//! Exact distributions and lateral conditional variances of a particle that
//! alternates between a free and an adsorbed state while performing an
//! advected random walk on the 2D lattice (or with Gaussian dispersion).
//!
//! The crate is organised bottom-up:
//!
//! * [`kinetics`]: the two-state free/adsorbed chain and the law of the
//!   number of free steps (the Markov binomial distribution).
//! * [`lattice`]: closed-form joint pmfs and conditional-variance curves for
//!   the lattice dispersion models, plus the planar asymmetric walk.
//! * [`convolution`]: a generic engine that computes the same objects by
//!   iterated convolution and serves as an oracle for the closed forms.
//! * [`gaussian`]: the Gaussian-dispersion mixture with its atom at the origin.
//! * [`montecarlo`]: a seeded, parallel particle simulator.
//! * [`oracle`]: brute-force enumerators used to cross-check everything above.

pub mod convolution;
pub mod error;
pub mod gaussian;
pub mod kinetics;
pub mod lattice;
pub mod montecarlo;
pub mod numeric;
pub mod oracle;
pub mod quadrature;

pub use error::{Error, Result};
pub use kinetics::{InitialDistribution, KineticsParams, OccupationPmf};
pub use lattice::{CondVarCurve, DispersionModel, LatticePmf, Point};
