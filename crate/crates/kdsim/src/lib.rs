//! Kirkwood-Dirac quasiprobability machinery for qubit phase space.
//!
//! The crate builds everything around the transition quasiprobability of a
//! state between the computational basis and its Fourier (character)
//! basis: the distribution itself and its Hermitian direction-averaged
//! variant, the covariance rules that make a class of circuits classically
//! trackable, a phase-space sampling simulator with an exact
//! branch-enumeration oracle, exact rational geometry of the stabilizer /
//! rebit / CSS polytopes with verified membership certificates, bound
//! (KD-positive yet non-stabilizer) state scans along shared facets, a
//! negativity-based resource monotone, and Monte Carlo volume estimates of
//! the classification categories.
//!
//! Numeric code is generic over the scalar via the [`scalar::Scalar`]
//! trait (`f32`/`f64`); geometry that must be exact runs over
//! `num::BigRational`. Concrete `f64` aliases for the main types live at
//! the crate root.

pub mod error;
pub mod circuit;
pub mod group;
pub mod kd;
pub mod matrix;
pub mod polytope;
pub mod sim;
pub mod rng;
pub mod scalar;
pub mod state;
pub mod volume;

pub use error::{Error, Result};

pub use circuit::{parse_circuit, Circuit, Gate};
pub use group::{BitVector, PauliLabel, PhasePoint};
pub use kd::{is_kd_positive, kd_distribution, kd_mana};
pub use polytope::{facet_enumeration, shared_facets, stabilizer_membership, Membership};
pub use rng::CounterRng;
pub use sim::{exact_simulate, run_shots, total_variation_distance};
pub use state::{ginibre_rebit_sample, ginibre_sample};
pub use volume::{classify_state, estimate_volumes, Category};

/// Default numeric tolerance for invariant checks, overridable per call.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Exact rational scalar used by the polytope geometry.
pub type Rational = num::BigRational;

pub type PureState64 = state::PureState<f64>;
pub type DensityMatrix64 = state::DensityMatrix<f64>;
pub type KdDistribution64 = kd::KdDistribution<f64>;
pub type KdSymbol64 = kd::KdSymbol<f64>;
pub type ManaValue64 = kd::ManaValue<f64>;
pub type PhaseSampler64 = sim::PhaseSampler<f64>;
