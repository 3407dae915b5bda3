//! Spectral decision procedures for quantum Markov maps and finitely
//! correlated spin-chain states.
//!
//! The objects of study are unital completely positive maps
//! `τ(x) = Σ_k l_k x l_k†` on a full matrix algebra, together with a normal
//! invariant state `ρ`. Everything asymptotic about such a pair (ergodicity,
//! strong mixing, strong ergodicity, the Kolmogorov two-point property) is
//! controlled by the spectrum of the associated superoperator, and this crate
//! turns those criteria into executable checks:
//!
//! * [`channel`] — states, Kraus channels, superoperators and their spectra;
//! * [`structure`] — invariant states, support projections, corner
//!   reductions, fixed-point and multiplicative-domain algebras, conditional
//!   expectations;
//! * [`kms`] — the KMS (time-reversed) adjoint channel and modular
//!   commutation tests;
//! * [`classify`] — ergodic / mixing / strongly ergodic / Kolmogorov
//!   verdicts with cross-validated certificates;
//! * [`dilation`] — the truncated minimal weak Markov dilation and its
//!   structural identities;
//! * [`fcs`] — translation-invariant chain states built from Popescu tuples:
//!   window marginals, correlation decay, factoriality and the purity
//!   criterion;
//! * [`corpus`] — named example channels and tuples plus seeded random
//!   instances;
//! * [`suite`] — the cross-theorem consistency suite behind `selftest`.
//!
//! All numerical kernels are generic over the complex scalar through
//! [`scalar::ChanScalar`]; the concrete aliases below fix the default
//! double-precision instantiation used by the CLI and the test suites.

pub mod channel;
pub mod classify;
pub mod corpus;
pub mod dilation;
pub mod error;
pub mod fcs;
pub mod io;
pub mod kms;
pub mod linalg;
pub mod scalar;
pub mod structure;
pub mod suite;
pub mod tol;

pub use error::{Error, Result};
pub use scalar::ChanScalar;
pub use tol::Tolerances;

/// Single-precision complex scalar.
pub type C32 = ndarray_linalg::c32;
/// Double-precision complex scalar, the default instantiation.
pub type C64 = ndarray_linalg::c64;

/// Default density-matrix state type.
pub type DensityState = channel::DensityState<C64>;
/// Default Kraus channel type.
pub type KrausChannel = channel::KrausChannel<C64>;
/// Default superoperator type.
pub type Superoperator = channel::Superoperator<C64>;
/// Default spectral data type.
pub type SpectralData = channel::SpectralData<C64>;
/// Default Popescu tuple type.
pub type PopescuTuple = fcs::PopescuTuple<C64>;
/// Default weak Markov dilation type.
pub type DilationSpace = dilation::DilationSpace<C64>;
