//! Exact genus expansions of Hermitian one-matrix models.

pub mod correlator;
pub mod exactmath;
pub mod free_energy;
pub mod golden;
pub mod renormalization;
pub mod report;
pub mod verify;
pub mod wick;

pub use exactmath::{Coeff, GenusPolynomial, Monomial, Partition, PolySeries, RatSeries, Rational, Symbol, TruncatedSeries, Var};
pub use correlator::{CorrelatorEngine, Flavor};
pub use free_energy::FreeEnergySeries;
pub use renormalization::{ICoordinateFrame, StructuralExpr};
pub use report::VerificationReport;
pub use wick::WickOracle;
