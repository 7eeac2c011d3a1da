//! Finite-type knot and link invariants from configuration-space integrals.
//!
//! - [`geom`]: trigonometric-polynomial curves, presets, crossing extraction.
//! - [`jacobi`]: Jacobi diagrams, AS/STU, automorphisms, low-degree quotients.
//! - [`csint`]: Gauss maps, pullback densities and their integrals.
//! - [`anomaly`]: two-strand anomaly configurations and their symmetries.
//! - [`oracle`]: combinatorial oracles (crossing counts, Conway polynomial).

pub mod anomaly;
pub mod csint;
pub mod geom;
pub mod jacobi;
pub mod linalg;
pub mod oracle;
pub mod sampling;
pub mod vec3;

pub use csint::{IntegralEstimate, SamplerConfig};
pub use geom::{Curve, LinkEmbedding};
pub use jacobi::{JacobiDiagram, Support};
pub use sampling::Method;
