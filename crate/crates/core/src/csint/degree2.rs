use super::{integrate, CsintError, IntegralEstimate, SamplerConfig};
use crate::geom::{Curve, LinkEmbedding};
use crate::jacobi::JacobiDiagram;
use serde::{Deserialize, Serialize};

/// The degree-two combination and the two integrals it is built from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Degree2Estimate {
    pub invariant: IntegralEstimate,
    pub y_integral: IntegralEstimate,
    pub x_integral: IntegralEstimate,
}

/// `-I(Y)/3 + I(X)/4 + 1/24` where `Y` is the one-vertex diagram with three legs
/// and `X` the two interleaved chords. Errors are combined in quadrature.
pub fn degree2_invariant(k: &Curve, cfg: &SamplerConfig) -> Result<Degree2Estimate, CsintError> {
    let link = LinkEmbedding::knot(k.clone());
    let y = integrate(&link, &JacobiDiagram::y_diagram(), cfg)?;
    let x_cfg = SamplerConfig { seed: cfg.seed.wrapping_add(1), ..cfg.clone() };
    let x = integrate(&link, &JacobiDiagram::x_diagram(), &x_cfg)?;
    let value = -y.value / 3.0 + x.value / 4.0 + 1.0 / 24.0;
    let std_error = ((y.std_error / 3.0).powi(2) + (x.std_error / 4.0).powi(2)).sqrt();
    let invariant = IntegralEstimate { value, std_error, samples: y.samples + x.samples, seed: cfg.seed, method: cfg.method };
    Ok(Degree2Estimate { invariant, y_integral: y, x_integral: x })
}
