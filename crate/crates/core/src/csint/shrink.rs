use super::{writhe_integral, CsintError, IntegralEstimate, SamplerConfig};
use crate::geom::Curve;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtremumKind {
    Min,
    Max,
}

/// A critical point of the height function with the direction of its horizontal tangent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub param: f64,
    pub kind: ExtremumKind,
    pub angle: f64,
}

/// Critical points of `z(t)`, found by sign changes of `z'` on a fine grid and
/// bisection. Fails when a critical point is degenerate.
pub fn morse_extrema(k: &Curve) -> Result<Vec<Extremum>, CsintError> {
    const N: usize = 8192;
    let dz = |t: f64| k.tangent(t)[2];
    let h = 2.0 * PI / N as f64;
    let mut out = Vec::new();
    for i in 0..N {
        let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
        let (fa, fb) = (dz(a), dz(b));
        if fa == 0.0 || (fa < 0.0) != (fb < 0.0) && fb != 0.0 {
            let (mut lo, mut hi) = (a, b);
            if fa != 0.0 {
                for _ in 0..200 {
                    let m = 0.5 * (lo + hi);
                    if (dz(m) < 0.0) == (fa < 0.0) {
                        lo = m;
                    } else {
                        hi = m;
                    }
                    if hi - lo < 1e-15 {
                        break;
                    }
                }
            }
            let t = if fa == 0.0 { a } else { 0.5 * (lo + hi) };
            let ddz = k.acceleration(t)[2];
            if ddz.abs() < 1e-9 {
                return Err(CsintError::UnsupportedDiagram(format!("degenerate critical point of the height at t = {t}")));
            }
            let d = k.tangent(t);
            out.push(Extremum {
                param: t,
                kind: if ddz > 0.0 { ExtremumKind::Min } else { ExtremumKind::Max },
                angle: d[1].atan2(d[0]),
            });
        }
    }
    Ok(out)
}

/// `(sum of minimum angles - sum of maximum angles) / pi`, reduced to `[0, 1)`.
pub fn shrink_prediction(k: &Curve) -> Result<f64, CsintError> {
    let ext = morse_extrema(k)?;
    let s: f64 = ext.iter().map(|e| if e.kind == ExtremumKind::Min { e.angle } else { -e.angle }).sum();
    Ok((s / PI).rem_euclid(1.0))
}

/// Writhe integrals of the horizontally shrunk curves `(l x, l y, z)`.
pub fn shrink_limit(k: &Curve, lambdas: &[f64], cfg: &SamplerConfig) -> Result<Vec<(f64, IntegralEstimate)>, CsintError> {
    lambdas.iter().map(|&l| Ok((l, writhe_integral(&k.shrink(l), cfg)?))).collect()
}

/// Distance from `x` to `y` on the circle of circumference one.
pub fn distance_mod1(x: f64, y: f64) -> f64 {
    let d = (x - y).rem_euclid(1.0);
    d.min(1.0 - d)
}
