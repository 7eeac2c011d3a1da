//! Configuration space integrals: the pullback density of the Gauss map of a
//! Jacobi diagram and its numerical integration.

mod integrate;
mod quadrature;
mod degree2;
mod shrink;

pub use degree2::{degree2_invariant, Degree2Estimate};
pub use integrate::{integrate, ConfigSampler};
pub use quadrature::{gauss_linking, writhe_integral};
pub use shrink::{distance_mod1, morse_extrema, shrink_limit, shrink_prediction, Extremum, ExtremumKind};

use crate::geom::{GeomError, LinkEmbedding};
use crate::jacobi::{ComponentKind, HalfEdge, JacobiDiagram, JacobiError};
use crate::linalg;
use crate::sampling::Method;
use crate::vec3::{self, V3};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CsintError {
    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),
    #[error("unsupported diagram: {0}")]
    UnsupportedDiagram(String),
    #[error("unsupported method {0:?} for this integral")]
    UnsupportedMethod(Method),
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),
    #[error(transparent)]
    Jacobi(#[from] JacobiError),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// Leg parameters (one per leg, in the diagram's leg order) and trivalent vertex points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub leg_params: Vec<f64>,
    pub vertex_points: Vec<V3>,
}

impl Configuration {
    /// Graph-vertex positions: legs first, then trivalent vertices.
    pub fn points(&self, g: &JacobiDiagram, link: &LinkEmbedding) -> Vec<V3> {
        let mut p: Vec<V3> =
            g.legs.iter().zip(&self.leg_params).map(|(l, &t)| link.components[l.component].eval(t)).collect();
        p.extend_from_slice(&self.vertex_points);
        p
    }

    pub fn validate(&self, g: &JacobiDiagram, link: &LinkEmbedding) -> Result<(), CsintError> {
        let bad = |m: String| Err(CsintError::InvalidConfiguration(m));
        if self.leg_params.len() != g.n_legs() || self.vertex_points.len() != g.n_tri {
            return bad("wrong number of coordinates".into());
        }
        if g.support.components.len() != link.len() {
            return bad("support and link have different component counts".into());
        }
        for c in 0..link.len() {
            let mut legs: Vec<usize> = (0..g.n_legs()).filter(|&i| g.legs[i].component == c).collect();
            legs.sort_by_key(|&i| g.legs[i].rank);
            let ts: Vec<f64> = legs.iter().map(|&i| self.leg_params[i].rem_euclid(2.0 * PI)).collect();
            // cyclic order: exactly one descent around the circle
            let descents = (0..ts.len()).filter(|&k| ts[(k + 1) % ts.len()] < ts[k]).count();
            if ts.len() > 1 && descents != 1 {
                return bad(format!("legs on component {c} are out of cyclic order"));
            }
        }
        let p = self.points(g, link);
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                if vec3::norm(vec3::sub(p[i], p[j])) < 1e-12 {
                    return bad(format!("points {i} and {j} coincide"));
                }
            }
        }
        Ok(())
    }
}

/// Estimate of one integral.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
    pub method: Method,
}

fn default_blocks() -> usize {
    15
}
fn default_delta() -> f64 {
    1e-9
}

/// Sampler settings, as recorded in the `config` field of command-line run records.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerConfig {
    pub method: Method,
    pub samples: u64,
    pub seed: u64,
    #[serde(default = "default_blocks")]
    pub blocks: usize,
    #[serde(default = "default_delta")]
    pub reject_delta: f64,
}

impl SamplerConfig {
    pub fn monte_carlo(samples: u64, seed: u64) -> Self {
        SamplerConfig { method: Method::MonteCarlo, samples, seed, blocks: 15, reject_delta: 1e-9 }
    }
    pub fn quadrature(samples: u64) -> Self {
        SamplerConfig { method: Method::Quadrature, samples, seed: 0, blocks: 15, reject_delta: 1e-9 }
    }
}

/// Ordered, oriented edges `(origin, end)`. Coordinates are the half-edges in the
/// order origin of the first edge, end of the first edge, and so on.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeOrientationPlan {
    pub edges: Vec<(HalfEdge, HalfEdge)>,
}

impl EdgeOrientationPlan {
    pub fn standard(g: &JacobiDiagram) -> Self {
        EdgeOrientationPlan { edges: g.edges.clone() }
    }

    pub fn random<R: Rng>(g: &JacobiDiagram, rng: &mut R) -> Self {
        let mut edges: Vec<_> = g.edges.iter().map(|&(a, b)| if rng.random() { (a, b) } else { (b, a) }).collect();
        edges.shuffle(rng);
        EdgeOrientationPlan { edges }
    }

    /// Every edge reversed, order kept.
    pub fn reversed(&self) -> Self {
        EdgeOrientationPlan { edges: self.edges.iter().map(|&(a, b)| (b, a)).collect() }
    }

    pub fn coordinate_order(&self) -> Vec<HalfEdge> {
        self.edges.iter().flat_map(|&(a, b)| [a, b]).collect()
    }

    /// Sign of the plan relative to the standard one, as a density factor.
    pub fn relative_sign(&self, g: &JacobiDiagram) -> i8 {
        let std = EdgeOrientationPlan::standard(g).coordinate_order();
        let ours = self.coordinate_order();
        let perm: Vec<usize> = ours.iter().map(|h| std.iter().position(|x| x == h).expect("same half-edges")).collect();
        permutation_sign(&perm)
    }

    pub fn validate(&self, g: &JacobiDiagram) -> Result<(), CsintError> {
        let mut a: Vec<(HalfEdge, HalfEdge)> = self.edges.iter().map(|&(x, y)| (x.min(y), x.max(y))).collect();
        let mut b: Vec<(HalfEdge, HalfEdge)> = g.edges.iter().map(|&(x, y)| (x.min(y), x.max(y))).collect();
        a.sort_unstable();
        b.sort_unstable();
        if a != b {
            return Err(CsintError::InvalidConfiguration("plan does not list the diagram's edges".into()));
        }
        Ok(())
    }
}

pub(crate) fn permutation_sign(perm: &[usize]) -> i8 {
    let mut seen = vec![false; perm.len()];
    let mut sign = 1i8;
    for i in 0..perm.len() {
        if seen[i] {
            continue;
        }
        let mut j = i;
        let mut len = 0;
        while !seen[j] {
            seen[j] = true;
            j = perm[j];
            len += 1;
        }
        if len % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}

/// Unit direction of every edge, end minus origin, in plan order.
pub fn gauss_map(c: &Configuration, g: &JacobiDiagram, link: &LinkEmbedding, plan: &EdgeOrientationPlan) -> Result<Vec<V3>, CsintError> {
    let p = c.points(g, link);
    plan.edges
        .iter()
        .map(|&(o, e)| {
            let v = vec3::sub(p[g.vertex_of(e)], p[g.vertex_of(o)]);
            let n = vec3::norm(v);
            if n < 1e-12 {
                return Err(CsintError::DegenerateConfiguration(format!("edge {o:?}-{e:?} has coincident ends")));
            }
            Ok(vec3::scale(v, 1.0 / n))
        })
        .collect()
}

/// Determinant of the Jacobian of the product of sphere maps `v_e/|v_e|`, with
/// rows the oriented frame components of each edge and `dv(e, k)` the derivative
/// of edge vector `e` along coordinate `k`.
pub(crate) fn sphere_jacobian_det(
    edge_vectors: &[V3],
    n_cols: usize,
    precise: bool,
    dv: impl Fn(usize, usize) -> V3,
) -> Result<f64, CsintError> {
    let n = 2 * edge_vectors.len();
    debug_assert_eq!(n, n_cols);
    let mut m = vec![0.0; n * n];
    for (e, &v) in edge_vectors.iter().enumerate() {
        let len = vec3::norm(v);
        if len < 1e-12 {
            return Err(CsintError::DegenerateConfiguration(format!("edge {e} has coincident ends")));
        }
        let u = vec3::scale(v, 1.0 / len);
        let (a, b) = vec3::sphere_frame(u);
        for k in 0..n_cols {
            let d = dv(e, k);
            if d == [0.0; 3] {
                continue;
            }
            m[(2 * e) * n + k] = vec3::dot(a, d) / len;
            m[(2 * e + 1) * n + k] = vec3::dot(b, d) / len;
        }
    }
    Ok(if precise { linalg::det_precise(&m, n) } else { linalg::det_in_place(&mut m, n) })
}

/// Pullback density of the edge volume forms (each of total mass one) with
/// respect to the plan's coordinates: leg parameters and vertex coordinates, the
/// three coordinates of a trivalent vertex attached to its half-edges in slot order.
pub fn density(c: &Configuration, g: &JacobiDiagram, link: &LinkEmbedding, plan: &EdgeOrientationPlan) -> Result<f64, CsintError> {
    let p = c.points(g, link);
    let vel: Vec<V3> = g.legs.iter().zip(&c.leg_params).map(|(l, &t)| link.components[l.component].tangent(t)).collect();
    density_from_points(g, plan, &p, &vel)
}

pub(crate) fn density_from_points(g: &JacobiDiagram, plan: &EdgeOrientationPlan, p: &[V3], leg_vel: &[V3]) -> Result<f64, CsintError> {
    let ends: Vec<(usize, usize)> = plan.edges.iter().map(|&(o, e)| (g.vertex_of(o), g.vertex_of(e))).collect();
    let vectors: Vec<V3> = ends.iter().map(|&(o, e)| vec3::sub(p[e], p[o])).collect();
    let coords = plan.coordinate_order();
    let moves: Vec<(usize, V3)> = coords
        .iter()
        .map(|&h| match h {
            HalfEdge::Leg(i) => (i, leg_vel[i]),
            HalfEdge::Tri(v, s) => {
                let mut axis = [0.0; 3];
                axis[s as usize] = 1.0;
                (g.n_legs() + v, axis)
            }
        })
        .collect();
    let det = sphere_jacobian_det(&vectors, coords.len(), true, |e, k| {
        let (x, d) = moves[k];
        let (o, end) = ends[e];
        if x == end {
            d
        } else if x == o {
            vec3::neg(d)
        } else {
            [0.0; 3]
        }
    })?;
    Ok(det / (4.0 * PI).powi(ends.len() as i32))
}

pub(crate) fn check_support(g: &JacobiDiagram, link: &LinkEmbedding) -> Result<(), CsintError> {
    if g.support.components.len() != link.len() || g.support.components.iter().any(|&c| c != ComponentKind::Circle) {
        return Err(CsintError::UnsupportedDiagram("support must be one circle per link component".into()));
    }
    Ok(())
}

/// The single chord joining component `i` to component `j` (or a chord on `i` when equal).
pub fn chord(link_components: usize, i: usize, j: usize) -> JacobiDiagram {
    use crate::jacobi::{LegPos, Support};
    let legs = if i == j {
        vec![LegPos { component: i, rank: 0 }, LegPos { component: i, rank: 1 }]
    } else {
        vec![LegPos { component: i, rank: 0 }, LegPos { component: j, rank: 0 }]
    };
    JacobiDiagram::new(Support::circles(link_components), legs, 0, vec![(HalfEdge::Leg(0), HalfEdge::Leg(1))]).expect("valid chord")
}
