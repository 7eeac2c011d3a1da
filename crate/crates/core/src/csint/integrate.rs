use super::{check_support, density_from_points, CsintError, EdgeOrientationPlan, IntegralEstimate, SamplerConfig};
use crate::geom::LinkEmbedding;
use crate::jacobi::{HalfEdge, JacobiDiagram};
use crate::sampling::{integrate_cube, Method};
use crate::vec3::{self, V3};
use std::f64::consts::PI;

pub(crate) const DEGREE_CAP: usize = 3;

/// Maps points of the unit cube to weighted configurations.
///
/// Legs on a circle with `k` legs use `k` coordinates: a uniform first angle and
/// sorted uniform offsets for the rest. Each trivalent vertex uses four: a mixture
/// component selector and a radial point `r = R s / (1 - s)` with a uniform
/// direction, around either the link barycenter or one of its neighbouring legs.
pub struct ConfigSampler<'a> {
    link: &'a LinkEmbedding,
    g: &'a JacobiDiagram,
    plan: EdgeOrientationPlan,
    legs_by_component: Vec<Vec<usize>>,
    vertex_legs: Vec<Vec<usize>>,
    center: V3,
    far_scale: f64,
    near_scale: f64,
    leg_weight: f64,
    delta: f64,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn radial_density(r: f64, scale: f64) -> f64 {
    // density in space of the point r = scale * s / (1 - s) with s uniform
    if r <= 0.0 {
        return f64::INFINITY;
    }
    scale / ((scale + r) * (scale + r)) / (4.0 * PI * r * r)
}

fn radial_point(center: V3, scale: f64, u: &[f64]) -> V3 {
    let s = u[0];
    let r = scale * s / (1.0 - s);
    let z = 2.0 * u[1] - 1.0;
    let phi = 2.0 * PI * u[2];
    let rho = (1.0 - z * z).max(0.0).sqrt();
    vec3::add(center, vec3::scale([rho * phi.cos(), rho * phi.sin(), z], r))
}

impl<'a> ConfigSampler<'a> {
    pub fn new(link: &'a LinkEmbedding, g: &'a JacobiDiagram, delta: f64) -> Result<Self, CsintError> {
        check_support(g, link)?;
        let mut legs_by_component = vec![Vec::new(); link.len()];
        for (i, l) in g.legs.iter().enumerate() {
            legs_by_component[l.component].push(i);
        }
        for v in legs_by_component.iter_mut() {
            v.sort_by_key(|&i| g.legs[i].rank);
        }
        let mut vertex_legs = vec![Vec::new(); g.n_tri];
        for &(a, b) in &g.edges {
            for (x, y) in [(a, b), (b, a)] {
                if let (HalfEdge::Tri(v, _), HalfEdge::Leg(i)) = (x, y) {
                    vertex_legs[v].push(i);
                }
            }
        }
        let leg_weight = legs_by_component
            .iter()
            .filter(|v| !v.is_empty())
            .map(|v| (2.0 * PI).powi(v.len() as i32) / factorial(v.len() - 1))
            .product();
        let radius = link.radius();
        Ok(ConfigSampler {
            link,
            g,
            plan: EdgeOrientationPlan::standard(g),
            legs_by_component,
            vertex_legs,
            center: link.barycenter(),
            far_scale: radius,
            near_scale: 0.25 * radius,
            leg_weight,
            delta,
        })
    }

    pub fn dim(&self) -> usize {
        self.g.n_legs() + 4 * self.g.n_tri
    }

    /// Weighted density at cube point `u`; zero when two points are within `delta`.
    pub fn eval(&self, u: &[f64]) -> f64 {
        let g = self.g;
        let nl = g.n_legs();
        let mut params = vec![0.0; nl];
        let mut k = 0;
        for legs in &self.legs_by_component {
            if legs.is_empty() {
                continue;
            }
            let start = 2.0 * PI * u[k];
            let mut offs: Vec<f64> = u[k + 1..k + legs.len()].to_vec();
            offs.sort_by(|a, b| a.total_cmp(b));
            params[legs[0]] = start;
            for (r, &leg) in legs.iter().enumerate().skip(1) {
                params[leg] = start + 2.0 * PI * offs[r - 1];
            }
            k += legs.len();
        }
        let mut p: Vec<V3> = Vec::with_capacity(nl + g.n_tri);
        let mut vel: Vec<V3> = Vec::with_capacity(nl);
        for (i, l) in g.legs.iter().enumerate() {
            let c = &self.link.components[l.component];
            p.push(c.eval(params[i]));
            vel.push(c.tangent(params[i]));
        }
        let mut weight = self.leg_weight;
        for v in 0..g.n_tri {
            let uv = &u[k + 4 * v..k + 4 * v + 4];
            let near = &self.vertex_legs[v];
            let m = 1 + near.len();
            let pick = ((uv[0] * m as f64) as usize).min(m - 1);
            let point = if pick == 0 {
                radial_point(self.center, self.far_scale, &uv[1..])
            } else {
                radial_point(p[near[pick - 1]], self.near_scale, &uv[1..])
            };
            let mut q = radial_density(vec3::norm(vec3::sub(point, self.center)), self.far_scale);
            for &leg in near {
                q += radial_density(vec3::norm(vec3::sub(point, p[leg])), self.near_scale);
            }
            weight /= q / m as f64;
            p.push(point);
        }
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                if vec3::norm(vec3::sub(p[i], p[j])) < self.delta {
                    return 0.0;
                }
            }
        }
        match density_from_points(g, &self.plan, &p, &vel) {
            Ok(d) => d * weight,
            Err(_) => 0.0,
        }
    }
}

/// Monte Carlo or quasi-Monte Carlo estimate of the configuration space integral
/// of `g` on `link`.
pub fn integrate(link: &LinkEmbedding, g: &JacobiDiagram, cfg: &SamplerConfig) -> Result<IntegralEstimate, CsintError> {
    if g.degree() > DEGREE_CAP {
        return Err(CsintError::UnsupportedDiagram(format!("degree {} is above the cap {DEGREE_CAP}", g.degree())));
    }
    if cfg.method == Method::Quadrature {
        return Err(CsintError::UnsupportedMethod(cfg.method));
    }
    let sampler = ConfigSampler::new(link, g, cfg.reject_delta)?;
    let est = integrate_cube(sampler.dim(), cfg.samples.max(1), cfg.blocks, cfg.seed, cfg.method, |u| sampler.eval(u));
    Ok(IntegralEstimate { value: est.value, std_error: est.std_error, samples: cfg.samples.max(1), seed: cfg.seed, method: cfg.method })
}
