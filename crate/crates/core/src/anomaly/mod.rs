//! Two-strand anomaly configurations: two antiparallel vertical lines, the
//! second at horizontal offset `(x, y)`, with the symmetries that kill most
//! diagrams pointwise.

mod filters;
mod line;

pub use filters::{check_diagram, check_vanishing_filters, classify, FilterEntry, FilterReport, Mechanism};
pub use line::{include_on_line, one_strand_density, LineConfiguration};

use crate::csint::{CsintError, EdgeOrientationPlan, IntegralEstimate, SamplerConfig};
use crate::jacobi::{automorphism_count, HalfEdge, JacobiDiagram, JacobiError, LegPos, Support};
use crate::linalg::{self, Dd};
use crate::sampling::{integrate_cube, Method};
use crate::vec3::{self, V3};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnomalyError {
    #[error("expected exactly {expected} legs on strand 2, found {found}")]
    WrongLegCount { expected: usize, found: usize },
    #[error("diagram is not a connected diagram on two lines: {0}")]
    UnsupportedDiagram(String),
    #[error("degree {0} is above the supported maximum 5")]
    UnsupportedDegree(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),
    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),
    #[error(transparent)]
    Jacobi(#[from] JacobiError),
    #[error(transparent)]
    Csint(#[from] CsintError),
}

/// Direction `theta` of the second strand: `(1,t) -> (0,0,t)`, `(2,t) -> (cos, sin, -t)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoStrandFrame {
    pub theta: f64,
}

impl TwoStrandFrame {
    pub fn new(theta: f64) -> Self {
        TwoStrandFrame { theta: theta.rem_euclid(2.0 * PI) }
    }

    pub fn offset(&self) -> [f64; 2] {
        [self.theta.cos(), self.theta.sin()]
    }

    pub fn embed(&self, strand: usize, t: f64) -> V3 {
        embed(self.offset(), strand, t)
    }
}

pub(crate) fn embed(offset: [f64; 2], strand: usize, t: f64) -> V3 {
    if strand == 0 {
        [0.0, 0.0, t]
    } else {
        [offset[0], offset[1], -t]
    }
}

/// Configuration of a two-strand diagram. The offset is free so that the same
/// type describes points of the union over all offsets; configurations on a
/// frame have unit offset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnomalyConfiguration {
    pub offset: [f64; 2],
    pub leg_params: Vec<f64>,
    pub vertex_points: Vec<V3>,
}

/// The gauge leg: lowest leg on the first strand.
pub fn gauge_leg(g: &JacobiDiagram) -> Result<usize, AnomalyError> {
    check_two_lines(g)?;
    g.legs
        .iter()
        .position(|l| *l == LegPos { component: 0, rank: 0 })
        .ok_or_else(|| AnomalyError::UnsupportedDiagram("no leg on strand 1 to pin".into()))
}

fn check_two_lines(g: &JacobiDiagram) -> Result<(), AnomalyError> {
    if g.support != Support::two_lines() {
        return Err(AnomalyError::UnsupportedDiagram("support is not two lines".into()));
    }
    Ok(())
}

impl AnomalyConfiguration {
    pub fn on_frame(frame: TwoStrandFrame, leg_params: Vec<f64>, vertex_points: Vec<V3>) -> Self {
        AnomalyConfiguration { offset: frame.offset(), leg_params, vertex_points }
    }

    /// The frame, when the offset has unit norm.
    pub fn frame(&self) -> Option<TwoStrandFrame> {
        let r = self.offset[0].hypot(self.offset[1]);
        ((r - 1.0).abs() < 1e-12).then(|| TwoStrandFrame::new(self.offset[1].atan2(self.offset[0])))
    }

    pub fn points(&self, g: &JacobiDiagram) -> Vec<V3> {
        let mut p: Vec<V3> =
            g.legs.iter().zip(&self.leg_params).map(|(l, &t)| embed(self.offset, l.component, t)).collect();
        p.extend_from_slice(&self.vertex_points);
        p
    }

    /// Vertical translation by `dz`.
    pub fn translated(&self, g: &JacobiDiagram, dz: f64) -> Self {
        let mut c = self.clone();
        for (l, t) in g.legs.iter().zip(c.leg_params.iter_mut()) {
            *t += if l.component == 0 { dz } else { -dz };
        }
        for p in &mut c.vertex_points {
            p[2] += dz;
        }
        c
    }

    /// The translate that puts the gauge leg at the origin.
    pub fn regauged(&self, g: &JacobiDiagram) -> Result<Self, AnomalyError> {
        let u0 = gauge_leg(g)?;
        Ok(self.translated(g, -self.leg_params[u0]))
    }

    pub fn validate(&self, g: &JacobiDiagram) -> Result<(), AnomalyError> {
        let bad = |m: &str| Err(AnomalyError::InvalidConfiguration(m.into()));
        if self.leg_params.len() != g.n_legs() || self.vertex_points.len() != g.n_tri {
            return bad("wrong number of coordinates");
        }
        if self.offset == [0.0, 0.0] {
            return bad("the strands meet");
        }
        let u0 = gauge_leg(g)?;
        if self.leg_params[u0] != 0.0 {
            return bad("gauge leg is not at the origin");
        }
        for (i, a) in g.legs.iter().enumerate() {
            for (j, b) in g.legs.iter().enumerate() {
                if a.component == b.component && a.rank < b.rank && self.leg_params[i] >= self.leg_params[j] {
                    return bad("leg parameters out of order");
                }
            }
        }
        let p = self.points(g);
        for i in 0..p.len() {
            for j in 0..i {
                if p[i] == p[j] {
                    return bad("two points coincide");
                }
            }
        }
        Ok(())
    }
}

/// Unit edge vectors in plan order.
pub fn anomaly_gauss_map(c: &AnomalyConfiguration, g: &JacobiDiagram, plan: &EdgeOrientationPlan) -> Result<Vec<V3>, AnomalyError> {
    let p = c.points(g);
    plan.edges
        .iter()
        .map(|&(o, e)| {
            let v = vec3::sub(p[g.vertex_of(e)], p[g.vertex_of(o)]);
            let n = vec3::norm(v);
            if n < 1e-12 {
                return Err(AnomalyError::DegenerateConfiguration(format!("edge {o:?}-{e:?} has coincident ends")));
            }
            Ok(vec3::scale(v, 1.0 / n))
        })
        .collect()
}

/// A coordinate as a list of (graph vertex, velocity).
pub(crate) type Motion = Vec<(usize, V3)>;

/// Arithmetic for densities: `Fast` is f64 with a double-double determinant
/// when the pivots spread; `Extended` builds the Jacobian in double-double too.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Precision {
    Fast,
    Extended,
}

/// Rows: frame components of each edge direction. Columns: the motions.
pub(crate) struct Jacobian {
    pub rows: usize,
    pub cols: usize,
    pub m: Vec<f64>,
    pub dd: Option<Vec<Dd>>,
}

type DdV3 = [Dd; 3];

fn dd_dot(a: DdV3, b: DdV3) -> Dd {
    a[0].mul(b[0]).add(a[1].mul(b[1])).add(a[2].mul(b[2]))
}

fn dd_scale(a: DdV3, s: Dd) -> DdV3 {
    [a[0].mul(s), a[1].mul(s), a[2].mul(s)]
}

fn dd_cross(a: DdV3, b: DdV3) -> DdV3 {
    [
        a[1].mul(b[2]).sub(a[2].mul(b[1])),
        a[2].mul(b[0]).sub(a[0].mul(b[2])),
        a[0].mul(b[1]).sub(a[1].mul(b[0])),
    ]
}

/// Double-double version of the sphere frame at `v / |v|`, divided by `|v|`.
fn dd_frame(v: V3) -> (DdV3, DdV3) {
    let vd = v.map(Dd::from);
    let len = dd_dot(vd, vd).sqrt();
    let inv = Dd::from(1.0).div(len);
    let u = dd_scale(vd, inv);
    let reference = if u[2].hi.abs() < 0.9 { [0.0, 0.0, 1.0] } else { [1.0, 0.0, 0.0] };
    let c = dd_cross(u, reference.map(Dd::from));
    let a = dd_scale(c, Dd::from(1.0).div(dd_dot(c, c).sqrt()));
    let b = dd_cross(u, a);
    (dd_scale(a, inv), dd_scale(b, inv))
}

impl Jacobian {
    pub fn build(
        g: &JacobiDiagram,
        plan: &EdgeOrientationPlan,
        p: &[V3],
        motions: &[Motion],
        precision: Precision,
    ) -> Result<Self, AnomalyError> {
        let rows = 2 * plan.edges.len();
        let cols = motions.len();
        let mut m = vec![0.0; rows * cols];
        let mut dd = (precision == Precision::Extended).then(|| vec![Dd::from(0.0); rows * cols]);
        for (e, &(o, end)) in plan.edges.iter().enumerate() {
            let (o, end) = (g.vertex_of(o), g.vertex_of(end));
            let v = vec3::sub(p[end], p[o]);
            let len = vec3::norm(v);
            if len < 1e-12 {
                return Err(AnomalyError::DegenerateConfiguration(format!("edge {e} has coincident ends")));
            }
            let (a, b) = vec3::sphere_frame(vec3::scale(v, 1.0 / len));
            let frame_dd = dd.as_ref().map(|_| dd_frame(v));
            for (k, motion) in motions.iter().enumerate() {
                let mut d = [0.0; 3];
                for &(x, vel) in motion {
                    if x == end {
                        d = vec3::add(d, vel);
                    }
                    if x == o {
                        d = vec3::sub(d, vel);
                    }
                }
                m[2 * e * cols + k] = vec3::dot(a, d) / len;
                m[(2 * e + 1) * cols + k] = vec3::dot(b, d) / len;
                if let (Some(dd), Some((ad, bd))) = (dd.as_mut(), frame_dd) {
                    let dv = d.map(Dd::from);
                    dd[2 * e * cols + k] = dd_dot(ad, dv);
                    dd[(2 * e + 1) * cols + k] = dd_dot(bd, dv);
                }
            }
        }
        Ok(Jacobian { rows, cols, m, dd })
    }

    /// Determinant with the listed columns removed, and its Hadamard bound.
    pub fn minor(&self, skip: &[usize]) -> (f64, f64) {
        let keep: Vec<usize> = (0..self.cols).filter(|k| !skip.contains(k)).collect();
        let n = self.rows;
        debug_assert_eq!(keep.len(), n);
        let mut sq = Vec::with_capacity(n * n);
        for r in 0..n {
            sq.extend(keep.iter().map(|&k| self.m[r * self.cols + k]));
        }
        match &self.dd {
            None => adaptive_det(sq, n),
            Some(dd) => {
                let hadamard = hadamard(&sq, n);
                let mut sq = Vec::with_capacity(n * n);
                for r in 0..n {
                    sq.extend(keep.iter().map(|&k| dd[r * self.cols + k]));
                }
                (linalg::det_dd(sq, n), hadamard)
            }
        }
    }
}

fn hadamard(m: &[f64], n: usize) -> f64 {
    (0..n).map(|r| m[r * n..(r + 1) * n].iter().map(|x| x * x).sum::<f64>().sqrt()).product()
}

/// f64 LU, redone in double-double when the pivots of the equilibrated
/// matrix spread over more than [`PIVOT_SPREAD`]. Also returns the Hadamard bound.
pub(crate) fn adaptive_det(m: Vec<f64>, n: usize) -> (f64, f64) {
    let hadamard = hadamard(&m, n);
    if hadamard == 0.0 {
        return (0.0, 0.0);
    }
    let mut work = m.clone();
    let (d, spread) = linalg::det_and_pivot_spread(&mut work, n);
    if spread <= PIVOT_SPREAD {
        (d, hadamard)
    } else {
        (linalg::det_precise(&m, n), hadamard)
    }
}

pub(crate) const PIVOT_SPREAD: f64 = f64::INFINITY;

fn axis(s: u8) -> V3 {
    let mut a = [0.0; 3];
    a[s as usize] = 1.0;
    a
}

fn parity(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Diagram data shared by density evaluations: the plan coordinates other
/// than the gauge leg and their motions.
pub struct TwoStrandDensity<'a> {
    g: &'a JacobiDiagram,
    plan: &'a EdgeOrientationPlan,
    rest: Vec<HalfEdge>,
    motions: Vec<Motion>,
    strand2: Vec<usize>,
    gauge_sign: f64,
    norm: f64,
}

impl<'a> TwoStrandDensity<'a> {
    pub fn new(g: &'a JacobiDiagram, plan: &'a EdgeOrientationPlan) -> Result<Self, AnomalyError> {
        if !g.is_connected() {
            return Err(AnomalyError::UnsupportedDiagram("diagram is not connected".into()));
        }
        plan.validate(g)?;
        let u0 = gauge_leg(g)?;
        let order = plan.coordinate_order();
        let k = order.iter().position(|&h| h == HalfEdge::Leg(u0)).expect("plan lists every leg");
        let rest: Vec<HalfEdge> = order.into_iter().filter(|&h| h != HalfEdge::Leg(u0)).collect();
        let motions = rest
            .iter()
            .map(|&h| match h {
                HalfEdge::Leg(i) => vec![(i, if g.legs[i].component == 0 { [0.0, 0.0, 1.0] } else { [0.0, 0.0, -1.0] })],
                HalfEdge::Tri(v, s) => vec![(g.n_legs() + v, axis(s))],
            })
            .collect();
        let strand2 = (0..g.n_legs()).filter(|&i| g.legs[i].component == 1).collect();
        let norm = (4.0 * PI).powi(plan.edges.len() as i32);
        Ok(TwoStrandDensity { g, plan, rest, motions, strand2, gauge_sign: parity(k), norm })
    }

    /// Density in `(theta, fiber coordinates)` and its Hadamard bound: the
    /// same expression with the determinant replaced by the product of row norms.
    pub fn theta(&self, c: &AnomalyConfiguration, precision: Precision) -> Result<(f64, f64), AnomalyError> {
        let frame = c.frame().ok_or_else(|| AnomalyError::InvalidConfiguration("offset is not a unit vector".into()))?;
        let dtheta = [-frame.theta.sin(), frame.theta.cos(), 0.0];
        let mut motions = Vec::with_capacity(self.motions.len() + 1);
        motions.push(self.strand2.iter().map(|&i| (i, dtheta)).collect());
        motions.extend(self.motions.iter().cloned());
        let jac = Jacobian::build(self.g, self.plan, &c.points(self.g), &motions, precision)?;
        let (det, h) = jac.minor(&[]);
        Ok((self.gauge_sign * det / self.norm, h / self.norm))
    }

    /// Density on the dilation quotient of the union over offsets, and its Hadamard bound.
    pub fn quotient(&self, c: &AnomalyConfiguration, precision: Precision) -> Result<(f64, f64), AnomalyError> {
        let mut motions = Vec::with_capacity(self.motions.len() + 2);
        motions.push(self.strand2.iter().map(|&i| (i, [1.0, 0.0, 0.0])).collect());
        motions.push(self.strand2.iter().map(|&i| (i, [0.0, 1.0, 0.0])).collect());
        motions.extend(self.motions.iter().cloned());
        let mut euler = vec![c.offset[0], c.offset[1]];
        euler.extend(self.rest.iter().map(|&h| match h {
            HalfEdge::Leg(i) => c.leg_params[i],
            HalfEdge::Tri(v, s) => c.vertex_points[v][s as usize],
        }));
        let m = (0..euler.len()).max_by(|&a, &b| euler[a].abs().total_cmp(&euler[b].abs())).unwrap_or(0);
        if euler[m] == 0.0 {
            return Err(AnomalyError::DegenerateConfiguration("configuration is a single point".into()));
        }
        let jac = Jacobian::build(self.g, self.plan, &c.points(self.g), &motions, precision)?;
        let (det, h) = jac.minor(&[m]);
        let value = self.gauge_sign * det / (parity(m) * euler[m]) / self.norm;
        Ok((value, h / (self.norm * euler[m].abs())))
    }
}

/// Pullback density on the space of configurations over all frames, in the
/// coordinates `(theta, plan coordinates without the gauge leg)`. The frame
/// angle takes the place of the vertical translation in the orientation.
pub fn anomaly_density(c: &AnomalyConfiguration, g: &JacobiDiagram, plan: &EdgeOrientationPlan) -> Result<f64, AnomalyError> {
    Ok(theta_density(c, g, plan, Precision::Fast)?.0)
}

/// [`anomaly_density`] with its Hadamard bound.
pub fn theta_density(
    c: &AnomalyConfiguration,
    g: &JacobiDiagram,
    plan: &EdgeOrientationPlan,
    precision: Precision,
) -> Result<(f64, f64), AnomalyError> {
    c.validate(g)?;
    TwoStrandDensity::new(g, plan)?.theta(c, precision)
}

/// Density on the quotient of the union over all offsets by dilations, in the
/// orientation where the dilation direction followed by the quotient gives the
/// union (offset first, then the fiber). Returns the density and its Hadamard bound.
pub fn dilation_quotient_density(
    c: &AnomalyConfiguration,
    g: &JacobiDiagram,
    plan: &EdgeOrientationPlan,
    precision: Precision,
) -> Result<(f64, f64), AnomalyError> {
    c.validate(g)?;
    TwoStrandDensity::new(g, plan)?.quotient(c, precision)
}

/// Strand-2 legs and their edge neighbours.
fn strand2_neighbours(g: &JacobiDiagram, expected: usize) -> Result<Vec<(usize, usize)>, AnomalyError> {
    check_two_lines(g)?;
    let legs: Vec<usize> = (0..g.n_legs()).filter(|&i| g.legs[i].component == 1).collect();
    if legs.len() != expected {
        return Err(AnomalyError::WrongLegCount { expected, found: legs.len() });
    }
    Ok(legs.into_iter().map(|i| (i, g.vertex_of(g.partner(HalfEdge::Leg(i))))).collect())
}

fn point(c: &AnomalyConfiguration, g: &JacobiDiagram, x: usize) -> V3 {
    if x < g.n_legs() {
        embed(c.offset, g.legs[x].component, c.leg_params[x])
    } else {
        c.vertex_points[x - g.n_legs()]
    }
}

/// The symmetry exchanging the two strand-2 legs through the midpoint of their
/// neighbours: `u1 -> t1 + t2 - u2`, `u2 -> t1 + t2 - u1`.
pub fn sigma(c: &AnomalyConfiguration, g: &JacobiDiagram) -> Result<AnomalyConfiguration, AnomalyError> {
    let pairs = strand2_neighbours(g, 2)?;
    let [(u1, t1), (u2, t2)] = [pairs[0], pairs[1]];
    let s = vec3::add(point(c, g, t1), point(c, g, t2));
    let mut out = c.clone();
    out.offset = [s[0] - c.offset[0], s[1] - c.offset[1]];
    out.leg_params[u1] = -s[2] - c.leg_params[u2];
    out.leg_params[u2] = -s[2] - c.leg_params[u1];
    Ok(out)
}

/// Scaling of the only strand-2 leg about its neighbour, moving the strand with it.
pub fn mu_action(c: &AnomalyConfiguration, g: &JacobiDiagram, mu: f64) -> Result<AnomalyConfiguration, AnomalyError> {
    let pairs = strand2_neighbours(g, 1)?;
    let (u, t) = pairs[0];
    let pt = point(c, g, t);
    let pu = point(c, g, u);
    let moved = vec3::add(pt, vec3::scale(vec3::sub(pu, pt), mu));
    let mut out = c.clone();
    out.offset = [moved[0], moved[1]];
    out.leg_params[u] = -moved[2];
    Ok(out)
}

/// Two legs on one strand attached to the same trivalent vertex.
pub fn has_coplanar_pair(g: &JacobiDiagram) -> bool {
    (0..g.n_tri).any(|v| {
        let comps: Vec<usize> = (0..3u8)
            .filter_map(|s| match g.partner(HalfEdge::Tri(v, s)) {
                HalfEdge::Leg(i) => Some(g.legs[i].component),
                HalfEdge::Tri(..) => None,
            })
            .collect();
        (0..comps.len()).any(|i| (0..i).any(|j| comps[i] == comps[j]))
    })
}

/// The chord between the two strands.
pub fn cross_chord() -> JacobiDiagram {
    JacobiDiagram::new(
        Support::two_lines(),
        vec![LegPos { component: 0, rank: 0 }, LegPos { component: 1, rank: 0 }],
        0,
        vec![(HalfEdge::Leg(0), HalfEdge::Leg(1))],
    )
    .expect("valid chord")
}

/// Degree-one coefficient of the anomaly: minus the integral of the cross chord
/// over all frames, divided by its automorphism count. The frame angle is
/// uniform and the strand-2 parameter is drawn from a Cauchy law.
pub fn estimate_alpha1(cfg: &SamplerConfig) -> Result<IntegralEstimate, AnomalyError> {
    if cfg.method == Method::Quadrature {
        return Err(CsintError::UnsupportedMethod(cfg.method).into());
    }
    let g = cross_chord();
    let plan = EdgeOrientationPlan::standard(&g);
    let aut = automorphism_count(&g)? as f64;
    let samples = cfg.samples.max(1);
    let est = integrate_cube(2, samples, cfg.blocks, cfg.seed, cfg.method, |u| {
        let theta = 2.0 * PI * u[0];
        let t = (PI * (u[1] - 0.5)).tan();
        let c = AnomalyConfiguration::on_frame(TwoStrandFrame::new(theta), vec![0.0, t], vec![]);
        match anomaly_density(&c, &g, &plan) {
            Ok(d) => d * 2.0 * PI * PI * (1.0 + t * t),
            Err(_) => f64::NAN,
        }
    });
    Ok(IntegralEstimate {
        value: -est.value / aut,
        std_error: est.std_error / aut,
        samples,
        seed: cfg.seed,
        method: cfg.method,
    })
}

#[cfg(test)]
mod tests;
