//! Classification of connected two-strand diagrams by the symmetry that kills
//! their integral, with a pointwise check of that symmetry.

use super::{
    anomaly_gauss_map, has_coplanar_pair, include_on_line, mu_action, one_strand_density, sigma, AnomalyConfiguration, AnomalyError, LineConfiguration, Precision, TwoStrandDensity, TwoStrandFrame,
};
use crate::csint::EdgeOrientationPlan;
use crate::jacobi::{enumerate_connected, JacobiDiagram, Support, MAX_DEGREE};
use crate::sampling::stream;
use crate::vec3::{self, V3};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mechanism {
    /// A strand without legs: the frame angle moves nothing.
    ZeroLegs,
    /// One leg on a strand: scaling it about its neighbour fixes the Gauss map.
    OneLeg,
    /// Two legs on a strand: the exchange symmetry reverses orientation.
    TwoLegs,
    /// Two legs of one strand on a common trivalent vertex.
    Coplanar,
    /// Even degree: `x -> -x` flips the sign of the density.
    CentralSymmetry,
    Survivor,
}

impl Mechanism {
    pub fn tolerance(self) -> Option<f64> {
        match self {
            Mechanism::ZeroLegs | Mechanism::OneLeg | Mechanism::Coplanar => Some(1e-12),
            Mechanism::TwoLegs | Mechanism::CentralSymmetry => Some(1e-9),
            Mechanism::Survivor => None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FilterEntry {
    pub diagram: String,
    pub legs: [usize; 2],
    pub mechanism: Mechanism,
    pub residual: Option<f64>,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FilterReport {
    pub degree: usize,
    pub configurations: usize,
    pub seed: u64,
    pub diagrams: usize,
    pub counts: BTreeMap<Mechanism, usize>,
    pub survivors: Vec<String>,
    pub max_residual: f64,
    pub passed: bool,
    pub entries: Vec<FilterEntry>,
}

/// Mechanism for `g`, and whether it applies after exchanging the strands.
pub fn classify(g: &JacobiDiagram) -> (Mechanism, bool) {
    let n = g.degree();
    let (u1, u2) = (g.legs_on(0), g.legs_on(1));
    if n % 2 == 0 {
        (Mechanism::CentralSymmetry, false)
    } else if u2 == 0 {
        (Mechanism::ZeroLegs, false)
    } else if u1 == 0 {
        (Mechanism::ZeroLegs, true)
    } else if n > 2 && (u2 < 3 || u1 < 3) {
        let swap = u2 >= 3;
        let k = if swap { u1 } else { u2 };
        (if k == 1 { Mechanism::OneLeg } else { Mechanism::TwoLegs }, swap)
    } else if has_coplanar_pair(g) {
        (Mechanism::Coplanar, false)
    } else {
        (Mechanism::Survivor, false)
    }
}

fn dyadic<R: Rng>(rng: &mut R, lo: i64, hi: i64) -> f64 {
    rng.random_range(lo * 1024..=hi * 1024) as f64 / 1024.0
}

fn distinct_sorted<R: Rng>(rng: &mut R, k: usize, lo: i64, hi: i64) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..k).map(|_| dyadic(rng, lo, hi)).collect();
        v.sort_by(|a, b| a.total_cmp(b));
        if v.windows(2).all(|w| w[0] < w[1]) {
            return v;
        }
    }
}

fn separated(p: &[V3]) -> bool {
    (0..p.len()).all(|i| (0..i).all(|j| vec3::norm(vec3::sub(p[i], p[j])) > 1.0 / 16.0))
}

fn leg_params<R: Rng>(g: &JacobiDiagram, rng: &mut R) -> Vec<f64> {
    let s1 = distinct_sorted(rng, g.legs_on(0).saturating_sub(1), 0, 3);
    let s1: Vec<f64> = if s1.first() == Some(&0.0) { s1.iter().map(|t| t + 1.0 / 1024.0).collect() } else { s1 };
    let s2 = distinct_sorted(rng, g.legs_on(1), -3, 3);
    g.legs
        .iter()
        .map(|l| match (l.component, l.rank) {
            (0, 0) => 0.0,
            (0, r) => s1[r - 1],
            (_, r) => s2[r],
        })
        .collect()
}

/// Random dyadic configuration with a free offset and the gauge leg at the origin.
pub(crate) fn random_configuration<R: Rng>(g: &JacobiDiagram, rng: &mut R) -> AnomalyConfiguration {
    loop {
        let offset = [dyadic(rng, -2, 2), dyadic(rng, -2, 2)];
        if offset[0].hypot(offset[1]) < 0.25 {
            continue;
        }
        let c = AnomalyConfiguration {
            offset,
            leg_params: leg_params(g, rng),
            vertex_points: (0..g.n_tri).map(|_| [dyadic(rng, -2, 2), dyadic(rng, -2, 2), dyadic(rng, -2, 2)]).collect(),
        };
        if separated(&c.points(g)) {
            return c;
        }
    }
}

/// Random configuration on a frame.
pub(crate) fn random_frame_configuration<R: Rng>(g: &JacobiDiagram, rng: &mut R) -> AnomalyConfiguration {
    let mut c = random_configuration(g, rng);
    c.offset = TwoStrandFrame::new(rng.random_range(0.0..2.0 * PI)).offset();
    while !separated(&c.points(g)) {
        c = random_configuration(g, rng);
        c.offset = TwoStrandFrame::new(rng.random_range(0.0..2.0 * PI)).offset();
    }
    c
}

pub(crate) fn random_line_configuration<R: Rng>(g: &JacobiDiagram, rng: &mut R) -> LineConfiguration {
    loop {
        let direction = [dyadic(rng, -1, 1), dyadic(rng, -1, 1), dyadic(rng, -1, 1)];
        if vec3::norm(direction) < 0.25 {
            continue;
        }
        let q = LineConfiguration {
            direction,
            leg_params: {
                let t = distinct_sorted(rng, g.n_legs(), -3, 3);
                g.legs.iter().map(|l| t[l.rank]).collect()
            },
            vertex_points: (0..g.n_tri).map(|_| [dyadic(rng, -2, 2), dyadic(rng, -2, 2), dyadic(rng, -2, 2)]).collect(),
        };
        if separated(&q.points()) {
            return q;
        }
    }
}

/// Relative difference, floored at 1e-9 of the Hadamard bound so that
/// densities that vanish identically are compared on an absolute scale.
fn relative(a: f64, b: f64, bound: f64) -> f64 {
    let scale = a.abs().max(b.abs()).max(1e-9 * bound);
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn normalized((value, bound): (f64, f64)) -> f64 {
    if bound == 0.0 {
        0.0
    } else {
        value.abs() / bound
    }
}

/// Evaluates a residual in f64 and again in double-double when the f64 value
/// is too large to be trusted.
fn refined(
    threshold: f64,
    f: impl Fn(Precision) -> Result<f64, AnomalyError>,
) -> Result<f64, AnomalyError> {
    let fast = f(Precision::Fast)?;
    if fast <= threshold {
        Ok(fast)
    } else {
        f(Precision::Extended)
    }
}

/// `|rho(sigma c) + rho(c)|`, relative.
pub(crate) fn sigma_residual(c: &AnomalyConfiguration, g: &JacobiDiagram, d: &TwoStrandDensity) -> Result<f64, AnomalyError> {
    let s = sigma(c, g)?;
    refined(1e-10, |p| {
        let (a, h) = d.quotient(c, p)?;
        let (b, _) = d.quotient(&s, p)?;
        Ok(relative(b, -a, h))
    })
}

/// `|rho(-q) - (-1)^(n+1) rho(q)|`, relative.
pub(crate) fn central_residual(q: &LineConfiguration, line: &JacobiDiagram, plan: &EdgeOrientationPlan) -> Result<f64, AnomalyError> {
    let sign = if line.degree() % 2 == 0 { -1.0 } else { 1.0 };
    let minus = q.antipodal();
    refined(1e-10, |p| {
        let (a, h) = one_strand_density(q, line, plan, p)?;
        let (b, _) = one_strand_density(&minus, line, plan, p)?;
        Ok(relative(b, sign * a, h))
    })
}

/// Density over its Hadamard bound, for densities that vanish identically.
pub(crate) fn theta_zero_residual(c: &AnomalyConfiguration, d: &TwoStrandDensity) -> Result<f64, AnomalyError> {
    refined(1e-13, |p| Ok(normalized(d.theta(c, p)?)))
}

pub(crate) fn quotient_zero_residual(c: &AnomalyConfiguration, d: &TwoStrandDensity) -> Result<f64, AnomalyError> {
    refined(1e-13, |p| Ok(normalized(d.quotient(c, p)?)))
}

/// Largest pointwise residual of the symmetry that kills `g`, over
/// `configurations` random configurations. `None` for survivors.
pub fn check_diagram(g: &JacobiDiagram, configurations: usize, seed: u64) -> Result<Option<f64>, AnomalyError> {
    let (mechanism, swap) = classify(g);
    let g = if swap { g.swap_lines() } else { g.clone() };
    let plan = EdgeOrientationPlan::standard(&g);
    let mut rng = stream(seed, 0);
    let mut worst = 0.0f64;
    match mechanism {
        Mechanism::Survivor => return Ok(None),
        Mechanism::CentralSymmetry => {
            let line = include_on_line(&g)?;
            let lplan = EdgeOrientationPlan::standard(&line);
            for _ in 0..configurations {
                let q = random_line_configuration(&line, &mut rng);
                worst = worst.max(central_residual(&q, &line, &lplan)?);
            }
        }
        Mechanism::ZeroLegs | Mechanism::Coplanar => {
            let density = TwoStrandDensity::new(&g, &plan)?;
            for _ in 0..configurations {
                let c = random_frame_configuration(&g, &mut rng);
                worst = worst.max(theta_zero_residual(&c, &density)?);
            }
        }
        Mechanism::OneLeg => {
            let density = TwoStrandDensity::new(&g, &plan)?;
            for _ in 0..configurations {
                let c = random_configuration(&g, &mut rng);
                let mu = (rng.random_range(-3.0..3.0f64)).exp();
                let moved = mu_action(&c, &g, mu)?;
                let (a, b) = (anomaly_gauss_map(&c, &g, &plan)?, anomaly_gauss_map(&moved, &g, &plan)?);
                for (x, y) in a.iter().zip(&b) {
                    worst = worst.max(vec3::norm(vec3::sub(*x, *y)));
                }
                worst = worst.max(quotient_zero_residual(&c, &density)?);
            }
        }
        Mechanism::TwoLegs => {
            let density = TwoStrandDensity::new(&g, &plan)?;
            for _ in 0..configurations {
                let c = random_configuration(&g, &mut rng);
                let s = sigma(&c, &g)?;
                if sigma(&s, &g)? != c {
                    return Ok(Some(f64::INFINITY));
                }
                worst = worst.max(sigma_residual(&c, &g, &density)?);
            }
        }
    }
    Ok(Some(worst))
}

/// Classifies every connected two-strand diagram of degree `n` and checks its
/// mechanism on `configurations` random configurations each.
pub fn check_vanishing_filters(n: usize, configurations: usize, seed: u64) -> Result<FilterReport, AnomalyError> {
    if n > MAX_DEGREE {
        return Err(AnomalyError::UnsupportedDegree(n));
    }
    let diagrams = enumerate_connected(n, &Support::two_lines(), 0)?;
    let entries: Vec<FilterEntry> = diagrams
        .par_iter()
        .enumerate()
        .map(|(i, g)| {
            let (mechanism, _) = classify(g);
            let residual = check_diagram(g, configurations, seed.wrapping_add(i as u64))?;
            let passed = match (residual, mechanism.tolerance()) {
                (Some(r), Some(tol)) => r <= tol,
                _ => true,
            };
            Ok(FilterEntry { diagram: g.to_string(), legs: [g.legs_on(0), g.legs_on(1)], mechanism, residual, passed })
        })
        .collect::<Result<_, AnomalyError>>()?;
    let mut counts = BTreeMap::new();
    for e in &entries {
        *counts.entry(e.mechanism).or_insert(0) += 1;
    }
    let survivors = entries.iter().filter(|e| e.mechanism == Mechanism::Survivor).map(|e| e.diagram.clone()).collect();
    let max_residual = entries.iter().filter_map(|e| e.residual).fold(0.0, f64::max);
    Ok(FilterReport {
        degree: n,
        configurations,
        seed,
        diagrams: entries.len(),
        counts,
        survivors,
        passed: entries.iter().all(|e| e.passed),
        max_residual,
        entries,
    })
}
