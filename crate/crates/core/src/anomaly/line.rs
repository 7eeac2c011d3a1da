//! One-strand picture: configurations on the line through the origin with
//! direction `v`, modulo translations along the line, dilations and rescaling
//! of `v`.

use super::{AnomalyError, Jacobian, Motion, Precision};
use crate::csint::EdgeOrientationPlan;
use crate::jacobi::{HalfEdge, JacobiDiagram, LegPos, Support};
use crate::vec3::{self, V3};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineConfiguration {
    pub direction: V3,
    pub leg_params: Vec<f64>,
    pub vertex_points: Vec<V3>,
}

impl LineConfiguration {
    pub fn points(&self) -> Vec<V3> {
        let mut p: Vec<V3> = self.leg_params.iter().map(|&t| vec3::scale(self.direction, t)).collect();
        p.extend_from_slice(&self.vertex_points);
        p
    }

    /// The image under `x -> -x`.
    pub fn antipodal(&self) -> Self {
        LineConfiguration {
            direction: vec3::neg(self.direction),
            leg_params: self.leg_params.clone(),
            vertex_points: self.vertex_points.iter().map(|&p| vec3::neg(p)).collect(),
        }
    }
}

/// Joins the strands into one line: up the first, then down the second.
pub fn include_on_line(g: &JacobiDiagram) -> Result<JacobiDiagram, AnomalyError> {
    if g.support != Support::two_lines() {
        return Err(AnomalyError::UnsupportedDiagram("support is not two lines".into()));
    }
    let u1 = g.legs_on(0);
    let u2 = g.legs_on(1);
    let legs = g
        .legs
        .iter()
        .map(|l| LegPos { component: 0, rank: if l.component == 0 { l.rank } else { u1 + u2 - 1 - l.rank } })
        .collect();
    Ok(JacobiDiagram::new(Support::line(), legs, g.n_tri, g.edges.clone())?)
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    vec3::det3(m[0], m[1], m[2])
}

/// Density of the pullback form against the volume contracted with the
/// translation, dilation and direction-rescaling fields, in the coordinates
/// `(v, plan coordinates)`. Returns the density and its Hadamard bound.
pub fn one_strand_density(
    q: &LineConfiguration,
    g: &JacobiDiagram,
    plan: &EdgeOrientationPlan,
    precision: Precision,
) -> Result<(f64, f64), AnomalyError> {
    if g.support != Support::line() {
        return Err(AnomalyError::UnsupportedDiagram("support is not a line".into()));
    }
    plan.validate(g)?;
    let order = plan.coordinate_order();
    let mut motions: Vec<Motion> = (0..3)
        .map(|c| {
            let mut e = [0.0; 3];
            e[c] = 1.0;
            (0..g.n_legs()).map(|i| (i, vec3::scale(e, q.leg_params[i]))).collect()
        })
        .collect();
    // fields: translation along v, dilation, rescaling of v
    let mut fields: Vec<[f64; 3]> = (0..3).map(|c| [0.0, 0.0, q.direction[c]]).collect();
    for &h in &order {
        match h {
            HalfEdge::Leg(i) => {
                motions.push(vec![(i, q.direction)]);
                let t = q.leg_params[i];
                fields.push([1.0, t, -t]);
            }
            HalfEdge::Tri(v, s) => {
                let mut a = [0.0; 3];
                a[s as usize] = 1.0;
                motions.push(vec![(g.n_legs() + v, a)]);
                let x = q.vertex_points[v][s as usize];
                fields.push([q.direction[s as usize], x, 0.0]);
            }
        }
    }
    let mut candidates: Vec<usize> = vec![0, 1, 2];
    candidates.extend((3..fields.len()).filter(|&k| matches!(order[k - 3], HalfEdge::Leg(_))).take(4));
    candidates.extend((3..fields.len()).filter(|&k| matches!(order[k - 3], HalfEdge::Tri(..))).take(3));
    let mut best = (0.0f64, [0usize; 3]);
    for a in 0..candidates.len() {
        for b in a + 1..candidates.len() {
            for c in b + 1..candidates.len() {
                let s = [candidates[a], candidates[b], candidates[c]];
                let mut s_sorted = s;
                s_sorted.sort_unstable();
                let k = det3([fields[s_sorted[0]], fields[s_sorted[1]], fields[s_sorted[2]]]);
                if k.abs() > best.0.abs() {
                    best = (k, s_sorted);
                }
            }
        }
    }
    let (kdet, s) = best;
    if kdet == 0.0 {
        return Err(AnomalyError::DegenerateConfiguration("quotient fields are dependent".into()));
    }
    let shift: usize = s.iter().enumerate().map(|(i, &x)| x - i).sum();
    let sign = if shift % 2 == 0 { 1.0 } else { -1.0 };
    let jac = Jacobian::build(g, plan, &q.points(), &motions, precision)?;
    let (det, h) = jac.minor(&s);
    let norm = (4.0 * PI).powi(plan.edges.len() as i32) * kdet.abs();
    Ok((det / (sign * kdet) / (4.0 * PI).powi(plan.edges.len() as i32), h / norm))
}
