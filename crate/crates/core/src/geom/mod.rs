//! Closed curves in 3-space as trigonometric polynomials, links built from them,
//! and crossing data of their planar projections.

mod crossings;
pub mod presets;

pub use crossings::{project_crossings, Crossing, CrossingDiagram, Strand};

use crate::vec3::{self, V3};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use thiserror::Error;

/// Samples used by the embedding checks.
pub const GRID: usize = 2048;

#[derive(Debug, Error)]
pub enum GeomError {
    #[error("non-generic projection direction: {0}")]
    NonGenericDirection(String),
    #[error("curve is not an embedding on the sample grid: {0}")]
    NotEmbedded(String),
    #[error("malformed curve data: {0}")]
    Malformed(String),
    #[error("link JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// A closed curve `t -> const + sum_k cos[c][k-1] cos(kt) + sin[c][k-1] sin(kt)` per coordinate `c`.
///
/// Orientation is given by increasing `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    #[serde(rename = "const")]
    pub constant: V3,
    pub cos: [Vec<f64>; 3],
    pub sin: [Vec<f64>; 3],
}

impl Curve {
    pub fn new(constant: V3, cos: [Vec<f64>; 3], sin: [Vec<f64>; 3]) -> Result<Self, GeomError> {
        let c = Curve { constant, cos, sin };
        c.check_finite()?;
        Ok(c)
    }

    fn check_finite(&self) -> Result<(), GeomError> {
        let all = self.constant.iter().chain(self.cos.iter().flatten()).chain(self.sin.iter().flatten());
        if all.into_iter().any(|v| !v.is_finite()) {
            return Err(GeomError::Malformed("non-finite coefficient".into()));
        }
        Ok(())
    }

    /// Highest frequency present.
    pub fn degree(&self) -> usize {
        (0..3).map(|c| self.cos[c].len().max(self.sin[c].len())).max().unwrap_or(0)
    }

    /// Least-squares trigonometric fit (exact for trigonometric polynomials of degree
    /// at most `degree`) from an arbitrary closed parametrization.
    pub fn from_fn(degree: usize, f: impl Fn(f64) -> V3) -> Self {
        let m = 8 * (degree + 1);
        let samples: Vec<V3> = (0..m).map(|j| f(TAU * j as f64 / m as f64)).collect();
        let mut constant = [0.0; 3];
        let mut cos: [Vec<f64>; 3] = Default::default();
        let mut sin: [Vec<f64>; 3] = Default::default();
        for c in 0..3 {
            constant[c] = clean(samples.iter().map(|p| p[c]).sum::<f64>() / m as f64);
            for k in 1..=degree {
                let (mut a, mut b) = (0.0, 0.0);
                for (j, p) in samples.iter().enumerate() {
                    let t = TAU * (k * j % m) as f64 / m as f64;
                    a += p[c] * t.cos();
                    b += p[c] * t.sin();
                }
                cos[c].push(clean(2.0 * a / m as f64));
                sin[c].push(clean(2.0 * b / m as f64));
            }
            trim(&mut cos[c]);
            trim(&mut sin[c]);
        }
        Curve { constant, cos, sin }
    }

    /// Position at parameter `t`.
    pub fn eval(&self, t: f64) -> V3 {
        let mut p = self.constant;
        self.accumulate(t, |k, ck, sk, c, p: &mut V3| {
            let _ = k;
            p[c] += ck + sk;
        }, &mut p, 0);
        p
    }

    /// Exact derivative with respect to `t`.
    pub fn tangent(&self, t: f64) -> V3 {
        let mut p = [0.0; 3];
        self.accumulate(t, |_, ck, sk, c, p: &mut V3| p[c] += ck + sk, &mut p, 1);
        p
    }

    /// Second derivative.
    pub fn acceleration(&self, t: f64) -> V3 {
        let mut p = [0.0; 3];
        self.accumulate(t, |_, ck, sk, c, p: &mut V3| p[c] += ck + sk, &mut p, 2);
        p
    }

    /// Position and tangent in one pass.
    pub fn jet(&self, t: f64) -> (V3, V3) {
        let (s1, c1) = t.sin_cos();
        let (mut sk, mut ck) = (0.0, 1.0);
        let mut p = self.constant;
        let mut d = [0.0; 3];
        for k in 1..=self.degree() {
            let (sn, cn) = (sk * c1 + ck * s1, ck * c1 - sk * s1);
            sk = sn;
            ck = cn;
            let kf = k as f64;
            for c in 0..3 {
                let a = self.cos[c].get(k - 1).copied().unwrap_or(0.0);
                let b = self.sin[c].get(k - 1).copied().unwrap_or(0.0);
                p[c] += a * ck + b * sk;
                d[c] += kf * (b * ck - a * sk);
            }
        }
        (p, d)
    }

    // Adds the `order`-th derivative of every harmonic into `out`.
    fn accumulate(&self, t: f64, mut f: impl FnMut(usize, f64, f64, usize, &mut V3), out: &mut V3, order: u32) {
        let (s1, c1) = t.sin_cos();
        let (mut sk, mut ck) = (0.0, 1.0);
        for k in 1..=self.degree() {
            // angle addition keeps this to one sin_cos call
            let (sn, cn) = (sk * c1 + ck * s1, ck * c1 - sk * s1);
            sk = sn;
            ck = cn;
            let kf = k as f64;
            // d/dt cos(kt) = -k sin(kt), d/dt sin(kt) = k cos(kt)
            let (dc, ds) = match order {
                0 => (ck, sk),
                1 => (-kf * sk, kf * ck),
                _ => (-kf * kf * ck, -kf * kf * sk),
            };
            for c in 0..3 {
                let a = self.cos[c].get(k - 1).copied().unwrap_or(0.0);
                let b = self.sin[c].get(k - 1).copied().unwrap_or(0.0);
                f(k, a * dc, b * ds, c, out);
            }
        }
    }

    /// Applies the linear map `x -> m x` to the curve.
    pub fn linear_map(&self, m: [[f64; 3]; 3]) -> Curve {
        let apply = |v: [f64; 3]| -> V3 {
            [
                m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
                m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
                m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
            ]
        };
        let d = self.degree();
        let coeff = |tab: &[Vec<f64>; 3], k: usize| [0, 1, 2].map(|c| tab[c].get(k).copied().unwrap_or(0.0));
        let mut cos: [Vec<f64>; 3] = Default::default();
        let mut sin: [Vec<f64>; 3] = Default::default();
        for k in 0..d {
            let a = apply(coeff(&self.cos, k));
            let b = apply(coeff(&self.sin, k));
            for c in 0..3 {
                cos[c].push(a[c]);
                sin[c].push(b[c]);
            }
        }
        for c in 0..3 {
            trim(&mut cos[c]);
            trim(&mut sin[c]);
        }
        Curve { constant: apply(self.constant), cos, sin }
    }

    pub fn translate(&self, by: V3) -> Curve {
        let mut c = self.clone();
        c.constant = vec3::add(c.constant, by);
        c
    }

    /// The same curve traversed backwards (`t -> -t`).
    pub fn reversed(&self) -> Curve {
        let mut c = self.clone();
        for row in c.sin.iter_mut() {
            row.iter_mut().for_each(|v| *v = -*v);
        }
        c
    }

    /// `h_lambda`: scales the two horizontal coordinates by `lambda`.
    pub fn shrink(&self, lambda: f64) -> Curve {
        let mut c = self.clone();
        for coord in 0..2 {
            c.constant[coord] *= lambda;
            c.cos[coord].iter_mut().for_each(|v| *v *= lambda);
            c.sin[coord].iter_mut().for_each(|v| *v *= lambda);
        }
        c
    }

    pub fn samples(&self, n: usize) -> Vec<V3> {
        (0..n).map(|j| self.eval(TAU * j as f64 / n as f64)).collect()
    }

    /// Smallest distance between non-adjacent samples of an `n`-point grid.
    pub fn min_self_separation(&self, n: usize) -> f64 {
        let pts = self.samples(n);
        let mut best = f64::INFINITY;
        for i in 0..n {
            for j in i + 2..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                best = best.min(vec3::norm(vec3::sub(pts[i], pts[j])));
            }
        }
        best
    }

    pub fn min_speed(&self, n: usize) -> f64 {
        (0..n)
            .map(|j| vec3::norm(self.tangent(TAU * j as f64 / n as f64)))
            .fold(f64::INFINITY, f64::min)
    }

    /// Grid-based embedding certificate: positive sample separation and nonvanishing tangent.
    pub fn validate(&self) -> Result<(), GeomError> {
        self.check_finite()?;
        let sep = self.min_self_separation(GRID);
        if !(sep > 0.0) {
            return Err(GeomError::NotEmbedded(format!("sample separation {sep}")));
        }
        let speed = self.min_speed(GRID);
        if !(speed > 0.0) {
            return Err(GeomError::NotEmbedded("vanishing tangent".into()));
        }
        Ok(())
    }
}

fn clean(v: f64) -> f64 {
    if v.abs() < 1e-12 {
        0.0
    } else {
        v
    }
}

fn trim(v: &mut Vec<f64>) {
    while v.last() == Some(&0.0) {
        v.pop();
    }
}

/// An ordered list of disjoint closed curves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkEmbedding {
    pub components: Vec<Curve>,
}

impl LinkEmbedding {
    pub fn new(components: Vec<Curve>) -> Self {
        LinkEmbedding { components }
    }

    pub fn knot(curve: Curve) -> Self {
        LinkEmbedding { components: vec![curve] }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn shrink(&self, lambda: f64) -> LinkEmbedding {
        LinkEmbedding { components: self.components.iter().map(|c| c.shrink(lambda)).collect() }
    }

    /// Mean of the grid samples of all components.
    pub fn barycenter(&self) -> V3 {
        let mut acc = [0.0; 3];
        let mut n = 0.0;
        for c in &self.components {
            for p in c.samples(256) {
                acc = vec3::add(acc, p);
                n += 1.0;
            }
        }
        vec3::scale(acc, 1.0 / n)
    }

    /// Largest distance of a grid sample from the barycenter.
    pub fn radius(&self) -> f64 {
        let b = self.barycenter();
        self.components
            .iter()
            .flat_map(|c| c.samples(256))
            .map(|p| vec3::norm(vec3::sub(p, b)))
            .fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<(), GeomError> {
        if self.components.is_empty() {
            return Err(GeomError::Malformed("link without components".into()));
        }
        for c in &self.components {
            c.validate()?;
        }
        for i in 0..self.len() {
            let a = self.components[i].samples(GRID);
            for j in i + 1..self.len() {
                let b = self.components[j].samples(GRID);
                let d = a
                    .iter()
                    .flat_map(|p| b.iter().map(move |q| vec3::norm(vec3::sub(*p, *q))))
                    .fold(f64::INFINITY, f64::min);
                if !(d > 0.0) {
                    return Err(GeomError::NotEmbedded(format!("components {i} and {j} meet")));
                }
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, GeomError> {
        let link: LinkEmbedding = serde_json::from_str(text)?;
        for c in &link.components {
            c.check_finite()?;
        }
        Ok(link)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("link serializes")
    }
}

/// Signed count of crossings where component `i` passes over component `j`.
pub fn linking_from_crossings(d: &CrossingDiagram, i: usize, j: usize) -> i64 {
    d.crossings.iter().filter(|c| c.over.component == i && c.under.component == j).map(|c| c.sign as i64).sum()
}

/// Signed count of crossings where component `i` passes under component `j`.
pub fn linking_from_undercrossings(d: &CrossingDiagram, i: usize, j: usize) -> i64 {
    linking_from_crossings(d, j, i)
}

/// Sum of self-crossing signs of component `i`.
pub fn writhe_from_crossings(d: &CrossingDiagram, i: usize) -> i64 {
    d.crossings.iter().filter(|c| c.over.component == i && c.under.component == i).map(|c| c.sign as i64).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn finite_difference(c: &Curve, t: f64) -> V3 {
        let h = 1e-5;
        vec3::scale(vec3::sub(c.eval(t + h), c.eval(t - h)), 0.5 / h)
    }

    #[test]
    fn circle_eval_and_tangent() {
        let c = presets::circle();
        assert_eq!(c.eval(0.0), [1.0, 0.0, 0.0]);
        assert_eq!(c.tangent(0.0), [0.0, 1.0, 0.0]);
    }

    #[test]
    fn periodic() {
        let k = presets::torus_knot(2, 3);
        for t in [0.3, 1.7, 4.0] {
            let d = vec3::norm(vec3::sub(k.eval(t), k.eval(t + TAU)));
            assert!(d < 1e-12);
        }
    }

    #[test]
    fn tangent_matches_finite_differences() {
        for (name, link) in presets::all() {
            for c in &link.components {
                for j in 0..100 {
                    let t = 0.0628 * j as f64 + 0.01;
                    let err = vec3::norm(vec3::sub(c.tangent(t), finite_difference(c, t)));
                    assert!(err < 1e-6, "{name}: {err}");
                    let acc = vec3::scale(vec3::sub(c.tangent(t + 1e-5), c.tangent(t - 1e-5)), 0.5e5);
                    assert!(vec3::norm(vec3::sub(acc, c.acceleration(t))) < 1e-5);
                }
            }
        }
    }

    #[test]
    fn presets_are_embedded() {
        for (name, link) in presets::all() {
            link.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn shrink_scales_horizontal_coordinates() {
        let c = presets::circle();
        assert_eq!(c.shrink(1.0), c);
        let s = c.shrink(0.5);
        let max_xy = s.samples(512).iter().map(|p| p[0].abs().max(p[1].abs())).fold(0.0, f64::max);
        assert!((max_xy - 0.5).abs() < 1e-12);
        assert!(s.samples(64).iter().all(|p| p[2] == 0.0));
        let k = presets::torus_knot(2, 3);
        assert_eq!(k.shrink(0.5).shrink(0.25), k.shrink(0.125));
        k.shrink(1e-3).validate().unwrap();
    }

    #[test]
    fn json_shape() {
        let link = presets::hopf();
        let text = link.to_json();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!(v["components"][0]["const"].is_array());
        assert_eq!(v["components"][0]["cos"].as_array().unwrap().len(), 3);
        assert_eq!(LinkEmbedding::from_json(&text).unwrap(), link);
        assert!(LinkEmbedding::from_json("{\"components\": 3}").is_err());
    }

    proptest::proptest! {
        #[test]
        fn shrink_composes_exactly(i in 0i32..12, k in 0i32..12, name in proptest::sample::select(presets::NAMES)) {
            let link = presets::by_name(name).unwrap();
            let (a, b) = (2f64.powi(-i), 2f64.powi(-k));
            proptest::prop_assert_eq!(link.shrink(a).shrink(b), link.shrink(a * b));
        }

        #[test]
        fn shrink_composes_to_rounding(a in 1e-3f64..1.0, b in 1e-3f64..1.0) {
            let k = presets::torus_knot(2, 3);
            let (x, y) = (k.shrink(a).shrink(b), k.shrink(a * b));
            for c in 0..3 {
                for (p, q) in x.cos[c].iter().chain(&x.sin[c]).zip(y.cos[c].iter().chain(&y.sin[c])) {
                    proptest::prop_assert!((p - q).abs() <= 4.0 * f64::EPSILON * q.abs());
                }
            }
        }
    }
}
