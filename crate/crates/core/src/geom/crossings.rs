use super::{GeomError, LinkEmbedding};
use crate::vec3::{self, V3};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::TAU;

/// Samples per component for the coarse segment scan.
const SCAN: usize = 2048;
const NEWTON_TOL: f64 = 1e-12;
const SEPARATION_TOL: f64 = 1e-6;

/// One preimage point of a crossing: a component and a curve parameter in `[0, 2pi)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Strand {
    pub component: usize,
    pub param: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub over: Strand,
    pub under: Strand,
    /// +1 when the rotation from the over direction to the under direction is
    /// counterclockwise seen from the projection direction.
    pub sign: i8,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CrossingDiagram {
    pub direction: V3,
    pub crossings: Vec<Crossing>,
    pub components: usize,
}

struct Projector {
    a: V3,
    b: V3,
    d: V3,
}

impl Projector {
    fn plane(&self, p: V3) -> [f64; 2] {
        [vec3::dot(p, self.a), vec3::dot(p, self.b)]
    }
}

/// All transverse double points of the projection of `link` along `direction`
/// (the direction points from the picture towards the viewer).
pub fn project_crossings(link: &LinkEmbedding, direction: V3) -> Result<CrossingDiagram, GeomError> {
    project_crossings_with(link, direction, SCAN)
}

pub fn project_crossings_with(link: &LinkEmbedding, direction: V3, scan: usize) -> Result<CrossingDiagram, GeomError> {
    let d = vec3::normalize(direction);
    let (a, b) = vec3::sphere_frame(d);
    let proj = Projector { a, b, d };

    let pts: Vec<Vec<[f64; 2]>> = link
        .components
        .iter()
        .map(|c| c.samples(scan).into_iter().map(|p| proj.plane(p)).collect())
        .collect();

    // segment id: (component, index); bucket the segments on a uniform grid
    let segs: Vec<(usize, usize)> =
        (0..pts.len()).flat_map(|c| (0..scan).map(move |i| (c, i))).collect();
    let seg_box = |&(c, i): &(usize, usize)| {
        let p = pts[c][i];
        let q = pts[c][(i + 1) % scan];
        ([p[0].min(q[0]), p[1].min(q[1])], [p[0].max(q[0]), p[1].max(q[1])])
    };
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    let mut mean_len = 0.0;
    for s in &segs {
        let (l, h) = seg_box(s);
        for k in 0..2 {
            lo[k] = lo[k].min(l[k]);
            hi[k] = hi[k].max(h[k]);
        }
        mean_len += (h[0] - l[0]).max(h[1] - l[1]);
    }
    mean_len /= segs.len() as f64;
    let cell = (4.0 * mean_len).max(1e-12);
    let dims = [
        (((hi[0] - lo[0]) / cell) as usize + 1).min(4096),
        (((hi[1] - lo[1]) / cell) as usize + 1).min(4096),
    ];
    let cell_of = |x: f64, k: usize| (((x - lo[k]) / (hi[k] - lo[k]).max(1e-300)) * dims[k] as f64).floor().clamp(0.0, (dims[k] - 1) as f64) as usize;
    let mut buckets: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (id, s) in segs.iter().enumerate() {
        let (l, h) = seg_box(s);
        for x in cell_of(l[0], 0)..=cell_of(h[0], 0) {
            for y in cell_of(l[1], 1)..=cell_of(h[1], 1) {
                buckets.entry((x, y)).or_default().push(id);
            }
        }
    }

    let mut candidates: Vec<(usize, usize)> = Vec::new();
    let mut keys: Vec<_> = buckets.keys().copied().collect();
    keys.sort_unstable();
    for key in keys {
        let ids = &buckets[&key];
        for (n, &u) in ids.iter().enumerate() {
            for &v in &ids[n + 1..] {
                let (s, t) = (segs[u], segs[v]);
                if s.0 == t.0 {
                    let gap = (s.1 as isize - t.1 as isize).unsigned_abs();
                    if gap <= 1 || gap == scan - 1 {
                        continue;
                    }
                }
                if segments_intersect(&pts, scan, s, t).is_some() {
                    candidates.push((u.min(v), u.max(v)));
                }
            }
        }
    }
    candidates.sort_unstable();
    candidates.dedup();

    let h = TAU / scan as f64;
    let mut found: Vec<Crossing> = Vec::new();
    for (u, v) in candidates {
        let (s, t) = (segs[u], segs[v]);
        let (fs, ft) = segments_intersect(&pts, scan, s, t).expect("candidate intersects");
        let s0 = (s.1 as f64 + fs) * h;
        let t0 = (t.1 as f64 + ft) * h;
        let crossing = refine(link, &proj, s.0, s0, t.0, t0)?;
        found.push(crossing);
    }

    // merge duplicates reported by neighbouring segment pairs
    let mut crossings: Vec<Crossing> = Vec::new();
    for c in found {
        if !crossings.iter().any(|e| same_crossing(e, &c)) {
            crossings.push(c);
        }
    }
    crossings.sort_by(|x, y| {
        (x.over.component, x.under.component)
            .cmp(&(y.over.component, y.under.component))
            .then(x.over.param.total_cmp(&y.over.param))
    });

    for (i, x) in crossings.iter().enumerate() {
        let px = proj.plane(link.components[x.over.component].eval(x.over.param));
        for y in &crossings[i + 1..] {
            let py = proj.plane(link.components[y.over.component].eval(y.over.param));
            if ((px[0] - py[0]).powi(2) + (px[1] - py[1]).powi(2)).sqrt() < SEPARATION_TOL {
                return Err(GeomError::NonGenericDirection("near-triple point".into()));
            }
        }
    }

    Ok(CrossingDiagram { direction: d, crossings, components: link.len() })
}

fn param_close(a: f64, b: f64) -> bool {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d) < 1e-7
}

fn same_crossing(x: &Crossing, y: &Crossing) -> bool {
    x.over.component == y.over.component
        && x.under.component == y.under.component
        && param_close(x.over.param, y.over.param)
        && param_close(x.under.param, y.under.param)
}

// Returns the fractional positions along both segments when they properly intersect.
fn segments_intersect(pts: &[Vec<[f64; 2]>], n: usize, s: (usize, usize), t: (usize, usize)) -> Option<(f64, f64)> {
    let p = pts[s.0][s.1];
    let p2 = pts[s.0][(s.1 + 1) % n];
    let q = pts[t.0][t.1];
    let q2 = pts[t.0][(t.1 + 1) % n];
    let r = [p2[0] - p[0], p2[1] - p[1]];
    let w = [q2[0] - q[0], q2[1] - q[1]];
    let denom = r[0] * w[1] - r[1] * w[0];
    if denom == 0.0 {
        return None;
    }
    let qp = [q[0] - p[0], q[1] - p[1]];
    let fs = (qp[0] * w[1] - qp[1] * w[0]) / denom;
    let ft = (qp[0] * r[1] - qp[1] * r[0]) / denom;
    // half-open so a crossing exactly at a shared sample is reported once
    if (0.0..1.0).contains(&fs) && (0.0..1.0).contains(&ft) {
        Some((fs, ft))
    } else {
        None
    }
}

fn refine(link: &LinkEmbedding, proj: &Projector, ca: usize, mut s: f64, cb: usize, mut t: f64) -> Result<Crossing, GeomError> {
    let (ka, kb) = (&link.components[ca], &link.components[cb]);
    for iter in 0.. {
        let f = {
            let p = proj.plane(ka.eval(s));
            let q = proj.plane(kb.eval(t));
            [p[0] - q[0], p[1] - q[1]]
        };
        let da = proj.plane(ka.tangent(s));
        let db = proj.plane(kb.tangent(t));
        let det = -da[0] * db[1] + da[1] * db[0];
        let scale = (da[0].hypot(da[1])) * (db[0].hypot(db[1]));
        if det.abs() < SEPARATION_TOL * scale {
            return Err(GeomError::NonGenericDirection("tangential double point".into()));
        }
        // [da, -db] (ds, dt)^T = -f
        let ds = (-f[0] * -db[1] - -db[0] * -f[1]) / det;
        let dt = (da[0] * -f[1] - da[1] * -f[0]) / det;
        s += ds;
        t += dt;
        if ds.abs().max(dt.abs()) < NEWTON_TOL {
            break;
        }
        if iter > 60 {
            return Err(GeomError::NonGenericDirection("crossing refinement did not converge".into()));
        }
    }
    let s = s.rem_euclid(TAU);
    let t = t.rem_euclid(TAU);
    let (pa, pb) = (ka.eval(s), kb.eval(t));
    let (ha, hb) = (vec3::dot(pa, proj.d), vec3::dot(pb, proj.d));
    if (ha - hb).abs() < SEPARATION_TOL {
        return Err(GeomError::NotEmbedded("strands meet at a crossing".into()));
    }
    let (over, under) = if ha > hb {
        (Strand { component: ca, param: s }, Strand { component: cb, param: t })
    } else {
        (Strand { component: cb, param: t }, Strand { component: ca, param: s })
    };
    let to = link.components[over.component].tangent(over.param);
    let tu = link.components[under.component].tangent(under.param);
    let sign = if vec3::det3(to, tu, proj.d) > 0.0 { 1 } else { -1 };
    Ok(Crossing { over, under, sign })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{linking_from_crossings, linking_from_undercrossings, presets, writhe_from_crossings};

    #[test]
    fn hopf_has_two_positive_crossings() {
        let d = project_crossings(&presets::hopf(), [0.0, 0.0, 1.0]).unwrap();
        assert_eq!(d.crossings.len(), 2);
        assert!(d.crossings.iter().all(|c| c.sign == 1));
        assert_eq!(linking_from_crossings(&d, 0, 1), 1);
        assert_eq!(linking_from_crossings(&d, 1, 0), 1);
    }

    #[test]
    fn split_circles_do_not_cross() {
        let d = project_crossings(&presets::split_circles(), [0.0, 0.0, 1.0]).unwrap();
        assert!(d.crossings.is_empty());
        assert_eq!(linking_from_crossings(&d, 0, 1), 0);
        let c = project_crossings(&LinkEmbedding::knot(presets::circle()), [0.0, 0.0, 1.0]).unwrap();
        assert_eq!(writhe_from_crossings(&c, 0), 0);
    }

    #[test]
    fn torus_link_linking_number() {
        let d = project_crossings(&presets::torus_link_2_4(), [0.0, 0.0, 1.0]).unwrap();
        assert_eq!(linking_from_crossings(&d, 0, 1), 2);
    }

    #[test]
    fn trefoil_projection_has_three_equal_crossings() {
        let d = project_crossings(&LinkEmbedding::knot(presets::torus_knot(2, 3)), [0.0, 0.0, 1.0]).unwrap();
        assert_eq!(d.crossings.len(), 3);
        assert_eq!(writhe_from_crossings(&d, 0), -3);
        // the crossing points really coincide in the plane
        let (a, b) = vec3::sphere_frame(d.direction);
        for c in &d.crossings {
            let k = presets::torus_knot(2, 3);
            let gap = vec3::sub(k.eval(c.over.param), k.eval(c.under.param));
            assert!(vec3::dot(gap, a).abs() < 1e-9 && vec3::dot(gap, b).abs() < 1e-9);
        }
    }

    #[test]
    fn kink_shifts_writhe_by_one() {
        let up = [0.0, 0.0, 1.0];
        let plain = writhe_from_crossings(&project_crossings(&LinkEmbedding::knot(presets::planar_trefoil()), up).unwrap(), 0);
        let kinked = writhe_from_crossings(&project_crossings(&LinkEmbedding::knot(presets::kinked_trefoil()), up).unwrap(), 0);
        assert_eq!((kinked - plain).abs(), 1);
    }

    #[test]
    fn linking_is_direction_independent() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for (link, expected) in [(presets::hopf(), 1), (presets::torus_link_2_4(), 2)] {
            let mut seen = 0;
            while seen < 20 {
                let v = [rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5];
                if vec3::norm(v) < 0.1 {
                    continue;
                }
                let Ok(d) = project_crossings(&link, v) else { continue };
                assert_eq!(linking_from_crossings(&d, 0, 1), expected);
                assert_eq!(linking_from_crossings(&d, 1, 0), expected);
                assert_eq!(linking_from_undercrossings(&d, 0, 1), linking_from_crossings(&d, 0, 1));
                seen += 1;
            }
        }
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(40))]
        #[test]
        fn crossing_counts_agree_in_every_direction(
            theta in 0.0f64..std::f64::consts::PI,
            phi in 0.0f64..std::f64::consts::TAU,
            torus in proptest::bool::ANY,
        ) {
            let (link, expected) = if torus { (presets::torus_link_2_4(), 2) } else { (presets::hopf(), 1) };
            let v = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
            let d = project_crossings(&link, v);
            proptest::prop_assume!(d.is_ok());
            let d = d.unwrap();
            proptest::prop_assert_eq!(linking_from_crossings(&d, 0, 1), expected);
            proptest::prop_assert_eq!(linking_from_crossings(&d, 1, 0), linking_from_crossings(&d, 0, 1));
            proptest::prop_assert_eq!(linking_from_undercrossings(&d, 0, 1), linking_from_crossings(&d, 0, 1));
        }
    }
}
