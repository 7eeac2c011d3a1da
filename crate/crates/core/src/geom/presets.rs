//! Shipped example curves and links.

use super::{Curve, LinkEmbedding};
use crate::linalg;
use std::f64::consts::PI;

pub fn circle() -> Curve {
    Curve::from_fn(1, |t| [t.cos(), t.sin(), 0.0])
}

/// Two round circles, each passing through the other's center (slightly tilted so the
/// vertical projection is regular). Linking number +1.
pub fn hopf() -> LinkEmbedding {
    let a = circle();
    let b = Curve::from_fn(1, |t| [1.0 + t.cos(), 0.3 * t.sin(), -t.sin()]);
    LinkEmbedding::new(vec![a, b])
}

/// Two unit circles side by side in the plane `z = 0`.
pub fn split_circles() -> LinkEmbedding {
    LinkEmbedding::new(vec![circle(), circle().translate([3.0, 0.0, 0.0])])
}

/// `(p, q)` torus knot on the torus with radii 2 and 1 (`gcd(p, q) = 1`).
pub fn torus_knot(p: u32, q: u32) -> Curve {
    let (p, q) = (p as f64, q as f64);
    let degree = (p + q) as usize;
    Curve::from_fn(degree, move |t| {
        let r = 2.0 + (q * t).cos();
        [r * (p * t).cos(), r * (p * t).sin(), (q * t).sin()]
    })
}

/// `(2, 4)` torus link: two `(1, 2)` curves offset by half a meridian. Linking number +2.
pub fn torus_link_2_4() -> LinkEmbedding {
    let comp = |phase: f64| {
        Curve::from_fn(3, move |t| {
            let r = 2.0 + (2.0 * t + phase).cos();
            [r * t.cos(), r * t.sin(), (2.0 * t + phase).sin()]
        })
    };
    LinkEmbedding::new(vec![comp(0.0), comp(PI).reversed()])
}

/// Lissajous-type figure-eight knot `((2 + cos 2t) cos 3t, (2 + cos 2t) sin 3t, sin 4t)`.
pub fn figure_eight() -> Curve {
    Curve::from_fn(5, |t| {
        let r = 2.0 + (2.0 * t).cos();
        [r * (3.0 * t).cos(), r * (3.0 * t).sin(), (4.0 * t).sin()]
    })
}

/// The common trefoil `(sin t + 2 sin 2t, cos t - 2 cos 2t, -sin 3t)`.
pub fn trefoil_standard() -> Curve {
    Curve::from_fn(3, |t| [t.sin() + 2.0 * (2.0 * t).sin(), t.cos() - 2.0 * (2.0 * t).cos(), -(3.0 * t).sin()])
}

/// The same planar diagram with a thin vertical profile (almost horizontal).
pub fn planar_trefoil() -> Curve {
    Curve::from_fn(3, |t| {
        [t.sin() + 2.0 * (2.0 * t).sin(), t.cos() - 2.0 * (2.0 * t).cos(), -KINK_DEPTH * (3.0 * t).sin()]
    })
}

const KINK_DEPTH: f64 = 0.005;

/// `planar_trefoil` with one extra small curl, i.e. a Reidemeister-I kink.
pub fn kinked_trefoil() -> Curve {
    // a localized epicycle: the window (1 + cos(t - t0))^w / 2^w confines the curl near t0
    let t0 = KINK_AT;
    Curve::from_fn(16, move |t| {
        let base = [t.sin() + 2.0 * (2.0 * t).sin(), t.cos() - 2.0 * (2.0 * t).cos(), -KINK_DEPTH * (3.0 * t).sin()];
        let w = ((1.0 + (t - t0).cos()) / 2.0).powi(KINK_WINDOW);
        let phase = KINK_FREQ * (t - t0);
        [
            base[0] + KINK_RADIUS * w * phase.cos() - KINK_RADIUS * w,
            base[1] + KINK_RADIUS * w * phase.sin(),
            base[2] + KINK_LIFT * w * phase.sin(),
        ]
    })
}

const KINK_AT: f64 = 0.0;
const KINK_FREQ: f64 = 8.0;
const KINK_WINDOW: i32 = 8;
const KINK_RADIUS: f64 = 0.8;
const KINK_LIFT: f64 = 0.002;

/// A trefoil whose diagram lives in the blackboard plane `y = 0`, with height `z`,
/// and whose horizontal tangents (at the four extrema of `z`) all point along `+-x`.
pub fn blackboard_trefoil() -> Curve {
    let (ext, _) = blackboard_extrema();
    // depth y = sum_k c_k sin(kt): y' vanishes at the extrema, and each of the three
    // crossings of the diagram keeps the depth gap of the alternating profile -sin 3t
    let n = 6;
    let mut m = Vec::new();
    let mut rhs = Vec::new();
    for &te in &ext {
        m.extend((1..=n).map(|k| k as f64 * (k as f64 * te).cos()));
        rhs.push(0.0);
    }
    for (s, t) in DIAGRAM_CROSSINGS {
        m.extend((1..=n).map(|k| (k as f64 * s).sin() - (k as f64 * t).sin()));
        rhs.push((3.0 * t).sin() - (3.0 * s).sin());
    }
    let c = linalg::solve(&m, &rhs, n).expect("regular system");
    Curve::from_fn(n, move |t| {
        let y: f64 = c.iter().enumerate().map(|(i, ck)| ck * ((i + 1) as f64 * t).sin()).sum();
        [t.sin() + 2.0 * (2.0 * t).sin(), BLACKBOARD_DEPTH * y, t.cos() - 2.0 * (2.0 * t).cos()]
    })
}

// Parameter pairs of the three double points of t -> (sin t + 2 sin 2t, cos t - 2 cos 2t).
const DIAGRAM_CROSSINGS: [(f64, f64); 3] = [
    (1.8234765819369751, 4.459708725242611),
    (3.917871684330171, 0.2709185204562202),
    (6.012266786723366, 2.3653136228494156),
];

const BLACKBOARD_DEPTH: f64 = 1.0;

// Extrema of z = cos t - 2 cos 2t in [0, pi] (the curve is symmetric under t -> -t).
fn blackboard_extrema() -> ([f64; 3], f64) {
    let t1 = (1.0f64 / 8.0).acos();
    ([0.0, PI, t1], t1)
}

/// `blackboard_trefoil` with the horizontal tangent at the lowest minimum (`t = pi`)
/// turned from `+x` to `+y`. The change is confined near `t = pi` by a window; a
/// low-order odd term cancels the window's tail in `y'` at the other extrema, so
/// their tangents stay along `x`.
pub fn rotated_extremum_trefoil() -> Curve {
    let base = blackboard_trefoil();
    let x_speed = base.tangent(PI)[0];
    let (_, t1) = blackboard_extrema();
    let m = ROTATED_WINDOW;
    let bump = move |t: f64| {
        let w = ((1.0 - t.cos()) / 2.0).powi(m);
        (t - PI).sin() * w
    };
    // derivative of the bump at t1
    let c = (t1 - PI).cos() * ((1.0 - t1.cos()) / 2.0).powi(m)
        + (t1 - PI).sin() * m as f64 * ((1.0 - t1.cos()) / 2.0).powi(m - 1) * t1.sin() / 2.0;
    // g = sum b_k sin(k t), k = 1..3, with g'(0) = g'(pi) = 0 and g'(t1) = c
    let mut a = Vec::new();
    for row in [0.0, PI, t1] {
        for k in 1..=3 {
            a.push(k as f64 * (k as f64 * row).cos());
        }
    }
    let b = linalg::solve(&a, &[0.0, 0.0, c], 3).expect("independent conditions");
    Curve::from_fn(16, move |t| {
        let p = base.eval(t);
        let g: f64 = (1..=3).map(|k| b[k - 1] * (k as f64 * t).sin()).sum();
        [p[0] - x_speed * bump(t), p[1] + ROTATED_SPEED * (bump(t) - g), p[2]]
    })
}

const ROTATED_WINDOW: i32 = 12;
const ROTATED_SPEED: f64 = 1.0;

pub fn by_name(name: &str) -> Option<LinkEmbedding> {
    let knot = |c: Curve| Some(LinkEmbedding::knot(c));
    match name {
        "circle" | "unknot" => knot(circle()),
        "hopf" => Some(hopf()),
        "split" | "split-circles" => Some(split_circles()),
        "trefoil" => knot(torus_knot(2, 3)),
        "trefoil-standard" => knot(trefoil_standard()),
        "trefoil-planar" => knot(planar_trefoil()),
        "trefoil-kinked" => knot(kinked_trefoil()),
        "trefoil-blackboard" => knot(blackboard_trefoil()),
        "trefoil-rotated" => knot(rotated_extremum_trefoil()),
        "figure-eight" => knot(figure_eight()),
        "torus-2-4" => Some(torus_link_2_4()),
        "torus-2-5" => knot(torus_knot(2, 5)),
        _ => None,
    }
}

pub const NAMES: &[&str] = &[
    "circle",
    "hopf",
    "split-circles",
    "trefoil",
    "trefoil-standard",
    "trefoil-planar",
    "trefoil-kinked",
    "trefoil-blackboard",
    "trefoil-rotated",
    "figure-eight",
    "torus-2-4",
    "torus-2-5",
];

pub fn all() -> Vec<(&'static str, LinkEmbedding)> {
    NAMES.iter().map(|n| (*n, by_name(n).expect("listed preset"))).collect()
}
