//! Acceptance suite. Runs each criterion alone, in order, and prints one line per
//! criterion. Pass criterion numbers as arguments to run a subset.

use csint::anomaly::{check_diagram, check_vanishing_filters, classify, estimate_alpha1, FilterReport, Mechanism};
use csint::csint::{
    degree2_invariant, distance_mod1, gauss_linking, shrink_limit, shrink_prediction, writhe_integral, Degree2Estimate,
    SamplerConfig,
};
use csint::geom::{linking_from_crossings, presets, project_crossings, Curve};
use csint::jacobi::{
    automorphism_count, canonical_form, enumerate_chord_diagrams, enumerate_connected, quotient_basis,
    quotient_basis_shuffled, stu_at, stu_reduce_with, DiagramSum, HalfEdge, JacobiDiagram, ReductionOrder, Support,
};
use csint::oracle::{conway_of, directional_writhe};
use csint::sampling::with_threads;
use csint::IntegralEstimate;
use num_rational::BigRational;
use num_traits::One;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::sync::Mutex;
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;

/// Bit patterns of every Monte Carlo output, keyed by job name.
static MC: Mutex<BTreeMap<&'static str, Vec<u64>>> = Mutex::new(BTreeMap::new());

const ANOMALY_CONFIGURATIONS: usize = 10_000;
const DIRECTIONS: usize = 10_000;
const V2_SAMPLES: u64 = 1_000_000;
const ALPHA1_SAMPLES: u64 = 200_000;

fn knot(name: &str) -> Curve {
    presets::by_name(name).unwrap().components[0].clone()
}

fn bits(xs: &[f64]) -> Vec<u64> {
    xs.iter().map(|x| x.to_bits()).collect()
}

fn record(name: &'static str, xs: &[f64]) {
    MC.lock().unwrap().insert(name, bits(xs));
}

fn check(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

// Monte Carlo jobs, shared with the determinism rerun.

fn job_directional() -> Vec<f64> {
    let w = directional_writhe(&knot("trefoil"), DIRECTIONS, 3);
    vec![w.value, w.std_error]
}

fn v2(name: &str, seed: u64) -> Degree2Estimate {
    degree2_invariant(&knot(name), &SamplerConfig::monte_carlo(V2_SAMPLES, seed)).unwrap()
}

fn v2_bits(e: &Degree2Estimate) -> Vec<f64> {
    vec![e.invariant.value, e.invariant.std_error, e.y_integral.value, e.x_integral.value]
}

fn job_v2_trefoil() -> Vec<f64> {
    v2_bits(&v2("trefoil", 11))
}

fn job_v2_standard() -> Vec<f64> {
    v2_bits(&v2("trefoil-standard", 23))
}

fn job_v2_figure_eight() -> Vec<f64> {
    v2_bits(&v2("figure-eight", 11))
}

fn alpha1() -> IntegralEstimate {
    estimate_alpha1(&SamplerConfig::monte_carlo(ALPHA1_SAMPLES, 5)).unwrap()
}

fn job_alpha1() -> Vec<f64> {
    let a = alpha1();
    vec![a.value, a.std_error]
}

fn report(n: usize) -> FilterReport {
    check_vanishing_filters(n, ANOMALY_CONFIGURATIONS, 2024).unwrap()
}

fn job_report3() -> Vec<f64> {
    report(3).entries.iter().filter_map(|e| e.residual).collect()
}

const JOBS: [(&str, fn() -> Vec<f64>); 6] = [
    ("directional writhe", job_directional),
    ("v2 trefoil", job_v2_trefoil),
    ("v2 trefoil-standard", job_v2_standard),
    ("v2 figure-eight", job_v2_figure_eight),
    ("alpha1", job_alpha1),
    ("filters n=3", job_report3),
];

fn job(name: &str) -> fn() -> Vec<f64> {
    JOBS.iter().find(|(n, _)| *n == name).unwrap().1
}

fn criterion_1() -> Outcome {
    let cfg = SamplerConfig::quadrature(512 * 512);
    let mut msgs = Vec::new();
    let mut ok = true;
    for (name, tol) in [("hopf", 1e-6), ("torus-2-4", 1e-4)] {
        let start = Instant::now();
        let link = presets::by_name(name).unwrap();
        let crossings = linking_from_crossings(&project_crossings(&link, [0.13, 0.21, 0.97]).unwrap(), 0, 1);
        let e = gauss_linking(&link, 0, 1, &cfg).unwrap();
        let secs = start.elapsed().as_secs_f64();
        let d = (e.value - crossings as f64).abs();
        ok &= d <= tol && secs < 30.0;
        msgs.push(format!("{name} {:.9} vs crossings {crossings} (|d| {d:.1e} <= {tol:.0e}, {secs:.1}s)", e.value));
    }
    check(ok, msgs.join("; "))
}

fn criterion_2() -> Outcome {
    let e = gauss_linking(&presets::split_circles(), 0, 1, &SamplerConfig::quadrature(512 * 512)).unwrap();
    check(e.value.abs() <= 1e-9, format!("split circles {:.2e} (<= 1e-9)", e.value))
}

fn criterion_3() -> Outcome {
    let cfg = SamplerConfig::quadrature(1_000_000);
    let w = writhe_integral(&knot("trefoil"), &cfg).unwrap();
    let dir = job_directional();
    record("directional writhe", &dir);
    let d = (w.value - dir[0]).abs();
    let plain = writhe_integral(&knot("trefoil-planar"), &cfg).unwrap();
    let kinked = writhe_integral(&knot("trefoil-kinked"), &cfg).unwrap();
    let shift = kinked.value - plain.value;
    check(
        d <= 0.02 && (shift.abs() - 1.0).abs() <= 0.03,
        format!(
            "trefoil integral {:.5} vs {DIRECTIONS} directions {:.5} +- {:.4} (|d| {d:.4} <= 0.02); kink shift {shift:.4} (|.| = 1 +- 0.03)",
            w.value, dir[0], dir[1]
        ),
    )
}

fn criterion_4() -> Outcome {
    let dir = [0.13, 0.21, 0.97];
    let a2 = |name: &str| conway_of(&presets::by_name(name).unwrap(), dir).unwrap().coefficient(2);
    let mut msgs = Vec::new();
    let mut ok = true;
    let mut trefoils = Vec::new();
    for (name, label) in [("trefoil", "v2 trefoil"), ("trefoil-standard", "v2 trefoil-standard"), ("figure-eight", "v2 figure-eight")] {
        let vals = job(label)();
        record(label, &vals);
        let (v, se) = (vals[0], vals[1]);
        let exact = a2(name);
        let good = (v - exact as f64).abs() <= 3.0 * se && se <= 0.05;
        ok &= good;
        msgs.push(format!("{name} {v:.4} +- {se:.4} vs a2 {exact}"));
        if name.starts_with("trefoil") {
            trefoils.push((v, se));
        }
    }
    let (a, b) = (trefoils[0], trefoils[1]);
    let combined = (a.1 * a.1 + b.1 * b.1).sqrt();
    let agree = (a.0 - b.0).abs() <= 3.0 * combined;
    ok &= agree;
    msgs.push(format!("parametrizations differ by {:.4} (3 sigma {:.4})", (a.0 - b.0).abs(), 3.0 * combined));
    check(ok, format!("{} at {V2_SAMPLES} samples per integral", msgs.join("; ")))
}

fn criterion_5() -> Outcome {
    let mut msgs = Vec::new();
    let mut ok = true;
    for n in 2..=4 {
        let r = report(n);
        if n == 3 {
            record("filters n=3", &r.entries.iter().filter_map(|e| e.residual).collect::<Vec<_>>());
        }
        ok &= r.passed && r.survivors.is_empty();
        msgs.push(format!("n={n}: {} diagrams, {} survivors, max residual {:.1e}", r.diagrams, r.survivors.len(), r.max_residual));
    }
    // odd degrees only: at even degree every diagram is handled by central symmetry
    for n in [3, 5] {
        let diagrams: Vec<JacobiDiagram> = enumerate_connected(n, &Support::two_lines(), 0).unwrap();
        for mechanism in [Mechanism::TwoLegs, Mechanism::Coplanar] {
            let chosen: Vec<&JacobiDiagram> = diagrams.iter().filter(|g| classify(g).0 == mechanism).collect();
            if chosen.is_empty() {
                continue;
            }
            let worst = chosen
                .par_iter()
                .enumerate()
                .map(|(i, g)| check_diagram(g, ANOMALY_CONFIGURATIONS, 7 + i as u64).unwrap().unwrap())
                .reduce(|| 0.0, f64::max);
            let tol = mechanism.tolerance().unwrap();
            ok &= worst <= tol;
            msgs.push(format!("n={n} {mechanism:?}: {} diagrams, worst {worst:.1e} (<= {tol:.0e})", chosen.len()));
        }
    }
    check(ok, format!("{} ({ANOMALY_CONFIGURATIONS} configurations each)", msgs.join("; ")))
}

fn criterion_6() -> Outcome {
    let vals = job_alpha1();
    record("alpha1", &vals);
    let (v, se) = (vals[0], vals[1]);
    check((v - 1.0).abs() <= 3.0 * se && se <= 0.02, format!("alpha1 {v:.5} +- {se:.5} at {ALPHA1_SAMPLES} samples"))
}

fn criterion_7() -> Outcome {
    let cfg = SamplerConfig::quadrature(100_000_000);
    let at = |name: &str| {
        let k = knot(name);
        let est = shrink_limit(&k, &[1e-3], &cfg).unwrap()[0].1.value;
        (est, shrink_prediction(&k).unwrap())
    };
    let (bb, bb_pred) = at("trefoil-blackboard");
    let (rot, rot_pred) = at("trefoil-rotated");
    let d_bb = distance_mod1(bb, bb_pred);
    let d_rot = distance_mod1(rot, rot_pred);
    let shift = distance_mod1(rot - bb, 0.5);
    check(
        d_bb <= 1e-2 && distance_mod1(rot_pred, 0.5) <= 1e-9 && d_rot <= 2e-2 && shift <= 2e-2,
        format!(
            "blackboard {bb:.5} vs prediction {bb_pred:.3} (d {d_bb:.1e} <= 1e-2); rotated {rot:.5} vs {rot_pred:.3} (d {d_rot:.1e} <= 2e-2), shift off 1/2 by {shift:.1e}"
        ),
    )
}

fn q(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

/// All 4T relations among circle chord diagrams of degree `n`, built from chord
/// positions: a chord from `p` with its far end just before or after each end
/// of another chord.
fn four_term_relations(n: usize) -> Vec<DiagramSum> {
    let mut out = Vec::new();
    for base in enumerate_chord_diagrams(n - 1, &Support::circle()).unwrap() {
        let m = 2 * (n - 1);
        let pairs: Vec<(usize, usize)> = base
            .edges
            .iter()
            .filter_map(|e| match *e {
                (HalfEdge::Leg(a), HalfEdge::Leg(b)) => Some((base.legs[a].rank, base.legs[b].rank)),
                _ => None,
            })
            .collect();
        // old points at multiples of 4, new ends at 4x +- 1, p strictly inside a gap
        let w = 4 * m;
        for p in 0..m {
            let p4 = 4 * p + 2;
            for &(a, b) in &pairs {
                // order q, r as met going forward from p
                let ahead = |x: usize| (4 * x + w - p4) % w;
                let (qq, rr) = if ahead(a) < ahead(b) { (a, b) } else { (b, a) };
                let ends = [4 * qq + w - 1, 4 * qq + 1, 4 * rr + 1, 4 * rr + w - 1].map(|e| e % w);
                let diagram = |end: usize| {
                    let mut pts: Vec<(usize, usize)> = Vec::new();
                    for (id, &(x, y)) in pairs.iter().enumerate() {
                        pts.push((4 * x, id));
                        pts.push((4 * y, id));
                    }
                    pts.push((p4, pairs.len()));
                    pts.push((end, pairs.len()));
                    pts.sort();
                    let mut at = vec![Vec::new(); pairs.len() + 1];
                    for (pos, (_, id)) in pts.iter().enumerate() {
                        at[*id].push(pos);
                    }
                    let chords: Vec<(usize, usize)> = at.iter().map(|v| (v[0], v[1])).collect();
                    JacobiDiagram::chords(Support::circle(), &chords).unwrap()
                };
                let mut s = DiagramSum::new();
                for (end, c) in ends.iter().zip([1, -1, -1, 1]) {
                    s.add_diagram(&diagram(*end), &q(c)).unwrap();
                }
                out.push(s);
            }
        }
    }
    out
}

fn criterion_8() -> Outcome {
    let mut msgs = Vec::new();
    let mut ok = true;
    // AS: flipping one vertex negates the diagram
    let mut as_checked = 0;
    for n in 1..=3 {
        for g in enumerate_connected(n, &Support::circle(), 0).unwrap() {
            for v in 0..g.n_tri {
                let mut s = DiagramSum::from_diagram(&g).unwrap();
                s.add_diagram(&g.flip_vertex(v), &BigRational::one()).unwrap();
                let (_, sa) = canonical_form(&g).unwrap().into_parts();
                let (_, sb) = canonical_form(&g.flip_vertex(v)).unwrap().into_parts();
                ok &= s.is_zero() && sa == -sb;
                as_checked += 1;
            }
        }
    }
    msgs.push(format!("AS on {as_checked} flips"));
    // STU keeps the degree
    let mut stu_checked = 0;
    for n in 1..=4 {
        for g in enumerate_connected(n, &Support::circle(), 0).unwrap() {
            for v in 0..g.n_tri {
                for slot in 0..3 {
                    if let Ok((t, u)) = stu_at(&g, v, slot) {
                        ok &= t.degree() == n && u.degree() == n;
                        stu_checked += 1;
                    }
                }
            }
        }
    }
    msgs.push(format!("STU degree on {stu_checked} resolutions"));
    // 4T vanishes in the quotient
    let (mut four_t, mut vanish) = (0, 0);
    for n in 2..=3 {
        let quotient = quotient_basis(n, &Support::circle()).unwrap();
        for s in four_term_relations(n) {
            four_t += 1;
            vanish += usize::from(quotient.is_zero(&s).unwrap());
        }
    }
    ok &= vanish == four_t;
    msgs.push(format!("{vanish}/{four_t} 4T relations vanish"));
    let aut = automorphism_count(&JacobiDiagram::theta()).unwrap();
    ok &= aut == 2;
    msgs.push(format!("#Aut(theta) = {aut}"));
    // reduction order
    let mut orders = 0;
    for n in 1..=3 {
        let quotient = quotient_basis(n, &Support::circle()).unwrap();
        for g in enumerate_connected(n, &Support::circle(), 0).unwrap() {
            let a = stu_reduce_with(&g, ReductionOrder::First).unwrap();
            let b = stu_reduce_with(&g, ReductionOrder::Last).unwrap();
            ok &= quotient.project(&a).unwrap() == quotient.project(&b).unwrap();
            orders += 1;
        }
    }
    msgs.push(format!("reduction order on {orders} diagrams"));
    // pivot order
    let mut dims = Vec::new();
    for support in [Support::circle(), Support::line()] {
        for n in 1..=4 {
            let d = quotient_basis(n, &support).unwrap().dimension();
            ok &= (0..3).all(|seed| quotient_basis_shuffled(n, &support, seed).unwrap().dimension() == d);
            dims.push(d);
        }
    }
    ok &= dims == [1, 2, 3, 6, 1, 2, 3, 6];
    msgs.push(format!("dimensions {dims:?} under shuffled pivots"));
    check(ok, msgs.join("; "))
}

fn criterion_9() -> Outcome {
    let recorded = MC.lock().unwrap().clone();
    let mut ok = true;
    let mut msgs = Vec::new();
    for (name, f) in JOBS {
        let mut same = true;
        for threads in [1, 2, 8] {
            let b = bits(&with_threads(threads, f));
            match recorded.get(name) {
                Some(r) => same &= *r == b,
                None => return Err(format!("{name} was not recorded; run the earlier criteria first")),
            }
        }
        ok &= same;
        msgs.push(format!("{name} {}", if same { "identical" } else { "DIFFERS" }));
    }
    check(ok, format!("1, 2, 8 workers: {}", msgs.join(", ")))
}

struct Criterion {
    name: &'static str,
    limit: Option<Duration>,
    run: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion { name: "linking number, smooth path", limit: Some(Duration::from_secs(60)), run: criterion_1 },
        Criterion { name: "split link is zero", limit: Some(Duration::from_secs(10)), run: criterion_2 },
        Criterion { name: "writhe cross-validation", limit: Some(Duration::from_secs(300)), run: criterion_3 },
        Criterion { name: "degree-two invariant", limit: Some(Duration::from_secs(1800)), run: criterion_4 },
        Criterion { name: "anomaly vanishing filters", limit: Some(Duration::from_secs(600)), run: criterion_5 },
        Criterion { name: "alpha1 normalization", limit: Some(Duration::from_secs(600)), run: criterion_6 },
        Criterion { name: "shrink limit", limit: Some(Duration::from_secs(600)), run: criterion_7 },
        Criterion { name: "diagram algebra", limit: Some(Duration::from_secs(120)), run: criterion_8 },
        Criterion { name: "determinism across workers", limit: None, run: criterion_9 },
    ];
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, c) in criteria.iter().enumerate() {
        let k = i + 1;
        if !selected.is_empty() && !selected.contains(&k) {
            continue;
        }
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(c.run).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let slow = c.limit.is_some_and(|l| elapsed > l);
        let (pass, detail) = match outcome {
            Ok(m) if !slow => (true, m),
            Ok(m) => (false, format!("{m}; over the time limit")),
            Err(m) => (false, m),
        };
        failed += usize::from(!pass);
        println!(
            "criterion {k} [{}] {}: {detail} ({:.1}s)",
            if pass { "PASS" } else { "FAIL" },
            c.name,
            elapsed.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
