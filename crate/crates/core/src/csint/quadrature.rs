use super::{chord, integrate, CsintError, IntegralEstimate, SamplerConfig};
use crate::geom::{Curve, LinkEmbedding};
use crate::sampling::Method;
use crate::vec3::{self, V3};
use rayon::prelude::*;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

/// Gauss kernel of the chord from `x` to `y` with tangents `dx`, `dy`.
pub(crate) fn chord_kernel(x: V3, dx: V3, y: V3, dy: V3) -> f64 {
    let d = vec3::sub(x, y);
    let r = vec3::norm(d);
    if r < 1e-300 {
        return 0.0;
    }
    vec3::det3(dx, dy, d) / (4.0 * PI * r * r * r)
}

/// Gauss linking integral of components `i` and `j`. With the quadrature method
/// the sample budget is spent on an `N x N` periodic trapezoid grid, Richardson
/// extrapolated against the `N/2` grid; the error is their difference.
pub fn gauss_linking(link: &LinkEmbedding, i: usize, j: usize, cfg: &SamplerConfig) -> Result<IntegralEstimate, CsintError> {
    if i >= link.len() || j >= link.len() || i == j {
        return Err(CsintError::UnsupportedDiagram(format!("components ({i}, {j}) do not form a pair of this link")));
    }
    if cfg.method != Method::Quadrature {
        return integrate(link, &chord(link.len(), i, j), cfg);
    }
    let n = (((cfg.samples as f64).sqrt() as usize) / 2 * 2).max(4);
    let h = 2.0 * PI / n as f64;
    let (a, b) = (&link.components[i], &link.components[j]);
    let xs: Vec<(V3, V3)> = (0..n).map(|k| a.jet(k as f64 * h)).collect();
    let ys: Vec<(V3, V3)> = (0..n).map(|k| b.jet(k as f64 * h)).collect();
    let rows: Vec<(f64, f64)> = (0..n)
        .into_par_iter()
        .map(|r| {
            let (x, dx) = xs[r];
            let (mut full, mut half) = (0.0, 0.0);
            for (c, &(y, dy)) in ys.iter().enumerate() {
                let k = chord_kernel(x, dx, y, dy);
                full += k;
                if r % 2 == 0 && c % 2 == 0 {
                    half += k;
                }
            }
            (full, half)
        })
        .collect();
    let full: f64 = rows.iter().map(|r| r.0).sum::<f64>() * h * h;
    let half: f64 = rows.iter().map(|r| r.1).sum::<f64>() * 4.0 * h * h;
    Ok(IntegralEstimate {
        value: (4.0 * full - half) / 3.0,
        std_error: (full - half).abs(),
        samples: (n * n) as u64,
        seed: cfg.seed,
        method: Method::Quadrature,
    })
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

// 15 nodes on [-1, 1] with Kronrod and embedded Gauss weights
fn rule() -> ([f64; 15], [f64; 15], [f64; 15]) {
    let mut x = [0.0; 15];
    let mut wk = [0.0; 15];
    let mut wg = [0.0; 15];
    for k in 0..7 {
        x[k] = -XGK[k];
        x[14 - k] = XGK[k];
        wk[k] = WGK[k];
        wk[14 - k] = WGK[k];
        if k % 2 == 1 {
            wg[k] = WG[k / 2];
            wg[14 - k] = WG[k / 2];
        }
    }
    wk[7] = WGK[7];
    wg[7] = WG[3];
    (x, wk, wg)
}

#[derive(Clone, Copy, Debug)]
struct Cell {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    value: f64,
    error: f64,
    split_x: bool,
}

impl PartialEq for Cell {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Cell {
    fn cmp(&self, o: &Self) -> Ordering {
        self.error
            .total_cmp(&o.error)
            .then(o.x0.total_cmp(&self.x0))
            .then(o.y0.total_cmp(&self.y0))
    }
}

fn cell(f: &(impl Fn(f64, f64) -> f64 + Sync), x0: f64, x1: f64, y0: f64, y1: f64) -> Cell {
    let (x, wk, wg) = rule();
    let (cx, hx) = (0.5 * (x0 + x1), 0.5 * (x1 - x0));
    let (cy, hy) = (0.5 * (y0 + y1), 0.5 * (y1 - y0));
    let (mut kk, mut gg, mut gk, mut kg) = (0.0, 0.0, 0.0, 0.0);
    for a in 0..15 {
        let xa = cx + hx * x[a];
        for b in 0..15 {
            let v = f(xa, cy + hy * x[b]);
            kk += wk[a] * wk[b] * v;
            gg += wg[a] * wg[b] * v;
            gk += wg[a] * wk[b] * v;
            kg += wk[a] * wg[b] * v;
        }
    }
    let area = hx * hy;
    Cell {
        x0,
        x1,
        y0,
        y1,
        value: kk * area,
        error: ((kk - gg) * area).abs(),
        split_x: (kk - gk).abs() >= (kk - kg).abs(),
    }
}

/// Globally adaptive tensor Gauss-Kronrod cubature of `f` over a rectangle.
/// Returns `(value, error estimate, evaluations)`.
pub(crate) fn adaptive_cubature(
    f: impl Fn(f64, f64) -> f64 + Sync,
    (x0, x1): (f64, f64),
    (y0, y1): (f64, f64),
    initial: usize,
    tol: f64,
    max_evals: u64,
) -> (f64, f64, u64) {
    const BATCH: usize = 64;
    let per_cell = 225u64;
    let (dx, dy) = ((x1 - x0) / initial as f64, (y1 - y0) / initial as f64);
    let seeds: Vec<(usize, usize)> = (0..initial).flat_map(|a| (0..initial).map(move |b| (a, b))).collect();
    let cells: Vec<Cell> = seeds
        .par_iter()
        .map(|&(a, b)| cell(&f, x0 + a as f64 * dx, x0 + (a + 1) as f64 * dx, y0 + b as f64 * dy, y0 + (b + 1) as f64 * dy))
        .collect();
    let mut evals = per_cell * cells.len() as u64;
    let mut heap: BinaryHeap<Cell> = cells.into_iter().collect();
    loop {
        let total: f64 = heap.iter().map(|c| c.error).sum();
        if total <= tol || evals + 2 * per_cell > max_evals {
            break;
        }
        let mut batch = Vec::with_capacity(BATCH);
        while batch.len() < BATCH && evals + per_cell * 2 * (batch.len() as u64 + 1) <= max_evals {
            match heap.pop() {
                Some(c) => batch.push(c),
                None => break,
            }
        }
        if batch.is_empty() {
            break;
        }
        let children: Vec<[Cell; 2]> = batch
            .par_iter()
            .map(|c| {
                if c.split_x {
                    let m = 0.5 * (c.x0 + c.x1);
                    [cell(&f, c.x0, m, c.y0, c.y1), cell(&f, m, c.x1, c.y0, c.y1)]
                } else {
                    let m = 0.5 * (c.y0 + c.y1);
                    [cell(&f, c.x0, c.x1, c.y0, m), cell(&f, c.x0, c.x1, m, c.y1)]
                }
            })
            .collect();
        evals += per_cell * 2 * children.len() as u64;
        for pair in children {
            heap.extend(pair);
        }
    }
    let mut leaves = heap.into_vec();
    leaves.sort_by(|a, b| a.x0.total_cmp(&b.x0).then(a.y0.total_cmp(&b.y0)));
    let value = leaves.iter().map(|c| c.value).sum();
    let error = leaves.iter().map(|c| c.error).sum();
    (value, error, evals)
}

/// Self-linking Gauss integral of a closed curve over pairs of distinct parameters.
/// With the quadrature method the sample budget caps the integrand evaluations
/// of an adaptive cubature in `(s, t - s)`.
pub fn writhe_integral(k: &Curve, cfg: &SamplerConfig) -> Result<IntegralEstimate, CsintError> {
    if cfg.method != Method::Quadrature {
        let link = LinkEmbedding::knot(k.clone());
        return integrate(&link, &chord(1, 0, 0), cfg);
    }
    let f = |s: f64, eta: f64| {
        let (x, dx) = k.jet(s);
        let (y, dy) = k.jet(s + eta);
        chord_kernel(x, dx, y, dy)
    };
    let (value, error, evals) = adaptive_cubature(f, (0.0, 2.0 * PI), (0.0, 2.0 * PI), 16, 1e-9, cfg.samples.max(225 * 256));
    Ok(IntegralEstimate { value, std_error: error, samples: evals, seed: cfg.seed, method: Method::Quadrature })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubature_of_polynomial_is_exact() {
        let (v, e, _) = adaptive_cubature(|x, y| x * x * y + 1.0, (0.0, 2.0), (-1.0, 1.0), 1, 1e-12, 10_000);
        assert!((v - 4.0).abs() < 1e-13, "{v}");
        assert!(e < 1e-12);
    }

    #[test]
    fn cubature_refines_a_peak() {
        let w = 1e-3;
        let f = |x: f64, y: f64| w / (PI * ((x - 0.3).powi(2) + w * w)) * y.cos();
        let exact = ((0.7f64 / w).atan() + (0.3f64 / w).atan()) / PI * 1f64.sin();
        let (v, _, _) = adaptive_cubature(f, (0.0, 1.0), (0.0, 1.0), 4, 1e-10, 5_000_000);
        assert!((v - exact).abs() < 1e-8, "{v} {exact}");
    }
}
