//! Deterministic parallel sampling: counter-based random streams, Kronecker
//! quasi-random points and median-of-means block estimates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Samples handled by one work item; each chunk owns one random stream.
pub const CHUNK: u64 = 2048;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    MonteCarlo,
    QuasiMc,
    Quadrature,
}

impl std::str::FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "monte_carlo" | "mc" => Ok(Method::MonteCarlo),
            "quasi_mc" | "qmc" => Ok(Method::QuasiMc),
            "quadrature" => Ok(Method::Quadrature),
            _ => Err(format!("unknown method {s:?}")),
        }
    }
}

/// Random stream for chunk `chunk` under `seed`.
pub fn stream(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Block estimate: median of block means with a spread-based standard error.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockEstimate {
    pub value: f64,
    pub std_error: f64,
    pub block_means: Vec<f64>,
}

pub fn median_of_means(sums: &[f64], counts: &[u64]) -> BlockEstimate {
    let means: Vec<f64> = sums.iter().zip(counts).map(|(s, &c)| if c > 0 { s / c as f64 } else { 0.0 }).collect();
    let b = means.len();
    let mut sorted = means.clone();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let value = if b % 2 == 1 { sorted[b / 2] } else { 0.5 * (sorted[b / 2 - 1] + sorted[b / 2]) };
    let std_error = if b > 1 {
        let mean = means.iter().sum::<f64>() / b as f64;
        let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (b - 1) as f64;
        // the sample median of normal block means is sqrt(pi/2) times noisier than their mean
        1.2533 * var.sqrt() / (b as f64).sqrt()
    } else {
        0.0
    };
    BlockEstimate { value, std_error, block_means: means }
}

fn kronecker_alpha(dim: usize) -> Vec<f64> {
    // root of x^(d+1) = x + 1
    let mut phi = 2.0f64;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / (dim as f64 + 1.0));
    }
    (1..=dim).map(|j| phi.powi(-(j as i32)).fract()).collect()
}

/// Integrates `f` over the unit cube `[0,1)^dim` with `samples` points split
/// into `blocks` blocks. Sample `i` belongs to block `i % blocks`. The result is
/// independent of the number of rayon workers.
pub fn integrate_cube<F>(dim: usize, samples: u64, blocks: usize, seed: u64, method: Method, f: F) -> BlockEstimate
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let blocks = blocks.max(1);
    let n_chunks = samples.div_ceil(CHUNK);
    let alpha = kronecker_alpha(dim);
    let shifts: Vec<Vec<f64>> = {
        let mut rng = stream(seed, u64::MAX);
        (0..blocks).map(|_| (0..dim).map(|_| rng.random::<f64>()).collect()).collect()
    };
    let partial: Vec<(Vec<f64>, Vec<u64>)> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut sums = vec![0.0; blocks];
            let mut counts = vec![0u64; blocks];
            let mut rng = stream(seed, c);
            let mut u = vec![0.0; dim];
            let start = c * CHUNK;
            let end = (start + CHUNK).min(samples);
            for i in start..end {
                let b = (i % blocks as u64) as usize;
                match method {
                    Method::QuasiMc => {
                        let k = (i / blocks as u64) as f64;
                        for j in 0..dim {
                            u[j] = (shifts[b][j] + k * alpha[j]).fract();
                        }
                    }
                    _ => {
                        for x in u.iter_mut() {
                            *x = rng.random::<f64>();
                        }
                    }
                }
                let y = f(&u);
                if y.is_finite() {
                    sums[b] += y;
                }
                counts[b] += 1;
            }
            (sums, counts)
        })
        .collect();
    let mut sums = vec![0.0; blocks];
    let mut counts = vec![0u64; blocks];
    for (s, c) in partial {
        for b in 0..blocks {
            sums[b] += s[b];
            counts[b] += c[b];
        }
    }
    median_of_means(&sums, &counts)
}

/// Runs `op` on a dedicated pool of `threads` workers.
pub fn with_threads<R: Send>(threads: usize, op: impl FnOnce() -> R + Send) -> R {
    rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build().expect("thread pool").install(op)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomial() {
        for method in [Method::MonteCarlo, Method::QuasiMc] {
            let e = integrate_cube(3, 200_000, 15, 7, method, |u| u[0] * u[1] + u[2] * u[2]);
            let exact = 0.25 + 1.0 / 3.0;
            assert!((e.value - exact).abs() < 4.0 * e.std_error + 1e-6, "{method:?} {e:?}");
        }
    }

    #[test]
    fn quasi_mc_beats_mc_on_smooth_integrand() {
        let f = |u: &[f64]| (6.0 * u[0]).sin() * u[1];
        let mc = integrate_cube(2, 100_000, 15, 3, Method::MonteCarlo, f);
        let qmc = integrate_cube(2, 100_000, 15, 3, Method::QuasiMc, f);
        assert!(qmc.std_error < mc.std_error);
    }

    #[test]
    fn worker_count_does_not_change_bits() {
        let f = |u: &[f64]| 1.0 / (u[0] + 1e-3).sqrt() - u[1];
        let runs: Vec<BlockEstimate> = [1, 2, 8]
            .iter()
            .map(|&t| with_threads(t, || integrate_cube(2, 50_001, 15, 11, Method::MonteCarlo, f)))
            .collect();
        for r in &runs[1..] {
            assert_eq!(r.value.to_bits(), runs[0].value.to_bits());
            assert_eq!(r.std_error.to_bits(), runs[0].std_error.to_bits());
        }
    }

    #[test]
    fn median_of_odd_blocks() {
        let e = median_of_means(&[1.0, 5.0, 3.0], &[1, 1, 1]);
        assert_eq!(e.value, 3.0);
        assert!(e.std_error > 0.0);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(16))]
        #[test]
        fn estimates_do_not_depend_on_workers(seed in 0u64..1000, samples in 1u64..20_000, blocks in 1usize..20, qmc in proptest::bool::ANY) {
            let method = if qmc { Method::QuasiMc } else { Method::MonteCarlo };
            let f = |u: &[f64]| (u[0] * 7.0).sin() + u[1].sqrt() / (1e-3 + u[0]);
            let one = with_threads(1, || integrate_cube(2, samples, blocks, seed, method, f));
            let three = with_threads(3, || integrate_cube(2, samples, blocks, seed, method, f));
            proptest::prop_assert_eq!(one.value.to_bits(), three.value.to_bits());
            proptest::prop_assert_eq!(one.std_error.to_bits(), three.std_error.to_bits());
        }
    }
}
