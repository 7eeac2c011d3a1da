//! Small dense determinants for Jacobians of sphere-valued maps.


/// Determinant of an `n x n` row-major matrix by partial-pivot LU. Destroys `m`.
pub fn det_in_place(m: &mut [f64], n: usize) -> f64 {
    det_and_pivot_spread(m, n).0
}

/// Determinant and the ratio of the largest to the smallest pivot of the
/// equilibrated matrix, a cheap proxy for its condition number. Destroys `m`.
pub fn det_and_pivot_spread(m: &mut [f64], n: usize) -> (f64, f64) {
    debug_assert_eq!(m.len(), n * n);
    // power-of-two row and column equilibration keeps the scaling exact
    let mut log_scale = 0i32;
    for row in m.chunks_exact_mut(n) {
        let big = row.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if big == 0.0 {
            return (0.0, f64::INFINITY);
        }
        let e = exponent(big);
        log_scale += e;
        let f = pow2(-e);
        row.iter_mut().for_each(|x| *x *= f);
    }
    for col in 0..n {
        let big = (0..n).fold(0.0f64, |a, row| a.max(m[row * n + col].abs()));
        if big == 0.0 {
            return (0.0, f64::INFINITY);
        }
        let e = exponent(big);
        log_scale += e;
        let f = pow2(-e);
        for row in 0..n {
            m[row * n + col] *= f;
        }
    }
    let mut det = 1.0;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for col in 0..n {
        let mut pivot = col;
        let mut best = m[col * n + col].abs();
        for row in col + 1..n {
            let v = m[row * n + col].abs();
            if v > best {
                best = v;
                pivot = row;
            }
        }
        if best == 0.0 {
            return (0.0, f64::INFINITY);
        }
        if pivot != col {
            for k in 0..n {
                m.swap(col * n + k, pivot * n + k);
            }
            det = -det;
        }
        let (top, below) = m.split_at_mut((col + 1) * n);
        let prow = &top[col * n..];
        let p = prow[col];
        det *= p;
        lo = lo.min(p.abs());
        hi = hi.max(p.abs());
        let prow = &prow[col + 1..];
        for row in below.chunks_exact_mut(n) {
            let f = row[col] / p;
            if f != 0.0 {
                for (x, &y) in row[col + 1..].iter_mut().zip(prow) {
                    *x -= f * y;
                }
            }
        }
    }
    (scale2(det, log_scale), hi / lo)
}

fn exponent(x: f64) -> i32 {
    x.log2().floor() as i32
}

fn pow2(e: i32) -> f64 {
    2f64.powi(e)
}

fn scale2(x: f64, e: i32) -> f64 {
    x * 2f64.powi(e)
}

/// Unevaluated sum `hi + lo` of two doubles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

impl Dd {
    pub fn from(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    fn quick(hi: f64, lo: f64) -> Dd {
        let s = hi + lo;
        Dd { hi: s, lo: lo - (s - hi) }
    }

    pub fn add(self, o: Dd) -> Dd {
        let s = self.hi + o.hi;
        let bb = s - self.hi;
        let err = (self.hi - (s - bb)) + (o.hi - bb);
        Dd::quick(s, err + self.lo + o.lo)
    }

    pub fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    pub fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let err = self.hi.mul_add(o.hi, -p);
        Dd::quick(p, err + self.hi * o.lo + self.lo * o.hi)
    }

    pub fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.add(o.mul(Dd::from(q1)).neg());
        let q2 = r.hi / o.hi;
        let r = r.add(o.mul(Dd::from(q2)).neg());
        let q3 = r.hi / o.hi;
        Dd::quick(q1, q2).add(Dd::from(q3))
    }

    pub fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }

    pub fn sqrt(self) -> Dd {
        if self.hi <= 0.0 {
            return Dd::from(0.0);
        }
        let s = self.hi.sqrt();
        let r = self.sub(Dd::from(s).mul(Dd::from(s)));
        Dd::quick(s, r.hi / (2.0 * s))
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// Determinant by partial-pivot LU carried out in double-double arithmetic,
/// rounded to `f64`. Agrees with the exact determinant of `m` far beyond the
/// conditioning limit of [`det`].
pub fn det_precise(m: &[f64], n: usize) -> f64 {
    det_dd(m.iter().map(|&x| Dd::from(x)).collect(), n)
}

/// [`det_precise`] for a matrix given in double-double.
pub fn det_dd(mut a: Vec<Dd>, n: usize) -> f64 {
    debug_assert_eq!(a.len(), n * n);
    let mut det = Dd::from(1.0);
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i * n + col].hi.abs().total_cmp(&a[j * n + col].hi.abs())).unwrap();
        if a[pivot * n + col].hi == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            det = det.neg();
        }
        let p = a[col * n + col];
        det = det.mul(p);
        for row in col + 1..n {
            let f = a[row * n + col].div(p);
            if f.hi != 0.0 {
                for k in col + 1..n {
                    a[row * n + k] = a[row * n + k].add(f.mul(a[col * n + k]).neg());
                }
            }
        }
    }
    det.hi + det.lo
}

pub fn det(m: &[f64], n: usize) -> f64 {
    let mut copy = m.to_vec();
    det_in_place(&mut copy, n)
}

/// Solves the square system `m x = rhs` (row-major) by Gaussian elimination.
pub fn solve(m: &[f64], rhs: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut a = m.to_vec();
    let mut b = rhs.to_vec();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))?;
        if a[pivot * n + col].abs() < 1e-300 {
            return None;
        }
        for k in 0..n {
            a.swap(col * n + k, pivot * n + k);
        }
        b.swap(col, pivot);
        for row in 0..n {
            if row != col {
                let f = a[row * n + col] / a[col * n + col];
                for k in col..n {
                    a[row * n + k] -= f * a[col * n + k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i * n + i]).collect())
}
