//! Brute-force reference implementations, independent of the library code.
#![allow(dead_code)]

use std::f64::consts::FRAC_PI_2;

/// Composite Simpson rule with `n` (even) intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

const STEPS: usize = 20_000;

/// Two-sided Student-t p-value. With `x = sqrt(df) tan(theta)` the density
/// kernel becomes `cos(theta)^(df - 1)` on `[0, pi/2)`, so no gamma function
/// is needed for the normalisation.
pub fn t_two_sided(t: f64, df: f64) -> f64 {
    let kernel = |th: f64| th.cos().powf(df - 1.0);
    let theta0 = (t.abs() / df.sqrt()).atan();
    simpson(kernel, theta0, FRAC_PI_2, STEPS) / simpson(kernel, 0.0, FRAC_PI_2, STEPS)
}

/// Upper tail `P(T > t)`.
pub fn t_upper(t: f64, df: f64) -> f64 {
    let half = 0.5 * t_two_sided(t, df);
    if t >= 0.0 {
        half
    } else {
        1.0 - half
    }
}

/// `P(F > f)` for `F(d1, d2)`. `d1 F / (d1 F + d2)` is Beta(d1/2, d2/2); with
/// `u = sin(phi)^2` the Beta kernel becomes `sin^(d1-1) cos^(d2-1)`.
pub fn f_upper(f: f64, d1: f64, d2: f64) -> f64 {
    let kernel = |p: f64| p.sin().powf(d1 - 1.0) * p.cos().powf(d2 - 1.0);
    let x = d1 * f / (d1 * f + d2);
    let phi0 = x.sqrt().asin();
    simpson(kernel, phi0, FRAC_PI_2, STEPS) / simpson(kernel, 0.0, FRAC_PI_2, STEPS)
}

/// Pearson r from raw sums.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let syy: f64 = y.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
}

/// Solves `a x = b` by Gauss-Jordan elimination with partial pivoting.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let n = a.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, p);
        b.swap(c, p);
        let d = a[c][c];
        for v in a[c].iter_mut() {
            *v /= d;
        }
        for v in b[c].iter_mut() {
            *v /= d;
        }
        for r in 0..n {
            if r != c {
                let m = a[r][c];
                let (ac, bc) = (a[c].clone(), b[c].clone());
                for (v, w) in a[r].iter_mut().zip(&ac) {
                    *v -= m * w;
                }
                for (v, w) in b[r].iter_mut().zip(&bc) {
                    *v -= m * w;
                }
            }
        }
    }
    b
}

pub struct OlsOracle {
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub rss: f64,
}

/// OLS through the normal equations; `x` is given as rows.
pub fn ols(y: &[f64], x: &[Vec<f64>]) -> OlsOracle {
    let k = x[0].len();
    let n = y.len();
    let xtx: Vec<Vec<f64>> =
        (0..k).map(|i| (0..k).map(|j| x.iter().map(|r| r[i] * r[j]).sum()).collect()).collect();
    let xty: Vec<Vec<f64>> = (0..k).map(|i| vec![x.iter().zip(y).map(|(r, v)| r[i] * v).sum()]).collect();
    let beta: Vec<f64> = solve(xtx.clone(), xty).into_iter().map(|r| r[0]).collect();
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(r, v)| {
            let fit: f64 = r.iter().zip(&beta).map(|(a, b)| a * b).sum();
            (v - fit).powi(2)
        })
        .sum();
    let identity: Vec<Vec<f64>> = (0..k).map(|i| (0..k).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    let inv = solve(xtx, identity);
    let s2 = rss / (n - k) as f64;
    let std_errors = (0..k).map(|i| (s2 * inv[i][i]).sqrt()).collect();
    OlsOracle { coefficients: beta, std_errors, rss }
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        ((got - want) / want).abs()
    }
}

/// Small deterministic generator so probe data does not depend on any crate.
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next_f64(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(6_364_136_223_846_793_005).wrapping_add(1_442_695_040_888_963_407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn vec(&mut self, n: usize, scale: f64) -> Vec<f64> {
        (0..n).map(|_| (self.next_f64() - 0.5) * scale).collect()
    }
}

/// Probe grids shared by the oracle tests and the acceptance suite.
pub const T_PROBES: [(f64, f64); 22] = [
    (0.0, 5.0),
    (0.5, 1.0),
    (1.0, 1.0),
    (2.0, 1.0),
    (0.3, 2.0),
    (1.5, 2.0),
    (2.5, 3.0),
    (1.0, 4.0),
    (2.0, 5.0),
    (-1.2, 7.0),
    (3.0, 8.0),
    (0.7, 10.0),
    (2.2, 12.0),
    (1.8, 15.0),
    (-2.5, 20.0),
    (2.0, 30.0),
    (1.0, 45.0),
    (3.0, 60.0),
    (1.96, 89.0),
    (2.6, 100.0),
    (0.1, 25.0),
    (4.0, 6.0),
];

pub const F_PROBES: [(f64, f64, f64); 22] = [
    (0.5, 1.0, 5.0),
    (1.0, 1.0, 10.0),
    (4.0, 1.0, 20.0),
    (2.0, 2.0, 2.0),
    (3.0, 2.0, 10.0),
    (0.8, 2.0, 30.0),
    (1.5, 3.0, 12.0),
    (3.5, 3.0, 40.0),
    (2.0, 4.0, 8.0),
    (1.0, 4.0, 80.0),
    (2.5, 5.0, 15.0),
    (0.3, 5.0, 50.0),
    (1.2, 6.0, 6.0),
    (2.8, 6.0, 70.0),
    (1.9, 8.0, 20.0),
    (3.2, 8.0, 60.0),
    (0.9, 2.0, 84.0),
    (5.0, 4.0, 80.0),
    (1.1, 10.0, 10.0),
    (2.2, 1.0, 3.0),
    (0.05, 3.0, 7.0),
    (6.0, 2.0, 40.0),
];
