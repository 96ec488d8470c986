#![allow(dead_code)]

use std::f64::consts::PI;

/// Tanh-sinh rule on `[a, b]`, refined until successive levels agree to `tol`
/// (relative). Handles integrable algebraic singularities at either end.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let r = 0.5 * (b - a);
    let eval = |t: f64| -> f64 {
        let u = 0.5 * PI * t.sinh();
        let cu = u.cosh();
        let w = 0.5 * PI * t.cosh() / (cu * cu);
        let s = u.tanh();
        // distance to the nearer end, kept accurate near ±1
        let gap = 1.0 / (u.abs().exp() * cu);
        let x = if s >= 0.0 { b - r * gap } else { a + r * gap };
        if x <= a || x >= b || w == 0.0 {
            return 0.0;
        }
        w * f(x)
    };
    let tmax = 6.0;
    let mut h = 0.5;
    let mut sum = eval(0.0);
    let mut k = 1;
    while (k as f64) * h <= tmax {
        sum += eval(k as f64 * h) + eval(-(k as f64) * h);
        k += 1;
    }
    let mut prev = sum * h * r;
    for _ in 0..12 {
        h *= 0.5;
        let mut k = 1;
        while (k as f64) * h <= tmax {
            sum += eval(k as f64 * h) + eval(-(k as f64) * h);
            k += 2;
        }
        let cur = sum * h * r;
        if (cur - prev).abs() <= tol * cur.abs().max(1e-300) {
            return cur;
        }
        prev = cur;
    }
    prev
}

/// `∫_0^π f` split into `panels` equal pieces, each by tanh-sinh.
pub fn integrate_0_pi<F: Fn(f64) -> f64>(f: F, panels: usize, tol: f64) -> f64 {
    (0..panels)
        .map(|j| tanh_sinh(&f, PI * j as f64 / panels as f64, PI * (j + 1) as f64 / panels as f64, tol))
        .sum()
}

pub fn arfima_density(d: f64, sigma2: f64, x: f64) -> f64 {
    sigma2 / (2.0 * PI) * (2.0 * (x / 2.0).sin()).abs().powf(-2.0 * d)
}

/// fGn spectral density by direct summation of the aliased series, `|k| ≤ terms`,
/// with a midpoint-integral tail.
pub fn fgn_density_bruteforce(hurst: f64, sigma2: f64, x: f64, terms: usize) -> f64 {
    let e = 2.0 * hurst + 1.0;
    let mut s = 0.0;
    for k in 1..=terms {
        let k = k as f64;
        s += (x + 2.0 * PI * k).abs().powf(-e) + (x - 2.0 * PI * k).abs().powf(-e);
    }
    // ∫_{K+½}^∞ |x ± 2πt|^{-e} dt for both signs
    let kk = terms as f64 + 0.5;
    let tail = |y: f64| y.powf(1.0 - e) / ((e - 1.0) * 2.0 * PI);
    s += tail(2.0 * PI * kk + x) + tail(2.0 * PI * kk - x);
    let c = statrs::function::gamma::gamma(2.0 * hurst + 1.0) * (PI * hurst).sin() / (2.0 * PI);
    // k = 0 term written as (2 sin(x/2)/x)² x^{2−e} so it stays finite as x → 0
    let near = (2.0 * (x / 2.0).sin() / x).powi(2) * x.abs().powf(2.0 - e);
    sigma2 * c * (near + 4.0 * (x / 2.0).sin().powi(2) * s)
}

/// Tanh-sinh on `[a, b]` for `f(x) cos(kx)`, `k = 0..=max_lag`, sampling `f`
/// once per node. Refined until every lag agrees to `tol` (relative).
pub fn tanh_sinh_cosines<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, max_lag: usize, tol: f64) -> Vec<f64> {
    let r = 0.5 * (b - a);
    let mut sum = vec![0.0; max_lag + 1];
    let add = |t: f64, sum: &mut Vec<f64>| {
        let u = 0.5 * PI * t.sinh();
        let cu = u.cosh();
        let w = 0.5 * PI * t.cosh() / (cu * cu);
        let s = u.tanh();
        let gap = 1.0 / (u.abs().exp() * cu);
        let x = if s >= 0.0 { b - r * gap } else { a + r * gap };
        if x <= a || x >= b || w == 0.0 {
            return;
        }
        let wf = w * f(x);
        for (k, v) in sum.iter_mut().enumerate() {
            *v += wf * (k as f64 * x).cos();
        }
    };
    let tmax = 6.0;
    let mut h = 0.5;
    add(0.0, &mut sum);
    let mut k = 1;
    while (k as f64) * h <= tmax {
        add(k as f64 * h, &mut sum);
        add(-(k as f64) * h, &mut sum);
        k += 1;
    }
    let mut prev: Vec<f64> = sum.iter().map(|v| v * h * r).collect();
    for _ in 0..12 {
        h *= 0.5;
        let mut k = 1;
        while (k as f64) * h <= tmax {
            add(k as f64 * h, &mut sum);
            add(-(k as f64) * h, &mut sum);
            k += 2;
        }
        let cur: Vec<f64> = sum.iter().map(|v| v * h * r).collect();
        let done = cur.iter().zip(&prev).all(|(c, p)| (c - p).abs() <= tol * c.abs().max(1e-300));
        prev = cur;
        if done {
            break;
        }
    }
    prev
}

/// Autocovariances `γ(k) = 2 ∫_0^π f(x) cos(kx) dx`, `k = 0..=max_lag`, from the
/// density sampled on one shared tanh-sinh node set per panel.
pub fn autocov_by_quadrature<F: Fn(f64) -> f64>(f: F, max_lag: usize, panels: usize) -> Vec<f64> {
    let mut out = vec![0.0; max_lag + 1];
    for j in 0..panels {
        let a = PI * j as f64 / panels as f64;
        let b = PI * (j + 1) as f64 / panels as f64;
        for (o, v) in out.iter_mut().zip(tanh_sinh_cosines(&f, a, b, max_lag, 1e-13)) {
            *o += 2.0 * v;
        }
    }
    out
}

/// fGn autocovariance from the increment formula of fractional Brownian motion.
pub fn fgn_increment_autocov(hurst: f64, sigma2: f64, k: usize) -> f64 {
    let k = k as f64;
    let p = 2.0 * hurst;
    0.5 * sigma2 * ((k + 1.0).powf(p) - 2.0 * k.powf(p) + (k - 1.0).abs().powf(p))
}

/// Solve `A x = b` by Gaussian elimination with partial pivoting; returns
/// `(x, ln |det A|)`.
pub fn gauss_solve(a: &[f64], b: &[f64], n: usize) -> (Vec<f64>, f64) {
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    let mut logdet = 0.0;
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i * n + col].abs().total_cmp(&m[j * n + col].abs())).unwrap();
        if piv != col {
            for j in 0..n {
                m.swap(col * n + j, piv * n + j);
            }
            x.swap(col, piv);
        }
        let p = m[col * n + col];
        logdet += p.abs().ln();
        for i in (col + 1)..n {
            let f = m[i * n + col] / p;
            if f != 0.0 {
                for j in col..n {
                    m[i * n + j] -= f * m[col * n + j];
                }
                x[i] -= f * x[col];
            }
        }
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for j in (i + 1)..n {
            s -= m[i * n + j] * x[j];
        }
        x[i] = s / m[i * n + i];
    }
    (x, logdet)
}

pub fn toeplitz_dense(row: &[f64], n: usize) -> Vec<f64> {
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = row[i.abs_diff(j)];
        }
    }
    a
}

/// Relative error; NaN or infinite inputs count as infinitely wrong.
pub fn rel_err(a: f64, b: f64) -> f64 {
    let e = (a - b).abs() / b.abs().max(f64::MIN_POSITIVE);
    if e.is_finite() {
        e
    } else {
        f64::INFINITY
    }
}

/// `max` that propagates NaN, for folding error measures.
pub fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}
