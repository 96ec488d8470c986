//! Gauss–Legendre rules and the composite integrators built from them.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::scalar::Scalar;

/// Nodes and weights of the `order`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Shared rule of the given order, computed once per process.
    pub fn of_order(order: usize) -> Arc<GaussLegendre> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("quadrature cache poisoned");
        guard
            .entry(order)
            .or_insert_with(|| Arc::new(GaussLegendre::compute(order)))
            .clone()
    }

    fn compute(order: usize) -> GaussLegendre {
        assert!(order >= 1, "Gauss-Legendre order must be positive");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess, refined by Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate<T: Scalar, F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> T {
        let half = (b - a) * T::lit(0.5);
        let mid = (b + a) * T::lit(0.5);
        let mut acc = T::zero();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + T::lit(w) * f(mid + half * T::lit(x));
        }
        acc * half
    }

    /// Mapped nodes and weights for `[a, b]`.
    pub fn mapped<T: Scalar>(&self, a: T, b: T) -> impl Iterator<Item = (T, T)> + '_ {
        let half = (b - a) * T::lit(0.5);
        let mid = (b + a) * T::lit(0.5);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * T::lit(x), half * T::lit(w)))
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Breakpoints of a mesh on `(0, b]` refined geometrically toward 0:
/// `b/2^levels, ..., b/4, b/2, b`. Suited to integrable log or power singularities
/// at the origin; the piece `(0, b/2^levels)` is left to the caller.
pub fn graded_breakpoints<T: Scalar>(b: T, levels: usize) -> Vec<T> {
    let mut pts = Vec::with_capacity(levels + 1);
    let mut x = b;
    pts.push(x);
    for _ in 0..levels {
        x = x * T::lit(0.5);
        pts.push(x);
    }
    pts.reverse();
    pts
}

/// Composite Gauss–Legendre over consecutive breakpoints.
pub fn composite<T: Scalar, F: FnMut(T) -> T>(breaks: &[T], order: usize, mut f: F) -> T {
    let rule = GaussLegendre::of_order(order);
    breaks
        .windows(2)
        .map(|w| rule.integrate(w[0], w[1], &mut f))
        .fold(T::zero(), |a, b| a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        for order in [1, 2, 7, 64, 512] {
            let rule = GaussLegendre::of_order(order);
            let s: f64 = rule.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "order {order}: {s}");
        }
    }

    #[test]
    fn exact_for_polynomials_of_degree_2n_minus_1() {
        let rule = GaussLegendre::of_order(5);
        // x^9 is odd, x^8 integrates to 2/9 on [-1, 1].
        let v: f64 = rule.integrate(-1.0, 1.0, |x: f64| x.powi(8) + x.powi(9));
        assert!((v - 2.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn graded_mesh_handles_log_squared() {
        // closed form: int_0^1 ln^2 x dx = 2
        let breaks = graded_breakpoints(1.0f64, 60);
        let v = composite(&breaks, 32, |x: f64| x.ln().powi(2));
        assert!((v - 2.0).abs() < 1e-12, "{v}");
    }
}
