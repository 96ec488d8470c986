//! Derivative-free minimizers over a box: golden-section search in one
//! dimension and a projected Nelder–Mead simplex in several.

/// Outcome of a bounded minimization.
#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Counts evaluations against a shared budget; non-finite values compare as `+∞`.
pub(crate) struct Budget<'a, F> {
    f: &'a mut F,
    pub used: usize,
    pub limit: usize,
}

impl<'a, F: FnMut(&[f64]) -> f64> Budget<'a, F> {
    pub fn new(f: &'a mut F, limit: usize) -> Self {
        Self { f, used: 0, limit }
    }

    pub fn exhausted(&self) -> bool {
        self.used >= self.limit
    }

    pub fn eval(&mut self, x: &[f64]) -> f64 {
        self.used += 1;
        let v = (self.f)(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search on `[a, b]` until the bracket is narrower than `tol`.
pub(crate) fn golden_section<F: FnMut(&[f64]) -> f64>(
    budget: &mut Budget<'_, F>,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> Minimum {
    let start = budget.used;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = budget.eval(&[c]);
    let mut fd = budget.eval(&[d]);
    while b - a > tol {
        if budget.exhausted() {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = budget.eval(&[c]);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = budget.eval(&[d]);
        }
    }
    let (x, value) = if fc <= fd { (c, fc) } else { (d, fd) };
    Minimum { x: vec![x], value, evaluations: budget.used - start, converged: b - a <= tol }
}

/// Nelder–Mead with every trial point projected onto `[lower, upper]`.
/// Stops when the simplex diameter drops below `tol`.
pub(crate) fn nelder_mead_projected<F: FnMut(&[f64]) -> f64>(
    budget: &mut Budget<'_, F>,
    start: &[f64],
    lower: &[f64],
    upper: &[f64],
    tol: f64,
) -> Minimum {
    let p = start.len();
    let begin = budget.used;
    let project = |x: &mut Vec<f64>| {
        for i in 0..p {
            x[i] = x[i].max(lower[i]).min(upper[i]);
        }
    };
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(p + 1);
    simplex.push(start.to_vec());
    for i in 0..p {
        let mut v = start.to_vec();
        let step = 0.1 * (upper[i] - lower[i]);
        v[i] = if v[i] + step <= upper[i] { v[i] + step } else { v[i] - step };
        project(&mut v);
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| budget.eval(v)).collect();

    let diameter = |s: &[Vec<f64>]| {
        let mut d = 0.0f64;
        for v in &s[1..] {
            let dist = v.iter().zip(&s[0]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            d = d.max(dist);
        }
        d
    };

    let mut converged = false;
    loop {
        let mut order: Vec<usize> = (0..=p).collect();
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        if diameter(&simplex) < tol {
            converged = true;
            break;
        }
        if budget.exhausted() {
            break;
        }

        let centroid: Vec<f64> =
            (0..p).map(|i| simplex[..p].iter().map(|v| v[i]).sum::<f64>() / p as f64).collect();
        let toward = |coef: f64| {
            let mut x: Vec<f64> = (0..p).map(|i| centroid[i] + coef * (simplex[p][i] - centroid[i])).collect();
            project(&mut x);
            x
        };

        let xr = toward(-1.0);
        let fr = budget.eval(&xr);
        if fr < values[0] {
            let xe = toward(-2.0);
            let fe = budget.eval(&xe);
            if fe < fr {
                simplex[p] = xe;
                values[p] = fe;
            } else {
                simplex[p] = xr;
                values[p] = fr;
            }
            continue;
        }
        if fr < values[p - 1] {
            simplex[p] = xr;
            values[p] = fr;
            continue;
        }
        let (xc, fc) = if fr < values[p] {
            let xc = toward(-0.5);
            let fc = budget.eval(&xc);
            (xc, fc)
        } else {
            let xc = toward(0.5);
            let fc = budget.eval(&xc);
            (xc, fc)
        };
        if fc < values[p].min(fr) {
            simplex[p] = xc;
            values[p] = fc;
            continue;
        }
        // shrink toward the best vertex
        for k in 1..=p {
            let mut x: Vec<f64> = (0..p).map(|i| simplex[0][i] + 0.5 * (simplex[k][i] - simplex[0][i])).collect();
            project(&mut x);
            values[k] = budget.eval(&x);
            simplex[k] = x;
        }
    }
    Minimum { x: simplex[0].clone(), value: values[0], evaluations: budget.used - begin, converged }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_section_finds_parabola_vertex() {
        let mut f = |x: &[f64]| (x[0] - 0.3).powi(2);
        let mut b = Budget::new(&mut f, 10_000);
        let m = golden_section(&mut b, 0.0, 1.0, 1e-8);
        assert!(m.converged);
        assert!((m.x[0] - 0.3).abs() < 1e-7);
    }

    #[test]
    fn nelder_mead_respects_the_box() {
        let mut f = |x: &[f64]| (x[0] - 2.0).powi(2) + 10.0 * (x[1] + 0.5).powi(2);
        let mut b = Budget::new(&mut f, 10_000);
        let m = nelder_mead_projected(&mut b, &[0.5, 0.5], &[0.0, 0.0], &[1.0, 1.0], 1e-9);
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-6 && m.x[1].abs() < 1e-6, "{:?}", m.x);
    }

    #[test]
    fn nelder_mead_rosenbrock_interior() {
        let mut f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let mut b = Budget::new(&mut f, 10_000);
        let m = nelder_mead_projected(&mut b, &[-1.0, 1.5], &[-2.0, -2.0], &[2.0, 2.0], 1e-10);
        assert!((m.x[0] - 1.0).abs() < 1e-4 && (m.x[1] - 1.0).abs() < 1e-4, "{:?}", m.x);
    }

    #[test]
    fn budget_caps_evaluations() {
        let mut f = |x: &[f64]| x[0].sin() + x[1].cos();
        let mut b = Budget::new(&mut f, 25);
        let m = nelder_mead_projected(&mut b, &[0.0, 0.0], &[-10.0, -10.0], &[10.0, 10.0], 1e-14);
        assert!(!m.converged);
        assert!(b.used <= 25 + 3);
    }
}
