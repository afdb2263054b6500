//! Gauss-Legendre quadrature: fixed-order rules plus an adaptive
//! panel-doubling integrator. Used by the system-spectrum average and by the
//! quadrature oracles in tests.

use crate::error::{Error, Result};

/// Compensated (Kahan) accumulator; keeps polynomial sums accurate when terms
/// cancel.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    c: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Nodes and weights on [-1, 1].
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on the Legendre recurrence; standard cosine initial
    /// guesses converge in a handful of steps for any order.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "quadrature order must be at least 1");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_pair(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-15 {
                    let (_, d2) = legendre_pair(n, x);
                    dp = d2;
                    break;
                }
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        // Newton's guesses enumerate roots descending; flip to ascending.
        nodes.reverse();
        weights.reverse();
        GaussLegendre { nodes, weights }
    }

    /// Integral of f over [a, b] with this rule mapped onto the interval.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = KahanSum::new();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc.add(w * f(mid + half * x));
        }
        acc.value() * half
    }

    /// Integral over [a, b] split into `panels` equal panels.
    pub fn integrate_panels<F: FnMut(f64) -> f64>(
        &self,
        a: f64,
        b: f64,
        panels: usize,
        mut f: F,
    ) -> f64 {
        let width = (b - a) / panels as f64;
        let mut acc = KahanSum::new();
        for p in 0..panels {
            let lo = a + p as f64 * width;
            acc.add(self.integrate(lo, lo + width, &mut f));
        }
        acc.value()
    }

    /// Flattened nodes and weights of the composite rule on [a, b] split into
    /// equal panels; weights include the interval Jacobian, so
    /// sum_i w_i f(x_i) approximates the integral directly.
    pub fn panel_nodes(&self, a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
        let width = (b - a) / panels as f64;
        let half = 0.5 * width;
        let n = self.nodes.len();
        let mut xs = Vec::with_capacity(panels * n);
        let mut ws = Vec::with_capacity(panels * n);
        for p in 0..panels {
            let mid = a + (p as f64 + 0.5) * width;
            for i in 0..n {
                xs.push(mid + half * self.nodes[i]);
                ws.push(half * self.weights[i]);
            }
        }
        (xs, ws)
    }
}

/// (P_n(x), P_n'(x)) via the three-term recurrence.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Panel-doubling adaptive integration of f over [a, b].
///
/// Convergence: successive estimates differ by at most
/// max(rel_tol * |estimate|, abs_tol). On stall the error carries the best
/// estimate and the tolerance.
pub fn adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    order: usize,
    init_panels: usize,
    rel_tol: f64,
    abs_tol: f64,
    max_doublings: u32,
) -> Result<f64> {
    let rule = GaussLegendre::new(order);
    let mut panels = init_panels.max(1);
    let mut prev = rule.integrate_panels(a, b, panels, &mut f);
    let mut achieved = f64::INFINITY;
    for _ in 0..max_doublings {
        panels *= 2;
        let cur = rule.integrate_panels(a, b, panels, &mut f);
        achieved = (cur - prev).abs();
        if achieved <= rel_tol * cur.abs() || achieved <= abs_tol {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::QuadratureNoConvergence {
        estimate: prev,
        achieved,
        tolerance: rel_tol,
    })
}
