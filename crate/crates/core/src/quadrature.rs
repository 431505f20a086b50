//! One-dimensional quadrature rules: Gauss–Legendre nodes, barycentric
//! interpolation on them, product integration against `log|t - s|`, and the
//! periodic logarithmic weights for trapezoidal Nyström discretizations.

use std::f64::consts::PI;

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Legendre `P_n(x)` and its derivative.
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
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n {
            // Tricomi initial guess, then Newton
            let mut x = -((PI * (i as f64 + 0.75)) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre_with_derivative(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(n, x);
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped affinely onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let h = 0.5 * (b - a);
        let m = 0.5 * (a + b);
        self.nodes.iter().zip(&self.weights).map(move |(&x, &w)| (m + h * x, h * w))
    }
}

/// Barycentric Lagrange interpolation on a fixed node set.
#[derive(Debug, Clone)]
pub struct Barycentric {
    nodes: Vec<f64>,
    bary: Vec<f64>,
}

impl Barycentric {
    pub fn new(nodes: &[f64]) -> Self {
        let n = nodes.len();
        let mut bary = vec![1.0; n];
        for j in 0..n {
            for k in 0..n {
                if k != j {
                    bary[j] /= nodes[j] - nodes[k];
                }
            }
        }
        Self { nodes: nodes.to_vec(), bary }
    }

    /// Values of all Lagrange basis polynomials at `x`, written into `out`.
    pub fn basis(&self, x: f64, out: &mut [f64]) {
        let n = self.nodes.len();
        for j in 0..n {
            if x == self.nodes[j] {
                out.iter_mut().for_each(|v| *v = 0.0);
                out[j] = 1.0;
                return;
            }
        }
        let mut denom = 0.0;
        for j in 0..n {
            let t = self.bary[j] / (x - self.nodes[j]);
            out[j] = t;
            denom += t;
        }
        for v in out.iter_mut() {
            *v /= denom;
        }
    }
}

/// Legendre functions of the second kind `Q_0..=Q_n` on `(-1, 1)`.
fn legendre_q(n: usize, s: f64) -> Vec<f64> {
    let mut q = vec![0.0; n + 1];
    q[0] = 0.5 * ((1.0 + s) / (1.0 - s)).ln();
    if n >= 1 {
        q[1] = s * q[0] - 1.0;
    }
    for k in 1..n {
        let kf = k as f64;
        q[k + 1] = ((2.0 * kf + 1.0) * s * q[k] - kf * q[k - 1]) / (kf + 1.0);
    }
    q
}

/// `int_{-1}^{1} log|t - s| P_k(t) dt` for `k = 0..n-1`, with `s` in `(-1, 1)`.
pub fn log_legendre_moments(n: usize, s: f64) -> Vec<f64> {
    let q = legendre_q(n + 1, s);
    let mut m = vec![0.0; n];
    m[0] = (1.0 + s) * (1.0 + s).ln() + (1.0 - s) * (1.0 - s).ln() - 2.0;
    for k in 1..n {
        m[k] = 2.0 * (q[k + 1] - q[k - 1]) / (2.0 * k as f64 + 1.0);
    }
    m
}

/// Product-integration weights `w_j` with
/// `int_{-1}^{1} log|t - s| f(t) dt ~ sum_j w_j f(x_j)` for `f` sampled at the
/// Gauss–Legendre nodes of `rule`.
pub fn log_product_weights(rule: &GaussLegendre, s: f64) -> Vec<f64> {
    let n = rule.len();
    let moments = log_legendre_moments(n, s);
    // f = sum_k c_k P_k with c_k = (2k+1)/2 sum_j w_j P_k(x_j) f_j
    let mut out = vec![0.0; n];
    for (j, (&x, &w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
        let mut p0 = 1.0;
        let mut p1 = x;
        let mut acc = 0.5 * moments[0] * w;
        for k in 1..n {
            let pk = if k == 1 {
                p1
            } else {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
                p2
            };
            acc += 0.5 * (2.0 * k as f64 + 1.0) * moments[k] * pk * w;
        }
        out[j] = acc;
    }
    out
}

/// Weights `R_j` of the periodic rule for `int_0^{2pi} log(4 sin^2((t - tau)/2)) f(tau) dtau`
/// on `2n` equispaced nodes, as a function of the node offset `j = 0..2n-1`.
pub fn kress_log_weights(n: usize) -> Vec<f64> {
    let nf = n as f64;
    (0..2 * n)
        .map(|j| {
            let s = PI * j as f64 / nf;
            let mut sum = 0.0;
            for m in 1..n {
                sum += (m as f64 * s).cos() / m as f64;
            }
            -2.0 * PI / nf * sum - PI / (nf * nf) * (nf * s).cos()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let g = GaussLegendre::new(8);
        let sum: f64 = g.weights.iter().sum();
        assert!((sum - 2.0).abs() < 1e-14);
        let i14: f64 = g.nodes.iter().zip(&g.weights).map(|(x, w)| w * x.powi(14)).sum();
        assert!((i14 - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn log_product_rule_matches_brute_force() {
        // oracle: split at s and use a graded composite rule on each side
        let g = GaussLegendre::new(16);
        let s = 0.3;
        let f = |t: f64| (2.0 * t).cos() + t * t * t;
        let w = log_product_weights(&g, s);
        let approx: f64 = w.iter().zip(&g.nodes).map(|(w, &x)| w * f(x)).sum();
        let fine = GaussLegendre::new(20);
        let mut exact = 0.0;
        for (a, b) in [(-1.0, s), (s, 1.0)] {
            let len: f64 = b - a;
            // geometric grading toward s
            let mut edges = vec![0.0];
            let mut h = 1.0;
            for _ in 0..60 {
                h *= 0.5;
                edges.push(1.0 - h);
            }
            edges.push(1.0);
            for win in edges.windows(2) {
                for (u, wu) in fine.mapped(win[0], win[1]) {
                    let t = if a == -1.0 { a + u * len } else { b - u * len };
                    exact += wu * len * (t - s).abs().ln() * f(t);
                }
            }
        }
        assert!((approx - exact).abs() < 1e-12, "{approx} vs {exact}");
    }

    #[test]
    fn kress_weights_reproduce_log_integral_of_constant() {
        // int_0^{2pi} log(4 sin^2(t/2)) dt = 0
        let r = kress_log_weights(16);
        let s: f64 = r.iter().sum();
        assert!(s.abs() < 1e-13);
        // int log(4 sin^2((t-tau)/2)) cos(tau) dtau = -2pi cos(t)
        let n = 16;
        let approx: f64 = (0..2 * n).map(|j| r[j] * (PI * j as f64 / n as f64).cos()).sum();
        assert!((approx + 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn barycentric_basis_is_partition_of_unity() {
        let g = GaussLegendre::new(10);
        let b = Barycentric::new(&g.nodes);
        let mut out = vec![0.0; 10];
        b.basis(0.123, &mut out);
        assert!((out.iter().sum::<f64>() - 1.0).abs() < 1e-13);
    }
}
