//! Quadrature rules and polynomial bases on `x = cos θ`.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on [−1, 1], exact for polynomials of
/// degree `2n − 1`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi's initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
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
    (nodes, weights)
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

/// Clenshaw–Curtis weights for nodes `x_i = cos(iπ/n)`, `i = 0..=n`.
///
/// Exact for polynomials of degree ≤ n; in θ these are the uniform points
/// `θ_i = iπ/n` on [0, π] and integrate `f(θ) sin θ dθ`.
pub fn clenshaw_curtis_weights(n: usize) -> Vec<f64> {
    assert!(n >= 1, "Clenshaw-Curtis needs at least two nodes");
    let nf = n as f64;
    (0..=n)
        .map(|i| {
            let c = if i == 0 || i == n { 1.0 } else { 2.0 };
            let mut s = 0.0;
            for k in 1..=n / 2 {
                let b = if 2 * k == n { 1.0 } else { 2.0 };
                let kf = k as f64;
                s += b / (4.0 * kf * kf - 1.0) * (2.0 * kf * PI * i as f64 / nf).cos();
            }
            c / nf * (1.0 - s)
        })
        .collect()
}

/// Chebyshev interpolant through samples at `x_i = cos(iπ/n)`.
#[derive(Debug, Clone)]
pub struct ChebyshevSeries {
    coeffs: Vec<f64>,
}

impl ChebyshevSeries {
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len() - 1;
        let nf = n as f64;
        let coeffs = (0..=n)
            .map(|k| {
                let mut s = 0.0;
                for (i, &f) in samples.iter().enumerate() {
                    let half = if i == 0 || i == n { 0.5 } else { 1.0 };
                    s += half * f * (k as f64 * PI * i as f64 / nf).cos();
                }
                let half = if k == 0 || k == n { 0.5 } else { 1.0 };
                half * 2.0 / nf * s
            })
            .collect();
        ChebyshevSeries { coeffs }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mut b1 = 0.0;
        let mut b2 = 0.0;
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * x * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        x * b1 - b2 + self.coeffs[0]
    }
}

/// Orthonormal associated Legendre functions `Θ_{J|m|}(θ)` for
/// `J = |m| ..= j_max`, normalized so that `∫₀^π Θ² sin θ dθ = 1`.
///
/// No Condon–Shortley phase; it is common to a whole `m` band and drops out
/// of every quantity this crate computes.
pub fn normalized_legendre(m: u32, j_max: u32, cos_theta: f64) -> Vec<f64> {
    if j_max < m {
        return Vec::new();
    }
    let x = cos_theta;
    let sin_theta = (1.0 - x * x).max(0.0).sqrt();
    let mut pmm = (0.5f64).sqrt();
    for k in 1..=m {
        let kf = k as f64;
        pmm *= ((2.0 * kf + 1.0) / (2.0 * kf)).sqrt() * sin_theta;
    }
    let mut out = Vec::with_capacity((j_max - m + 1) as usize);
    out.push(pmm);
    if j_max == m {
        return out;
    }
    let mf = m as f64;
    let mut p_prev = pmm;
    let mut p = x * (2.0 * mf + 3.0).sqrt() * pmm;
    out.push(p);
    for l in (m + 2)..=j_max {
        let lf = l as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let lm1 = lf - 1.0;
        let b = ((lm1 * lm1 - mf * mf) / (4.0 * lm1 * lm1 - 1.0)).sqrt();
        let next = a * (x * p - b * p_prev);
        p_prev = p;
        p = next;
        out.push(p);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_monomials() {
        for n in [1usize, 2, 5, 12, 40] {
            let (x, w) = gauss_legendre(n);
            for deg in 0..(2 * n) {
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                assert!((q - exact).abs() < 1e-13, "n={n} deg={deg} {q} {exact}");
            }
        }
    }

    #[test]
    fn clenshaw_curtis_is_exact_to_order() {
        for n in [2usize, 8, 32, 33, 64] {
            let w = clenshaw_curtis_weights(n);
            for deg in 0..=n {
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                let q: f64 = (0..=n)
                    .map(|i| w[i] * (PI * i as f64 / n as f64).cos().powi(deg as i32))
                    .sum();
                assert!((q - exact).abs() < 1e-13, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn chebyshev_reproduces_polynomials() {
        let n = 16;
        let f = |x: f64| 3.0 * x.powi(7) - x.powi(4) + 0.5 * x - 2.0;
        let samples: Vec<f64> = (0..=n).map(|i| f((PI * i as f64 / n as f64).cos())).collect();
        let s = ChebyshevSeries::from_samples(&samples);
        for &x in &[-1.0, -0.73, 0.0, 0.12, 0.99, 1.0] {
            assert!((s.eval(x) - f(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn legendre_low_orders() {
        let x = 0.3f64;
        let s = (1.0 - x * x).sqrt();
        let p = normalized_legendre(0, 2, x);
        assert!((p[0] - (0.5f64).sqrt()).abs() < 1e-15);
        assert!((p[1] - (1.5f64).sqrt() * x).abs() < 1e-15);
        assert!((p[2] - (2.5f64).sqrt() * 0.5 * (3.0 * x * x - 1.0)).abs() < 1e-15);
        let p = normalized_legendre(1, 1, x);
        assert!((p[0] - (0.75f64).sqrt() * s).abs() < 1e-15);
        assert!(normalized_legendre(3, 2, x).is_empty());
    }

    #[test]
    fn legendre_orthonormal() {
        let (x, w) = gauss_legendre(60);
        for m in [0u32, 1, 4, 9] {
            let table: Vec<Vec<f64>> = x.iter().map(|&xi| normalized_legendre(m, 30, xi)).collect();
            let n = (30 - m + 1) as usize;
            for a in 0..n {
                for b in 0..n {
                    let g: f64 = table.iter().zip(&w).map(|(p, w)| w * p[a] * p[b]).sum();
                    let expect = if a == b { 1.0 } else { 0.0 };
                    assert!((g - expect).abs() < 1e-12, "m={m} a={a} b={b} g={g}");
                }
            }
        }
    }
}
