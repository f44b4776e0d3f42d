//! Fixed-rule quadrature used by the contour-integral checks.

/// Gauss–Legendre nodes and weights on [a, b], nodes ascending.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    assert!(n >= 1);
    let mut out = Vec::with_capacity(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    for i in 0..n {
        // Chebyshev-style initial guess, then Newton on P_n.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        out.push((mid - half * z, half * w));
    }
    out
}

/// Composite Simpson weights for `2m + 1` equally spaced nodes with step `h`.
pub fn simpson_weights(intervals: usize, h: f64) -> Vec<f64> {
    assert!(intervals >= 2 && intervals % 2 == 0, "Simpson needs an even number of intervals");
    (0..=intervals)
        .map(|i| {
            let c = if i == 0 || i == intervals {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            c * h / 3.0
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let rule = gauss_legendre(24, 0.0, 2.0);
        let total: f64 = rule.iter().map(|(_, w)| w).sum();
        assert!((total - 2.0).abs() < 1e-14);
        for deg in 0..=47 {
            let got: f64 = rule.iter().map(|(x, w)| w * x.powi(deg)).sum();
            let want = 2f64.powi(deg + 1) / (deg + 1) as f64;
            assert!((got - want).abs() <= 1e-12 * want, "deg {deg}");
        }
        assert!(rule.windows(2).all(|p| p[0].0 < p[1].0));
    }

    #[test]
    fn legendre_exponential() {
        let got: f64 = gauss_legendre(24, 0.0, 40.0).iter().map(|(x, w)| w * (-x).exp()).sum();
        assert!((got - (1.0 - (-40f64).exp())).abs() < 1e-6);
    }

    #[test]
    fn simpson_cubic() {
        let n = 10;
        let h = 0.1;
        let w = simpson_weights(n, h);
        let got: f64 = w.iter().enumerate().map(|(i, w)| w * (i as f64 * h).powi(3)).sum();
        assert!((got - 0.25).abs() < 1e-14);
    }
}
