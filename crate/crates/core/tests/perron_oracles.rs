//! Contour integrals against closed forms and brute-force divisor sums.

use halasz_core::perron::*;
use halasz_core::sieve::{builtin_catalogue, sieve_function, FunctionSpec, LambdaFTable, PrimeTables};
use halasz_core::Complex64;

fn tables() -> PrimeTables {
    PrimeTables::build(100_000).unwrap()
}

#[test]
fn constant_integrand_gives_the_step_function() {
    let line = LineIntegralSpec::new(2.0, 1000.0, 2.5, 1.0).unwrap();
    let r = perron_integral(&line, |_| Complex64::new(1.0, 0.0)).unwrap();
    // truncation error is about x^c/(πT log x) ≈ 2e-3
    assert!((r.value.re - 1.0).abs() < 1e-2, "{}", r.value);
    assert!(r.value.im.abs() < 1e-9);

    let below = LineIntegralSpec::new(2.0, 1000.0, 0.5, 1.0).unwrap();
    let r = perron_integral(&below, |_| Complex64::new(1.0, 0.0)).unwrap();
    assert!(r.value.norm() < 1e-2);
}

#[test]
fn finite_dirichlet_polynomial_counts_terms() {
    let line = LineIntegralSpec::new(2.0, 2000.0, 5.5, 10.0).unwrap();
    let g = |s: Complex64| (1..=10).map(|n| (-s * (n as f64).ln()).exp()).sum::<Complex64>();
    let r = perron_integral(&line, g).unwrap();
    assert!((r.value.re - 5.0).abs() < 2e-2, "{}", r.value);
    assert!(r.richardson < 1e-6);
}

#[test]
fn short_contours_are_flagged() {
    let line = LineIntegralSpec::new(2.0, 1.0, 5.5, 10.0).unwrap();
    let g = |s: Complex64| (1..=10).map(|n| (-s * (n as f64).ln()).exp()).sum::<Complex64>();
    assert!(perron_integral(&line, g).unwrap().flagged);
}

#[test]
fn shifted_log_derivative_identity() {
    let t = tables();
    let opts = ShiftedOptions::default();
    for (spec, exact, tol) in [(FunctionSpec::one(), 11.0 / 3.0, 0.02), (FunctionSpec::moebius(), 10.0 / 3.0, 0.05)] {
        let r = verify_shifted_identity(&spec, &t, 10.5, &[500.0], &opts).unwrap();
        // oracle Σ_{2≤n≤x} (f(n) − Λ_f(n)/log n), by hand for x = 10.5
        assert!((r.oracle.re - exact).abs() < 1e-12, "{spec}: oracle {}", r.oracle);
        assert!(r.rel_err < tol, "{spec}: {}", r.rel_err);
    }
}

#[test]
fn shifted_identity_rejects_integer_x() {
    let t = tables();
    assert!(verify_shifted_identity(&FunctionSpec::one(), &t, 10.0, &[500.0], &ShiftedOptions::default()).is_err());
}

#[test]
fn split_reassembles_the_function() {
    let t = tables();
    for spec in builtin_catalogue() {
        for y in [2, 10, 31] {
            let split = SplitSeries::build(&spec, &t, y, 500.5, 5000).unwrap();
            let r = split.convolution_residual(&spec, &t).unwrap();
            assert!(r <= 1e-10, "{spec} y={y}: {r}");
        }
    }
}

/// The T → ∞ limit of the split integral, by brute force over abcd ≤ x:
/// 2 Σ s(a)ℓ(b)Λ_ℓ(c)Λ_ℓ(d)·I₁(bcd)·I₂(bd) with
/// I₁(N) = ∫₀^η N^{−α}dα and I₂(M) = ∫₀^η M^{−2β}dβ.
fn split_oracle(spec: &FunctionSpec, t: &PrimeTables, x: f64, y: u64) -> f64 {
    let n = x.floor() as u64;
    let eta = 1.0 / (y as f64).ln();
    let sf = sieve_function(spec, t, n).unwrap();
    let lam = LambdaFTable::build(spec, t, n).unwrap();
    let smooth = |m: u64| t.factorize(m).iter().all(|&(p, _)| p <= y);
    let rough = |m: u64| t.factorize(m).iter().all(|&(p, _)| p > y);
    let big = |m: u64| lam.get(m) != Complex64::new(0.0, 0.0) && t.spf(m) > y && (m as f64) < x / y as f64;
    let i1 = |m: f64| if m == 1.0 { eta } else { (1.0 - m.powf(-eta)) / m.ln() };
    let i2 = |m: f64| if m == 1.0 { eta } else { (1.0 - m.powf(-2.0 * eta)) / (2.0 * m.ln()) };
    let mut total = 0.0;
    for a in (1..=n).filter(|&a| smooth(a)) {
        for b in (1..=n / a).filter(|&b| rough(b)) {
            for c in (y + 1..=n / (a * b)).filter(|&c| big(c)) {
                for d in (y + 1..=n / (a * b * c)).filter(|&d| big(d)) {
                    let w = sf.value(a).re * sf.value(b).re * lam.get(c).re * lam.get(d).re;
                    total += 2.0 * w * i1((b * c * d) as f64) * i2((b * d) as f64);
                }
            }
        }
    }
    total
}

#[test]
fn split_integral_matches_divisor_sum() {
    let t = tables();
    for spec in [FunctionSpec::one(), FunctionSpec::moebius()] {
        let oracle = split_oracle(&spec, &t, 500.5, 10);
        let r = verify_split_identity(&spec, &t, 500.5, 10.0, &[400.0], &SplitOptions::default()).unwrap();
        let p = &r.points[0];
        assert!((p.integral.re - oracle).abs() < 0.02 * oracle.abs(), "{spec}: {} vs {oracle}", p.integral);
        assert!(p.richardson < 1e-6);
        let direct: f64 = sieve_function(&spec, &t, 500).unwrap().prefix()[500].re;
        assert!((r.lhs_sum.re - direct).abs() < 1e-12);
    }
}

#[test]
fn split_rejects_out_of_range_y() {
    let t = tables();
    assert!(verify_split_identity(&FunctionSpec::one(), &t, 500.5, 30.0, &[400.0], &SplitOptions::default()).is_err());
}

#[test]
fn mean_square_single_prime() {
    let t = tables();
    let p = 101u64;
    let a = 0.25;
    let r = meansquare_check(&t, &[(p, Complex64::new(a, 0.0))], 10.0, 1e4, None).unwrap();
    let lp = (p as f64).ln();
    let exact = 2.0 * 10.0 * (a * lp).powi(2);
    assert!((r.lhs - exact).abs() < 1e-8 * exact, "{} vs {exact}", r.lhs);
}

#[test]
fn mean_square_two_primes() {
    // |a p^{−it} + b q^{−it}|² integrates to 2T(a²+b²) plus the cross term
    // 4ab·sin(T log(q/p))/log(q/p), each weight carrying its log p.
    let t = tables();
    let (p, q) = (101u64, 103u64);
    let (a, b) = (0.5 * (p as f64).ln(), -0.75 * (q as f64).ln());
    let tm = 10.0;
    let r = meansquare_check(&t, &[(p, Complex64::new(0.5, 0.0)), (q, Complex64::new(-0.75, 0.0))], tm, 1e4, None).unwrap();
    let l = (q as f64 / p as f64).ln();
    let exact = 2.0 * tm * (a * a + b * b) + 4.0 * a * b * (tm * l).sin() / l;
    assert!((r.lhs - exact).abs() < 1e-8 * exact.abs(), "{} vs {exact}", r.lhs);
}

#[test]
fn mean_square_support_is_checked() {
    let t = tables();
    assert!(meansquare_check(&t, &[(97, Complex64::new(1.0, 0.0))], 10.0, 1e4, None).is_err());
    let w = prime_weights(&t, "inv-n", 10.0, 1e4).unwrap();
    assert!(w.iter().all(|&(n, _)| (100..=10_000).contains(&n)));
    assert_eq!(w.len(), t.prime_pi(10_000) - t.prime_pi(99));
}

#[test]
fn mean_square_constant_for_reciprocal_weights() {
    let t = tables();
    let w = prime_weights(&t, "inv-n", 5.0, 1e4).unwrap();
    let r = meansquare_check(&t, &w, 5.0, 1e4, None).unwrap();
    assert!(r.recorded_c <= 20.0, "{}", r.recorded_c);
    assert!(r.richardson < 1e-3 * r.lhs);
    let empty = meansquare_check(&t, &[], 5.0, 1e4, None).unwrap();
    assert_eq!((empty.lhs, empty.rhs), (0.0, 0.0));
}
