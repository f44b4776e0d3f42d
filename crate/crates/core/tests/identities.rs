//! Exact rearrangements that must hold to rounding error.

use halasz_core::characters::{orthogonality_residual, CharGroup};
use halasz_core::halasz::pls_identity;
use halasz_core::primes::hyperbola_check;
use halasz_core::sieve::{builtin_catalogue, membership_check, sieve_function, FunctionSpec, LambdaFTable, PrimeTables};
use halasz_core::Complex64;

fn tables() -> PrimeTables {
    PrimeTables::build(30_000).unwrap()
}

#[test]
fn progression_sums_expand_in_characters() {
    let t = tables();
    for spec in ["one", "moebius", "d_kappa(2)"] {
        let spec: FunctionSpec = spec.parse().unwrap();
        let sf = sieve_function(&spec, &t, 10_000).unwrap();
        for q in [3, 4, 5, 7, 12, 30] {
            let r = orthogonality_residual(q, 1e4, &sf).unwrap();
            assert!(r.relative() <= 1e-7, "{spec} q={q}: {}", r.relative());
        }
    }
}

#[test]
fn large_sieve_identity_for_every_excluded_set() {
    let t = tables();
    let sf = sieve_function(&FunctionSpec::moebius(), &t, 10_000).unwrap();
    let chars = CharGroup::new(7).unwrap().characters();
    // all 2^6 subsets of the characters mod 7
    for mask in 0u32..64 {
        let set: Vec<_> = chars.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, c)| c.clone()).collect();
        let r = pls_identity(&sf, 7, 1e4, &set).unwrap();
        assert!(r.relative_residual <= 1e-8, "mask {mask}: {}", r.relative_residual);
    }
}

#[test]
fn empty_set_gives_parseval() {
    // With nothing excluded the residue side is Σ_a |Σ_{n≡a} f(n)|².
    let t = tables();
    let sf = sieve_function(&FunctionSpec::one(), &t, 1000).unwrap();
    let r = pls_identity(&sf, 5, 1000.0, &[]).unwrap();
    let direct: f64 = (1..5u64).map(|a| ((1000 - a) / 5 + 1) as f64).map(|c| c * c).sum();
    assert!((r.residue_side - direct).abs() < 1e-9 * direct);
}

#[test]
fn hyperbola_split_is_exact() {
    let t = tables();
    let x = 1e4;
    for (h, k, l) in [(1e4, 200.0, 100.0), (1e4, 400.0, 50.0), (1e3, 105.0, 105.0), (5e3, 1.0, 15_000.0)] {
        let r = hyperbola_check(&t, x, h, 20.0, k, l).unwrap();
        assert!(r.relative_residual <= 1e-8, "h={h} K={k} L={l}: {}", r.relative_residual);
        assert!(r.direct > 0.0);
    }
}

#[test]
fn hyperbola_direct_side_matches_prime_powers() {
    let t = tables();
    let r = hyperbola_check(&t, 100.0, 100.0, 20.0, 20.0, 20.0).unwrap();
    // the only prime powers in (100, 200] with p > 20 are the primes themselves
    let expected: f64 = (101..=200u64).filter(|&n| t.is_prime(n)).map(|p| (p as f64).ln()).sum();
    assert!((r.direct - expected).abs() < 1e-9);
}

#[test]
fn hyperbola_rejects_short_cuts() {
    let t = tables();
    assert!(hyperbola_check(&t, 1e4, 1e4, 20.0, 100.0, 100.0).is_err());
}

/// f(n) log n = Σ_{d|n} Λ_f(d) f(n/d), summed by brute force over divisors.
#[test]
fn log_derivative_convolution() {
    let n = 10_000u64;
    let t = PrimeTables::build(n).unwrap();
    for spec in builtin_catalogue() {
        let sf = sieve_function(&spec, &t, n).unwrap();
        let lam = LambdaFTable::build(&spec, &t, n).unwrap().dense();
        let mut worst: f64 = 0.0;
        for m in 1..=n {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut d = 1;
            while d * d <= m {
                if m % d == 0 {
                    acc += lam[d as usize] * sf.value(m / d);
                    if d * d != m {
                        acc += lam[(m / d) as usize] * sf.value(d);
                    }
                }
                d += 1;
            }
            worst = worst.max((acc - sf.value(m) * (m as f64).ln()).norm());
        }
        assert!(worst <= 1e-10, "{spec}: {worst}");
    }
}

#[test]
fn every_builtin_is_in_its_class() {
    let t = PrimeTables::build(10_000).unwrap();
    for spec in builtin_catalogue() {
        let r = membership_check(&spec, &t, 10_000).unwrap();
        assert!(r.passes, "{spec}: max ratio {} > κ = {}", r.max_ratio, r.kappa);
    }
}

#[test]
fn divisor_function_saturates_its_class() {
    let t = PrimeTables::build(1000).unwrap();
    let r = membership_check(&"d_kappa(2)".parse().unwrap(), &t, 1000).unwrap();
    assert!((r.max_ratio - 2.0).abs() < 1e-12);
}
