//! Prime counts, characters and L-values against direct computation.

use std::f64::consts::PI;

use halasz_core::characters::{parse_character, CharGroup};
use halasz_core::primes::*;
use halasz_core::sieve::{chebyshev_psi, PrimeTables};
use halasz_core::Complex64;

fn tables() -> PrimeTables {
    PrimeTables::build(200_000).unwrap()
}

fn trial_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

/// Λ(n) by trial division.
fn mangoldt(n: u64) -> f64 {
    for p in 2..=n {
        if n % p == 0 {
            let mut m = n;
            while m % p == 0 {
                m /= p;
            }
            return if m == 1 { (p as f64).ln() } else { 0.0 };
        }
    }
    0.0
}

#[test]
fn l_one_mod_three() {
    // L(1, χ₋₃) = π/(3√3)
    let chi = CharGroup::new(3).unwrap().quadratic(1).unwrap();
    let (v, tail) = l_one(&chi, 1_000_000).unwrap();
    let exact = PI / (3.0 * 3f64.sqrt());
    assert!((v.re - exact).abs() <= tail, "{} vs {exact}", v.re);
    assert!(v.im.abs() < 1e-15);
}

#[test]
fn l_one_mod_four() {
    // Leibniz: L(1, χ₋₄) = π/4
    let chi = CharGroup::new(4).unwrap().quadratic(1).unwrap();
    let (v, tail) = l_one(&chi, 1_000_000).unwrap();
    assert!((v.re - PI / 4.0).abs() <= tail);
    assert!(l_one(&CharGroup::new(4).unwrap().principal(), 10).is_err());
}

#[test]
fn psi_by_character_matches_trial_division() {
    let t = tables();
    let x = 2000.0;
    for q in [3u64, 5, 8, 12] {
        let classes = psi_classes(&t, q, x).unwrap();
        for a in 0..q {
            let direct: f64 = (1..=2000u64).filter(|n| n % q == a).map(mangoldt).sum();
            assert!((classes[a as usize] - direct).abs() < 1e-9, "q={q} a={a}");
        }
        for chi in CharGroup::new(q).unwrap().characters() {
            let direct: Complex64 = (1..=2000u64).map(|n| chi.eval(n) * mangoldt(n)).sum();
            assert!((psi_chi(&t, &chi, x).unwrap() - direct).norm() < 1e-9);
        }
    }
}

#[test]
fn hoheisel_windows_tile_the_range() {
    let t = tables();
    let r = hoheisel_report(&t, 1e5, 0.2, 10).unwrap();
    let total: f64 = r.windows.iter().map(|w| w.psi).sum();
    let end = r.windows.last().unwrap().hi;
    let direct = chebyshev_psi(&t, end, None).unwrap() - chebyshev_psi(&t, 1e5, None).unwrap();
    assert!((total - direct).abs() < 1e-6);
    assert!((r.h - 1e4).abs() < 1e-6);
    assert!(hoheisel_report(&t, 1e5, 1.0, 10).is_err());
    assert!(hoheisel_report(&t, 1e5, 0.2, 0).unwrap().mean_ratio.is_none());
}

#[test]
fn progression_identity_extremes() {
    let t = tables();
    let group = CharGroup::new(7).unwrap();
    let x = 1e5;
    let classes = psi_classes(&t, 7, x).unwrap();
    // no correction: lhs is ψ(x; q, a)
    let none = progression_identity_with_set(&t, 7, x, &[], 1).unwrap();
    for r in &none.residues {
        assert!((r.lhs - classes[r.a as usize]).abs() < 1e-9);
    }
    // every character removed: orthogonality leaves nothing
    let all = progression_identity_with_set(&t, 7, x, &group.characters(), 1).unwrap();
    for r in &all.residues {
        assert!(r.lhs.abs() < 1e-6 * x, "a={}: {}", r.a, r.lhs);
        assert!((r.residual + x / 6.0).abs() < 1e-6 * x);
    }
}

#[test]
fn principal_character_removes_the_main_term() {
    let t = tables();
    let group = CharGroup::new(5).unwrap();
    let r = progression_identity_with_set(&t, 5, 1e5, &[group.principal()], 1).unwrap();
    // ψ(x;5,a) − ψ(x,χ₀)/4 is a small oscillating remainder
    for res in &r.residues {
        assert!(res.lhs.abs() < 0.02 * 1e5 / 4.0, "a={}: {}", res.a, res.lhs);
    }
}

#[test]
fn character_scores_are_bounded_products() {
    let t = tables();
    let s = progression_character_sets(&t, 5, 1e5, 1, 1.0, &Default::default()).unwrap();
    assert_eq!(s.scores.len(), 3);
    for c in &s.scores {
        // Π(1 + 1/p) over Q ≤ p ≤ x bounds every factor |1 − χ(p)p^{−1−it}|
        let q0 = s.big_q.ceil() as u64;
        let cap: f64 = t.primes_in(q0 - 1, 100_000).iter().map(|&p| 1.0 + 1.0 / p as f64).product();
        assert!(c.score > 0.0 && c.score <= cap * (1.0 + 1e-9), "{}: {}", c.character, c.score);
    }
    assert!(!s.regime_ok);
    assert!(progression_character_sets(&t, 5, 1e5, 0, 1.0, &Default::default()).is_err());
}

#[test]
fn exceptional_sums_by_hand() {
    let t = tables();
    let x = 1e5;
    let r = exceptional_condition(&t, 4, x).unwrap();
    let q0 = 4.0 * x.ln();
    let direct: f64 = (q0.ceil() as u64..=100_000)
        .filter(|&p| trial_prime(p))
        .map(|p| (1.0 + if p % 4 == 1 { 1.0 } else { -1.0 }) / p as f64)
        .sum();
    assert_eq!(r.sums.len(), 1);
    assert!((r.sums[0].score - direct).abs() < 1e-9);
    let base = 30.0 * (x.ln() / q0.ln()).ln().ln();
    assert!((r.threshold_c0 - base).abs() < 1e-9);
    assert!((r.threshold_c5 - base - 5.0).abs() < 1e-9);
}

#[test]
fn divisor_character_sums() {
    let t = tables();
    let chi = parse_character("quadratic:1", Some(12)).unwrap();
    for n in 1..=500u64 {
        let direct: Complex64 = (1..=n).filter(|d| n % d == 0).map(|d| chi.eval(d)).sum();
        assert!((fi_a(&t, &chi, n) - direct).norm() < 1e-12, "n={n}");
    }
}

#[test]
fn fi_estimate_counts_primes() {
    let t = tables();
    let r = fi_estimate(&t, 4, 1, 1e5, 100f64.powf(1.0 / 8.0), None).unwrap();
    let direct = (1..=100_000u64).filter(|&n| n % 4 == 1 && trial_prime(n)).count() as u64;
    assert_eq!(r.pi_exact, direct);
    assert!((r.l1 - PI / 4.0).abs() < 1e-6);
    // χ(3) = −1 modulo 4
    assert!(fi_estimate(&t, 4, 3, 1e5, 2.0, None).is_err());
}

#[test]
fn least_primes_by_trial_division() {
    let t = tables();
    for q in 1..=40u64 {
        let r = linnik_search(&t, q, 100_000).unwrap();
        assert!(r.all_found);
        for l in &r.least {
            let p = l.prime.unwrap();
            let first = (2..).find(|&n| n % q == l.a % q && trial_prime(n)).unwrap();
            assert_eq!(p, first, "q={q} a={}", l.a);
        }
    }
    assert!(linnik_search(&t, 1, 100).unwrap().max_exponent.is_none());
}
