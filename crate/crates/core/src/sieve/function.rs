use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::spec::FunctionSpec;
use super::tables::{PrimeTables, DEFAULT_TABLE_BUDGET};
use crate::characters::gcd;
use crate::error::{LabError, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Bytes per entry of a sieved table: the value and its prefix sum.
pub const SIEVED_BYTES_PER_ENTRY: u64 = 32;

/// Dense table of f(n), 1 ≤ n ≤ N, with prefix sums. Index 0 holds zero so
/// `prefix[n] = Σ_{m≤n} f(m)`.
#[derive(Debug, Clone)]
pub struct SievedFunction {
    spec: FunctionSpec,
    n: usize,
    values: Vec<Complex64>,
    prefix: Vec<Complex64>,
}

impl SievedFunction {
    pub fn spec(&self) -> &FunctionSpec {
        &self.spec
    }

    pub fn limit(&self) -> u64 {
        self.n as u64
    }

    /// `values()[n] = f(n)`, with `values()[0] = 0`.
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn prefix(&self) -> &[Complex64] {
        &self.prefix
    }

    #[inline]
    pub fn value(&self, n: u64) -> Complex64 {
        self.values[n as usize]
    }

    /// ⌊x⌋ as a table index; errors if x exceeds the table.
    pub fn floor_index(&self, x: f64) -> Result<usize> {
        if x.is_nan() {
            return Err(LabError::domain("x is NaN"));
        }
        if x.floor() > self.n as f64 {
            return Err(LabError::Range { what: "x", value: x, limit: self.n as f64 });
        }
        Ok(if x < 1.0 { 0 } else { x.floor() as usize })
    }

    /// Σ_{lo < n ≤ hi} f(n).
    pub fn interval_sum(&self, lo: f64, hi: f64) -> Result<Complex64> {
        let a = self.floor_index(lo.max(0.0))?;
        let b = self.floor_index(hi)?;
        Ok(if b > a { self.prefix[b] - self.prefix[a] } else { ZERO })
    }
}

/// Sieves f over 1..=n with the default memory budget.
pub fn sieve_function(spec: &FunctionSpec, tables: &PrimeTables, n: u64) -> Result<SievedFunction> {
    sieve_function_with_budget(spec, tables, n, DEFAULT_TABLE_BUDGET)
}

pub fn sieve_function_with_budget(
    spec: &FunctionSpec,
    tables: &PrimeTables,
    n: u64,
    budget: u64,
) -> Result<SievedFunction> {
    tables.require(n)?;
    let requested = (n + 1) * SIEVED_BYTES_PER_ENTRY;
    if requested > budget {
        return Err(LabError::Capacity { what: "sieved function table", requested, budget });
    }
    let len = n as usize + 1;
    let mut values = vec![ZERO; len];
    if n >= 1 {
        values[1] = Complex64::new(1.0, 0.0);
    }

    // Prime powers first, in parallel per prime; the results are placed by
    // index so the outcome does not depend on scheduling.
    let primes = tables.primes_in(0, n);
    let pp: Vec<Vec<(usize, Complex64)>> = primes
        .par_iter()
        .map(|&p| {
            let p = p as u64;
            let mut out = Vec::new();
            let mut q = p;
            let mut k = 1;
            loop {
                out.push((q as usize, spec.evaluate(p, k)?));
                match q.checked_mul(p) {
                    Some(next) if next <= n => {
                        q = next;
                        k += 1;
                    }
                    _ => break,
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut is_pp = vec![false; len];
    for (i, v) in pp.into_iter().flatten() {
        values[i] = v;
        is_pp[i] = true;
    }

    // Every other n splits as (n / p^k)·p^k with p = spf(n); both factors
    // are smaller and already filled.
    for m in 2..len {
        if is_pp[m] {
            continue;
        }
        let p = tables.spf(m as u64) as usize;
        let mut q = p;
        let mut rest = m / p;
        while rest % p == 0 {
            rest /= p;
            q *= p;
        }
        values[m] = values[rest] * values[q];
    }
    drop(is_pp);

    let mut prefix = Vec::with_capacity(len);
    let mut acc = ZERO;
    for v in &values {
        acc += v;
        prefix.push(acc);
    }
    Ok(SievedFunction { spec: spec.clone(), n: n as usize, values, prefix })
}

/// Σ_{n≤x} f(n).
pub fn partial_sum(sf: &SievedFunction, x: f64) -> Result<Complex64> {
    Ok(sf.prefix[sf.floor_index(x)?])
}

/// Λ_f(p^j) for j = 1..=k from f(p^j)·j·log p = Σ_{i≤j} Λ_f(p^i) f(p^{j−i}).
pub fn lambda_f_powers(spec: &FunctionSpec, p: u64, k: u32) -> Result<Vec<Complex64>> {
    let lp = (p as f64).ln();
    let f: Vec<Complex64> = (0..=k).map(|j| spec.evaluate(p, j)).collect::<Result<_>>()?;
    let mut lam = vec![ZERO; k as usize + 1];
    for j in 1..=k as usize {
        let mut v = f[j] * (j as f64 * lp);
        for i in 1..j {
            v -= lam[i] * f[j - i];
        }
        lam[j] = v;
    }
    lam.remove(0);
    Ok(lam)
}

/// Λ_f(p^k), k ≥ 1.
pub fn lambda_f(spec: &FunctionSpec, p: u64, k: u32) -> Result<Complex64> {
    if k == 0 {
        return Err(LabError::domain("Λ_f(p^k) needs k ≥ 1"));
    }
    Ok(*lambda_f_powers(spec, p, k)?.last().expect("k ≥ 1"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaEntry {
    pub n: u64,
    pub p: u64,
    pub k: u32,
    pub value: Complex64,
}

/// Λ_f at every prime power up to N, sorted by n.
#[derive(Debug, Clone)]
pub struct LambdaFTable {
    n: u64,
    entries: Vec<LambdaEntry>,
}

impl LambdaFTable {
    pub fn build(spec: &FunctionSpec, tables: &PrimeTables, n: u64) -> Result<Self> {
        tables.require(n)?;
        let per_prime: Vec<Vec<LambdaEntry>> = tables
            .primes_in(0, n)
            .par_iter()
            .map(|&p| {
                let p = p as u64;
                let mut kmax = 1;
                let mut q = p;
                while let Some(next) = q.checked_mul(p).filter(|&v| v <= n) {
                    q = next;
                    kmax += 1;
                }
                let lam = lambda_f_powers(spec, p, kmax)?;
                let mut pk = 1;
                Ok(lam
                    .into_iter()
                    .enumerate()
                    .map(|(i, value)| {
                        pk *= p;
                        LambdaEntry { n: pk, p, k: i as u32 + 1, value }
                    })
                    .collect())
            })
            .collect::<Result<_>>()?;
        let mut entries: Vec<LambdaEntry> = per_prime.into_iter().flatten().collect();
        entries.sort_by_key(|e| e.n);
        Ok(LambdaFTable { n, entries })
    }

    pub fn limit(&self) -> u64 {
        self.n
    }

    pub fn entries(&self) -> &[LambdaEntry] {
        &self.entries
    }

    /// Λ_f(m), zero off prime powers.
    pub fn get(&self, m: u64) -> Complex64 {
        match self.entries.binary_search_by_key(&m, |e| e.n) {
            Ok(i) => self.entries[i].value,
            Err(_) => ZERO,
        }
    }

    /// Dense copy indexed 0..=N.
    pub fn dense(&self) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.n as usize + 1];
        for e in &self.entries {
            out[e.n as usize] = e.value;
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MembershipReport {
    pub kappa: f64,
    pub max_ratio: f64,
    /// Prime power (p, k) attaining the maximum.
    pub witness: Option<(u64, u32)>,
    pub passes: bool,
}

/// max over p^k ≤ N of |Λ_f(p^k)|/log p, compared against κ.
pub fn membership_check(spec: &FunctionSpec, tables: &PrimeTables, n: u64) -> Result<MembershipReport> {
    let table = LambdaFTable::build(spec, tables, n)?;
    let mut max_ratio = 0.0;
    let mut witness = None;
    for e in table.entries() {
        let r = e.value.norm() / (e.p as f64).ln();
        if r > max_ratio {
            max_ratio = r;
            witness = Some((e.p, e.k));
        }
    }
    Ok(MembershipReport { kappa: spec.kappa, max_ratio, witness, passes: max_ratio <= spec.kappa + 1e-9 })
}

/// ψ(x) = Σ_{n≤x} Λ(n), optionally restricted to n ≡ a (mod q).
pub fn chebyshev_psi(tables: &PrimeTables, x: f64, progression: Option<(u64, u64)>) -> Result<f64> {
    if x.is_nan() {
        return Err(LabError::domain("x is NaN"));
    }
    if x.floor() > tables.limit() as f64 {
        return Err(LabError::Range { what: "x", value: x, limit: tables.limit() as f64 });
    }
    if let Some((q, a)) = progression {
        if q == 0 {
            return Err(LabError::domain("modulus q must be positive"));
        }
        if gcd(a % q, q) != 1 {
            return Err(LabError::domain(format!("gcd({a}, {q}) > 1")));
        }
    }
    if x < 2.0 {
        return Ok(0.0);
    }
    let xi = x.floor() as u64;
    let mut total = 0.0;
    for &p in tables.primes_in(0, xi) {
        let p = p as u64;
        let lp = (p as f64).ln();
        let mut q = p;
        loop {
            if progression.map_or(true, |(m, a)| q % m == a % m) {
                total += lp;
            }
            match q.checked_mul(p) {
                Some(next) if next <= xi => q = next,
                _ => break,
            }
        }
    }
    Ok(total)
}

/// Σ_{lo < n ≤ hi} Λ(n).
pub fn psi_interval(tables: &PrimeTables, lo: f64, hi: f64) -> Result<f64> {
    if hi.floor() > tables.limit() as f64 {
        return Err(LabError::Range { what: "x", value: hi, limit: tables.limit() as f64 });
    }
    let a = lo.max(0.0).floor() as u64;
    let b = hi.floor() as u64;
    if b <= a {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for &p in tables.primes_in(a, b) {
        total += (p as f64).ln();
    }
    // Higher prime powers in the window.
    for &p in tables.primes() {
        let p = p as u64;
        if p.saturating_mul(p) > b {
            break;
        }
        let mut q = p * p;
        while q <= b {
            if q > a {
                total += (p as f64).ln();
            }
            match q.checked_mul(p) {
                Some(v) => q = v,
                None => break,
            }
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tables() -> PrimeTables {
        PrimeTables::build(10_000).unwrap()
    }

    #[test]
    fn small_prefix_sums() {
        let t = tables();
        let one = sieve_function(&FunctionSpec::one(), &t, 10).unwrap();
        assert_eq!(partial_sum(&one, 11.0).unwrap_err(), LabError::Range { what: "x", value: 11.0, limit: 10.0 });
        // only ⌊x⌋ has to lie in the table
        assert_eq!(partial_sum(&one, 10.5).unwrap().re, 10.0);
        assert_eq!(partial_sum(&one, 10.0).unwrap().re, 10.0);
        let one = sieve_function(&FunctionSpec::one(), &t, 11).unwrap();
        assert_eq!(partial_sum(&one, 10.5).unwrap().re, 10.0);
        let mu = sieve_function(&FunctionSpec::moebius(), &t, 10).unwrap();
        assert_eq!(partial_sum(&mu, 10.0).unwrap().re, -1.0);
        let d2 = sieve_function(&FunctionSpec::d_kappa(2.0).unwrap(), &t, 10).unwrap();
        assert_eq!(partial_sum(&d2, 10.0).unwrap().re, 27.0);
        let lam = sieve_function(&FunctionSpec::liouville(), &t, 10).unwrap();
        assert_eq!(partial_sum(&lam, 10.0).unwrap().re, 0.0);
        assert_eq!(partial_sum(&lam, 0.5).unwrap().re, 0.0);
    }

    #[test]
    fn lambda_values() {
        let l = lambda_f(&FunctionSpec::one(), 2, 3).unwrap();
        assert!((l.re - 2f64.ln()).abs() < 1e-15);
        for k in 1..=5 {
            let m = lambda_f(&FunctionSpec::moebius(), 7, k).unwrap();
            assert!((m.re + 7f64.ln()).abs() < 1e-13, "k={k} {m}");
            for beta in [0.5, 2.0, 3.7] {
                let d = lambda_f(&FunctionSpec::d_kappa(beta).unwrap(), 5, k).unwrap();
                assert!((d.re - beta * 5f64.ln()).abs() < 1e-12, "β={beta} k={k} {d}");
            }
        }
        assert!(lambda_f(&FunctionSpec::one(), 2, 0).is_err());
    }

    #[test]
    fn membership_at_declared_kappa() {
        let t = tables();
        let r = membership_check(&FunctionSpec::one(), &t, 10_000).unwrap();
        assert!((r.max_ratio - 1.0).abs() < 1e-12 && r.passes);
        let r = membership_check(&FunctionSpec::sign_cos(1.0).unwrap(), &t, 10_000).unwrap();
        assert!((r.max_ratio - 1.0).abs() < 1e-12 && r.passes);
        let r = membership_check(&FunctionSpec::d_kappa(0.5).unwrap(), &t, 10_000).unwrap();
        assert!((r.max_ratio - 0.5).abs() < 1e-12 && r.passes);
        let mut wrong = FunctionSpec::d_kappa(2.0).unwrap();
        wrong.kappa = 1.0;
        assert!(!membership_check(&wrong, &t, 1000).unwrap().passes);
    }

    #[test]
    fn psi_values() {
        let t = tables();
        let brute: f64 = (2..=100).map(|n| t.mangoldt(n)).sum();
        let psi = chebyshev_psi(&t, 100.0, None).unwrap();
        assert!((psi - brute).abs() < 1e-12);
        assert!((psi - 94.05).abs() < 0.05);
        assert!((chebyshev_psi(&t, 10.0, Some((4, 3))).unwrap() - 21f64.ln()).abs() < 1e-14);
        assert_eq!(chebyshev_psi(&t, 1.0, None).unwrap(), 0.0);
        assert!(matches!(chebyshev_psi(&t, 10.0, Some((4, 2))), Err(LabError::Domain(_))));
        let w = psi_interval(&t, 1000.0, 1500.0).unwrap();
        let bw: f64 = (1001..=1500).map(|n| t.mangoldt(n)).sum();
        assert!((w - bw).abs() < 1e-9);
    }

    #[test]
    fn capacity_is_explicit() {
        let t = tables();
        let e = sieve_function_with_budget(&FunctionSpec::one(), &t, 1000, 1000).unwrap_err();
        assert!(e.is_resource());
    }
}
