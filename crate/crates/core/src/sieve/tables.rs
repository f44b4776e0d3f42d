use crate::error::{LabError, Result};

/// Largest sieve limit accepted by [`PrimeTables::build`].
pub const MAX_SIEVE_LIMIT: u64 = 1 << 31;

/// Default memory allowed for one dense table (spf array or sieved values).
pub const DEFAULT_TABLE_BUDGET: u64 = 2 << 30;

/// Smallest-prime-factor table and the ascending list of primes up to `n`.
#[derive(Debug, Clone)]
pub struct PrimeTables {
    n: u64,
    spf: Vec<u32>,
    primes: Vec<u32>,
}

impl PrimeTables {
    /// Linear sieve up to `n` with the default memory budget.
    pub fn build(n: u64) -> Result<Self> {
        Self::build_with_budget(n, DEFAULT_TABLE_BUDGET)
    }

    pub fn build_with_budget(n: u64, budget: u64) -> Result<Self> {
        if n < 2 {
            return Err(LabError::domain(format!("sieve limit must be at least 2, got {n}")));
        }
        if n > MAX_SIEVE_LIMIT {
            return Err(LabError::Range {
                what: "sieve limit",
                value: n as f64,
                limit: MAX_SIEVE_LIMIT as f64,
            });
        }
        let requested = (n + 1) * 4;
        if requested > budget {
            return Err(LabError::Capacity {
                what: "smallest-prime-factor table",
                requested,
                budget,
            });
        }
        let len = n as usize + 1;
        let mut spf = vec![0u32; len];
        let mut primes: Vec<u32> = Vec::with_capacity(prime_count_estimate(n));
        for i in 2..len {
            if spf[i] == 0 {
                spf[i] = i as u32;
                primes.push(i as u32);
            }
            let si = spf[i];
            for &p in &primes {
                if p > si {
                    break;
                }
                let m = i * p as usize;
                if m >= len {
                    break;
                }
                spf[m] = p;
            }
        }
        Ok(PrimeTables { n, spf, primes })
    }

    pub fn limit(&self) -> u64 {
        self.n
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    /// Smallest prime factor of `n` (2 ≤ n ≤ limit).
    #[inline]
    pub fn spf(&self, n: u64) -> u64 {
        self.spf[n as usize] as u64
    }

    #[inline]
    pub fn is_prime(&self, n: u64) -> bool {
        n >= 2 && n <= self.n && self.spf[n as usize] as u64 == n
    }

    /// Factorisation of `n` as `(p, k)` pairs with ascending `p`.
    pub fn factorize(&self, mut n: u64) -> Vec<(u64, u32)> {
        let mut out = Vec::new();
        while n > 1 {
            let p = self.spf(n);
            let mut k = 0;
            while n % p == 0 {
                n /= p;
                k += 1;
            }
            out.push((p, k));
        }
        out
    }

    /// If `n` is a prime power `p^k` returns `(p, k)`.
    pub fn prime_power(&self, n: u64) -> Option<(u64, u32)> {
        if n < 2 {
            return None;
        }
        let p = self.spf(n);
        let mut m = n;
        let mut k = 0;
        while m % p == 0 {
            m /= p;
            k += 1;
        }
        (m == 1).then_some((p, k))
    }

    /// von Mangoldt function Λ(n).
    pub fn mangoldt(&self, n: u64) -> f64 {
        match self.prime_power(n) {
            Some((p, _)) => (p as f64).ln(),
            None => 0.0,
        }
    }

    /// Number of primes ≤ x.
    pub fn prime_pi(&self, x: u64) -> usize {
        self.primes.partition_point(|&p| (p as u64) <= x)
    }

    /// Primes in the half-open range `(lo, hi]`.
    pub fn primes_in(&self, lo: u64, hi: u64) -> &[u32] {
        let a = self.primes.partition_point(|&p| (p as u64) <= lo);
        let b = self.primes.partition_point(|&p| (p as u64) <= hi);
        &self.primes[a..b.max(a)]
    }

    /// Checks that `x` lies inside the table.
    pub fn require(&self, x: u64) -> Result<()> {
        if x > self.n {
            return Err(LabError::Range {
                what: "argument",
                value: x as f64,
                limit: self.n as f64,
            });
        }
        Ok(())
    }
}

fn prime_count_estimate(n: u64) -> usize {
    if n < 17 {
        return 8;
    }
    let x = n as f64;
    (1.26 * x / x.ln()) as usize + 16
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_is_prime(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
    }

    #[test]
    fn small_table() {
        let t = PrimeTables::build(10).unwrap();
        assert_eq!(t.primes(), &[2, 3, 5, 7]);
        assert_eq!(t.spf(9), 3);
        assert_eq!(t.spf(10), 2);
    }

    #[test]
    fn counts_against_trial_division() {
        let t = PrimeTables::build(100).unwrap();
        assert_eq!(t.primes().len(), 25);
        let brute = (2..=20_000u64).filter(|&n| trial_is_prime(n)).count();
        let t = PrimeTables::build(20_000).unwrap();
        assert_eq!(t.primes().len(), brute);
    }

    #[test]
    fn million() {
        let t = PrimeTables::build(1_000_000).unwrap();
        assert_eq!(t.primes().len(), 78_498);
        for n in (2..1_000_000u64).step_by(997) {
            let p = t.spf(n);
            assert_eq!(n % p, 0);
            assert!(trial_is_prime(p));
            assert_eq!(t.is_prime(n), trial_is_prime(n));
        }
    }

    #[test]
    fn limits() {
        assert!(matches!(PrimeTables::build(1), Err(LabError::Domain(_))));
        assert!(matches!(
            PrimeTables::build(MAX_SIEVE_LIMIT + 1),
            Err(LabError::Range { .. })
        ));
        assert!(matches!(
            PrimeTables::build_with_budget(1_000_000, 1000),
            Err(LabError::Capacity { .. })
        ));
    }

    #[test]
    fn prime_powers_and_mangoldt() {
        let t = PrimeTables::build(1000).unwrap();
        assert_eq!(t.prime_power(8), Some((2, 3)));
        assert_eq!(t.prime_power(12), None);
        assert_eq!(t.prime_power(1), None);
        assert!((t.mangoldt(9) - 3f64.ln()).abs() < 1e-15);
        assert_eq!(t.mangoldt(10), 0.0);
        assert_eq!(t.primes_in(10, 20), &[11, 13, 17, 19]);
        assert_eq!(t.prime_pi(100), 25);
    }
}
