//! Prime counts in short intervals and progressions: Hoheisel windows,
//! ψ(x, χ), the exceptional-character condition, the hyperbola split of
//! Λ_{1_y}, the Friedlander–Iwaniec main term and a least-prime scan.

use num_complex::Complex64;
use serde::Serialize;

use crate::characters::{gcd, CharGroup, DirichletCharacter};
use crate::dirichlet::{maximize_raw, EvalOptions, LogFSeries, Powers, SeriesOptions};
use crate::error::{LabError, Result};
use crate::sieve::{psi_interval, FunctionSpec, PrimeTables};

/// ε used in the progression envelopes.
pub const ENVELOPE_EPSILON: f64 = 0.05;
/// Truncation point of the L(1, χ) series.
pub const L1_TERMS: u64 = 10_000_000;

fn require_table(tables: &PrimeTables, x: f64) -> Result<()> {
    if x.floor() > tables.limit() as f64 {
        return Err(LabError::Range { what: "x", value: x, limit: tables.limit() as f64 });
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct Window {
    pub index: usize,
    pub lo: f64,
    pub hi: f64,
    pub psi: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct HoheiselReport {
    pub x: f64,
    pub delta: f64,
    /// Window length x^{1−δ}.
    pub h: f64,
    pub window_count: usize,
    pub windows: Vec<Window>,
    /// Mean of ψ-increment / x^{1−δ}; `None` when there are no windows.
    pub mean_ratio: Option<f64>,
    /// δ^{1/5} + (log x)^{−1/20}
    pub envelope: f64,
}

impl HoheiselReport {
    /// One CSV record per window, with a header row.
    pub fn csv_rows(&self) -> (Vec<&'static str>, Vec<Vec<String>>) {
        let header = vec!["index", "lo", "hi", "psi", "ratio"];
        let rows = self
            .windows
            .iter()
            .map(|w| vec![w.index.to_string(), w.lo.to_string(), w.hi.to_string(), w.psi.to_string(), w.ratio.to_string()])
            .collect();
        (header, rows)
    }
}

/// Σ Λ(n) over consecutive windows (x + jh, x + (j+1)h], h = x^{1−δ}.
pub fn hoheisel_report(tables: &PrimeTables, x: f64, delta: f64, windows: usize) -> Result<HoheiselReport> {
    if !(x >= 2.0 && x.is_finite()) {
        return Err(LabError::domain(format!("x must be at least 2, got {x}")));
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(LabError::domain(format!("δ must lie in [0, 1), got {delta}")));
    }
    let h = x.powf(1.0 - delta);
    require_table(tables, x + windows as f64 * h)?;
    let ws: Vec<Window> = (0..windows)
        .map(|j| {
            let lo = x + j as f64 * h;
            let hi = lo + h;
            let psi = psi_interval(tables, lo, hi)?;
            Ok(Window { index: j, lo, hi, psi, ratio: psi / h })
        })
        .collect::<Result<_>>()?;
    let mean_ratio = (!ws.is_empty()).then(|| ws.iter().map(|w| w.ratio).sum::<f64>() / ws.len() as f64);
    Ok(HoheiselReport {
        x,
        delta,
        h,
        window_count: windows,
        windows: ws,
        mean_ratio,
        envelope: delta.powf(0.2) + x.ln().powf(-0.05),
    })
}

/// Σ_{n≤x, n≡a (q)} Λ(n) for every residue a = 0..q−1.
pub fn psi_classes(tables: &PrimeTables, q: u64, x: f64) -> Result<Vec<f64>> {
    require_table(tables, x)?;
    let mut out = vec![0.0; q as usize];
    if x < 2.0 {
        return Ok(out);
    }
    let xi = x.floor() as u64;
    for &p in tables.primes_in(0, xi) {
        let p = p as u64;
        let lp = (p as f64).ln();
        let mut m = p;
        loop {
            out[(m % q) as usize] += lp;
            match m.checked_mul(p) {
                Some(v) if v <= xi => m = v,
                _ => break,
            }
        }
    }
    Ok(out)
}

/// ψ(x, χ) = Σ_{n≤x} Λ(n)χ(n).
pub fn psi_chi(tables: &PrimeTables, chi: &DirichletCharacter, x: f64) -> Result<Complex64> {
    let classes = psi_classes(tables, chi.modulus(), x)?;
    Ok(classes
        .iter()
        .enumerate()
        .map(|(a, &v)| chi.eval(a as u64) * v)
        .sum())
}

#[derive(Debug, Clone, Serialize)]
pub struct CharacterScore {
    pub character: String,
    pub index: u64,
    pub score: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProgressionSets {
    pub q: u64,
    pub x: f64,
    #[serde(rename = "Q")]
    pub big_q: f64,
    #[serde(rename = "J")]
    pub j: usize,
    pub threshold_c: f64,
    pub threshold: f64,
    /// Non-principal characters whose maximized product exceeds the threshold.
    pub members: Vec<String>,
    pub member_indices: Vec<u64>,
    pub scores: Vec<CharacterScore>,
    /// x ≥ q¹⁰; advisory only.
    pub regime_ok: bool,
    pub more_than_j: bool,
}

/// max over |t| ≤ log x/log Q of Π_{Q≤p≤x}|1 − χ(p)/p^{1+it}| for every
/// non-principal χ, and the characters above threshold_c·(log x/log Q)^{1/√(J+1)}.
pub fn progression_character_sets(tables: &PrimeTables, q: u64, x: f64, j: usize, threshold_c: f64, opts: &EvalOptions) -> Result<ProgressionSets> {
    require_table(tables, x)?;
    if j == 0 {
        return Err(LabError::domain("J must be at least 1"));
    }
    if threshold_c.is_nan() || threshold_c < 0.0 {
        return Err(LabError::domain(format!("threshold constant must be ≥ 0, got {threshold_c}")));
    }
    let group = CharGroup::new(q)?;
    let lx = x.ln();
    let big_q = q as f64 * lx;
    let ratio = lx / big_q.ln();
    if ratio <= 1.0 {
        return Err(LabError::domain(format!("need x > Q = q log x (Q = {big_q})")));
    }
    let p_max = x.floor() as u64;
    let series_opts = SeriesOptions {
        p_max,
        abscissa: Some(1.0),
        prime_range: Some((big_q.ceil() as u64, p_max)),
        powers: Powers::Complete,
    };
    let threshold = threshold_c * ratio.powf(1.0 / ((j + 1) as f64).sqrt());
    let mut scores = Vec::new();
    for chi in group.characters().into_iter().filter(|c| !c.is_principal()) {
        let spec = FunctionSpec::moebius().twist(chi.clone());
        let series = LogFSeries::build_with(&spec, tables, x, &series_opts)?;
        let m = maximize_raw(&series, 0.0, ratio, false, &opts.grid)?;
        scores.push(CharacterScore { character: chi.to_string(), index: chi.index(), score: m.log_value.exp(), t: Some(m.t1) });
    }
    let members: Vec<&CharacterScore> = scores.iter().filter(|s| s.score > threshold).collect();
    Ok(ProgressionSets {
        q,
        x,
        big_q,
        j,
        threshold_c,
        threshold,
        members: members.iter().map(|s| s.character.clone()).collect(),
        member_indices: members.iter().map(|s| s.index).collect(),
        more_than_j: members.len() > j,
        scores,
        regime_ok: x >= (q as f64).powi(10),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ExceptionalVerdict {
    pub q: u64,
    pub x: f64,
    #[serde(rename = "Q")]
    pub big_q: f64,
    /// Σ_{Q≤p≤x}(1+χ(p))/p for every real non-principal χ.
    pub sums: Vec<CharacterScore>,
    /// 30·log log(log x/log Q) + C for C = 0 and C = 5 (−∞ when undefined).
    pub threshold_c0: f64,
    pub threshold_c5: f64,
    /// Character with the smallest sum if it lies at or below the threshold.
    pub flagged_c0: Option<String>,
    pub flagged_c5: Option<String>,
    pub verdict: String,
    /// x ≥ q² (advisory).
    pub regime_ok: bool,
}

/// The exceptional-character condition Σ_{Q≤p≤x}(1+χ(p))/p ≤ 30 log log(log x/log Q) + C.
pub fn exceptional_condition(tables: &PrimeTables, q: u64, x: f64) -> Result<ExceptionalVerdict> {
    require_table(tables, x)?;
    let group = CharGroup::new(q)?;
    let lx = x.ln();
    let big_q = q as f64 * lx;
    let ll = (lx / big_q.ln()).ln();
    let base = if ll > 0.0 { 30.0 * ll.ln() } else { f64::NEG_INFINITY };
    let primes = tables.primes_in(big_q.ceil() as u64 - 1, x.floor() as u64);
    let mut sums: Vec<CharacterScore> = group
        .real_characters()
        .into_iter()
        .filter(|c| !c.is_principal())
        .map(|chi| {
            let s: f64 = primes.iter().map(|&p| (1.0 + chi.eval(p as u64).re) / p as f64).sum();
            CharacterScore { character: chi.to_string(), index: chi.index(), score: s, t: None }
        })
        .collect();
    sums.sort_by(|a, b| a.score.total_cmp(&b.score).then(a.index.cmp(&b.index)));
    let flag = |c: f64| sums.first().filter(|s| s.score <= base + c).map(|s| s.character.clone());
    let flagged_c0 = flag(0.0);
    let flagged_c5 = flag(5.0);
    Ok(ExceptionalVerdict {
        q,
        x,
        big_q,
        verdict: flagged_c0.clone().unwrap_or_else(|| "none".to_string()),
        threshold_c0: base,
        threshold_c5: base + 5.0,
        flagged_c0,
        flagged_c5,
        sums,
        regime_ok: x >= (q as f64).powi(2),
    })
}

/// μ_y(k): μ(k) if every prime factor of k exceeds y, else 0.
pub fn mu_y(tables: &PrimeTables, k: u64, y: f64) -> f64 {
    if k == 1 {
        return 1.0;
    }
    let mut sign = 1.0;
    for (p, e) in tables.factorize(k) {
        if p as f64 <= y || e > 1 {
            return 0.0;
        }
        sign = -sign;
    }
    sign
}

/// 1_y(ℓ): 1 if every prime factor of ℓ exceeds y.
pub fn one_y(tables: &PrimeTables, l: u64, y: f64) -> bool {
    l == 1 || tables.spf(l) as f64 > y
}

#[derive(Debug, Clone, Serialize)]
pub struct HyperbolaCheck {
    pub direct: f64,
    /// Σ_{k≤K} μ_y(k) Σ_ℓ 1_y(ℓ) log ℓ
    pub term1: f64,
    /// Σ_{ℓ≤L} 1_y(ℓ) log ℓ Σ_{k>K} μ_y(k)
    pub term2: f64,
    pub residual: f64,
    /// Σ of |μ_y(k)·1_y(ℓ) log ℓ| over all pairs, the natural rounding scale.
    pub scale: f64,
    pub relative_residual: f64,
    /// y² ≤ min(K, L) (advisory).
    pub advisory_ok: bool,
    pub window: [f64; 2],
}

/// Σ_{x<n≤x+h} Λ_{1_y}(n) directly and via the hyperbola split at (K, L).
pub fn hyperbola_check(tables: &PrimeTables, x: f64, h: f64, y: f64, k_cut: f64, l_cut: f64) -> Result<HyperbolaCheck> {
    if !(x >= 1.0 && h > 0.0 && y >= 1.0 && k_cut >= 1.0 && l_cut >= 1.0) {
        return Err(LabError::domain("need x, y, K, L ≥ 1 and h > 0"));
    }
    if k_cut * l_cut < x + h {
        return Err(LabError::domain(format!("K·L = {} must cover the window end x + h = {}", k_cut * l_cut, x + h)));
    }
    require_table(tables, x + h)?;
    let lo = x.floor() as u64;
    let hi = (x + h).floor() as u64;
    let kk = k_cut.floor() as u64;
    let ll = l_cut.floor() as u64;

    let mut direct = 0.0;
    for n in lo + 1..=hi {
        if let Some((p, _)) = tables.prime_power(n) {
            if p as f64 > y {
                direct += (p as f64).ln();
            }
        }
    }

    let mut term1 = 0.0;
    let mut scale = 0.0;
    for k in 1..=kk.min(hi) {
        let m = mu_y(tables, k, y);
        if m == 0.0 {
            continue;
        }
        for l in lo / k + 1..=hi / k {
            if l * k > lo && one_y(tables, l, y) {
                let v = m * (l as f64).ln();
                term1 += v;
                scale += v.abs();
            }
        }
    }
    let mut term2 = 0.0;
    for l in 1..=ll.min(hi) {
        if !one_y(tables, l, y) {
            continue;
        }
        let lg = (l as f64).ln();
        let kstart = (lo / l + 1).max(kk + 1);
        for k in kstart..=hi / l {
            if k * l <= lo {
                continue;
            }
            let m = mu_y(tables, k, y);
            if m != 0.0 {
                term2 += m * lg;
                scale += lg;
            }
        }
    }
    let residual = (direct - (term1 + term2)).abs();
    Ok(HyperbolaCheck {
        direct,
        term1,
        term2,
        residual,
        scale,
        relative_residual: residual / scale.max(1.0),
        advisory_ok: y * y <= k_cut.min(l_cut),
        window: [x, x + h],
    })
}

/// a(n) = Σ_{d|n} χ(d).
pub fn fi_a(tables: &PrimeTables, chi: &DirichletCharacter, n: u64) -> Complex64 {
    let mut out = Complex64::new(1.0, 0.0);
    for (p, e) in tables.factorize(n) {
        let c = chi.eval(p);
        let mut s = Complex64::new(1.0, 0.0);
        let mut pw = Complex64::new(1.0, 0.0);
        for _ in 0..e {
            pw *= c;
            s += pw;
        }
        out *= s;
    }
    out
}

/// L(1, χ) = Σ_{n≤N} χ(n)/n for non-principal χ, with the Abel-summation tail
/// bound q/N.
pub fn l_one(chi: &DirichletCharacter, terms: u64) -> Result<(Complex64, f64)> {
    if chi.is_principal() {
        return Err(LabError::domain("L(1, χ) diverges for the principal character"));
    }
    let q = chi.modulus();
    let vals = chi.residue_values();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut r = 1 % q as usize;
    for n in 1..=terms {
        let v = vals[r];
        if v.re != 0.0 || v.im != 0.0 {
            acc += v / n as f64;
        }
        r += 1;
        if r == q as usize {
            r = 0;
        }
    }
    Ok((acc, q as f64 / terms as f64))
}

#[derive(Debug, Clone, Serialize)]
pub struct FiEstimate {
    pub q: u64,
    pub a: u64,
    pub x: f64,
    pub z: f64,
    pub character: String,
    pub pi_exact: u64,
    pub fi_rhs: f64,
    pub ratio: f64,
    pub l1: f64,
    pub l1_tail_bound: f64,
    pub euler_product: f64,
    /// log z/log x + 1/z + Σ_{z<p≤x, χ(p)=1} 1/p
    pub envelope: f64,
    pub z_ok: bool,
}

/// Friedlander–Iwaniec main term for π(x; q, a) against the exact count.
pub fn fi_estimate(
    tables: &PrimeTables,
    q: u64,
    a: u64,
    x: f64,
    z: f64,
    chi: Option<&DirichletCharacter>,
) -> Result<FiEstimate> {
    require_table(tables, x)?;
    let group = CharGroup::new(q)?;
    if gcd(a % q, q) != 1 {
        return Err(LabError::domain(format!("gcd({a}, {q}) > 1")));
    }
    let chi = match chi {
        Some(c) => c.clone(),
        None => group.quadratic(1)?,
    };
    if !chi.is_real() || chi.is_principal() || chi.modulus() != q {
        return Err(LabError::domain(format!("{chi} is not a real non-principal character modulo {q}")));
    }
    if (chi.eval(a) - 1.0).norm() > 1e-12 {
        return Err(LabError::domain(format!("χ(a) must equal 1; χ({a}) = {}", chi.eval(a))));
    }
    let xi = x.floor() as u64;
    let pi_exact = tables.primes_in(0, xi).iter().filter(|&&p| p as u64 % q == a % q).count() as u64;
    let (l1, tail) = l_one(&chi, L1_TERMS)?;
    let mut product = 1.0;
    for &p in tables.primes_in(0, z.floor() as u64) {
        let p = p as u64;
        if q % p == 0 {
            continue;
        }
        product *= (1.0 - 1.0 / p as f64) * (1.0 - chi.eval(p).re / p as f64);
    }
    let fi_rhs = l1.re * x / q as f64 * product;
    let tail_sum: f64 = tables
        .primes_in(z.floor() as u64, xi)
        .iter()
        .filter(|&&p| chi.eval(p as u64).re > 0.5)
        .map(|&p| 1.0 / p as f64)
        .sum();
    Ok(FiEstimate {
        q,
        a,
        x,
        z,
        character: chi.to_string(),
        pi_exact,
        fi_rhs,
        ratio: pi_exact as f64 / fi_rhs,
        l1: l1.re,
        l1_tail_bound: tail,
        euler_product: product,
        envelope: z.ln() / x.ln() + 1.0 / z + tail_sum,
        z_ok: z <= x.powf(0.125) * (1.0 + 1e-12),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LeastPrime {
    pub a: u64,
    pub prime: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LinnikReport {
    pub q: u64,
    pub cap: u64,
    pub least: Vec<LeastPrime>,
    pub all_found: bool,
    /// max over a of log p/log q (undefined for q = 1).
    pub max_exponent: Option<f64>,
}

/// Least prime in every reduced class modulo q, scanning primes up to `cap`.
pub fn linnik_search(tables: &PrimeTables, q: u64, cap: u64) -> Result<LinnikReport> {
    if cap > tables.limit() {
        return Err(LabError::Range { what: "cap", value: cap as f64, limit: tables.limit() as f64 });
    }
    if q == 0 {
        return Err(LabError::domain("modulus must be positive"));
    }
    let mut least: Vec<Option<u64>> = vec![None; q as usize];
    let reduced: Vec<u64> = (0..q).filter(|&a| gcd(a, q) == 1).collect();
    let mut missing = reduced.len();
    for &p in tables.primes_in(0, cap) {
        let r = (p as u64 % q) as usize;
        if least[r].is_none() && gcd(r as u64, q) == 1 {
            least[r] = Some(p as u64);
            missing -= 1;
            if missing == 0 {
                break;
            }
        }
    }
    let least: Vec<LeastPrime> = reduced.iter().map(|&a| LeastPrime { a, prime: least[a as usize] }).collect();
    let all_found = least.iter().all(|l| l.prime.is_some());
    let max_exponent = (q > 1).then(|| {
        least
            .iter()
            .filter_map(|l| l.prime)
            .map(|p| (p as f64).ln() / (q as f64).ln())
            .fold(0.0, f64::max)
    });
    Ok(LinnikReport { q, cap, least, all_found, max_exponent })
}

#[derive(Debug, Clone, Serialize)]
pub struct ProgressionResidue {
    pub a: u64,
    pub lhs: f64,
    pub residual: f64,
    pub relative: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProgressionIdentity {
    pub q: u64,
    pub x: f64,
    pub members: Vec<String>,
    pub residues: Vec<ProgressionResidue>,
    pub max_relative: f64,
    /// (x/φ(q))(log Q/log x)^{1−1/√(J+1)−ε}
    pub envelope: f64,
    pub epsilon: f64,
}

/// ψ(x; q, a) − φ(q)^{-1}Σ_{χ∈X} χ̄(a)ψ(x, χ) − x/φ(q) for every reduced a,
/// for a given set X of characters.
pub fn progression_identity_with_set(tables: &PrimeTables, q: u64, x: f64, set: &[DirichletCharacter], j: usize) -> Result<ProgressionIdentity> {
    let group = CharGroup::new(q)?;
    let classes = psi_classes(tables, q, x)?;
    let phi = group.phi() as f64;
    let psis: Vec<Complex64> = set
        .iter()
        .map(|c| classes.iter().enumerate().map(|(a, &v)| c.eval(a as u64) * v).sum())
        .collect();
    let main = x / phi;
    let residues: Vec<ProgressionResidue> = (0..q)
        .filter(|&a| group.is_unit(a))
        .map(|a| {
            let corr: Complex64 = set.iter().zip(&psis).map(|(c, p)| c.eval(a).conj() * p).sum::<Complex64>() / phi;
            let lhs = classes[a as usize] - corr.re;
            let residual = lhs - main;
            ProgressionResidue { a, lhs, residual, relative: residual.abs() / main }
        })
        .collect();
    let lx = x.ln();
    let big_q = q as f64 * lx;
    let expo = 1.0 - 1.0 / ((j + 1) as f64).sqrt() - ENVELOPE_EPSILON;
    Ok(ProgressionIdentity {
        q,
        x,
        members: set.iter().map(|c| c.to_string()).collect(),
        max_relative: residues.iter().map(|r| r.relative).fold(0.0, f64::max),
        residues,
        envelope: main * (big_q.ln() / lx).powf(expo),
        epsilon: ENVELOPE_EPSILON,
    })
}

/// The progression identity with X taken from [`progression_character_sets`].
pub fn progression_identity(tables: &PrimeTables, q: u64, x: f64, j: usize, threshold_c: f64, opts: &EvalOptions) -> Result<ProgressionIdentity> {
    let sets = progression_character_sets(tables, q, x, j, threshold_c, opts)?;
    let group = CharGroup::new(q)?;
    let set: Vec<DirichletCharacter> = sets.member_indices.iter().map(|&i| group.character(i)).collect::<Result<_>>()?;
    progression_identity_with_set(tables, q, x, &set, j)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn least_primes() {
        let t = PrimeTables::build(1000).unwrap();
        let r = linnik_search(&t, 4, 1000).unwrap();
        assert_eq!(r.least.iter().find(|l| l.a == 3).unwrap().prime, Some(3));
        let r = linnik_search(&t, 10, 1000).unwrap();
        assert_eq!(r.least.iter().find(|l| l.a == 1).unwrap().prime, Some(11));
    }

    #[test]
    fn mu_y_and_one_y() {
        let t = PrimeTables::build(1000).unwrap();
        assert_eq!(mu_y(&t, 1, 5.0), 1.0);
        assert_eq!(mu_y(&t, 7 * 11, 5.0), 1.0);
        assert_eq!(mu_y(&t, 3 * 11, 5.0), 0.0);
        assert_eq!(mu_y(&t, 49, 5.0), 0.0);
        assert!(one_y(&t, 49, 5.0) && !one_y(&t, 50, 5.0));
    }

    #[test]
    fn empty_hoheisel() {
        let t = PrimeTables::build(1000).unwrap();
        let r = hoheisel_report(&t, 500.0, 0.2, 0).unwrap();
        assert!(r.mean_ratio.is_none());
    }
}
