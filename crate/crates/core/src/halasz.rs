//! Both sides of the Halász-type mean value bounds: full sums, short
//! intervals, progressions, the Lipschitz estimate, exceptional character
//! sets and the pretentious large sieve.
//!
//! Every right-hand side uses calibration constant 1; reports record the ratio
//! lhs/rhs and never assert the implied constant.

use num_complex::Complex64;
use serde::Serialize;

use crate::characters::{character_sums_from_classes, gcd, residue_class_sums, CharGroup, DirichletCharacter};
use crate::dirichlet::{m_chi_of, m_delta_of, m_of, maximize_raw, EvalOptions, LogFSeries, MaxReport};
use crate::error::{LabError, Result};
use crate::sieve::{partial_sum, PrimeTables, SievedFunction};

/// Points per decade of the geometric σ-grid in the integral form.
pub const SIGMA_POINTS_PER_DECADE: usize = 32;
/// Geometric x-points scanned in [√X, X] for the first exceptional set.
pub const EXCEPTIONAL_X_POINTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Integral over σ of the maximum of |F/s|.
    Integral,
    /// (1+M)e^{−M} form.
    Simple,
}

impl std::str::FromStr for Mode {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "integral" => Ok(Mode::Integral),
            "simple" => Ok(Mode::Simple),
            _ => Err(LabError::Parse(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Components {
    #[serde(rename = "M", skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    pub main_term: f64,
    pub error_term: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub integral: Option<f64>,
    /// |I(32/decade) − I(16/decade)| / I(32/decade).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub integral_self_convergence: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub maximizer: Option<MaxReport>,
    /// Index of the character attaining M_q (progression bounds).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub minimizing_character: Option<String>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Params {
    pub spec: String,
    pub x: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interval: Option<[f64; 2]>,
    pub p_max: u64,
    pub kappa: f64,
}

/// lhs = |mean value|, rhs = the bound with constant 1.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub components: Components,
    pub params: Params,
}

fn finish(lhs: f64, components: Components, params: Params) -> Result<BoundReport> {
    let rhs = components.main_term + components.error_term;
    if !(rhs > 0.0 && rhs.is_finite() && lhs.is_finite()) {
        return Err(LabError::Consistency(format!("non-finite or non-positive bound: lhs {lhs}, rhs {rhs}")));
    }
    Ok(BoundReport { lhs, rhs, ratio: lhs / rhs, components, params })
}

fn params(sf: &SievedFunction, x: f64, p_max: u64) -> Params {
    Params { spec: sf.spec().to_string(), x, p_max, kappa: sf.spec().kappa, ..Default::default() }
}

fn require_x(x: f64) -> Result<()> {
    if !(x.is_finite() && x >= 16.0) {
        return Err(LabError::domain(format!("x must be at least 16, got {x}")));
    }
    Ok(())
}

/// ∫_{1/log x}^{1} max_{|t|≤(log x)^κ}|F(1+σ+it)/(1+σ+it)| dσ/σ, trapezoid in
/// log σ on a geometric grid; returns (integral, half-density integral, nodes).
pub fn sigma_integral(series: &LogFSeries, t_range: f64, opts: &EvalOptions) -> Result<(f64, f64, usize)> {
    let lx = series.x().ln();
    let lo = 1.0 / lx;
    let decades = lx.log10();
    let mut n = (SIGMA_POINTS_PER_DECADE as f64 * decades).ceil() as usize;
    n = n.max(2);
    n += n % 2;
    let du = (1.0 / lo).ln() / n as f64;
    let c0 = series.abscissa();
    let g: Vec<f64> = (0..=n)
        .map(|i| {
            let sigma = lo * (du * i as f64).exp();
            let delta = (1.0 + sigma - c0).max(0.0);
            Ok(maximize_raw(series, delta, t_range, true, &opts.grid)?.log_value.exp())
        })
        .collect::<Result<_>>()?;
    let trap = |step: usize| {
        let h = du * step as f64;
        let pts: Vec<f64> = g.iter().step_by(step).copied().collect();
        let inner: f64 = pts[1..pts.len() - 1].iter().sum();
        h * (0.5 * (pts[0] + pts[pts.len() - 1]) + inner)
    };
    Ok((trap(1), trap(2), n + 1))
}

/// Halász bound for Σ_{n≤x} f(n).
pub fn halasz_report(sf: &SievedFunction, tables: &PrimeTables, x: f64, mode: Mode, opts: &EvalOptions) -> Result<BoundReport> {
    require_x(x)?;
    let spec = sf.spec();
    let kappa = spec.kappa;
    let lhs = partial_sum(sf, x)?.norm();
    let lx = x.ln();
    let error_term = x * lx.ln().powf(kappa) / lx;
    let p_max = opts.p_max_for(x);
    let mut c = Components { error_term, ..Default::default() };
    match mode {
        Mode::Simple => {
            let r = m_of(spec, tables, x, opts)?;
            c.main_term = (1.0 + r.m) * (-r.m).exp() * x * lx.powf(kappa - 1.0);
            c.m = Some(r.m);
            c.maximizer = Some(r);
        }
        Mode::Integral => {
            let series = LogFSeries::build(spec, tables, x, p_max)?;
            let (i1, i2, nodes) = sigma_integral(&series, lx.powf(kappa), opts)?;
            c.main_term = x / lx * i1;
            c.integral = Some(i1);
            c.integral_self_convergence = Some((i1 - i2).abs() / i1);
            c.sigma_points = Some(nodes);
        }
    }
    finish(lhs, c, params(sf, x, p_max))
}

/// Short-interval bound for Σ_{x<n≤x+x^{1−δ}} f(n).
pub fn short_interval_report(sf: &SievedFunction, tables: &PrimeTables, x: f64, delta: f64, opts: &EvalOptions) -> Result<BoundReport> {
    require_x(x)?;
    if !(delta > 0.0 && delta < 0.25) {
        return Err(LabError::domain(format!("δ must lie in (0, 1/4), got {delta}")));
    }
    let h = x.powf(1.0 - delta);
    let lhs = sf.interval_sum(x, x + h)?.norm();
    let spec = sf.spec();
    let kappa = spec.kappa;
    let lx = x.ln();
    let r = m_delta_of(spec, tables, x, delta, opts)?;
    let scale = h / lx;
    let c = Components {
        m: Some(r.m),
        main_term: scale * (1.0 + r.m) * (-r.m).exp() * lx.powf(kappa),
        error_term: scale * (delta * lx + lx.ln()).powf(kappa),
        maximizer: Some(r),
        ..Default::default()
    };
    let mut p = params(sf, x, opts.p_max_for(x));
    p.delta = Some(delta);
    p.interval = Some([x, x + h]);
    finish(lhs, c, p)
}

fn check_progression(q: u64, a: u64) -> Result<()> {
    if q == 0 {
        return Err(LabError::domain("modulus must be positive"));
    }
    if gcd(a % q, q) != 1 {
        return Err(LabError::domain(format!("gcd({a}, {q}) > 1")));
    }
    Ok(())
}

/// Σ_{n≤x, n≡a (q)} f(n).
pub fn progression_sum(sf: &SievedFunction, x: f64, q: u64, a: u64) -> Result<Complex64> {
    let n = sf.floor_index(x)?;
    let a = (a % q) as usize;
    let vals = sf.values();
    let start = if a == 0 { q as usize } else { a };
    Ok((start..=n).step_by(q as usize).map(|i| vals[i]).sum())
}

/// Progression bound for Σ_{n≤x, n≡a (q)} f(n), with M_q minimized over every
/// character modulo q.
pub fn ap_report(sf: &SievedFunction, tables: &PrimeTables, x: f64, q: u64, a: u64, opts: &EvalOptions) -> Result<BoundReport> {
    require_x(x)?;
    check_progression(q, a)?;
    if x < (q as f64).powi(4) {
        return Err(LabError::domain(format!("need x ≥ q⁴ = {}", (q as f64).powi(4))));
    }
    let group = CharGroup::new(q)?;
    let spec = sf.spec();
    let kappa = spec.kappa;
    let lhs = progression_sum(sf, x, q, a)?.norm();
    let mut best: Option<(MaxReport, DirichletCharacter)> = None;
    for chi in group.characters() {
        let r = m_chi_of(spec, &chi, tables, x, opts)?;
        if best.as_ref().map_or(true, |(b, _)| r.m < b.m) {
            best = Some((r, chi));
        }
    }
    let (r, chi) = best.expect("at least one character");
    let lx = x.ln();
    let scale = x / lx / group.phi() as f64;
    let c = Components {
        m: Some(r.m),
        main_term: scale * (1.0 + r.m) * (-r.m).exp() * lx.powf(kappa),
        error_term: scale * (q as f64 * lx).ln().powf(kappa),
        maximizer: Some(r),
        minimizing_character: Some(chi.to_string()),
        ..Default::default()
    };
    let mut p = params(sf, x, opts.p_max_for(x));
    p.q = Some(q);
    p.a = Some(a);
    finish(lhs, c, p)
}

#[derive(Debug, Clone, Serialize)]
pub struct LipschitzReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub t1: f64,
    pub exponent: f64,
    pub w: f64,
    pub x: f64,
    pub nonnegative: bool,
    pub maximizer: MaxReport,
}

/// t₁: the point of |t| ≤ (log x)^κ maximizing |F(1+1/log x+it)| (no
/// denominator).
pub fn t1_of(sf_spec: &crate::sieve::FunctionSpec, tables: &PrimeTables, x: f64, opts: &EvalOptions) -> Result<MaxReport> {
    let series = LogFSeries::build(sf_spec, tables, x, opts.p_max_for(x))?;
    crate::dirichlet::maximize_over_t(&series, 0.0, x.ln().powf(sf_spec.kappa), false, &opts.grid)
}

/// Variation of the renormalised mean value between x/w and x.
pub fn lipschitz_report(sf: &SievedFunction, tables: &PrimeTables, x: f64, w: f64, opts: &EvalOptions) -> Result<LipschitzReport> {
    require_x(x)?;
    if !(w >= 1.0 && w <= x.cbrt() * (1.0 + 1e-12)) {
        return Err(LabError::domain(format!("w must lie in [1, x^(1/3)], got {w}")));
    }
    let spec = sf.spec();
    let kappa = spec.kappa;
    let maximizer = t1_of(spec, tables, x, opts)?;
    let t1 = maximizer.t1;
    let xw = x / w;
    let norm = |y: f64| Complex64::new(y, 0.0) * Complex64::cis(t1 * y.ln());
    let lhs = if w == 1.0 {
        0.0
    } else {
        (partial_sum(sf, x)? / norm(x) - partial_sum(sf, xw)? / norm(xw)).norm()
    };
    let nonnegative = spec.is_nonnegative();
    let pi = std::f64::consts::PI;
    let exponent = if nonnegative { kappa * (1.0 - 1.0 / pi) } else { kappa * (1.0 - 2.0 / pi) }.min(1.0);
    let lx = x.ln();
    let rhs = ((w.ln() + lx.ln().powi(2)) / lx).powf(exponent) * lx.powf(kappa - 1.0) * (lx / (1.0 + w.ln())).ln();
    Ok(LipschitzReport { lhs, rhs, ratio: lhs / rhs, t1, exponent, w, x, nonnegative, maximizer })
}

#[derive(Debug, Clone, Serialize)]
pub struct RankedCharacter {
    pub character: String,
    pub index: u64,
    pub score: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExceptionalSets {
    #[serde(rename = "J")]
    pub j: usize,
    pub q: u64,
    #[serde(rename = "X")]
    pub big_x: f64,
    /// Largest max_{√X≤x≤X}|S_f(x,χ)|/x.
    pub x1: Vec<RankedCharacter>,
    /// Smallest M_{χ̄}(X).
    pub x2: Vec<RankedCharacter>,
    /// Largest max_{|t|≤(log X)^κ}|𝓛_{χ̄}(1+1/log X+it)|.
    pub x3: Vec<RankedCharacter>,
    /// Full rankings, in the same orders.
    pub ranking1: Vec<RankedCharacter>,
    pub ranking2: Vec<RankedCharacter>,
    pub ranking3: Vec<RankedCharacter>,
    /// y used for 𝓛: q⁴(log X)^{2κ+4}, capped at √X.
    pub y: f64,
    pub y_capped: bool,
    pub x_points: usize,
    pub p_max: u64,
}

fn rank(chars: &[DirichletCharacter], scores: Vec<f64>, descending: bool) -> Vec<RankedCharacter> {
    let mut out: Vec<RankedCharacter> = chars
        .iter()
        .zip(scores)
        .map(|(c, s)| RankedCharacter { character: c.to_string(), index: c.index(), score: s })
        .collect();
    out.sort_by(|a, b| {
        let o = a.score.total_cmp(&b.score);
        (if descending { o.reverse() } else { o }).then(a.index.cmp(&b.index))
    });
    out
}

/// |S_f(x_k, χ)|/x_k for every χ and geometric points x_k in [lo, hi].
pub fn scan_character_sums(sf: &SievedFunction, q: u64, lo: f64, hi: f64, points: usize) -> Result<(Vec<f64>, Vec<Vec<Complex64>>)> {
    sf.floor_index(hi)?;
    let group = CharGroup::new(q)?;
    let chars = group.characters();
    let xs: Vec<f64> = (0..points)
        .map(|k| if points == 1 { hi } else { lo * (hi / lo).powf(k as f64 / (points - 1) as f64) })
        .collect();
    let vals = sf.values();
    let qq = q as usize;
    let mut classes = vec![Complex64::new(0.0, 0.0); qq];
    let mut out = Vec::with_capacity(points);
    let mut n = 1usize;
    for &x in &xs {
        let upto = sf.floor_index(x)?;
        while n <= upto {
            classes[n % qq] += vals[n];
            n += 1;
        }
        out.push(character_sums_from_classes(&classes, &chars));
    }
    Ok((xs, out))
}

/// The three exceptional-character sets for f modulo q at scale X.
pub fn exceptional_sets(
    sf: &SievedFunction,
    tables: &PrimeTables,
    q: u64,
    big_x: f64,
    j: usize,
    opts: &EvalOptions,
) -> Result<ExceptionalSets> {
    require_x(big_x)?;
    if big_x < (q as f64).powi(4) {
        return Err(LabError::domain(format!("need X ≥ q⁴ = {}", (q as f64).powi(4))));
    }
    if j == 0 {
        return Err(LabError::domain("J must be at least 1"));
    }
    let spec = sf.spec();
    let kappa = spec.kappa;
    let group = CharGroup::new(q)?;
    let chars = group.characters();
    let lx = big_x.ln();

    let (xs, sums) = scan_character_sums(sf, q, big_x.sqrt(), big_x, EXCEPTIONAL_X_POINTS)?;
    let s1: Vec<f64> = (0..chars.len())
        .map(|i| xs.iter().zip(&sums).map(|(x, s)| s[i].norm() / x).fold(0.0, f64::max))
        .collect();

    let s2: Vec<f64> = chars
        .iter()
        .map(|c| Ok(m_chi_of(spec, &c.conj(), tables, big_x, opts)?.m))
        .collect::<Result<_>>()?;

    let y_full = (q as f64).powi(4) * lx.powf(2.0 * kappa + 4.0);
    let y = y_full.min(big_x.sqrt());
    let p_max = opts.p_max_for(big_x);
    let restricted = spec.clone().restrict_large(y.floor() as u64);
    let s3: Vec<f64> = chars
        .iter()
        .map(|c| {
            let series = LogFSeries::build(&restricted.clone().twist(c.conj()), tables, big_x, p_max)?;
            Ok(maximize_raw(&series, 0.0, lx.powf(kappa), false, &opts.grid)?.log_value.exp())
        })
        .collect::<Result<_>>()?;

    let ranking1 = rank(&chars, s1, true);
    let ranking2 = rank(&chars, s2, false);
    let ranking3 = rank(&chars, s3, true);
    let take = |r: &Vec<RankedCharacter>| r.iter().take(j).cloned().collect();
    Ok(ExceptionalSets {
        j,
        q,
        big_x,
        x1: take(&ranking1),
        x2: take(&ranking2),
        x3: take(&ranking3),
        ranking1,
        ranking2,
        ranking3,
        y,
        y_capped: y < y_full,
        x_points: EXCEPTIONAL_X_POINTS,
        p_max,
    })
}

/// E_{f,X}(x; q, a) = Σ_{n≤x, n≡a} f(n) − φ(q)^{-1} Σ_{χ∈X} χ(a) S_f(x,χ).
pub fn e_term(sf: &SievedFunction, xset: &[DirichletCharacter], x: f64, q: u64, a: u64) -> Result<Complex64> {
    check_progression(q, a)?;
    let group = CharGroup::new(q)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for chi in xset {
        if chi.modulus() != q {
            return Err(LabError::domain(format!("character {chi} is not modulo {q}")));
        }
        acc += chi.eval(a) * crate::characters::s_f_chi(sf, chi, x)?;
    }
    Ok(progression_sum(sf, x, q, a)? - acc / group.phi() as f64)
}

#[derive(Debug, Clone, Serialize)]
pub struct PlsIdentity {
    /// φ(q)^{-1} Σ_{χ∉X}|S_f(x,χ)|²
    pub character_side: f64,
    /// Σ_{(a,q)=1}|E_{f,X}(x;q,a)|²
    pub residue_side: f64,
    pub residual: f64,
    pub relative_residual: f64,
}

/// Both sides of the large-sieve identity for an arbitrary excluded set X.
pub fn pls_identity(sf: &SievedFunction, q: u64, x: f64, xset: &[DirichletCharacter]) -> Result<PlsIdentity> {
    let group = CharGroup::new(q)?;
    let chars = group.characters();
    let classes = residue_class_sums(sf, q, x)?;
    let sums = character_sums_from_classes(&classes, &chars);
    let phi = group.phi() as f64;
    let character_side: f64 = chars
        .iter()
        .zip(&sums)
        .filter(|(c, _)| !xset.contains(c))
        .map(|(_, s)| s.norm_sqr())
        .sum::<f64>()
        / phi;
    let mut residue_side = 0.0;
    for a in 0..q {
        if !group.is_unit(a) {
            continue;
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (c, s) in chars.iter().zip(&sums) {
            if xset.contains(c) {
                acc += c.eval(a) * s;
            }
        }
        residue_side += (classes[a as usize] - acc / phi).norm_sqr();
    }
    let residual = (character_side - residue_side).abs();
    let scale = character_side.abs().max(residue_side.abs()).max(1.0);
    Ok(PlsIdentity { character_side, residue_side, residual, relative_residual: residual / scale })
}

#[derive(Debug, Clone, Serialize)]
pub struct PlsReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub excluded: Vec<String>,
    pub identity: PlsIdentity,
    #[serde(rename = "Q")]
    pub big_q: f64,
    #[serde(rename = "J")]
    pub j: usize,
    pub x: f64,
    pub q: u64,
}

/// The pretentious large sieve with X = x and the first exceptional set removed.
pub fn pls_report(sf: &SievedFunction, tables: &PrimeTables, q: u64, x: f64, j: usize, opts: &EvalOptions) -> Result<PlsReport> {
    let sets = exceptional_sets(sf, tables, q, x, j, opts)?;
    let group = CharGroup::new(q)?;
    let excluded: Vec<DirichletCharacter> =
        sets.x1.iter().map(|r| group.character(r.index)).collect::<Result<_>>()?;
    let identity = pls_identity(sf, q, x, &excluded)?;
    let lhs = identity.character_side * group.phi() as f64;
    let kappa = sf.spec().kappa;
    let lx = x.ln();
    let big_q = q as f64 * lx;
    let lq = big_q.ln();
    let inner = (lq / lx).powf(kappa * (1.0 - 1.0 / ((j + 1) as f64).sqrt())) * (lx / lq).ln();
    let rhs = (x * lx.powf(kappa - 1.0)).powi(2) * inner.powi(2);
    Ok(PlsReport {
        lhs,
        rhs,
        ratio: lhs / rhs,
        excluded: excluded.iter().map(|c| c.to_string()).collect(),
        identity,
        big_q,
        j,
        x,
        q,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sieve::{sieve_function, FunctionSpec};

    #[test]
    fn progression_sum_counts() {
        let t = PrimeTables::build(100).unwrap();
        let one = sieve_function(&FunctionSpec::one(), &t, 100).unwrap();
        assert_eq!(progression_sum(&one, 100.0, 3, 1).unwrap().re, 34.0);
        assert_eq!(progression_sum(&one, 100.0, 1, 0).unwrap().re, 100.0);
    }

    #[test]
    fn e_term_limits() {
        let t = PrimeTables::build(3000).unwrap();
        let sf = sieve_function(&FunctionSpec::moebius(), &t, 3000).unwrap();
        let g = CharGroup::new(12).unwrap();
        let all = g.characters();
        assert!(e_term(&sf, &all, 3000.0, 12, 5).unwrap().norm() < 1e-9);
        let raw = e_term(&sf, &[], 3000.0, 12, 5).unwrap();
        assert_eq!(raw, progression_sum(&sf, 3000.0, 12, 5).unwrap());
        assert!(matches!(e_term(&sf, &[], 3000.0, 12, 4), Err(LabError::Domain(_))));
    }
}
