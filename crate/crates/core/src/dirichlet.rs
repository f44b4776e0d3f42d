//! Prime-power expansions of log F(s) and maximization of |F| along
//! vertical segments.
//!
//! For f in C(κ), log F(s) = Σ_{n≥2} Λ_f(n)/(n^s log n). A [`LogFSeries`]
//! stores the weights w_n = Λ_f(n)/(n^σ₀ log n) at a base abscissa σ₀, so that
//! log F(σ₀+δ+it) = Σ w_n e^{−(δ+it) log n}. The computational F is always the
//! sum truncated at n ≤ P_max; every report carries P_max.

use std::cmp::Ordering;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::characters::DirichletCharacter;
use crate::error::{LabError, Result};
use crate::sieve::{lambda_f_powers, FunctionSpec, PrimeTables};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub const DEFAULT_POINT_BUDGET: u64 = 10_000_000;
/// Default upper limit for P_max when none is configured.
pub const DEFAULT_PMAX_CAP: u64 = 10_000_000;
/// Smallest M accepted before a report is rejected as inconsistent.
pub const M_FLOOR: f64 = -0.5;

/// Number of grid points evaluated together by incremental phase rotation.
const BLOCK: usize = 64;
/// Terms per chunk for point evaluations; fixed so sums do not depend on the
/// thread count.
const CHUNK: usize = 4096;
/// Weights below this magnitude are dropped when complete Euler factors are
/// expanded.
const COMPLETE_CUTOFF: f64 = 1e-20;

/// c₀ = 1 + 1/log x.
pub fn c0_of(x: f64) -> f64 {
    1.0 + 1.0 / x.ln()
}

fn require_anchor(x: f64) -> Result<()> {
    if !(x.is_finite() && x > std::f64::consts::E) {
        return Err(LabError::domain(format!("anchor x must be finite and > e, got {x}")));
    }
    Ok(())
}

/// Which prime powers enter the series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Powers {
    /// Every prime power n ≤ P_max.
    UpTo,
    /// For each prime p ≤ P_max, all powers p^k (full Euler factors).
    Complete,
}

/// Construction parameters for a [`LogFSeries`].
#[derive(Debug, Clone)]
pub struct SeriesOptions {
    pub p_max: u64,
    /// Base abscissa σ₀; defaults to c₀ = 1 + 1/log x.
    pub abscissa: Option<f64>,
    /// Only primes with lo ≤ p ≤ hi contribute.
    pub prime_range: Option<(u64, u64)>,
    pub powers: Powers,
}

impl SeriesOptions {
    pub fn up_to(p_max: u64) -> Self {
        SeriesOptions { p_max, abscissa: None, prime_range: None, powers: Powers::UpTo }
    }
}

#[derive(Debug, Clone)]
pub struct LogFSeries {
    x: f64,
    sigma0: f64,
    p_max: u64,
    kappa: f64,
    powers: Powers,
    /// (p, k) of each term, sorted by p^k.
    pk: Vec<(u64, u32)>,
    log_n: Vec<f64>,
    w: Vec<Complex64>,
}

impl LogFSeries {
    /// All prime powers n ≤ P_max at base abscissa c₀ = 1 + 1/log x.
    pub fn build(spec: &FunctionSpec, tables: &PrimeTables, x: f64, p_max: u64) -> Result<Self> {
        Self::build_with(spec, tables, x, &SeriesOptions::up_to(p_max))
    }

    pub fn build_with(spec: &FunctionSpec, tables: &PrimeTables, x: f64, opts: &SeriesOptions) -> Result<Self> {
        require_anchor(x)?;
        if opts.p_max > tables.limit() {
            return Err(LabError::Range { what: "P_max", value: opts.p_max as f64, limit: tables.limit() as f64 });
        }
        let sigma0 = opts.abscissa.unwrap_or_else(|| c0_of(x));
        if !(sigma0.is_finite() && sigma0 > 0.0) {
            return Err(LabError::domain(format!("abscissa must be positive, got {sigma0}")));
        }
        if opts.powers == Powers::Complete && sigma0 <= 1.0 - 1e-12 {
            return Err(LabError::domain("complete Euler factors need abscissa ≥ 1"));
        }
        let (lo, hi) = opts.prime_range.unwrap_or((2, opts.p_max));
        let hi = hi.min(opts.p_max);
        let primes = if hi >= lo { tables.primes_in(lo.saturating_sub(1), hi) } else { &[][..] };
        let p_max = opts.p_max;
        let powers = opts.powers;
        let per_prime: Vec<Vec<(u64, u32, f64, Complex64)>> = primes
            .par_iter()
            .map(|&p| {
                let p = p as u64;
                let lp = (p as f64).ln();
                let kmax = match powers {
                    Powers::UpTo => {
                        let mut k = 1;
                        let mut q = p;
                        while let Some(next) = q.checked_mul(p).filter(|&v| v <= p_max) {
                            q = next;
                            k += 1;
                        }
                        k
                    }
                    Powers::Complete => {
                        // p^{−kσ₀}/k below the cut-off (|Λ_f| ≤ κ log p keeps
                        // the weight under κ times this).
                        let k = (COMPLETE_CUTOFF.ln().abs() / (sigma0 * lp)).ceil() as u32;
                        k.clamp(1, 200)
                    }
                };
                let lam = lambda_f_powers(spec, p, kmax)?;
                let mut out = Vec::with_capacity(lam.len());
                for (i, l) in lam.into_iter().enumerate() {
                    let k = i as u32 + 1;
                    let ln = k as f64 * lp;
                    if l == ZERO {
                        continue;
                    }
                    let w = l * ((-sigma0 * ln).exp() / ln);
                    out.push((p, k, ln, w));
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        let mut terms: Vec<(u64, u32, f64, Complex64)> = per_prime.into_iter().flatten().collect();
        terms.sort_by(|a, b| a.2.total_cmp(&b.2));
        let mut pk = Vec::with_capacity(terms.len());
        let mut log_n = Vec::with_capacity(terms.len());
        let mut w = Vec::with_capacity(terms.len());
        for (p, k, ln, wt) in terms {
            pk.push((p, k));
            log_n.push(ln);
            w.push(wt);
        }
        Ok(LogFSeries { x, sigma0, p_max, kappa: spec.kappa, powers, pk, log_n, w })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    /// Base abscissa σ₀ (c₀ unless overridden).
    pub fn abscissa(&self) -> f64 {
        self.sigma0
    }

    pub fn p_max(&self) -> u64 {
        self.p_max
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn powers(&self) -> Powers {
        self.powers
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    /// Terms as ((p, k), log p^k, w).
    pub fn terms(&self) -> impl Iterator<Item = ((u64, u32), f64, Complex64)> + '_ {
        self.pk.iter().zip(&self.log_n).zip(&self.w).map(|((&pk, &l), &w)| (pk, l, w))
    }

    /// log F(σ₀ + δ + it), summed in fixed chunks.
    pub fn log_f(&self, delta: f64, t: f64) -> Complex64 {
        let partials: Vec<Complex64> = self
            .log_n
            .par_chunks(CHUNK)
            .zip(self.w.par_chunks(CHUNK))
            .map(|(ls, ws)| {
                let mut acc = ZERO;
                for (&l, &w) in ls.iter().zip(ws) {
                    let a = (-delta * l).exp();
                    let (s, c) = (-t * l).sin_cos();
                    acc += w * Complex64::new(a * c, a * s);
                }
                acc
            })
            .collect();
        partials.into_iter().fold(ZERO, |a, b| a + b)
    }

    /// |F(σ₀ + δ + it)|.
    pub fn abs_f(&self, delta: f64, t: f64) -> f64 {
        self.log_f(delta, t).re.exp()
    }

    /// F(s)/s at s = σ₀ + δ + it.
    pub fn f_over_s(&self, delta: f64, t: f64) -> Complex64 {
        self.log_f(delta, t).exp() / Complex64::new(self.sigma0 + delta, t)
    }

    /// log|F(s)| − [denom]·log|s| at s = σ₀ + δ + it.
    pub fn log_objective(&self, delta: f64, t: f64, denom: bool) -> f64 {
        let mut v = self.log_f(delta, t).re;
        if denom {
            v -= Complex64::new(self.sigma0 + delta, t).norm().ln();
        }
        v
    }

    /// log F at t₀ + j·h, j = 0..count, by incremental phase rotation with an
    /// exact resynchronisation at the start of every block of points.
    pub fn log_f_grid(&self, delta: f64, t0: f64, h: f64, count: usize) -> Vec<Complex64> {
        if count == 0 {
            return Vec::new();
        }
        let scaled: Vec<Complex64> = self.w.iter().zip(&self.log_n).map(|(w, l)| w * (-delta * l).exp()).collect();
        let rot: Vec<Complex64> = self.log_n.iter().map(|l| Complex64::cis(-h * l)).collect();
        let blocks: Vec<usize> = (0..count).step_by(BLOCK).collect();
        let per_block: Vec<Vec<Complex64>> = blocks
            .par_iter()
            .map(|&start| {
                let len = BLOCK.min(count - start);
                let ts = t0 + start as f64 * h;
                rotate_block(&self.log_n, &scaled, &rot, ts, len)
            })
            .collect();
        per_block.into_iter().flatten().collect()
    }
}

/// Σ_n ws_n e^{−i(ts + jh) log n} for j < len, with rot_n = e^{−ih log n}.
/// Four terms advance together to break the multiply dependency chain.
fn rotate_block(log_n: &[f64], ws: &[Complex64], rot: &[Complex64], ts: f64, len: usize) -> Vec<Complex64> {
    let mut acc = [ZERO; BLOCK];
    let n = log_n.len();
    let head = n - n % 4;
    let mut i = 0;
    while i < head {
        let mut b0 = ws[i] * Complex64::cis(-ts * log_n[i]);
        let mut b1 = ws[i + 1] * Complex64::cis(-ts * log_n[i + 1]);
        let mut b2 = ws[i + 2] * Complex64::cis(-ts * log_n[i + 2]);
        let mut b3 = ws[i + 3] * Complex64::cis(-ts * log_n[i + 3]);
        let (r0, r1, r2, r3) = (rot[i], rot[i + 1], rot[i + 2], rot[i + 3]);
        for a in acc.iter_mut().take(len) {
            *a += (b0 + b1) + (b2 + b3);
            b0 *= r0;
            b1 *= r1;
            b2 *= r2;
            b3 *= r3;
        }
        i += 4;
    }
    for j in head..n {
        let mut b = ws[j] * Complex64::cis(-ts * log_n[j]);
        for a in acc.iter_mut().take(len) {
            *a += b;
            b *= rot[j];
        }
    }
    acc[..len].to_vec()
}

/// Grid parameters for maximization along a vertical segment.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GridOptions {
    pub budget: u64,
    pub candidates: usize,
    pub levels: u32,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions { budget: DEFAULT_POINT_BUDGET, candidates: 5, levels: 3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridInfo {
    pub h0: f64,
    pub levels: u32,
    pub h_final: f64,
    pub candidates: usize,
    pub coarse_points: u64,
    pub refine_points: u64,
    pub budget: u64,
}

/// Outcome of maximizing log|F(σ₀+δ+it)| (optionally divided by |s|).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RawMax {
    pub t1: f64,
    pub log_value: f64,
    pub grid: GridInfo,
}

#[derive(Debug, Clone, Copy)]
struct Pt {
    t: f64,
    v: f64,
}

/// Total order used for every maximum: larger value, then smaller |t|, then
/// smaller t.
fn better(a: &Pt, b: &Pt) -> Ordering {
    b.v.total_cmp(&a.v)
        .then(a.t.abs().total_cmp(&b.t.abs()))
        .then(a.t.total_cmp(&b.t))
}

/// Coarse spacing for a series truncated at P_max.
pub fn coarse_spacing(p_max: u64) -> f64 {
    let l = (p_max.max(3) as f64).ln();
    (0.5 / l).min(0.25)
}

/// Maximizes over |t| ≤ T: a coarse grid anchored at t = 0 with both end
/// points, then `levels` rounds of ternary refinement (7-point stencils at a
/// third of the previous spacing) around the best local maxima.
pub fn maximize_raw(series: &LogFSeries, delta: f64, t_range: f64, denom: bool, opts: &GridOptions) -> Result<RawMax> {
    if !(t_range.is_finite() && t_range > 0.0) {
        return Err(LabError::domain(format!("t-range must be positive and finite, got {t_range}")));
    }
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(LabError::domain(format!("δ must be ≥ 0, got {delta}")));
    }
    let h0 = coarse_spacing(series.p_max());
    let half = (t_range / h0 + 1e-9).floor() as u64;
    let on_grid = (half as f64 * h0 - t_range).abs() <= 1e-9 * t_range;
    let coarse = 2 * half + 1 + if on_grid { 0 } else { 2 };
    let refine = (opts.candidates as u64) * opts.levels as u64 * 6;
    let total = coarse + refine;
    if total > opts.budget {
        return Err(LabError::Budget { points: total, budget: opts.budget });
    }

    let count = (2 * half + 1) as usize;
    let values = series.log_f_grid(delta, -(half as f64) * h0, h0, count);
    let s0 = series.abscissa() + delta;
    let objective = |t: f64, lf: Complex64| -> f64 {
        if denom {
            lf.re - Complex64::new(s0, t).norm().ln()
        } else {
            lf.re
        }
    };
    let mut pts: Vec<Pt> = Vec::with_capacity(count + 2);
    if !on_grid {
        pts.push(Pt { t: -t_range, v: series.log_objective(delta, -t_range, denom) });
    }
    for (j, lf) in values.into_iter().enumerate() {
        let t = (j as f64 - half as f64) * h0;
        pts.push(Pt { t, v: objective(t, lf) });
    }
    if !on_grid {
        pts.push(Pt { t: t_range, v: series.log_objective(delta, t_range, denom) });
    }

    let mut local: Vec<Pt> = (0..pts.len())
        .filter(|&i| {
            let v = pts[i].v;
            (i == 0 || v >= pts[i - 1].v) && (i + 1 == pts.len() || v >= pts[i + 1].v)
        })
        .map(|i| pts[i])
        .collect();
    local.sort_by(better);
    local.truncate(opts.candidates);

    let mut best = *pts.iter().min_by(|a, b| better(a, b)).expect("grid is non-empty");
    let mut refine_points = 0u64;
    for cand in local {
        let mut centre = cand;
        let mut h = h0;
        for _ in 0..opts.levels {
            h /= 3.0;
            for k in [-3i32, -2, -1, 1, 2, 3] {
                let t = centre.t + k as f64 * h;
                if t.abs() > t_range {
                    continue;
                }
                refine_points += 1;
                let p = Pt { t, v: series.log_objective(delta, t, denom) };
                if better(&p, &centre) == Ordering::Less {
                    centre = p;
                }
            }
        }
        if better(&centre, &best) == Ordering::Less {
            best = centre;
        }
    }
    let grid = GridInfo {
        h0,
        levels: opts.levels,
        h_final: h0 / 3f64.powi(opts.levels as i32),
        candidates: opts.candidates,
        coarse_points: coarse,
        refine_points,
        budget: opts.budget,
    };
    Ok(RawMax { t1: best.t, log_value: best.v, grid })
}

/// Maximum of |F| or |F/s| over a t-range, normalised as e^{−M}(log x)^κ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaxReport {
    #[serde(rename = "M")]
    pub m: f64,
    pub t1: f64,
    pub value_at_max: f64,
    pub t_range: [f64; 2],
    pub delta: f64,
    pub denominator: bool,
    pub grid: GridInfo,
    pub p_max: u64,
    pub x: f64,
    pub kappa: f64,
    pub terms: usize,
}

/// Maximizes and reports M = κ log log x − log(max), rejecting M < −0.5.
pub fn maximize_over_t(series: &LogFSeries, delta: f64, t_range: f64, denom: bool, opts: &GridOptions) -> Result<MaxReport> {
    let raw = maximize_raw(series, delta, t_range, denom, opts)?;
    let x = series.x();
    let m = series.kappa() * x.ln().ln() - raw.log_value;
    if !(m >= M_FLOOR) {
        return Err(LabError::Consistency(format!(
            "M = {m} below floor {M_FLOOR} (x = {x}, P_max = {})",
            series.p_max()
        )));
    }
    Ok(MaxReport {
        m,
        t1: raw.t1,
        value_at_max: raw.log_value.exp(),
        t_range: [-t_range, t_range],
        delta,
        denominator: denom,
        grid: raw.grid,
        p_max: series.p_max(),
        x,
        kappa: series.kappa(),
        terms: series.len(),
    })
}

/// Shared evaluation settings: truncation and grid.
#[derive(Debug, Clone, Copy, Default)]
pub struct EvalOptions {
    /// Overrides the default P_max = min(x, 10⁷).
    pub p_max: Option<u64>,
    pub grid: GridOptions,
}

impl EvalOptions {
    pub fn p_max_for(&self, x: f64) -> u64 {
        self.p_max.unwrap_or_else(|| (x.floor() as u64).min(DEFAULT_PMAX_CAP))
    }
}

/// M(x): max over |t| ≤ (log x)^κ of |F(c₀+it)/(c₀+it)|.
pub fn m_of(spec: &FunctionSpec, tables: &PrimeTables, x: f64, opts: &EvalOptions) -> Result<MaxReport> {
    let series = LogFSeries::build(spec, tables, x, opts.p_max_for(x))?;
    maximize_over_t(&series, 0.0, x.ln().powf(spec.kappa), true, &opts.grid)
}

/// M_δ(x): max over |t| ≤ x^δ(log x)^κ of |F(c₀+it)|.
pub fn m_delta_of(spec: &FunctionSpec, tables: &PrimeTables, x: f64, delta: f64, opts: &EvalOptions) -> Result<MaxReport> {
    if !(delta > 0.0 && delta < 0.25) {
        return Err(LabError::domain(format!("δ must lie in (0, 1/4), got {delta}")));
    }
    let series = LogFSeries::build(spec, tables, x, opts.p_max_for(x))?;
    let t_range = x.powf(delta) * x.ln().powf(spec.kappa);
    maximize_over_t(&series, 0.0, t_range, false, &opts.grid)
}

/// M_χ(x), from the twisted series F_χ(s) = Σ f(n)χ(n)n^{−s}.
pub fn m_chi_of(
    spec: &FunctionSpec,
    chi: &DirichletCharacter,
    tables: &PrimeTables,
    x: f64,
    opts: &EvalOptions,
) -> Result<MaxReport> {
    m_of(&spec.clone().twist(chi.clone()), tables, x, opts)
}

#[derive(Debug, Clone, Serialize)]
pub struct RepulsionReport {
    pub lhs: f64,
    pub rhs_without_constant: f64,
    pub terms: Vec<f64>,
    pub rho: f64,
    pub x: f64,
    pub p_max: u64,
}

/// Σ_j log|F(c₀+δ_j+it_j)| against κ(ℓ + ℓ(ℓ−1)ρ)^{1/2} log log x.
pub fn repulsion_check(
    spec: &FunctionSpec,
    tables: &PrimeTables,
    x: f64,
    points: &[(f64, f64)],
    rho: f64,
    opts: &EvalOptions,
) -> Result<RepulsionReport> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(LabError::domain(format!("ρ must lie in [0, 1], got {rho}")));
    }
    require_anchor(x)?;
    let lx = x.ln();
    let t_cap = lx.powf(spec.kappa);
    let gap = lx.powf(-rho);
    for (i, &(d, t)) in points.iter().enumerate() {
        if d < 0.0 || t.abs() > t_cap {
            return Err(LabError::domain(format!("point ({d}, {t}) outside δ ≥ 0, |t| ≤ {t_cap}")));
        }
        for &(_, u) in &points[..i] {
            if (t - u).abs() < gap {
                return Err(LabError::domain(format!("|{t} − {u}| below the spacing (log x)^−ρ = {gap}")));
            }
        }
    }
    let series = LogFSeries::build(spec, tables, x, opts.p_max_for(x))?;
    let terms: Vec<f64> = points.iter().map(|&(d, t)| series.log_f(d, t).re).collect();
    let l = points.len() as f64;
    Ok(RepulsionReport {
        lhs: terms.iter().sum(),
        rhs_without_constant: spec.kappa * (l + l * (l - 1.0) * rho).sqrt() * lx.ln(),
        terms,
        rho,
        x,
        p_max: series.p_max(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Rep2Report {
    pub min: f64,
    pub values: Vec<f64>,
    /// (κ/√J)·log(log x/log y).
    pub bound_without_constant: f64,
    pub y: f64,
    pub p_max: u64,
}

/// min_j log|𝓛_{χ_j}(c₀+δ_j+it_j)| with 𝓛_χ(s) = Σ_{p(n)>y} f(n)χ(n)n^{−s}.
pub fn rep2_min(
    spec: &FunctionSpec,
    tables: &PrimeTables,
    q: u64,
    x: f64,
    y: f64,
    chars: &[(DirichletCharacter, f64, f64)],
    opts: &EvalOptions,
) -> Result<Rep2Report> {
    require_anchor(x)?;
    let lx = x.ln();
    if !(q as f64 * lx <= y && y <= x.sqrt()) {
        return Err(LabError::domain(format!("y = {y} outside [q log x, √x] = [{}, {}]", q as f64 * lx, x.sqrt())));
    }
    if chars.is_empty() {
        return Err(LabError::domain("at least one character is required"));
    }
    for (i, (c, d, t)) in chars.iter().enumerate() {
        if c.modulus() != q {
            return Err(LabError::domain(format!("character {c} is not modulo {q}")));
        }
        if chars[..i].iter().any(|(o, _, _)| o == c) {
            return Err(LabError::domain(format!("character {c} repeated")));
        }
        if *d < 0.0 || t.abs() > lx.powf(spec.kappa) {
            return Err(LabError::domain(format!("shift ({d}, {t}) out of range")));
        }
    }
    let restricted = spec.clone().restrict_large(y.floor() as u64);
    let p_max = opts.p_max_for(x);
    let values: Vec<f64> = chars
        .iter()
        .map(|(c, d, t)| {
            let s = LogFSeries::build(&restricted.clone().twist(c.clone()), tables, x, p_max)?;
            Ok(s.log_f(*d, *t).re)
        })
        .collect::<Result<_>>()?;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let j = chars.len() as f64;
    Ok(Rep2Report {
        min,
        values,
        bound_without_constant: spec.kappa / j.sqrt() * (lx / y.ln()).ln(),
        y,
        p_max,
    })
}

/// L_y(s, χ) = Π_{y<p≤P_max}(1 − χ(p)p^{−s})^{−1} with full Euler factors.
pub fn l_y_eval(tables: &PrimeTables, chi: &DirichletCharacter, s: Complex64, y: f64, p_max: u64) -> Result<Complex64> {
    if s.re <= 1.0 {
        return Err(LabError::domain(format!("Re(s) must exceed 1, got {}", s.re)));
    }
    let spec = FunctionSpec::one().twist(chi.clone());
    let lo = y.floor() as u64 + 1;
    let opts = SeriesOptions { p_max, abscissa: Some(s.re), prime_range: Some((lo, p_max)), powers: Powers::Complete };
    // The anchor only fixes the default abscissa, which is overridden here.
    let series = LogFSeries::build_with(&spec, tables, p_max.max(3) as f64, &opts)?;
    Ok(series.log_f(0.0, s.im).exp())
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MuYProduct {
    /// Π_{y<p≤P_max}|1 − p^{−(c₀+it)}|
    pub product: f64,
    /// (log x/log y)^{3/4}·(log(y+|t|)/log y)^{1/4}
    pub shape: f64,
    pub p_max: u64,
}

/// The μ_y Euler product on the line c₀ + it, with c₀ = 1 + 1/log x.
pub fn mu_y_product(tables: &PrimeTables, y: f64, x: f64, t: f64, p_max: Option<u64>) -> Result<MuYProduct> {
    require_anchor(x)?;
    if !(y >= 2.0 && y <= x) {
        return Err(LabError::domain(format!("need 2 ≤ y ≤ x, got y = {y}, x = {x}")));
    }
    let p_max = p_max.unwrap_or(x.floor() as u64);
    let lo = y.floor() as u64 + 1;
    let opts = SeriesOptions { p_max, abscissa: None, prime_range: Some((lo, p_max)), powers: Powers::Complete };
    let series = LogFSeries::build_with(&FunctionSpec::moebius(), tables, x, &opts)?;
    let product = series.log_f(0.0, t).re.exp();
    let ly = y.ln();
    let shape = (x.ln() / ly).powf(0.75) * ((y + t.abs()).ln() / ly).powf(0.25);
    Ok(MuYProduct { product, shape, p_max })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::CharGroup;

    #[test]
    fn weights_of_zeta() {
        let t = PrimeTables::build(100).unwrap();
        let s = LogFSeries::build(&FunctionSpec::one(), &t, std::f64::consts::E + 1e-12, 10).unwrap();
        let ns: Vec<u64> = s.terms().map(|((p, k), _, _)| p.pow(k)).collect();
        assert_eq!(ns, vec![2, 3, 4, 5, 7, 8, 9]);
        let c0 = s.abscissa();
        let (_, _, w4) = s.terms().nth(2).unwrap();
        let want = 2f64.ln() / (4f64.powf(c0) * 2.0 * 2f64.ln());
        assert!((w4.re - want).abs() < 1e-15);
    }

    #[test]
    fn grid_matches_pointwise() {
        let t = PrimeTables::build(20_000).unwrap();
        let s = LogFSeries::build(&FunctionSpec::nit(3.0).unwrap(), &t, 1e4, 20_000).unwrap();
        let grid = s.log_f_grid(0.1, -7.0, 0.037, 150);
        for (j, g) in grid.iter().enumerate() {
            let d = s.log_f(0.1, -7.0 + j as f64 * 0.037);
            assert!((g - d).norm() < 1e-10, "j={j}");
        }
    }

    #[test]
    fn conjugation_for_real_functions() {
        let t = PrimeTables::build(10_000).unwrap();
        let s = LogFSeries::build(&FunctionSpec::moebius(), &t, 1e4, 10_000).unwrap();
        for tt in [0.3, 2.0, 9.7] {
            assert!((s.log_f(0.0, -tt) - s.log_f(0.0, tt).conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn budget_error() {
        let t = PrimeTables::build(1000).unwrap();
        let s = LogFSeries::build(&FunctionSpec::one(), &t, 1000.0, 1000).unwrap();
        let opts = GridOptions { budget: 100, ..Default::default() };
        assert!(matches!(maximize_raw(&s, 0.0, 1e3, true, &opts), Err(LabError::Budget { .. })));
    }

    #[test]
    fn repulsion_spacing() {
        let t = PrimeTables::build(10_000).unwrap();
        let e = repulsion_check(&FunctionSpec::one(), &t, 1e4, &[(0.0, 0.0), (0.0, 0.5)], 0.0, &EvalOptions::default());
        assert!(matches!(e, Err(LabError::Domain(_))));
    }

    #[test]
    fn empty_product_is_one() {
        let t = PrimeTables::build(10_000).unwrap();
        let r = mu_y_product(&t, 1e4, 1e4, 0.0, None).unwrap();
        assert_eq!(r.product, 1.0);
        let g = CharGroup::new(5).unwrap();
        let l = l_y_eval(&t, &g.principal(), Complex64::new(1.1, 0.0), 1e4, 1e4 as u64).unwrap();
        assert_eq!(l, Complex64::new(1.0, 0.0));
    }
}
