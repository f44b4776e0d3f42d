//! Vertical-line quadrature for the convolution identities behind the
//! Halász bound, checked against brute-force sums at tiny x.
//!
//! Every s-integral is composite Simpson on a uniform t-grid whose step
//! resolves the fastest oscillation present, h·log(x·N_max) ≤ 0.3. The same
//! samples also give the Simpson value at step 2h, which is reported as the
//! discretisation diagnostic.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::characters::CharGroup;
use crate::error::{LabError, Result};
use crate::quadrature::{gauss_legendre, simpson_weights};
use crate::sieve::{sieve_function, FunctionSpec, LambdaFTable, PrimeTables};

/// Upper bound on h·log(x·N_max).
pub const OSCILLATION_BOUND: f64 = 0.3;
pub const GL_NODES: usize = 24;
/// Truncation of the α, β integrals in the exact identity.
pub const DEFAULT_SHIFT_CUTOFF: f64 = 40.0;
pub const DEFAULT_N_MAX: u64 = 10_000;
/// Relative size of a diagnostic that raises the `flagged` bit.
pub const FLAG_TOLERANCE: f64 = 1e-2;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const BLOCK: usize = 64;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LineIntegralSpec {
    pub c: f64,
    pub t_max: f64,
    pub h: f64,
    pub x: f64,
    /// Largest frequency log N present in the integrand, as N.
    pub n_max: f64,
}

impl LineIntegralSpec {
    /// The coarsest admissible grid: [−T, T] split into a multiple of four
    /// intervals.
    pub fn new(c: f64, t_max: f64, x: f64, n_max: f64) -> Result<Self> {
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(LabError::domain(format!("T must be positive and finite, got {t_max}")));
        }
        let h = admissible_step(t_max, x * n_max, 4);
        let spec = LineIntegralSpec { c, t_max, h, x, n_max };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.t_max.is_finite() || self.t_max <= 0.0 {
            return Err(LabError::domain(format!("T must be positive and finite, got {}", self.t_max)));
        }
        if !(self.x > 0.0 && self.n_max >= 1.0) {
            return Err(LabError::domain("need x > 0 and N_max ≥ 1"));
        }
        let osc = self.h * (self.x * self.n_max).ln().abs();
        if osc > OSCILLATION_BOUND * (1.0 + 1e-12) {
            return Err(LabError::domain(format!(
                "step h = {} leaves h·log(x·N_max) = {osc:.3} above {OSCILLATION_BOUND}",
                self.h
            )));
        }
        let m = 2.0 * self.t_max / self.h;
        if (m - m.round()).abs() > 1e-6 || m.round() as u64 % 4 != 0 {
            return Err(LabError::domain("2T/h must be a multiple of 4"));
        }
        Ok(())
    }

    fn intervals(&self) -> usize {
        (2.0 * self.t_max / self.h).round() as usize
    }
}

/// Largest step dividing `half_width` into a multiple of `multiple` intervals
/// with h·log(freq) ≤ the oscillation bound.
fn admissible_step(half_width: f64, freq: f64, multiple: usize) -> f64 {
    let h_max = OSCILLATION_BOUND / freq.ln().abs().max(1.0);
    let span = 2.0 * half_width;
    let mut n = (span / h_max).ceil() as usize;
    n = n.div_ceil(multiple) * multiple;
    span / n as f64
}

#[derive(Debug, Clone, Serialize)]
pub struct PerronResult {
    pub value: Complex64,
    /// Simpson at step 2h from the same samples.
    pub coarse: Complex64,
    pub richardson: f64,
    /// (|G(c+iT)| + |G(c−iT)|)·x^c / (2πT|log x|), the size of the neglected tails.
    pub tail_estimate: f64,
    pub flagged: bool,
    pub nodes: usize,
    pub line: LineIntegralSpec,
}

/// Simpson sums at steps h and 2h over samples on an even-multiple grid.
fn simpson_pair(values: &[Complex64], h: f64) -> (Complex64, Complex64) {
    let n = values.len() - 1;
    let fine = simpson_weights(n, h);
    let coarse = simpson_weights(n / 2, 2.0 * h);
    let a = values.iter().zip(&fine).fold(ZERO, |acc, (v, w)| acc + v * *w);
    let b = values.iter().step_by(2).zip(&coarse).fold(ZERO, |acc, (v, w)| acc + v * *w);
    (a, b)
}

/// (1/2πi)∫_{c−iT}^{c+iT} G(s) x^s/s ds by composite Simpson.
pub fn perron_integral<G>(line: &LineIntegralSpec, g: G) -> Result<PerronResult>
where
    G: Fn(Complex64) -> Complex64 + Sync,
{
    line.validate()?;
    let m = line.intervals();
    let lx = line.x.ln();
    let values: Vec<Complex64> = (0..=m)
        .into_par_iter()
        .map(|k| {
            let s = Complex64::new(line.c, -line.t_max + k as f64 * line.h);
            g(s) * (s * lx).exp() / s
        })
        .collect();
    let (fine, coarse) = simpson_pair(&values, line.h);
    let value = fine / (2.0 * PI);
    let coarse = coarse / (2.0 * PI);
    let edge = g(Complex64::new(line.c, line.t_max)).norm() + g(Complex64::new(line.c, -line.t_max)).norm();
    let tail_estimate = edge * line.x.powf(line.c) / (2.0 * PI * line.t_max * lx.abs().max(1.0 / line.t_max));
    let richardson = (value - coarse).norm();
    let scale = value.norm().max(1.0);
    Ok(PerronResult {
        value,
        coarse,
        richardson,
        tail_estimate,
        flagged: richardson > FLAG_TOLERANCE * scale || tail_estimate > FLAG_TOLERANCE * scale,
        nodes: m + 1,
        line: *line,
    })
}

/// n^{−it} for a fixed set of frequencies, advanced along a uniform t-grid by
/// rotation and re-anchored exactly at the start of every block.
struct Rotor {
    logs: Vec<f64>,
    step_re: Vec<f64>,
    step_im: Vec<f64>,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Rotor {
    fn new(logs: Vec<f64>, h: f64) -> Self {
        let n = logs.len();
        let (step_re, step_im) = logs.iter().map(|l| ((l * h).cos(), -(l * h).sin())).unzip();
        Rotor { logs, step_re, step_im, re: vec![0.0; n], im: vec![0.0; n] }
    }

    fn anchor(&mut self, t: f64) {
        for (k, l) in self.logs.iter().enumerate() {
            let (s, c) = (l * t).sin_cos();
            self.re[k] = c;
            self.im[k] = -s;
        }
    }

    fn advance(&mut self) {
        for k in 0..self.re.len() {
            let (a, b) = (self.re[k], self.im[k]);
            let (c, d) = (self.step_re[k], self.step_im[k]);
            self.re[k] = a * c - b * d;
            self.im[k] = a * d + b * c;
        }
    }
}

/// Σ coef_k·z_k with four fixed lanes, so the summation order never changes.
fn dot(cr: &[f64], ci: &[f64], zr: &[f64], zi: &[f64]) -> Complex64 {
    let mut ar = [0.0; 4];
    let mut ai = [0.0; 4];
    let n = cr.len() / 4 * 4;
    for k in (0..n).step_by(4) {
        for l in 0..4 {
            let (a, b, c, d) = (cr[k + l], ci[k + l], zr[k + l], zi[k + l]);
            ar[l] += a * c - b * d;
            ai[l] += a * d + b * c;
        }
    }
    for k in n..cr.len() {
        ar[0] += cr[k] * zr[k] - ci[k] * zi[k];
        ai[0] += cr[k] * zi[k] + ci[k] * zr[k];
    }
    Complex64::new((ar[0] + ar[1]) + (ar[2] + ar[3]), (ai[0] + ai[1]) + (ai[2] + ai[3]))
}

/// [`dot`] for real coefficients.
fn dot_real(cr: &[f64], zr: &[f64], zi: &[f64]) -> Complex64 {
    let mut ar = [0.0; 4];
    let mut ai = [0.0; 4];
    let n = cr.len() / 4 * 4;
    for k in (0..n).step_by(4) {
        for l in 0..4 {
            ar[l] += cr[k + l] * zr[k + l];
            ai[l] += cr[k + l] * zi[k + l];
        }
    }
    for k in n..cr.len() {
        ar[0] += cr[k] * zr[k];
        ai[0] += cr[k] * zi[k];
    }
    Complex64::new((ar[0] + ar[1]) + (ar[2] + ar[3]), (ai[0] + ai[1]) + (ai[2] + ai[3]))
}

/// Evaluates `f(k, t_k)` at t_k = k·h for k = 0..=n using per-block state.
fn sample_grid<S, F>(n: usize, make: impl Fn() -> S + Sync, f: F) -> Vec<Complex64>
where
    F: Fn(&mut S, usize, bool) -> Complex64 + Sync,
{
    let blocks = (n + 1).div_ceil(BLOCK);
    let per_block: Vec<Vec<Complex64>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut state = make();
            let lo = b * BLOCK;
            let hi = ((b + 1) * BLOCK).min(n + 1);
            (lo..hi).map(|k| f(&mut state, k, k == lo)).collect()
        })
        .collect();
    per_block.into_iter().flatten().collect()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ShiftedOptions {
    /// Cut-off A of the α and β integrals.
    pub shift_cutoff: f64,
    /// Abscissa c > 1 of the s-line.
    pub c: f64,
    pub n_max: u64,
    pub gl_nodes: usize,
}

impl Default for ShiftedOptions {
    fn default() -> Self {
        ShiftedOptions { shift_cutoff: DEFAULT_SHIFT_CUTOFF, c: 2.0, n_max: DEFAULT_N_MAX, gl_nodes: GL_NODES }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TruncationPoint {
    pub t_max: f64,
    pub numeric: Complex64,
    pub coarse: Complex64,
    pub rel_err: f64,
    pub richardson: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ShiftedReport {
    pub spec: String,
    pub x: f64,
    /// Σ_{2≤n≤x}(f(n) − Λ_f(n)/log n)
    pub oracle: Complex64,
    /// Triple integral at the largest T.
    pub numeric: Complex64,
    pub rel_err: f64,
    pub points: Vec<TruncationPoint>,
    /// |error| non-increasing along the supplied T values.
    pub envelope_monotone: bool,
    pub h: f64,
    pub nodes: usize,
    /// κ·N^{1−c}/(c−1), the size of the dropped F′/F tail on the line.
    pub tail_estimate: f64,
    pub options: ShiftedOptions,
}

fn check_heights(ts: &[f64]) -> Result<(f64, f64)> {
    if ts.is_empty() || ts.iter().any(|t| !(t.is_finite() && *t >= 1.0)) {
        return Err(LabError::domain("truncation heights must be finite and ≥ 1"));
    }
    let lo = ts.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ts.iter().cloned().fold(0.0, f64::max);
    Ok((lo, hi))
}

/// Samples on [0, T_max] with a step for which every T in `ts` is a multiple
/// of 4h.
fn common_step(ts: &[f64], freq: f64) -> Result<(f64, Vec<usize>)> {
    let (lo, hi) = check_heights(ts)?;
    let h = admissible_step(lo / 2.0, freq, 4);
    let counts: Vec<usize> = ts
        .iter()
        .map(|t| {
            let m = t / h;
            let r = m.round();
            if (m - r).abs() > 1e-6 * r || r as usize % 4 != 0 {
                Err(LabError::domain(format!("T = {t} is not commensurate with T = {lo}")))
            } else {
                Ok(r as usize)
            }
        })
        .collect::<Result<_>>()?;
    debug_assert!(hi / h >= counts.iter().copied().max().unwrap_or(0) as f64 - 1e-6);
    Ok((h, counts))
}

/// ∫_{−T}^{T} from samples at t = 0, h, … (and at −t unless the integrand
/// is conjugate-symmetric), as (step h, step 2h).
fn line_from_half(pos: &[Complex64], neg: Option<&[Complex64]>, count: usize, h: f64) -> (Complex64, Complex64) {
    let (a, b) = simpson_pair(&pos[..=count], h);
    match neg {
        Some(neg) => {
            let (c, d) = simpson_pair(&neg[..=count], h);
            (a + c, b + d)
        }
        None => (Complex64::new(2.0 * a.re, 0.0), Complex64::new(2.0 * b.re, 0.0)),
    }
}

/// Both sides of the exact identity
/// Σ_{2≤n≤x}(f(n) − Λ_f(n)/log n) = ∫∫ (1/2πi)∫ (F′/F)(s+α)F′(s+α+β) x^s/s ds dβ dα.
///
/// The α and β integrals use Gauss–Legendre in u = 2^{−α} on [2^{−A}, 1],
/// which absorbs the exponential decay. The β rule only touches the
/// coefficients of F′, so it is folded into them before the t-sweep.
pub fn verify_shifted_identity(
    spec: &FunctionSpec,
    tables: &PrimeTables,
    x: f64,
    ts: &[f64],
    opts: &ShiftedOptions,
) -> Result<ShiftedReport> {
    if !(x > 2.0 && x <= 50.0) {
        return Err(LabError::domain(format!("x must lie in (2, 50], got {x}")));
    }
    if (x - x.round()).abs() < 1e-9 {
        return Err(LabError::domain(format!("x must not be an integer, got {x}")));
    }
    if !(opts.c > 1.0) || opts.gl_nodes == 0 || !(opts.shift_cutoff > 0.0) {
        return Err(LabError::domain("need c > 1, A > 0 and at least one Gauss–Legendre node"));
    }
    let n = opts.n_max.max(x as u64);
    if n > 1_000_000 {
        return Err(LabError::Capacity { what: "Perron series length", requested: n, budget: 1_000_000 });
    }
    let sf = sieve_function(spec, tables, n)?;
    let lam = LambdaFTable::build(spec, tables, n)?;

    let xi = x.floor() as u64;
    let mut oracle = ZERO;
    for m in 2..=xi {
        oracle += sf.value(m) - lam.get(m) / (m as f64).ln();
    }

    let rule = gauss_legendre(opts.gl_nodes, (-opts.shift_cutoff * LN_2).exp(), 1.0);
    let shifts: Vec<(f64, f64)> = rule.iter().map(|&(u, w)| (-u.log2(), w / (u * LN_2))).collect();

    // Frequencies are log m for m = 2..=N; Λ_f lives on the prime powers.
    let logs: Vec<f64> = (2..=n).map(|m| (m as f64).ln()).collect();
    let pp: Vec<usize> = lam.entries().iter().map(|e| e.n as usize - 2).collect();
    let real = spec.is_real();
    let c = opts.c;
    // F′ coefficients with the β-rule folded in: f(m) log m Σ_j w_j m^{−β_j}.
    let fprime: Vec<Complex64> = (2..=n)
        .map(|m| {
            let l = (m as f64).ln();
            let g: f64 = shifts.iter().map(|&(b, w)| w * (-b * l).exp()).sum();
            sf.value(m) * l * g
        })
        .collect();
    struct Rows {
        weight: f64,
        a_re: Vec<f64>,
        a_im: Vec<f64>,
        h_re: Vec<f64>,
        h_im: Vec<f64>,
    }
    let rows: Vec<Rows> = shifts
        .iter()
        .map(|&(a, w)| {
            let damp = |k: usize| (-(c + a) * logs[k]).exp();
            let (a_re, a_im) = lam
                .entries()
                .iter()
                .zip(&pp)
                .map(|(e, &k)| {
                    let v = e.value * damp(k);
                    (v.re, v.im)
                })
                .unzip();
            let (h_re, h_im) = fprime
                .iter()
                .enumerate()
                .map(|(k, v)| {
                    let v = v * damp(k);
                    (v.re, v.im)
                })
                .unzip();
            Rows { weight: w, a_re, a_im, h_re, h_im }
        })
        .collect();

    let (h, counts) = common_step(ts, x * n as f64)?;
    let top = counts.iter().copied().max().unwrap();
    let lx = x.ln();
    let sweep = |sign: f64| {
        let step = sign * h;
        sample_grid(
            top,
            || (Rotor::new(logs.clone(), step), vec![0.0; pp.len()], vec![0.0; pp.len()]),
            |(rot, zr, zi), k, first| {
                let t = k as f64 * step;
                if first {
                    rot.anchor(t);
                } else {
                    rot.advance();
                }
                for (j, &idx) in pp.iter().enumerate() {
                    zr[j] = rot.re[idx];
                    zi[j] = rot.im[idx];
                }
                let mut acc = ZERO;
                for r in &rows {
                    let (a, b) = if real {
                        (dot_real(&r.a_re, zr, zi), dot_real(&r.h_re, &rot.re, &rot.im))
                    } else {
                        (dot(&r.a_re, &r.a_im, zr, zi), dot(&r.h_re, &r.h_im, &rot.re, &rot.im))
                    };
                    acc += a * b * r.weight;
                }
                let s = Complex64::new(c, t);
                acc * (s * lx).exp() / s / (2.0 * PI)
            },
        )
    };
    let pos = sweep(1.0);
    let neg = if real { None } else { Some(sweep(-1.0)) };

    let scale = oracle.norm().max(f64::MIN_POSITIVE);
    let points: Vec<TruncationPoint> = ts
        .iter()
        .zip(&counts)
        .map(|(&t_max, &cnt)| {
            let (numeric, coarse) = line_from_half(&pos, neg.as_deref(), cnt, h);
            TruncationPoint {
                t_max,
                numeric,
                coarse,
                rel_err: (numeric - oracle).norm() / scale,
                richardson: (numeric - coarse).norm() / scale,
            }
        })
        .collect();
    let mut order: Vec<&TruncationPoint> = points.iter().collect();
    order.sort_by(|a, b| a.t_max.total_cmp(&b.t_max));
    let envelope_monotone = order.windows(2).all(|w| w[1].rel_err <= w[0].rel_err);
    let last = order.last().unwrap();
    Ok(ShiftedReport {
        spec: spec.to_string(),
        x,
        oracle,
        numeric: last.numeric,
        rel_err: last.rel_err,
        envelope_monotone,
        h,
        nodes: if real { top + 1 } else { 2 * top + 2 },
        tail_estimate: spec.kappa * (n as f64).powf(1.0 - c) / (c - 1.0),
        options: *opts,
        points,
    })
}

/// The splitting f = s ∗ ℓ at y: s carries the primes ≤ y, ℓ the primes > y.
#[derive(Debug, Clone)]
pub struct SplitSeries {
    pub y: u64,
    pub eta: f64,
    /// s(n) for n ≤ N.
    pub small: Vec<Complex64>,
    /// ℓ(n) for n ≤ N.
    pub large: Vec<Complex64>,
    /// (n, Λ_ℓ(n)) for prime powers y < n < x/y.
    pub lambda_large: Vec<(u64, Complex64)>,
}

impl SplitSeries {
    pub fn build(spec: &FunctionSpec, tables: &PrimeTables, y: u64, x: f64, n: u64) -> Result<Self> {
        if y < 2 {
            return Err(LabError::domain("y must be at least 2"));
        }
        let sf = sieve_function(spec, tables, n)?;
        let mut small = vec![ZERO; n as usize + 1];
        let mut large = vec![ZERO; n as usize + 1];
        small[1] = Complex64::new(1.0, 0.0);
        large[1] = Complex64::new(1.0, 0.0);
        for m in 2..=n {
            let fs = tables.factorize(m);
            if fs.iter().all(|&(p, _)| p <= y) {
                small[m as usize] = sf.value(m);
            } else if fs.iter().all(|&(p, _)| p > y) {
                large[m as usize] = sf.value(m);
            }
        }
        let hi = x / y as f64;
        let top = (hi.ceil() as u64).saturating_sub(1);
        let lam = LambdaFTable::build(spec, tables, top.max(2))?;
        let lambda_large = lam
            .entries()
            .iter()
            .filter(|e| e.p > y && (e.n as f64) < hi && e.n > y)
            .map(|e| (e.n, e.value))
            .collect();
        Ok(SplitSeries { y, eta: 1.0 / (y as f64).ln(), small, large, lambda_large })
    }

    /// max_{n≤N} |Σ_{d|n} s(d)ℓ(n/d) − f(n)|.
    pub fn convolution_residual(&self, spec: &FunctionSpec, tables: &PrimeTables) -> Result<f64> {
        let n = self.small.len() - 1;
        let sf = sieve_function(spec, tables, n as u64)?;
        let mut conv = vec![ZERO; n + 1];
        for d in 1..=n {
            if self.small[d] == ZERO {
                continue;
            }
            for (k, m) in (d..=n).step_by(d).enumerate() {
                conv[m] += self.small[d] * self.large[k + 1];
            }
        }
        Ok((1..=n).map(|m| (conv[m] - sf.value(m as u64)).norm()).fold(0.0, f64::max))
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SplitOptions {
    pub gl_nodes: usize,
}

impl Default for SplitOptions {
    fn default() -> Self {
        SplitOptions { gl_nodes: GL_NODES }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SplitPoint {
    pub t_max: f64,
    pub integral: Complex64,
    pub coarse: Complex64,
    pub richardson: f64,
    pub residual: f64,
    /// x(log y)^κ/log x + x(log x)^κ/T
    pub error_budget: f64,
    pub ratio: f64,
    /// T ≤ x^{9/10} (advisory).
    pub t_in_range: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SplitReport {
    pub spec: String,
    pub x: f64,
    pub y: f64,
    pub eta: f64,
    pub c0: f64,
    /// Σ_{n≤x} f(n)
    pub lhs_sum: Complex64,
    pub points: Vec<SplitPoint>,
    /// residual/budget non-increasing along increasing T.
    pub ratio_non_increasing: bool,
    pub h: f64,
    pub nodes: usize,
}

/// The four-factor integral of the Halász identity, evaluated with the
/// s-line truncated at each T, against Σ_{n≤x} f(n).
///
/// 𝓛 is truncated at n ≤ x: larger terms only enter through the Perron
/// truncation error.
pub fn verify_split_identity(
    spec: &FunctionSpec,
    tables: &PrimeTables,
    x: f64,
    y: f64,
    ts: &[f64],
    opts: &SplitOptions,
) -> Result<SplitReport> {
    if !(x >= 100.0 && x <= 1000.0) {
        return Err(LabError::domain(format!("x must lie in [100, 1000], got {x}")));
    }
    if !(y >= 10.0 && y <= x.sqrt()) {
        return Err(LabError::domain(format!("need 10 ≤ y ≤ √x, got y = {y}")));
    }
    if opts.gl_nodes == 0 {
        return Err(LabError::domain("need at least one Gauss–Legendre node"));
    }
    let yi = y.floor() as u64;
    let xi = x.floor() as u64;
    let split = SplitSeries::build(spec, tables, yi, x, xi)?;
    let sf = sieve_function(spec, tables, xi)?;
    let lhs_sum = sf.prefix()[xi as usize];
    let eta = 1.0 / y.ln();
    let lx = x.ln();
    let c0 = 1.0 + 1.0 / lx;
    let kappa = spec.kappa;

    let rule = gauss_legendre(opts.gl_nodes, 0.0, eta);
    let small_primes: Vec<u64> = tables.primes_in(0, yi).iter().map(|&p| p as u64).collect();
    let large_terms: Vec<(u64, Complex64)> = (1..=xi)
        .filter(|&m| split.large[m as usize] != ZERO)
        .map(|m| (m, split.large[m as usize]))
        .collect();
    let lam = &split.lambda_large;

    // One frequency list: L terms, then Λ_ℓ terms, then the small primes.
    let mut freqs: Vec<u64> = large_terms.iter().map(|t| t.0).collect();
    let lam_off = freqs.len();
    freqs.extend(lam.iter().map(|t| t.0));
    let sp_off = freqs.len();
    freqs.extend(&small_primes);
    let logs: Vec<f64> = freqs.iter().map(|&m| (m as f64).ln()).collect();

    let top_freq = x * (x / y).powi(2);
    let (h, counts) = common_step(ts, x * top_freq)?;
    let top = counts.iter().copied().max().unwrap();
    let real = spec.is_real();

    let euler = |z: &[Complex64]| -> Result<Complex64> {
        let mut acc = Complex64::new(1.0, 0.0);
        for (&p, &zp) in small_primes.iter().zip(z) {
            acc *= spec.euler_factor(p, zp)?;
        }
        Ok(acc)
    };

    let sweep = |sign: f64| -> Result<Vec<Complex64>> {
        let step = sign * h;
        let out = sample_grid(
            top,
            || Rotor::new(logs.clone(), step),
            |rot, k, first| {
                let t = k as f64 * step;
                if first {
                    rot.anchor(t);
                } else {
                    rot.advance();
                }
                let z = |j: usize| Complex64::new(rot.re[j], rot.im[j]);
                // Per β: 𝓛(s+β), Σ Λ_ℓ(m)/m^{s−β}, Σ Λ_ℓ(n)/n^{s+β}.
                let per_beta: Vec<(f64, f64, Complex64)> = rule
                    .iter()
                    .map(|&(b, w)| {
                        let l: Complex64 = large_terms
                            .iter()
                            .enumerate()
                            .map(|(j, &(m, v))| v * z(j) * (m as f64).powf(-(c0 + b)))
                            .sum();
                        let (mut d1, mut d2) = (ZERO, ZERO);
                        for (j, &(m, v)) in lam.iter().enumerate() {
                            let zz = z(lam_off + j) * v;
                            let lm = (m as f64).ln();
                            d1 += zz * (-(c0 - b) * lm).exp();
                            d2 += zz * (-(c0 + b) * lm).exp();
                        }
                        (b, w, l * d1 * d2)
                    })
                    .collect();
                let s = Complex64::new(c0, t);
                let mut acc = ZERO;
                let mut zs = vec![ZERO; small_primes.len()];
                for &(a, wa) in &rule {
                    for &(b, wb, rest) in &per_beta {
                        let shift = a + b;
                        for (j, &p) in small_primes.iter().enumerate() {
                            zs[j] = z(sp_off + j) * (p as f64).powf(shift - c0);
                        }
                        let sv = match euler(&zs) {
                            Ok(v) => v,
                            Err(_) => return Complex64::new(f64::NAN, f64::NAN),
                        };
                        let w = s - shift;
                        acc += sv * rest * (w * lx).exp() / w * (wa * wb);
                    }
                }
                acc / PI
            },
        );
        if out.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(LabError::Consistency("non-finite integrand in the four-factor integral".into()));
        }
        Ok(out)
    };
    let pos = sweep(1.0)?;
    let neg = if real { None } else { Some(sweep(-1.0)?) };

    let points: Vec<SplitPoint> = ts
        .iter()
        .zip(&counts)
        .map(|(&t_max, &cnt)| {
            let (integral, coarse) = line_from_half(&pos, neg.as_deref(), cnt, h);
            let residual = (integral - lhs_sum).norm();
            let error_budget = x * y.ln().powf(kappa) / lx + x * lx.powf(kappa) / t_max;
            SplitPoint {
                t_max,
                integral,
                coarse,
                richardson: (integral - coarse).norm(),
                residual,
                error_budget,
                ratio: residual / error_budget,
                t_in_range: t_max <= x.powf(0.9),
            }
        })
        .collect();
    let mut order: Vec<&SplitPoint> = points.iter().collect();
    order.sort_by(|a, b| a.t_max.total_cmp(&b.t_max));
    let ratio_non_increasing = order.windows(2).all(|w| w[1].ratio <= w[0].ratio);
    Ok(SplitReport {
        spec: spec.to_string(),
        x,
        y,
        eta,
        c0,
        lhs_sum,
        points,
        ratio_non_increasing,
        h,
        nodes: if real { top + 1 } else { 2 * top + 2 },
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MeanSquareReport {
    pub lhs: f64,
    pub rhs: f64,
    /// lhs/rhs; zero when both sides vanish.
    pub recorded_c: f64,
    pub t_max: f64,
    pub x: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<u64>,
    pub support: usize,
    pub h: f64,
    pub richardson: f64,
}

/// ∫_{−T}^{T}|Σ a(n)Λ(n)n^{−it}|² dt against Σ n|a(n)|²Λ(n); with a modulus
/// the left side is averaged over the characters and the right side divided
/// by φ(q).
pub fn meansquare_check(
    tables: &PrimeTables,
    weights: &[(u64, Complex64)],
    t_max: f64,
    x: f64,
    q: Option<u64>,
) -> Result<MeanSquareReport> {
    if !(t_max >= 1.0 && t_max.is_finite()) {
        return Err(LabError::domain(format!("T must be finite and ≥ 1, got {t_max}")));
    }
    let lo = t_max * t_max;
    for &(n, _) in weights {
        if (n as f64) < lo || n as f64 > x {
            return Err(LabError::domain(format!("weight at n = {n} lies outside [T², x] = [{lo}, {x}]")));
        }
    }
    tables.require(x.floor() as u64)?;
    let terms: Vec<(u64, Complex64)> = weights
        .iter()
        .filter_map(|&(n, a)| Some(tables.mangoldt(n)).filter(|l| *l > 0.0).map(|l| (n, a * l)))
        .collect();
    let (chars, phi) = match q {
        Some(q) => {
            let g = CharGroup::new(q)?;
            (g.characters(), g.phi() as f64)
        }
        None => (Vec::new(), 1.0),
    };
    let rhs: f64 = terms
        .iter()
        .map(|&(n, al)| {
            let l = tables.mangoldt(n);
            n as f64 * al.norm_sqr() / l
        })
        .sum::<f64>()
        / phi;
    if terms.is_empty() {
        return Ok(MeanSquareReport { lhs: 0.0, rhs, recorded_c: 0.0, t_max, x, q, support: 0, h: 0.0, richardson: 0.0 });
    }
    let h = admissible_step(t_max, x, 4);
    let m = (2.0 * t_max / h).round() as usize;
    let logs: Vec<f64> = terms.iter().map(|t| (t.0 as f64).ln()).collect();
    let coefs: Vec<Vec<Complex64>> = if chars.is_empty() {
        vec![terms.iter().map(|t| t.1).collect()]
    } else {
        chars.iter().map(|c| terms.iter().map(|t| t.1 * c.eval(t.0)).collect()).collect()
    };
    let values = sample_grid(
        m,
        || Rotor::new(logs.clone(), h),
        |rot, k, first| {
            if first {
                rot.anchor(-t_max + k as f64 * h);
            } else {
                rot.advance();
            }
            let v: f64 = coefs
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .map(|(j, a)| a * Complex64::new(rot.re[j], rot.im[j]))
                        .sum::<Complex64>()
                        .norm_sqr()
                })
                .sum();
            Complex64::new(v / phi, 0.0)
        },
    );
    let (fine, coarse) = simpson_pair(&values, h);
    Ok(MeanSquareReport {
        lhs: fine.re,
        rhs,
        recorded_c: if rhs > 0.0 { fine.re / rhs } else { 0.0 },
        t_max,
        x,
        q,
        support: terms.len(),
        h,
        richardson: (fine.re - coarse.re).abs(),
    })
}

/// Named weight families for the mean-square check: `inv-n` (1/n), `one`,
/// `inv-sqrt` (n^{−1/2}), each on the primes of [T², x].
pub fn prime_weights(tables: &PrimeTables, family: &str, t_max: f64, x: f64) -> Result<Vec<(u64, Complex64)>> {
    tables.require(x.floor() as u64)?;
    let lo = (t_max * t_max).ceil() as u64;
    let f: fn(f64) -> f64 = match family {
        "inv-n" => |n| 1.0 / n,
        "one" => |_| 1.0,
        "inv-sqrt" => |n| n.powf(-0.5),
        other => return Err(LabError::Parse(other.to_string())),
    };
    Ok(tables
        .primes_in(lo.saturating_sub(1), x.floor() as u64)
        .iter()
        .map(|&p| (p as u64, Complex64::new(f(p as f64), 0.0)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_respects_the_oscillation_bound() {
        let line = LineIntegralSpec::new(1.5, 1000.0, 5.5, 10.0).unwrap();
        assert!(line.h * (55.0f64).ln() <= OSCILLATION_BOUND);
        assert_eq!(line.intervals() % 4, 0);
        let bad = LineIntegralSpec { h: 1.0, ..line };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn lanes_match_plain_sum() {
        let cr: Vec<f64> = (0..11).map(|k| k as f64 * 0.5).collect();
        let ci: Vec<f64> = (0..11).map(|k| 1.0 - k as f64).collect();
        let zr: Vec<f64> = (0..11).map(|k| (k as f64).cos()).collect();
        let zi: Vec<f64> = (0..11).map(|k| (k as f64).sin()).collect();
        let want: Complex64 = (0..11).map(|k| Complex64::new(cr[k], ci[k]) * Complex64::new(zr[k], zi[k])).sum();
        assert!((dot(&cr, &ci, &zr, &zi) - want).norm() < 1e-12);
    }

    #[test]
    fn rotor_tracks_direct_evaluation() {
        let logs = vec![0.0, 2f64.ln(), 1000f64.ln()];
        let mut r = Rotor::new(logs.clone(), 0.01);
        r.anchor(3.0);
        for _ in 0..63 {
            r.advance();
        }
        let t = 3.0 + 63.0 * 0.01;
        for (k, l) in logs.iter().enumerate() {
            let want = Complex64::cis(-l * t);
            assert!((Complex64::new(r.re[k], r.im[k]) - want).norm() < 1e-12);
        }
    }
}
