//! The worked examples: Selberg–Delange normalisation of Σ d_β, and the
//! logarithmic decay rates of the sign-cos and g-plus functions.

use halasz_core::sieve::{sieve_function, FunctionSpec, PrimeTables};
use halasz_core::{LabError, Result};
use serde::Serialize;
use statrs::function::gamma::gamma;

#[derive(Debug, Clone, Serialize)]
pub struct SelbergRow {
    pub beta: f64,
    pub x: f64,
    pub sum: f64,
    /// Σ d_β(n) / (x (log x)^{β−1})
    pub normalised: f64,
    pub gamma: f64,
    /// 1/Γ(β)
    pub target: f64,
    /// normalised / target
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelbergReport {
    pub rows: Vec<SelbergRow>,
    /// Γ(2) − 1 and Γ(1/2)² − π, validating the Γ implementation.
    pub gamma_checks: [f64; 2],
}

pub fn selberg_delange(tables: &PrimeTables, x: f64, betas: &[f64]) -> Result<SelbergReport> {
    if !(x >= 3.0) {
        return Err(LabError::domain(format!("x must be at least 3, got {x}")));
    }
    let lx = x.ln();
    let rows = betas
        .iter()
        .map(|&beta| {
            let spec = FunctionSpec::d_kappa(beta)?;
            let sf = sieve_function(&spec, tables, x.floor() as u64)?;
            let sum = sf.prefix()[sf.floor_index(x)?].re;
            let normalised = sum / (x * lx.powf(beta - 1.0));
            let g = gamma(beta);
            Ok(SelbergRow { beta, x, sum, normalised, gamma: g, target: 1.0 / g, ratio: normalised * g })
        })
        .collect::<Result<_>>()?;
    Ok(SelbergReport {
        rows,
        gamma_checks: [gamma(2.0) - 1.0, gamma(0.5).powi(2) - std::f64::consts::PI],
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct AmplitudePoint {
    #[serde(rename = "X")]
    pub big_x: f64,
    pub log_log_x: f64,
    /// max over integers x ∈ [X, eX] of |Σ_{n≤x} f(n)|/x
    pub amplitude: f64,
    pub argmax: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SlopeFit {
    pub spec: String,
    pub points: Vec<AmplitudePoint>,
    /// Least-squares slope of log A(X) against log log X.
    pub slope: f64,
    pub intercept: f64,
    pub target_slope: f64,
    pub deviation: f64,
}

/// Ordinary least squares y ≈ intercept + slope·x.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// A(X) on each scale and the fitted decay exponent. The window [X, eX]
/// spans one full period of x^{2πi}, so the maximum tracks the amplitude of
/// the oscillating main term.
pub fn amplitude_fit(spec: &FunctionSpec, tables: &PrimeTables, xs: &[f64], target_slope: f64) -> Result<SlopeFit> {
    if xs.len() < 2 {
        return Err(LabError::domain("need at least two scales for a slope"));
    }
    if xs.iter().any(|&x| !(x >= 16.0)) {
        return Err(LabError::domain("scales must be at least 16"));
    }
    let top = xs.iter().cloned().fold(0.0, f64::max) * std::f64::consts::E;
    let sf = sieve_function(spec, tables, top.floor() as u64)?;
    let prefix = sf.prefix();
    let points: Vec<AmplitudePoint> = xs
        .iter()
        .map(|&big_x| {
            let lo = big_x.ceil() as usize;
            let hi = (big_x * std::f64::consts::E).floor() as usize;
            let (argmax, amplitude) = (lo..=hi)
                .map(|n| (n, prefix[n].norm() / n as f64))
                .fold((lo, f64::NEG_INFINITY), |b, c| if c.1 > b.1 { c } else { b });
            AmplitudePoint { big_x, log_log_x: big_x.ln().ln(), amplitude, argmax: argmax as u64 }
        })
        .collect();
    let lx: Vec<f64> = points.iter().map(|p| p.log_log_x).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.amplitude.ln()).collect();
    let (slope, intercept) = least_squares(&lx, &ly);
    Ok(SlopeFit { spec: spec.to_string(), points, slope, intercept, target_slope, deviation: slope - target_slope })
}
