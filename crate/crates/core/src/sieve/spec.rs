//! The catalogue of multiplicative functions, described by their values at
//! prime powers, and their canonical text form `name(args)`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::characters::{parse_character, DirichletCharacter};
use crate::error::{LabError, Result};

/// Prime-power rule of a builtin multiplicative function.
#[derive(Debug, Clone, PartialEq)]
pub enum Rule {
    /// f ≡ 1, so F = ζ.
    One,
    /// Coefficients of ζ(s)^β: f(p^k) = (β)(β+1)…(β+k−1)/k!.
    DKappa(f64),
    Moebius,
    Liouville,
    /// f(n) = n^{iα}.
    Nit(f64),
    /// f(p) = sign(cos(T log p)), completely multiplicative.
    SignCos(f64),
    /// f(p) = (1 + sign(cos(T log p)))/2, completely multiplicative.
    GPlus(f64),
    /// f(p^k) = 0 for p ≤ y, otherwise the inner rule.
    RestrictLarge(Box<FunctionSpec>, u64),
    /// f(p^k) = 0 for p > y, otherwise the inner rule.
    RestrictSmall(Box<FunctionSpec>, u64),
    /// f(p^k)·χ(p^k).
    Twist(Box<FunctionSpec>, DirichletCharacter),
    /// f(p) = ±1 drawn from a seeded stream, completely multiplicative.
    RandomPm1(u64),
}

/// A multiplicative function in the class C(κ), given by its prime-power rule.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionSpec {
    pub kappa: f64,
    pub rule: Rule,
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// ±1 for prime `p` from the stream seeded by `seed`; independent of the
/// order in which primes are visited.
pub fn random_sign(seed: u64, p: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_word_pos(p as u128);
    if rng.next_u32() & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl FunctionSpec {
    pub fn new(rule: Rule) -> Result<Self> {
        let kappa = match &rule {
            Rule::DKappa(b) => {
                if !(b.is_finite() && *b > 0.0) {
                    return Err(LabError::domain(format!("d_kappa needs β > 0, got {b}")));
                }
                *b
            }
            Rule::Nit(a) | Rule::SignCos(a) | Rule::GPlus(a) => {
                if !a.is_finite() {
                    return Err(LabError::domain(format!("non-finite parameter {a}")));
                }
                1.0
            }
            Rule::RestrictLarge(inner, _) | Rule::RestrictSmall(inner, _) | Rule::Twist(inner, _) => inner.kappa,
            _ => 1.0,
        };
        Ok(FunctionSpec { kappa, rule })
    }

    pub fn one() -> Self {
        FunctionSpec { kappa: 1.0, rule: Rule::One }
    }

    pub fn moebius() -> Self {
        FunctionSpec { kappa: 1.0, rule: Rule::Moebius }
    }

    pub fn liouville() -> Self {
        FunctionSpec { kappa: 1.0, rule: Rule::Liouville }
    }

    pub fn d_kappa(beta: f64) -> Result<Self> {
        Self::new(Rule::DKappa(beta))
    }

    pub fn nit(alpha: f64) -> Result<Self> {
        Self::new(Rule::Nit(alpha))
    }

    pub fn sign_cos(t: f64) -> Result<Self> {
        Self::new(Rule::SignCos(t))
    }

    pub fn g_plus(t: f64) -> Result<Self> {
        Self::new(Rule::GPlus(t))
    }

    pub fn random_pm1(seed: u64) -> Self {
        FunctionSpec { kappa: 1.0, rule: Rule::RandomPm1(seed) }
    }

    pub fn restrict_large(self, y: u64) -> Self {
        FunctionSpec { kappa: self.kappa, rule: Rule::RestrictLarge(Box::new(self), y) }
    }

    pub fn restrict_small(self, y: u64) -> Self {
        FunctionSpec { kappa: self.kappa, rule: Rule::RestrictSmall(Box::new(self), y) }
    }

    pub fn twist(self, chi: DirichletCharacter) -> Self {
        FunctionSpec { kappa: self.kappa, rule: Rule::Twist(Box::new(self), chi) }
    }

    /// f(p^k) for prime `p` and `k ≥ 1`. The value is not checked for
    /// primality of `p`; callers pass primes from [`super::PrimeTables`].
    pub fn evaluate(&self, p: u64, k: u32) -> Result<Complex64> {
        if k == 0 {
            return Ok(Complex64::new(1.0, 0.0));
        }
        let lp = (p as f64).ln();
        let v = match &self.rule {
            Rule::One => Complex64::new(1.0, 0.0),
            Rule::DKappa(b) => {
                let mut c = 1.0;
                for j in 1..=k {
                    c *= (b + j as f64 - 1.0) / j as f64;
                }
                Complex64::new(c, 0.0)
            }
            Rule::Moebius => Complex64::new(if k == 1 { -1.0 } else { 0.0 }, 0.0),
            Rule::Liouville => Complex64::new(if k % 2 == 1 { -1.0 } else { 1.0 }, 0.0),
            Rule::Nit(a) => Complex64::cis(k as f64 * a * lp),
            Rule::SignCos(t) => Complex64::new(sign((t * lp).cos()).powi(k as i32), 0.0),
            Rule::GPlus(t) => Complex64::new(((1.0 + sign((t * lp).cos())) / 2.0).powi(k as i32), 0.0),
            Rule::RestrictLarge(inner, y) => {
                if p <= *y {
                    Complex64::new(0.0, 0.0)
                } else {
                    inner.evaluate(p, k)?
                }
            }
            Rule::RestrictSmall(inner, y) => {
                if p > *y {
                    Complex64::new(0.0, 0.0)
                } else {
                    inner.evaluate(p, k)?
                }
            }
            Rule::Twist(inner, chi) => {
                let c = chi.eval(p);
                if c == Complex64::new(0.0, 0.0) {
                    c
                } else {
                    inner.evaluate(p, k)? * c.powu(k)
                }
            }
            Rule::RandomPm1(seed) => Complex64::new(random_sign(*seed, p).powi(k as i32), 0.0),
        };
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(LabError::RuleEvaluation { p, k, reason: format!("non-finite value {v}") });
        }
        Ok(v)
    }

    pub fn completely_multiplicative(&self) -> bool {
        match &self.rule {
            Rule::One | Rule::Liouville | Rule::Nit(_) | Rule::SignCos(_) | Rule::GPlus(_) | Rule::RandomPm1(_) => true,
            Rule::DKappa(b) => *b == 1.0,
            Rule::Moebius => false,
            Rule::RestrictLarge(inner, _) | Rule::RestrictSmall(inner, _) | Rule::Twist(inner, _) => {
                inner.completely_multiplicative()
            }
        }
    }

    /// True when every value f(n) is a non-negative real.
    pub fn is_nonnegative(&self) -> bool {
        match &self.rule {
            Rule::One | Rule::DKappa(_) | Rule::GPlus(_) => true,
            Rule::RestrictLarge(inner, _) | Rule::RestrictSmall(inner, _) => inner.is_nonnegative(),
            Rule::Twist(inner, chi) => chi.is_principal() && inner.is_nonnegative(),
            _ => false,
        }
    }

    /// True when every value f(n) is real.
    pub fn is_real(&self) -> bool {
        match &self.rule {
            Rule::Nit(a) => *a == 0.0,
            Rule::RestrictLarge(inner, _) | Rule::RestrictSmall(inner, _) => inner.is_real(),
            Rule::Twist(inner, chi) => chi.is_real() && inner.is_real(),
            _ => true,
        }
    }

    /// True when the spec or any nested spec draws random signs.
    pub fn uses_seed(&self) -> bool {
        match &self.rule {
            Rule::RandomPm1(_) => true,
            Rule::RestrictLarge(inner, _) | Rule::RestrictSmall(inner, _) | Rule::Twist(inner, _) => inner.uses_seed(),
            _ => false,
        }
    }

    /// Local factor Σ_{k≥0} f(p^k) z^k, summed until the terms are negligible.
    pub fn euler_factor(&self, p: u64, z: Complex64) -> Result<Complex64> {
        let r = z.norm();
        if r >= 1.0 {
            return Err(LabError::domain(format!("Euler factor at p = {p} needs |z| < 1, got {r}")));
        }
        if r == 0.0 {
            return Ok(Complex64::new(1.0, 0.0));
        }
        if let Some(v) = self.closed_euler_factor(p, z)? {
            return Ok(v);
        }
        self.euler_series(p, z)
    }

    fn euler_series(&self, p: u64, z: Complex64) -> Result<Complex64> {
        let mut acc = Complex64::new(1.0, 0.0);
        let mut zk = Complex64::new(1.0, 0.0);
        for k in 1..=200u32 {
            zk *= z;
            let term = self.evaluate(p, k)? * zk;
            acc += term;
            // Coefficients grow at most polynomially in k, so a geometric
            // cut-off well below machine precision is safe.
            if (k as f64 + self.kappa).powf(self.kappa) * zk.norm() < 1e-18 {
                break;
            }
        }
        Ok(acc)
    }
}

impl FunctionSpec {
    /// Closed forms of the local factor where the rule admits one.
    fn closed_euler_factor(&self, p: u64, z: Complex64) -> Result<Option<Complex64>> {
        let one = Complex64::new(1.0, 0.0);
        Ok(match &self.rule {
            Rule::Moebius => Some(one - z),
            Rule::DKappa(b) => Some((one - z).powf(-*b)),
            Rule::RestrictLarge(_, y) if p <= *y => Some(one),
            Rule::RestrictSmall(_, y) if p > *y => Some(one),
            Rule::RestrictLarge(inner, _) | Rule::RestrictSmall(inner, _) => inner.closed_euler_factor(p, z)?,
            Rule::Twist(inner, chi) => {
                let c = chi.eval(p);
                if c == Complex64::new(0.0, 0.0) {
                    Some(one)
                } else {
                    inner.closed_euler_factor(p, z * c)?
                }
            }
            _ if self.completely_multiplicative() => Some(one / (one - self.evaluate(p, 1)? * z)),
            _ => None,
        })
    }
}

fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.rule {
            Rule::One => write!(f, "one"),
            Rule::DKappa(b) => write!(f, "d_kappa({})", fmt_f64(*b)),
            Rule::Moebius => write!(f, "moebius"),
            Rule::Liouville => write!(f, "liouville"),
            Rule::Nit(a) => write!(f, "nit({})", fmt_f64(*a)),
            Rule::SignCos(t) => write!(f, "sign_cos({})", fmt_f64(*t)),
            Rule::GPlus(t) => write!(f, "g_plus({})", fmt_f64(*t)),
            Rule::RestrictLarge(inner, y) => write!(f, "restrict_large({inner},{y})"),
            Rule::RestrictSmall(inner, y) => write!(f, "restrict_small({inner},{y})"),
            Rule::Twist(inner, chi) => write!(f, "twist({inner},{chi})"),
            Rule::RandomPm1(s) => write!(f, "random_pm1({s})"),
        }
    }
}

/// Parses a real argument; accepts plain numbers and multiples of π such as
/// `pi`, `2pi`, `0.5pi`.
pub fn parse_real(s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = || LabError::Parse(s.to_string());
    let v = if let Some(head) = s.strip_suffix("pi").or_else(|| s.strip_suffix('π')) {
        let head = head.trim_end_matches('*');
        let m = if head.is_empty() { 1.0 } else { head.parse::<f64>().map_err(|_| bad())? };
        m * std::f64::consts::PI
    } else {
        s.parse::<f64>().map_err(|_| bad())?
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

fn parse_int(s: &str) -> Result<u64> {
    let s = s.trim();
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    // Allow exact integers written in scientific notation, e.g. 1e3.
    let v: f64 = s.parse().map_err(|_| LabError::Parse(s.to_string()))?;
    if v >= 0.0 && v.fract() == 0.0 && v < 1.8e19 {
        Ok(v as u64)
    } else {
        Err(LabError::Parse(s.to_string()))
    }
}

/// Splits `s` at the first comma that is not nested in parentheses.
fn split_top(s: &str) -> Option<(&str, &str)> {
    let mut depth = 0i32;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => return Some((&s[..i], &s[i + 1..])),
            _ => {}
        }
    }
    None
}

impl FromStr for FunctionSpec {
    type Err = LabError;

    fn from_str(text: &str) -> Result<Self> {
        let s = text.trim();
        let (name, args) = match s.find('(') {
            Some(i) => {
                let inner = s[i + 1..].strip_suffix(')').ok_or_else(|| LabError::Parse(s.to_string()))?;
                (s[..i].trim(), Some(inner))
            }
            None => (s, None),
        };
        fn need<'a>(name: &str, a: Option<&'a str>) -> Result<&'a str> {
            a.ok_or_else(|| LabError::Parse(format!("{name} needs arguments")))
        }
        match (name, args) {
            ("one", None) => Ok(Self::one()),
            ("moebius" | "mu", None) => Ok(Self::moebius()),
            ("liouville" | "lambda", None) => Ok(Self::liouville()),
            ("d_kappa", a) => Self::d_kappa(parse_real(need(name, a)?)?),
            ("nit", a) => Self::nit(parse_real(need(name, a)?)?),
            ("sign_cos", a) => Self::sign_cos(parse_real(need(name, a)?)?),
            ("g_plus", a) => Self::g_plus(parse_real(need(name, a)?)?),
            ("random_pm1", a) => Ok(Self::random_pm1(parse_int(need(name, a)?)?)),
            ("restrict_large" | "restrict_small" | "twist", a) => {
                let a = need(name, a)?;
                let (inner, rest) = split_top(a).ok_or_else(|| LabError::Parse(a.to_string()))?;
                let inner: FunctionSpec = inner.parse()?;
                match name {
                    "restrict_large" => Ok(inner.restrict_large(parse_int(rest)?)),
                    "restrict_small" => Ok(inner.restrict_small(parse_int(rest)?)),
                    _ => Ok(inner.twist(parse_character(rest, None)?)),
                }
            }
            _ => Err(LabError::Parse(name.to_string())),
        }
    }
}

/// Every builtin rule with representative parameters; used by tests and by
/// the CLI's catalogue listing.
pub fn builtin_catalogue() -> Vec<FunctionSpec> {
    [
        "one",
        "d_kappa(2)",
        "d_kappa(0.5)",
        "moebius",
        "liouville",
        "nit(5)",
        "sign_cos(2pi)",
        "g_plus(2pi)",
        "restrict_large(one,5)",
        "restrict_small(moebius,7)",
        "twist(one,5:1)",
        "twist(d_kappa(0.5),7:quadratic:1)",
        "random_pm1(1)",
    ]
    .iter()
    .map(|s| s.parse().expect("catalogue entries parse"))
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::CharGroup;

    #[test]
    fn roundtrip_text_form() {
        for spec in builtin_catalogue() {
            let text = spec.to_string();
            let back: FunctionSpec = text.parse().unwrap();
            assert_eq!(back, spec, "{text}");
        }
        assert_eq!("sign_cos(6.283185307)".parse::<FunctionSpec>().unwrap().to_string(), "sign_cos(6.283185307)");
        assert_eq!("twist(one,12:1,0)".parse::<FunctionSpec>().unwrap().to_string(), "twist(one,12:1,0)");
    }

    #[test]
    fn unknown_names_report_the_token() {
        match "zeta(2)".parse::<FunctionSpec>() {
            Err(LabError::Parse(t)) => assert_eq!(t, "zeta"),
            other => panic!("{other:?}"),
        }
        assert!("d_kappa(-1)".parse::<FunctionSpec>().is_err());
        assert!("d_kappa".parse::<FunctionSpec>().is_err());
    }

    #[test]
    fn prime_power_values() {
        let d = FunctionSpec::d_kappa(0.5).unwrap();
        assert!((d.evaluate(3, 2).unwrap().re - 0.375).abs() < 1e-15);
        let d2 = FunctionSpec::d_kappa(2.0).unwrap();
        assert_eq!(d2.evaluate(2, 4).unwrap().re, 5.0);
        assert_eq!(FunctionSpec::moebius().evaluate(5, 2).unwrap().re, 0.0);
        assert_eq!(FunctionSpec::liouville().evaluate(5, 3).unwrap().re, -1.0);
        let r = FunctionSpec::one().restrict_large(5);
        assert_eq!(r.evaluate(5, 1).unwrap().re, 0.0);
        assert_eq!(r.evaluate(7, 1).unwrap().re, 1.0);
    }

    #[test]
    fn random_signs_are_reproducible() {
        let a: Vec<f64> = (2..200).map(|p| random_sign(1, p)).collect();
        let b: Vec<f64> = (2..200).rev().map(|p| random_sign(1, p)).rev().collect();
        assert_eq!(a, b);
        assert!(a.iter().any(|&s| s > 0.0) && a.iter().any(|&s| s < 0.0));
        let c: Vec<f64> = (2..200).map(|p| random_sign(2, p)).collect();
        assert_ne!(a, c);
    }

    #[test]
    fn euler_factor_closed_forms() {
        let z = Complex64::new(0.3, 0.2);
        let one = FunctionSpec::one().euler_factor(2, z).unwrap();
        assert!((one - 1.0 / (1.0 - z)).norm() < 1e-14);
        let mu = FunctionSpec::moebius().euler_factor(2, z).unwrap();
        assert!((mu - (1.0 - z)).norm() < 1e-15);
        let d = FunctionSpec::d_kappa(0.5).unwrap().euler_factor(3, z).unwrap();
        assert!((d - (1.0 - z).powf(-0.5)).norm() < 1e-13);
    }

    #[test]
    fn closed_factors_match_the_power_series() {
        let q5 = CharGroup::new(5).unwrap();
        let specs = [
            FunctionSpec::one(),
            FunctionSpec::moebius(),
            FunctionSpec::d_kappa(2.0).unwrap(),
            FunctionSpec::nit(1.5).unwrap(),
            FunctionSpec::liouville().restrict_large(2),
            FunctionSpec::moebius().twist(q5.character(1).unwrap()),
        ];
        let z = Complex64::new(0.4, -0.3);
        for spec in &specs {
            for p in [2, 3, 5, 7] {
                let closed = spec.euler_factor(p, z).unwrap();
                let series = spec.euler_series(p, z).unwrap();
                assert!((closed - series).norm() < 1e-12, "{spec} at {p}");
            }
        }
    }
}
