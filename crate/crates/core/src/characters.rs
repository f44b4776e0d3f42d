//! Dirichlet characters modulo q.
//!
//! The unit group (Z/qZ)^× is decomposed by CRT into cyclic components in
//! ascending prime order; a power of two `2^a` with `a ≥ 3` contributes the
//! two components ⟨−1⟩ and ⟨5⟩, in that order. A character is an exponent
//! vector over these components and is evaluated from discrete logarithms as
//! an exact rational multiple of 2π.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::sieve::SievedFunction;

pub const MAX_MODULUS: u64 = 100_000;

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

fn factor_small(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            let mut k = 0;
            while n % d == 0 {
                n /= d;
                k += 1;
            }
            out.push((d, k));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

fn primitive_root(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let rs: Vec<u64> = factor_small(p - 1).into_iter().map(|(r, _)| r).collect();
    (2..p)
        .find(|&g| rs.iter().all(|&r| pow_mod(g, (p - 1) / r, p) != 1))
        .expect("every odd prime has a primitive root")
}

/// exp(2πi·num/den) with the eighth roots of unity returned exactly.
pub fn root_of_unity(num: u64, den: u64) -> Complex64 {
    let num = num % den;
    if num == 0 {
        return Complex64::new(1.0, 0.0);
    }
    if 2 * num == den {
        return Complex64::new(-1.0, 0.0);
    }
    if 4 * num == den {
        return Complex64::new(0.0, 1.0);
    }
    if 4 * num == 3 * den {
        return Complex64::new(0.0, -1.0);
    }
    let theta = std::f64::consts::TAU * (num as f64) / (den as f64);
    Complex64::new(theta.cos(), theta.sin())
}

#[derive(Debug, Clone)]
struct Component {
    prime: u64,
    modulus: u64,
    order: u64,
    generator: i64,
    /// Discrete log indexed by residue mod `modulus`; `u32::MAX` for non-units.
    dlog: Vec<u32>,
}

/// The full character group modulo q.
#[derive(Debug)]
pub struct CharGroup {
    q: u64,
    phi: u64,
    factors: Vec<(u64, u32)>,
    components: Vec<Component>,
    exponent: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComponentInfo {
    pub prime: u64,
    pub modulus: u64,
    pub order: u64,
    pub generator: i64,
}

impl CharGroup {
    pub fn new(q: u64) -> Result<Arc<Self>> {
        if q == 0 || q > MAX_MODULUS {
            return Err(LabError::domain(format!("modulus q = {q} outside 1..={MAX_MODULUS}")));
        }
        let factors = factor_small(q);
        let mut components = Vec::new();
        for &(p, a) in &factors {
            let m = p.pow(a);
            if p == 2 {
                match a {
                    1 => {}
                    2 => {
                        let mut dlog = vec![u32::MAX; 4];
                        dlog[1] = 0;
                        dlog[3] = 1;
                        components.push(Component { prime: 2, modulus: 4, order: 2, generator: -1, dlog });
                    }
                    _ => {
                        let mut sign = vec![u32::MAX; m as usize];
                        for r in (1..m).step_by(2) {
                            sign[r as usize] = if r % 4 == 1 { 0 } else { 1 };
                        }
                        components.push(Component { prime: 2, modulus: m, order: 2, generator: -1, dlog: sign });
                        let ord = m / 4;
                        let mut five = vec![u32::MAX; m as usize];
                        let mut v = 1u64;
                        for j in 0..ord {
                            five[v as usize] = j as u32;
                            five[(m - v) as usize] = j as u32;
                            v = v * 5 % m;
                        }
                        components.push(Component { prime: 2, modulus: m, order: ord, generator: 5, dlog: five });
                    }
                }
            } else {
                let mut g = primitive_root(p);
                if a > 1 && pow_mod(g, p - 1, p * p) == 1 {
                    g += p;
                }
                let ord = m / p * (p - 1);
                let mut dlog = vec![u32::MAX; m as usize];
                let mut v = 1u64;
                for j in 0..ord {
                    dlog[v as usize] = j as u32;
                    v = v * g % m;
                }
                components.push(Component { prime: p, modulus: m, order: ord, generator: g as i64, dlog });
            }
        }
        let phi = factors.iter().map(|&(p, a)| p.pow(a - 1) * (p - 1)).product();
        let exponent = components.iter().fold(1, |acc, c| lcm(acc, c.order));
        Ok(Arc::new(CharGroup { q, phi, factors, components, exponent }))
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    pub fn phi(&self) -> u64 {
        self.phi
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn component_info(&self) -> Vec<ComponentInfo> {
        self.components
            .iter()
            .map(|c| ComponentInfo { prime: c.prime, modulus: c.modulus, order: c.order, generator: c.generator })
            .collect()
    }

    pub fn orders(&self) -> Vec<u64> {
        self.components.iter().map(|c| c.order).collect()
    }

    pub fn is_unit(&self, n: u64) -> bool {
        gcd(n % self.q, self.q) == 1
    }

    /// Exponent vector of a unit `n` with respect to the component generators.
    pub fn dlog(&self, n: u64) -> Option<Vec<u64>> {
        if !self.is_unit(n) {
            return None;
        }
        Some(
            self.components
                .iter()
                .map(|c| c.dlog[(n % c.modulus) as usize] as u64)
                .collect(),
        )
    }

    /// All φ(q) characters in canonical (lexicographic exponent) order.
    pub fn characters(self: &Arc<Self>) -> Vec<DirichletCharacter> {
        (0..self.phi).map(|i| self.character(i).expect("index below phi")).collect()
    }

    /// Character with canonical index `index`; the principal character is 0.
    pub fn character(self: &Arc<Self>, index: u64) -> Result<DirichletCharacter> {
        if index >= self.phi {
            return Err(LabError::domain(format!("character index {index} ≥ φ({}) = {}", self.q, self.phi)));
        }
        let mut rem = index;
        let mut exps = vec![0; self.components.len()];
        for (e, c) in exps.iter_mut().zip(&self.components).rev() {
            *e = rem % c.order;
            rem /= c.order;
        }
        self.from_exponents(&exps)
    }

    pub fn from_exponents(self: &Arc<Self>, exps: &[u64]) -> Result<DirichletCharacter> {
        if exps.len() != self.components.len() {
            return Err(LabError::domain(format!(
                "modulus {} has {} components, got exponent vector of length {}",
                self.q,
                self.components.len(),
                exps.len()
            )));
        }
        let exps: Vec<u64> = exps.iter().zip(&self.components).map(|(&e, c)| e % c.order).collect();
        Ok(DirichletCharacter::new(self.clone(), exps))
    }

    pub fn principal(self: &Arc<Self>) -> DirichletCharacter {
        DirichletCharacter::new(self.clone(), vec![0; self.components.len()])
    }

    /// Real characters (χ² = χ₀) in canonical order, principal first.
    pub fn real_characters(self: &Arc<Self>) -> Vec<DirichletCharacter> {
        self.characters().into_iter().filter(|c| c.is_real()).collect()
    }

    /// The k-th non-principal real character (1-based) in canonical order.
    pub fn quadratic(self: &Arc<Self>, k: usize) -> Result<DirichletCharacter> {
        self.real_characters()
            .into_iter()
            .filter(|c| !c.is_principal())
            .nth(k.wrapping_sub(1))
            .ok_or_else(|| LabError::domain(format!("modulus {} has no quadratic character number {k}", self.q)))
    }
}

/// A Dirichlet character identified by its exponent vector.
#[derive(Debug, Clone)]
pub struct DirichletCharacter {
    group: Arc<CharGroup>,
    exps: Vec<u64>,
    /// Σ e_i·(L/o_i) multipliers, L the group exponent.
    weights: Vec<u64>,
    order: u64,
    index: u64,
}

impl PartialEq for DirichletCharacter {
    fn eq(&self, other: &Self) -> bool {
        self.group.q == other.group.q && self.exps == other.exps
    }
}

impl Eq for DirichletCharacter {}

impl DirichletCharacter {
    fn new(group: Arc<CharGroup>, exps: Vec<u64>) -> Self {
        let l = group.exponent;
        let weights = exps
            .iter()
            .zip(&group.components)
            .map(|(&e, c)| e * (l / c.order) % l)
            .collect();
        let order = exps
            .iter()
            .zip(&group.components)
            .fold(1, |acc, (&e, c)| lcm(acc, c.order / gcd(e, c.order)));
        let mut index = 0;
        for (&e, c) in exps.iter().zip(&group.components) {
            index = index * c.order + e;
        }
        DirichletCharacter { group, exps, weights, order, index }
    }

    pub fn group(&self) -> &Arc<CharGroup> {
        &self.group
    }

    pub fn modulus(&self) -> u64 {
        self.group.q
    }

    pub fn exponents(&self) -> &[u64] {
        &self.exps
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn is_principal(&self) -> bool {
        self.order == 1
    }

    pub fn is_real(&self) -> bool {
        self.order <= 2
    }

    pub fn conj(&self) -> DirichletCharacter {
        let exps = self
            .exps
            .iter()
            .zip(&self.group.components)
            .map(|(&e, c)| (c.order - e) % c.order)
            .collect();
        DirichletCharacter::new(self.group.clone(), exps)
    }

    /// Pointwise product of two characters of the same modulus.
    pub fn mul(&self, other: &DirichletCharacter) -> Result<DirichletCharacter> {
        if self.modulus() != other.modulus() {
            return Err(LabError::domain("characters of different moduli"));
        }
        let exps = self
            .exps
            .iter()
            .zip(&other.exps)
            .zip(&self.group.components)
            .map(|((&a, &b), c)| (a + b) % c.order)
            .collect();
        Ok(DirichletCharacter::new(self.group.clone(), exps))
    }

    /// χ(n): an exact root of unity for units, zero otherwise.
    pub fn eval(&self, n: u64) -> Complex64 {
        match self.phase(n) {
            Some(num) => root_of_unity(num, self.group.exponent),
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Numerator of the angle of χ(n) over the group exponent, or `None`
    /// when gcd(n, q) > 1.
    pub fn phase(&self, n: u64) -> Option<u64> {
        if !self.group.is_unit(n) {
            return None;
        }
        let l = self.group.exponent;
        let mut num = 0;
        for (w, c) in self.weights.iter().zip(&self.group.components) {
            let d = c.dlog[(n % c.modulus) as usize] as u64;
            num = (num + w * d % l) % l;
        }
        Some(num)
    }

    /// Values χ(0), χ(1), …, χ(q−1), built on demand for tight loops.
    pub fn residue_values(&self) -> Vec<Complex64> {
        (0..self.group.q).map(|n| self.eval(n)).collect()
    }
}

impl fmt::Display for DirichletCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exps.is_empty() {
            return write!(f, "{}:principal", self.group.q);
        }
        let parts: Vec<String> = self.exps.iter().map(|e| e.to_string()).collect();
        write!(f, "{}:{}", self.group.q, parts.join(","))
    }
}

/// Parses `q:e1,e2,…`, `q:principal`, `q:quadratic:k`, or — when a default
/// modulus is supplied — the bare aliases `principal` and `quadratic:k`.
pub fn parse_character(text: &str, default_q: Option<u64>) -> Result<DirichletCharacter> {
    let text = text.trim();
    let bad = || LabError::Parse(text.to_string());
    let (q, rest) = match text.split_once(':') {
        Some((head, rest)) if head.chars().all(|c| c.is_ascii_digit()) && !head.is_empty() => {
            (head.parse::<u64>().map_err(|_| bad())?, rest)
        }
        _ => (default_q.ok_or_else(bad)?, text),
    };
    let group = CharGroup::new(q)?;
    if rest == "principal" {
        return Ok(group.principal());
    }
    if let Some(k) = rest.strip_prefix("quadratic:") {
        let k: usize = k.parse().map_err(|_| bad())?;
        return group.quadratic(k);
    }
    if rest.is_empty() {
        return group.from_exponents(&[]);
    }
    let exps: Vec<u64> = rest
        .split(',')
        .map(|s| s.trim().parse::<u64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    group.from_exponents(&exps)
}

/// S_f(x, χ) = Σ_{n≤x} f(n)·conj(χ(n)), in one pass over the table.
pub fn s_f_chi(sf: &SievedFunction, chi: &DirichletCharacter, x: f64) -> Result<Complex64> {
    let n = sf.floor_index(x)?;
    let conj: Vec<Complex64> = chi.residue_values().iter().map(|z| z.conj()).collect();
    let q = chi.modulus() as usize;
    let vals = sf.values();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut r = 1 % q;
    for v in &vals[1..=n] {
        acc += v * conj[r];
        r += 1;
        if r == q {
            r = 0;
        }
    }
    Ok(acc)
}

/// Σ_{n≤x, n≡a (q)} f(n) for every residue a = 0..q−1.
pub fn residue_class_sums(sf: &SievedFunction, q: u64, x: f64) -> Result<Vec<Complex64>> {
    let n = sf.floor_index(x)?;
    let q = q as usize;
    let mut out = vec![Complex64::new(0.0, 0.0); q];
    let vals = sf.values();
    let mut r = 1 % q;
    for v in &vals[1..=n] {
        out[r] += v;
        r += 1;
        if r == q {
            r = 0;
        }
    }
    Ok(out)
}

/// S_f(x, χ) for every χ given the residue class sums Σ_{n≡a} f(n).
pub fn character_sums_from_classes(class_sums: &[Complex64], chars: &[DirichletCharacter]) -> Vec<Complex64> {
    chars
        .iter()
        .map(|chi| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (a, s) in class_sums.iter().enumerate() {
                let c = chi.eval(a as u64);
                if c.re != 0.0 || c.im != 0.0 {
                    acc += s * c.conj();
                }
            }
            acc
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct OrthogonalityResidual {
    /// max over reduced a of |Σ_{n≡a} f(n) − φ(q)^{-1} Σ_χ χ(a) S_f(x,χ)|
    pub max_residual: f64,
    /// Σ_{n≤x} |f(n)|, the natural scale of either side.
    pub scale: f64,
}

impl OrthogonalityResidual {
    pub fn relative(&self) -> f64 {
        self.max_residual / self.scale.max(1.0)
    }
}

/// Compares the direct progression sums with their character expansion, each
/// S_f(x, χ) computed by its own pass over the table.
pub fn orthogonality_residual(q: u64, x: f64, sf: &SievedFunction) -> Result<OrthogonalityResidual> {
    let group = CharGroup::new(q)?;
    let chars = group.characters();
    let sums: Vec<Complex64> = chars.iter().map(|c| s_f_chi(sf, c, x)).collect::<Result<_>>()?;
    let direct = residue_class_sums(sf, q, x)?;
    let phi = group.phi() as f64;
    let mut max_residual: f64 = 0.0;
    for a in 0..q {
        if !group.is_unit(a) {
            continue;
        }
        let mut rhs = Complex64::new(0.0, 0.0);
        for (c, s) in chars.iter().zip(&sums) {
            rhs += c.eval(a) * s;
        }
        rhs /= phi;
        max_residual = max_residual.max((direct[a as usize] - rhs).norm());
    }
    let n = sf.floor_index(x)?;
    let scale = sf.values()[1..=n].iter().map(|v| v.norm()).sum();
    Ok(OrthogonalityResidual { max_residual, scale })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn modulus_four() {
        let g = CharGroup::new(4).unwrap();
        assert_eq!(g.phi(), 2);
        let chars = g.characters();
        assert_eq!(chars.len(), 2);
        let nonprincipal: Vec<_> = chars.iter().filter(|c| !c.is_principal()).collect();
        assert_eq!(nonprincipal.len(), 1);
        assert!(nonprincipal[0].is_real());
        assert_eq!(nonprincipal[0].eval(3), Complex64::new(-1.0, 0.0));
        assert_eq!(nonprincipal[0].eval(2), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn modulus_five_is_cyclic() {
        let g = CharGroup::new(5).unwrap();
        assert_eq!(g.orders(), vec![4]);
        let chi = g.from_exponents(&[1]).unwrap();
        assert_eq!(chi.eval(2), Complex64::new(0.0, 1.0));
        assert_eq!(chi.order(), 4);
        let quad = g.quadratic(1).unwrap();
        assert_eq!(quad.eval(2), Complex64::new(-1.0, 0.0));
        assert_eq!(quad.eval(4), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn modulus_twelve_all_real() {
        let g = CharGroup::new(12).unwrap();
        assert_eq!(g.phi(), 4);
        assert!(g.characters().iter().all(|c| c.is_real()));
    }

    #[test]
    fn principal_values() {
        let g = CharGroup::new(7).unwrap();
        assert_eq!(g.principal().eval(10), Complex64::new(1.0, 0.0));
        assert_eq!(g.principal().eval(14), Complex64::new(0.0, 0.0));
        let g1 = CharGroup::new(1).unwrap();
        assert_eq!(g1.phi(), 1);
        assert_eq!(g1.principal().eval(10), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn two_power_components() {
        let g = CharGroup::new(16).unwrap();
        assert_eq!(g.orders(), vec![2, 4]);
        for n in (1..16).step_by(2) {
            let e = g.dlog(n).unwrap();
            let mut v: i64 = if e[0] == 1 { -1 } else { 1 };
            for _ in 0..e[1] {
                v = v * 5 % 16;
            }
            assert_eq!(v.rem_euclid(16) as u64, n);
        }
    }

    #[test]
    fn row_orthogonality_and_count() {
        for q in [1u64, 2, 3, 4, 5, 7, 8, 9, 12, 15, 16, 24, 30, 32, 45, 100] {
            let g = CharGroup::new(q).unwrap();
            let chars = g.characters();
            assert_eq!(chars.len() as u64, g.phi());
            assert_eq!(chars.iter().filter(|c| c.is_principal()).count(), 1);
            for a in &chars {
                for b in &chars {
                    let s: Complex64 = (0..q).map(|n| a.eval(n) * b.eval(n).conj()).sum();
                    let want = if a == b { g.phi() as f64 } else { 0.0 };
                    assert!((s - want).norm() <= 1e-9 * g.phi() as f64, "q={q} {a} {b}");
                }
            }
            for c in g.real_characters() {
                assert!(close(c.mul(&c).unwrap().eval(1), Complex64::new(1.0, 0.0)));
                assert!(c.mul(&c).unwrap().is_principal());
            }
        }
    }

    #[test]
    fn multiplicative_and_unimodular() {
        let g = CharGroup::new(360).unwrap();
        for chi in g.characters().iter().step_by(7) {
            for m in 1..60u64 {
                for n in 1..60u64 {
                    assert!(close(chi.eval(m * n), chi.eval(m) * chi.eval(n)));
                }
                let v = chi.eval(m);
                if gcd(m, 360) == 1 {
                    assert!((v.norm() - 1.0).abs() < 1e-12);
                } else {
                    assert_eq!(v, Complex64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn parse_and_display() {
        let c = parse_character("5:1", None).unwrap();
        assert_eq!(c.to_string(), "5:1");
        assert_eq!(parse_character("principal", Some(7)).unwrap(), CharGroup::new(7).unwrap().principal());
        let q = parse_character("3:quadratic:1", None).unwrap();
        assert_eq!(q.eval(2), Complex64::new(-1.0, 0.0));
        assert!(parse_character("x:1", None).is_err());
        assert!(parse_character("5:1,2", None).is_err());
        assert_eq!(parse_character("1:principal", None).unwrap().to_string(), "1:principal");
    }

    #[test]
    fn indices_roundtrip() {
        let g = CharGroup::new(40).unwrap();
        for (i, c) in g.characters().iter().enumerate() {
            assert_eq!(c.index(), i as u64);
            assert_eq!(g.from_exponents(c.exponents()).unwrap(), *c);
        }
        assert!(g.character(g.phi()).is_err());
        assert!(CharGroup::new(0).is_err());
        assert!(CharGroup::new(MAX_MODULUS + 1).is_err());
    }
}
