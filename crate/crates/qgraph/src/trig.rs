//! Exact formal algebra for the trigonometric sums appearing in M(λ) − B.
//!
//! A monomial is an integer power of μ times per-edge trigonometric factors;
//! its coefficient is a multilinear polynomial in the coupling variables with
//! exact rational coefficients. Edge lengths are treated as rationally
//! independent indeterminates, so two monomials are equal exactly when their
//! canonical forms coincide. The only rewriting performed is the pair of
//! Pythagorean identities csc² = cot² + 1 and sec² = tan² + 1.

use std::collections::BTreeMap;
use std::fmt;

use num::complex::Complex64;
use num::rational::BigRational;
use num::{One, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::graph::{CouplingVector, MarkedGraph};

/// The trigonometric factor attached to one edge length l, as a function of
/// μ. `CotQuarterShift` (cot(π/4 + μl/2)) appears only in quasigraph work.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TrigFactorKind {
    Cot,
    Csc,
    Tan,
    Sec,
    TanHalf,
    CotHalf,
    CotQuarterShift,
}

impl TrigFactorKind {
    pub fn tag(&self) -> &'static str {
        match self {
            TrigFactorKind::Cot => "cot",
            TrigFactorKind::Csc => "csc",
            TrigFactorKind::Tan => "tan",
            TrigFactorKind::Sec => "sec",
            TrigFactorKind::TanHalf => "tan_half",
            TrigFactorKind::CotHalf => "cot_half",
            TrigFactorKind::CotQuarterShift => "cot_quarter_shift",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Some(match tag {
            "cot" => TrigFactorKind::Cot,
            "csc" => TrigFactorKind::Csc,
            "tan" => TrigFactorKind::Tan,
            "sec" => TrigFactorKind::Sec,
            "tan_half" => TrigFactorKind::TanHalf,
            "cot_half" => TrigFactorKind::CotHalf,
            "cot_quarter_shift" => TrigFactorKind::CotQuarterShift,
            _ => return None,
        })
    }
}

/// μ^p times a product of per-edge trig factors. Factors are keyed by
/// (edge id, kind), which fixes the canonical ordering: μ-power first, then
/// lexicographic edge id, then kind tag.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct TrigMonomial {
    pub mu_power: i32,
    pub factors: BTreeMap<(String, TrigFactorKind), u32>,
}

impl TrigMonomial {
    pub fn one() -> Self {
        TrigMonomial::default()
    }

    pub fn mu(power: i32) -> Self {
        TrigMonomial {
            mu_power: power,
            factors: BTreeMap::new(),
        }
    }

    pub fn factor(edge: &str, kind: TrigFactorKind) -> Self {
        TrigMonomial::one().with_factor(edge, kind, 1)
    }

    pub fn with_mu(mut self, power: i32) -> Self {
        self.mu_power += power;
        self
    }

    pub fn with_factor(mut self, edge: &str, kind: TrigFactorKind, exp: u32) -> Self {
        if exp > 0 {
            *self
                .factors
                .entry((edge.to_string(), kind))
                .or_insert(0) += exp;
        }
        self
    }

    /// Raw product: μ-powers add, exponents of identical (edge, kind) pairs
    /// add. No identities are applied.
    pub fn mul(&self, other: &TrigMonomial) -> TrigMonomial {
        let mut out = self.clone();
        out.mu_power += other.mu_power;
        for (key, exp) in &other.factors {
            *out.factors.entry(key.clone()).or_insert(0) += exp;
        }
        out
    }

    /// Kind recorded for `edge`, when the monomial is kind-pure there.
    pub fn kind_of(&self, edge: &str) -> Option<TrigFactorKind> {
        let mut found = None;
        for ((e, k), _) in &self.factors {
            if e == edge {
                if found.is_some() {
                    return None;
                }
                found = Some(*k);
            }
        }
        found
    }

    /// Square-free with a single kind per edge: the shape the reduced
    /// secular determinant guarantees.
    pub fn is_square_free(&self) -> bool {
        let mut last_edge: Option<&str> = None;
        for ((e, _), exp) in &self.factors {
            if *exp != 1 {
                return false;
            }
            if last_edge == Some(e.as_str()) {
                return false;
            }
            last_edge = Some(e);
        }
        true
    }

    fn split_reducible(&self) -> Option<(TrigMonomial, TrigMonomial)> {
        for ((edge, kind), exp) in &self.factors {
            let partner = match kind {
                TrigFactorKind::Csc if *exp >= 2 => TrigFactorKind::Cot,
                TrigFactorKind::Sec if *exp >= 2 => TrigFactorKind::Tan,
                _ => continue,
            };
            let mut reduced = self.clone();
            let slot = reduced.factors.get_mut(&(edge.clone(), *kind)).unwrap();
            *slot -= 2;
            if *slot == 0 {
                reduced.factors.remove(&(edge.clone(), *kind));
            }
            let with_square = reduced.clone().with_factor(edge, partner, 2);
            return Some((with_square, reduced));
        }
        None
    }
}

impl fmt::Display for TrigMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.mu_power {
            0 => {}
            1 => parts.push("mu".to_string()),
            p => parts.push(format!("mu^{p}")),
        }
        for ((edge, kind), exp) in &self.factors {
            if *exp == 1 {
                parts.push(format!("{}[{}]", kind.tag(), edge));
            } else {
                parts.push(format!("{}[{}]^{}", kind.tag(), edge, exp));
            }
        }
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("*"))
        }
    }
}

// ---------------------------------------------------------------------------
// Multilinear polynomials in the coupling variables
// ---------------------------------------------------------------------------

/// Multilinear polynomial in {α_v}: a map from variable subsets (bitmask over
/// vertex indices) to exact rationals. Each α_v occurs in exactly one
/// diagonal entry of M − B, so squares cannot arise; products enforce this.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct AlphaPolynomial {
    terms: BTreeMap<u64, BigRational>,
}

impl AlphaPolynomial {
    pub fn zero() -> Self {
        AlphaPolynomial::default()
    }

    pub fn constant(c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(0, c);
        }
        AlphaPolynomial { terms }
    }

    pub fn one() -> Self {
        AlphaPolynomial::constant(BigRational::one())
    }

    pub fn variable(v: usize) -> Self {
        assert!(v < 64, "variable index out of range");
        let mut terms = BTreeMap::new();
        terms.insert(1u64 << v, BigRational::one());
        AlphaPolynomial { terms }
    }

    pub fn terms(&self) -> impl Iterator<Item = (u64, &BigRational)> {
        self.terms.iter().map(|(&m, c)| (m, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_assign(&mut self, other: &AlphaPolynomial) {
        for (mask, c) in &other.terms {
            let entry = self.terms.entry(*mask).or_insert_with(BigRational::zero);
            *entry += c;
            if entry.is_zero() {
                self.terms.remove(mask);
            }
        }
    }

    pub fn add(&self, other: &AlphaPolynomial) -> AlphaPolynomial {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn neg(&self) -> AlphaPolynomial {
        AlphaPolynomial {
            terms: self.terms.iter().map(|(&m, c)| (m, -c.clone())).collect(),
        }
    }

    pub fn scale(&self, c: &BigRational) -> AlphaPolynomial {
        if c.is_zero() {
            return AlphaPolynomial::zero();
        }
        AlphaPolynomial {
            terms: self.terms.iter().map(|(&m, v)| (m, v * c)).collect(),
        }
    }

    /// Product of multilinear polynomials; errors if any term pair shares a
    /// variable (which would create a square).
    pub fn mul(&self, other: &AlphaPolynomial) -> Result<AlphaPolynomial> {
        let mut out = AlphaPolynomial::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                if m1 & m2 != 0 {
                    return Err(Error::MultilinearViolation);
                }
                let entry = out
                    .terms
                    .entry(m1 | m2)
                    .or_insert_with(BigRational::zero);
                *entry += c1 * c2;
                if entry.is_zero() {
                    out.terms.remove(&(m1 | m2));
                }
            }
        }
        Ok(out)
    }

    pub fn eval_exact(&self, alpha: &[BigRational]) -> BigRational {
        let mut sum = BigRational::zero();
        for (mask, c) in &self.terms {
            let mut term = c.clone();
            let mut m = *mask;
            while m != 0 {
                let v = m.trailing_zeros() as usize;
                term *= &alpha[v];
                m &= m - 1;
            }
            sum += term;
        }
        sum
    }

    pub fn eval_f64(&self, alpha: &[f64]) -> f64 {
        let mut sum = 0.0;
        for (mask, c) in &self.terms {
            let mut term = c.to_f64().unwrap_or(f64::NAN);
            let mut m = *mask;
            while m != 0 {
                let v = m.trailing_zeros() as usize;
                term *= alpha[v];
                m &= m - 1;
            }
            sum += term;
        }
        sum
    }

    /// The α-independent term c_γ.
    pub fn constant_part(&self) -> BigRational {
        self.terms.get(&0).cloned().unwrap_or_else(BigRational::zero)
    }

    /// The α-dependent part g_γ = f_γ − c_γ.
    pub fn alpha_part(&self) -> AlphaPolynomial {
        AlphaPolynomial {
            terms: self
                .terms
                .iter()
                .filter(|(&m, _)| m != 0)
                .map(|(&m, c)| (m, c.clone()))
                .collect(),
        }
    }

    /// Total degree when the polynomial is homogeneous, else None.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut deg = None;
        for (mask, _) in &self.terms {
            let d = mask.count_ones();
            match deg {
                None => deg = Some(d),
                Some(existing) if existing != d => return None,
                _ => {}
            }
        }
        deg
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.count_ones()).max().unwrap_or(0)
    }

    pub fn to_json(&self, vertex_ids: &[String]) -> Value {
        let coeff: Vec<Value> = self
            .terms
            .iter()
            .map(|(mask, c)| {
                let mut vars = Vec::new();
                let mut m = *mask;
                while m != 0 {
                    let v = m.trailing_zeros() as usize;
                    vars.push(vertex_ids[v].clone());
                    m &= m - 1;
                }
                json!({ "vars": vars, "value": format!("{}/{}", c.numer(), c.denom()) })
            })
            .collect();
        Value::Array(coeff)
    }
}

impl fmt::Display for AlphaPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(mask, c)| {
                let mut s = format!("{c}");
                let mut m = *mask;
                while m != 0 {
                    let v = m.trailing_zeros() as usize;
                    s.push_str(&format!("*a{v}"));
                    m &= m - 1;
                }
                s
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

// ---------------------------------------------------------------------------
// Trigonometric sums
// ---------------------------------------------------------------------------

/// Formal sum: canonical monomials mapped to nonzero coefficient polynomials.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TrigSum {
    terms: BTreeMap<TrigMonomial, AlphaPolynomial>,
}

impl TrigSum {
    pub fn zero() -> Self {
        TrigSum::default()
    }

    pub fn from_term(mono: TrigMonomial, coeff: AlphaPolynomial) -> Self {
        let mut s = TrigSum::zero();
        s.add_term(mono, coeff);
        s
    }

    pub fn constant(c: BigRational) -> Self {
        TrigSum::from_term(TrigMonomial::one(), AlphaPolynomial::constant(c))
    }

    pub fn add_term(&mut self, mono: TrigMonomial, coeff: AlphaPolynomial) {
        if coeff.is_zero() {
            return;
        }
        let slot = self.terms.entry(mono.clone()).or_default();
        slot.add_assign(&coeff);
        if slot.is_zero() {
            self.terms.remove(&mono);
        }
    }

    pub fn add_assign(&mut self, other: &TrigSum) {
        for (m, p) in &other.terms {
            self.add_term(m.clone(), p.clone());
        }
    }

    pub fn add(&self, other: &TrigSum) -> TrigSum {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn neg(&self) -> TrigSum {
        TrigSum {
            terms: self
                .terms
                .iter()
                .map(|(m, p)| (m.clone(), p.neg()))
                .collect(),
        }
    }

    /// Distributive product over the ring; coefficient polynomials multiply
    /// multilinearly. The result is not reduced.
    pub fn mul_raw(&self, other: &TrigSum) -> Result<TrigSum> {
        let mut out = TrigSum::zero();
        for (m1, p1) in &self.terms {
            for (m2, p2) in &other.terms {
                out.add_term(m1.mul(m2), p1.mul(p2)?);
            }
        }
        Ok(out)
    }

    /// Product followed by full reduction.
    pub fn mul(&self, other: &TrigSum) -> Result<TrigSum> {
        Ok(self.mul_raw(other)?.reduce())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TrigMonomial, &AlphaPolynomial)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn get(&self, mono: &TrigMonomial) -> Option<&AlphaPolynomial> {
        self.terms.get(mono)
    }

    /// Apply csc² = cot² + 1 and sec² = tan² + 1 until no csc or sec carries
    /// an exponent ≥ 2, combining like monomials and dropping zeros.
    pub fn reduce(&self) -> TrigSum {
        let mut out = TrigSum::zero();
        let mut stack: Vec<(TrigMonomial, AlphaPolynomial)> = self
            .terms
            .iter()
            .map(|(m, p)| (m.clone(), p.clone()))
            .collect();
        while let Some((mono, poly)) = stack.pop() {
            if poly.is_zero() {
                continue;
            }
            match mono.split_reducible() {
                Some((with_square, without)) => {
                    stack.push((with_square, poly.clone()));
                    stack.push((without, poly));
                }
                None => out.add_term(mono, poly),
            }
        }
        out
    }

    pub fn is_reduced(&self) -> bool {
        self.terms.keys().all(|m| m.split_reducible().is_none())
    }

    /// Numeric value at μ = √λ (branch ℑμ ≥ 0), with pole guards on every
    /// trig factor. The result must be real up to the stated residue.
    pub fn eval(
        &self,
        graph: &MarkedGraph,
        alpha: &CouplingVector,
        lambda: f64,
        guard: f64,
    ) -> Result<f64> {
        let alpha_f: Vec<f64> = alpha.to_f64s();
        let value = self.eval_complex(graph, &alpha_f, lambda, guard)?;
        ensure_real(value)
    }

    pub fn eval_complex(
        &self,
        graph: &MarkedGraph,
        alpha_f: &[f64],
        lambda: f64,
        guard: f64,
    ) -> Result<Complex64> {
        let mu = Complex64::new(lambda, 0.0).sqrt();
        let mut lengths: BTreeMap<&str, f64> = BTreeMap::new();
        for e in graph.edges() {
            lengths.insert(e.id.as_str(), e.length.to_f64());
        }
        let mut total = Complex64::new(0.0, 0.0);
        for (mono, poly) in &self.terms {
            let mut term = Complex64::new(poly.eval_f64(alpha_f), 0.0);
            term *= powi(mu, mono.mu_power);
            for ((edge, kind), exp) in &mono.factors {
                let l = *lengths
                    .get(edge.as_str())
                    .ok_or_else(|| Error::UnknownEdge(edge.clone()))?;
                let f = eval_factor(*kind, mu, l, guard, edge)?;
                for _ in 0..*exp {
                    term *= f;
                }
            }
            total += term;
        }
        Ok(total)
    }

    /// Canonical JSON form: a list of classes in monomial order.
    pub fn to_json(&self, vertex_ids: &[String]) -> Value {
        let classes: Vec<Value> = self
            .terms
            .iter()
            .map(|(mono, poly)| {
                let factors: Vec<Value> = mono
                    .factors
                    .iter()
                    .map(|((edge, kind), exp)| {
                        json!({ "edge": edge, "kind": kind.tag(), "exp": exp })
                    })
                    .collect();
                json!({
                    "mu_power": mono.mu_power,
                    "factors": factors,
                    "coeff": poly.to_json(vertex_ids),
                })
            })
            .collect();
        Value::Array(classes)
    }
}

pub fn ensure_real(value: Complex64) -> Result<f64> {
    if value.im.abs() > 1e-9 * (1.0 + value.norm()) {
        Err(Error::NonRealEvaluation(value.im.abs()))
    } else {
        Ok(value.re)
    }
}

pub fn powi(z: Complex64, p: i32) -> Complex64 {
    if p >= 0 {
        z.powi(p)
    } else {
        z.inv().powi(-p)
    }
}

/// Value of one trig factor at μ for an edge of length `l`, guarding the
/// relevant sine/cosine magnitude against proximity to a pole.
pub fn eval_factor(
    kind: TrigFactorKind,
    mu: Complex64,
    l: f64,
    guard: f64,
    edge: &str,
) -> Result<Complex64> {
    let z = mu * l;
    let half = z / 2.0;
    let (num, den, trig): (Complex64, Complex64, &'static str) = match kind {
        TrigFactorKind::Cot => (z.cos(), z.sin(), "sin"),
        TrigFactorKind::Csc => (Complex64::new(1.0, 0.0), z.sin(), "sin"),
        TrigFactorKind::Tan => (z.sin(), z.cos(), "cos"),
        TrigFactorKind::Sec => (Complex64::new(1.0, 0.0), z.cos(), "cos"),
        TrigFactorKind::TanHalf => (half.sin(), half.cos(), "cos(l/2)"),
        TrigFactorKind::CotHalf => (half.cos(), half.sin(), "sin(l/2)"),
        TrigFactorKind::CotQuarterShift => {
            let w = half + std::f64::consts::FRAC_PI_4;
            (w.cos(), w.sin(), "sin(pi/4+l/2)")
        }
    };
    if den.norm() < guard {
        return Err(Error::PoleProximity {
            factor: format!("{}[{}]", kind.tag(), edge),
            trig,
            magnitude: den.norm(),
        });
    }
    Ok(num / den)
}

/// Product of two monomials, fully reduced (csc²/sec² rewritten). Transient
/// mixed kinds on one edge survive in the raw product and are left to
/// `reduce`, which only rewrites the two Pythagorean squares.
pub fn mono_mul(a: &TrigMonomial, b: &TrigMonomial) -> TrigSum {
    TrigSum::from_term(a.mul(b), AlphaPolynomial::one()).reduce()
}
