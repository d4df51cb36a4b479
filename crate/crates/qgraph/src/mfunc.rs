//! Numeric construction of the Weyl-Titchmarsh M-matrix, its quasigraph
//! counterpart, and the scalar objects Π, ρ, Φ, Φ̂ and the σ-set.
//!
//! Matrix row order equals vertex declaration order. All entries are real
//! for real λ ≠ 0; negative λ goes through μ = i√|λ|, which turns every
//! trigonometric factor into its hyperbolic counterpart.

use nalgebra::DMatrix;
use num::complex::Complex64;
use num::rational::BigRational;
use num::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::graph::{CouplingVector, MarkedGraph, VertexType};
use crate::reduction::{QuasiEdgeRole, QuasiGraph};
use crate::trig::{ensure_real, eval_factor, powi, TrigFactorKind};

/// Default guard on |sin μl| / |cos μl| below which direct evaluation of the
/// M-matrix refuses to proceed (callers fall back to the symbolic path).
pub const POLE_GUARD: f64 = 1e-6;

/// One numeric sample of the M-matrix.
#[derive(Debug, Clone)]
pub struct MMatrixSample {
    pub lambda: f64,
    pub mu: Complex64,
    pub entries: DMatrix<f64>,
}

/// M(λ) per the explicit formulas: cot/csc on same-type edges, tan/sec on
/// mixed edges, half-angle terms on loops; δ rows scale by μ, δ' rows by 1/μ.
pub fn build_m(g: &MarkedGraph, lambda: f64, guard: f64) -> Result<MMatrixSample> {
    if lambda == 0.0 {
        return Err(Error::ZeroLambda);
    }
    let mu = Complex64::new(lambda, 0.0).sqrt();
    let n = g.vertices().len();
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    let inv_mu = mu.inv();

    for (idx, e) in g.edges().iter().enumerate() {
        let l = e.length.to_f64();
        let label = &g.edges()[idx].id;
        let tu = g.vertices()[e.u].vtype;
        let tv = g.vertices()[e.v].vtype;
        if e.is_loop() {
            match tu {
                VertexType::Delta => {
                    // -μ(... - 2 tan(μl/2)) = +2μ tan(μl/2)
                    let t = eval_factor(TrigFactorKind::TanHalf, mu, l, guard, label)?;
                    m[(e.u, e.u)] += 2.0 * mu * t;
                }
                VertexType::DeltaPrime => {
                    let c = eval_factor(TrigFactorKind::CotHalf, mu, l, guard, label)?;
                    m[(e.u, e.u)] -= 2.0 * inv_mu * c;
                }
            }
        } else if tu == tv {
            let cot = eval_factor(TrigFactorKind::Cot, mu, l, guard, label)?;
            let csc = eval_factor(TrigFactorKind::Csc, mu, l, guard, label)?;
            let (diag_scale, off) = match tu {
                VertexType::Delta => (-mu, mu * csc),
                VertexType::DeltaPrime => (-inv_mu, -inv_mu * csc),
            };
            m[(e.u, e.u)] += diag_scale * cot;
            m[(e.v, e.v)] += diag_scale * cot;
            m[(e.u, e.v)] += off;
            m[(e.v, e.u)] += off;
        } else {
            let tan = eval_factor(TrigFactorKind::Tan, mu, l, guard, label)?;
            let sec = eval_factor(TrigFactorKind::Sec, mu, l, guard, label)?;
            for w in [e.u, e.v] {
                match g.vertices()[w].vtype {
                    VertexType::Delta => m[(w, w)] += mu * tan,
                    VertexType::DeltaPrime => m[(w, w)] += inv_mu * tan,
                }
            }
            m[(e.u, e.v)] -= sec;
            m[(e.v, e.u)] -= sec;
        }
    }

    let mut entries = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            entries[(i, j)] = ensure_real(m[(i, j)])?;
        }
    }
    Ok(MMatrixSample {
        lambda,
        mu,
        entries,
    })
}

/// M-matrix of a quasigraph, meromorphic in μ rather than λ. Quasiedges
/// contribute sec off-diagonal entries and tan diagonal terms; quasiloops
/// from multi-edge elimination contribute cot(π/4 + μl/2).
///
/// Defined (as in the source construction) for graphs whose non-loop edges
/// are all of mixed type.
pub fn build_quasi_m(q: &QuasiGraph, mu: Complex64, guard: f64) -> Result<DMatrix<Complex64>> {
    let n = q.vertices.len();
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    let inv_mu = mu.inv();
    // row scale: μ for δ-like rows, 1/μ for δ'-like rows
    let scale = |k: usize| -> Complex64 {
        if q.is_delta_like(k) {
            mu
        } else {
            inv_mu
        }
    };
    for e in &q.edges {
        let l = e.length.to_f64();
        let label = &e.id;
        match e.role {
            QuasiEdgeRole::Regular | QuasiEdgeRole::QuasiEdge => {
                let tan = eval_factor(TrigFactorKind::Tan, mu, l, guard, label)?;
                let sec = eval_factor(TrigFactorKind::Sec, mu, l, guard, label)?;
                m[(e.u, e.u)] += scale(e.u) * tan;
                m[(e.v, e.v)] += scale(e.v) * tan;
                let off = match e.role {
                    // regular mixed edge: one endpoint δ-like, one δ'-like
                    QuasiEdgeRole::Regular => -sec,
                    // quasiedge: both endpoints carry the same μ-scale
                    QuasiEdgeRole::QuasiEdge => -scale(e.u) * sec,
                    _ => unreachable!(),
                };
                m[(e.u, e.v)] += off;
                m[(e.v, e.u)] += off;
            }
            QuasiEdgeRole::Loop => {
                // ordinary loop at a (quasi)vertex
                if q.is_delta_like(e.u) {
                    let t = eval_factor(TrigFactorKind::TanHalf, mu, l, guard, label)?;
                    m[(e.u, e.u)] += 2.0 * mu * t;
                } else {
                    let c = eval_factor(TrigFactorKind::CotHalf, mu, l, guard, label)?;
                    m[(e.u, e.u)] -= 2.0 * inv_mu * c;
                }
            }
            QuasiEdgeRole::QuasiLoopMulti => {
                let c = eval_factor(TrigFactorKind::CotQuarterShift, mu, l, guard, label)?;
                m[(e.u, e.u)] -= 2.0 * scale(e.u) * c;
            }
            QuasiEdgeRole::QuasiLoopFromLoop => {
                // loops inherited from the eliminated vertex flip their
                // half-angle kind together with the μ-scale
                if q.is_delta_like(e.u) {
                    let c = eval_factor(TrigFactorKind::CotHalf, mu, l, guard, label)?;
                    m[(e.u, e.u)] -= 2.0 * mu * c;
                } else {
                    let t = eval_factor(TrigFactorKind::TanHalf, mu, l, guard, label)?;
                    m[(e.u, e.u)] += 2.0 * inv_mu * t;
                }
            }
        }
    }
    Ok(m)
}

/// Number of δ' vertices connected (by an edge or a loop) to at least one
/// vertex of δ' type; a loop connects its vertex to itself.
pub fn rho(g: &MarkedGraph) -> usize {
    g.vertices()
        .iter()
        .enumerate()
        .filter(|(v, vx)| {
            vx.vtype == VertexType::DeltaPrime
                && g.edges().iter().any(|e| {
                    if e.is_loop() {
                        e.u == *v
                    } else {
                        (e.u == *v && g.vertices()[e.v].vtype == VertexType::DeltaPrime)
                            || (e.v == *v && g.vertices()[e.u].vtype == VertexType::DeltaPrime)
                    }
                })
        })
        .count()
}

/// sin(√λ · l)/√λ as an entire real function of λ (hyperbolic for λ < 0,
/// series near 0).
fn sin_over_mu(l: f64, lambda: f64) -> f64 {
    let x = lambda * l * l; // (μl)²
    if x.abs() < 1e-8 {
        l * (1.0 - x / 6.0 + x * x / 120.0)
    } else if lambda > 0.0 {
        let mu = lambda.sqrt();
        (mu * l).sin() / mu
    } else {
        let nu = (-lambda).sqrt();
        (nu * l).sinh() / nu
    }
}

/// cos(√λ · l) as an entire real function of λ.
fn cos_mu(l: f64, lambda: f64) -> f64 {
    if lambda >= 0.0 {
        (lambda.sqrt() * l).cos()
    } else {
        ((-lambda).sqrt() * l).cosh()
    }
}

/// The entire prefactor Π(λ) = λ^ρ ∏_C sin(l√λ)/√λ ∏_C' cos(l√λ)
/// ∏_L cos(l√λ/2) ∏_L' sin(l√λ/2)/√λ.
pub fn pi_factor(g: &MarkedGraph, lambda: f64) -> f64 {
    let cls = g.classify_edges();
    let mut value = lambda.powi(rho(g) as i32);
    for &i in &cls.c {
        value *= sin_over_mu(g.edges()[i].length.to_f64(), lambda);
    }
    for &i in &cls.c_prime {
        value *= cos_mu(g.edges()[i].length.to_f64(), lambda);
    }
    for &i in &cls.loops_delta {
        value *= cos_mu(g.edges()[i].length.to_f64() / 2.0, lambda);
    }
    for &i in &cls.loops_delta_prime {
        value *= sin_over_mu(g.edges()[i].length.to_f64() / 2.0, lambda);
    }
    value
}

/// Φ(ᾱ) = ∏ deg V_j / α_j over δ' vertices with nonzero coupling.
pub fn phi(g: &MarkedGraph, alpha: &[BigRational]) -> BigRational {
    phi_over(g, alpha, VertexType::DeltaPrime)
}

/// Φ̂(ᾱ): the same product over δ vertices.
pub fn phi_hat(g: &MarkedGraph, alpha: &[BigRational]) -> BigRational {
    phi_over(g, alpha, VertexType::Delta)
}

fn phi_over(g: &MarkedGraph, alpha: &[BigRational], vtype: VertexType) -> BigRational {
    let mut product = BigRational::one();
    for (i, v) in g.vertices().iter().enumerate() {
        if v.vtype == vtype && !alpha[i].is_zero() {
            let deg = BigRational::from_integer((g.degree(i) as i64).into());
            product *= deg / &alpha[i];
        }
    }
    product
}

/// The multiset {σ_i}: −α_i/deg at δ vertices, deg/α_i at δ' vertices with
/// α_i ≠ 0, and 0 otherwise. An isospectrality invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaSet {
    values: Vec<BigRational>,
}

impl SigmaSet {
    pub fn values(&self) -> &[BigRational] {
        &self.values
    }

    pub fn multiset_eq(&self, other: &SigmaSet) -> bool {
        let mut a = self.values.clone();
        let mut b = other.values.clone();
        a.sort();
        b.sort();
        a == b
    }

    pub fn to_f64s(&self) -> Vec<f64> {
        self.values
            .iter()
            .map(|r| r.to_f64().unwrap_or(f64::NAN))
            .collect()
    }
}

pub fn sigma_set(g: &MarkedGraph, alpha: &[BigRational]) -> SigmaSet {
    let values = g
        .vertices()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let deg = BigRational::from_integer((g.degree(i) as i64).into());
            match v.vtype {
                VertexType::Delta => -&alpha[i] / deg,
                VertexType::DeltaPrime if !alpha[i].is_zero() => deg / &alpha[i],
                VertexType::DeltaPrime => BigRational::zero(),
            }
        })
        .collect();
    SigmaSet { values }
}

/// Multiset equality of float σ-sets with tolerance pairing.
pub fn sigma_eq_f64(a: &[f64], b: &[f64], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    a.iter()
        .zip(&b)
        .all(|(x, y)| (x - y).abs() <= tol * (1.0 + x.abs().max(y.abs())))
}

/// Π(λ)·det(M(λ)−B) by direct numeric evaluation with pole guards. The
/// symbolic expansion path (`expansion::SecularFunction`) is the pole-free
/// route; this one exists to cross-check it.
pub fn secular_value_numeric(
    g: &MarkedGraph,
    alpha: &CouplingVector,
    lambda: f64,
    guard: f64,
) -> Result<f64> {
    let m = build_m(g, lambda, guard)?;
    let mut a = m.entries.clone();
    for (i, c) in alpha.to_f64s().iter().enumerate() {
        a[(i, i)] -= c;
    }
    Ok(pi_factor(g, lambda) * a.determinant())
}

/// Value of μ^k for the λ-branch with ℑμ ≥ 0.
pub fn mu_pow(lambda: f64, k: i32) -> Complex64 {
    powi(Complex64::new(lambda, 0.0).sqrt(), k)
}
