//! Exact symbolic expansion of det(M(λ) − B) into weight classes.
//!
//! Two independent routes produce the same expansion and cross-validate each
//! other:
//!
//! * `expand_subgraphs` enumerates spanning unions of disjoint loops and
//!   properly oriented cycles of the modified graph (vertex loops carry the
//!   cot/tan weights, alpha-loops carry −α, doubled edges carry csc/sec);
//! * `expand_permutation` expands the symbolic matrix M − B directly by the
//!   signed-permutation definition of the determinant over the trig ring.
//!
//! Both are followed by algebraic cancellation (csc² → cot² + 1,
//! sec² → tan² + 1), after which every surviving weight class is square-free.

use std::collections::BTreeMap;

use num::complex::Complex64;
use num::rational::BigRational;
use num::One;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::graph::{CouplingVector, MarkedGraph, VertexType};
use crate::mfunc::rho;
use crate::trig::{
    ensure_real, powi, AlphaPolynomial, TrigFactorKind, TrigMonomial, TrigSum,
};

/// Default cap on the vertex count for the factorial-cost expansions.
pub const DEFAULT_SIZE_CAP: usize = 9;

// ---------------------------------------------------------------------------
// Modified graph
// ---------------------------------------------------------------------------

/// The weighted oriented graph whose spanning loop/cycle unions enumerate
/// det(M(λ) − B): per-vertex regular loops (one per incident edge), one
/// alpha-loop of weight −α_v per vertex, and a doubled directed pair per
/// non-loop edge.
#[derive(Debug, Clone)]
pub struct ModifiedGraph {
    pub vertex_ids: Vec<String>,
    /// Regular loop weights at each vertex as (coefficient, monomial).
    pub vertex_loops: Vec<Vec<(BigRational, TrigMonomial)>>,
    /// Directed-edge weights keyed by the unordered vertex pair; one entry
    /// per parallel edge, identical in both directions.
    pub pair_weights: BTreeMap<(usize, usize), Vec<(BigRational, TrigMonomial)>>,
}

/// Apply the modification rules to a marked graph.
pub fn modify_graph(g: &MarkedGraph) -> ModifiedGraph {
    let n = g.vertices().len();
    let mut vertex_loops: Vec<Vec<(BigRational, TrigMonomial)>> = vec![Vec::new(); n];
    let mut pair_weights: BTreeMap<(usize, usize), Vec<(BigRational, TrigMonomial)>> =
        BTreeMap::new();
    let one = BigRational::one;
    for e in g.edges() {
        let (tu, tv) = (g.vertices()[e.u].vtype, g.vertices()[e.v].vtype);
        if e.is_loop() {
            let (coeff, mono) = match tu {
                VertexType::Delta => (
                    BigRational::from_integer(2.into()),
                    TrigMonomial::mu(1).with_factor(&e.id, TrigFactorKind::TanHalf, 1),
                ),
                VertexType::DeltaPrime => (
                    BigRational::from_integer((-2).into()),
                    TrigMonomial::mu(-1).with_factor(&e.id, TrigFactorKind::CotHalf, 1),
                ),
            };
            vertex_loops[e.u].push((coeff, mono));
            continue;
        }
        // loops induced at each endpoint
        for (w, tw, tother) in [(e.u, tu, tv), (e.v, tv, tu)] {
            let (coeff, mono) = match (tw, tother) {
                (VertexType::Delta, VertexType::Delta) => (
                    -one(),
                    TrigMonomial::mu(1).with_factor(&e.id, TrigFactorKind::Cot, 1),
                ),
                (VertexType::DeltaPrime, VertexType::DeltaPrime) => (
                    -one(),
                    TrigMonomial::mu(-1).with_factor(&e.id, TrigFactorKind::Cot, 1),
                ),
                (VertexType::Delta, VertexType::DeltaPrime) => (
                    one(),
                    TrigMonomial::mu(1).with_factor(&e.id, TrigFactorKind::Tan, 1),
                ),
                (VertexType::DeltaPrime, VertexType::Delta) => (
                    one(),
                    TrigMonomial::mu(-1).with_factor(&e.id, TrigFactorKind::Tan, 1),
                ),
            };
            vertex_loops[w].push((coeff, mono));
        }
        // the doubled directed pair
        let (coeff, mono) = if tu == tv {
            match tu {
                VertexType::Delta => (
                    one(),
                    TrigMonomial::mu(1).with_factor(&e.id, TrigFactorKind::Csc, 1),
                ),
                VertexType::DeltaPrime => (
                    -one(),
                    TrigMonomial::mu(-1).with_factor(&e.id, TrigFactorKind::Csc, 1),
                ),
            }
        } else {
            (
                -one(),
                TrigMonomial::one().with_factor(&e.id, TrigFactorKind::Sec, 1),
            )
        };
        let key = (e.u.min(e.v), e.u.max(e.v));
        pair_weights.entry(key).or_default().push((coeff, mono));
    }
    ModifiedGraph {
        vertex_ids: g.vertices().iter().map(|v| v.id.clone()).collect(),
        vertex_loops,
        pair_weights,
    }
}

// ---------------------------------------------------------------------------
// Secular expansion
// ---------------------------------------------------------------------------

/// det(M(λ) − B) as a map from weight classes w(γ) to coefficient
/// polynomials f_γ(ᾱ). Every class key is square-free.
#[derive(Debug, Clone, PartialEq)]
pub struct SecularExpansion {
    vertex_ids: Vec<String>,
    sum: TrigSum,
}

impl SecularExpansion {
    fn from_reduced(vertex_ids: Vec<String>, sum: TrigSum) -> Result<Self> {
        for (mono, _) in sum.terms() {
            if !mono.is_square_free() {
                return Err(Error::SquareFreeViolation(mono.to_string()));
            }
        }
        Ok(SecularExpansion { vertex_ids, sum })
    }

    pub fn vertex_ids(&self) -> &[String] {
        &self.vertex_ids
    }

    pub fn sum(&self) -> &TrigSum {
        &self.sum
    }

    pub fn classes(&self) -> impl Iterator<Item = (&TrigMonomial, &AlphaPolynomial)> {
        self.sum.terms()
    }

    pub fn class_count(&self) -> usize {
        self.sum.len()
    }

    /// Σ_γ f_γ(ᾱ)·w(γ)(λ): the determinant itself, with pole guards.
    pub fn eval_det(
        &self,
        g: &MarkedGraph,
        alpha: &CouplingVector,
        lambda: f64,
        guard: f64,
    ) -> Result<f64> {
        self.sum.eval(g, alpha, lambda, guard)
    }

    /// The class table in canonical order, with f_γ split as c_γ + g_γ.
    pub fn to_json(&self) -> Value {
        let classes: Vec<Value> = self
            .sum
            .terms()
            .map(|(mono, poly)| {
                let factors: Vec<Value> = mono
                    .factors
                    .iter()
                    .map(|((edge, kind), exp)| {
                        json!({"edge": edge, "kind": kind.tag(), "exp": exp})
                    })
                    .collect();
                let c = poly.constant_part();
                json!({
                    "weight": {"mu_power": mono.mu_power, "factors": factors},
                    "c_gamma": format!("{}/{}", c.numer(), c.denom()),
                    "g_gamma": poly.alpha_part().to_json(&self.vertex_ids),
                })
            })
            .collect();
        json!({ "classes": classes })
    }
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap || n > 64 {
        return Err(Error::SizeCap { n, cap: cap.min(64) });
    }
    Ok(())
}

/// Expand by explicit enumeration of spanning loop/cycle unions of the
/// modified graph. Each permutation fixed point picks one loop from the
/// vertex's loop multiset (including its alpha-loop); each cycle step picks
/// one parallel edge instance; the sign is (−1)^(number of even cycles).
pub fn expand_subgraphs(mg: &ModifiedGraph, cap: usize) -> Result<SecularExpansion> {
    let n = mg.vertex_ids.len();
    check_cap(n, cap)?;
    let mut sum = TrigSum::zero();
    let mut state = SubgraphState {
        mg,
        n,
        used: 0,
        columns: Vec::with_capacity(n),
        sum: &mut sum,
    };
    state.recurse(
        0,
        0,
        BigRational::one(),
        TrigMonomial::one(),
        0u64,
    );
    let reduced = sum.reduce();
    SecularExpansion::from_reduced(mg.vertex_ids.clone(), reduced)
}

struct SubgraphState<'a> {
    mg: &'a ModifiedGraph,
    n: usize,
    used: u64,
    columns: Vec<usize>,
    sum: &'a mut TrigSum,
}

impl SubgraphState<'_> {
    /// `inv` is the running inversion count parity of the permutation.
    fn recurse(
        &mut self,
        row: usize,
        inv: u32,
        coeff: BigRational,
        mono: TrigMonomial,
        alpha_mask: u64,
    ) {
        if row == self.n {
            let sign = if inv % 2 == 0 {
                BigRational::one()
            } else {
                -BigRational::one()
            };
            let mut poly = AlphaPolynomial::one();
            let mut m = alpha_mask;
            while m != 0 {
                let v = m.trailing_zeros() as usize;
                poly = poly
                    .mul(&AlphaPolynomial::variable(v))
                    .expect("alpha-loop variables are distinct");
                m &= m - 1;
            }
            self.sum.add_term(mono, poly.scale(&(sign * coeff)));
            return;
        }
        for col in 0..self.n {
            if self.used & (1 << col) != 0 {
                continue;
            }
            let new_inv = inv
                + self
                    .columns
                    .iter()
                    .filter(|&&c| c > col)
                    .count() as u32;
            self.used |= 1 << col;
            self.columns.push(col);
            if col == row {
                // alpha-loop: weight −α_row
                self.recurse(
                    row + 1,
                    new_inv,
                    -coeff.clone(),
                    mono.clone(),
                    alpha_mask | (1 << row),
                );
                let loops = self.mg.vertex_loops[row].clone();
                for (c, m) in &loops {
                    self.recurse(
                        row + 1,
                        new_inv,
                        &coeff * c,
                        mono.mul(m),
                        alpha_mask,
                    );
                }
            } else {
                let key = (row.min(col), row.max(col));
                let weights = self.mg.pair_weights.get(&key).cloned().unwrap_or_default();
                for (c, m) in &weights {
                    self.recurse(
                        row + 1,
                        new_inv,
                        &coeff * c,
                        mono.mul(m),
                        alpha_mask,
                    );
                }
            }
            self.columns.pop();
            self.used &= !(1 << col);
        }
    }
}

/// Symbolic M − B entries straight from the explicit matrix formulas (the
/// cross-validation route builds them independently of `modify_graph`).
fn symbolic_m_minus_b(g: &MarkedGraph) -> Vec<Vec<TrigSum>> {
    let n = g.vertices().len();
    let mut entries = vec![vec![TrigSum::zero(); n]; n];
    for (v, vx) in g.vertices().iter().enumerate() {
        entries[v][v].add_term(TrigMonomial::one(), AlphaPolynomial::variable(v).neg());
        let _ = vx;
    }
    for e in g.edges() {
        let (tu, tv) = (g.vertices()[e.u].vtype, g.vertices()[e.v].vtype);
        let one = BigRational::one();
        if e.is_loop() {
            match tu {
                VertexType::Delta => entries[e.u][e.u].add_term(
                    TrigMonomial::mu(1).with_factor(&e.id, TrigFactorKind::TanHalf, 1),
                    AlphaPolynomial::constant(BigRational::from_integer(2.into())),
                ),
                VertexType::DeltaPrime => entries[e.u][e.u].add_term(
                    TrigMonomial::mu(-1).with_factor(&e.id, TrigFactorKind::CotHalf, 1),
                    AlphaPolynomial::constant(BigRational::from_integer((-2).into())),
                ),
            }
            continue;
        }
        if tu == tv {
            let (mu_pow, off_sign) = match tu {
                VertexType::Delta => (1, one.clone()),
                VertexType::DeltaPrime => (-1, -one.clone()),
            };
            for w in [e.u, e.v] {
                entries[w][w].add_term(
                    TrigMonomial::mu(mu_pow).with_factor(&e.id, TrigFactorKind::Cot, 1),
                    AlphaPolynomial::constant(-one.clone()),
                );
            }
            let off = TrigMonomial::mu(mu_pow).with_factor(&e.id, TrigFactorKind::Csc, 1);
            entries[e.u][e.v].add_term(off.clone(), AlphaPolynomial::constant(off_sign.clone()));
            entries[e.v][e.u].add_term(off, AlphaPolynomial::constant(off_sign));
        } else {
            for (w, tw) in [(e.u, tu), (e.v, tv)] {
                let mu_pow = match tw {
                    VertexType::Delta => 1,
                    VertexType::DeltaPrime => -1,
                };
                entries[w][w].add_term(
                    TrigMonomial::mu(mu_pow).with_factor(&e.id, TrigFactorKind::Tan, 1),
                    AlphaPolynomial::one(),
                );
            }
            let off = TrigMonomial::one().with_factor(&e.id, TrigFactorKind::Sec, 1);
            entries[e.u][e.v].add_term(off.clone(), AlphaPolynomial::constant(-one.clone()));
            entries[e.v][e.u].add_term(off, AlphaPolynomial::constant(-one));
        }
    }
    entries
}

/// Expand det(M − B) by the signed-permutation definition of the determinant
/// over the trig ring; identical output to `expand_subgraphs` by
/// construction, which is the cross-validation.
pub fn expand_permutation(g: &MarkedGraph, cap: usize) -> Result<SecularExpansion> {
    let n = g.vertices().len();
    check_cap(n, cap)?;
    let entries = symbolic_m_minus_b(g);
    let mut sum = TrigSum::zero();
    let mut columns: Vec<usize> = Vec::with_capacity(n);
    let mut used = vec![false; n];
    leibniz(
        &entries,
        0,
        n,
        0,
        &TrigSum::constant(BigRational::one()),
        &mut used,
        &mut columns,
        &mut sum,
    )?;
    let reduced = sum.reduce();
    SecularExpansion::from_reduced(
        g.vertices().iter().map(|v| v.id.clone()).collect(),
        reduced,
    )
}

#[allow(clippy::too_many_arguments)]
fn leibniz(
    entries: &[Vec<TrigSum>],
    row: usize,
    n: usize,
    inv: u32,
    acc: &TrigSum,
    used: &mut [bool],
    columns: &mut Vec<usize>,
    out: &mut TrigSum,
) -> Result<()> {
    if row == n {
        if inv % 2 == 0 {
            out.add_assign(acc);
        } else {
            out.add_assign(&acc.neg());
        }
        return Ok(());
    }
    for col in 0..n {
        if used[col] || entries[row][col].is_empty() {
            continue;
        }
        let new_inv = inv + columns.iter().filter(|&&c| c > col).count() as u32;
        let product = acc.mul_raw(&entries[row][col])?;
        used[col] = true;
        columns.push(col);
        leibniz(entries, row + 1, n, new_inv, &product, used, columns, out)?;
        columns.pop();
        used[col] = false;
    }
    Ok(())
}

/// Default route: modification rules + subgraph enumeration.
pub fn expand(g: &MarkedGraph) -> Result<SecularExpansion> {
    expand_subgraphs(&modify_graph(g), DEFAULT_SIZE_CAP)
}

// ---------------------------------------------------------------------------
// Pole-free evaluation of Π·det(M−B)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
enum EntireFactor {
    /// sin(μ·l)
    Sin(f64),
    /// cos(μ·l)
    Cos(f64),
}

#[derive(Debug, Clone)]
struct ClassPlan {
    poly: AlphaPolynomial,
    net_mu: i32,
    factors: Vec<EntireFactor>,
}

/// Π(λ)·det(M(λ)−B) with the Π factors cancelled against each weight class
/// analytically: every class evaluates as μ^k times a product of entire
/// sin/cos factors, so the function is pole-free and cheap to scan.
#[derive(Debug, Clone)]
pub struct SecularFunction {
    plans: Vec<ClassPlan>,
    n: usize,
}

impl SecularFunction {
    pub fn new(g: &MarkedGraph, expansion: &SecularExpansion) -> Result<Self> {
        let cls = g.classify_edges();
        let rho = rho(g) as i32;
        let mut plans = Vec::new();
        for (mono, poly) in expansion.classes() {
            let mut net_mu = mono.mu_power + 2 * rho;
            let mut factors = Vec::new();
            let mut account = |edge_idx: &usize,
                               pi_kind: EntireFactor,
                               cancel: TrigFactorKind,
                               collapsed_kind: EntireFactor,
                               mu_shift: i32|
             -> Result<()> {
                let e = &g.edges()[*edge_idx];
                net_mu += mu_shift;
                match mono.kind_of(&e.id) {
                    None => factors.push(pi_kind),
                    Some(k) if k == cancel => factors.push(collapsed_kind),
                    // csc·sin and sec·cos collapse to 1
                    Some(TrigFactorKind::Csc) | Some(TrigFactorKind::Sec) => {}
                    Some(other) => {
                        return Err(Error::SquareFreeViolation(format!(
                            "unexpected factor {} on edge {}",
                            other.tag(),
                            e.id
                        )))
                    }
                }
                Ok(())
            };
            for i in &cls.c {
                let l = g.edges()[*i].length.to_f64();
                account(i, EntireFactor::Sin(l), TrigFactorKind::Cot, EntireFactor::Cos(l), -1)?;
            }
            for i in &cls.c_prime {
                let l = g.edges()[*i].length.to_f64();
                account(i, EntireFactor::Cos(l), TrigFactorKind::Tan, EntireFactor::Sin(l), 0)?;
            }
            for i in &cls.loops_delta {
                let l = g.edges()[*i].length.to_f64() / 2.0;
                account(
                    i,
                    EntireFactor::Cos(l),
                    TrigFactorKind::TanHalf,
                    EntireFactor::Sin(l),
                    0,
                )?;
            }
            for i in &cls.loops_delta_prime {
                let l = g.edges()[*i].length.to_f64() / 2.0;
                account(
                    i,
                    EntireFactor::Sin(l),
                    TrigFactorKind::CotHalf,
                    EntireFactor::Cos(l),
                    -1,
                )?;
            }
            plans.push(ClassPlan {
                poly: poly.clone(),
                net_mu,
                factors,
            });
        }
        Ok(SecularFunction {
            plans,
            n: g.vertices().len(),
        })
    }

    /// Build from the graph with the default expansion route.
    pub fn build(g: &MarkedGraph) -> Result<Self> {
        SecularFunction::new(g, &expand(g)?)
    }

    pub fn coupling_len(&self) -> usize {
        self.n
    }

    /// Value at real λ for numeric couplings. Entire in λ; real for real λ.
    pub fn value(&self, alpha: &[f64], lambda: f64) -> Result<f64> {
        ensure_real(self.value_complex(alpha, lambda))
    }

    pub fn value_complex(&self, alpha: &[f64], lambda: f64) -> Complex64 {
        let mu = Complex64::new(lambda, 0.0).sqrt();
        let mut total = Complex64::new(0.0, 0.0);
        for plan in &self.plans {
            let mut term = Complex64::new(plan.poly.eval_f64(alpha), 0.0);
            if term.norm() == 0.0 {
                continue;
            }
            term *= powi(mu, plan.net_mu);
            for f in &plan.factors {
                term *= match f {
                    EntireFactor::Sin(l) => (mu * *l).sin(),
                    EntireFactor::Cos(l) => (mu * *l).cos(),
                };
            }
            total += term;
        }
        total
    }
}

/// Π(λ)·det(M(λ)−B) through the reduced expansion (pole-free). For repeated
/// evaluation build a `SecularFunction` once instead.
pub fn secular_value(g: &MarkedGraph, alpha: &CouplingVector, lambda: f64) -> Result<f64> {
    let f = SecularFunction::build(g)?;
    f.value(&alpha.to_f64s(), lambda)
}

/// Σ_γ f_γ(ᾱ)·w(γ)(λ), optionally multiplied by Π(λ). With `with_pi` the
/// pole-free route is used; without it the raw determinant value (guarded
/// near poles) is returned.
pub fn eval_expansion(
    e: &SecularExpansion,
    g: &MarkedGraph,
    alpha: &CouplingVector,
    lambda: f64,
    with_pi: bool,
) -> Result<f64> {
    if with_pi {
        SecularFunction::new(g, e)?.value(&alpha.to_f64s(), lambda)
    } else {
        e.eval_det(g, alpha, lambda, 1e-9)
    }
}

/// The per-class data needed by the isospectrality tests: f_γ evaluated
/// exactly at a rational coupling vector.
pub fn eval_classes_exact(
    e: &SecularExpansion,
    alpha: &[BigRational],
) -> Vec<(TrigMonomial, BigRational)> {
    e.classes()
        .map(|(m, p)| (m.clone(), p.eval_exact(alpha)))
        .collect()
}
