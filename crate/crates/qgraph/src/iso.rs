//! Decision procedures for isospectrality of two Laplacians on one marked
//! graph: the exact necessary-and-sufficient test, its relaxed form under
//! Φ-equality, the balancing and σ-set necessary conditions, the A3 family,
//! a structural uniqueness report, and an exploratory numeric search.

use std::collections::BTreeSet;

use num::rational::BigRational;
use num::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::expansion::{expand_subgraphs, modify_graph, SecularExpansion, DEFAULT_SIZE_CAP};
use crate::graph::{CouplingVector, MarkedGraph, VertexType};
use crate::mfunc::{phi, sigma_eq_f64, sigma_set};

/// Denominator cap used when float couplings are rationalized before the
/// exact check.
pub const RATIONALIZE_DENOMINATOR_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Isospectral,
    NotIsospectral,
    Unsupported,
}

/// Evidence attached to a negative or unsupported verdict.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    /// Different numbers of zero couplings at δ' vertices.
    ZeroCountMismatch { lhs: usize, rhs: usize },
    /// First weight class whose scaled coefficients differ.
    ClassMismatch {
        weight: String,
        lhs: BigRational,
        rhs: BigRational,
    },
    /// Φ-equality precondition of the relaxed test fails.
    PhiMismatch { lhs: BigRational, rhs: BigRational },
}

#[derive(Debug, Clone)]
pub struct IsoVerdict {
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub used_phi_equality: bool,
    /// True when float couplings were rationalized for the exact check.
    pub approximate: bool,
    pub warnings: Vec<String>,
}

impl IsoVerdict {
    pub fn to_json(&self) -> Value {
        let verdict = match self.verdict {
            Verdict::Isospectral => "isospectral",
            Verdict::NotIsospectral => "not_isospectral",
            Verdict::Unsupported => "unsupported",
        };
        let witness = match &self.witness {
            None => Value::Null,
            Some(Witness::ZeroCountMismatch { lhs, rhs }) => json!({
                "kind": "zero_count_mismatch",
                "delta_prime_zeros": [lhs, rhs],
            }),
            Some(Witness::ClassMismatch { weight, lhs, rhs }) => json!({
                "kind": "class_mismatch",
                "weight": weight,
                "lhs": lhs.to_string(),
                "rhs": rhs.to_string(),
            }),
            Some(Witness::PhiMismatch { lhs, rhs }) => json!({
                "kind": "phi_mismatch",
                "lhs": lhs.to_string(),
                "rhs": rhs.to_string(),
            }),
        };
        json!({
            "verdict": verdict,
            "witness": witness,
            "used_phi_equality": self.used_phi_equality,
            "approximate": self.approximate,
            "warnings": self.warnings,
        })
    }
}

fn independence_warnings(g: &MarkedGraph) -> Vec<String> {
    let relations = g.rational_independence_heuristic(3);
    if relations.is_empty() {
        Vec::new()
    } else {
        vec![format!(
            "edge lengths admit {} small integer relation(s), e.g. {:?}; \
             the exact criteria assume rationally independent lengths",
            relations.len(),
            relations[0]
        )]
    }
}

fn zero_counts_delta_prime(
    g: &MarkedGraph,
    a: &[BigRational],
    b: &[BigRational],
) -> (usize, usize) {
    let count = |v: &[BigRational]| {
        g.vertices()
            .iter()
            .enumerate()
            .filter(|(i, vx)| vx.vtype == VertexType::DeltaPrime && v[*i].is_zero())
            .count()
    };
    (count(a), count(b))
}

fn expansion_for(g: &MarkedGraph) -> Result<SecularExpansion> {
    expand_subgraphs(&modify_graph(g), DEFAULT_SIZE_CAP)
}

/// The exact criterion: equal numbers of zero couplings at δ' vertices and
/// Φ(ᾱ)·f_γ(ᾱ) = Φ(ᾱ̃)·f_γ(ᾱ̃) for every weight class γ. Float couplings
/// are rationalized first and the verdict flagged approximate.
pub fn check_isospectral(
    g: &MarkedGraph,
    alpha: &CouplingVector,
    alpha2: &CouplingVector,
) -> Result<IsoVerdict> {
    let warnings = independence_warnings(g);
    let (va, approx_a) = alpha.rationalized(RATIONALIZE_DENOMINATOR_CAP);
    let (vb, approx_b) = alpha2.rationalized(RATIONALIZE_DENOMINATOR_CAP);
    let approximate = approx_a || approx_b;

    // cheap early exit before any expansion work
    let (za, zb) = zero_counts_delta_prime(g, &va, &vb);
    if za != zb {
        return Ok(IsoVerdict {
            verdict: Verdict::NotIsospectral,
            witness: Some(Witness::ZeroCountMismatch { lhs: za, rhs: zb }),
            used_phi_equality: false,
            approximate,
            warnings,
        });
    }

    let expansion = expansion_for(g)?;
    let phi_a = phi(g, &va);
    let phi_b = phi(g, &vb);
    for (mono, poly) in expansion.classes() {
        let lhs = &phi_a * poly.eval_exact(&va);
        let rhs = &phi_b * poly.eval_exact(&vb);
        if lhs != rhs {
            return Ok(IsoVerdict {
                verdict: Verdict::NotIsospectral,
                witness: Some(Witness::ClassMismatch {
                    weight: mono.to_string(),
                    lhs,
                    rhs,
                }),
                used_phi_equality: false,
                approximate,
                warnings,
            });
        }
    }
    Ok(IsoVerdict {
        verdict: Verdict::Isospectral,
        witness: None,
        used_phi_equality: false,
        approximate,
        warnings,
    })
}

/// The relaxed criterion, valid when Φ(ᾱ) = Φ(ᾱ̃): constant parts drop and
/// only g_γ(ᾱ) = g_γ(ᾱ̃) remains. Returns Unsupported when the Φ-equality
/// precondition fails.
pub fn check_isospectral_relaxed(
    g: &MarkedGraph,
    alpha: &CouplingVector,
    alpha2: &CouplingVector,
) -> Result<IsoVerdict> {
    let warnings = independence_warnings(g);
    let (va, approx_a) = alpha.rationalized(RATIONALIZE_DENOMINATOR_CAP);
    let (vb, approx_b) = alpha2.rationalized(RATIONALIZE_DENOMINATOR_CAP);
    let approximate = approx_a || approx_b;
    let phi_a = phi(g, &va);
    let phi_b = phi(g, &vb);
    if phi_a != phi_b {
        return Ok(IsoVerdict {
            verdict: Verdict::Unsupported,
            witness: Some(Witness::PhiMismatch {
                lhs: phi_a,
                rhs: phi_b,
            }),
            used_phi_equality: true,
            approximate,
            warnings,
        });
    }
    let (za, zb) = zero_counts_delta_prime(g, &va, &vb);
    if za != zb {
        return Ok(IsoVerdict {
            verdict: Verdict::NotIsospectral,
            witness: Some(Witness::ZeroCountMismatch { lhs: za, rhs: zb }),
            used_phi_equality: true,
            approximate,
            warnings,
        });
    }
    let expansion = expansion_for(g)?;
    for (mono, poly) in expansion.classes() {
        let gp = poly.alpha_part();
        let lhs = gp.eval_exact(&va);
        let rhs = gp.eval_exact(&vb);
        if lhs != rhs {
            return Ok(IsoVerdict {
                verdict: Verdict::NotIsospectral,
                witness: Some(Witness::ClassMismatch {
                    weight: mono.to_string(),
                    lhs,
                    rhs,
                }),
                used_phi_equality: true,
                approximate,
                warnings,
            });
        }
    }
    Ok(IsoVerdict {
        verdict: Verdict::Isospectral,
        witness: None,
        used_phi_equality: true,
        approximate,
        warnings,
    })
}

/// Both sides of the balancing condition at `vertex`:
/// α_V − Σ ν(V')/α_{V'} and the same for ᾱ̃. A necessary condition for
/// isospectrality on mixed-type graphs when the adjacent couplings are
/// nonzero.
pub fn balancing_residual(
    g: &MarkedGraph,
    vertex: &str,
    alpha: &CouplingVector,
    alpha2: &CouplingVector,
) -> Result<(BigRational, BigRational)> {
    let v = g.vertex_index(vertex)?;
    let (va, _) = alpha.rationalized(RATIONALIZE_DENOMINATOR_CAP);
    let (vb, _) = alpha2.rationalized(RATIONALIZE_DENOMINATOR_CAP);
    let side = |vals: &[BigRational]| -> Result<BigRational> {
        let mut out = vals[v].clone();
        for w in g.neighbors(v) {
            if vals[w].is_zero() {
                return Err(Error::ZeroAdjacentCoupling(g.vertices()[w].id.clone()));
            }
            let nu = BigRational::from_integer((g.edges_between(v, w).len() as i64).into());
            out -= nu / &vals[w];
        }
        Ok(out)
    };
    Ok((side(&va)?, side(&vb)?))
}

/// σ-set multiset equality: exact for rational inputs, 1e-12 tolerance
/// clustering otherwise.
pub fn sigma_necessary(
    g: &MarkedGraph,
    alpha: &CouplingVector,
    alpha2: &CouplingVector,
) -> bool {
    if alpha.is_exact() && alpha2.is_exact() {
        let (va, _) = alpha.rationalized(RATIONALIZE_DENOMINATOR_CAP);
        let (vb, _) = alpha2.rationalized(RATIONALIZE_DENOMINATOR_CAP);
        sigma_set(g, &va).multiset_eq(&sigma_set(g, &vb))
    } else {
        let sf = |cv: &CouplingVector| -> Vec<f64> {
            let (v, _) = cv.rationalized(RATIONALIZE_DENOMINATOR_CAP);
            sigma_set(g, &v).to_f64s()
        };
        sigma_eq_f64(&sf(alpha), &sf(alpha2), 1e-12)
    }
}

// ---------------------------------------------------------------------------
// The A3 family
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum A3Variant {
    DeltaDeltaPrimeDelta,
    DeltaPrimeDeltaDeltaPrime,
}

/// The 3-vertex chain with the given type pattern and lengths (1, √2).
pub fn a3_graph(variant: A3Variant) -> MarkedGraph {
    let (t1, t2) = match variant {
        A3Variant::DeltaDeltaPrimeDelta => ("delta", "delta'"),
        A3Variant::DeltaPrimeDeltaDeltaPrime => ("delta'", "delta"),
    };
    MarkedGraph::parse(&format!(
        "vertex V1 {t1}\nvertex V2 {t2}\nvertex V3 {t1}\n\
         edge e12 V1 V2 1\nedge e23 V2 V3 sqrt(2)\n"
    ))
    .expect("valid chain")
}

/// The isospectral coupling pair on the A3 chain:
/// ᾱ = (a, 2/a, 0), ᾱ̃ = (0, −2/a, −a). Solving the exact criterion on the
/// δ'–δ–δ' chain yields the same formula as for δ–δ'–δ.
pub fn a3_family(
    a: &BigRational,
    _variant: A3Variant,
) -> Result<(CouplingVector, CouplingVector)> {
    if a.is_zero() {
        return Err(Error::ZeroParameter);
    }
    let two = BigRational::from_integer(2.into());
    let first = CouplingVector::from_rationals(vec![
        a.clone(),
        &two / a,
        BigRational::zero(),
    ]);
    let second = CouplingVector::from_rationals(vec![
        BigRational::zero(),
        -(&two / a),
        -a.clone(),
    ]);
    Ok((first, second))
}

// ---------------------------------------------------------------------------
// Vertex classification
// ---------------------------------------------------------------------------

/// Zero/nonzero pattern of a vertex across the two coupling vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexClass00 {
    /// α = 0, α̃ = 0
    Class00,
    /// α = 0, α̃ ≠ 0
    Class0Bar0,
    /// α ≠ 0, α̃ = 0
    ClassBar00,
    /// α ≠ 0, α̃ ≠ 0
    ClassBar0Bar0,
}

pub fn classify_vertices(
    g: &MarkedGraph,
    alpha: &CouplingVector,
    alpha2: &CouplingVector,
) -> Vec<(String, VertexClass00)> {
    g.vertices()
        .iter()
        .enumerate()
        .map(|(i, vx)| {
            let class = match (alpha.get(i).is_zero(), alpha2.get(i).is_zero()) {
                (true, true) => VertexClass00::Class00,
                (true, false) => VertexClass00::Class0Bar0,
                (false, true) => VertexClass00::ClassBar00,
                (false, false) => VertexClass00::ClassBar0Bar0,
            };
            (vx.id.clone(), class)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Uniqueness report
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct ReportItem {
    pub rule: String,
    pub conclusion: String,
}

#[derive(Debug, Clone, Default)]
pub struct UniquenessReport {
    pub items: Vec<ReportItem>,
}

impl UniquenessReport {
    pub fn has_rule(&self, rule: &str) -> bool {
        self.items.iter().any(|i| i.rule == rule)
    }

    pub fn to_json(&self) -> Value {
        let items: Vec<Value> = self
            .items
            .iter()
            .map(|i| json!({"rule": i.rule, "conclusion": i.conclusion}))
            .collect();
        json!({ "items": items })
    }
}

fn is_path_of_three(g: &MarkedGraph) -> bool {
    g.vertices().len() == 3
        && g.edges().len() == 2
        && g.edges().iter().all(|e| !e.is_loop())
        && (0..3).filter(|&v| g.degree(v) == 1).count() == 2
}

/// True for the exceptional chain: 3 vertices, both edges mixed.
pub fn is_a3_mixed_chain(g: &MarkedGraph) -> bool {
    is_path_of_three(g) && g.all_edges_mixed()
}

fn all_same_type(g: &MarkedGraph) -> bool {
    let t = g.vertices()[0].vtype;
    g.vertices().iter().all(|v| v.vtype == t)
}

/// Admissible trimmings available on this graph: same-type edge removals
/// (type i) and removable loop vertices (type ii).
fn available_trimmings(g: &MarkedGraph) -> (Vec<String>, Vec<String>) {
    let type_i = g
        .edges()
        .iter()
        .filter(|e| {
            !e.is_loop() && g.vertices()[e.u].vtype == g.vertices()[e.v].vtype
        })
        .map(|e| e.id.clone())
        .collect();
    let type_ii = g
        .vertices()
        .iter()
        .filter(|v| crate::reduction::trim_loop_vertex(g, &v.id).is_ok())
        .map(|v| v.id.clone())
        .collect();
    (type_i, type_ii)
}

/// Structurally verified conclusions: each item applies a theorem whose
/// hypotheses hold for this graph shape, and claims nothing beyond it.
pub fn uniqueness_report(g: &MarkedGraph) -> UniquenessReport {
    let mut items = Vec::new();
    let n = g.vertices().len();
    let mixed = g.all_edges_mixed();

    if n == 2 {
        items.push(ReportItem {
            rule: "degenerate-n2".into(),
            conclusion: "degenerate N=2: swapping the two coupling constants yields the same \
                         operator, hence trivially isospectral configurations"
                .into(),
        });
    }
    if is_a3_mixed_chain(g) {
        items.push(ReportItem {
            rule: "a3-exception".into(),
            conclusion: "A3 exception: the mixed 3-chain carries the isospectral family \
                         (a, 2/a, 0) <-> (0, -2/a, -a)"
                .into(),
        });
    }
    if mixed && n > 2 && !is_a3_mixed_chain(g) {
        items.push(ReportItem {
            rule: "mixed-uniqueness-nonzero".into(),
            conclusion: "all edges (except loops) mixed, N>2: with all couplings nonzero, \
                         isospectrality forces equal coupling vectors"
                .into(),
        });
        items.push(ReportItem {
            rule: "mixed-bloody".into(),
            conclusion: "all edges (except loops) mixed, N>2, not A3: on a graph with no \
                         valence-2 doubly-zero vertices (clean first), isospectrality forces \
                         equal coupling vectors"
                .into(),
        });
    }
    if all_same_type(g) {
        items.push(ReportItem {
            rule: "phi-equality-same-type".into(),
            conclusion: "all vertices share one type: isospectrality implies \
                         Phi-equality, so the relaxed criterion applies"
                .into(),
        });
        if g.is_tree() {
            items.push(ReportItem {
                rule: "same-type-tree-uniqueness".into(),
                conclusion: "tree with all vertices of one type: the spectrum determines all \
                             coupling constants"
                    .into(),
            });
        }
    } else if !g.is_tree() {
        items.push(ReportItem {
            rule: "phi-equality-nontree".into(),
            conclusion: "non-tree graph with mixed vertex types: isospectrality implies \
                         Phi-equality"
                .into(),
        });
    } else if mixed {
        items.push(ReportItem {
            rule: "phi-equality-mixed-tree-nonzero".into(),
            conclusion: "tree with all edges mixed: under all-nonzero couplings, \
                         isospectrality implies Phi-equality"
                .into(),
        });
    }
    if n > 2 {
        items.push(ReportItem {
            rule: "zero-coupling-propagation".into(),
            conclusion: "at any vertex with both couplings zero, isospectrality forces equal \
                         couplings at every adjacent vertex; requires no valence-2 doubly-zero \
                         vertices, so clean the graph first"
                .into(),
        });
    }
    let (type_i, type_ii) = available_trimmings(g);
    if !type_i.is_empty() || !type_ii.is_empty() {
        items.push(ReportItem {
            rule: "trimming-available".into(),
            conclusion: format!(
                "admissible trimmings preserve isospectrality with couplings summed at the \
                 merged vertex; available here: same-type edges {:?}, loop vertices {:?}",
                type_i, type_ii
            ),
        });
    }
    UniquenessReport { items }
}

// ---------------------------------------------------------------------------
// Numeric search
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub seed: u64,
    /// Random multistarts in addition to the structured ones.
    pub random_starts: usize,
    /// Residual below which a local minimum becomes a candidate.
    pub residual_tol: f64,
    pub max_denominator: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            seed: 7,
            random_starts: 32,
            residual_tol: 1e-10,
            max_denominator: 1_000_000,
        }
    }
}

/// Float view of the expansion for fast objective evaluation.
struct FloatClasses {
    /// per class: list of (variable mask, coefficient)
    classes: Vec<Vec<(u64, f64)>>,
    targets: Vec<f64>,
    delta_prime: Vec<usize>,
    degrees: Vec<f64>,
}

impl FloatClasses {
    fn phi(&self, x: &[f64]) -> f64 {
        let mut p = 1.0;
        for &v in &self.delta_prime {
            if x[v] != 0.0 {
                p *= self.degrees[v] / x[v];
            }
        }
        p
    }

    fn residual(&self, x: &[f64]) -> f64 {
        let phi = self.phi(x);
        let mut worst = 0.0f64;
        for (class, target) in self.classes.iter().zip(&self.targets) {
            let mut f = 0.0;
            for (mask, c) in class {
                let mut term = *c;
                let mut m = *mask;
                while m != 0 {
                    let v = m.trailing_zeros() as usize;
                    term *= x[v];
                    m &= m - 1;
                }
                f += term;
            }
            worst = worst.max((phi * f - target).abs());
        }
        worst
    }
}

/// Nelder-Mead minimization over the free coordinates.
fn nelder_mead(
    f: &impl Fn(&[f64]) -> f64,
    x0: &[f64],
    iterations: usize,
) -> (Vec<f64>, f64) {
    let n = x0.len();
    if n == 0 {
        return (x0.to_vec(), f(x0));
    }
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += 0.5 * (1.0 + x[i].abs());
        let fx = f(&x);
        simplex.push((x, fx));
    }
    for _ in 0..iterations {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[0].1 < 1e-16 {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|i| simplex[..n].iter().map(|(x, _)| x[i]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let reflect: Vec<f64> = (0..n)
            .map(|i| centroid[i] + (centroid[i] - worst.0[i]))
            .collect();
        let fr = f(&reflect);
        if fr < simplex[0].1 {
            let expand: Vec<f64> = (0..n)
                .map(|i| centroid[i] + 2.0 * (centroid[i] - worst.0[i]))
                .collect();
            let fe = f(&expand);
            simplex[n] = if fe < fr { (expand, fe) } else { (reflect, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (reflect, fr);
        } else {
            let contract: Vec<f64> = (0..n)
                .map(|i| centroid[i] - 0.5 * (centroid[i] - worst.0[i]))
                .collect();
            let fc = f(&contract);
            if fc < worst.1 {
                simplex[n] = (contract, fc);
            } else {
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let shrunk: Vec<f64> = (0..n)
                        .map(|i| best[i] + 0.5 * (entry.0[i] - best[i]))
                        .collect();
                    let fs = f(&shrunk);
                    *entry = (shrunk, fs);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex[0].clone()
}

fn snap_to_rational(x: f64, cap: u64) -> BigRational {
    if x.abs() < 1e-7 {
        return BigRational::zero();
    }
    crate::graph::rationalize(x, cap)
}

/// Exploratory multistart search for coupling vectors isospectral to ᾱ,
/// minimizing max_γ |Φ·f_γ(x) − Φ(ᾱ)·f_γ(ᾱ)|. Candidates are rationalized
/// and re-verified by the exact criterion; ᾱ itself is always returned.
/// Explicitly non-exhaustive.
pub fn find_isospectral_numeric(
    g: &MarkedGraph,
    alpha: &CouplingVector,
    config: &SearchConfig,
) -> Result<Vec<CouplingVector>> {
    let n = g.vertices().len();
    let expansion = expansion_for(g)?;
    let (va, _) = alpha.rationalized(config.max_denominator);
    let phi_a = phi(g, &va);

    let delta_prime: Vec<usize> = g
        .vertices()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.vtype == VertexType::DeltaPrime)
        .map(|(i, _)| i)
        .collect();
    let degrees: Vec<f64> = (0..n).map(|v| g.degree(v) as f64).collect();
    let classes: Vec<Vec<(u64, f64)>> = expansion
        .classes()
        .map(|(_, poly)| {
            poly.terms()
                .map(|(mask, c)| (mask, c.to_f64().unwrap_or(f64::NAN)))
                .collect()
        })
        .collect();
    let targets: Vec<f64> = expansion
        .classes()
        .map(|(_, poly)| {
            (&phi_a * poly.eval_exact(&va))
                .to_f64()
                .unwrap_or(f64::NAN)
        })
        .collect();
    let float = FloatClasses {
        classes,
        targets,
        delta_prime,
        degrees,
    };

    // zero couplings at δ' vertices must occupy a fixed pattern of the same
    // cardinality as in ᾱ; enumerate the patterns and search the free
    // coordinates of each stratum
    let zero_count = float
        .delta_prime
        .iter()
        .filter(|&&v| va[v].is_zero())
        .count();
    let patterns = subsets_of_size(&float.delta_prime, zero_count);

    let x0: Vec<f64> = va.iter().map(|r| r.to_f64().unwrap_or(0.0)).collect();
    let mut starts: Vec<Vec<f64>> = Vec::new();
    starts.push(x0.clone());
    starts.push(x0.iter().map(|v| -v).collect());
    starts.push(x0.iter().rev().copied().collect());
    starts.push(x0.iter().rev().map(|v| -v).collect());
    if n <= 6 {
        for signs in 0u32..(1 << n) {
            let flipped: Vec<f64> = x0
                .iter()
                .enumerate()
                .map(|(i, v)| if signs & (1 << i) != 0 { -v } else { *v })
                .collect();
            starts.push(flipped);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for _ in 0..config.random_starts {
        starts.push((0..n).map(|_| rng.gen_range(-4.0..4.0)).collect());
    }

    // multistarts run in parallel; candidates are merged in order and
    // re-verified sequentially, so the result is seed-deterministic
    let mut candidates: Vec<Vec<BigRational>> = Vec::new();
    for pattern in &patterns {
        let free: Vec<usize> = (0..n).filter(|i| !pattern.contains(i)).collect();
        let objective = |xfree: &[f64]| -> f64 {
            let mut x = vec![0.0; n];
            for (slot, &i) in free.iter().enumerate() {
                x[i] = xfree[slot];
            }
            float.residual(&x)
        };
        let local: Vec<Option<Vec<BigRational>>> = starts
            .par_iter()
            .map(|start| {
                let sfree: Vec<f64> = free.iter().map(|&i| start[i]).collect();
                let (mut best, mut fbest) = nelder_mead(&objective, &sfree, 300);
                if fbest > config.residual_tol && fbest < 1e-3 {
                    let (polished, fp) = nelder_mead(&objective, &best, 300);
                    best = polished;
                    fbest = fp;
                }
                if !fbest.is_finite() || fbest > config.residual_tol {
                    return None;
                }
                let mut candidate = vec![BigRational::zero(); n];
                for (slot, &i) in free.iter().enumerate() {
                    candidate[i] = snap_to_rational(best[slot], config.max_denominator);
                }
                Some(candidate)
            })
            .collect();
        candidates.extend(local.into_iter().flatten());
    }
    let mut found: BTreeSet<Vec<BigRational>> = BTreeSet::new();
    let mut rejected: BTreeSet<Vec<BigRational>> = BTreeSet::new();
    found.insert(va.clone());
    for candidate in candidates {
        if found.contains(&candidate) || rejected.contains(&candidate) {
            continue;
        }
        let cv = CouplingVector::from_rationals(candidate.clone());
        if check_isospectral(g, alpha, &cv)?.verdict == Verdict::Isospectral {
            found.insert(candidate);
        } else {
            rejected.insert(candidate);
        }
    }
    Ok(found
        .into_iter()
        .map(CouplingVector::from_rationals)
        .collect())
}

fn subsets_of_size(items: &[usize], size: usize) -> Vec<BTreeSet<usize>> {
    let mut out = Vec::new();
    let mut current = BTreeSet::new();
    fn go(
        items: &[usize],
        size: usize,
        from: usize,
        current: &mut BTreeSet<usize>,
        out: &mut Vec<BTreeSet<usize>>,
    ) {
        if current.len() == size {
            out.push(current.clone());
            return;
        }
        for i in from..items.len() {
            current.insert(items[i]);
            go(items, size, i + 1, current, out);
            current.remove(&items[i]);
        }
    }
    go(items, size, 0, &mut current, &mut out);
    out
}
