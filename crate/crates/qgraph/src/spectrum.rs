//! Numeric eigenvalue computation: root scanning of the pole-free secular
//! function, a fully independent edge-basis oracle (2n×2n matching-condition
//! determinant), and spectrum comparison utilities.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::expansion::SecularFunction;
use crate::graph::{CouplingVector, MarkedGraph, VertexType};

/// Guard strip around λ = 0 excluded from scanning; a root at 0 is found by
/// the edge-basis rank test instead.
pub const ZERO_GUARD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumMethod {
    Secular,
    EdgeBasis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootFlag {
    /// Present in the edge-basis list but invisible to the M-function path
    /// (loop-supported eigenvalue).
    LoopInvisible,
    /// λ = 0 eigenvalue found by the rank test.
    ZeroMode,
    /// Multiplicity estimated from a root cluster; advisory only.
    Cluster,
}

#[derive(Debug, Clone)]
pub struct Root {
    pub lambda: f64,
    pub multiplicity: usize,
    pub flags: Vec<RootFlag>,
}

#[derive(Debug, Clone)]
pub struct SpectrumWindow {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub method: SpectrumMethod,
    pub roots: Vec<Root>,
}

impl SpectrumWindow {
    /// Roots, repeated with multiplicity, in ascending order.
    pub fn flattened(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for r in &self.roots {
            for _ in 0..r.multiplicity {
                out.push(r.lambda);
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct ScanOptions {
    /// Scan step in μ for λ > 0; default π/(40·Σ l_i).
    pub mu_step: Option<f64>,
    /// Scan step in λ for the negative part; default window/2000.
    pub negative_step: Option<f64>,
    /// Cluster radius for multiplicity estimation.
    pub cluster_radius: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            mu_step: None,
            negative_step: None,
            cluster_radius: 1e-7,
        }
    }
}

fn total_length(g: &MarkedGraph) -> f64 {
    g.edges().iter().map(|e| e.length.to_f64()).sum()
}

/// Bisection refinement of a sign change of `f` on [a, b], to near machine
/// precision in the scan coordinate.
fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fa < 0.0) != (fm < 0.0) {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
        if (b - a) <= 1e-15 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
    }
    0.5 * (a + b)
}

/// Minimize |f| on [a, b] by golden-section search (used on dips where the
/// function approaches zero without a grid-level sign change).
fn minimize_abs(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c).abs();
    let mut fd = f(d).abs();
    for _ in 0..120 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c).abs();
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d).abs();
        }
        if (b - a).abs() <= 1e-14 * (1.0 + a.abs()) {
            break;
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Scan `f` uniformly on [lo, hi] with the given step, bisecting every sign
/// change; returns roots in the scan coordinate. Grid evaluation and bracket
/// refinement run in parallel; the result is an ordered merge, so the output
/// does not depend on the thread count.
///
/// A grid interval can hide a close pair of roots (the function dips through
/// zero and back between samples; multi-edge cycles genuinely produce such
/// near-double eigenvalue pairs). Local minima of |f| that are much smaller
/// than their neighbors are therefore refined: if the minimum crosses zero
/// the two enclosed roots are recovered, and an exact touch is reported as a
/// multiplicity-2 root at the extremum.
fn scan_roots(f: &(impl Fn(f64) -> f64 + Sync), lo: f64, hi: f64, step: f64) -> Vec<f64> {
    if hi <= lo {
        return Vec::new();
    }
    let n = (((hi - lo) / step).ceil() as usize).max(1);
    let xs: Vec<f64> = (0..=n)
        .map(|i| lo + (hi - lo) * (i as f64) / (n as f64))
        .collect();
    let values: Vec<f64> = xs.par_iter().map(|&x| f(x)).collect();
    let mut exact: Vec<(usize, f64)> = Vec::new();
    let mut brackets: Vec<(usize, f64, f64, f64)> = Vec::new();
    let mut crossing = vec![false; n + 1];
    for i in 0..=n {
        if values[i] == 0.0 {
            exact.push((i, xs[i]));
            crossing[i] = true;
        } else if i > 0 && values[i - 1] != 0.0 && (values[i - 1] < 0.0) != (values[i] < 0.0) {
            brackets.push((i, xs[i - 1], xs[i], values[i - 1]));
            crossing[i] = true;
        }
    }
    // dip candidates: interior local minima of |f| without adjacent crossings
    let mut dips: Vec<usize> = Vec::new();
    for i in 1..n {
        if crossing[i] || crossing[i + 1] || crossing[i - 1] {
            continue;
        }
        let (fm, fl, fr) = (values[i].abs(), values[i - 1].abs(), values[i + 1].abs());
        if fm < fl && fm < fr && fm < 0.05 * fl.max(fr) {
            dips.push(i);
        }
    }
    let refined: Vec<(usize, f64)> = brackets
        .par_iter()
        .map(|&(i, a, b, fa)| (i, bisect(f, a, b, fa)))
        .collect();
    let dip_roots: Vec<Vec<(usize, f64)>> = dips
        .par_iter()
        .map(|&i| {
            let (x_min, f_min) = minimize_abs(f, xs[i - 1], xs[i + 1]);
            let scale = values[i - 1].abs().max(values[i + 1].abs());
            if f_min == 0.0 {
                return vec![(i, x_min), (i, x_min)];
            }
            if (f_min < 0.0) == (values[i - 1] < 0.0) {
                // no crossing; an exact touch at numerical resolution is a
                // double root, anything else is a benign dip
                if f_min.abs() <= 1e-9 * scale {
                    return vec![(i, x_min), (i, x_min)];
                }
                return Vec::new();
            }
            // the dip crosses zero: two enclosed simple roots
            let left = bisect(f, xs[i - 1], x_min, values[i - 1]);
            let right = bisect(f, x_min, xs[i + 1], f_min);
            vec![(i, left), (i, right)]
        })
        .collect();
    let mut roots: Vec<(usize, f64)> = exact;
    roots.extend(refined);
    roots.extend(dip_roots.into_iter().flatten());
    roots.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    roots.into_iter().map(|(_, x)| x).collect()
}

fn cluster_roots(mut lambdas: Vec<f64>, radius: f64, extra_flag: Option<RootFlag>) -> Vec<Root> {
    lambdas.sort_by(f64::total_cmp);
    let mut roots: Vec<Root> = Vec::new();
    for l in lambdas {
        match roots.last_mut() {
            Some(last) if (l - last.lambda).abs() <= radius => {
                last.multiplicity += 1;
                if !last.flags.contains(&RootFlag::Cluster) {
                    last.flags.push(RootFlag::Cluster);
                }
            }
            _ => roots.push(Root {
                lambda: l,
                multiplicity: 1,
                flags: extra_flag.iter().copied().collect(),
            }),
        }
    }
    roots
}

fn scan_window(
    f: &(impl Fn(f64) -> f64 + Sync),
    g: &MarkedGraph,
    lambda_min: f64,
    lambda_max: f64,
    opts: &ScanOptions,
) -> Vec<f64> {
    let mut lambdas = Vec::new();
    // positive part: scan uniformly in μ = √λ, where roots are quasi-uniform
    let lo = lambda_min.max(ZERO_GUARD);
    if lambda_max > lo {
        let mu_lo = lo.sqrt();
        let mu_hi = lambda_max.sqrt();
        let step = opts
            .mu_step
            .unwrap_or(std::f64::consts::PI / (40.0 * total_length(g)));
        let fm = |mu: f64| f(mu * mu);
        lambdas.extend(scan_roots(&fm, mu_lo, mu_hi, step).into_iter().map(|m| m * m));
    }
    // negative part: finitely many eigenvalues, scan uniformly in λ
    let hi = lambda_max.min(-ZERO_GUARD);
    if hi > lambda_min {
        let step = opts
            .negative_step
            .unwrap_or(((hi - lambda_min) / 2000.0).max(1e-6));
        lambdas.extend(scan_roots(f, lambda_min, hi, step));
    }
    lambdas
}

/// Eigenvalues as sign-change roots of Π(λ)·det(M(λ)−B), evaluated through
/// the pole-free expansion.
pub fn eigenvalues_secular(
    g: &MarkedGraph,
    alpha: &CouplingVector,
    lambda_min: f64,
    lambda_max: f64,
    opts: &ScanOptions,
) -> Result<SpectrumWindow> {
    let secular = SecularFunction::build(g)?;
    let alpha_f = alpha.to_f64s();
    let f = |lambda: f64| secular.value_complex(&alpha_f, lambda).re;
    let lambdas = scan_window(&f, g, lambda_min, lambda_max, opts);
    Ok(SpectrumWindow {
        lambda_min,
        lambda_max,
        method: SpectrumMethod::Secular,
        roots: cluster_roots(lambdas, opts.cluster_radius, None),
    })
}

// ---------------------------------------------------------------------------
// Edge-basis oracle
// ---------------------------------------------------------------------------

/// Coefficients of (value, normal derivative) rows for the two basis
/// solutions on one edge, evaluated at one endpoint.
fn endpoint_rows(lambda: f64, l: f64, at_start: bool) -> ([f64; 2], [f64; 2]) {
    if lambda > 0.0 {
        let mu = lambda.sqrt();
        if at_start {
            ([1.0, 0.0], [0.0, mu])
        } else {
            (
                [(mu * l).cos(), (mu * l).sin()],
                [mu * (mu * l).sin(), -mu * (mu * l).cos()],
            )
        }
    } else if lambda < 0.0 {
        let nu = (-lambda).sqrt();
        if at_start {
            ([1.0, 0.0], [0.0, nu])
        } else {
            (
                [(nu * l).cosh(), (nu * l).sinh()],
                [-nu * (nu * l).sinh(), -nu * (nu * l).cosh()],
            )
        }
    } else if at_start {
        ([1.0, 0.0], [0.0, 1.0])
    } else {
        ([1.0, l], [0.0, -1.0])
    }
}

/// Assemble the 2n×2n homogeneous system imposing the vertex matching
/// conditions on edge-wise solutions; its determinant vanishes exactly at
/// the eigenvalues.
fn edge_basis_matrix(g: &MarkedGraph, alpha_f: &[f64], lambda: f64) -> DMatrix<f64> {
    let n_edges = g.edges().len();
    let dim = 2 * n_edges;
    let mut a = DMatrix::<f64>::zeros(dim, dim);
    let mut row = 0;
    for (k, vx) in g.vertices().iter().enumerate() {
        // endpoint slots at this vertex: (edge index, at_start)
        let mut slots: Vec<(usize, bool)> = Vec::new();
        for (j, e) in g.edges().iter().enumerate() {
            if e.u == k {
                slots.push((j, true));
            }
            if e.v == k {
                slots.push((j, false));
            }
        }
        let parts: Vec<([f64; 2], [f64; 2])> = slots
            .iter()
            .map(|&(j, at_start)| endpoint_rows(lambda, g.edges()[j].length.to_f64(), at_start))
            .collect();
        match vx.vtype {
            VertexType::Delta => {
                // continuity across the vertex
                for i in 1..slots.len() {
                    let (j0, _) = slots[0];
                    let (ji, _) = slots[i];
                    a[(row, 2 * j0)] += parts[0].0[0];
                    a[(row, 2 * j0 + 1)] += parts[0].0[1];
                    a[(row, 2 * ji)] -= parts[i].0[0];
                    a[(row, 2 * ji + 1)] -= parts[i].0[1];
                    row += 1;
                }
                // Σ ∂n f = α f(V)
                for (i, &(j, _)) in slots.iter().enumerate() {
                    a[(row, 2 * j)] += parts[i].1[0];
                    a[(row, 2 * j + 1)] += parts[i].1[1];
                }
                let (j0, _) = slots[0];
                a[(row, 2 * j0)] -= alpha_f[k] * parts[0].0[0];
                a[(row, 2 * j0 + 1)] -= alpha_f[k] * parts[0].0[1];
                row += 1;
            }
            VertexType::DeltaPrime => {
                // equal normal derivatives
                for i in 1..slots.len() {
                    let (j0, _) = slots[0];
                    let (ji, _) = slots[i];
                    a[(row, 2 * j0)] += parts[0].1[0];
                    a[(row, 2 * j0 + 1)] += parts[0].1[1];
                    a[(row, 2 * ji)] -= parts[i].1[0];
                    a[(row, 2 * ji + 1)] -= parts[i].1[1];
                    row += 1;
                }
                // Σ f = −α ∂n f(V)
                for (i, &(j, _)) in slots.iter().enumerate() {
                    a[(row, 2 * j)] += parts[i].0[0];
                    a[(row, 2 * j + 1)] += parts[i].0[1];
                }
                let (j0, _) = slots[0];
                a[(row, 2 * j0)] += alpha_f[k] * parts[0].1[0];
                a[(row, 2 * j0 + 1)] += alpha_f[k] * parts[0].1[1];
                row += 1;
            }
        }
    }
    debug_assert_eq!(row, dim);
    a
}

/// Determinant with positive row scaling, so sign changes are preserved and
/// the magnitude stays usable for bracketing.
fn scaled_det(g: &MarkedGraph, alpha_f: &[f64], lambda: f64) -> f64 {
    let mut a = edge_basis_matrix(g, alpha_f, lambda);
    for mut r in a.row_iter_mut() {
        let m = r.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
        if m > 0.0 {
            r /= m;
        }
    }
    a.determinant()
}

/// Nullity of the λ = 0 system: the number of zero modes.
fn zero_mode_count(g: &MarkedGraph, alpha_f: &[f64]) -> usize {
    let a = edge_basis_matrix(g, alpha_f, 0.0);
    let dim = a.nrows();
    let svd = a.svd(false, false);
    let max_sv = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let tol = 1e-10 * max_sv.max(1.0);
    dim - svd.singular_values.iter().filter(|&&s| s > tol).count()
}

/// Independent oracle: eigenvalues as roots of the edge-basis matching
/// determinant. Includes loop-supported eigenvalues invisible to the
/// M-function path and the λ = 0 rank test.
pub fn eigenvalues_edge_basis(
    g: &MarkedGraph,
    alpha: &CouplingVector,
    lambda_min: f64,
    lambda_max: f64,
    opts: &ScanOptions,
) -> Result<SpectrumWindow> {
    let alpha_f = alpha.to_f64s();
    let f = |lambda: f64| scaled_det(g, &alpha_f, lambda);
    let lambdas = scan_window(&f, g, lambda_min, lambda_max, opts);
    for l in &lambdas {
        if !l.is_finite() || !f(*l).is_finite() {
            return Err(Error::ConditioningFailure(*l));
        }
    }
    let mut roots = cluster_roots(lambdas, opts.cluster_radius, None);
    if lambda_min < ZERO_GUARD && lambda_max > -ZERO_GUARD {
        let nullity = zero_mode_count(g, &alpha_f);
        if nullity > 0 {
            roots.insert(
                roots.partition_point(|r| r.lambda < 0.0),
                Root {
                    lambda: 0.0,
                    multiplicity: nullity,
                    flags: vec![RootFlag::ZeroMode],
                },
            );
        }
    }
    Ok(SpectrumWindow {
        lambda_min,
        lambda_max,
        method: SpectrumMethod::EdgeBasis,
        roots,
    })
}

// ---------------------------------------------------------------------------
// Comparison
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct SpectrumComparison {
    pub equal: bool,
    pub max_deviation: f64,
    pub first_mismatch: Option<f64>,
}

/// Multiset comparison of two windows computed by the same method on the
/// same window, with tolerance pairing of sorted root lists.
pub fn compare_spectra(
    a: &SpectrumWindow,
    b: &SpectrumWindow,
    tol: f64,
) -> Result<SpectrumComparison> {
    if a.method != b.method {
        return Err(Error::WindowMismatch("methods differ".into()));
    }
    if (a.lambda_min - b.lambda_min).abs() > 1e-12 || (a.lambda_max - b.lambda_max).abs() > 1e-12
    {
        return Err(Error::WindowMismatch(format!(
            "({}, {}] vs ({}, {}]",
            a.lambda_min, a.lambda_max, b.lambda_min, b.lambda_max
        )));
    }
    let xs = a.flattened();
    let ys = b.flattened();
    let mut max_dev: f64 = 0.0;
    let mut first_mismatch = None;
    for i in 0..xs.len().max(ys.len()) {
        match (xs.get(i), ys.get(i)) {
            (Some(x), Some(y)) => {
                let d = (x - y).abs();
                max_dev = max_dev.max(d);
                if d > tol && first_mismatch.is_none() {
                    first_mismatch = Some(*x);
                }
            }
            (Some(x), None) | (None, Some(x)) => {
                if first_mismatch.is_none() {
                    first_mismatch = Some(*x);
                }
                max_dev = f64::INFINITY;
            }
            (None, None) => {}
        }
    }
    Ok(SpectrumComparison {
        equal: first_mismatch.is_none(),
        max_deviation: max_dev,
        first_mismatch,
    })
}

/// Edge-basis window with roots missing from the secular list flagged
/// loop-invisible. Returns an error when a secular root has no edge-basis
/// partner (the secular list must be a subset).
pub fn flag_loop_invisible(
    secular: &SpectrumWindow,
    edge_basis: &SpectrumWindow,
    tol: f64,
) -> Result<SpectrumWindow> {
    let mut flagged = edge_basis.clone();
    let sec = secular.flattened();
    let mut used = vec![false; sec.len()];
    for root in &mut flagged.roots {
        if root.flags.contains(&RootFlag::ZeroMode) {
            continue;
        }
        let mut matched = 0;
        for _ in 0..root.multiplicity {
            let hit = sec
                .iter()
                .enumerate()
                .filter(|(i, s)| !used[*i] && (*s - root.lambda).abs() <= tol)
                .map(|(i, _)| i)
                .next();
            if let Some(i) = hit {
                used[i] = true;
                matched += 1;
            }
        }
        if matched == 0 {
            root.flags.push(RootFlag::LoopInvisible);
        }
    }
    if let Some(i) = used.iter().position(|u| !u) {
        return Err(Error::WindowMismatch(format!(
            "secular root {} missing from the edge-basis list",
            sec[i]
        )));
    }
    Ok(flagged)
}
