//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured quantities (run with `--nocapture` to see them). Tolerances
//! and runtime budgets are pinned here.

mod common;

use std::time::Instant;

use num::rational::BigRational;
use num::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{corpus_graphs, loop_graphs, loopless_graphs};
use qgraph::expansion::{
    expand_permutation, expand_subgraphs, modify_graph, SecularFunction, DEFAULT_SIZE_CAP,
};
use qgraph::iso::{
    a3_family, a3_graph, balancing_residual, check_isospectral, find_isospectral_numeric,
    sigma_necessary, A3Variant, SearchConfig, Verdict,
};
use qgraph::reduction::trim_same_type_edge;
use qgraph::spectrum::{
    eigenvalues_edge_basis, eigenvalues_secular, flag_loop_invisible, RootFlag, ScanOptions,
};
use qgraph::{CouplingVector, MarkedGraph, VertexType};

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn max_pair_deviation(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Criterion 1: the A3 family is accepted exactly and its numeric spectra on
/// (0.1, 400] coincide to 1e-8, within 5 s.
#[test]
fn criterion_1_a3_family() {
    let start = Instant::now();
    let g = a3_graph(A3Variant::DeltaDeltaPrimeDelta);
    let opts = ScanOptions::default();
    let mut worst_dev: f64 = 0.0;
    for a in [rat(1, 1), rat(2, 1), rat(3, 2)] {
        let (x, y) = a3_family(&a, A3Variant::DeltaDeltaPrimeDelta).unwrap();
        let verdict = check_isospectral(&g, &x, &y).unwrap();
        assert_eq!(verdict.verdict, Verdict::Isospectral, "a = {a}");
        assert!(!verdict.approximate);
        let wx = eigenvalues_secular(&g, &x, 0.1, 400.0, &opts).unwrap();
        let wy = eigenvalues_secular(&g, &y, 0.1, 400.0, &opts).unwrap();
        let dev = max_pair_deviation(&wx.flattened(), &wy.flattened());
        assert!(dev < 1e-8, "a = {a}: spectra deviate by {dev:e}");
        worst_dev = worst_dev.max(dev);
        assert!(!wx.roots.is_empty());
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!(
        "ACCEPTANCE 1 PASS: A3 family exact + spectra agree (max dev {worst_dev:.2e}) in {elapsed:?}"
    );
}

/// Criterion 2: the all-δ 4-cycle pattern is accepted, spectra agree, and
/// every single-edge trimming re-checks on the triangle; within 10 s.
#[test]
fn criterion_2_four_cycle_pattern() {
    let start = Instant::now();
    let g = MarkedGraph::parse(
        "vertex V1 delta\nvertex V2 delta\nvertex V3 delta\nvertex V4 delta\n\
         edge e12 V1 V2 1\nedge e23 V2 V3 sqrt(2)\nedge e34 V3 V4 sqrt(3)\nedge e41 V4 V1 sqrt(5)\n",
    )
    .unwrap();
    let opts = ScanOptions::default();
    let mut worst_dev: f64 = 0.0;
    for a in [rat(1, 1), rat(1, 3)] {
        let x = CouplingVector::from_rationals(vec![
            a.clone(),
            -a.clone(),
            a.clone(),
            -a.clone(),
        ]);
        let y = CouplingVector::from_rationals(vec![
            -a.clone(),
            a.clone(),
            -a.clone(),
            a.clone(),
        ]);
        let verdict = check_isospectral(&g, &x, &y).unwrap();
        assert_eq!(verdict.verdict, Verdict::Isospectral, "a = {a}");
        let wx = eigenvalues_secular(&g, &x, 0.1, 400.0, &opts).unwrap();
        let wy = eigenvalues_secular(&g, &y, 0.1, 400.0, &opts).unwrap();
        let dev = max_pair_deviation(&wx.flattened(), &wy.flattened());
        assert!(dev < 1e-8, "a = {a}: spectra deviate by {dev:e}");
        worst_dev = worst_dev.max(dev);
        // trimming any one edge must leave an isospectral pair on the triangle
        for e in ["e12", "e23", "e34", "e41"] {
            let r = trim_same_type_edge(&g, e).unwrap();
            let rx = r.apply(&g, &x).unwrap();
            let ry = r.apply(&g, &y).unwrap();
            let reduced = check_isospectral(&r.graph, &rx, &ry).unwrap();
            assert_eq!(
                reduced.verdict,
                Verdict::Isospectral,
                "trimming {e} broke the pair for a = {a}"
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!(
        "ACCEPTANCE 2 PASS: 4-cycle pattern + all four trimmings (max dev {worst_dev:.2e}) in {elapsed:?}"
    );
}

fn random_mixed_graph(rng: &mut ChaCha8Rng, surds: &mut Vec<u64>) -> MarkedGraph {
    let n = rng.gen_range(3..=5);
    let mut text = String::new();
    // random tree with alternating types keeps every edge mixed
    let mut types = vec![VertexType::Delta; n];
    let mut parents = vec![0usize; n];
    for v in 1..n {
        let p = rng.gen_range(0..v);
        parents[v] = p;
        types[v] = match types[p] {
            VertexType::Delta => VertexType::DeltaPrime,
            VertexType::DeltaPrime => VertexType::Delta,
        };
    }
    for (v, t) in types.iter().enumerate() {
        let tag = match t {
            VertexType::Delta => "delta",
            VertexType::DeltaPrime => "delta'",
        };
        text.push_str(&format!("vertex V{v} {tag}\n"));
    }
    let mut edge_count = 0;
    let mut push_edge = |text: &mut String, u: usize, v: usize, surds: &mut Vec<u64>| {
        let l = surds.remove(0);
        text.push_str(&format!("edge e{edge_count} V{u} V{v} sqrt({l})\n"));
        edge_count += 1;
    };
    for v in 1..n {
        push_edge(&mut text, parents[v], v, surds);
    }
    // sometimes add an extra mixed edge (possibly parallel)
    if rng.gen_bool(0.4) {
        for _ in 0..8 {
            let u = rng.gen_range(0..n);
            let v = rng.gen_range(0..n);
            if u != v && types[u] != types[v] {
                push_edge(&mut text, u, v, surds);
                break;
            }
        }
    }
    MarkedGraph::parse(&text).unwrap()
}

/// Criterion 3: on random mixed-type graphs with nonzero rational couplings
/// the numeric search followed by the exact re-check finds nothing but ᾱ;
/// within 2 min.
#[test]
fn criterion_3_uniqueness_on_mixed_graphs() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let squarefree: Vec<u64> = vec![
        2, 3, 5, 6, 7, 10, 11, 13, 14, 15, 17, 19, 21, 22, 23, 26, 29, 30, 31, 33, 34, 35, 37,
        38, 39, 41, 42, 43, 46, 47, 51, 53, 55, 57, 58, 59, 61, 62, 65, 66, 67, 69, 70, 71, 73,
        74, 77, 78, 79, 82, 83, 85, 86, 87, 89, 91, 93, 94, 95, 97, 101, 102, 103, 105, 106,
        107, 109, 110, 111, 113, 114, 115, 118, 119, 122, 123, 127, 129, 130, 131, 133, 134,
        137, 138, 139, 141, 142, 143, 145, 146, 149, 151, 154, 155, 157, 158, 159, 161, 163,
        165, 166, 167, 170, 173, 174, 177, 178, 179, 181, 182, 183, 185, 186, 187, 190, 191,
        193, 194, 195, 197, 199, 201, 202, 203, 205, 206, 209, 210, 211, 213, 214, 215, 217,
        218, 219, 221, 222, 223, 226, 227,
    ];
    let mut surd_pool = squarefree.clone();
    let config = SearchConfig {
        seed: 31,
        random_starts: 24,
        ..SearchConfig::default()
    };
    for trial in 0..25 {
        if surd_pool.len() < 8 {
            surd_pool = squarefree.clone();
        }
        let g = random_mixed_graph(&mut rng, &mut surd_pool);
        let n = g.vertices().len();
        let alpha = CouplingVector::from_rationals(
            (0..n)
                .map(|_| {
                    let num = loop {
                        let v = rng.gen_range(-5i64..=5);
                        if v != 0 {
                            break v;
                        }
                    };
                    rat(num, rng.gen_range(1i64..=3))
                })
                .collect(),
        );
        let found = find_isospectral_numeric(&g, &alpha, &config).unwrap();
        let (va, _) = alpha.rationalized(1_000_000);
        let spurious: Vec<_> = found
            .iter()
            .filter(|cv| cv.rationalized(1_000_000).0 != va)
            .collect();
        assert!(
            spurious.is_empty(),
            "trial {trial}: unexpected isospectral partner {spurious:?} on\n{}",
            g.to_text()
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "took {elapsed:?}");
    println!("ACCEPTANCE 3 PASS: 25 random mixed graphs, search finds only alpha, in {elapsed:?}");
}

/// Criterion 4: subgraph enumeration and signed-permutation expansion agree
/// exactly (canonical forms) across the whole corpus; within 1 min.
#[test]
fn criterion_4_expansion_cross_validation() {
    let start = Instant::now();
    let graphs = corpus_graphs();
    assert!(graphs.len() >= 30, "corpus has {} graphs", graphs.len());
    for (name, g) in &graphs {
        let via_subgraphs = expand_subgraphs(&modify_graph(g), DEFAULT_SIZE_CAP).unwrap();
        let via_permutation = expand_permutation(g, DEFAULT_SIZE_CAP).unwrap();
        assert_eq!(via_subgraphs, via_permutation, "routes disagree on {name}");
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    println!(
        "ACCEPTANCE 4 PASS: expansions agree on {} corpus graphs in {elapsed:?}",
        graphs.len()
    );
}

/// Criterion 5: Π·det(M−B) stays bounded (|value| < 1e6) at 200 points
/// within 1e-4 of every pole family of every corpus graph.
#[test]
fn criterion_5_pole_cancellation() {
    let start = Instant::now();
    let mut checked_points = 0usize;
    for (name, g) in corpus_graphs() {
        let f = SecularFunction::build(&g).unwrap();
        let n = g.vertices().len();
        let alpha: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let cls = g.classify_edges();
        // pole positions in μ per family, kept inside μ ≤ 20 (the λ ≤ 400
        // acceptance window where lengths and couplings are O(1))
        let mut families: Vec<Vec<f64>> = Vec::new();
        let poles = |step: f64, offset: f64| -> Vec<f64> {
            (1..=60)
                .map(|k| offset + step * k as f64)
                .filter(|mu| *mu > 0.0 && *mu <= 20.0)
                .collect()
        };
        for &i in &cls.c {
            let l = g.edges()[i].length.to_f64();
            families.push(poles(std::f64::consts::PI / l, 0.0));
        }
        for &i in &cls.c_prime {
            let l = g.edges()[i].length.to_f64();
            families.push(poles(std::f64::consts::PI / l, -std::f64::consts::PI / (2.0 * l)));
        }
        for &i in &cls.loops_delta {
            let l = g.edges()[i].length.to_f64();
            families.push(poles(2.0 * std::f64::consts::PI / l, -std::f64::consts::PI / l));
        }
        for &i in &cls.loops_delta_prime {
            let l = g.edges()[i].length.to_f64();
            families.push(poles(2.0 * std::f64::consts::PI / l, 0.0));
        }
        for family in families {
            assert!(!family.is_empty());
            // 200 sample points per pole family, offsets within 1e-4
            let per_pole = (200 / family.len()).max(1) + 1;
            let mut points = 0;
            'family: for mu in &family {
                for j in 0..per_pole {
                    for sign in [-1.0, 1.0] {
                        let eps = sign * 1e-4 * (j as f64 + 1.0) / (per_pole as f64);
                        let lambda = (mu + eps) * (mu + eps);
                        let v = f.value(&alpha, lambda).unwrap();
                        assert!(
                            v.abs() < 1e6,
                            "{name}: |Pi·det| = {v:e} near pole mu = {mu}"
                        );
                        points += 1;
                        checked_points += 1;
                        if points >= 200 {
                            break 'family;
                        }
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    println!(
        "ACCEPTANCE 5 PASS: secular function bounded at {checked_points} near-pole points in {elapsed:?}"
    );
}

/// Criterion 6: the two eigenvalue solvers agree on the first 20 roots of
/// every loopless corpus graph (1e-7); on loop graphs the secular list is a
/// subset with the difference flagged loop-invisible.
#[test]
fn criterion_6_oracle_equivalence() {
    let start = Instant::now();
    let opts = ScanOptions::default();
    for (name, g) in loopless_graphs() {
        let n = g.vertices().len();
        let alpha = CouplingVector::from_rationals(
            (0..n).map(|i| rat((i as i64 % 3) - 1, 1)).collect(),
        );
        let total: f64 = g.edges().iter().map(|e| e.length.to_f64()).sum();
        // window sized by the Weyl count to hold at least ~22 roots
        let lmax = (23.0 * std::f64::consts::PI / total).powi(2).max(30.0);
        let sec = eigenvalues_secular(&g, &alpha, 0.01, lmax, &opts).unwrap();
        let edge = eigenvalues_edge_basis(&g, &alpha, 0.01, lmax, &opts).unwrap();
        let a = sec.flattened();
        let b = edge.flattened();
        assert!(a.len() >= 20, "{name}: only {} secular roots", a.len());
        assert!(b.len() >= 20, "{name}: only {} edge-basis roots", b.len());
        for k in 0..20 {
            assert!(
                (a[k] - b[k]).abs() < 1e-7,
                "{name}: root {k} differs: {} vs {}",
                a[k],
                b[k]
            );
        }
    }
    for (name, g) in loop_graphs() {
        let n = g.vertices().len();
        let alpha = CouplingVector::from_rationals((0..n).map(|_| rat(1, 1)).collect());
        let sec = eigenvalues_secular(&g, &alpha, 0.01, 150.0, &opts).unwrap();
        let edge = eigenvalues_edge_basis(&g, &alpha, 0.01, 150.0, &opts).unwrap();
        let flagged = flag_loop_invisible(&sec, &edge, 1e-6)
            .unwrap_or_else(|e| panic!("{name}: secular not a subset: {e}"));
        let invisible = flagged
            .roots
            .iter()
            .filter(|r| r.flags.contains(&RootFlag::LoopInvisible))
            .count();
        assert!(
            invisible > 0,
            "{name}: expected loop-supported eigenvalues in the difference"
        );
    }
    let elapsed = start.elapsed();
    println!("ACCEPTANCE 6 PASS: solver agreement on corpus in {elapsed:?}");
}

/// Criterion 7: Neumann interval baseline, roots (kπ/l)² for k=1..10 within
/// 1e-10.
#[test]
fn criterion_7_neumann_interval() {
    let g = MarkedGraph::parse("vertex a delta\nvertex b delta\nedge e a b 1\n").unwrap();
    let alpha = CouplingVector::zeros(2);
    let lmax = (10.5 * std::f64::consts::PI).powi(2);
    let w = eigenvalues_secular(&g, &alpha, 0.1, lmax, &ScanOptions::default()).unwrap();
    let roots = w.flattened();
    assert_eq!(roots.len(), 10);
    let mut worst: f64 = 0.0;
    for (k, root) in roots.iter().enumerate() {
        let expect = ((k as f64 + 1.0) * std::f64::consts::PI).powi(2);
        let err = (root - expect).abs();
        assert!(err < 1e-10, "k = {}: error {err:e}", k + 1);
        worst = worst.max(err);
    }
    println!("ACCEPTANCE 7 PASS: Neumann roots k=1..10 within {worst:.2e}");
}

/// Criterion 8: on every corpus pair judged isospectral, the σ-set necessary
/// condition holds, and on mixed-type graphs with all-nonzero couplings the
/// balancing sides agree exactly.
#[test]
fn criterion_8_necessary_condition_chain() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut pairs: Vec<(String, MarkedGraph, CouplingVector, CouplingVector)> = Vec::new();
    // the two known nontrivial families
    let a3 = a3_graph(A3Variant::DeltaDeltaPrimeDelta);
    for a in [rat(1, 1), rat(3, 2)] {
        let (x, y) = a3_family(&a, A3Variant::DeltaDeltaPrimeDelta).unwrap();
        pairs.push(("a3-family".into(), a3.clone(), x, y));
    }
    let cycle = MarkedGraph::parse(
        "vertex V1 delta\nvertex V2 delta\nvertex V3 delta\nvertex V4 delta\n\
         edge e12 V1 V2 1\nedge e23 V2 V3 sqrt(2)\nedge e34 V3 V4 sqrt(3)\nedge e41 V4 V1 sqrt(5)\n",
    )
    .unwrap();
    pairs.push((
        "4-cycle".into(),
        cycle,
        CouplingVector::from_i64s(&[1, -1, 1, -1]),
        CouplingVector::from_i64s(&[-1, 1, -1, 1]),
    ));
    // identity pairs with random nonzero couplings across the corpus
    for (name, g) in corpus_graphs() {
        let n = g.vertices().len();
        let alpha = CouplingVector::from_rationals(
            (0..n)
                .map(|_| {
                    let v = loop {
                        let v = rng.gen_range(-4i64..=4);
                        if v != 0 {
                            break v;
                        }
                    };
                    rat(v, 1)
                })
                .collect(),
        );
        pairs.push((name.to_string(), g, alpha.clone(), alpha));
    }
    let mut balanced = 0usize;
    for (name, g, x, y) in &pairs {
        let verdict = check_isospectral(g, x, y).unwrap();
        assert_eq!(verdict.verdict, Verdict::Isospectral, "{name}");
        assert!(sigma_necessary(g, x, y), "{name}: sigma condition failed");
        let nonzero = x.values().iter().all(|v| !v.is_zero())
            && y.values().iter().all(|v| !v.is_zero());
        if g.all_edges_mixed() && nonzero {
            for v in g.vertices() {
                let (lhs, rhs) = balancing_residual(g, &v.id, x, y).unwrap();
                assert_eq!(lhs, rhs, "{name}: balancing at {}", v.id);
                balanced += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    println!(
        "ACCEPTANCE 8 PASS: sigma condition on {} pairs, {} exact balancing checks, in {elapsed:?}",
        pairs.len(),
        balanced
    );
}
