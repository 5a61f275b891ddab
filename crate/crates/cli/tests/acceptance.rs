//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line for
//! each, and exits nonzero if any fails.

use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use walkre_core::graph::{Edge, EntityMention, Vertex};
use walkre_core::kernel::{
    assemble_matrices, gram_matrix, rw_kernel, solve_walk_system, variant_view, GraphView,
};
use walkre_core::svm::{train, SvmParams};
use walkre_core::{
    evaluate_split, f_measure, paired_t_test, precision, recall, Candidate, ConfusionCounts,
    KernelSpec, KernelVariant, SentenceGraph, Solver, TokenFeatures, WalkParams,
};

const ORACLE_ABS_TOL: f64 = 1e-6;
const TRUNCATION_BOUND: f64 = 1e-9;
const SOLVER_REL_TOL: f64 = 1e-8;
const PSD_REL_TOL: f64 = 1e-8;
const SVM_OBJECTIVE_TOL: f64 = 1e-6;
const SVM_EQUALITY_TOL: f64 = 1e-8;
const SVM_KKT_TOL: f64 = 1e-3;
const HARMONIC_TOL: f64 = 1e-12;
const TTEST_CDF_TOL: f64 = 1e-6;
const MIN_MACRO_F1: f64 = 0.95;
const SIGNIFICANCE: f64 = 0.05;

type Outcome = Result<String, String>;
type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------------------
// Random sentence graphs

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Shape {
    /// Edges only go forward in a random vertex order.
    Dag,
    /// At most one outgoing edge per vertex; cycles allowed.
    Functional,
    /// Any edges except self-loops.
    General,
}

const WORDS: &[&str] = &["RAD51", "binds", "Binds", "and", "p53", "the", "X"];
const POS: &[(&str, &str)] = &[("NN", "N"), ("VBZ", "V"), ("CC", "C"), ("DT", "D")];
const LABELS: &[&str] = &["nsubj", "dobj", "conj", "cc"];

fn random_features(rng: &mut ChaCha8Rng) -> TokenFeatures {
    let word = *WORDS.choose(rng).unwrap();
    let lemma = if rng.random_bool(0.7) {
        word.to_lowercase()
    } else {
        (*WORDS.choose(rng).unwrap()).to_string()
    };
    let (pos, gpos) = *POS.choose(rng).unwrap();
    TokenFeatures::new(word, lemma, pos, gpos)
}

fn random_sentence(rng: &mut ChaCha8Rng, n: usize, shape: Shape) -> SentenceGraph {
    let vertices = (0..n)
        .map(|index| Vertex {
            index,
            features: random_features(rng),
        })
        .collect();
    let mut edges: Vec<Edge> = Vec::new();
    let push = |edges: &mut Vec<Edge>, head: usize, dependent: usize, label: &str| {
        let e = Edge {
            head,
            dependent,
            label: label.to_string(),
        };
        if head != dependent && !edges.contains(&e) {
            edges.push(e);
        }
    };
    match shape {
        Shape::Dag => {
            let mut order: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                order.swap(i, rng.random_range(0..=i));
            }
            let density = rng.random_range(0.2..0.8);
            for a in 0..n {
                for b in a + 1..n {
                    if rng.random_bool(density) {
                        push(&mut edges, order[a], order[b], LABELS.choose(rng).unwrap());
                        if rng.random_bool(0.15) {
                            push(&mut edges, order[a], order[b], LABELS.choose(rng).unwrap());
                        }
                    }
                }
            }
        }
        Shape::Functional => {
            for v in 0..n {
                if n > 1 && rng.random_bool(0.8) {
                    let mut w = rng.random_range(0..n - 1);
                    if w >= v {
                        w += 1;
                    }
                    push(&mut edges, v, w, LABELS.choose(rng).unwrap());
                }
            }
        }
        Shape::General => {
            let density = rng.random_range(1.0..2.5) / n as f64;
            for a in 0..n {
                for b in 0..n {
                    if rng.random_bool(density.min(1.0)) {
                        push(&mut edges, a, b, LABELS.choose(rng).unwrap());
                    }
                }
            }
        }
    }
    let k = if n >= 3 && rng.random_bool(0.3) {
        3
    } else {
        2.min(n)
    };
    let mut slots: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        slots.swap(i, rng.random_range(0..=i));
    }
    let entities = slots[..k]
        .iter()
        .enumerate()
        .map(|(m, &vertex)| EntityMention {
            id: format!("T{}", m + 1),
            vertex,
        })
        .collect();
    SentenceGraph {
        doc_id: "d".into(),
        sent_id: "s".into(),
        vertices,
        edges,
        entities,
        pairs: None,
    }
}

fn random_candidate(rng: &mut ChaCha8Rng, sizes: RangeInclusive<usize>, shape: Shape) -> Candidate {
    let n = rng.random_range(sizes).max(2);
    let g = Arc::new(random_sentence(rng, n, shape));
    Candidate::new(g, 0, 1)
}

fn random_variant(rng: &mut ChaCha8Rng) -> KernelVariant {
    *KernelVariant::ALL.choose(rng).unwrap()
}

// ---------------------------------------------------------------------------
// 1. Brute-force path-pair enumeration

/// A walk: its vertices, the edges taken and its probability.
struct Walk {
    vertices: Vec<usize>,
    edges: Vec<usize>,
    prob: f64,
}

fn oracle_vertex_kernel(a: &GraphView, i: usize, b: &GraphView, j: usize) -> f64 {
    let (v, w) = (&a.vertices[i], &b.vertices[j]);
    if v.is_entity != w.is_entity || v.in_sp != w.in_sp {
        return 0.0;
    }
    let (f, g) = (&v.features, &w.features);
    let same = [
        f.word == g.word,
        f.lemma == g.lemma,
        f.pos == g.pos,
        f.gpos == g.gpos,
        f.caps == g.caps,
    ];
    same.iter().filter(|s| **s).count() as f64 / 5.0
}

fn oracle_edge_kernel(a: &GraphView, e: usize, b: &GraphView, f: usize) -> f64 {
    let (x, y) = (&a.edges[e], &b.edges[f]);
    if x.label == y.label && x.in_sp == y.in_sp {
        1.0
    } else {
        0.0
    }
}

/// Every walk with at most `max_len` vertices.
fn enumerate_walks(view: &GraphView, gamma: f64, max_len: usize) -> Vec<Walk> {
    let n = view.vertices.len();
    let out: Vec<Vec<usize>> = (0..n)
        .map(|v| {
            (0..view.edges.len())
                .filter(|&e| view.edges[e].from == v)
                .collect()
        })
        .collect();
    let stop = |v: usize| if out[v].is_empty() { 1.0 } else { gamma };
    let mut walks = Vec::new();
    let mut stack: Vec<(Vec<usize>, Vec<usize>, f64)> = (0..n)
        .map(|v| (vec![v], Vec::new(), 1.0 / n as f64))
        .collect();
    while let Some((vs, es, p)) = stack.pop() {
        let last = *vs.last().unwrap();
        walks.push(Walk {
            vertices: vs.clone(),
            edges: es.clone(),
            prob: p * stop(last),
        });
        if vs.len() == max_len {
            continue;
        }
        let step = (1.0 - gamma) / out[last].len().max(1) as f64;
        for &e in &out[last] {
            let mut vs2 = vs.clone();
            vs2.push(view.edges[e].to);
            let mut es2 = es.clone();
            es2.push(e);
            stack.push((vs2, es2, p * step));
        }
    }
    walks
}

/// Walk length after which the neglected tail is below `TRUNCATION_BOUND`:
/// sum over l > L of (1-gamma)^(2(l-1)).
fn truncation_length(gamma: f64) -> usize {
    let r = (1.0 - gamma).powi(2);
    let mut len = 1;
    while r.powi(len as i32) / (1.0 - r) >= TRUNCATION_BOUND {
        len += 1;
    }
    len
}

fn brute_force_kernel(a: &GraphView, b: &GraphView, gamma: f64) -> f64 {
    let max_len = truncation_length(gamma);
    let wa = enumerate_walks(a, gamma, max_len);
    let wb = enumerate_walks(b, gamma, max_len);
    let mut total = 0.0;
    for h in &wa {
        for g in wb.iter().filter(|g| g.vertices.len() == h.vertices.len()) {
            let mut k = h.prob * g.prob;
            for (&x, &y) in h.vertices.iter().zip(&g.vertices) {
                k *= oracle_vertex_kernel(a, x, b, y);
            }
            for (&x, &y) in h.edges.iter().zip(&g.edges) {
                k *= oracle_edge_kernel(a, x, b, y);
            }
            total += k;
        }
    }
    total
}

fn criterion_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    let mut count = 0;
    while count < 200 {
        let gamma = [0.1, 0.3, 0.5][count % 3];
        let shape = if rng.random_bool(0.5) {
            Shape::Dag
        } else {
            Shape::Functional
        };
        let ca = random_candidate(&mut rng, 2..=5, shape);
        let cb = random_candidate(&mut rng, 2..=5, shape);
        let variant = random_variant(&mut rng);
        let (a, b) = (variant_view(&ca, variant), variant_view(&cb, variant));
        if a.is_empty() || b.is_empty() {
            continue;
        }
        let params = WalkParams::with_gamma(gamma);
        let solved =
            solve_walk_system(&assemble_matrices(&a, &b, &params).unwrap(), &params).unwrap();
        let brute = brute_force_kernel(&a, &b, gamma);
        let diff = (solved - brute).abs();
        worst = worst.max(diff);
        ensure(diff <= ORACLE_ABS_TOL, || {
            format!(
                "pair {count} ({variant}, gamma={gamma}): solver {solved} vs enumeration {brute}"
            )
        })?;
        count += 1;
    }
    Ok(format!("200 pairs, max abs diff {worst:.2e}"))
}

// ---------------------------------------------------------------------------
// 2. Dense versus fixed-point solver

fn criterion_solvers() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for k in 0..500 {
        let shape = [Shape::General, Shape::Dag, Shape::Functional][k % 3];
        let ca = random_candidate(&mut rng, 1..=15, shape);
        let cb = random_candidate(&mut rng, 1..=15, shape);
        let variant = if k % 2 == 0 {
            KernelVariant::Full
        } else {
            random_variant(&mut rng)
        };
        let gamma = rng.random_range(0.05..0.5);
        let base = WalkParams::with_gamma(gamma);
        let dense = rw_kernel(&ca, &cb, variant, &base.with_solver(Solver::DenseDirect)).unwrap();
        let fp = rw_kernel(&ca, &cb, variant, &base.with_solver(Solver::FixedPoint)).unwrap();
        let scale = dense.abs().max(fp.abs());
        let rel = if scale == 0.0 {
            0.0
        } else {
            (dense - fp).abs() / scale
        };
        worst = worst.max(rel);
        ensure(rel <= SOLVER_REL_TOL, || {
            format!("pair {k} ({variant}, gamma={gamma:.3}): dense {dense} vs fixed point {fp}")
        })?;
    }
    Ok(format!("500 pairs, max rel diff {worst:.2e}"))
}

// ---------------------------------------------------------------------------
// 3. Symmetry and positive semidefiniteness

fn criterion_psd() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cands: Vec<Candidate> = (0..30)
        .map(|k| {
            let shape = [Shape::General, Shape::Dag, Shape::Functional][k % 3];
            random_candidate(&mut rng, 2..=8, shape)
        })
        .collect();
    let specs = [
        "FGK",
        "SPK",
        "NSPK",
        "FGK+SPK",
        "FGK+NSPK",
        "SPK+NSPK",
        "FGK+SPK+NSPK",
    ];
    let params = WalkParams::default();
    let mut worst = f64::INFINITY;
    for s in specs {
        let spec: KernelSpec = s.parse().unwrap();
        let g = gram_matrix(&cands, &spec, &params).unwrap().values;
        ensure(g == g.transpose(), || format!("{s}: not exactly symmetric"))?;
        let max_diag = (0..g.nrows()).map(|i| g[(i, i)]).fold(0.0, f64::max);
        let min_eig = SymmetricEigen::new(g).eigenvalues.min();
        let scaled = min_eig / max_diag;
        worst = worst.min(scaled);
        ensure(min_eig >= -PSD_REL_TOL * max_diag, || {
            format!("{s}: min eigenvalue {min_eig:e}, max diagonal {max_diag}")
        })?;
    }
    Ok(format!(
        "7 specs over 30 candidates, min eigenvalue / max diagonal {worst:.2e}"
    ))
}

// ---------------------------------------------------------------------------
// 4. Gating invariances

fn criterion_gating() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let params = WalkParams::default();
    for trial in 0..100 {
        let a = random_candidate(&mut rng, 2..=9, Shape::General);
        let b = random_candidate(&mut rng, 2..=9, Shape::General);
        let before = rw_kernel(&a, &b, KernelVariant::NoShortestPath, &params).unwrap();
        let mut a2 = a.clone();
        let mut b2 = b.clone();
        for f in a2.in_sp_vertex.iter_mut().chain(b2.in_sp_vertex.iter_mut()) {
            *f = rng.random_bool(0.5);
        }
        for f in a2.in_sp_edge.iter_mut().chain(b2.in_sp_edge.iter_mut()) {
            *f = rng.random_bool(0.5);
        }
        let after = rw_kernel(&a2, &b2, KernelVariant::NoShortestPath, &params).unwrap();
        ensure(before == after, || {
            format!("NSPK trial {trial}: {before} became {after}")
        })?;
    }

    let mut edits = 0;
    for trial in 0..100 {
        let a = random_candidate(&mut rng, 3..=9, Shape::General);
        let b = random_candidate(&mut rng, 2..=9, Shape::General);
        let before = rw_kernel(&a, &b, KernelVariant::ShortestPath, &params).unwrap();
        let mut g: SentenceGraph = (*a.graph).clone();
        let off_path: Vec<usize> = (0..g.vertices.len())
            .filter(|&v| !a.in_sp_vertex[v])
            .collect();
        // Relabel and re-feature everything off the path.
        for &v in &off_path {
            g.vertices[v].features = random_features(&mut rng);
        }
        for (e, edge) in g.edges.iter_mut().enumerate() {
            if !a.in_sp_edge[e] {
                edge.label = format!("{}-x", edge.label);
            }
        }
        // Hang new leaves off random vertices.
        for _ in 0..rng.random_range(1..=3) {
            let index = g.vertices.len();
            let anchor = rng.random_range(0..index);
            g.vertices.push(Vertex {
                index,
                features: random_features(&mut rng),
            });
            let (head, dependent) = if rng.random_bool(0.5) {
                (anchor, index)
            } else {
                (index, anchor)
            };
            g.edges.push(Edge {
                head,
                dependent,
                label: LABELS.choose(&mut rng).unwrap().to_string(),
            });
        }
        let a2 = Candidate::new(Arc::new(g), 0, 1);
        let n = a.in_sp_vertex.len();
        ensure(a2.in_sp_vertex[..n] == a.in_sp_vertex[..], || {
            format!("SPK trial {trial}: edit moved the shortest path")
        })?;
        edits += a2.graph.vertices.len() - n;
        let after = rw_kernel(&a2, &b, KernelVariant::ShortestPath, &params).unwrap();
        ensure(before == after, || {
            format!("SPK trial {trial}: {before} became {after}")
        })?;
    }
    Ok(format!(
        "100 NSPK flag perturbations, 100 SPK off-path edits ({edits} added leaves)"
    ))
}

// ---------------------------------------------------------------------------
// 5. SMO versus a projected-gradient dual oracle

/// Projects `v` onto `{0 <= a <= c, sum a_i y_i = 0}` by bisection on the
/// multiplier of the equality constraint.
fn project(v: &DVector<f64>, y: &[f64], c: f64) -> DVector<f64> {
    let at = |lambda: f64| v.map_with_location(|i, _, x| (x - lambda * y[i]).clamp(0.0, c));
    let g = |lambda: f64| at(lambda).iter().zip(y).map(|(a, y)| a * y).sum::<f64>();
    let (mut lo, mut hi) = (-1.0, 1.0);
    while g(lo) < 0.0 {
        lo *= 2.0;
    }
    while g(hi) > 0.0 {
        hi *= 2.0;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi))
}

fn oracle_objective(q: &DMatrix<f64>, a: &DVector<f64>) -> f64 {
    a.sum() - 0.5 * a.dot(&(q * a))
}

/// Accelerated projected gradient ascent on the dual.
fn pg_dual(k: &DMatrix<f64>, y: &[f64], c: f64) -> DVector<f64> {
    let n = y.len();
    let q = DMatrix::from_fn(n, n, |i, j| y[i] * y[j] * k[(i, j)]);
    let lipschitz = SymmetricEigen::new(q.clone()).eigenvalues.max().max(1e-12);
    let step = 1.0 / lipschitz;
    let mut a = DVector::zeros(n);
    let mut z = a.clone();
    let mut t = 1.0f64;
    for _ in 0..20_000 {
        let grad = DVector::from_element(n, 1.0) - &q * &z;
        let next = project(&(&z + grad * step), y, c);
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        z = &next + (&next - &a) * ((t - 1.0) / t_next);
        a = next;
        t = t_next;
    }
    a
}

/// Bias from the free multipliers, or the midpoint of the feasible range.
fn oracle_bias(k: &DMatrix<f64>, y: &[f64], a: &DVector<f64>, c: f64) -> f64 {
    let n = y.len();
    let eps = 1e-7 * c;
    let grad = |i: usize| y[i] - (0..n).map(|j| a[j] * y[j] * k[(i, j)]).sum::<f64>();
    let free: Vec<f64> = (0..n)
        .filter(|&i| a[i] > eps && a[i] < c - eps)
        .map(grad)
        .collect();
    if !free.is_empty() {
        return free.iter().sum::<f64>() / free.len() as f64;
    }
    let (mut lb, mut ub) = (f64::NEG_INFINITY, f64::INFINITY);
    for i in 0..n {
        let g = grad(i);
        let at_upper = a[i] >= c - eps;
        // y_i (f_i + b) >= 1 at the lower bound, <= 1 at the upper bound.
        if (y[i] > 0.0) != at_upper {
            lb = lb.max(g);
        } else {
            ub = ub.min(g);
        }
    }
    0.5 * (lb + ub)
}

fn criterion_svm() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_obj = 0.0f64;
    let mut worst_kkt = 0.0f64;
    let mut checked = 0;
    for problem in 0..50 {
        let n = rng.random_range(4..=20);
        let d = rng.random_range(1..=5);
        let x = DMatrix::from_fn(n + 10, d, |_, _| rng.random_range(-1.0..1.0));
        let w: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut y: Vec<f64> = (0..n)
            .map(|i| {
                let s: f64 =
                    (0..d).map(|j| x[(i, j)] * w[j]).sum::<f64>() + rng.random_range(-0.3..0.3);
                if s >= 0.0 {
                    1.0
                } else {
                    -1.0
                }
            })
            .collect();
        y[0] = 1.0;
        y[1] = -1.0;
        let full = &x * x.transpose();
        let k = full.view((0, 0), (n, n)).into_owned();
        let c = [0.1, 1.0, 10.0][problem % 3];

        let labels: Vec<i8> = y.iter().map(|&v| v as i8).collect();
        // The default stopping rule leaves an objective gap of order
        // kkt_tolerance^2; the comparison uses a converged solve.
        let default_params = SvmParams::with_c(c);
        let tight_params = SvmParams {
            kkt_tolerance: 1e-6,
            ..default_params
        };
        let model = train(&k, &labels, &default_params).map_err(|e| e.to_string())?;
        let tight = train(&k, &labels, &tight_params).map_err(|e| e.to_string())?;
        let alphas = DVector::from_vec(tight.alphas.clone());
        let oracle = pg_dual(&k, &y, c);
        let q = DMatrix::from_fn(n, n, |i, j| y[i] * y[j] * k[(i, j)]);
        let (obj_smo, obj_pg) = (oracle_objective(&q, &alphas), oracle_objective(&q, &oracle));
        worst_obj = worst_obj.max((obj_smo - obj_pg).abs());
        ensure((obj_smo - obj_pg).abs() <= SVM_OBJECTIVE_TOL, || {
            format!("problem {problem}: SMO objective {obj_smo} vs oracle {obj_pg}")
        })?;

        ensure(model.alphas.iter().all(|&a| (0.0..=c).contains(&a)), || {
            format!("problem {problem}: alpha outside [0, C]")
        })?;
        let balance: f64 = model.alphas.iter().zip(&y).map(|(a, y)| a * y).sum();
        ensure(balance.abs() <= SVM_EQUALITY_TOL * c * n as f64, || {
            format!("problem {problem}: sum alpha*y = {balance:e}")
        })?;
        let kkt = model.kkt_violation(&k, &default_params);
        worst_kkt = worst_kkt.max(kkt);
        ensure(kkt <= SVM_KKT_TOL, || {
            format!("problem {problem}: KKT violation {kkt}")
        })?;

        // Predictions on the training points and on ten held-out points.
        let bias = oracle_bias(&k, &y, &oracle, c);
        for i in 0..n + 10 {
            let row: Vec<f64> = (0..n).map(|j| full[(i, j)]).collect();
            let f_oracle: f64 = (0..n).map(|j| oracle[j] * y[j] * row[j]).sum::<f64>() + bias;
            let dv = tight.decision_value(&row).map_err(|e| e.to_string())?;
            let oracle_label = if f_oracle >= 0.0 { 1 } else { -1 };
            ensure(tight.predict(&row).unwrap() == oracle_label, || {
                format!("problem {problem}, point {i}: SMO {dv} vs oracle {f_oracle}")
            })?;
            checked += 1;
        }
    }
    Ok(format!(
        "50 problems, max objective gap {worst_obj:.2e}, max KKT violation {worst_kkt:.2e}, {checked} predictions agree"
    ))
}

// ---------------------------------------------------------------------------
// 6. Metrics

fn criterion_metrics() -> Outcome {
    let cc = |correct, incorrect, positives_total| ConfusionCounts {
        correct,
        incorrect,
        positives_total,
    };
    ensure(recall(&cc(3, 1, 4)) == 0.75, || "recall 3/4".into())?;
    ensure(precision(&cc(3, 1, 4)) == 0.75, || "precision 3/4".into())?;
    ensure(recall(&cc(0, 2, 0)) == 0.0, || {
        "recall with no gold positives".into()
    })?;
    ensure(precision(&cc(0, 0, 5)) == 0.0, || {
        "precision with no predicted positives".into()
    })?;
    ensure(f_measure(0.0, 0.0, 1.0) == Ok(0.0), || "f1 of p=r=0".into())?;
    ensure(f_measure(0.5, 0.5, 0.0).is_err(), || {
        "beta=0 accepted".into()
    })?;
    for x in [0.0, 0.25, 0.5, 1.0] {
        let f = f_measure(x, x, 1.0).unwrap();
        ensure(f == x, || format!("f_measure({x}, {x}) = {f}"))?;
    }
    let mut worst = 0.0f64;
    for i in 0..=40 {
        for j in 0..=40 {
            let (p, r) = (i as f64 / 40.0, j as f64 / 40.0);
            let f = f_measure(p, r, 1.0).unwrap();
            let harmonic = if p + r == 0.0 {
                0.0
            } else {
                2.0 * p * r / (p + r)
            };
            worst = worst.max((f - harmonic).abs());
            ensure((f - harmonic).abs() <= HARMONIC_TOL, || {
                format!("f1({p}, {r}) = {f}")
            })?;
        }
    }
    // F_beta weights recall beta times as much as precision.
    let f2 = f_measure(0.5, 1.0, 2.0).unwrap();
    ensure(
        (f2 - 5.0 * 0.5 / (4.0 * 0.5 + 1.0)).abs() <= HARMONIC_TOL,
        || format!("f2 = {f2}"),
    )?;

    let r = evaluate_split(&[1, 1, -1, -1, 1], &[1, -1, 1, -1, 1], 7).map_err(|e| e.to_string())?;
    ensure(r.counts == cc(2, 1, 3) && r.split_id == 7, || {
        format!("{r:?}")
    })?;
    let none = evaluate_split(&[-1, -1], &[-1, -1], 1).unwrap();
    ensure(
        none.recall == 0.0 && none.precision == 0.0 && none.f1 == 0.0,
        || format!("all-negative split: {none:?}"),
    )?;
    Ok(format!(
        "0/0 conventions, f(x,x)=x, harmonic identity max err {worst:.1e}"
    ))
}

// ---------------------------------------------------------------------------
// 7. Paired t-test

fn ln_gamma_half(two_x: u32) -> f64 {
    // Gamma at integers and half-integers by the recurrence.
    let (mut x, mut g) = if two_x.is_multiple_of(2) {
        (1.0f64, 0.0f64)
    } else {
        (0.5, 0.5 * std::f64::consts::PI.ln())
    };
    while 2.0 * x < two_x as f64 {
        g += x.ln();
        x += 1.0;
    }
    g
}

/// Two-sided p-value by Simpson integration of the t density over [0, |t|].
fn reference_p(t: f64, df: u32) -> f64 {
    let nu = df as f64;
    let log_norm =
        ln_gamma_half(df + 1) - ln_gamma_half(df) - 0.5 * (nu * std::f64::consts::PI).ln();
    let density = |x: f64| (log_norm - (nu + 1.0) / 2.0 * (1.0 + x * x / nu).ln()).exp();
    let t = t.abs();
    let steps = 100_000;
    let h = t / steps as f64;
    let mut s = density(0.0) + density(t);
    for k in 1..steps {
        s += density(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    let central = s * h / 3.0;
    (1.0 - 2.0 * central).max(0.0)
}

fn criterion_ttest() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for sample in 0..20 {
        let n = if sample < 10 { 5 } else { 10 };
        let shift = rng.random_range(-0.05..0.05);
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(0.3..0.7)).collect();
        let b: Vec<f64> = a
            .iter()
            .map(|x| x + shift + rng.random_range(-0.04..0.04))
            .collect();
        let r = paired_t_test(&a, &b).map_err(|e| e.to_string())?;

        let d: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        let mean = d.iter().sum::<f64>() / n as f64;
        let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let t = mean / (var / n as f64).sqrt();
        ensure((r.t_statistic - t).abs() <= 1e-9 * t.abs().max(1.0), || {
            format!("sample {sample}: t {} vs {t}", r.t_statistic)
        })?;
        ensure(r.degrees_of_freedom == n - 1, || {
            format!("sample {sample}: df")
        })?;
        let p = reference_p(t, (n - 1) as u32);
        worst = worst.max((r.p_value - p).abs());
        ensure((r.p_value - p).abs() <= TTEST_CDF_TOL, || {
            format!("sample {sample}: p {} vs reference {p}", r.p_value)
        })?;

        let swapped = paired_t_test(&b, &a).unwrap();
        ensure(
            swapped.t_statistic == -r.t_statistic && swapped.p_value == r.p_value,
            || {
                format!(
                    "sample {sample}: swap gave t={} p={}",
                    swapped.t_statistic, swapped.p_value
                )
            },
        )?;
    }
    // Known value: d = [0.02, -0.01, 0.03, 0, 0.01] has t = sqrt(2), p = 0.2301996...
    let r = paired_t_test(&[0.52, 0.49, 0.53, 0.5, 0.51], &[0.5; 5]).unwrap();
    ensure(
        (r.p_value - 0.230_199_641_080_498_73).abs() <= TTEST_CDF_TOL,
        || format!("reference sample: p {}", r.p_value),
    )?;
    Ok(format!(
        "20 samples, max p-value diff {worst:.2e}, swap antisymmetric"
    ))
}

// ---------------------------------------------------------------------------
// 8 and 9. Command-line runs on the bundled corpus

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn walkre(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_walkre"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "walkre {} failed: {}",
            args.join(" "),
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

fn corpus_args() -> (String, String) {
    let data = workspace_root().join("data/synthetic");
    (
        data.join("corpus.jsonl").display().to_string(),
        data.join("splits.jsonl").display().to_string(),
    )
}

fn field(line: &str, key: &str) -> Option<f64> {
    line.split_whitespace()
        .find_map(|kv| kv.strip_prefix(key)?.strip_prefix('='))
        .and_then(|v| v.parse().ok())
}

fn criterion_end_to_end(tmp: &Path) -> Outcome {
    let (corpus, splits) = corpus_args();
    let regenerated = tmp.join("regen");
    walkre(&["synth", "--output", regenerated.to_str().unwrap()])?;
    for name in ["corpus.jsonl", "splits.jsonl"] {
        let bundled = std::fs::read(workspace_root().join("data/synthetic").join(name))
            .map_err(|e| e.to_string())?;
        let fresh = std::fs::read(regenerated.join(name)).map_err(|e| e.to_string())?;
        ensure(bundled == fresh, || {
            format!("bundled {name} differs from the generator output")
        })?;
    }

    let run = |spec: &str, dir: &str| -> Result<PathBuf, String> {
        let out = tmp.join(dir);
        walkre(&[
            "crossval",
            "--corpus",
            &corpus,
            "--splits",
            &splits,
            "--spec",
            spec,
            "--gamma",
            "0.1",
            "-C",
            "50",
            "--output",
            out.to_str().unwrap(),
        ])?;
        Ok(out.join("report.txt"))
    };
    let both = run("SPK+NSPK", "spk_nspk")?;
    let nspk = run("NSPK", "nspk")?;
    let report = std::fs::read_to_string(&both).map_err(|e| e.to_string())?;
    let split_lines = report.lines().filter(|l| l.starts_with("split=")).count();
    ensure(split_lines == 10, || format!("{split_lines} split lines"))?;
    let macro_line = report
        .lines()
        .find(|l| l.starts_with("macro"))
        .ok_or("no macro line")?;
    let f1 = field(macro_line, "f1").ok_or("no macro f1")?;
    ensure(f1 >= MIN_MACRO_F1, || format!("SPK+NSPK macro F1 {f1}"))?;

    let ttest_dir = tmp.join("ttest");
    let line = walkre(&[
        "ttest",
        "--report-a",
        both.to_str().unwrap(),
        "--report-b",
        nspk.to_str().unwrap(),
        "--metric",
        "f1",
        "--output",
        ttest_dir.to_str().unwrap(),
    ])?;
    let t = field(&line, "t").ok_or("no t")?;
    let p = field(&line, "p").ok_or("no p")?;
    let nspk_report = std::fs::read_to_string(&nspk).map_err(|e| e.to_string())?;
    let nspk_f1 = nspk_report
        .lines()
        .find(|l| l.starts_with("macro"))
        .and_then(|l| field(l, "f1"))
        .ok_or("no NSPK macro f1")?;
    ensure(t > 0.0 && p < SIGNIFICANCE, || {
        format!("SPK+NSPK vs NSPK: t={t} p={p}")
    })?;
    Ok(format!(
        "SPK+NSPK macro F1 {f1:.4} vs NSPK {nspk_f1:.4}; t={t:.3}, p={p:.2e}"
    ))
}

fn criterion_determinism(tmp: &Path) -> Outcome {
    let (corpus, splits) = corpus_args();
    let mut outputs: Vec<(String, Vec<Vec<u8>>)> = Vec::new();
    for (run, threads) in ["1", "4", "1", "auto"].iter().enumerate() {
        let dir = tmp.join(format!("det{run}"));
        let d = dir.to_str().unwrap();
        walkre(&[
            "gram",
            "--corpus",
            &corpus,
            "--threads",
            threads,
            "--output",
            d,
        ])?;
        walkre(&[
            "gram",
            "--corpus",
            &corpus,
            "--splits",
            &splits,
            "--split",
            "4",
            "--threads",
            threads,
            "--output",
            d,
        ])?;
        walkre(&[
            "crossval",
            "--corpus",
            &corpus,
            "--splits",
            &splits,
            "--threads",
            threads,
            "--output",
            d,
        ])?;
        let files = [
            "gram.txt",
            "gram.ids",
            "gram.labels",
            "train.gram",
            "test.rows",
            "report.txt",
        ];
        let bytes = files
            .iter()
            .map(|f| std::fs::read(dir.join(f)).map_err(|e| format!("{f}: {e}")))
            .collect::<Result<Vec<_>, _>>()?;
        outputs.push((threads.to_string(), bytes));
    }
    let (first_threads, first) = &outputs[0];
    for (threads, bytes) in &outputs[1..] {
        ensure(bytes == first, || {
            format!("threads={threads} output differs from threads={first_threads}")
        })?;
    }
    Ok("gram, split gram/rows and crossval identical over 4 runs (threads 1, 4, 1, auto)".into())
}

fn main() {
    let tmp = tempfile::tempdir().expect("temporary directory");
    let criteria: Vec<(&str, Check)> = vec![
        (
            "1 walk kernel matches path enumeration",
            Box::new(criterion_oracle),
        ),
        (
            "2 dense and fixed-point solvers agree",
            Box::new(criterion_solvers),
        ),
        ("3 Gram matrices symmetric and PSD", Box::new(criterion_psd)),
        (
            "4 shortest-path gating invariances",
            Box::new(criterion_gating),
        ),
        ("5 SMO matches dual oracle", Box::new(criterion_svm)),
        ("6 metric formulas", Box::new(criterion_metrics)),
        ("7 paired t-test", Box::new(criterion_ttest)),
        (
            "8 synthetic cross-validation",
            Box::new(|| criterion_end_to_end(tmp.path())),
        ),
        (
            "9 deterministic outputs",
            Box::new(|| criterion_determinism(tmp.path())),
        ),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {name}: PASS ({detail}; {secs:.1}s)"),
            Err(why) => {
                failed += 1;
                println!("criterion {name}: FAIL ({why}; {secs:.1}s)");
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}
