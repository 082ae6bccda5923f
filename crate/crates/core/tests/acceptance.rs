//! Acceptance criteria. Every criterion runs to completion and prints one
//! PASS/FAIL line; the test fails afterwards if any criterion failed.

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use resnet_core::lattice::{self, TorusQuadrature, Verdict};
use resnet_core::network::{binary_tree, complete_graph, path_graph, random_connected};
use resnet_core::resistance::{self, extrapolate_in_depth, monopole_solve};
use resnet_core::spectral::{self, GroundedSpectrum};
use resnet_core::verify::{self, random_source};
use resnet_core::walk::{self, McConfig};
use resnet_core::{
    apply_laplacian, free_resistance, gram_matrix, Exhaustion, GroundedSystem, Network,
    VertexFunction,
};

/// Lattice Green function of Z³ at the origin, from an independent
/// high-resolution evaluation.
const WATSON_Z3: f64 = 0.2527310098586587;

type Outcome = std::result::Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Dense Laplacian assembled directly from the edge list.
fn dense_laplacian(net: &Network) -> DMatrix<f64> {
    let n = net.vertex_count();
    let mut l = DMatrix::zeros(n, n);
    for e in net.edges() {
        l[(e.u, e.u)] += e.conductance;
        l[(e.v, e.v)] += e.conductance;
        l[(e.u, e.v)] -= e.conductance;
        l[(e.v, e.u)] -= e.conductance;
    }
    l
}

/// Inverse of the Laplacian with row and column `g` removed, by LU.
fn dense_green(net: &Network, g: usize) -> DMatrix<f64> {
    let l = dense_laplacian(net).remove_row(g).remove_column(g);
    l.lu().try_inverse().expect("grounded Laplacian is invertible")
}

fn reduced(g: usize, x: usize) -> Option<usize> {
    match x.cmp(&g) {
        std::cmp::Ordering::Less => Some(x),
        std::cmp::Ordering::Equal => None,
        std::cmp::Ordering::Greater => Some(x - 1),
    }
}

fn green_form(m: &DMatrix<f64>, g: usize, x: usize, y: usize) -> f64 {
    let mut v = DVector::zeros(m.nrows());
    if let Some(i) = reduced(g, x) {
        v[i] += 1.0;
    }
    if let Some(j) = reduced(g, y) {
        v[j] -= 1.0;
    }
    v.dot(&(m * &v))
}

/// The 25 random grounded fixtures shared by criteria 1, 3, 7 and 9.
fn criterion1_fixtures() -> Vec<(Network, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(20240501);
    (0..25)
        .map(|i| {
            let n = rng.random_range(4..=60);
            let extra = rng.random_range(0..=2 * n);
            let net = random_connected(n, extra, 0.1, 10.0, 1000 + i).unwrap();
            let g = rng.random_range(0..n);
            (net, g)
        })
        .collect()
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for (k, (net, g)) in criterion1_fixtures().iter().enumerate() {
        let gs = GroundedSystem::at(net, *g).map_err(|e| e.to_string())?;
        let oracle = dense_green(net, *g);
        let m = gram_matrix(&gs).map_err(|e| e.to_string())?;
        let scale = oracle.amax();
        let green_gap = (&m - &oracle).amax() / scale;
        let xi = random_source(&gs, &mut rng);
        let eta = random_source(&gs, &mut rng);
        let u: VertexFunction = (0..net.vertex_count())
            .map(|_| rng.random_range(-1.0..1.0))
            .collect::<Vec<_>>()
            .into();
        let boundary: Vec<usize> = (0..net.vertex_count()).filter(|x| x % 4 == 1).collect();
        let defects = [
            ("Green matrix vs LU oracle", green_gap),
            ("Kronecker", verify::kronecker_defect(&gs, net).map_err(|e| e.to_string())?),
            ("ripple", verify::ripple_defect(&gs).map_err(|e| e.to_string())? / scale.max(1.0)),
            ("isometry", verify::isometry_defect(&gs, &xi).map_err(|e| e.to_string())?),
            ("intertwining", verify::intertwining_defect(&gs, &xi, &eta).map_err(|e| e.to_string())?),
            ("commutation", verify::commutation_defect(&gs, &xi).map_err(|e| e.to_string())?),
            ("ΔM = MΔ = I", verify::inverse_defect(&gs).map_err(|e| e.to_string())?),
            ("E(δ_x) = c(x)", verify::energy_delta_defect(net).map_err(|e| e.to_string())?),
            ("Royden orthogonality", verify::royden_defect(net, &boundary, &u).map_err(|e| e.to_string())?),
        ];
        for (name, d) in defects {
            worst = worst.max(d);
            ensure(d <= 1e-9, || format!("fixture {k}: {name} defect {d:e}"))?;
        }
    }
    Ok(format!("max relative defect {worst:.2e} over 25 fixtures"))
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_rn = 0.0f64;
    let mut worst_moment = 0.0f64;
    for i in 0..10 {
        let n = rng.random_range(20..=200);
        let net = random_connected(n, n, 0.1, 10.0, 500 + i).unwrap();
        let gs = GroundedSystem::at(&net, rng.random_range(0..n)).map_err(|e| e.to_string())?;
        let xi = random_source(&gs, &mut rng);
        let spectrum = GroundedSpectrum::new(&gs).map_err(|e| e.to_string())?;
        let rn = spectrum.radon_nikodym_deviation(&xi).map_err(|e| e.to_string())?;
        worst_rn = worst_rn.max(rn);
        ensure(rn < 1e-9, || format!("system {i}: Radon-Nikodym deviation {rn:e}"))?;
        let rows = spectral::moment_identity_check(&gs, &xi, 6).map_err(|e| e.to_string())?;
        // Independent right-hand side: ξᵀ L^n ξ with a dense reduced Laplacian.
        let g = gs.ground();
        let l = dense_laplacian(&net).remove_row(g).remove_column(g);
        let v = DVector::from_vec(gs.restrict(&xi).unwrap());
        let mut lv = v.clone();
        for row in &rows {
            let rhs = v.dot(&lv);
            let dev = (row.lhs - rhs).abs() / rhs.abs().max(row.lhs.abs());
            worst_moment = worst_moment.max(dev);
            ensure(dev < 1e-8, || format!("system {i}: moment n={} deviation {dev:e}", row.n))?;
            lv = &l * lv;
        }
    }
    Ok(format!(
        "Radon-Nikodym max {worst_rn:.2e}, moments n=0..6 max {worst_moment:.2e} on 10 systems"
    ))
}

fn criterion_3() -> Outcome {
    let mut worst = 0.0f64;
    let mut pairs = 0;
    for (k, (net, g)) in criterion1_fixtures().iter().enumerate() {
        let gs = GroundedSystem::at(net, *g).map_err(|e| e.to_string())?;
        let spectrum = GroundedSpectrum::new(&gs).map_err(|e| e.to_string())?;
        let m = dense_green(net, *g);
        for x in 0..net.vertex_count() {
            for y in x + 1..net.vertex_count() {
                let s = spectrum.resistance(x, y).map_err(|e| e.to_string())?;
                let r = green_form(&m, *g, x, y);
                let dev = (s - r).abs() / r.max(1.0);
                worst = worst.max(dev);
                pairs += 1;
                ensure(dev < 1e-9, || format!("fixture {k} pair ({x},{y}): {s} vs {r}"))?;
            }
        }
    }
    Ok(format!("{pairs} pairs, max deviation {worst:.2e}"))
}

fn criterion_4() -> Outcome {
    let cases: [(usize, Vec<i64>, f64, f64, usize); 3] = [
        (1, vec![1], 1.0, 1e-6, 64),
        (2, vec![1, 0], 0.5, 1e-3, 16),
        (3, vec![1, 0, 0], 1.0 / 3.0, 1e-3, 12),
    ];
    let mut lines = Vec::new();
    for (d, x, expect, tol, depth) in cases {
        let q = TorusQuadrature::new(d).map_err(|e| e.to_string())?;
        let report = lattice::lattice_resistance(&q, &vec![0; d], &x).map_err(|e| e.to_string())?;
        ensure((report.value - expect).abs() <= tol, || {
            format!("d={d}: quadrature {} vs {expect}", report.value)
        })?;
        let family = Exhaustion::Lattice { dim: d };
        let label = resnet_core::network::lattice_label(&x);
        let origin = resnet_core::network::lattice_label(&vec![0; d]);
        let wired = resistance::wired_resistance_at_depth(&family, depth, &origin, &label)
            .map_err(|e| e.to_string())?;
        ensure((wired - report.value).abs() < 0.02, || {
            format!("d={d}: wired depth {depth} gives {wired}, quadrature {}", report.value)
        })?;
        lines.push(format!("d={d}: {:.6} (wired@{depth} {:.4})", report.value, wired));
    }
    Ok(lines.join("; "))
}

fn criterion_5() -> Outcome {
    let mut lines = Vec::new();
    for d in 1..=4 {
        let r = lattice::transience_probe(d).map_err(|e| e.to_string())?;
        ensure(r.consistent(), || format!("d={d}: verdict {:?}", r.verdict))?;
        if d <= 2 {
            ensure(r.verdict == Verdict::Recurrent && r.monotone_growth(), || {
                format!("d={d}: values {:?} not monotonically growing", r.values)
            })?;
            lines.push(format!("d={d} recurrent"));
        } else {
            let c = r.cauchy_difference.unwrap();
            ensure(c < 1e-3, || format!("d={d}: Cauchy difference {c:e}"))?;
            lines.push(format!("d={d} transient (Δ={c:.1e})"));
        }
    }
    let q = TorusQuadrature::new(3).map_err(|e| e.to_string())?;
    let quad = lattice::monopole_energy(&q).map_err(|e| e.to_string())?;
    ensure(quad.converged, || "d=3 monopole energy quadrature unconverged".into())?;
    let depths = [14usize, 20, 26];
    let family = Exhaustion::Lattice { dim: 3 };
    let mut energies = Vec::new();
    for &k in &depths {
        energies.push(monopole_solve(&family, k, "0,0,0").map_err(|e| e.to_string())?.energy);
    }
    ensure(energies.windows(2).all(|w| w[1] > w[0]), || {
        format!("truncation energies not increasing: {energies:?}")
    })?;
    let trunc = extrapolate_in_depth(&depths, &energies).map_err(|e| e.to_string())?;
    for (name, v) in [("quadrature", quad.value), ("truncation", trunc)] {
        ensure((v - WATSON_Z3).abs() / WATSON_Z3 < 0.01, || {
            format!("{name} monopole energy {v} not within 1% of {WATSON_Z3}")
        })?;
    }
    ensure((quad.value - trunc).abs() / quad.value < 0.01, || {
        format!("quadrature {} and truncation {trunc} disagree", quad.value)
    })?;
    lines.push(format!("E(w_o): quadrature {:.6}, truncation {:.5}", quad.value, trunc));
    Ok(lines.join("; "))
}

fn word_distance(a: &str, b: &str) -> usize {
    let common = a.chars().zip(b.chars()).take_while(|(x, y)| x == y).count();
    a.len() + b.len() - 2 * common
}

fn criterion_6() -> Outcome {
    // (a) The geometric monopole on the depth-12 truncation.
    let tree = binary_tree(12).map_err(|e| e.to_string())?;
    let n = tree.vertex_count();
    let w: VertexFunction = (0..n)
        .map(|x| 0.5f64.powi(tree.label(x).len() as i32))
        .collect::<Vec<_>>()
        .into();
    let lw = apply_laplacian(&tree, &w).map_err(|e| e.to_string())?;
    let mut worst_a = 0.0f64;
    for x in 0..n {
        if tree.label(x).len() < 12 {
            let expect = if x == tree.origin() { 1.0 } else { 0.0 };
            worst_a = worst_a.max((lw[x] - expect).abs());
        }
    }
    ensure(worst_a <= 1e-10, || format!("(a) Δw - δ_o = {worst_a:e}"))?;

    // (b) Free resistance equals the word distance.
    let mut worst_b = 0.0f64;
    for depth in 1..=10 {
        let t = binary_tree(depth).map_err(|e| e.to_string())?;
        let m = t.vertex_count();
        let step = (m / 12).max(1);
        for x in (0..m).step_by(step) {
            for y in (0..m).step_by(step).chain([m - 1]) {
                let r = free_resistance(&t, x, y).map_err(|e| e.to_string())?;
                let d = word_distance(&t.label(x), &t.label(y)) as f64;
                worst_b = worst_b.max((r - d).abs());
            }
        }
    }
    ensure(worst_b < 1e-9, || format!("(b) resistance vs distance {worst_b:e}"))?;

    // (c) Dirichlet gap sequence.
    let gap = spectral::dirichlet_gap(&Exhaustion::BinaryTree, &[6, 9, 12], 7)
        .map_err(|e| e.to_string())?;
    let l = &gap.lambda_min;
    ensure(l[0] > l[1] && l[1] > l[2], || format!("(c) gap sequence {l:?} not decreasing"))?;
    ensure((0.1716..=0.30).contains(&l[2]), || format!("(c) depth-12 gap {}", l[2]))?;

    // (d) Wired resistances at depth 12 under 2/(3 - 2√2).
    let bound = 2.0 / (3.0 - 2.0 * 2f64.sqrt());
    let family = Exhaustion::BinaryTree;
    let wired = family.wired_truncation(12).map_err(|e| e.to_string())?.network;
    let words = ["", "0", "01", "0110", "011010", "10101010", "000000000000", "111111111111", "101"];
    let mut worst_d = 0.0f64;
    for a in &words {
        for b in &words {
            let (x, y) = (wired.vertex_by_label(a).unwrap(), wired.vertex_by_label(b).unwrap());
            let r = free_resistance(&wired, x, y).map_err(|e| e.to_string())?;
            worst_d = worst_d.max(r);
        }
    }
    ensure(worst_d <= bound, || format!("(d) wired resistance {worst_d} exceeds {bound}"))?;
    Ok(format!(
        "(a) {worst_a:.1e} (b) {worst_b:.1e} (c) {:.5} > {:.5} > {:.5} (d) max {worst_d:.4} ≤ {bound:.3}",
        l[0], l[1], l[2]
    ))
}

fn criterion_7() -> Outcome {
    let mut worst = 0.0f64;
    for (k, (net, _)) in criterion1_fixtures().iter().enumerate() {
        let o = 0;
        let co = net.net_conductance(o).unwrap();
        for x in 1..net.vertex_count() {
            let r = free_resistance(net, x, o).map_err(|e| e.to_string())?;
            let p1 = walk::hitting_probability_exact(net, o, x).map_err(|e| e.to_string())?;
            let p2 = walk::hitting_probability_chain(net, o, x, false).map_err(|e| e.to_string())?;
            let d = ((1.0 / (co * p1) - r).abs() / r).max((1.0 / (co * p2) - r).abs() / r);
            worst = worst.max(d);
            ensure(d < 1e-9, || format!("fixture {k}, x={x}: walk identity off by {d:e}"))?;
        }
    }
    let p3 = path_graph(3).unwrap();
    let k3 = complete_graph(3).unwrap();
    let z2 = Exhaustion::Lattice { dim: 2 }.wired_truncation(6).unwrap().network;
    let z2_x = z2.vertex_by_label("1,0").unwrap();
    let cases: [(&str, &Network, usize, usize); 3] =
        [("P3", &p3, 0, 2), ("K3", &k3, 0, 1), ("wired Z² depth 6", &z2, z2.origin(), z2_x)];
    let mut lines = vec![format!("identity max {worst:.1e}")];
    for (name, net, o, x) in cases {
        let exact = walk::hitting_probability_exact(net, o, x).map_err(|e| e.to_string())?;
        let mut covered = 0;
        for seed in 0..100 {
            let est = walk::hitting_probability_mc(net, o, x, &McConfig::new(100_000, seed))
                .map_err(|e| e.to_string())?;
            if est.covers(exact, 3.0) {
                covered += 1;
            }
        }
        ensure(covered >= 97, || format!("{name}: only {covered}/100 seeds cover {exact}"))?;
        lines.push(format!("{name} {covered}/100"));
    }
    Ok(lines.join("; "))
}

fn criterion_8() -> Outcome {
    let z2 = resistance::resistance_bracket(&Exhaustion::Lattice { dim: 2 }, "0,0", "1,0", &[4, 8, 16])
        .map_err(|e| e.to_string())?;
    ensure(z2.width() < 0.02, || format!("Z² width {}", z2.width()))?;
    ensure(z2.final_wired() <= 0.5 && z2.final_free() >= 0.5, || {
        format!("Z² bracket [{}, {}] misses 0.5", z2.final_wired(), z2.final_free())
    })?;
    let tree = resistance::resistance_bracket(&Exhaustion::BinaryTree, "", "0", &[4, 8, 12])
        .map_err(|e| e.to_string())?;
    ensure(tree.free_values.iter().all(|f| (f - 1.0).abs() < 1e-9), || {
        format!("tree free values {:?}", tree.free_values)
    })?;
    ensure(tree.wired_values.iter().all(|&w| w < 0.95), || {
        format!("tree wired values {:?}", tree.wired_values)
    })?;
    ensure(!tree.converged, || "tree bracket reported closed".into())?;
    Ok(format!(
        "Z² [{:.4}, {:.4}] width {:.4}; tree free 1, wired max {:.4}",
        z2.final_wired(),
        z2.final_free(),
        z2.width(),
        tree.final_wired()
    ))
}

fn criterion_9() -> Outcome {
    let mut margin = f64::INFINITY;
    for (k, (net, _)) in criterion1_fixtures().iter().enumerate() {
        let eig = dense_laplacian(net).symmetric_eigenvalues();
        let lmax = eig.max();
        for x in 0..net.vertex_count() {
            for y in x + 1..net.vertex_count() {
                let r = free_resistance(net, x, y).map_err(|e| e.to_string())?;
                let m = r - 2.0 / lmax;
                margin = margin.min(m);
                ensure(m >= 0.0, || format!("fixture {k} ({x},{y}): R={r} < 2/λ_max={}", 2.0 / lmax))?;
            }
        }
    }
    Ok(format!("min R(x,y) - 2/λ_max = {margin:.3e}"))
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, fn() -> Outcome, u64); 9] = [
        ("identity suite", criterion_1, 30),
        ("spectral resolution", criterion_2, 60),
        ("spectral resistance formula", criterion_3, 60),
        ("lattice resistance values", criterion_4, 300),
        ("recurrence/transience dichotomy", criterion_5, 300),
        ("binary tree", criterion_6, 120),
        ("walk identity and Monte Carlo", criterion_7, 180),
        ("free/wired bracketing", criterion_8, 120),
        ("operator-norm resistance bound", criterion_9, 60),
    ];
    let mut failures = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > Duration::from_secs(*limit) => Err(format!(
                "{detail}; runtime {:.1}s exceeds {limit}s",
                elapsed.as_secs_f64()
            )),
            other => other,
        };
        match outcome {
            Ok(detail) => println!(
                "criterion {} [{name}]: PASS ({detail}) in {:.2}s",
                i + 1,
                elapsed.as_secs_f64()
            ),
            Err(why) => {
                failures += 1;
                println!(
                    "criterion {} [{name}]: FAIL ({why}) in {:.2}s",
                    i + 1,
                    elapsed.as_secs_f64()
                );
            }
        }
    }
    assert_eq!(failures, 0, "{failures} acceptance criteria failed");
}
