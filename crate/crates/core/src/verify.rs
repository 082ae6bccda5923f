//! Finite-scale identities as reusable defect measurements, and the stock
//! invariant suite behind `resnet verify`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::lattice::{self, TorusQuadrature};
use crate::network::{
    binary_tree, complete_graph, path_graph, random_connected, Edge, Exhaustion, Network,
    VertexFunction, VertexId,
};
use crate::operators::{
    apply_laplacian, energy, gram_matrix, laplacian, phi_map, summation_by_parts_check,
    GroundedSystem,
};
use crate::resistance::{self, free_resistance};
use crate::solvers::{cg_solve, dense_eig, lanczos_smallest, CgConfig};
use crate::spectral::{self, GroundedSpectrum};
use crate::walk;

/// Modules accepted by the suite filter.
pub const MODULES: [&str; 7] = [
    "network",
    "operators",
    "solvers",
    "resistance",
    "spectral",
    "lattice",
    "walk",
];

fn rel(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs()).max(1.0);
    (a - b).abs() / scale
}

/// Random function vanishing at the ground of `gs`.
pub fn random_source(gs: &GroundedSystem, rng: &mut ChaCha8Rng) -> VertexFunction {
    let mut xi: VertexFunction = (0..gs.host().vertex_count())
        .map(|_| rng.random_range(-1.0..1.0))
        .collect::<Vec<_>>()
        .into();
    xi[gs.ground()] = 0.0;
    xi
}

/// `max |Δw_x(y) - δ_xy|` over non-ground `x, y`, with `Δ` taken on `laplacian_net`.
/// Passing a network other than the host measures how far its Laplacian is
/// from inverting the host's Green matrix.
pub fn kronecker_defect(gs: &GroundedSystem, laplacian_net: &Network) -> Result<f64> {
    let mut worst = 0.0f64;
    for i in 0..gs.dim() {
        let x = gs.vertex(i);
        let w = gs.monopole(x)?;
        let lw = apply_laplacian(laplacian_net, &w)?;
        for j in 0..gs.dim() {
            let y = gs.vertex(j);
            let expect = if x == y { 1.0 } else { 0.0 };
            worst = worst.max((lw[y] - expect).abs());
        }
    }
    Ok(worst)
}

/// `max |c(x) w_x(z) - Σ_y c_xy w_y(z) - δ_x(z)|`, with `w_ground = 0`.
pub fn ripple_defect(gs: &GroundedSystem) -> Result<f64> {
    let m = gram_matrix(gs)?;
    let net = gs.host();
    let mut worst = 0.0f64;
    for i in 0..gs.dim() {
        let x = gs.vertex(i);
        let cx = net.net_conductance(x)?;
        for k in 0..gs.dim() {
            let mut v = cx * m[(k, i)];
            for &(y, c) in net.neighbors(x) {
                if let Some(j) = gs.reduced_index(y) {
                    v -= c * m[(k, j)];
                }
            }
            let expect = if i == k { 1.0 } else { 0.0 };
            worst = worst.max((v - expect).abs());
        }
    }
    Ok(worst)
}

/// Relative gap between `E(Φξ)` and `ξᵀMξ`.
pub fn isometry_defect(gs: &GroundedSystem, xi: &VertexFunction) -> Result<f64> {
    let phi = phi_map(gs, xi)?;
    let lhs = energy(gs.host(), &phi, &phi)?;
    let m = gram_matrix(gs)?;
    let r = gs.restrict(xi)?;
    let v = nalgebra::DVector::from_column_slice(&r);
    Ok(rel(lhs, v.dot(&(&m * &v))))
}

/// Relative gap between `E(Φξ, Δ Φη)` and `<ξ, η>`, with the Dirichlet Laplacian.
pub fn intertwining_defect(gs: &GroundedSystem, xi: &VertexFunction, eta: &VertexFunction) -> Result<f64> {
    let lhs = energy(gs.host(), &phi_map(gs, xi)?, &gs.apply_dirichlet(&phi_map(gs, eta)?)?)?;
    Ok(rel(lhs, xi.dot(eta)))
}

/// `max |(ΔΦξ)(x) - (ΦΔξ)(x)|` over non-ground `x`, where `Δξ` is the reduced
/// Laplacian applied to `ξ`.
pub fn commutation_defect(gs: &GroundedSystem, xi: &VertexFunction) -> Result<f64> {
    let lhs = gs.apply_dirichlet(&phi_map(gs, xi)?)?;
    let l_xi = gs.extend(&gs.matrix().mul_vec(&gs.restrict(xi)?));
    let rhs = phi_map(gs, &l_xi)?;
    Ok((0..gs.dim())
        .map(|i| {
            let x = gs.vertex(i);
            (lhs[x] - rhs[x]).abs()
        })
        .fold(0.0, f64::max))
}

/// `max(‖ML - I‖, ‖LM - I‖)` in the max norm.
pub fn inverse_defect(gs: &GroundedSystem) -> Result<f64> {
    let m = gram_matrix(gs)?;
    let l = gs.matrix().to_dense();
    let id = DMatrix::<f64>::identity(gs.dim(), gs.dim());
    Ok((&m * &l - &id).amax().max((&l * &m - &id).amax()))
}

/// `max |E(δ_x) - c(x)|` relative to `c(x)`.
pub fn energy_delta_defect(net: &Network) -> Result<f64> {
    let n = net.vertex_count();
    let mut worst = 0.0f64;
    for x in 0..n {
        let d = VertexFunction::delta(n, x);
        worst = worst.max(rel(energy(net, &d, &d)?, net.net_conductance(x)?));
    }
    Ok(worst)
}

/// Relative gap in `E(u) = E(fin) + E(harm)` for the split against `boundary`.
pub fn royden_defect(net: &Network, boundary: &[VertexId], u: &VertexFunction) -> Result<f64> {
    let (fin, harm) = resistance::royden_split_on(net, boundary, u)?;
    let eu = energy(net, u, u)?;
    let sum = energy(net, &fin, &fin)? + energy(net, &harm, &harm)?;
    Ok(rel(eu, sum))
}

/// Smallest `R(x,y) λ_max / 2` over pairs; at least `1` when the operator-norm bound holds.
pub fn operator_norm_margin(net: &Network) -> Result<f64> {
    let lmax = *dense_eig(&laplacian(net).to_dense())?
        .eigenvalues
        .last()
        .unwrap();
    let mut worst = f64::INFINITY;
    for x in 0..net.vertex_count() {
        for y in x + 1..net.vertex_count() {
            worst = worst.min(free_resistance(net, x, y)? * lmax / 2.0);
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub module: &'static str,
    pub name: String,
    pub passed: bool,
    /// Measured defect or margin.
    pub value: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub total: usize,
    pub failed: usize,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone, Default)]
pub struct VerifyOptions {
    /// Restrict the suite to one module.
    pub module: Option<String>,
    /// Evaluate the Kronecker identity against a Laplacian with one
    /// perturbed conductance; the check is then expected to fail.
    pub inject_fault: bool,
}

struct Suite {
    opts: VerifyOptions,
    checks: Vec<Check>,
}

impl Suite {
    fn wants(&self, module: &str) -> bool {
        self.opts.module.as_deref().is_none_or(|m| m == module)
    }

    /// Records `value <= tolerance` (a defect).
    fn defect(&mut self, module: &'static str, name: &str, value: Result<f64>, tolerance: f64) {
        let value = value.unwrap_or(f64::INFINITY);
        self.checks.push(Check {
            module,
            name: name.to_string(),
            passed: value <= tolerance,
            value,
            tolerance,
        });
    }

    /// Records a boolean property.
    fn holds(&mut self, module: &'static str, name: &str, ok: Result<bool>) {
        let passed = ok.unwrap_or(false);
        self.checks.push(Check {
            module,
            name: name.to_string(),
            passed,
            value: if passed { 0.0 } else { 1.0 },
            tolerance: 0.0,
        });
    }
}

/// Stock finite fixtures: paths, a triangle, a small tree, a lattice ball and
/// two random weighted networks.
pub fn stock_fixtures() -> Vec<(String, Network)> {
    let mut out = vec![
        ("P3".to_string(), path_graph(3).unwrap()),
        ("K3".to_string(), complete_graph(3).unwrap()),
        ("tree3".to_string(), binary_tree(3).unwrap()),
        ("Z2-ball3".to_string(), crate::network::lattice_ball(2, 3).unwrap()),
    ];
    for seed in [1u64, 2] {
        out.push((
            format!("random{seed}"),
            random_connected(18, 20, 0.1, 10.0, seed).unwrap(),
        ));
    }
    out
}

fn perturbed(net: &Network) -> Network {
    let mut edges: Vec<Edge> = net.edges().to_vec();
    edges[0].conductance *= 1.5;
    Network::new(net.vertex_count(), edges, net.origin()).expect("perturbation keeps validity")
}

/// Runs every invariant on the stock fixtures.
pub fn run_suite(opts: VerifyOptions) -> VerifyReport {
    let mut s = Suite {
        opts,
        checks: Vec::new(),
    };
    let fixtures = stock_fixtures();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);

    if s.wants("network") {
        for (name, net) in &fixtures {
            let total: f64 = (0..net.vertex_count())
                .map(|x| net.net_conductance(x).unwrap())
                .sum();
            let edges: f64 = net.edges().iter().map(|e| e.conductance).sum();
            s.defect("network", &format!("{name}: Σ c(x) = 2 Σ c_xy"), Ok(rel(total, 2.0 * edges)), 1e-12);
        }
        let fam = Exhaustion::Lattice { dim: 2 };
        s.holds(
            "network",
            "wired Z² depth 3: c(ω) equals the cut conductance",
            fam.wired_truncation(3).map(|w| {
                let g = w.ground().unwrap();
                (w.network.net_conductance(g).unwrap() - w.cut_conductance).abs() < 1e-12
            }),
        );
    }

    if s.wants("operators") {
        for (name, net) in &fixtures {
            let g = net.vertex_count() - 1;
            let gs = GroundedSystem::at(net, g).unwrap();
            let xi = random_source(&gs, &mut rng);
            let eta = random_source(&gs, &mut rng);
            let lap_net = if s.opts.inject_fault { perturbed(net) } else { net.clone() };
            s.defect("operators", &format!("{name}: Kronecker"), kronecker_defect(&gs, &lap_net), 1e-10);
            s.defect("operators", &format!("{name}: ripple"), ripple_defect(&gs), 1e-10);
            s.defect("operators", &format!("{name}: isometry"), isometry_defect(&gs, &xi), 1e-10);
            s.defect(
                "operators",
                &format!("{name}: intertwining"),
                intertwining_defect(&gs, &xi, &eta),
                1e-10,
            );
            s.defect("operators", &format!("{name}: commutation"), commutation_defect(&gs, &xi), 1e-10);
            s.defect("operators", &format!("{name}: ΔM = MΔ = I"), inverse_defect(&gs), 1e-10);
            s.defect("operators", &format!("{name}: E(δ_x) = c(x)"), energy_delta_defect(net), 1e-12);
            s.holds(
                "operators",
                &format!("{name}: positivity of E(Φξ, ΔΦξ)"),
                phi_map(&gs, &xi)
                    .and_then(|p| energy(net, &p, &gs.apply_dirichlet(&p)?))
                    .map(|v| v >= 0.0),
            );
            let u = random_source(&gs, &mut rng);
            s.defect(
                "operators",
                &format!("{name}: summation by parts"),
                summation_by_parts_check(net, &u, &xi).map(|(a, b)| rel(a, b)),
                1e-12,
            );
            s.holds(
                "operators",
                &format!("{name}: Laplacian row sums vanish"),
                Ok((0..net.vertex_count())
                    .all(|x| laplacian(net).row(x).map(|(_, v)| v).sum::<f64>().abs() < 1e-12)),
            );
        }
    }

    if s.wants("solvers") {
        for (name, net) in &fixtures {
            let gs = GroundedSystem::at(net, 0).unwrap();
            let a = gs.matrix().to_dense();
            let b: Vec<f64> = (0..gs.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let cg = cg_solve(gs.matrix(), &b, &CgConfig::with_tol(1e-13)).map(|s| s.x);
            let dense = gram_matrix(&gs).map(|m| m * nalgebra::DVector::from_vec(b.clone()));
            s.defect(
                "solvers",
                &format!("{name}: CG agrees with dense inverse"),
                cg.and_then(|x| dense.map(|d| (nalgebra::DVector::from_vec(x) - d).amax())),
                1e-8,
            );
            let eig = dense_eig(&a).unwrap();
            s.defect(
                "solvers",
                &format!("{name}: eigendecomposition reconstruction"),
                Ok((eig.reconstruct() - &a).norm() / a.norm()),
                1e-8,
            );
            s.defect("solvers", &format!("{name}: eigenvector orthonormality"), Ok(eig.orthonormality_error()), 1e-10);
            s.holds("solvers", &format!("{name}: grounded eigenvalues positive"), Ok(eig.eigenvalues[0] > 0.0));
            let lz = lanczos_smallest(gs.matrix(), 200, 9).map(|e| e.value);
            s.defect(
                "solvers",
                &format!("{name}: Lanczos matches dense λ_min"),
                lz.map(|v| (v - eig.eigenvalues[0]).abs() / eig.eigenvalues[0]),
                1e-6,
            );
        }
    }

    if s.wants("resistance") {
        for (name, net) in &fixtures {
            let n = net.vertex_count();
            let r = |x, y| free_resistance(net, x, y).unwrap();
            let picks: Vec<VertexId> = (0..n.min(7)).collect();
            let mut tri = true;
            let mut sym = true;
            for &x in &picks {
                for &y in &picks {
                    if (r(x, y) - r(y, x)).abs() > 1e-10 || (x != y && r(x, y) <= 0.0) {
                        sym = false;
                    }
                    for &z in &picks {
                        if r(x, z) > r(x, y) + r(y, z) + 1e-10 {
                            tri = false;
                        }
                    }
                }
            }
            s.holds("resistance", &format!("{name}: triangle inequality"), Ok(tri));
            s.holds("resistance", &format!("{name}: symmetry and positivity"), Ok(sym));
            s.holds(
                "resistance",
                &format!("{name}: R(x,y) ≥ 2/λ_max"),
                operator_norm_margin(net).map(|m| m >= 1.0 - 1e-10),
            );
            let (o, x, y) = (0, n - 1, n / 2);
            let law = (|| {
                let vxy = resistance::dipole_solve(net, x, y)?;
                let vx = resistance::dipole_solve(net, x, o)?;
                let vy = resistance::dipole_solve(net, y, o)?;
                let d = vxy.sub(&vx.sub(&vy));
                let c = d[0];
                Ok(d.shifted(-c).sup_norm())
            })();
            s.defect("resistance", &format!("{name}: dipole difference law"), law, 1e-9);
            let gs = GroundedSystem::at(net, o).unwrap();
            let u = random_source(&gs, &mut rng);
            let boundary: Vec<VertexId> = (0..n).step_by(3).collect();
            s.defect("resistance", &format!("{name}: Royden orthogonality"), royden_defect(net, &boundary, &u), 1e-9);
        }
        let fam = Exhaustion::Lattice { dim: 2 };
        s.holds(
            "resistance",
            "Z² adjacent bracket monotone over depths 2,4,6",
            resistance::resistance_bracket(&fam, "0,0", "1,0", &[2, 4, 6]).map(|_| true),
        );
        s.holds(
            "resistance",
            "Z² depth 6: sup-norm of the normalized dipole ≤ R^F",
            resistance::sup_norm_bound_check(&fam, 6, "1,0").map(|(a, b)| a <= b),
        );
    }

    if s.wants("spectral") {
        for (name, net) in &fixtures {
            let gs = GroundedSystem::at(net, net.vertex_count() - 1).unwrap();
            let spec = GroundedSpectrum::new(&gs).unwrap();
            let xi = random_source(&gs, &mut rng);
            s.defect(
                "spectral",
                &format!("{name}: resolution of identity"),
                spec.measure(&xi).map(|m| rel(m.total, xi.dot(&xi))),
                1e-10,
            );
            s.defect("spectral", &format!("{name}: Radon-Nikodym"), spec.radon_nikodym_deviation(&xi), 1e-9);
            s.defect(
                "spectral",
                &format!("{name}: moment identity n ≤ 6"),
                spectral::moment_identity_check(&gs, &xi, 6)
                    .map(|rows| rows.iter().map(|r| r.rel_deviation).fold(0.0, f64::max)),
                1e-8,
            );
            let gamma = spec.eigenvalues()[0];
            let mut worst_green = 0.0f64;
            let mut bound_ok = true;
            for i in 0..gs.dim() {
                for j in i + 1..gs.dim() {
                    let (x, y) = (gs.vertex(i), gs.vertex(j));
                    let sr = spec.resistance(x, y).unwrap();
                    worst_green = worst_green.max(rel(sr, gs.green_resistance(x, y).unwrap()));
                    bound_ok &= sr <= 2.0 / gamma + 1e-10;
                }
            }
            s.defect("spectral", &format!("{name}: spectral = Green resistance"), Ok(worst_green), 1e-9);
            s.holds("spectral", &format!("{name}: resistance ≤ 2/γ"), Ok(bound_ok));
        }
        s.holds(
            "spectral",
            "tree Dirichlet gap non-increasing over depths 3,5,7",
            spectral::dirichlet_gap(&Exhaustion::BinaryTree, &[3, 5, 7], 1).map(|g| g.monotone),
        );
        s.defect(
            "spectral",
            "Bochner scalar identity at λ = 1",
            spectral::bochner_integral(1.0).map(|v| (v - 1.0).abs()),
            1e-6,
        );
    }

    if s.wants("lattice") {
        s.holds(
            "lattice",
            "symbol positive on the midpoint grid",
            Ok((1..=3).all(|d| lattice::symbol_on_grid(d, 12).iter().all(|&v| v > 0.0))),
        );
        let q2 = TorusQuadrature::new(2).unwrap();
        let sym = (|| {
            let a = lattice::lattice_resistance(&q2, &[0, 0], &[2, 1])?.value;
            let b = lattice::lattice_resistance(&q2, &[2, 1], &[0, 0])?.value;
            let c = lattice::lattice_resistance(&q2, &[1, 3], &[3, 4])?.value;
            let d = lattice::lattice_resistance(&q2, &[0, 0], &[-1, -2])?.value;
            Ok([b, c, d].iter().map(|v| (v - a).abs()).fold(0.0, f64::max))
        })();
        s.defect("lattice", "resistance symmetric, translation and permutation invariant", sym, 1e-10);
        let q3 = TorusQuadrature::new(3).unwrap();
        let ew = (|| {
            let e = lattice::monopole_energy(&q3)?.value;
            let w = lattice::lattice_monopole_value(&q3, &[0, 0, 0])?.value;
            Ok((e - w).abs())
        })();
        s.defect("lattice", "E(w_o) = w_o(0) in d = 3", ew, 1e-6);
        s.holds(
            "lattice",
            "d = 3 monopole quadrature converged",
            lattice::lattice_monopole_value(&q3, &[0, 0, 0]).map(|r| r.converged),
        );
        s.defect(
            "lattice",
            "Fourier Kronecker 6w(0) - 6w(e1) = 1",
            lattice::fourier_kronecker_residual(&q3).map(|v| (v - 1.0).abs()),
            1e-6,
        );
        s.holds(
            "lattice",
            "transience verdicts match d ≥ 3 for d = 1..4",
            (1..=4)
                .map(|d| lattice::transience_probe(d).map(|r| r.consistent()))
                .collect::<Result<Vec<bool>>>()
                .map(|v| v.into_iter().all(|b| b)),
        );
    }

    if s.wants("walk") {
        for (name, net) in &fixtures {
            s.defect("walk", &format!("{name}: detailed balance"), walk::detailed_balance_defect(net), 1e-12);
            let (o, x) = (0, net.vertex_count() - 1);
            let id = (|| {
                let a = walk::resistance_via_walk(net, o, x)?;
                let b = free_resistance(net, x, o)?;
                let p1 = walk::hitting_probability_exact(net, o, x)?;
                let p2 = walk::hitting_probability_chain(net, o, x, false)?;
                Ok(rel(a, b).max(rel(p1, p2)))
            })();
            s.defect("walk", &format!("{name}: R = 1/(c(o) P[o→x]) by two solves"), id, 1e-9);
        }
        let p3 = path_graph(3).unwrap();
        let cfg = walk::McConfig::new(20_000, 7);
        s.holds(
            "walk",
            "Monte Carlo reproducible for a fixed seed",
            walk::hitting_probability_mc(&p3, 0, 2, &cfg)
                .and_then(|a| Ok(a == walk::hitting_probability_mc(&p3, 0, 2, &cfg)?)),
        );
        s.holds(
            "walk",
            "Monte Carlo covers the exact P₃ value",
            walk::hitting_probability_mc(&p3, 0, 2, &cfg).map(|e| e.covers(0.5, 3.0)),
        );
    }

    let failed = s.checks.iter().filter(|c| !c.passed).count();
    VerifyReport {
        passed: failed == 0,
        total: s.checks.len(),
        failed,
        checks: s.checks,
    }
}
