use nalgebra::DMatrix;
use proptest::prelude::*;

use resnet_core::lattice::{self, symbol, TorusQuadrature};
use resnet_core::network::random_connected;
use resnet_core::operators::summation_by_parts_check;
use resnet_core::resistance::{extrapolate_in_depth, free_resistance_at_depth, wired_resistance_at_depth};
use resnet_core::solvers::{cg_solve, dense_eig, lanczos_smallest, CgConfig};
use resnet_core::spectral::GroundedSpectrum;
use resnet_core::walk::detailed_balance_defect;
use resnet_core::{
    apply_laplacian, energy, free_resistance, phi_map, Exhaustion,
    GroundedSystem, Network, VertexFunction,
};

fn arb_network() -> impl Strategy<Value = Network> {
    (3usize..30, 0usize..40, any::<u64>())
        .prop_map(|(n, extra, seed)| random_connected(n, extra, 0.1, 10.0, seed).unwrap())
}

fn arb_grounded() -> impl Strategy<Value = (Network, usize, Vec<f64>, Vec<f64>)> {
    arb_network().prop_flat_map(|net| {
        let n = net.vertex_count();
        (
            Just(net),
            0..n,
            prop::collection::vec(-1.0f64..1.0, n),
            prop::collection::vec(-1.0f64..1.0, n),
        )
    })
}

fn grounded_source(values: &[f64], g: usize) -> VertexFunction {
    let mut v = values.to_vec();
    v[g] = 0.0;
    VertexFunction::new(v)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn laplacian_of_monopole_is_kronecker((net, g, _, _) in arb_grounded()) {
        let gs = GroundedSystem::at(&net, g).unwrap();
        for x in (0..net.vertex_count()).filter(|&x| x != g) {
            let w = gs.monopole(x).unwrap();
            let lw = apply_laplacian(&net, &w).unwrap();
            for y in (0..net.vertex_count()).filter(|&y| y != g) {
                let expect = if y == x { 1.0 } else { 0.0 };
                prop_assert!((lw[y] - expect).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn summation_by_parts((net, _, u, v) in arb_grounded()) {
        let (e, p) = summation_by_parts_check(&net, &VertexFunction::new(u), &VertexFunction::new(v)).unwrap();
        prop_assert!(close(e, p, 1e-10));
    }

    #[test]
    fn phi_is_an_isometry((net, g, a, b) in arb_grounded()) {
        let gs = GroundedSystem::at(&net, g).unwrap();
        let (xi, eta) = (grounded_source(&a, g), grounded_source(&b, g));
        let (pxi, peta) = (phi_map(&gs, &xi).unwrap(), phi_map(&gs, &eta).unwrap());
        let lhs = energy(&net, &pxi, &peta).unwrap();
        let rhs = xi.dot(&peta);
        prop_assert!(close(lhs, rhs, 1e-8));
    }

    #[test]
    fn resistance_is_a_metric(net in arb_network(), picks in prop::array::uniform3(any::<prop::sample::Index>())) {
        let n = net.vertex_count();
        let [x, y, z] = picks.map(|i| i.index(n));
        let rxy = free_resistance(&net, x, y).unwrap();
        let ryx = free_resistance(&net, y, x).unwrap();
        let rxz = free_resistance(&net, x, z).unwrap();
        let rzy = free_resistance(&net, z, y).unwrap();
        prop_assert!(close(rxy, ryx, 1e-9));
        prop_assert!(rxy >= 0.0);
        prop_assert!(rxy <= rxz + rzy + 1e-9);
        if x != y {
            prop_assert!(rxy > 0.0);
        }
    }

    #[test]
    fn rayleigh_monotonicity(net in arb_network(), scale in 1.0f64..5.0, pick in any::<prop::sample::Index>()) {
        let n = net.vertex_count();
        let boosted = net.map_conductances(|e| e.conductance * scale).unwrap();
        let x = pick.index(n);
        let y = (x + 1) % n;
        let r = free_resistance(&net, x, y).unwrap();
        let rb = free_resistance(&boosted, x, y).unwrap();
        prop_assert!(rb <= r * (1.0 + 1e-9));
        prop_assert!(close(rb * scale, r, 1e-8));
    }

    #[test]
    fn spectral_resolution_of_identity((net, g, a, _) in arb_grounded()) {
        let gs = GroundedSystem::at(&net, g).unwrap();
        let xi = grounded_source(&a, g);
        let spectrum = GroundedSpectrum::new(&gs).unwrap();
        let mu = spectrum.measure(&xi).unwrap();
        let norm2: f64 = xi.dot(&xi.clone().into_inner());
        prop_assert!(close(mu.total, norm2, 1e-10));
        prop_assert!(close(mu.integrate(|_| 1.0), norm2, 1e-10));
    }

    #[test]
    fn spectral_resistance_matches_green((net, g, _, _) in arb_grounded(), pick in any::<prop::sample::Index>()) {
        let gs = GroundedSystem::at(&net, g).unwrap();
        let spectrum = GroundedSpectrum::new(&gs).unwrap();
        let x = pick.index(net.vertex_count());
        let y = (x + 2) % net.vertex_count();
        let s = spectrum.resistance(x, y).unwrap();
        let r = free_resistance(&net, x, y).unwrap();
        prop_assert!(close(s, r, 1e-9));
    }

    #[test]
    fn walk_is_reversible(net in arb_network()) {
        prop_assert!(detailed_balance_defect(&net).unwrap() < 1e-12);
    }

    #[test]
    fn cg_agrees_with_dense((net, g, a, _) in arb_grounded()) {
        let gs = GroundedSystem::at(&net, g).unwrap();
        let b = gs.restrict(&grounded_source(&a, g)).unwrap();
        let sol = cg_solve(gs.matrix(), &b, &CgConfig::with_tol(1e-12)).unwrap();
        let dense = gs.matrix().to_dense();
        let exact = dense.lu().solve(&nalgebra::DVector::from_vec(b)).unwrap();
        let scale = exact.amax().max(1e-12);
        for (u, v) in sol.x.iter().zip(exact.iter()) {
            prop_assert!((u - v).abs() <= 1e-8 * scale);
        }
    }

    #[test]
    fn lanczos_bounds_the_bottom_eigenvalue((net, g, _, _) in arb_grounded(), seed in any::<u64>()) {
        let gs = GroundedSystem::at(&net, g).unwrap();
        let dense = gs.matrix().to_dense();
        let exact = dense_eig(&dense).unwrap().eigenvalues[0];
        let est = lanczos_smallest(gs.matrix(), 60, seed).unwrap();
        prop_assert!(est.value >= exact - 1e-9 * exact.abs().max(1.0));
        prop_assert!(close(est.value, exact, 1e-7));
    }

    #[test]
    fn extrapolation_recovers_rational_tails(a in -2.0f64..2.0, b in -2.0f64..2.0, c in -2.0f64..2.0) {
        let depths = [8usize, 12, 16, 24];
        let values: Vec<f64> = depths
            .iter()
            .map(|&k| a + b / k as f64 + c / (k * k) as f64)
            .collect();
        let limit = extrapolate_in_depth(&depths, &values).unwrap();
        prop_assert!((limit - a).abs() < 1e-9);
    }

    #[test]
    fn symbol_is_positive_off_zero(t in prop::collection::vec(-std::f64::consts::PI..std::f64::consts::PI, 1..=5)) {
        let s = symbol(&t);
        let bound: f64 = t.iter().map(|x| 4.0 * x * x / (std::f64::consts::PI * std::f64::consts::PI)).sum();
        prop_assert!(s >= 0.0);
        prop_assert!(s >= bound - 1e-12);
        prop_assert!(s <= 4.0 * t.len() as f64 + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn lattice_resistance_symmetries(
        d in 1usize..=3,
        p in prop::array::uniform3(-3i64..=3),
        perm in 0usize..6,
    ) {
        let q = TorusQuadrature::new(d).unwrap();
        let x: Vec<i64> = p[..d].to_vec();
        let origin = vec![0i64; d];
        let base = lattice::lattice_resistance(&q, &origin, &x).unwrap().value;
        // Translation and reflection.
        let shift: Vec<i64> = (0..d as i64).map(|i| i + 2).collect();
        let xs: Vec<i64> = x.iter().zip(&shift).map(|(a, s)| a + s).collect();
        let translated = lattice::lattice_resistance(&q, &shift, &xs).unwrap().value;
        let reflected: Vec<i64> = x.iter().map(|a| -a).collect();
        let mirrored = lattice::lattice_resistance(&q, &origin, &reflected).unwrap().value;
        // Coordinate permutation.
        let mut permuted = x.clone();
        if d >= 2 {
            permuted.rotate_left(perm % d);
        }
        let rotated = lattice::lattice_resistance(&q, &origin, &permuted).unwrap().value;
        prop_assert!((translated - base).abs() < 1e-12);
        prop_assert!((mirrored - base).abs() < 1e-12);
        prop_assert!((rotated - base).abs() < 1e-12);
    }

    #[test]
    fn wired_never_exceeds_free(k in 2usize..6, which in 0usize..3) {
        let (family, x, y) = match which {
            0 => (Exhaustion::Lattice { dim: 2 }, "0,0", "1,1"),
            1 => (Exhaustion::Lattice { dim: 1 }, "0", "2"),
            _ => (Exhaustion::BinaryTree, "", "01"),
        };
        let w = wired_resistance_at_depth(&family, k, x, y).unwrap();
        let f = free_resistance_at_depth(&family, k, x, y).unwrap();
        let w_next = wired_resistance_at_depth(&family, k + 1, x, y).unwrap();
        let f_next = free_resistance_at_depth(&family, k + 1, x, y).unwrap();
        prop_assert!(w <= f + 1e-9);
        prop_assert!(w_next >= w - 1e-9);
        prop_assert!(f_next <= f + 1e-9);
    }
}

#[test]
fn dense_eig_reconstructs() {
    let net = random_connected(12, 10, 0.1, 10.0, 3).unwrap();
    let gs = GroundedSystem::at(&net, 0).unwrap();
    let a: DMatrix<f64> = gs.matrix().to_dense();
    let dec = dense_eig(&a).unwrap();
    assert!((dec.reconstruct() - &a).amax() < 1e-10);
    assert!(dec.orthonormality_error() < 1e-10);
}
