//! Randomized invariants over small lattices.

use fockgen::amplitudes::{evolve_state, k_particle_amplitude, AmplitudeRequest};
use fockgen::fock::{build_fock, dgamma, fock_dimension, ladder, FockSpace, LadderKind, Normalization, State};
use fockgen::grid::{dft, Basis, FieldVector, Grid, GridSpec};
use fockgen::onebody::{CMatrix, OneBodyOp};
use fockgen::specfun::{bessel_k, gamma_fn, power_kernel};
use fockgen::states::gaussian_state;
use fockgen::symmetry::{transform_site, unitary_of, LatticeRotation, PoincareElement};
use fockgen::C64;
use proptest::prelude::*;

fn grid(n: usize, points: usize) -> Grid {
    Grid::new(GridSpec::new(n, points, 0.5, 1.0)).unwrap()
}

fn complex_vec(len: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| C64::new(a, b)), len)
}

fn close(a: &[C64], b: &[C64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).norm() <= tol)
}

fn small_fock(n: usize, points: usize, k: usize) -> FockSpace {
    build_fock(&grid(n, points), k).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn site_offsets_round_trip(n in 1usize..=3, half in 1usize..=4, raw in prop::collection::vec(-20i64..20, 3)) {
        let g = grid(n, 2 * half);
        let site = g.site_of_offsets(&raw[..n]);
        prop_assert!(site < g.mode_count());
        let back = g.offsets_of_site(site);
        let p = g.points() as i64;
        for d in 0..n {
            prop_assert_eq!((back[d] - raw[d]).rem_euclid(p), 0);
            prop_assert!(-p / 2 <= back[d] && back[d] < p / 2);
        }
        prop_assert_eq!(g.linear_index(&g.multi_index(site)[..n]), site);
    }

    #[test]
    fn dft_is_unitary(log in 1u32..=9, seed_vals in complex_vec(512)) {
        let points = 1usize << log;
        let g = grid(1, points);
        let v = FieldVector::new(Basis::Coordinate, seed_vals[..points].to_vec());
        let f = dft(&v, Basis::Momentum, &g).unwrap();
        prop_assert!((f.norm() - v.norm()).abs() <= 1e-12 * v.norm().max(1.0));
        let back = dft(&f, Basis::Coordinate, &g).unwrap();
        prop_assert!(close(&back.values, &v.values, 1e-12));
    }

    #[test]
    fn bessel_recurrence_and_monotonicity(nu in 0.1f64..4.0, z in 0.05f64..20.0) {
        let (km, k0, kp) = (bessel_k(nu - 1.0, z).unwrap(), bessel_k(nu, z).unwrap(), bessel_k(nu + 1.0, z).unwrap());
        prop_assert!(((kp - km - 2.0 * nu / z * k0) / kp).abs() <= 1e-9);
        prop_assert!(bessel_k(nu, z * 1.1).unwrap() < k0);
        prop_assert!(k0 > 0.0);
    }

    #[test]
    fn gamma_recurrence(x in 0.05f64..8.0) {
        let (g, g1) = (gamma_fn(x).unwrap(), gamma_fn(x + 1.0).unwrap());
        prop_assert!(((g1 - x * g) / g1).abs() <= 1e-12);
    }

    #[test]
    fn polynomial_symbols_have_no_off_site_kernel(k in 0u32..4, n in 1usize..=3, r in 0.1f64..5.0) {
        prop_assert_eq!(power_kernel(k as f64, 1.0, n, r).unwrap(), 0.0);
    }

    #[test]
    fn fock_indexing_is_consistent(points in 1usize..=5, k in 0usize..=3) {
        let fock = small_fock(1, 2 * points, k);
        prop_assert_eq!(fock.dim() as u128, fock_dimension(2 * points, k));
        for i in 0..fock.dim() {
            prop_assert_eq!(fock.index_of(fock.modes(i)), Some(i));
            prop_assert_eq!(fock.sector_of(i), fock.modes(i).len());
        }
    }

    #[test]
    fn coordinate_ccr_on_random_sites(x in 0usize..8, y in 0usize..8) {
        let fock = small_fock(1, 8, 2);
        let a = ladder(&fock, x, Basis::Coordinate, LadderKind::Annihilate, Normalization::Noncovariant).unwrap();
        let c = ladder(&fock, y, Basis::Coordinate, LadderKind::Create, Normalization::Noncovariant).unwrap();
        let s = if x == y { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
        let comm = a.mul(&c).unwrap().sub(&c.mul(&a).unwrap()).unwrap();
        prop_assert!(comm.deviation_from_scalar_below(&fock, s, 2) <= 1e-12);
    }

    #[test]
    fn dgamma_is_linear_and_hermitian_preserving(re in complex_vec(16), im in complex_vec(16), alpha in -2.0f64..2.0) {
        let fock = small_fock(1, 4, 2);
        let a = OneBodyOp::new(Basis::Momentum, CMatrix::from_rows(4, 4, re).unwrap(), "A").unwrap();
        let b = OneBodyOp::new(Basis::Momentum, CMatrix::from_rows(4, 4, im).unwrap(), "B").unwrap();
        let s = C64::new(alpha, 0.5);
        let lhs = dgamma(&fock, &a.add_scaled(&b, s).unwrap()).unwrap();
        let rhs = dgamma(&fock, &a).unwrap().add_scaled(&dgamma(&fock, &b).unwrap(), s).unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().max_abs() <= 1e-12);
        let adj = dgamma(&fock, &a.adjoint()).unwrap();
        prop_assert!(adj.sub(&dgamma(&fock, &a).unwrap().adjoint()).unwrap().max_abs() <= 1e-12);
    }

    #[test]
    fn rotations_form_a_group(i in 0usize..24, j in 0usize..24) {
        let all = LatticeRotation::all(3);
        let (r, s) = (all[i], all[j]);
        prop_assert!(r.compose(&r.inverse()).is_identity());
        prop_assert!(all.contains(&r.compose(&s)));
        let g = grid(3, 4);
        let images: std::collections::BTreeSet<usize> =
            (0..g.mode_count()).map(|x| transform_site(&g, &r, &[1, -1, 2], x)).collect();
        prop_assert_eq!(images.len(), g.mode_count());
    }

    #[test]
    fn unitaries_compose_like_the_group(
        i in 0usize..4, j in 0usize..4,
        s1 in prop::collection::vec(-3i64..3, 2), s2 in prop::collection::vec(-3i64..3, 2),
        t1 in -1.0f64..1.0, t2 in -1.0f64..1.0,
    ) {
        let fock = small_fock(2, 4, 1);
        let all = LatticeRotation::all(2);
        let g1 = PoincareElement { y0: t1, shift: [s1[0], s1[1], 0], rotation: all[i], boost: [0.0; 3] };
        let g2 = PoincareElement { y0: t2, shift: [s2[0], s2[1], 0], rotation: all[j], boost: [0.0; 3] };
        let lhs = unitary_of(&fock, &g1).unwrap().mul(&unitary_of(&fock, &g2).unwrap()).unwrap();
        let rhs = unitary_of(&fock, &g1.compose(&g2)).unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().max_abs() <= 1e-12);
    }

    #[test]
    fn gaussians_are_normalized_and_evolution_unitary(
        p0 in -1.0f64..1.0, x0 in -1.0f64..1.0, sigma in 0.3f64..2.0, t in -2.0f64..2.0,
    ) {
        let fock = small_fock(1, 16, 1);
        let wave = gaussian_state(fock.grid(), &[p0, 0.0, 0.0], &[x0, 0.0, 0.0], sigma);
        let norm: f64 = wave.iter().map(|z| z.norm_sqr()).sum();
        prop_assert!((norm - 1.0).abs() <= 1e-12);
        let psi = State::one_particle(&fock, &wave).unwrap();
        prop_assert!((evolve_state(&fock, &psi, t).unwrap().norm() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn amplitudes_are_symmetric(x in 0usize..8, y in 0usize..8, vals in complex_vec(45), t in -1.0f64..1.0) {
        let fock = small_fock(1, 8, 2);
        let state = State::new(vals);
        let a = k_particle_amplitude(&fock, &AmplitudeRequest { state: state.clone(), positions: vec![x, y], t }).unwrap();
        let b = k_particle_amplitude(&fock, &AmplitudeRequest { state, positions: vec![y, x], t }).unwrap();
        prop_assert_eq!(a, b);
    }
}
