//! Residual measurements behind the verification suites. Each function
//! returns raw numbers; tolerances live with the callers.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{
    build_fock, dgamma, fock_commutator, ladder, number_op, FockSpace, LadderKind, Normalization, State,
};
use crate::grid::{norm, Basis, FieldVector, Grid, GridSpec, SpectralFilter};
use crate::onebody::{
    boost_action, boost_spectral_action, commutator, rotation_action, Action, CMatrix, OneBodyOp,
};
use crate::specfun::{omega_kernel, power_kernel, Kernel};
use crate::states::{random_gaussian_states, random_vector, TestRng};
use crate::symmetry::{
    adjoint_on_coordinate_ladder, covariance_check, time_kernel_from_conjugation, transform_site,
    LatticeRotation, PoincareElement,
};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Number of random band-limited states used by the lattice suites.
pub const STATE_COUNT: usize = 20;
/// Time used for the time-translated boost identity.
pub const BOOST_TIME: f64 = 0.5;

fn diff_norm(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

fn scaled(a: &[Complex64], s: Complex64) -> Vec<Complex64> {
    a.iter().map(|v| v * s).collect()
}

/// `(G + G^dagger) / 2` with complex normal entries.
pub fn random_hermitian(rng: &mut TestRng, m: usize) -> CMatrix {
    let g = CMatrix::from_rows(m, m, random_vector(rng, m * m)).expect("square data");
    g.add(&g.adjoint()).expect("same shape").scale(Complex64::new(0.5, 0.0))
}

/// Worst `||[dG(A), dG(B)] - dG([A, B])||_F / max(1, ||dG([A, B])||_F)`.
pub fn dgamma_homomorphism(fock: &FockSpace, pairs: usize, seed: u64) -> Result<f64> {
    let mut rng = TestRng::new(seed);
    let m = fock.mode_count();
    let mut worst: f64 = 0.0;
    for _ in 0..pairs {
        let a = OneBodyOp::new(Basis::Momentum, random_hermitian(&mut rng, m), "A")?;
        let b = OneBodyOp::new(Basis::Momentum, random_hermitian(&mut rng, m), "B")?;
        let lhs = fock_commutator(&dgamma(fock, &a)?, &dgamma(fock, &b)?)?;
        let rhs = dgamma(fock, &commutator(&a, &b)?)?;
        worst = worst.max(lhs.sub(&rhs)?.frobenius() / rhs.frobenius().max(1.0));
    }
    Ok(worst)
}

/// `||[N, dG(A)]||_F` for a random Hermitian `A`.
pub fn number_conservation(fock: &FockSpace, seed: u64) -> Result<f64> {
    let mut rng = TestRng::new(seed);
    let a = OneBodyOp::new(Basis::Momentum, random_hermitian(&mut rng, fock.mode_count()), "A")?;
    Ok(fock_commutator(&number_op(fock), &dgamma(fock, &a)?)?.frobenius())
}

/// Index pairs for ladder checks: all pairs up to `limit`, otherwise the
/// diagonal plus a seeded sample of off-diagonal pairs.
pub fn ladder_pairs(m: usize, limit: usize, seed: u64) -> Vec<(usize, usize)> {
    if m * m <= limit {
        return (0..m).flat_map(|p| (0..m).map(move |q| (p, q))).collect();
    }
    let mut rng = TestRng::new(seed);
    let mut out: Vec<(usize, usize)> = (0..m).step_by((m / 16).max(1)).map(|p| (p, p)).collect();
    while out.len() < limit {
        let p = (rng.next_u64() % m as u64) as usize;
        let q = (rng.next_u64() % m as u64) as usize;
        out.push((p, q));
    }
    out
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CcrDefects {
    pub momentum: f64,
    pub coordinate: f64,
    /// Largest `||create - annihilate^dagger||` seen (exact zero expected).
    pub adjointness: f64,
}

/// `max |[a_i, a_j^dagger] - delta_ij|` over sectors below `K`, for momentum
/// modes and lattice sites.
pub fn ladder_ccr(fock: &FockSpace, pairs: &[(usize, usize)]) -> Result<CcrDefects> {
    let top = fock.max_particles();
    let mut out = CcrDefects::default();
    for basis in [Basis::Momentum, Basis::Coordinate] {
        let mut worst: f64 = 0.0;
        for &(i, j) in pairs {
            let a = ladder(fock, i, basis, LadderKind::Annihilate, Normalization::Noncovariant)?;
            let c = ladder(fock, j, basis, LadderKind::Create, Normalization::Noncovariant)?;
            let s = if i == j { ONE } else { Complex64::new(0.0, 0.0) };
            worst = worst.max(fock_commutator(&a, &c)?.deviation_from_scalar_below(fock, s, top));
            if i == j {
                out.adjointness = out.adjointness.max(c.sub(&a.adjoint())?.max_abs());
            }
        }
        match basis {
            Basis::Momentum => out.momentum = worst,
            Basis::Coordinate => out.coordinate = worst,
        }
    }
    Ok(out)
}

/// Two constructions of coordinate ladders (direct and summed momentum
/// ladders), and second-quantized position two ways.
pub fn coordinate_ladder_paths(fock: &FockSpace, sites: &[usize]) -> Result<f64> {
    let grid = fock.grid();
    let mut worst: f64 = 0.0;
    for &x in sites {
        let direct = ladder(fock, x, Basis::Coordinate, LadderKind::Annihilate, Normalization::Noncovariant)?;
        let mut sum = direct.scale(Complex64::new(0.0, 0.0));
        for (p, c) in crate::fock::coordinate_coefficients(grid, x) {
            let a = ladder(fock, p as usize, Basis::Momentum, LadderKind::Annihilate, Normalization::Noncovariant)?;
            sum = sum.add_scaled(&a, c)?;
        }
        worst = worst.max(direct.sub(&sum)?.max_abs());
    }
    Ok(worst)
}

/// `dGamma(position)` against `sum_x x^j a~(x)^dagger a~(x)`.
pub fn second_quantized_position(fock: &FockSpace, j: usize) -> Result<f64> {
    let grid = fock.grid();
    let via_dgamma = dgamma(fock, &crate::onebody::position_op(grid, j)?)?;
    let mut acc = via_dgamma.scale(Complex64::new(0.0, 0.0));
    for x in 0..grid.mode_count() {
        let a = ladder(fock, x, Basis::Coordinate, LadderKind::Annihilate, Normalization::Noncovariant)?;
        acc = acc.add_scaled(&a.adjoint().mul(&a)?, Complex64::new(grid.position(x)[j], 0.0))?;
    }
    Ok(via_dgamma.sub(&acc)?.max_abs())
}

/// Worst DFT norm defect or round-trip error over random vectors on 1-D
/// grids with power-of-two sizes up to `max_points`.
pub fn dft_unitarity(count: usize, max_points: usize, seed: u64) -> Result<f64> {
    let mut rng = TestRng::new(seed);
    let max_log = max_points.max(2).ilog2();
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let log = 1 + (rng.next_u64() % max_log as u64) as u32;
        let points = 1usize << log;
        let grid = Grid::new(GridSpec::new(1, points, 0.1, 1.0))?;
        let v = FieldVector::new(Basis::Coordinate, random_vector(&mut rng, points));
        let fwd = crate::grid::dft(&v, Basis::Momentum, &grid)?;
        let back = crate::grid::dft(&fwd, Basis::Coordinate, &grid)?;
        let n = v.norm();
        worst = worst.max((fwd.norm() - n).abs() / n);
        worst = worst.max(diff_norm(&back.values, &v.values) / n);
    }
    Ok(worst)
}

/// One row of an analytic-versus-lattice kernel table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelRow {
    pub r: f64,
    pub analytic: Complex64,
    pub lattice: Complex64,
    pub abs_err: f64,
    pub rel_err: f64,
    /// Inside the trusted window `2a <= r <= Na/4`.
    pub valid: bool,
}

/// Compares the lattice kernel (scaled by `a^{-n}`) with the analytic one at
/// radii along the first axis. Radii are rounded to the nearest site.
pub fn kernel_table(grid: &Grid, kernel: &Kernel, radii: &[f64], filter: Option<SpectralFilter>) -> Result<Vec<KernelRow>> {
    let lattice = grid.lattice_kernel(|p, w| kernel.symbol(p, w), filter);
    let scale = grid.spacing().powi(grid.dim() as i32);
    let box_len = grid.spec().box_length();
    radii
        .iter()
        .map(|&r| {
            // Never the origin, where the analytic kernels are singular.
            let steps = ((r / grid.spacing()).round() as i64).max(1);
            let r_site = steps as f64 * grid.spacing();
            let site = grid.site_of_offsets(&[steps, 0, 0]);
            let lat = lattice[site] / scale;
            let (analytic, defined) = match kernel.eval(&[r_site, 0.0, 0.0]) {
                Ok(v) => (v, true),
                Err(Error::UnsupportedBranch(_)) | Err(Error::Domain { .. }) => (Complex64::new(f64::NAN, f64::NAN), false),
                Err(e) => return Err(e),
            };
            let abs_err = (lat - analytic).norm();
            Ok(KernelRow {
                r: r_site,
                analytic,
                lattice: lat,
                abs_err,
                rel_err: abs_err / analytic.norm(),
                valid: defined && r_site >= 2.0 * grid.spacing() - 1e-12 && r_site <= box_len / 4.0 + 1e-12,
            })
        })
        .collect()
}

/// Largest relative gap between the two analytic energy-kernel routes
/// (dedicated formula and the general power formula) over `radii`.
pub fn omega_kernel_routes(m: f64, n: usize, radii: &[f64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &r in radii {
        let a = omega_kernel(m, n, r)?;
        let b = (2.0 * std::f64::consts::PI).powi(-(n as i32)) * power_kernel(0.5, m, n, r)?;
        worst = worst.max(((a - b) / a).abs());
    }
    Ok(worst)
}

/// Worst `||R psi|| / ||psi||` of a residual operator over states.
fn worst_residual<F>(states: &[Vec<Complex64>], f: F) -> f64
where
    F: Fn(&[Complex64]) -> Vec<Complex64> + Sync + Send,
{
    crate::par::map_slice(states, |s| norm(&f(s)) / norm(s)).into_iter().fold(0.0, f64::max)
}

/// `([Omega, X^j] + i V^j) psi`, worst over axes and states.
pub fn heisenberg_residual(grid: &Grid, states: &[Vec<Complex64>]) -> f64 {
    (0..grid.dim())
        .map(|j| {
            let c = Action::commutator(&Action::energy(grid), &Action::position(grid, j));
            let v = Action::velocity(grid, j);
            worst_residual(states, |s| {
                let lhs = c.apply(grid, s);
                let rhs = scaled(&v.apply(grid, s), -I);
                lhs.iter().zip(&rhs).map(|(a, b)| a - b).collect()
            })
        })
        .fold(0.0, f64::max)
}

/// `([X^j, P^k] - i delta_jk) psi`, worst over axis pairs and states.
pub fn heisenberg_weyl_residual(grid: &Grid, states: &[Vec<Complex64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for j in 0..grid.dim() {
        for k in 0..grid.dim() {
            let c = Action::commutator(&Action::position(grid, j), &Action::momentum(grid, k));
            let target = if j == k { I } else { Complex64::new(0.0, 0.0) };
            worst = worst.max(worst_residual(states, |s| {
                let lhs = c.apply(grid, s);
                lhs.iter().zip(s).map(|(a, b)| a - target * b).collect()
            }));
        }
    }
    worst
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoostResiduals {
    /// Symmetrized product against the differential form.
    pub spectral: f64,
    /// `e^{i Omega t} B e^{-i Omega t} - (B - t p^j)`.
    pub time_translated: f64,
    /// `[B_j, Omega] + i p^j`.
    pub energy_commutator: f64,
    /// `[B_j, P^k] + i delta_jk Omega`.
    pub momentum_commutator: f64,
    /// `[Omega, [Omega, B_j]]`, zero in the continuum.
    pub double_commutator: f64,
    /// `[B_j, X^k] - (i/2)(X^j V^k + V^k X^j)`.
    pub noncovariance: f64,
    /// Smallest numerical rank over `(j, k)` of `[B_j, X^k] psi_s - c psi_s`
    /// with the best-fit scalar `c`. Above 1 means not a multiple of identity.
    pub noncovariance_rank: usize,
}

/// Numerical rank of a set of vectors (modified Gram-Schmidt).
pub fn numerical_rank(vectors: &[Vec<Complex64>], rel_tol: f64) -> usize {
    let scale = vectors.iter().map(|v| norm(v)).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0;
    }
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for b in &basis {
            let proj: Complex64 = b.iter().zip(&w).map(|(x, y)| x.conj() * y).sum();
            w.iter_mut().zip(b).for_each(|(x, y)| *x -= proj * y);
        }
        let n = norm(&w);
        if n > rel_tol * scale {
            basis.push(w.iter().map(|x| x / n).collect());
        }
    }
    basis.len()
}

/// Symmetrized against spectral boost, and the time-conjugated boost against
/// `B - t p^j` (that is `B + t p_j` with the lowered momentum).
pub fn boost_pair(grid: &Grid, states: &[Vec<Complex64>], t: f64) -> Result<(f64, f64)> {
    let (mut spectral_worst, mut moved_worst) = (0.0f64, 0.0f64);
    for j in 0..grid.dim() {
        let b = boost_action(grid, j)?;
        let spectral = boost_spectral_action(grid, j)?;
        let p = Action::momentum(grid, j);
        spectral_worst = spectral_worst.max(worst_residual(states, |s| {
            let x = b.apply(grid, s);
            let y = spectral.apply(grid, s);
            x.iter().zip(&y).map(|(u, v)| u - v).collect()
        }));
        let moved = Action::Product(vec![Action::phase(grid, -t), b.clone(), Action::phase(grid, t)]);
        moved_worst = moved_worst.max(worst_residual(states, |s| {
            let lhs = moved.apply(grid, s);
            let bs = b.apply(grid, s);
            let ps = p.apply(grid, s);
            lhs.iter().zip(bs.iter().zip(&ps)).map(|(l, (x, y))| l - (x - t * y)).collect()
        }));
    }
    Ok((spectral_worst, moved_worst))
}

pub fn boost_residuals(grid: &Grid, states: &[Vec<Complex64>], t: f64) -> Result<BoostResiduals> {
    let (spectral, time_translated) = boost_pair(grid, states, t)?;
    let mut out = BoostResiduals { spectral, time_translated, noncovariance_rank: usize::MAX, ..Default::default() };
    let energy = Action::energy(grid);
    for j in 0..grid.dim() {
        let b = boost_action(grid, j)?;
        let p = Action::momentum(grid, j);
        let c = Action::commutator(&b, &energy);
        out.energy_commutator = out.energy_commutator.max(worst_residual(states, |s| {
            let lhs = c.apply(grid, s);
            let ps = p.apply(grid, s);
            lhs.iter().zip(&ps).map(|(l, q)| l + I * q).collect()
        }));
        let double = Action::commutator(&energy, &Action::commutator(&energy, &b));
        out.double_commutator =
            out.double_commutator.max(worst_residual(states, |s| double.apply(grid, s)));
        let xj = Action::position(grid, j);
        for k in 0..grid.dim() {
            let ck = Action::commutator(&b, &Action::momentum(grid, k));
            let delta = if j == k { 1.0 } else { 0.0 };
            out.momentum_commutator = out.momentum_commutator.max(worst_residual(states, |s| {
                let lhs = ck.apply(grid, s);
                let ws = energy.apply(grid, s);
                lhs.iter().zip(&ws).map(|(l, w)| l + I * delta * w).collect()
            }));
            let bx = Action::commutator(&b, &Action::position(grid, k));
            let vk = Action::velocity(grid, k);
            let sym = Action::Sum(vec![
                (0.5 * I, Action::Product(vec![xj.clone(), vk.clone()])),
                (0.5 * I, Action::Product(vec![vk, xj.clone()])),
            ]);
            let images: Vec<Vec<Complex64>> = crate::par::map_slice(states, |s| bx.apply(grid, s));
            for (s, w) in states.iter().zip(&images) {
                let rhs = sym.apply(grid, s);
                let d: Vec<Complex64> = w.iter().zip(&rhs).map(|(l, r)| l - r).collect();
                out.noncovariance = out.noncovariance.max(norm(&d) / norm(s));
            }
            let num: Complex64 = states
                .iter()
                .zip(&images)
                .map(|(s, w)| s.iter().zip(w).map(|(a, b)| a.conj() * b).sum::<Complex64>())
                .sum();
            let den: f64 = states.iter().map(|s| norm(s).powi(2)).sum();
            let c_fit = num / den;
            let deviations: Vec<Vec<Complex64>> = states
                .iter()
                .zip(&images)
                .map(|(s, w)| w.iter().zip(s).map(|(a, b)| a - c_fit * b).collect())
                .collect();
            out.noncovariance_rank = out.noncovariance_rank.min(numerical_rank(&deviations, 1e-6));
        }
    }
    Ok(out)
}

/// `[M_ik, Omega] psi` worst over planes and states (needs `n >= 2`).
pub fn rotation_energy_residual(grid: &Grid, states: &[Vec<Complex64>]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for i in 0..grid.dim() {
        for k in i + 1..grid.dim() {
            let c = Action::commutator(&rotation_action(grid, i, k)?, &Action::energy(grid));
            worst = worst.max(worst_residual(states, |s| c.apply(grid, s)));
        }
    }
    Ok(worst)
}

/// Every lattice-approximate residual at one grid, keyed by check name.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LatticeResiduals {
    pub heisenberg_equation: f64,
    pub heisenberg_weyl: f64,
    pub boost: BoostResiduals,
    pub rotation_energy: Option<f64>,
}

pub fn lattice_residuals(grid: &Grid, seed: u64) -> Result<LatticeResiduals> {
    let states = random_gaussian_states(grid, STATE_COUNT, seed);
    Ok(LatticeResiduals {
        heisenberg_equation: heisenberg_residual(grid, &states),
        heisenberg_weyl: heisenberg_weyl_residual(grid, &states),
        boost: boost_residuals(grid, &states, BOOST_TIME)?,
        rotation_energy: if grid.dim() >= 2 { Some(rotation_energy_residual(grid, &states)?) } else { None },
    })
}

/// Worst deviation of `U(y) a~(x) U(y)^dagger` from `a~(x + y)` over sites
/// and the given shifts.
pub fn shift_lemma(fock: &FockSpace, shifts: &[[i64; 3]], sites: &[usize]) -> Result<f64> {
    let grid = fock.grid();
    let mut worst: f64 = 0.0;
    let id = LatticeRotation::identity(grid.dim());
    for shift in shifts {
        let g = PoincareElement::translation(grid.dim(), *shift);
        for &x in sites {
            let lhs = adjoint_on_coordinate_ladder(fock, &g, x)?;
            let moved = transform_site(grid, &id, shift, x);
            let rhs = ladder(fock, moved, Basis::Coordinate, LadderKind::Annihilate, Normalization::Noncovariant)?;
            worst = worst.max(lhs.sub(&rhs)?.max_abs());
        }
    }
    Ok(worst)
}

/// Worst deviation of `U(R) a~(x) U(R)^dagger` from `a~(Rx)` over every
/// lattice rotation and the given sites.
pub fn rotation_lemma(fock: &FockSpace, sites: &[usize]) -> Result<f64> {
    let grid = fock.grid();
    let mut worst: f64 = 0.0;
    for r in LatticeRotation::all(grid.dim()) {
        let g = PoincareElement::rotation(r);
        let u = crate::symmetry::unitary_of(fock, &g)?;
        for &x in sites {
            let a = ladder(fock, x, Basis::Coordinate, LadderKind::Annihilate, Normalization::Noncovariant)?;
            let lhs = u.conjugate(&a)?;
            let rx = transform_site(grid, &r, &[0; 3], x);
            let rhs = ladder(fock, rx, Basis::Coordinate, LadderKind::Annihilate, Normalization::Noncovariant)?;
            worst = worst.max(lhs.sub(&rhs)?.max_abs());
        }
    }
    Ok(worst)
}

/// Worst covariance deviation over elements combining all three parts.
pub fn covariance(fock: &FockSpace, seed: u64, count: usize, sites: &[usize]) -> Result<f64> {
    let grid = fock.grid();
    let rotations = LatticeRotation::all(grid.dim());
    let mut rng = TestRng::new(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let mut shift = [0i64; 3];
        for s in shift.iter_mut().take(grid.dim()) {
            *s = (rng.next_u64() % grid.points() as u64) as i64 - (grid.points() / 2) as i64;
        }
        let g = PoincareElement {
            y0: rng.uniform_in(-1.0, 1.0),
            shift,
            rotation: rotations[(rng.next_u64() % rotations.len() as u64) as usize],
            boost: [0.0; 3],
        };
        let x0 = rng.uniform_in(-1.0, 1.0);
        for &x in sites {
            worst = worst.max(covariance_check(fock, &g, x0, x)?.deviation);
        }
    }
    Ok(worst)
}

/// Time-conjugation kernel read from Fock matrix elements, compared with
/// the exact phase sum and with the analytic formula (raw lattice sum).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeKernelReport {
    /// Matrix-element extraction against the FFT phase sum.
    pub oracle_gap: f64,
    pub rows: Vec<KernelRow>,
}

pub fn time_kernel(grid: &Grid, y0: f64, radii: &[f64]) -> Result<TimeKernelReport> {
    let fock = build_fock(grid, 1)?;
    let origin = grid.site_of_offsets(&[0, 0, 0]);
    let extracted = time_kernel_from_conjugation(&fock, y0, origin)?;
    let oracle = grid.lattice_kernel(|_, w| Complex64::from_polar(1.0, -w * y0), None);
    let oracle_gap = extracted.iter().zip(&oracle).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let kernel = Kernel::new(crate::specfun::KernelKind::TimeTranslation { y0 }, grid.mass(), grid.dim())?;
    let scale = grid.spacing().powi(grid.dim() as i32);
    let box_len = grid.spec().box_length();
    let rows = radii
        .iter()
        .map(|&r| {
            let steps = (r / grid.spacing()).round() as i64;
            let r_site = steps as f64 * grid.spacing();
            let site = grid.site_of_offsets(&[steps, 0, 0]);
            let lat = extracted[site] / scale;
            let analytic = kernel.eval(&[r_site, 0.0, 0.0])?;
            let abs_err = (lat - analytic).norm();
            Ok(KernelRow {
                r: r_site,
                analytic,
                lattice: lat,
                abs_err,
                rel_err: abs_err / analytic.norm(),
                valid: r_site >= 2.0 * grid.spacing() && r_site <= box_len / 4.0 && r_site > y0.abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TimeKernelReport { oracle_gap, rows })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeDefects {
    /// Worst `|sum_x |amp|^2 - 1|` under evolution.
    pub probability: f64,
    /// Two-particle amplitude against the contraction oracle.
    pub two_particle: f64,
    /// Localized states against the Kronecker delta, both pairings.
    pub eigen_delta: f64,
}

/// Amplitude identities on a 1-D grid with `K >= 2`.
pub fn amplitude_defects(fock: &FockSpace, times: &[f64], seed: u64) -> Result<AmplitudeDefects> {
    use crate::amplitudes::{
        covariant_pairing, evolve_state, k_particle_amplitude, nwp_eigenfunction, position_amplitude,
        position_amplitudes, AmplitudeRequest,
    };
    let grid = fock.grid();
    let m = grid.mode_count();
    let mut out = AmplitudeDefects::default();
    let mut rng = TestRng::new(seed);

    let wave = crate::states::gaussian_state(grid, &[0.4, 0.0, 0.0], &[-0.2, 0.0, 0.0], 1.0);
    let one = State::one_particle(fock, &wave)?;
    for &t in times {
        let amps = position_amplitudes(fock, &evolve_state(fock, &one, t)?)?;
        let total: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        out.probability = out.probability.max((total - 1.0).abs());
    }

    let sites: Vec<usize> = (0..m).step_by((m / 8).max(1)).collect();
    for &x0 in &sites {
        let c = ladder(fock, x0, Basis::Coordinate, LadderKind::Create, Normalization::Noncovariant)?;
        let localized = State::vacuum(fock).apply(&c)?;
        let psi_x0 = nwp_eigenfunction(grid, x0)?;
        for &x in &sites {
            let delta = if x == x0 { 1.0 } else { 0.0 };
            let a = position_amplitude(fock, &localized, x)?;
            let psi_x = nwp_eigenfunction(grid, x)?;
            let pair = covariant_pairing(grid, &psi_x.values, &psi_x0.values);
            out.eigen_delta = out.eigen_delta.max((a - delta).norm()).max((pair - delta).norm());
        }
    }

    if fock.max_particles() >= 2 {
        let mut values = vec![Complex64::new(0.0, 0.0); fock.dim()];
        for i in fock.sector_range(2) {
            values[i] = rng.complex_normal();
        }
        let psi = State::new(values).normalized()?;
        for t in times {
            for _ in 0..4 {
                let x1 = (rng.next_u64() % m as u64) as usize;
                let x2 = (rng.next_u64() % m as u64) as usize;
                let req = AmplitudeRequest { state: psi.clone(), positions: vec![x1, x2], t: *t };
                let got = k_particle_amplitude(fock, &req)?.value;
                out.two_particle = out.two_particle.max((got - two_particle_contraction(fock, &psi, *t, x1, x2)).norm());
            }
        }
    }
    Ok(out)
}

/// Brute-force `(2!)^{-1/2} <0|phi1(t,x1) phi1(t,x2)|psi>` from the symmetric
/// momentum tensor and explicit plane waves.
pub fn two_particle_contraction(fock: &FockSpace, psi: &State, t: f64, x1: usize, x2: usize) -> Complex64 {
    let grid = fock.grid();
    let m = grid.mode_count();
    let mut tensor = vec![Complex64::new(0.0, 0.0); m * m];
    for idx in fock.sector_range(2) {
        let modes = fock.modes(idx);
        let (p, q) = (modes[0] as usize, modes[1] as usize);
        let c = psi.values()[idx];
        if p == q {
            tensor[p * m + p] += c * 2f64.sqrt();
        } else {
            tensor[p * m + q] += c;
            tensor[q * m + p] += c;
        }
    }
    let wave = |x: usize| -> Vec<Complex64> {
        let xv = grid.position(x);
        (0..m)
            .map(|p| {
                let angle = crate::grid::dot(&grid.momentum(p), &xv) - grid.omega()[p] * t;
                Complex64::from_polar(1.0 / (m as f64).sqrt(), angle)
            })
            .collect()
    };
    let (f1, f2) = (wave(x1), wave(x2));
    let mut sum = Complex64::new(0.0, 0.0);
    for p in 0..m {
        for q in 0..m {
            sum += f1[p] * f2[q] * tensor[p * m + q];
        }
    }
    sum / 2f64.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_of_dependent_vectors() {
        let a = vec![ONE, Complex64::new(0.0, 0.0)];
        let b = vec![Complex64::new(2.0, 1.0), Complex64::new(0.0, 0.0)];
        let c = vec![Complex64::new(0.0, 0.0), I];
        assert_eq!(numerical_rank(&[a.clone(), b.clone()], 1e-12), 1);
        assert_eq!(numerical_rank(&[a, b, c], 1e-12), 2);
        assert_eq!(numerical_rank(&[vec![Complex64::new(0.0, 0.0)]], 1e-12), 0);
    }

    #[test]
    fn ladder_pair_sampling() {
        assert_eq!(ladder_pairs(4, 100, 1).len(), 16);
        let s = ladder_pairs(64, 50, 1);
        assert_eq!(s.len(), 50);
        assert!(s.iter().any(|(p, q)| p == q));
        assert_eq!(s, ladder_pairs(64, 50, 1));
    }

    #[test]
    fn random_hermitian_is_hermitian() {
        let mut rng = TestRng::new(1);
        let a = random_hermitian(&mut rng, 5);
        assert_eq!(a, a.adjoint());
    }

    #[test]
    fn small_grid_exact_suite() {
        let grid = Grid::new(GridSpec::new(1, 8, 0.5, 1.0)).unwrap();
        let fock = build_fock(&grid, 2).unwrap();
        assert!(dgamma_homomorphism(&fock, 3, 7).unwrap() <= 1e-10);
        let ccr = ladder_ccr(&fock, &ladder_pairs(8, 64, 7)).unwrap();
        assert!(ccr.momentum <= 1e-12 && ccr.coordinate <= 1e-12 && ccr.adjointness == 0.0);
        assert!(coordinate_ladder_paths(&fock, &[0, 3]).unwrap() <= 1e-12);
        assert!(second_quantized_position(&fock, 0).unwrap() <= 1e-12);
        assert!(number_conservation(&fock, 3).unwrap() <= 1e-12);
        let amp = amplitude_defects(&fock, &[0.0, 0.5], 7).unwrap();
        assert!(amp.probability <= 1e-12 && amp.two_particle <= 1e-10 && amp.eigen_delta <= 1e-12);
    }
}
