//! Position-probability amplitudes built from the Newton-Wigner-Pryce
//! localized states, and the configuration-to-coordinate transformation.
//!
//! Amplitudes use the noncovariant normalization, in which the coordinate
//! ladders are orthonormal. Covariant wave functions `Phi = sqrt(2 omega) phi`
//! reproduce the same numbers through the pairing
//! `sum_p (2 omega_p)^{-1} conj(Psi_x(p)) Phi(p)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{FockSpace, State};
use crate::grid::{dot, Basis, FieldVector, Grid};
use crate::symmetry::phi1_field;

fn check_site(grid: &Grid, site: usize) -> Result<()> {
    if site >= grid.mode_count() {
        return Err(Error::IndexOutOfRange(format!("site {site} of {}", grid.mode_count())));
    }
    Ok(())
}

/// Localized eigenfunction `M^{-1/2} e^{-i p.x} sqrt(2 omega_p)` (momentum basis).
pub fn nwp_eigenfunction(grid: &Grid, site: usize) -> Result<FieldVector> {
    check_site(grid, site)?;
    let s = 1.0 / (grid.mode_count() as f64).sqrt();
    let x = grid.position(site);
    let values = (0..grid.mode_count())
        .map(|p| Complex64::from_polar(s * (2.0 * grid.omega()[p]).sqrt(), -dot(&grid.momentum(p), &x)))
        .collect();
    Ok(FieldVector::new(Basis::Momentum, values))
}

/// `sum_p (2 omega_p)^{-1} conj(a_p) b_p`.
pub fn covariant_pairing(grid: &Grid, a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter()
        .zip(b)
        .zip(grid.omega())
        .map(|((x, y), w)| x.conj() * y / (2.0 * w))
        .sum()
}

fn require_one_particle(fock: &FockSpace, state: &State) -> Result<()> {
    match state.particle_number(fock) {
        Some(1) => Ok(()),
        other => Err(Error::ParticleNumber(format!(
            "position amplitudes need a one-particle state, found {}",
            other.map_or("a mixture of sectors".to_string(), |k| format!("{k} particles"))
        ))),
    }
}

/// `<0| a~(x) |state>` for a one-particle state.
pub fn position_amplitude(fock: &FockSpace, state: &State, site: usize) -> Result<Complex64> {
    check_site(fock.grid(), site)?;
    require_one_particle(fock, state)?;
    let grid = fock.grid();
    let s = 1.0 / (grid.mode_count() as f64).sqrt();
    let x = grid.position(site);
    Ok(state
        .one_particle_wave(fock)
        .iter()
        .enumerate()
        .map(|(p, v)| v * Complex64::from_polar(s, dot(&grid.momentum(p), &x)))
        .sum())
}

/// Amplitudes at every site at once (one inverse DFT).
pub fn position_amplitudes(fock: &FockSpace, state: &State) -> Result<Vec<Complex64>> {
    require_one_particle(fock, state)?;
    Ok(fock.grid().to_coordinate(&state.one_particle_wave(fock)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeRequest {
    pub state: State,
    pub positions: Vec<usize>,
    pub t: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeResult {
    pub value: Complex64,
    /// Set when the state has weight outside the `k`-particle sector; the
    /// amplitude only sees the `k`-particle part (zero if there is none).
    pub sector_mismatch: bool,
}

/// `(k!)^{-1/2} <0| phi1(t, x_1) ... phi1(t, x_k) |state>`.
pub fn k_particle_amplitude(fock: &FockSpace, req: &AmplitudeRequest) -> Result<AmplitudeResult> {
    let k = req.positions.len();
    if k > fock.max_particles() {
        return Err(Error::ParticleNumber(format!(
            "{k} positions exceed the truncation K = {}",
            fock.max_particles()
        )));
    }
    if req.state.values().len() != fock.dim() {
        return Err(Error::DimensionMismatch { expected: fock.dim(), found: req.state.values().len() });
    }
    for &x in &req.positions {
        check_site(fock.grid(), x)?;
    }
    // The fields are annihilators and commute, so a canonical order makes the
    // result bitwise symmetric in the positions.
    let mut order = req.positions.clone();
    order.sort_unstable();
    let mut v = req.state.values().to_vec();
    for &x in order.iter().rev() {
        v = phi1_field(fock, req.t, x)?.apply(&v)?;
    }
    let factorial: f64 = (1..=k).map(|i| i as f64).product();
    let weights = req.state.sector_weights(fock);
    let total: f64 = weights.iter().sum();
    let outside = total - weights[k];
    Ok(AmplitudeResult {
        value: v[0] / factorial.sqrt(),
        sector_mismatch: outside > 1e-24 * total.max(f64::MIN_POSITIVE),
    })
}

/// `exp(-i t P0) |state>`: each basis state picks up `e^{-i t E}`.
pub fn evolve_state(fock: &FockSpace, state: &State, t: f64) -> Result<State> {
    if !t.is_finite() {
        return Err(crate::error::domain("evolve_state", format!("non-finite time {t}")));
    }
    if state.values().len() != fock.dim() {
        return Err(Error::DimensionMismatch { expected: fock.dim(), found: state.values().len() });
    }
    let omega = fock.grid().omega();
    let values = crate::par::map_range(fock.dim(), |r| {
        let e: f64 = fock.modes(r).iter().map(|&p| omega[p as usize]).sum();
        state.values()[r] * Complex64::from_polar(1.0, -t * e)
    });
    Ok(State::new(values))
}

/// `K(r) = M^{-1/2} sum_p (2 omega_p)^{-1/2} e^{i (omega_p x0 + p.r)}`,
/// indexed by the separation site `r`.
pub fn config_to_coordinate_kernel(grid: &Grid, x0: f64) -> Vec<Complex64> {
    let symbol: Vec<Complex64> = grid
        .omega()
        .iter()
        .map(|&w| Complex64::from_polar((2.0 * w).powf(-0.5), w * x0))
        .collect();
    grid.to_coordinate(&symbol)
}

/// Kernel value at a single separation site.
pub fn config_to_coordinate_kernel_at(grid: &Grid, x0: f64, separation: usize) -> Result<Complex64> {
    check_site(grid, separation)?;
    Ok(config_to_coordinate_kernel(grid, x0)[separation])
}
