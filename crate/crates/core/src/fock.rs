//! Bosonic Fock space truncated at total particle number `K`.
//!
//! A basis state is the sorted list of occupied modes (with repetition), so
//! `[2, 2, 5]` is `a_2^dagger^2 a_5^dagger |0> / sqrt(2)`. States are ordered
//! by sector, then lexicographically by mode list; the vacuum has index 0.
//! Operators are CSR matrices assembled row by row, so parallel assembly
//! produces bitwise identical results.

use std::collections::HashMap;
use std::ops::Range;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{dot, Basis, Grid};
use crate::onebody::{change_basis, OneBodyOp};
use crate::par;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Default refusal threshold for the Fock dimension.
pub const DEFAULT_BUDGET: usize = 2_000_000;

/// `sum_{k=0..K} C(M + k - 1, k)`, saturating.
pub fn fock_dimension(modes: usize, max_particles: usize) -> u128 {
    let mut total: u128 = 1;
    let mut term: u128 = 1;
    for k in 1..=max_particles as u128 {
        term = term.saturating_mul(modes as u128 + k - 1) / k;
        total = total.saturating_add(term);
    }
    total
}

#[derive(Clone, Debug)]
pub struct FockSpace {
    grid: Grid,
    max_particles: usize,
    states: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
    sector_start: Vec<usize>,
}

pub fn build_fock(grid: &Grid, max_particles: usize) -> Result<FockSpace> {
    build_fock_with_budget(grid, max_particles, DEFAULT_BUDGET)
}

pub fn build_fock_with_budget(grid: &Grid, max_particles: usize, budget: usize) -> Result<FockSpace> {
    let modes = grid.mode_count();
    let dim = fock_dimension(modes, max_particles);
    if dim > budget as u128 {
        return Err(Error::Capacity { dim, budget });
    }
    let mut states: Vec<Vec<u32>> = Vec::with_capacity(dim as usize);
    let mut sector_start = Vec::with_capacity(max_particles + 2);
    for k in 0..=max_particles {
        sector_start.push(states.len());
        enumerate_sector(modes as u32, k, &mut states);
    }
    sector_start.push(states.len());
    let index = states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
    Ok(FockSpace { grid: grid.clone(), max_particles, states, index, sector_start })
}

/// Nondecreasing length-`k` sequences over `0..modes`, in lexicographic order.
fn enumerate_sector(modes: u32, k: usize, out: &mut Vec<Vec<u32>>) {
    if k == 0 {
        out.push(Vec::new());
        return;
    }
    if modes == 0 {
        return;
    }
    let mut cur = vec![0u32; k];
    loop {
        out.push(cur.clone());
        // Advance the rightmost entry that can still grow.
        let mut pos = k;
        while pos > 0 && cur[pos - 1] == modes - 1 {
            pos -= 1;
        }
        if pos == 0 {
            return;
        }
        let v = cur[pos - 1] + 1;
        for c in &mut cur[pos - 1..] {
            *c = v;
        }
    }
}

fn count(modes: &[u32], p: u32) -> usize {
    let lo = modes.partition_point(|&m| m < p);
    let hi = modes.partition_point(|&m| m <= p);
    hi - lo
}

fn with_added(modes: &[u32], p: u32) -> Vec<u32> {
    let mut v = Vec::with_capacity(modes.len() + 1);
    let at = modes.partition_point(|&m| m <= p);
    v.extend_from_slice(&modes[..at]);
    v.push(p);
    v.extend_from_slice(&modes[at..]);
    v
}

fn with_removed(modes: &[u32], p: u32) -> Vec<u32> {
    let at = modes.partition_point(|&m| m < p);
    let mut v = modes.to_vec();
    v.remove(at);
    v
}

/// Distinct modes of a sorted list with their multiplicities.
fn runs(modes: &[u32]) -> Vec<(u32, usize)> {
    let mut out: Vec<(u32, usize)> = Vec::new();
    for &m in modes {
        match out.last_mut() {
            Some((p, c)) if *p == m => *c += 1,
            _ => out.push((m, 1)),
        }
    }
    out
}

impl FockSpace {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn max_particles(&self) -> usize {
        self.max_particles
    }

    pub fn mode_count(&self) -> usize {
        self.grid.mode_count()
    }

    /// Sorted occupied-mode list of a basis state.
    pub fn modes(&self, idx: usize) -> &[u32] {
        &self.states[idx]
    }

    pub fn index_of(&self, modes: &[u32]) -> Option<usize> {
        self.index.get(modes).copied()
    }

    /// Index of the state with the given occupation numbers.
    pub fn index_of_occupation(&self, occupation: &[u32]) -> Option<usize> {
        let mut modes = Vec::new();
        for (p, &n) in occupation.iter().enumerate() {
            modes.extend(std::iter::repeat_n(p as u32, n as usize));
        }
        self.index_of(&modes)
    }

    pub fn occupation(&self, idx: usize) -> Vec<u32> {
        let mut n = vec![0u32; self.mode_count()];
        for &m in &self.states[idx] {
            n[m as usize] += 1;
        }
        n
    }

    pub fn sector_of(&self, idx: usize) -> usize {
        self.states[idx].len()
    }

    pub fn sector_range(&self, k: usize) -> Range<usize> {
        if k > self.max_particles {
            return self.dim()..self.dim();
        }
        self.sector_start[k]..self.sector_start[k + 1]
    }

    /// Index of the one-particle state in `mode`.
    pub fn one_particle(&self, mode: usize) -> Option<usize> {
        if self.max_particles == 0 || mode >= self.mode_count() {
            return None;
        }
        Some(self.sector_start[1] + mode)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpKind {
    Ladder,
    Generator,
    Unitary,
    General,
}

thread_local! {
    static SCRATCH: std::cell::RefCell<(Vec<Option<Complex64>>, Vec<u32>)> = const { std::cell::RefCell::new((Vec::new(), Vec::new())) };
}

/// Sparse operator on a Fock space (CSR, columns sorted within each row).
#[derive(Clone, Debug, PartialEq)]
pub struct FockOp {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<Complex64>,
    kind: OpKind,
}

impl FockOp {
    /// Assembles from per-row entry lists; duplicates are summed in list
    /// order and exact zeros dropped.
    pub fn from_rows(dim: usize, rows: Vec<Vec<(u32, Complex64)>>, kind: OpKind) -> FockOp {
        let rows = par::map_slice(&rows, |r| {
            let mut r = r.clone();
            // Stable: duplicates keep their list order when summed.
            r.sort_by_key(|e| e.0);
            let mut merged: Vec<(u32, Complex64)> = Vec::with_capacity(r.len());
            for (c, v) in r {
                match merged.last_mut() {
                    Some((lc, lv)) if *lc == c => *lv += v,
                    _ => merged.push((c, v)),
                }
            }
            merged.retain(|e| e.1 != ZERO);
            merged
        });
        FockOp::from_clean_rows(dim, rows, kind)
    }

    /// Rows already in canonical form (sorted, no duplicates or zeros).
    fn from_clean_rows(dim: usize, rows: Vec<Vec<(u32, Complex64)>>, kind: OpKind) -> FockOp {
        let mut row_ptr = Vec::with_capacity(dim + 1);
        row_ptr.push(0);
        let nnz: usize = rows.iter().map(Vec::len).sum();
        let mut cols = Vec::with_capacity(nnz);
        let mut vals = Vec::with_capacity(nnz);
        for r in rows {
            for (c, v) in r {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        FockOp { dim, row_ptr, cols, vals, kind }
    }

    pub fn identity(dim: usize) -> FockOp {
        FockOp::diagonal(&vec![ONE; dim], OpKind::Unitary)
    }

    pub fn diagonal(values: &[Complex64], kind: OpKind) -> FockOp {
        let rows = values.iter().enumerate().map(|(i, &v)| vec![(i as u32, v)]).collect();
        FockOp::from_rows(values.len(), rows, kind)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> OpKind {
        self.kind
    }

    pub fn with_kind(mut self, kind: OpKind) -> FockOp {
        self.kind = kind;
        self
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().map(|&c| c as usize).zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[r.clone()].binary_search(&(j as u32)) {
            Ok(k) => self.vals[r.start + k],
            Err(_) => ZERO,
        }
    }

    fn check_dim(&self, other: usize) -> Result<()> {
        if self.dim != other {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other });
        }
        Ok(())
    }

    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_dim(v.len())?;
        Ok(par::map_range(self.dim, |i| self.row(i).map(|(c, a)| a * v[c]).sum()))
    }

    /// Sparse product `self * other`.
    ///
    /// Each row is accumulated in a dense scratch row (per thread), in the
    /// fixed order of `self`'s columns, so the result is deterministic.
    pub fn mul(&self, other: &FockOp) -> Result<FockOp> {
        self.check_dim(other.dim)?;
        let dim = self.dim;
        let rows = par::map_range(dim, |i| {
            SCRATCH.with(|cell| {
                let mut scratch = cell.borrow_mut();
                let (acc, touched) = &mut *scratch;
                if acc.len() < dim {
                    acc.resize(dim, None);
                }
                touched.clear();
                for (k, a) in self.row(i) {
                    for (j, b) in other.row(k) {
                        match &mut acc[j] {
                            Some(v) => *v += a * b,
                            slot => {
                                *slot = Some(a * b);
                                touched.push(j as u32);
                            }
                        }
                    }
                }
                touched.sort_unstable();
                let mut row = Vec::with_capacity(touched.len());
                for &j in touched.iter() {
                    let v = acc[j as usize].take().expect("touched slot");
                    if v != ZERO {
                        row.push((j, v));
                    }
                }
                row
            })
        });
        let kind = if self.kind == OpKind::Unitary && other.kind == OpKind::Unitary {
            OpKind::Unitary
        } else {
            OpKind::General
        };
        Ok(FockOp::from_clean_rows(dim, rows, kind))
    }

    /// `self + s * other`, merging the sorted rows.
    pub fn add_scaled(&self, other: &FockOp, s: Complex64) -> Result<FockOp> {
        self.check_dim(other.dim)?;
        let rows = par::map_range(self.dim, |i| {
            let mut out = Vec::new();
            let mut a = self.row(i).peekable();
            let mut b = other.row(i).map(|(c, v)| (c, s * v)).peekable();
            loop {
                let (c, v) = match (a.peek(), b.peek()) {
                    (Some(&(ca, va)), Some(&(cb, vb))) if ca == cb => {
                        a.next();
                        b.next();
                        (ca, va + vb)
                    }
                    (Some(&(ca, _)), Some(&(cb, _))) if cb < ca => b.next().expect("peeked"),
                    (Some(_), _) => a.next().expect("peeked"),
                    (None, Some(_)) => b.next().expect("peeked"),
                    (None, None) => break,
                };
                if v != ZERO {
                    out.push((c as u32, v));
                }
            }
            out
        });
        let kind = if self.kind == other.kind { self.kind } else { OpKind::General };
        Ok(FockOp::from_clean_rows(self.dim, rows, kind))
    }

    pub fn sub(&self, other: &FockOp) -> Result<FockOp> {
        self.add_scaled(other, -ONE)
    }

    pub fn scale(&self, s: Complex64) -> FockOp {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn adjoint(&self) -> FockOp {
        let mut rows: Vec<Vec<(u32, Complex64)>> = vec![Vec::new(); self.dim];
        for i in 0..self.dim {
            for (c, v) in self.row(i) {
                rows[c].push((i as u32, v.conj()));
            }
        }
        // Rows fill in increasing column order.
        FockOp::from_clean_rows(self.dim, rows, self.kind)
    }

    pub fn frobenius(&self) -> f64 {
        crate::grid::norm(&self.vals)
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `U U^dagger`-style product `self * inner * self^dagger`.
    pub fn conjugate(&self, inner: &FockOp) -> Result<FockOp> {
        self.mul(inner)?.mul(&self.adjoint())
    }

    /// True when every nonzero entry connects states of equal particle number.
    pub fn conserves_particle_number(&self, fock: &FockSpace) -> bool {
        (0..self.dim).all(|i| self.row(i).all(|(c, _)| fock.sector_of(c) == fock.sector_of(i)))
    }

    /// Largest `|self_{ij} - s delta_{ij}|` over rows and columns whose
    /// particle number is below `max_sector`.
    pub fn deviation_from_scalar_below(&self, fock: &FockSpace, s: Complex64, max_sector: usize) -> f64 {
        let limit = if max_sector > fock.max_particles() {
            fock.dim()
        } else {
            fock.sector_range(max_sector).start
        };
        (0..limit)
            .map(|i| {
                let mut worst: f64 = 0.0;
                let mut saw_diag = false;
                for (c, v) in self.row(i) {
                    if c >= limit {
                        continue;
                    }
                    let target = if c == i {
                        saw_diag = true;
                        s
                    } else {
                        ZERO
                    };
                    worst = worst.max((v - target).norm());
                }
                if !saw_diag {
                    worst = worst.max(s.norm());
                }
                worst
            })
            .fold(0.0, f64::max)
    }

    /// Dense copy, for small spaces and tests.
    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        (0..self.dim)
            .map(|i| {
                let mut r = vec![ZERO; self.dim];
                for (c, v) in self.row(i) {
                    r[c] = v;
                }
                r
            })
            .collect()
    }
}

/// `AB - BA`.
pub fn fock_commutator(a: &FockOp, b: &FockOp) -> Result<FockOp> {
    a.mul(b)?.sub(&b.mul(a)?)
}

/// Complex vector on the Fock basis.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    values: Vec<Complex64>,
}

impl State {
    pub fn new(values: Vec<Complex64>) -> State {
        State { values }
    }

    pub fn vacuum(fock: &FockSpace) -> State {
        State::basis(fock, 0)
    }

    pub fn basis(fock: &FockSpace, idx: usize) -> State {
        let mut v = vec![ZERO; fock.dim()];
        v[idx] = ONE;
        State { values: v }
    }

    /// One-particle state with the given momentum-basis wave function.
    pub fn one_particle(fock: &FockSpace, wave: &[Complex64]) -> Result<State> {
        if wave.len() != fock.mode_count() {
            return Err(Error::DimensionMismatch { expected: fock.mode_count(), found: wave.len() });
        }
        if fock.max_particles() == 0 {
            return Err(Error::ParticleNumber("the truncation K = 0 has no one-particle sector".into()));
        }
        let mut v = vec![ZERO; fock.dim()];
        let start = fock.sector_range(1).start;
        v[start..start + wave.len()].copy_from_slice(wave);
        Ok(State { values: v })
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn norm(&self) -> f64 {
        crate::grid::norm(&self.values)
    }

    pub fn normalized(&self) -> Result<State> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidNormalization(format!("cannot normalize a state of norm {n}")));
        }
        Ok(State { values: self.values.iter().map(|v| v / n).collect() })
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &State) -> Complex64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn apply(&self, op: &FockOp) -> Result<State> {
        Ok(State { values: op.apply(&self.values)? })
    }

    /// Squared norm in each particle-number sector.
    pub fn sector_weights(&self, fock: &FockSpace) -> Vec<f64> {
        (0..=fock.max_particles())
            .map(|k| self.values[fock.sector_range(k)].iter().map(|z| z.norm_sqr()).sum())
            .collect()
    }

    /// The particle number if the state lies in a single sector.
    pub fn particle_number(&self, fock: &FockSpace) -> Option<usize> {
        let w = self.sector_weights(fock);
        let total: f64 = w.iter().sum();
        if total == 0.0 {
            return None;
        }
        let occupied: Vec<usize> = (0..w.len()).filter(|&k| w[k] > 1e-24 * total).collect();
        (occupied.len() == 1).then(|| occupied[0])
    }

    /// Momentum-basis wave function of the one-particle component.
    pub fn one_particle_wave(&self, fock: &FockSpace) -> Vec<Complex64> {
        self.values[fock.sector_range(1)].to_vec()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LadderKind {
    Annihilate,
    Create,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    Noncovariant,
    Covariant,
}

/// `sum_p c_p a_p` or `sum_p c_p a_p^dagger` for a list of `(mode, c_p)`.
pub fn ladder_combination(fock: &FockSpace, coeffs: &[(u32, Complex64)], kind: LadderKind) -> FockOp {
    let top = fock.max_particles();
    let rows = par::map_range(fock.dim(), |r| {
        let modes = fock.modes(r);
        let mut row = Vec::new();
        match kind {
            // <t| a_p |t + p> = sqrt(n_p(t) + 1)
            LadderKind::Annihilate if modes.len() < top => {
                for &(p, c) in coeffs {
                    let src = with_added(modes, p);
                    let amp = ((count(modes, p) + 1) as f64).sqrt();
                    row.push((fock.index[&src] as u32, c * amp));
                }
            }
            LadderKind::Annihilate => {}
            // <t| a_p^dagger |t - p> = sqrt(n_p(t))
            LadderKind::Create => {
                let lookup: HashMap<u32, Complex64> = coeffs.iter().copied().collect();
                for (p, n) in runs(modes) {
                    if let Some(c) = lookup.get(&p) {
                        let src = with_removed(modes, p);
                        row.push((fock.index[&src] as u32, c * (n as f64).sqrt()));
                    }
                }
            }
        }
        row
    });
    FockOp::from_rows(fock.dim(), rows, OpKind::Ladder)
}

/// Coefficients of `a~(x) = M^{-1/2} sum_p e^{i p.x} a_p`.
pub fn coordinate_coefficients(grid: &Grid, site: usize) -> Vec<(u32, Complex64)> {
    let s = 1.0 / (grid.mode_count() as f64).sqrt();
    let x = grid.position(site);
    (0..grid.mode_count())
        .map(|p| (p as u32, Complex64::from_polar(s, dot(&grid.momentum(p), &x))))
        .collect()
}

/// Ladder operator for one momentum mode or one lattice site.
///
/// Coordinate ladders are the DFT combinations of noncovariant momentum
/// ladders; the covariant rescaling by `sqrt(2 omega)` is only defined for
/// momentum modes.
pub fn ladder(
    fock: &FockSpace,
    mode: usize,
    basis: Basis,
    kind: LadderKind,
    normalization: Normalization,
) -> Result<FockOp> {
    let grid = fock.grid();
    if mode >= grid.mode_count() {
        return Err(Error::IndexOutOfRange(format!(
            "mode {mode} of {} lattice modes",
            grid.mode_count()
        )));
    }
    let mut coeffs = match basis {
        Basis::Momentum => vec![(mode as u32, ONE)],
        Basis::Coordinate => {
            if normalization == Normalization::Covariant {
                return Err(Error::InvalidNormalization(
                    "coordinate ladders exist only in the noncovariant normalization".into(),
                ));
            }
            coordinate_coefficients(grid, mode)
        }
    };
    if normalization == Normalization::Covariant {
        coeffs[0].1 *= (2.0 * grid.omega()[mode]).sqrt();
    }
    if kind == LadderKind::Create {
        coeffs.iter_mut().for_each(|c| c.1 = c.1.conj());
    }
    Ok(ladder_combination(fock, &coeffs, kind))
}

/// Second quantization `sum_{ij} A_ij a_i^dagger a_j`. Coordinate-basis
/// operators are first conjugated to the momentum basis, which is the same
/// as pairing them with coordinate ladders.
pub fn dgamma(fock: &FockSpace, op: &OneBodyOp) -> Result<FockOp> {
    let m = fock.mode_count();
    if op.size() != m {
        return Err(Error::DimensionMismatch { expected: m, found: op.size() });
    }
    let op = match op.basis() {
        Basis::Momentum => op.clone(),
        Basis::Coordinate => change_basis(op, Basis::Momentum, fock.grid())?,
    };
    let a = op.matrix();
    let rows = par::map_range(fock.dim(), |r| {
        let modes = fock.modes(r);
        let mut row = Vec::new();
        for (i, n_i) in runs(modes) {
            let rest = with_removed(modes, i);
            for (j, &aij) in a.row(i as usize).iter().enumerate() {
                if aij == ZERO {
                    continue;
                }
                let src = with_added(&rest, j as u32);
                // One square root keeps the diagonal n_i exact.
                let amp = ((n_i * (count(&rest, j as u32) + 1)) as f64).sqrt();
                row.push((fock.index[&src] as u32, aij * amp));
            }
        }
        row
    });
    Ok(FockOp::from_rows(fock.dim(), rows, OpKind::Generator))
}

/// `dGamma(diag(d))` for an operator diagonal in momentum: `sum_p d_p n_p`.
pub fn dgamma_diagonal(fock: &FockSpace, diag: &[Complex64]) -> Result<FockOp> {
    if diag.len() != fock.mode_count() {
        return Err(Error::DimensionMismatch { expected: fock.mode_count(), found: diag.len() });
    }
    let values = par::map_range(fock.dim(), |r| fock.modes(r).iter().map(|&p| diag[p as usize]).sum());
    Ok(FockOp::diagonal(&values, OpKind::Generator))
}

/// Total particle number, diagonal in the occupation basis.
pub fn number_op(fock: &FockSpace) -> FockOp {
    let values: Vec<Complex64> =
        (0..fock.dim()).map(|r| Complex64::new(fock.sector_of(r) as f64, 0.0)).collect();
    FockOp::diagonal(&values, OpKind::Generator)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::onebody::{commutator, position_op, CMatrix};
    use crate::states::TestRng;

    fn grid1(points: usize) -> Grid {
        Grid::new(GridSpec::new(1, points, 0.5, 1.0)).unwrap()
    }

    fn random_hermitian(rng: &mut TestRng, m: usize) -> CMatrix {
        let a = CMatrix::from_rows(m, m, (0..m * m).map(|_| rng.complex_normal()).collect()).unwrap();
        a.add(&a.adjoint()).unwrap()
    }

    /// Brute force: every multiset of size <= K, by recursion over modes.
    fn brute_count(modes: usize, k: usize) -> usize {
        fn rec(modes: usize, left: usize) -> usize {
            if modes == 0 {
                return 1;
            }
            (0..=left).map(|n| rec(modes - 1, left - n)).sum()
        }
        rec(modes, k)
    }

    #[test]
    fn dimensions_by_stars_and_bars() {
        assert_eq!(fock_dimension(2, 2), 6);
        assert_eq!(fock_dimension(7, 0), 1);
        assert_eq!(fock_dimension(4, 3), 35);
        for m in 1..6 {
            for k in 0..5 {
                assert_eq!(fock_dimension(m, k) as usize, brute_count(m, k));
            }
        }
        let fock = build_fock(&grid1(4), 3).unwrap();
        assert_eq!(fock.dim(), 35);
    }

    #[test]
    fn index_maps_are_inverse_and_ordered() {
        let fock = build_fock(&grid1(4), 3).unwrap();
        for i in 0..fock.dim() {
            assert_eq!(fock.index_of(fock.modes(i)), Some(i));
            assert_eq!(fock.index_of_occupation(&fock.occupation(i)), Some(i));
        }
        for w in (0..fock.dim()).collect::<Vec<_>>().windows(2) {
            let (a, b) = (fock.modes(w[0]), fock.modes(w[1]));
            assert!(a.len() < b.len() || (a.len() == b.len() && a < b));
        }
        assert_eq!(fock.modes(0), &[] as &[u32]);
        assert_eq!(fock.sector_range(1), 1..5);
    }

    #[test]
    fn capacity_error_reports_dimension() {
        let grid = grid1(64);
        match build_fock_with_budget(&grid, 3, 1000) {
            Err(Error::Capacity { dim, budget }) => {
                assert_eq!(dim, fock_dimension(64, 3));
                assert_eq!(budget, 1000);
            }
            other => panic!("expected capacity error, got {other:?}"),
        }
    }

    #[test]
    fn momentum_ccr_exact_below_top_sector() {
        let fock = build_fock(&grid1(8), 2).unwrap();
        let m = fock.mode_count();
        let ann: Vec<FockOp> = (0..m)
            .map(|p| ladder(&fock, p, Basis::Momentum, LadderKind::Annihilate, Normalization::Noncovariant).unwrap())
            .collect();
        let cre: Vec<FockOp> = (0..m)
            .map(|p| ladder(&fock, p, Basis::Momentum, LadderKind::Create, Normalization::Noncovariant).unwrap())
            .collect();
        for p in 0..m {
            for q in 0..m {
                let c = fock_commutator(&ann[p], &cre[q]).unwrap();
                let s = if p == q { ONE } else { ZERO };
                assert!(c.deviation_from_scalar_below(&fock, s, 2) <= 1e-12);
                let aa = fock_commutator(&ann[p], &ann[q]).unwrap();
                assert!(aa.max_abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn coordinate_ccr_exact_below_top_sector() {
        let fock = build_fock(&grid1(8), 2).unwrap();
        let lad = |x, k| ladder(&fock, x, Basis::Coordinate, k, Normalization::Noncovariant).unwrap();
        for x in 0..8 {
            for y in 0..8 {
                let c = fock_commutator(&lad(x, LadderKind::Annihilate), &lad(y, LadderKind::Create)).unwrap();
                let s = if x == y { ONE } else { ZERO };
                assert!(c.deviation_from_scalar_below(&fock, s, 2) <= 1e-12);
            }
        }
    }

    #[test]
    fn annihilator_kills_vacuum_and_adjointness_is_exact() {
        let fock = build_fock(&grid1(6), 3).unwrap();
        for basis in [Basis::Momentum, Basis::Coordinate] {
            for p in 0..6 {
                let a = ladder(&fock, p, basis, LadderKind::Annihilate, Normalization::Noncovariant).unwrap();
                let c = ladder(&fock, p, basis, LadderKind::Create, Normalization::Noncovariant).unwrap();
                let out = State::vacuum(&fock).apply(&a).unwrap();
                assert_eq!(out.norm(), 0.0);
                assert_eq!(c, a.adjoint());
            }
        }
    }

    #[test]
    fn covariant_ladder_is_rescaled() {
        let fock = build_fock(&grid1(8), 1).unwrap();
        let p = 3;
        let cov = ladder(&fock, p, Basis::Momentum, LadderKind::Create, Normalization::Covariant).unwrap();
        let plain = ladder(&fock, p, Basis::Momentum, LadderKind::Create, Normalization::Noncovariant).unwrap();
        let s = (2.0 * fock.grid().omega()[p]).sqrt();
        assert!(cov.sub(&plain.scale(Complex64::new(s, 0.0))).unwrap().max_abs() < 1e-15);
        assert!(matches!(
            ladder(&fock, 0, Basis::Coordinate, LadderKind::Create, Normalization::Covariant),
            Err(Error::InvalidNormalization(_))
        ));
        assert!(ladder(&fock, 8, Basis::Momentum, LadderKind::Create, Normalization::Noncovariant).is_err());
    }

    #[test]
    fn coordinate_ladders_two_paths() {
        let fock = build_fock(&grid1(8), 2).unwrap();
        let grid = fock.grid();
        for x in 0..8 {
            let direct = ladder(&fock, x, Basis::Coordinate, LadderKind::Annihilate, Normalization::Noncovariant).unwrap();
            let mut sum = FockOp::from_rows(fock.dim(), vec![Vec::new(); fock.dim()], OpKind::Ladder);
            for (p, c) in coordinate_coefficients(grid, x) {
                let a = ladder(&fock, p as usize, Basis::Momentum, LadderKind::Annihilate, Normalization::Noncovariant)
                    .unwrap();
                sum = sum.add_scaled(&a, c).unwrap();
            }
            assert!(direct.sub(&sum).unwrap().max_abs() <= 1e-12);
        }
    }

    #[test]
    fn dgamma_identity_is_number_operator() {
        let fock = build_fock(&grid1(6), 3).unwrap();
        let id = OneBodyOp::new(Basis::Momentum, CMatrix::identity(6), "I").unwrap();
        let n = number_op(&fock);
        assert_eq!(dgamma(&fock, &id).unwrap(), n);
        assert_eq!(State::vacuum(&fock).apply(&n).unwrap().norm(), 0.0);
        let two = fock.index_of(&[1, 4]).unwrap();
        let v = State::basis(&fock, two).apply(&n).unwrap();
        assert_eq!(v.values()[two], Complex64::new(2.0, 0.0));
    }

    #[test]
    fn dgamma_one_particle_block_is_the_matrix() {
        let fock = build_fock(&grid1(6), 2).unwrap();
        let mut rng = TestRng::new(5);
        let a = OneBodyOp::new(Basis::Momentum, random_hermitian(&mut rng, 6), "A").unwrap();
        let d = dgamma(&fock, &a).unwrap();
        let one = fock.sector_range(1);
        for i in one.clone() {
            for j in one.clone() {
                assert_eq!(d.get(i, j), a.matrix().get(i - one.start, j - one.start));
            }
        }
        assert_eq!(State::vacuum(&fock).apply(&d).unwrap().norm(), 0.0);
        assert!(d.conserves_particle_number(&fock));
        assert!(d.sub(&d.adjoint()).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn dgamma_two_particle_block_matches_symmetric_tensor_oracle() {
        // On two particles dGamma(A) = A x 1 + 1 x A restricted to symmetric
        // tensors. Normalized basis vectors of the symmetric subspace serve
        // as the oracle.
        let m = 4;
        let fock = build_fock(&grid1(m), 2).unwrap();
        let mut rng = TestRng::new(9);
        let a = OneBodyOp::new(Basis::Momentum, random_hermitian(&mut rng, m), "A").unwrap();
        let d = dgamma(&fock, &a).unwrap();
        let sym = |p: usize, q: usize| {
            let mut v = vec![ZERO; m * m];
            v[p * m + q] += ONE;
            v[q * m + p] += ONE;
            let n = crate::grid::norm(&v);
            v.iter_mut().for_each(|z| *z /= n);
            v
        };
        let apply_pair = |v: &[Complex64]| {
            let mut out = vec![ZERO; m * m];
            for p in 0..m {
                for q in 0..m {
                    for r in 0..m {
                        out[r * m + q] += a.matrix().get(r, p) * v[p * m + q];
                        out[p * m + r] += a.matrix().get(r, q) * v[p * m + q];
                    }
                }
            }
            out
        };
        for i in fock.sector_range(2) {
            for j in fock.sector_range(2) {
                let (si, sj) = (fock.modes(i), fock.modes(j));
                let vi = sym(si[0] as usize, si[1] as usize);
                let vj = sym(sj[0] as usize, sj[1] as usize);
                let expect: Complex64 = vi.iter().zip(apply_pair(&vj)).map(|(x, y)| x.conj() * y).sum();
                assert!((d.get(i, j) - expect).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn dgamma_is_a_lie_homomorphism() {
        let fock = build_fock(&grid1(8), 3).unwrap();
        let mut rng = TestRng::new(7);
        for _ in 0..5 {
            let a = OneBodyOp::new(Basis::Momentum, random_hermitian(&mut rng, 8), "A").unwrap();
            let b = OneBodyOp::new(Basis::Momentum, random_hermitian(&mut rng, 8), "B").unwrap();
            let lhs = fock_commutator(&dgamma(&fock, &a).unwrap(), &dgamma(&fock, &b).unwrap()).unwrap();
            let rhs = dgamma(&fock, &commutator(&a, &b).unwrap()).unwrap();
            let scale = rhs.frobenius().max(1.0);
            assert!(lhs.sub(&rhs).unwrap().frobenius() / scale <= 1e-10);
            let n = number_op(&fock);
            assert!(fock_commutator(&n, &dgamma(&fock, &a).unwrap()).unwrap().max_abs() < 1e-12);
        }
    }

    #[test]
    fn second_quantized_position_from_coordinate_ladders() {
        let fock = build_fock(&grid1(8), 2).unwrap();
        let grid = fock.grid();
        let x = position_op(grid, 0).unwrap();
        let via_dgamma = dgamma(&fock, &x).unwrap();
        let mut via_ladders = FockOp::from_rows(fock.dim(), vec![Vec::new(); fock.dim()], OpKind::Generator);
        for site in 0..8 {
            let a = ladder(&fock, site, Basis::Coordinate, LadderKind::Annihilate, Normalization::Noncovariant).unwrap();
            let term = a.adjoint().mul(&a).unwrap();
            via_ladders = via_ladders.add_scaled(&term, Complex64::new(grid.position(site)[0], 0.0)).unwrap();
        }
        assert!(via_dgamma.sub(&via_ladders).unwrap().max_abs() <= 1e-12);
    }

    #[test]
    fn diagonal_dgamma_matches_general_path() {
        let fock = build_fock(&grid1(6), 2).unwrap();
        let w: Vec<Complex64> = fock.grid().omega().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let dense = OneBodyOp::new(Basis::Momentum, CMatrix::from_diag(&w), "P0").unwrap();
        let a = dgamma(&fock, &dense).unwrap();
        let b = dgamma_diagonal(&fock, &w).unwrap();
        assert!(a.sub(&b).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn state_helpers() {
        let fock = build_fock(&grid1(4), 2).unwrap();
        let v = State::vacuum(&fock);
        assert_eq!(v.particle_number(&fock), Some(0));
        let wave = vec![Complex64::new(3.0, 0.0), ZERO, Complex64::new(0.0, 4.0), ZERO];
        let s = State::one_particle(&fock, &wave).unwrap().normalized().unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-15);
        assert_eq!(s.particle_number(&fock), Some(1));
        let mixed = State::new(v.values().iter().zip(s.values()).map(|(a, b)| a + b).collect());
        assert_eq!(mixed.particle_number(&fock), None);
        assert!(State::new(vec![ZERO; fock.dim()]).normalized().is_err());
    }
}
