//! Periodic spatial lattice, its momentum grid and the unitary lattice
//! Fourier transform.
//!
//! Modes are addressed by a single linear index in row-major order (axis 0
//! varies slowest). The same index set labels lattice sites and grid momenta:
//! site index `k` on an axis sits at `x = a (k - N/2)`, momentum index `l`
//! carries the integer wavenumber `q = l` for `l <= N/2` and `q = l - N`
//! otherwise, so `p = 2 pi q / (N a)` lies in the half-open zone
//! `(-pi/a, pi/a]` with the unpaired edge mode on the positive side.
//!
//! The transform from coordinate to momentum amplitudes is
//! `v(p) = M^{-1/2} sum_x e^{-i p.x} v(x)` and its inverse carries the
//! conjugate kernel, so both directions are unitary.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;

pub type Vec3 = [f64; 3];

/// Largest supported spatial dimension.
pub const MAX_DIM: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Momentum,
    Coordinate,
}

impl Basis {
    pub fn other(self) -> Basis {
        match self {
            Basis::Momentum => Basis::Coordinate,
            Basis::Coordinate => Basis::Momentum,
        }
    }
}

/// Lattice geometry and the field mass.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    #[serde(rename = "N")]
    pub points: usize,
    pub a: f64,
    pub m: f64,
}

impl GridSpec {
    pub fn new(n: usize, points: usize, a: f64, m: f64) -> Self {
        GridSpec { n, points, a, m }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_DIM).contains(&self.n) {
            return Err(Error::InvalidGrid(format!(
                "spatial dimension must be 1, 2 or 3, got {}",
                self.n
            )));
        }
        if self.points < 2 || !self.points.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be even and at least 2, got {}",
                self.points
            )));
        }
        if !(self.a.is_finite() && self.a > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "lattice spacing must be positive, got {}",
                self.a
            )));
        }
        if !(self.m.is_finite() && self.m > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "mass must be positive, got {}",
                self.m
            )));
        }
        Ok(())
    }

    pub fn mode_count(&self) -> usize {
        self.points.pow(self.n as u32)
    }

    pub fn box_length(&self) -> f64 {
        self.points as f64 * self.a
    }

    /// Twice the points at half the spacing: same box, finer lattice.
    pub fn refined(&self) -> GridSpec {
        GridSpec {
            points: self.points * 2,
            a: self.a / 2.0,
            ..*self
        }
    }
}

/// Smooth damping of the zone edge, `sigma(p) = prod_j exp(-alpha (|p_j| a / pi)^order)`.
///
/// Lattice Fourier sums of symbols that do not vanish at the zone edge carry a
/// non-decaying Gibbs term at lattice separations; the filter removes it when
/// a lattice kernel is compared against a continuum formula.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralFilter {
    pub order: u32,
    pub alpha: f64,
}

impl Default for SpectralFilter {
    /// Fourth-order exponential filter reaching machine epsilon at the edge.
    fn default() -> Self {
        SpectralFilter {
            order: 4,
            alpha: -f64::EPSILON.ln(),
        }
    }
}

impl SpectralFilter {
    pub fn weight(&self, p: &Vec3, n: usize, zone_edge: f64) -> f64 {
        let s: f64 = p[..n]
            .iter()
            .map(|c| (c.abs() / zone_edge).powi(self.order as i32))
            .sum();
        (-self.alpha * s).exp()
    }
}

/// Complex amplitudes over the lattice modes, tagged with their basis.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldVector {
    pub basis: Basis,
    pub values: Vec<Complex64>,
}

impl FieldVector {
    pub fn new(basis: Basis, values: Vec<Complex64>) -> Self {
        FieldVector { basis, values }
    }

    pub fn zeros(basis: Basis, len: usize) -> Self {
        FieldVector {
            basis,
            values: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    pub fn norm(&self) -> f64 {
        norm(&self.values)
    }
}

pub(crate) fn norm(v: &[Complex64]) -> f64 {
    // fold from +0.0: an empty float `sum` is -0.0
    v.iter().map(|z| z.norm_sqr()).fold(0.0, |a, b| a + b).sqrt()
}

/// Immutable lattice with precomputed geometry and FFT plans.
#[derive(Clone)]
pub struct Grid {
    spec: GridSpec,
    axis_positions: Vec<f64>,
    axis_momenta: Vec<f64>,
    /// `(-1)^q` per momentum index on one axis.
    axis_parity: Vec<f64>,
    omega: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("spec", &self.spec).finish()
    }
}

/// Integer wavenumber of momentum index `l` on an axis of `points` sites.
pub fn wavenumber(l: usize, points: usize) -> i64 {
    if l <= points / 2 {
        l as i64
    } else {
        l as i64 - points as i64
    }
}

pub fn make_grid(spec: GridSpec) -> Result<Grid> {
    Grid::new(spec)
}

impl Grid {
    pub fn new(spec: GridSpec) -> Result<Grid> {
        spec.validate()?;
        let n_pts = spec.points;
        let half = (n_pts / 2) as f64;
        let axis_positions: Vec<f64> = (0..n_pts).map(|k| spec.a * (k as f64 - half)).collect();
        let dp = 2.0 * std::f64::consts::PI / spec.box_length();
        let axis_momenta: Vec<f64> = (0..n_pts)
            .map(|l| dp * wavenumber(l, n_pts) as f64)
            .collect();
        let axis_parity = (0..n_pts)
            .map(|l| if wavenumber(l, n_pts) % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n_pts);
        let inverse = planner.plan_fft_inverse(n_pts);
        let mut grid = Grid {
            spec,
            axis_positions,
            axis_momenta,
            axis_parity,
            omega: Vec::new(),
            forward,
            inverse,
        };
        grid.omega = (0..grid.mode_count())
            .map(|i| {
                let p = grid.momentum(i);
                (dot(&p, &p) + spec.m * spec.m).sqrt()
            })
            .collect();
        Ok(grid)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.n
    }

    pub fn points(&self) -> usize {
        self.spec.points
    }

    pub fn spacing(&self) -> f64 {
        self.spec.a
    }

    pub fn mass(&self) -> f64 {
        self.spec.m
    }

    pub fn mode_count(&self) -> usize {
        self.spec.mode_count()
    }

    /// Upper edge of the momentum zone, `pi / a`.
    pub fn zone_edge(&self) -> f64 {
        std::f64::consts::PI / self.spec.a
    }

    /// Per-axis indices of a linear mode index (unused axes are zero).
    pub fn multi_index(&self, idx: usize) -> [usize; MAX_DIM] {
        let n_pts = self.spec.points;
        let mut out = [0usize; MAX_DIM];
        let mut rest = idx;
        for d in (0..self.spec.n).rev() {
            out[d] = rest % n_pts;
            rest /= n_pts;
        }
        out
    }

    pub fn linear_index(&self, multi: &[usize]) -> usize {
        multi[..self.spec.n]
            .iter()
            .fold(0, |acc, &k| acc * self.spec.points + k)
    }

    pub fn position(&self, idx: usize) -> Vec3 {
        let k = self.multi_index(idx);
        let mut x = [0.0; MAX_DIM];
        for d in 0..self.spec.n {
            x[d] = self.axis_positions[k[d]];
        }
        x
    }

    pub fn momentum(&self, idx: usize) -> Vec3 {
        let l = self.multi_index(idx);
        let mut p = [0.0; MAX_DIM];
        for d in 0..self.spec.n {
            p[d] = self.axis_momenta[l[d]];
        }
        p
    }

    pub fn positions(&self) -> Vec<Vec3> {
        (0..self.mode_count()).map(|i| self.position(i)).collect()
    }

    pub fn momenta(&self) -> Vec<Vec3> {
        (0..self.mode_count()).map(|i| self.momentum(i)).collect()
    }

    /// Integer wavenumbers of a mode.
    pub fn wavenumbers(&self, idx: usize) -> [i64; MAX_DIM] {
        let l = self.multi_index(idx);
        let mut q = [0i64; MAX_DIM];
        for d in 0..self.spec.n {
            q[d] = wavenumber(l[d], self.spec.points);
        }
        q
    }

    /// Mode index for integer wavenumbers, reduced modulo the zone.
    pub fn mode_of_wavenumbers(&self, q: &[i64]) -> usize {
        let n_pts = self.spec.points as i64;
        let l: Vec<usize> = q[..self.spec.n]
            .iter()
            .map(|&v| v.rem_euclid(n_pts) as usize)
            .collect();
        self.linear_index(&l)
    }

    /// Site index of the lattice point `x = a * offsets` (periodically wrapped).
    pub fn site_of_offsets(&self, offsets: &[i64]) -> usize {
        let n_pts = self.spec.points as i64;
        let k: Vec<usize> = offsets[..self.spec.n]
            .iter()
            .map(|&o| (o + n_pts / 2).rem_euclid(n_pts) as usize)
            .collect();
        self.linear_index(&k)
    }

    /// Lattice offsets `x / a` of a site.
    pub fn offsets_of_site(&self, idx: usize) -> [i64; MAX_DIM] {
        let k = self.multi_index(idx);
        let half = (self.spec.points / 2) as i64;
        let mut o = [0i64; MAX_DIM];
        for d in 0..self.spec.n {
            o[d] = k[d] as i64 - half;
        }
        o
    }

    /// Site index of the wrapped separation `x_i - x_j`.
    pub fn separation_index(&self, i: usize, j: usize) -> usize {
        let oi = self.offsets_of_site(i);
        let oj = self.offsets_of_site(j);
        let diff: Vec<i64> = (0..self.spec.n).map(|d| oi[d] - oj[d]).collect();
        self.site_of_offsets(&diff)
    }

    /// Euclidean length of the shortest periodic image of a site's position.
    pub fn periodic_radius(&self, idx: usize) -> f64 {
        let o = self.offsets_of_site(idx);
        let n_pts = self.spec.points as i64;
        o[..self.spec.n]
            .iter()
            .map(|&v| {
                let w = v.rem_euclid(n_pts);
                let w = w.min(n_pts - w) as f64 * self.spec.a;
                w * w
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    fn mode_parity(&self, idx: usize) -> f64 {
        let l = self.multi_index(idx);
        (0..self.spec.n).map(|d| self.axis_parity[l[d]]).product()
    }

    /// In-place coordinate -> momentum transform.
    pub fn forward_in_place(&self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.mode_count(), "field length mismatch");
        self.fft_all_axes(data, false);
        let scale = 1.0 / (self.mode_count() as f64).sqrt();
        for (i, v) in data.iter_mut().enumerate() {
            *v *= scale * self.mode_parity(i);
        }
    }

    /// In-place momentum -> coordinate transform.
    pub fn inverse_in_place(&self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.mode_count(), "field length mismatch");
        let scale = 1.0 / (self.mode_count() as f64).sqrt();
        for (i, v) in data.iter_mut().enumerate() {
            *v *= scale * self.mode_parity(i);
        }
        self.fft_all_axes(data, true);
    }

    pub fn to_momentum(&self, data: &[Complex64]) -> Vec<Complex64> {
        let mut out = data.to_vec();
        self.forward_in_place(&mut out);
        out
    }

    pub fn to_coordinate(&self, data: &[Complex64]) -> Vec<Complex64> {
        let mut out = data.to_vec();
        self.inverse_in_place(&mut out);
        out
    }

    fn fft_all_axes(&self, data: &mut [Complex64], inverse: bool) {
        let plan = if inverse { &self.inverse } else { &self.forward };
        let n_pts = self.spec.points;
        for axis in 0..self.spec.n {
            let stride = n_pts.pow((self.spec.n - 1 - axis) as u32);
            let block = n_pts * stride;
            if stride == 1 {
                par::for_each_chunk_mut(data, n_pts, |_, line| plan.process(line));
                continue;
            }
            // Each block is an N x stride matrix whose columns are the lines.
            for chunk in data.chunks_mut(block) {
                let mut lines = vec![Complex64::new(0.0, 0.0); block];
                for i in 0..n_pts {
                    for s in 0..stride {
                        lines[s * n_pts + i] = chunk[i * stride + s];
                    }
                }
                par::for_each_chunk_mut(&mut lines, n_pts, |_, line| plan.process(line));
                for i in 0..n_pts {
                    for s in 0..stride {
                        chunk[i * stride + s] = lines[s * n_pts + i];
                    }
                }
            }
        }
    }

    /// Lattice kernel `G(x) = M^{-1} sum_p filter(p) symbol(p) e^{i p.x}`,
    /// indexed by site.
    pub fn lattice_kernel<F>(&self, symbol: F, filter: Option<SpectralFilter>) -> Vec<Complex64>
    where
        F: Fn(&Vec3, f64) -> Complex64 + Sync + Send,
    {
        let edge = self.zone_edge();
        let n = self.spec.n;
        let mut values = par::map_range(self.mode_count(), |i| {
            let p = self.momentum(i);
            let w = filter.map_or(1.0, |f| f.weight(&p, n, edge));
            symbol(&p, self.omega[i]) * w
        });
        self.inverse_in_place(&mut values);
        let scale = 1.0 / (self.mode_count() as f64).sqrt();
        values.iter_mut().for_each(|v| *v *= scale);
        values
    }
}

pub(crate) fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Unitary change of basis of a field vector; same-basis requests return a copy.
pub fn dft(v: &FieldVector, target: Basis, grid: &Grid) -> Result<FieldVector> {
    if v.values.len() != grid.mode_count() {
        return Err(Error::DimensionMismatch {
            expected: grid.mode_count(),
            found: v.values.len(),
        });
    }
    let values = match (v.basis, target) {
        (a, b) if a == b => v.values.clone(),
        (Basis::Coordinate, Basis::Momentum) => grid.to_momentum(&v.values),
        _ => grid.to_coordinate(&v.values),
    };
    Ok(FieldVector::new(target, values))
}

/// `omega_p = sqrt(|p|^2 + m^2)` at every grid momentum.
pub fn dispersion(grid: &Grid) -> Vec<f64> {
    grid.omega().to_vec()
}
