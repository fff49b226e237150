//! One-particle operators: dense matrices tagged with their basis, and a
//! matrix-free expression form for grids too large to materialize.
//!
//! Spatial components are stored contravariant (`x^j`, `p^j`). Lowered
//! components follow the metric `(+, -, ..., -)`, so `v_j = -v^j`.
//!
//! Useful lattice facts, all in contravariant form:
//! `X^j = F diag(x^j) F^dagger` acts as `i d/dp^j` on momentum wave
//! functions, `[X^j, P^k] = i delta` on band-limited states, and
//! `[Omega, X^j] = -i V^j` with `V^j = diag(p^j / omega)`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Basis, Grid};
use crate::par;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Metric and index conventions used to translate lowered-index statements.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignLedger {
    n: usize,
}

impl SignLedger {
    pub fn new(n: usize) -> SignLedger {
        SignLedger { n }
    }

    /// Diagonal of the metric: `+1` for time, `-1` for each spatial axis.
    pub fn metric(&self) -> Vec<f64> {
        std::iter::once(1.0)
            .chain(std::iter::repeat_n(-1.0, self.n))
            .collect()
    }

    /// Lowers a spatial component: `v_j = -v^j`.
    pub fn lower(&self, contravariant: f64) -> f64 {
        -contravariant
    }

    /// Scale that turns a contravariant one-body matrix into its lowered form.
    pub fn lowering_factor(&self) -> Complex64 {
        Complex64::new(-1.0, 0.0)
    }
}

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CMatrix({}x{})", self.rows, self.cols)
    }
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> CMatrix {
        CMatrix { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> CMatrix {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    pub fn from_diag(diag: &[Complex64]) -> CMatrix {
        let n = diag.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, d) in diag.iter().enumerate() {
            m.data[i * n + i] = *d;
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> CMatrix {
        let d: Vec<Complex64> = diag.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        CMatrix::from_diag(&d)
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<CMatrix> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, found: data.len() });
        }
        Ok(CMatrix { rows, cols, data })
    }

    /// Builds a matrix from a function of `(row, col)`.
    pub fn from_fn<F>(rows: usize, cols: usize, f: F) -> CMatrix
    where
        F: Fn(usize, usize) -> Complex64 + Sync + Send,
    {
        let data = par::map_range(rows * cols, |k| f(k / cols, k % cols));
        CMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> Complex64 {
        self.diagonal().iter().sum()
    }

    pub fn transpose(&self) -> CMatrix {
        let (r, c) = (self.rows, self.cols);
        CMatrix::from_fn(c, r, |i, j| self.data[j * c + i])
    }

    pub fn adjoint(&self) -> CMatrix {
        let (r, c) = (self.rows, self.cols);
        CMatrix::from_fn(c, r, |i, j| self.data[j * c + i].conj())
    }

    pub fn scale(&self, s: Complex64) -> CMatrix {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v * s).collect() }
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, other: &CMatrix, s: Complex64) -> Result<CMatrix> {
        self.check_same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + s * b).collect();
        Ok(CMatrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn add(&self, other: &CMatrix) -> Result<CMatrix> {
        self.add_scaled(other, ONE)
    }

    pub fn sub(&self, other: &CMatrix) -> Result<CMatrix> {
        self.add_scaled(other, -ONE)
    }

    fn check_same_shape(&self, other: &CMatrix) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                found: other.rows * other.cols,
            });
        }
        Ok(())
    }

    /// Matrix product; rows of the result are computed in parallel.
    pub fn matmul(&self, other: &CMatrix) -> Result<CMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch { expected: self.cols, found: other.rows });
        }
        let n = other.cols;
        let rows = par::map_range(self.rows, |i| {
            let mut out = vec![ZERO; n];
            for (k, a) in self.row(i).iter().enumerate() {
                if *a == ZERO {
                    continue;
                }
                for (o, b) in out.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
            out
        });
        Ok(CMatrix { rows: self.rows, cols: n, data: rows.concat() })
    }

    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch { expected: self.cols, found: v.len() });
        }
        Ok(par::map_range(self.rows, |i| {
            self.row(i).iter().zip(v).map(|(a, b)| a * b).sum()
        }))
    }

    pub fn frobenius(&self) -> f64 {
        crate::grid::norm(&self.data)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Applies `f` to every column (as a contiguous vector), in parallel.
    fn map_columns<F>(&self, f: F) -> CMatrix
    where
        F: Fn(&mut [Complex64]) + Sync + Send,
    {
        let mut t = self.transpose();
        let len = t.cols;
        par::for_each_chunk_mut(&mut t.data, len, |_, col| f(col));
        t.transpose()
    }
}

/// A one-particle operator as an `M x M` matrix in a definite basis.
#[derive(Clone, Debug, PartialEq)]
pub struct OneBodyOp {
    basis: Basis,
    matrix: CMatrix,
    label: String,
}

impl OneBodyOp {
    pub fn new(basis: Basis, matrix: CMatrix, label: impl Into<String>) -> Result<OneBodyOp> {
        if matrix.rows != matrix.cols {
            return Err(Error::DimensionMismatch { expected: matrix.rows, found: matrix.cols });
        }
        Ok(OneBodyOp { basis, matrix, label: label.into() })
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> OneBodyOp {
        self.label = label.into();
        self
    }

    pub fn size(&self) -> usize {
        self.matrix.rows
    }

    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        self.matrix.apply(v)
    }

    pub fn adjoint(&self) -> OneBodyOp {
        OneBodyOp {
            basis: self.basis,
            matrix: self.matrix.adjoint(),
            label: format!("{}^dagger", self.label),
        }
    }

    /// `||A - A^dagger||_F / ||A||_F` (zero for the zero matrix).
    pub fn hermiticity_defect(&self) -> f64 {
        let scale = self.matrix.frobenius();
        if scale == 0.0 {
            return 0.0;
        }
        self.matrix.sub(&self.matrix.adjoint()).map(|d| d.frobenius()).unwrap_or(f64::INFINITY)
            / scale
    }

    fn check_basis(&self, other: &OneBodyOp) -> Result<()> {
        if self.basis != other.basis {
            return Err(Error::BasisMismatch { left: self.basis, right: other.basis });
        }
        if self.size() != other.size() {
            return Err(Error::DimensionMismatch { expected: self.size(), found: other.size() });
        }
        Ok(())
    }

    pub fn matmul(&self, other: &OneBodyOp) -> Result<OneBodyOp> {
        self.check_basis(other)?;
        Ok(OneBodyOp {
            basis: self.basis,
            matrix: self.matrix.matmul(&other.matrix)?,
            label: format!("{}*{}", self.label, other.label),
        })
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, other: &OneBodyOp, s: Complex64) -> Result<OneBodyOp> {
        self.check_basis(other)?;
        Ok(OneBodyOp {
            basis: self.basis,
            matrix: self.matrix.add_scaled(&other.matrix, s)?,
            label: format!("{}+{}", self.label, other.label),
        })
    }

    pub fn scale(&self, s: Complex64) -> OneBodyOp {
        OneBodyOp { basis: self.basis, matrix: self.matrix.scale(s), label: self.label.clone() }
    }
}

/// `AB - BA`; both operators must be in the same basis.
pub fn commutator(a: &OneBodyOp, b: &OneBodyOp) -> Result<OneBodyOp> {
    let ab = a.matmul(b)?;
    let ba = b.matmul(a)?;
    Ok(ab.add_scaled(&ba, -ONE)?.with_label(format!("[{},{}]", a.label, b.label)))
}

/// Conjugates into `target`: momentum -> coordinate is `F^dagger A F`,
/// coordinate -> momentum is `F A F^dagger`. Same basis returns a copy.
pub fn change_basis(op: &OneBodyOp, target: Basis, grid: &Grid) -> Result<OneBodyOp> {
    if op.size() != grid.mode_count() {
        return Err(Error::DimensionMismatch { expected: grid.mode_count(), found: op.size() });
    }
    if op.basis == target {
        return Ok(op.clone());
    }
    let transform = |col: &mut [Complex64]| match target {
        Basis::Coordinate => grid.inverse_in_place(col),
        Basis::Momentum => grid.forward_in_place(col),
    };
    // (U A) then (U (U A)^dagger)^dagger = U A U^dagger.
    let left = op.matrix.map_columns(transform);
    let both = left.adjoint().map_columns(transform).adjoint();
    Ok(OneBodyOp { basis: target, matrix: both, label: op.label.clone() })
}

fn check_axis(grid: &Grid, j: usize) -> Result<()> {
    if j >= grid.dim() {
        return Err(Error::IndexOutOfRange(format!(
            "spatial component {j} on a {}-dimensional grid",
            grid.dim()
        )));
    }
    Ok(())
}

fn position_values(grid: &Grid, j: usize) -> Vec<f64> {
    (0..grid.mode_count()).map(|i| grid.position(i)[j]).collect()
}

fn momentum_values(grid: &Grid, j: usize) -> Vec<f64> {
    (0..grid.mode_count()).map(|i| grid.momentum(i)[j]).collect()
}

fn velocity_values(grid: &Grid, j: usize) -> Vec<f64> {
    (0..grid.mode_count()).map(|i| grid.momentum(i)[j] / grid.omega()[i]).collect()
}

/// Newton-Wigner-Pryce position component `x^j`, diagonal in coordinates.
pub fn position_op(grid: &Grid, j: usize) -> Result<OneBodyOp> {
    check_axis(grid, j)?;
    OneBodyOp::new(
        Basis::Coordinate,
        CMatrix::from_real_diag(&position_values(grid, j)),
        format!("X{j}"),
    )
}

/// `mu = 0` gives the energy `diag(omega)`, `mu = j + 1` gives `diag(p^j)`.
pub fn momentum_component_op(grid: &Grid, mu: usize) -> Result<OneBodyOp> {
    if mu > grid.dim() {
        return Err(Error::IndexOutOfRange(format!(
            "four-momentum component {mu} on a {}-dimensional grid",
            grid.dim()
        )));
    }
    let (values, label) = if mu == 0 {
        (grid.omega().to_vec(), "P0".to_string())
    } else {
        (momentum_values(grid, mu - 1), format!("P{}", mu - 1))
    };
    OneBodyOp::new(Basis::Momentum, CMatrix::from_real_diag(&values), label)
}

/// Velocity component `diag(p^j / omega)`.
pub fn velocity_op(grid: &Grid, j: usize) -> Result<OneBodyOp> {
    check_axis(grid, j)?;
    OneBodyOp::new(
        Basis::Momentum,
        CMatrix::from_real_diag(&velocity_values(grid, j)),
        format!("V{j}"),
    )
}

/// Energy in the coordinate basis as the circulant `W(x - y)` with
/// `W(r) = M^{-1} sum_p omega_p e^{i p.r}`.
pub fn coordinate_space_p0(grid: &Grid) -> OneBodyOp {
    let kernel = grid.lattice_kernel(|_, w| Complex64::new(w, 0.0), None);
    let m = grid.mode_count();
    let matrix = CMatrix::from_fn(m, m, |i, j| kernel[grid.separation_index(i, j)]);
    OneBodyOp { basis: Basis::Coordinate, matrix, label: "P0".into() }
}

/// `diag(exp(-i omega t))` in the momentum basis.
pub fn time_evolve_phase(grid: &Grid, t: f64) -> Result<OneBodyOp> {
    if !t.is_finite() {
        return Err(crate::error::domain("time_evolve_phase", format!("non-finite time {t}")));
    }
    let d: Vec<Complex64> = grid.omega().iter().map(|w| Complex64::from_polar(1.0, -w * t)).collect();
    OneBodyOp::new(Basis::Momentum, CMatrix::from_diag(&d), format!("exp(-i P0 {t})"))
}

/// Matrix-free one-particle operator acting on momentum-basis vectors.
#[derive(Clone, Debug)]
pub enum Action {
    /// Multiplication by a function of momentum.
    MomentumDiag(Arc<Vec<Complex64>>),
    /// Multiplication by a function of position, applied through the DFT.
    CoordinateDiag(Arc<Vec<Complex64>>),
    /// Factors applied right to left.
    Product(Vec<Action>),
    Sum(Vec<(Complex64, Action)>),
}

impl Action {
    fn real(values: Vec<f64>) -> Arc<Vec<Complex64>> {
        Arc::new(values.into_iter().map(|v| Complex64::new(v, 0.0)).collect())
    }

    pub fn energy(grid: &Grid) -> Action {
        Action::MomentumDiag(Action::real(grid.omega().to_vec()))
    }

    pub fn momentum(grid: &Grid, j: usize) -> Action {
        Action::MomentumDiag(Action::real(momentum_values(grid, j)))
    }

    pub fn velocity(grid: &Grid, j: usize) -> Action {
        Action::MomentumDiag(Action::real(velocity_values(grid, j)))
    }

    pub fn position(grid: &Grid, j: usize) -> Action {
        Action::CoordinateDiag(Action::real(position_values(grid, j)))
    }

    pub fn phase(grid: &Grid, t: f64) -> Action {
        Action::MomentumDiag(Arc::new(
            grid.omega().iter().map(|w| Complex64::from_polar(1.0, -w * t)).collect(),
        ))
    }

    pub fn identity(grid: &Grid) -> Action {
        Action::MomentumDiag(Arc::new(vec![ONE; grid.mode_count()]))
    }

    /// `self * rhs` (apply `rhs` first).
    pub fn then_after(self, rhs: Action) -> Action {
        Action::Product(vec![self, rhs])
    }

    pub fn commutator(a: &Action, b: &Action) -> Action {
        Action::Sum(vec![
            (ONE, Action::Product(vec![a.clone(), b.clone()])),
            (-ONE, Action::Product(vec![b.clone(), a.clone()])),
        ])
    }

    /// Applies the operator to a momentum-basis vector.
    pub fn apply(&self, grid: &Grid, v: &[Complex64]) -> Vec<Complex64> {
        match self {
            Action::MomentumDiag(d) => v.iter().zip(d.iter()).map(|(a, b)| a * b).collect(),
            Action::CoordinateDiag(d) => {
                let mut c = grid.to_coordinate(v);
                c.iter_mut().zip(d.iter()).for_each(|(a, b)| *a *= b);
                grid.forward_in_place(&mut c);
                c
            }
            Action::Product(factors) => {
                let mut out = v.to_vec();
                for f in factors.iter().rev() {
                    out = f.apply(grid, &out);
                }
                out
            }
            Action::Sum(terms) => {
                let mut out = vec![ZERO; v.len()];
                for (c, t) in terms {
                    for (o, x) in out.iter_mut().zip(t.apply(grid, v)) {
                        *o += c * x;
                    }
                }
                out
            }
        }
    }

    /// Dense matrix of the operator in the requested basis.
    pub fn materialize(&self, grid: &Grid, basis: Basis, label: &str) -> OneBodyOp {
        let m = grid.mode_count();
        let columns = par::map_range(m, |j| {
            let mut e = vec![ZERO; m];
            e[j] = ONE;
            match basis {
                Basis::Momentum => self.apply(grid, &e),
                Basis::Coordinate => {
                    grid.forward_in_place(&mut e);
                    let mut out = self.apply(grid, &e);
                    grid.inverse_in_place(&mut out);
                    out
                }
            }
        });
        let cols = CMatrix { rows: m, cols: m, data: columns.concat() };
        OneBodyOp { basis, matrix: cols.transpose(), label: label.to_string() }
    }
}

/// Symmetrized boost `(X_j Omega + Omega X_j) / 2` with the lowered position
/// component `X_j = -X^j`.
pub fn boost_action(grid: &Grid, j: usize) -> Result<Action> {
    check_axis(grid, j)?;
    let lowered = SignLedger::new(grid.dim()).lowering_factor();
    let x = Action::position(grid, j);
    let w = Action::energy(grid);
    Ok(Action::Sum(vec![
        (0.5 * lowered, Action::Product(vec![x.clone(), w.clone()])),
        (0.5 * lowered, Action::Product(vec![w, x])),
    ]))
}

/// The boost built from its momentum-space differential form
/// `i (p_j / (2 omega) - omega d/dp^j)`, with `d/dp^j` realized spectrally as
/// conjugated multiplication by `-i x^j`.
pub fn boost_spectral_action(grid: &Grid, j: usize) -> Result<Action> {
    check_axis(grid, j)?;
    let ledger = SignLedger::new(grid.dim());
    let first: Vec<Complex64> = (0..grid.mode_count())
        .map(|i| I * ledger.lower(grid.momentum(i)[j]) / (2.0 * grid.omega()[i]))
        .collect();
    let derivative = Action::Sum(vec![(-I, Action::position(grid, j))]);
    Ok(Action::Sum(vec![
        (ONE, Action::MomentumDiag(Arc::new(first))),
        (-I, Action::Product(vec![Action::energy(grid), derivative])),
    ]))
}

pub fn boost_op(grid: &Grid, j: usize) -> Result<OneBodyOp> {
    Ok(boost_action(grid, j)?.materialize(grid, Basis::Momentum, &format!("Boost{j}")))
}

/// Rotation generator `X^i P^k - X^k P^i` (the two factors commute exactly).
pub fn rotation_action(grid: &Grid, i: usize, k: usize) -> Result<Action> {
    if grid.dim() < 2 {
        return Err(Error::IndexOutOfRange("rotations need at least two dimensions".into()));
    }
    check_axis(grid, i)?;
    check_axis(grid, k)?;
    if i == k {
        return Err(Error::IndexOutOfRange(format!("rotation plane needs i != k, got {i}")));
    }
    Ok(Action::Sum(vec![
        (ONE, Action::Product(vec![Action::position(grid, i), Action::momentum(grid, k)])),
        (-ONE, Action::Product(vec![Action::position(grid, k), Action::momentum(grid, i)])),
    ]))
}

pub fn rotation_gen_op(grid: &Grid, i: usize, k: usize) -> Result<OneBodyOp> {
    Ok(rotation_action(grid, i, k)?.materialize(grid, Basis::Momentum, &format!("Rot{i}{k}")))
}
