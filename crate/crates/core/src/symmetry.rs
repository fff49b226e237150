//! Lattice-exact Poincare elements (time shifts, lattice translations and
//! signed-permutation rotations) and their unitaries on Fock space.
//!
//! With `U(g) = U_time(y0) U_shift(y) U_rot(R)`:
//! `U_time(y0) = exp(i y0 P0)` so `U a_p U^dagger = e^{-i omega y0} a_p`,
//! `U_shift(y)` multiplies by `e^{-i y.P}` so `a~(x) -> a~(x + y)`,
//! `U_rot(R)` moves each occupied mode `p` to `Rp` so `a~(x) -> a~(Rx)`.
//! Boosts are not lattice symmetries and are refused.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{coordinate_coefficients, ladder_combination, FockOp, FockSpace, LadderKind, OpKind};
use crate::grid::{Grid, Vec3, MAX_DIM};
use crate::par;

/// Signed permutation with determinant one: `(Rv)_d = sign_d * v_{perm_d}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeRotation {
    n: usize,
    perm: [usize; MAX_DIM],
    signs: [i8; MAX_DIM],
}

fn permutation_parity(perm: &[usize]) -> i8 {
    let mut inversions = 0;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

impl LatticeRotation {
    pub fn identity(n: usize) -> LatticeRotation {
        LatticeRotation { n, perm: [0, 1, 2], signs: [1, 1, 1] }
    }

    pub fn new(n: usize, perm: &[usize], signs: &[i8]) -> Result<LatticeRotation> {
        if !(1..=MAX_DIM).contains(&n) || perm.len() != n || signs.len() != n {
            return Err(Error::UnsupportedElement(format!("rotation data does not match dimension {n}")));
        }
        let mut seen = [false; MAX_DIM];
        for &p in perm {
            if p >= n || seen[p] {
                return Err(Error::UnsupportedElement(format!("{perm:?} is not a permutation")));
            }
            seen[p] = true;
        }
        if signs.iter().any(|s| s.abs() != 1) {
            return Err(Error::UnsupportedElement(format!("signs {signs:?} must be +-1")));
        }
        let det = permutation_parity(perm) * signs.iter().product::<i8>();
        if det != 1 {
            return Err(Error::UnsupportedElement("improper rotation (determinant -1)".into()));
        }
        let mut r = LatticeRotation::identity(n);
        r.perm[..n].copy_from_slice(perm);
        r.signs[..n].copy_from_slice(signs);
        Ok(r)
    }

    /// Every proper signed permutation (24 of them in three dimensions).
    pub fn all(n: usize) -> Vec<LatticeRotation> {
        let perms: Vec<Vec<usize>> = match n {
            1 => vec![vec![0]],
            2 => vec![vec![0, 1], vec![1, 0]],
            _ => vec![
                vec![0, 1, 2],
                vec![0, 2, 1],
                vec![1, 0, 2],
                vec![1, 2, 0],
                vec![2, 0, 1],
                vec![2, 1, 0],
            ],
        };
        let mut out = Vec::new();
        for p in &perms {
            for bits in 0..(1u32 << n) {
                let signs: Vec<i8> = (0..n).map(|d| if bits >> d & 1 == 1 { -1 } else { 1 }).collect();
                if let Ok(r) = LatticeRotation::new(n, p, &signs) {
                    out.push(r);
                }
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn is_identity(&self) -> bool {
        *self == LatticeRotation::identity(self.n)
    }

    pub fn matrix(&self) -> [[i64; MAX_DIM]; MAX_DIM] {
        let mut m = [[0i64; MAX_DIM]; MAX_DIM];
        for d in 0..self.n {
            m[d][self.perm[d]] = self.signs[d] as i64;
        }
        m
    }

    pub fn apply(&self, v: &[i64; MAX_DIM]) -> [i64; MAX_DIM] {
        let mut out = [0i64; MAX_DIM];
        for d in 0..self.n {
            out[d] = self.signs[d] as i64 * v[self.perm[d]];
        }
        out
    }

    /// `self * other` (apply `other` first).
    pub fn compose(&self, other: &LatticeRotation) -> LatticeRotation {
        let mut r = LatticeRotation::identity(self.n);
        for d in 0..self.n {
            r.perm[d] = other.perm[self.perm[d]];
            r.signs[d] = self.signs[d] * other.signs[self.perm[d]];
        }
        r
    }

    pub fn inverse(&self) -> LatticeRotation {
        let mut r = LatticeRotation::identity(self.n);
        for d in 0..self.n {
            r.perm[self.perm[d]] = d;
            r.signs[self.perm[d]] = self.signs[d];
        }
        r
    }
}

/// Restricted Poincare element. The shift is in lattice units per axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoincareElement {
    pub y0: f64,
    pub shift: [i64; MAX_DIM],
    pub rotation: LatticeRotation,
    /// Boost rapidities. Any nonzero value is refused.
    #[serde(default)]
    pub boost: Vec3,
}

impl PoincareElement {
    pub fn identity(n: usize) -> PoincareElement {
        PoincareElement { y0: 0.0, shift: [0; MAX_DIM], rotation: LatticeRotation::identity(n), boost: [0.0; 3] }
    }

    pub fn time(n: usize, y0: f64) -> PoincareElement {
        PoincareElement { y0, ..PoincareElement::identity(n) }
    }

    pub fn translation(n: usize, shift: [i64; MAX_DIM]) -> PoincareElement {
        PoincareElement { shift, ..PoincareElement::identity(n) }
    }

    pub fn rotation(rotation: LatticeRotation) -> PoincareElement {
        PoincareElement { rotation, ..PoincareElement::identity(rotation.dim()) }
    }

    /// Translation by a physical vector, which must be a lattice vector.
    pub fn physical_translation(grid: &Grid, y: &Vec3) -> Result<PoincareElement> {
        let mut shift = [0i64; MAX_DIM];
        for d in 0..grid.dim() {
            let k = y[d] / grid.spacing();
            if (k - k.round()).abs() > 1e-9 {
                return Err(Error::UnsupportedElement(format!(
                    "shift {} along axis {d} is not a multiple of the spacing {}",
                    y[d],
                    grid.spacing()
                )));
            }
            shift[d] = k.round() as i64;
        }
        Ok(PoincareElement::translation(grid.dim(), shift))
    }

    /// `self . other`, matching `U(self) U(other)`.
    pub fn compose(&self, other: &PoincareElement) -> PoincareElement {
        let rotated = self.rotation.apply(&other.shift);
        let mut shift = [0i64; MAX_DIM];
        for d in 0..MAX_DIM {
            shift[d] = self.shift[d] + rotated[d];
        }
        PoincareElement {
            y0: self.y0 + other.y0,
            shift,
            rotation: self.rotation.compose(&other.rotation),
            boost: [self.boost[0] + other.boost[0], self.boost[1] + other.boost[1], self.boost[2] + other.boost[2]],
        }
    }

    fn validate(&self, grid: &Grid) -> Result<()> {
        if self.boost.iter().any(|&b| b != 0.0) {
            return Err(Error::UnsupportedElement("boosts have no lattice-exact action".into()));
        }
        if !self.y0.is_finite() {
            return Err(Error::UnsupportedElement(format!("non-finite time shift {}", self.y0)));
        }
        if self.rotation.dim() != grid.dim() {
            return Err(Error::UnsupportedElement(format!(
                "rotation of dimension {} on a {}-dimensional grid",
                self.rotation.dim(),
                grid.dim()
            )));
        }
        if self.shift[grid.dim()..].iter().any(|&s| s != 0) {
            return Err(Error::UnsupportedElement("shift has components beyond the grid dimension".into()));
        }
        Ok(())
    }

    /// How many of the element's parts are non-trivial.
    fn parts(&self) -> usize {
        (self.y0 != 0.0) as usize
            + self.shift.iter().any(|&s| s != 0) as usize
            + (!self.rotation.is_identity()) as usize
    }
}

/// Image of a mode under a rotation, wrapped into the zone.
pub fn rotate_mode(grid: &Grid, r: &LatticeRotation, mode: usize) -> usize {
    grid.mode_of_wavenumbers(&r.apply(&grid.wavenumbers(mode)))
}

/// Image of a site under `x -> R x + y` (shift in lattice units), wrapped.
pub fn transform_site(grid: &Grid, r: &LatticeRotation, shift: &[i64; MAX_DIM], site: usize) -> usize {
    let o = r.apply(&grid.offsets_of_site(site));
    let moved: Vec<i64> = (0..MAX_DIM).map(|d| o[d] + shift[d]).collect();
    grid.site_of_offsets(&moved)
}

/// `p.y` for a lattice shift, reduced exactly through integer arithmetic.
fn shift_phase(grid: &Grid, mode: usize, shift: &[i64; MAX_DIM]) -> f64 {
    let q = grid.wavenumbers(mode);
    let n = grid.points() as i64;
    let s: i64 = (0..grid.dim()).map(|d| q[d] * shift[d]).sum();
    2.0 * PI * s.rem_euclid(n) as f64 / n as f64
}

/// Unitary of a restricted Poincare element, lifted multiplicatively on the
/// occupation basis (a permutation times per-mode phases).
pub fn unitary_of(fock: &FockSpace, g: &PoincareElement) -> Result<FockOp> {
    let grid = fock.grid();
    g.validate(grid)?;
    let back = g.rotation.inverse();
    let omega = grid.omega();
    let rows = par::map_range(fock.dim(), |r| {
        let modes = fock.modes(r);
        let mut src: Vec<u32> = modes.iter().map(|&p| rotate_mode(grid, &back, p as usize) as u32).collect();
        src.sort_unstable();
        let angle: f64 = modes
            .iter()
            .map(|&p| g.y0 * omega[p as usize] - shift_phase(grid, p as usize, &g.shift))
            .sum();
        let col = fock.index_of(&src).expect("rotations permute the basis") as u32;
        vec![(col, Complex64::from_polar(1.0, angle))]
    });
    Ok(FockOp::from_rows(fock.dim(), rows, OpKind::Unitary))
}

/// `U(g) a~(x) U(g)^dagger` for an element with a single non-trivial part.
pub fn adjoint_on_coordinate_ladder(fock: &FockSpace, g: &PoincareElement, site: usize) -> Result<FockOp> {
    g.validate(fock.grid())?;
    if g.parts() > 1 {
        return Err(Error::UnsupportedElement(
            "the adjoint action is defined for pure time shifts, translations or rotations".into(),
        ));
    }
    coordinate_site_check(fock.grid(), site)?;
    let u = unitary_of(fock, g)?;
    let a = ladder_combination(fock, &coordinate_coefficients(fock.grid(), site), LadderKind::Annihilate);
    u.conjugate(&a)
}

fn coordinate_site_check(grid: &Grid, site: usize) -> Result<()> {
    if site >= grid.mode_count() {
        return Err(Error::IndexOutOfRange(format!("site {site} of {}", grid.mode_count())));
    }
    Ok(())
}

/// Coordinate kernel of a time-conjugated annihilator, read off matrix
/// elements: `G(x - z) = <0| U a~(x) U^dagger a~(z)^dagger |0>`, indexed by
/// the separation site `x - z`.
pub fn time_kernel_from_conjugation(fock: &FockSpace, y0: f64, site: usize) -> Result<Vec<Complex64>> {
    let grid = fock.grid();
    let conj = adjoint_on_coordinate_ladder(fock, &PoincareElement::time(grid.dim(), y0), site)?;
    // Vacuum row of the operator against one-particle momentum states.
    let one = fock.sector_range(1);
    let mut row = vec![Complex64::new(0.0, 0.0); grid.mode_count()];
    for (c, v) in conj.row(0) {
        if one.contains(&c) {
            row[c - one.start] = v;
        }
    }
    // <0|op a~(z)^dagger|0> = M^{-1/2} sum_p row_p e^{-i p.z}.
    let conj_row: Vec<Complex64> = row.iter().map(|v| v.conj()).collect();
    let by_z: Vec<Complex64> = grid.to_coordinate(&conj_row).into_iter().map(|v| v.conj()).collect();
    let mut kernel = vec![Complex64::new(0.0, 0.0); grid.mode_count()];
    for (z, v) in by_z.into_iter().enumerate() {
        kernel[grid.separation_index(site, z)] = v;
    }
    Ok(kernel)
}

/// `phi1(x0, x) = e^{i x0 P0} a~(x) e^{-i x0 P0}
/// = M^{-1/2} sum_p e^{i p.x} e^{-i omega x0} a_p`, built from the mode sum.
pub fn phi1_field(fock: &FockSpace, x0: f64, site: usize) -> Result<FockOp> {
    let grid = fock.grid();
    coordinate_site_check(grid, site)?;
    if !x0.is_finite() {
        return Err(crate::error::domain("phi1_field", format!("non-finite time {x0}")));
    }
    let coeffs: Vec<(u32, Complex64)> = coordinate_coefficients(grid, site)
        .into_iter()
        .map(|(p, c)| (p, c * Complex64::from_polar(1.0, -grid.omega()[p as usize] * x0)))
        .collect();
    Ok(ladder_combination(fock, &coeffs, LadderKind::Annihilate))
}

/// The same field built by conjugating `a~(x)` with the time unitary.
pub fn phi1_by_conjugation(fock: &FockSpace, x0: f64, site: usize) -> Result<FockOp> {
    adjoint_on_coordinate_ladder(fock, &PoincareElement::time(fock.grid().dim(), x0), site)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CovarianceReport {
    /// Relative Frobenius deviation of `U phi1(x0, x) U^dagger` from
    /// `phi1(x0 + y0, R x + y)`.
    pub deviation: f64,
    pub image_site: usize,
}

pub fn covariance_check(fock: &FockSpace, g: &PoincareElement, x0: f64, site: usize) -> Result<CovarianceReport> {
    let grid = fock.grid();
    let u = unitary_of(fock, g)?;
    let lhs = u.conjugate(&phi1_field(fock, x0, site)?)?;
    let image_site = transform_site(grid, &g.rotation, &g.shift, site);
    let rhs = phi1_field(fock, x0 + g.y0, image_site)?;
    let deviation = lhs.sub(&rhs)?.frobenius() / rhs.frobenius();
    Ok(CovarianceReport { deviation, image_site })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{build_fock, dgamma_diagonal, ladder, number_op, Normalization};
    use crate::grid::{Basis, GridSpec};

    fn fock(n: usize, points: usize, k: usize) -> FockSpace {
        build_fock(&Grid::new(GridSpec::new(n, points, 0.5, 1.0)).unwrap(), k).unwrap()
    }

    fn rel_dev(a: &FockOp, b: &FockOp) -> f64 {
        a.sub(b).unwrap().frobenius() / b.frobenius().max(1e-300)
    }

    #[test]
    fn rotation_groups_have_expected_order() {
        assert_eq!(LatticeRotation::all(1).len(), 1);
        assert_eq!(LatticeRotation::all(2).len(), 4);
        let cube = LatticeRotation::all(3);
        assert_eq!(cube.len(), 24);
        for r in &cube {
            let m = r.matrix();
            for i in 0..3 {
                for j in 0..3 {
                    let dot: i64 = (0..3).map(|k| m[i][k] * m[j][k]).sum();
                    assert_eq!(dot, (i == j) as i64);
                }
            }
            assert!(r.compose(&r.inverse()).is_identity());
            for s in &cube {
                assert!(cube.contains(&r.compose(s)));
            }
        }
        assert!(LatticeRotation::new(2, &[0, 1], &[1, -1]).is_err());
        assert!(LatticeRotation::new(2, &[0, 0], &[1, 1]).is_err());
    }

    #[test]
    fn compose_matches_matrix_product() {
        let cube = LatticeRotation::all(3);
        let v = [1, -2, 5];
        for a in &cube {
            for b in &cube {
                assert_eq!(a.compose(b).apply(&v), a.apply(&b.apply(&v)));
            }
        }
    }

    #[test]
    fn identity_element_is_identity_matrix() {
        let f = fock(2, 4, 2);
        let u = unitary_of(&f, &PoincareElement::identity(2)).unwrap();
        assert_eq!(u, FockOp::identity(f.dim()));
    }

    #[test]
    fn unitaries_are_unitary_and_conserve_number() {
        let f = fock(2, 4, 2);
        let n = number_op(&f);
        for r in LatticeRotation::all(2) {
            let g = PoincareElement { y0: 0.7, shift: [1, -3, 0], rotation: r, boost: [0.0; 3] };
            let u = unitary_of(&f, &g).unwrap();
            let uu = u.mul(&u.adjoint()).unwrap();
            assert!(uu.sub(&FockOp::identity(f.dim())).unwrap().frobenius() <= 1e-10);
            assert!(u.conjugate(&n).unwrap().sub(&n).unwrap().max_abs() < 1e-14);
        }
    }

    #[test]
    fn abelian_composition() {
        let f = fock(2, 4, 2);
        let pairs = [
            (PoincareElement::translation(2, [1, 0, 0]), PoincareElement::translation(2, [2, -1, 0])),
            (PoincareElement::translation(2, [0, 3, 0]), PoincareElement::time(2, -0.4)),
            (PoincareElement::time(2, 1.1), PoincareElement::time(2, 0.25)),
        ];
        for (g1, g2) in pairs {
            let lhs = unitary_of(&f, &g1).unwrap().mul(&unitary_of(&f, &g2).unwrap()).unwrap();
            let rhs = unitary_of(&f, &g1.compose(&g2)).unwrap();
            assert!(lhs.sub(&rhs).unwrap().max_abs() <= 1e-12);
        }
    }

    #[test]
    fn general_composition_law() {
        let f = fock(2, 4, 1);
        let rots = LatticeRotation::all(2);
        let g1 = PoincareElement { y0: 0.3, shift: [1, 2, 0], rotation: rots[1], boost: [0.0; 3] };
        let g2 = PoincareElement { y0: -0.1, shift: [3, 0, 0], rotation: rots[2], boost: [0.0; 3] };
        let lhs = unitary_of(&f, &g1).unwrap().mul(&unitary_of(&f, &g2).unwrap()).unwrap();
        let rhs = unitary_of(&f, &g1.compose(&g2)).unwrap();
        assert!(lhs.sub(&rhs).unwrap().max_abs() <= 1e-12);
    }

    #[test]
    fn shift_lemma() {
        let f = fock(2, 4, 2);
        let grid = f.grid();
        let shift = [1, -2, 0];
        let g = PoincareElement::translation(2, shift);
        for x in 0..grid.mode_count() {
            let lhs = adjoint_on_coordinate_ladder(&f, &g, x).unwrap();
            let moved = transform_site(grid, &LatticeRotation::identity(2), &shift, x);
            let rhs = ladder(&f, moved, Basis::Coordinate, LadderKind::Annihilate, Normalization::Noncovariant).unwrap();
            assert!(lhs.sub(&rhs).unwrap().max_abs() <= 1e-12);
        }
    }

    #[test]
    fn rotation_lemma_2d() {
        let f = fock(2, 4, 1);
        let grid = f.grid();
        for r in LatticeRotation::all(2) {
            let g = PoincareElement::rotation(r);
            for x in 0..grid.mode_count() {
                let lhs = adjoint_on_coordinate_ladder(&f, &g, x).unwrap();
                let rx = transform_site(grid, &r, &[0; 3], x);
                let rhs =
                    ladder(&f, rx, Basis::Coordinate, LadderKind::Annihilate, Normalization::Noncovariant).unwrap();
                assert!(lhs.sub(&rhs).unwrap().max_abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn physical_translation_must_be_on_lattice() {
        let grid = Grid::new(GridSpec::new(2, 4, 0.5, 1.0)).unwrap();
        let g = PoincareElement::physical_translation(&grid, &[1.0, -0.5, 0.0]).unwrap();
        assert_eq!(g.shift, [2, -1, 0]);
        assert!(matches!(
            PoincareElement::physical_translation(&grid, &[0.3, 0.0, 0.0]),
            Err(Error::UnsupportedElement(_))
        ));
    }

    #[test]
    fn boosts_and_mixed_elements_are_refused() {
        let f = fock(1, 8, 1);
        let boosted = PoincareElement { boost: [0.1, 0.0, 0.0], ..PoincareElement::identity(1) };
        assert!(matches!(unitary_of(&f, &boosted), Err(Error::UnsupportedElement(_))));
        assert!(adjoint_on_coordinate_ladder(&f, &boosted, 0).is_err());
        let mixed = PoincareElement { y0: 0.1, shift: [1, 0, 0], ..PoincareElement::identity(1) };
        assert!(adjoint_on_coordinate_ladder(&f, &mixed, 0).is_err());
    }

    #[test]
    fn phi1_at_time_zero_is_coordinate_ladder() {
        let f = fock(1, 8, 2);
        for x in 0..8 {
            let a = ladder(&f, x, Basis::Coordinate, LadderKind::Annihilate, Normalization::Noncovariant).unwrap();
            assert_eq!(phi1_field(&f, 0.0, x).unwrap(), a);
        }
    }

    #[test]
    fn phi1_two_paths_agree() {
        let f = fock(1, 8, 2);
        for (x0, x) in [(0.3, 1), (-1.7, 5), (4.0, 7)] {
            let direct = phi1_field(&f, x0, x).unwrap();
            let conj = phi1_by_conjugation(&f, x0, x).unwrap();
            assert!(direct.sub(&conj).unwrap().max_abs() <= 1e-12);
        }
    }

    #[test]
    fn phi1_one_particle_matrix_element() {
        let f = fock(1, 8, 1);
        let grid = f.grid();
        let (x0, x) = (0.8, 3);
        let phi = phi1_field(&f, x0, x).unwrap();
        for p in 0..8 {
            let col = f.one_particle(p).unwrap();
            let angle = grid.momentum(p)[0] * grid.position(x)[0] - grid.omega()[p] * x0;
            let expect = Complex64::from_polar(1.0 / 8f64.sqrt(), angle);
            assert!((phi.get(0, col) - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn time_kernel_matches_fft_phase_oracle() {
        let f = fock(2, 8, 1);
        let grid = f.grid();
        let y0 = 0.5;
        let oracle = grid.lattice_kernel(|_, w| Complex64::from_polar(1.0, -w * y0), None);
        for site in [0, 9, 37] {
            let k = time_kernel_from_conjugation(&f, y0, site).unwrap();
            for (a, b) in k.iter().zip(&oracle) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn covariance_in_two_dimensions() {
        let f = fock(2, 4, 2);
        for r in LatticeRotation::all(2) {
            let g = PoincareElement { y0: 0.4, shift: [1, 2, 0], rotation: r, boost: [0.0; 3] };
            for x in [0, 6, 13] {
                let rep = covariance_check(&f, &g, -0.3, x).unwrap();
                assert!(rep.deviation <= 1e-10);
            }
        }
    }

    #[test]
    fn momentum_and_rotations_are_time_invariant() {
        let f = fock(2, 4, 2);
        let grid = f.grid();
        let u = unitary_of(&f, &PoincareElement::time(2, 0.9)).unwrap();
        for j in 0..2 {
            let d: Vec<Complex64> = (0..grid.mode_count()).map(|p| Complex64::new(grid.momentum(p)[j], 0.0)).collect();
            let pj = dgamma_diagonal(&f, &d).unwrap();
            let moved = u.adjoint().mul(&pj).unwrap().mul(&u).unwrap();
            assert!(moved.sub(&pj).unwrap().frobenius() <= 1e-10);
        }
        // The lattice rotations themselves commute exactly with time shifts.
        for r in LatticeRotation::all(2) {
            let ur = unitary_of(&f, &PoincareElement::rotation(r)).unwrap();
            let moved = u.adjoint().mul(&ur).unwrap().mul(&u).unwrap();
            assert!(rel_dev(&moved, &ur) <= 1e-10);
        }
    }

    #[test]
    fn rotation_generator_time_invariance_is_band_limited() {
        // The generator uses the spectral X, whose commutator with the energy
        // feels the periodic box edge through the e^{-m r} energy kernel.
        // The drift on a localized state dies off as the box grows.
        use crate::onebody::{rotation_action, Action};
        let drift = |points: usize| {
            let grid = Grid::new(GridSpec::new(2, points, 0.5, 1.0)).unwrap();
            let rot = rotation_action(&grid, 0, 1).unwrap();
            let moved = Action::Product(vec![Action::phase(&grid, -0.9), rot.clone(), Action::phase(&grid, 0.9)]);
            let psi = crate::states::gaussian_state(&grid, &[0.3, -0.2, 0.0], &[0.1, 0.4, 0.0], 1.0);
            let a = moved.apply(&grid, &psi);
            let b = rot.apply(&grid, &psi);
            a.iter().zip(&b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
        };
        let (small, large) = (drift(32), drift(64));
        assert!(small < 1e-3, "{small}");
        assert!(large < 1e-6 && large < small / 100.0, "{small} {large}");
    }
}
