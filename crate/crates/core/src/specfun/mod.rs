//! Gamma function, modified Bessel functions of the second kind and the
//! radial kernels obtained by Fourier transforming powers of the dispersion.
//!
//! Every continuum kernel `k(x)` here is normalized so that the lattice sum
//! `M^{-1} sum_p symbol(p) e^{i p.x}` approaches `a^n k(x)` in the continuum
//! limit, see [`Kernel::symbol`].

pub mod quadrature;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::grid::Vec3;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

/// Gamma function (Lanczos approximation with reflection below 1/2).
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !x.is_finite() || is_nonpositive_integer(x) {
        return Err(domain("gamma_fn", format!("pole or non-finite argument {x}")));
    }
    Ok(gamma_unchecked(x))
}

fn gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma_unchecked(1.0 - x));
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
}

/// Modified Bessel function `K_nu(z)` for real order and `z > 0`.
///
/// Half-integer orders up to 5/2 use the closed forms; other orders integrate
/// `K_nu(z) = int_0^inf exp(-z cosh t) cosh(nu t) dt` adaptively.
pub fn bessel_k(nu: f64, z: f64) -> Result<f64> {
    if !(z.is_finite() && z > 0.0) {
        return Err(domain("bessel_k", format!("argument must be positive, got {z}")));
    }
    if !nu.is_finite() {
        return Err(domain("bessel_k", format!("non-finite order {nu}")));
    }
    let nu = nu.abs();
    let half = (PI / (2.0 * z)).sqrt() * (-z).exp();
    if nu == 0.5 {
        return Ok(half);
    }
    if nu == 1.5 {
        return Ok(half * (1.0 + 1.0 / z));
    }
    if nu == 2.5 {
        return Ok(half * (1.0 + 3.0 / z + 3.0 / (z * z)));
    }
    Ok((-z).exp() * scaled_integral(nu, z))
}

/// `int_0^T exp(-z (cosh t - 1)) cosh(nu t) dt` with `T` past the point where
/// the integrand has dropped 46 e-folds below its peak.
fn scaled_integral(nu: f64, z: f64) -> f64 {
    let log_integrand = |t: f64| -z * (t.cosh() - 1.0) + log_cosh(nu * t);
    let peak_t = if nu > z { (2.0 * nu / z).ln().max(0.0) } else { 0.0 };
    let log_peak = log_integrand(peak_t).max(0.0);
    let mut upper = peak_t + 1.0;
    while log_integrand(upper) > log_peak - 46.0 {
        upper += 0.5;
    }
    let integrand = |t: f64| (-z * (t.cosh() - 1.0)).exp() * (nu * t).cosh();
    // Split at the peak so both panels see a monotone tail.
    let mut total = 0.0;
    let mut lo = 0.0;
    for hi in [peak_t, upper] {
        if hi > lo {
            total += quadrature::integrate(integrand, lo, hi, 0.0, 1e-14);
            lo = hi;
        }
    }
    total
}

fn log_cosh(x: f64) -> f64 {
    let x = x.abs();
    x + (-2.0 * x).exp().ln_1p() - std::f64::consts::LN_2
}

fn check_radius(function: &'static str, r: f64) -> Result<()> {
    if r.is_finite() && r > 0.0 {
        Ok(())
    } else {
        Err(domain(function, format!("radius must be positive, got {r}")))
    }
}

/// Fourier transform of `(|p|^2 + m^2)^lambda` over `R^n` at radius `r`:
/// `2^{lambda+1} (2 pi)^{n/2} / Gamma(-lambda) (m/r)^{n/2+lambda} K_{n/2+lambda}(m r)`.
///
/// Vanishes identically for nonnegative integer `lambda` (polynomial symbols
/// transform to derivatives of a delta supported at the origin).
pub fn power_kernel(lambda: f64, m: f64, n: usize, r: f64) -> Result<f64> {
    check_radius("power_kernel", r)?;
    if is_nonpositive_integer(-lambda) {
        return Ok(0.0);
    }
    let order = 0.5 * n as f64 + lambda;
    let prefactor = 2f64.powf(lambda + 1.0) * (2.0 * PI).powf(0.5 * n as f64) / gamma_fn(-lambda)?;
    Ok(prefactor * (m / r).powf(order) * bessel_k(order, m * r)?)
}

/// Coordinate kernel of the energy operator,
/// `-2 (2 pi)^{-(n+1)/2} (m/r)^{(n+1)/2} K_{(n+1)/2}(m r)`.
pub fn omega_kernel(m: f64, n: usize, r: f64) -> Result<f64> {
    check_radius("omega_kernel", r)?;
    let order = 0.5 * (n as f64 + 1.0);
    Ok(-2.0 * (2.0 * PI).powf(-order) * (m / r).powf(order) * bessel_k(order, m * r)?)
}

/// Coordinate kernel of the velocity operator, `-x_j * omega_kernel(|x|)`
/// componentwise (plain spatial components).
pub fn velocity_kernel(m: f64, n: usize, x: &Vec3) -> Result<Vec3> {
    let r = x[..n].iter().map(|c| c * c).sum::<f64>().sqrt();
    if r == 0.0 {
        return Err(domain("velocity_kernel", "kernel is singular at the origin"));
    }
    let order = 0.5 * (n as f64 + 1.0);
    let radial = 2.0 * (2.0 * PI).powf(-order) * (m / r).powf(order) * bessel_k(order, m * r)?;
    let mut out = [0.0; 3];
    for j in 0..n {
        out[j] = radial * x[j];
    }
    Ok(out)
}

/// Coordinate kernel of a time translation by `y0` in three dimensions,
/// `(i y0 / (2 pi^2)) m^2 K_2(m s) / s^2` with `s = sqrt(r^2 - y0^2)`.
///
/// Only the spacelike region `r > |y0|` is supported.
pub fn time_translation_kernel(m: f64, y0: f64, r: f64) -> Result<Complex64> {
    check_radius("time_translation_kernel", r)?;
    if r <= y0.abs() {
        return Err(Error::UnsupportedBranch(format!(
            "time translation kernel needs r > |y0| (r = {r}, y0 = {y0})"
        )));
    }
    if y0 == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let s2 = r * r - y0 * y0;
    let s = s2.sqrt();
    let radial = m * m * bessel_k(2.0, m * s)? / s2;
    Ok(Complex64::new(0.0, y0 / (2.0 * PI * PI) * radial))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelKind {
    Omega,
    VelocityComponent { j: usize },
    TimeTranslation { y0: f64 },
    GeneralPower { lambda: f64 },
}

/// An analytic coordinate kernel together with its momentum-space symbol.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    pub kind: KernelKind,
    pub m: f64,
    pub n: usize,
}

impl Kernel {
    pub fn new(kind: KernelKind, m: f64, n: usize) -> Result<Kernel> {
        if !(m.is_finite() && m > 0.0) {
            return Err(domain("Kernel::new", format!("mass must be positive, got {m}")));
        }
        if !(1..=3).contains(&n) {
            return Err(domain("Kernel::new", format!("dimension must be 1..=3, got {n}")));
        }
        match kind {
            KernelKind::TimeTranslation { .. } if n != 3 => Err(domain(
                "Kernel::new",
                "the time translation kernel is only defined for n = 3",
            )),
            KernelKind::VelocityComponent { j } if j >= n => Err(Error::IndexOutOfRange(format!(
                "velocity component {j} in dimension {n}"
            ))),
            _ => Ok(Kernel { kind, m, n }),
        }
    }

    /// Momentum-space symbol whose lattice transform approximates `a^n` times
    /// [`Kernel::eval`].
    pub fn symbol(&self, p: &Vec3, omega: f64) -> Complex64 {
        match self.kind {
            KernelKind::Omega => Complex64::new(omega, 0.0),
            KernelKind::VelocityComponent { j } => Complex64::new(p[j] / omega, 0.0),
            KernelKind::TimeTranslation { y0 } => Complex64::from_polar(1.0, -omega * y0),
            KernelKind::GeneralPower { lambda } => Complex64::new(omega.powf(2.0 * lambda), 0.0),
        }
    }

    /// Continuum kernel at separation `x`. The velocity kernel enters the
    /// velocity operator with a factor `-i`, so `eval` returns `i` times it.
    pub fn eval(&self, x: &Vec3) -> Result<Complex64> {
        let r = x[..self.n].iter().map(|c| c * c).sum::<f64>().sqrt();
        let real = |v: f64| Complex64::new(v, 0.0);
        match self.kind {
            KernelKind::Omega => omega_kernel(self.m, self.n, r).map(real),
            KernelKind::VelocityComponent { j } => {
                let v = velocity_kernel(self.m, self.n, x)?;
                Ok(Complex64::new(0.0, v[j]))
            }
            KernelKind::TimeTranslation { y0 } => time_translation_kernel(self.m, y0, r),
            KernelKind::GeneralPower { lambda } => {
                let pk = power_kernel(lambda, self.m, self.n, r)?;
                Ok(real(pk * (2.0 * PI).powi(-(self.n as i32))))
            }
        }
    }
}
