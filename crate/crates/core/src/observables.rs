//! Expectation values, variances and uncertainty products, with the closed
//! forms they are compared against.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gauss::GaussExpSum;
use crate::operators::{apply, momentum_op, position_op, OperatorKind};
use crate::qcore::{spectrum_energy, DeformationParams};

/// Imaginary parts of Hermitian expectations above this (relative to
/// `max(1, |value|)`) indicate a bug rather than rounding.
pub const IMAG_TOL: f64 = 1e-10;
/// Negative variances down to this are rounding and clamp to zero.
pub const VARIANCE_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UncertaintyReport {
    pub mean_x: f64,
    pub mean_p: f64,
    pub var_x: f64,
    pub var_p: f64,
    /// `sqrt(var_x) sqrt(var_p)`.
    pub product: f64,
    pub energy: f64,
}

fn real_part(name: &str, z: Complex64) -> Result<f64> {
    if z.im.abs() > IMAG_TOL * z.re.abs().max(1.0) {
        return Err(Error::Inconsistent(format!(
            "{name} has imaginary part {:e}",
            z.im
        )));
    }
    Ok(z.re)
}

fn variance(name: &str, second: f64, mean: f64) -> Result<f64> {
    let v = second - mean * mean;
    if v < -VARIANCE_SLACK * second.abs().max(1.0) {
        return Err(Error::Inconsistent(format!(
            "{name} variance is negative: {v:e}"
        )));
    }
    Ok(v.max(0.0))
}

impl UncertaintyReport {
    /// Assembles a report from `<x>, <p>, <x^2>, <p^2>, <H>`.
    pub fn from_moments(
        mean_x: Complex64,
        mean_p: Complex64,
        x2: Complex64,
        p2: Complex64,
        energy: Complex64,
    ) -> Result<Self> {
        let mean_x = real_part("<x>", mean_x)?;
        let mean_p = real_part("<p>", mean_p)?;
        let x2 = real_part("<x^2>", x2)?;
        let p2 = real_part("<p^2>", p2)?;
        let energy = real_part("<H>", energy)?;
        let var_x = variance("x", x2, mean_x)?;
        let var_p = variance("p", p2, mean_p)?;
        Ok(Self {
            mean_x,
            mean_p,
            var_x,
            var_p,
            product: var_x.sqrt() * var_p.sqrt(),
            energy,
        })
    }
}

/// `<f|Op f> / <f|f>` with exact inner products.
pub fn expectation(
    kind: OperatorKind,
    f: &GaussExpSum,
    params: &DeformationParams,
) -> Result<Complex64> {
    let norm = nonzero_norm_sqr(f)?;
    Ok(f.inner_product(&apply(kind, f, params)?) / norm)
}

fn nonzero_norm_sqr(f: &GaussExpSum) -> Result<f64> {
    let n = f.norm_sqr();
    if f.is_empty() || !(n > 0.0) {
        Err(Error::ZeroState)
    } else {
        Ok(n)
    }
}

pub fn uncertainty_report(
    f: &GaussExpSum,
    params: &DeformationParams,
) -> Result<UncertaintyReport> {
    let norm = nonzero_norm_sqr(f)?;
    let xf = position_op(f, params)?;
    let pf = momentum_op(f, params)?;
    let mean_x = f.inner_product(&xf) / norm;
    let mean_p = f.inner_product(&pf) / norm;
    let x2 = f.inner_product(&position_op(&xf, params)?) / norm;
    let p2 = f.inner_product(&momentum_op(&pf, params)?) / norm;
    let energy = expectation(OperatorKind::Hamiltonian, f, params)?;
    UncertaintyReport::from_moments(mean_x, mean_p, x2, p2, energy)
}

/// `E_n / omega`, the eigenstate uncertainty product.
pub fn uncertainty_eigen_closed_form(n: u32, params: &DeformationParams) -> f64 {
    spectrum_energy(n, &params.with_omega(1.0).expect("unit frequency is valid"))
}

fn check_disk(lambda: Complex64, q: f64) -> Result<()> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "q = {q} must lie in (0, 1)"
        )));
    }
    if lambda.norm_sqr() * (1.0 - q) >= 1.0 {
        return Err(Error::OutsideConvergenceDisk {
            modulus: lambda.norm(),
            radius: (1.0 - q).sqrt().recip(),
        });
    }
    Ok(())
}

/// `1/2 - (1-q)/2 |lambda|^2`.
pub fn uncertainty_coherent_closed_form(lambda: Complex64, q: f64) -> Result<f64> {
    check_disk(lambda, q)?;
    Ok(0.5 - 0.5 * (1.0 - q) * lambda.norm_sqr())
}

/// `omega (1/2 + (1+q)/2 |lambda|^2)`.
pub fn energy_coherent_closed_form(lambda: Complex64, q: f64, omega: f64) -> Result<f64> {
    check_disk(lambda, q)?;
    Ok(omega * (0.5 + 0.5 * (1.0 + q) * lambda.norm_sqr()))
}
