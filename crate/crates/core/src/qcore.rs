//! q-arithmetic: q-integers, q-factorials, q-binomials, the q-exponential with a
//! certified truncation bound, and the oscillator spectrum.
//!
//! Throughout, `[n] = (1 - q^n) / (1 - q)` and `[n]! = [1][2]...[n]`. The
//! public functions work in `f64`; the `*_dd` variants feed the exact
//! Gaussian-exponential algebra.

use num_complex::Complex64;

use crate::dd::Dd;
use crate::error::{Error, Result};

/// Above this q the q-integer is summed term by term to avoid the
/// cancellation in `(1 - q^n) / (1 - q)`.
pub const GEOMETRIC_SUM_THRESHOLD: f64 = 1.0 - 1e-6;

/// Term cap for [`q_exponential`].
pub const Q_EXP_MAX_TERMS: usize = 10_000;
/// Term cap for [`ln_q_exponential`].
pub const LN_Q_EXP_MAX_TERMS: usize = 1_000_000;

/// Deformation parameters `(q, alpha, omega)` with `q = exp(-2 alpha^2)`.
///
/// The `f64` fields are roundings of an internal double-double pair that is
/// exactly consistent, so downstream operator constants never see the
/// rounding of the `q <-> alpha` round trip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeformationParams {
    q: f64,
    alpha: f64,
    omega: f64,
    q_dd: Dd,
    alpha_dd: Dd,
}

impl DeformationParams {
    pub fn new(q: f64, omega: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "q = {q} must lie in (0, 1)"
            )));
        }
        check_omega(omega)?;
        let q_dd = Dd::new(q);
        let alpha_dd = (-q_dd.ln()).mul_pow2(0.5).sqrt();
        Ok(Self {
            q,
            alpha: alpha_dd.to_f64(),
            omega,
            q_dd,
            alpha_dd,
        })
    }

    /// Builds from the deformation scale `alpha = sqrt(-ln(q) / 2)`.
    pub fn from_alpha(alpha: f64, omega: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "alpha = {alpha} must be positive"
            )));
        }
        check_omega(omega)?;
        let alpha_dd = Dd::new(alpha);
        let q_dd = (-alpha_dd.sqr().mul_pow2(2.0)).exp();
        let q = q_dd.to_f64();
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha = {alpha} maps to q = {q} outside (0, 1)"
            )));
        }
        Ok(Self {
            q,
            alpha,
            omega,
            q_dd,
            alpha_dd,
        })
    }

    pub fn with_omega(&self, omega: f64) -> Result<Self> {
        check_omega(omega)?;
        Ok(Self { omega, ..*self })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn q_dd(&self) -> Dd {
        self.q_dd
    }

    pub fn alpha_dd(&self) -> Dd {
        self.alpha_dd
    }

    /// `1 - q` in double-double.
    pub fn one_minus_q_dd(&self) -> Dd {
        Dd::ONE - self.q_dd
    }

    /// `sqrt(1 - q)`, the operator normalization, taken from q directly.
    pub fn sqrt_one_minus_q_dd(&self) -> Dd {
        self.one_minus_q_dd().sqrt()
    }

    /// Radius `1/sqrt(1-q)` of the admissible coherent-state eigenvalues.
    pub fn coherent_radius(&self) -> f64 {
        1.0 / (1.0 - self.q).sqrt()
    }

    /// `omega / (1 - q)`, the supremum of the spectrum.
    pub fn energy_bound(&self) -> f64 {
        self.omega / (1.0 - self.q)
    }
}

fn check_omega(omega: f64) -> Result<()> {
    if omega > 0.0 && omega.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "omega = {omega} must be positive"
        )))
    }
}

/// Partial sum of a series together with a certified bound on the discarded tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedSeriesValue {
    pub value: Complex64,
    pub abs_error_bound: f64,
    pub terms_used: usize,
}

/// q-integer `[n]`, correctly rounded from a double-double evaluation.
pub fn q_integer(n: u32, q: f64) -> f64 {
    q_integer_dd(n, Dd::new(q)).to_f64()
}

/// q-factorial `[n]!`.
pub fn q_factorial(n: u32, q: f64) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * q_integer(k, q))
}

/// `ln([n]!)`, safe for ratios whose numerator and denominator overflow.
pub fn ln_q_factorial(n: u32, q: f64) -> f64 {
    (1..=n).map(|k| q_integer(k, q).ln()).sum()
}

/// q-binomial coefficient `[n]! / ([k]! [n-k]!)`.
pub fn q_binomial(n: u32, k: u32, q: f64) -> Result<f64> {
    if k > n {
        return Err(Error::Domain(format!(
            "q_binomial needs 0 <= k <= n, got n = {n}, k = {k}"
        )));
    }
    let k = k.min(n - k);
    Ok((1..=k).fold(1.0, |acc, j| {
        acc * q_integer(n - k + j, q) / q_integer(j, q)
    }))
}

/// Radius `1/(1-q)` of the disk where the q-exponential series converges.
pub fn convergence_radius(q: f64) -> f64 {
    1.0 / (1.0 - q)
}

/// q-exponential `sum_n z^n / [n]!`, truncated once the tail is certified below `tol`.
///
/// After including terms `0..=N`, every later term ratio is at most
/// `r = |z| / [N+1]` because `[m]` increases with `m`; the tail is then bounded by
/// `|t_N| r / (1 - r)`.
pub fn q_exponential(z: Complex64, q: f64, tol: f64) -> Result<TruncatedSeriesValue> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "q = {q} must lie in (0, 1)"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tol = {tol} must be positive"
        )));
    }
    let modulus = z.norm();
    if modulus * (1.0 - q) >= 1.0 {
        return Err(Error::DivergentArgument {
            modulus,
            radius: convergence_radius(q),
        });
    }
    let q_dd = Dd::new(q);
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut n: u32 = 0;
    // [n+1] = 1 + q [n]
    let mut q_int = Dd::ZERO;
    loop {
        q_int = Dd::ONE + q_dd * q_int;
        let next = q_int.to_f64();
        let r = modulus / next;
        if r < 1.0 {
            let bound = term.norm() * r / (1.0 - r);
            if bound <= tol {
                return Ok(TruncatedSeriesValue {
                    value: sum,
                    abs_error_bound: bound,
                    terms_used: n as usize + 1,
                });
            }
        }
        if n as usize + 1 >= Q_EXP_MAX_TERMS {
            return Err(Error::NoConvergence {
                terms: Q_EXP_MAX_TERMS,
            });
        }
        term = term * z / next;
        sum += term;
        n += 1;
    }
}

/// `ln exp_q(z)` from the product form `exp_q(z) = 1 / ((1-q) z; q)_inf`:
///
/// ```text
/// ln exp_q(z) = sum_{n>=1} ((1-q) z)^n / (n (1 - q^n))
/// ```
///
/// Terms never exceed `|z|` in size, so this stays accurate where the power
/// series of [`q_exponential`] has astronomically large, cancelling terms.
pub fn ln_q_exponential(z: Complex64, q: f64) -> Result<Complex64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "q = {q} must lie in (0, 1)"
        )));
    }
    let rho = z.norm() * (1.0 - q);
    if rho >= 1.0 {
        return Err(Error::DivergentArgument {
            modulus: z.norm(),
            radius: convergence_radius(q),
        });
    }
    let w = z * (1.0 - q);
    let one_minus_q = Dd::ONE - Dd::new(q);
    let q_dd = Dd::new(q);
    let mut power = Complex64::new(1.0, 0.0);
    let mut q_int = Dd::ZERO;
    let mut sum = Complex64::new(0.0, 0.0);
    for n in 1..=LN_Q_EXP_MAX_TERMS {
        power *= w;
        q_int = Dd::ONE + q_dd * q_int;
        // 1 - q^n = (1 - q) [n]
        let term = power / (n as f64 * (one_minus_q * q_int).to_f64());
        sum += term;
        // n (1 - q^n) grows, so later terms shrink at least geometrically by rho
        if term.norm() * rho / (1.0 - rho) <= 1e-17 * sum.norm().max(1.0) {
            return Ok(sum);
        }
    }
    Err(Error::NoConvergence {
        terms: LN_Q_EXP_MAX_TERMS,
    })
}

/// Oscillator level `E_n = omega ([n] + q^n / 2)`.
pub fn spectrum_energy(n: u32, params: &DeformationParams) -> f64 {
    let q = params.q_dd();
    let e = q_integer_dd(n, q) + q.powi(n as i32).mul_pow2(0.5);
    (e * Dd::new(params.omega())).to_f64()
}

/// `E_n(q = 1 - eps) - omega (n + 1/2 - n^2 eps / 2)`; of order `eps^2`.
pub fn quadratic_expansion_residual(n: u32, eps: f64, omega: f64) -> f64 {
    let q = Dd::ONE - Dd::new(eps);
    let nf = n as f64;
    let exact = q_integer_dd(n, q) + q.powi(n as i32).mul_pow2(0.5);
    let model = Dd::new(nf + 0.5) - Dd::new(0.5 * nf * nf) * Dd::new(eps);
    ((exact - model) * Dd::new(omega)).to_f64()
}

/// `[n]` in double-double: explicit geometric summation for q close to 1,
/// the closed form otherwise (exact `1 - q` keeps both cancellation-free).
pub(crate) fn q_integer_dd(n: u32, q: Dd) -> Dd {
    if n == 0 {
        return Dd::ZERO;
    }
    if q.hi() > GEOMETRIC_SUM_THRESHOLD {
        let mut sum = Dd::ZERO;
        let mut p = Dd::ONE;
        for _ in 0..n {
            sum += p;
            p *= q;
        }
        sum
    } else {
        (Dd::ONE - q.powi(n as i32)) / (Dd::ONE - q)
    }
}

pub(crate) fn q_factorial_dd(n: u32, q: Dd) -> Dd {
    let mut acc = Dd::ONE;
    for k in 1..=n {
        acc *= q_integer_dd(k, q);
    }
    acc
}

pub(crate) fn q_binomial_dd(n: u32, k: u32, q: Dd) -> Dd {
    let k = k.min(n - k);
    let mut acc = Dd::ONE;
    for j in 1..=k {
        acc = acc * q_integer_dd(n - k + j, q) / q_integer_dd(j, q);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ulps(a: f64, b: f64) -> f64 {
        ((a - b) / (f64::EPSILON * a.abs().max(b.abs()))).abs()
    }

    fn params(q: f64) -> DeformationParams {
        DeformationParams::new(q, 1.0).unwrap()
    }

    #[test]
    fn q_integer_examples() {
        assert_eq!(q_integer(0, 0.7), 0.0);
        assert!((q_integer(3, 0.5) - (1.0 + 0.5 + 0.25)).abs() < 1e-15);
        assert!((q_integer(5, 1.0 - 1e-12) - 5.0).abs() < 1e-9);
    }

    #[test]
    fn q_integer_is_increasing_and_bounded() {
        for &q in &[0.05, 0.5, 0.9, 0.999, 1.0 - 1e-7] {
            let bound = 1.0 / (1.0 - q);
            let mut prev = -1.0;
            for n in 0..400 {
                let v = q_integer(n, q);
                assert!(v <= bound);
                // strict order is only resolvable while q^n is above rounding
                if q.powi(n as i32) > 4.0 * f64::EPSILON * bound {
                    assert!(v > prev);
                    assert!(v < bound);
                } else {
                    assert!(v >= prev);
                }
                prev = v;
            }
        }
    }

    #[test]
    fn q_factorial_examples() {
        assert_eq!(q_factorial(0, 0.3), 1.0);
        // oracle: 1 * 1.5 * 1.75
        assert!((q_factorial(3, 0.5) - 2.625).abs() < 1e-15);
        assert!((q_factorial(4, 1.0 - 1e-12) - 24.0).abs() < 1e-7);
        assert!((ln_q_factorial(7, 0.4) - q_factorial(7, 0.4).ln()).abs() < 1e-13);
        let q: f64 = 0.8;
        assert!(q_factorial(10, q) <= (1.0 / (1.0 - q)).powi(10));
    }

    #[test]
    fn q_binomial_examples() {
        assert_eq!(q_binomial(5, 0, 0.4).unwrap(), 1.0);
        assert_eq!(
            q_binomial(4, 2, 0.5).unwrap(),
            q_binomial(4, 4 - 2, 0.5).unwrap()
        );
        // oracle: [3]!/([1]![2]!) = 2.625/1.5
        assert!((q_binomial(3, 1, 0.5).unwrap() - 1.75).abs() < 1e-15);
        assert!(matches!(q_binomial(3, 4, 0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn q_exponential_examples() {
        let v = q_exponential(Complex64::new(0.0, 0.0), 0.5, 1e-15).unwrap();
        assert_eq!(v.value, Complex64::new(1.0, 0.0));
        assert_eq!(v.abs_error_bound, 0.0);
        assert!(v.terms_used >= 1);

        let v = q_exponential(Complex64::new(1.0, 0.0), 1.0 - 1e-10, 1e-9).unwrap();
        assert!((v.value.re - std::f64::consts::E).abs() < 1e-6);

        assert!(matches!(
            q_exponential(Complex64::new(2.0, 0.0), 0.5, 1e-12),
            Err(Error::DivergentArgument { .. })
        ));
    }

    #[test]
    fn q_exponential_bound_is_honest() {
        // reference: same series summed far past the stopping point
        let q = 0.6;
        let z = Complex64::new(1.2, -0.7);
        let v = q_exponential(z, q, 1e-6).unwrap();
        let mut term = Complex64::new(1.0, 0.0);
        let mut reference = term;
        for n in 1..400 {
            term = term * z / q_integer(n, q);
            reference += term;
        }
        assert!((v.value - reference).norm() <= v.abs_error_bound + 1e-15);
    }

    #[test]
    fn q_exponential_near_the_boundary_hits_the_cap() {
        let q = 0.5;
        let z = Complex64::new(2.0 * (1.0 - 1e-9), 0.0);
        assert!(matches!(
            q_exponential(z, q, 1e-14),
            Err(Error::NoConvergence { .. })
        ));
    }

    #[test]
    fn q_exponential_classical_limit() {
        let q = 1.0 - 1e-10;
        for i in 0..=12 {
            let r = 3.0 * i as f64 / 12.0;
            for &phase in &[0.0, 1.0, 2.5, -2.0] {
                let z = Complex64::from_polar(r, phase);
                let v = q_exponential(z, q, 1e-13).unwrap();
                assert!((v.value - z.exp()).norm() < 1e-6, "z = {z}");
            }
        }
    }

    #[test]
    fn convergence_radius_examples() {
        assert_eq!(convergence_radius(0.5), 2.0);
        assert!((convergence_radius(0.9) - 10.0).abs() < 1e-12);
        let mut prev = 0.0;
        for &q in &[0.1, 0.5, 0.9, 0.99, 0.9999] {
            let r = convergence_radius(q);
            assert!(r > prev);
            prev = r;
        }
    }

    #[test]
    fn spectrum_examples() {
        let p = DeformationParams::new(0.37, 2.5).unwrap();
        assert_eq!(spectrum_energy(0, &p), 1.25);
        let p = params(0.5);
        assert!((spectrum_energy(2, &p) - 1.625).abs() < 1e-15);
        assert!((spectrum_energy(60, &p) - 2.0).abs() < 1e-15);
        for n in 0..50 {
            assert!(spectrum_energy(n, &p) < 2.0);
        }
    }

    #[test]
    fn spectrum_forms_agree() {
        for &q in &[0.1, 0.5, 0.9, 0.99] {
            let p = params(q);
            for n in 0..40 {
                let a = spectrum_energy(n, &p);
                let b = 0.5 * (q_integer(n, q) + q_integer(n + 1, q));
                assert!(ulps(a, b) <= 4.0, "q={q} n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn spectrum_bounded_by_classical() {
        for &q in &[0.1, 0.5, 0.9, 0.999] {
            let p = params(q);
            assert!(spectrum_energy(0, &p) == 0.5);
            for n in
                (1..50).take_while(|&n| q.powi(n as i32) > 4.0 * f64::EPSILON * p.energy_bound())
            {
                let e = spectrum_energy(n, &p);
                assert!(e < n as f64 + 0.5);
                assert!(e < p.energy_bound());
                assert!(e > spectrum_energy(n - 1, &p));
            }
        }
    }

    #[test]
    fn quadratic_expansion_examples() {
        assert!(quadratic_expansion_residual(0, 0.01, 1.0).abs() < 1e-16);
        let r1 = quadratic_expansion_residual(3, 1e-3, 1.0);
        let r2 = quadratic_expansion_residual(3, 5e-4, 1.0);
        let ratio = r1 / r2;
        assert!((ratio - 4.0).abs() < 0.8, "ratio {ratio}");
        assert!(quadratic_expansion_residual(1, 1e-8, 1.0).abs() < 1e-14);
    }

    #[test]
    fn params_round_trip() {
        for i in 1..200 {
            let q = i as f64 / 200.0;
            let p = params(q);
            let alpha_f64 = (-q.ln() / 2.0).sqrt();
            assert!(ulps(p.alpha(), alpha_f64) <= 4.0, "q={q}");
            let back = (-p.alpha_dd().sqr().mul_pow2(2.0)).exp().to_f64();
            assert!(ulps(back, q) <= 4.0, "q={q}");
        }
        let p = DeformationParams::from_alpha(0.8, 1.0).unwrap();
        assert!(ulps(p.q(), (-2.0f64 * 0.64).exp()) <= 4.0);
        assert!(DeformationParams::new(1.0, 1.0).is_err());
        assert!(DeformationParams::new(0.0, 1.0).is_err());
        assert!(DeformationParams::new(0.5, -1.0).is_err());
        assert!(DeformationParams::from_alpha(1e-12, 1.0).is_err());
    }

    #[test]
    fn dd_helpers_match_f64() {
        let q = 0.73;
        for n in 0..20 {
            assert!((q_integer_dd(n, Dd::new(q)).to_f64() - q_integer(n, q)).abs() < 1e-14);
            for k in 0..=n {
                let a = q_binomial_dd(n, k, Dd::new(q)).to_f64();
                let b = q_binomial(n, k, q).unwrap();
                assert!((a - b).abs() < 1e-12 * b);
            }
        }
        assert!((q_factorial_dd(6, Dd::new(q)).to_f64() - q_factorial(6, q)).abs() < 1e-12);
    }

    #[test]
    fn log_form_matches_power_series() {
        for &(q, z) in &[
            (0.5, Complex64::new(1.2, -0.4)),
            (0.9, Complex64::new(-3.0, 5.0)),
            (0.2, Complex64::new(0.0, 1.1)),
        ] {
            let direct = q_exponential(z, q, 1e-16).unwrap().value;
            let via_log = ln_q_exponential(z, q).unwrap().exp();
            // the power series itself carries rounding of order eps exp_q(|z|)
            let scale = q_exponential(Complex64::new(z.norm(), 0.0), q, 1e-16)
                .unwrap()
                .value
                .re;
            assert!((direct - via_log).norm() < 1e-14 * scale, "q={q} z={z}");
        }
        assert_eq!(
            ln_q_exponential(Complex64::new(0.0, 0.0), 0.3).unwrap(),
            Complex64::new(0.0, 0.0)
        );
        assert!(ln_q_exponential(Complex64::new(2.0, 0.0), 0.5).is_err());
        // q near 1: exp_q(z) -> exp(z) even for |z| in the hundreds
        let z = Complex64::new(0.0, 500.0);
        let l = ln_q_exponential(z, 1.0 - 1e-10).unwrap();
        assert!((l - z).norm() < 1e-3);
    }

    proptest! {
        #[test]
        fn q_integer_recurrence(n in 0u32..=50, q in 0.01f64..0.999) {
            let lhs = q_integer(n + 1, q);
            let rhs = 1.0 + q * q_integer(n, q);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs);
        }

        #[test]
        fn q_factorial_recurrence(n in 1u32..=40, q in 0.01f64..0.999) {
            prop_assert_eq!(q_factorial(n, q), q_factorial(n - 1, q) * q_integer(n, q));
        }

        #[test]
        fn q_exponential_difference_equation(
            q in 0.05f64..0.95,
            frac in 0.0f64..0.9,
            phase in -3.2f64..3.2,
        ) {
            let z = Complex64::from_polar(frac / (1.0 - q), phase);
            prop_assume!(z.norm() > 1e-6);
            let tol = 1e-13;
            let f = q_exponential(z, q, tol).unwrap();
            let fq = q_exponential(z * q, q, tol).unwrap();
            let lhs = (f.value - fq.value) / (z * (1.0 - q));
            let certified = (f.abs_error_bound + fq.abs_error_bound) / (z.norm() * (1.0 - q))
                + f.abs_error_bound;
            // rounding scales with the sum of term moduli, i.e. exp_q(|z|)
            let magnitude = q_exponential(Complex64::new(z.norm(), 0.0), q, tol).unwrap().value.re;
            let rounding = 1e-14 * magnitude / (z.norm() * (1.0 - q)).min(1.0);
            prop_assert!((lhs - f.value).norm() <= certified + rounding);
        }
    }
}
