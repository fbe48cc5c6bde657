//! Vacuum, number eigenstates and coherent states as [`GaussExpSum`] values,
//! together with the q -> 0 and q -> 1 limit densities used as oracles.

use num_complex::Complex64;

use crate::dd::{Cdd, Dd};
use crate::error::{Error, Result};
use crate::fock::FockVector;
use crate::gauss::{GaussExpSum, GaussExpTerm};
use crate::operators::create;
use crate::qcore::{ln_q_exponential, q_binomial_dd, q_factorial_dd, DeformationParams};

/// Largest supported eigenstate index.
pub const EIGENSTATE_MAX_N: usize = 60;
/// Cap on the number of plane-wave terms in a truncated coherent state.
pub const COHERENT_MAX_TERMS: usize = 5_000;
/// Largest series coefficient the coordinate-space coherent state accepts.
/// Beyond this the partial sums cancel too strongly for double-double.
pub const COHERENT_PEAK_LIMIT: f64 = 1e14;
/// Relative Fock-tail bound required by [`coherent_fock`].
pub const FOCK_TAIL_TOL: f64 = 1e-14;

fn quarter_root_pi() -> Dd {
    Dd::PI.sqrt().sqrt()
}

/// Slope `i alpha (3/2 + 2 m)` of the m-th plane-wave harmonic.
fn harmonic_slope(params: &DeformationParams, m: usize) -> Cdd {
    Cdd::imag(params.alpha_dd() * Dd::new(1.5 + 2.0 * m as f64))
}

/// `pi^{-1/4} exp(-x^2/2 + 3i alpha x / 2)`.
pub fn vacuum(params: &DeformationParams) -> GaussExpSum {
    GaussExpSum::single(
        Cdd::real(quarter_root_pi().recip()),
        harmonic_slope(params, 0),
    )
    .expect("vacuum coefficients are finite")
}

fn check_n(n: usize) -> Result<()> {
    if n > EIGENSTATE_MAX_N {
        Err(Error::TooLargeN {
            n,
            max: EIGENSTATE_MAX_N,
        })
    } else {
        Ok(())
    }
}

/// Normalized eigenstate from its closed form:
///
/// ```text
/// Psi_n = e^{-x^2/2 + 3i alpha x/2} / (pi^{1/4} i^n (1-q)^{n/2} sqrt([n]!))
///         * sum_k (-1)^k [n k] e^{2i alpha (n-k) x - k alpha^2}
/// ```
pub fn eigenstate(n: usize, params: &DeformationParams) -> Result<GaussExpSum> {
    check_n(n)?;
    let q = params.q_dd();
    let nn = n as u32;
    let denom = quarter_root_pi()
        * params.one_minus_q_dd().sqrt().powi(n as i32)
        * q_factorial_dd(nn, q).sqrt();
    // 1 / i^n = (-i)^n
    let prefactor = Cdd::imag(-Dd::ONE).powi(nn).scale(denom.recip());
    let sqrt_q = q.sqrt();
    let terms = (0..=n).map(|k| {
        let kk = k as u32;
        let mut c = q_binomial_dd(nn, kk, q) * sqrt_q.powi(k as i32);
        if k % 2 == 1 {
            c = -c;
        }
        GaussExpTerm::from_dd(prefactor.scale(c), harmonic_slope(params, n - k))
    });
    GaussExpSum::from_terms(terms.collect::<Result<Vec<_>>>()?)
}

/// Eigenstate by repeated creation, `(a^+)^n |0> / sqrt([n]!)`.
pub fn eigenstate_ladder(n: usize, params: &DeformationParams) -> Result<GaussExpSum> {
    check_n(n)?;
    let mut psi = vacuum(params);
    let q = params.q_dd();
    for k in 1..=n {
        let norm = crate::qcore::q_integer_dd(k as u32, q).sqrt().recip();
        psi = create(&psi, params)?.scale_dd(Cdd::real(norm))?;
    }
    Ok(psi)
}

/// Limit q -> 0 of `|Psi_n(x)|^2`, independent of `n`.
pub fn eigenstate_density_limit_q0(_n: usize, x: f64) -> f64 {
    (-x * x).exp() / std::f64::consts::PI.sqrt()
}

/// Coherent-state label `lambda` together with the deformation it lives in.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoherentParams {
    lambda: Complex64,
    params: DeformationParams,
}

impl CoherentParams {
    /// Requires `|lambda| < 1 / sqrt(1 - q)`.
    pub fn new(lambda: Complex64, params: DeformationParams) -> Result<Self> {
        if !(lambda.re.is_finite() && lambda.im.is_finite()) {
            return Err(Error::InvalidParameter("lambda must be finite".into()));
        }
        let radius = params.coherent_radius();
        if lambda.norm_sqr() * (1.0 - params.q()) >= 1.0 {
            return Err(Error::OutsideConvergenceDisk {
                modulus: lambda.norm(),
                radius,
            });
        }
        Ok(Self { lambda, params })
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn params(&self) -> &DeformationParams {
        &self.params
    }
}

/// `ln exp_q(|lambda|^2)`, the log of the squared Fock normalization.
fn ln_fock_norm(cp: &CoherentParams) -> Result<f64> {
    let l2 = Complex64::new(cp.lambda.norm_sqr(), 0.0);
    Ok(ln_q_exponential(l2, cp.params.q())?.re)
}

/// Relative tail of `sum_n |lambda|^{2n}/[n]!` left out by a dimension-`dim`
/// truncation, and the truncated amplitudes `lambda^n / sqrt([n]!)`.
fn fock_series(cp: &CoherentParams, dim: usize) -> Result<(Vec<Cdd>, f64)> {
    let q = cp.params.q_dd();
    let lambda = Cdd::from(cp.lambda);
    let l2 = cp.lambda.norm_sqr();
    let mut amps = Vec::with_capacity(dim);
    let mut amp = Cdd::ONE;
    let mut q_int = Dd::ZERO;
    for n in 0..dim {
        if n > 0 {
            amp = (amp * lambda).scale(q_int.sqrt().recip());
        }
        amps.push(amp);
        q_int = Dd::ONE + q * q_int;
    }
    // q_int now holds [dim]; the next ratio is |lambda|^2 / [dim]
    let r = l2 / q_int.to_f64();
    let last = amps.last().map(|a| a.norm_sqr().to_f64()).unwrap_or(1.0);
    let tail = if r < 1.0 {
        last * r / (1.0 - r)
    } else {
        f64::INFINITY
    };
    let total = ln_fock_norm(cp)?.exp();
    Ok((amps, tail / total))
}

/// Fock amplitudes `c0 lambda^n / sqrt([n]!)` with `c0 = exp_q(|lambda|^2)^{-1/2}`.
pub fn coherent_fock(cp: &CoherentParams, dim: usize) -> Result<FockVector> {
    if dim == 0 {
        return Err(Error::InvalidParameter(
            "Fock dimension must be positive".into(),
        ));
    }
    let (amps, tail) = fock_series(cp, dim)?;
    if !(tail <= FOCK_TAIL_TOL) {
        return Err(Error::DimTooSmall { dim, tail });
    }
    let c0 = (-0.5 * ln_fock_norm(cp)?).exp();
    FockVector::new(amps.into_iter().map(|a| a.to_c64() * c0).collect())
}

/// Smallest dimension accepted by [`coherent_fock`] (at least 2).
pub fn coherent_fock_dim(cp: &CoherentParams) -> Result<usize> {
    // tail shrinks at least geometrically once |lambda|^2 < [dim]; double then bisect
    let mut hi = 2;
    while fock_series(cp, hi)?.1 > FOCK_TAIL_TOL {
        hi *= 2;
        if hi > 1 << 20 {
            return Err(Error::NoConvergence { terms: hi });
        }
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if fock_series(cp, mid)?.1 <= FOCK_TAIL_TOL {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi.max(2))
}

/// Truncated coordinate-space coherent state.
#[derive(Clone, Debug, PartialEq)]
pub struct CoherentWavefunction {
    /// Unit-norm state; carries the phase of the closed-form constant.
    pub state: GaussExpSum,
    /// L2 norm of the closed-form expression with its printed constant.
    pub printed_norm: f64,
    /// Certified bound on the dropped series terms (before normalization,
    /// uniformly on the real axis).
    pub truncation_bound: f64,
    pub terms_used: usize,
}

/// `K = exp_q(|lambda|^2)^{-1/2} exp_q(i lambda sqrt(q) / sqrt(1-q))`.
fn ln_printed_constant(cp: &CoherentParams) -> Result<Complex64> {
    let q = cp.params.q();
    let s = (1.0 - q).sqrt();
    let inner = Complex64::new(0.0, q.sqrt() / s) * cp.lambda;
    Ok(ln_q_exponential(inner, q)? - 0.5 * ln_fock_norm(cp)?)
}

/// Coherent state from the closed form
///
/// ```text
/// Psi = pi^{-1/4} K exp_q(lambda e^{2i alpha x} / (i sqrt(1-q))) e^{-x^2/2 + 3i alpha x/2}
/// ```
///
/// with the outer q-exponential truncated at the first `M` whose certified
/// tail is below `tol`, then renormalized exactly.
pub fn coherent_wavefunction(cp: &CoherentParams, tol: f64) -> Result<CoherentWavefunction> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tol = {tol} must be positive"
        )));
    }
    let p = &cp.params;
    let q = p.q_dd();
    let s = p.sqrt_one_minus_q_dd();
    // lambda / (i s) = -i lambda / s
    let w = Cdd::from(cp.lambda).mul_i().scale(-s.recip());
    let w_abs = w.abs();

    let mut coeffs = vec![Cdd::ONE];
    let mut d = Cdd::ONE;
    let mut q_int = Dd::ZERO;
    let mut peak: f64 = 1.0;
    let bound = loop {
        let m = coeffs.len() - 1;
        q_int = Dd::ONE + q * q_int;
        let r = w_abs / q_int.to_f64();
        let d_abs = d.abs();
        if r < 1.0 {
            let tail = d_abs * r / (1.0 - r);
            if tail < tol {
                break tail;
            }
        }
        if m + 1 >= COHERENT_MAX_TERMS {
            return Err(Error::NoConvergence {
                terms: COHERENT_MAX_TERMS,
            });
        }
        d = (d * w).scale(q_int.recip());
        peak = peak.max(d.abs());
        if peak > COHERENT_PEAK_LIMIT {
            return Err(Error::IllConditioned {
                peak,
                limit: COHERENT_PEAK_LIMIT,
            });
        }
        coeffs.push(d);
    };

    let base = quarter_root_pi().recip();
    let raw = GaussExpSum::from_terms(
        coeffs
            .iter()
            .enumerate()
            .map(|(m, &c)| GaussExpTerm::from_dd(c.scale(base), harmonic_slope(p, m)))
            .collect::<Result<Vec<_>>>()?,
    )?;
    let raw_norm = raw.norm();
    if raw_norm == 0.0 {
        return Err(Error::ZeroState);
    }
    let ln_k = ln_printed_constant(cp)?;
    let phase = Complex64::from_polar(1.0, ln_k.im);
    let state = raw.scale(phase / raw_norm)?;
    Ok(CoherentWavefunction {
        state,
        printed_norm: ln_k.re.exp() * raw_norm,
        truncation_bound: bound * base.to_f64(),
        terms_used: coeffs.len(),
    })
}

/// Pointwise value of the closed-form coherent state, evaluated through the
/// logarithmic product form of every q-exponential. Remains accurate close to
/// q = 1 where the series of [`coherent_wavefunction`] is ill-conditioned.
pub fn coherent_value(cp: &CoherentParams, x: f64) -> Result<Complex64> {
    let p = &cp.params;
    let q = p.q();
    let a = p.alpha();
    let s = (1.0 - q).sqrt();
    let plane = Complex64::from_polar(1.0, 2.0 * a * x);
    let w = cp.lambda * plane / Complex64::new(0.0, s);
    let ln = ln_printed_constant(cp)? + ln_q_exponential(w, q)? - 0.25 * std::f64::consts::PI.ln()
        + Complex64::new(-0.5 * x * x, 1.5 * a * x);
    Ok(ln.exp())
}

/// Standard-oscillator coherent state for real `lambda`, the q -> 1 limit.
pub fn coherent_limit_q1(lambda: f64, x: f64) -> f64 {
    let d = x - lambda * std::f64::consts::SQRT_2;
    std::f64::consts::PI.powf(-0.25) * (-0.5 * d * d).exp()
}

/// q -> 0 limit of the coherent density, keeping the oscillation scale alpha:
/// `pi^{-1/2} (1 - |l|^2) e^{-x^2} / (1 + |l|^2 - 2 Im(l e^{2i alpha x}))`.
pub fn coherent_density_limit_q0(
    lambda: Complex64,
    params: &DeformationParams,
    x: f64,
) -> Result<f64> {
    let l2 = lambda.norm_sqr();
    if l2 >= 1.0 {
        return Err(Error::OutsideConvergenceDisk {
            modulus: lambda.norm(),
            radius: 1.0,
        });
    }
    let osc = (lambda * Complex64::from_polar(1.0, 2.0 * params.alpha() * x)).im;
    Ok((1.0 - l2) * (-x * x).exp() / (std::f64::consts::PI.sqrt() * (1.0 + l2 - 2.0 * osc)))
}
