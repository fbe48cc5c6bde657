//! Finite sums of Gaussian-exponential terms `c exp(-x^2/2 + beta x)`.
//!
//! The family is closed under everything the coordinate-space oscillator
//! operators need: multiplication by plane waves `exp(gamma x)` (slope shift),
//! complex argument shifts `f(x) -> f(x + delta)` (the operator
//! `exp(delta d/dx)`), linear combinations, and exact inner products
//!
//! ```text
//! <f|g> = sum_{j,k} conj(c_j) c_k sqrt(pi) exp((conj(beta_j) + beta_k)^2 / 4).
//! ```
//!
//! Coefficients and slopes are stored in double-double. Every operation returns
//! a canonical sum: slopes within [`SLOPE_MERGE_TOL`] are merged, merged
//! coefficients that cancel below [`CANCELLATION_TOL`] of their contributors are
//! exact zeros, and negligible terms are dropped.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::dd::{Cdd, Dd};
use crate::error::{Error, Result};

/// Absolute distance under which two slopes are the same slope.
pub const SLOPE_MERGE_TOL: f64 = 1e-12;
/// Relative size (against the sum of merged moduli) below which a merged
/// coefficient counts as an exact cancellation.
pub const CANCELLATION_TOL: f64 = 1e-13;
/// Terms below this fraction of the largest coefficient (floor 1) are dropped.
pub const DROP_TOL: f64 = 1e-300;
/// Largest admissible number of terms in one sum.
pub const MAX_TERMS: usize = 100_000;

// pairs whose Gram contribution is below exp(-760) underflow in any case
const UNDERFLOW_EXPONENT: f64 = -760.0;

/// One term `coeff * exp(-x^2/2 + slope * x)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussExpTerm {
    coeff: Cdd,
    slope: Cdd,
}

impl GaussExpTerm {
    pub fn new(coeff: Complex64, slope: Complex64) -> Result<Self> {
        Self::from_dd(coeff.into(), slope.into())
    }

    pub fn from_dd(coeff: Cdd, slope: Cdd) -> Result<Self> {
        if coeff.is_finite() && slope.is_finite() {
            Ok(Self { coeff, slope })
        } else {
            Err(Error::NonFinite)
        }
    }

    pub fn coeff(&self) -> Complex64 {
        self.coeff.to_c64()
    }

    pub fn slope(&self) -> Complex64 {
        self.slope.to_c64()
    }

    pub fn coeff_dd(&self) -> Cdd {
        self.coeff
    }

    pub fn slope_dd(&self) -> Cdd {
        self.slope
    }

    pub fn evaluate_dd(&self, z: Cdd) -> Cdd {
        let exponent = self.slope * z - (z * z).scale(Dd::new(0.5));
        self.coeff * exponent.exp()
    }
}

struct Cluster {
    coeff: Cdd,
    slope: Cdd,
    magnitude: f64,
    contributors: usize,
}

fn cell(v: f64) -> i64 {
    (v / SLOPE_MERGE_TOL).floor() as i64
}

/// Canonical finite sum of [`GaussExpTerm`]s.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GaussExpSum {
    terms: Vec<GaussExpTerm>,
}

impl GaussExpSum {
    /// The empty sum (the zero function).
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn single(coeff: Cdd, slope: Cdd) -> Result<Self> {
        Self::from_terms([GaussExpTerm::from_dd(coeff, slope)?])
    }

    /// Canonicalizes an arbitrary list of terms.
    pub fn from_terms<I: IntoIterator<Item = GaussExpTerm>>(terms: I) -> Result<Self> {
        let mut clusters: Vec<Cluster> = Vec::new();
        let mut index: HashMap<(i64, i64), Vec<usize>> = HashMap::new();

        for t in terms {
            if !t.coeff.is_finite() || !t.slope.is_finite() {
                return Err(Error::NonFinite);
            }
            let (sr, si) = (t.slope.re.hi(), t.slope.im.hi());
            let (kr, ki) = (cell(sr), cell(si));
            let mut target = None;
            'search: for dr in -1..=1 {
                for di in -1..=1 {
                    if let Some(ids) = index.get(&(kr + dr, ki + di)) {
                        for &id in ids {
                            let d = (clusters[id].slope - t.slope).abs();
                            if d <= SLOPE_MERGE_TOL {
                                target = Some(id);
                                break 'search;
                            }
                        }
                    }
                }
            }
            let magnitude = t.coeff.abs();
            match target {
                Some(id) => {
                    let c = &mut clusters[id];
                    c.coeff += t.coeff;
                    c.magnitude += magnitude;
                    c.contributors += 1;
                }
                None => {
                    index.entry((kr, ki)).or_default().push(clusters.len());
                    clusters.push(Cluster {
                        coeff: t.coeff,
                        slope: t.slope,
                        magnitude,
                        contributors: 1,
                    });
                }
            }
        }

        clusters.retain(|c| {
            let m = c.coeff.abs();
            m != 0.0 && !(c.contributors > 1 && m < CANCELLATION_TOL * c.magnitude)
        });
        let largest = clusters.iter().map(|c| c.coeff.abs()).fold(1.0, f64::max);
        clusters.retain(|c| c.coeff.abs() >= DROP_TOL * largest);

        if clusters.len() > MAX_TERMS {
            return Err(Error::TooManyTerms {
                count: clusters.len(),
                limit: MAX_TERMS,
            });
        }
        let mut terms: Vec<GaussExpTerm> = clusters
            .into_iter()
            .map(|c| GaussExpTerm {
                coeff: c.coeff,
                slope: c.slope,
            })
            .collect();
        terms.sort_by(|a, b| {
            a.slope
                .re
                .partial_cmp(&b.slope.re)
                .unwrap()
                .then(a.slope.im.partial_cmp(&b.slope.im).unwrap())
        });
        Ok(Self { terms })
    }

    pub fn terms(&self) -> &[GaussExpTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest coefficient modulus; a conditioning diagnostic.
    pub fn max_coeff_abs(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.abs()).fold(0.0, f64::max)
    }

    pub fn evaluate(&self, z: Complex64) -> Complex64 {
        self.evaluate_dd(z.into()).to_c64()
    }

    pub fn evaluate_dd(&self, z: Cdd) -> Cdd {
        self.terms
            .iter()
            .fold(Cdd::ZERO, |acc, t| acc + t.evaluate_dd(z))
    }

    pub fn add(&self, other: &GaussExpSum) -> Result<Self> {
        Self::from_terms(self.terms.iter().chain(other.terms.iter()).copied())
    }

    pub fn sub(&self, other: &GaussExpSum) -> Result<Self> {
        Self::from_terms(
            self.terms
                .iter()
                .copied()
                .chain(other.terms.iter().map(|t| GaussExpTerm {
                    coeff: -t.coeff,
                    slope: t.slope,
                })),
        )
    }

    pub fn scale(&self, s: Complex64) -> Result<Self> {
        self.scale_dd(s.into())
    }

    pub fn scale_dd(&self, s: Cdd) -> Result<Self> {
        Self::from_terms(self.terms.iter().map(|t| GaussExpTerm {
            coeff: t.coeff * s,
            slope: t.slope,
        }))
    }

    /// Multiplication by `exp(gamma x)`.
    pub fn multiply_plane_wave(&self, gamma: Complex64) -> Result<Self> {
        self.multiply_plane_wave_dd(gamma.into())
    }

    pub fn multiply_plane_wave_dd(&self, gamma: Cdd) -> Result<Self> {
        Self::from_terms(self.terms.iter().map(|t| GaussExpTerm {
            coeff: t.coeff,
            slope: t.slope + gamma,
        }))
    }

    /// `f(x) -> f(x + delta)`: term `(c, beta)` becomes
    /// `(c exp(beta delta - delta^2/2), beta - delta)`.
    pub fn shift_argument(&self, delta: Complex64) -> Result<Self> {
        self.shift_argument_dd(delta.into())
    }

    pub fn shift_argument_dd(&self, delta: Cdd) -> Result<Self> {
        let half_d2 = (delta * delta).scale(Dd::new(0.5));
        Self::from_terms(self.terms.iter().map(|t| GaussExpTerm {
            coeff: t.coeff * (t.slope * delta - half_d2).exp(),
            slope: t.slope - delta,
        }))
    }

    /// `<self|other> = integral of conj(self(x)) other(x)` over the real line.
    pub fn inner_product(&self, other: &GaussExpSum) -> Complex64 {
        self.inner_product_dd(other).to_c64()
    }

    pub fn inner_product_dd(&self, other: &GaussExpSum) -> Cdd {
        let log_abs = |t: &GaussExpTerm| t.coeff.abs().ln();
        let other_logs: Vec<f64> = other.terms.iter().map(log_abs).collect();
        let mut acc = Cdd::ZERO;
        for a in &self.terms {
            let ca = a.coeff.conj();
            let ba = a.slope.conj();
            let la = log_abs(a);
            for (b, &lb) in other.terms.iter().zip(&other_logs) {
                let s = ba + b.slope;
                let e = (s * s).scale(Dd::new(0.25));
                if e.re.hi() + la + lb < UNDERFLOW_EXPONENT {
                    continue;
                }
                acc += ca * b.coeff * e.exp();
            }
        }
        acc.scale(Dd::PI.sqrt())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.inner_product_dd(self).re.to_f64()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().max(0.0).sqrt()
    }
}
