//! Least-squares estimation of `(omega, q)` from observed levels.
//!
//! For fixed `q` the model `E_n = omega s_n`, `s_n = [n] + q^n / 2`, is linear
//! in `omega`, so `omega` is profiled out exactly and only `q` is searched:
//! a log-spaced grid in `1 - q` followed by golden-section refinement.

use crate::error::{Error, Result};
use crate::qcore::{q_integer, spectrum_energy, DeformationParams};

/// Smallest and largest `q` searched.
pub const Q_MIN: f64 = 0.001;
pub const Q_MAX: f64 = 0.9999;
/// Default number of grid points.
pub const DEFAULT_GRID_SIZE: usize = 512;
const GOLDEN_TOL: f64 = 1e-10;

/// Observed levels, sorted by `n`, at least three of them.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelData {
    entries: Vec<(u32, f64)>,
}

impl LevelData {
    pub fn new(mut entries: Vec<(u32, f64)>) -> Result<Self> {
        if let Some(&(n, e)) = entries.iter().find(|(_, e)| !e.is_finite()) {
            return Err(Error::InvalidData(format!(
                "energy {e} for level {n} is not finite"
            )));
        }
        entries.sort_by_key(|&(n, _)| n);
        if let Some(w) = entries.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidData(format!(
                "level {} appears more than once",
                w[0].0
            )));
        }
        if entries.len() < 3 {
            return Err(Error::DegenerateData(format!(
                "{} levels given, at least 3 needed",
                entries.len()
            )));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitResult {
    pub omega: f64,
    pub q: f64,
    pub rms_residual: f64,
    /// `1 - q`.
    pub anharmonicity: f64,
}

fn shape(n: u32, q: f64) -> f64 {
    q_integer(n, q) + 0.5 * q.powi(n as i32)
}

/// Profiled fit at fixed `q`: `(omega, sum of squared residuals)`.
fn profile(data: &LevelData, q: f64) -> (f64, f64) {
    let (mut es, mut ss) = (0.0, 0.0);
    for &(n, e) in &data.entries {
        let s = shape(n, q);
        es += e * s;
        ss += s * s;
    }
    let omega = es / ss;
    let ssr = data
        .entries
        .iter()
        .map(|&(n, e)| (omega * shape(n, q) - e).powi(2))
        .sum();
    (omega, ssr)
}

fn better(a: (f64, f64), b: (f64, f64)) -> bool {
    // (q, ssr): lower residual wins, ties go to the smaller q
    a.1 < b.1 || (a.1 == b.1 && a.0 < b.0)
}

pub fn fit_levels(data: &LevelData, q_grid_size: usize) -> Result<FitResult> {
    if q_grid_size < 3 {
        return Err(Error::InvalidParameter(format!(
            "q grid needs at least 3 points, got {q_grid_size}"
        )));
    }
    let first = data.entries[0].1;
    if data.entries.iter().all(|&(_, e)| e == first) {
        return Err(Error::DegenerateData("all energies are equal".into()));
    }

    // log-spaced in 1 - q so the near-harmonic end is resolved
    let (lo, hi) = ((1.0 - Q_MAX).ln(), (1.0 - Q_MIN).ln());
    let grid: Vec<f64> = (0..q_grid_size)
        .map(|i| 1.0 - (hi + (lo - hi) * i as f64 / (q_grid_size - 1) as f64).exp())
        .collect();
    let mut best_i = 0;
    let mut best = (grid[0], profile(data, grid[0]).1);
    for (i, &q) in grid.iter().enumerate().skip(1) {
        let cand = (q, profile(data, q).1);
        if better(cand, best) {
            best = cand;
            best_i = i;
        }
    }

    let mut a = grid[best_i.saturating_sub(1)];
    let mut b = grid[(best_i + 1).min(q_grid_size - 1)];
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (profile(data, c).1, profile(data, d).1);
    while b - a > GOLDEN_TOL {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = profile(data, c).1;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = profile(data, d).1;
        }
    }
    for q in [c, d] {
        let cand = (q, profile(data, q).1);
        if better(cand, best) {
            best = cand;
        }
    }

    let q = best.0;
    let (omega, ssr) = profile(data, q);
    if !(omega > 0.0) {
        return Err(Error::InvalidData(format!(
            "best fit has non-positive frequency {omega}"
        )));
    }
    Ok(FitResult {
        omega,
        q,
        rms_residual: (ssr / data.entries.len() as f64).sqrt(),
        anharmonicity: 1.0 - q,
    })
}

/// Model levels `n = 0..=n_max` of a fit.
pub fn predict_levels(fit: &FitResult, n_max: u32) -> Result<Vec<(u32, f64)>> {
    let p = DeformationParams::new(fit.q, fit.omega)?;
    Ok((0..=n_max).map(|n| (n, spectrum_energy(n, &p))).collect())
}
