//! Adaptive Gauss-Kronrod quadrature over a finite window of the real line.
//!
//! Only used to check the exact inner products; nothing in the library
//! feeds quadrature results back into a computation.

use num_complex::Complex64;

use crate::error::{Error, Result};

// 15-point Kronrod abscissae and weights (nonnegative half, centre last) with
// the embedded 7-point Gauss weights on the odd-indexed abscissae.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

const INITIAL_PANELS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureConfig {
    /// Integration window `[-half_width, half_width]`.
    pub half_width: f64,
    /// Maximum number of interval bisections.
    pub max_refinements: usize,
    /// Target for the summed error estimate, relative to `max(1, |I|)`.
    pub tol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            half_width: 12.0,
            max_refinements: 4000,
            tol: 1e-11,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.half_width >= 8.0 && self.half_width.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "half_width = {} must be at least 8",
                self.half_width
            )));
        }
        if self.max_refinements == 0 {
            return Err(Error::InvalidParameter(
                "max_refinements must be positive".into(),
            ));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tol = {} must be positive",
                self.tol
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureResult {
    pub value: Complex64,
    pub error_estimate: f64,
    pub intervals: usize,
}

#[derive(Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

fn kronrod<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> Panel {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(centre - dx) + f(centre + dx);
        k += pair * WGK[j];
        if j % 2 == 1 {
            g += pair * WG[j / 2];
        }
    }
    Panel {
        a,
        b,
        value: k * half,
        error: ((k - g) * half).norm(),
    }
}

/// Integral of `f` over `[-L, L]` by globally adaptive G7-K15 bisection.
pub fn integrate_line<F: Fn(f64) -> Complex64>(
    f: F,
    cfg: &QuadratureConfig,
) -> Result<QuadratureResult> {
    cfg.validate()?;
    let width = 2.0 * cfg.half_width / INITIAL_PANELS as f64;
    let mut panels: Vec<Panel> = (0..INITIAL_PANELS)
        .map(|i| {
            let a = -cfg.half_width + width * i as f64;
            kronrod(&f, a, a + width)
        })
        .collect();
    let mut refinements = 0;
    loop {
        // ordered summation keeps the result independent of refinement history
        panels.sort_by(|p, q| p.a.partial_cmp(&q.a).unwrap());
        let value: Complex64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        if error <= cfg.tol * value.norm().max(1.0) {
            return Ok(QuadratureResult {
                value,
                error_estimate: error,
                intervals: panels.len(),
            });
        }
        if refinements >= cfg.max_refinements {
            return Err(Error::QuadratureNoConvergence {
                estimate: error,
                intervals: panels.len(),
            });
        }
        let worst = panels.iter().enumerate().fold(0, |best, (i, p)| {
            if p.error > panels[best].error {
                i
            } else {
                best
            }
        });
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        panels.push(kronrod(&f, p.a, mid));
        panels.push(kronrod(&f, mid, p.b));
        refinements += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauss::{GaussExpSum, GaussExpTerm};
    use crate::qcore::DeformationParams;
    use crate::states::{eigenstate, vacuum};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gaussian_integral() {
        let r = integrate_line(|x| c((-x * x).exp(), 0.0), &QuadratureConfig::default()).unwrap();
        assert!((r.value.re - std::f64::consts::PI.sqrt()).abs() < 1e-12);
        assert_eq!(r.value.im, 0.0);
    }

    #[test]
    fn state_integrals() {
        let p = DeformationParams::new(0.5, 1.0).unwrap();
        let v = vacuum(&p);
        let r = integrate_line(
            |x| c(v.evaluate(c(x, 0.0)).norm_sqr(), 0.0),
            &QuadratureConfig::default(),
        )
        .unwrap();
        assert!((r.value.re - 1.0).abs() < 1e-12);

        let a = eigenstate(2, &p).unwrap();
        let b = eigenstate(3, &p).unwrap();
        let r = integrate_line(
            |x| a.evaluate(c(x, 0.0)).conj() * b.evaluate(c(x, 0.0)),
            &QuadratureConfig::default(),
        )
        .unwrap();
        assert!(r.value.norm() < 1e-10);
    }

    #[test]
    fn config_validation_and_failure() {
        let bad = QuadratureConfig {
            half_width: 4.0,
            ..Default::default()
        };
        assert!(integrate_line(|_| c(0.0, 0.0), &bad).is_err());
        let tight = QuadratureConfig {
            max_refinements: 1,
            tol: 1e-15,
            ..Default::default()
        };
        let r = integrate_line(|x| c((40.0 * x).cos() * (-x * x / 50.0).exp(), 0.0), &tight);
        assert!(matches!(r, Err(Error::QuadratureNoConvergence { .. })));
    }

    fn arb_sum() -> impl Strategy<Value = GaussExpSum> {
        prop::collection::vec(
            (-1.0f64..1.0, -1.0f64..1.0, -4.0f64..4.0, -4.0f64..4.0),
            1..=5,
        )
        .prop_map(|v| {
            let terms = v.into_iter().map(|(a, b, x, y)| {
                // keep |slope| <= 4
                let s = c(x, y);
                let s = if s.norm() > 4.0 {
                    s * (4.0 / s.norm())
                } else {
                    s
                };
                GaussExpTerm::new(c(a, b), s).unwrap()
            });
            GaussExpSum::from_terms(terms).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]
        #[test]
        fn exact_inner_product_matches_quadrature(f in arb_sum(), g in arb_sum()) {
            let exact = f.inner_product(&g);
            let cfg = QuadratureConfig { half_width: 16.0, ..Default::default() };
            let r = integrate_line(|x| f.evaluate(c(x, 0.0)).conj() * g.evaluate(c(x, 0.0)), &cfg).unwrap();
            prop_assert!((r.value - exact).norm() < 1e-9 * (1.0 + exact.norm()), "{} vs {}", r.value, exact);
        }
    }
}
