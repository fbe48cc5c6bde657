//! The q-oscillator operators acting on [`GaussExpSum`] values.
//!
//! With `s = sqrt(1 - q)` and `S` the argument shift `f(x) -> f(x + i alpha)`:
//!
//! ```text
//! a   = [exp(-2i alpha x) - S exp(-i alpha x)] / (-i s)
//! a^+ = [exp( 2i alpha x) - exp(i alpha x) S ] / ( i s)
//! ```
//!
//! Products act right to left. Position, momentum and the Hamiltonian are
//! built from `a` and `a^+`, never from `x` or `d/dx`.

use crate::dd::{Cdd, Dd};
use crate::error::Result;
use crate::gauss::GaussExpSum;
use crate::qcore::DeformationParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OperatorKind {
    Annihilate,
    Create,
    Position,
    Momentum,
    Hamiltonian,
}

/// Order in which the shift and plane-wave factors of the second piece of
/// `a` and `a^+` are composed. `Reversed` exists only as a fault witness.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum CompositionOrder {
    #[default]
    AsWritten,
    Reversed,
}

fn i_alpha(params: &DeformationParams, k: f64) -> Cdd {
    Cdd::imag(params.alpha_dd() * Dd::new(k))
}

pub fn annihilate(f: &GaussExpSum, params: &DeformationParams) -> Result<GaussExpSum> {
    annihilate_with(f, params, CompositionOrder::AsWritten)
}

pub fn annihilate_with(
    f: &GaussExpSum,
    params: &DeformationParams,
    order: CompositionOrder,
) -> Result<GaussExpSum> {
    let first = f.multiply_plane_wave_dd(i_alpha(params, -2.0))?;
    let second = match order {
        CompositionOrder::AsWritten => f
            .multiply_plane_wave_dd(i_alpha(params, -1.0))?
            .shift_argument_dd(i_alpha(params, 1.0))?,
        CompositionOrder::Reversed => f
            .shift_argument_dd(i_alpha(params, 1.0))?
            .multiply_plane_wave_dd(i_alpha(params, -1.0))?,
    };
    // 1 / (-i s) = i / s
    let denom = Cdd::imag(params.sqrt_one_minus_q_dd().recip());
    first.sub(&second)?.scale_dd(denom)
}

pub fn create(f: &GaussExpSum, params: &DeformationParams) -> Result<GaussExpSum> {
    create_with(f, params, CompositionOrder::AsWritten)
}

pub fn create_with(
    f: &GaussExpSum,
    params: &DeformationParams,
    order: CompositionOrder,
) -> Result<GaussExpSum> {
    let first = f.multiply_plane_wave_dd(i_alpha(params, 2.0))?;
    let second = match order {
        CompositionOrder::AsWritten => f
            .shift_argument_dd(i_alpha(params, 1.0))?
            .multiply_plane_wave_dd(i_alpha(params, 1.0))?,
        CompositionOrder::Reversed => f
            .multiply_plane_wave_dd(i_alpha(params, 1.0))?
            .shift_argument_dd(i_alpha(params, 1.0))?,
    };
    // 1 / (i s) = -i / s
    let denom = Cdd::imag(-params.sqrt_one_minus_q_dd().recip());
    first.sub(&second)?.scale_dd(denom)
}

/// `(a + a^+) / sqrt(2)`.
pub fn position_op(f: &GaussExpSum, params: &DeformationParams) -> Result<GaussExpSum> {
    let sum = annihilate(f, params)?.add(&create(f, params)?)?;
    sum.scale_dd(Cdd::real(Dd::new(2.0).sqrt().recip()))
}

/// `(a - a^+) / (i sqrt(2))`.
pub fn momentum_op(f: &GaussExpSum, params: &DeformationParams) -> Result<GaussExpSum> {
    let diff = annihilate(f, params)?.sub(&create(f, params)?)?;
    diff.scale_dd(Cdd::imag(-Dd::new(2.0).sqrt().recip()))
}

/// `(omega / 2) (a a^+ + a^+ a)`.
pub fn hamiltonian(f: &GaussExpSum, params: &DeformationParams) -> Result<GaussExpSum> {
    let aad = annihilate(&create(f, params)?, params)?;
    let ada = create(&annihilate(f, params)?, params)?;
    aad.add(&ada)?
        .scale_dd(Cdd::real(Dd::new(params.omega()).mul_pow2(0.5)))
}

pub fn apply(
    kind: OperatorKind,
    f: &GaussExpSum,
    params: &DeformationParams,
) -> Result<GaussExpSum> {
    match kind {
        OperatorKind::Annihilate => annihilate(f, params),
        OperatorKind::Create => create(f, params),
        OperatorKind::Position => position_op(f, params),
        OperatorKind::Momentum => momentum_op(f, params),
        OperatorKind::Hamiltonian => hamiltonian(f, params),
    }
}

/// L2 norm of `(a a^+ - q a^+ a) f - f`.
pub fn q_commutator_residual(f: &GaussExpSum, params: &DeformationParams) -> Result<f64> {
    let aad = annihilate(&create(f, params)?, params)?;
    let ada = create(&annihilate(f, params)?, params)?;
    let r = aad.sub(&ada.scale_dd(Cdd::real(params.q_dd()))?)?.sub(f)?;
    Ok(r.norm())
}
