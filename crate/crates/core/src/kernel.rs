//! Left and right Cauchy kernels, the ⋆-inverse of `q - s` and its ⋆-square.

use crate::error::{Error, Result};
use crate::quaternion::{dist_sphere_point, sphere_of, Quaternion};

/// Relative pole guard: evaluations closer than `POLE_GUARD_REL · (1 + |s|)`
/// to the pole sphere are refused.
pub const POLE_GUARD_REL: f64 = 1e-12;

pub fn pole_guard(s: Quaternion) -> f64 {
    POLE_GUARD_REL * (1.0 + s.norm())
}

/// A kernel value together with `dist([p], s)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelValue {
    pub value: Quaternion,
    pub pole_distance: f64,
}

/// `p² - 2 Re(s) p + |s|²`, whose zero set is the sphere `[s]`.
pub fn char_poly(s: Quaternion, p: Quaternion) -> Quaternion {
    p * p - p * (2.0 * s.x0) + Quaternion::real(s.norm_sqr())
}

fn check_pole(s: Quaternion, p: Quaternion, guard: f64) -> Result<f64> {
    let d = dist_sphere_point(&sphere_of(p), s);
    if !(d >= guard) {
        return Err(Error::Pole { distance: d, guard });
    }
    Ok(d)
}

/// `S_L⁻¹(s, p) = -(p² - 2 Re(s) p + |s|²)⁻¹ (p - s̄)`.
pub fn cauchy_kernel_left(s: Quaternion, p: Quaternion) -> Result<KernelValue> {
    cauchy_kernel_left_with_guard(s, p, pole_guard(s))
}

pub fn cauchy_kernel_left_with_guard(s: Quaternion, p: Quaternion, guard: f64) -> Result<KernelValue> {
    let pole_distance = check_pole(s, p, guard)?;
    let value = -(char_poly(s, p).inverse()? * (p - s.conj()));
    Ok(KernelValue { value, pole_distance })
}

/// `S_R⁻¹(s, q) = -(q - s̄)(q² - 2 Re(s) q + |s|²)⁻¹`.
pub fn cauchy_kernel_right(s: Quaternion, q: Quaternion) -> Result<KernelValue> {
    cauchy_kernel_right_with_guard(s, q, pole_guard(s))
}

pub fn cauchy_kernel_right_with_guard(s: Quaternion, q: Quaternion, guard: f64) -> Result<KernelValue> {
    let pole_distance = check_pole(s, q, guard)?;
    let value = -((q - s.conj()) * char_poly(s, q).inverse()?);
    Ok(KernelValue { value, pole_distance })
}

/// `(p - s)^{-⋆} = (p² - 2 s₀ p + |s|²)⁻¹ (p - s̄)`.
pub fn star_inverse(s: Quaternion, p: Quaternion) -> Result<Quaternion> {
    check_pole(s, p, pole_guard(s))?;
    Ok(char_poly(s, p).inverse()? * (p - s.conj()))
}

/// `(p - s̄)^{2⋆} = p² - 2 p s̄ + s̄²`.
pub fn phi_numerator(s: Quaternion, p: Quaternion) -> Quaternion {
    let sb = s.conj();
    p * p - p * sb * 2.0 + sb * sb
}

/// `φ_s(p) = (p² - 2 s₀ p + |s|²)⁻² (p - s̄)^{2⋆}`.
pub fn phi(s: Quaternion, p: Quaternion) -> Result<KernelValue> {
    phi_with_guard(s, p, pole_guard(s))
}

pub fn phi_with_guard(s: Quaternion, p: Quaternion, guard: f64) -> Result<KernelValue> {
    let pole_distance = check_pole(s, p, guard)?;
    let qi = char_poly(s, p).inverse()?;
    Ok(KernelValue { value: qi * qi * phi_numerator(s, p), pole_distance })
}
