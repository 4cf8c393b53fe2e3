//! Real quaternions, imaginary units, slice coordinates and the 2-spheres `[q]`.
//!
//! The basis table is `e1 e2 = e3`, `e2 e3 = e1`, `e3 e1 = e2` with
//! `e1² = e2² = e3² = -1`.

use core::iter::Sum;
use core::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use libm::sqrt;

use crate::contour::Contour;
use crate::error::{param_err, Error, Result};

/// Norms below this are treated as zero by [`Quaternion::inverse`].
pub const INVERSE_FLOOR: f64 = 1e-300;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Quaternion {
    pub x0: f64,
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const E1: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const E2: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const E3: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(x0: f64, x1: f64, x2: f64, x3: f64) -> Self {
        Quaternion { x0, x1, x2, x3 }
    }

    pub const fn real(x0: f64) -> Self {
        Quaternion::new(x0, 0.0, 0.0, 0.0)
    }

    pub const fn from_array(a: [f64; 4]) -> Self {
        Quaternion::new(a[0], a[1], a[2], a[3])
    }

    pub const fn to_array(self) -> [f64; 4] {
        [self.x0, self.x1, self.x2, self.x3]
    }

    pub fn re(self) -> f64 {
        self.x0
    }

    /// Vector part `e1 x1 + e2 x2 + e3 x3`.
    pub fn im(self) -> Quaternion {
        Quaternion::new(0.0, self.x1, self.x2, self.x3)
    }

    pub fn im_norm_sqr(self) -> f64 {
        self.x1 * self.x1 + self.x2 * self.x2 + self.x3 * self.x3
    }

    pub fn im_norm(self) -> f64 {
        sqrt(self.im_norm_sqr())
    }

    pub fn norm_sqr(self) -> f64 {
        self.x0 * self.x0 + self.im_norm_sqr()
    }

    pub fn norm(self) -> f64 {
        sqrt(self.norm_sqr())
    }

    pub fn conj(self) -> Quaternion {
        Quaternion::new(self.x0, -self.x1, -self.x2, -self.x3)
    }

    pub fn dot(self, other: Quaternion) -> f64 {
        self.x0 * other.x0 + self.x1 * other.x1 + self.x2 * other.x2 + self.x3 * other.x3
    }

    pub fn is_finite(self) -> bool {
        self.x0.is_finite() && self.x1.is_finite() && self.x2.is_finite() && self.x3.is_finite()
    }

    pub fn inverse(self) -> Result<Quaternion> {
        self.inverse_with_floor(INVERSE_FLOOR)
    }

    /// `q̄ / |q|²`, failing when `|q|` is below `floor`.
    pub fn inverse_with_floor(self, floor: f64) -> Result<Quaternion> {
        let n2 = self.norm_sqr();
        let n = sqrt(n2);
        if !(n >= floor) || n2 == 0.0 {
            return Err(Error::ZeroDivision { norm: n });
        }
        Ok(self.conj() / n2)
    }

    pub fn powi(self, n: i32) -> Result<Quaternion> {
        let base = if n < 0 { self.inverse()? } else { self };
        let mut acc = Quaternion::ONE;
        for _ in 0..n.unsigned_abs() {
            acc = acc * base;
        }
        Ok(acc)
    }

    /// Imaginary unit of `q`, or `None` for real `q`.
    pub fn imaginary_unit(self) -> Option<UnitImaginary> {
        let r = self.im_norm();
        if r > 0.0 {
            Some(UnitImaginary(self.im() / r))
        } else {
            None
        }
    }
}

impl From<f64> for Quaternion {
    fn from(x: f64) -> Self {
        Quaternion::real(x)
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.x0 + o.x0, self.x1 + o.x1, self.x2 + o.x2, self.x3 + o.x3)
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.x0 - o.x0, self.x1 - o.x1, self.x2 - o.x2, self.x3 - o.x3)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        Quaternion::new(-self.x0, -self.x1, -self.x2, -self.x3)
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, b: Quaternion) -> Quaternion {
        let a = self;
        Quaternion::new(
            a.x0 * b.x0 - a.x1 * b.x1 - a.x2 * b.x2 - a.x3 * b.x3,
            a.x0 * b.x1 + a.x1 * b.x0 + a.x2 * b.x3 - a.x3 * b.x2,
            a.x0 * b.x2 - a.x1 * b.x3 + a.x2 * b.x0 + a.x3 * b.x1,
            a.x0 * b.x3 + a.x1 * b.x2 - a.x2 * b.x1 + a.x3 * b.x0,
        )
    }
}

impl Mul<f64> for Quaternion {
    type Output = Quaternion;
    fn mul(self, k: f64) -> Quaternion {
        Quaternion::new(self.x0 * k, self.x1 * k, self.x2 * k, self.x3 * k)
    }
}

impl Mul<Quaternion> for f64 {
    type Output = Quaternion;
    fn mul(self, q: Quaternion) -> Quaternion {
        q * self
    }
}

impl Div<f64> for Quaternion {
    type Output = Quaternion;
    fn div(self, k: f64) -> Quaternion {
        Quaternion::new(self.x0 / k, self.x1 / k, self.x2 / k, self.x3 / k)
    }
}

impl AddAssign for Quaternion {
    fn add_assign(&mut self, o: Quaternion) {
        *self = *self + o;
    }
}

impl SubAssign for Quaternion {
    fn sub_assign(&mut self, o: Quaternion) {
        *self = *self - o;
    }
}

impl MulAssign<f64> for Quaternion {
    fn mul_assign(&mut self, k: f64) {
        *self = *self * k;
    }
}

impl Sum for Quaternion {
    fn sum<I: Iterator<Item = Quaternion>>(iter: I) -> Quaternion {
        iter.fold(Quaternion::ZERO, |a, b| a + b)
    }
}

/// An element of the unit sphere of purely imaginary quaternions; `j² = -1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitImaginary(Quaternion);

impl UnitImaginary {
    pub const E1: UnitImaginary = UnitImaginary(Quaternion::E1);
    pub const E2: UnitImaginary = UnitImaginary(Quaternion::E2);
    pub const E3: UnitImaginary = UnitImaginary(Quaternion::E3);

    /// Normalizes `(x1, x2, x3)`.
    pub fn new(x1: f64, x2: f64, x3: f64) -> Result<Self> {
        let n = sqrt(x1 * x1 + x2 * x2 + x3 * x3);
        if !(n > 0.0) || !n.is_finite() {
            return Err(param_err!("imaginary unit needs a nonzero finite vector, got ({x1}, {x2}, {x3})"));
        }
        Ok(UnitImaginary(Quaternion::new(0.0, x1 / n, x2 / n, x3 / n)))
    }

    /// Accepts a purely imaginary quaternion (real part below `1e-12·|q|`) and normalizes it.
    pub fn from_quaternion(q: Quaternion) -> Result<Self> {
        if q.x0.abs() > 1e-12 * q.norm() {
            return Err(param_err!("imaginary unit must have zero real part, got {}", q.x0));
        }
        UnitImaginary::new(q.x1, q.x2, q.x3)
    }

    pub fn as_quaternion(self) -> Quaternion {
        self.0
    }

    /// A unit `k` orthogonal to `j`, so that `{1, j, k, jk}` is an orthonormal basis.
    pub fn orthogonal(self) -> UnitImaginary {
        let j = self.0;
        // cross with the basis vector least aligned with j
        let (a1, a2, a3) = (j.x1.abs(), j.x2.abs(), j.x3.abs());
        let e = if a1 <= a2 && a1 <= a3 {
            [1.0, 0.0, 0.0]
        } else if a2 <= a3 {
            [0.0, 1.0, 0.0]
        } else {
            [0.0, 0.0, 1.0]
        };
        let c = [j.x2 * e[2] - j.x3 * e[1], j.x3 * e[0] - j.x1 * e[2], j.x1 * e[1] - j.x2 * e[0]];
        UnitImaginary::new(c[0], c[1], c[2]).expect("cross product with a non-parallel axis is nonzero")
    }

    /// `x + j y` in the slice plane of this unit.
    pub fn embed(self, x: f64, y: f64) -> Quaternion {
        Quaternion::real(x) + self.0 * y
    }
}

impl Neg for UnitImaginary {
    type Output = UnitImaginary;

    fn neg(self) -> UnitImaginary {
        UnitImaginary(-self.0)
    }
}

impl From<UnitImaginary> for Quaternion {
    fn from(j: UnitImaginary) -> Quaternion {
        j.0
    }
}

/// Slice coordinates `u + j v` with `v ≥ 0`.
///
/// For `v = 0` the unit is stored but does not affect the embedded value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlicePoint {
    pub u: f64,
    pub v: f64,
    pub j: UnitImaginary,
}

impl SlicePoint {
    pub fn new(u: f64, v: f64, j: UnitImaginary) -> Result<Self> {
        if !(v >= 0.0) {
            return Err(param_err!("slice point needs v >= 0, got {v}"));
        }
        Ok(SlicePoint { u, v, j })
    }

    /// `(Re q, |Im q|, j_q)` with `e1` as the unit of a real quaternion.
    pub fn from_quaternion(q: Quaternion) -> Self {
        SlicePoint {
            u: q.x0,
            v: q.im_norm(),
            j: q.imaginary_unit().unwrap_or(UnitImaginary::E1),
        }
    }

    pub fn embed(self) -> Quaternion {
        self.j.embed(self.u, self.v)
    }
}

/// The 2-sphere `[q] = { u + j r : j ∈ 𝕊 }`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QSphere {
    pub center: f64,
    pub radius: f64,
}

impl QSphere {
    pub fn new(center: f64, radius: f64) -> Result<Self> {
        if !(radius >= 0.0) {
            return Err(param_err!("sphere radius must be >= 0, got {radius}"));
        }
        Ok(QSphere { center, radius })
    }

    pub fn contains(&self, s: Quaternion, tol: f64) -> bool {
        dist_sphere_point(self, s) <= tol
    }
}

pub fn sphere_of(q: Quaternion) -> QSphere {
    QSphere { center: q.x0, radius: q.im_norm() }
}

/// `inf { |q - s| : q ∈ S }`.
///
/// Rotating `q` within the sphere, the closest point shares the imaginary
/// direction of `s`, which gives `sqrt((u - s0)² + (r - |Im s|)²)`.
pub fn dist_sphere_point(sphere: &QSphere, s: Quaternion) -> f64 {
    let du = sphere.center - s.x0;
    let dr = sphere.radius - s.im_norm();
    sqrt(du * du + dr * dr)
}

/// `inf { |q - s| : q ∈ S, s ∈ Γ }`, sampled and then refined on the curve parameter.
pub fn dist_sphere_curve(sphere: &QSphere, contour: &Contour) -> f64 {
    contour.distance_to(|s| dist_sphere_point(sphere, s))
}
