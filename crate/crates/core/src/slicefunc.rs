//! Slice functions `f(u + jv) = f₀(u, v) + j f₁(u, v)`, their ⋆-algebra,
//! slice derivatives and Cauchy–Riemann residuals.

use alloc::boxed::Box;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use libm::{fabs, sqrt};
use num_complex::Complex64;

use crate::error::{domain_err, param_err, Error, Result};
use crate::quaternion::{Quaternion, UnitImaginary};

/// A component map `(u, v) ↦ ℍ`, defined for signed `v`.
pub type ComponentFn = Arc<dyn Fn(f64, f64) -> Result<Quaternion> + Send + Sync>;

/// Side on which the slice unit multiplies the odd component.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Chirality {
    /// `f₀ + j f₁`.
    Left,
    /// `f₀ + f₁ j`.
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Smoothness {
    Finite(u32),
    Infinite,
}

/// Open axially symmetric set described by its trace `(u, |v|)` on a half plane.
#[derive(Clone)]
pub enum AxiallySymmetricDomain {
    Everywhere,
    /// Ball centered on the real axis.
    Ball { center: f64, radius: f64 },
    /// `inner < |q - center| < outer`; `inner = 0` removes the center, `outer` may be infinite.
    Shell { center: f64, inner: f64, outer: f64 },
    /// Arbitrary membership in `(u, v ≥ 0)` with bounding box `[u_min, u_max, v_max]`.
    Predicate { contains: Arc<dyn Fn(f64, f64) -> bool + Send + Sync>, bbox: [f64; 3] },
    Intersection(Box<AxiallySymmetricDomain>, Box<AxiallySymmetricDomain>),
}

impl fmt::Debug for AxiallySymmetricDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Everywhere => write!(f, "Everywhere"),
            Self::Ball { center, radius } => write!(f, "Ball({center}, {radius})"),
            Self::Shell { center, inner, outer } => write!(f, "Shell({center}, {inner}, {outer})"),
            Self::Predicate { bbox, .. } => write!(f, "Predicate(bbox {bbox:?})"),
            Self::Intersection(a, b) => write!(f, "Intersection({a:?}, {b:?})"),
        }
    }
}

impl AxiallySymmetricDomain {
    pub fn ball(center: f64, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !center.is_finite() {
            return Err(param_err!("ball needs a finite center and positive radius, got {center}, {radius}"));
        }
        Ok(Self::Ball { center, radius })
    }

    pub fn shell(center: f64, inner: f64, outer: f64) -> Result<Self> {
        if !(inner >= 0.0 && outer > inner) || !center.is_finite() {
            return Err(param_err!("shell needs 0 <= inner < outer, got {inner}, {outer}"));
        }
        Ok(Self::Shell { center, inner, outer })
    }

    /// Everything except the real point `center`.
    pub fn punctured(center: f64) -> Self {
        Self::Shell { center, inner: 0.0, outer: f64::INFINITY }
    }

    pub fn contains(&self, u: f64, v: f64) -> bool {
        let v = fabs(v);
        match self {
            Self::Everywhere => u.is_finite() && v.is_finite(),
            Self::Ball { center, radius } => (u - center) * (u - center) + v * v < radius * radius,
            Self::Shell { center, inner, outer } => {
                let r = sqrt((u - center) * (u - center) + v * v);
                r > *inner && r < *outer
            }
            Self::Predicate { contains, .. } => contains(u, v),
            Self::Intersection(a, b) => a.contains(u, v) && b.contains(u, v),
        }
    }

    pub fn contains_point(&self, q: Quaternion) -> bool {
        self.contains(q.x0, q.im_norm())
    }

    /// `[u_min, u_max, v_max]`, `None` when unbounded.
    pub fn bbox(&self) -> Option<[f64; 3]> {
        match self {
            Self::Everywhere => None,
            Self::Ball { center, radius } => Some([center - radius, center + radius, *radius]),
            Self::Shell { center, outer, .. } => {
                outer.is_finite().then(|| [center - outer, center + outer, *outer])
            }
            Self::Predicate { bbox, .. } => Some(*bbox),
            Self::Intersection(a, b) => match (a.bbox(), b.bbox()) {
                (Some(x), Some(y)) => Some([x[0].max(y[0]), x[1].min(y[1]), x[2].min(y[2])]),
                (x, None) => x,
                (None, y) => y,
            },
        }
    }

    /// Intersection; fails when the bounding boxes are already disjoint.
    pub fn intersect(&self, other: &Self) -> Result<Self> {
        match (self, other) {
            (Self::Everywhere, d) | (d, Self::Everywhere) => return Ok(d.clone()),
            _ => {}
        }
        let d = Self::Intersection(Box::new(self.clone()), Box::new(other.clone()));
        if let Some(b) = d.bbox() {
            if b[0] > b[1] || b[2] < 0.0 {
                return Err(domain_err!("domains {self:?} and {other:?} do not intersect"));
            }
        }
        Ok(d)
    }

    /// Positively oriented boundary of the trace on `ℂ_j` for balls and bounded shells.
    pub fn boundary(&self, j: UnitImaginary, panels: usize) -> Result<crate::contour::Contour> {
        use crate::contour::Contour;
        match *self {
            Self::Ball { center, radius } => Contour::circle([center, 0.0], radius, j, panels),
            Self::Shell { center, inner, outer } if outer.is_finite() && inner > 0.0 => {
                let out = Contour::circle([center, 0.0], outer, j, panels)?;
                let inn = Contour::circle([center, 0.0], inner, j, panels)?.reversed();
                out.union(&inn)
            }
            _ => Err(param_err!("no boundary contour generator for {self:?}")),
        }
    }
}

/// A slice function together with its domain and chirality.
#[derive(Clone)]
pub struct SliceFunction {
    f0: ComponentFn,
    f1: ComponentFn,
    chirality: Chirality,
    domain: AxiallySymmetricDomain,
    smoothness: Smoothness,
}

impl fmt::Debug for SliceFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SliceFunction")
            .field("chirality", &self.chirality)
            .field("domain", &self.domain)
            .field("smoothness", &self.smoothness)
            .finish_non_exhaustive()
    }
}

impl SliceFunction {
    /// From components; `f0` must be even and `f1` odd in `v`.
    pub fn new<F0, F1>(f0: F0, f1: F1, chirality: Chirality) -> Self
    where
        F0: Fn(f64, f64) -> Result<Quaternion> + Send + Sync + 'static,
        F1: Fn(f64, f64) -> Result<Quaternion> + Send + Sync + 'static,
    {
        SliceFunction {
            f0: Arc::new(f0),
            f1: Arc::new(f1),
            chirality,
            domain: AxiallySymmetricDomain::Everywhere,
            smoothness: Smoothness::Infinite,
        }
    }

    pub fn left<F0, F1>(f0: F0, f1: F1) -> Self
    where
        F0: Fn(f64, f64) -> Result<Quaternion> + Send + Sync + 'static,
        F1: Fn(f64, f64) -> Result<Quaternion> + Send + Sync + 'static,
    {
        Self::new(f0, f1, Chirality::Left)
    }

    pub fn right<F0, F1>(f0: F0, f1: F1) -> Self
    where
        F0: Fn(f64, f64) -> Result<Quaternion> + Send + Sync + 'static,
        F1: Fn(f64, f64) -> Result<Quaternion> + Send + Sync + 'static,
    {
        Self::new(f0, f1, Chirality::Right)
    }

    pub fn constant(c: Quaternion) -> Self {
        Self::left(move |_, _| Ok(c), |_, _| Ok(Quaternion::ZERO))
    }

    pub fn identity() -> Self {
        Self::left(|u, _| Ok(Quaternion::real(u)), |_, v| Ok(Quaternion::real(v)))
    }

    /// `q ↦ q̄`, a slice function that is not slice hyperholomorphic.
    pub fn conjugate() -> Self {
        Self::left(|u, _| Ok(Quaternion::real(u)), |_, v| Ok(Quaternion::real(-v)))
    }

    /// `Σ qⁿ aₙ`, left slice hyperholomorphic.
    pub fn polynomial(coeffs: &[Quaternion]) -> Self {
        Self::laurent(0, coeffs).with_domain(AxiallySymmetricDomain::Everywhere)
    }

    /// `Σ aₙ qⁿ`, right slice hyperholomorphic.
    pub fn right_polynomial(coeffs: &[Quaternion]) -> Self {
        let mut f = Self::polynomial(coeffs);
        f.chirality = Chirality::Right;
        f
    }

    /// `Σ_{k} q^{min_power + k} c_k`; negative powers restrict the domain to `q ≠ 0`.
    pub fn laurent(min_power: i32, coeffs: &[Quaternion]) -> Self {
        let c0: Arc<[Quaternion]> = coeffs.into();
        let c1 = c0.clone();
        let f = Self::left(
            move |u, v| power_sum(u, v, min_power, &c0).map(|(a, _)| a),
            move |u, v| power_sum(u, v, min_power, &c1).map(|(_, b)| b),
        );
        if min_power < 0 {
            f.with_domain(AxiallySymmetricDomain::punctured(0.0))
        } else {
            f
        }
    }

    /// Intrinsic function from a complex map with `g(z̄) = conj g(z)`:
    /// `f₀ = Re g(u + iv)`, `f₁ = Im g(u + iv)`.
    pub fn intrinsic<G>(g: G) -> Self
    where
        G: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        let g0 = Arc::new(g);
        let g1 = g0.clone();
        Self::left(
            move |u, v| Ok(Quaternion::real(g0(Complex64::new(u, v)).re)),
            move |u, v| Ok(Quaternion::real(g1(Complex64::new(u, v)).im)),
        )
    }

    /// The left slice function whose restriction to `ℂ_j` is `g`.
    pub fn from_left_evaluator<G>(g: G, j: UnitImaginary) -> Self
    where
        G: Fn(Quaternion) -> Result<Quaternion> + Send + Sync + 'static,
    {
        let g0 = Arc::new(g);
        let g1 = g0.clone();
        let jq = j.as_quaternion();
        Self::left(
            move |u, v| Ok((g0(j.embed(u, v))? + g0(j.embed(u, -v))?) * 0.5),
            move |u, v| Ok(-(jq * (g1(j.embed(u, v))? - g1(j.embed(u, -v))?)) * 0.5),
        )
    }

    /// The right slice function whose restriction to `ℂ_j` is `g`.
    pub fn from_right_evaluator<G>(g: G, j: UnitImaginary) -> Self
    where
        G: Fn(Quaternion) -> Result<Quaternion> + Send + Sync + 'static,
    {
        let g0 = Arc::new(g);
        let g1 = g0.clone();
        let jq = j.as_quaternion();
        Self::right(
            move |u, v| Ok((g0(j.embed(u, v))? + g0(j.embed(u, -v))?) * 0.5),
            move |u, v| Ok(-((g1(j.embed(u, v))? - g1(j.embed(u, -v))?) * jq) * 0.5),
        )
    }

    /// `den^{-⋆} ⋆ num` in left form.
    pub fn star_rational(num: &SliceFunction, den: &SliceFunction) -> Result<Self> {
        star_left(&star_inverse_fn(den), num)
    }

    pub fn with_domain(mut self, domain: AxiallySymmetricDomain) -> Self {
        self.domain = domain;
        self
    }

    pub fn with_smoothness(mut self, smoothness: Smoothness) -> Self {
        self.smoothness = smoothness;
        self
    }

    pub fn chirality(&self) -> Chirality {
        self.chirality
    }

    pub fn domain(&self) -> &AxiallySymmetricDomain {
        &self.domain
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    /// `(f₀(u, v), f₁(u, v))`; `v` may be negative.
    pub fn components(&self, u: f64, v: f64) -> Result<(Quaternion, Quaternion)> {
        if !self.domain.contains(u, v) {
            return Err(domain_err!("({u}, {v}) lies outside {:?}", self.domain));
        }
        let a = (self.f0)(u, v)?;
        let b = (self.f1)(u, v)?;
        if !(a.is_finite() && b.is_finite()) {
            return Err(domain_err!("non-finite component value at ({u}, {v})"));
        }
        Ok((a, b))
    }

    fn combine(&self, j: Quaternion, a: Quaternion, b: Quaternion) -> Quaternion {
        match self.chirality {
            Chirality::Left => a + j * b,
            Chirality::Right => a + b * j,
        }
    }

    /// Value at `x + j y` on the slice `ℂ_j`, with `y` signed.
    pub fn eval_slice(&self, x: f64, y: f64, j: UnitImaginary) -> Result<Quaternion> {
        let (a, b) = self.components(x, y)?;
        Ok(self.combine(j.as_quaternion(), a, b))
    }

    /// Value at an arbitrary quaternion through its own slice.
    pub fn eval(&self, q: Quaternion) -> Result<Quaternion> {
        let j = q.imaginary_unit().unwrap_or(UnitImaginary::E1);
        self.eval_slice(q.x0, q.im_norm(), j)
    }

    /// Shared view of the components, for building derived functions.
    pub fn component_fns(&self) -> (ComponentFn, ComponentFn) {
        (self.f0.clone(), self.f1.clone())
    }
}

/// Real and imaginary parts of `zⁿ` for `z = u + iv`, summed against `coeffs`.
fn power_sum(u: f64, v: f64, min_power: i32, coeffs: &[Quaternion]) -> Result<(Quaternion, Quaternion)> {
    let z = Complex64::new(u, v);
    let mut zn = if min_power >= 0 {
        z.powi(min_power)
    } else {
        if z.norm_sqr() == 0.0 {
            return Err(Error::ZeroDivision { norm: 0.0 });
        }
        z.inv().powi(-min_power)
    };
    let (mut a, mut b) = (Quaternion::ZERO, Quaternion::ZERO);
    for &c in coeffs {
        a += c * zn.re;
        b += c * zn.im;
        zn *= z;
    }
    Ok((a, b))
}

/// Recombination `½(1 - j_q j) f(p_j) + ½(1 + j_q j) f(p̄_j)` (left) or its mirror
/// (right), computed from values on the slice `ℂ_j` only.
pub fn represent(f: &SliceFunction, q: Quaternion, j: UnitImaginary) -> Result<Quaternion> {
    let (u, v) = (q.x0, q.im_norm());
    let jq = q.imaginary_unit().unwrap_or(j).as_quaternion();
    let jj = j.as_quaternion();
    let fp = f.eval_slice(u, v, j)?;
    let fm = f.eval_slice(u, -v, j)?;
    Ok(match f.chirality() {
        Chirality::Left => {
            ((Quaternion::ONE - jq * jj) * fp + (Quaternion::ONE + jq * jj) * fm) * 0.5
        }
        Chirality::Right => {
            (fp * (Quaternion::ONE - jj * jq) + fm * (Quaternion::ONE + jj * jq)) * 0.5
        }
    })
}

fn star_components(f: &SliceFunction, g: &SliceFunction, chirality: Chirality) -> Result<SliceFunction> {
    let domain = f.domain().intersect(g.domain())?;
    let (f0, f1) = f.component_fns();
    let (g0, g1) = g.component_fns();
    let (f0b, f1b, g0b, g1b) = (f0.clone(), f1.clone(), g0.clone(), g1.clone());
    let h = SliceFunction::new(
        move |u, v| Ok(f0(u, v)? * g0(u, v)? - f1(u, v)? * g1(u, v)?),
        move |u, v| Ok(f0b(u, v)? * g1b(u, v)? + f1b(u, v)? * g0b(u, v)?),
        chirality,
    );
    let smooth = match (f.smoothness(), g.smoothness()) {
        (Smoothness::Finite(a), Smoothness::Finite(b)) => Smoothness::Finite(a.min(b)),
        (Smoothness::Finite(a), _) | (_, Smoothness::Finite(a)) => Smoothness::Finite(a),
        _ => Smoothness::Infinite,
    };
    Ok(h.with_domain(domain).with_smoothness(smooth))
}

/// Left ⋆-product: components `(f₀g₀ - f₁g₁, f₀g₁ + f₁g₀)` in left form.
pub fn star_left(f: &SliceFunction, g: &SliceFunction) -> Result<SliceFunction> {
    star_components(f, g, Chirality::Left)
}

/// Right ⋆-product: the same component rule in right form.
pub fn star_right(f: &SliceFunction, g: &SliceFunction) -> Result<SliceFunction> {
    star_components(f, g, Chirality::Right)
}

/// Left ⋆-inverse `(f^s)^{-1} f^c` where `f^c` conjugates the components and
/// `f^s = f ⋆ f^c` has real components.
pub fn star_inverse_fn(f: &SliceFunction) -> SliceFunction {
    let (f0, f1) = f.component_fns();
    let (f0b, f1b) = (f0.clone(), f1.clone());
    let sym = move |u: f64, v: f64, f0: &ComponentFn, f1: &ComponentFn| -> Result<(f64, f64, Quaternion, Quaternion)> {
        let (a, b) = (f0(u, v)?, f1(u, v)?);
        let s0 = a.norm_sqr() - b.norm_sqr();
        let s1 = 2.0 * a.dot(b);
        let den = s0 * s0 + s1 * s1;
        if !(den > 0.0) {
            return Err(Error::ZeroDivision { norm: sqrt(den) });
        }
        // complex inverse of s0 + i s1
        Ok((s0 / den, -s1 / den, a.conj(), b.conj()))
    };
    SliceFunction::left(
        move |u, v| {
            let (r0, r1, c0, c1) = sym(u, v, &f0, &f1)?;
            Ok(c0 * r0 - c1 * r1)
        },
        move |u, v| {
            let (r0, r1, c0, c1) = sym(u, v, &f0b, &f1b)?;
            Ok(c1 * r0 + c0 * r1)
        },
    )
    .with_domain(f.domain().clone())
    .with_smoothness(f.smoothness())
}

/// `1e-5 · max(1, |q|)`.
pub fn default_step(q: Quaternion) -> f64 {
    1e-5 * q.norm().max(1.0)
}

/// Central difference along the real direction inside the slice through `q`.
pub fn slice_derivative(f: &SliceFunction, q: Quaternion, h: f64) -> Result<Quaternion> {
    if !(h > 0.0) {
        return Err(param_err!("finite-difference step must be positive, got {h}"));
    }
    let j = q.imaginary_unit().unwrap_or(UnitImaginary::E1);
    let (u, v) = (q.x0, q.im_norm());
    let fp = f.eval_slice(u + h, v, j)?;
    let fm = f.eval_slice(u - h, v, j)?;
    Ok((fp - fm) * (0.5 / h))
}

/// `n`-th slice derivative from central differences of step `h`, `h/2`, `h/4`
/// combined by two Richardson sweeps.
pub fn nth_slice_derivative(f: &SliceFunction, q: Quaternion, n: u32, h: f64) -> Result<Quaternion> {
    if n == 0 {
        return f.eval(q);
    }
    if !(h > 0.0) {
        return Err(param_err!("finite-difference step must be positive, got {h}"));
    }
    let j = q.imaginary_unit().unwrap_or(UnitImaginary::E1);
    let (u, v) = (q.x0, q.im_norm());
    let central = |h: f64| -> Result<Quaternion> {
        // n-th central difference with half-integer offsets for odd n
        let mut acc = Quaternion::ZERO;
        let mut binom = 1.0;
        for k in 0..=n {
            let offset = (n as f64 / 2.0 - k as f64) * h;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            acc += f.eval_slice(u + offset, v, j)? * (sign * binom);
            binom = binom * (n - k) as f64 / (k + 1) as f64;
        }
        Ok(acc * (1.0 / libm::pow(h, n as f64)))
    };
    let d1 = central(h)?;
    let d2 = central(h / 2.0)?;
    let d3 = central(h / 4.0)?;
    let r1 = (d2 * 4.0 - d1) * (1.0 / 3.0);
    let r2 = (d3 * 4.0 - d2) * (1.0 / 3.0);
    Ok((r2 * 16.0 - r1) * (1.0 / 15.0))
}

/// `max(‖∂_v f₀ + ∂_u f₁‖, ‖∂_u f₀ - ∂_v f₁‖)` by central differences.
pub fn cr_residual(f: &SliceFunction, u: f64, v: f64, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(param_err!("finite-difference step must be positive, got {h}"));
    }
    let (a_up, b_up) = f.components(u + h, v)?;
    let (a_um, b_um) = f.components(u - h, v)?;
    let (a_vp, b_vp) = f.components(u, v + h)?;
    let (a_vm, b_vm) = f.components(u, v - h)?;
    let s = 0.5 / h;
    let du0 = (a_up - a_um) * s;
    let du1 = (b_up - b_um) * s;
    let dv0 = (a_vp - a_vm) * s;
    let dv1 = (b_vp - b_vm) * s;
    Ok((dv0 + du1).norm().max((du0 - dv1).norm()))
}

/// Cubic Hermite interpolation of quaternion samples with centred-difference
/// tangents; periodic when a period is given.
#[derive(Clone, Debug, PartialEq)]
pub struct Tabulated {
    params: Vec<f64>,
    values: Vec<Quaternion>,
    period: Option<f64>,
}

impl Tabulated {
    pub fn new(params: Vec<f64>, values: Vec<Quaternion>, period: Option<f64>) -> Result<Self> {
        if params.len() != values.len() {
            return Err(param_err!("{} parameters but {} values", params.len(), values.len()));
        }
        if params.len() < 4 {
            return Err(param_err!("tabulated data needs at least 4 samples"));
        }
        if params.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(param_err!("tabulated parameters must be strictly increasing"));
        }
        if let Some(p) = period {
            if !(p > params[params.len() - 1] - params[0]) {
                return Err(param_err!("period {p} does not exceed the sampled range"));
            }
        }
        if values.iter().any(|q| !q.is_finite()) {
            return Err(param_err!("tabulated values must be finite"));
        }
        Ok(Tabulated { params, values, period })
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn values(&self) -> &[Quaternion] {
        &self.values
    }

    fn node(&self, i: isize) -> (f64, Quaternion) {
        let n = self.params.len() as isize;
        match self.period {
            Some(p) => {
                let k = i.div_euclid(n);
                let r = i.rem_euclid(n) as usize;
                (self.params[r] + k as f64 * p, self.values[r])
            }
            None => {
                let r = i.clamp(0, n - 1) as usize;
                (self.params[r], self.values[r])
            }
        }
    }

    fn tangent(&self, i: isize) -> Quaternion {
        let n = self.params.len() as isize;
        let (lo, hi) = match self.period {
            Some(_) => (i - 1, i + 1),
            None => ((i - 1).max(0), (i + 1).min(n - 1)),
        };
        let (t0, v0) = self.node(lo);
        let (t1, v1) = self.node(hi);
        (v1 - v0) * (1.0 / (t1 - t0))
    }

    pub fn eval(&self, t: f64) -> Result<Quaternion> {
        let first = self.params[0];
        let last = self.params[self.params.len() - 1];
        let t = match self.period {
            Some(p) => first + (t - first) - p * libm::floor((t - first) / p),
            None => {
                if t < first - 1e-12 || t > last + 1e-12 {
                    return Err(domain_err!("parameter {t} outside tabulated range [{first}, {last}]"));
                }
                t.clamp(first, last)
            }
        };
        let n = self.params.len();
        let i = match self.params.partition_point(|&x| x <= t) {
            0 => 0,
            k if k >= n && self.period.is_none() => n - 2,
            k => k - 1,
        } as isize;
        let (t0, v0) = self.node(i);
        let (t1, v1) = self.node(i + 1);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let (m0, m1) = (self.tangent(i) * h, self.tangent(i + 1) * h);
        let s2 = s * s;
        let s3 = s2 * s;
        Ok(v0 * (2.0 * s3 - 3.0 * s2 + 1.0)
            + m0 * (s3 - 2.0 * s2 + s)
            + v1 * (-2.0 * s3 + 3.0 * s2)
            + m1 * (s3 - s2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rq(rng: &mut ChaCha8Rng, scale: f64) -> Quaternion {
        Quaternion::new(
            rng.gen_range(-scale..scale),
            rng.gen_range(-scale..scale),
            rng.gen_range(-scale..scale),
            rng.gen_range(-scale..scale),
        )
    }

    fn runit(rng: &mut ChaCha8Rng) -> UnitImaginary {
        loop {
            if let Ok(j) = UnitImaginary::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) {
                return j;
            }
        }
    }

    /// Coefficient convolution `Σ q^{n+m} aₙ bₘ`.
    fn convolve(a: &[Quaternion], b: &[Quaternion]) -> Vec<Quaternion> {
        let mut c = alloc::vec![Quaternion::ZERO; a.len() + b.len() - 1];
        for (n, &x) in a.iter().enumerate() {
            for (m, &y) in b.iter().enumerate() {
                c[n + m] += x * y;
            }
        }
        c
    }

    fn direct_poly(coeffs: &[Quaternion], q: Quaternion) -> Quaternion {
        let mut qn = Quaternion::ONE;
        let mut acc = Quaternion::ZERO;
        for &c in coeffs {
            acc += qn * c;
            qn = qn * q;
        }
        acc
    }

    #[test]
    fn square_at_e1() {
        let f = SliceFunction::left(
            |u, v| Ok(Quaternion::real(u * u - v * v)),
            |u, v| Ok(Quaternion::real(2.0 * u * v)),
        );
        assert!((f.eval(Quaternion::E1).unwrap() + Quaternion::ONE).norm() < 1e-15);
        let q = Quaternion::new(0.3, -1.0, 2.0, 0.7);
        assert!((SliceFunction::identity().eval(q).unwrap() - q).norm() < 1e-15);
    }

    #[test]
    fn polynomial_matches_direct_powers() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let coeffs: Vec<_> = (0..5).map(|_| rq(&mut rng, 1.0)).collect();
            let q = rq(&mut rng, 1.5);
            let f = SliceFunction::polynomial(&coeffs);
            let want = direct_poly(&coeffs, q);
            assert!((f.eval(q).unwrap() - want).norm() < 1e-12 * (1.0 + want.norm()));
            let g = SliceFunction::right_polynomial(&coeffs);
            let mut qn = Quaternion::ONE;
            let mut want_r = Quaternion::ZERO;
            for &c in &coeffs {
                want_r += c * qn;
                qn = qn * q;
            }
            assert!((g.eval(q).unwrap() - want_r).norm() < 1e-12 * (1.0 + want_r.norm()));
        }
    }

    #[test]
    fn representation_formula_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let coeffs: Vec<_> = (0..4).map(|_| rq(&mut rng, 1.0)).collect();
            let f = SliceFunction::polynomial(&coeffs);
            let g = SliceFunction::right_polynomial(&coeffs);
            let q = rq(&mut rng, 2.0);
            let j = runit(&mut rng);
            for h in [&f, &g] {
                let direct = h.eval(q).unwrap();
                let rec = represent(h, q, j).unwrap();
                assert!((direct - rec).norm() < 1e-12 * (1.0 + direct.norm()));
            }
        }
    }

    #[test]
    fn star_products_against_convolution() {
        let a = [-Quaternion::E1, Quaternion::ONE];
        let b = [-Quaternion::E2, Quaternion::ONE];
        let p = star_left(&SliceFunction::polynomial(&a), &SliceFunction::polynomial(&b)).unwrap();
        let want = [Quaternion::E3, -Quaternion::E1 - Quaternion::E2, Quaternion::ONE];
        assert_eq!(convolve(&a, &b), want.to_vec());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let q = rq(&mut rng, 2.0);
            let w = direct_poly(&want, q);
            assert!((p.eval(q).unwrap() - w).norm() < 1e-12 * (1.0 + w.norm()));
        }
        let c1 = Quaternion::new(1.0, 2.0, -1.0, 0.5);
        let c2 = Quaternion::new(0.0, -1.0, 3.0, 2.0);
        let q = Quaternion::new(0.4, 0.1, 0.2, 0.3);
        let cc = star_left(&SliceFunction::constant(c1), &SliceFunction::constant(c2)).unwrap();
        assert!((cc.eval(q).unwrap() - c1 * c2).norm() < 1e-14);
        let f = SliceFunction::polynomial(&[c1, c2]);
        let f1 = star_left(&f, &SliceFunction::constant(Quaternion::ONE)).unwrap();
        assert!((f1.eval(q).unwrap() - f.eval(q).unwrap()).norm() < 1e-14);
    }

    #[test]
    fn right_star_against_convolution() {
        let a = [-Quaternion::E1, Quaternion::ONE];
        let b = [-Quaternion::E2, Quaternion::ONE];
        let p = star_right(&SliceFunction::right_polynomial(&a), &SliceFunction::right_polynomial(&b)).unwrap();
        let want = convolve(&a, &b);
        let q = Quaternion::new(0.4, -0.7, 0.2, 1.3);
        let mut qn = Quaternion::ONE;
        let mut w = Quaternion::ZERO;
        for &c in &want {
            w += c * qn;
            qn = qn * q;
        }
        assert!((p.eval(q).unwrap() - w).norm() < 1e-13);
    }

    #[test]
    fn star_inverse_and_rational() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let f = SliceFunction::polynomial(&[rq(&mut rng, 1.0), rq(&mut rng, 1.0), Quaternion::ONE]);
            let inv = star_inverse_fn(&f);
            let one = star_left(&f, &inv).unwrap();
            let one_b = star_left(&inv, &f).unwrap();
            let q = rq(&mut rng, 1.0);
            match (one.eval(q), one_b.eval(q)) {
                (Ok(a), Ok(b)) => {
                    let scale = inv.eval(q).unwrap().norm().max(1.0);
                    assert!((a - Quaternion::ONE).norm() < 1e-10 * scale);
                    assert!((b - Quaternion::ONE).norm() < 1e-10 * scale);
                }
                _ => continue,
            }
        }
        // (q - a)^{-⋆} ⋆ (q - a) over real a is ordinary division
        let den = SliceFunction::polynomial(&[Quaternion::real(-2.0), Quaternion::ONE]);
        let num = SliceFunction::polynomial(&[Quaternion::ZERO, Quaternion::ZERO, Quaternion::ONE]);
        let r = SliceFunction::star_rational(&num, &den).unwrap();
        let q = Quaternion::new(0.5, 0.1, -0.3, 0.9);
        let want = (q - Quaternion::real(2.0)).inverse().unwrap() * q * q;
        assert!((r.eval(q).unwrap() - want).norm() < 1e-13);
    }

    #[test]
    fn derivatives() {
        let sq = SliceFunction::polynomial(&[Quaternion::ZERO, Quaternion::ZERO, Quaternion::ONE]);
        let q = Quaternion::new(1.0, 1.0, 0.0, 0.0);
        let d = slice_derivative(&sq, q, 1e-5).unwrap();
        assert!((d - Quaternion::new(2.0, 2.0, 0.0, 0.0)).norm() < 1e-8);
        let c = SliceFunction::constant(Quaternion::new(1.0, 2.0, 3.0, 4.0));
        assert!(slice_derivative(&c, q, 1e-5).unwrap().norm() < 1e-15);
        let d = slice_derivative(&SliceFunction::identity(), Quaternion::new(0.3, 0.0, 4.0, 0.0), 1e-5).unwrap();
        assert!((d - Quaternion::ONE).norm() < 1e-9);
        assert!(slice_derivative(&sq, q, 0.0).is_err());
    }

    #[test]
    fn slice_derivative_at_real_points_is_slice_independent() {
        let coeffs = [Quaternion::new(0.0, 1.0, 0.0, 2.0), Quaternion::E2, Quaternion::new(1.0, 0.0, -1.0, 0.0)];
        let f = SliceFunction::polynomial(&coeffs);
        let x = 0.7;
        let base = slice_derivative(&f, Quaternion::real(x), 1e-5).unwrap();
        for j in [UnitImaginary::E2, UnitImaginary::E3, UnitImaginary::new(1.0, 1.0, 1.0).unwrap()] {
            let h = 1e-5;
            let d = (f.eval_slice(x + h, 0.0, j).unwrap() - f.eval_slice(x - h, 0.0, j).unwrap()) * (0.5 / h);
            assert!((d - base).norm() < 1e-9);
        }
    }

    #[test]
    fn higher_derivatives_of_polynomials() {
        let coeffs: Vec<_> = (0..6).map(|n| Quaternion::new(n as f64, 1.0, -0.5 * n as f64, 0.25)).collect();
        let f = SliceFunction::polynomial(&coeffs);
        let mut fact = 1.0;
        for n in 0..=5u32 {
            if n > 0 {
                fact *= n as f64;
            }
            let d = nth_slice_derivative(&f, Quaternion::ZERO, n, 0.1).unwrap();
            assert!((d * (1.0 / fact) - coeffs[n as usize]).norm() < 1e-6, "n = {n}");
        }
    }

    #[test]
    fn cr_residuals() {
        let sq = SliceFunction::polynomial(&[Quaternion::ZERO, Quaternion::ZERO, Quaternion::ONE]);
        assert!(cr_residual(&sq, 1.0, 0.5, 1e-5).unwrap() < 1e-8);
        let r = cr_residual(&SliceFunction::conjugate(), 0.3, -1.2, 1e-5).unwrap();
        assert!((r - 2.0).abs() < 1e-8);
        let c = SliceFunction::constant(Quaternion::E2);
        assert_eq!(cr_residual(&c, 0.0, 1.0, 1e-5).unwrap(), 0.0);
        let ball = SliceFunction::identity().with_domain(AxiallySymmetricDomain::ball(0.0, 1.0).unwrap());
        assert!(matches!(cr_residual(&ball, 0.999, 0.0, 1e-2), Err(Error::Domain(_))));
    }

    #[test]
    fn products_of_regular_functions_are_regular() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let f = SliceFunction::polynomial(&[rq(&mut rng, 1.0), rq(&mut rng, 1.0), rq(&mut rng, 1.0)]);
            let g = SliceFunction::polynomial(&[rq(&mut rng, 1.0), rq(&mut rng, 1.0)]);
            let p = star_left(&f, &g).unwrap();
            let (u, v) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            assert!(cr_residual(&p, u, v, 1e-5).unwrap() < 1e-6);
        }
    }

    #[test]
    fn maximum_principle_on_balls() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let coeffs: Vec<_> = (0..4).map(|_| rq(&mut rng, 1.0)).collect();
        let f = SliceFunction::polynomial(&coeffs);
        let mut inner: f64 = 0.0;
        let mut outer: f64 = 0.0;
        for _ in 0..1000 {
            let dir = loop {
                let d = rq(&mut rng, 1.0);
                if d.norm() > 1e-3 {
                    break d * (1.0 / d.norm());
                }
            };
            let r: f64 = rng.gen_range(0.0..1.0);
            inner = inner.max(f.eval(dir * r).unwrap().norm());
            outer = outer.max(f.eval(dir).unwrap().norm());
        }
        assert!(inner <= outer + 1e-9);
    }

    #[test]
    fn domains() {
        let b = AxiallySymmetricDomain::ball(1.0, 2.0).unwrap();
        assert!(b.contains(1.0, -1.9) && !b.contains(3.1, 0.0));
        let s = AxiallySymmetricDomain::shell(0.0, 1.0, 2.0).unwrap();
        assert!(s.contains(0.0, 1.5) && !s.contains(0.5, 0.0));
        assert!(AxiallySymmetricDomain::punctured(0.0).contains(0.0, 1e-8));
        assert!(!AxiallySymmetricDomain::punctured(0.0).contains(0.0, 0.0));
        let far = AxiallySymmetricDomain::ball(10.0, 1.0).unwrap();
        assert!(matches!(b.intersect(&far), Err(Error::Domain(_))));
        let both = b.intersect(&s).unwrap();
        assert!(both.contains(1.0, 1.5) && !both.contains(0.0, 0.5));
        let f = SliceFunction::identity().with_domain(b.clone());
        let g = SliceFunction::identity().with_domain(far);
        assert!(star_left(&f, &g).is_err());
        let c = s.boundary(UnitImaginary::E1, 8).unwrap();
        assert_eq!(c.components().len(), 2);
        assert!((c.length() - 6.0 * core::f64::consts::PI).abs() < 1e-10);
        let f = SliceFunction::identity().with_domain(b);
        assert!(matches!(f.eval(Quaternion::real(5.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn evaluators_rebuild_slice_functions() {
        let coeffs = [Quaternion::new(1.0, 0.0, 2.0, 0.0), Quaternion::E3, Quaternion::new(0.5, 0.5, 0.0, 1.0)];
        let f = SliceFunction::polynomial(&coeffs);
        let j = UnitImaginary::new(0.0, 1.0, 1.0).unwrap();
        let f2 = f.clone();
        let g = SliceFunction::from_left_evaluator(move |p| f2.eval(p), j);
        let rf = SliceFunction::right_polynomial(&coeffs);
        let rf2 = rf.clone();
        let rg = SliceFunction::from_right_evaluator(move |p| rf2.eval(p), j);
        let q = Quaternion::new(0.3, -0.4, 1.1, 0.2);
        assert!((g.eval(q).unwrap() - f.eval(q).unwrap()).norm() < 1e-13);
        assert!((rg.eval(q).unwrap() - rf.eval(q).unwrap()).norm() < 1e-13);
    }

    #[test]
    fn laurent_and_intrinsic() {
        let f = SliceFunction::laurent(-1, &[Quaternion::ONE]);
        let q = Quaternion::new(0.5, 0.0, 0.5, 0.5);
        assert!((f.eval(q).unwrap() - q.inverse().unwrap()).norm() < 1e-14);
        assert!(f.eval(Quaternion::ZERO).is_err());
        let g = SliceFunction::intrinsic(|z| z.exp());
        let w = g.eval(Quaternion::new(0.0, 0.0, core::f64::consts::PI, 0.0)).unwrap();
        assert!((w + Quaternion::ONE).norm() < 1e-14);
    }

    #[test]
    fn tabulated_interpolation() {
        let n = 64;
        let period = 2.0 * core::f64::consts::PI;
        let params: Vec<f64> = (0..n).map(|i| period * i as f64 / n as f64).collect();
        let values: Vec<Quaternion> = params.iter().map(|&t| Quaternion::new(libm::cos(t), libm::sin(2.0 * t), 0.0, 1.0)).collect();
        let tab = Tabulated::new(params, values, Some(period)).unwrap();
        for t in [0.01, 1.234, 3.0, 6.2, -0.5, 7.0] {
            let want = Quaternion::new(libm::cos(t), libm::sin(2.0 * t), 0.0, 1.0);
            assert!((tab.eval(t).unwrap() - want).norm() < 1e-3, "t = {t}");
        }
        let open = Tabulated::new(alloc::vec![0.0, 1.0, 2.0, 3.0], alloc::vec![Quaternion::ONE; 4], None).unwrap();
        assert!(open.eval(3.5).is_err());
        assert!((open.eval(2.5).unwrap() - Quaternion::ONE).norm() < 1e-15);
        assert!(Tabulated::new(alloc::vec![0.0, 0.0, 1.0, 2.0], alloc::vec![Quaternion::ONE; 4], None).is_err());
    }

    fn arb_q() -> impl Strategy<Value = Quaternion> {
        prop::array::uniform4(-2.0f64..2.0).prop_map(Quaternion::from_array)
    }

    proptest! {
        #[test]
        fn components_have_parity(c in prop::collection::vec(arb_q(), 1..6), u in -2.0f64..2.0, v in 0.0f64..2.0) {
            let f = SliceFunction::polynomial(&c);
            let (a, b) = f.components(u, v).unwrap();
            let (am, bm) = f.components(u, -v).unwrap();
            prop_assert!((a - am).norm() <= 1e-12 * (1.0 + a.norm()));
            prop_assert!((b + bm).norm() <= 1e-12 * (1.0 + b.norm()));
            let (_, b0) = f.components(u, 0.0).unwrap();
            prop_assert!(b0.norm() == 0.0);
        }

        #[test]
        fn star_left_is_associative(
            a in prop::collection::vec(arb_q(), 1..4),
            b in prop::collection::vec(arb_q(), 1..4),
            c in prop::collection::vec(arb_q(), 1..4),
            q in arb_q(),
        ) {
            let (fa, fb, fc) = (SliceFunction::polynomial(&a), SliceFunction::polynomial(&b), SliceFunction::polynomial(&c));
            let l = star_left(&star_left(&fa, &fb).unwrap(), &fc).unwrap().eval(q).unwrap();
            let r = star_left(&fa, &star_left(&fb, &fc).unwrap()).unwrap().eval(q).unwrap();
            let oracle = direct_poly(&convolve(&convolve(&a, &b), &c), q);
            prop_assert!((l - r).norm() <= 1e-12 * (1.0 + oracle.norm()));
            prop_assert!((l - oracle).norm() <= 1e-12 * (1.0 + oracle.norm()));
        }
    }
}
