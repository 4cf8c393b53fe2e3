//! Cauchy transforms of boundary data on slice contours, the derivative
//! kernel, additive splitting and Hölder diagnostics.

use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{log, pow};

use crate::contour::{Contour, ContourPoint};
use crate::error::{domain_err, param_err, Error, Result};
use crate::kernel::{cauchy_kernel_left_with_guard, cauchy_kernel_right_with_guard, phi_with_guard, pole_guard};
use crate::quadrature::QuadOptions;
use crate::quaternion::{dist_sphere_curve, sphere_of, Quaternion};
use crate::slicefunc::{SliceFunction, Tabulated};

/// Values prescribed on a contour.
#[derive(Clone, Debug)]
pub enum BoundaryData {
    /// Restriction of a slice function to the contour.
    Slice(SliceFunction),
    /// One table per contour component, keyed by the component parameter.
    Tabulated(Vec<Tabulated>),
}

impl From<SliceFunction> for BoundaryData {
    fn from(f: SliceFunction) -> Self {
        BoundaryData::Slice(f)
    }
}

impl BoundaryData {
    pub fn eval(&self, pt: &ContourPoint) -> Result<Quaternion> {
        match self {
            BoundaryData::Slice(f) => f.eval(pt.s),
            BoundaryData::Tabulated(tables) => tables
                .get(pt.component)
                .ok_or_else(|| param_err!("no table for contour component {}", pt.component))?
                .eval(pt.param),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct TransformOptions {
    pub quad: QuadOptions,
    /// Absolute pole guard; `None` uses the kernel default `1e-12 (1 + |s|)`.
    pub pole_guard: Option<f64>,
}

impl TransformOptions {
    pub fn with_tol(tol: f64) -> Self {
        TransformOptions { quad: QuadOptions::with_tol(tol), ..Default::default() }
    }

    fn guard(&self, s: Quaternion) -> f64 {
        self.pole_guard.unwrap_or_else(|| pole_guard(s))
    }
}

/// `dist([p], Γ)`.
pub fn boundary_distance(contour: &Contour, p: Quaternion) -> f64 {
    dist_sphere_curve(&sphere_of(p), contour)
}

fn ensure_off_contour(contour: &Contour, p: Quaternion, opts: &TransformOptions) -> Result<f64> {
    let d = boundary_distance(contour, p);
    let guard = opts.pole_guard.unwrap_or(1e-12 * (1.0 + p.norm()));
    if !(d >= guard) {
        return Err(Error::Pole { distance: d, guard });
    }
    Ok(d)
}

/// `f̂(p) = (1/2π) ∮ S_L⁻¹(s, p) ds_j f(s)`.
pub fn cauchy_transform(f: &BoundaryData, contour: &Contour, p: Quaternion, opts: &TransformOptions) -> Result<Quaternion> {
    ensure_off_contour(contour, p, opts)?;
    let v = contour.integrate(
        |pt| {
            let k = cauchy_kernel_left_with_guard(pt.s, p, opts.guard(pt.s))?.value;
            Ok(k * pt.ds * f.eval(pt)?)
        },
        &opts.quad,
    )?;
    Ok(v * (0.5 / PI))
}

/// `(1/2π) ∮ f(s) ds_j S_R⁻¹(s, p)`.
pub fn cauchy_transform_right(
    f: &BoundaryData,
    contour: &Contour,
    p: Quaternion,
    opts: &TransformOptions,
) -> Result<Quaternion> {
    ensure_off_contour(contour, p, opts)?;
    let v = contour.integrate(
        |pt| {
            let k = cauchy_kernel_right_with_guard(pt.s, p, opts.guard(pt.s))?.value;
            Ok(f.eval(pt)? * pt.ds * k)
        },
        &opts.quad,
    )?;
    Ok(v * (0.5 / PI))
}

/// `∂_{x₀} f̂(p) = (1/2π) ∮ φ_s(p) ds_j f(s)`.
pub fn transform_derivative(
    f: &BoundaryData,
    contour: &Contour,
    p: Quaternion,
    opts: &TransformOptions,
) -> Result<Quaternion> {
    ensure_off_contour(contour, p, opts)?;
    let v = contour.integrate(
        |pt| {
            let k = phi_with_guard(pt.s, p, opts.guard(pt.s))?.value;
            Ok(k * pt.ds * f.eval(pt)?)
        },
        &opts.quad,
    )?;
    Ok(v * (0.5 / PI))
}

/// `(|Γ| / π) · sup ‖f‖ / dist([p], Γ)²`, with the supremum over `samples` points per arc.
pub fn derivative_bound(f: &BoundaryData, contour: &Contour, p: Quaternion, samples: usize) -> Result<f64> {
    let mut sup: f64 = 0.0;
    for pt in contour.sample(samples) {
        sup = sup.max(f.eval(&pt)?.norm());
    }
    let d = boundary_distance(contour, p);
    Ok(contour.length() / PI * sup / (d * d))
}

/// Which side of a closed contour a point lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// Inside `U₊`, winding number one.
    Inside,
    /// Outside, in `U₋`.
    Outside,
}

/// The two parts of the splitting `f = f₊ + f₋` on a closed contour.
#[derive(Clone, Debug)]
pub struct SplitPair {
    data: BoundaryData,
    contour: Contour,
    opts: TransformOptions,
}

/// Builds the splitting of `f` along the closed contour bounding `U₊`.
pub fn split(f: BoundaryData, contour: &Contour, opts: &TransformOptions) -> Result<SplitPair> {
    if !contour.is_closed() {
        return Err(param_err!("splitting needs a closed contour"));
    }
    for pt in contour.sample(16) {
        f.eval(&pt)?;
    }
    Ok(SplitPair { data: f, contour: contour.clone(), opts: *opts })
}

impl SplitPair {
    pub fn contour(&self) -> &Contour {
        &self.contour
    }

    pub fn data(&self) -> &BoundaryData {
        &self.data
    }

    pub fn side(&self, p: Quaternion) -> Result<Side> {
        ensure_off_contour(&self.contour, p, &self.opts)?;
        let w = self.contour.winding_number(p)?;
        match libm::round(w) as i64 {
            1 => Ok(Side::Inside),
            0 => Ok(Side::Outside),
            n => Err(domain_err!("winding number {n} around {p:?}; contour is not a positively oriented boundary")),
        }
    }

    /// `f₊(p) = f̂(p)` for `p ∈ U₊`.
    pub fn plus(&self, p: Quaternion) -> Result<Quaternion> {
        match self.side(p)? {
            Side::Inside => cauchy_transform(&self.data, &self.contour, p, &self.opts),
            Side::Outside => Err(domain_err!("{p:?} is outside the contour; f_plus is defined inside")),
        }
    }

    /// `f₋(p) = -f̂(p)` for `p ∈ U₋`, vanishing at infinity.
    pub fn minus(&self, p: Quaternion) -> Result<Quaternion> {
        match self.side(p)? {
            Side::Outside => Ok(-cauchy_transform(&self.data, &self.contour, p, &self.opts)?),
            Side::Inside => Err(domain_err!("{p:?} is inside the contour; f_minus is defined outside")),
        }
    }

    /// `f₋(∞)`.
    pub fn minus_at_infinity(&self) -> Quaternion {
        Quaternion::ZERO
    }

    /// The evaluator of the part living on `p`'s side.
    pub fn part(&self, p: Quaternion) -> Result<(Side, Quaternion)> {
        let side = self.side(p)?;
        let v = cauchy_transform(&self.data, &self.contour, p, &self.opts)?;
        Ok((side, if side == Side::Inside { v } else { -v }))
    }
}

/// Point of the contour and its in-slice unit normal `j γ'/|γ'|`, which
/// points to the left of the direction of travel.
pub fn left_normal(contour: &Contour, component: usize, param: f64) -> Result<(ContourPoint, Quaternion)> {
    let pt = contour.point_at(component, param)?;
    let t = pt.tangent;
    let n = contour.j().as_quaternion() * t * (1.0 / t.norm());
    Ok((pt, n))
}

/// `‖f̂(q₀ + d n) - f̂(q₀ - d n) - f(q₀)‖` for each distance `d`, with `n` the left normal.
pub fn boundary_jump_check(
    f: &BoundaryData,
    contour: &Contour,
    component: usize,
    param: f64,
    distances: &[f64],
    opts: &TransformOptions,
) -> Result<Vec<f64>> {
    let (pt, n) = left_normal(contour, component, param)?;
    let f0 = f.eval(&pt)?;
    distances
        .iter()
        .map(|&d| {
            if !(d > opts.guard(pt.s)) {
                return Err(Error::Pole { distance: d, guard: opts.guard(pt.s) });
            }
            let inner = cauchy_transform(f, contour, pt.s + n * d, opts)?;
            let outer = cauchy_transform(f, contour, pt.s - n * d, opts)?;
            Ok((inner - outer - f0).norm())
        })
        .collect()
}

/// Discrete Hölder data of boundary samples.
#[derive(Clone, Debug, PartialEq)]
pub struct HolderData {
    pub alpha: f64,
    /// `max ‖f(s) - f(t)‖ / |s - t|^α` over sample pairs.
    pub seminorm: f64,
    /// The same quotient for the components `f₀`, `f₁`, when available.
    pub component_seminorms: Option<[f64; 2]>,
    pub sup_norm: f64,
}

impl HolderData {
    /// `‖f‖₀ + |f|_α`.
    pub fn norm(&self) -> f64 {
        self.sup_norm + self.seminorm
    }
}

/// Pairwise Hölder quotient of `(position, value)` samples.
pub fn holder_seminorm(samples: &[(Quaternion, Quaternion)], alpha: f64) -> Result<HolderData> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(param_err!("Hölder exponent must lie in (0, 1), got {alpha}"));
    }
    if samples.len() < 2 {
        return Err(param_err!("Hölder estimate needs at least 2 samples"));
    }
    Ok(HolderData {
        alpha,
        seminorm: pairwise_quotient(samples.iter().map(|&(s, v)| (s, v)), alpha),
        component_seminorms: None,
        sup_norm: samples.iter().map(|(_, v)| v.norm()).fold(0.0, f64::max),
    })
}

fn pairwise_quotient<I: Iterator<Item = (Quaternion, Quaternion)> + Clone>(samples: I, alpha: f64) -> f64 {
    let pts: Vec<_> = samples.collect();
    let mut best: f64 = 0.0;
    for (i, &(s, a)) in pts.iter().enumerate() {
        for &(t, b) in &pts[i + 1..] {
            let d = (s - t).norm();
            if d > 0.0 {
                best = best.max((a - b).norm() / pow(d, alpha));
            }
        }
    }
    best
}

/// Hölder data of a slice function on `n` samples per arc of a contour,
/// including the component quotients of `(f₀, f₁)` over the parameter domain.
pub fn holder_on_contour(f: &SliceFunction, contour: &Contour, alpha: f64, n: usize) -> Result<HolderData> {
    let pts = contour.sample(n);
    let mut vals = Vec::with_capacity(pts.len());
    let mut comps = Vec::with_capacity(pts.len());
    for pt in &pts {
        vals.push((pt.s, f.eval(pt.s)?));
        let (u, v) = (pt.s.x0, pt.s.im_norm());
        comps.push((u, v, f.components(u, v)?));
    }
    let mut data = holder_seminorm(&vals, alpha)?;
    let coords = |u: f64, v: f64| Quaternion::new(u, v, 0.0, 0.0);
    let c0 = pairwise_quotient(comps.iter().map(|&(u, v, (a, _))| (coords(u, v), a)), alpha);
    let c1 = pairwise_quotient(comps.iter().map(|&(u, v, (_, b))| (coords(u, v), b)), alpha);
    data.component_seminorms = Some([c0, c1]);
    Ok(data)
}

/// Least-squares slope of `log ‖f̂(p)‖` against `log dist([p], Γ)` along the
/// inward normal at a contour point, distances `2^{-k}` for `k = 3..=12`.
pub fn growth_exponent(
    f: &BoundaryData,
    contour: &Contour,
    component: usize,
    param: f64,
    opts: &TransformOptions,
) -> Result<f64> {
    let (pt, n) = left_normal(contour, component, param)?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for k in 3..=12 {
        let d = pow(2.0, -(k as f64));
        let p = pt.s + n * d;
        let dist = boundary_distance(contour, p);
        let v = cauchy_transform(f, contour, p, opts)?.norm();
        if v == 0.0 {
            continue;
        }
        xs.push(log(dist));
        ys.push(log(v));
    }
    if xs.len() < 2 {
        // transform vanishes identically along the ladder
        return Ok(0.0);
    }
    Ok(ls_slope(&xs, &ys))
}

pub(crate) fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
