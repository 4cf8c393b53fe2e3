//! Spherical Laurent series `Σ Q(q)^m (c_{2m} + (q - q₀) c_{2m+1})`, Cassini
//! sets, coefficient extraction and singularity classification.

use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{fabs, log, pow, sqrt};
use num_complex::Complex64;

use crate::contour::Contour;
use crate::error::{domain_err, param_err, Error, Result};
use crate::kernel::char_poly;
use crate::linalg::{least_squares, CMatrix};
use crate::quadrature::QuadOptions;
use crate::quaternion::{Quaternion, UnitImaginary};
use crate::slicefunc::SliceFunction;
use crate::transform::ls_slope;

/// `Q_{q₀}(q) = q² - 2 Re(q₀) q + |q₀|²`.
pub fn characteristic(q: Quaternion, q0: Quaternion) -> Quaternion {
    char_poly(q0, q)
}

/// `d(q, q₀) = sqrt(|Q_{q₀}(q)|)`.
pub fn cassini_distance(q: Quaternion, q0: Quaternion) -> f64 {
    sqrt(characteristic(q, q0).norm())
}

/// Cassini ball `d < r` or shell `r₁ < d < r₂`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CassiniSet {
    Ball { center: Quaternion, radius: f64 },
    Shell { center: Quaternion, inner: f64, outer: f64 },
}

impl CassiniSet {
    pub fn contains(&self, q: Quaternion) -> bool {
        match *self {
            CassiniSet::Ball { center, radius } => cassini_distance(q, center) < radius,
            CassiniSet::Shell { center, inner, outer } => {
                let d = cassini_distance(q, center);
                d > inner && d < outer
            }
        }
    }
}

/// Point at Cassini distance `d` from `q₀` on the slice of `q₀`, on the line `Re q = Re q₀`.
pub fn point_at_cassini_distance(q0: Quaternion, d: f64) -> Quaternion {
    let j = q0.imaginary_unit().unwrap_or(UnitImaginary::E1);
    let b = q0.im_norm();
    j.embed(q0.x0, sqrt(b * b + d * d))
}

/// Coefficients `c_n`, `n = n_min, n_min + 1, …`, around `center`.
#[derive(Clone, Debug, PartialEq)]
pub struct SphericalLaurentSeries {
    center: Quaternion,
    n_min: i64,
    coeffs: Vec<Quaternion>,
}

impl SphericalLaurentSeries {
    pub fn new(center: Quaternion, n_min: i64, coeffs: Vec<Quaternion>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(param_err!("series window is empty"));
        }
        Ok(SphericalLaurentSeries { center, n_min, coeffs })
    }

    pub fn center(&self) -> Quaternion {
        self.center
    }

    pub fn n_min(&self) -> i64 {
        self.n_min
    }

    pub fn n_max(&self) -> i64 {
        self.n_min + self.coeffs.len() as i64 - 1
    }

    pub fn coeffs(&self) -> &[Quaternion] {
        &self.coeffs
    }

    /// `c_n`, zero outside the window.
    pub fn coefficient(&self, n: i64) -> Quaternion {
        if n < self.n_min || n > self.n_max() {
            return Quaternion::ZERO;
        }
        self.coeffs[(n - self.n_min) as usize]
    }

    /// Individual terms `(n, Q^m c_{2m})` or `(n, Q^m (q - q₀) c_{2m+1})`.
    pub fn terms(&self, q: Quaternion) -> Result<Vec<(i64, Quaternion)>> {
        let qq = characteristic(q, self.center);
        let lin = q - self.center;
        let m_lo = self.n_min.div_euclid(2);
        let m_hi = self.n_max().div_euclid(2);
        let mut pow_q = if m_lo < 0 { qq.inverse()?.powi((-m_lo) as i32)? } else { qq.powi(m_lo as i32)? };
        let mut out = Vec::with_capacity(self.coeffs.len());
        for m in m_lo..=m_hi {
            for n in [2 * m, 2 * m + 1] {
                if n < self.n_min || n > self.n_max() {
                    continue;
                }
                let c = self.coefficient(n);
                let t = if n % 2 == 0 { pow_q * c } else { pow_q * lin * c };
                out.push((n, t));
            }
            pow_q = pow_q * qq;
        }
        Ok(out)
    }

    /// Windowed sum of all terms.
    pub fn eval(&self, q: Quaternion) -> Result<Quaternion> {
        let v: Quaternion = self.terms(q)?.into_iter().map(|(_, t)| t).sum();
        if !v.is_finite() {
            return Err(domain_err!("series value is not finite at {q:?}"));
        }
        Ok(v)
    }
}

/// Radii of the convergence shell `r₁ < d(q, q₀) < r₂`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Radii {
    pub r1: f64,
    pub r2: f64,
    /// Positive-index roots `‖c_n‖^{1/n}` grow without bound on the window.
    pub super_exponential_positive: bool,
    pub super_exponential_negative: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ConvergenceDomain {
    Ball { radius: f64 },
    Shell { inner: f64, outer: f64 },
    Empty,
}

impl Radii {
    pub fn domain(&self) -> ConvergenceDomain {
        if !(self.r1 < self.r2) {
            ConvergenceDomain::Empty
        } else if self.r1 == 0.0 {
            ConvergenceDomain::Ball { radius: self.r2 }
        } else {
            ConvergenceDomain::Shell { inner: self.r1, outer: self.r2 }
        }
    }

    pub fn cassini_set(&self, center: Quaternion) -> Option<CassiniSet> {
        match self.domain() {
            ConvergenceDomain::Ball { radius } => Some(CassiniSet::Ball { center, radius }),
            ConvergenceDomain::Shell { inner, outer } => Some(CassiniSet::Shell { center, inner, outer }),
            ConvergenceDomain::Empty => None,
        }
    }
}

/// Limsup estimate of `‖c_n‖^{1/n}` over the upper half of the nonzero tail;
/// also reports whether the roots keep growing (log-log slope above 1/2).
fn tail_root(roots: &[(f64, f64)]) -> (f64, bool) {
    if roots.is_empty() {
        return (0.0, false);
    }
    let nmax = roots.iter().map(|r| r.0).fold(0.0, f64::max);
    let tail: Vec<_> = roots.iter().filter(|r| r.0 >= nmax / 2.0).collect();
    let lim = tail.iter().map(|r| r.1).fold(0.0, f64::max);
    let growing = if tail.len() >= 4 {
        let xs: Vec<f64> = tail.iter().map(|r| log(r.0)).collect();
        let ys: Vec<f64> = tail.iter().map(|r| log(r.1)).collect();
        ls_slope(&xs, &ys) > 0.5
    } else {
        false
    };
    (lim, growing)
}

/// `r₁ = limsup ‖c_{-n}‖^{1/n}`, `1/r₂ = limsup ‖c_n‖^{1/n}`, estimated on the stored window.
pub fn convergence_radii(series: &SphericalLaurentSeries) -> Radii {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (k, c) in series.coeffs.iter().enumerate() {
        let n = series.n_min + k as i64;
        let norm = c.norm();
        if norm == 0.0 || n == 0 {
            continue;
        }
        let an = fabs(n as f64);
        let root = pow(norm, 1.0 / an);
        if n > 0 {
            pos.push((an, root));
        } else {
            neg.push((an, root));
        }
    }
    let (rp, gp) = tail_root(&pos);
    let (rn, gn) = tail_root(&neg);
    Radii {
        r1: if gn { f64::INFINITY } else { rn },
        r2: if gp { 0.0 } else if rp == 0.0 { f64::INFINITY } else { 1.0 / rp },
        super_exponential_positive: gp,
        super_exponential_negative: gn,
    }
}

/// Which tail of the window a growth estimate refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tail {
    Positive,
    Negative,
}

/// Slope of `log ‖term_n‖` against `|n|` over the upper half of a tail,
/// evaluated at a point of Cassini distance `d`; negative means the terms decay.
pub fn term_growth_rate(series: &SphericalLaurentSeries, d: f64, tail: Tail) -> Result<f64> {
    let q = point_at_cassini_distance(series.center, d);
    let terms = series.terms(q)?;
    let sel: Vec<(f64, f64)> = terms
        .iter()
        .filter(|(n, _)| match tail {
            Tail::Positive => *n > 0,
            Tail::Negative => *n < 0,
        })
        .filter(|(_, t)| t.norm() > 0.0)
        .map(|&(n, t)| (fabs(n as f64), log(t.norm())))
        .collect();
    let nmax = sel.iter().map(|s| s.0).fold(0.0, f64::max);
    let (xs, ys): (Vec<f64>, Vec<f64>) = sel.iter().filter(|s| s.0 >= nmax / 2.0).copied().unzip();
    if xs.len() < 2 {
        return Err(Error::Undecidable(alloc::format!("too few nonzero terms in the {tail:?} tail")));
    }
    Ok(ls_slope(&xs, &ys))
}

/// Cassini distance in `[lo, hi]` where the tail terms switch between decay
/// and growth, located by bisection on the empirical growth rate.
pub fn divergence_onset(series: &SphericalLaurentSeries, tail: Tail, lo: f64, hi: f64) -> Result<f64> {
    if !(lo > 0.0 && hi > lo) {
        return Err(param_err!("bisection bracket must satisfy 0 < lo < hi"));
    }
    // positive tail: growth increases with d; negative tail: it decreases
    let sign = if tail == Tail::Positive { 1.0 } else { -1.0 };
    let g = |d: f64| term_growth_rate(series, d, tail).map(|s| s * sign);
    let (mut a, mut b) = (lo, hi);
    let (ga, gb) = (g(a)?, g(b)?);
    if !(ga < 0.0 && gb > 0.0) {
        return Err(Error::Undecidable(alloc::format!(
            "growth rate does not change sign on [{lo}, {hi}] ({ga:e}, {gb:e})"
        )));
    }
    for _ in 0..100 {
        let m = sqrt(a * b);
        if g(m)? < 0.0 {
            a = m;
        } else {
            b = m;
        }
        if b / a - 1.0 < 1e-12 {
            break;
        }
    }
    Ok(sqrt(a * b))
}

fn sup_on(f: &SliceFunction, contour: &Contour) -> Result<f64> {
    let mut m: f64 = 0.0;
    for pt in contour.sample(256) {
        m = m.max(f.eval(pt.s)?.norm());
    }
    Ok(m)
}

/// Laurent coefficients at a real center,
/// `f_n = (1/2π) ∮_{|s-α|=ρ} (s - α)^{-n-1} ds_j f(s)`, for `n_min ≤ n ≤ n_max`.
///
/// Absolute quadrature tolerances are scaled by `ρ^{-n} sup ‖f‖` per coefficient.
pub fn laurent_coefficients(
    f: &SliceFunction,
    center: f64,
    j: UnitImaginary,
    rho: f64,
    n_min: i64,
    n_max: i64,
    opts: &QuadOptions,
) -> Result<SphericalLaurentSeries> {
    if !(rho > 0.0) || n_max < n_min {
        return Err(param_err!("need rho > 0 and n_min <= n_max"));
    }
    let circle = Contour::circle([center, 0.0], rho, j, 8)?;
    let fmax = sup_on(f, &circle)?.max(f64::MIN_POSITIVE);
    let alpha = Quaternion::real(center);
    let mut coeffs = Vec::with_capacity((n_max - n_min + 1) as usize);
    for n in n_min..=n_max {
        let scale = pow(rho, -(n as f64)) * fmax;
        let local = QuadOptions { abs_tol: opts.abs_tol * scale, ..*opts };
        let e = -(n + 1);
        let v = circle.integrate(
            |pt| {
                let z = pt.s - alpha;
                let zp = if e >= 0 { z.powi(e as i32)? } else { z.inverse()?.powi((-e) as i32)? };
                Ok(zp * pt.ds * f.eval(pt.s)?)
            },
            &local,
        )?;
        coeffs.push(v * (0.5 / PI));
    }
    SphericalLaurentSeries::new(alpha, n_min, coeffs)
}

/// Coefficient `f_{-1}` of the expansion at the real point `α`.
pub fn residue_at_real(f: &SliceFunction, alpha: f64, j: UnitImaginary, rho: f64, opts: &QuadOptions) -> Result<Quaternion> {
    Ok(laurent_coefficients(f, alpha, j, rho, -1, -1, opts)?.coeffs[0])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Singularity {
    /// No negative coefficients; `zero_order` is the first nonzero nonnegative index.
    Removable { zero_order: u32 },
    Pole { order: u32 },
    /// Negative coefficients reach the edge of the largest window.
    Essential,
}

/// Largest window examined by [`classify_singularity`].
pub const CLASSIFY_MAX_WINDOW: i64 = 64;
const CLASSIFY_ZERO_SEARCH: i64 = 8;

/// Classifies a real isolated singularity from the negative Laurent
/// coefficients on windows `8, 16, 32, 64`: the index of the last
/// coefficient above `1e-9 · sup ‖f‖` must agree on two consecutive windows.
pub fn classify_singularity(
    f: &SliceFunction,
    alpha: f64,
    j: UnitImaginary,
    rho: f64,
    opts: &QuadOptions,
) -> Result<Singularity> {
    let circle = Contour::circle([alpha, 0.0], rho, j, 8)?;
    let tol = 1e-9 * sup_on(f, &circle)?;
    let series = laurent_coefficients(f, alpha, j, rho, -CLASSIFY_MAX_WINDOW, CLASSIFY_ZERO_SEARCH, opts)?;
    let cutoff = |window: i64| (1..=window).rev().find(|&k| series.coefficient(-k).norm() > tol).unwrap_or(0);
    let mut window = 8;
    while window < CLASSIFY_MAX_WINDOW {
        let (a, b) = (cutoff(window), cutoff(2 * window));
        if a == b && a < window {
            if a == 0 {
                let zero = (0..=CLASSIFY_ZERO_SEARCH).find(|&n| series.coefficient(n).norm() > tol);
                return match zero {
                    Some(z) => Ok(Singularity::Removable { zero_order: z as u32 }),
                    None => Err(Error::Undecidable(alloc::format!(
                        "all coefficients up to index {CLASSIFY_ZERO_SEARCH} vanish"
                    ))),
                };
            }
            return Ok(Singularity::Pole { order: a as u32 });
        }
        window *= 2;
    }
    if cutoff(CLASSIFY_MAX_WINDOW) > 3 * CLASSIFY_MAX_WINDOW / 4 {
        return Ok(Singularity::Essential);
    }
    Err(Error::Undecidable(alloc::format!(
        "coefficient cutoff did not stabilize up to window {CLASSIFY_MAX_WINDOW}"
    )))
}

/// Sampling layout for spherical coefficient fits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphericalFit {
    /// Coefficients `c_n` for `-2M ≤ n ≤ 2M + 1`.
    pub half_window: i64,
    /// Points per circle.
    pub samples: usize,
    /// Circle radius as a fraction of `|Im q₀|`.
    pub radius_fraction: f64,
}

impl Default for SphericalFit {
    fn default() -> Self {
        SphericalFit { half_window: 6, samples: 64, radius_fraction: 0.5 }
    }
}

fn to_pair(x: Quaternion, j: Quaternion, k: Quaternion) -> (Complex64, Complex64) {
    let jk = j * k;
    (Complex64::new(x.x0, x.dot(j)), Complex64::new(x.dot(k), x.dot(jk)))
}

fn from_pair(a: Complex64, b: Complex64, j: UnitImaginary, k: Quaternion) -> Quaternion {
    j.embed(a.re, a.im) + j.embed(b.re, b.im) * k
}

/// Spherical coefficients at a non-real `q₀` fitted by least squares to
/// samples on the circles of radius `radius_fraction · |Im q₀|` around
/// `q₀` and `q̄₀` in the slice of `q₀`. Returns the series and the relative
/// fit residual.
pub fn spherical_coefficients(f: &SliceFunction, q0: Quaternion, fit: &SphericalFit) -> Result<(SphericalLaurentSeries, f64)> {
    let j = q0
        .imaginary_unit()
        .ok_or_else(|| param_err!("spherical fit needs a non-real center; use laurent_coefficients"))?;
    if fit.half_window < 0 || fit.samples < 8 || !(fit.radius_fraction > 0.0 && fit.radius_fraction < 1.0) {
        return Err(param_err!("invalid spherical fit layout {fit:?}"));
    }
    let k = j.orthogonal().as_quaternion();
    let jq = j.as_quaternion();
    let (a, b) = (q0.x0, q0.im_norm());
    let r = fit.radius_fraction * b;
    let z0 = Complex64::new(a, b);
    let n_min = -2 * fit.half_window;
    let n_max = 2 * fit.half_window + 1;
    let ncols = (n_max - n_min + 1) as usize;
    let mut pts = Vec::with_capacity(2 * fit.samples);
    for c in [z0, z0.conj()] {
        for i in 0..fit.samples {
            let t = 2.0 * PI * (i as f64 + 0.5) / fit.samples as f64;
            pts.push(c + Complex64::from_polar(r, t));
        }
    }
    let mut mat = CMatrix::zeros(pts.len(), ncols);
    let mut rhs_a = Vec::with_capacity(pts.len());
    let mut rhs_b = Vec::with_capacity(pts.len());
    for (row, &z) in pts.iter().enumerate() {
        let qz = (z - z0) * (z - z0.conj());
        for (col, n) in (n_min..=n_max).enumerate() {
            let m = n.div_euclid(2);
            let base = qz.powi(m as i32);
            mat.set(row, col, if n % 2 == 0 { base } else { base * (z - z0) });
        }
        let v = f.eval(j.embed(z.re, z.im))?;
        let (va, vb) = to_pair(v, jq, k);
        rhs_a.push(va);
        rhs_b.push(vb);
    }
    let sol = least_squares(&mat, &[rhs_a.clone(), rhs_b.clone()])?;
    let coeffs: Vec<Quaternion> = sol[0].iter().zip(&sol[1]).map(|(&ca, &cb)| from_pair(ca, cb, j, k)).collect();
    let mut res: f64 = 0.0;
    let mut mag: f64 = 0.0;
    for row in 0..pts.len() {
        let fa: Complex64 = (0..ncols).map(|c| mat.get(row, c) * sol[0][c]).sum();
        let fb: Complex64 = (0..ncols).map(|c| mat.get(row, c) * sol[1][c]).sum();
        res = res.max(sqrt((fa - rhs_a[row]).norm_sqr() + (fb - rhs_b[row]).norm_sqr()));
        mag = mag.max(sqrt(rhs_a[row].norm_sqr() + rhs_b[row].norm_sqr()));
    }
    let rel = if mag > 0.0 { res / mag } else { res };
    Ok((SphericalLaurentSeries::new(q0, n_min, coeffs)?, rel))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SphericalOrder {
    Finite(u32),
    /// Negative coefficients reach the window edge.
    Infinite,
}

/// Largest acceptable relative residual of the spherical fit.
pub const SPHERICAL_FIT_RESIDUAL: f64 = 1e-8;

/// Smallest even `n₀` with `‖c_n‖ < tol` for all `n < -n₀`.
pub fn spherical_order(f: &SliceFunction, q0: Quaternion, fit: &SphericalFit) -> Result<SphericalOrder> {
    let (series, fmax) = if q0.im_norm() == 0.0 {
        let j = UnitImaginary::E1;
        let rho = 0.5;
        let s = laurent_coefficients(f, q0.x0, j, rho, -2 * fit.half_window, 2 * fit.half_window + 1, &QuadOptions::default())?;
        let circle = Contour::circle([q0.x0, 0.0], rho, j, 8)?;
        (s, sup_on(f, &circle)?)
    } else {
        let (s, residual) = spherical_coefficients(f, q0, fit)?;
        if residual > SPHERICAL_FIT_RESIDUAL {
            return Err(Error::Undecidable(alloc::format!(
                "spherical window does not represent the function (relative residual {residual:e})"
            )));
        }
        let scale = s.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
        (s, scale)
    };
    let tol = 1e-9 * fmax.max(f64::MIN_POSITIVE);
    let last = (series.n_min()..0).find(|&n| series.coefficient(n).norm() > tol);
    match last {
        None => Ok(SphericalOrder::Finite(0)),
        Some(n) if n <= series.n_min() + 1 => Ok(SphericalOrder::Infinite),
        Some(n) => {
            let m = (-n) as u32;
            Ok(SphericalOrder::Finite(m + (m % 2)))
        }
    }
}
