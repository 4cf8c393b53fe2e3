//! The global operators `G_L`, `G_R`, slice test functions, slice adjoints,
//! the distributional pairing with the Cauchy kernel and the area-integral
//! solver of `G_L f = |q̲|² V`.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use libm::{cos, exp, sin, sqrt};

use crate::error::{param_err, Error, Result};
use crate::kernel::cauchy_kernel_left_with_guard;
use crate::quadrature::GaussLegendre;
use crate::quaternion::{Quaternion, UnitImaginary};
use crate::slicefunc::{AxiallySymmetricDomain, Chirality, SliceFunction};

/// A quaternion-valued map of a quaternion variable.
pub trait QuaternionMap {
    fn value(&self, q: Quaternion) -> Result<Quaternion>;
}

impl QuaternionMap for SliceFunction {
    fn value(&self, q: Quaternion) -> Result<Quaternion> {
        self.eval(q)
    }
}

impl<F: Fn(Quaternion) -> Result<Quaternion>> QuaternionMap for F {
    fn value(&self, q: Quaternion) -> Result<Quaternion> {
        self(q)
    }
}

/// `1e-5 · (1 + |q|)`.
pub fn default_step(q: Quaternion) -> f64 {
    1e-5 * (1.0 + q.norm())
}

const BASIS: [Quaternion; 4] = [Quaternion::ONE, Quaternion::E1, Quaternion::E2, Quaternion::E3];

/// Central differences `∂f/∂x_i`, `i = 0..3`.
pub fn gradient<M: QuaternionMap + ?Sized>(f: &M, q: Quaternion, h: f64) -> Result<[Quaternion; 4]> {
    if !(h > 0.0) {
        return Err(param_err!("finite-difference step must be positive, got {h}"));
    }
    let mut g = [Quaternion::ZERO; 4];
    for (gi, e) in g.iter_mut().zip(BASIS) {
        *gi = (f.value(q + e * h)? - f.value(q - e * h)?) * (0.5 / h);
    }
    Ok(g)
}

fn radial(g: &[Quaternion; 4], q: Quaternion) -> Quaternion {
    g[1] * q.x1 + g[2] * q.x2 + g[3] * q.x3
}

/// `G_L f = |q̲|² ∂₀f + q̲ Σ x_i ∂_i f`.
pub fn apply_gl<M: QuaternionMap + ?Sized>(f: &M, q: Quaternion, h: f64) -> Result<Quaternion> {
    let g = gradient(f, q, h)?;
    Ok(g[0] * q.im_norm_sqr() + q.im() * radial(&g, q))
}

/// `G_R f = |q̲|² ∂₀f + (Σ x_i ∂_i f) q̲`.
pub fn apply_gr<M: QuaternionMap + ?Sized>(f: &M, q: Quaternion, h: f64) -> Result<Quaternion> {
    let g = gradient(f, q, h)?;
    Ok(g[0] * q.im_norm_sqr() + radial(&g, q) * q.im())
}

/// `(g(u, v) + g(u, -v)) / 2`.
pub fn p_plus<G: Fn(f64, f64) -> Quaternion>(g: G, u: f64, v: f64) -> Quaternion {
    (g(u, v) + g(u, -v)) * 0.5
}

/// `(g(u, v) - g(u, -v)) / 2`.
pub fn p_minus<G: Fn(f64, f64) -> Quaternion>(g: G, u: f64, v: f64) -> Quaternion {
    (g(u, v) - g(u, -v)) * 0.5
}

/// `C^∞` step: 0 for `x ≤ 0`, 1 for `x ≥ 1`.
pub fn smooth_step(x: f64) -> f64 {
    let psi = |t: f64| if t > 0.0 { exp(-1.0 / t) } else { 0.0 };
    let (a, b) = (psi(x), psi(1.0 - x));
    a / (a + b)
}

/// `C^∞` cutoff equal to 1 on `r ≤ R/2` and 0 on `r ≥ R`.
pub fn cutoff(r: f64, radius: f64) -> f64 {
    1.0 - smooth_step((r - 0.5 * radius) / (0.5 * radius))
}

/// Compactly supported test function `T(g) = P₊g + j P₋g` (or the right
/// form `P₊g + P₋g j`) built from a map `g` on the `(u, v)` plane.
#[derive(Clone)]
pub struct SliceTestFunction {
    g: Arc<dyn Fn(f64, f64) -> Quaternion + Send + Sync>,
    /// Box `[u_min, u_max, v_min, v_max]` containing the support of `g`.
    support: [f64; 4],
    chirality: Chirality,
}

impl fmt::Debug for SliceTestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SliceTestFunction")
            .field("support", &self.support)
            .field("chirality", &self.chirality)
            .finish_non_exhaustive()
    }
}

impl SliceTestFunction {
    /// Left lift `T(g)`; `g` must vanish outside `support`.
    pub fn lift_t<G>(g: G, support: [f64; 4]) -> Result<Self>
    where
        G: Fn(f64, f64) -> Quaternion + Send + Sync + 'static,
    {
        Self::lift(g, support, Chirality::Left)
    }

    /// Right lift `P₊g + P₋g j`.
    pub fn lift_t_right<G>(g: G, support: [f64; 4]) -> Result<Self>
    where
        G: Fn(f64, f64) -> Quaternion + Send + Sync + 'static,
    {
        Self::lift(g, support, Chirality::Right)
    }

    fn lift<G>(g: G, support: [f64; 4], chirality: Chirality) -> Result<Self>
    where
        G: Fn(f64, f64) -> Quaternion + Send + Sync + 'static,
    {
        if !(support[0] < support[1] && support[2] < support[3]) || support.iter().any(|x| !x.is_finite()) {
            return Err(param_err!("support box {support:?} is empty or unbounded"));
        }
        Ok(SliceTestFunction { g: Arc::new(g), support, chirality })
    }

    /// `amp · exp(1 - 1/(1 - ρ²))` for `ρ = |(u, v) - center| / radius < 1`.
    pub fn bump(center: [f64; 2], radius: f64, amp: Quaternion) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(param_err!("bump radius must be positive"));
        }
        let g = move |u: f64, v: f64| {
            let (du, dv) = (u - center[0], v - center[1]);
            let rho2 = (du * du + dv * dv) / (radius * radius);
            if rho2 >= 1.0 {
                Quaternion::ZERO
            } else {
                amp * exp(1.0 - 1.0 / (1.0 - rho2))
            }
        };
        Self::lift_t(g, [center[0] - radius, center[0] + radius, center[1] - radius, center[1] + radius])
    }

    /// Gaussian of width `sigma` truncated smoothly to the disc of radius `radius`.
    pub fn gaussian(center: [f64; 2], sigma: f64, radius: f64, amp: Quaternion) -> Result<Self> {
        if !(sigma > 0.0 && radius > 0.0) {
            return Err(param_err!("gaussian width and radius must be positive"));
        }
        let g = move |u: f64, v: f64| {
            let (du, dv) = (u - center[0], v - center[1]);
            let r2 = du * du + dv * dv;
            amp * (exp(-r2 / (2.0 * sigma * sigma)) * cutoff(sqrt(r2), radius))
        };
        Self::lift_t(g, [center[0] - radius, center[0] + radius, center[1] - radius, center[1] + radius])
    }

    /// Left-multiplies the underlying map by a constant.
    pub fn scaled(&self, a: Quaternion) -> Self {
        let g = self.g.clone();
        SliceTestFunction { g: Arc::new(move |u, v| a * g(u, v)), support: self.support, chirality: self.chirality }
    }

    pub fn chirality(&self) -> Chirality {
        self.chirality
    }

    pub fn support(&self) -> [f64; 4] {
        self.support
    }

    /// Bounding box `[u_min, u_max, v_max]` of the support in any slice (`|v| ≤ v_max`).
    pub fn slice_support(&self) -> [f64; 3] {
        [self.support[0], self.support[1], self.support[2].abs().max(self.support[3].abs())]
    }

    /// `(P₊g(u, v), P₋g(u, v))`.
    pub fn components(&self, u: f64, v: f64) -> (Quaternion, Quaternion) {
        let (a, b) = ((self.g)(u, v), (self.g)(u, -v));
        ((a + b) * 0.5, (a - b) * 0.5)
    }

    pub fn eval(&self, q: Quaternion) -> Quaternion {
        let j = q.imaginary_unit().unwrap_or(UnitImaginary::E1).as_quaternion();
        let (a, b) = self.components(q.x0, q.im_norm());
        match self.chirality {
            Chirality::Left => a + j * b,
            Chirality::Right => a + b * j,
        }
    }

    pub fn as_slice_function(&self) -> SliceFunction {
        let (t0, t1) = (self.clone(), self.clone());
        SliceFunction::new(move |u, v| Ok(t0.components(u, v).0), move |u, v| Ok(t1.components(u, v).1), self.chirality)
    }
}

impl QuaternionMap for SliceTestFunction {
    fn value(&self, q: Quaternion) -> Result<Quaternion> {
        Ok(self.eval(q))
    }
}

/// `G_L^{*s} φ = -G_R φ - 2 φ q̲`, the adjoint for pairings over one slice.
pub fn adjoint_gl_slice<M: QuaternionMap + ?Sized>(phi: &M, q: Quaternion, h: f64) -> Result<Quaternion> {
    Ok(-apply_gr(phi, q, h)? - phi.value(q)? * q.im() * 2.0)
}

/// `G_L^* φ = -G_R φ - 4 φ q̲`, the adjoint for pairings over `ℍ`.
pub fn adjoint_gl_global<M: QuaternionMap + ?Sized>(phi: &M, q: Quaternion, h: f64) -> Result<Quaternion> {
    Ok(-apply_gr(phi, q, h)? - phi.value(q)? * q.im() * 4.0)
}

/// `G_R^{*s} φ = -G_L φ - 2 q̲ φ`.
pub fn adjoint_gr_slice<M: QuaternionMap + ?Sized>(phi: &M, q: Quaternion, h: f64) -> Result<Quaternion> {
    Ok(-apply_gl(phi, q, h)? - q.im() * phi.value(q)? * 2.0)
}

/// Tensor Gauss–Legendre rule on a rectangle of a slice plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RectRule {
    /// `[u_min, u_max, v_min, v_max]`.
    pub bounds: [f64; 4],
    /// Panels along the shorter side; cells are square.
    pub panels: usize,
    pub order: usize,
}

/// `∫∫ a(u + jv) b(u + jv) du dv` over a rectangle.
pub fn slice_pairing<A, B>(a: A, b: B, j: UnitImaginary, rule: &RectRule) -> Result<Quaternion>
where
    A: Fn(Quaternion) -> Result<Quaternion>,
    B: Fn(Quaternion) -> Result<Quaternion>,
{
    let nodes = tensor_nodes(rule);
    let mut acc = Quaternion::ZERO;
    for (u, v, w) in nodes {
        let p = j.embed(u, v);
        acc += a(p)? * b(p)? * w;
    }
    Ok(acc)
}

fn composite(a: f64, b: f64, panels: usize, gl: &GaussLegendre) -> Vec<(f64, f64)> {
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * gl.order());
    for k in 0..panels {
        out.extend(gl.mapped(a + k as f64 * h, a + (k + 1) as f64 * h));
    }
    out
}

/// Square cells: `panels` along the shorter side.
fn rect_cell(w: f64, h: f64, panels: usize) -> f64 {
    w.min(h) / panels as f64
}

fn tensor_nodes(rule: &RectRule) -> Vec<(f64, f64, f64)> {
    let gl = GaussLegendre::new(rule.order);
    let (w, h) = (rule.bounds[1] - rule.bounds[0], rule.bounds[3] - rule.bounds[2]);
    let cell = rect_cell(w, h, rule.panels);
    let count = |len: f64| libm::ceil(len / cell - 1e-9).max(1.0) as usize;
    let us = composite(rule.bounds[0], rule.bounds[1], count(w), &gl);
    let vs = composite(rule.bounds[2], rule.bounds[3], count(h), &gl);
    let mut out = Vec::with_capacity(us.len() * vs.len());
    for &(u, wu) in &us {
        for &(v, wv) in &vs {
            out.push((u, v, wu * wv));
        }
    }
    out
}

/// Polar patch `(Δu, Δv, weight)` over the disc of radius `radius`: Gauss–Legendre
/// in `r` (with the Jacobian `r`) and the trapezoid rule in the angle.
fn polar_patch(radius: f64, radial: usize, angular: usize) -> Vec<(f64, f64, f64, f64)> {
    let gl = GaussLegendre::new(radial);
    let mut out = Vec::with_capacity(radial * angular);
    let dt = 2.0 * PI / angular as f64;
    for (r, wr) in gl.mapped(0.0, radius) {
        for k in 0..angular {
            let t = (k as f64 + 0.5) * dt;
            out.push((r * cos(t), r * sin(t), wr * r * dt, r));
        }
    }
    out
}

/// Resolution of the pairing quadrature at a refinement level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairingGrid {
    /// Panels along the shorter side of the background rectangle.
    pub panels: usize,
    pub order: usize,
    pub patch_radial: usize,
    pub patch_angular: usize,
    /// Patch radius in background cells.
    pub patch_cells: f64,
}

impl PairingGrid {
    /// Level `k`: `4 · 2^k` panels of order 8, patches with `8 · 2^k` radial
    /// and `16 · 2^k` angular nodes.
    pub fn level(k: u32) -> Self {
        let s = 1usize << k;
        PairingGrid { panels: 4 * s, order: 8, patch_radial: 8 * s, patch_angular: 16 * s, patch_cells: 3.0 }
    }
}

/// `∫∫_{ℂ_j} G_L^{*s}(φ)(u + jv) S_L⁻¹(s, u + jv) du dv`, with smooth
/// partition-of-unity patches around the two points of `[s] ∩ ℂ_j`.
pub fn fundamental_pairing(phi: &SliceTestFunction, s: Quaternion, j: UnitImaginary, grid: &PairingGrid) -> Result<Quaternion> {
    let b = s.im_norm();
    if !(b > 0.0) {
        return Err(param_err!("the pole must be non-real"));
    }
    let [u0, u1, vmax] = phi.slice_support();
    let bounds = [u0, u1, -vmax, vmax];
    let cell = rect_cell(u1 - u0, 2.0 * vmax, grid.panels);
    let radius = (grid.patch_cells * cell).min(0.9 * b);
    let poles = [(s.x0, b), (s.x0, -b)];
    let weight = |u: f64, v: f64| -> f64 {
        poles.iter().map(|&(pu, pv)| cutoff(sqrt((u - pu) * (u - pu) + (v - pv) * (v - pv)), radius)).sum()
    };
    let integrand = |u: f64, v: f64| -> Result<Quaternion> {
        let p = j.embed(u, v);
        let a = adjoint_gl_slice(phi, p, default_step(p))?;
        if a.norm() == 0.0 {
            return Ok(Quaternion::ZERO);
        }
        Ok(a * cauchy_kernel_left_with_guard(s, p, 0.0)?.value)
    };
    let mut acc = Quaternion::ZERO;
    let rule = RectRule { bounds, panels: grid.panels, order: grid.order };
    for (u, v, w) in tensor_nodes(&rule) {
        let c = 1.0 - weight(u, v);
        if c > 0.0 {
            acc += integrand(u, v)? * (w * c);
        }
    }
    for &(pu, pv) in &poles {
        for (du, dv, w, r) in polar_patch(radius, grid.patch_radial, grid.patch_angular) {
            let (u, v) = (pu + du, pv + dv);
            if u < u0 || u > u1 || v.abs() > vmax {
                continue;
            }
            acc += integrand(u, v)? * (w * cutoff(r, radius));
        }
    }
    Ok(acc)
}

/// Limit of [`fundamental_pairing`] on the slice of `s`: `-2π |s̲|² φ(s)`.
pub fn pairing_limit(phi: &SliceTestFunction, s: Quaternion) -> Quaternion {
    -(phi.eval(s) * (2.0 * PI * s.im_norm_sqr()))
}

/// The target `2π j_s |s̲|² φ(s)` of the distributional identity
/// `G_L S_L⁻¹(s, ·) = 2π j |s̲|² δ_s`, read literally.
pub fn pairing_target_literal(phi: &SliceTestFunction, s: Quaternion) -> Quaternion {
    let j = s.imaginary_unit().unwrap_or(UnitImaginary::E1).as_quaternion();
    j * phi.eval(s) * (2.0 * PI * s.im_norm_sqr())
}

/// Resolution of the solver's area quadrature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    /// Radial panels of the polar background rule (or along the shorter side of a masked mesh).
    pub panels: usize,
    pub order: usize,
    /// Angular trapezoid nodes of the polar background rule.
    pub angular: usize,
    pub patch_radial: usize,
    pub patch_angular: usize,
    pub patch_cells: f64,
    /// Slice on which the area integral is taken.
    pub j: UnitImaginary,
    /// Step of the residual stencil; [`default_step`] when `None`.
    pub fd_step: Option<f64>,
}

impl SolveOptions {
    /// Level `k`: `4 · 2^k` radial panels of order 8 and `64 · 2^k` angles.
    pub fn level(k: u32) -> Self {
        let s = 1usize << k;
        SolveOptions {
            panels: 4 * s,
            order: 8,
            angular: 64 * s,
            patch_radial: 8 * s,
            patch_angular: 32 * s,
            patch_cells: 3.0,
            j: UnitImaginary::E1,
            fd_step: None,
        }
    }
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self::level(2)
    }
}

/// Residual of `G_L f - |q̲|² V` at one probe.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeResidual {
    pub q: Quaternion,
    pub value: Quaternion,
    pub residual: Quaternion,
}

/// Integral solution of `G_L f = |q̲|² V` on a bounded axially symmetric domain.
#[derive(Clone, Debug)]
pub struct GlobalSolveResult {
    solver: GlobalSolver,
    pub probes: Vec<ProbeResidual>,
    /// `max ‖r‖ / (sup |q̲|² · sup ‖V‖)` over the probes (absolute when `V` vanishes there).
    pub relative_residual: f64,
    pub max_residual: f64,
    /// Background quadrature nodes inside the domain.
    pub nodes: usize,
}

impl GlobalSolveResult {
    pub fn eval(&self, p: Quaternion) -> Result<Quaternion> {
        self.solver.eval(p)
    }

    pub fn solver(&self) -> &GlobalSolver {
        &self.solver
    }
}

/// Evaluator `f(p) = -(1/2π) ∫∫_{D ∩ ℂ_j} S_L⁻¹(s, p) V(s) du dv`.
#[derive(Clone, Debug)]
pub struct GlobalSolver {
    v: SliceFunction,
    domain: AxiallySymmetricDomain,
    opts: SolveOptions,
    /// Background nodes `(u, v, weight)` with `V` folded in.
    background: Arc<Vec<(f64, f64, f64, Quaternion)>>,
    cell: f64,
}

impl GlobalSolver {
    pub fn new(v: SliceFunction, domain: AxiallySymmetricDomain, opts: SolveOptions) -> Result<Self> {
        let j = opts.j;
        let (raw, cell) = background_rule(&domain, &opts)?;
        let mut background = Vec::with_capacity(raw.len());
        for (u, vv, w) in raw {
            let val = v.eval_slice(u, vv, j)?;
            background.push((u, vv, w, val));
        }
        Ok(GlobalSolver { v, domain, opts, background: Arc::new(background), cell })
    }

    pub fn node_count(&self) -> usize {
        self.background.len()
    }

    fn patch_radius(&self, p: Quaternion) -> f64 {
        let b = p.im_norm();
        let mut r = self.opts.patch_cells * self.cell;
        if b > 0.0 {
            r = r.min(0.9 * b);
        }
        if let Some(d) = boundary_gap(&self.domain, p.x0, b) {
            r = r.min(0.9 * d);
        }
        r
    }

    pub fn eval(&self, p: Quaternion) -> Result<Quaternion> {
        let j = self.opts.j;
        let b = p.im_norm();
        let radius = self.patch_radius(p);
        if !(radius > 0.0) {
            return Err(Error::Domain(alloc::format!("{p:?} lies on the boundary or outside the evaluable region")));
        }
        let poles: Vec<(f64, f64)> = if b > 0.0 { alloc::vec![(p.x0, b), (p.x0, -b)] } else { alloc::vec![(p.x0, 0.0)] };
        let weight = |u: f64, v: f64| -> f64 {
            poles.iter().map(|&(pu, pv)| cutoff(sqrt((u - pu) * (u - pu) + (v - pv) * (v - pv)), radius)).sum()
        };
        let kernel = |u: f64, v: f64| -> Result<Quaternion> { Ok(cauchy_kernel_left_with_guard(j.embed(u, v), p, 0.0)?.value) };
        let mut acc = Quaternion::ZERO;
        for &(u, v, w, val) in self.background.iter() {
            let c = 1.0 - weight(u, v);
            if c > 0.0 {
                acc += kernel(u, v)? * val * (w * c);
            }
        }
        for &(pu, pv) in &poles {
            for (du, dv, w, r) in polar_patch(radius, self.opts.patch_radial, self.opts.patch_angular) {
                let (u, v) = (pu + du, pv + dv);
                if !self.domain.contains(u, v) {
                    continue;
                }
                acc += kernel(u, v)? * self.v.eval_slice(u, v, j)? * (w * cutoff(r, radius));
            }
        }
        Ok(acc * (-0.5 / PI))
    }
}

impl QuaternionMap for GlobalSolver {
    fn value(&self, q: Quaternion) -> Result<Quaternion> {
        self.eval(q)
    }
}

/// Distance from `(u, v)` to the boundary of a ball or shell trace.
fn boundary_gap(domain: &AxiallySymmetricDomain, u: f64, v: f64) -> Option<f64> {
    match *domain {
        AxiallySymmetricDomain::Ball { center, radius } => Some(radius - sqrt((u - center) * (u - center) + v * v)),
        AxiallySymmetricDomain::Shell { center, inner, outer } => {
            let r = sqrt((u - center) * (u - center) + v * v);
            Some((outer - r).min(r - inner))
        }
        _ => None,
    }
}

/// Nodes `(u, v, weight)` covering `D ∩ ℂ_j` and the background cell size.
/// Weighted node `(u, v, w)` of a planar rule.
type Node2 = (f64, f64, f64);

fn background_rule(domain: &AxiallySymmetricDomain, opts: &SolveOptions) -> Result<(Vec<Node2>, f64)> {
    let gl = GaussLegendre::new(opts.order);
    let polar = |center: f64, inner: f64, outer: f64| {
        let rs = composite(inner, outer, opts.panels, &gl);
        let dt = 2.0 * PI / opts.angular as f64;
        let mut out = Vec::with_capacity(rs.len() * opts.angular);
        for &(r, wr) in &rs {
            for k in 0..opts.angular {
                let t = (k as f64 + 0.5) * dt;
                out.push((center + r * cos(t), r * sin(t), wr * r * dt));
            }
        }
        let cell = ((outer - inner) / opts.panels as f64).max(2.0 * PI * outer / opts.angular as f64);
        (out, cell)
    };
    match *domain {
        AxiallySymmetricDomain::Ball { center, radius } => Ok(polar(center, 0.0, radius)),
        AxiallySymmetricDomain::Shell { center, inner, outer } if outer.is_finite() => Ok(polar(center, inner, outer)),
        _ => {
            let [u0, u1, vmax] = domain
                .bbox()
                .ok_or_else(|| param_err!("the solver needs a bounded domain, got {domain:?}"))?;
            let rule = RectRule { bounds: [u0, u1, -vmax, vmax], panels: opts.panels, order: opts.order };
            let nodes: Vec<_> = tensor_nodes(&rule).into_iter().filter(|&(u, v, _)| domain.contains(u, v)).collect();
            let cell = rect_cell(u1 - u0, 2.0 * vmax, opts.panels);
            Ok((nodes, cell))
        }
    }
}

/// Probe points with `|Im q| > 0.1 L` and distance to the boundary `> 0.1 L`,
/// `L` the domain scale, spread over four slice units.
pub fn default_probes(domain: &AxiallySymmetricDomain, per_side: usize) -> Result<Vec<Quaternion>> {
    let [u0, u1, vmax] = domain.bbox().ok_or_else(|| param_err!("probes need a bounded domain"))?;
    let scale = (u1 - u0).max(vmax);
    let units = [
        UnitImaginary::E1,
        UnitImaginary::E2,
        UnitImaginary::E3,
        UnitImaginary::new(1.0, 1.0, 1.0).expect("nonzero"),
    ];
    let n = per_side.max(2);
    let mut out = Vec::new();
    for a in 0..n {
        for b in 0..n {
            let u = u0 + (u1 - u0) * (a as f64 + 0.5) / n as f64;
            let v = vmax * (b as f64 + 0.5) / n as f64;
            if v <= 0.1 * scale || !domain.contains(u, v) {
                continue;
            }
            let near_edge = [(0.1 * scale, 0.0), (-0.1 * scale, 0.0), (0.0, 0.1 * scale), (0.0, -0.1 * scale)]
                .iter()
                .any(|&(du, dv)| !domain.contains(u + du, v + dv));
            let gap_ok = boundary_gap(domain, u, v).is_none_or(|g| g > 0.1 * scale);
            if near_edge || !gap_ok {
                continue;
            }
            out.push(units[out.len() % units.len()].embed(u, v));
        }
    }
    Ok(out)
}

/// Computes the solution and its residual `G_L f - |q̲|² V` at the probes.
pub fn solve_global(
    v: &SliceFunction,
    domain: &AxiallySymmetricDomain,
    opts: &SolveOptions,
    probes: &[Quaternion],
) -> Result<GlobalSolveResult> {
    let solver = GlobalSolver::new(v.clone(), domain.clone(), *opts)?;
    let mut out = Vec::with_capacity(probes.len());
    let (mut max_res, mut sup_im, mut sup_v): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for &q in probes {
        if !domain.contains_point(q) {
            return Err(param_err!("probe {q:?} lies outside the domain"));
        }
        let gl = apply_gl(&solver, q, opts.fd_step.unwrap_or_else(|| default_step(q)))?;
        let vq = v.eval(q)?;
        let residual = gl - vq * q.im_norm_sqr();
        if !residual.is_finite() {
            return Err(Error::NonConvergence(alloc::format!("non-finite residual at {q:?}")));
        }
        max_res = max_res.max(residual.norm());
        sup_im = sup_im.max(q.im_norm_sqr());
        sup_v = sup_v.max(vq.norm());
        out.push(ProbeResidual { q, value: solver.eval(q)?, residual });
    }
    let scale = sup_im * sup_v;
    let relative = if scale > 0.0 { max_res / scale } else { max_res };
    let nodes = solver.node_count();
    Ok(GlobalSolveResult { solver, probes: out, relative_residual: relative, max_residual: max_res, nodes })
}

/// `4π ∫∫_{v > 0} (ψ₀ f₀ - ψ₁ f₁) v² du dv` over a rectangle of the upper half plane.
pub fn volume_reduction(psi: &SliceFunction, f: &SliceFunction, rule: &RectRule) -> Result<Quaternion> {
    if rule.bounds[2] < 0.0 {
        return Err(param_err!("volume reduction integrates over v >= 0"));
    }
    let mut acc = Quaternion::ZERO;
    for (u, v, w) in tensor_nodes(rule) {
        let (g0, g1) = psi.components(u, v)?;
        let (f0, f1) = f.components(u, v)?;
        acc += (g0 * f0 - g1 * f1) * (w * v * v);
    }
    Ok(acc * (4.0 * PI))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::cauchy_kernel_left;
    use crate::quaternion::{dist_sphere_point, sphere_of};
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

    fn power(n: usize) -> SliceFunction {
        let mut c = alloc::vec![Quaternion::ZERO; n + 1];
        c[n] = Quaternion::ONE;
        SliceFunction::polynomial(&c)
    }

    #[test]
    fn gl_annihilates_powers_and_lifts_conjugates() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        for _ in 0..100 {
            let q = rq(&mut rng, 1.5);
            for n in 1..=3 {
                assert!(apply_gl(&power(n), q, default_step(q)).unwrap().norm() < 1e-5);
            }
            let conj = apply_gl(&SliceFunction::conjugate(), q, default_step(q)).unwrap();
            assert!((conj - Quaternion::real(2.0 * q.im_norm_sqr())).norm() < 1e-6);
            let rp = SliceFunction::right_polynomial(&[Quaternion::ZERO, Quaternion::E1, Quaternion::new(1.0, 0.0, 2.0, 0.0)]);
            assert!(apply_gr(&rp, q, default_step(q)).unwrap().norm() < 1e-5);
            let rconj = apply_gr(&SliceFunction::conjugate(), q, default_step(q)).unwrap();
            assert!((rconj - Quaternion::real(2.0 * q.im_norm_sqr())).norm() < 1e-6);
            assert!(apply_gr(&SliceFunction::identity(), q, default_step(q)).unwrap().norm() < 1e-6);
        }
    }

    #[test]
    fn slice_reduction() {
        let f = SliceFunction::left(
            |u, v| Ok(Quaternion::new(u * v * v, 1.0, -u, 0.0)),
            |u, v| Ok(Quaternion::new(v * u, 0.0, v, v * v * v)),
        );
        let j = UnitImaginary::new(0.2, -1.0, 0.5).unwrap();
        let (u, v) = (0.4, 0.7);
        let q = j.embed(u, v);
        let h = 1e-5;
        let du = (f.eval_slice(u + h, v, j).unwrap() - f.eval_slice(u - h, v, j).unwrap()) * (0.5 / h);
        let dv = (f.eval_slice(u, v + h, j).unwrap() - f.eval_slice(u, v - h, j).unwrap()) * (0.5 / h);
        let want = (du + j.as_quaternion() * dv) * (v * v);
        assert!((apply_gl(&f, q, default_step(q)).unwrap() - want).norm() < 1e-6);
    }

    #[test]
    fn degeneracy_near_real_axis() {
        let f = |q: Quaternion| Ok(Quaternion::new(q.x1 * q.x0, q.x2 * q.x2, exp(q.x3), q.x0));
        let mut prev = f64::INFINITY;
        for k in 1..8 {
            let b = pow10(-k);
            let q = Quaternion::new(0.3, b, 0.5 * b, -b);
            let g = apply_gl(&f, q, default_step(q)).unwrap().norm();
            assert!(g <= 10.0 * q.im_norm(), "{g} at {b}");
            assert!(g <= prev);
            prev = g;
        }
    }

    fn pow10(k: i32) -> f64 {
        libm::pow(10.0, k as f64)
    }

    #[test]
    fn kernel_is_gl_null_away_from_its_pole() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let s = Quaternion::new(0.2, 0.5, -0.4, 0.3);
        let k = |p: Quaternion| Ok(cauchy_kernel_left(s, p)?.value);
        let mut checked = 0;
        while checked < 50 {
            let p = rq(&mut rng, 2.0);
            if dist_sphere_point(&sphere_of(p), s) <= 0.3 {
                continue;
            }
            assert!(apply_gl(&k, p, default_step(p)).unwrap().norm() < 1e-5);
            checked += 1;
        }
    }

    #[test]
    fn projections() {
        let g = |u: f64, v: f64| Quaternion::new(u + v, v * v, v * v * v, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..100 {
            let (u, v) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let sum = p_plus(g, u, v) + p_minus(g, u, v);
            assert!((sum - g(u, v)).norm() <= 1e-14 * g(u, v).norm().max(1.0));
            let pp = p_plus(|a, b| p_plus(g, a, b), u, v);
            assert!((pp - p_plus(g, u, v)).norm() <= 1e-14);
            let mm = p_minus(|a, b| p_minus(g, a, b), u, v);
            assert!((mm - p_minus(g, u, v)).norm() <= 1e-14);
            assert!(p_plus(|a, b| p_minus(g, a, b), u, v).norm() <= 1e-14);
        }
        assert_eq!(p_minus(|_, v| Quaternion::real(v * v), 0.3, 0.8), Quaternion::ZERO);
        assert_eq!(p_plus(|_, v| Quaternion::real(v), 0.3, 0.8), Quaternion::ZERO);
    }

    #[test]
    fn lifted_test_functions() {
        let even = SliceTestFunction::lift_t(|u: f64, v: f64| Quaternion::real((u * u + v * v) * cutoff(sqrt(u * u + v * v), 1.0)), [-1.0, 1.0, -1.0, 1.0]).unwrap();
        let q = Quaternion::new(0.1, 0.2, 0.1, -0.3);
        assert_eq!(even.eval(q).im(), Quaternion::ZERO);
        let phi = SliceTestFunction::bump([0.3, 0.5], 0.4, Quaternion::new(1.0, 2.0, 0.0, -1.0)).unwrap();
        let (a, b) = phi.components(0.35, 0.4);
        let (am, bm) = phi.components(0.35, -0.4);
        assert!((a - am).norm() < 1e-15 && (b + bm).norm() < 1e-15);
        let g = |u: f64, v: f64| {
            let (du, dv) = (u - 0.3, v - 0.5);
            let r2 = (du * du + dv * dv) / 0.16;
            if r2 >= 1.0 { Quaternion::ZERO } else { Quaternion::new(1.0, 2.0, 0.0, -1.0) * exp(1.0 - 1.0 / (1.0 - r2)) }
        };
        assert!((a - p_plus(g, 0.35, 0.4)).norm() < 1e-15);
        assert!((b - p_minus(g, 0.35, 0.4)).norm() < 1e-15);
        let f = phi.as_slice_function();
        assert!((f.eval(q).unwrap() - phi.eval(q)).norm() < 1e-15);
        assert!(SliceTestFunction::bump([0.0, 0.0], -1.0, Quaternion::ONE).is_err());
    }

    #[test]
    fn adjoint_variants() {
        let c = Quaternion::new(1.0, -2.0, 0.5, 3.0);
        let konst = |_q: Quaternion| Ok(c);
        let q = Quaternion::new(0.3, 0.4, -0.2, 0.9);
        let a = adjoint_gl_slice(&konst, q, 1e-5).unwrap();
        assert!((a + c * q.im() * 2.0).norm() < 1e-9);
        let phi = SliceTestFunction::bump([0.1, 0.6], 0.5, Quaternion::new(0.0, 1.0, 1.0, 0.0)).unwrap();
        let diff = adjoint_gl_slice(&phi, q, 1e-5).unwrap() - adjoint_gl_global(&phi, q, 1e-5).unwrap();
        assert!((diff - phi.eval(q) * q.im() * 2.0).norm() < 1e-12);
    }

    #[test]
    fn integration_by_parts_on_a_slice() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..5 {
            let phi = SliceTestFunction::bump([rng.gen_range(-0.2..0.2), rng.gen_range(0.3..0.7)], 0.6, rq(&mut rng, 1.0)).unwrap();
            let psi = SliceFunction::polynomial(&[rq(&mut rng, 1.0), rq(&mut rng, 1.0), rq(&mut rng, 1.0)]);
            let psi = crate::slicefunc::star_left(&psi, &SliceFunction::conjugate()).unwrap();
            let j = UnitImaginary::new(rng.gen_range(-1.0..1.0), 1.0, rng.gen_range(-1.0..1.0)).unwrap();
            let rule = RectRule { bounds: [-1.0, 1.0, -1.4, 1.4], panels: 48, order: 8 };
            let lhs = slice_pairing(|p| adjoint_gl_slice(&phi, p, default_step(p)), |p| psi.eval(p), j, &rule).unwrap();
            let rhs = slice_pairing(|p| Ok(phi.eval(p)), |p| apply_gl(&psi, p, default_step(p)), j, &rule).unwrap();
            let scale = lhs.norm().max(rhs.norm()).max(1e-3);
            assert!((lhs - rhs).norm() < 1e-4 * scale, "{lhs:?} {rhs:?}");
        }
    }

    #[test]
    fn pairing_vanishes_away_from_the_pole_and_is_linear() {
        let s = Quaternion::new(0.0, 0.0, 0.8, 0.0);
        let far = SliceTestFunction::bump([1.5, 1.0], 0.3, Quaternion::new(1.0, 0.5, 0.0, 0.0)).unwrap();
        let v = fundamental_pairing(&far, s, UnitImaginary::E2, &PairingGrid::level(1)).unwrap();
        assert!(v.norm() < 1e-6, "{v:?}");
        let phi = SliceTestFunction::gaussian([0.0, 0.8], 0.2, 0.6, Quaternion::ONE).unwrap();
        let a = Quaternion::real(-2.5);
        let g = PairingGrid::level(1);
        let base = fundamental_pairing(&phi, s, UnitImaginary::E2, &g).unwrap();
        let scaled = fundamental_pairing(&phi.scaled(a), s, UnitImaginary::E2, &g).unwrap();
        assert!((scaled - a * base).norm() < 1e-10 * scaled.norm().max(1.0));
    }

    #[test]
    fn pairing_converges_to_the_derived_limit() {
        let s = Quaternion::new(0.1, 0.0, 0.7, 0.0);
        let phi = SliceTestFunction::gaussian([0.1, 0.7], 0.2, 0.6, Quaternion::new(1.0, 0.3, 0.0, -0.2)).unwrap();
        let target = pairing_limit(&phi, s);
        let v = fundamental_pairing(&phi, s, UnitImaginary::E2, &PairingGrid::level(2)).unwrap();
        assert!((v - target).norm() < 1e-3 * target.norm(), "{v:?} vs {target:?}");
    }

    #[test]
    fn solver_basics() {
        let ball = AxiallySymmetricDomain::ball(0.0, 1.0).unwrap();
        let probes = default_probes(&ball, 6).unwrap();
        assert!(!probes.is_empty());
        for q in &probes {
            assert!(q.im_norm() > 0.1 && q.norm() < 0.9);
        }
        let zero = SliceFunction::constant(Quaternion::ZERO);
        let r = solve_global(&zero, &ball, &SolveOptions::level(0), &probes).unwrap();
        assert!(r.max_residual < 1e-12);
        assert!(r.probes.iter().all(|p| p.value.norm() == 0.0));
    }

    #[test]
    fn solver_for_constant_data() {
        let ball = AxiallySymmetricDomain::ball(0.0, 1.0).unwrap();
        let probes = default_probes(&ball, 4).unwrap();
        let one = SliceFunction::constant(Quaternion::ONE);
        let r = solve_global(&one, &ball, &SolveOptions::level(1), &probes).unwrap();
        assert!(r.relative_residual < 1e-2, "{}", r.relative_residual);
        for pr in &r.probes {
            let q = pr.q;
            let g = |p: Quaternion| Ok(r.eval(p)? - p.conj() * 0.5);
            assert!(apply_gl(&g, q, default_step(q)).unwrap().norm() < 1e-2);
        }
        let other = SolveOptions { j: UnitImaginary::E3, ..SolveOptions::level(1) };
        let s2 = GlobalSolver::new(one, ball, other).unwrap();
        let q = probes[0];
        assert!((s2.eval(q).unwrap() - r.eval(q).unwrap()).norm() < 1e-6);
    }

    #[test]
    fn volume_reduction_against_monte_carlo() {
        let psi = SliceFunction::intrinsic(|z| z * z + 1.0);
        let f = SliceFunction::intrinsic(|z| (z * 0.5).exp());
        let rule = RectRule { bounds: [-1.0, 1.0, 0.0, 1.0], panels: 8, order: 8 };
        // restrict to the unit ball via the integrand
        let ball_psi = SliceFunction::left(
            move |u, v| Ok(if u * u + v * v < 1.0 { psi.components(u, v)?.0 } else { Quaternion::ZERO }),
            {
                let psi = SliceFunction::intrinsic(|z| z * z + 1.0);
                move |u, v| Ok(if u * u + v * v < 1.0 { psi.components(u, v)?.1 } else { Quaternion::ZERO })
            },
        );
        let reduced = volume_reduction(&ball_psi, &f, &rule).unwrap();
        let psi = SliceFunction::intrinsic(|z| z * z + 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let n = 400_000;
        let mut acc = Quaternion::ZERO;
        for _ in 0..n {
            let q = rq(&mut rng, 1.0);
            if q.norm() < 1.0 {
                acc += psi.eval(q).unwrap() * f.eval(q).unwrap();
            }
        }
        let mc = acc * (16.0 / n as f64);
        assert!((mc - reduced).norm() < 0.01 * reduced.norm(), "{mc:?} vs {reduced:?}");
    }
}
