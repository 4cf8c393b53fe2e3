//! Piecewise-C¹ contours inside one slice plane `ℂ_j` and line integrals
//! against the slice measure `ds_j = -j ds`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{atan2, cos, fabs, sin, sqrt};

use crate::error::{param_err, Result};
use crate::quadrature::{Adaptive, GaussLegendre, QuadOptions};
use crate::quaternion::{Quaternion, UnitImaginary};

/// Angular slack allowed at corners before a tangent reversal is rejected.
pub const CORNER_ANGLE_TOL: f64 = 1e-9;

/// Geometry of one C¹ arc in the `(x, y)` coordinates of a slice plane.
#[derive(Clone, Debug, PartialEq)]
pub enum ArcShape {
    /// Straight segment, parameter `t ∈ [0, 1]`.
    Segment { from: [f64; 2], to: [f64; 2] },
    /// Circular arc, parameter is the angle from `start` to `end`.
    Circular { center: [f64; 2], radius: f64, start: f64, end: f64 },
    /// Axis-aligned elliptic arc, parameter is the eccentric angle.
    Elliptic { center: [f64; 2], semi_x: f64, semi_y: f64, start: f64, end: f64 },
}

impl ArcShape {
    fn range(&self) -> (f64, f64) {
        match *self {
            ArcShape::Segment { .. } => (0.0, 1.0),
            ArcShape::Circular { start, end, .. } | ArcShape::Elliptic { start, end, .. } => (start, end),
        }
    }

    fn position(&self, t: f64) -> [f64; 2] {
        match *self {
            ArcShape::Segment { from, to } => [from[0] + t * (to[0] - from[0]), from[1] + t * (to[1] - from[1])],
            ArcShape::Circular { center, radius, .. } => [center[0] + radius * cos(t), center[1] + radius * sin(t)],
            ArcShape::Elliptic { center, semi_x, semi_y, .. } => {
                [center[0] + semi_x * cos(t), center[1] + semi_y * sin(t)]
            }
        }
    }

    fn derivative(&self, t: f64) -> [f64; 2] {
        match *self {
            ArcShape::Segment { from, to } => [to[0] - from[0], to[1] - from[1]],
            ArcShape::Circular { radius, .. } => [-radius * sin(t), radius * cos(t)],
            ArcShape::Elliptic { semi_x, semi_y, .. } => [-semi_x * sin(t), semi_y * cos(t)],
        }
    }

    fn reversed(&self) -> ArcShape {
        match *self {
            ArcShape::Segment { from, to } => ArcShape::Segment { from: to, to: from },
            ArcShape::Circular { center, radius, start, end } => {
                ArcShape::Circular { center, radius, start: end, end: start }
            }
            ArcShape::Elliptic { center, semi_x, semi_y, start, end } => {
                ArcShape::Elliptic { center, semi_x, semi_y, start: end, end: start }
            }
        }
    }
}

/// An arc together with the number of initial quadrature panels on it.
#[derive(Clone, Debug, PartialEq)]
pub struct ContourArc {
    pub shape: ArcShape,
    pub panels: usize,
}

impl ContourArc {
    pub fn new(shape: ArcShape, panels: usize) -> Self {
        ContourArc { shape, panels }
    }

    /// Length of the parameter interval; arcs are traversed in local
    /// coordinate `σ ∈ [0, span]`.
    fn span(&self) -> f64 {
        let (a, b) = self.shape.range();
        fabs(b - a)
    }

    fn local(&self, sigma: f64) -> ([f64; 2], [f64; 2]) {
        let (a, b) = self.shape.range();
        let sign = if b >= a { 1.0 } else { -1.0 };
        let t = a + sign * sigma;
        let d = self.shape.derivative(t);
        (self.shape.position(t), [sign * d[0], sign * d[1]])
    }
}

/// A connected piecewise-C¹ contour: consecutive arcs joined end to start.
#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    arcs: Vec<ContourArc>,
    closed: bool,
    offsets: Vec<f64>,
}

impl Component {
    pub fn new(arcs: Vec<ContourArc>, closed: bool) -> Self {
        let mut offsets = Vec::with_capacity(arcs.len());
        let mut acc = 0.0;
        for arc in &arcs {
            offsets.push(acc);
            acc += arc.span();
        }
        Component { arcs, closed, offsets }
    }

    pub fn arcs(&self) -> &[ContourArc] {
        &self.arcs
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Total parameter length of the component.
    pub fn parameter_span(&self) -> f64 {
        self.offsets.last().copied().unwrap_or(0.0) + self.arcs.last().map_or(0.0, ContourArc::span)
    }

    fn reversed(&self) -> Component {
        let arcs = self
            .arcs
            .iter()
            .rev()
            .map(|a| ContourArc { shape: a.shape.reversed(), panels: a.panels })
            .collect();
        Component::new(arcs, self.closed)
    }
}

/// A point on a contour with its slice measure.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContourPoint {
    /// Position `x + j y`.
    pub s: Quaternion,
    /// Derivative of the position with respect to the traversal parameter.
    pub tangent: Quaternion,
    /// `-j · tangent`, the slice measure per unit parameter.
    pub ds: Quaternion,
    pub component: usize,
    /// Parameter along the component, cumulative over its arcs.
    pub param: f64,
}

/// Oriented contour inside the slice plane `ℂ_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct Contour {
    j: UnitImaginary,
    components: Vec<Component>,
}

impl Contour {
    /// Validates tangents, joints, closedness and simplicity of the arcs.
    pub fn new(j: UnitImaginary, components: Vec<Component>) -> Result<Self> {
        let c = Contour { j, components };
        c.validate()?;
        Ok(c)
    }

    /// Positively oriented circle `|z - center| = radius` in `ℂ_j`, split into `panels` panels.
    pub fn circle(center: [f64; 2], radius: f64, j: UnitImaginary, panels: usize) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(param_err!("circle radius must be positive and finite, got {radius}"));
        }
        if panels < 8 {
            return Err(param_err!("circle needs at least 8 panels, got {panels}"));
        }
        let arc = ContourArc::new(ArcShape::Circular { center, radius, start: 0.0, end: 2.0 * PI }, panels);
        Contour::new(j, alloc::vec![Component::new(alloc::vec![arc], true)])
    }

    pub fn ellipse(center: [f64; 2], semi_x: f64, semi_y: f64, j: UnitImaginary, panels: usize) -> Result<Self> {
        if !(semi_x > 0.0 && semi_y > 0.0) {
            return Err(param_err!("ellipse semi-axes must be positive, got {semi_x}, {semi_y}"));
        }
        let arc = ContourArc::new(
            ArcShape::Elliptic { center, semi_x, semi_y, start: 0.0, end: 2.0 * PI },
            panels.max(1),
        );
        Contour::new(j, alloc::vec![Component::new(alloc::vec![arc], true)])
    }

    /// Closed polygon through `vertices` in order.
    pub fn polygon(vertices: &[[f64; 2]], j: UnitImaginary, panels_per_edge: usize) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(param_err!("polygon needs at least 3 vertices"));
        }
        let n = vertices.len();
        let arcs = (0..n)
            .map(|k| {
                ContourArc::new(
                    ArcShape::Segment { from: vertices[k], to: vertices[(k + 1) % n] },
                    panels_per_edge.max(1),
                )
            })
            .collect();
        Contour::new(j, alloc::vec![Component::new(arcs, true)])
    }

    /// Open straight segment.
    pub fn segment(from: [f64; 2], to: [f64; 2], j: UnitImaginary, panels: usize) -> Result<Self> {
        let arc = ContourArc::new(ArcShape::Segment { from, to }, panels.max(1));
        Contour::new(j, alloc::vec![Component::new(alloc::vec![arc], false)])
    }

    pub fn j(&self) -> UnitImaginary {
        self.j
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn is_closed(&self) -> bool {
        self.components.iter().all(Component::is_closed)
    }

    /// Same curve in another slice plane.
    pub fn with_slice(&self, j: UnitImaginary) -> Contour {
        Contour { j, components: self.components.clone() }
    }

    /// The same point set with every component traversed backwards.
    pub fn reversed(&self) -> Contour {
        Contour { j: self.j, components: self.components.iter().map(Component::reversed).collect() }
    }

    /// Disjoint union of two contours on the same slice.
    pub fn union(&self, other: &Contour) -> Result<Contour> {
        if (self.j.as_quaternion() - other.j.as_quaternion()).norm() > 1e-12 {
            return Err(param_err!("contour union needs a common slice unit"));
        }
        let mut components = self.components.clone();
        components.extend(other.components.iter().cloned());
        Contour::new(self.j, components)
    }

    fn embed(&self, p: [f64; 2]) -> Quaternion {
        self.j.embed(p[0], p[1])
    }

    fn point(&self, component: usize, arc: usize, sigma: f64) -> ContourPoint {
        let comp = &self.components[component];
        let (pos, der) = comp.arcs[arc].local(sigma);
        let tangent = self.embed(der);
        let ds = -(self.j.as_quaternion() * tangent);
        ContourPoint { s: self.embed(pos), tangent, ds, component, param: comp.offsets[arc] + sigma }
    }

    /// Point at cumulative parameter `param` of a component; closed components wrap.
    pub fn point_at(&self, component: usize, param: f64) -> Result<ContourPoint> {
        let comp = self
            .components
            .get(component)
            .ok_or_else(|| param_err!("contour has no component {component}"))?;
        let total = comp.parameter_span();
        let mut tau = param;
        if comp.closed {
            tau -= total * libm::floor(tau / total);
        } else if !(0.0..=total).contains(&tau) {
            return Err(param_err!("parameter {param} outside [0, {total}]"));
        }
        let mut idx = comp.arcs.len() - 1;
        for (k, off) in comp.offsets.iter().enumerate() {
            if tau < off + comp.arcs[k].span() {
                idx = k;
                break;
            }
        }
        let sigma = (tau - comp.offsets[idx]).clamp(0.0, comp.arcs[idx].span());
        Ok(self.point(component, idx, sigma))
    }

    /// `n` points per arc, uniform in the arc parameter; closed arcs omit the
    /// shared end point.
    pub fn sample(&self, n_per_arc: usize) -> Vec<ContourPoint> {
        let n = n_per_arc.max(2);
        let mut out = Vec::new();
        for (ci, comp) in self.components.iter().enumerate() {
            let last = comp.arcs.len() - 1;
            for (ai, arc) in comp.arcs.iter().enumerate() {
                let include_end = !comp.closed && ai == last;
                let count = if include_end { n + 1 } else { n };
                for i in 0..count {
                    let sigma = arc.span() * i as f64 / n as f64;
                    out.push(self.point(ci, ai, sigma));
                }
            }
        }
        out
    }

    /// Adaptive integral of `f` over the traversal parameter of every arc.
    ///
    /// The integrand receives the full contour point, so measure placement
    /// (`ds` to the left or right of other factors) is the caller's choice.
    pub fn integrate<F>(&self, mut f: F, opts: &QuadOptions) -> Result<Quaternion>
    where
        F: FnMut(&ContourPoint) -> Result<Quaternion>,
    {
        let ad = Adaptive::new(*opts);
        let mut total = Quaternion::ZERO;
        for (ci, comp) in self.components.iter().enumerate() {
            for (ai, arc) in comp.arcs.iter().enumerate() {
                let panels = arc.panels.max(1);
                let h = arc.span() / panels as f64;
                for k in 0..panels {
                    let (a, b) = (k as f64 * h, (k + 1) as f64 * h);
                    let mut g = |sigma: f64| f(&self.point(ci, ai, sigma));
                    let part: Quaternion = ad.integrate(a, b, &mut g)?;
                    total += part;
                }
            }
        }
        Ok(total)
    }

    /// Composite Gauss–Legendre of fixed `order` with `panels` panels per
    /// initial panel; no error control.
    pub fn integrate_fixed<F>(&self, mut f: F, order: usize, panels: usize) -> Result<Quaternion>
    where
        F: FnMut(&ContourPoint) -> Result<Quaternion>,
    {
        let gl = GaussLegendre::new(order);
        let mut total = Quaternion::ZERO;
        for (ci, comp) in self.components.iter().enumerate() {
            for (ai, arc) in comp.arcs.iter().enumerate() {
                let m = arc.panels.max(1) * panels.max(1);
                let h = arc.span() / m as f64;
                for k in 0..m {
                    let part: Quaternion =
                        gl.integrate(k as f64 * h, (k + 1) as f64 * h, |sigma| f(&self.point(ci, ai, sigma)))?;
                    total += part;
                }
            }
        }
        Ok(total)
    }

    /// `Σ ∫ |γ'|`.
    pub fn length(&self) -> f64 {
        let ad = Adaptive::new(QuadOptions::default());
        let mut total = 0.0;
        for (ci, comp) in self.components.iter().enumerate() {
            for (ai, arc) in comp.arcs.iter().enumerate() {
                let panels = arc.panels.max(1);
                let h = arc.span() / panels as f64;
                for k in 0..panels {
                    let mut g = |sigma: f64| Ok(self.point(ci, ai, sigma).tangent.norm());
                    let part: f64 = ad
                        .integrate(k as f64 * h, (k + 1) as f64 * h, &mut g)
                        .expect("arc speed is smooth and finite");
                    total += part;
                }
            }
        }
        total
    }

    /// Winding number of the contour around the slice representative
    /// `Re p + j |Im p|` of `p`.
    pub fn winding_number(&self, p: Quaternion) -> Result<f64> {
        let pj = self.j.embed(p.x0, p.im_norm());
        let opts = QuadOptions { abs_tol: 1e-10, rel_tol: 1e-10, max_depth: 30 };
        let w = self.integrate(|pt| Ok((pt.s - pj).inverse()? * pt.ds), &opts)?;
        Ok(w.x0 / (2.0 * PI))
    }

    /// Minimum of `dist` over the contour: dense sampling followed by
    /// golden-section refinement around the best samples of each arc.
    pub fn distance_to<D: Fn(Quaternion) -> f64>(&self, dist: D) -> f64 {
        let mut best = f64::INFINITY;
        for (ci, comp) in self.components.iter().enumerate() {
            for (ai, arc) in comp.arcs.iter().enumerate() {
                let n = (64 * arc.panels).clamp(256, 4096);
                let span = arc.span();
                let h = span / n as f64;
                let vals: Vec<f64> = (0..=n).map(|i| dist(self.point(ci, ai, i as f64 * h).s)).collect();
                let mut order: Vec<usize> = (0..=n).collect();
                order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
                for &i in order.iter().take(4) {
                    best = best.min(vals[i]);
                    let lo = (i as f64 - 1.0).max(0.0) * h;
                    let hi = ((i + 1) as f64 * h).min(span);
                    let refined = golden_min(|sig| dist(self.point(ci, ai, sig).s), lo, hi);
                    best = best.min(refined);
                }
            }
        }
        best
    }

    fn validate(&self) -> Result<()> {
        if self.components.is_empty() {
            return Err(param_err!("contour has no components"));
        }
        let mut scale: f64 = 1.0;
        for comp in &self.components {
            if comp.arcs.is_empty() {
                return Err(param_err!("contour component has no arcs"));
            }
            for arc in &comp.arcs {
                if !(arc.span() > 0.0) || !arc.span().is_finite() {
                    return Err(param_err!("arc with empty or non-finite parameter range"));
                }
                for i in 0..=32 {
                    let (pos, der) = arc.local(arc.span() * i as f64 / 32.0);
                    if !(pos[0].is_finite() && pos[1].is_finite()) {
                        return Err(param_err!("arc position is not finite"));
                    }
                    scale = scale.max(fabs(pos[0])).max(fabs(pos[1]));
                    if !(sqrt(der[0] * der[0] + der[1] * der[1]) > 0.0) {
                        return Err(param_err!("arc tangent vanishes"));
                    }
                }
            }
        }
        let gap_tol = 1e-9 * scale;
        for comp in &self.components {
            let n = comp.arcs.len();
            let joints = if comp.closed { n } else { n - 1 };
            for k in 0..joints {
                let a = &comp.arcs[k];
                let b = &comp.arcs[(k + 1) % n];
                let (end, t_out) = a.local(a.span());
                let (start, t_in) = b.local(0.0);
                if dist2(end, start) > gap_tol {
                    return Err(if comp.closed && k == n - 1 {
                        param_err!("closed component does not return to its start point")
                    } else {
                        param_err!("consecutive arcs are not joined")
                    });
                }
                // tangent ratio must stay off the negative real axis
                let ang = atan2(t_out[0] * t_in[1] - t_out[1] * t_in[0], t_out[0] * t_in[0] + t_out[1] * t_in[1]);
                if fabs(ang) > PI - CORNER_ANGLE_TOL {
                    return Err(param_err!("corner with reversed tangent (cusp) at joint {k}"));
                }
            }
            if !comp.closed {
                let (first, _) = comp.arcs[0].local(0.0);
                let last = &comp.arcs[n - 1];
                let (end, _) = last.local(last.span());
                if dist2(first, end) <= gap_tol {
                    return Err(param_err!("open component ends at its start point; mark it closed"));
                }
            }
        }
        self.check_simple()
    }

    /// Sampled check that arcs are simple and components pairwise disjoint.
    fn check_simple(&self) -> Result<()> {
        const PER_ARC: usize = 48;
        // polyline per component with a flag marking segment adjacency wrap
        let mut polylines: Vec<(Vec<[f64; 2]>, bool)> = Vec::new();
        for comp in &self.components {
            let mut pts = Vec::new();
            for arc in &comp.arcs {
                for i in 0..PER_ARC {
                    pts.push(arc.local(arc.span() * i as f64 / PER_ARC as f64).0);
                }
            }
            let last = comp.arcs.last().expect("nonempty");
            pts.push(last.local(last.span()).0);
            polylines.push((pts, comp.closed));
        }
        for (ci, (pa, closed_a)) in polylines.iter().enumerate() {
            for (cj, (pb, _)) in polylines.iter().enumerate().skip(ci) {
                let na = pa.len() - 1;
                let nb = pb.len() - 1;
                for i in 0..na {
                    let start_j = if ci == cj { i + 2 } else { 0 };
                    for k in start_j..nb {
                        if ci == cj && *closed_a && i == 0 && k == na - 1 {
                            continue;
                        }
                        if segments_cross(pa[i], pa[i + 1], pb[k], pb[k + 1]) {
                            return Err(param_err!("contour is not simple: sampled segments intersect"));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (a[0] - b[0], a[1] - b[1]);
    sqrt(dx * dx + dy * dy)
}

fn segments_cross(p1: [f64; 2], p2: [f64; 2], q1: [f64; 2], q2: [f64; 2]) -> bool {
    let orient = |a: [f64; 2], b: [f64; 2], c: [f64; 2]| (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    let within = |a: [f64; 2], b: [f64; 2], c: [f64; 2]| {
        c[0] >= a[0].min(b[0]) && c[0] <= a[0].max(b[0]) && c[1] >= a[1].min(b[1]) && c[1] <= a[1].max(b[1])
    };
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && within(q1, q2, p1))
        || (d2 == 0.0 && within(q1, q2, p2))
        || (d3 == 0.0 && within(p1, p2, q1))
        || (d4 == 0.0 && within(p1, p2, q2))
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_895;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        if fabs(b - a) < 1e-15 * (1.0 + fabs(a)) {
            break;
        }
    }
    fc.min(fd).min(f(a)).min(f(b))
}

/// `∫_Γ g(s) ds_j` with the measure to the right of `g`.
pub fn integrate_ds_j<G>(mut g: G, contour: &Contour, opts: &QuadOptions) -> Result<Quaternion>
where
    G: FnMut(Quaternion) -> Result<Quaternion>,
{
    contour.integrate(|pt| Ok(g(pt.s)? * pt.ds), opts)
}

pub fn length(contour: &Contour) -> f64 {
    contour.length()
}

/// `(‖∫ g ds_j‖, |Γ| · max ‖g‖)`, the maximum taken over 1024 samples per arc
/// plus the quadrature's own evaluation points.
pub fn ml_bound_check<G>(mut g: G, contour: &Contour, opts: &QuadOptions) -> Result<(f64, f64)>
where
    G: FnMut(Quaternion) -> Result<Quaternion>,
{
    let mut gmax: f64 = 0.0;
    let integral = contour.integrate(
        |pt| {
            let v = g(pt.s)?;
            gmax = gmax.max(v.norm());
            Ok(v * pt.ds)
        },
        opts,
    )?;
    for pt in contour.sample(1024) {
        gmax = gmax.max(g(pt.s)?.norm());
    }
    Ok((integral.norm(), contour.length() * gmax))
}
