//! Gauss–Legendre rules and a dyadic adaptive integrator keyed on the
//! disagreement between orders 16 and 32.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::{Add, Mul, Sub};

use libm::{cos, fabs};

use crate::error::{Error, Result};
use crate::quaternion::Quaternion;

/// Values the integrators can accumulate.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        fabs(*self)
    }
}

impl QuadValue for Quaternion {
    fn zero() -> Self {
        Quaternion::ZERO
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Nodes and weights on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on `P_n` from the Chebyshev-like initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre order must be positive");
        let mut nodes = alloc::vec![0.0; n];
        let mut weights = alloc::vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if fabs(dx) < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `(x, w)` mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes.iter().zip(&self.weights).map(move |(&x, &w)| (mid + half * x, w * half))
    }

    pub fn integrate<V, F>(&self, a: f64, b: f64, mut f: F) -> Result<V>
    where
        V: QuadValue,
        F: FnMut(f64) -> Result<V>,
    {
        let mut acc = V::zero();
        for (x, w) in self.mapped(a, b) {
            acc = acc + f(x)? * w;
        }
        Ok(acc)
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Tolerances of the adaptive scheme.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Number of dyadic halvings allowed below an initial panel.
    pub max_depth: u32,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { abs_tol: 1e-13, rel_tol: 1e-12, max_depth: 20 }
    }
}

impl QuadOptions {
    pub fn with_tol(tol: f64) -> Self {
        QuadOptions { abs_tol: tol, rel_tol: tol, ..Default::default() }
    }
}

/// Pair of rules used by [`Adaptive`].
#[derive(Clone, Debug)]
pub struct Adaptive {
    low: GaussLegendre,
    high: GaussLegendre,
    opts: QuadOptions,
}

impl Adaptive {
    pub fn new(opts: QuadOptions) -> Self {
        Adaptive { low: GaussLegendre::new(16), high: GaussLegendre::new(32), opts }
    }

    pub fn options(&self) -> &QuadOptions {
        &self.opts
    }

    /// Integrates over `[a, b]`, bisecting until orders 16 and 32 agree.
    /// Partial results are summed in parameter order.
    pub fn integrate<V, F>(&self, a: f64, b: f64, f: &mut F) -> Result<V>
    where
        V: QuadValue,
        F: FnMut(f64) -> Result<V>,
    {
        self.recurse(a, b, 0, f)
    }

    fn recurse<V, F>(&self, a: f64, b: f64, depth: u32, f: &mut F) -> Result<V>
    where
        V: QuadValue,
        F: FnMut(f64) -> Result<V>,
    {
        let lo: V = self.low.integrate(a, b, &mut *f)?;
        let hi: V = self.high.integrate(a, b, &mut *f)?;
        let diff = (hi - lo).magnitude();
        let tol = self.opts.abs_tol.max(self.opts.rel_tol * hi.magnitude());
        if !diff.is_finite() || !hi.magnitude().is_finite() {
            return Err(Error::NonConvergence(format!("non-finite integrand on [{a}, {b}]")));
        }
        if diff <= tol {
            return Ok(hi);
        }
        if depth >= self.opts.max_depth {
            return Err(Error::NonConvergence(format!(
                "adaptive quadrature reached depth {depth} on [{a}, {b}] with estimate gap {diff:e}"
            )));
        }
        let mid = 0.5 * (a + b);
        let left = self.recurse(a, mid, depth + 1, f)?;
        let right = self.recurse(mid, b, depth + 1, f)?;
        Ok(left + right)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use libm::{exp, sin};

    #[test]
    fn rules_integrate_polynomials_exactly() {
        for n in [1usize, 2, 5, 16, 32] {
            let gl = GaussLegendre::new(n);
            let sum_w: f64 = gl.weights().iter().sum();
            assert!((sum_w - 2.0).abs() < 1e-14, "order {n}");
            let deg = 2 * n - 1;
            let exact = if deg % 2 == 0 { 2.0 / (deg as f64 + 1.0) } else { 0.0 };
            let got: f64 = gl.integrate(-1.0, 1.0, |x| Ok(libm::pow(x, deg as f64))).unwrap();
            assert!((got - exact).abs() < 1e-13, "order {n}: {got}");
            let even = 2 * (n - 1);
            let got: f64 = gl.integrate(0.0, 1.0, |x| Ok(libm::pow(x, even as f64))).unwrap();
            assert!((got - 1.0 / (even as f64 + 1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn adaptive_handles_peaks() {
        let ad = Adaptive::new(QuadOptions::default());
        let eps = 1e-4;
        let mut f = |x: f64| Ok(eps / (x * x + eps * eps));
        let got: f64 = ad.integrate(-1.0, 1.0, &mut f).unwrap();
        let exact = 2.0 * libm::atan(1.0 / eps);
        assert!((got - exact).abs() < 1e-10, "{got} vs {exact}");
        let mut g = |x: f64| Ok(exp(x) * sin(3.0 * x));
        let got: f64 = ad.integrate(0.0, 2.0, &mut g).unwrap();
        let exact = (exp(2.0) * (sin(6.0) - 3.0 * libm::cos(6.0)) + 3.0) / 10.0;
        assert!((got - exact).abs() < 1e-13);
    }

    #[test]
    fn adaptive_reports_non_convergence() {
        let ad = Adaptive::new(QuadOptions { max_depth: 3, ..Default::default() });
        let mut f = |x: f64| Ok(1.0 / libm::sqrt(fabs(x - 0.3)));
        let r: Result<f64> = ad.integrate(0.0, 1.0, &mut f);
        assert!(matches!(r, Err(Error::NonConvergence(_))));
    }
}
