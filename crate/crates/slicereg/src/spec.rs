//! JSON job specifications and their conversion into library objects.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use slicereg_core::contour::{ArcShape, Component, Contour, ContourArc};
use slicereg_core::globalop::SliceTestFunction;
use slicereg_core::slicefunc::{AxiallySymmetricDomain, SliceFunction, Tabulated};
use slicereg_core::transform::BoundaryData;
use slicereg_core::{Quaternion, UnitImaginary};

use crate::error::{invalid, CliResult};

pub type Q4 = [f64; 4];

pub fn quat(a: Q4) -> Quaternion {
    Quaternion::from_array(a)
}

pub fn unit(a: Q4) -> CliResult<UnitImaginary> {
    if a[0] != 0.0 {
        return invalid(format!("slice unit {a:?} must have zero real part"));
    }
    Ok(UnitImaginary::new(a[1], a[2], a[3])?)
}

/// Slice units addressed by `j_index` in probe lists and residual output.
pub fn slice_units() -> [UnitImaginary; 4] {
    [
        UnitImaginary::E1,
        UnitImaginary::E2,
        UnitImaginary::E3,
        UnitImaginary::new(1.0, 1.0, 1.0).expect("nonzero"),
    ]
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobSpec {
    /// Optional; must match the subcommand when present.
    pub command: Option<String>,
    pub function: Option<FunctionSpec>,
    pub contour: Option<ContourSpec>,
    pub domain: Option<DomainSpec>,
    pub points: Option<PointSet>,
    #[serde(default)]
    pub tolerance: ToleranceSpec,
    pub output: Option<String>,
    pub seed: Option<u64>,
    /// Kernel pole or pairing point.
    pub s: Option<Q4>,
    /// Expansion center.
    pub center: Option<Q4>,
    pub alpha: Option<f64>,
    pub samples: Option<usize>,
    pub component: Option<usize>,
    pub param: Option<f64>,
    pub distances: Option<Vec<f64>>,
    pub rho: Option<f64>,
    pub n_min: Option<i64>,
    pub n_max: Option<i64>,
    pub classify: Option<bool>,
    pub test_function: Option<TestFunctionSpec>,
    /// Slice unit `[0, j1, j2, j3]` for area integrals.
    pub slice: Option<Q4>,
    pub probes: Option<ProbeSet>,
    pub levels: Option<u32>,
    pub level: Option<u32>,
    pub ladder: Option<LadderKind>,
    /// Use the right transform.
    #[serde(default)]
    pub right: bool,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSpec {
    pub quad: Option<f64>,
    pub fd_step: Option<f64>,
    pub pole_guard: Option<f64>,
}

impl ToleranceSpec {
    pub fn validate(&self) -> CliResult<()> {
        for (name, v) in [("quad", self.quad), ("fd_step", self.fd_step), ("pole_guard", self.pole_guard)] {
            if let Some(x) = v {
                if !(x > 0.0 && x.is_finite()) {
                    return invalid(format!("tolerance.{name} must be positive, got {x}"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    /// `Σ qⁿ aₙ`.
    Polynomial { coeffs: Vec<Q4> },
    /// `Σ aₙ qⁿ`.
    RightPolynomial { coeffs: Vec<Q4> },
    /// `Σ q^{min_power + k} a_k`.
    Laurent { min_power: i32, coeffs: Vec<Q4> },
    Constant { value: Q4 },
    Identity,
    Conjugate,
    /// `den^{-⋆} ⋆ num` for polynomial coefficient lists.
    StarRational { num: Vec<Q4>, den: Vec<Q4> },
    /// Real data `|u - at|^alpha`.
    Cusp { alpha: f64, at: f64 },
    /// Boundary samples against the contour parameter, one table per component.
    Sampled { params: Vec<f64>, values: Vec<Q4>, period: Option<f64> },
}

impl FunctionSpec {
    pub fn slice_function(&self) -> CliResult<SliceFunction> {
        let qs = |c: &[Q4]| c.iter().copied().map(quat).collect::<Vec<_>>();
        let nonempty = |c: &[Q4], what: &str| if c.is_empty() { invalid(format!("{what} needs coefficients")) } else { Ok(()) };
        Ok(match self {
            FunctionSpec::Polynomial { coeffs } => {
                nonempty(coeffs, "polynomial")?;
                SliceFunction::polynomial(&qs(coeffs))
            }
            FunctionSpec::RightPolynomial { coeffs } => {
                nonempty(coeffs, "right_polynomial")?;
                SliceFunction::right_polynomial(&qs(coeffs))
            }
            FunctionSpec::Laurent { min_power, coeffs } => {
                nonempty(coeffs, "laurent")?;
                SliceFunction::laurent(*min_power, &qs(coeffs))
            }
            FunctionSpec::Constant { value } => SliceFunction::constant(quat(*value)),
            FunctionSpec::Identity => SliceFunction::identity(),
            FunctionSpec::Conjugate => SliceFunction::conjugate(),
            FunctionSpec::StarRational { num, den } => {
                nonempty(num, "star_rational numerator")?;
                nonempty(den, "star_rational denominator")?;
                SliceFunction::star_rational(&SliceFunction::polynomial(&qs(num)), &SliceFunction::polynomial(&qs(den)))?
            }
            FunctionSpec::Cusp { alpha, at } => {
                let (alpha, at) = (*alpha, *at);
                if !(alpha > 0.0 && alpha <= 1.0) {
                    return invalid(format!("cusp exponent must lie in (0, 1], got {alpha}"));
                }
                SliceFunction::left(move |u, _| Ok(Quaternion::real((u - at).abs().powf(alpha))), |_, _| Ok(Quaternion::ZERO))
            }
            FunctionSpec::Sampled { .. } => return invalid("sampled data is only valid as boundary data"),
        })
    }

    pub fn boundary_data(&self) -> CliResult<BoundaryData> {
        match self {
            FunctionSpec::Sampled { params, values, period } => {
                let t = Tabulated::new(params.clone(), values.iter().copied().map(quat).collect(), *period)?;
                Ok(BoundaryData::Tabulated(vec![t]))
            }
            other => Ok(BoundaryData::Slice(other.slice_function()?)),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ContourSpec {
    Circle { center: [f64; 2], radius: f64, j: Q4, panels: Option<usize> },
    Ellipse { center: [f64; 2], semi: [f64; 2], j: Q4, panels: Option<usize> },
    Polygon { vertices: Vec<[f64; 2]>, j: Q4, panels_per_edge: Option<usize> },
    PolylineArcs { j: Q4, components: Vec<ComponentSpec> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    pub arcs: Vec<ArcSpec>,
    #[serde(default = "yes")]
    pub closed: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum ArcSpec {
    Segment { from: [f64; 2], to: [f64; 2], panels: Option<usize> },
    Circular { center: [f64; 2], radius: f64, start: f64, end: f64, panels: Option<usize> },
    Elliptic { center: [f64; 2], semi_x: f64, semi_y: f64, start: f64, end: f64, panels: Option<usize> },
}

impl ContourSpec {
    pub fn build(&self) -> CliResult<Contour> {
        Ok(match self {
            ContourSpec::Circle { center, radius, j, panels } => Contour::circle(*center, *radius, unit(*j)?, panels.unwrap_or(16))?,
            ContourSpec::Ellipse { center, semi, j, panels } => {
                Contour::ellipse(*center, semi[0], semi[1], unit(*j)?, panels.unwrap_or(16))?
            }
            ContourSpec::Polygon { vertices, j, panels_per_edge } => {
                Contour::polygon(vertices, unit(*j)?, panels_per_edge.unwrap_or(4))?
            }
            ContourSpec::PolylineArcs { j, components } => {
                if components.is_empty() {
                    return invalid("polyline_arcs needs at least one component");
                }
                let comps = components
                    .iter()
                    .map(|c| {
                        let arcs = c
                            .arcs
                            .iter()
                            .map(|a| match *a {
                                ArcSpec::Segment { from, to, panels } => ContourArc::new(ArcShape::Segment { from, to }, panels.unwrap_or(4)),
                                ArcSpec::Circular { center, radius, start, end, panels } => {
                                    ContourArc::new(ArcShape::Circular { center, radius, start, end }, panels.unwrap_or(8))
                                }
                                ArcSpec::Elliptic { center, semi_x, semi_y, start, end, panels } => ContourArc::new(
                                    ArcShape::Elliptic { center, semi_x, semi_y, start, end },
                                    panels.unwrap_or(8),
                                ),
                            })
                            .collect();
                        Component::new(arcs, c.closed)
                    })
                    .collect();
                Contour::new(unit(*j)?, comps)?
            }
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    Ball { center: f64, radius: f64 },
    Shell { center: f64, inner: f64, outer: f64 },
}

impl DomainSpec {
    pub fn build(&self) -> CliResult<AxiallySymmetricDomain> {
        Ok(match *self {
            DomainSpec::Ball { center, radius } => AxiallySymmetricDomain::ball(center, radius)?,
            DomainSpec::Shell { center, inner, outer } => AxiallySymmetricDomain::shell(center, inner, outer)?,
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum PointSet {
    List(Vec<Q4>),
    /// `count` uniform points in the ball `|q| < radius`, drawn from the job seed.
    Random { random: usize, radius: f64 },
}

impl PointSet {
    pub fn points(&self, seed: u64) -> CliResult<Vec<Quaternion>> {
        match *self {
            PointSet::List(ref l) => Ok(l.iter().copied().map(quat).collect()),
            PointSet::Random { random, radius } => {
                if !(radius > 0.0) {
                    return invalid(format!("random point radius must be positive, got {radius}"));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut out = Vec::with_capacity(random);
                while out.len() < random {
                    let q = Quaternion::new(
                        rng.gen_range(-radius..radius),
                        rng.gen_range(-radius..radius),
                        rng.gen_range(-radius..radius),
                        rng.gen_range(-radius..radius),
                    );
                    if q.norm() < radius {
                        out.push(q);
                    }
                }
                Ok(out)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum TestFunctionKind {
    Gaussian,
    Bump,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestFunctionSpec {
    pub kind: TestFunctionKind,
    pub center: [f64; 2],
    pub radius: f64,
    pub sigma: Option<f64>,
    #[serde(default = "one")]
    pub amp: Q4,
}

fn one() -> Q4 {
    [1.0, 0.0, 0.0, 0.0]
}

impl TestFunctionSpec {
    pub fn build(&self) -> CliResult<SliceTestFunction> {
        Ok(match self.kind {
            TestFunctionKind::Gaussian => {
                let sigma = self.sigma.unwrap_or(self.radius / 3.0);
                SliceTestFunction::gaussian(self.center, sigma, self.radius, quat(self.amp))?
            }
            TestFunctionKind::Bump => SliceTestFunction::bump(self.center, self.radius, quat(self.amp))?,
        })
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    pub u: f64,
    pub v: f64,
    pub j_index: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ProbeSet {
    /// Lattice with `grid` points per side, see `default_probes`.
    Grid { grid: usize },
    List(Vec<ProbeSpec>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LadderKind {
    /// `∮ s⁻¹ ds_j` on the job contour against `2π`.
    Quadrature,
    /// Fundamental pairing against its limit.
    Pairing,
    /// Solver residual.
    Solve,
}
