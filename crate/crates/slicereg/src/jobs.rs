//! One function per subcommand: spec in, table or JSON document out.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde_json::json;
use slicereg_core::contour::Contour;
use slicereg_core::globalop::{
    default_probes, fundamental_pairing, pairing_limit, pairing_target_literal, solve_global, PairingGrid, SolveOptions,
};
use slicereg_core::kernel::{cauchy_kernel_left_with_guard, cauchy_kernel_right_with_guard, phi_with_guard, pole_guard};
use slicereg_core::quadrature::QuadOptions;
use slicereg_core::series::{
    classify_singularity, convergence_radii, laurent_coefficients, spherical_coefficients, spherical_order, Singularity,
    SphericalFit, SphericalLaurentSeries, SphericalOrder,
};
use slicereg_core::transform::{
    boundary_distance, boundary_jump_check, cauchy_transform, cauchy_transform_right, growth_exponent, holder_on_contour,
    split, Side, TransformOptions,
};
use slicereg_core::{Quaternion, UnitImaginary};

use crate::error::{invalid, CliError, CliResult};
use crate::spec::{quat, slice_units, unit, FunctionSpec, JobSpec, LadderKind, ProbeSet, TestFunctionKind, TestFunctionSpec};
use crate::Command;

/// Run-time overrides from the command line.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub refine: Option<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Output {
    Table { header: Vec<String>, rows: Vec<Vec<f64>> },
    Json(serde_json::Value),
}

impl Output {
    fn table(header: &[&str], rows: Vec<Vec<f64>>) -> Self {
        Output::Table { header: header.iter().map(|s| s.to_string()).collect(), rows }
    }

    /// Fails on any NaN; infinities are allowed only in JSON radii.
    pub fn check_finite(&self) -> CliResult<()> {
        match self {
            Output::Table { header, rows } => {
                for (i, row) in rows.iter().enumerate() {
                    if let Some(c) = row.iter().position(|x| !x.is_finite()) {
                        return Err(CliError::NonFinite(format!("row {i}, column {}", header[c])));
                    }
                }
                Ok(())
            }
            Output::Json(v) => {
                if has_null_number(v) {
                    return Err(CliError::NonFinite("coefficient list".into()));
                }
                Ok(())
            }
        }
    }
}

fn has_null_number(v: &serde_json::Value) -> bool {
    match v.get("coefficients").and_then(|c| c.as_array()) {
        Some(cs) => cs.iter().any(|c| c["c"].as_array().is_none_or(|a| a.iter().any(|x| x.is_null()))),
        None => false,
    }
}

struct Ctx<'a> {
    spec: &'a JobSpec,
    ov: Overrides,
}

impl Ctx<'_> {
    fn seed(&self) -> u64 {
        self.ov.seed.or(self.spec.seed).unwrap_or(0)
    }

    fn quad_tol(&self) -> Option<f64> {
        self.ov.tol.or(self.spec.tolerance.quad)
    }

    fn transform_opts(&self) -> TransformOptions {
        let mut o = match self.quad_tol() {
            Some(t) => TransformOptions::with_tol(t),
            None => TransformOptions::default(),
        };
        o.pole_guard = self.spec.tolerance.pole_guard;
        o
    }

    fn quad_opts(&self) -> QuadOptions {
        match self.quad_tol() {
            Some(t) => QuadOptions::with_tol(t),
            None => QuadOptions::default(),
        }
    }

    fn function(&self) -> CliResult<&FunctionSpec> {
        self.spec.function.as_ref().map_or_else(|| invalid("missing \"function\""), Ok)
    }

    fn contour(&self) -> CliResult<Contour> {
        self.spec.contour.as_ref().map_or_else(|| invalid("missing \"contour\""), |c| c.build())
    }

    fn points(&self) -> CliResult<Vec<Quaternion>> {
        let p = self.spec.points.as_ref().map_or_else(|| invalid("missing \"points\""), |p| p.points(self.seed()))?;
        if p.is_empty() {
            return invalid("empty point list");
        }
        Ok(p)
    }

    fn levels(&self, default: u32) -> u32 {
        self.ov.refine.or(self.spec.levels).unwrap_or(default)
    }
}

fn q(a: Quaternion) -> [f64; 4] {
    a.to_array()
}

fn par_rows<T, F>(items: &[T], f: F) -> CliResult<Vec<Vec<f64>>>
where
    T: Sync,
    F: Fn(&T) -> CliResult<Vec<f64>> + Sync + Send,
{
    items.par_iter().map(f).collect::<Vec<_>>().into_iter().collect()
}

pub fn run_job(cmd: Command, spec: &JobSpec, ov: Overrides) -> CliResult<Output> {
    spec.tolerance.validate()?;
    if let Some(t) = ov.tol {
        if !(t > 0.0 && t.is_finite()) {
            return invalid(format!("--tol must be positive, got {t}"));
        }
    }
    if let Some(name) = &spec.command {
        if name != cmd.name() {
            return invalid(format!("spec is for \"{name}\", not \"{}\"", cmd.name()));
        }
    }
    let ctx = Ctx { spec, ov };
    match cmd {
        Command::EvalKernel => eval_kernel(&ctx),
        Command::Transform => transform(&ctx),
        Command::Split => split_job(&ctx),
        Command::JumpCheck => jump_check(&ctx),
        Command::Holder => holder(&ctx),
        Command::SeriesFit => series_fit(&ctx),
        Command::VerifyFundamental => verify_fundamental(&ctx),
        Command::SolveGlobal => solve(&ctx),
        Command::Report => report(&ctx),
    }
}

fn eval_kernel(ctx: &Ctx) -> CliResult<Output> {
    let s = quat(ctx.spec.s.map_or_else(|| invalid("missing \"s\""), Ok)?);
    let guard = ctx.spec.tolerance.pole_guard.unwrap_or_else(|| pole_guard(s));
    let rows = par_rows(&ctx.points()?, |&p| {
        let l = cauchy_kernel_left_with_guard(s, p, guard)?;
        let r = cauchy_kernel_right_with_guard(s, p, guard)?;
        let f = phi_with_guard(s, p, guard)?;
        let mut row = q(p).to_vec();
        row.extend(q(l.value));
        row.extend(q(r.value));
        row.extend(q(f.value));
        row.push(l.pole_distance);
        Ok(row)
    })?;
    Ok(Output::table(
        &["p0", "p1", "p2", "p3", "left0", "left1", "left2", "left3", "right0", "right1", "right2", "right3", "phi0", "phi1", "phi2", "phi3", "dist"],
        rows,
    ))
}

const VALUE_HEADER: [&str; 9] = ["p0", "p1", "p2", "p3", "value0", "value1", "value2", "value3", "dist_to_boundary"];

fn transform(ctx: &Ctx) -> CliResult<Output> {
    let data = ctx.function()?.boundary_data()?;
    let contour = ctx.contour()?;
    let opts = ctx.transform_opts();
    let right = ctx.spec.right;
    let rows = par_rows(&ctx.points()?, |&p| {
        let v = if right { cauchy_transform_right(&data, &contour, p, &opts)? } else { cauchy_transform(&data, &contour, p, &opts)? };
        let mut row = q(p).to_vec();
        row.extend(q(v));
        row.push(boundary_distance(&contour, p));
        Ok(row)
    })?;
    Ok(Output::table(&VALUE_HEADER, rows))
}

fn split_job(ctx: &Ctx) -> CliResult<Output> {
    let data = ctx.function()?.boundary_data()?;
    let contour = ctx.contour()?;
    let pair = split(data, &contour, &ctx.transform_opts())?;
    let rows = par_rows(&ctx.points()?, |&p| {
        let (side, v) = pair.part(p)?;
        let mut row = q(p).to_vec();
        row.push(if side == Side::Inside { 1.0 } else { -1.0 });
        row.extend(q(v));
        row.push(boundary_distance(&contour, p));
        Ok(row)
    })?;
    Ok(Output::table(&["p0", "p1", "p2", "p3", "side", "value0", "value1", "value2", "value3", "dist_to_boundary"], rows))
}

fn jump_check(ctx: &Ctx) -> CliResult<Output> {
    let data = ctx.function()?.boundary_data()?;
    let contour = ctx.contour()?;
    let distances = ctx.spec.distances.clone().unwrap_or_else(|| vec![1e-1, 1e-2, 1e-3]);
    if distances.is_empty() {
        return invalid("empty distance list");
    }
    let jumps = boundary_jump_check(
        &data,
        &contour,
        ctx.spec.component.unwrap_or(0),
        ctx.spec.param.unwrap_or(0.0),
        &distances,
        &ctx.transform_opts(),
    )?;
    let rows = distances.iter().zip(&jumps).map(|(&d, &j)| vec![d, j]).collect();
    Ok(Output::table(&["distance", "jump"], rows))
}

fn holder(ctx: &Ctx) -> CliResult<Output> {
    let spec = ctx.function()?;
    let f = spec.slice_function()?;
    let contour = ctx.contour()?;
    let alpha = ctx.spec.alpha.unwrap_or(0.5);
    let h = holder_on_contour(&f, &contour, alpha, ctx.spec.samples.unwrap_or(256))?;
    let slope = growth_exponent(
        &spec.boundary_data()?,
        &contour,
        ctx.spec.component.unwrap_or(0),
        ctx.spec.param.unwrap_or(0.0),
        &ctx.transform_opts(),
    )?;
    let [c0, c1] = h.component_seminorms.unwrap_or([f64::NAN; 2]);
    Ok(Output::table(
        &["alpha", "seminorm", "seminorm_f0", "seminorm_f1", "sup_norm", "norm", "growth_slope"],
        vec![vec![alpha, h.seminorm, c0, c1, h.sup_norm, h.norm(), slope]],
    ))
}

fn series_json(series: &SphericalLaurentSeries) -> serde_json::Value {
    let coeffs: Vec<_> = (series.n_min()..=series.n_max()).map(|n| json!({"n": n, "c": q(series.coefficient(n))})).collect();
    let radii = convergence_radii(series);
    json!({
        "center": q(series.center()),
        "coefficients": coeffs,
        "radii": {
            "r1": radii.r1,
            "r2": radii.r2,
            "super_exponential_positive": radii.super_exponential_positive,
            "super_exponential_negative": radii.super_exponential_negative,
        },
    })
}

fn series_fit(ctx: &Ctx) -> CliResult<Output> {
    let f = ctx.function()?.slice_function()?;
    let center = quat(ctx.spec.center.map_or_else(|| invalid("missing \"center\""), Ok)?);
    let j = ctx.spec.slice.map(unit).transpose()?.unwrap_or(UnitImaginary::E1);
    if center.im_norm() == 0.0 {
        let rho = ctx.spec.rho.unwrap_or(0.5);
        let (lo, hi) = (ctx.spec.n_min.unwrap_or(-8), ctx.spec.n_max.unwrap_or(8));
        let opts = ctx.quad_opts();
        let series = laurent_coefficients(&f, center.x0, j, rho, lo, hi, &opts)?;
        let mut doc = series_json(&series);
        if ctx.spec.classify.unwrap_or(false) {
            let label = match classify_singularity(&f, center.x0, j, rho, &opts) {
                Ok(Singularity::Removable { zero_order }) => format!("removable(zero_order={zero_order})"),
                Ok(Singularity::Pole { order }) => format!("pole(order={order})"),
                Ok(Singularity::Essential) => "essential".into(),
                Err(slicereg_core::Error::Undecidable(m)) => format!("undecidable: {m}"),
                Err(e) => return Err(e.into()),
            };
            doc["singularity"] = json!(label);
        }
        Ok(Output::Json(doc))
    } else {
        let fit = SphericalFit::default();
        let (series, residual) = spherical_coefficients(&f, center, &fit)?;
        let mut doc = series_json(&series);
        doc["residual"] = json!(residual);
        if ctx.spec.classify.unwrap_or(false) {
            doc["order"] = json!(match spherical_order(&f, center, &fit) {
                Ok(SphericalOrder::Finite(m)) => format!("finite({m})"),
                Ok(SphericalOrder::Infinite) => "infinite".into(),
                Err(slicereg_core::Error::Undecidable(m)) => format!("undecidable: {m}"),
                Err(e) => return Err(e.into()),
            });
        }
        Ok(Output::Json(doc))
    }
}

fn pairing_setup(ctx: &Ctx) -> CliResult<(Quaternion, UnitImaginary, slicereg_core::globalop::SliceTestFunction)> {
    let s = quat(ctx.spec.s.map_or_else(|| invalid("missing \"s\""), Ok)?);
    if s.im_norm() == 0.0 {
        return invalid("the pairing point s must be non-real");
    }
    let j = match ctx.spec.slice {
        Some(a) => unit(a)?,
        None => s.imaginary_unit().expect("non-real"),
    };
    let tf = ctx.spec.test_function.clone().unwrap_or(TestFunctionSpec {
        kind: TestFunctionKind::Gaussian,
        center: [s.x0, s.im_norm()],
        radius: 0.75 * s.im_norm(),
        sigma: Some(0.25 * s.im_norm()),
        amp: [1.0, 0.0, 0.0, 0.0],
    });
    Ok((s, j, tf.build()?))
}

fn rel(a: Quaternion, b: Quaternion) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

fn verify_fundamental(ctx: &Ctx) -> CliResult<Output> {
    let (s, j, phi) = pairing_setup(ctx)?;
    let levels = ctx.levels(4);
    if levels == 0 {
        return invalid("need at least one level");
    }
    let (literal, limit) = (pairing_target_literal(&phi, s), pairing_limit(&phi, s));
    let lv: Vec<u32> = (0..levels).collect();
    let rows = par_rows(&lv, |&k| {
        let v = fundamental_pairing(&phi, s, j, &PairingGrid::level(k))?;
        let mut row = vec![k as f64];
        row.extend(q(v));
        row.push(rel(v, literal));
        row.push(rel(v, limit));
        Ok(row)
    })?;
    Ok(Output::table(&["level", "value0", "value1", "value2", "value3", "rel_err_literal", "rel_err_limit"], rows))
}

fn solve_probes(ctx: &Ctx, domain: &slicereg_core::slicefunc::AxiallySymmetricDomain) -> CliResult<(Vec<Quaternion>, Vec<usize>)> {
    let units = slice_units();
    match &ctx.spec.probes {
        Some(ProbeSet::List(l)) => {
            let mut qs = Vec::with_capacity(l.len());
            for p in l {
                let Some(j) = units.get(p.j_index) else {
                    return invalid(format!("j_index {} out of range 0..{}", p.j_index, units.len()));
                };
                qs.push(j.embed(p.u, p.v));
            }
            Ok((qs, l.iter().map(|p| p.j_index).collect()))
        }
        other => {
            let n = match other {
                Some(ProbeSet::Grid { grid }) => *grid,
                _ => 6,
            };
            let qs = default_probes(domain, n)?;
            let idx = (0..qs.len()).map(|i| i % units.len()).collect();
            Ok((qs, idx))
        }
    }
}

fn solve_options(ctx: &Ctx, level: u32) -> CliResult<SolveOptions> {
    let mut o = SolveOptions::level(level);
    o.fd_step = ctx.spec.tolerance.fd_step;
    if let Some(a) = ctx.spec.slice {
        o.j = unit(a)?;
    }
    Ok(o)
}

fn solve(ctx: &Ctx) -> CliResult<Output> {
    let v = ctx.function()?.slice_function()?;
    let domain = ctx.spec.domain.as_ref().map_or_else(|| invalid("missing \"domain\""), |d| d.build())?;
    let (probes, idx) = solve_probes(ctx, &domain)?;
    if probes.is_empty() {
        return invalid("no residual probes");
    }
    let level = ctx.ov.refine.or(ctx.spec.level).unwrap_or(2);
    let r = solve_global(&v, &domain, &solve_options(ctx, level)?, &probes)?;
    let units = slice_units();
    let rows = r
        .probes
        .iter()
        .zip(&idx)
        .map(|(p, &k)| {
            let u = p.q.x0;
            let vv = p.q.im().dot(units[k].as_quaternion());
            vec![u, vv, k as f64, p.residual.norm()]
        })
        .collect();
    Ok(Output::table(&["u", "v", "j_index", "residual_norm"], rows))
}

#[derive(Clone, Copy)]
enum Target {
    Relative(Quaternion),
    Absolute(Quaternion),
}

/// Per-level errors against the finest level and against a target
/// (absolute or relative), with the empirical order `log2(e_{k-1} / e_k)`.
fn ladder_table(values: &[(f64, Quaternion)], target: Target) -> Output {
    let finest = values.last().expect("nonempty ladder").1;
    let err = |v: Quaternion| match target {
        Target::Relative(t) => rel(v, t),
        Target::Absolute(t) => (v - t).norm(),
    };
    let mut rows = Vec::with_capacity(values.len());
    for (i, &(metric, v)) in values.iter().enumerate() {
        let order = if i == 0 {
            0.0
        } else {
            let (a, b) = (err(values[i - 1].1), err(v));
            if a > 0.0 && b > 0.0 { (a / b).log2() } else { 0.0 }
        };
        rows.push(vec![i as f64, metric, (v - finest).norm(), err(v), order]);
    }
    Output::table(&["level", "value_norm", "error_vs_finest", "error", "order"], rows)
}

fn report(ctx: &Ctx) -> CliResult<Output> {
    let levels = ctx.levels(4);
    if levels < 3 {
        return invalid(format!("a convergence report needs at least 3 levels, got {levels}"));
    }
    let kind = ctx.spec.ladder.map_or_else(|| invalid("missing \"ladder\""), Ok)?;
    let lv: Vec<u32> = (0..levels).collect();
    match kind {
        LadderKind::Quadrature => {
            let contour = match &ctx.spec.contour {
                Some(c) => c.build()?,
                None => Contour::ellipse([0.0, 0.0], 1.0, 0.5, UnitImaginary::E1, 1)?,
            };
            if (contour.winding_number(Quaternion::ZERO)? - 1.0).abs() > 1e-6 {
                return invalid("the quadrature ladder needs a contour winding once around 0");
            }
            let vals = lv
                .par_iter()
                .map(|&k| {
                    let v = contour.integrate_fixed(|pt| Ok(pt.s.inverse()? * pt.ds), 2, 1 << (k + 1))?;
                    Ok((v.norm(), v))
                })
                .collect::<CliResult<Vec<_>>>()?;
            Ok(ladder_table(&vals, Target::Relative(Quaternion::real(2.0 * PI))))
        }
        LadderKind::Pairing => {
            let (s, j, phi) = pairing_setup(ctx)?;
            let vals = lv
                .par_iter()
                .map(|&k| {
                    let v = fundamental_pairing(&phi, s, j, &PairingGrid::level(k))?;
                    Ok((v.norm(), v))
                })
                .collect::<CliResult<Vec<_>>>()?;
            Ok(ladder_table(&vals, Target::Relative(pairing_limit(&phi, s))))
        }
        LadderKind::Solve => {
            let v = ctx.function()?.slice_function()?;
            let domain = ctx.spec.domain.as_ref().map_or_else(|| invalid("missing \"domain\""), |d| d.build())?;
            let (probes, _) = solve_probes(ctx, &domain)?;
            let vals = lv
                .iter()
                .map(|&k| {
                    let r = solve_global(&v, &domain, &solve_options(ctx, k)?, &probes)?;
                    Ok((r.relative_residual, Quaternion::real(r.relative_residual)))
                })
                .collect::<CliResult<Vec<_>>>()?;
            Ok(ladder_table(&vals, Target::Absolute(Quaternion::ZERO)))
        }
    }
}
