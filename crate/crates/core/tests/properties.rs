#![allow(clippy::neg_cmp_op_on_partial_ord)]
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slicereg_core::contour::Contour;
use slicereg_core::globalop::{default_probes, slice_pairing, GlobalSolver, RectRule, SliceTestFunction, SolveOptions};
use slicereg_core::quaternion::{dist_sphere_point, sphere_of};
use slicereg_core::slicefunc::{AxiallySymmetricDomain, SliceFunction};
use slicereg_core::transform::{boundary_jump_check, cauchy_transform, BoundaryData, TransformOptions};
use slicereg_core::{Quaternion, UnitImaginary};

fn rq(rng: &mut ChaCha8Rng, scale: f64) -> Quaternion {
    Quaternion::new(
        rng.gen_range(-scale..scale),
        rng.gen_range(-scale..scale),
        rng.gen_range(-scale..scale),
        rng.gen_range(-scale..scale),
    )
}

fn arb_q() -> impl Strategy<Value = Quaternion> {
    prop::array::uniform4(-3.0f64..3.0).prop_map(Quaternion::from_array)
}

proptest! {
    #[test]
    fn norm_is_multiplicative(a in arb_q(), b in arb_q()) {
        let lhs = (a * b).norm();
        prop_assert!((lhs - a.norm() * b.norm()).abs() <= 1e-12 * (a.norm() * b.norm()).max(1e-300));
    }

    #[test]
    fn product_is_associative(a in arb_q(), b in arb_q(), c in arb_q()) {
        prop_assert!(((a * b) * c - a * (b * c)).norm() <= 1e-12 * a.norm() * b.norm() * c.norm() + 1e-300);
    }

    #[test]
    fn distance_vanishes_on_the_sphere(p in arb_q(), x in prop::array::uniform3(-1.0f64..1.0)) {
        prop_assume!(x.iter().map(|t| t * t).sum::<f64>() > 1e-4);
        let i = UnitImaginary::new(x[0], x[1], x[2]).unwrap();
        let on = i.embed(p.x0, p.im_norm());
        prop_assert!(dist_sphere_point(&sphere_of(p), on) < 1e-12);
    }
}

#[test]
fn associativity_and_norms_on_many_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(2001);
    for _ in 0..100_000 {
        let (a, b, c) = (rq(&mut rng, 2.0), rq(&mut rng, 2.0), rq(&mut rng, 2.0));
        let scale = a.norm() * b.norm() * c.norm();
        assert!(((a * b) * c - a * (b * c)).norm() <= 1e-12 * scale);
        assert!(((a * b).norm() - a.norm() * b.norm()).abs() <= 1e-12 * a.norm() * b.norm());
    }
}

/// Minimum of `|u + r I - s|` over unit imaginaries `I`: a dense sample of the
/// 2-sphere followed by a shrinking local search in spherical angles.
fn sampled_distance(center: f64, radius: f64, s: Quaternion) -> f64 {
    let point = |theta: f64, phi: f64| {
        let i = Quaternion::new(0.0, theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos());
        (Quaternion::real(center) + i * radius - s).norm()
    };
    let n = 100;
    let (mut best, mut bt, mut bp) = (f64::INFINITY, 0.0, 0.0);
    for a in 0..n {
        for b in 0..n {
            let (t, p) = (std::f64::consts::PI * (a as f64 + 0.5) / n as f64, 2.0 * std::f64::consts::PI * b as f64 / n as f64);
            let d = point(t, p);
            if d < best {
                (best, bt, bp) = (d, t, p);
            }
        }
    }
    let mut step = 0.05;
    while step > 1e-10 {
        let mut moved = false;
        for (dt, dp) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
            let d = point(bt + dt, bp + dp);
            if d < best {
                (best, bt, bp, moved) = (d, bt + dt, bp + dp, true);
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    best
}

#[test]
fn sphere_distance_matches_sampled_minimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(2002);
    for _ in 0..20 {
        let p = rq(&mut rng, 2.0);
        let s = rq(&mut rng, 2.0);
        let closed = dist_sphere_point(&sphere_of(p), s);
        let oracle = sampled_distance(p.x0, p.im_norm(), s);
        assert!((closed - oracle).abs() < 1e-6, "{closed} vs {oracle}");
    }
}

#[test]
fn transform_vanishes_outside_for_regular_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(2003);
    let f = SliceFunction::polynomial(&[rq(&mut rng, 1.0), rq(&mut rng, 1.0), rq(&mut rng, 1.0), rq(&mut rng, 1.0)]);
    let data = BoundaryData::from(f);
    let contour = Contour::circle([0.0, 0.0], 1.0, UnitImaginary::E1, 16).unwrap();
    let opts = TransformOptions::default();
    for _ in 0..100 {
        let mut p = rq(&mut rng, 1.0);
        p = p * (rng.gen_range(1.2..4.0) / p.norm());
        assert!(cauchy_transform(&data, &contour, p, &opts).unwrap().norm() < 1e-8);
    }
}

#[test]
fn split_parts_recombine_at_the_boundary() {
    // smooth non-regular data
    let f = SliceFunction::left(|u, v| Ok(Quaternion::new(0.3 * u, 0.0, 0.2 * v * v, 0.0)), |_, v| Ok(Quaternion::new(0.0, 0.0, 0.0, 0.1 * v)));
    let data = BoundaryData::from(f);
    let contour = Contour::circle([0.0, 0.0], 1.0, UnitImaginary::E2, 16).unwrap();
    let opts = TransformOptions::default();
    let mut worst: f64 = 0.0;
    for k in 0..50 {
        let param = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / 50.0;
        let jump = boundary_jump_check(&data, &contour, 0, param, &[1e-4], &opts).unwrap();
        worst = worst.max(jump[0]);
    }
    assert!(worst < 1e-4, "{worst}");
}

#[test]
fn transform_decays_like_inverse_distance() {
    let data = BoundaryData::from(SliceFunction::left(
        |u, _| Ok(Quaternion::real(u.abs().sqrt())),
        |_, v| Ok(Quaternion::new(0.0, v, 0.0, 0.0)),
    ));
    let contour = Contour::circle([0.0, 0.0], 1.0, UnitImaginary::E3, 16).unwrap();
    let opts = TransformOptions::with_tol(1e-9);
    let sup = 1.0;
    let bound_const = contour.length() * sup / (2.0 * std::f64::consts::PI);
    let mut rng = ChaCha8Rng::seed_from_u64(2004);
    for _ in 0..10 {
        let mut p = rq(&mut rng, 1.0);
        p = p * (1e4 / p.norm());
        let v = cauchy_transform(&data, &contour, p, &opts).unwrap().norm();
        assert!(v * (p.norm() - 1.0) <= bound_const * (1.0 + 1e-6), "{v}");
    }
}

#[test]
fn annihilation_against_test_functions() {
    let mut rng = ChaCha8Rng::seed_from_u64(2005);
    let j = UnitImaginary::E1;
    let rule = RectRule { bounds: [-1.0, 1.0, -1.0, 1.0], panels: 24, order: 8 };
    let basis: Vec<SliceTestFunction> = (0..50)
        .map(|_| {
            let c = [rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6)];
            SliceTestFunction::bump(c, rng.gen_range(0.2..0.4), Quaternion::ONE).unwrap()
        })
        .collect();
    let candidates = [
        SliceFunction::constant(Quaternion::ZERO),
        SliceTestFunction::gaussian([0.1, 0.2], 0.15, 0.5, Quaternion::new(0.0, 1.0, 0.0, 0.0)).unwrap().as_slice_function(),
        SliceFunction::intrinsic(|z| z * z),
    ];
    let tol = 1e-10;
    for psi in &candidates {
        let max_pair = basis
            .iter()
            .map(|phi| slice_pairing(|p| psi.eval(p), |p| Ok(phi.eval(p)), j, &rule).unwrap().norm())
            .fold(0.0, f64::max);
        let sampled = (0..400)
            .map(|k| {
                let (u, v) = (-0.9 + 1.8 * (k % 20) as f64 / 19.0, -0.9 + 1.8 * (k / 20) as f64 / 19.0);
                psi.eval_slice(u, v, j).unwrap().norm()
            })
            .fold(0.0, f64::max);
        if max_pair < tol {
            assert!(sampled < 1e-8, "pairings vanish but the sampled norm is {sampled}");
        } else {
            assert!(sampled > 0.0);
        }
    }
}

#[test]
fn solver_is_slice_independent() {
    let ball = AxiallySymmetricDomain::ball(0.0, 1.0).unwrap();
    let v = SliceFunction::intrinsic(|z| z + 1.0);
    let probes = default_probes(&ball, 4).unwrap();
    let a = GlobalSolver::new(v.clone(), ball.clone(), SolveOptions::level(1)).unwrap();
    let b = GlobalSolver::new(v, ball, SolveOptions { j: UnitImaginary::new(0.0, 1.0, 1.0).unwrap(), ..SolveOptions::level(1) }).unwrap();
    for q in probes {
        let (x, y) = (a.eval(q).unwrap(), b.eval(q).unwrap());
        assert!((x - y).norm() < 1e-6 * x.norm().max(1.0), "{x:?} {y:?}");
    }
}
