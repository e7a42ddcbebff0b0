mod common;

use std::f64::consts::PI;

use common::{random_vector, rel_diff, Setup};
use wave_uc::harness::{solve_config, RunConfig};
use wave_uc::mesh::TimeSide;
use wave_uc::postproc::{best_approximation, error_l2_l2_dt, error_linfty_l2, tnorm_components};
use wave_uc::problem::{ExactSolution, FnPair, Region, SpaceTimeFunction};
use wave_uc::quadrature::gauss_rule;
use wave_uc::space::{DiscreteField, FieldLabel, SpaceTimeSpace};

fn error_region(space: &SpaceTimeSpace) -> Vec<bool> {
    let mesh = space.spatial.mesh();
    Region::intervals(&[(0.25, 0.75)]).unwrap().cell_indicator(mesh).unwrap()
}

/// Spatial L2 norm over the flagged cells of `f(x)` with a 20-point rule.
fn spatial_norm(space: &SpaceTimeSpace, region: &[bool], f: impl Fn(f64) -> f64) -> f64 {
    let mesh = space.spatial.mesh();
    let g = gauss_rule(20).unwrap();
    let mut acc = 0.0;
    for c in (0..mesh.n_cells()).filter(|&c| region[c]) {
        let b = mesh.cell_box(c);
        let w = b.width(0);
        for (&p, &wq) in g.points.iter().zip(&g.weights) {
            acc += wq * w * f(b.lo[0] + p * w).powi(2);
        }
    }
    acc.sqrt()
}

/// `|f|_{L2(Q)}` over the flagged cells with 20 x 20 points per cell and slab.
fn space_time_norm(space: &SpaceTimeSpace, region: &[bool], f: impl Fn(usize, f64, f64) -> f64) -> f64 {
    let g = gauss_rule(20).unwrap();
    let part = &space.partition;
    let mut acc = 0.0;
    for n in 0..space.n_slabs() {
        for (&tau, &wt) in g.points.iter().zip(&g.weights) {
            let t = part.slab_start(n) + tau * part.dt;
            acc += wt * part.dt * spatial_norm(space, region, |x| f(n, t, x)).powi(2);
        }
    }
    acc.sqrt()
}

fn space_time_inner(space: &SpaceTimeSpace, region: &[bool], f: impl Fn(usize, f64, f64) -> f64) -> f64 {
    let g = gauss_rule(20).unwrap();
    let mesh = space.spatial.mesh();
    let part = &space.partition;
    let mut acc = 0.0;
    for n in 0..space.n_slabs() {
        for (&tau, &wt) in g.points.iter().zip(&g.weights) {
            let t = part.slab_start(n) + tau * part.dt;
            for c in (0..mesh.n_cells()).filter(|&c| region[c]) {
                let b = mesh.cell_box(c);
                let w = b.width(0);
                for (&p, &wq) in g.points.iter().zip(&g.weights) {
                    acc += wt * part.dt * wq * w * f(n, t, b.lo[0] + p * w);
                }
            }
        }
    }
    acc
}

fn simple_space(level: u32, k: usize, q: usize) -> SpaceTimeSpace {
    Setup::one_d(level, k, q, 1 << (level + 1), 0.5).build().primal
}

#[test]
fn zero_field_sup_norm_matches_dense_sampling() {
    let sol = ExactSolution::simple(2.5);
    let space = simple_space(2, 3, 3);
    let region = error_region(&space);
    let zero = space.zero_field(FieldLabel::U1);
    let reported = error_linfty_l2(&zero, &sol, &region).unwrap();
    let dense = (0..200)
        .map(|i| 0.5 * i as f64 / 199.0)
        .map(|t| spatial_norm(&space, &region, |x| sol.value(t, &[x])))
        .fold(0.0, f64::max);
    assert!(rel_diff(reported, dense) < 0.01, "{reported} vs {dense}");
    let nothing = FnPair(|_: f64, _: &[f64]| 0.0, |_: f64, _: &[f64]| 0.0);
    assert_eq!(error_linfty_l2(&zero, &nothing, &region).unwrap(), 0.0);
}

#[test]
fn zero_field_derivative_norm_matches_closed_form() {
    let (c1, t_end) = (2.5, 0.5);
    let sol = ExactSolution::simple(c1);
    let space = simple_space(2, 2, 2);
    let region = error_region(&space);
    let reported = error_l2_l2_dt(&space.zero_field(FieldLabel::U1), &sol, &region).unwrap();
    let w1 = 3.0 * PI;
    let om = w1 * c1;
    let time = om * om * (t_end / 2.0 - (2.0 * om * t_end).sin() / (4.0 * om));
    let cos2 = |w: f64, a: f64, b: f64| (b - a) / 2.0 + ((2.0 * w * (b - 0.5)).sin() - (2.0 * w * (a - 0.5)).sin()) / (4.0 * w);
    let space_part = cos2(w1, 0.25, 0.5) + cos2(w1 * c1, 0.5, 0.75);
    let exact = (time * space_part).sqrt();
    assert!(rel_diff(reported, exact) < 1e-6, "{reported} vs {exact}");
}

#[test]
fn time_constant_field_has_no_derivative_error() {
    let space = simple_space(1, 2, 1);
    let region = vec![true; space.spatial.mesh().n_cells()];
    let f = FnPair(|_: f64, x: &[f64]| x[0] * x[0], |_: f64, _: &[f64]| 0.0);
    let u = space.interpolate(FieldLabel::U1, |t, x| f.value(t, x));
    assert!(error_l2_l2_dt(&u, &f, &region).unwrap() < 1e-13);
    assert!(error_linfty_l2(&u, &f, &region).unwrap() < 1e-13);
}

#[test]
fn interpolant_errors_decay() {
    let sol = ExactSolution::simple(2.5);
    let mut sup = vec![];
    let mut der = vec![];
    for level in 2..=5 {
        let space = simple_space(level, 3, 3);
        let region = error_region(&space);
        let u = space.interpolate(FieldLabel::U1, |t, x| sol.value(t, x));
        sup.push(error_linfty_l2(&u, &sol, &region).unwrap());
        der.push(error_l2_l2_dt(&u, &sol, &region).unwrap());
    }
    for w in sup.windows(2).chain(der.windows(2)) {
        assert!(w[1] < w[0], "{sup:?} {der:?}");
    }
    assert!((der[2] / der[3]).log2() >= 2.9, "{der:?}");
    assert!((sup[2] / sup[3]).log2() >= 3.5, "{sup:?}");
}

#[test]
fn projection_reproduces_discrete_functions() {
    let sol = ExactSolution::PiecewiseLinear { c1: 2.5, c2: 1.0 };
    let space = simple_space(1, 2, 1);
    let proj = best_approximation(&sol, &space, FieldLabel::U1).unwrap();
    let direct = space.interpolate(FieldLabel::U1, |t, x| sol.value(t, x));
    let diff = proj.coeffs.iter().zip(&direct.coeffs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(diff < 1e-11, "{diff}");
}

/// Largest `|(u - Pu, v)| / (|u - Pu| |v|)` over random discrete `v`.
fn orthogonality_defect(exact: &dyn SpaceTimeFunction, space: &SpaceTimeSpace) -> f64 {
    let all = vec![true; space.spatial.mesh().n_cells()];
    let proj = best_approximation(exact, space, FieldLabel::U1).unwrap();
    let err = |n: usize, t: f64, x: f64| exact.value(t, &[x]) - eval_in_slab(&proj, n, t, x);
    let err_norm = space_time_norm(space, &all, err);
    (0..20)
        .map(|seed| {
            let v = DiscreteField::from_coeffs(space.clone(), FieldLabel::U1, random_vector(space.n_dofs(), seed)).unwrap();
            let v_norm = space_time_norm(space, &all, |n, t, x| eval_in_slab(&v, n, t, x));
            let inner = space_time_inner(space, &all, |n, t, x| err(n, t, x) * eval_in_slab(&v, n, t, x));
            (inner / (err_norm * v_norm)).abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn projection_error_is_orthogonal() {
    // Polynomial data: the projection quadrature is exact.
    let poly = FnPair(|t: f64, x: &[f64]| (t * x[0]).powi(4), |t: f64, x: &[f64]| 4.0 * t.powi(3) * x[0].powi(4));
    let d = orthogonality_defect(&poly, &simple_space(1, 2, 2));
    assert!(d < 1e-11, "{d}");
    // Oscillatory data: limited by the quadrature of the data.
    let d = orthogonality_defect(&ExactSolution::simple(2.5), &simple_space(1, 2, 2));
    assert!(d < 1e-7, "{d}");
}

fn eval_in_slab(u: &DiscreteField, n: usize, t: f64, x: f64) -> f64 {
    let side = if t <= u.space.partition.slab_start(n) { TimeSide::Right } else { TimeSide::Left };
    u.value(t, &[x], side).unwrap()
}

#[test]
fn projection_beats_interpolation_in_space_time_l2() {
    let sol = ExactSolution::simple(2.5);
    let space = simple_space(3, 3, 3);
    let all = vec![true; space.spatial.mesh().n_cells()];
    let proj = best_approximation(&sol, &space, FieldLabel::U1).unwrap();
    let interp = space.interpolate(FieldLabel::U1, |t, x| sol.value(t, x));
    let ep = space_time_norm(&space, &all, |n, t, x| sol.value(t, &[x]) - eval_in_slab(&proj, n, t, x));
    let ei = space_time_norm(&space, &all, |n, t, x| sol.value(t, &[x]) - eval_in_slab(&interp, n, t, x));
    assert!(ep <= ei, "{ep} vs {ei}");
}

#[test]
fn solved_errors_match_dense_oracles() {
    let cfg = RunConfig { level: 2, k: 2, q: 2, ..RunConfig::default() };
    let s = solve_config(&cfg).unwrap();
    let space = &s.u1.space;
    let region = error_region(space);
    let sup = error_linfty_l2(&s.u1, &s.solution, &region).unwrap();
    let der = error_l2_l2_dt(&s.u1, &s.solution, &region).unwrap();

    // 200 time samples spread over the slabs, interior points only.
    let part = &space.partition;
    let per_slab = 200 / space.n_slabs();
    let mut dense_sup = 0.0f64;
    for n in 0..space.n_slabs() {
        for i in 0..per_slab {
            let t = part.slab_start(n) + part.dt * (i as f64 + 0.5) / per_slab as f64;
            let e = spatial_norm(space, &region, |x| s.solution.value(t, &[x]) - eval_in_slab(&s.u1, n, t, x));
            dense_sup = dense_sup.max(e);
        }
    }
    assert!(rel_diff(sup, dense_sup) < 0.01, "{sup} vs {dense_sup}");

    let dt_err = |n: usize, t: f64, x: f64| {
        let side = if t <= part.slab_start(n) { TimeSide::Right } else { TimeSide::Left };
        s.solution.d_t(t, &[x]) - s.u1.d_t(t, &[x], side).unwrap()
    };
    let dense_der = space_time_norm(space, &region, dt_err);
    assert!(rel_diff(der, dense_der) < 0.01, "{der} vs {dense_der}");
}

#[test]
fn tnorm_of_zero_and_dual_decay() {
    let p = Setup::one_d(1, 2, 2, 4, 0.5).build();
    let t = tnorm_components(&p.asm, &vec![0.0; p.asm.layout.total()]).unwrap();
    assert_eq!(t.total(), 0.0);

    let dual: Vec<f64> = (1..=4)
        .map(|level| {
            let cfg = RunConfig { level, ..RunConfig::default() };
            let s = solve_config(&cfg).unwrap();
            tnorm_components(&s.assembler, &s.x).unwrap().dual
        })
        .collect();
    assert!(dual[3] < dual[2] && dual[3] < 0.1 * dual[0], "{dual:?}");
}
