//! Every assembled block is checked against a brute-force evaluation of its
//! bilinear form that only uses pointwise evaluation of discrete fields.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wave_uc::assembly::{Assembler, CellData, DofLayout};
use wave_uc::mesh::{build_mesh_1d, build_mesh_2d, build_time_partition, SpatialMesh};
use wave_uc::quadrature::gauss_rule;
use wave_uc::space::{DiscreteField, FieldLabel, LocalBasis, SpaceTimeSpace, SpatialSpace};

struct Setup {
    asm: Assembler,
    primal: SpaceTimeSpace,
    dual: SpaceTimeSpace,
}

fn setup(mesh: SpatialMesh, k: usize, q: usize, kd: usize, qd: usize, slabs: usize, t: f64) -> Setup {
    let mesh = Arc::new(mesh);
    let part = Arc::new(build_time_partition(t, slabs).unwrap());
    let n = mesh.n_cells();
    // Alternating speeds and a data region of every other cell.
    let c2: Vec<f64> = (0..n).map(|c| if mesh.cell_box(c).center()[0] < 0.5 { 6.25 } else { 1.0 }).collect();
    let omega: Vec<bool> = (0..n).map(|c| c % 3 != 1).collect();
    let primal = SpaceTimeSpace::new(Arc::new(SpatialSpace::new(mesh.clone(), k).unwrap()), q, part.clone());
    let dual = SpaceTimeSpace::new(Arc::new(SpatialSpace::new(mesh.clone(), kd).unwrap()), qd, part);
    let cells = CellData::new(&mesh, c2, omega).unwrap();
    let asm = Assembler::new(primal.clone(), dual.clone(), cells).unwrap();
    Setup { asm, primal, dual }
}

fn random_vector(layout: &DofLayout, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..layout.total()).map(|_| rng.random_range(-1.0..1.0)).collect()
}

struct Fields {
    u1: DiscreteField,
    u2: DiscreteField,
    z1: DiscreteField,
    z2: DiscreteField,
}

fn fields(s: &Setup, x: &[f64]) -> Fields {
    let l = &s.asm.layout;
    let f = |sp: &SpaceTimeSpace, lab| DiscreteField::from_coeffs(sp.clone(), lab, l.extract(x, lab)).unwrap();
    Fields {
        u1: f(&s.primal, FieldLabel::U1),
        u2: f(&s.primal, FieldLabel::U2),
        z1: f(&s.dual, FieldLabel::Z1),
        z2: f(&s.dual, FieldLabel::Z2),
    }
}

fn local_at(sp: &SpatialSpace, c: usize, xi: [f64; 2]) -> LocalBasis {
    let mut b = sp.new_local();
    sp.eval_local(c, xi, &mut b);
    b
}

/// Integrates `f(slab, tau, cell, xi)` over all slabs and cells with a
/// generous tensor Gauss rule.
fn integrate_cells(s: &Setup, mut f: impl FnMut(usize, f64, usize, [f64; 2]) -> f64) -> f64 {
    let mesh = s.primal.spatial.mesh();
    let dim = mesh.dim();
    let g = gauss_rule(8).unwrap();
    let dt = s.primal.partition.dt;
    let mut acc = 0.0;
    for n in 0..s.primal.n_slabs() {
        for (&tau, &wt) in g.points.iter().zip(&g.weights) {
            for c in 0..mesh.n_cells() {
                let meas = mesh.cell_measure(c);
                let ys: Vec<(f64, f64)> = if dim == 2 {
                    g.points.iter().copied().zip(g.weights.iter().copied()).collect()
                } else {
                    vec![(0.0, 1.0)]
                };
                for (&x0, &wx) in g.points.iter().zip(&g.weights) {
                    for &(y0, wy) in &ys {
                        acc += dt * wt * meas * wx * wy * f(n, tau, c, [x0, y0]);
                    }
                }
            }
        }
    }
    acc
}

fn check(name: &str, assembled: f64, oracle: f64) {
    let scale = oracle.abs().max(1.0);
    assert!((assembled - oracle).abs() < 1e-10 * scale, "{name}: assembled {assembled} vs oracle {oracle}");
}

fn check_all_forms(s: &Setup, seed: u64) {
    let x = random_vector(&s.asm.layout, seed);
    let fl = fields(s, &x);
    let sp = s.primal.spatial.as_ref();
    let dsp = s.dual.spatial.as_ref();
    let mesh = sp.mesh();
    let cells = &s.asm.cells;
    let dt = s.primal.partition.dt;
    let ev = |f: &DiscreteField, n: usize, tau: f64, c: usize, xi: [f64; 2]| {
        let b = local_at(&f.space.spatial, c, xi);
        f.eval_with_basis(n, tau, c, &b)
    };

    let data = integrate_cells(s, |n, tau, c, xi| {
        if cells.in_omega[c] { ev(&fl.u1, n, tau, c, xi).value.powi(2) } else { 0.0 }
    });
    check("data", s.asm.assemble_data_mass().unwrap().bilinear(&x, &x).unwrap(), data);

    let gls = integrate_cells(s, |n, tau, c, xi| {
        let r = ev(&fl.u2, n, tau, c, xi).dt - cells.c2[c] * ev(&fl.u1, n, tau, c, xi).lap;
        cells.h[c].powi(2) * r * r
    });
    let m = s.asm.assemble(&s.asm.least_squares_terms()).unwrap();
    check("least squares", m.bilinear(&x, &x).unwrap(), gls);

    let vel = integrate_cells(s, |n, tau, c, xi| {
        (ev(&fl.u2, n, tau, c, xi).value - ev(&fl.u1, n, tau, c, xi).dt).powi(2)
    });
    let m = s.asm.assemble(&s.asm.velocity_terms()).unwrap();
    check("velocity", m.bilinear(&x, &x).unwrap(), vel);

    let dual = integrate_cells(s, |n, tau, c, xi| {
        let z1 = ev(&fl.z1, n, tau, c, xi);
        let z2 = ev(&fl.z2, n, tau, c, xi);
        z1.value.powi(2) + cells.c2[c] * (z1.grad[0].powi(2) + z1.grad[1].powi(2)) + z2.value.powi(2)
    });

    let constraint_vol = integrate_cells(s, |n, tau, c, xi| {
        let u1 = ev(&fl.u1, n, tau, c, xi);
        let u2 = ev(&fl.u2, n, tau, c, xi);
        let z1 = ev(&fl.z1, n, tau, c, xi);
        let z2 = ev(&fl.z2, n, tau, c, xi);
        u2.dt * z1.value
            + cells.c2[c] * (u1.grad[0] * z1.grad[0] + u1.grad[1] * z1.grad[1])
            + (u1.dt - u2.value) * z2.value
    });

    // Facet and boundary integrals.
    let g = gauss_rule(8).unwrap();
    let dim = mesh.dim();
    let facet_pts = |axis: usize, side: f64| -> Vec<([f64; 2], f64)> {
        if dim == 1 {
            vec![([side, 0.0], 1.0)]
        } else {
            g.points
                .iter()
                .zip(&g.weights)
                .map(|(&s, &w)| {
                    let mut xi = [0.0; 2];
                    xi[axis] = side;
                    xi[1 - axis] = s;
                    (xi, w)
                })
                .collect()
        }
    };
    let (mut jump, mut bnd, mut bnd_dual, mut bnd_flux) = (0.0, 0.0, 0.0, 0.0);
    for n in 0..s.primal.n_slabs() {
        for (&tau, &wt) in g.points.iter().zip(&g.weights) {
            for f in mesh.interior_facets() {
                let a = f.normal_axis;
                let hf = 0.5 * (cells.h[f.minus] + cells.h[f.plus]);
                let meas = mesh.facet_measure(a, f.minus);
                for ((xm, w), (xp, _)) in facet_pts(a, 1.0).into_iter().zip(facet_pts(a, 0.0)) {
                    let gm = ev(&fl.u1, n, tau, f.minus, xm).grad[a] * cells.c2[f.minus];
                    let gp = ev(&fl.u1, n, tau, f.plus, xp).grad[a] * cells.c2[f.plus];
                    jump += dt * wt * meas * w * hf * (gp - gm).powi(2);
                }
            }
            for bf in mesh.boundary_facets() {
                let c = bf.cell;
                let side = if bf.outward > 0.0 { 1.0 } else { 0.0 };
                let meas = mesh.facet_measure(bf.normal_axis, c);
                for (xi, w) in facet_pts(bf.normal_axis, side) {
                    let u1 = ev(&fl.u1, n, tau, c, xi);
                    let z1 = ev(&fl.z1, n, tau, c, xi);
                    let wq = dt * wt * meas * w;
                    bnd += wq * u1.value.powi(2) / cells.h[c];
                    bnd_dual += wq * z1.value.powi(2) / cells.h[c];
                    bnd_flux += wq * cells.c2[c] * u1.grad[bf.normal_axis] * bf.outward * z1.value;
                }
            }
        }
    }
    let m = s.asm.assemble(&s.asm.flux_jump_terms()).unwrap();
    check("flux jump", m.bilinear(&x, &x).unwrap(), jump);
    let m = s.asm.assemble(&s.asm.boundary_terms()).unwrap();
    check("boundary", m.bilinear(&x, &x).unwrap(), bnd);
    check("dual", s.asm.assemble_dual_stabilizer().unwrap().bilinear(&x, &x).unwrap(), dual + bnd_dual);
    check(
        "constraint",
        s.asm.assemble_constraint().unwrap().bilinear(&x, &x).unwrap(),
        constraint_vol - bnd_flux,
    );

    // Time jumps at interior nodes.
    let mut tj = 0.0;
    for node in 1..s.primal.n_slabs() {
        for c in 0..mesh.n_cells() {
            let meas = mesh.cell_measure(c);
            let ys: Vec<(f64, f64)> =
                if dim == 2 { g.points.iter().copied().zip(g.weights.iter().copied()).collect() } else { vec![(0.0, 1.0)] };
            for (&x0, &wx) in g.points.iter().zip(&g.weights) {
                for &(y0, wy) in &ys {
                    let xi = [x0, y0];
                    let w = meas * wx * wy;
                    let r1 = ev(&fl.u1, node, 0.0, c, xi);
                    let l1 = ev(&fl.u1, node - 1, 1.0, c, xi);
                    let r2 = ev(&fl.u2, node, 0.0, c, xi);
                    let l2 = ev(&fl.u2, node - 1, 1.0, c, xi);
                    let jg = [r1.grad[0] - l1.grad[0], r1.grad[1] - l1.grad[1]];
                    tj += w
                        * ((r1.value - l1.value).powi(2) / dt
                            + dt * cells.c2[c].powi(2) * (jg[0].powi(2) + jg[1].powi(2))
                            + (r2.value - l2.value).powi(2) / dt);
                }
            }
        }
    }
    check("time jump", s.asm.assemble_time_jump_stabilizer().unwrap().bilinear(&x, &x).unwrap(), tj);

    // The full matrix under the (U, -Z) sign flip is the sum of the parts.
    let full = s.asm.assemble_matrix().unwrap();
    let l = &s.asm.layout;
    let mut y = x.clone();
    for f in [FieldLabel::Z1, FieldLabel::Z2] {
        let neg: Vec<f64> = l.extract(&x, f).iter().map(|v| -v).collect();
        l.insert(&mut y, f, &neg);
    }
    let sum = data + gls + vel + jump + bnd + tj + dual + bnd_dual;
    check("identity", full.bilinear(&y, &x).unwrap(), sum);
    let _ = dsp;
}

#[test]
fn forms_1d_linear_one_slab() {
    let s = setup(SpatialMesh::OneD(build_mesh_1d(0, &[]).unwrap()), 1, 1, 1, 1, 1, 0.5);
    check_all_forms(&s, 1);
}

#[test]
fn forms_1d_higher_order_several_slabs() {
    let s = setup(SpatialMesh::OneD(build_mesh_1d(1, &[]).unwrap()), 3, 2, 2, 1, 3, 0.6);
    check_all_forms(&s, 2);
}

#[test]
fn forms_1d_piecewise_constant_dual_in_time() {
    let s = setup(SpatialMesh::OneD(build_mesh_1d(1, &[]).unwrap()), 2, 2, 1, 0, 2, 0.3);
    check_all_forms(&s, 3);
}

#[test]
fn forms_2d() {
    let s = setup(SpatialMesh::TwoD(build_mesh_2d(1).unwrap()), 2, 1, 2, 1, 2, 0.4);
    check_all_forms(&s, 4);
}
