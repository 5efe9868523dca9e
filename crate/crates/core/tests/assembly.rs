//! Weighted finite-element operators against brute-force fine quadrature.

#![allow(clippy::needless_range_loop)]

use proptest::prelude::*;
use thinfilm::fem1d::Discretization;
use thinfilm::fem1d::{
    assemble_load, assemble_weighted_convection, assemble_weighted_mass,
    assemble_weighted_stiffness, build_mesh, BandedMatrix, Mesh,
};
use thinfilm::forward::mobility_matrix;
use thinfilm::Field;

const SUBINTERVALS: usize = 10_000;

fn hat(mesh: &Mesh, i: usize, x: f64) -> f64 {
    let dx = mesh.dx();
    (1.0 - (x - mesh.node(i)).abs() / dx).max(0.0)
}

fn hat_slope(mesh: &Mesh, i: usize, x: f64) -> f64 {
    let xi = mesh.node(i);
    let dx = mesh.dx();
    if x > xi - dx && x < xi {
        1.0 / dx
    } else if x > xi && x < xi + dx {
        -1.0 / dx
    } else {
        0.0
    }
}

fn interp(mesh: &Mesh, u: &[f64], x: f64) -> f64 {
    (0..mesh.n_nodes()).map(|i| u[i] * hat(mesh, i, x)).sum()
}

/// Composite midpoint rule per element with Richardson extrapolation over
/// `SUBINTERVALS` and `2 * SUBINTERVALS` panels (exact for cubics).
fn midpoint(mesh: &Mesh, g: impl Fn(f64) -> f64) -> f64 {
    let rule = |panels: usize| {
        let mut total = 0.0;
        for e in 0..mesh.n_elements() {
            let (a, b) = (mesh.node(e), mesh.node(e + 1));
            let w = (b - a) / panels as f64;
            let mut local = 0.0;
            for p in 0..panels {
                local += g(a + (p as f64 + 0.5) * w);
            }
            total += local * w;
        }
        total
    };
    (4.0 * rule(2 * SUBINTERVALS) - rule(SUBINTERVALS)) / 3.0
}

#[derive(Clone, Copy)]
enum Kind {
    Mass,
    Stiffness,
    Convection,
}

fn brute(mesh: &Mesh, weight: impl Fn(f64) -> f64 + Copy, kind: Kind, i: usize, j: usize) -> f64 {
    midpoint(mesh, |x| {
        let w = weight(x);
        match kind {
            Kind::Mass => w * hat(mesh, i, x) * hat(mesh, j, x),
            Kind::Stiffness => w * hat_slope(mesh, i, x) * hat_slope(mesh, j, x),
            Kind::Convection => w * hat_slope(mesh, i, x) * hat(mesh, j, x),
        }
    })
}

fn compare(mesh: &Mesh, got: &BandedMatrix, weight: impl Fn(f64) -> f64 + Copy, kind: Kind) {
    let n = mesh.n_nodes();
    let scale = got.max_abs();
    for i in 0..n {
        for j in i.saturating_sub(1)..(i + 2).min(n) {
            let want = brute(mesh, weight, kind, i, j);
            let err = (got.get(i, j) - want).abs();
            assert!(
                err <= 1e-12 * scale,
                "({i},{j}) got {} want {want} err {err:e}",
                got.get(i, j)
            );
        }
    }
}

#[test]
fn hat_weight_on_three_nodes() {
    let mesh = build_mesh(2.0, 3).unwrap();
    let w = Field::new(vec![0.0, 1.0, 0.0]);
    let weight = |x: f64| interp(&mesh, &w, x);
    compare(
        &mesh,
        &assemble_weighted_mass(&mesh, &w),
        weight,
        Kind::Mass,
    );
    compare(
        &mesh,
        &assemble_weighted_stiffness(&mesh, &w),
        weight,
        Kind::Stiffness,
    );
    compare(
        &mesh,
        &assemble_weighted_convection(&mesh, &w),
        weight,
        Kind::Convection,
    );
    // closed forms for the hat weight: ∫ x^2 on [0,1] = 1/3 per side
    let k = assemble_weighted_stiffness(&mesh, &w);
    assert!((k.get(1, 1) - 1.0).abs() < 1e-14);
    assert!((k.get(0, 1) + 0.5).abs() < 1e-14);
}

#[test]
fn oscillating_weight_on_uneven_length() {
    let mesh = build_mesh(3.7, 7).unwrap();
    let w = Field::from_fn(&mesh.nodes(), |x| 1.0 + 0.5 * (1.3 * x).sin());
    let weight = |x: f64| interp(&mesh, &w, x);
    compare(
        &mesh,
        &assemble_weighted_mass(&mesh, &w),
        weight,
        Kind::Mass,
    );
    compare(
        &mesh,
        &assemble_weighted_stiffness(&mesh, &w),
        weight,
        Kind::Stiffness,
    );
    compare(
        &mesh,
        &assemble_weighted_convection(&mesh, &w),
        weight,
        Kind::Convection,
    );
}

#[test]
fn cubic_mobility_uses_pointwise_cube() {
    let mesh = build_mesh(2.5, 6).unwrap();
    let h = Field::from_fn(&mesh.nodes(), |x| 1.0 + 0.4 * (2.0 * x).cos());
    let disc = Discretization::new(mesh.clone());
    let got = mobility_matrix(&disc, &h);
    compare(
        &mesh,
        &got,
        |x| interp(&mesh, &h, x).powi(3) / 3.0,
        Kind::Stiffness,
    );
}

#[test]
fn load_vector_matches_quadrature_of_polynomial() {
    let mesh = build_mesh(1.5, 5).unwrap();
    let g = |x: f64| x * x - 0.3 * x + 2.0;
    let load = assemble_load(&mesh, g);
    for i in 0..5 {
        let want = midpoint(&mesh, |x| g(x) * hat(&mesh, i, x));
        assert!((load[i] - want).abs() < 1e-12, "{i}");
    }
}

fn dense_quadratic(m: &BandedMatrix, x: &[f64]) -> f64 {
    m.matvec(x).iter().zip(x).map(|(a, b)| a * b).sum()
}

proptest! {
    #[test]
    fn weighted_operators_symmetric_and_definite(
        w in prop::collection::vec(0.01f64..5.0, 9),
        x in prop::collection::vec(-1.0f64..1.0, 9),
    ) {
        let mesh = build_mesh(2.0, 9).unwrap();
        let w = Field::new(w);
        let m = assemble_weighted_mass(&mesh, &w);
        let k = assemble_weighted_stiffness(&mesh, &w);
        prop_assert!(m.is_symmetric(1e-15));
        prop_assert!(k.is_symmetric(1e-15));
        let norm2: f64 = x.iter().map(|v| v * v).sum();
        prop_assert!(dense_quadratic(&m, &x) > 0.0 || norm2 == 0.0);
        prop_assert!(dense_quadratic(&k, &x) >= -1e-12);
        // constants are in the kernel of any weighted stiffness
        let ones = vec![1.0; 9];
        prop_assert!(k.matvec(&ones).iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn weighted_assembly_is_linear_in_weight(
        a in prop::collection::vec(-2.0f64..2.0, 7),
        b in prop::collection::vec(-2.0f64..2.0, 7),
        s in -3.0f64..3.0,
    ) {
        let mesh = build_mesh(1.0, 7).unwrap();
        let combo = Field::new(a.iter().zip(&b).map(|(x, y)| x + s * y).collect());
        let (a, b) = (Field::new(a), Field::new(b));
        for op in [assemble_weighted_mass, assemble_weighted_stiffness, assemble_weighted_convection] {
            let mut lhs = op(&mesh, &a);
            lhs.add_scaled(s, &op(&mesh, &b));
            let rhs = op(&mesh, &combo);
            for (i, j, v) in rhs.entries() {
                prop_assert!((lhs.get(i, j) - v).abs() < 1e-12 * (1.0 + v.abs()));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn convection_rows_integrate_basis_slope(w in prop::collection::vec(0.1f64..2.0, 6)) {
        // Σ_j C_ij = ∫ w φ_i'
        let mesh = build_mesh(3.0, 6).unwrap();
        let w = Field::new(w);
        let c = assemble_weighted_convection(&mesh, &w);
        let sums = c.matvec(&[1.0; 6]);
        for i in 0..6 {
            let want = midpoint(&mesh, |x| interp(&mesh, &w, x) * hat_slope(&mesh, i, x));
            prop_assert!((sums[i] - want).abs() < 1e-11);
        }
    }
}
