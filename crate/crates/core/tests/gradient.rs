//! Adjoint gradient against central finite differences.

mod common;

use common::*;
use thinfilm::optim::{reduced_cost, reduced_gradient};
use thinfilm::runner::gradcheck::{delta_sweep, grad_check, random_directions};

#[test]
fn twenty_random_directions_all_variants() {
    for hamaker in [0.0, 0.03] {
        for beta in [0.0, 1.0] {
            let p = small_problem(16, 8, hamaker, beta, 0.0);
            let f = wavy_control(9, 16, 0.1);
            let dirs = random_directions(&p, 20, 7);
            let report = grad_check(&p, &f, &dirs, 1e-5).unwrap();
            assert!(
                report.passed,
                "A={hamaker} beta={beta}: {:e}",
                report.max_rel_err
            );
            assert!(
                report.max_rel_err < 1e-5,
                "A={hamaker} beta={beta}: {:e}",
                report.max_rel_err
            );
        }
    }
}

#[test]
fn damped_substrate_variant() {
    let p = small_problem(16, 8, 0.03, 1.0, 0.1);
    let dirs = random_directions(&p, 5, 11);
    let report = grad_check(&p, &p.zero_control(), &dirs, 1e-5).unwrap();
    assert!(report.passed, "{:e}", report.max_rel_err);
}

#[test]
fn reachable_target_gives_zero_gradient_both_ways() {
    let mut p = small_problem(12, 6, 0.03, 1.0, 0.0);
    let f = p.zero_control();
    let state = p.run_state(&f).unwrap();
    p.target = state.observed(6, 1.0);
    let grad = reduced_gradient(&p, &f).unwrap();
    assert_eq!(grad.max_abs(), 0.0);
    let dirs = random_directions(&p, 3, 1);
    for d in &dirs {
        // the cost is quadratic-bottomed here, so central differences vanish to O(delta)
        let delta = 1e-6;
        let fd = (reduced_cost(&p, &f.axpy(delta, d)).unwrap()
            - reduced_cost(&p, &f.axpy(-delta, d)).unwrap())
            / (2.0 * delta);
        assert!(fd.abs() < 1e-9, "{fd:e}");
    }
}

#[test]
fn directions_are_reproducible_and_skip_level_zero() {
    let p = small_problem(8, 4, 0.0, 1.0, 0.0);
    let a = random_directions(&p, 3, 42);
    let b = random_directions(&p, 3, 42);
    let c = random_directions(&p, 3, 43);
    assert_eq!(a.len(), 3);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.as_slice(), y.as_slice());
        assert!(x.row(0).iter().all(|&v| v == 0.0));
    }
    assert_ne!(a[0].as_slice(), c[0].as_slice());
}

#[test]
fn delta_sweep_shows_truncation_and_roundoff() {
    let p = small_problem(16, 8, 0.0, 1.0, 0.0);
    let f = wavy_control(9, 16, 0.1);
    let dirs = random_directions(&p, 4, 3);
    let deltas = [1e-1, 1e-5, 1e-11];
    let errs: Vec<f64> = delta_sweep(&p, &f, &dirs, &deltas)
        .unwrap()
        .iter()
        .map(|r| r.max_rel_err)
        .collect();
    // V shape: the middle step beats both extremes
    assert!(errs[1] < errs[0] && errs[1] < errs[2], "{errs:?}");
}
