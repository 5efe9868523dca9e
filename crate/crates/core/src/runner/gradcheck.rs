//! Adjoint gradient against central finite differences.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::Result;
use crate::field::SpaceTimeField;
use crate::optim::{reduced_cost, reduced_gradient, ControlProblem};

pub const PASS_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Serialize)]
pub struct DirectionCheck {
    pub finite_difference: f64,
    pub adjoint: f64,
    pub rel_err: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GradCheckReport {
    pub delta: f64,
    pub directions: Vec<DirectionCheck>,
    pub max_rel_err: f64,
    pub passed: bool,
}

/// `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn relative_error(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Standard-normal directions on levels `1..=N`; level 0 stays zero.
pub fn random_directions(
    problem: &ControlProblem,
    n_dirs: usize,
    seed: u64,
) -> Vec<SpaceTimeField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (levels, nodes) = (problem.grid.n_levels(), problem.disc.n_nodes());
    (0..n_dirs)
        .map(|_| {
            let mut d = SpaceTimeField::zeros(levels, nodes);
            for k in 1..levels {
                for v in d.row_mut(k) {
                    *v = StandardNormal.sample(&mut rng);
                }
            }
            d
        })
        .collect()
}

/// Compares `<grad J(f), d>` with `(J(f + delta d) - J(f - delta d)) / (2 delta)`.
pub fn grad_check(
    problem: &ControlProblem,
    f: &SpaceTimeField,
    directions: &[SpaceTimeField],
    delta: f64,
) -> Result<GradCheckReport> {
    let grad = reduced_gradient(problem, f)?;
    let mut checks = Vec::with_capacity(directions.len());
    for d in directions {
        let plus = reduced_cost(problem, &f.axpy(delta, d))?;
        let minus = reduced_cost(problem, &f.axpy(-delta, d))?;
        let fd = (plus - minus) / (2.0 * delta);
        let adj = problem.inner(&grad, d);
        checks.push(DirectionCheck {
            finite_difference: fd,
            adjoint: adj,
            rel_err: relative_error(fd, adj),
        });
    }
    let max_rel_err = checks.iter().map(|c| c.rel_err).fold(0.0, f64::max);
    Ok(GradCheckReport {
        delta,
        directions: checks,
        max_rel_err,
        passed: max_rel_err < PASS_TOL,
    })
}

/// Runs [`grad_check`] for each step size in `deltas` with shared directions.
pub fn delta_sweep(
    problem: &ControlProblem,
    f: &SpaceTimeField,
    directions: &[SpaceTimeField],
    deltas: &[f64],
) -> Result<Vec<GradCheckReport>> {
    deltas
        .iter()
        .map(|&d| grad_check(problem, f, directions, d))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_error_is_symmetric_and_bounded() {
        assert_eq!(relative_error(0.0, 0.0), 0.0);
        assert_eq!(relative_error(1.0, -1.0), 2.0);
        assert_eq!(relative_error(2.0, 1.0), relative_error(1.0, 2.0));
    }
}
