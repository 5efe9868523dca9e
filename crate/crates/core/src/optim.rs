//! Reduced cost, adjoint gradient and backtracking gradient descent.

use log::{debug, info};
use serde::{Deserialize, Serialize};

use crate::adjoint::run_adjoint;
use crate::error::{Error, Result};
use crate::fem1d::Discretization;
use crate::field::{Field, SpaceTimeField};
use crate::forward::{run_forward, PhysParams, StateTrajectory, TimeGrid};

/// Everything needed to evaluate `J(f)`.
#[derive(Debug, Clone)]
pub struct ControlProblem {
    pub disc: Discretization,
    pub phys: PhysParams,
    pub grid: TimeGrid,
    pub h0: Field,
    pub s0: Field,
    pub target: Field,
    /// 0 tracks the film thickness, 1 the free surface `h + s`.
    pub beta: f64,
    pub alpha: f64,
}

/// Relative tolerance for the `beta = 0` mass check.
pub const MASS_REACH_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub cost: f64,
    pub tracking: f64,
    pub penalty: f64,
    pub state: StateTrajectory,
}

impl ControlProblem {
    pub fn validate(&self) -> Result<()> {
        self.phys.validate()?;
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be > 0, got {}",
                self.alpha
            )));
        }
        if self.beta != 0.0 && self.beta != 1.0 {
            return Err(Error::InvalidParameter(format!(
                "beta must be 0 or 1, got {}",
                self.beta
            )));
        }
        self.disc.mesh.check_field("h0", &self.h0)?;
        self.disc.mesh.check_field("s0", &self.s0)?;
        self.disc.mesh.check_field("target", &self.target)?;
        Ok(())
    }

    pub fn zero_control(&self) -> SpaceTimeField {
        SpaceTimeField::zeros(self.grid.n_levels(), self.disc.n_nodes())
    }

    /// `Σ_{k=1..N} dt a_kᵀ M b_k`; level 0 is excluded.
    pub fn inner(&self, a: &SpaceTimeField, b: &SpaceTimeField) -> f64 {
        let dt = self.grid.dt();
        (1..a.n_levels())
            .map(|k| dt * self.disc.inner(a.row(k), b.row(k)))
            .sum()
    }

    pub fn norm(&self, a: &SpaceTimeField) -> f64 {
        self.inner(a, a).max(0.0).sqrt()
    }

    /// With `beta = 0` the film mass cannot be changed by the control.
    pub fn mass_reachable(&self) -> bool {
        if self.beta != 0.0 {
            return true;
        }
        let m0 = self.disc.integral(&self.h0);
        let mt = self.disc.integral(&self.target);
        (m0 - mt).abs() <= MASS_REACH_TOL * m0.abs().max(1.0)
    }

    pub fn run_state(&self, f: &SpaceTimeField) -> Result<StateTrajectory> {
        run_forward(&self.disc, &self.phys, &self.grid, &self.h0, &self.s0, f)
    }

    pub fn cost_of_state(&self, f: &SpaceTimeField, state: &StateTrajectory) -> (f64, f64) {
        let e: Vec<f64> = state
            .observed(self.grid.n_steps, self.beta)
            .iter()
            .zip(self.target.iter())
            .map(|(o, t)| o - t)
            .collect();
        let tracking = 0.5 * self.disc.inner(&e, &e);
        let penalty = 0.5 * self.alpha * self.inner(f, f);
        (tracking, penalty)
    }

    pub fn evaluate(&self, f: &SpaceTimeField) -> Result<Evaluation> {
        let state = self.run_state(f)?;
        let (tracking, penalty) = self.cost_of_state(f, &state);
        Ok(Evaluation {
            cost: tracking + penalty,
            tracking,
            penalty,
            state,
        })
    }

    /// `max_k ‖(h + beta s)^k - h̄‖∞` over all levels.
    pub fn linf_error(&self, state: &StateTrajectory) -> f64 {
        (0..state.h.n_levels())
            .map(|k| self.level_linf_error(state, k))
            .fold(0.0, f64::max)
    }

    pub fn level_linf_error(&self, state: &StateTrajectory, k: usize) -> f64 {
        state
            .observed(k, self.beta)
            .iter()
            .zip(self.target.iter())
            .map(|(o, t)| (o - t).abs())
            .fold(0.0, f64::max)
    }
}

pub fn reduced_cost(problem: &ControlProblem, f: &SpaceTimeField) -> Result<f64> {
    Ok(problem.evaluate(f)?.cost)
}

/// `alpha f^k - r^k` for `k = 1..N`, with level 0 zero.
pub fn gradient_from_state(
    problem: &ControlProblem,
    f: &SpaceTimeField,
    state: &StateTrajectory,
) -> Result<SpaceTimeField> {
    let adj = run_adjoint(
        &problem.disc,
        &problem.phys,
        &problem.grid,
        state,
        &problem.target,
        problem.beta,
    )?;
    let mut g = f.scaled(problem.alpha).axpy(-1.0, &adj.r);
    g.row_mut(0).iter_mut().for_each(|v| *v = 0.0);
    Ok(g)
}

pub fn reduced_gradient(problem: &ControlProblem, f: &SpaceTimeField) -> Result<SpaceTimeField> {
    let state = problem.run_state(f)?;
    gradient_from_state(problem, f, &state)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescentSettings {
    pub tol: f64,
    pub k_max: usize,
    pub lambda0: f64,
    pub lambda_min: f64,
}

impl Default for DescentSettings {
    fn default() -> Self {
        DescentSettings {
            tol: 1e-4,
            k_max: 300,
            lambda0: 1.0,
            lambda_min: 1e-12,
        }
    }
}

impl DescentSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter("tol must be > 0".into()));
        }
        if self.k_max == 0 {
            return Err(Error::InvalidParameter("k_max must be >= 1".into()));
        }
        if !(self.lambda0 > 0.0) || !(self.lambda_min > 0.0) {
            return Err(Error::InvalidParameter("step sizes must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    IterationCap,
    LineSearchStalled,
    SolverFailure,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Termination::Converged => "converged",
            Termination::IterationCap => "iteration cap",
            Termination::LineSearchStalled => "line-search stalled",
            Termination::SolverFailure => "solver failure",
        })
    }
}

/// One row per accepted iterate, starting with the initial guess.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub cost: f64,
    pub grad_norm: f64,
    /// Step that produced this iterate; 0 for the initial guess.
    pub lambda: f64,
    /// `max_t ‖(h + beta s)(t) - h̄‖∞`.
    pub linf_err: f64,
    /// `‖(h + beta s)(T) - h̄‖∞`.
    pub terminal_linf_err: f64,
    /// Trial evaluations rejected before acceptance.
    pub rejected: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimReport {
    pub history: Vec<IterationRecord>,
    pub iterations: usize,
    pub termination: Termination,
    pub message: Option<String>,
    pub mass_reachable: bool,
}

impl OptimReport {
    pub fn costs(&self) -> Vec<f64> {
        self.history.iter().map(|r| r.cost).collect()
    }

    pub fn is_monotone(&self) -> bool {
        self.history.windows(2).all(|w| w[1].cost <= w[0].cost)
    }

    pub fn last(&self) -> &IterationRecord {
        self.history
            .last()
            .expect("history starts with the initial guess")
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("iter,J,grad_norm,lambda,linf_err\n");
        for r in &self.history {
            s.push_str(&format!(
                "{},{:e},{:e},{:e},{:e}\n",
                r.iter, r.cost, r.grad_norm, r.lambda, r.linf_err
            ));
        }
        s
    }
}

#[derive(Debug, Clone)]
pub struct DescentResult {
    pub control: SpaceTimeField,
    pub report: OptimReport,
    /// State of the returned control, if it could be computed.
    pub state: Option<StateTrajectory>,
}

fn has_positive_film(state: &StateTrajectory) -> bool {
    state.min_h.iter().all(|&m| m > 0.0)
}

/// Gradient descent with persistent step halving: once halved, `lambda` is never
/// increased again. Every accepted iterate satisfies `J(f^{k+1}) <= J(f^k)`;
/// trial controls whose forward solve fails or whose film thickness drops to
/// zero anywhere count as rejected.
pub fn gradient_descent(
    problem: &ControlProblem,
    settings: &DescentSettings,
    f0: Option<SpaceTimeField>,
) -> Result<DescentResult> {
    problem.validate()?;
    settings.validate()?;
    let mass_reachable = problem.mass_reachable();
    if !mass_reachable {
        log::warn!("target film mass differs from the initial mass; unreachable with beta = 0");
    }
    let mut f = f0.unwrap_or_else(|| problem.zero_control());
    let mut eval = problem.evaluate(&f)?;
    let mut grad = gradient_from_state(problem, &f, &eval.state)?;
    let mut grad_norm = problem.norm(&grad);
    let mut lambda = settings.lambda0;
    let mut history = vec![IterationRecord {
        iter: 0,
        cost: eval.cost,
        grad_norm,
        lambda: 0.0,
        linf_err: problem.linf_error(&eval.state),
        terminal_linf_err: problem.level_linf_error(&eval.state, problem.grid.n_steps),
        rejected: 0,
    }];
    let mut message = None;
    let mut k = 0;

    let termination = loop {
        if grad_norm <= settings.tol {
            break Termination::Converged;
        }
        if k >= settings.k_max {
            break Termination::IterationCap;
        }
        let mut rejected = 0;
        let accepted = loop {
            let trial = f.axpy(-lambda, &grad);
            match problem.evaluate(&trial) {
                Ok(e) if !has_positive_film(&e.state) => {
                    debug!("iter {k}: lambda {lambda:e} rejected, film thickness not positive")
                }
                Ok(e) if e.cost <= eval.cost => break Some((trial, e)),
                Ok(e) => debug!(
                    "iter {k}: lambda {lambda:e} rejected, J {:e} > {:e}",
                    e.cost, eval.cost
                ),
                Err(err) => debug!("iter {k}: lambda {lambda:e} rejected, solver: {err}"),
            }
            rejected += 1;
            lambda *= 0.5;
            if lambda < settings.lambda_min {
                break None;
            }
        };
        let Some((trial, e)) = accepted else {
            message = Some(format!("step size fell below {:e}", settings.lambda_min));
            break Termination::LineSearchStalled;
        };
        match gradient_from_state(problem, &trial, &e.state) {
            Ok(g) => {
                f = trial;
                eval = e;
                grad = g;
            }
            Err(err) => {
                message = Some(format!("adjoint failed at iteration {}: {err}", k + 1));
                break Termination::SolverFailure;
            }
        }
        grad_norm = problem.norm(&grad);
        k += 1;
        history.push(IterationRecord {
            iter: k,
            cost: eval.cost,
            grad_norm,
            lambda,
            linf_err: problem.linf_error(&eval.state),
            terminal_linf_err: problem.level_linf_error(&eval.state, problem.grid.n_steps),
            rejected,
        });
        debug!(
            "iter {k}: J = {:e}, |grad| = {grad_norm:e}, lambda = {lambda:e}",
            eval.cost
        );
    };
    info!(
        "descent finished after {k} iterations ({termination}): J = {:e}, |grad| = {grad_norm:e}",
        eval.cost
    );
    Ok(DescentResult {
        control: f,
        report: OptimReport {
            history,
            iterations: k,
            termination,
            message,
            mass_reachable,
        },
        state: Some(eval.state),
    })
}
