//! First-order IMEX time stepping of the coupled film/substrate system.
//!
//! Per step, with `H = h + s`, `a = A/eps^4`, `b = Bo/Ca`, `k = 1/Ca`, `g = gamma/Ca`:
//!
//! ```text
//! M h' + (dt/3) K̂(h^3) mu'                         = M h
//! M mu' - a M h' + b M (h' + s') - k K (h' + s')   = (phi'_-(h), φ_i)
//! (M + dt c^2 K) s' + dt g (K - Bo M) h'           = M s + dt M f'
//! ```
//!
//! The mobility `K̂` and the concave load use the old level `h`; everything
//! else is implicit. Unknowns are interleaved per node as `(h_i, mu_i, s_i)`,
//! which gives a band of half-width 5.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::energy;
use crate::error::{Error, Result};
use crate::fem1d::{assemble_load_quad, stiffness_with, BandedMatrix, Discretization};
use crate::field::{Field, SpaceTimeField};
use crate::potential::PotentialParams;

pub const VARS: usize = 3;
pub const H: usize = 0;
pub const MU: usize = 1;
pub const S: usize = 2;
pub const COUPLED_HALF_BANDWIDTH: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysParams {
    /// Capillary number.
    pub ca: f64,
    /// Bond number.
    pub bo: f64,
    /// Topography tension.
    pub c: f64,
    /// Film damping.
    pub gamma: f64,
    pub potential: PotentialParams,
}

impl PhysParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.ca.is_finite() && self.ca > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Ca must be > 0, got {}",
                self.ca
            )));
        }
        if !self.bo.is_finite() {
            return Err(Error::InvalidParameter("Bo must be finite".into()));
        }
        if !(self.c.is_finite() && self.c >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "c must be >= 0, got {}",
                self.c
            )));
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "gamma must be >= 0, got {}",
                self.gamma
            )));
        }
        self.potential.validate()
    }
}

impl Default for PhysParams {
    fn default() -> Self {
        PhysParams {
            ca: 1.0,
            bo: 1.0,
            c: 0.1,
            gamma: 0.0,
            potential: PotentialParams::disabled(),
        }
    }
}

/// Uniform time levels `t_k = k T / N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_final: f64,
    pub n_steps: usize,
}

impl TimeGrid {
    pub fn new(t_final: f64, n_steps: usize) -> Result<Self> {
        if !(t_final.is_finite() && t_final > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "T must be > 0, got {t_final}"
            )));
        }
        if n_steps == 0 {
            return Err(Error::InvalidParameter("n_steps must be >= 1".into()));
        }
        Ok(TimeGrid { t_final, n_steps })
    }

    /// Grid with step closest to `dt` that divides `t_final` evenly.
    pub fn with_step(t_final: f64, dt: f64) -> Result<Self> {
        let n = (t_final / dt).round().max(1.0) as usize;
        Self::new(t_final, n)
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.n_steps as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.n_steps {
            self.t_final
        } else {
            k as f64 * self.dt()
        }
    }

    pub fn n_levels(&self) -> usize {
        self.n_steps + 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub h: Field,
    pub mu: Field,
    pub s: Field,
}

/// Stored forward solution on all time levels.
#[derive(Debug, Clone)]
pub struct StateTrajectory {
    pub h: SpaceTimeField,
    /// Level 0 holds the chemical potential consistent with `(h0, s0)`.
    pub mu: SpaceTimeField,
    pub s: SpaceTimeField,
    pub min_h: Vec<f64>,
    /// `1ᵀ M h^k`.
    pub mass: Vec<f64>,
    /// Free energy per level, only when `gamma > 0`.
    pub energy: Option<Vec<f64>>,
}

impl StateTrajectory {
    pub fn n_steps(&self) -> usize {
        self.h.n_levels() - 1
    }

    /// `h + beta s` at level `k`.
    pub fn observed(&self, k: usize, beta: f64) -> Field {
        Field::new(
            self.h
                .row(k)
                .iter()
                .zip(self.s.row(k))
                .map(|(h, s)| h + beta * s)
                .collect(),
        )
    }

    pub fn max_relative_mass_drift(&self) -> f64 {
        let m0 = self.mass[0];
        let scale = m0.abs().max(f64::MIN_POSITIVE);
        self.mass
            .iter()
            .map(|m| (m - m0).abs() / scale)
            .fold(0.0, f64::max)
    }
}

#[inline]
pub fn dof(node: usize, var: usize) -> usize {
    VARS * node + var
}

/// Adds `scale * block` into the `(row_var, col_var)` block of a coupled matrix.
pub(crate) fn add_block(
    target: &mut BandedMatrix,
    row_var: usize,
    col_var: usize,
    scale: f64,
    block: &BandedMatrix,
) {
    for (i, j, v) in block.entries() {
        if v != 0.0 {
            target.add(dof(i, row_var), dof(j, col_var), scale * v);
        }
    }
}

pub(crate) fn interleave(h: &[f64], mu: &[f64], s: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(3 * h.len());
    for i in 0..h.len() {
        out.extend_from_slice(&[h[i], mu[i], s[i]]);
    }
    out
}

pub(crate) fn deinterleave(x: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = x.len() / VARS;
    let mut parts = (
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    );
    for c in x.chunks_exact(VARS) {
        parts.0.push(c[H]);
        parts.1.push(c[MU]);
        parts.2.push(c[S]);
    }
    parts
}

/// Film mobility `(1/3)∫ h^3 φ_i' φ_j'` with `h` interpolated at quadrature points.
pub fn mobility_matrix(disc: &Discretization, h: &[f64]) -> BandedMatrix {
    let w = disc.mesh.interpolate(h).map(|v| v * v * v);
    stiffness_with(&disc.mesh, &w).scaled(1.0 / 3.0)
}

/// Explicit concave load `(phi'_-(h), φ_i)`.
pub fn concave_load(disc: &Discretization, pot: &PotentialParams, h: &[f64]) -> Field {
    if !pot.is_active() {
        return Field::zeros(disc.n_nodes());
    }
    let g = disc.mesh.interpolate(h).map(|v| pot.phi_prime_minus(v));
    assemble_load_quad(&disc.mesh, &g)
}

/// Coupled step matrix for the step leaving a level with film thickness `h_old`.
pub fn step_matrix(
    disc: &Discretization,
    phys: &PhysParams,
    dt: f64,
    h_old: &[f64],
) -> BandedMatrix {
    let n = disc.n_nodes();
    let m = &disc.mass;
    let k = &disc.stiffness;
    let a = phys.potential.convex_coefficient();
    let b = phys.bo / phys.ca;
    let kap = 1.0 / phys.ca;
    let g = phys.gamma / phys.ca;

    let mut sys = BandedMatrix::zeros(VARS * n, COUPLED_HALF_BANDWIDTH);
    // h-row
    add_block(&mut sys, H, H, 1.0, m);
    add_block(&mut sys, H, MU, dt, &mobility_matrix(disc, h_old));
    // mu-row
    add_block(&mut sys, MU, MU, 1.0, m);
    add_block(&mut sys, MU, H, b - a, m);
    add_block(&mut sys, MU, H, -kap, k);
    add_block(&mut sys, MU, S, b, m);
    add_block(&mut sys, MU, S, -kap, k);
    // s-row
    add_block(&mut sys, S, S, 1.0, m);
    add_block(&mut sys, S, S, dt * phys.c * phys.c, k);
    if g != 0.0 {
        add_block(&mut sys, S, H, dt * g, k);
        add_block(&mut sys, S, H, -dt * g * phys.bo, m);
    }
    sys
}

fn step_rhs(
    disc: &Discretization,
    phys: &PhysParams,
    dt: f64,
    h_old: &[f64],
    s_old: &[f64],
    f_new: &[f64],
) -> Vec<f64> {
    let mh = disc.mass.matvec(h_old);
    let load = concave_load(disc, &phys.potential, h_old);
    let forced: Vec<f64> = s_old.iter().zip(f_new).map(|(s, f)| s + dt * f).collect();
    let ms = disc.mass.matvec(&forced);
    interleave(&mh, &load, &ms)
}

/// One IMEX step `(h^k, s^k, f^{k+1}) -> (h, mu, s)^{k+1}`.
pub fn imex_step(
    disc: &Discretization,
    phys: &PhysParams,
    dt: f64,
    h_old: &Field,
    s_old: &Field,
    f_new: &Field,
) -> Result<StepOutput> {
    let n = disc.n_nodes();
    disc.mesh.check_field("h", h_old)?;
    disc.mesh.check_field("s", s_old)?;
    disc.mesh.check_field("f", f_new)?;
    let sys = step_matrix(disc, phys, dt, h_old);
    let rhs = step_rhs(disc, phys, dt, h_old, s_old, f_new);
    let x = sys.solve(&rhs)?;
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::BlowUp { step: 0 });
    }
    let (h, mu, s) = deinterleave(&x);
    debug_assert_eq!(h.len(), n);
    Ok(StepOutput {
        h: h.into(),
        mu: mu.into(),
        s: s.into(),
    })
}

/// Chemical potential consistent with `(h, s)` at one level: the mu-row with the
/// full `phi'` evaluated at `h`.
pub fn consistent_mu(
    disc: &Discretization,
    phys: &PhysParams,
    h: &[f64],
    s: &[f64],
) -> Result<Field> {
    let b = phys.bo / phys.ca;
    let kap = 1.0 / phys.ca;
    let total: Vec<f64> = h.iter().zip(s).map(|(h, s)| h + s).collect();
    let mh = disc.mass.matvec(&total);
    let kh = disc.stiffness.matvec(&total);
    let pot = &phys.potential;
    let phi = if pot.is_active() {
        assemble_load_quad(
            &disc.mesh,
            &disc.mesh.interpolate(h).map(|v| pot.phi_prime(v)),
        )
    } else {
        Field::zeros(h.len())
    };
    let rhs: Vec<f64> = (0..h.len())
        .map(|i| phi[i] - b * mh[i] + kap * kh[i])
        .collect();
    Ok(disc.mass.solve(&rhs)?.into())
}

/// Runs the forward scheme over all steps. `f` row `k` is the force applied on
/// the step ending at level `k`; row 0 is ignored.
pub fn run_forward(
    disc: &Discretization,
    phys: &PhysParams,
    grid: &TimeGrid,
    h0: &Field,
    s0: &Field,
    f: &SpaceTimeField,
) -> Result<StateTrajectory> {
    phys.validate()?;
    let n = disc.n_nodes();
    disc.mesh.check_field("h0", h0)?;
    disc.mesh.check_field("s0", s0)?;
    if f.n_levels() != grid.n_levels() || f.n_nodes() != n {
        return Err(Error::ShapeMismatch {
            what: "control levels",
            expected: grid.n_levels(),
            found: f.n_levels(),
        });
    }
    let levels = grid.n_levels();
    let dt = grid.dt();
    let mut traj = StateTrajectory {
        h: SpaceTimeField::zeros(levels, n),
        mu: SpaceTimeField::zeros(levels, n),
        s: SpaceTimeField::zeros(levels, n),
        min_h: Vec::with_capacity(levels),
        mass: Vec::with_capacity(levels),
        energy: (phys.gamma > 0.0).then(|| Vec::with_capacity(levels)),
    };
    traj.h.set_row(0, h0);
    traj.s.set_row(0, s0);
    traj.mu.set_row(0, &consistent_mu(disc, phys, h0, s0)?);
    record_diagnostics(disc, phys, &mut traj, 0)?;

    for k in 0..grid.n_steps {
        let h_old = traj.h.row(k);
        let s_old = traj.s.row(k);
        let sys = step_matrix(disc, phys, dt, h_old);
        let rhs = step_rhs(disc, phys, dt, h_old, s_old, f.row(k + 1));
        let x = sys.solve(&rhs).map_err(|e| e.at_step(k + 1))?;
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::BlowUp { step: k + 1 });
        }
        let (h, mu, s) = deinterleave(&x);
        traj.h.set_row(k + 1, &h);
        traj.mu.set_row(k + 1, &mu);
        traj.s.set_row(k + 1, &s);
        record_diagnostics(disc, phys, &mut traj, k + 1)?;
    }
    Ok(traj)
}

fn record_diagnostics(
    disc: &Discretization,
    phys: &PhysParams,
    traj: &mut StateTrajectory,
    k: usize,
) -> Result<()> {
    let h = traj.h.row(k);
    traj.min_h
        .push(h.iter().copied().fold(f64::INFINITY, f64::min));
    traj.mass.push(disc.integral(h));
    if let Some(e) = traj.energy.as_mut() {
        e.push(energy::free_energy_raw(disc, phys, h, traj.s.row(k))?);
    }
    Ok(())
}

/// Outcome of an uncontrolled run used as a target.
#[derive(Debug, Clone)]
pub struct SteadyTarget {
    pub target: Field,
    /// `‖h^N - h^{N-1}‖∞ / dt`.
    pub rate: f64,
    pub steady: bool,
    pub final_h: Field,
    pub final_s: Field,
}

pub const STEADY_RATE_TOL: f64 = 1e-6;

/// `(h + beta s)(T)` of an uncontrolled run. Warns (does not fail) when the
/// final rate of change exceeds [`STEADY_RATE_TOL`].
pub fn make_target_steady(
    disc: &Discretization,
    phys: &PhysParams,
    grid: &TimeGrid,
    h0: &Field,
    s0: &Field,
    beta: f64,
) -> Result<SteadyTarget> {
    let f = SpaceTimeField::zeros(grid.n_levels(), disc.n_nodes());
    let traj = run_forward(disc, phys, grid, h0, s0, &f)?;
    let nlev = grid.n_steps;
    let rate = traj
        .h
        .row(nlev)
        .iter()
        .zip(traj.h.row(nlev - usize::from(nlev > 0)))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
        / grid.dt();
    let steady = rate < STEADY_RATE_TOL;
    if !steady {
        warn!(
            "uncontrolled run not steady at T = {}: |dh/dt| = {rate:.3e}",
            grid.t_final
        );
    }
    Ok(SteadyTarget {
        target: traj.observed(nlev, beta),
        rate,
        steady,
        final_h: traj.h.field(nlev),
        final_s: traj.s.field(nlev),
    })
}
