//! Backward sweep for the multipliers `(p, q, r)` of the discrete forward scheme.
//!
//! Writing step `k` of the forward scheme as `A_k(h^{k-1}) x^k = b(h^{k-1}, s^{k-1}, f^k)`
//! with `x = (h, mu, s)`, the multipliers solve
//!
//! ```text
//! A_Nᵀ λ^N = (M e, 0, beta M e),                e = h̄ - (h + beta s)^N
//! A_kᵀ λ^k = -(∂G_{k+1}/∂x^k)ᵀ λ^{k+1},         k = N-1, ..., 1
//! ```
//!
//! where the old-level derivative of step `k+1` contributes
//!
//! ```text
//! h-slot:  M p^{k+1} - dt Ĉ((h^k)^2 mu_x^{k+1})ᵀ p^{k+1} + M̂(phi''_-(h^k)) q^{k+1}
//! s-slot:  M r^{k+1}
//! ```
//!
//! so that `alpha f^k - r^k` is the gradient of the discrete reduced cost in the
//! `dt`-weighted `M` inner product. Level 0 of the returned trajectory is unused
//! and left at zero.

use crate::error::{Error, Result};
use crate::fem1d::{convection_with, mass_with, Discretization};
use crate::field::{Field, SpaceTimeField};
use crate::forward::{
    deinterleave, interleave, step_matrix, PhysParams, StateTrajectory, TimeGrid,
};

#[derive(Debug, Clone)]
pub struct AdjointTrajectory {
    pub p: SpaceTimeField,
    pub q: SpaceTimeField,
    pub r: SpaceTimeField,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdjointLevel {
    pub p: Field,
    pub q: Field,
    pub r: Field,
}

/// Terminal multipliers from the tracking mismatch at `T`.
pub fn terminal_solve(
    disc: &Discretization,
    phys: &PhysParams,
    grid: &TimeGrid,
    state: &StateTrajectory,
    target: &Field,
    beta: f64,
) -> Result<AdjointLevel> {
    disc.mesh.check_field("target", target)?;
    let nsteps = grid.n_steps;
    let observed = state.observed(nsteps, beta);
    let mismatch: Vec<f64> = target
        .iter()
        .zip(observed.iter())
        .map(|(t, o)| t - o)
        .collect();
    terminal_solve_with(
        disc,
        phys,
        grid.dt(),
        state.h.row(nsteps - 1),
        &mismatch,
        beta,
    )
}

/// Terminal system for an explicit mismatch `e = h̄ - (h + beta s)^N`.
pub fn terminal_solve_with(
    disc: &Discretization,
    phys: &PhysParams,
    dt: f64,
    h_before_last: &[f64],
    mismatch: &[f64],
    beta: f64,
) -> Result<AdjointLevel> {
    let me = disc.mass.matvec(mismatch);
    let ms: Vec<f64> = me.iter().map(|v| beta * v).collect();
    let rhs = interleave(&me, &vec![0.0; me.len()], &ms);
    let sys = step_matrix(disc, phys, dt, h_before_last).transpose();
    let x = sys.solve(&rhs)?;
    let (p, q, r) = deinterleave(&x);
    Ok(AdjointLevel {
        p: p.into(),
        q: q.into(),
        r: r.into(),
    })
}

/// Right side of the backward step producing level `k`, from level `k+1`.
pub fn back_step_rhs(
    disc: &Discretization,
    phys: &PhysParams,
    dt: f64,
    h_k: &[f64],
    mu_k1: &[f64],
    next: (&[f64], &[f64], &[f64]),
) -> Vec<f64> {
    let (p1, q1, r1) = next;
    let mesh = &disc.mesh;
    let mut bh = disc.mass.matvec(p1);

    // transport: Ĉ with weight h^2 mu_x
    let mu_x = mesh.element_gradient(mu_k1);
    let w = mesh.interpolate(h_k).map(|v| v * v).scale_elements(&mu_x);
    let ct_p = convection_with(mesh, &w).transpose().matvec(p1);
    for (b, c) in bh.iter_mut().zip(&ct_p) {
        *b -= dt * c;
    }

    let pot = &phys.potential;
    if pot.is_active() {
        let w2 = mesh.interpolate(h_k).map(|v| pot.phi_double_prime_minus(v));
        let mq = mass_with(mesh, &w2).matvec(q1);
        for (b, c) in bh.iter_mut().zip(&mq) {
            *b += c;
        }
    }
    let bs = disc.mass.matvec(r1);
    interleave(&bh, &vec![0.0; bh.len()], &bs)
}

/// One backward step: solves `A_kᵀ λ^k = rhs`, with `A_k` built from `h^{k-1}`.
#[allow(clippy::too_many_arguments)]
pub fn imex_back_step(
    disc: &Discretization,
    phys: &PhysParams,
    dt: f64,
    h_km1: &[f64],
    h_k: &[f64],
    mu_k1: &[f64],
    next: &AdjointLevel,
) -> Result<AdjointLevel> {
    let rhs = back_step_rhs(disc, phys, dt, h_k, mu_k1, (&next.p, &next.q, &next.r));
    let sys = step_matrix(disc, phys, dt, h_km1).transpose();
    let x = sys.solve(&rhs)?;
    let (p, q, r) = deinterleave(&x);
    Ok(AdjointLevel {
        p: p.into(),
        q: q.into(),
        r: r.into(),
    })
}

pub fn run_adjoint(
    disc: &Discretization,
    phys: &PhysParams,
    grid: &TimeGrid,
    state: &StateTrajectory,
    target: &Field,
    beta: f64,
) -> Result<AdjointTrajectory> {
    let n = disc.n_nodes();
    let levels = grid.n_levels();
    let nsteps = grid.n_steps;
    let dt = grid.dt();
    let mut out = AdjointTrajectory {
        p: SpaceTimeField::zeros(levels, n),
        q: SpaceTimeField::zeros(levels, n),
        r: SpaceTimeField::zeros(levels, n),
    };
    let mut level =
        terminal_solve(disc, phys, grid, state, target, beta).map_err(|e| e.at_step(nsteps))?;
    store(&mut out, nsteps, &level, nsteps)?;
    for k in (1..nsteps).rev() {
        level = imex_back_step(
            disc,
            phys,
            dt,
            state.h.row(k - 1),
            state.h.row(k),
            state.mu.row(k + 1),
            &level,
        )
        .map_err(|e| e.at_step(k))?;
        store(&mut out, k, &level, k)?;
    }
    Ok(out)
}

fn store(out: &mut AdjointTrajectory, k: usize, level: &AdjointLevel, step: usize) -> Result<()> {
    if !(level.p.is_finite() && level.q.is_finite() && level.r.is_finite()) {
        return Err(Error::BlowUp { step });
    }
    out.p.set_row(k, &level.p);
    out.q.set_row(k, &level.q);
    out.r.set_row(k, &level.r);
    Ok(())
}
