//! Discrete free energy and the dissipation-balance diagnostic.
//!
//! ```text
//! E(h, s) = ∫ phi(h) - Bo/(2Ca) h^2 + 1/(2Ca) h_x^2 + c^2/(2 gamma) s_x^2
//!             + 1/Ca (h_x s_x - Bo h s) dx
//! dE/dt   = -(1/3)∫ h^3 mu_x^2 - (1/gamma)∫ s_t^2 + (1/gamma)∫ f s_t
//! ```
//!
//! Everything here requires `gamma > 0`.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fem1d::{Discretization, Mesh, GAUSS_WEIGHTS};
use crate::field::{Field, SpaceTimeField};
use crate::forward::{PhysParams, StateTrajectory, TimeGrid};

fn require_damping(phys: &PhysParams) -> Result<()> {
    if phys.gamma > 0.0 {
        Ok(())
    } else {
        Err(Error::Unsupported(format!(
            "free energy needs gamma > 0 (got {}); the elastic term scales with 1/gamma",
            phys.gamma
        )))
    }
}

pub fn free_energy(h: &Field, s: &Field, phys: &PhysParams, mesh: &Mesh) -> Result<f64> {
    require_damping(phys)?;
    mesh.check_field("h", h)?;
    mesh.check_field("s", s)?;
    Ok(energy_density_integral(mesh, phys, h, s))
}

pub(crate) fn free_energy_raw(
    disc: &Discretization,
    phys: &PhysParams,
    h: &[f64],
    s: &[f64],
) -> Result<f64> {
    require_damping(phys)?;
    Ok(energy_density_integral(&disc.mesh, phys, h, s))
}

fn energy_density_integral(mesh: &Mesh, phys: &PhysParams, h: &[f64], s: &[f64]) -> f64 {
    let hq = mesh.interpolate(h);
    let sq = mesh.interpolate(s);
    let hx = mesh.element_gradient(h);
    let sx = mesh.element_gradient(s);
    let (ca, bo, c, gamma) = (phys.ca, phys.bo, phys.c, phys.gamma);
    let pot = &phys.potential;
    let dx = mesh.dx();
    let mut total = 0.0;
    for e in 0..mesh.n_elements() {
        let grad =
            0.5 / ca * hx[e] * hx[e] + 0.5 * c * c / gamma * sx[e] * sx[e] + hx[e] * sx[e] / ca;
        let mut local = 0.0;
        for q in 0..3 {
            let (hv, sv) = (hq.0[e][q], sq.0[e][q]);
            let dens = pot.phi(hv) - 0.5 * bo / ca * hv * hv - bo / ca * hv * sv + grad;
            local += GAUSS_WEIGHTS[q] * dens;
        }
        total += local * dx;
    }
    total
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergyRow {
    pub step: usize,
    pub t: f64,
    pub energy: f64,
    pub d_fluid: f64,
    pub d_sub: f64,
    pub work: f64,
    /// `(E^k - E^{k-1})/dt + D_fluid + D_sub - W`; zero on row 0.
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergyReport {
    pub rows: Vec<EnergyRow>,
}

impl EnergyReport {
    pub fn energies(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.energy).collect()
    }

    pub fn max_abs_residual(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.residual.abs())
            .fold(0.0, f64::max)
    }

    /// Largest per-step increase `E^k - E^{k-1}` relative to `1 + |E^{k-1}|`.
    pub fn worst_relative_increase(&self) -> f64 {
        self.rows
            .windows(2)
            .map(|w| (w[1].energy - w[0].energy) / (1.0 + w[0].energy.abs()))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("step,t,E,D_fluid,D_sub,W,residual\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:e},{:e},{:e},{:e},{:e},{:e}\n",
                r.step, r.t, r.energy, r.d_fluid, r.d_sub, r.work, r.residual
            ));
        }
        std::fs::File::create(path)
            .and_then(|mut f| f.write_all(out.as_bytes()))
            .map_err(|e| Error::io(path, e))
    }
}

/// Per-step energy change against dissipation and work. Dissipation uses the
/// scheme's weighting: mobility from `h^{k-1}`, `mu_x` from `mu^k`,
/// `s_t = (s^k - s^{k-1})/dt`, force `f^k`.
pub fn dissipation_balance(
    traj: &StateTrajectory,
    f: &SpaceTimeField,
    phys: &PhysParams,
    grid: &TimeGrid,
    disc: &Discretization,
) -> Result<EnergyReport> {
    require_damping(phys)?;
    let mesh = &disc.mesh;
    let dt = grid.dt();
    let n = disc.n_nodes();
    let levels = traj.h.n_levels();
    let energies: Vec<f64> = match &traj.energy {
        Some(e) => e.clone(),
        None => (0..levels)
            .map(|k| energy_density_integral(mesh, phys, traj.h.row(k), traj.s.row(k)))
            .collect(),
    };
    let mut rows = Vec::with_capacity(levels);
    rows.push(EnergyRow {
        step: 0,
        t: 0.0,
        energy: energies[0],
        d_fluid: 0.0,
        d_sub: 0.0,
        work: 0.0,
        residual: 0.0,
    });
    for k in 1..levels {
        let mu_x = mesh.element_gradient(traj.mu.row(k));
        let h3 = mesh.interpolate(traj.h.row(k - 1)).map(|v| v * v * v);
        let mu_x2: Vec<f64> = mu_x.iter().map(|g| g * g).collect();
        let d_fluid = mesh.integrate(&h3.scale_elements(&mu_x2)) / 3.0;
        let st: Vec<f64> = (0..n)
            .map(|i| (traj.s.row(k)[i] - traj.s.row(k - 1)[i]) / dt)
            .collect();
        let d_sub = disc.inner(&st, &st) / phys.gamma;
        let work = disc.inner(f.row(k), &st) / phys.gamma;
        let rate = (energies[k] - energies[k - 1]) / dt;
        rows.push(EnergyRow {
            step: k,
            t: grid.time(k),
            energy: energies[k],
            d_fluid,
            d_sub,
            work,
            residual: rate + d_fluid + d_sub - work,
        });
    }
    Ok(EnergyReport { rows })
}
