//! Built-in experiment catalog and scenario preparation.

use std::path::Path;

use log::info;

use super::config::{parse_str, FilmProfile, Scenario, SubstrateProfile, TargetSpec};
use super::output::read_field;
use crate::error::{Error, Result};
use crate::fem1d::{build_mesh, Discretization};
use crate::field::Field;
use crate::forward::{make_target_steady, TimeGrid};
use crate::optim::ControlProblem;

const HAMMOND: &str = "\
# Accelerate the flat-substrate film to its late-time steady state.
name = hammond
L = 3*pi
n_nodes = 250
T = 5
n_steps = 100
beta = 1
target = steady(900)
[ic]
h_amplitude = 0.5
mode = 1
";

const GIVEN_TOPOGRAPHY: &str = "\
# Flat film over a tanh-shaped substrate trench.
name = given-topography
L = 3*pi
n_nodes = 250
T = 5
n_steps = 100
beta = 1
target = steady(900)
[ic]
h_amplitude = 0
substrate = tanh(-0.25, -0.35*L, 0.65*L, -0.2)
";

const WAVE_TARGET: &str = "\
# Drive a flat film to a prescribed wave in short time.
name = wave-target
L = 5
n_nodes = 250
T = 1
n_steps = 20
beta = 1
target = wave(0.2, 2)
[ic]
h_amplitude = 0
";

const JENSEN_FLATTEN: &str = "\
# Flatten a tall Gaussian drop without gravity.
name = jensen-flatten
L = 10
n_nodes = 250
T = 5
n_steps = 100
Bo = 0
beta = 1
target = flat(1)
[ic]
film = gauss(10, 2)
";

const HOLD_LINEAR_STATE: &str = "\
# Hold an unstable cosine state in place.
name = hold-linear-state
L = 15*pi/2
n_nodes = 250
T = 10
n_steps = 200
beta = 1
target = wave(0.5, 3)
[ic]
h_amplitude = 0.5
mode = 3
";

const RUPTURE_ACCELERATE: &str = "\
# Reach the ruptured state with disjoining pressure in a short horizon.
name = rupture-accelerate
L = 3*pi
n_nodes = 250
T = 30
n_steps = 600
A = 0.03
eps = 0.1
beta = 0
lambda0 = 0.01
target = steady(550)
[ic]
h_amplitude = 0.5
mode = 1
";

const DE_RUPTURE: &str = "\
# Start from the ruptured state and recover a uniform film.
name = de-rupture
L = 3*pi
n_nodes = 250
T = 30
n_steps = 600
A = 0.03
eps = 0.1
beta = 0
lambda0 = 0.01
target = flat(mean)
[ic]
h_amplitude = 0.5
mode = 1
film = steady(550)
";

pub const BUILTIN: &[(&str, &str)] = &[
    ("hammond", HAMMOND),
    ("given-topography", GIVEN_TOPOGRAPHY),
    ("wave-target", WAVE_TARGET),
    ("jensen-flatten", JENSEN_FLATTEN),
    ("hold-linear-state", HOLD_LINEAR_STATE),
    ("rupture-accelerate", RUPTURE_ACCELERATE),
    ("de-rupture", DE_RUPTURE),
];

pub fn builtin_names() -> impl Iterator<Item = &'static str> {
    BUILTIN.iter().map(|(n, _)| *n)
}

/// Config text of a built-in scenario.
pub fn builtin_text(name: &str) -> Option<&'static str> {
    BUILTIN.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn builtin(name: &str) -> Result<Scenario> {
    let text = builtin_text(name).ok_or_else(|| {
        let known: Vec<_> = builtin_names().collect();
        Error::InvalidParameter(format!(
            "unknown scenario `{name}`; known: {}",
            known.join(", ")
        ))
    })?;
    parse_str(text, &format!("<builtin {name}>"), Path::new("."))
}

/// Discretized scenario with resolved initial state and target.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub disc: Discretization,
    pub grid: TimeGrid,
    pub h0: Field,
    pub s0: Field,
    pub target: Option<Field>,
    /// Final rate of change of the run that generated a steady film or target.
    pub target_rate: Option<f64>,
}

impl Prepared {
    pub fn problem(&self, scenario: &Scenario) -> Result<ControlProblem> {
        let target = self.target.clone().ok_or_else(|| {
            Error::InvalidParameter(format!("scenario `{}` has no target", scenario.name))
        })?;
        let problem = ControlProblem {
            disc: self.disc.clone(),
            phys: scenario.phys,
            grid: self.grid,
            h0: self.h0.clone(),
            s0: self.s0.clone(),
            target,
            beta: scenario.beta_f64(),
            alpha: scenario.alpha,
        };
        problem.validate()?;
        Ok(problem)
    }
}

/// Builds the mesh, initial state and target. Steady profiles come from
/// uncontrolled runs with the scenario's time step.
pub fn prepare(scenario: &Scenario) -> Result<Prepared> {
    scenario.validate()?;
    let l = scenario.length;
    let mesh = build_mesh(l, scenario.n_nodes)?;
    let nodes = mesh.nodes();
    let disc = Discretization::new(mesh);
    let dt = scenario.dt();
    let grid = TimeGrid::new(scenario.t_final, scenario.n_steps)?;
    let ic = &scenario.ic;
    let cosine = Field::from_fn(&nodes, |x| {
        1.0 + ic.h_amplitude * (ic.mode * std::f64::consts::PI * x / l).cos()
    });

    let s0 = match &ic.substrate {
        SubstrateProfile::Flat => Field::zeros(nodes.len()),
        SubstrateProfile::Tanh { a, c1, c2, d } => Field::from_fn(&nodes, |x| {
            a * (((x + c1) / d).tanh() - ((x - c2) / d).tanh())
        }),
        SubstrateProfile::File { path } => read_field(path, &disc.mesh)?,
    };

    let mut target_rate = None;
    let steady_run = |t_pre: f64, h_start: &Field| {
        info!("uncontrolled run to T = {t_pre} for a steady profile");
        let pre = TimeGrid::with_step(t_pre, dt)?;
        make_target_steady(
            &disc,
            &scenario.phys,
            &pre,
            h_start,
            &s0,
            scenario.beta_f64(),
        )
    };

    let h0 = match &ic.film {
        FilmProfile::Cosine => cosine.clone(),
        FilmProfile::Gauss { amplitude, k } => {
            Field::from_fn(&nodes, |x| 1.0 + amplitude * (-(k * x).powi(2)).exp())
        }
        FilmProfile::Steady { t_pre } => {
            let st = steady_run(*t_pre, &cosine)?;
            target_rate = Some(st.rate);
            st.final_h
        }
        FilmProfile::File { path } => read_field(path, &disc.mesh)?,
    };

    let target = match &scenario.target {
        None => None,
        Some(TargetSpec::Steady { t_pre }) => {
            let st = steady_run(*t_pre, &h0)?;
            target_rate = Some(st.rate);
            Some(st.target)
        }
        Some(TargetSpec::Flat { value }) => Some(Field::constant(nodes.len(), *value)),
        Some(TargetSpec::FlatMean) => Some(Field::constant(nodes.len(), disc.integral(&h0) / l)),
        Some(TargetSpec::Wave { a, m }) => Some(Field::from_fn(&nodes, |x| {
            1.0 + a * (m * std::f64::consts::PI * x / l).cos()
        })),
        Some(TargetSpec::File { path }) => Some(read_field(path, &disc.mesh)?),
    };

    Ok(Prepared {
        disc,
        grid,
        h0,
        s0,
        target,
        target_rate,
    })
}
