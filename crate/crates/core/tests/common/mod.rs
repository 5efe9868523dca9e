//! Shared helpers for integration tests, including a dense brute-force model
//! of the discrete forward and adjoint equations.

#![allow(dead_code, clippy::too_many_arguments)]

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use thinfilm::fem1d::{build_mesh, Discretization};
use thinfilm::forward::{PhysParams, TimeGrid};
use thinfilm::optim::ControlProblem;
use thinfilm::potential::PotentialParams;
use thinfilm::{Field, SpaceTimeField};

/// 5-point Gauss-Legendre on [0, 1]; exact to degree 9.
fn gauss5() -> Vec<(f64, f64)> {
    let a = (5.0 - 2.0 * (10.0f64 / 7.0).sqrt()).sqrt() / 3.0;
    let b = (5.0 + 2.0 * (10.0f64 / 7.0).sqrt()).sqrt() / 3.0;
    let wa = (322.0 + 13.0 * 70.0f64.sqrt()) / 900.0;
    let wb = (322.0 - 13.0 * 70.0f64.sqrt()) / 900.0;
    [(-b, wb), (-a, wa), (0.0, 128.0 / 225.0), (a, wa), (b, wb)]
        .iter()
        .map(|&(x, w)| (0.5 * (x + 1.0), 0.5 * w))
        .collect()
}

/// 3-point Gauss-Legendre on [0, 1]; the rule that defines the potential terms.
fn gauss3() -> Vec<(f64, f64)> {
    let a = (0.6f64).sqrt();
    [(-a, 5.0 / 9.0), (0.0, 8.0 / 9.0), (a, 5.0 / 9.0)]
        .iter()
        .map(|&(x, w)| (0.5 * (x + 1.0), 0.5 * w))
        .collect()
}

#[derive(Clone, Copy)]
pub enum Shape {
    Value,
    Slope,
}

/// Dense P1 model on `[0, L]` with `n` nodes, block ordering `[h; mu; s]`.
pub struct Dense {
    pub n: usize,
    pub dx: f64,
    pub phys: PhysParams,
}

impl Dense {
    pub fn new(length: f64, n: usize, phys: PhysParams) -> Self {
        Dense {
            n,
            dx: length / (n - 1) as f64,
            phys,
        }
    }

    /// Value or slope of the two local basis functions at local coordinate `t`.
    fn local(&self, shape: Shape, t: f64) -> [f64; 2] {
        match shape {
            Shape::Value => [1.0 - t, t],
            Shape::Slope => [-1.0 / self.dx, 1.0 / self.dx],
        }
    }

    pub fn value(&self, u: &[f64], e: usize, t: f64) -> f64 {
        u[e] * (1.0 - t) + u[e + 1] * t
    }

    pub fn slope(&self, u: &[f64], e: usize) -> f64 {
        (u[e + 1] - u[e]) / self.dx
    }

    /// `∫ w(e, t) a_i b_j`, with `a`, `b` the basis value or slope.
    pub fn bilinear(
        &self,
        exact: bool,
        a: Shape,
        b: Shape,
        w: impl Fn(usize, f64) -> f64,
    ) -> DMatrix<f64> {
        let rule = if exact { gauss5() } else { gauss3() };
        let mut m = DMatrix::zeros(self.n, self.n);
        for e in 0..self.n - 1 {
            for &(t, wq) in &rule {
                let (ai, bj) = (self.local(a, t), self.local(b, t));
                let c = wq * self.dx * w(e, t);
                for i in 0..2 {
                    for j in 0..2 {
                        m[(e + i, e + j)] += c * ai[i] * bj[j];
                    }
                }
            }
        }
        m
    }

    pub fn load(&self, g: impl Fn(usize, f64) -> f64) -> DVector<f64> {
        let mut v = DVector::zeros(self.n);
        for e in 0..self.n - 1 {
            for (t, wq) in gauss3() {
                let c = wq * self.dx * g(e, t);
                v[e] += c * (1.0 - t);
                v[e + 1] += c * t;
            }
        }
        v
    }

    pub fn mass(&self) -> DMatrix<f64> {
        self.bilinear(true, Shape::Value, Shape::Value, |_, _| 1.0)
    }

    pub fn stiffness(&self) -> DMatrix<f64> {
        self.bilinear(true, Shape::Slope, Shape::Slope, |_, _| 1.0)
    }

    fn pot(&self) -> PotentialParams {
        self.phys.potential
    }

    /// `phi'_-` and `phi''_-` written out from the regularized potential.
    fn dphi_minus(&self, h: f64) -> f64 {
        let PotentialParams { hamaker: a, eps } = self.pot();
        if h < eps {
            0.0
        } else {
            a / h.powi(3) - a / eps.powi(4) * h
        }
    }

    fn d2phi_minus(&self, h: f64) -> f64 {
        let PotentialParams { hamaker: a, eps } = self.pot();
        if h < eps {
            0.0
        } else {
            -3.0 * a / h.powi(4) - a / eps.powi(4)
        }
    }

    fn dphi(&self, h: f64) -> f64 {
        let PotentialParams { hamaker: a, eps } = self.pot();
        if h < eps {
            a / eps.powi(4) * h
        } else {
            a / h.powi(3)
        }
    }

    fn place(big: &mut DMatrix<f64>, bi: usize, bj: usize, n: usize, block: &DMatrix<f64>) {
        let mut v = big.view_mut((bi * n, bj * n), (n, n));
        v += block;
    }

    /// Step matrix for the step leaving a level with thickness `h_old`.
    pub fn step_matrix(&self, dt: f64, h_old: &[f64]) -> DMatrix<f64> {
        let n = self.n;
        let p = &self.phys;
        let (m, k) = (self.mass(), self.stiffness());
        let a = self.pot().hamaker / self.pot().eps.powi(4);
        let b = p.bo / p.ca;
        let kap = 1.0 / p.ca;
        let g = p.gamma / p.ca;
        let mob = self.bilinear(true, Shape::Slope, Shape::Slope, |e, t| {
            self.value(h_old, e, t).powi(3) / 3.0
        });
        let mut big = DMatrix::zeros(3 * n, 3 * n);
        Self::place(&mut big, 0, 0, n, &m);
        Self::place(&mut big, 0, 1, n, &(&mob * dt));
        Self::place(&mut big, 1, 0, n, &(&m * (b - a) - &k * kap));
        Self::place(&mut big, 1, 1, n, &m);
        Self::place(&mut big, 1, 2, n, &(&m * b - &k * kap));
        Self::place(&mut big, 2, 0, n, &((&k - &m * p.bo) * (dt * g)));
        Self::place(&mut big, 2, 2, n, &(&m + &k * (dt * p.c * p.c)));
        big
    }

    pub fn step_rhs(&self, dt: f64, h_old: &[f64], s_old: &[f64], f_new: &[f64]) -> DVector<f64> {
        let n = self.n;
        let m = self.mass();
        let mut rhs = DVector::zeros(3 * n);
        rhs.rows_mut(0, n)
            .copy_from(&(&m * DVector::from_column_slice(h_old)));
        let load = self.load(|e, t| self.dphi_minus(self.value(h_old, e, t)));
        rhs.rows_mut(n, n).copy_from(&load);
        let forced: Vec<f64> = s_old.iter().zip(f_new).map(|(s, f)| s + dt * f).collect();
        rhs.rows_mut(2 * n, n)
            .copy_from(&(&m * DVector::from_vec(forced)));
        rhs
    }

    pub fn initial_mu(&self, h: &[f64], s: &[f64]) -> Vec<f64> {
        let (m, k) = (self.mass(), self.stiffness());
        let p = &self.phys;
        let total = DVector::from_iterator(self.n, h.iter().zip(s).map(|(a, b)| a + b));
        let rhs = self.load(|e, t| self.dphi(self.value(h, e, t))) - &m * &total * (p.bo / p.ca)
            + &k * &total / p.ca;
        m.lu().solve(&rhs).unwrap().iter().copied().collect()
    }

    /// `(h, mu, s)` per level.
    pub fn forward(
        &self,
        dt: f64,
        n_steps: usize,
        h0: &[f64],
        s0: &[f64],
        f: &[Vec<f64>],
    ) -> Vec<[Vec<f64>; 3]> {
        let n = self.n;
        let mut out = vec![[h0.to_vec(), self.initial_mu(h0, s0), s0.to_vec()]];
        for k in 0..n_steps {
            let [h, _, s] = &out[k];
            let a = self.step_matrix(dt, h);
            let x = a.lu().solve(&self.step_rhs(dt, h, s, &f[k + 1])).unwrap();
            let part = |b: usize| x.rows(b * n, n).iter().copied().collect::<Vec<_>>();
            out.push([part(0), part(1), part(2)]);
        }
        out
    }

    /// Derivative of step `k+1`'s residual `A(h^k) x^{k+1} - b(h^k, s^k)` with
    /// respect to `x^k = [h; mu; s]^k`.
    fn old_level_jacobian(&self, dt: f64, h_k: &[f64], mu_k1: &[f64]) -> DMatrix<f64> {
        let n = self.n;
        let m = self.mass();
        // d/dh_j of (1/3)∫ h^3 mu_x φ_i' = ∫ h^2 mu_x φ_j φ_i'
        let transport = self.bilinear(true, Shape::Slope, Shape::Value, |e, t| {
            self.value(h_k, e, t).powi(2) * self.slope(mu_k1, e)
        });
        let dload = self.bilinear(false, Shape::Value, Shape::Value, |e, t| {
            self.d2phi_minus(self.value(h_k, e, t))
        });
        let mut j = DMatrix::zeros(3 * n, 3 * n);
        Self::place(&mut j, 0, 0, n, &(&transport * dt - &m));
        Self::place(&mut j, 1, 0, n, &(-dload));
        Self::place(&mut j, 2, 2, n, &(-&m));
        j
    }

    /// Riesz representative (dt M inner product) of the reduced gradient,
    /// from the Lagrangian `J + Σ λ_kᵀ G_k`.
    pub fn gradient(
        &self,
        dt: f64,
        n_steps: usize,
        traj: &[[Vec<f64>; 3]],
        f: &[Vec<f64>],
        target: &[f64],
        beta: f64,
        alpha: f64,
    ) -> Vec<Vec<f64>> {
        let n = self.n;
        let m = self.mass();
        let last = &traj[n_steps];
        let e: Vec<f64> = (0..n)
            .map(|i| target[i] - last[0][i] - beta * last[2][i])
            .collect();
        let me = &m * DVector::from_vec(e);
        let mut rhs = DVector::zeros(3 * n);
        rhs.rows_mut(0, n).copy_from(&me);
        rhs.rows_mut(2 * n, n).copy_from(&(&me * beta));
        let mut lambda = vec![DVector::zeros(3 * n); n_steps + 1];
        lambda[n_steps] = self
            .step_matrix(dt, &traj[n_steps - 1][0])
            .transpose()
            .lu()
            .solve(&rhs)
            .unwrap();
        for k in (1..n_steps).rev() {
            let jac = self.old_level_jacobian(dt, &traj[k][0], &traj[k + 1][1]);
            let rhs = -(jac.transpose() * &lambda[k + 1]);
            lambda[k] = self
                .step_matrix(dt, &traj[k - 1][0])
                .transpose()
                .lu()
                .solve(&rhs)
                .unwrap();
        }
        // dL/df_k = alpha dt M f_k - dt M r_k
        let lu = (&m * dt).lu();
        let mut grad = vec![vec![0.0; n]; n_steps + 1];
        for k in 1..=n_steps {
            let fk = DVector::from_column_slice(&f[k]);
            let r = lambda[k].rows(2 * n, n).into_owned();
            let dl = &m * (&fk * (alpha * dt)) - &m * (r * dt);
            grad[k] = lu.solve(&dl).unwrap().iter().copied().collect();
        }
        grad
    }
}

pub fn disc(length: f64, n: usize) -> Discretization {
    Discretization::new(build_mesh(length, n).unwrap())
}

pub fn cosine(disc: &Discretization, amplitude: f64, mode: f64) -> Field {
    let l = disc.mesh.length();
    Field::from_fn(&disc.mesh.nodes(), |x| {
        1.0 + amplitude * (mode * PI * x / l).cos()
    })
}

pub fn phys_with(hamaker: f64, gamma: f64) -> PhysParams {
    PhysParams {
        gamma,
        potential: PotentialParams::new(hamaker, 0.1).unwrap(),
        ..PhysParams::default()
    }
}

/// Small control problem with a non-flat substrate and wave target.
pub fn small_problem(
    n: usize,
    n_steps: usize,
    hamaker: f64,
    beta: f64,
    gamma: f64,
) -> ControlProblem {
    let l = 3.0 * PI;
    let d = disc(l, n);
    let nodes = d.mesh.nodes();
    ControlProblem {
        h0: cosine(&d, 0.5, 1.0),
        s0: Field::from_fn(&nodes, |x| 0.05 * (2.0 * PI * x / l).sin()),
        target: Field::from_fn(&nodes, |x| 1.0 + 0.3 * (2.0 * PI * x / l).cos()),
        disc: d,
        phys: phys_with(hamaker, gamma),
        grid: TimeGrid::new(0.05 * n_steps as f64, n_steps).unwrap(),
        beta,
        alpha: 1e-3,
    }
}

/// Deterministic non-trivial control.
pub fn wavy_control(levels: usize, nodes: usize, scale: f64) -> SpaceTimeField {
    SpaceTimeField::from_fn(levels, nodes, |k, i| {
        if k == 0 {
            0.0
        } else {
            scale * ((k as f64 * 0.7 + i as f64 * 0.31).sin())
        }
    })
}

pub fn rows(f: &SpaceTimeField) -> Vec<Vec<f64>> {
    (0..f.n_levels()).map(|k| f.row(k).to_vec()).collect()
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}
