use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;

/// Reference-element Gauss points on `[0, 1]`.
pub const GAUSS_POINTS: [f64; 3] = [
    0.5 - 0.387_298_334_620_741_7, // sqrt(3/5) / 2
    0.5,
    0.5 + 0.387_298_334_620_741_7,
];

/// Weights matching [`GAUSS_POINTS`]; they sum to one.
pub const GAUSS_WEIGHTS: [f64; 3] = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];

/// Uniform node layout on `[0, L]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    length: f64,
    n_nodes: usize,
}

pub fn build_mesh(length: f64, n_nodes: usize) -> Result<Mesh> {
    Mesh::new(length, n_nodes)
}

impl Mesh {
    pub fn new(length: f64, n_nodes: usize) -> Result<Mesh> {
        if !length.is_finite() || length <= 0.0 {
            return Err(Error::InvalidMesh(format!(
                "length must be positive and finite, got {length}"
            )));
        }
        if n_nodes < 3 {
            return Err(Error::InvalidMesh(format!(
                "need at least 3 nodes, got {n_nodes}"
            )));
        }
        Ok(Mesh { length, n_nodes })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_elements(&self) -> usize {
        self.n_nodes - 1
    }

    pub fn dx(&self) -> f64 {
        self.length / (self.n_nodes - 1) as f64
    }

    /// Node `i`; the last node is exactly `L`.
    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.n_nodes {
            self.length
        } else {
            i as f64 * self.dx()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_nodes).map(|i| self.node(i)).collect()
    }

    /// Physical coordinates of the quadrature points of element `e`.
    pub fn quad_points(&self, e: usize) -> [f64; 3] {
        let x0 = self.node(e);
        let dx = self.dx();
        GAUSS_POINTS.map(|xi| x0 + xi * dx)
    }

    /// Piecewise-linear interpolant of `field` at every quadrature point.
    pub fn interpolate(&self, field: &[f64]) -> QuadValues {
        debug_assert_eq!(field.len(), self.n_nodes);
        QuadValues(
            (0..self.n_elements())
                .map(|e| {
                    let (a, b) = (field[e], field[e + 1]);
                    GAUSS_POINTS.map(|xi| a * (1.0 - xi) + b * xi)
                })
                .collect(),
        )
    }

    /// Derivative of the interpolant, constant on each element.
    pub fn element_gradient(&self, field: &[f64]) -> Vec<f64> {
        let dx = self.dx();
        field.windows(2).map(|w| (w[1] - w[0]) / dx).collect()
    }

    /// Pointwise function of `x` sampled at the quadrature points.
    pub fn sample(&self, g: impl Fn(f64) -> f64) -> QuadValues {
        QuadValues(
            (0..self.n_elements())
                .map(|e| self.quad_points(e).map(&g))
                .collect(),
        )
    }

    /// `∫ g dx` for quadrature-point values `g`.
    pub fn integrate(&self, g: &QuadValues) -> f64 {
        let dx = self.dx();
        g.0.iter()
            .map(|q| q.iter().zip(GAUSS_WEIGHTS).map(|(v, w)| v * w).sum::<f64>())
            .sum::<f64>()
            * dx
    }

    pub(crate) fn check_field(&self, what: &'static str, f: &Field) -> Result<()> {
        f.check_len(what, self.n_nodes)
    }
}

/// Values at the three Gauss points of every element.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadValues(pub Vec<[f64; 3]>);

impl QuadValues {
    pub fn constant(n_elements: usize, value: f64) -> Self {
        QuadValues(vec![[value; 3]; n_elements])
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> QuadValues {
        QuadValues(self.0.iter().map(|q| q.map(&f)).collect())
    }

    pub fn zip_with(&self, other: &QuadValues, f: impl Fn(f64, f64) -> f64) -> QuadValues {
        QuadValues(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| [f(a[0], b[0]), f(a[1], b[1]), f(a[2], b[2])])
                .collect(),
        )
    }

    /// Multiplies element `e`'s values by `per_element[e]`.
    pub fn scale_elements(&self, per_element: &[f64]) -> QuadValues {
        QuadValues(
            self.0
                .iter()
                .zip(per_element)
                .map(|(q, s)| q.map(|v| v * s))
                .collect(),
        )
    }

    pub fn n_elements(&self) -> usize {
        self.0.len()
    }
}
