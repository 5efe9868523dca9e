//! Nodal coefficient vectors and space-time grids of them.

use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nodal coefficients of a continuous piecewise-linear function at one time level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Field(Vec<f64>);

impl Field {
    pub fn new(values: Vec<f64>) -> Self {
        Field(values)
    }

    pub fn zeros(n: usize) -> Self {
        Field(vec![0.0; n])
    }

    pub fn constant(n: usize, value: f64) -> Self {
        Field(vec![value; n])
    }

    pub fn from_fn(nodes: &[f64], f: impl Fn(f64) -> f64) -> Self {
        Field(nodes.iter().map(|&x| f(x)).collect())
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `self + scale * other`
    pub fn axpy(&self, scale: f64, other: &[f64]) -> Field {
        Field(
            self.0
                .iter()
                .zip(other)
                .map(|(a, b)| a + scale * b)
                .collect(),
        )
    }

    pub fn scaled(&self, scale: f64) -> Field {
        Field(self.0.iter().map(|a| scale * a).collect())
    }

    pub(crate) fn check_len(&self, what: &'static str, expected: usize) -> Result<()> {
        if self.0.len() != expected {
            return Err(Error::ShapeMismatch {
                what,
                expected,
                found: self.0.len(),
            });
        }
        Ok(())
    }
}

impl Deref for Field {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for Field {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for Field {
    fn from(v: Vec<f64>) -> Self {
        Field(v)
    }
}

/// Row-major `(n_levels) x (n_nodes)` grid; row `k` is the field at time level `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeField {
    n_levels: usize,
    n_nodes: usize,
    data: Vec<f64>,
}

impl SpaceTimeField {
    pub fn zeros(n_levels: usize, n_nodes: usize) -> Self {
        SpaceTimeField {
            n_levels,
            n_nodes,
            data: vec![0.0; n_levels * n_nodes],
        }
    }

    pub fn from_fn(n_levels: usize, n_nodes: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut out = Self::zeros(n_levels, n_nodes);
        for k in 0..n_levels {
            for i in 0..n_nodes {
                out.data[k * n_nodes + i] = f(k, i);
            }
        }
        out
    }

    pub fn n_levels(&self) -> usize {
        self.n_levels
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.data[k * self.n_nodes..(k + 1) * self.n_nodes]
    }

    pub fn row_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.data[k * self.n_nodes..(k + 1) * self.n_nodes]
    }

    pub fn field(&self, k: usize) -> Field {
        Field(self.row(k).to_vec())
    }

    pub fn set_row(&mut self, k: usize, values: &[f64]) {
        self.row_mut(k).copy_from_slice(values);
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `self + scale * other`, entrywise.
    pub fn axpy(&self, scale: f64, other: &SpaceTimeField) -> SpaceTimeField {
        debug_assert_eq!(self.data.len(), other.data.len());
        SpaceTimeField {
            n_levels: self.n_levels,
            n_nodes: self.n_nodes,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + scale * b)
                .collect(),
        }
    }

    pub fn scaled(&self, scale: f64) -> SpaceTimeField {
        SpaceTimeField {
            n_levels: self.n_levels,
            n_nodes: self.n_nodes,
            data: self.data.iter().map(|a| scale * a).collect(),
        }
    }
}
