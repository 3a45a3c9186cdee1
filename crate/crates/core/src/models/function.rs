use serde::{Deserialize, Serialize};

use super::grid::TorusGrid;

/// Real values on the nodes of a [`TorusGrid`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn constant(len: usize, value: f64) -> Self {
        Self {
            values: vec![value; len],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, node: usize) -> f64 {
        self.values[node]
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `sup |self - other|`.
    pub fn sup_distance(&self, other: &GridFunction) -> f64 {
        assert_eq!(self.len(), other.len());
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction::new(self.values.iter().map(|&v| f(v)).collect())
    }

    /// Discrete Lipschitz quotient `max |u(x) - u(y)| / d(x,y)` over axis-adjacent nodes.
    pub fn lipschitz_quotient(&self, grid: &TorusGrid) -> f64 {
        grid.neighbor_pairs()
            .into_iter()
            .map(|(a, b)| (self.values[a] - self.values[b]).abs() / grid.distance(a, b))
            .fold(0.0, f64::max)
    }
}

impl From<Vec<f64>> for GridFunction {
    fn from(values: Vec<f64>) -> Self {
        Self::new(values)
    }
}
