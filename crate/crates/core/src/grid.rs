//! Rectangular sampling of the two-photon frequency plane.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Uniform sampling of one frequency axis, endpoints inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, n: usize) -> Result<Self, ModelError> {
        let axis = Self { min, max, n };
        axis.validate()?;
        Ok(axis)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.min.is_finite() && self.max.is_finite()) || self.max <= self.min {
            return Err(ModelError::InvalidGrid(format!(
                "axis needs finite max > min, got [{}, {}]",
                self.min, self.max
            )));
        }
        if self.n < 2 {
            return Err(ModelError::InvalidGrid(format!(
                "axis needs n >= 2, got {}",
                self.n
            )));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.n - 1) as f64
    }

    /// The `i`-th sample; the last sample is exactly `max`.
    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.max
        } else {
            self.min + i as f64 * self.step()
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.value(i)).collect()
    }

    /// Index of the sample closest to `x`, clamped to the axis.
    pub fn nearest(&self, x: f64) -> usize {
        let idx = ((x - self.min) / self.step()).round();
        idx.clamp(0.0, (self.n - 1) as f64) as usize
    }
}

/// A window over the `(ω₁, ω₂)` plane. Rows follow `ω₁`, columns `ω₂`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub omega1: Axis,
    pub omega2: Axis,
}

impl FrequencyGrid {
    pub fn new(omega1: Axis, omega2: Axis) -> Result<Self, ModelError> {
        omega1.validate()?;
        omega2.validate()?;
        Ok(Self { omega1, omega2 })
    }

    /// A square window `[min, max]²` with `n` samples per axis.
    pub fn square(min: f64, max: f64, n: usize) -> Result<Self, ModelError> {
        let axis = Axis::new(min, max, n)?;
        Ok(Self {
            omega1: axis,
            omega2: axis,
        })
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        self.omega1.validate()?;
        self.omega2.validate()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.omega1.n, self.omega2.n)
    }

    /// Area of one cell, `Δω₁ Δω₂`.
    pub fn cell_area(&self) -> f64 {
        self.omega1.step() * self.omega2.step()
    }

    /// Evaluates `f(ω₁, ω₂)` at every sample.
    ///
    /// Rows are computed in parallel on the current rayon pool. Each cell is
    /// an independent evaluation, so the result does not depend on the
    /// number of workers.
    pub fn evaluate<T, F>(&self, f: F) -> DMatrix<T>
    where
        T: nalgebra::Scalar + Send + Sync,
        F: Fn(f64, f64) -> T + Sync,
    {
        let (n1, n2) = self.shape();
        let cols = self.omega2.values();
        let rows: Vec<Vec<T>> = (0..n1)
            .into_par_iter()
            .map(|i| {
                let w1 = self.omega1.value(i);
                cols.iter().map(|&w2| f(w1, w2)).collect()
            })
            .collect();
        DMatrix::from_fn(n1, n2, |i, j| rows[i][j].clone())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    #[default]
    Raw,
    /// Scaled so that `Σ I Δω₁ Δω₂ = 1`.
    UnitSum,
}

impl std::fmt::Display for Normalization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Normalization::Raw => "raw",
            Normalization::UnitSum => "unit_sum",
        })
    }
}

impl std::str::FromStr for Normalization {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "raw" => Ok(Normalization::Raw),
            "unit_sum" | "unit-sum" => Ok(Normalization::UnitSum),
            other => Err(format!(
                "unknown normalization '{other}' (expected raw or unit_sum)"
            )),
        }
    }
}

/// Non-negative joint spectral intensity sampled on a [`FrequencyGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct IntensityGrid {
    pub grid: FrequencyGrid,
    pub values: DMatrix<f64>,
    pub normalization: Normalization,
}

impl IntensityGrid {
    /// Wraps computed values, checking shape and sign, and applies `normalization`.
    pub fn new(
        grid: FrequencyGrid,
        values: DMatrix<f64>,
        normalization: Normalization,
    ) -> Result<Self, ModelError> {
        grid.validate()?;
        if values.shape() != grid.shape() {
            return Err(ModelError::InvalidGrid(format!(
                "values have shape {:?}, grid has {:?}",
                values.shape(),
                grid.shape()
            )));
        }
        check_values(&values)?;
        let mut out = Self {
            grid,
            values,
            normalization: Normalization::Raw,
        };
        if normalization == Normalization::UnitSum {
            out.normalize()?;
        }
        Ok(out)
    }

    /// Riemann sum `Σ I Δω₁ Δω₂`, accumulated in row-major order.
    pub fn integral(&self) -> f64 {
        let (n1, n2) = self.values.shape();
        let mut total = 0.0;
        for i in 0..n1 {
            for j in 0..n2 {
                total += self.values[(i, j)];
            }
        }
        total * self.grid.cell_area()
    }

    fn normalize(&mut self) -> Result<(), ModelError> {
        let total = self.integral();
        if total <= 0.0 {
            return Err(ModelError::ZeroGrid);
        }
        self.values /= total;
        self.normalization = Normalization::UnitSum;
        Ok(())
    }

    /// Row and column of the largest value.
    pub fn argmax(&self) -> (usize, usize) {
        argmax(&self.values)
    }
}

pub(crate) fn check_values(values: &DMatrix<f64>) -> Result<(), ModelError> {
    for j in 0..values.ncols() {
        for i in 0..values.nrows() {
            let v = values[(i, j)];
            if !(v.is_finite() && v >= 0.0) {
                return Err(ModelError::InvalidGridValue { row: i, col: j });
            }
        }
    }
    Ok(())
}

/// Row-major first occurrence of the maximum.
pub(crate) fn argmax(values: &DMatrix<f64>) -> (usize, usize) {
    let mut best = (0, 0);
    let mut best_v = f64::NEG_INFINITY;
    for i in 0..values.nrows() {
        for j in 0..values.ncols() {
            if values[(i, j)] > best_v {
                best_v = values[(i, j)];
                best = (i, j);
            }
        }
    }
    best
}
