//! Uniform discretization of photoelectron kinetic energy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform energy grid: `point(i) = epsilon_min + i * delta_epsilon` (eV).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyGrid {
    epsilon_min: f64,
    delta_epsilon: f64,
    n_points: usize,
}

impl EnergyGrid {
    pub fn new(epsilon_min: f64, delta_epsilon: f64, n_points: usize) -> Result<Self> {
        if !epsilon_min.is_finite() || !delta_epsilon.is_finite() {
            return Err(Error::Config("energy grid parameters must be finite".into()));
        }
        if delta_epsilon <= 0.0 {
            return Err(Error::Config(format!(
                "delta_epsilon must be > 0, got {delta_epsilon}"
            )));
        }
        if n_points < 2 {
            return Err(Error::Config(format!(
                "energy grid needs at least 2 points, got {n_points}"
            )));
        }
        Ok(EnergyGrid { epsilon_min, delta_epsilon, n_points })
    }

    pub fn epsilon_min(&self) -> f64 {
        self.epsilon_min
    }

    pub fn delta_epsilon(&self) -> f64 {
        self.delta_epsilon
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    /// Energy of grid point `i`. Exactly `epsilon_min + i * delta_epsilon`.
    pub fn point(&self, i: usize) -> f64 {
        debug_assert!(i < self.n_points);
        self.epsilon_min + i as f64 * self.delta_epsilon
    }

    pub fn last_point(&self) -> f64 {
        self.point(self.n_points - 1)
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.point(i))
    }

    /// Index of the grid point nearest to `energy`, with the signed residual
    /// in units of grid bins. The index is clamped to the grid range.
    pub fn nearest_index(&self, energy: f64) -> (usize, f64) {
        let x = (energy - self.epsilon_min) / self.delta_epsilon;
        let i = x.round().max(0.0).min((self.n_points - 1) as f64);
        (i as usize, x - i)
    }

    /// True when `energy` lies within the closed grid span.
    pub fn contains(&self, energy: f64) -> bool {
        energy >= self.epsilon_min && energy <= self.last_point()
    }

    /// Contiguous sub-grid covering indices `start .. start + len`.
    pub fn subgrid(&self, start: usize, len: usize) -> Result<Self> {
        if start + len > self.n_points {
            return Err(Error::DimensionMismatch(format!(
                "subgrid {start}..{} exceeds {} points",
                start + len,
                self.n_points
            )));
        }
        EnergyGrid::new(self.point(start), self.delta_epsilon, len)
    }

    /// Grid shifted by a constant energy offset (same spacing and length).
    pub fn shifted(&self, offset: f64) -> Result<Self> {
        EnergyGrid::new(self.epsilon_min + offset, self.delta_epsilon, self.n_points)
    }
}
