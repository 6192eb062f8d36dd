//! Coordinate-basis truncation of a bosonic coordinate.
//!
//! A [`DigitizationGrid`] keeps `points` equally spaced coordinate values in
//! `[-cutoff, cutoff]`. The integer grid index is the canonical state of a
//! coordinate; the real value is recomputed on demand from the index.

use crate::error::{Error, Result};
use crate::lattice::LatticeGeometry;

/// Truncation of one coordinate axis to `points` values in `[-cutoff, cutoff]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DigitizationGrid {
    points: usize,
    cutoff: f64,
}

impl DigitizationGrid {
    pub fn new(points: usize, cutoff: f64) -> Result<Self> {
        if points < 2 {
            return Err(Error::param(
                "lambda",
                format!("need at least 2 grid points, got {points}"),
            ));
        }
        if !(cutoff > 0.0 && cutoff.is_finite()) {
            return Err(Error::param(
                "r",
                format!("cutoff must be positive and finite, got {cutoff}"),
            ));
        }
        Ok(Self { points, cutoff })
    }

    /// Grid with the given number of points and spacing, i.e. `r = a (points - 1) / 2`.
    pub fn with_spacing(points: usize, spacing: f64) -> Result<Self> {
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::param(
                "a_dig",
                format!("spacing must be positive, got {spacing}"),
            ));
        }
        Self::new(points, spacing * (points.max(2) - 1) as f64 / 2.0)
    }

    /// Number of grid points (the truncation level).
    pub fn points(&self) -> usize {
        self.points
    }

    /// Coordinate cutoff `R`.
    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    /// Grid spacing `2R / (points - 1)`.
    pub fn spacing(&self) -> f64 {
        2.0 * self.cutoff / (self.points - 1) as f64
    }

    /// `floor(points / 2)`, the index closest to `x = 0`.
    pub fn center_index(&self) -> usize {
        self.points / 2
    }

    pub fn coordinate(&self, n: usize) -> Result<f64> {
        if n >= self.points {
            return Err(Error::IndexOutOfRange {
                index: n as i64,
                points: self.points,
            });
        }
        Ok(self.coordinate_unchecked(n))
    }

    // -R + n a, written as an odd/even integer times R/(points-1) so that the
    // image is exactly antisymmetric about the center.
    #[inline]
    pub(crate) fn coordinate_unchecked(&self, n: usize) -> f64 {
        let k = 2 * n as i64 - (self.points as i64 - 1);
        k as f64 * self.cutoff / (self.points - 1) as f64
    }

    /// All coordinate values in index order.
    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.points)
            .map(|n| self.coordinate_unchecked(n))
            .collect()
    }
}

/// Power sums of one coordinate over a set of Trotter slices.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CoordinateSums {
    pub count: f64,
    pub sum: f64,
    pub sum_sq: f64,
    pub sum_cube: f64,
}

impl CoordinateSums {
    pub fn single(x: f64) -> Self {
        Self {
            count: 1.0,
            sum: x,
            sum_sq: x * x,
            sum_cube: x * x * x,
        }
    }
}

/// Source of per-coordinate power sums over a block of slices.
///
/// Any `FnMut(usize) -> CoordinateSums` qualifies. Implementors that can
/// produce `(count, sum)` more cheaply than the full moments should override
/// [`BlockSums::linear`].
pub trait BlockSums {
    fn moments(&mut self, coordinate: usize) -> CoordinateSums;

    fn linear(&mut self, coordinate: usize) -> (f64, f64) {
        let s = self.moments(coordinate);
        (s.count, s.sum)
    }
}

impl<F: FnMut(usize) -> CoordinateSums> BlockSums for F {
    fn moments(&mut self, coordinate: usize) -> CoordinateSums {
        self(coordinate)
    }
}

/// Potential energy `V` as a function of all boson coordinates.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialModel {
    /// Single boson with `V(x) = coupling/4 x^4 + mass_squared/2 x^2`.
    Quartic { coupling: f64, mass_squared: f64 },
    /// Free scalar field on a periodic lattice: gradient plus mass term.
    LatticeScalar {
        mass_squared: f64,
        geometry: LatticeGeometry,
    },
}

impl PotentialModel {
    pub fn quartic(coupling: f64, mass_squared: f64) -> Self {
        PotentialModel::Quartic {
            coupling,
            mass_squared,
        }
    }

    pub fn lattice_scalar(mass_squared: f64, dims: usize, extent: usize) -> Result<Self> {
        Ok(PotentialModel::LatticeScalar {
            mass_squared,
            geometry: LatticeGeometry::new(dims, extent)?,
        })
    }

    /// Number of bosonic coordinates the model acts on.
    pub fn n_bosons(&self) -> usize {
        match self {
            PotentialModel::Quartic { .. } => 1,
            PotentialModel::LatticeScalar { geometry, .. } => geometry.n_sites(),
        }
    }

    /// Evaluates `V(x)`.
    pub fn energy(&self, x: &[f64]) -> Result<f64> {
        let expected = self.n_bosons();
        if x.len() != expected {
            return Err(Error::ShapeMismatch {
                expected,
                actual: x.len(),
            });
        }
        Ok(self.energy_unchecked(x))
    }

    pub(crate) fn energy_unchecked(&self, x: &[f64]) -> f64 {
        match *self {
            PotentialModel::Quartic {
                coupling,
                mass_squared,
            } => quartic(coupling, mass_squared, x[0]),
            PotentialModel::LatticeScalar {
                mass_squared,
                ref geometry,
            } => crate::lattice::lattice_potential_unchecked(geometry, mass_squared, x),
        }
    }

    /// `V(x + delta e_boson) - V(x)` computed locally.
    pub fn shift_delta(&self, x: &[f64], boson: usize, delta: f64) -> Result<f64> {
        let expected = self.n_bosons();
        if x.len() != expected {
            return Err(Error::ShapeMismatch {
                expected,
                actual: x.len(),
            });
        }
        if boson >= expected {
            return Err(Error::IndexOutOfRange {
                index: boson as i64,
                points: expected,
            });
        }
        Ok(self.block_shift_delta(boson, delta, |j| CoordinateSums::single(x[j])))
    }

    /// Sum over a block of slices of `V(x + delta e_boson) - V(x)`.
    ///
    /// `sums` supplies the power sums of each coordinate over the block;
    /// only `boson` and, for the lattice model, its neighbors are queried.
    pub fn block_shift_delta<S: BlockSums>(&self, boson: usize, delta: f64, mut sums: S) -> f64 {
        match *self {
            PotentialModel::Quartic {
                coupling,
                mass_squared,
            } => {
                let s = sums.moments(boson);
                let d2 = delta * delta;
                let quartic = coupling
                    * (delta * s.sum_cube
                        + 1.5 * d2 * s.sum_sq
                        + d2 * delta * s.sum
                        + 0.25 * d2 * d2 * s.count);
                let quadratic = mass_squared * (delta * s.sum + 0.5 * d2 * s.count);
                quartic + quadratic
            }
            PotentialModel::LatticeScalar {
                mass_squared,
                ref geometry,
            } => {
                // A link (n, n+mu) with only one end shifted changes by
                // delta (phi_shifted - phi_other) + delta^2 / 2.
                let (count, own) = sums.linear(boson);
                let mut neighbor_sum = 0.0;
                let mut links = 0usize;
                for nb in geometry.neighbors(boson) {
                    neighbor_sum += sums.linear(nb).1;
                    links += 1;
                }
                let gradient = delta * (links as f64 * own - neighbor_sum)
                    + 0.5 * links as f64 * delta * delta * count;
                let mass = mass_squared * (delta * own + 0.5 * delta * delta * count);
                gradient + mass
            }
        }
    }
}

#[inline]
fn quartic(coupling: f64, mass_squared: f64, x: f64) -> f64 {
    let x2 = x * x;
    0.25 * coupling * x2 * x2 + 0.5 * mass_squared * x2
}
