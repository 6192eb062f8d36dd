use crate::digitization::{DigitizationGrid, PotentialModel};
use crate::error::{Error, Result};
use crate::mcmc::TrotterParams;

/// Grid indices `n_i^(j)` for every Trotter slice `j` and boson `i`.
///
/// Stored boson-major so that one boson's path through imaginary time is
/// contiguous.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PathConfiguration {
    slices: usize,
    n_bosons: usize,
    indices: Vec<u32>,
}

impl PathConfiguration {
    /// Every entry set to `index`.
    pub fn uniform(slices: usize, n_bosons: usize, index: usize) -> Self {
        Self {
            slices,
            n_bosons,
            indices: vec![index as u32; slices * n_bosons],
        }
    }

    /// Builds a configuration from one index vector per slice.
    pub fn from_slices(slices: &[Vec<usize>]) -> Result<Self> {
        let k = slices.len();
        if k == 0 {
            return Err(Error::InvalidConfiguration("no slices".into()));
        }
        let n = slices[0].len();
        if n == 0 {
            return Err(Error::InvalidConfiguration("no bosons".into()));
        }
        let mut config = Self::uniform(k, n, 0);
        for (j, v) in slices.iter().enumerate() {
            if v.len() != n {
                return Err(Error::ShapeMismatch {
                    expected: n,
                    actual: v.len(),
                });
            }
            for (i, &x) in v.iter().enumerate() {
                config.indices[i * k + j] = x as u32;
            }
        }
        Ok(config)
    }

    pub fn slices(&self) -> usize {
        self.slices
    }

    pub fn n_bosons(&self) -> usize {
        self.n_bosons
    }

    #[inline]
    pub fn get(&self, slice: usize, boson: usize) -> usize {
        self.indices[boson * self.slices + slice] as usize
    }

    #[inline]
    pub(crate) fn shift(&mut self, slice: usize, boson: usize, step: i32) {
        let cell = &mut self.indices[boson * self.slices + slice];
        *cell = (*cell as i64 + step as i64) as u32;
    }

    pub fn slice_indices(&self, slice: usize) -> Vec<usize> {
        (0..self.n_bosons).map(|i| self.get(slice, i)).collect()
    }

    /// The path of one boson through all slices.
    pub fn boson_path(&self, boson: usize) -> &[u32] {
        &self.indices[boson * self.slices..(boson + 1) * self.slices]
    }

    /// Checks grid bounds and that every adjacent slice pair (periodic in the
    /// slice index) has a nonzero link weight.
    pub fn validate(&self, grid: &DigitizationGrid) -> Result<()> {
        if let Some(&bad) = self.indices.iter().find(|&&n| n as usize >= grid.points()) {
            return Err(Error::IndexOutOfRange {
                index: bad as i64,
                points: grid.points(),
            });
        }
        for j in 0..self.slices {
            let next = (j + 1) % self.slices;
            if LinkKind::classify(&self.slice_indices(j), &self.slice_indices(next)).is_none() {
                return Err(Error::InvalidConfiguration(format!(
                    "slices {j} and {next} differ by more than one unit step"
                )));
            }
        }
        Ok(())
    }
}

/// Relation between consecutive slices `n^(j)` and `n^(j+1)` with nonzero weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinkKind {
    /// `n^(j+1) = n^(j)`.
    Stay,
    /// `n^(j+1) = n^(j) + e_boson` (`up`) or `- e_boson`.
    Hop { boson: u32, up: bool },
}

impl LinkKind {
    /// `None` when the two index vectors are neither equal nor unit neighbors.
    pub fn classify(from: &[usize], to: &[usize]) -> Option<LinkKind> {
        let mut kind = LinkKind::Stay;
        for (i, (&a, &b)) in from.iter().zip(to).enumerate() {
            let d = b as i64 - a as i64;
            if d == 0 {
                continue;
            }
            if d.abs() > 1 || kind != LinkKind::Stay {
                return None;
            }
            kind = LinkKind::Hop {
                boson: i as u32,
                up: d > 0,
            };
        }
        Some(kind)
    }

    /// The relation after adding `step * e_boson` to the difference `n^(j+1) - n^(j)`.
    #[inline]
    pub fn shifted(self, boson: usize, step: i32) -> Option<LinkKind> {
        match self {
            LinkKind::Stay => Some(LinkKind::Hop {
                boson: boson as u32,
                up: step > 0,
            }),
            LinkKind::Hop { boson: b, up } if b as usize == boson && up != (step > 0) => {
                Some(LinkKind::Stay)
            }
            LinkKind::Hop { .. } => None,
        }
    }

    #[inline]
    pub fn is_hop(self) -> bool {
        matches!(self, LinkKind::Hop { .. })
    }
}

/// Kinetic factors `1 - N delta / a^2` (stay) and `delta / (2 a^2)` (hop).
pub(crate) fn kinetic_factors(
    params: &TrotterParams,
    grid: &DigitizationGrid,
    n_bosons: usize,
) -> (f64, f64) {
    let a2 = grid.spacing().powi(2);
    let delta = params.delta();
    (1.0 - n_bosons as f64 * delta / a2, delta / (2.0 * a2))
}

/// First-order Trotter link weight `<n_a| exp(-delta H) |n_b>`, with the
/// potential evaluated on the second slice.
pub fn link_weight(
    na: &[usize],
    nb: &[usize],
    params: &TrotterParams,
    grid: &DigitizationGrid,
    model: &PotentialModel,
) -> Result<f64> {
    let n = model.n_bosons();
    for v in [na, nb] {
        if v.len() != n {
            return Err(Error::ShapeMismatch {
                expected: n,
                actual: v.len(),
            });
        }
    }
    let x: Vec<f64> = nb
        .iter()
        .map(|&m| grid.coordinate(m))
        .collect::<Result<_>>()?;
    for &m in na {
        grid.coordinate(m)?;
    }
    let (stay, hop) = kinetic_factors(params, grid, n);
    let kinetic = match LinkKind::classify(na, nb) {
        None => return Ok(0.0),
        Some(LinkKind::Stay) => stay,
        Some(LinkKind::Hop { .. }) => hop,
    };
    Ok(kinetic * (-params.delta() * model.energy_unchecked(&x)).exp())
}

/// `S = -sum_j log w(n^(j), n^(j+1 mod K))`, recomputed from scratch.
/// Returns `+inf` when any link weight vanishes.
pub fn action(
    config: &PathConfiguration,
    params: &TrotterParams,
    grid: &DigitizationGrid,
    model: &PotentialModel,
) -> Result<f64> {
    if config.n_bosons() != model.n_bosons() {
        return Err(Error::ShapeMismatch {
            expected: model.n_bosons(),
            actual: config.n_bosons(),
        });
    }
    if config.slices() != params.slices() {
        return Err(Error::ShapeMismatch {
            expected: params.slices(),
            actual: config.slices(),
        });
    }
    let k = config.slices();
    let mut s = 0.0;
    for j in 0..k {
        let w = link_weight(
            &config.slice_indices(j),
            &config.slice_indices((j + 1) % k),
            params,
            grid,
            model,
        )?;
        if w <= 0.0 {
            return Ok(f64::INFINITY);
        }
        s -= w.ln();
    }
    Ok(s)
}
