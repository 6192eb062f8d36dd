//! Free scalar field on a periodic `d`-dimensional spatial lattice.
//!
//! Everything is in lattice units (`a_lat = 1`). Sites are numbered row-major,
//! the last direction varying fastest.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeGeometry {
    dims: usize,
    extent: usize,
    // 2 * dims entries per site: +mu then -mu for each direction. Empty when
    // extent == 1 since every link is then a self-link.
    neighbors: Vec<usize>,
}

impl LatticeGeometry {
    pub fn new(dims: usize, extent: usize) -> Result<Self> {
        if dims == 0 {
            return Err(Error::param("dims", "lattice needs at least one dimension"));
        }
        if extent == 0 {
            return Err(Error::param("extent", "lattice extent must be positive"));
        }
        let n_sites = extent
            .checked_pow(dims as u32)
            .ok_or_else(|| Error::param("extent", "lattice too large"))?;
        let mut geometry = Self {
            dims,
            extent,
            neighbors: Vec::new(),
        };
        if extent > 1 {
            let mut table = Vec::with_capacity(n_sites * 2 * dims);
            for site in 0..n_sites {
                for mu in 0..dims {
                    table.push(geometry.neighbor(site, mu, true));
                    table.push(geometry.neighbor(site, mu, false));
                }
            }
            geometry.neighbors = table;
        }
        Ok(geometry)
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn extent(&self) -> usize {
        self.extent
    }

    /// `L^d`, the number of bosons.
    pub fn n_sites(&self) -> usize {
        self.extent.pow(self.dims as u32)
    }

    pub fn site_index(&self, coords: &[usize]) -> Result<usize> {
        if coords.len() != self.dims {
            return Err(Error::ShapeMismatch {
                expected: self.dims,
                actual: coords.len(),
            });
        }
        let mut index = 0;
        for &c in coords {
            if c >= self.extent {
                return Err(Error::IndexOutOfRange {
                    index: c as i64,
                    points: self.extent,
                });
            }
            index = index * self.extent + c;
        }
        Ok(index)
    }

    pub fn site_coords(&self, mut site: usize) -> Vec<usize> {
        let mut coords = vec![0; self.dims];
        for c in coords.iter_mut().rev() {
            *c = site % self.extent;
            site /= self.extent;
        }
        coords
    }

    /// Periodic neighbor of `site` one step along direction `mu`.
    pub fn neighbor(&self, site: usize, mu: usize, forward: bool) -> usize {
        let stride = self.extent.pow((self.dims - 1 - mu) as u32);
        let c = (site / stride) % self.extent;
        let shifted = if forward {
            (c + 1) % self.extent
        } else {
            (c + self.extent - 1) % self.extent
        };
        site - c * stride + shifted * stride
    }

    /// Sites sharing a link with `site`, one entry per link.
    #[inline]
    pub fn neighbors(&self, site: usize) -> impl Iterator<Item = usize> + '_ {
        let width = 2 * self.dims;
        let start = if self.neighbors.is_empty() {
            0
        } else {
            site * width
        };
        let end = if self.neighbors.is_empty() {
            0
        } else {
            start + width
        };
        self.neighbors[start..end].iter().copied()
    }
}

/// Lattice momentum `q_j = 2 pi l_j / L`, stored by its integer labels `l_j in 0..L`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MomentumMode {
    labels: Vec<usize>,
    extent: usize,
}

impl MomentumMode {
    pub fn new(geometry: &LatticeGeometry, labels: &[i64]) -> Result<Self> {
        if labels.len() != geometry.dims() {
            return Err(Error::ShapeMismatch {
                expected: geometry.dims(),
                actual: labels.len(),
            });
        }
        let l = geometry.extent() as i64;
        Ok(Self {
            labels: labels.iter().map(|&x| x.rem_euclid(l) as usize).collect(),
            extent: geometry.extent(),
        })
    }

    /// The zero mode.
    pub fn zero(geometry: &LatticeGeometry) -> Self {
        Self {
            labels: vec![0; geometry.dims()],
            extent: geometry.extent(),
        }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn extent(&self) -> usize {
        self.extent
    }

    /// Momentum components in radians.
    pub fn components(&self) -> Vec<f64> {
        self.labels
            .iter()
            .map(|&l| 2.0 * PI * l as f64 / self.extent as f64)
            .collect()
    }

    pub fn negated(&self) -> Self {
        Self {
            labels: self
                .labels
                .iter()
                .map(|&l| (self.extent - l) % self.extent)
                .collect(),
            extent: self.extent,
        }
    }
}

impl fmt::Display for MomentumMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.labels.iter().map(|l| l.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

pub fn lattice_potential(
    geometry: &LatticeGeometry,
    mass_squared: f64,
    phi: &[f64],
) -> Result<f64> {
    check_len(geometry, phi)?;
    Ok(lattice_potential_unchecked(geometry, mass_squared, phi))
}

pub(crate) fn lattice_potential_unchecked(
    geometry: &LatticeGeometry,
    mass_squared: f64,
    phi: &[f64],
) -> f64 {
    let mut total = 0.0;
    for (site, &p) in phi.iter().enumerate() {
        let mut gradient = 0.0;
        if geometry.extent > 1 {
            for mu in 0..geometry.dims {
                let d = phi[geometry.neighbor(site, mu, true)] - p;
                gradient += d * d;
            }
        }
        total += 0.5 * gradient + 0.5 * mass_squared * p * p;
    }
    total
}

/// Precomputed phases `exp(-i q.n)` for repeated evaluation of one mode.
#[derive(Debug, Clone)]
pub struct ModeProjector {
    mode: MomentumMode,
    re: Vec<f64>,
    im: Vec<f64>,
    norm: f64,
}

impl ModeProjector {
    pub fn new(geometry: &LatticeGeometry, mode: &MomentumMode) -> Result<Self> {
        if mode.extent != geometry.extent() || mode.labels.len() != geometry.dims() {
            return Err(Error::param(
                "mode",
                format!("mode {mode} does not fit the lattice"),
            ));
        }
        let l = geometry.extent();
        // exp(-2 pi i k / L) tabulated so that entries k and L-k are exact conjugates.
        let mut table = vec![(1.0, 0.0); l];
        for k in 1..=l / 2 {
            let theta = 2.0 * PI * k as f64 / l as f64;
            table[k] = (theta.cos(), -theta.sin());
            table[l - k] = (theta.cos(), theta.sin());
        }
        if l.is_multiple_of(2) {
            table[l / 2] = (-1.0, 0.0);
        }
        let n = geometry.n_sites();
        let mut re = Vec::with_capacity(n);
        let mut im = Vec::with_capacity(n);
        for site in 0..n {
            let coords = geometry.site_coords(site);
            let k = coords
                .iter()
                .zip(&mode.labels)
                .map(|(&c, &q)| c * q)
                .sum::<usize>()
                % l;
            re.push(table[k].0);
            im.push(table[k].1);
        }
        Ok(Self {
            mode: mode.clone(),
            re,
            im,
            norm: 1.0 / n as f64,
        })
    }

    pub fn mode(&self) -> &MomentumMode {
        &self.mode
    }

    /// `|phi~_q|^2` for a field of the right length.
    #[inline]
    pub fn power(&self, phi: &[f64]) -> f64 {
        let mut re = 0.0;
        let mut im = 0.0;
        for ((&p, &c), &s) in phi.iter().zip(&self.re).zip(&self.im) {
            re += c * p;
            im += s * p;
        }
        (re * re + im * im) * self.norm
    }
}

/// `phi~_q phi~_{-q} = |L^{-d/2} sum_n exp(-i q.n) phi_n|^2`.
pub fn fourier_mode_power(
    geometry: &LatticeGeometry,
    phi: &[f64],
    mode: &MomentumMode,
) -> Result<f64> {
    check_len(geometry, phi)?;
    Ok(ModeProjector::new(geometry, mode)?.power(phi))
}

/// `omega^2 = m^2 + 4 sum_mu sin^2(q_mu / 2)`.
pub fn free_dispersion(mode: &MomentumMode, mass_squared: f64) -> Result<f64> {
    let omega_squared = mass_squared
        + 4.0
            * mode
                .components()
                .iter()
                .map(|q| (q / 2.0).sin().powi(2))
                .sum::<f64>();
    if !(omega_squared > 0.0) {
        return Err(Error::MasslessMode { omega_squared });
    }
    Ok(omega_squared)
}

/// Thermal width `1 / (2 omega tanh(beta omega / 2))` of a free mode.
pub fn thermal_width(mode: &MomentumMode, mass_squared: f64, beta: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::param(
            "beta",
            format!("must be positive, got {beta}"),
        ));
    }
    let omega = free_dispersion(mode, mass_squared)?.sqrt();
    Ok(1.0 / (2.0 * omega * (0.5 * beta * omega).tanh()))
}

/// Zero-temperature width `1 / (2 omega)`.
pub fn zero_point_width(mode: &MomentumMode, mass_squared: f64) -> Result<f64> {
    Ok(0.5 / free_dispersion(mode, mass_squared)?.sqrt())
}

fn check_len(geometry: &LatticeGeometry, phi: &[f64]) -> Result<()> {
    if phi.len() != geometry.n_sites() {
        return Err(Error::ShapeMismatch {
            expected: geometry.n_sites(),
            actual: phi.len(),
        });
    }
    Ok(())
}
