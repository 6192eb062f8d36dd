//! Exact diagonalization of the truncated single-boson Hamiltonian.
//!
//! In the coordinate basis `p^2/2` is the nearest-neighbor second difference,
//! so `H` is symmetric tridiagonal with diagonal `1/a^2 + V(x(n))` and
//! off-diagonal `-1/(2 a^2)`. The full spectrum comes from implicit QL with
//! Wilkinson shifts, which is `O(points^3)` with eigenvectors and comfortably
//! handles `points = 2001`.

use crate::digitization::{DigitizationGrid, PotentialModel};
use crate::error::{Error, Result};

const MAX_QL_ITERATIONS: usize = 60;
const TRANSFER_TAIL: f64 = 60.0;
const UNDERFLOW_SPLIT: f64 = f64::MIN_POSITIVE / f64::EPSILON;

#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalHamiltonian {
    diag: Vec<f64>,
    offdiag: Vec<f64>,
    grid: DigitizationGrid,
}

impl TridiagonalHamiltonian {
    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    pub fn grid(&self) -> &DigitizationGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// `H v`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut acc = self.diag[i] * v[i];
            if i > 0 {
                acc += self.offdiag[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                acc += self.offdiag[i] * v[i + 1];
            }
            out[i] = acc;
        }
        out
    }
}

pub fn build_hamiltonian(
    grid: &DigitizationGrid,
    model: &PotentialModel,
) -> Result<TridiagonalHamiltonian> {
    if model.n_bosons() != 1 {
        return Err(Error::UnsupportedModel(format!(
            "exact diagonalization needs a single boson, model has {}",
            model.n_bosons()
        )));
    }
    let a = grid.spacing();
    let kinetic = 1.0 / (a * a);
    let diag = potential_diagonal(grid, model)?
        .into_iter()
        .map(|v| kinetic + v)
        .collect();
    let offdiag = vec![-0.5 * kinetic; grid.points() - 1];
    Ok(TridiagonalHamiltonian {
        diag,
        offdiag,
        grid: *grid,
    })
}

/// `V(x(n))` for every grid index of a single-boson model.
pub fn potential_diagonal(grid: &DigitizationGrid, model: &PotentialModel) -> Result<Vec<f64>> {
    grid.coordinates()
        .into_iter()
        .map(|x| model.energy(&[x]))
        .collect()
}

/// Eigen-decomposition with energies ascending and one unit vector per energy.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    energies: Vec<f64>,
    // eigenvector k occupies vectors[k * dim .. (k + 1) * dim]
    vectors: Vec<f64>,
    dim: usize,
}

impl EigenSystem {
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vector(&self, k: usize) -> &[f64] {
        &self.vectors[k * self.dim..(k + 1) * self.dim]
    }

    /// `<v_k| O |v_k>` for an operator diagonal in the coordinate basis.
    pub fn diagonal_element(&self, k: usize, observable: &[f64]) -> f64 {
        self.vector(k)
            .iter()
            .zip(observable)
            .map(|(v, o)| v * v * o)
            .sum()
    }

    /// Largest `|E_k|`, the spectral norm of the decomposed matrix.
    pub fn spectral_norm(&self) -> f64 {
        self.energies.iter().fold(0.0, |m: f64, e| m.max(e.abs()))
    }

    /// `max_k ||H v_k - E_k v_k||_2`.
    pub fn max_residual(&self, h: &TridiagonalHamiltonian) -> f64 {
        (0..self.dim)
            .map(|k| {
                let v = self.vector(k);
                let e = self.energies[k];
                h.apply(v)
                    .iter()
                    .zip(v)
                    .map(|(hv, vi)| (hv - e * vi).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// `max_{j,k} |<v_j|v_k> - delta_jk|`.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.dim {
            let vj = self.vector(j);
            for k in j..self.dim {
                let dot: f64 = vj.iter().zip(self.vector(k)).map(|(a, b)| a * b).sum();
                let target = if j == k { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}

pub fn eigensystem(h: &TridiagonalHamiltonian) -> Result<EigenSystem> {
    symmetric_tridiagonal_eigen(&h.diag, &h.offdiag)
}

/// Full eigen-decomposition of the symmetric tridiagonal matrix with the given
/// diagonal and first off-diagonal, by implicit QL iteration.
pub fn symmetric_tridiagonal_eigen(diag: &[f64], offdiag: &[f64]) -> Result<EigenSystem> {
    let n = diag.len();
    if n < 2 {
        return Err(Error::param("lambda", "need at least a 2x2 matrix"));
    }
    if offdiag.len() != n - 1 {
        return Err(Error::ShapeMismatch {
            expected: n - 1,
            actual: offdiag.len(),
        });
    }
    let mut d = diag.to_vec();
    let mut e = offdiag.to_vec();
    e.push(0.0);
    // Row i of z accumulates eigenvector i, so each Givens rotation touches
    // two contiguous rows.
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }

    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                // the absolute floor splits off underflowed corners, where the
                // relative test is itself subnormal
                if e[m].abs() <= f64::EPSILON * dd || e[m].abs() <= UNDERFLOW_SPLIT {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > MAX_QL_ITERATIONS {
                return Err(Error::NoConvergence {
                    index: l,
                    iterations: MAX_QL_ITERATIONS,
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + if g >= 0.0 { r } else { -r });
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                rotate_rows(&mut z, n, i, c, s);
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let mut energies = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n * n);
    for &k in &order {
        energies.push(d[k]);
        vectors.extend_from_slice(&z[k * n..(k + 1) * n]);
    }
    Ok(EigenSystem {
        energies,
        vectors,
        dim: n,
    })
}

#[inline]
fn rotate_rows(z: &mut [f64], n: usize, i: usize, c: f64, s: f64) {
    let (head, tail) = z.split_at_mut((i + 1) * n);
    let lower = &mut head[i * n..];
    let upper = &mut tail[..n];
    for (zi, zi1) in lower.iter_mut().zip(upper.iter_mut()) {
        let f = *zi1;
        *zi1 = s * *zi + c * f;
        *zi = c * *zi - s * f;
    }
}

/// Canonical-ensemble average of a coordinate-diagonal observable.
///
/// Boltzmann factors are taken relative to the ground energy, so large
/// `beta` and `1/a^2`-sized energies do not underflow the normalization.
pub fn thermal_expectation(es: &EigenSystem, observable: &[f64], beta: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::param(
            "beta",
            format!("must be positive, got {beta}"),
        ));
    }
    if observable.len() != es.dim {
        return Err(Error::ShapeMismatch {
            expected: es.dim,
            actual: observable.len(),
        });
    }
    let e0 = es.energies[0];
    let mut z = 0.0;
    let mut acc = 0.0;
    for (k, &e) in es.energies.iter().enumerate() {
        let w = (-beta * (e - e0)).exp();
        if w == 0.0 {
            break;
        }
        z += w;
        acc += w * es.diagonal_element(k, observable);
    }
    Ok(acc / z)
}

/// Thermal average of `V` for a single-boson model on the given grid.
pub fn thermal_potential(
    grid: &DigitizationGrid,
    model: &PotentialModel,
    beta: f64,
) -> Result<f64> {
    let h = build_hamiltonian(grid, model)?;
    let es = eigensystem(&h)?;
    thermal_expectation(&es, &potential_diagonal(grid, model)?, beta)
}

/// An exact value together with its recomputation at half the cutoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffCheck {
    pub value: f64,
    pub halved_cutoff_value: f64,
    pub halved_points: usize,
}

impl CutoffCheck {
    /// True when both values agree in their first `digits` significant digits.
    pub fn agrees_to(&self, digits: usize) -> bool {
        same_significant_digits(self.value, self.halved_cutoff_value, digits)
    }
}

/// Thermal average of `observable(x)` at spacing `a` and `points` grid
/// points, recomputed with the cutoff halved at the same spacing.
pub fn cutoff_checked_expectation<F>(
    spacing: f64,
    points: usize,
    model: &PotentialModel,
    beta: f64,
    observable: F,
) -> Result<CutoffCheck>
where
    F: Fn(f64) -> f64,
{
    let halved_points = (points - 1) / 2 + 1;
    let mut values = [0.0; 2];
    for (slot, &pts) in values.iter_mut().zip(&[points, halved_points]) {
        let grid = DigitizationGrid::with_spacing(pts, spacing)?;
        let h = build_hamiltonian(&grid, model)?;
        let es = eigensystem(&h)?;
        let obs: Vec<f64> = grid.coordinates().into_iter().map(&observable).collect();
        *slot = thermal_expectation(&es, &obs, beta)?;
    }
    Ok(CutoffCheck {
        value: values[0],
        halved_cutoff_value: values[1],
        halved_points,
    })
}

/// Compares the decimal mantissas of `a` and `b` rounded to `digits` significant digits.
pub fn same_significant_digits(a: f64, b: f64, digits: usize) -> bool {
    let p = digits.saturating_sub(1);
    format!("{a:.p$e}") == format!("{b:.p$e}")
}

/// Expectation of a coordinate-diagonal observable in the Trotterized,
/// first-order-expanded ensemble that the Monte Carlo samples, computed from
/// the transfer matrix `M_ab = w(a, b)` of a single boson.
///
/// `M = T E` with `E = diag(exp(-delta V))` is similar to the symmetric
/// tridiagonal `E^(1/2) T E^(1/2)`, so `Tr(M^K O) / Tr(M^K)` follows from its
/// eigen-decomposition.
pub fn trotter_expectation(
    grid: &DigitizationGrid,
    model: &PotentialModel,
    delta: f64,
    slices: usize,
    observable: &[f64],
) -> Result<f64> {
    if model.n_bosons() != 1 {
        return Err(Error::UnsupportedModel(
            "transfer matrix needs a single boson".into(),
        ));
    }
    if observable.len() != grid.points() {
        return Err(Error::ShapeMismatch {
            expected: grid.points(),
            actual: observable.len(),
        });
    }
    let a2 = grid.spacing().powi(2);
    let stay = 1.0 - delta / a2;
    let hop = delta / (2.0 * a2);
    if !(stay > 0.0) {
        return Err(Error::param(
            "delta",
            "transfer matrix has a non-positive diagonal weight",
        ));
    }
    // Sites with exp(-delta (V - V_min)) below exp(-TAIL) never carry weight
    // at double precision; dropping them keeps the matrix from being so
    // strongly graded that QL stalls.
    let v = potential_diagonal(grid, model)?;
    let v_min = v.iter().copied().fold(f64::INFINITY, f64::min);
    let kept = |x: &f64| delta * (x - v_min) <= TRANSFER_TAIL;
    let lo = v.iter().position(kept).unwrap_or(0);
    let hi = v
        .iter()
        .rposition(kept)
        .unwrap_or(v.len() - 1)
        .max(lo + 1)
        .min(v.len() - 1);
    let lo = lo.min(hi - 1);
    let observable = &observable[lo..=hi];
    let half: Vec<f64> = v[lo..=hi]
        .iter()
        .map(|x| (-0.5 * delta * (x - v_min)).exp())
        .collect();
    let diag: Vec<f64> = half.iter().map(|h| stay * h * h).collect();
    let off: Vec<f64> = half.windows(2).map(|w| hop * w[0] * w[1]).collect();
    let es = symmetric_tridiagonal_eigen(&diag, &off)?;

    let log_top = es
        .energies
        .iter()
        .filter(|&&m| m != 0.0)
        .map(|m| slices as f64 * m.abs().ln())
        .fold(f64::NEG_INFINITY, f64::max);
    let mut z = 0.0;
    let mut acc = 0.0;
    for (k, &mu) in es.energies.iter().enumerate() {
        if mu == 0.0 {
            continue;
        }
        let sign = if mu < 0.0 && slices % 2 == 1 {
            -1.0
        } else {
            1.0
        };
        let w = sign * (slices as f64 * mu.abs().ln() - log_top).exp();
        if w == 0.0 {
            continue;
        }
        z += w;
        acc += w * es.diagonal_element(k, observable);
    }
    Ok(acc / z)
}
