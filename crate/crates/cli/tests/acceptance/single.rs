use anyhow::{Context, Result};
use digimc::exact_diag::{
    build_hamiltonian, eigensystem, potential_diagonal, same_significant_digits,
    symmetric_tridiagonal_eigen, trotter_expectation,
};
use digimc::{DigitizationGrid, PotentialModel};
use digimc_cli::{analyze, config, exact_diag, monte_carlo, Mode, RawConfig};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;

use crate::Report;

/// (a_dig, m^2, exact <V>) at beta = 10.
const REFERENCE: [(f64, f64, f64); 6] = [
    (0.3, 1.0, 0.2618),
    (0.5, 1.0, 0.2539),
    (0.7, 1.0, 0.2414),
    (0.3, -1.0, -0.06354),
    (0.5, -1.0, -0.06633),
    (0.7, -1.0, -0.07024),
];

pub fn exact_column(r: &mut Report) -> Result<()> {
    let dir = tempfile::tempdir()?;
    let cfg = config::resolve(Mode::ExactDiag, RawConfig::default())?;
    let rows = exact_diag(&cfg, dir.path())?;
    for (a, m2, expected) in REFERENCE {
        let row = rows
            .iter()
            .find(|row| row.a_dig == a && row.m_squared == m2)
            .context("missing exact-diag row")?;
        r.check(
            same_significant_digits(row.value, expected, 4) && row.stable,
            format!(
                "a = {a}, m2 = {m2:+}: {:.6e} (R halved: {:.6e}, Lambda = {}), reference {expected}",
                row.value, row.halved_cutoff_value, row.points
            ),
        );
    }
    Ok(())
}

pub const C2_STREAMS: usize = 8;

pub fn monte_carlo_column(r: &mut Report) -> Result<()> {
    let dir = tempfile::tempdir()?;
    let raw = RawConfig::from_toml(&format!(
        "[trotter]\ndelta = 0.001\nbeta = 10\n\
         [schedule]\nsweeps = 10000\nburn_in = 2000\nstreams = {C2_STREAMS}\nseed = 1"
    ))?;
    let cfg = config::resolve(Mode::McSingle, raw)?;
    let dirs = monte_carlo(&cfg, dir.path())?;
    let rows = analyze(&dirs, dir.path(), &[])?;
    for row in &rows {
        let (exact, _) = row.exact.context("no exact reference")?;
        let res = &row.result;
        let z = (res.mean - exact) / res.std_error;
        // the finite-delta ensemble the chain samples, for diagnosis
        let grid = DigitizationGrid::with_spacing(2001, row.a_dig)?;
        let model = PotentialModel::quartic(1.0, row.m_squared);
        let v = potential_diagonal(&grid, &model)?;
        let trotter = trotter_expectation(&grid, &model, row.delta, row.slices, &v)?;
        r.check(
            z.abs() <= 3.0,
            format!(
                "a = {}, m2 = {:+}: {:.5} +- {:.5} vs exact {exact:.5} ({z:+.2} sigma; transfer matrix {trotter:.5}; d = {}, {} streams x {} sweeps)",
                row.a_dig, row.m_squared, res.mean, res.std_error, res.d, res.n_streams, res.n_steps
            ),
        );
    }
    r.check(
        rows.len() == 6,
        format!("{} of 6 points analyzed", rows.len()),
    );
    Ok(())
}

fn dense(diag: &[f64], off: &[f64]) -> DMatrix<f64> {
    let n = diag.len();
    DMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
        0 => diag[i],
        1 => off[i.min(j)],
        _ => 0.0,
    })
}

pub fn eigensolver_contract(r: &mut Report) -> Result<()> {
    for points in [101, 501, 2001] {
        let grid = DigitizationGrid::with_spacing(points, 0.5)?;
        let h = build_hamiltonian(&grid, &PotentialModel::quartic(1.0, -1.0))?;
        let es = eigensystem(&h)?;
        let norm = es.spectral_norm();
        let (res, orth) = (es.max_residual(&h), es.orthonormality_error());
        r.check(
            res <= 1e-10 * norm && orth <= 1e-10,
            format!(
                "Lambda = {points}: residual {res:.2e} (bound {:.2e}), orthonormality {orth:.2e}",
                1e-10 * norm
            ),
        );
    }

    let grid = DigitizationGrid::new(401, 10.0)?;
    let es = eigensystem(&build_hamiltonian(
        &grid,
        &PotentialModel::quartic(0.0, 1.0),
    )?)?;
    let e0 = es.energies()[0];
    r.check(
        (e0 - 0.5).abs() <= 1e-3,
        format!("harmonic E0 at a_dig = {}: {e0:.6}", grid.spacing()),
    );

    let mut rng = Pcg64::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for n in [2usize, 5, 40, 120] {
        let diag: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let off: Vec<f64> = (0..n - 1).map(|_| rng.random_range(-1.0..1.0)).collect();
        let es = symmetric_tridiagonal_eigen(&diag, &off)?;
        let mut reference: Vec<f64> = dense(&diag, &off)
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        reference.sort_by(f64::total_cmp);
        for (a, b) in es.energies().iter().zip(&reference) {
            worst = worst.max((a - b).abs() / es.spectral_norm());
        }
        // spectral decomposition reproduces the matrix
        let m = dense(&diag, &off);
        let mut rebuilt = DMatrix::<f64>::zeros(n, n);
        for k in 0..n {
            let v = nalgebra::DVector::from_column_slice(es.vector(k));
            rebuilt += es.energies()[k] * &v * v.transpose();
        }
        let err = (rebuilt - m).abs().max();
        r.check(
            err <= 1e-9,
            format!("n = {n}: spectral reconstruction error {err:.2e}"),
        );
    }
    r.check(
        worst <= 1e-11,
        format!("dense solver agreement: {worst:.2e} relative to |H|"),
    );
    Ok(())
}
