//! 4x4 free scalar field, m^2 = 1, T = 1.

use std::path::Path;

use anyhow::{Context, Result};
use digimc::lattice::thermal_width;
use digimc::{LatticeGeometry, MomentumMode};
use digimc_cli::{analyze, config, monte_carlo, output, AggregateRow, Mode, RawConfig};

use crate::Report;

const ZERO: &str = "mode_power:0,0";
const CORNER: &str = "mode_power:2,2";

fn run(dir: &Path, settings: &str) -> Result<Vec<AggregateRow>> {
    let cfg = config::resolve(Mode::McLattice, RawConfig::from_toml(settings)?)?;
    let dirs = monte_carlo(&cfg, dir)?;
    analyze(&dirs, dir, &[])
}

fn row<'a>(rows: &'a [AggregateRow], a: f64, name: &str) -> Result<&'a AggregateRow> {
    rows.iter()
        .find(|r| r.a_dig == a && r.observable == name)
        .with_context(|| format!("no result for {name} at a_dig = {a}"))
}

fn exact(labels: &[i64]) -> Result<f64> {
    let geometry = LatticeGeometry::new(2, 4)?;
    Ok(thermal_width(
        &MomentumMode::new(&geometry, labels)?,
        1.0,
        1.0,
    )?)
}

pub fn reference_point(r: &mut Report) -> Result<()> {
    let dir = tempfile::tempdir()?;
    let rows = run(
        dir.path(),
        "[digitization]\na_dig = 0.5\nlambda = 2001\n\
         [trotter]\ndelta = 0.002\ntemperature = 1\n\
         [schedule]\nsweeps = 50000\nburn_in = 2000\nstreams = 8\nseed = 1",
    )?;
    for (name, reference, tol) in [(ZERO, 1.0709, 0.03), (CORNER, 0.17611, 0.015)] {
        let res = &row(&rows, 0.5, name)?.result;
        let rel = (res.mean - reference).abs() / reference;
        r.check(
            rel <= tol,
            format!(
                "{name}: {:.5} +- {:.5} vs reference {reference} ({:.2}% off, limit {}%; d = {})",
                res.mean,
                res.std_error,
                100.0 * rel,
                100.0 * tol,
                res.d
            ),
        );
    }
    let (_, run_info) = output::read_manifest(&dir.path().join("a0.5_msq1"))?;
    let fewest = run_info
        .streams
        .iter()
        .map(|s| s.cluster_proposed)
        .min()
        .unwrap_or(0);
    r.check(
        run_info.slices == 500 && run_info.streams.len() >= 4 && fewest >= 1_000_000,
        format!(
            "K = {}, {} streams, at least {fewest} cluster proposals each",
            run_info.slices,
            run_info.streams.len()
        ),
    );
    Ok(())
}

pub fn digitization_trend(r: &mut Report) -> Result<()> {
    let trotter = "[trotter]\ndelta = 0.005\ntemperature = 1\n";
    let fine = tempfile::tempdir()?;
    let fine_rows = run(
        fine.path(),
        &format!(
            "[digitization]\na_dig = 0.5\nlambda = 2001\n{trotter}\
             [schedule]\nsweeps = 40000\nburn_in = 2000\nstreams = 8\nseed = 1"
        ),
    )?;
    let coarse = tempfile::tempdir()?;
    let coarse_rows = run(
        coarse.path(),
        &format!(
            "[digitization]\na_dig = 1.0\nlambda = 2001\n{trotter}\
             [schedule]\nsweeps = 540000\nburn_in = 20000\nstreams = 8\nseed = 1"
        ),
    )?;
    // (exact - reference MC) / exact at a_dig = 1.0
    for (name, labels, reference) in [(ZERO, [0, 0], 0.7038), (CORNER, [2, 2], 0.12792)] {
        let exact = exact(&labels)?;
        let implied = (exact - reference) / exact;
        let fine = row(&fine_rows, 0.5, name)?;
        let coarse = row(&coarse_rows, 1.0, name)?;
        let (rel_fine, err_fine) = fine.relative_error().context("no reference")?;
        let (rel_coarse, err_coarse) = coarse.relative_error().context("no reference")?;
        r.check(
            rel_coarse > rel_fine,
            format!(
                "{name}: relative error {rel_fine:.4} +- {err_fine:.4} at a = 0.5, {rel_coarse:.4} +- {err_coarse:.4} at a = 1.0"
            ),
        );
        let off = (rel_coarse - implied).abs() / implied;
        r.check(
            off <= 0.25,
            format!(
                "{name}: a = 1.0 relative error {rel_coarse:.4} vs reference {implied:.4} ({:.1}% off, limit 25%; d = {})",
                100.0 * off,
                coarse.result.d
            ),
        );
    }
    Ok(())
}
