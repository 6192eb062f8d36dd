//! Execution of the exact-diagonalization and Monte Carlo modes.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use digimc::exact_diag::cutoff_checked_expectation;
use digimc::mcmc::{run_streams, stream_seed, ChainOutput, PathIntegral, Schedule};
use digimc::{Observable, PotentialModel};

use crate::config::{Mode, RunConfig, RunPoint};
use crate::output::{self, RunInfo, StreamRecord};

/// Number of significant digits that must survive halving the cutoff.
pub const STABLE_DIGITS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct ExactRow {
    pub a_dig: f64,
    pub m_squared: f64,
    pub beta: f64,
    pub points: usize,
    pub cutoff: f64,
    pub observable: String,
    pub value: f64,
    pub halved_cutoff_value: f64,
    pub stable: bool,
}

fn diagonal_function(obs: &Observable, model: &PotentialModel) -> impl Fn(f64) -> f64 {
    let (obs, model) = (obs.clone(), model.clone());
    move |x| match obs {
        Observable::Potential => model.energy(&[x]).expect("single boson"),
        Observable::Coordinate => x,
        Observable::CoordinateSquared => x * x,
        Observable::ModePower(_) => unreachable!("rejected at configuration"),
    }
}

/// Thermal averages by exact diagonalization, each recomputed at half the
/// cutoff. Writes `exact_diag.csv` into `out`.
pub fn exact_diag(config: &RunConfig, out: &Path) -> Result<Vec<ExactRow>> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut rows = Vec::new();
    for point in &config.points {
        for obs in &config.observables {
            let check = cutoff_checked_expectation(
                point.a_dig,
                point.grid.points(),
                &point.model,
                point.beta,
                diagonal_function(obs, &point.model),
            )
            .with_context(|| format!("exact diagonalization at {}", point.label()))?;
            let stable = check.agrees_to(STABLE_DIGITS);
            if !stable {
                log::warn!(
                    "{} {obs}: {} changes to {} when the cutoff is halved; increase digitization.lambda",
                    point.label(),
                    check.value,
                    check.halved_cutoff_value
                );
            }
            log::info!("{} {obs} = {:.6e}", point.label(), check.value);
            rows.push(ExactRow {
                a_dig: point.a_dig,
                m_squared: point.m_squared,
                beta: point.beta,
                points: point.grid.points(),
                cutoff: point.grid.cutoff(),
                observable: obs.to_string(),
                value: check.value,
                halved_cutoff_value: check.halved_cutoff_value,
                stable,
            });
        }
    }
    output::write_csv(
        &out.join(output::EXACT_DIAG),
        &[
            "a_dig",
            "m_squared",
            "beta",
            "lambda",
            "r",
            "observable",
            "value",
            "halved_r_value",
            "digits_stable",
        ],
        rows.iter().map(|r| {
            vec![
                r.a_dig.to_string(),
                r.m_squared.to_string(),
                r.beta.to_string(),
                r.points.to_string(),
                r.cutoff.to_string(),
                r.observable.clone(),
                output::float(r.value),
                output::float(r.halved_cutoff_value),
                r.stable.to_string(),
            ]
        }),
    )?;
    std::fs::write(out.join(output::MANIFEST), config.resolved.to_toml())?;
    Ok(rows)
}

/// Runs every point of a Monte Carlo configuration, one subdirectory each.
/// Returns the point directories.
pub fn monte_carlo(config: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let mut dirs = Vec::new();
    for point in &config.points {
        let dir = out.join(point.label());
        run_point(config, point, &dir)?;
        dirs.push(dir);
    }
    Ok(dirs)
}

fn run_point(config: &RunConfig, point: &RunPoint, dir: &Path) -> Result<()> {
    let params = point
        .trotter
        .expect("monte carlo points carry Trotter parameters");
    let sys = PathIntegral::new(point.grid, point.model.clone(), params)?;
    let s = config.schedule;
    let schedule = Schedule {
        sweeps: s.burn_in + s.sweeps,
        burn_in: s.burn_in,
        measure_every: s.measure_every,
    };
    log::info!(
        "{}: {} streams x ({} + {}) sweeps, K = {}, delta = {}, {} proposals per sweep",
        point.label(),
        s.streams,
        s.burn_in,
        s.sweeps,
        params.slices(),
        params.delta(),
        params.slices() * point.model.n_bosons()
    );
    let started = std::time::Instant::now();
    let outputs = run_streams(
        &sys,
        &schedule,
        &config.observables,
        s.seed,
        s.streams,
        s.threads,
    )?;
    log::info!(
        "{}: finished in {:.1} s",
        point.label(),
        started.elapsed().as_secs_f64()
    );

    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut records = Vec::new();
    for chain in &outputs {
        records.push(write_stream(dir, &schedule, chain)?);
    }
    debug_assert!(outputs
        .iter()
        .all(|o| o.seed == stream_seed(s.seed, o.stream_id)));
    let info = RunInfo {
        mode: config.mode.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        fingerprint: sys.fingerprint(),
        a_dig: point.a_dig,
        m_squared: point.m_squared,
        points: point.grid.points(),
        cutoff: point.grid.cutoff(),
        n_bosons: point.model.n_bosons(),
        beta: params.beta(),
        delta: params.delta(),
        slices: params.slices(),
        b_max: params.max_block(),
        total_sweeps: schedule.sweeps,
        tau_rule: output::TAU_RULE.to_string(),
        blocking_rule: output::BLOCKING_RULE.to_string(),
        streams: records,
    };
    output::write_manifest(dir, &config.point_echo(point), &info)
}

fn write_stream(dir: &Path, schedule: &Schedule, chain: &ChainOutput) -> Result<StreamRecord> {
    let file = format!("stream_{:03}.csv", chain.stream_id);
    let len = chain.series.first().map_or(0, |s| s.values.len());
    let rows = (0..len).flat_map(|m| {
        chain.series.iter().map(move |s| {
            vec![
                schedule.sweep_of(m).to_string(),
                s.name.clone(),
                output::float(s.values[m]),
            ]
        })
    });
    output::write_csv(&dir.join(&file), &["sweep", "observable", "value"], rows)?;
    let (c, n) = (&chain.tally.cluster, &chain.tally.single_site);
    Ok(StreamRecord {
        id: chain.stream_id,
        seed: format!("{:#018x}", chain.seed),
        file,
        cluster_proposed: c.proposed,
        cluster_accepted: c.accepted,
        cluster_acceptance: c.acceptance_rate(),
        single_site_proposed: n.proposed,
        single_site_accepted: n.accepted,
        single_site_acceptance: n.acceptance_rate(),
    })
}

/// Dispatches a resolved configuration. Monte Carlo runs are analyzed in
/// place afterwards.
pub fn execute(config: &RunConfig, out: &Path) -> Result<()> {
    match config.mode {
        Mode::ExactDiag => exact_diag(config, out).map(|_| ()),
        Mode::McSingle | Mode::McLattice => {
            let dirs = monte_carlo(config, out)?;
            match crate::analyze::analyze(&dirs, out, &[]) {
                Ok(_) => Ok(()),
                Err(e) => {
                    log::warn!("analysis skipped: {e:#}");
                    Ok(())
                }
            }
        }
        Mode::Analyze => unreachable!("analyze is not a run mode"),
    }
}
