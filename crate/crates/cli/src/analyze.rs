//! Aggregation of stream CSVs into result tables.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use digimc::exact_diag::{build_hamiltonian, eigensystem, thermal_expectation};
use digimc::lattice::thermal_width;
use digimc::stats::{block_and_aggregate, relative_error_table, LONG_STREAM_FACTOR};
use digimc::{
    AggregateResult, DigitizationGrid, LatticeGeometry, MomentumMode, Observable, ObservableSeries,
    PotentialModel,
};
use serde::Deserialize;

use crate::config::{PotentialKind, RawConfig};
use crate::output::{self, RunInfo};

/// Where the reference value of a row comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExactSource {
    /// Given on the command line.
    User,
    /// Free-field mode width, independent of the digitization.
    ThermalWidth,
    /// Exact diagonalization on the same grid.
    ExactDiag,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub dir: PathBuf,
    pub a_dig: f64,
    pub m_squared: f64,
    pub beta: f64,
    pub delta: f64,
    pub slices: usize,
    pub observable: String,
    pub result: AggregateResult,
    pub exact: Option<(f64, ExactSource)>,
}

impl AggregateRow {
    pub fn relative_error(&self) -> Option<(f64, f64)> {
        self.exact
            .map(|(e, _)| ((e - self.result.mean) / e, self.result.std_error / e.abs()))
    }
}

#[derive(Deserialize)]
struct CsvRow {
    #[allow(dead_code)]
    sweep: u64,
    observable: String,
    value: f64,
}

/// Point directories below `input`: the directory itself if it holds a run
/// manifest, otherwise its immediate subdirectories that do.
fn point_dirs(input: &Path) -> Result<Vec<PathBuf>> {
    if is_point(input) {
        return Ok(vec![input.to_path_buf()]);
    }
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(input)
        .with_context(|| format!("reading {}", input.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| is_point(p))
        .collect();
    dirs.sort();
    Ok(dirs)
}

fn is_point(dir: &Path) -> bool {
    dir.join(output::MANIFEST).is_file() && output::read_manifest(dir).is_ok()
}

fn read_streams(dir: &Path, run: &RunInfo) -> Result<Vec<(String, Vec<ObservableSeries>)>> {
    let mut by_name: Vec<(String, Vec<ObservableSeries>)> = Vec::new();
    for stream in &run.streams {
        let path = dir.join(&stream.file);
        let mut reader =
            csv::Reader::from_path(&path).with_context(|| format!("opening {}", path.display()))?;
        let mut values: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for row in reader.deserialize::<CsvRow>() {
            let row = row.with_context(|| format!("reading {}", path.display()))?;
            if !values.contains_key(&row.observable)
                && !by_name.iter().any(|(n, _)| *n == row.observable)
            {
                by_name.push((row.observable.clone(), Vec::new()));
            }
            values.entry(row.observable).or_default().push(row.value);
        }
        for (name, series) in &mut by_name {
            let v = values.remove(name).unwrap_or_default();
            series.push(ObservableSeries::new(
                name.clone(),
                v,
                stream.id,
                run.fingerprint.clone(),
            ));
        }
    }
    Ok(by_name)
}

fn automatic_exact(config: &RawConfig, run: &RunInfo, observable: &str) -> Result<Option<f64>> {
    let obs: Observable = observable.parse()?;
    let physics = &config.physics;
    let m_squared = run.m_squared;
    match (physics.potential, &obs) {
        (Some(PotentialKind::Lattice), Observable::ModePower(labels)) => {
            let geometry =
                LatticeGeometry::new(physics.dims.unwrap_or(1), physics.extent.unwrap_or(1))?;
            let mode = MomentumMode::new(&geometry, labels)?;
            Ok(Some(thermal_width(&mode, m_squared, run.beta)?))
        }
        (
            Some(PotentialKind::Quartic),
            Observable::Potential | Observable::Coordinate | Observable::CoordinateSquared,
        ) => {
            let model = PotentialModel::quartic(physics.lambda.unwrap_or(1.0), m_squared);
            let grid = DigitizationGrid::with_spacing(run.points, run.a_dig)?;
            let es = eigensystem(&build_hamiltonian(&grid, &model)?)?;
            let diag: Vec<f64> = grid
                .coordinates()
                .into_iter()
                .map(|x| match obs {
                    Observable::Potential => model.energy(&[x]).expect("single boson"),
                    Observable::Coordinate => x,
                    _ => x * x,
                })
                .collect();
            Ok(Some(thermal_expectation(&es, &diag, run.beta)?))
        }
        _ => Ok(None),
    }
}

/// Aggregates every point found under `inputs`, writing `aggregate.csv` and
/// one relative-error table per observable with a digitization-independent
/// reference into `out`. `exact` overrides reference values by observable name.
pub fn analyze(
    inputs: &[PathBuf],
    out: &Path,
    exact: &[(String, f64)],
) -> Result<Vec<AggregateRow>> {
    let mut dirs = Vec::new();
    for input in inputs {
        dirs.extend(point_dirs(input)?);
    }
    if dirs.is_empty() {
        bail!("no run directories with a manifest under the given inputs");
    }
    let mut rows = Vec::new();
    for dir in &dirs {
        let (config, run) = output::read_manifest(dir)?;
        for (name, series) in read_streams(dir, &run)? {
            let result = block_and_aggregate(&series)
                .with_context(|| format!("{} {name}", dir.display()))?;
            if (run.a_dig >= 0.9 || result.d >= 1000) && !result.streams_exceed(LONG_STREAM_FACTOR)
            {
                log::warn!(
                    "{} {name}: d = {} but streams hold only {} samples, not more than {} d",
                    dir.display(),
                    result.d,
                    result.n_steps,
                    LONG_STREAM_FACTOR
                );
            }
            let reference = match exact.iter().find(|(n, _)| *n == name) {
                Some(&(_, v)) => Some((v, ExactSource::User)),
                None => automatic_exact(&config, &run, &name)?.map(|v| {
                    let source = match config.physics.potential {
                        Some(PotentialKind::Lattice) => ExactSource::ThermalWidth,
                        _ => ExactSource::ExactDiag,
                    };
                    (v, source)
                }),
            };
            log::info!(
                "{} {name}: {:.6} +- {:.6} (d = {}, {} streams)",
                dir.display(),
                result.mean,
                result.std_error,
                result.d,
                result.n_streams
            );
            rows.push(AggregateRow {
                dir: dir.clone(),
                a_dig: run.a_dig,
                m_squared: run.m_squared,
                beta: run.beta,
                delta: run.delta,
                slices: run.slices,
                observable: name,
                result,
                exact: reference,
            });
        }
    }
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    write_aggregate(&out.join(output::AGGREGATE), &rows)?;
    write_relative_tables(out, &rows)?;
    Ok(rows)
}

fn write_aggregate(path: &Path, rows: &[AggregateRow]) -> Result<()> {
    let opt = |v: Option<f64>| v.map(output::float).unwrap_or_default();
    output::write_csv(
        path,
        &[
            "a_dig",
            "m_squared",
            "beta",
            "delta",
            "K",
            "observable",
            "mean",
            "err",
            "d",
            "tau_int",
            "n_stream",
            "n_step",
            "exact",
            "rel_err",
            "rel_err_err",
        ],
        rows.iter().map(|r| {
            let rel = r.relative_error();
            vec![
                r.a_dig.to_string(),
                r.m_squared.to_string(),
                r.beta.to_string(),
                r.delta.to_string(),
                r.slices.to_string(),
                r.observable.clone(),
                output::float(r.result.mean),
                output::float(r.result.std_error),
                r.result.d.to_string(),
                output::float(r.result.tau_int),
                r.result.n_streams.to_string(),
                r.result.n_steps.to_string(),
                opt(r.exact.map(|e| e.0)),
                opt(rel.map(|e| e.0)),
                opt(rel.map(|e| e.1)),
            ]
        }),
    )
}

// groups share the observable, mass, temperature and reference value
fn write_relative_tables(out: &Path, rows: &[AggregateRow]) -> Result<()> {
    type Key = (String, u64, u64, u64);
    let mut groups: BTreeMap<Key, Vec<&AggregateRow>> = BTreeMap::new();
    for r in rows {
        if let Some((e, source)) = r.exact {
            if source != ExactSource::ExactDiag {
                let key = (
                    r.observable.clone(),
                    r.m_squared.to_bits(),
                    r.beta.to_bits(),
                    e.to_bits(),
                );
                groups.entry(key).or_default().push(r);
            }
        }
    }
    let mut per_name: BTreeMap<&str, usize> = BTreeMap::new();
    for (name, ..) in groups.keys() {
        *per_name.entry(name).or_default() += 1;
    }
    for ((name, m2, beta, exact), members) in &groups {
        let (m2, beta, exact) = (
            f64::from_bits(*m2),
            f64::from_bits(*beta),
            f64::from_bits(*exact),
        );
        let results: Vec<(f64, AggregateResult)> = members
            .iter()
            .map(|r| (r.a_dig, r.result.clone()))
            .collect();
        let table = relative_error_table(&results, exact)?;
        let mut file = format!("relative_error_{}", output::file_stem(name));
        if per_name[name.as_str()] > 1 {
            file.push_str(&output::file_stem(&format!("_msq{m2}_beta{beta}")));
        }
        output::write_csv(
            &out.join(format!("{file}.csv")),
            &["inv_a_dig", "rel_err", "rel_err_err"],
            table.iter().map(|row| {
                vec![
                    output::float(row.inv_a_dig),
                    output::float(row.rel_err),
                    output::float(row.rel_err_err),
                ]
            }),
        )?;
    }
    Ok(())
}

/// Parses `name=value` reference overrides.
pub fn parse_exact(items: &[String]) -> Result<Vec<(String, f64)>> {
    items
        .iter()
        .map(|item| {
            let (name, value) = item
                .rsplit_once('=')
                .with_context(|| format!("`{item}` is not of the form observable=value"))?;
            let value: f64 = value
                .trim()
                .parse()
                .with_context(|| format!("bad number in `{item}`"))?;
            if value == 0.0 {
                bail!("reference value for `{name}` must be nonzero");
            }
            Ok((name.trim().to_string(), value))
        })
        .collect()
}
