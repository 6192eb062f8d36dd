//! Run configuration: a TOML file with dotted sections, overridden by
//! command-line `section.key=value` pairs, then resolved per mode.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use digimc::{DigitizationGrid, Observable, PotentialModel, TrotterParams};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    ExactDiag,
    McSingle,
    McLattice,
    Analyze,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::ExactDiag => "exact-diag",
            Mode::McSingle => "mc-single",
            Mode::McLattice => "mc-lattice",
            Mode::Analyze => "analyze",
        }
    }

    fn is_lattice(self) -> bool {
        self == Mode::McLattice
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PotentialKind {
    Quartic,
    Lattice,
}

/// A scalar or a list of scalars; lists define parameter sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    pub fn values(&self) -> Vec<f64> {
        match self {
            OneOrMany::One(v) => vec![*v],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialKind>,
    /// Quartic coupling.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_squared: Option<OneOrMany>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dims: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extent: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DigitizationSection {
    /// Number of grid points.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_over_a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_dig: Option<OneOrMany>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrotterSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Upper bound on `delta / (2 a^2)`; picks the largest divisor of beta below it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_hop_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_max: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    /// Measured sweeps per stream, after burn-in.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweeps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub streams: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measure_every: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservablesSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub names: Option<Vec<String>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

/// The configuration file as written. A `[run]` table (present in emitted
/// manifests) is accepted and ignored.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(default)]
    pub physics: PhysicsSection,
    #[serde(default)]
    pub digitization: DigitizationSection,
    #[serde(default)]
    pub trotter: TrotterSection,
    #[serde(default)]
    pub schedule: ScheduleSection,
    #[serde(default)]
    pub observables: ObservablesSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default, skip_serializing)]
    pub run: Option<toml::Table>,
}

impl RawConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Self::from_table(toml::from_str(text)?)
    }

    fn from_table(table: toml::Table) -> Result<Self> {
        // serde reports the offending key for unknown fields and bad types
        toml::Value::Table(table)
            .try_into()
            .map_err(|e| anyhow!("{e}"))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is serializable")
    }
}

/// Reads `path` (if any) and applies `key=value` overrides with dotted keys.
pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<RawConfig> {
    let mut table = match path {
        Some(p) => {
            let text =
                std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            toml::from_str::<toml::Table>(&text)
                .with_context(|| format!("parsing {}", p.display()))?
        }
        None => toml::Table::new(),
    };
    for item in overrides {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| anyhow!("override `{item}` is not of the form section.key=value"))?;
        set_dotted(&mut table, key.trim(), parse_value(value.trim()))?;
    }
    RawConfig::from_table(table).context("invalid configuration")
}

// TOML literal if it parses as one, otherwise a bare string
fn parse_value(text: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {text}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(text.to_string()))
}

fn set_dotted(table: &mut toml::Table, key: &str, value: toml::Value) -> Result<()> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts
        .pop()
        .filter(|k| !k.is_empty())
        .ok_or_else(|| anyhow!("empty key in `{key}`"))?;
    let mut current = table;
    for part in parts {
        let entry = current
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        current = entry
            .as_table_mut()
            .ok_or_else(|| anyhow!("`{part}` in `{key}` is not a section"))?;
    }
    current.insert(last.to_string(), value);
    Ok(())
}

/// One parameter point of a run.
#[derive(Debug, Clone)]
pub struct RunPoint {
    pub a_dig: f64,
    pub m_squared: f64,
    pub grid: DigitizationGrid,
    pub model: PotentialModel,
    pub beta: f64,
    /// Absent for exact diagonalization.
    pub trotter: Option<TrotterParams>,
}

impl RunPoint {
    /// Directory name such as `a0.5_msq-1`.
    pub fn label(&self) -> String {
        format!("a{}_msq{}", self.a_dig, self.m_squared)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScheduleSettings {
    pub sweeps: usize,
    pub burn_in: usize,
    pub streams: usize,
    pub seed: u64,
    pub measure_every: usize,
    pub threads: usize,
}

/// A fully validated configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mode: Mode,
    pub points: Vec<RunPoint>,
    pub schedule: ScheduleSettings,
    pub observables: Vec<Observable>,
    pub output_dir: Option<PathBuf>,
    /// The input with every default filled in.
    pub resolved: RawConfig,
}

impl RunConfig {
    /// Configuration echo for one point, reproducing that point when read back.
    pub fn point_echo(&self, point: &RunPoint) -> RawConfig {
        let mut raw = self.resolved.clone();
        raw.physics.m_squared = Some(OneOrMany::One(point.m_squared));
        raw.digitization = DigitizationSection {
            lambda: Some(point.grid.points()),
            r: None,
            r_over_a: None,
            a_dig: Some(OneOrMany::One(point.a_dig)),
        };
        raw.trotter.beta = Some(point.beta);
        raw.trotter.temperature = None;
        if let Some(t) = &point.trotter {
            raw.trotter.delta = Some(t.delta());
            raw.trotter.max_hop_ratio = None;
            raw.trotter.b_max = Some(t.max_block());
        }
        raw.output.dir = None;
        raw
    }
}

fn default_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Fills mode defaults into `raw` and validates every point.
pub fn resolve(mode: Mode, mut raw: RawConfig) -> Result<RunConfig> {
    if mode == Mode::Analyze {
        bail!("analyze takes run directories, not a run configuration");
    }
    let lattice = mode.is_lattice();
    let p = &mut raw.physics;
    let kind = if lattice {
        PotentialKind::Lattice
    } else {
        PotentialKind::Quartic
    };
    match p.potential {
        Some(k) if k != kind => bail!("physics.potential = {k:?} does not match mode {mode}"),
        _ => p.potential = Some(kind),
    }
    if lattice {
        p.lambda.get_or_insert(0.0);
        if p.lambda != Some(0.0) {
            bail!("physics.lambda: only the free lattice theory (lambda = 0) is supported");
        }
        p.m_squared.get_or_insert(OneOrMany::One(1.0));
        p.dims.get_or_insert(2);
        p.extent.get_or_insert(4);
    } else {
        if p.dims.is_some() || p.extent.is_some() {
            bail!("physics.dims and physics.extent only apply to the lattice potential");
        }
        p.lambda.get_or_insert(1.0);
        p.m_squared.get_or_insert(OneOrMany::Many(vec![1.0, -1.0]));
    }

    let d = &mut raw.digitization;
    if d.a_dig.is_none() && d.r.is_none() {
        d.a_dig = Some(if lattice {
            OneOrMany::One(0.5)
        } else {
            OneOrMany::Many(vec![0.3, 0.5, 0.7])
        });
        if d.r_over_a.is_none() {
            d.lambda.get_or_insert(2001);
        }
    }

    let t = &mut raw.trotter;
    match (t.beta, t.temperature) {
        (Some(_), Some(_)) => bail!("trotter.beta and trotter.temperature are mutually exclusive"),
        (None, Some(temp)) => {
            if !(temp > 0.0 && temp.is_finite()) {
                bail!("trotter.temperature must be positive, got {temp}");
            }
        }
        (Some(beta), None) => {
            if !(beta > 0.0 && beta.is_finite()) {
                bail!("trotter.beta must be positive, got {beta}");
            }
        }
        (None, None) => t.beta = Some(if lattice { 1.0 } else { 10.0 }),
    }
    match (t.delta, t.max_hop_ratio) {
        (Some(_), Some(_)) => {
            bail!("trotter.delta and trotter.max_hop_ratio are mutually exclusive")
        }
        (None, None) => t.delta = Some(if lattice { 0.002 } else { 0.001 }),
        _ => {}
    }

    let s = &mut raw.schedule;
    let (sweeps, streams) = if lattice { (50_000, 4) } else { (10_000, 8) };
    s.sweeps.get_or_insert(sweeps);
    s.burn_in.get_or_insert(2_000);
    s.streams.get_or_insert(streams);
    s.seed.get_or_insert(1);
    s.measure_every.get_or_insert(1);
    s.threads.get_or_insert_with(default_threads);

    let extent = raw.physics.extent.unwrap_or(1);
    let dims = raw.physics.dims.unwrap_or(1);
    raw.observables.names.get_or_insert_with(|| {
        if lattice {
            let half = vec![(extent / 2).to_string(); dims].join(",");
            vec![
                format!("mode_power:{}", vec!["0"; dims].join(",")),
                format!("mode_power:{half}"),
            ]
        } else {
            vec!["potential".to_string()]
        }
    });

    build(mode, raw)
}

fn build(mode: Mode, raw: RawConfig) -> Result<RunConfig> {
    let s = &raw.schedule;
    let schedule = ScheduleSettings {
        sweeps: s.sweeps.expect("defaulted"),
        burn_in: s.burn_in.expect("defaulted"),
        streams: s.streams.expect("defaulted"),
        seed: s.seed.expect("defaulted"),
        measure_every: s.measure_every.expect("defaulted"),
        threads: s.threads.expect("defaulted"),
    };
    if schedule.streams == 0 {
        bail!("schedule.streams must be at least 1");
    }
    if schedule.measure_every == 0 {
        bail!("schedule.measure_every must be at least 1");
    }
    if schedule.threads == 0 {
        bail!("schedule.threads must be at least 1");
    }

    let observables = raw
        .observables
        .names
        .as_ref()
        .expect("defaulted")
        .iter()
        .map(|n| {
            n.parse::<Observable>()
                .map_err(|e| anyhow!("observables.names: {e}"))
        })
        .collect::<Result<Vec<_>>>()?;
    if observables.is_empty() {
        bail!("observables.names is empty");
    }
    if mode == Mode::ExactDiag
        && observables
            .iter()
            .any(|o| matches!(o, Observable::ModePower(_)))
    {
        bail!("observables.names: mode powers need mc-lattice");
    }

    let beta = match (raw.trotter.beta, raw.trotter.temperature) {
        (Some(b), _) => b,
        (None, Some(temp)) => 1.0 / temp,
        (None, None) => unreachable!("defaulted"),
    };
    let physics = &raw.physics;
    let mut points = Vec::new();
    for (a_dig, grid) in grids(&raw.digitization)? {
        for m_squared in physics.m_squared.as_ref().expect("defaulted").values() {
            let model = match physics.potential.expect("defaulted") {
                PotentialKind::Quartic => {
                    PotentialModel::quartic(physics.lambda.expect("defaulted"), m_squared)
                }
                PotentialKind::Lattice => PotentialModel::lattice_scalar(
                    m_squared,
                    physics.dims.expect("defaulted"),
                    physics.extent.expect("defaulted"),
                )
                .context("physics")?,
            };
            let trotter = if mode == Mode::ExactDiag {
                None
            } else {
                let t = &raw.trotter;
                let delta = match (t.delta, t.max_hop_ratio) {
                    (Some(delta), _) => delta,
                    (None, Some(ratio)) => {
                        TrotterParams::delta_for_hop_ratio(beta, grid.spacing(), ratio)
                            .context("trotter.max_hop_ratio")?
                    }
                    (None, None) => unreachable!("defaulted"),
                };
                let params = TrotterParams::from_beta(beta, delta, t.b_max, &grid, &model)
                    .with_context(|| format!("trotter settings at a_dig = {a_dig}"))?;
                Some(params)
            };
            points.push(RunPoint {
                a_dig,
                m_squared,
                grid,
                model,
                beta,
                trotter,
            });
        }
    }
    Ok(RunConfig {
        mode,
        points,
        schedule,
        observables,
        output_dir: raw.output.dir.clone(),
        resolved: raw,
    })
}

fn integral(value: f64, what: &str) -> Result<usize> {
    let n = value.round();
    if !(n >= 2.0) || (n - value).abs() > 1e-9 * value.abs().max(1.0) {
        bail!("{what} = {value} is not an integer number of grid points");
    }
    Ok(n as usize)
}

// (a_dig, grid) pairs from the digitization section
fn grids(d: &DigitizationSection) -> Result<Vec<(f64, DigitizationGrid)>> {
    let spacings = match (&d.a_dig, d.r) {
        (Some(a), _) => a.values(),
        (None, Some(r)) => {
            let points = d.lambda.unwrap_or(2001);
            if d.r_over_a.is_some() {
                bail!("digitization.r_over_a needs digitization.a_dig");
            }
            let grid = DigitizationGrid::new(points, r).context("digitization")?;
            return Ok(vec![(grid.spacing(), grid)]);
        }
        (None, None) => bail!("digitization needs a_dig or r"),
    };
    if spacings.is_empty() {
        bail!("digitization.a_dig is empty");
    }
    spacings
        .into_iter()
        .map(|a| {
            if !(a > 0.0 && a.is_finite()) {
                bail!("digitization.a_dig must be positive, got {a}");
            }
            let points = match (d.r_over_a, d.r) {
                (Some(_), Some(_)) => bail!("digitization.r and digitization.r_over_a are mutually exclusive"),
                (Some(ratio), None) => integral(2.0 * ratio + 1.0, "2 r_over_a + 1")?,
                (None, Some(r)) => integral(2.0 * r / a + 1.0, "2 r / a_dig + 1")?,
                (None, None) => d.lambda.unwrap_or(2001),
            };
            if let Some(lambda) = d.lambda {
                if lambda != points {
                    bail!("digitization.lambda = {lambda} conflicts with the cutoff, which implies {points} points");
                }
            }
            let grid = DigitizationGrid::with_spacing(points, a).context("digitization")?;
            Ok((a, grid))
        })
        .collect()
}
