//! Autocorrelation, burn-in, blocking and cross-stream error bars.
//!
//! Protocol for one observable over several streams:
//! `d = ceil(2 max_s tau_int(s))`, drop the first `10 d` entries of each
//! stream, split the rest into blocks of `10 d`, and report the grand mean of
//! the stream means with error `std(stream means) / sqrt(n_stream)` (unbiased).

use crate::error::{Error, Result};

/// Per-sweep series of one observable from one chain stream.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSeries {
    pub name: String,
    pub values: Vec<f64>,
    pub stream_id: usize,
    pub fingerprint: String,
}

impl ObservableSeries {
    pub fn new(
        name: impl Into<String>,
        values: Vec<f64>,
        stream_id: usize,
        fingerprint: impl Into<String>,
    ) -> Self {
        Self {
            name: name.into(),
            values,
            stream_id,
            fingerprint: fingerprint.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateResult {
    pub mean: f64,
    pub std_error: f64,
    /// Autocorrelation length used for burn-in and blocking.
    pub d: usize,
    /// Blocks kept over all streams.
    pub n_samples: usize,
    pub n_streams: usize,
    /// Shortest stream length before burn-in.
    pub n_steps: usize,
    /// Largest per-stream integrated autocorrelation time.
    pub tau_int: f64,
    /// Block means of every stream, in stream order.
    pub block_means: Vec<Vec<f64>>,
}

impl AggregateResult {
    /// Whether every stream is longer than `factor * d`.
    pub fn streams_exceed(&self, factor: usize) -> bool {
        self.n_steps > factor * self.d
    }
}

/// Shortest recorded length, in units of `d`, considered adequate for
/// the coarsest grids.
pub const LONG_STREAM_FACTOR: usize = 2200;

/// `tau_int = 1/2 + sum_{t=1}^{W} rho(t)`, where `W` is the first lag with
/// `rho(W) <= 0` (that lag is included).
pub fn integrated_autocorrelation(series: &[f64]) -> Result<f64> {
    let n = series.len();
    if n < 10 {
        return Err(Error::InsufficientData {
            stream: 0,
            available: n,
            required: 10,
        });
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = series.iter().map(|v| v - mean).collect();
    let c0 = centered.iter().map(|v| v * v).sum::<f64>() / n as f64;
    // tolerate rounding of the mean for constant input
    if !(c0 > (1e-14 * mean.abs()).powi(2)) {
        return Err(Error::DegenerateSeries("series has zero variance".into()));
    }
    let mut tau = 0.5;
    for t in 1..n {
        let ct = centered[..n - t]
            .iter()
            .zip(&centered[t..])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / n as f64;
        let rho = ct / c0;
        tau += rho;
        if rho <= 0.0 {
            break;
        }
    }
    Ok(tau)
}

/// `d = ceil(2 tau)`, at least 1.
pub fn autocorrelation_length(tau: f64) -> usize {
    ((2.0 * tau).ceil() as usize).max(1)
}

/// Aggregates one observable over independent streams.
pub fn block_and_aggregate(streams: &[ObservableSeries]) -> Result<AggregateResult> {
    if streams.len() < 2 {
        return Err(Error::param(
            "streams",
            format!("need at least 2 streams, got {}", streams.len()),
        ));
    }
    let mut tau_max: f64 = 0.0;
    for s in streams {
        let tau = integrated_autocorrelation(&s.values).map_err(|e| match e {
            Error::InsufficientData {
                available,
                required,
                ..
            } => Error::InsufficientData {
                stream: s.stream_id,
                available,
                required,
            },
            Error::DegenerateSeries(msg) => {
                Error::DegenerateSeries(format!("stream {}: {msg}", s.stream_id))
            }
            other => other,
        })?;
        tau_max = tau_max.max(tau);
    }
    let d = autocorrelation_length(tau_max);
    aggregate_with_length(streams, d, tau_max)
}

/// Burn-in and blocking with a given autocorrelation length `d`.
pub fn aggregate_with_length(
    streams: &[ObservableSeries],
    d: usize,
    tau_int: f64,
) -> Result<AggregateResult> {
    if streams.len() < 2 {
        return Err(Error::param(
            "streams",
            format!("need at least 2 streams, got {}", streams.len()),
        ));
    }
    let d = d.max(1);
    let block = 10 * d;
    let mut stream_means = Vec::with_capacity(streams.len());
    let mut block_means = Vec::with_capacity(streams.len());
    for s in streams {
        let kept = s.values.len().saturating_sub(block);
        if kept < 2 * block {
            return Err(Error::InsufficientData {
                stream: s.stream_id,
                available: kept,
                required: 2 * block,
            });
        }
        let means: Vec<f64> = s.values[block..]
            .chunks_exact(block)
            .map(|c| c.iter().sum::<f64>() / block as f64)
            .collect();
        stream_means.push(means.iter().sum::<f64>() / means.len() as f64);
        block_means.push(means);
    }
    let n = stream_means.len() as f64;
    let mean = stream_means.iter().sum::<f64>() / n;
    let var = stream_means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let n_steps = streams.iter().map(|s| s.values.len()).min().unwrap_or(0);
    let result = AggregateResult {
        mean,
        std_error: (var / n).sqrt(),
        d,
        n_samples: block_means.iter().map(Vec::len).sum(),
        n_streams: streams.len(),
        n_steps,
        tau_int,
        block_means,
    };
    if d >= 1000 && !result.streams_exceed(LONG_STREAM_FACTOR) {
        log::warn!(
            "`{}`: streams of {n_steps} steps are not longer than {LONG_STREAM_FACTOR} d = {}",
            streams[0].name,
            LONG_STREAM_FACTOR * d
        );
    }
    Ok(result)
}

/// One point of a relative-error-versus-resolution table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeErrorRow {
    pub inv_a_dig: f64,
    pub rel_err: f64,
    pub rel_err_err: f64,
}

/// Rows `(1/a, (exact - mean)/exact, std_error/|exact|)`, sorted by `1/a`.
pub fn relative_error_table(
    results: &[(f64, AggregateResult)],
    exact: f64,
) -> Result<Vec<RelativeErrorRow>> {
    if exact == 0.0 || !exact.is_finite() {
        return Err(Error::param(
            "exact",
            "reference value must be finite and nonzero",
        ));
    }
    let mut rows: Vec<RelativeErrorRow> = results
        .iter()
        .map(|(a, r)| RelativeErrorRow {
            inv_a_dig: 1.0 / a,
            rel_err: (exact - r.mean) / exact,
            rel_err_err: r.std_error / exact.abs(),
        })
        .collect();
    rows.sort_by(|x, y| x.inv_a_dig.total_cmp(&y.inv_a_dig));
    Ok(rows)
}
