//! Markov chains over Trotterized paths.
//!
//! Both move types shift one boson by one grid step on a contiguous (periodic)
//! run of slices. Inside the run every slice difference is preserved, so only
//! the two links at its ends and the potential on the run change:
//!
//! `dS = -log(w'_in / w_in) - log(w'_out / w_out) + delta * sum_l [V(n'^(l)) - V(n^(l))]`
//!
//! A run covering all slices is a rigid translation and changes no link.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;

use crate::digitization::{BlockSums, CoordinateSums, DigitizationGrid, PotentialModel};
use crate::error::{Error, Result};
use crate::mcmc::observables::{MeasurementPlan, Observable};
use crate::mcmc::path::{self, kinetic_factors, LinkKind, PathConfiguration};
use crate::mcmc::sums::{Moments, PathSums};
use crate::mcmc::TrotterParams;
use crate::stats::ObservableSeries;

/// Grid, model and Trotter parameters of one simulation, with the derived
/// constants the update kernels need.
#[derive(Debug, Clone)]
pub struct PathIntegral {
    grid: DigitizationGrid,
    model: PotentialModel,
    params: TrotterParams,
    log_stay: f64,
    log_hop: f64,
    coords: Vec<f64>,
    // V(x(n)) per grid index, single-boson models only
    potential_table: Option<Vec<f64>>,
    // x(n) = (2 (n - center) - parity) * half
    center: i64,
    parity: i64,
    half: f64,
}

impl PathIntegral {
    pub fn new(
        grid: DigitizationGrid,
        model: PotentialModel,
        params: TrotterParams,
    ) -> Result<Self> {
        // revalidate positivity against this grid and model
        TrotterParams::new(
            params.delta(),
            params.slices(),
            Some(params.max_block()),
            &grid,
            &model,
        )?;
        let points = grid.points() as i64;
        let slices = params.slices() as i128;
        if slices * (points as i128).pow(3) >= i64::MAX as i128 / 16 {
            return Err(Error::param(
                "lambda",
                "grid and slice count too large for exact moment sums",
            ));
        }
        let (stay, hop) = kinetic_factors(&params, &grid, model.n_bosons());
        let coords = grid.coordinates();
        let potential_table = (model.n_bosons() == 1).then(|| {
            coords
                .iter()
                .map(|&x| model.energy_unchecked(&[x]))
                .collect()
        });
        let center = (points - 1) / 2;
        Ok(Self {
            log_stay: stay.ln(),
            log_hop: hop.ln(),
            potential_table,
            center,
            parity: (points - 1) - 2 * center,
            half: grid.cutoff() / (points - 1) as f64,
            coords,
            grid,
            model,
            params,
        })
    }

    pub fn grid(&self) -> &DigitizationGrid {
        &self.grid
    }

    pub fn model(&self) -> &PotentialModel {
        &self.model
    }

    pub fn params(&self) -> &TrotterParams {
        &self.params
    }

    /// Full-recompute action of a configuration.
    pub fn action(&self, config: &PathConfiguration) -> Result<f64> {
        path::action(config, &self.params, &self.grid, &self.model)
    }

    #[inline]
    fn log_kinetic(&self, link: LinkKind) -> f64 {
        if link.is_hop() {
            self.log_hop
        } else {
            self.log_stay
        }
    }

    #[inline]
    fn coordinate_sums(&self, m: &Moments) -> CoordinateSums {
        let (h, p) = (self.half, self.parity as f64);
        let (n, s1, s2, s3) = (
            m.count as f64,
            m.sum as f64,
            m.sum_sq as f64,
            m.sum_cube as f64,
        );
        CoordinateSums {
            count: n,
            sum: h * (2.0 * s1 - p * n),
            sum_sq: h * h * (4.0 * s2 - 4.0 * p * s1 + p * p * n),
            sum_cube: h * h * h * (8.0 * s3 - 12.0 * p * s2 + 6.0 * p * p * s1 - p * p * p * n),
        }
    }

    /// Slice-averaged values of the plan's observables on `config`.
    pub fn measure(&self, config: &PathConfiguration, plan: &MeasurementPlan) -> Vec<f64> {
        let k = config.slices();
        let n = config.n_bosons();
        let mut acc = vec![0.0; plan.len()];
        let mut x = vec![0.0; n];
        for j in 0..k {
            for (i, xi) in x.iter_mut().enumerate() {
                *xi = self.coords[config.get(j, i)];
            }
            let v = self.potential_table.as_ref().map(|t| t[config.get(j, 0)]);
            plan.accumulate_slice(&self.model, &x, v, &mut acc);
        }
        acc.iter_mut().for_each(|a| *a /= k as f64);
        acc
    }

    /// Short description of the parameters, recorded with every series.
    pub fn fingerprint(&self) -> String {
        let physics = match &self.model {
            PotentialModel::Quartic {
                coupling,
                mass_squared,
            } => format!("quartic(lambda={coupling},m2={mass_squared})"),
            PotentialModel::LatticeScalar {
                mass_squared,
                geometry,
            } => format!(
                "lattice(m2={mass_squared},d={},L={})",
                geometry.dims(),
                geometry.extent()
            ),
        };
        format!(
            "{physics};Lambda={};R={};delta={};K={};B_max={}",
            self.grid.points(),
            self.grid.cutoff(),
            self.params.delta(),
            self.params.slices(),
            self.params.max_block()
        )
    }
}

/// Shift of boson `boson` by `step` on `length` consecutive slices starting at `slice`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Proposal {
    pub slice: usize,
    pub boson: usize,
    pub length: usize,
    pub step: i32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Evaluation {
    /// Some shifted index leaves `0..points`.
    OutOfRange,
    /// A boundary link would get zero weight.
    BrokenLink,
    Candidate {
        delta_action: f64,
    },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MoveTally {
    pub proposed: u64,
    pub accepted: u64,
    pub out_of_range: u64,
    pub broken_link: u64,
}

impl MoveTally {
    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AcceptanceTally {
    pub single_site: MoveTally,
    pub cluster: MoveTally,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MoveClass {
    SingleSite,
    Cluster,
}

/// One Markov chain: its configuration, random state and bookkeeping.
#[derive(Debug, Clone)]
pub struct ChainStream {
    config: PathConfiguration,
    // links[j] relates slice j to slice j+1 (mod K)
    links: Vec<LinkKind>,
    sums: Vec<PathSums>,
    rng: Pcg64,
    sweeps: u64,
    tally: AcceptanceTally,
}

impl ChainStream {
    /// Chain started with every index at `floor(points / 2)`.
    pub fn new(sys: &PathIntegral, seed: u64) -> Self {
        let config = PathConfiguration::uniform(
            sys.params.slices(),
            sys.model.n_bosons(),
            sys.grid.center_index(),
        );
        Self::with_config(sys, config, seed).expect("uniform configuration is valid")
    }

    pub fn with_config(sys: &PathIntegral, config: PathConfiguration, seed: u64) -> Result<Self> {
        let k = sys.params.slices();
        if config.slices() != k || config.n_bosons() != sys.model.n_bosons() {
            return Err(Error::InvalidConfiguration(format!(
                "expected {k} slices x {} bosons, got {} x {}",
                sys.model.n_bosons(),
                config.slices(),
                config.n_bosons()
            )));
        }
        config.validate(&sys.grid)?;
        let links = (0..k)
            .map(|j| {
                LinkKind::classify(&config.slice_indices(j), &config.slice_indices((j + 1) % k))
                    .expect("validated configuration")
            })
            .collect();
        let sums = (0..config.n_bosons())
            .map(|i| {
                let centered: Vec<i64> = config
                    .boson_path(i)
                    .iter()
                    .map(|&n| n as i64 - sys.center)
                    .collect();
                PathSums::new(&centered)
            })
            .collect();
        Ok(Self {
            config,
            links,
            sums,
            rng: Pcg64::seed_from_u64(seed),
            sweeps: 0,
            tally: AcceptanceTally::default(),
        })
    }

    pub fn config(&self) -> &PathConfiguration {
        &self.config
    }

    pub fn sweeps(&self) -> u64 {
        self.sweeps
    }

    pub fn tally(&self) -> &AcceptanceTally {
        &self.tally
    }

    /// Checks a proposal and returns its action change without applying it.
    pub fn evaluate(&self, sys: &PathIntegral, p: Proposal) -> Evaluation {
        let k = sys.params.slices();
        let len = p.length.clamp(1, k);
        let i = p.boson;
        let step = p.step.signum();

        let lo = -sys.center;
        let hi = sys.grid.points() as i64 - 1 - sys.center;
        if !self.sums[i].shift_fits(p.slice, len, step as i64, lo, hi) {
            return Evaluation::OutOfRange;
        }

        let mut delta_action = 0.0;
        if len < k {
            let before = (p.slice + k - 1) % k;
            let last = (p.slice + len - 1) % k;
            let (Some(new_before), Some(new_last)) = (
                self.links[before].shifted(i, step),
                self.links[last].shifted(i, -step),
            ) else {
                return Evaluation::BrokenLink;
            };
            delta_action -= sys.log_kinetic(new_before) - sys.log_kinetic(self.links[before]);
            delta_action -= sys.log_kinetic(new_last) - sys.log_kinetic(self.links[last]);
        }

        let shift = step as f64 * sys.grid.spacing();
        let block = Block {
            sys,
            sums: &self.sums,
            start: p.slice,
            len,
        };
        let potential = sys.model.block_shift_delta(i, shift, block);
        delta_action += sys.params.delta() * potential;
        Evaluation::Candidate { delta_action }
    }

    /// Applies a proposal unconditionally; it must have evaluated to a candidate.
    pub fn apply(&mut self, sys: &PathIntegral, p: Proposal) {
        let k = sys.params.slices();
        let len = p.length.clamp(1, k);
        let step = p.step.signum();
        for l in 0..len {
            self.config.shift((p.slice + l) % k, p.boson, step);
        }
        self.sums[p.boson].add_cyclic(p.slice, len, step as i64);
        if len < k {
            let before = (p.slice + k - 1) % k;
            let last = (p.slice + len - 1) % k;
            self.links[before] = self.links[before]
                .shifted(p.boson, step)
                .expect("valid proposal");
            self.links[last] = self.links[last]
                .shifted(p.boson, -step)
                .expect("valid proposal");
        }
    }

    fn attempt(&mut self, sys: &PathIntegral, p: Proposal, class: MoveClass) -> bool {
        let evaluation = self.evaluate(sys, p);
        let tally = match class {
            MoveClass::SingleSite => &mut self.tally.single_site,
            MoveClass::Cluster => &mut self.tally.cluster,
        };
        tally.proposed += 1;
        let accept = match evaluation {
            Evaluation::OutOfRange => {
                tally.out_of_range += 1;
                false
            }
            Evaluation::BrokenLink => {
                tally.broken_link += 1;
                false
            }
            Evaluation::Candidate { delta_action } => {
                delta_action <= 0.0 || self.rng.random::<f64>() < (-delta_action).exp()
            }
        };
        if accept {
            tally.accepted += 1;
            self.apply(sys, p);
        }
        accept
    }

    /// One pass of single-site moves over slices `j = 0..K` and bosons
    /// `i = 0..N` in that order, each proposing `n -> n +- 1`.
    pub fn metropolis_sweep(&mut self, sys: &PathIntegral) {
        let k = sys.params.slices();
        for slice in 0..k {
            for boson in 0..self.config.n_bosons() {
                let step = if self.rng.random::<bool>() { 1 } else { -1 };
                let p = Proposal {
                    slice,
                    boson,
                    length: 1,
                    step,
                };
                self.attempt(sys, p, MoveClass::SingleSite);
            }
        }
        self.sweeps += 1;
    }

    /// Draws one cluster proposal: block size `B` uniform in `1..=B_max`
    /// covering slices `j..=j+B` (capped at all `K`), start slice, boson and sign uniform.
    pub fn random_cluster_proposal(&mut self, sys: &PathIntegral) -> Proposal {
        let k = sys.params.slices();
        let block = self.rng.random_range(1..=sys.params.max_block());
        let slice = self.rng.random_range(0..k);
        let boson = self.rng.random_range(0..self.config.n_bosons());
        let step = if self.rng.random::<bool>() { 1 } else { -1 };
        Proposal {
            slice,
            boson,
            length: (block + 1).min(k),
            step,
        }
    }

    /// A single cluster proposal and Metropolis test.
    pub fn cluster_update(&mut self, sys: &PathIntegral) -> bool {
        let p = self.random_cluster_proposal(sys);
        self.attempt(sys, p, MoveClass::Cluster)
    }

    /// `K * N` cluster proposals.
    pub fn cluster_sweep(&mut self, sys: &PathIntegral) {
        let proposals = sys.params.slices() * self.config.n_bosons();
        for _ in 0..proposals {
            self.cluster_update(sys);
        }
        self.sweeps += 1;
    }

    /// The standard sweep: ordered single-site moves when `B_max = 1`,
    /// random cluster moves otherwise.
    pub fn sweep(&mut self, sys: &PathIntegral) {
        if sys.params.max_block() == 1 {
            self.metropolis_sweep(sys)
        } else {
            self.cluster_sweep(sys)
        }
    }
}

// power sums of every boson over one cyclic block of slices
struct Block<'a> {
    sys: &'a PathIntegral,
    sums: &'a [PathSums],
    start: usize,
    len: usize,
}

impl BlockSums for Block<'_> {
    fn moments(&mut self, coordinate: usize) -> CoordinateSums {
        self.sys
            .coordinate_sums(&self.sums[coordinate].query_cyclic(self.start, self.len))
    }

    #[inline]
    fn linear(&mut self, coordinate: usize) -> (f64, f64) {
        let (h, p) = (self.sys.half, self.sys.parity as f64);
        let n = self.len as f64;
        let s = self.sums[coordinate].sum_cyclic(self.start, self.len) as f64;
        (n, h * (2.0 * s - p * n))
    }
}

/// Sweep budget of a chain. Measurements are taken after sweeps
/// `burn_in + measure_every * m` for `m = 1, 2, ...`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Schedule {
    pub sweeps: usize,
    pub burn_in: usize,
    pub measure_every: usize,
}

impl Schedule {
    pub fn new(sweeps: usize) -> Self {
        Self {
            sweeps,
            burn_in: 0,
            measure_every: 1,
        }
    }

    /// Sweep number of the `m`-th recorded measurement (0-based).
    pub fn sweep_of(&self, m: usize) -> usize {
        self.burn_in + (m + 1) * self.measure_every.max(1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainOutput {
    pub stream_id: usize,
    pub seed: u64,
    pub series: Vec<ObservableSeries>,
    pub tally: AcceptanceTally,
}

/// Runs one chain from the centered start, recording slice-averaged observables.
pub fn run_chain(
    sys: &PathIntegral,
    schedule: &Schedule,
    observables: &[Observable],
    seed: u64,
    stream_id: usize,
) -> Result<ChainOutput> {
    let plan = MeasurementPlan::new(&sys.model, observables)?;
    let every = schedule.measure_every.max(1);
    let fingerprint = sys.fingerprint();
    let mut series: Vec<ObservableSeries> = observables
        .iter()
        .map(|o| ObservableSeries::new(o.to_string(), Vec::new(), stream_id, fingerprint.clone()))
        .collect();
    let mut chain = ChainStream::new(sys, seed);
    for _ in 0..schedule.burn_in.min(schedule.sweeps) {
        chain.sweep(sys);
    }
    for s in 1..=schedule.sweeps.saturating_sub(schedule.burn_in) {
        chain.sweep(sys);
        if s % every == 0 {
            for (out, v) in series.iter_mut().zip(sys.measure(chain.config(), &plan)) {
                out.values.push(v);
            }
        }
    }
    Ok(ChainOutput {
        stream_id,
        seed,
        series,
        tally: chain.tally,
    })
}

/// Seed of stream `stream` derived from a base seed (SplitMix64 mixing).
pub fn stream_seed(base_seed: u64, stream: usize) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(base_seed ^ mix(stream as u64))
}

/// Runs `n_streams` independent chains on up to `threads` worker threads.
/// Output is ordered by stream id and does not depend on `threads`.
pub fn run_streams(
    sys: &PathIntegral,
    schedule: &Schedule,
    observables: &[Observable],
    base_seed: u64,
    n_streams: usize,
    threads: usize,
) -> Result<Vec<ChainOutput>> {
    MeasurementPlan::new(&sys.model, observables)?;
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<ChainOutput>>>> = Mutex::new(vec![None; n_streams]);
    let workers = threads.clamp(1, n_streams.max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let s = next.fetch_add(1, Ordering::Relaxed);
                if s >= n_streams {
                    break;
                }
                let out = run_chain(sys, schedule, observables, stream_seed(base_seed, s), s);
                log::debug!("stream {s} finished");
                results.lock().expect("no poisoned workers")[s] = Some(out);
            });
        }
    });
    results
        .into_inner()
        .expect("no poisoned workers")
        .into_iter()
        .map(|r| r.expect("every stream ran"))
        .collect()
}
