use anyhow::Result;
use digimc::lattice::{fourier_mode_power, lattice_potential};
use digimc::mcmc::{
    action, link_weight, run_chain, ChainStream, Evaluation, Observable, PathIntegral, Proposal,
    Schedule, TrotterParams,
};
use digimc::stats::{block_and_aggregate, integrated_autocorrelation};
use digimc::{DigitizationGrid, LatticeGeometry, MomentumMode, ObservableSeries, PotentialModel};
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_pcg::Pcg64;

use crate::Report;

pub fn all(r: &mut Report) -> Result<()> {
    positivity(r)?;
    incremental_action(r)?;
    fourier_identities(r)?;
    determinism(r)?;
    autocorrelation(r)?;
    coverage(r)?;
    Ok(())
}

fn positivity(r: &mut Report) -> Result<()> {
    let mut rng = Pcg64::seed_from_u64(11);
    let (mut pairs, mut negative) = (0, 0);
    while pairs < 100_000 {
        let points = rng.random_range(2..40);
        let grid = DigitizationGrid::new(points, rng.random_range(0.5..20.0))?;
        let model = if rng.random::<bool>() {
            PotentialModel::quartic(rng.random_range(0.0..2.0), rng.random_range(-2.0..2.0))
        } else {
            PotentialModel::lattice_scalar(
                rng.random_range(0.0..2.0),
                rng.random_range(1..3),
                rng.random_range(1..4),
            )?
        };
        let n = model.n_bosons();
        let delta = rng.random_range(0.01..0.999) * grid.spacing().powi(2) / n as f64;
        let params = TrotterParams::new(delta, 4, None, &grid, &model)?;
        for _ in 0..1000 {
            let a: Vec<usize> = (0..n).map(|_| rng.random_range(0..points)).collect();
            let mut b = a.clone();
            if rng.random::<bool>() {
                let i = rng.random_range(0..n);
                b[i] = (b[i] + 1).min(points - 1);
            }
            let w = link_weight(&a, &b, &params, &grid, &model)?;
            negative += usize::from(!(w >= 0.0 && w.is_finite()));
            pairs += 1;
        }
    }
    r.check(
        negative == 0,
        format!("link weights: {negative} negative of {pairs} pairs"),
    );
    Ok(())
}

fn incremental_action(r: &mut Report) -> Result<()> {
    let systems = [
        {
            let grid = DigitizationGrid::new(15, 3.5)?;
            let model = PotentialModel::quartic(1.0, -1.0);
            let params = TrotterParams::new(0.1, 12, Some(6), &grid, &model)?;
            PathIntegral::new(grid, model, params)?
        },
        {
            let grid = DigitizationGrid::with_spacing(21, 1.0)?;
            let model = PotentialModel::lattice_scalar(0.7, 2, 3)?;
            let params = TrotterParams::new(0.05, 10, Some(5), &grid, &model)?;
            PathIntegral::new(grid, model, params)?
        },
    ];
    for (s, sys) in systems.iter().enumerate() {
        let mut rng = Pcg64::seed_from_u64(20 + s as u64);
        let mut chain = ChainStream::new(sys, 5);
        for _ in 0..20 {
            chain.sweep(sys);
        }
        let k = sys.params().slices();
        let (mut worst, mut candidates): (f64, usize) = (0.0, 0);
        for _ in 0..1000 {
            let p = Proposal {
                slice: rng.random_range(0..k),
                boson: rng.random_range(0..sys.model().n_bosons()),
                length: rng.random_range(1..=k),
                step: if rng.random::<bool>() { 1 } else { -1 },
            };
            if let Evaluation::Candidate { delta_action } = chain.evaluate(sys, p) {
                let before = action(chain.config(), sys.params(), sys.grid(), sys.model())?;
                let mut next = chain.clone();
                next.apply(sys, p);
                let after = action(next.config(), sys.params(), sys.grid(), sys.model())?;
                let full = after - before;
                worst = worst.max((delta_action - full).abs() / full.abs().max(1.0));
                candidates += 1;
                if rng.random::<f64>() < 0.3 {
                    chain = next;
                }
            }
            chain.cluster_update(sys);
        }
        r.check(
            worst <= 1e-10 && candidates > 100,
            format!(
                "{}: incremental vs full action change over {candidates} moves, worst {worst:.1e}",
                sys.model().n_bosons()
            ),
        );
    }
    Ok(())
}

fn fourier_identities(r: &mut Report) -> Result<()> {
    let mut rng = Pcg64::seed_from_u64(31);
    let (mut parseval, mut momentum): (f64, f64) = (0.0, 0.0);
    for (dims, extent) in [(2, 4), (1, 5), (2, 3)] {
        let geometry = LatticeGeometry::new(dims, extent)?;
        let modes: Vec<MomentumMode> = (0..geometry.n_sites())
            .map(|s| {
                let labels: Vec<i64> = geometry.site_coords(s).iter().map(|&l| l as i64).collect();
                MomentumMode::new(&geometry, &labels)
            })
            .collect::<Result<_, _>>()?;
        for _ in 0..100 {
            let m2 = rng.random_range(0.0..2.0);
            let phi: Vec<f64> = (0..geometry.n_sites())
                .map(|_| rng.random_range(-3.0..3.0))
                .collect();
            let norm: f64 = phi.iter().map(|x| x * x).sum();
            let mut total = 0.0;
            let mut energy = 0.0;
            for mode in &modes {
                let power = fourier_mode_power(&geometry, &phi, mode)?;
                let kinetic: f64 = mode
                    .components()
                    .iter()
                    .map(|q| 2.0 * (q / 2.0).sin().powi(2))
                    .sum();
                total += power;
                energy += (kinetic + m2 / 2.0) * power;
            }
            let v = lattice_potential(&geometry, m2, &phi)?;
            parseval = parseval.max((total - norm).abs() / norm);
            momentum = momentum.max((energy - v).abs() / v.abs());
        }
    }
    r.check(
        parseval <= 1e-10,
        format!("Parseval over 300 fields: {parseval:.1e}"),
    );
    r.check(
        momentum <= 1e-10,
        format!("momentum-space potential over 300 fields: {momentum:.1e}"),
    );
    Ok(())
}

fn determinism(r: &mut Report) -> Result<()> {
    let grid = DigitizationGrid::with_spacing(21, 0.25)?;
    let model = PotentialModel::quartic(1.0, -1.0);
    let params = TrotterParams::from_beta(4.0, 0.01, None, &grid, &model)?;
    let sys = PathIntegral::new(grid, model, params)?;
    let schedule = Schedule {
        sweeps: 200,
        burn_in: 10,
        measure_every: 1,
    };
    let obs = [Observable::Potential, Observable::Coordinate];
    let bits = |seed| -> Result<Vec<u64>> {
        let out = run_chain(&sys, &schedule, &obs, seed, 0)?;
        Ok(out
            .series
            .iter()
            .flat_map(|s| s.values.iter().map(|v| v.to_bits()))
            .collect())
    };
    let (a, b, c) = (bits(42)?, bits(42)?, bits(43)?);
    r.check(
        a == b && a != c,
        format!("seed determinism: {} values bitwise identical", a.len()),
    );
    Ok(())
}

fn ar1(rng: &mut Pcg64, rho: f64, mean: f64, len: usize) -> Vec<f64> {
    let scale = (1.0 - rho * rho).sqrt();
    let mut x: f64 = rng.sample(StandardNormal);
    (0..len)
        .map(|_| {
            let noise: f64 = rng.sample(StandardNormal);
            x = rho * x + scale * noise;
            mean + x
        })
        .collect()
}

fn autocorrelation(r: &mut Report) -> Result<()> {
    let mut rng = Pcg64::seed_from_u64(41);
    let series = ar1(&mut rng, 0.9, 0.0, 1_000_000);
    let tau = integrated_autocorrelation(&series)?;
    let analytic = 0.5 + 0.9 / 0.1;
    r.check(
        (tau - analytic).abs() <= 0.1 * analytic,
        format!("AR(1), rho = 0.9: tau_int = {tau:.3}, analytic {analytic}"),
    );
    Ok(())
}

fn coverage(r: &mut Report) -> Result<()> {
    let mut rng = Pcg64::seed_from_u64(51);
    let mu = 1.5;
    let mut covered = 0;
    for _ in 0..100 {
        let streams: Vec<ObservableSeries> = (0..40)
            .map(|s| ObservableSeries::new("x", ar1(&mut rng, 0.5, mu, 2000), s, ""))
            .collect();
        let agg = block_and_aggregate(&streams)?;
        covered += usize::from((agg.mean - mu).abs() <= 2.0 * agg.std_error);
    }
    r.check(
        covered >= 90,
        format!("error-bar coverage: {covered}/100 within 2 sigma"),
    );
    Ok(())
}
