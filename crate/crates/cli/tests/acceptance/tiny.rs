//! Lambda = 3, K = 4, one boson: small enough to enumerate.

use std::collections::HashMap;

use anyhow::Result;
use digimc::mcmc::{
    action, brute_force_average, brute_force_expectation, enumerate_configurations, link_weight,
    run_streams, ChainStream, Evaluation, Observable, PathConfiguration, PathIntegral, Proposal,
    Schedule, TrotterParams,
};
use digimc::stats::block_and_aggregate;
use digimc::{DigitizationGrid, PotentialModel};

use crate::Report;

const DELTA: f64 = 0.25;

fn tiny(max_block: Option<usize>) -> Result<PathIntegral> {
    let grid = DigitizationGrid::new(3, 1.0)?;
    let model = PotentialModel::quartic(1.0, 1.0);
    let params = TrotterParams::new(DELTA, 4, max_block, &grid, &model)?;
    Ok(PathIntegral::new(grid, model, params)?)
}

fn matmul(x: &[[f64; 3]; 3], y: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| x[i][k] * y[k][j]).sum();
        }
    }
    out
}

pub fn brute_force_oracle(r: &mut Report) -> Result<()> {
    let sys = tiny(None)?;
    let mut m = [[0.0; 3]; 3];
    for (a, row) in m.iter_mut().enumerate() {
        for (b, w) in row.iter_mut().enumerate() {
            *w = link_weight(&[a], &[b], sys.params(), sys.grid(), sys.model())?;
        }
    }
    let m2 = matmul(&m, &m);
    let m4 = matmul(&m2, &m2);
    let trace: f64 = (0..3).map(|i| m4[i][i]).sum();
    let ens = brute_force_average(&sys, 1_000, &mut [])?;
    let rel = (ens.partition_function - trace).abs() / trace;
    r.check(
        rel <= 1e-12,
        format!(
            "Z over 81 configurations {:.15e}, Tr M^4 {trace:.15e} ({rel:.1e})",
            ens.partition_function
        ),
    );

    let exact = brute_force_expectation(&sys, &Observable::Potential, 1_000)?;
    let schedule = Schedule {
        sweeps: 1_000_000,
        burn_in: 100,
        measure_every: 1,
    };
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let outputs = run_streams(&sys, &schedule, &[Observable::Potential], 3, 10, threads)?;
    let series: Vec<_> = outputs.into_iter().map(|o| o.series[0].clone()).collect();
    let agg = block_and_aggregate(&series)?;
    let diff = (agg.mean - exact).abs();
    r.check(
        diff <= 3.0 * agg.std_error,
        format!(
            "MC <V> {:.5} +- {:.5} vs enumeration {exact:.5}",
            agg.mean, agg.std_error
        ),
    );
    r.check(
        diff <= 0.01 * exact.abs().min(1.0),
        format!(
            "difference {diff:.2e} within 1% ({:.2e})",
            0.01 * exact.abs().min(1.0)
        ),
    );
    Ok(())
}

fn positive_states(sys: &PathIntegral) -> Result<Vec<(PathConfiguration, f64)>> {
    let mut states = Vec::new();
    enumerate_configurations(sys, 1_000, |c, w| {
        if w > 0.0 {
            states.push((c.clone(), w));
        }
    })?;
    Ok(states)
}

fn transition_matrix(
    sys: &PathIntegral,
    states: &[(PathConfiguration, f64)],
    proposals: &[(Proposal, f64)],
) -> Result<Vec<Vec<f64>>> {
    let index: HashMap<&PathConfiguration, usize> = states
        .iter()
        .enumerate()
        .map(|(i, (c, _))| (c, i))
        .collect();
    let mut t = vec![vec![0.0; states.len()]; states.len()];
    for (x, (config, _)) in states.iter().enumerate() {
        let chain = ChainStream::with_config(sys, config.clone(), 0)?;
        for &(p, prob) in proposals {
            match chain.evaluate(sys, p) {
                Evaluation::Candidate { delta_action } => {
                    let mut next = chain.clone();
                    next.apply(sys, p);
                    let acc = (-delta_action).exp().min(1.0);
                    t[x][index[next.config()]] += prob * acc;
                    t[x][x] += prob * (1.0 - acc);
                }
                _ => t[x][x] += prob,
            }
        }
    }
    Ok(t)
}

// largest |sum_x P(x) T(x, y) - P(y)|
fn stationarity_error(states: &[(PathConfiguration, f64)], t: &[Vec<f64>]) -> f64 {
    let z: f64 = states.iter().map(|(_, w)| w).sum();
    let p: Vec<f64> = states.iter().map(|(_, w)| w / z).collect();
    (0..states.len())
        .map(|y| ((0..states.len()).map(|x| p[x] * t[x][y]).sum::<f64>() - p[y]).abs())
        .fold(0.0, f64::max)
}

pub fn detailed_balance(r: &mut Report) -> Result<()> {
    for b_max in [1, 2, 3, 4] {
        let sys = tiny(Some(b_max))?;
        let states = positive_states(&sys)?;
        let (k, prob) = (4, 1.0 / (b_max * 4 * 2) as f64);
        let proposals: Vec<(Proposal, f64)> = (1..=b_max)
            .flat_map(|b| {
                (0..k).flat_map(move |slice| {
                    [-1, 1].map(|step| {
                        (
                            Proposal {
                                slice,
                                boson: 0,
                                length: (b + 1).min(k),
                                step,
                            },
                            prob,
                        )
                    })
                })
            })
            .collect();
        let t = transition_matrix(&sys, &states, &proposals)?;
        let err = stationarity_error(&states, &t);
        r.check(
            err <= 1e-10,
            format!(
                "cluster kernel, B_max = {b_max}: {} states, stationarity error {err:.1e}",
                states.len()
            ),
        );
    }
    let sys = tiny(Some(1))?;
    let states = positive_states(&sys)?;
    let s_ok = states.iter().all(|(c, w)| {
        (action(c, sys.params(), sys.grid(), sys.model()).unwrap() + w.ln()).abs() < 1e-12
    });
    r.check(s_ok, "enumerated weights equal exp(-S)");
    for slice in 0..4 {
        let proposals = [-1, 1].map(|step| {
            (
                Proposal {
                    slice,
                    boson: 0,
                    length: 1,
                    step,
                },
                0.5,
            )
        });
        let t = transition_matrix(&sys, &states, &proposals)?;
        let err = stationarity_error(&states, &t);
        r.check(
            err <= 1e-10,
            format!("single-site kernel at slice {slice}: stationarity error {err:.1e}"),
        );
    }
    Ok(())
}
