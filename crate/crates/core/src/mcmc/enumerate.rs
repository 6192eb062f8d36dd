use crate::error::{Error, Result};
use crate::mcmc::chain::PathIntegral;
use crate::mcmc::observables::{MeasurementPlan, Observable};
use crate::mcmc::path::{link_weight, PathConfiguration};

/// Default cap on the number of enumerated configurations.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 10_000_000;

/// Exact ensemble sums over every configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct EnumeratedEnsemble {
    /// `sum e^{-S}` over all configurations (zero-weight ones contribute 0).
    pub partition_function: f64,
    /// Configurations with positive weight.
    pub positive_weight: usize,
    /// `sum e^{-S} f / Z` for each requested function.
    pub averages: Vec<f64>,
}

/// Visits every configuration in `points^(K N)` with its weight `e^{-S}`.
pub fn enumerate_configurations<F>(sys: &PathIntegral, budget: u64, mut visit: F) -> Result<()>
where
    F: FnMut(&PathConfiguration, f64),
{
    let points = sys.grid().points();
    let slices = sys.params().slices();
    let bosons = sys.model().n_bosons();
    let sites = slices * bosons;
    let terms = (points as f64).powi(sites as i32);
    if terms > budget as f64 {
        return Err(Error::EnumerationBudget { terms, budget });
    }
    // link weights between every pair of slice states, indexed by mixed-radix code
    let states = points.pow(bosons as u32);
    let decode = |mut code: usize| -> Vec<usize> {
        let mut v = vec![0; bosons];
        for x in v.iter_mut() {
            *x = code % points;
            code /= points;
        }
        v
    };
    let mut weights = vec![0.0; states * states];
    for a in 0..states {
        for b in 0..states {
            weights[a * states + b] = link_weight(
                &decode(a),
                &decode(b),
                sys.params(),
                sys.grid(),
                sys.model(),
            )?;
        }
    }

    let mut codes = vec![0usize; slices];
    loop {
        let mut w = 1.0;
        for j in 0..slices {
            w *= weights[codes[j] * states + codes[(j + 1) % slices]];
        }
        let rows: Vec<Vec<usize>> = codes.iter().map(|&c| decode(c)).collect();
        let config = PathConfiguration::from_slices(&rows)?;
        visit(&config, w);

        let mut j = 0;
        loop {
            if j == slices {
                return Ok(());
            }
            codes[j] += 1;
            if codes[j] < states {
                break;
            }
            codes[j] = 0;
            j += 1;
        }
    }
}

/// Exhaustive weighted averages of arbitrary configuration functions.
pub fn brute_force_average(
    sys: &PathIntegral,
    budget: u64,
    functions: &mut [&mut dyn FnMut(&PathConfiguration) -> f64],
) -> Result<EnumeratedEnsemble> {
    let mut z = 0.0;
    let mut positive = 0;
    let mut sums = vec![0.0; functions.len()];
    enumerate_configurations(sys, budget, |config, w| {
        if w > 0.0 {
            z += w;
            positive += 1;
            for (f, s) in functions.iter_mut().zip(sums.iter_mut()) {
                *s += w * f(config);
            }
        }
    })?;
    Ok(EnumeratedEnsemble {
        partition_function: z,
        positive_weight: positive,
        averages: sums.iter().map(|s| s / z).collect(),
    })
}

/// Exact ensemble average of the slice-averaged observable.
pub fn brute_force_expectation(
    sys: &PathIntegral,
    observable: &Observable,
    budget: u64,
) -> Result<f64> {
    let plan = MeasurementPlan::new(sys.model(), std::slice::from_ref(observable))?;
    let mut f = |c: &PathConfiguration| sys.measure(c, &plan)[0];
    let result = brute_force_average(sys, budget, &mut [&mut f])?;
    Ok(result.averages[0])
}
