//! Shared fixtures for the kernel benchmarks.

use digimc::mcmc::{PathIntegral, TrotterParams};
use digimc::{DigitizationGrid, PotentialModel};
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_pcg::Pcg64;

/// Quartic single boson, lambda = 1, at the given spacing and beta.
pub fn single_boson(a_dig: f64, m_squared: f64, beta: f64, delta: f64) -> PathIntegral {
    let grid = DigitizationGrid::with_spacing(2001, a_dig).expect("grid");
    let model = PotentialModel::quartic(1.0, m_squared);
    let params = TrotterParams::from_beta(beta, delta, None, &grid, &model).expect("trotter");
    PathIntegral::new(grid, model, params).expect("system")
}

/// 4x4 free scalar field at T = 1.
pub fn free_field(a_dig: f64, delta: f64) -> PathIntegral {
    let grid = DigitizationGrid::with_spacing(2001, a_dig).expect("grid");
    let model = PotentialModel::lattice_scalar(1.0, 2, 4).expect("model");
    let params = TrotterParams::from_beta(1.0, delta, None, &grid, &model).expect("trotter");
    PathIntegral::new(grid, model, params).expect("system")
}

/// Gaussian AR(1) series with unit variance.
pub fn ar1(rho: f64, len: usize, seed: u64) -> Vec<f64> {
    let mut rng = Pcg64::seed_from_u64(seed);
    let scale = (1.0 - rho * rho).sqrt();
    let mut x = 0.0;
    (0..len)
        .map(|_| {
            let noise: f64 = rng.sample(StandardNormal);
            x = rho * x + scale * noise;
            x
        })
        .collect()
}
