use crate::digitization::{DigitizationGrid, PotentialModel};
use crate::error::{Error, Result};

/// Trotter discretization of `exp(-beta H)` into `slices` factors of `exp(-delta H)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrotterParams {
    delta: f64,
    beta: f64,
    slices: usize,
    max_block: usize,
}

impl TrotterParams {
    /// Builds parameters with `beta = slices * delta`, checking that the
    /// diagonal link weight `1 - N delta / a^2` is positive for this grid and
    /// model. `max_block` defaults to `slices / 2` (at least 1).
    pub fn new(
        delta: f64,
        slices: usize,
        max_block: Option<usize>,
        grid: &DigitizationGrid,
        model: &PotentialModel,
    ) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::param(
                "delta",
                format!("must be positive, got {delta}"),
            ));
        }
        if slices == 0 {
            return Err(Error::param("k", "need at least one Trotter slice"));
        }
        let max_block = max_block.unwrap_or((slices / 2).max(1));
        if max_block == 0 || max_block > slices {
            return Err(Error::param(
                "b_max",
                format!("must lie in 1..={slices}, got {max_block}"),
            ));
        }
        let a = grid.spacing();
        let stay = 1.0 - model.n_bosons() as f64 * delta / (a * a);
        if !(stay > 0.0) {
            return Err(Error::param(
                "delta",
                format!(
                    "1 - N_bos delta / a_dig^2 = {stay} is not positive (N_bos = {}, delta = {delta}, a_dig = {a})",
                    model.n_bosons()
                ),
            ));
        }
        Ok(Self {
            delta,
            beta: delta * slices as f64,
            slices,
            max_block,
        })
    }

    /// Derives the slice count as `round(beta / delta)`; fails unless
    /// `|K delta - beta| <= 1e-9 beta`.
    pub fn from_beta(
        beta: f64,
        delta: f64,
        max_block: Option<usize>,
        grid: &DigitizationGrid,
        model: &PotentialModel,
    ) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::param(
                "beta",
                format!("must be positive, got {beta}"),
            ));
        }
        if !(delta > 0.0) {
            return Err(Error::param(
                "delta",
                format!("must be positive, got {delta}"),
            ));
        }
        let slices = (beta / delta).round();
        if slices < 1.0 || (slices * delta - beta).abs() > 1e-9 * beta {
            return Err(Error::param(
                "delta",
                format!("beta / delta = {} is not an integer", beta / delta),
            ));
        }
        let mut params = Self::new(delta, slices as usize, max_block, grid, model)?;
        params.beta = beta;
        Ok(params)
    }

    /// Largest `delta = beta / K` with integer `K` and `delta / (2 a^2) <= max_hop_ratio`.
    pub fn delta_for_hop_ratio(beta: f64, spacing: f64, max_hop_ratio: f64) -> Result<f64> {
        if !(max_hop_ratio > 0.0) {
            return Err(Error::param("max_hop_ratio", "must be positive"));
        }
        let delta_max = 2.0 * spacing * spacing * max_hop_ratio;
        let mut slices = (beta / delta_max).ceil().max(1.0);
        // guard against ceil landing one short after rounding
        while beta / slices / (2.0 * spacing * spacing) > max_hop_ratio * (1.0 + 1e-12) {
            slices += 1.0;
        }
        Ok(beta / slices)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn slices(&self) -> usize {
        self.slices
    }

    pub fn max_block(&self) -> usize {
        self.max_block
    }
}
