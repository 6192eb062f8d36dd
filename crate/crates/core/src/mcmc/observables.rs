use std::fmt;
use std::str::FromStr;

use crate::digitization::PotentialModel;
use crate::error::{Error, Result};
use crate::lattice::{ModeProjector, MomentumMode};

/// Coordinate-diagonal observables measured on path configurations.
///
/// Names: `potential`, `x`, `x2`, and `mode_power:l1,...,ld` for
/// `phi~_q phi~_{-q}` at `q = 2 pi l / L`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Observable {
    Potential,
    /// Mean coordinate over bosons.
    Coordinate,
    /// Mean squared coordinate over bosons.
    CoordinateSquared,
    ModePower(Vec<i64>),
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observable::Potential => write!(f, "potential"),
            Observable::Coordinate => write!(f, "x"),
            Observable::CoordinateSquared => write!(f, "x2"),
            Observable::ModePower(labels) => {
                let parts: Vec<String> = labels.iter().map(|l| l.to_string()).collect();
                write!(f, "mode_power:{}", parts.join(","))
            }
        }
    }
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "potential" => return Ok(Observable::Potential),
            "x" => return Ok(Observable::Coordinate),
            "x2" => return Ok(Observable::CoordinateSquared),
            _ => {}
        }
        let labels = s
            .strip_prefix("mode_power:")
            .ok_or_else(|| Error::param("observables", format!("unknown observable `{s}`")))?;
        let labels = labels
            .split(',')
            .map(|l| {
                l.trim().parse::<i64>().map_err(|_| {
                    Error::param("observables", format!("bad momentum label in `{s}`"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Observable::ModePower(labels))
    }
}

/// Observables bound to a model, ready for repeated evaluation.
#[derive(Debug, Clone)]
pub struct MeasurementPlan {
    pub(crate) items: Vec<(Observable, Option<ModeProjector>)>,
}

impl MeasurementPlan {
    pub fn new(model: &PotentialModel, observables: &[Observable]) -> Result<Self> {
        let mut items = Vec::with_capacity(observables.len());
        for obs in observables {
            let projector = match obs {
                Observable::ModePower(labels) => match model {
                    PotentialModel::LatticeScalar { geometry, .. } => {
                        let mode = MomentumMode::new(geometry, labels)?;
                        Some(ModeProjector::new(geometry, &mode)?)
                    }
                    _ => {
                        return Err(Error::UnsupportedModel(format!(
                            "`{obs}` needs a lattice model"
                        )))
                    }
                },
                _ => None,
            };
            items.push((obs.clone(), projector));
        }
        Ok(Self { items })
    }

    pub fn observables(&self) -> impl Iterator<Item = &Observable> {
        self.items.iter().map(|(o, _)| o)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Adds the single-slice value of every observable to `acc`.
    pub(crate) fn accumulate_slice(
        &self,
        model: &PotentialModel,
        x: &[f64],
        potential: Option<f64>,
        acc: &mut [f64],
    ) {
        for ((obs, projector), slot) in self.items.iter().zip(acc.iter_mut()) {
            *slot += match obs {
                Observable::Potential => potential.unwrap_or_else(|| model.energy_unchecked(x)),
                Observable::Coordinate => x.iter().sum::<f64>() / x.len() as f64,
                Observable::CoordinateSquared => {
                    x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64
                }
                Observable::ModePower(_) => projector.as_ref().map_or(0.0, |p| p.power(x)),
            };
        }
    }
}
