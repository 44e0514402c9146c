use serde::{Deserialize, Serialize};

use super::{check_samples, in_se_units, EstimateResult, MonteCarlo, Sampling, TOLERANCE_SE};
use crate::dyadic::DyadicGrid;
use crate::error::{Error, Result};
use crate::gaussian::SeedSpec;
use crate::path_sets::PathSetSpec;
use crate::scalar::Scalar;

/// Per-step estimates of a decreasing family of probabilities (over levels or
/// horizons) with a monotonicity verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureSequence {
    pub sampling: Sampling,
    pub estimates: Vec<EstimateResult>,
    pub monotonicity: Monotonicity,
    /// Last estimate. Not an extrapolation.
    pub limit: f64,
    /// Least-squares slope of `p̂` over the last (up to) three steps.
    pub trend_slope: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Monotonicity {
    /// Every increase is within [`TOLERANCE_SE`] combined standard errors.
    pub consistent: bool,
    /// Largest step-to-step increase in combined standard errors (0 if none).
    pub worst_increase_se: f64,
    /// Hit counts never increase. Only meaningful with shared samples.
    pub exact: Option<bool>,
}

impl MeasureSequence {
    pub(crate) fn from_estimates(sampling: Sampling, estimates: Vec<EstimateResult>) -> Self {
        let mut worst: f64 = 0.0;
        for w in estimates.windows(2) {
            let up = w[1].p_hat - w[0].p_hat;
            if up > 0.0 {
                worst = worst.max(in_se_units(up, EstimateResult::combined_se(w)));
            }
        }
        let exact = (sampling == Sampling::Common)
            .then(|| estimates.windows(2).all(|w| w[1].hits <= w[0].hits));
        let limit = estimates.last().map_or(f64::NAN, |e| e.p_hat);
        let tail = &estimates[estimates.len().saturating_sub(3)..];
        let trend_slope = slope(tail);
        Self {
            sampling,
            monotonicity: Monotonicity {
                consistent: worst <= TOLERANCE_SE,
                worst_increase_se: worst,
                exact,
            },
            estimates,
            limit,
            trend_slope,
        }
    }

    /// CSV with one row per step: `horizon,level,points,samples,hits,p_hat,se,ci_low,ci_high`.
    pub fn to_csv(&self) -> String {
        crate::report::estimates_csv(&self.estimates)
    }
}

fn slope(tail: &[EstimateResult]) -> f64 {
    if tail.len() < 2 {
        return 0.0;
    }
    let xs: Vec<f64> = tail.iter().enumerate().map(|(i, _)| i as f64).collect();
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = tail.iter().map(|e| e.p_hat).sum::<f64>() / xs.len() as f64;
    let num: f64 = xs.iter().zip(tail).map(|(x, e)| (x - mx) * (e.p_hat - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

/// Estimates of `spec` on `[0, horizon]` at each of `levels` (strictly
/// increasing).
///
/// With shared samples the finest level is sampled once and coarser levels
/// read it at their grid points.
pub fn sequence_phi<T: Scalar>(
    mc: &MonteCarlo,
    spec: &PathSetSpec<T>,
    horizon: f64,
    levels: &[u32],
    samples: u64,
    seed: SeedSpec,
    sampling: Sampling,
) -> Result<MeasureSequence> {
    check_samples(samples)?;
    spec.validate_top_level()?;
    if levels.is_empty() || levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Parse(format!(
            "levels must be non-empty and strictly increasing, got {levels:?}"
        )));
    }
    let grids = levels
        .iter()
        .map(|&n| DyadicGrid::new(horizon, n))
        .collect::<Result<Vec<_>>>()?;
    let estimates = match sampling {
        Sampling::Independent => grids
            .iter()
            .map(|g| mc.estimate(spec, g, samples, seed.substream(u64::from(g.level()))))
            .collect::<Result<Vec<_>>>()?,
        Sampling::Common => {
            let fine = *grids.last().expect("non-empty");
            let compiled = grids
                .iter()
                .map(|g| spec.compile(g.lattice()))
                .collect::<Result<Vec<_>>>()?;
            let strides: Vec<usize> = grids.iter().map(|g| fine.count() / g.count()).collect();
            let counts = mc.tally(
                fine.lattice(),
                samples,
                seed,
                grids.len(),
                || strides.iter().map(|s| Vec::with_capacity(fine.count() / s)).collect::<Vec<Vec<T>>>(),
                |path: &[T], bufs: &mut Vec<Vec<T>>, flags| {
                    for (i, ((set, stride), buf)) in compiled.iter().zip(&strides).zip(bufs.iter_mut()).enumerate() {
                        flags[i] = if *stride == 1 {
                            set.contains(path)
                        } else {
                            buf.clear();
                            buf.extend(path.iter().skip(stride - 1).step_by(*stride).copied());
                            set.contains(buf)
                        };
                    }
                },
            );
            grids
                .iter()
                .zip(counts)
                .map(|(g, hits)| {
                    EstimateResult::from_counts(
                        horizon,
                        Some(g.level()),
                        g.count(),
                        hits,
                        samples,
                        seed,
                    )
                })
                .collect()
        }
    };
    Ok(MeasureSequence::from_estimates(sampling, estimates))
}
