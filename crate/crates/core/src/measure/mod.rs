//! Monte Carlo estimation of the level-`n` probabilities of catalog sets.
//!
//! A sample is a vector of `2^n` independent `N(0, a/2^n)` increments; the
//! estimate is the fraction of samples whose grid path lies in the grid image
//! of the set. Work is split into fixed-size chunks, chunk `c` draws from
//! stream `c` of the seed, and chunk results are integer counts, so the
//! outcome does not depend on the number of workers.
//!
//! With [`Sampling::Common`] every event of an experiment (several levels,
//! several sets, nested horizons) is evaluated on the same sampled paths.
//! Coarser levels read the fine path at the coarse grid points, which has
//! exactly the coarse law. Inclusions between events then become exact
//! inequalities between counts.

mod bounds;
mod checks;
mod sequence;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use bounds::{holder_lower_bound, psi, supball_bound, BoundCheck, BoundReport, Direction};
pub use checks::{
    additivity_check, countable_additivity_check, difference_check, monotone_limit_check,
    CheckReport, LabelledEstimate, NestedFamily,
};
pub use sequence::{sequence_phi, MeasureSequence, Monotonicity};

use crate::dyadic::{DyadicGrid, Lattice};
use crate::error::{Error, Result};
use crate::gaussian::SeedSpec;
use crate::path_sets::{Compiled, PathSetSpec};
use crate::scalar::Scalar;

/// Samples per work unit. Fixed so that results are schedule independent.
pub const CHUNK_SIZE: u64 = 1 << 12;

/// Smallest sample count accepted by the estimators.
pub const MIN_SAMPLES: u64 = 1_000;

/// Pass/fail tolerance, in combined standard errors.
pub const TOLERANCE_SE: f64 = 3.0;

/// Two-sided 99% normal quantile used for Wilson intervals.
const Z99: f64 = 2.575_829_303_548_901;

/// Whether the events of one experiment share sampled paths.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    #[default]
    Common,
    Independent,
}

/// Monte Carlo driver. `workers = None` uses the global rayon pool.
#[derive(Clone, Copy, Debug, Default)]
pub struct MonteCarlo {
    pub workers: Option<usize>,
}

impl MonteCarlo {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_workers(workers: usize) -> Self {
        Self {
            workers: Some(workers.max(1)),
        }
    }

    fn run<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        match self.workers {
            Some(w) => rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .expect("thread pool")
                .install(f),
            None => f(),
        }
    }

    /// Counts, per event, the samples for which `visit` raised the flag.
    ///
    /// `visit` receives the sampled levels `x(t_1..t_count)` of one path, a
    /// per-chunk scratch value built by `init`, and a cleared flag slice.
    pub(crate) fn tally<T, S, I, V>(
        &self,
        lattice: Lattice,
        samples: u64,
        seed: SeedSpec,
        events: usize,
        init: I,
        visit: V,
    ) -> Vec<u64>
    where
        T: Scalar,
        I: Fn() -> S + Sync,
        V: Fn(&[T], &mut S, &mut [bool]) + Sync,
    {
        let chunks = samples.div_ceil(CHUNK_SIZE);
        let sd = lattice.spacing.sqrt();
        self.run(|| {
            (0..chunks)
                .into_par_iter()
                .map(|c| {
                    let n = CHUNK_SIZE.min(samples - c * CHUNK_SIZE);
                    let mut normals = seed.normals(c);
                    let mut path = vec![T::zero(); lattice.count];
                    let mut flags = vec![false; events];
                    let mut counts = vec![0u64; events];
                    let mut scratch = init();
                    for _ in 0..n {
                        let mut acc = T::zero();
                        for x in path.iter_mut() {
                            acc = acc + T::of(sd * normals.next_normal());
                            *x = acc;
                        }
                        flags.fill(false);
                        visit(&path, &mut scratch, &mut flags);
                        for (count, flag) in counts.iter_mut().zip(&flags) {
                            *count += u64::from(*flag);
                        }
                    }
                    counts
                })
                .reduce(
                    || vec![0; events],
                    |mut a, b| {
                        a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                        a
                    },
                )
        })
    }

    /// Counts for several sets on one lattice, shared or independent paths.
    pub(crate) fn tally_sets<T: Scalar>(
        &self,
        lattice: Lattice,
        sets: &[Compiled<T>],
        samples: u64,
        seed: SeedSpec,
        sampling: Sampling,
    ) -> Vec<u64> {
        match sampling {
            Sampling::Common => self.tally(
                lattice,
                samples,
                seed,
                sets.len(),
                || (),
                |path: &[T], _, flags| {
                    for (f, s) in flags.iter_mut().zip(sets) {
                        *f = s.contains(path);
                    }
                },
            ),
            Sampling::Independent => sets
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    self.tally(
                        lattice,
                        samples,
                        seed.substream(i as u64),
                        1,
                        || (),
                        |path: &[T], _, flags| flags[0] = s.contains(path),
                    )[0]
                })
                .collect(),
        }
    }

    /// Estimate of the level-`n` probability of `spec` on `grid`.
    pub fn estimate<T: Scalar>(
        &self,
        spec: &PathSetSpec<T>,
        grid: &DyadicGrid,
        samples: u64,
        seed: SeedSpec,
    ) -> Result<EstimateResult> {
        check_samples(samples)?;
        spec.validate_top_level()?;
        let compiled = spec.compile(grid.lattice())?;
        let hits = self.tally_sets(
            grid.lattice(),
            std::slice::from_ref(&compiled),
            samples,
            seed,
            Sampling::Common,
        )[0];
        Ok(EstimateResult::from_counts(
            grid.horizon(),
            Some(grid.level()),
            grid.count(),
            hits,
            samples,
            seed,
        ))
    }
}

pub(crate) fn check_samples(samples: u64) -> Result<()> {
    if samples < MIN_SAMPLES {
        Err(Error::TooFewSamples {
            min: MIN_SAMPLES,
            got: samples,
        })
    } else {
        Ok(())
    }
}

/// One Monte Carlo probability estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub horizon: f64,
    /// Dyadic level, or `None` for non-dyadic lattices such as random walks.
    pub level: Option<u32>,
    /// Grid points after the origin.
    pub points: usize,
    pub samples: u64,
    pub hits: u64,
    pub p_hat: f64,
    /// `sqrt(p̂(1 - p̂) / N)`.
    pub se: f64,
    /// Wilson 99% interval.
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: SeedSpec,
}

impl EstimateResult {
    pub fn from_counts(
        horizon: f64,
        level: Option<u32>,
        points: usize,
        hits: u64,
        samples: u64,
        seed: SeedSpec,
    ) -> Self {
        let n = samples as f64;
        let p = hits as f64 / n;
        let se = (p * (1.0 - p) / n).sqrt();
        let (ci_low, ci_high) = wilson(p, n, Z99);
        Self {
            horizon,
            level,
            points,
            samples,
            hits,
            p_hat: p,
            se,
            ci_low,
            ci_high,
            seed,
        }
    }

    /// `sqrt(se_1^2 + ... )` over the given estimates.
    pub fn combined_se<'a>(items: impl IntoIterator<Item = &'a EstimateResult>) -> f64 {
        items
            .into_iter()
            .map(|e| e.se * e.se)
            .sum::<f64>()
            .sqrt()
    }
}

fn wilson(p: f64, n: f64, z: f64) -> (f64, f64) {
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    // the endpoints are exact at p = 0 and p = 1; avoid rounding past p
    let lo = if p == 0.0 { 0.0 } else { (center - half).clamp(0.0, p) };
    let hi = if p == 1.0 { 1.0 } else { (center + half).clamp(p, 1.0) };
    (lo, hi)
}

/// `|diff| / se` with `0/0 = 0` and `x/0 = ∞`.
pub(crate) fn in_se_units(diff: f64, se: f64) -> f64 {
    let d = diff.abs();
    if d == 0.0 {
        0.0
    } else if se == 0.0 {
        f64::INFINITY
    } else {
        d / se
    }
}
