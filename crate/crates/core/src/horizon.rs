//! Paths on `[0, ∞)`, seen through finitely many unit intervals.
//!
//! A [`LongPath`] stores `x` on the grid `k / 2^L` of `[0, R]`. Restriction to
//! `[0, r]` is a prefix, so the consistency `T_r ∘ Q_{r+1} = Q_r` holds by
//! construction and nested horizons can share one sampled path.
//!
//! The metrics are the weighted series
//! `Σ_n 2^{-n} s_n / (1 + s_n)` where `s_n` is a sup over `[0, n]`: the sup
//! distance for `d`, the Hölder quotient of `x - y` over pairs with
//! `0 < |t - s| < 1` for `d_α`, and the same quotient without the `s` term in
//! the numerator for `d*_α`. Sups are taken over grid points, so they are
//! lower bounds of the continuous sups. The series is cut at depth `R`; the
//! omitted tail is below `2^{-R}`.

use serde::{Deserialize, Serialize};

use crate::dyadic::{DyadicGrid, GridPath, Lattice, MAX_LEVEL};
use crate::error::{check_range, Error, Result};
use crate::gaussian::SeedSpec;
use crate::measure::{
    check_samples, BoundCheck, Direction, EstimateResult, MeasureSequence, MonteCarlo, Sampling,
};
use crate::path_sets::PathSetSpec;
use crate::scalar::Scalar;

/// Series depth giving a tail below `1e-12`.
pub const DEFAULT_DEPTH: usize = 40;

/// Path on `[0, R]` sampled at `2^L` points per unit interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LongPath<T = f64> {
    horizon: usize,
    level_per_unit: u32,
    /// `values[k - 1] = x(k / 2^L)`, `k = 1..=R 2^L`.
    values: Vec<T>,
}

fn check_shape(horizon: usize, level: u32) -> Result<usize> {
    if horizon == 0 {
        return Err(Error::InvalidHorizon(0.0));
    }
    if level > MAX_LEVEL {
        return Err(Error::InvalidLevel { got: level, max: MAX_LEVEL });
    }
    horizon
        .checked_mul(1usize << level)
        .ok_or(Error::InvalidHorizon(horizon as f64))
}

impl<T: Scalar> LongPath<T> {
    pub fn new(horizon: usize, level_per_unit: u32, values: Vec<T>) -> Result<Self> {
        let len = check_shape(horizon, level_per_unit)?;
        if values.len() != len {
            return Err(Error::LengthMismatch {
                expected: len,
                got: values.len(),
            });
        }
        Ok(Self {
            horizon,
            level_per_unit,
            values,
        })
    }

    /// Grid values of `f` on `[0, R]`; `f(0)` is ignored.
    pub fn from_fn<F: FnMut(f64) -> T>(horizon: usize, level_per_unit: u32, mut f: F) -> Result<Self> {
        let len = check_shape(horizon, level_per_unit)?;
        let h = 1.0 / (1u64 << level_per_unit) as f64;
        let values = (1..=len).map(|k| f(k as f64 * h)).collect();
        Ok(Self {
            horizon,
            level_per_unit,
            values,
        })
    }

    /// A Brownian path on `[0, R]`: i.i.d. `N(0, 2^{-L})` increments.
    pub fn sample(horizon: usize, level_per_unit: u32, seed: SeedSpec) -> Result<Self> {
        let len = check_shape(horizon, level_per_unit)?;
        let sd = (1.0 / (1u64 << level_per_unit) as f64).sqrt();
        let mut normals = seed.normals(0);
        let mut acc = 0.0;
        let values = (0..len)
            .map(|_| {
                acc += sd * normals.next_normal();
                T::of(acc)
            })
            .collect();
        Ok(Self {
            horizon,
            level_per_unit,
            values,
        })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn level_per_unit(&self) -> u32 {
        self.level_per_unit
    }

    pub fn per_unit(&self) -> usize {
        1 << self.level_per_unit
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.per_unit() as f64
    }

    /// `x(k / 2^L)` for `k = 0..=R 2^L`.
    pub fn value(&self, k: usize) -> T {
        if k == 0 {
            T::zero()
        } else {
            self.values[k - 1]
        }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// `Q_r`: the restriction to `[0, r]`.
    pub fn truncate(&self, r: usize) -> Result<Self> {
        if r == 0 || r > self.horizon {
            return Err(Error::OutOfRange {
                name: "r",
                range: "[1, horizon]",
                value: r as f64,
            });
        }
        Ok(Self {
            horizon: r,
            level_per_unit: self.level_per_unit,
            values: self.values[..r * self.per_unit()].to_vec(),
        })
    }

    /// The same values as a dyadic grid path on `[0, R]`. Needs `R` to be a
    /// power of two.
    pub fn to_grid_path(&self) -> Result<GridPath<T>> {
        if !self.horizon.is_power_of_two() {
            return Err(Error::Unsupported(format!(
                "horizon {} is not a power of two",
                self.horizon
            )));
        }
        let level = self.level_per_unit + self.horizon.trailing_zeros();
        GridPath::new(DyadicGrid::new(self.horizon as f64, level)?, self.values.clone())
    }

    pub fn map<U: Scalar, F: FnMut(T) -> U>(&self, f: F) -> LongPath<U> {
        LongPath {
            horizon: self.horizon,
            level_per_unit: self.level_per_unit,
            values: self.values.iter().copied().map(f).collect(),
        }
    }

    fn differences(&self, other: &Self, depth: usize) -> Result<Vec<f64>> {
        if self.level_per_unit != other.level_per_unit {
            return Err(Error::GridMismatch(format!(
                "levels per unit {} and {}",
                self.level_per_unit, other.level_per_unit
            )));
        }
        let available = self.horizon.min(other.horizon);
        if depth == 0 || depth > available {
            return Err(Error::OutOfRange {
                name: "depth",
                range: "[1, common horizon]",
                value: depth as f64,
            });
        }
        let len = depth * self.per_unit();
        Ok(self.values[..len]
            .iter()
            .zip(&other.values[..len])
            .map(|(a, b)| (*a - *b).as_f64())
            .collect())
    }
}

/// A truncated metric series.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricValue {
    pub value: f64,
    pub depth: usize,
    /// Upper bound on the omitted terms, `2^{-depth}`.
    pub tail_bound: f64,
}

fn series(sups: &[f64]) -> MetricValue {
    let mut value = 0.0;
    let mut w = 1.0;
    for s in sups {
        w *= 0.5;
        value += w * if s.is_infinite() { 1.0 } else { s / (1.0 + s) };
    }
    MetricValue {
        value,
        depth: sups.len(),
        tail_bound: 0.5f64.powi(sups.len() as i32),
    }
}

/// `sup_{[0, n]} |z|` for `n = 1..=depth`.
fn running_sups(z: &[f64], per_unit: usize) -> Vec<f64> {
    let mut best: f64 = 0.0;
    z.chunks(per_unit)
        .map(|unit| {
            best = unit.iter().fold(best, |m, x| m.max(x.abs()));
            best
        })
        .collect()
}

/// `d(f, g)` summed to `depth`.
pub fn metric_d<T: Scalar>(f: &LongPath<T>, g: &LongPath<T>, depth: usize) -> Result<MetricValue> {
    let z = f.differences(g, depth)?;
    Ok(series(&running_sups(&z, f.per_unit())))
}

/// `d_r(f, g)`, the metric of `C_r`: the same series stopped at `r`.
pub fn metric_d_r<T: Scalar>(f: &LongPath<T>, g: &LongPath<T>, r: usize) -> Result<MetricValue> {
    metric_d(f, g, r)
}

/// Which of the stated comparisons between the three metrics hold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sandwich {
    pub d_le_star: bool,
    pub star_le_alpha: bool,
    pub alpha_le_two_star: bool,
    pub d_le_alpha: bool,
}

impl Sandwich {
    pub fn holds(&self) -> bool {
        self.d_le_star && self.star_le_alpha && self.alpha_le_two_star && self.d_le_alpha
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderMetrics {
    pub d: MetricValue,
    pub d_alpha: MetricValue,
    pub d_alpha_star: MetricValue,
    pub sandwich: Sandwich,
}

/// `d`, `d_α` and `d*_α` for the pair, summed to `depth`.
///
/// Both Hölder sups range over grid pairs `s, t ∈ [0, n]` with
/// `0 < |t - s| < 1`. For `d_α` the quotient is
/// `|z(t) - z(s)| / |t - s|^α`, for `d*_α` it is `|z(t)| / |t - s|^α` (both
/// orientations of each pair), with `z = x - y`. The comparisons are
/// evaluated, not assumed; see [`Sandwich`].
pub fn holder_metrics<T: Scalar>(
    x: &LongPath<T>,
    y: &LongPath<T>,
    alpha: f64,
    depth: usize,
) -> Result<HolderMetrics> {
    check_range("alpha", "(0, 1/2)", alpha, alpha > 0.0 && alpha < 0.5)?;
    let z = x.differences(y, depth)?;
    let per_unit = x.per_unit();
    if per_unit < 2 {
        return Err(Error::GridMismatch(
            "one point per unit leaves no pair closer than 1".into(),
        ));
    }
    let h = x.spacing();
    let weights: Vec<f64> = (1..per_unit).map(|g| (g as f64 * h).powf(-alpha)).collect();
    let at = |k: usize| if k == 0 { 0.0 } else { z[k - 1] };
    let (mut inc, mut abs) = (0.0f64, 0.0f64);
    let mut inc_sups = Vec::with_capacity(depth);
    let mut abs_sups = Vec::with_capacity(depth);
    for j in 1..=z.len() {
        let zj = at(j);
        for (gi, w) in weights.iter().enumerate() {
            let g = gi + 1;
            if g > j {
                break;
            }
            let zi = at(j - g);
            inc = inc.max((zj - zi).abs() * w);
            abs = abs.max(zj.abs().max(zi.abs()) * w);
        }
        if j % per_unit == 0 {
            inc_sups.push(inc);
            abs_sups.push(abs);
        }
    }
    let d = series(&running_sups(&z, per_unit));
    let d_alpha = series(&inc_sups);
    let d_alpha_star = series(&abs_sups);
    let sandwich = Sandwich {
        d_le_star: d.value <= d_alpha_star.value,
        star_le_alpha: d_alpha_star.value <= d_alpha.value,
        alpha_le_two_star: d_alpha.value <= 2.0 * d_alpha_star.value,
        d_le_alpha: d.value <= d_alpha.value,
    };
    Ok(HolderMetrics {
        d,
        d_alpha,
        d_alpha_star,
        sandwich,
    })
}

/// Estimates of `μ_r(Q_r K)` over horizons `r` for the Hölder ball `K` with
/// window 1, and the lower bounds at `r = ⌊λ⌋`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HorizonSequence {
    pub alpha: f64,
    pub lambda: f64,
    pub level_per_unit: u32,
    pub sequence: MeasureSequence,
    /// `⌊λ⌋`.
    pub bound_horizon: usize,
    /// Lower checks against `exp(-r/λ²)` and `exp(-1/λ)` at `r = ⌊λ⌋`, when
    /// that horizon is among the estimated ones.
    pub bounds: Vec<BoundCheck>,
}

impl HorizonSequence {
    pub fn passed(&self) -> bool {
        self.sequence.monotonicity.consistent
            && self.sequence.monotonicity.exact.unwrap_or(true)
            && self.bounds.iter().all(|b| b.pass)
    }
}

/// Nested-horizon estimates. With shared samples one path on the largest
/// horizon is sampled and every `r` reads its prefix.
#[allow(clippy::too_many_arguments)]
pub fn mu_sequence_infty(
    mc: &MonteCarlo,
    alpha: f64,
    lambda: f64,
    horizons: &[usize],
    level_per_unit: u32,
    samples: u64,
    seed: SeedSpec,
    sampling: Sampling,
) -> Result<HorizonSequence> {
    check_samples(samples)?;
    let spec = PathSetSpec::<f64>::holder_ball(alpha, lambda);
    spec.validate()?;
    if horizons.is_empty() || horizons[0] == 0 || horizons.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Parse(format!(
            "horizons must be positive and strictly increasing, got {horizons:?}"
        )));
    }
    let per_unit = 1usize << level_per_unit;
    let lattices = horizons
        .iter()
        .map(|&r| {
            Ok(Lattice {
                spacing: 1.0 / per_unit as f64,
                count: check_shape(r, level_per_unit)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let compiled = lattices
        .iter()
        .map(|l| spec.compile(*l))
        .collect::<Result<Vec<_>>>()?;
    let counts: Vec<u64> = match sampling {
        Sampling::Common => {
            let longest = *lattices.last().expect("non-empty");
            mc.tally(
                longest,
                samples,
                seed,
                compiled.len(),
                || (),
                |path: &[f64], _, flags| {
                    for (i, (set, l)) in compiled.iter().zip(&lattices).enumerate() {
                        flags[i] = set.contains(&path[..l.count]);
                    }
                },
            )
        }
        Sampling::Independent => compiled
            .iter()
            .zip(&lattices)
            .zip(horizons)
            .map(|((set, l), &r)| {
                mc.tally(*l, samples, seed.substream(r as u64), 1, || (), |path: &[f64], _, f| {
                    f[0] = set.contains(path)
                })[0]
            })
            .collect(),
    };
    let estimates: Vec<EstimateResult> = horizons
        .iter()
        .zip(&lattices)
        .zip(counts)
        .map(|((&r, l), hits)| EstimateResult::from_counts(r as f64, None, l.count, hits, samples, seed))
        .collect();
    let bound_horizon = lambda.floor() as usize;
    let bounds = horizons
        .iter()
        .position(|&r| r == bound_horizon)
        .map(|i| {
            let r = bound_horizon as f64;
            vec![
                BoundCheck::new("exp(-r/lambda^2)", Direction::Lower, (-r / (lambda * lambda)).exp(), &estimates[i]),
                BoundCheck::new("exp(-1/lambda)", Direction::Lower, (-1.0 / lambda).exp(), &estimates[i]),
            ]
        })
        .unwrap_or_default();
    Ok(HorizonSequence {
        alpha,
        lambda,
        level_per_unit,
        sequence: MeasureSequence::from_estimates(sampling, estimates),
        bound_horizon,
        bounds,
    })
}
