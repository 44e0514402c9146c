//! Numerical checks of additivity, differences and monotone limits on
//! catalog sets.
//!
//! Each check estimates several events on one grid. With shared samples the
//! set identities (disjoint union, difference of nested sets, partition of a
//! ball) hold exactly for the hit counts and are reported as
//! `exact_identity`; the statistical verdict compares the two sides in
//! combined standard errors.

use serde::{Deserialize, Serialize};

use super::{check_samples, in_se_units, EstimateResult, MonteCarlo, Sampling, TOLERANCE_SE};
use crate::dyadic::DyadicGrid;
use crate::error::{check_range, Error, Result};
use crate::gaussian::SeedSpec;
use crate::path_sets::{separation, PathSetSpec};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelledEstimate {
    pub label: String,
    pub estimate: EstimateResult,
}

/// Outcome of one check, with the raw numbers behind the verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub horizon: f64,
    pub level: u32,
    pub samples: u64,
    pub seed: SeedSpec,
    pub sampling: Sampling,
    pub passed: bool,
    /// Discrepancy between the two sides of the identity, in combined SE.
    pub discrepancy_se: f64,
    pub tolerance_se: f64,
    /// Whether the identity holds exactly for hit counts (shared samples only).
    pub exact_identity: Option<bool>,
    pub estimates: Vec<LabelledEstimate>,
    pub notes: Vec<String>,
}

struct Run {
    grid: DyadicGrid,
    samples: u64,
    seed: SeedSpec,
    sampling: Sampling,
    estimates: Vec<LabelledEstimate>,
}

impl Run {
    fn new<T: Scalar>(
        mc: &MonteCarlo,
        grid: &DyadicGrid,
        events: Vec<(String, PathSetSpec<T>)>,
        samples: u64,
        seed: SeedSpec,
        sampling: Sampling,
    ) -> Result<Self> {
        check_samples(samples)?;
        let compiled = events
            .iter()
            .map(|(_, s)| {
                s.validate()?;
                s.compile(grid.lattice())
            })
            .collect::<Result<Vec<_>>>()?;
        let counts = mc.tally_sets(grid.lattice(), &compiled, samples, seed, sampling);
        let estimates = events
            .into_iter()
            .zip(counts)
            .map(|((label, _), hits)| LabelledEstimate {
                label,
                estimate: EstimateResult::from_counts(
                    grid.horizon(),
                    Some(grid.level()),
                    grid.count(),
                    hits,
                    samples,
                    seed,
                ),
            })
            .collect();
        Ok(Self {
            grid: *grid,
            samples,
            seed,
            sampling,
            estimates,
        })
    }

    fn est(&self, i: usize) -> &EstimateResult {
        &self.estimates[i].estimate
    }

    fn report(
        self,
        check: &str,
        discrepancy_se: f64,
        exact: Option<bool>,
        extra_ok: bool,
        notes: Vec<String>,
    ) -> CheckReport {
        let passed = discrepancy_se <= TOLERANCE_SE && exact.unwrap_or(true) && extra_ok;
        CheckReport {
            check: check.into(),
            horizon: self.grid.horizon(),
            level: self.grid.level(),
            samples: self.samples,
            seed: self.seed,
            sampling: self.sampling,
            passed,
            discrepancy_se,
            tolerance_se: TOLERANCE_SE,
            exact_identity: exact,
            estimates: self.estimates,
            notes,
        }
    }
}

/// `P(A ∪ B) = P(A) + P(B)` for sets certified disjoint at the grid level.
pub fn additivity_check<T: Scalar>(
    mc: &MonteCarlo,
    a: &PathSetSpec<T>,
    b: &PathSetSpec<T>,
    grid: &DyadicGrid,
    samples: u64,
    seed: SeedSpec,
    sampling: Sampling,
) -> Result<CheckReport> {
    let q = separation(a, b, grid)?;
    if !(q > 0.0) {
        return Err(Error::NotSeparated(q));
    }
    let union = PathSetSpec::union(vec![a.clone(), b.clone()]);
    let run = Run::new(
        mc,
        grid,
        vec![("A".into(), a.clone()), ("B".into(), b.clone()), ("A∪B".into(), union)],
        samples,
        seed,
        sampling,
    )?;
    let (ea, eb, eu) = (run.est(0), run.est(1), run.est(2));
    let disc = in_se_units(
        eu.p_hat - ea.p_hat - eb.p_hat,
        EstimateResult::combined_se([ea, eb, eu]),
    );
    let exact = (sampling == Sampling::Common).then(|| eu.hits == ea.hits + eb.hits);
    let notes = vec![format!("separation lower bound {q}")];
    Ok(run.report("additivity", disc, exact, true, notes))
}

/// `P(S_{m2} \ S_{m1}) = P(S_{m2}) - P(S_{m1})` for sup balls `m1 ≤ m2`.
pub fn difference_check(
    mc: &MonteCarlo,
    m_inner: f64,
    m_outer: f64,
    grid: &DyadicGrid,
    samples: u64,
    seed: SeedSpec,
    sampling: Sampling,
) -> Result<CheckReport> {
    check_range("m_inner", "[0, m_outer]", m_inner, m_inner >= 0.0 && m_inner <= m_outer)?;
    let run = Run::new::<f64>(
        mc,
        grid,
        vec![
            ("inner".into(), PathSetSpec::sup_ball(m_inner)),
            ("outer".into(), PathSetSpec::sup_ball(m_outer)),
            ("annulus".into(), PathSetSpec::annulus(m_inner, m_outer)),
        ],
        samples,
        seed,
        sampling,
    )?;
    let (ei, eo, ea) = (run.est(0), run.est(1), run.est(2));
    let disc = in_se_units(
        ea.p_hat - (eo.p_hat - ei.p_hat),
        EstimateResult::combined_se([ei, eo, ea]),
    );
    let exact = (sampling == Sampling::Common).then(|| ea.hits + ei.hits == eo.hits);
    Ok(run.report("difference", disc, exact, true, vec![]))
}

/// A nested family of catalog sets converging to a limit set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum NestedFamily {
    SupBalls { radii: Vec<f64>, limit: f64 },
    HolderBalls { alpha: f64, lambdas: Vec<f64>, limit: f64 },
}

impl NestedFamily {
    fn params(&self) -> (&[f64], f64) {
        match self {
            Self::SupBalls { radii, limit } => (radii, *limit),
            Self::HolderBalls { lambdas, limit, .. } => (lambdas, *limit),
        }
    }

    fn spec(&self, p: f64) -> PathSetSpec<f64> {
        match self {
            Self::SupBalls { .. } => PathSetSpec::sup_ball(p),
            Self::HolderBalls { alpha, .. } => PathSetSpec::holder_ball(*alpha, p),
        }
    }

    /// `true` for a decreasing family (constant families count as
    /// decreasing), `false` for an increasing one.
    pub fn decreasing(&self) -> Result<bool> {
        let (ps, limit) = self.params();
        if ps.is_empty() {
            return Err(Error::NotNested("empty family".into()));
        }
        let down = ps.windows(2).all(|w| w[1] <= w[0]) && ps.iter().all(|p| *p >= limit);
        let up = ps.windows(2).all(|w| w[1] >= w[0]) && ps.iter().all(|p| *p <= limit);
        match (down, up) {
            (true, _) => Ok(true),
            (false, true) => Ok(false),
            _ => Err(Error::NotNested(format!(
                "parameters {ps:?} are not monotone towards the limit {limit}"
            ))),
        }
    }
}

/// Estimates along a nested family and at its limit. Passes when the
/// estimates move monotonically (exactly, with shared samples) and the last
/// member is within tolerance of the limit set.
pub fn monotone_limit_check(
    mc: &MonteCarlo,
    family: &NestedFamily,
    grid: &DyadicGrid,
    samples: u64,
    seed: SeedSpec,
    sampling: Sampling,
) -> Result<CheckReport> {
    let decreasing = family.decreasing()?;
    let (ps, limit) = family.params();
    let mut events: Vec<(String, PathSetSpec<f64>)> = ps
        .iter()
        .enumerate()
        .map(|(j, p)| (format!("K_{}", j + 1), family.spec(*p)))
        .collect();
    events.push(("K".into(), family.spec(limit)));
    let run = Run::new(mc, grid, events, samples, seed, sampling)?;
    let all: Vec<&EstimateResult> = run.estimates.iter().map(|e| &e.estimate).collect();
    let ordered = |x: &EstimateResult, y: &EstimateResult| {
        if decreasing {
            (x.hits, y.hits)
        } else {
            (y.hits, x.hits)
        }
    };
    let exact = (sampling == Sampling::Common)
        .then(|| all.windows(2).all(|w| {
            let (hi, lo) = ordered(w[0], w[1]);
            lo <= hi
        }));
    let statistical = all.windows(2).all(|w| {
        let step = if decreasing {
            w[1].p_hat - w[0].p_hat
        } else {
            w[0].p_hat - w[1].p_hat
        };
        step <= 0.0 || in_se_units(step, EstimateResult::combined_se([w[0], w[1]])) <= TOLERANCE_SE
    });
    let last = all[all.len() - 2];
    let target = all[all.len() - 1];
    let disc = in_se_units(last.p_hat - target.p_hat, EstimateResult::combined_se([last, target]));
    let notes = vec![format!(
        "{} family of {} sets",
        if decreasing { "decreasing" } else { "increasing" },
        ps.len()
    )];
    Ok(run.report("monotone_limit", disc, exact, statistical, notes))
}

/// Partition of `S_M` into the annuli `m_{j-1} < ‖x‖ ≤ m_j` with `m_0 = 0`:
/// the annulus probabilities sum to the ball probability.
pub fn countable_additivity_check(
    mc: &MonteCarlo,
    radii: &[f64],
    grid: &DyadicGrid,
    samples: u64,
    seed: SeedSpec,
    sampling: Sampling,
) -> Result<CheckReport> {
    if radii.is_empty() || radii[0] <= 0.0 || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::NotNested(format!(
            "radii must be positive and strictly increasing, got {radii:?}"
        )));
    }
    let outer = *radii.last().expect("non-empty");
    let mut events: Vec<(String, PathSetSpec<f64>)> = Vec::with_capacity(radii.len() + 1);
    let mut prev = 0.0;
    for (j, m) in radii.iter().enumerate() {
        events.push((format!("annulus_{}", j + 1), PathSetSpec::annulus(prev, *m)));
        prev = *m;
    }
    events.push(("ball".into(), PathSetSpec::sup_ball(outer)));
    let run = Run::new(mc, grid, events, samples, seed, sampling)?;
    let parts = &run.estimates[..radii.len()];
    let ball = run.est(radii.len());
    let sum_p: f64 = parts.iter().map(|e| e.estimate.p_hat).sum();
    let sum_hits: u64 = parts.iter().map(|e| e.estimate.hits).sum();
    let se = EstimateResult::combined_se(run.estimates.iter().map(|e| &e.estimate));
    let disc = in_se_units(sum_p - ball.p_hat, se);
    let exact = (sampling == Sampling::Common).then(|| sum_hits == ball.hits);
    let notes = vec![format!(
        "{} annuli; tolerance uses the combined SE of all parts ({se:.3e})",
        radii.len()
    )];
    Ok(run.report("countable_additivity", disc, exact, true, notes))
}
