//! Independent reference values for sup-ball probabilities.
//!
//! * [`reflection_supball`]: the classical series for
//!   `P(sup_{[0,a]} |W| ≤ m)` from the reflection principle.
//! * [`quadrature_orthant`]: the exact level-1 and level-2 probabilities of
//!   the grid sup ball, by Nyström iteration of the Gaussian transition
//!   kernel on Gauss–Legendre nodes.
//! * [`random_walk_supball`]: Monte Carlo on a fine uniform grid, a
//!   Donsker-style cross-check with an error model unrelated to the dyadic
//!   estimator.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use crate::dyadic::{DyadicGrid, Lattice};
use crate::error::{check_range, Error, Result};
use crate::gaussian::{normal_cdf, SeedSpec};
use crate::measure::{check_samples, EstimateResult, MeasureSequence, MonteCarlo, Sampling};
use crate::path_sets::PathSetSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesForm {
    /// `(4/π) Σ_j (-1)^j/(2j+1) exp(-(2j+1)² π² a / (8 m²))`.
    Theta,
    /// The method-of-images sum `Σ_k (-1)^k [Φ((2k+1)x) - Φ((2k-1)x)]`,
    /// `x = m/√a`, used when the theta terms decay too slowly.
    Images,
}

/// A truncated series with a bound on the omitted part.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub value: f64,
    /// Bound on `|exact - value|` from the first omitted term (both series
    /// are alternating with decreasing terms).
    pub error_bound: f64,
    pub terms: usize,
    pub form: SeriesForm,
}

/// Decay ratio `π² a / (8 m²)` below which the image sum is used.
const THETA_MIN_DECAY: f64 = 0.25;

fn upper_tail(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// `P(sup_{0≤t≤a} |W_t| ≤ m)`, truncated at `terms` terms.
pub fn reflection_supball(a: f64, m: f64, terms: usize) -> Result<SeriesValue> {
    check_range("a", "(0, inf)", a, a.is_finite() && a > 0.0)?;
    check_range("m", "(0, inf]", m, m > 0.0)?;
    check_range("terms", "[1, inf)", terms as f64, terms >= 1)?;
    let decay = PI * PI * a / (8.0 * m * m);
    if decay >= THETA_MIN_DECAY {
        let term = |j: usize| {
            let k = (2 * j + 1) as f64;
            (-k * k * decay).exp() / k
        };
        let sum: f64 = (0..terms)
            .map(|j| if j % 2 == 0 { term(j) } else { -term(j) })
            .sum();
        Ok(SeriesValue {
            value: 4.0 / PI * sum,
            error_bound: 4.0 / PI * term(terms),
            terms,
            form: SeriesForm::Theta,
        })
    } else {
        let x = m / a.sqrt();
        // k = 0 term plus twice the k ≥ 1 terms (the sum is symmetric in k)
        let mut value = 1.0 - 2.0 * upper_tail(x);
        for k in 1..terms {
            let kf = k as f64;
            let t = upper_tail((2.0 * kf - 1.0) * x) - upper_tail((2.0 * kf + 1.0) * x);
            value += if k % 2 == 0 { 2.0 * t } else { -2.0 * t };
        }
        Ok(SeriesValue {
            value,
            error_bound: 2.0 * upper_tail((2.0 * terms as f64 - 1.0) * x),
            terms,
            form: SeriesForm::Images,
        })
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

const GL_ORDER: usize = 10;

/// Composite rule with `panels` equal panels on `[-l, l]`.
fn composite(l: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(GL_ORDER);
    let width = 2.0 * l / panels as f64;
    let mut nodes = Vec::with_capacity(panels * GL_ORDER);
    let mut weights = Vec::with_capacity(panels * GL_ORDER);
    for p in 0..panels {
        let mid = -l + (p as f64 + 0.5) * width;
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(mid + 0.5 * width * xi);
            weights.push(0.5 * width * wi);
        }
    }
    (nodes, weights)
}

/// Probability that a Gaussian walk with `steps` steps of standard deviation
/// `sd` stays in `[-m, m]`, integrating over `[-l, l]`.
fn transfer(steps: usize, sd: f64, m: f64, l: f64, panels: usize) -> f64 {
    let (x, w) = composite(l, panels);
    let dens = |d: f64| (-0.5 * (d / sd).powi(2)).exp() / (sd * (2.0 * PI).sqrt());
    let mut p: Vec<f64> = x.iter().map(|xi| dens(*xi)).collect();
    for _ in 2..steps {
        p = x
            .iter()
            .map(|y| x.iter().zip(&w).zip(&p).map(|((xi, wi), pi)| wi * pi * dens(y - xi)).sum())
            .collect();
    }
    x.iter()
        .zip(&w)
        .zip(&p)
        .map(|((xi, wi), pi)| wi * pi * (normal_cdf((m - xi) / sd) - normal_cdf((-m - xi) / sd)))
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureValue {
    pub value: f64,
    /// Change under the last panel doubling.
    pub error_estimate: f64,
    pub nodes: usize,
}

/// Exact level-`n` probability of the sup ball `‖x‖ ≤ m` for `n ∈ {1, 2}`:
/// `P(|x(t_k)| ≤ m, k = 1..2ⁿ)` with i.i.d. `N(0, a/2ⁿ)` increments.
pub fn quadrature_orthant(grid: &DyadicGrid, m: f64) -> Result<QuadratureValue> {
    if !(1..=2).contains(&grid.level()) {
        return Err(Error::Unsupported(format!(
            "quadrature covers levels 1 and 2, got {}",
            grid.level()
        )));
    }
    check_range("m", "[0, inf]", m, m >= 0.0)?;
    if m == 0.0 {
        return Ok(QuadratureValue {
            value: 0.0,
            error_estimate: 0.0,
            nodes: 0,
        });
    }
    let steps = grid.count();
    let sd = grid.spacing().sqrt();
    let l = m.min(40.0 * grid.horizon().sqrt());
    let mut panels = ((2.0 * l / sd).ceil() as usize).max(1);
    let mut prev = transfer(steps, sd, m, l, panels);
    for _ in 0..8 {
        panels *= 2;
        let next = transfer(steps, sd, m, l, panels);
        let delta = (next - prev).abs();
        prev = next;
        if delta < 1e-12 {
            return Ok(QuadratureValue {
                value: next.clamp(0.0, 1.0),
                error_estimate: delta,
                nodes: panels * GL_ORDER,
            });
        }
    }
    Err(Error::Unsupported("quadrature did not converge".into()))
}

/// Monte Carlo estimate of `P(max_k |S_k| ≤ m)` for a walk of `steps`
/// i.i.d. `N(0, a/steps)` increments.
pub fn random_walk_supball(
    mc: &MonteCarlo,
    a: f64,
    m: f64,
    steps: usize,
    samples: u64,
    seed: SeedSpec,
) -> Result<EstimateResult> {
    let seq = random_walk_nested(mc, a, m, &[steps], samples, seed)?;
    Ok(seq.estimates[0])
}

/// Random-walk estimates at several step counts from shared fine walks.
/// Each count must divide the largest one; coarse walks read the fine walk
/// every `steps_max / steps` steps, so estimates are exactly nonincreasing in
/// the step count.
pub fn random_walk_nested(
    mc: &MonteCarlo,
    a: f64,
    m: f64,
    steps: &[usize],
    samples: u64,
    seed: SeedSpec,
) -> Result<MeasureSequence> {
    check_samples(samples)?;
    check_range("a", "(0, inf)", a, a.is_finite() && a > 0.0)?;
    let fine = steps.last().copied().unwrap_or(0);
    if steps.is_empty()
        || steps[0] == 0
        || steps.windows(2).any(|w| w[0] >= w[1])
        || steps.iter().any(|s| fine % s != 0)
    {
        return Err(Error::Parse(format!(
            "step counts must be increasing divisors of the largest, got {steps:?}"
        )));
    }
    let lattice = Lattice {
        spacing: a / fine as f64,
        count: fine,
    };
    let set = PathSetSpec::<f64>::sup_ball(m);
    set.validate()?;
    let compiled = set.compile(lattice)?;
    let strides: Vec<usize> = steps.iter().map(|s| fine / s).collect();
    let counts = mc.tally(
        lattice,
        samples,
        seed,
        steps.len(),
        || (),
        |path: &[f64], _, flags| {
            for (f, stride) in flags.iter_mut().zip(&strides) {
                *f = if *stride == 1 {
                    compiled.contains(path)
                } else {
                    path.iter().skip(stride - 1).step_by(*stride).all(|x| x.abs() <= m)
                };
            }
        },
    );
    let estimates = steps
        .iter()
        .zip(counts)
        .map(|(s, hits)| EstimateResult::from_counts(a, None, *s, hits, samples, seed))
        .collect();
    Ok(MeasureSequence::from_estimates(Sampling::Common, estimates))
}
