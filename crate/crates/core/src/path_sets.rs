//! Catalog of concrete closed path sets and their grid-level descriptions.
//!
//! Each [`PathSetSpec`] is turned into a predicate on grid values: the set of
//! grid vectors it accepts is the grid image used by the estimator.
//!
//! * `SupBall { m }`: `|x(t_k)| ≤ m` at every grid point.
//! * `Tube { center, r }`: `|x(t_k) - c(t_k)| ≤ r`, with `c` the
//!   piecewise-linear extension of `center`.
//! * `HolderBall { alpha, lambda, window }`: the discrete seminorm
//!   `max |x(t) - x(s)| / |t - s|^alpha` over grid pairs (origin included)
//!   with `0 < |t - s| < window` is at most `lambda`. Restricting the pairs
//!   to the grid can only shrink the supremum, so the predicate contains the
//!   true image of the ball and Monte Carlo values are upper approximations.
//! * `Intersection`, `Union`, `Complement`: pointwise boolean algebra.
//!   Complements are only allowed inside a boolean combination.

use serde::{Deserialize, Serialize};

use crate::dyadic::{DyadicGrid, GridPath, IncrementVector, Lattice};
use crate::error::{check_range, Error, Result};
use crate::scalar::Scalar;

/// Schema tag for serialized path sets.
pub const PATHSET_SCHEMA: &str = "wiener-meter/pathset/1";

fn default_window() -> f64 {
    1.0
}

/// A closed path set from the catalog.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[serde(bound(
    serialize = "T: Serialize + Clone",
    deserialize = "T: Deserialize<'de>"
))]
pub enum PathSetSpec<T = f64> {
    SupBall {
        m: f64,
    },
    Tube {
        center: GridPath<T>,
        r: f64,
    },
    HolderBall {
        alpha: f64,
        lambda: f64,
        #[serde(default = "default_window")]
        window: f64,
    },
    Intersection {
        sets: Vec<PathSetSpec<T>>,
    },
    Union {
        sets: Vec<PathSetSpec<T>>,
    },
    Complement {
        inner: Box<PathSetSpec<T>>,
    },
}

impl<T> PathSetSpec<T> {
    pub fn sup_ball(m: f64) -> Self {
        Self::SupBall { m }
    }

    pub fn tube(center: GridPath<T>, r: f64) -> Self {
        Self::Tube { center, r }
    }

    /// Hölder ball with the unit pair-distance window.
    pub fn holder_ball(alpha: f64, lambda: f64) -> Self {
        Self::HolderBall {
            alpha,
            lambda,
            window: 1.0,
        }
    }

    pub fn intersection(sets: Vec<Self>) -> Self {
        Self::Intersection { sets }
    }

    pub fn union(sets: Vec<Self>) -> Self {
        Self::Union { sets }
    }

    pub fn complement(inner: Self) -> Self {
        Self::Complement {
            inner: Box::new(inner),
        }
    }

    /// `{ m_inner < ‖x‖ ≤ m_outer }`, i.e. the outer ball minus the inner one.
    pub fn annulus(m_inner: f64, m_outer: f64) -> Self {
        Self::intersection(vec![
            Self::sup_ball(m_outer),
            Self::complement(Self::sup_ball(m_inner)),
        ])
    }

    /// Checks parameter ranges recursively.
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::SupBall { m } => check_range("m", "[0, inf]", *m, *m >= 0.0),
            Self::Tube { r, .. } => check_range("r", "[0, inf]", *r, *r >= 0.0),
            Self::HolderBall {
                alpha,
                lambda,
                window,
            } => {
                check_range("alpha", "(0, 1/2)", *alpha, *alpha > 0.0 && *alpha < 0.5)?;
                check_range("lambda", "[0, inf]", *lambda, *lambda >= 0.0)?;
                check_range("window", "(0, inf]", *window, *window > 0.0)
            }
            Self::Intersection { sets } => {
                if sets.is_empty() {
                    return Err(Error::Unsupported("empty intersection".into()));
                }
                sets.iter().try_for_each(Self::validate)
            }
            Self::Union { sets } => sets.iter().try_for_each(Self::validate),
            Self::Complement { inner } => inner.validate(),
        }
    }

    /// [`validate`](Self::validate) plus the rule that the top level is not a
    /// complement (complements of bounded sets are never compact).
    pub fn validate_top_level(&self) -> Result<()> {
        if let Self::Complement { .. } = self {
            return Err(Error::Unsupported(
                "a complement is only allowed inside an intersection or union".into(),
            ));
        }
        self.validate()
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::SupBall { .. } => "sup_ball",
            Self::Tube { .. } => "tube",
            Self::HolderBall { .. } => "holder_ball",
            Self::Intersection { .. } => "intersection",
            Self::Union { .. } => "union",
            Self::Complement { .. } => "complement",
        }
    }

    /// True when the set contains no complement, so that its grid predicate
    /// only gets stricter as constraints are added.
    pub fn is_monotone(&self) -> bool {
        match self {
            Self::Complement { .. } => false,
            Self::Intersection { sets } | Self::Union { sets } => {
                sets.iter().all(Self::is_monotone)
            }
            _ => true,
        }
    }
}

/// Versioned JSON envelope for a path set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Serialize + Clone",
    deserialize = "T: Deserialize<'de>"
))]
pub struct PathSetDocument<T = f64> {
    #[serde(default = "current_schema")]
    pub schema: String,
    pub set: PathSetSpec<T>,
}

fn current_schema() -> String {
    PATHSET_SCHEMA.to_string()
}

impl<T> PathSetDocument<T> {
    pub fn new(set: PathSetSpec<T>) -> Self {
        Self {
            schema: current_schema(),
            set,
        }
    }

    pub fn check_schema(&self) -> Result<()> {
        if self.schema == PATHSET_SCHEMA {
            Ok(())
        } else {
            Err(Error::Parse(format!(
                "unsupported path-set schema `{}` (expected `{PATHSET_SCHEMA}`)",
                self.schema
            )))
        }
    }
}

impl PathSetDocument<f64> {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("path sets serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        doc.check_schema()?;
        doc.set.validate()?;
        Ok(doc)
    }
}

/// Largest pair gap in grid steps that stays strictly below `window`.
fn max_gap(spacing: f64, window: f64, count: usize) -> usize {
    let mut g = (window / spacing).ceil() as usize;
    while g > 0 && g as f64 * spacing >= window {
        g -= 1;
    }
    g.min(count)
}

/// A path set compiled against a concrete lattice.
#[derive(Clone, Debug)]
pub(crate) enum Compiled<T> {
    Sup(T),
    Tube { center: Vec<T>, r: T },
    Holder { thresholds: Vec<T> },
    All(Vec<Compiled<T>>),
    Any(Vec<Compiled<T>>),
    Not(Box<Compiled<T>>),
}

impl<T: Scalar> PathSetSpec<T> {
    pub(crate) fn compile(&self, lattice: Lattice) -> Result<Compiled<T>> {
        Ok(match self {
            Self::SupBall { m } => Compiled::Sup(T::of(*m)),
            Self::Tube { center, r } => {
                let h = center.grid().horizon();
                if lattice.horizon() > h * (1.0 + 1e-12) {
                    return Err(Error::GridMismatch(format!(
                        "tube center covers [0, {h}] but the grid reaches {}",
                        lattice.horizon()
                    )));
                }
                let center = (1..=lattice.count)
                    .map(|k| center.interpolate(lattice.time(k).min(h)))
                    .collect::<Result<Vec<_>>>()?;
                Compiled::Tube { center, r: T::of(*r) }
            }
            Self::HolderBall {
                alpha,
                lambda,
                window,
            } => {
                let g = max_gap(lattice.spacing, *window, lattice.count);
                if g == 0 {
                    return Err(Error::GridMismatch(format!(
                        "grid spacing {} leaves no pair closer than the window {window}",
                        lattice.spacing
                    )));
                }
                let thresholds = (1..=g)
                    .map(|g| T::of(lambda * (g as f64 * lattice.spacing).powf(*alpha)))
                    .collect();
                Compiled::Holder { thresholds }
            }
            Self::Intersection { sets } => Compiled::All(
                sets.iter()
                    .map(|s| s.compile(lattice))
                    .collect::<Result<_>>()?,
            ),
            Self::Union { sets } => Compiled::Any(
                sets.iter()
                    .map(|s| s.compile(lattice))
                    .collect::<Result<_>>()?,
            ),
            Self::Complement { inner } => Compiled::Not(Box::new(inner.compile(lattice)?)),
        })
    }

    /// Membership of the path with increments `inc` in the grid image of the
    /// set.
    pub fn member_grid(&self, inc: &IncrementVector<T>) -> Result<bool> {
        self.member_path(&inc.cumulate())
    }

    /// Same as [`member_grid`](Self::member_grid) in level coordinates.
    pub fn member_path(&self, path: &GridPath<T>) -> Result<bool> {
        self.validate()?;
        Ok(self.compile(path.grid().lattice())?.contains(path.levels()))
    }
}

impl<T: Scalar> Compiled<T> {
    /// `levels[k - 1] = x(t_k)`; the origin is implicit.
    pub fn contains(&self, levels: &[T]) -> bool {
        match self {
            Compiled::Sup(m) => levels.iter().all(|x| x.abs() <= *m),
            Compiled::Tube { center, r } => levels
                .iter()
                .zip(center)
                .all(|(x, c)| (*x - *c).abs() <= *r),
            Compiled::Holder { thresholds } => holder_within(levels, thresholds),
            Compiled::All(parts) => parts.iter().all(|p| p.contains(levels)),
            Compiled::Any(parts) => parts.iter().any(|p| p.contains(levels)),
            Compiled::Not(inner) => !inner.contains(levels),
        }
    }
}

/// Checks `|x(t_{i+g}) - x(t_i)| ≤ thresholds[g - 1]` for all admissible
/// pairs, including those anchored at the origin.
fn holder_within<T: Scalar>(levels: &[T], thresholds: &[T]) -> bool {
    let n = levels.len();
    for (gi, thr) in thresholds.iter().enumerate() {
        let g = gi + 1;
        if g > n {
            break;
        }
        if levels[g - 1].abs() > *thr {
            return false;
        }
        let ok = levels[g..]
            .iter()
            .zip(&levels[..n - g])
            .all(|(a, b)| (*a - *b).abs() <= *thr);
        if !ok {
            return false;
        }
    }
    true
}

/// Discrete Hölder seminorm and the grid pair attaining it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderValue {
    pub seminorm: f64,
    pub s: f64,
    pub t: f64,
}

/// `max_{i<j, 0<(j-i)h<window} |x_j - x_i| / ((j-i)h)^alpha` over a lattice
/// with the origin included. Returns the maximum and the index pair.
pub(crate) fn holder_scan<T: Scalar>(
    levels: &[T],
    spacing: f64,
    alpha: f64,
    window: f64,
) -> Option<(f64, usize, usize)> {
    let n = levels.len();
    let gmax = max_gap(spacing, window, n);
    if gmax == 0 {
        return None;
    }
    let at = |k: usize| if k == 0 { 0.0 } else { levels[k - 1].as_f64() };
    let mut best = (f64::NEG_INFINITY, 0, 1);
    for g in 1..=gmax {
        let scale = (g as f64 * spacing).powf(alpha);
        for i in 0..=n - g {
            let r = (at(i + g) - at(i)).abs() / scale;
            if r > best.0 {
                best = (r, i, i + g);
            }
        }
    }
    Some(best)
}

/// Discrete Hölder seminorm of `path` over grid pairs with
/// `0 < |t - s| < window`.
pub fn holder_seminorm<T: Scalar>(path: &GridPath<T>, alpha: f64, window: f64) -> Result<HolderValue> {
    check_range("alpha", "(0, 1)", alpha, alpha > 0.0 && alpha < 1.0)?;
    check_range("window", "(0, inf]", window, window > 0.0)?;
    let grid = path.grid();
    let (seminorm, i, j) = holder_scan(path.levels(), grid.spacing(), alpha, window).ok_or_else(
        || {
            Error::GridMismatch(format!(
                "fewer than 2 grid points closer than {window} on {grid}"
            ))
        },
    )?;
    Ok(HolderValue {
        seminorm,
        s: grid.time(i),
        t: grid.time(j),
    })
}

/// Parameters of a Hölder ball, extracted from a spec.
fn holder_params<T>(spec: &PathSetSpec<T>) -> Result<(f64, f64, f64)> {
    match spec {
        PathSetSpec::HolderBall {
            alpha,
            lambda,
            window,
        } => Ok((*alpha, *lambda, *window)),
        other => Err(Error::Unsupported(format!(
            "expected a holder_ball, got {}",
            other.kind()
        ))),
    }
}

fn check_members<T: Scalar>(spec: &PathSetSpec<T>, paths: &[GridPath<T>]) -> Result<()> {
    for (index, p) in paths.iter().enumerate() {
        if !spec.member_path(p)? {
            return Err(Error::NonMember { index });
        }
    }
    Ok(())
}

/// Worst oscillation of a sample of ball members over pairs with `|t-s| ≤ δ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Modulus {
    pub delta: f64,
    pub oscillation: f64,
    /// `lambda * delta^alpha`.
    pub bound: f64,
}

impl Modulus {
    pub fn certified(&self) -> bool {
        self.oscillation <= self.bound
    }
}

/// Uniform modulus of continuity over `sample`, with the Hölder-ball bound
/// `λ δ^α`. Requires `0 < δ < window` so that every pair is constrained.
pub fn equicontinuity_modulus<T: Scalar>(
    spec: &PathSetSpec<T>,
    delta: f64,
    sample: &[GridPath<T>],
) -> Result<Modulus> {
    let (alpha, lambda, window) = holder_params(spec)?;
    spec.validate()?;
    check_range("delta", "(0, window)", delta, delta > 0.0 && delta < window)?;
    check_members(spec, sample)?;
    let mut oscillation = 0.0f64;
    for p in sample {
        let grid = p.grid();
        let gmax = ((delta / grid.spacing()) * (1.0 + 1e-12)).floor() as usize;
        let n = grid.count();
        for g in 1..=gmax.min(n) {
            for i in 0..=n - g {
                let d = (p.value(i + g) - p.value(i)).abs().as_f64();
                oscillation = oscillation.max(d);
            }
        }
    }
    Ok(Modulus {
        delta,
        oscillation,
        bound: lambda * delta.powf(alpha),
    })
}

/// Whether the sup-norm limit of a sequence of Hölder-ball members is itself
/// a member.
///
/// `terms` must share one grid and all be members; `limit` is their
/// coordinatewise limit, and the final term must be at least as close to it
/// as the first one.
pub fn closedness_check<T: Scalar>(
    spec: &PathSetSpec<T>,
    terms: &[GridPath<T>],
    limit: &GridPath<T>,
) -> Result<bool> {
    holder_params(spec)?;
    let first = terms
        .first()
        .ok_or_else(|| Error::Parse("closedness check needs at least one term".into()))?;
    for p in terms {
        if p.grid() != first.grid() || p.grid() != limit.grid() {
            return Err(Error::GridMismatch(format!(
                "{} vs {}",
                p.grid(),
                limit.grid()
            )));
        }
    }
    check_members(spec, terms)?;
    let d_first = first.sup_distance(limit)?;
    let d_last = terms[terms.len() - 1].sup_distance(limit)?;
    if d_last > d_first {
        return Err(Error::Parse(format!(
            "sequence does not approach the limit (first {d_first}, last {d_last})"
        )));
    }
    spec.member_path(limit)
}

/// Deterministic sup bound for members of a Hölder ball on a lattice,
/// obtained by chaining from the origin with the longest admissible steps.
pub fn holder_ball_sup_bound<T>(spec: &PathSetSpec<T>, grid: &DyadicGrid) -> Result<f64> {
    let (alpha, lambda, window) = holder_params(spec)?;
    let g = max_gap(grid.spacing(), window, grid.count());
    if g == 0 {
        return Err(Error::GridMismatch(format!(
            "no admissible pair on {grid} for window {window}"
        )));
    }
    let full_steps = grid.count() / g;
    let rest = grid.count() % g;
    let mut bound = full_steps as f64 * lambda * (g as f64 * grid.spacing()).powf(alpha);
    if rest > 0 {
        bound += lambda * (rest as f64 * grid.spacing()).powf(alpha);
    }
    Ok(bound)
}

/// Sup-ball or tube as `(center values on the grid, radius)`.
fn as_tube<T: Scalar>(spec: &PathSetSpec<T>, grid: &DyadicGrid) -> Result<Option<(Vec<f64>, f64)>> {
    match spec {
        PathSetSpec::SupBall { m } => Ok(Some((vec![0.0; grid.count()], *m))),
        PathSetSpec::Tube { r, .. } => match spec.compile(grid.lattice())? {
            Compiled::Tube { center, .. } => {
                Ok(Some((center.iter().map(|c| c.as_f64()).collect(), *r)))
            }
            _ => unreachable!("tube compiles to a tube"),
        },
        _ => Ok(None),
    }
}

/// Certified lower bound on `‖x - y‖` over grid-level members `x` of `a` and
/// `y` of `b`.
///
/// Tubes and balls use `max_k |c_a(t_k) - c_b(t_k)| - r_a - r_b`. An
/// intersection is at least as far as any of its parts, and is empty (at
/// infinite distance) when two of its parts are separated. A union is as
/// close as its closest part.
pub fn separation<T: Scalar>(a: &PathSetSpec<T>, b: &PathSetSpec<T>, grid: &DyadicGrid) -> Result<f64> {
    if let (Some((ca, ra)), Some((cb, rb))) = (as_tube(a, grid)?, as_tube(b, grid)?) {
        let gap = ca
            .iter()
            .zip(&cb)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        return Ok((gap - ra - rb).max(0.0));
    }
    match (a, b) {
        (PathSetSpec::Intersection { sets }, _) => {
            if is_empty_intersection(sets, grid)? {
                return Ok(f64::INFINITY);
            }
            let mut best = None;
            for s in sets {
                match separation(s, b, grid) {
                    Ok(d) => best = Some(best.map_or(d, |x: f64| x.max(d))),
                    Err(Error::Unsupported(_)) => {}
                    Err(e) => return Err(e),
                }
            }
            best.ok_or_else(|| Error::Unsupported("no separable part in intersection".into()))
        }
        (PathSetSpec::Union { sets }, _) => sets
            .iter()
            .map(|s| separation(s, b, grid))
            .try_fold(f64::INFINITY, |acc, d| d.map(|d| acc.min(d))),
        (_, PathSetSpec::Intersection { .. }) | (_, PathSetSpec::Union { .. }) => {
            separation(b, a, grid)
        }
        _ => Err(Error::Unsupported(format!(
            "separation of {} and {}",
            a.kind(),
            b.kind()
        ))),
    }
}

fn is_empty_intersection<T: Scalar>(sets: &[PathSetSpec<T>], grid: &DyadicGrid) -> Result<bool> {
    for (i, x) in sets.iter().enumerate() {
        for y in &sets[i + 1..] {
            match separation(x, y, grid) {
                Ok(d) if d > 0.0 => return Ok(true),
                Ok(_) | Err(Error::Unsupported(_)) => {}
                Err(e) => return Err(e),
            }
        }
    }
    Ok(false)
}
