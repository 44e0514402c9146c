//! Dyadic time grids, grid paths and their increment coordinates.
//!
//! A [`GridPath`] stores `x(t_1), ..., x(t_{2^n})` for `t_k = a k / 2^n`;
//! `x(0) = 0` is implicit. [`GridPath::project`] maps it to the vector of
//! successive increments and [`IncrementVector::cumulate`] maps back. The two
//! coordinate systems are related by an invertible linear map, so either can
//! be used to describe the grid image of a path set.

use std::fmt;

use num_traits::Num;
use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};
use crate::scalar::Scalar;

/// Largest supported level. A level-30 path already holds 2^30 values.
pub const MAX_LEVEL: u32 = 30;

/// The grid `{a k / 2^n : k = 0..2^n}` on `[0, a]`.
///
/// Time points are kept as `(k, n, a)` and only turned into floats on demand.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DyadicGrid {
    horizon: f64,
    level: u32,
}

impl DyadicGrid {
    pub fn new(horizon: f64, level: u32) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidHorizon(horizon));
        }
        if level == 0 || level > MAX_LEVEL {
            return Err(Error::InvalidLevel {
                got: level,
                max: MAX_LEVEL,
            });
        }
        Ok(Self { horizon, level })
    }

    #[inline]
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    #[inline]
    pub fn level(&self) -> u32 {
        self.level
    }

    /// Number of grid points after the origin, `2^n`.
    #[inline]
    pub fn count(&self) -> usize {
        1usize << self.level
    }

    /// `a / 2^n`. Division by a power of two is exact in binary floating point.
    #[inline]
    pub fn spacing(&self) -> f64 {
        self.horizon / self.count() as f64
    }

    /// `t_k = a k / 2^n` for `k` in `0..=2^n`.
    #[inline]
    pub fn time(&self, k: usize) -> f64 {
        self.horizon * (k as f64 / self.count() as f64)
    }

    /// The points `t_1, ..., t_{2^n}`.
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (1..=self.count()).map(move |k| self.time(k))
    }

    /// Same horizon at another level.
    pub fn at_level(&self, level: u32) -> Result<Self> {
        Self::new(self.horizon, level)
    }

    /// Index on this grid of point `k` of the coarser grid at `coarse_level`.
    pub fn embed_index(&self, coarse_level: u32, k: usize) -> Option<usize> {
        (coarse_level <= self.level).then(|| k << (self.level - coarse_level))
    }

    pub(crate) fn lattice(&self) -> Lattice {
        Lattice {
            spacing: self.spacing(),
            count: self.count(),
        }
    }
}

impl fmt::Display for DyadicGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a={} n={}", self.horizon, self.level)
    }
}

/// Equally spaced points `k h`, `k = 1..=count`, with the origin implicit.
///
/// Dyadic grids and the unit-refined grids of long paths both reduce to this.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Lattice {
    pub spacing: f64,
    pub count: usize,
}

impl Lattice {
    #[inline]
    pub fn time(&self, k: usize) -> f64 {
        self.spacing * k as f64
    }

    #[inline]
    pub fn horizon(&self) -> f64 {
        self.time(self.count)
    }
}

/// `n` as an element of `T`, built by doubling so it stays exact for any ring.
fn ring_count<T: Num + Clone>(mut n: u64) -> T {
    let mut acc = T::zero();
    let mut pow = T::one();
    while n > 0 {
        if n & 1 == 1 {
            acc = acc + pow.clone();
        }
        pow = pow.clone() + pow;
        n >>= 1;
    }
    acc
}

/// Values of a path at the points of a dyadic grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridPath<T = f64> {
    grid: DyadicGrid,
    levels: Vec<T>,
}

impl<T> GridPath<T> {
    pub fn new(grid: DyadicGrid, levels: Vec<T>) -> Result<Self> {
        if levels.len() != grid.count() {
            return Err(Error::LengthMismatch {
                expected: grid.count(),
                got: levels.len(),
            });
        }
        Ok(Self { grid, levels })
    }

    #[inline]
    pub fn grid(&self) -> &DyadicGrid {
        &self.grid
    }

    /// `x(t_1), ..., x(t_{2^n})`; index `k - 1` holds `x(t_k)`.
    #[inline]
    pub fn levels(&self) -> &[T] {
        &self.levels
    }

    pub fn into_levels(self) -> Vec<T> {
        self.levels
    }
}

impl<T: Num + Clone> GridPath<T> {
    /// The identically zero path.
    pub fn zero(grid: DyadicGrid) -> Self {
        Self {
            grid,
            levels: vec![T::zero(); grid.count()],
        }
    }

    /// `x(t_k)` for `k` in `0..=2^n`, with `x(t_0) = 0`.
    pub fn value(&self, k: usize) -> T {
        if k == 0 {
            T::zero()
        } else {
            self.levels[k - 1].clone()
        }
    }

    /// Successive increments `x(t_k) - x(t_{k-1})`.
    pub fn project(&self) -> IncrementVector<T> {
        let mut prev = T::zero();
        let increments = self
            .levels
            .iter()
            .map(|x| {
                let d = x.clone() - prev.clone();
                prev = x.clone();
                d
            })
            .collect();
        IncrementVector {
            grid: self.grid,
            increments,
        }
    }

    /// Piecewise-linear interpolation onto a finer dyadic grid.
    pub fn refine(&self, to_level: u32) -> Result<Self> {
        let from = self.grid.level;
        if to_level < from {
            return Err(Error::CannotCoarsen { from, to: to_level });
        }
        let grid = self.grid.at_level(to_level)?;
        let ratio = 1usize << (to_level - from);
        let denom: T = ring_count(ratio as u64);
        let mut levels = Vec::with_capacity(grid.count());
        for j in 1..=grid.count() {
            let (q, r) = (j / ratio, j % ratio);
            let left = self.value(q);
            if r == 0 {
                levels.push(left);
            } else {
                let right = self.value(q + 1);
                let w = ring_count::<T>(r as u64) / denom.clone();
                levels.push(left.clone() + (right - left) * w);
            }
        }
        Ok(Self { grid, levels })
    }

    /// Subsampling onto a coarser dyadic grid.
    pub fn restrict(&self, to_level: u32) -> Result<Self> {
        let from = self.grid.level;
        if to_level > from {
            return Err(Error::CannotRefine { from, to: to_level });
        }
        let grid = self.grid.at_level(to_level)?;
        let stride = 1usize << (from - to_level);
        let levels = (1..=grid.count())
            .map(|k| self.levels[k * stride - 1].clone())
            .collect();
        Ok(Self { grid, levels })
    }

    /// Pointwise map, keeping the grid.
    pub fn map<U, F: FnMut(&T) -> U>(&self, f: F) -> GridPath<U> {
        GridPath {
            grid: self.grid,
            levels: self.levels.iter().map(f).collect(),
        }
    }
}

impl<T: Scalar> GridPath<T> {
    /// Samples `f` at the grid points; `f(0)` is ignored.
    pub fn from_fn<F: FnMut(f64) -> T>(grid: DyadicGrid, mut f: F) -> Self {
        Self {
            grid,
            levels: grid.times().map(&mut f).collect(),
        }
    }

    /// Piecewise-linear value at time `t` in `[0, a]`.
    pub fn interpolate(&self, t: f64) -> Result<T> {
        let a = self.grid.horizon;
        check_range("t", "[0, horizon]", t, (0.0..=a).contains(&t))?;
        let pos = t / self.grid.spacing();
        let q = (pos.floor() as usize).min(self.grid.count());
        let frac = pos - q as f64;
        let left = self.value(q);
        if frac <= 0.0 || q == self.grid.count() {
            return Ok(left);
        }
        let right = self.value(q + 1);
        Ok(left + (right - left) * T::of(frac))
    }

    /// `max_k |x(t_k)|`.
    pub fn sup_norm(&self) -> T {
        self.levels
            .iter()
            .fold(T::zero(), |acc, x| acc.max(x.abs()))
    }

    /// `max_k |x(t_k) - y(t_k)|` for paths on the same grid.
    pub fn sup_distance(&self, other: &Self) -> Result<T> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!(
                "{} vs {}",
                self.grid, other.grid
            )));
        }
        Ok(self
            .levels
            .iter()
            .zip(&other.levels)
            .fold(T::zero(), |acc, (x, y)| acc.max((*x - *y).abs())))
    }

    pub fn scale(&self, c: T) -> Self {
        self.map(|x| *x * c)
    }

    /// Rows `t,x` for `k = 0..=2^n`, using shortest round-trip formatting.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["t", "x"]).expect("in-memory write");
        for k in 0..=self.grid.count() {
            w.write_record([self.grid.time(k).to_string(), self.value(k).to_string()])
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
    }

    /// Parses the output of [`GridPath::to_csv`]. The horizon is the last time
    /// and the level follows from the row count.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
            if rec.len() != 2 {
                return Err(Error::Parse(format!("expected 2 columns, got {}", rec.len())));
            }
            let t: f64 = rec[0]
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad time `{}`", &rec[0])))?;
            let x = T::from_str_radix(rec[1].trim(), 10)
                .map_err(|_| Error::Parse(format!("bad value `{}`", &rec[1])))?;
            rows.push((t, x));
        }
        let points = rows.len().saturating_sub(1);
        if points < 2 || !points.is_power_of_two() {
            return Err(Error::Parse(format!(
                "expected 2^n + 1 rows with n >= 1, got {}",
                rows.len()
            )));
        }
        let grid = DyadicGrid::new(rows[points].0, points.trailing_zeros())?;
        if rows[0].0 != 0.0 || rows[0].1 != T::zero() {
            return Err(Error::Parse("first row must be the origin `0,0`".into()));
        }
        for (k, (t, _)) in rows.iter().enumerate() {
            if *t != grid.time(k) {
                return Err(Error::Parse(format!(
                    "row {k}: time {t} is not the grid point {}",
                    grid.time(k)
                )));
            }
        }
        Self::new(grid, rows.into_iter().skip(1).map(|(_, x)| x).collect())
    }
}

/// Successive increments of a path over a dyadic grid.
#[derive(Clone, Debug, PartialEq)]
pub struct IncrementVector<T = f64> {
    grid: DyadicGrid,
    increments: Vec<T>,
}

impl<T> IncrementVector<T> {
    pub fn new(grid: DyadicGrid, increments: Vec<T>) -> Result<Self> {
        if increments.len() != grid.count() {
            return Err(Error::LengthMismatch {
                expected: grid.count(),
                got: increments.len(),
            });
        }
        Ok(Self { grid, increments })
    }

    #[inline]
    pub fn grid(&self) -> &DyadicGrid {
        &self.grid
    }

    #[inline]
    pub fn increments(&self) -> &[T] {
        &self.increments
    }
}

impl<T: Num + Clone> IncrementVector<T> {
    /// Partial sums, i.e. the path values at the grid points.
    pub fn cumulate(&self) -> GridPath<T> {
        let mut acc = T::zero();
        let levels = self
            .increments
            .iter()
            .map(|d| {
                acc = acc.clone() + d.clone();
                acc.clone()
            })
            .collect();
        GridPath {
            grid: self.grid,
            levels,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct GridPathRecord<T> {
    a: f64,
    n: u32,
    levels: Vec<T>,
}

impl<T: Serialize + Clone> Serialize for GridPath<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GridPathRecord {
            a: self.grid.horizon,
            n: self.grid.level,
            levels: self.levels.clone(),
        }
        .serialize(s)
    }
}

impl<'de, T: Deserialize<'de>> Deserialize<'de> for GridPath<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rec = GridPathRecord::<T>::deserialize(d)?;
        let grid = DyadicGrid::new(rec.a, rec.n).map_err(serde::de::Error::custom)?;
        GridPath::new(grid, rec.levels).map_err(serde::de::Error::custom)
    }
}
