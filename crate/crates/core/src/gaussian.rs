//! Standard normal machinery: seeded streams, sampling, CDF, absolute
//! moments and the moment (Chebyshev-type) tail bound.
//!
//! Sampling uses Marsaglia's polar method on a ChaCha8 stream. A stream is
//! keyed by `(seed, stream)` and split into independent sub-streams by chunk
//! index, so Monte Carlo results never depend on how chunks are scheduled.
//! The generator is gated by a Kolmogorov–Smirnov test at `10^6` draws and
//! level `1e-3` (see the tests below).

use std::f64::consts::{PI, SQRT_2};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dyadic::{DyadicGrid, IncrementVector};
use crate::error::{check_range, Result};
use crate::scalar::Scalar;

/// Centered normal law with the given variance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalLaw {
    variance: f64,
}

impl NormalLaw {
    pub fn new(variance: f64) -> Result<Self> {
        check_range(
            "variance",
            "(0, inf)",
            variance,
            variance.is_finite() && variance > 0.0,
        )?;
        Ok(Self { variance })
    }

    /// Law of one increment on `grid`: variance `a / 2^n`.
    pub fn increment(grid: &DyadicGrid) -> Self {
        Self {
            variance: grid.spacing(),
        }
    }

    #[inline]
    pub fn variance(&self) -> f64 {
        self.variance
    }

    #[inline]
    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        normal_cdf(x / self.std_dev())
    }
}

/// Master seed plus stream index. Equal specs reproduce identical draws.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub seed: u64,
    #[serde(default)]
    pub stream: u64,
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl SeedSpec {
    pub const fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// A child stream for an independent sub-experiment labelled `tag`.
    pub fn substream(&self, tag: u64) -> Self {
        Self {
            seed: self.seed,
            stream: splitmix64(self.stream ^ splitmix64(tag.wrapping_add(0x5151_5151))),
        }
    }

    fn key(&self) -> [u8; 32] {
        let mut key = [0u8; 32];
        let s = splitmix64(self.stream ^ 0x6a09_e667_f3bc_c908);
        for (i, word) in key.chunks_exact_mut(8).enumerate() {
            let w = splitmix64(self.seed.wrapping_add(i as u64)) ^ splitmix64(s.wrapping_add(i as u64));
            word.copy_from_slice(&w.to_le_bytes());
        }
        key
    }

    /// Generator for Monte Carlo chunk `chunk`; distinct chunks use disjoint
    /// ChaCha streams under the same key.
    pub fn chunk_rng(&self, chunk: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key());
        rng.set_stream(chunk);
        rng
    }

    pub fn normals(&self, chunk: u64) -> PolarNormal<ChaCha8Rng> {
        PolarNormal::new(self.chunk_rng(chunk))
    }
}

/// Marsaglia polar sampler. Draws come in pairs; the spare is kept per
/// instance.
#[derive(Clone, Debug)]
pub struct PolarNormal<R> {
    rng: R,
    spare: Option<f64>,
}

impl<R: RngCore> PolarNormal<R> {
    pub fn new(rng: R) -> Self {
        Self { rng, spare: None }
    }

    #[inline]
    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.rng.random::<f64>() - 1.0;
            let v = 2.0 * self.rng.random::<f64>() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let f = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * f);
                return u * f;
            }
        }
    }

    pub fn fill(&mut self, out: &mut [f64]) {
        for z in out {
            *z = self.next_normal();
        }
    }
}

/// `2^n` i.i.d. `N(0, a/2^n)` increments, deterministic in `seed`.
pub fn sample_increments<T: Scalar>(grid: &DyadicGrid, seed: SeedSpec) -> IncrementVector<T> {
    let sd = NormalLaw::increment(grid).std_dev();
    let mut normals = seed.normals(0);
    let increments = (0..grid.count())
        .map(|_| T::of(sd * normals.next_normal()))
        .collect();
    IncrementVector::new(*grid, increments).expect("length matches grid")
}

/// Standard normal CDF, `erfc(-x / sqrt 2) / 2`.
///
/// `erfc` is the fdlibm rational approximation (error below 1 ulp), which
/// keeps the absolute error of `Φ` under `1e-16` on the whole line.
#[inline]
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// `P(|ξ| ≤ x)` for a standard normal `ξ`; zero for `x ≤ 0`.
#[inline]
pub fn two_sided_probability(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        libm::erf(x / SQRT_2)
    }
}

/// `E|ξ|^p = 2^{p/2} Γ((p+1)/2) / sqrt(π)`.
pub fn abs_moment(p: f64) -> Result<f64> {
    check_range("p", "(0, inf)", p, p.is_finite() && p > 0.0)?;
    let half = 0.5 * (p + 1.0);
    if p.fract() == 0.0 && p <= 150.0 {
        // exact products: (p-1)!! for even p, sqrt(2/π) 2^k k! for p = 2k+1
        let k = p as u32;
        let prod = |from: u32| (from..k).step_by(2).fold(1.0, |acc, j| acc * j as f64);
        if k % 2 == 0 {
            Ok(prod(1))
        } else {
            Ok((2.0 / PI).sqrt() * prod(2))
        }
    } else if p < 150.0 {
        Ok(2f64.powf(0.5 * p) * libm::tgamma(half) / PI.sqrt())
    } else {
        Ok((0.5 * p * std::f64::consts::LN_2 + libm::lgamma(half) - 0.5 * PI.ln()).exp())
    }
}

/// `min(1, E|ξ|^p / x^p)`, an upper bound on `P(|ξ| > x)`.
pub fn chebyshev_tail(x: f64, p: f64) -> Result<f64> {
    check_range("x", "(0, inf]", x, x > 0.0)?;
    let m = abs_moment(p)?;
    Ok((m / x.powf(p)).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite Gauss–Legendre (5 nodes) on `[lo, hi]` with `panels` panels.
    fn gl5(f: impl Fn(f64) -> f64, lo: f64, hi: f64, panels: usize) -> f64 {
        const X: [f64; 5] = [
            0.0,
            -0.538_469_310_105_683_1,
            0.538_469_310_105_683_1,
            -0.906_179_845_938_664,
            0.906_179_845_938_664,
        ];
        const W: [f64; 5] = [
            0.568_888_888_888_888_9,
            0.478_628_670_499_366_5,
            0.478_628_670_499_366_5,
            0.236_926_885_056_189_1,
            0.236_926_885_056_189_1,
        ];
        let h = (hi - lo) / panels as f64;
        (0..panels)
            .map(|i| {
                let c = lo + (i as f64 + 0.5) * h;
                X.iter()
                    .zip(W)
                    .map(|(x, w)| w * f(c + 0.5 * h * x))
                    .sum::<f64>()
                    * 0.5
                    * h
            })
            .sum()
    }

    fn density(x: f64) -> f64 {
        (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
    }

    fn quad_moment(p: f64) -> f64 {
        // |x|^p φ(x) on [0, 60] after x = u^4, which smooths the cusp at 0
        let f = |u: f64| 4.0 * u.powf(4.0 * p + 3.0) * density(u.powi(4));
        2.0 * gl5(f, 0.0, 60f64.powf(0.25), 4000)
    }

    #[test]
    fn cdf_examples() {
        assert_eq!(normal_cdf(0.0), 0.5);
        let q = 1.959_963_985;
        let oracle = 2.0 * gl5(density, 0.0, q, 200);
        assert!((oracle - 0.95).abs() < 1e-8);
        assert!((two_sided_probability(q) - oracle).abs() < 1e-13);
        assert!((normal_cdf(q) - normal_cdf(-q) - oracle).abs() < 1e-13);
        for x in [0.1, 0.7, 1.5, 3.0, 6.0, 9.0] {
            assert!((normal_cdf(x) + normal_cdf(-x) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn cdf_against_quadrature() {
        for x in [-8.0, -3.3, -1.0, -0.2, 0.4, 1.7, 4.5] {
            let lo = -40.0;
            let oracle = gl5(density, lo, x, 4000);
            assert!((normal_cdf(x) - oracle).abs() < 1e-14, "x={x}");
        }
    }

    #[test]
    fn abs_moment_examples() {
        assert!((abs_moment(2.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((abs_moment(1.0).unwrap() - 0.797_884_560_8).abs() < 1e-10);
        assert!((abs_moment(1.0).unwrap() - quad_moment(1.0)).abs() < 1e-12);
        assert!((abs_moment(4.0).unwrap() - 3.0).abs() < 1e-12);
        assert!((quad_moment(4.0) - 3.0).abs() < 1e-12);
        assert!(abs_moment(0.0).is_err());
        assert!(abs_moment(-1.0).is_err());
    }

    #[test]
    fn abs_moment_matches_quadrature_on_range() {
        let mut p = 0.5;
        while p <= 12.0 {
            let exact = abs_moment(p).unwrap();
            let q = quad_moment(p);
            assert!((exact - q).abs() < 1e-10, "p={p}: {exact} vs {q}");
            p += 0.25;
        }
        // the large-p branch agrees with the Gamma-function branch
        let a = 2f64.powf(74.5) * libm::tgamma(75.0) / PI.sqrt();
        let b = abs_moment(149.0).unwrap();
        assert!(((a - b) / a).abs() < 1e-12);
        assert!(abs_moment(151.0).unwrap().is_finite());
    }

    #[test]
    fn chebyshev_examples() {
        assert_eq!(chebyshev_tail(2.0, 2.0).unwrap(), 0.25);
        let true_tail = 2.0 * normal_cdf(-2.0);
        assert!((true_tail - 0.0455).abs() < 1e-4);
        assert!(true_tail <= 0.25);
        assert_eq!(chebyshev_tail(1.0, 2.0).unwrap(), 1.0);
        assert!(chebyshev_tail(1e8, 2.0).unwrap() < 1e-15);
        assert!(chebyshev_tail(0.0, 2.0).is_err());
    }

    #[test]
    fn chebyshev_dominates_tail() {
        let mut ps = vec![1.0, 2.0, 4.0];
        ps.extend([0.1, 0.25, 0.4].map(|a: f64| 2.0 / (1.0 - 2.0 * a)));
        for p in ps {
            for i in 0..=60 {
                let x = 0.1 * 100f64.powf(i as f64 / 60.0);
                let bound = chebyshev_tail(x, p).unwrap();
                assert!(bound >= 2.0 * (1.0 - normal_cdf(x)), "x={x} p={p}");
            }
        }
    }

    #[test]
    fn seeds_are_deterministic_and_streams_differ() {
        let g = DyadicGrid::new(1.0, 4).unwrap();
        let s = SeedSpec::new(42, 3);
        let a: IncrementVector<f64> = sample_increments(&g, s);
        assert_eq!(a, sample_increments(&g, s));
        let b: IncrementVector<f64> = sample_increments(&g, SeedSpec::new(42, 4));
        assert_ne!(a, b);
        let c: IncrementVector<f64> = sample_increments(&g, SeedSpec::new(43, 3));
        assert_ne!(a, c);
        let mut x = s.normals(0);
        let mut y = s.normals(1);
        assert_ne!(x.next_normal(), y.next_normal());
    }

    #[test]
    fn increment_moments() {
        let g = DyadicGrid::new(1.0, 3).unwrap();
        let reps = 1_000_000u64;
        let mut sum = [0.0f64; 8];
        let mut sq = 0.0;
        let base = SeedSpec::new(7, 0);
        for r in 0..reps {
            let v: IncrementVector<f64> = sample_increments(&g, SeedSpec::new(base.seed, r));
            for (s, x) in sum.iter_mut().zip(v.increments()) {
                *s += x;
            }
            sq += v.increments()[0] * v.increments()[0];
        }
        let tol = 4.0 * g.spacing().sqrt() / 1e3;
        for s in sum {
            assert!((s / reps as f64).abs() < tol);
        }
        let mean0 = sum[0] / reps as f64;
        let var = sq / reps as f64 - mean0 * mean0;
        assert!((var - 0.125).abs() < 0.01 * 0.125, "var={var}");
    }

    #[test]
    fn polar_sampler_passes_ks() {
        let n = 1_000_000;
        let mut z = vec![0.0; n];
        SeedSpec::new(2024, 0).normals(0).fill(&mut z);
        z.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let d = z
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let f = normal_cdf(*x);
                (f - i as f64 / n as f64).max((i + 1) as f64 / n as f64 - f)
            })
            .fold(0.0, f64::max);
        // Kolmogorov critical value at level 1e-3
        let crit = (-0.5 * (0.5e-3f64).ln()).sqrt() / (n as f64).sqrt();
        assert!(d < crit, "D={d} crit={crit}");
    }
}
