//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Tolerances are fixed below and never adapted to results.

use std::f64::consts::PI;
use std::time::Instant;

use wiener_meter::horizon::{holder_metrics, metric_d, metric_d_r, mu_sequence_infty};
use wiener_meter::measure::{
    additivity_check, countable_additivity_check, difference_check, holder_lower_bound,
    monotone_limit_check, psi, sequence_phi, supball_bound, TOLERANCE_SE,
};
use wiener_meter::oracles::{quadrature_orthant, reflection_supball};
use wiener_meter::path_sets::{closedness_check, equicontinuity_modulus};
use wiener_meter::{
    abs_moment, sample_increments, DyadicGrid, GridPath, LongPath, MonteCarlo, NestedFamily, PathSetSpec,
    Sampling, SeedSpec,
};

/// Relative tolerance of the reflection comparison.
const REFLECTION_REL_TOL: f64 = 0.01;
/// Absolute tolerance of the metric triangle inequality.
const TRIANGLE_TOL: f64 = 1e-12;
/// Agreement of `abs_moment` with quadrature.
const MOMENT_TOL: f64 = 1e-10;
/// Runtime target for criterion 1, seconds.
const RUNTIME_TARGET: f64 = 60.0;

fn grid(a: f64, n: u32) -> DyadicGrid {
    DyadicGrid::new(a, n).unwrap()
}

fn seed(s: u64) -> SeedSpec {
    SeedSpec::new(s, 0)
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn monotone_sequence(mc: &MonteCarlo) -> Outcome {
    let start = Instant::now();
    let levels: Vec<u32> = (1..=8).collect();
    let spec = PathSetSpec::<f64>::sup_ball(1.0);
    let crn = sequence_phi(mc, &spec, 1.0, &levels, 1_000_000, seed(1), Sampling::Common).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let ind = sequence_phi(mc, &spec, 1.0, &levels, 1_000_000, seed(2), Sampling::Independent).unwrap();
    let exact = crn.monotonicity.exact == Some(true);
    let stat = ind.monotonicity.consistent;
    let hits: Vec<String> = crn.estimates.iter().map(|e| format!("{:.4}", e.p_hat)).collect();
    outcome(
        exact && stat && elapsed < RUNTIME_TARGET,
        format!(
            "shared: exact={exact} [{}] in {elapsed:.1}s; independent: worst increase {:.2} SE (tol {TOLERANCE_SE})",
            hits.join(", "),
            ind.monotonicity.worst_increase_se
        ),
    )
}

fn supball_lower_bound(mc: &MonteCarlo) -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for m in [1.0, 2.0] {
        let levels: Vec<u32> = (1..=8).collect();
        let seq = sequence_phi(mc, &PathSetSpec::<f64>::sup_ball(m), 1.0, &levels, 200_000, seed(3), Sampling::Common)
            .unwrap();
        for e in &seq.estimates {
            let b = supball_bound(1.0, m, e.level.unwrap()).unwrap();
            ok &= e.p_hat >= b.pre_limit - TOLERANCE_SE * e.se;
        }
        let last = seq.estimates.last().unwrap();
        let limit = (-1.0 / (m * m)).exp();
        ok &= last.p_hat >= limit - TOLERANCE_SE * last.se;
        notes.push(format!("m={m}: level-8 {:.4} vs exp(-1/m^2)={limit:.4}", last.p_hat));
    }
    outcome(ok, notes.join("; "))
}

fn oracle_agreement(mc: &MonteCarlo) -> Outcome {
    let spec = PathSetSpec::<f64>::sup_ball(1.0);
    let e = mc.estimate(&spec, &grid(1.0, 10), 1_000_000, seed(4)).unwrap();
    let series = reflection_supball(1.0, 1.0, 50).unwrap();
    let diff = (e.p_hat - series.value).abs();
    let tol = (REFLECTION_REL_TOL * series.value).max(TOLERANCE_SE * e.se);
    let series_ok = diff <= tol;
    let mut notes = vec![format!(
        "level 10 {:.5} vs series {:.5}: |diff|={diff:.5}, tol={tol:.5}",
        e.p_hat, series.value
    )];
    let mut quad_ok = true;
    for n in 1..=2 {
        let g = grid(1.0, n);
        let q = quadrature_orthant(&g, 1.0).unwrap();
        let e = mc.estimate(&spec, &g, 1_000_000, seed(40 + u64::from(n))).unwrap();
        let d = (e.p_hat - q.value).abs() / e.se;
        quad_ok &= d <= TOLERANCE_SE;
        notes.push(format!("n={n}: {:.5} vs quadrature {:.6} ({d:.2} SE)", e.p_hat, q.value));
    }
    outcome(series_ok && quad_ok, notes.join("; "))
}

/// `E|ξ|^p` by composite Gauss–Legendre after `x = u^4`.
fn moment_by_quadrature(p: f64) -> f64 {
    let x = [-0.906_179_845_938_664, -0.538_469_310_105_683_1, 0.0, 0.538_469_310_105_683_1, 0.906_179_845_938_664];
    let w = [0.236_926_885_056_189_1, 0.478_628_670_499_366_5, 0.568_888_888_888_888_9, 0.478_628_670_499_366_5, 0.236_926_885_056_189_1];
    let f = |u: f64| 4.0 * u.powf(4.0 * p + 3.0) * (-0.5 * u.powi(8)).exp() / (2.0 * PI).sqrt();
    let (hi, panels) = (60f64.powf(0.25), 4000);
    let h = hi / panels as f64;
    2.0 * (0..panels)
        .map(|i| {
            let c = (i as f64 + 0.5) * h;
            x.iter().zip(w).map(|(x, w)| w * f(c + 0.5 * h * x)).sum::<f64>() * 0.5 * h
        })
        .sum::<f64>()
}

fn holder_bound(mc: &MonteCarlo) -> Outcome {
    let alpha = 0.25;
    let p = 2.0 / (1.0 - 2.0 * alpha);
    let moment_err = (abs_moment(p).unwrap() - moment_by_quadrature(p)).abs();
    let mut ok = moment_err <= MOMENT_TOL;
    let mut notes = vec![format!("|abs_moment(4) - quadrature| = {moment_err:.1e}")];
    for lambda in [5.0, 10.0] {
        let e = mc
            .estimate(&PathSetSpec::<f64>::holder_ball(alpha, lambda), &grid(1.0, 8), 100_000, seed(5))
            .unwrap();
        let bound = (-psi(alpha, 1.0, lambda).unwrap()).exp();
        let pre = holder_lower_bound(alpha, 1.0, lambda, 8).unwrap().pre_limit;
        ok &= e.p_hat >= bound - TOLERANCE_SE * e.se && e.p_hat >= pre - TOLERANCE_SE * e.se;
        notes.push(format!("lambda={lambda}: {:.5} vs exp(-psi)={bound:.5}", e.p_hat));
    }
    outcome(ok, notes.join("; "))
}

fn additivity(mc: &MonteCarlo) -> Outcome {
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for n in 1..=6 {
        let g = grid(1.0, n);
        let a = PathSetSpec::tube(GridPath::zero(g), 1.0);
        let b = PathSetSpec::tube(GridPath::from_fn(g, |t| 4.0 * t), 1.0);
        let r = additivity_check(mc, &a, &b, &g, 100_000, seed(6), Sampling::Common).unwrap();
        ok &= r.passed && r.exact_identity == Some(true);
        worst = worst.max(r.discrepancy_se);
    }
    outcome(ok, format!("n=1..6: exact identity on shared samples, worst {worst:.2} SE"))
}

fn difference_and_partition(mc: &MonteCarlo) -> Outcome {
    let g = grid(1.0, 4);
    let d = difference_check(mc, 1.0, 2.0, &g, 1_000_000, seed(7), Sampling::Common).unwrap();
    let p = countable_additivity_check(mc, &[0.5, 1.0, 1.5, 2.0], &g, 1_000_000, seed(8), Sampling::Common).unwrap();
    outcome(
        d.passed && p.passed,
        format!(
            "difference {:.2} SE, 4-annulus partition {:.2} SE (tol {TOLERANCE_SE})",
            d.discrepancy_se, p.discrepancy_se
        ),
    )
}

fn monotone_limits(mc: &MonteCarlo) -> Outcome {
    let g = grid(1.0, 4);
    let down = NestedFamily::SupBalls {
        radii: (1..=20).map(|j| 1.0 + 2f64.powi(-j)).collect(),
        limit: 1.0,
    };
    let up = NestedFamily::SupBalls {
        radii: (1..=20).map(|j| 1.0 - 2f64.powi(-j)).collect(),
        limit: 1.0,
    };
    let rd = monotone_limit_check(mc, &down, &g, 200_000, seed(9), Sampling::Common).unwrap();
    let ru = monotone_limit_check(mc, &up, &g, 200_000, seed(10), Sampling::Common).unwrap();
    outcome(
        rd.passed && ru.passed,
        format!(
            "decreasing: last-vs-limit {:.2} SE, exact={:?}; increasing: {:.2} SE, exact={:?}",
            rd.discrepancy_se, rd.exact_identity, ru.discrepancy_se, ru.exact_identity
        ),
    )
}

fn infinite_horizon(mc: &MonteCarlo) -> Outcome {
    let hs = mu_sequence_infty(mc, 0.25, 4.0, &[1, 2, 3, 4, 5, 6], 5, 100_000, seed(11), Sampling::Common).unwrap();
    let at = &hs.sequence.estimates[3];
    outcome(
        hs.passed() && hs.bounds.len() == 2,
        format!(
            "mu_r nonincreasing exact={:?}; r=4: {:.4} vs exp(-1/4)={:.4}",
            hs.sequence.monotonicity.exact,
            at.p_hat,
            (-0.25f64).exp()
        ),
    )
}

fn metric_suite() -> Outcome {
    const PAIRS: u64 = 1000;
    const R: usize = 8;
    const TRUNC: usize = 4;
    let paths: Vec<LongPath> = (0..=PAIRS)
        .map(|i| LongPath::sample(R, 4, SeedSpec::new(12, i)).unwrap())
        .collect();
    let (mut sym, mut tri, mut mono, mut tail) = (0, 0, 0, 0);
    let (mut d_star, mut star_alpha, mut alpha_two, mut d_alpha) = (0, 0, 0, 0);
    for i in 0..PAIRS as usize {
        let (x, y) = (&paths[i], &paths[i + 1]);
        let z = &paths[(i + 2) % paths.len()];
        let dxy = metric_d(x, y, R).unwrap();
        sym += (dxy.value != metric_d(y, x, R).unwrap().value) as u32;
        let hm = holder_metrics(x, y, 0.25, R).unwrap();
        let hyx = holder_metrics(y, x, 0.25, R).unwrap();
        sym += (hm.d_alpha.value != hyx.d_alpha.value || hm.d_alpha_star.value != hyx.d_alpha_star.value) as u32;
        let dxz = metric_d(x, z, R).unwrap().value;
        let dyz = metric_d(y, z, R).unwrap().value;
        tri += (dxz > dxy.value + dyz + TRIANGLE_TOL) as u32;
        let mut prev = 0.0;
        for r in 1..=R {
            let v = metric_d_r(x, y, r).unwrap().value;
            mono += (v < prev) as u32;
            prev = v;
        }
        let short = metric_d(x, y, TRUNC).unwrap();
        tail += (dxy.value - short.value > short.tail_bound) as u32;
        d_star += !hm.sandwich.d_le_star as u32;
        star_alpha += !hm.sandwich.star_le_alpha as u32;
        alpha_two += !hm.sandwich.alpha_le_two_star as u32;
        d_alpha += !hm.sandwich.d_le_alpha as u32;
    }
    let structural = sym + tri + mono + tail;
    let sandwich = d_star + star_alpha + alpha_two + d_alpha;
    outcome(
        structural == 0 && sandwich == 0,
        format!(
            "{PAIRS} pairs; violations: symmetry {sym}, triangle {tri}, d_r monotone {mono}, tail {tail}; \
             sandwich d<=d* {d_star}, d*<=d_a {star_alpha}, d_a<=2d* {alpha_two}, d<=d_a {d_alpha}"
        ),
    )
}

fn appendix_diagnostics() -> Outcome {
    let (alpha, lambda) = (0.25, 3.0);
    let spec = PathSetSpec::<f64>::holder_ball(alpha, lambda);
    let g = grid(1.0, 7);
    let members: Vec<GridPath> = (0..4000)
        .map(|i| sample_increments::<f64>(&g, SeedSpec::new(13, i)).cumulate())
        .filter(|p| spec.member_path(p).unwrap())
        .collect();
    let mut modulus_ok = !members.is_empty();
    for k in 1..g.count() {
        let delta = k as f64 * g.spacing();
        let m = equicontinuity_modulus(&spec, delta, &members).unwrap();
        modulus_ok &= m.certified();
    }
    let mut closed = 0;
    let sequences = 1000;
    for i in 0..sequences {
        let x = &members[i % members.len()];
        let len = 2 + i % 7;
        let rate = 0.3 + 0.4 * ((i * 7919) % 100) as f64 / 100.0;
        let terms: Vec<GridPath> = (1..=len).map(|k| x.scale(1.0 - rate.powi(k as i32))).collect();
        closed += closedness_check(&spec, &terms, x).unwrap() as usize;
    }
    outcome(
        modulus_ok && closed == sequences,
        format!(
            "{} sampled members, modulus certified at all {} grid deltas: {modulus_ok}; closedness {closed}/{sequences}",
            members.len(),
            g.count() - 1
        ),
    )
}

fn main() {
    let mc = MonteCarlo::new();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("monotone sequence", Box::new(move || monotone_sequence(&mc))),
        ("sup-ball lower bound", Box::new(move || supball_lower_bound(&mc))),
        ("oracle agreement", Box::new(move || oracle_agreement(&mc))),
        ("Hölder-ball bound", Box::new(move || holder_bound(&mc))),
        ("additivity", Box::new(move || additivity(&mc))),
        ("difference and partition", Box::new(move || difference_and_partition(&mc))),
        ("monotone limits", Box::new(move || monotone_limits(&mc))),
        ("infinite horizon", Box::new(move || infinite_horizon(&mc))),
        ("metric suite", Box::new(metric_suite)),
        ("appendix diagnostics", Box::new(appendix_diagnostics)),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = i + 1;
        if !filter.is_empty() && !filter.iter().any(|f| f == &id.to_string()) {
            continue;
        }
        let o = run();
        failed += usize::from(!o.pass);
        println!("criterion {id:>2} [{name}]: {} — {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
