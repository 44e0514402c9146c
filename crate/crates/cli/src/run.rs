use serde_json::{json, Map, Value};
use wiener_meter::horizon::mu_sequence_infty;
use wiener_meter::measure::{
    additivity_check, countable_additivity_check, difference_check, holder_lower_bound,
    monotone_limit_check, sequence_phi, supball_bound, CheckReport, MIN_SAMPLES, TOLERANCE_SE,
};
use wiener_meter::oracles::{quadrature_orthant, random_walk_supball, reflection_supball};
use wiener_meter::report::{estimates_csv, table_csv, EstimateReport, Verdict};
use wiener_meter::{BoundCheck, DyadicGrid, EstimateResult, MeasureSequence, MonteCarlo, PathSetSpec};

use crate::config::{
    parse, split, AdditivityCheck, Common, DifferenceCheck, InfinityCheck, LimitCheck,
    OracleCheck, PartitionCheck, SequenceCheck, SweepConfig, CHECKS,
};
use crate::Outcome;

fn lib<T>(r: wiener_meter::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn grid(horizon: f64, n: u32) -> Result<DyadicGrid, String> {
    lib(DyadicGrid::new(horizon, n))
}

/// Analytic bounds that apply to `spec` at the estimate's level.
fn bound_checks(spec: &PathSetSpec, horizon: f64, est: &EstimateResult) -> Result<Vec<BoundCheck>, String> {
    let Some(n) = est.level else { return Ok(vec![]) };
    Ok(match spec {
        PathSetSpec::SupBall { m } if *m > 0.0 => lib(supball_bound(horizon, *m, n))?.check(est),
        PathSetSpec::HolderBall { alpha, lambda, window } if *lambda > 0.0 && *window == 1.0 => {
            lib(holder_lower_bound(*alpha, horizon, *lambda, n))?.check(est)
        }
        _ => vec![],
    })
}

fn sequence(mc: &MonteCarlo, common: &Common, cfg: &SequenceCheck) -> Result<MeasureSequence, String> {
    lib(sequence_phi(
        mc,
        &cfg.spec,
        cfg.horizon,
        &cfg.levels()?,
        common.samples()?,
        common.seed,
        common.sampling,
    ))
}

fn sequence_reports(spec: &PathSetSpec, horizon: f64, seq: &MeasureSequence) -> Result<Vec<EstimateReport>, String> {
    let spec_json = to_value(spec);
    seq.estimates
        .iter()
        .map(|e| {
            let mut r = EstimateReport::new(spec_json.clone(), e);
            r.bounds = bound_checks(spec, horizon, e)?;
            Ok(r)
        })
        .collect()
}

fn monotone_verdict(seq: &MeasureSequence) -> Verdict {
    let m = seq.monotonicity;
    Verdict::new(
        "monotone",
        m.consistent && m.exact != Some(false),
        m.worst_increase_se,
        TOLERANCE_SE,
    )
    .with_detail(match m.exact {
        Some(true) => "hit counts nonincreasing (shared samples)",
        Some(false) => "hit counts increase under shared samples",
        None => "independent samples: statistical verdict only",
    })
}

fn sequence_results(seq: &MeasureSequence, reports: Vec<EstimateReport>) -> Value {
    json!({
        "sampling": seq.sampling,
        "estimates": reports,
        "monotonicity": seq.monotonicity,
        "limit": seq.limit,
        "trend_slope": seq.trend_slope,
    })
}

pub fn estimate(mc: &MonteCarlo, config: &Value) -> Result<Outcome, String> {
    let (common, rest) = split(config)?;
    let cfg: SequenceCheck = parse(rest)?;
    let seq = sequence(mc, &common, &cfg)?;
    let mut reports = sequence_reports(&cfg.spec, cfg.horizon, &seq)?;
    if reports.len() > 1 {
        let v = monotone_verdict(&seq);
        reports.iter_mut().for_each(|r| r.verdicts.push(v.clone()));
    }
    Ok(Outcome {
        passed: true,
        results: sequence_results(&seq, reports),
        csv: Some(seq.to_csv()),
    })
}

fn check_outcome(report: CheckReport) -> Outcome {
    let estimates: Vec<EstimateResult> = report.estimates.iter().map(|e| e.estimate).collect();
    Outcome {
        passed: report.passed,
        csv: Some(estimates_csv(&estimates)),
        results: to_value(&report),
    }
}

pub fn verify(mc: &MonteCarlo, config: &Value) -> Result<Outcome, String> {
    let (common, mut rest) = split(config)?;
    let available = CHECKS.join(", ");
    let check = match rest.remove("check") {
        Some(Value::String(s)) => s,
        Some(_) => return Err("field `check` must be a string".into()),
        None => return Err(format!("missing field `check`; available checks: {available}")),
    };
    let samples = || common.samples();
    let (seed, sampling) = (common.seed, common.sampling);
    match check.as_str() {
        "monotone" => {
            let cfg: SequenceCheck = parse(rest)?;
            let seq = sequence(mc, &common, &cfg)?;
            let v = monotone_verdict(&seq);
            let mut results = sequence_results(&seq, sequence_reports(&cfg.spec, cfg.horizon, &seq)?);
            results["verdicts"] = to_value(&vec![v.clone()]);
            Ok(Outcome {
                passed: v.passed,
                results,
                csv: Some(seq.to_csv()),
            })
        }
        "bounds" => {
            let cfg: SequenceCheck = parse(rest)?;
            if !matches!(cfg.spec, PathSetSpec::SupBall { .. } | PathSetSpec::HolderBall { .. }) {
                return Err("field `spec`: bounds apply to sup_ball and holder_ball".into());
            }
            let seq = sequence(mc, &common, &cfg)?;
            let reports = sequence_reports(&cfg.spec, cfg.horizon, &seq)?;
            if reports.iter().all(|r| r.bounds.is_empty()) {
                return Err("field `spec`: no analytic bound applies to these parameters".into());
            }
            Ok(Outcome {
                passed: reports.iter().all(EstimateReport::passed),
                results: sequence_results(&seq, reports),
                csv: Some(seq.to_csv()),
            })
        }
        "additivity" => {
            let cfg: AdditivityCheck = parse(rest)?;
            let g = grid(cfg.horizon, cfg.n)?;
            Ok(check_outcome(lib(additivity_check(mc, &cfg.a, &cfg.b, &g, samples()?, seed, sampling))?))
        }
        "difference" => {
            let cfg: DifferenceCheck = parse(rest)?;
            let g = grid(cfg.horizon, cfg.n)?;
            Ok(check_outcome(lib(difference_check(
                mc,
                cfg.m_inner,
                cfg.m_outer,
                &g,
                samples()?,
                seed,
                sampling,
            ))?))
        }
        "monotone_limit" => {
            let cfg: LimitCheck = parse(rest)?;
            let g = grid(cfg.horizon, cfg.n)?;
            Ok(check_outcome(lib(monotone_limit_check(mc, &cfg.family, &g, samples()?, seed, sampling))?))
        }
        "countable_additivity" => {
            let cfg: PartitionCheck = parse(rest)?;
            let g = grid(cfg.horizon, cfg.n)?;
            Ok(check_outcome(lib(countable_additivity_check(
                mc,
                &cfg.radii,
                &g,
                samples()?,
                seed,
                sampling,
            ))?))
        }
        "mu_infinity" => {
            let cfg: InfinityCheck = parse(rest)?;
            let hs = lib(mu_sequence_infty(
                mc,
                cfg.alpha,
                cfg.lambda,
                &cfg.horizons,
                cfg.level_per_unit,
                samples()?,
                seed,
                sampling,
            ))?;
            Ok(Outcome {
                passed: hs.passed(),
                csv: Some(hs.sequence.to_csv()),
                results: to_value(&hs),
            })
        }
        "oracle_agreement" => oracle_agreement(mc, &common, parse(rest)?),
        other => Err(format!("unknown check `{other}`; available checks: {available}")),
    }
}

fn oracle_agreement(mc: &MonteCarlo, common: &Common, cfg: OracleCheck) -> Result<Outcome, String> {
    let samples = common.samples()?;
    let spec = PathSetSpec::<f64>::sup_ball(cfg.m);
    let spec_json = to_value(&spec);
    let series = lib(reflection_supball(cfg.horizon, cfg.m, cfg.terms))?;
    let est = lib(mc.estimate(&spec, &grid(cfg.horizon, cfg.n)?, samples, common.seed))?;
    let mut verdicts = Vec::new();
    let diff = (est.p_hat - series.value).abs();
    let tol = (cfg.relative_tolerance * series.value).max(TOLERANCE_SE * est.se) + series.error_bound;
    verdicts.push(
        Verdict::new("reflection", diff <= tol, diff, tol)
            .with_detail(format!("level {} estimate vs series", cfg.n)),
    );
    let mut estimates = vec![est];
    let mut quadrature = Vec::new();
    for &q in &cfg.quadrature_levels {
        let g = grid(cfg.horizon, q)?;
        let exact = lib(quadrature_orthant(&g, cfg.m))?;
        let e = lib(mc.estimate(&spec, &g, samples, common.seed.substream(u64::from(q))))?;
        let diff = (e.p_hat - exact.value).abs();
        let tol = TOLERANCE_SE * e.se + 1e-10;
        verdicts.push(Verdict::new(format!("quadrature_n{q}"), diff <= tol, diff, tol));
        quadrature.push(json!({"n": q, "value": exact, "estimate": EstimateReport::new(spec_json.clone(), &e)}));
        estimates.push(e);
    }
    let walk = match cfg.walk_steps {
        Some(steps) => {
            let e = lib(random_walk_supball(
                mc,
                cfg.horizon,
                cfg.m,
                steps,
                samples.max(MIN_SAMPLES),
                common.seed.substream(1 << 32),
            ))?;
            let diff = (e.p_hat - series.value).abs();
            let tol = TOLERANCE_SE * e.se + series.error_bound;
            verdicts.push(Verdict::new("walk_vs_reflection", diff <= tol, diff, tol));
            estimates.push(e);
            Some(EstimateReport::new(spec_json.clone(), &e))
        }
        None => None,
    };
    let passed = verdicts.iter().all(|v| v.passed);
    Ok(Outcome {
        passed,
        csv: Some(estimates_csv(&estimates)),
        results: json!({
            "reflection": series,
            "estimate": EstimateReport::new(spec_json, &est),
            "quadrature": quadrature,
            "walk": walk,
            "verdicts": verdicts,
        }),
    })
}

fn nonempty<T>(name: &str, v: &[T]) -> Result<(), String> {
    if v.is_empty() {
        Err(format!("field `{name}`: empty grid"))
    } else {
        Ok(())
    }
}

pub fn sweep(mc: &MonteCarlo, config: &Value) -> Result<Outcome, String> {
    let (common, rest) = split(config)?;
    let cfg: SweepConfig = parse(rest)?;
    let mut extra = Map::new();
    let mut passed = true;
    let (header, rows): (&[&str], Vec<Vec<f64>>) = match &cfg {
        SweepConfig::SupballBound { horizon, m, n } => {
            nonempty("m", m)?;
            let rows = m
                .iter()
                .map(|&m| {
                    let b = lib(supball_bound(*horizon, m, *n))?;
                    Ok(vec![m, b.limit, b.pre_limit, b.increment_product, b.containing_product])
                })
                .collect::<Result<_, String>>()?;
            (&["m", "limit", "pre_limit", "increment_product", "containing_product"], rows)
        }
        SweepConfig::HolderBound { alpha, horizon, lambda, n } => {
            nonempty("lambda", lambda)?;
            let rows = lambda
                .iter()
                .map(|&l| {
                    let b = lib(holder_lower_bound(*alpha, *horizon, l, *n))?;
                    Ok(vec![l, b.params["psi"], b.limit, b.pre_limit, b.increment_product])
                })
                .collect::<Result<_, String>>()?;
            (&["lambda", "psi", "limit", "pre_limit", "increment_product"], rows)
        }
        SweepConfig::MuR { alpha, lambda, horizons, level_per_unit } => {
            nonempty("horizons", horizons)?;
            let hs = lib(mu_sequence_infty(
                mc,
                *alpha,
                *lambda,
                horizons,
                *level_per_unit,
                common.samples()?,
                common.seed,
                common.sampling,
            ))?;
            passed = hs.sequence.monotonicity.consistent && hs.sequence.monotonicity.exact != Some(false);
            extra.insert("monotonicity".into(), to_value(&hs.sequence.monotonicity));
            extra.insert("bounds".into(), to_value(&hs.bounds));
            let rows = hs
                .sequence
                .estimates
                .iter()
                .map(|e| vec![e.horizon, e.p_hat, e.se, e.ci_low, e.ci_high])
                .collect();
            (&["r", "p_hat", "se", "ci_low", "ci_high"], rows)
        }
    };
    let mut results = Map::new();
    results.insert("columns".into(), to_value(&header));
    results.insert("rows".into(), to_value(&rows));
    results.extend(extra);
    Ok(Outcome {
        passed,
        csv: Some(table_csv(header, &rows)),
        results: Value::Object(results),
    })
}
