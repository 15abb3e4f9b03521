use crate::io::{positive_ray, read_json, read_pool, read_sigma, read_weighted_pool};
use crate::{CliError, Config, Outcome};
use pforge::balayage::{balayage_point, honda_bounds, need_bal_check, nu_constant, nu_measure, serre_solve};
use pforge::construct::construct as construct_poly;
use pforge::interval::{capacity as capacity_of, equilibrium_measure, CapacityMethod, IntervalUnion, RayDirection};
use pforge::measure::{cdf_distance, energy, potential as potential_at, sweeten as sweeten_measure, MixtureMeasure};
use pforge::numeric::{cheb_nodes, fmt_f64, parse_f64};
use pforge::poly::IntPolynomial;
use pforge::smyth::{certify, optimize_dual, optimize_primal, ObjectiveSpec, SmythCertificate};
use serde_json::{json, Value};
use std::fmt::Write;
use std::path::Path;

/// Quadrature-level checks never demand more than this.
const QUADRATURE_FLOOR: f64 = 1e-8;

/// Length of the window used for unbounded domains when none is given.
const RAY_WINDOW: f64 = 8.0;

fn ok(json: Value, csv: Option<String>) -> Result<Outcome, CliError> {
    Ok(Outcome { json, csv, failure: None })
}

fn need<'a, T>(v: &'a Option<T>, flag: &str) -> Result<&'a T, CliError> {
    v.as_ref().ok_or_else(|| CliError::Usage(format!("this command needs --{flag}")))
}

fn sigma(cfg: &Config) -> Result<IntervalUnion, CliError> {
    read_sigma(need(&cfg.sigma, "sigma")?)
}

fn measure(cfg: &Config, sigma: Option<&IntervalUnion>) -> Result<MixtureMeasure, CliError> {
    match (&cfg.measure, sigma) {
        (Some(p), _) => Ok(MixtureMeasure::from_json(&read_json(p)?)?),
        (None, Some(s)) => Ok(equilibrium_measure(s, cfg.grid)?),
        (None, None) => Err(CliError::Usage("this command needs --measure or --sigma".into())),
    }
}

fn single_interval(s: &IntervalUnion) -> Result<(f64, f64), CliError> {
    match s.components().as_slice() {
        [(a, b)] if s.is_compact() && b > a => Ok((*a, *b)),
        _ => Err(CliError::Usage("--sigma must be a single nondegenerate interval".into())),
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn csv_rows(header: &str, rows: impl IntoIterator<Item = (f64, f64)>) -> String {
    let mut s = format!("{header}\n");
    for (x, v) in rows {
        let _ = writeln!(s, "{},{}", fmt_f64(x), fmt_f64(v));
    }
    s
}

pub fn capacity(cfg: &Config) -> Result<Outcome, CliError> {
    let r = capacity_of(&sigma(cfg)?)?;
    let method = match r.method {
        CapacityMethod::ClosedForm => "closed-form",
        CapacityMethod::EnergyMinimization => "energy-minimization",
    };
    ok(
        json!({
            "capacity": fmt_f64(r.capacity),
            "method": method,
            "estimated_error": fmt_f64(r.estimated_error),
        }),
        None,
    )
}

pub fn equilibrium(cfg: &Config) -> Result<Outcome, CliError> {
    let s = sigma(cfg)?;
    let mu = equilibrium_measure(&s, cfg.grid)?;
    let per = (cfg.grid / s.component_count().max(1)).max(2);
    let xs: Vec<f64> = s.components().into_iter().flat_map(|(a, b)| linspace(a, b, per)).collect();
    let csv = csv_rows("x,cdf", xs.iter().map(|&x| (x, mu.cdf(x))));
    ok(
        json!({
            "measure": mu.to_json(),
            "capacity": fmt_f64(capacity_of(&s)?.capacity),
            "energy": fmt_f64(energy(&mu)),
        }),
        Some(csv),
    )
}

pub fn potential(cfg: &Config, at: &[f64]) -> Result<Outcome, CliError> {
    let s = cfg.sigma.as_deref().map(read_sigma).transpose()?;
    let mu = measure(cfg, s.as_ref())?;
    let xs = if at.is_empty() {
        let (a, b) = mu.support_hull();
        let pad = 0.1 * (b - a).max(1.0);
        linspace(a - pad, b + pad, cfg.grid)
    } else {
        at.to_vec()
    };
    let vals: Vec<_> = xs.iter().map(|&x| (x, potential_at(&mu, x))).collect();
    let csv = csv_rows("x,value", vals.iter().map(|(x, p)| (*x, p.value)));
    let points: Vec<Value> = vals
        .iter()
        .map(|(x, p)| json!({"x": fmt_f64(*x), "value": fmt_f64(p.value), "error_bound": fmt_f64(p.error_bound)}))
        .collect();
    ok(json!({ "points": points }), Some(csv))
}

pub fn nu(cfg: &Config) -> Result<Outcome, CliError> {
    let (a, b) = single_interval(&sigma(cfg)?)?;
    let mu = nu_measure(a, b)?;
    let c = nu_constant(a, b);
    let xs = cheb_nodes(a, b, cfg.grid.min(256));
    let rows: Vec<(f64, f64)> = xs.iter().map(|&x| (x, potential_at(&mu, x).value)).collect();
    let err = rows.iter().map(|&(x, u)| (u - (c - x.ln())).abs()).fold(0.0, f64::max);
    let limit = cfg.tol.max(QUADRATURE_FLOOR);
    let failure = (err > limit).then(|| format!("potential identity off by {err:e} (limit {limit:e})"));
    Ok(Outcome {
        json: json!({
            "measure": mu.to_json(),
            "constant": fmt_f64(c),
            "identity_error": fmt_f64(err),
        }),
        csv: Some(csv_rows("x,potential", rows)),
        failure,
    })
}

pub fn balayage(cfg: &Config, y: f64) -> Result<Outcome, CliError> {
    let (a, b) = single_interval(&sigma(cfg)?)?;
    let r = balayage_point(y, a, b)?;
    let limit = cfg.tol.max(QUADRATURE_FLOOR);
    let failure = if r.match_error > limit {
        Some(format!("potential identity off by {:e} (limit {limit:e})", r.match_error))
    } else if r.exterior_excess > limit {
        Some(format!("potential exceeds the swept point mass by {:e} off the interval", r.exterior_excess))
    } else {
        None
    };
    Ok(Outcome {
        json: json!({
            "measure": r.measure.to_json(),
            "constant": fmt_f64(r.constant),
            "match_error": fmt_f64(r.match_error),
            "exterior_excess": fmt_f64(r.exterior_excess),
        }),
        csv: None,
        failure,
    })
}

pub fn serre(cfg: &Config) -> Result<Outcome, CliError> {
    ok(serre_solve(cfg.tol)?.to_json(), None)
}

fn objective(cfg: &Config) -> Result<ObjectiveSpec, CliError> {
    let text = need(&cfg.objective, "objective")?.trim();
    let domain = cfg.sigma.as_deref().map(read_sigma).transpose()?;
    if text == "trace" {
        return Ok(ObjectiveSpec::trace(match domain {
            Some(d) => d,
            None => positive_ray()?,
        }));
    }
    if let Some(q) = text.strip_prefix("pointcount:") {
        let q = parse_f64(q)?;
        let domain = match domain {
            Some(d) => d,
            None => {
                let s = 2.0 * q.sqrt();
                IntervalUnion::from_f64(&[(-s, s)])?
            }
        };
        return Ok(ObjectiveSpec::point_count(q, domain)?);
    }
    if let Some(file) = text.strip_prefix("custom:") {
        let v = read_json(Path::new(file))?;
        let col = |k: &str| -> Result<Vec<f64>, CliError> {
            v.get(k)
                .and_then(Value::as_array)
                .ok_or_else(|| CliError::Usage(format!("custom objective needs list `{k}`")))?
                .iter()
                .map(|e| match e {
                    Value::String(s) => Ok(parse_f64(s)?),
                    Value::Number(n) => Ok(n.as_f64().unwrap_or(f64::NAN)),
                    other => Err(CliError::Usage(format!("expected a decimal, got {other}"))),
                })
                .collect()
        };
        let domain = domain.ok_or_else(|| CliError::Usage("a custom objective needs --sigma".into()))?;
        return Ok(ObjectiveSpec::custom(col("xs")?, col("ys")?, domain)?);
    }
    Err(CliError::Usage(format!("unknown objective {text:?}; use trace, pointcount:q or custom:<file>")))
}

/// Sample window: the domain hull, with unbounded ends cut to a fixed length.
fn window(spec: &ObjectiveSpec) -> (f64, f64) {
    let comps = spec.domain.components();
    let lo = comps.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
    let hi = comps.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
    match spec.domain.ray() {
        Some(r) => {
            let s = r.start_f64();
            match r.direction {
                RayDirection::Right => (lo.min(s), hi.max(s) + RAY_WINDOW),
                RayDirection::Left => (lo.min(s) - RAY_WINDOW, hi.max(s)),
            }
        }
        None => (lo, hi),
    }
}

fn slack_csv(spec: &ObjectiveSpec, cert: &SmythCertificate, n: usize) -> String {
    let (a, b) = window(spec);
    let rows = linspace(a, b, n)
        .into_iter()
        .filter(|&x| spec.domain.contains(x))
        .map(|x| {
            let s: f64 = cert.terms.iter().map(|(q, w)| w * q.eval_f64(x).abs().ln()).sum();
            (x, spec.value(x) - cert.lambda - s)
        });
    csv_rows("x,slack", rows)
}

pub fn smyth_certify(cfg: &Config, path: &Path) -> Result<Outcome, CliError> {
    let spec = objective(cfg)?;
    let cert = SmythCertificate::from_json(&read_json(path)?)?;
    let report = certify(&spec, &cert, cfg.tol)?;
    let failure = (!report.passed()).then(|| {
        if report.tail_certified {
            format!("slack {} at {}", fmt_f64(report.min_slack), fmt_f64(report.argmin))
        } else {
            "the slack is not certified along the unbounded part of the domain".into()
        }
    });
    Ok(Outcome {
        json: report.to_json(),
        csv: Some(slack_csv(&spec, &cert, cfg.grid)),
        failure,
    })
}

fn pool(cfg: &Config) -> Result<Vec<IntPolynomial>, CliError> {
    read_pool(need(&cfg.pool, "pool")?)
}

pub fn smyth_optimize(cfg: &Config) -> Result<Outcome, CliError> {
    let spec = objective(cfg)?;
    let cert = optimize_primal(&spec, &pool(cfg)?, cfg.tol)?;
    let csv = slack_csv(&spec, &cert, cfg.grid);
    ok(cert.to_json(), Some(csv))
}

fn parse_window(text: &str) -> Result<(f64, f64), CliError> {
    let (a, b) = text
        .split_once(',')
        .ok_or_else(|| CliError::Usage(format!("--truncate wants `lo,hi`, got {text:?}")))?;
    let (a, b) = (parse_f64(a)?, parse_f64(b)?);
    if !(a < b) {
        return Err(CliError::Usage(format!("--truncate needs lo < hi, got {text:?}")));
    }
    Ok((a, b))
}

pub fn smyth_dual(cfg: &Config, truncate: Option<&str>) -> Result<Outcome, CliError> {
    let spec = objective(cfg)?;
    let win = match truncate {
        Some(t) => parse_window(t)?,
        None => window(&spec),
    };
    let sol = optimize_dual(&spec, &pool(cfg)?, win, cfg.tol)?;
    ok(sol.to_json(), Some(sol.to_csv()))
}

pub fn construct(cfg: &Config) -> Result<Outcome, CliError> {
    let s = sigma(cfg)?;
    let n = *need(&cfg.degree, "degree")?;
    let mu = measure(cfg, Some(&s))?;
    let report = construct_poly(&mu, &s, n).map_err(|e| match e {
        pforge::Error::Parameter(_) | pforge::Error::Domain(_) | pforge::Error::Parse(_) => CliError::from(e),
        other => CliError::Construct(other.to_string()),
    })?;
    ok(report.to_json(), None)
}

pub fn honda(_cfg: &Config, q: u64) -> Result<Outcome, CliError> {
    ok(honda_bounds(q)?.to_json(), None)
}

pub fn sweeten(cfg: &Config, reference: &Path) -> Result<Outcome, CliError> {
    let s = sigma(cfg)?;
    let nu = MixtureMeasure::from_json(&read_json(need(&cfg.measure, "measure")?)?)?;
    let mu_ref = MixtureMeasure::from_json(&read_json(reference)?)?;
    let r = sweeten_measure(&nu, &mu_ref, &s)?;
    let limit = cfg.tol.max(QUADRATURE_FLOOR);
    let failure = (r.verification_margin > limit)
        .then(|| format!("sweetened potential exceeds the bound by {:e}", r.verification_margin));
    Ok(Outcome {
        json: json!({
            "measure": r.measure.to_json(),
            "beta": fmt_f64(r.beta),
            "gamma": fmt_f64(r.gamma),
            "sweetener": fmt_f64(r.sweetener),
            "b_estimate": fmt_f64(r.b_estimate),
            "verification_margin": fmt_f64(r.verification_margin),
        }),
        csv: None,
        failure,
    })
}

pub fn report(cfg: &Config) -> Result<Outcome, CliError> {
    let s = sigma(cfg)?;
    let mu = measure(cfg, Some(&s))?;
    let (lo, hi) = mu.support_hull();
    let eq = equilibrium_measure(&s, cfg.grid)?;
    let mut j = json!({
        "mass": fmt_f64(mu.mass()),
        "energy": fmt_f64(energy(&mu)),
        "support_hull": [fmt_f64(lo), fmt_f64(hi)],
        "capacity": fmt_f64(capacity_of(&s)?.capacity),
        "cdf_distance_to_equilibrium": fmt_f64(cdf_distance(&mu, &eq)),
    });
    let mut failure = None;
    if let Some(p) = &cfg.pool {
        let r = need_bal_check(&mu, &s, &read_weighted_pool(p)?)?;
        if !r.passed() {
            failure = Some("the potential domination check failed".into());
        }
        j["domination"] = r.to_json();
    }
    Ok(Outcome { json: j, csv: None, failure })
}
