//! Smyth-type certificates `F(x) >= lambda + sum a_k log|Q_k(x)|` and the dual
//! program of minimizing `int F dmu` over measures with `int log|Q_k| dmu >= 0`.
//!
//! Both directions run the same column-generation loop on the measure program:
//! a finite LP over weights at grid nodes, whose row multipliers are `(lambda, a)`,
//! followed by a search for the most negative slack, whose minimizers become new nodes.

mod simplex;

use crate::error::{Error, Result};
use crate::interval::{IntervalUnion, RayDirection};
use crate::measure::{energy, log_integral, Component, MixtureMeasure};
use crate::measure::num_str as num_from_json;
use crate::numeric::{brent, cheb_extrema, fmt_f64};
use crate::poly::{complex_roots, real_roots, IntPolynomial};
use rayon::prelude::*;
use serde_json::{json, Value};
use simplex::LpStatus;

/// Default slack tolerance.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Base grid size per component.
pub const GRID_POINTS: usize = 512;

#[derive(Debug, Clone, PartialEq)]
pub enum ObjectiveKind {
    /// `F(x) = x`.
    Trace,
    /// `F(x) = log|q + 1 - x|`.
    PointCount { q: f64 },
    /// Piecewise-linear interpolation of a table.
    Custom { xs: Vec<f64>, ys: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveSpec {
    pub kind: ObjectiveKind,
    pub domain: IntervalUnion,
    /// Optimize `-F` instead of `F`.
    pub negate: bool,
}

impl ObjectiveSpec {
    pub fn trace(domain: IntervalUnion) -> Self {
        ObjectiveSpec { kind: ObjectiveKind::Trace, domain, negate: false }
    }

    pub fn point_count(q: f64, domain: IntervalUnion) -> Result<Self> {
        let s = ObjectiveSpec { kind: ObjectiveKind::PointCount { q }, domain, negate: false };
        if s.domain.contains(q + 1.0) {
            return Err(Error::Domain(format!("log|q + 1 - x| is singular at {} inside the domain", q + 1.0)));
        }
        Ok(s)
    }

    pub fn custom(xs: Vec<f64>, ys: Vec<f64>, domain: IntervalUnion) -> Result<Self> {
        if xs.len() < 2 || xs.len() != ys.len() || xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain("custom table needs >= 2 strictly increasing nodes".into()));
        }
        if !ys.iter().all(|y| y.is_finite()) {
            return Err(Error::Domain("custom table values must be finite".into()));
        }
        if domain.is_compact() {
            let (lo, hi) = domain.hull();
            if lo < xs[0] || hi > xs[xs.len() - 1] {
                return Err(Error::Domain("domain extends beyond the custom table".into()));
            }
        }
        Ok(ObjectiveSpec { kind: ObjectiveKind::Custom { xs, ys }, domain, negate: false })
    }

    pub fn negated(&self) -> Self {
        let mut s = self.clone();
        s.negate = !s.negate;
        s
    }

    fn sign(&self) -> f64 {
        if self.negate {
            -1.0
        } else {
            1.0
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        let v = match &self.kind {
            ObjectiveKind::Trace => x,
            ObjectiveKind::PointCount { q } => (q + 1.0 - x).abs().ln(),
            ObjectiveKind::Custom { xs, ys } => {
                let i = segment(xs, x);
                let t = (x - xs[i]) / (xs[i + 1] - xs[i]);
                ys[i] + t * (ys[i + 1] - ys[i])
            }
        };
        self.sign() * v
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let d = match &self.kind {
            ObjectiveKind::Trace => 1.0,
            ObjectiveKind::PointCount { q } => 1.0 / (x - q - 1.0),
            ObjectiveKind::Custom { xs, ys } => {
                let i = segment(xs, x);
                (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])
            }
        };
        self.sign() * d
    }

    pub fn name(&self) -> String {
        let base = match &self.kind {
            ObjectiveKind::Trace => "trace".to_string(),
            ObjectiveKind::PointCount { q } => format!("pointcount:{}", fmt_f64(*q)),
            ObjectiveKind::Custom { .. } => "custom".to_string(),
        };
        if self.negate {
            format!("-{base}")
        } else {
            base
        }
    }

    /// On a ray the objective must outgrow `log|x|`; only the trace in its growing
    /// direction does so among the built-in kinds.
    pub fn check_growth(&self) -> Result<()> {
        let Some(ray) = self.domain.ray() else {
            return Ok(());
        };
        match (&self.kind, ray.direction, self.negate) {
            (ObjectiveKind::Trace, RayDirection::Right, false) | (ObjectiveKind::Trace, RayDirection::Left, true) => Ok(()),
            (ObjectiveKind::Custom { .. }, _, _) => Err(Error::TailUncertified(
                "custom objective on a ray: growth beyond the table is unknown".into(),
            )),
            _ => Err(Error::Unbounded(format!(
                "{} does not outgrow log|x| along the ray",
                self.name()
            ))),
        }
    }
}

fn segment(xs: &[f64], x: f64) -> usize {
    match xs.binary_search_by(|v| v.total_cmp(&x)) {
        Ok(i) => i.min(xs.len() - 2),
        Err(i) => i.saturating_sub(1).min(xs.len() - 2),
    }
}

/// Float views of the pool for fast slack evaluation.
struct Pool {
    polys: Vec<IntPolynomial>,
    coeffs: Vec<Vec<f64>>,
    dcoeffs: Vec<Vec<f64>>,
    real_roots: Vec<f64>,
    /// Largest root modulus per member.
    radius: Vec<f64>,
}

impl Pool {
    fn new(polys: &[IntPolynomial]) -> Result<Self> {
        let mut real = Vec::new();
        let mut radius = Vec::new();
        for q in polys {
            if q.is_zero() {
                return Err(Error::Domain("pool contains the zero polynomial".into()));
            }
            let rs = if q.deg() > 0 { complex_roots(q)? } else { Vec::new() };
            radius.push(rs.iter().map(|z| z.norm()).fold(0.0, f64::max));
            real.extend(rs.iter().filter(|z| z.im.abs() < 1e-12).map(|z| z.re));
        }
        real.sort_by(f64::total_cmp);
        real.dedup();
        Ok(Pool {
            polys: polys.to_vec(),
            coeffs: polys.iter().map(|q| q.to_f64_coeffs()).collect(),
            dcoeffs: polys.iter().map(|q| q.derivative().to_f64_coeffs()).collect(),
            real_roots: real,
            radius,
        })
    }

    fn len(&self) -> usize {
        self.polys.len()
    }

    fn logs(&self, x: f64) -> Vec<f64> {
        self.coeffs.iter().map(|c| horner(c, x).abs().ln()).collect()
    }

    fn weighted_log(&self, a: &[f64], x: f64) -> f64 {
        let mut s = 0.0;
        for (c, &ak) in self.coeffs.iter().zip(a) {
            if ak != 0.0 {
                s += ak * horner(c, x).abs().ln();
            }
        }
        s
    }

    fn weighted_dlog(&self, a: &[f64], x: f64) -> f64 {
        let mut s = 0.0;
        for ((c, dc), &ak) in self.coeffs.iter().zip(&self.dcoeffs).zip(a) {
            if ak != 0.0 {
                s += ak * horner(dc, x) / horner(c, x);
            }
        }
        s
    }
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, v| acc * x + v)
}

struct Slack<'a> {
    spec: &'a ObjectiveSpec,
    pool: &'a Pool,
    lambda: f64,
    a: &'a [f64],
}

impl Slack<'_> {
    fn value(&self, x: f64) -> f64 {
        let v = self.spec.value(x) - self.lambda - self.pool.weighted_log(self.a, x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }

    fn derivative(&self, x: f64) -> f64 {
        self.spec.derivative(x) - self.pool.weighted_dlog(self.a, x)
    }

    /// Local minima over the grid, refined by root-finding on the derivative where it
    /// changes sign from negative to positive; piece endpoints are always candidates.
    fn minima(&self, pieces: &[Vec<f64>]) -> Vec<(f64, f64)> {
        pieces
            .par_iter()
            .flat_map_iter(|xs| {
                let d: Vec<f64> = xs.iter().map(|&x| self.derivative(x)).collect();
                let mut out = Vec::new();
                for &x in [xs[0], xs[xs.len() - 1]].iter() {
                    out.push((x, self.value(x)));
                }
                for i in 0..xs.len().saturating_sub(1) {
                    if d[i].is_finite() && d[i + 1].is_finite() && d[i] < 0.0 && d[i + 1] > 0.0 {
                        let x = brent(|t| self.derivative(t), xs[i], xs[i + 1], 1e-15)
                            .unwrap_or(0.5 * (xs[i] + xs[i + 1]));
                        out.push((x, self.value(x)));
                    }
                }
                out
            })
            .collect()
    }
}

fn grid(lo: f64, hi: f64, count: usize, roots: &[f64]) -> Vec<f64> {
    if hi <= lo {
        return vec![lo];
    }
    let mut xs = cheb_extrema(lo, hi, count.max(2) - 1);
    // log-densified near pool roots, where the slack dives
    for &r in roots {
        if r < lo - 1.0 || r > hi + 1.0 {
            continue;
        }
        for k in 1..=8 {
            let h = 10f64.powi(-k);
            for x in [r - h, r + h] {
                if x > lo && x < hi {
                    xs.push(x);
                }
            }
        }
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

/// Bounded pieces of the domain, with any ray cut at `reach`.
fn pieces(domain: &IntervalUnion, reach: f64) -> Vec<(f64, f64)> {
    let mut out = domain.components();
    if let Some(r) = domain.ray() {
        let s = crate::interval::to_f64(&r.start);
        match r.direction {
            RayDirection::Right => out.push((s, s.max(reach))),
            RayDirection::Left => out.push((s.min(-reach), s)),
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

#[derive(Debug, Clone)]
struct LpRun {
    lambda: f64,
    a: Vec<f64>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    min_slack: f64,
    rounds: usize,
}

fn column_generation(spec: &ObjectiveSpec, pool: &Pool, pcs: &[(f64, f64)], grid_n: usize, tol: f64) -> Result<LpRun> {
    let k = pool.len();
    let usable = |x: &f64| pool.logs(*x).iter().all(|v| v.is_finite()) && spec.value(*x).is_finite();
    let mut nodes: Vec<f64> = pcs
        .iter()
        .flat_map(|&(a, b)| grid(a, b, grid_n, &pool.real_roots))
        .filter(usable)
        .collect();
    let search: Vec<Vec<f64>> = pcs
        .iter()
        .map(|&(a, b)| grid(a, b, 4 * grid_n, &pool.real_roots))
        .collect();
    if nodes.is_empty() {
        return Err(Error::Infeasible("no usable grid nodes".into()));
    }
    for round in 0..100 {
        let mut cols: Vec<Vec<f64>> = nodes
            .iter()
            .map(|&x| {
                let mut c = vec![1.0];
                c.extend(pool.logs(x));
                c
            })
            .collect();
        for i in 0..k {
            let mut c = vec![0.0; k + 1];
            c[i + 1] = -1.0;
            cols.push(c);
        }
        let mut cost: Vec<f64> = nodes.iter().map(|&x| spec.value(x)).collect();
        cost.extend(std::iter::repeat(0.0).take(k));
        let mut b = vec![0.0; k + 1];
        b[0] = 1.0;
        let sol = simplex::solve(&cols, &cost, &b).map_err(|e| match e {
            LpStatus::Infeasible => Error::Infeasible(
                "no grid measure satisfies every pool constraint; refine the grid or widen the truncation".into(),
            ),
            LpStatus::Unbounded => Error::Unbounded("measure program is unbounded".into()),
            LpStatus::IterationLimit => Error::IterationLimit("simplex did not terminate".into()),
        })?;
        let lambda = sol.duals[0];
        // primal and dual optima of the finite LP coincide
        debug_assert!((sol.objective - lambda).abs() <= 1e-6 * (1.0 + lambda.abs()), "{} vs {lambda}", sol.objective);
        let a: Vec<f64> = sol.duals[1..].iter().map(|v| v.max(0.0)).collect();
        let slack = Slack { spec, pool, lambda, a: &a };
        let mut mins = slack.minima(&search);
        mins.sort_by(|x, y| x.1.total_cmp(&y.1));
        let (argmin, min_slack) = mins.first().copied().unwrap_or((nodes[0], 0.0));
        if min_slack >= -tol || round == 99 {
            return Ok(LpRun {
                lambda,
                a,
                weights: sol.x[..nodes.len()].to_vec(),
                nodes,
                min_slack,
                rounds: round + 1,
            });
        }
        let before = nodes.len();
        for (x, s) in mins.into_iter().take(2 * k + 4) {
            if s < -tol && usable(&x) && !nodes.iter().any(|n| (n - x).abs() <= 1e-15 * (1.0 + x.abs())) {
                nodes.push(x);
            }
        }
        if nodes.len() == before {
            return Err(Error::IterationLimit(format!(
                "exchange stalled with slack {min_slack:e} at {argmin}"
            )));
        }
    }
    unreachable!()
}

#[derive(Debug, Clone)]
pub struct SmythCertificate {
    pub lambda: f64,
    pub terms: Vec<(IntPolynomial, f64)>,
    pub min_slack: f64,
    pub argmin: f64,
    pub tail_certified: bool,
    /// Number of points where the slack was evaluated.
    pub grid_points: usize,
}

impl SmythCertificate {
    pub fn new(lambda: f64, terms: Vec<(IntPolynomial, f64)>) -> Self {
        SmythCertificate { lambda, terms, min_slack: f64::NAN, argmin: f64::NAN, tail_certified: false, grid_points: 0 }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "lambda": fmt_f64(self.lambda),
            "terms": self.terms.iter().map(|(q, a)| json!({
                "coeffs": q.to_strings(),
                "a": fmt_f64(*a),
            })).collect::<Vec<_>>(),
            "min_slack": fmt_f64(self.min_slack),
            "argmin": fmt_f64(self.argmin),
            "tail_certified": self.tail_certified,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let lambda = num_from_json(v.get("lambda").ok_or_else(|| Error::Parse("missing lambda".into()))?)?;
        let mut terms = Vec::new();
        for t in v.get("terms").and_then(Value::as_array).into_iter().flatten() {
            let q = IntPolynomial::from_json(t)?;
            let a = num_from_json(t.get("a").ok_or_else(|| Error::Parse("term without a".into()))?)?;
            if !(a >= 0.0) {
                return Err(Error::Parse(format!("negative weight {a}")));
            }
            terms.push((q, a));
        }
        Ok(SmythCertificate::new(lambda, terms))
    }
}

#[derive(Debug, Clone)]
pub struct CertifyReport {
    pub min_slack: f64,
    pub argmin: f64,
    pub tail_certified: bool,
    /// Beyond this point (along the ray) the slack is increasing.
    pub tail_start: Option<f64>,
    pub grid_points: usize,
    pub tol: f64,
}

impl CertifyReport {
    pub fn passed(&self) -> bool {
        self.min_slack >= -self.tol && self.tail_certified
    }

    pub fn to_json(&self) -> Value {
        json!({
            "min_slack": fmt_f64(self.min_slack),
            "argmin": fmt_f64(self.argmin),
            "tail_certified": self.tail_certified,
            "tail_start": self.tail_start.map(fmt_f64),
            "grid_points": self.grid_points,
            "tolerance": fmt_f64(self.tol),
            "pass": self.passed(),
        })
    }
}

/// Point beyond which the slack of `(lambda, a)` is monotone along the ray:
/// `|Q'/Q| <= deg/(|x| - R)` and `|F'| >= 1` give `x0 = R + sum a_k deg Q_k`.
fn tail_start(spec: &ObjectiveSpec, pool: &Pool, a: &[f64]) -> Option<f64> {
    let ray = spec.domain.ray()?;
    let s = crate::interval::to_f64(&ray.start);
    let mut r = 0.0f64;
    let mut w = 0.0;
    for (k, &ak) in a.iter().enumerate() {
        if ak > 0.0 {
            r = r.max(pool.radius[k]);
            w += ak * pool.polys[k].deg() as f64;
        }
    }
    let x0 = r + w + 1.0;
    Some(match ray.direction {
        RayDirection::Right => x0.max(s),
        RayDirection::Left => (-x0).min(s),
    })
}

/// Evaluates the slack `F(x) - lambda - sum a_k log|Q_k(x)|` over the domain.
pub fn certify(spec: &ObjectiveSpec, cert: &SmythCertificate, tol: f64) -> Result<CertifyReport> {
    let polys: Vec<IntPolynomial> = cert.terms.iter().map(|t| t.0.clone()).collect();
    let a: Vec<f64> = cert.terms.iter().map(|t| t.1).collect();
    if a.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::Domain("certificate weights must be nonnegative".into()));
    }
    let pool = Pool::new(&polys)?;
    let tail = match spec.check_growth() {
        Ok(()) => tail_start(spec, &pool, &a),
        Err(Error::TailUncertified(msg)) => {
            let rep = grid_only(spec, &pool, cert, &a, tol)?;
            return Err(Error::TailUncertified(format!(
                "{msg}; grid-only min slack {} at {}",
                fmt_f64(rep.min_slack),
                fmt_f64(rep.argmin)
            )));
        }
        Err(e) => return Err(e),
    };
    let reach = tail.map_or(0.0, |t| t.abs() + 1.0);
    let pcs = pieces(&spec.domain, reach);
    evaluate(spec, &pool, cert.lambda, &a, &pcs, tol, tail)
}

fn grid_only(spec: &ObjectiveSpec, pool: &Pool, cert: &SmythCertificate, a: &[f64], tol: f64) -> Result<CertifyReport> {
    let reach = match &spec.kind {
        ObjectiveKind::Custom { xs, .. } => xs[xs.len() - 1].abs().max(xs[0].abs()),
        _ => 64.0,
    };
    let pcs: Vec<(f64, f64)> = pieces(&spec.domain, reach)
        .into_iter()
        .filter(|p| p.1 >= p.0)
        .collect();
    evaluate(spec, pool, cert.lambda, a, &pcs, tol, None).map(|mut r| {
        r.tail_certified = false;
        r
    })
}

fn evaluate(
    spec: &ObjectiveSpec,
    pool: &Pool,
    lambda: f64,
    a: &[f64],
    pcs: &[(f64, f64)],
    tol: f64,
    tail: Option<f64>,
) -> Result<CertifyReport> {
    let slack = Slack { spec, pool, lambda, a };
    let grids: Vec<Vec<f64>> = pcs
        .iter()
        .map(|&(lo, hi)| grid(lo, hi, 8 * GRID_POINTS, &pool.real_roots))
        .collect();
    let mut best = (f64::NAN, f64::INFINITY);
    for xs in &grids {
        for v in xs.par_iter().map(|&x| (x, slack.value(x))).collect::<Vec<_>>() {
            if v.1 < best.1 {
                best = v;
            }
        }
    }
    for v in slack.minima(&grids) {
        if v.1 < best.1 {
            best = v;
        }
    }
    Ok(CertifyReport {
        min_slack: best.1,
        argmin: best.0,
        tail_certified: spec.domain.is_compact() || tail.is_some(),
        tail_start: tail,
        grid_points: grids.iter().map(Vec::len).sum(),
        tol,
    })
}

/// Largest certified `lambda` for the pool: the exchange LP value, lowered by any
/// residual negative slack found on the verification grid.
pub fn optimize_primal(spec: &ObjectiveSpec, pool: &[IntPolynomial], tol: f64) -> Result<SmythCertificate> {
    spec.check_growth()?;
    let p = Pool::new(pool)?;
    if !spec.domain.is_compact() && pool.is_empty() {
        // lambda = inf F along the ray, attained at its start
        let s = crate::interval::to_f64(&spec.domain.ray().expect("ray").start);
        let lo = spec
            .domain
            .components()
            .iter()
            .flat_map(|&(a, b)| [spec.value(a), spec.value(b)])
            .fold(spec.value(s), f64::min);
        let cert = SmythCertificate::new(lo, Vec::new());
        return finish(spec, cert, tol);
    }
    let mut reach = p.radius.iter().fold(4.0f64, |m, r| m.max(2.0 * r + 4.0));
    let mut run = None;
    for _ in 0..8 {
        let r = column_generation(spec, &p, &pieces(&spec.domain, reach), GRID_POINTS, tol)?;
        let need = tail_start(spec, &p, &r.a).map_or(0.0, |t| t.abs());
        run = Some(r);
        if need < reach {
            break;
        }
        reach = 2.0 * need;
    }
    let run = run.expect("at least one round");
    let lambda = run.lambda + run.min_slack.min(0.0);
    let terms: Vec<(IntPolynomial, f64)> = pool.iter().cloned().zip(run.a.iter().copied()).collect();
    finish(spec, SmythCertificate::new(lambda, terms), tol)
}

fn finish(spec: &ObjectiveSpec, mut cert: SmythCertificate, tol: f64) -> Result<SmythCertificate> {
    let rep = certify(spec, &cert, tol)?;
    if rep.min_slack < 0.0 {
        cert.lambda += rep.min_slack;
    }
    // lowering lambda by the deficit moves the minimum slack to zero
    cert.min_slack = rep.min_slack.max(0.0);
    cert.argmin = rep.argmin;
    cert.tail_certified = rep.tail_certified;
    cert.grid_points = rep.grid_points;
    Ok(cert)
}

#[derive(Debug, Clone)]
pub struct DualSolution {
    /// Grid measure: each weight spread over the cell around its node.
    pub measure: MixtureMeasure,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `sum_j w_j F(x_j)`.
    pub value: f64,
    /// Pool members whose constraint is tight.
    pub binding_constraints: Vec<usize>,
    /// `sum_j w_j log|Q_k(x_j)|` per pool member.
    pub log_integrals: Vec<f64>,
    pub energy: f64,
    /// Row multipliers of the final LP: a certificate for the same pool.
    pub multipliers: (f64, Vec<f64>),
    pub min_slack: f64,
    pub rounds: usize,
}

impl DualSolution {
    pub fn to_json(&self) -> Value {
        json!({
            "value": fmt_f64(self.value),
            "binding_constraints": self.binding_constraints,
            "log_integrals": self.log_integrals.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>(),
            "energy": fmt_f64(self.energy),
            "lambda": fmt_f64(self.multipliers.0),
            "a": self.multipliers.1.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>(),
            "nodes": self.nodes.len(),
            "rounds": self.rounds,
        })
    }

    /// `node,weight` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("node,weight\n");
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s.push_str(&format!("{},{}\n", fmt_f64(*x), fmt_f64(*w)));
        }
        s
    }
}

/// Minimizes `int F dmu` over grid measures on `domain ∩ truncation` subject to
/// `int log|Q_k| dmu >= 0`, refining the grid at the most negative reduced costs.
pub fn optimize_dual(spec: &ObjectiveSpec, pool: &[IntPolynomial], truncation: (f64, f64), tol: f64) -> Result<DualSolution> {
    let (lo, hi) = truncation;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::Domain(format!("truncation [{lo}, {hi}] must be compact")));
    }
    let p = Pool::new(pool)?;
    let reach = lo.abs().max(hi.abs()) + 1.0;
    let pcs: Vec<(f64, f64)> = pieces(&spec.domain, reach)
        .into_iter()
        .map(|(a, b)| (a.max(lo), b.min(hi)))
        .filter(|(a, b)| a <= b)
        .collect();
    if pcs.is_empty() {
        return Err(Error::EmptySet);
    }
    let run = column_generation(spec, &p, &pcs, GRID_POINTS, tol)?;
    let value: f64 = run.nodes.iter().zip(&run.weights).map(|(x, w)| w * spec.value(*x)).sum();
    let log_integrals: Vec<f64> = (0..p.len())
        .map(|k| {
            run.nodes
                .iter()
                .zip(&run.weights)
                .filter(|(_, w)| **w > 0.0)
                .map(|(x, w)| w * p.logs(*x)[k])
                .sum()
        })
        .collect();
    let binding = (0..p.len())
        .filter(|&k| run.a[k] > 1e-12 || log_integrals[k].abs() <= 1e-9)
        .collect();
    let (nodes, weights) = sorted_grid(&run.nodes, &run.weights);
    let measure = MixtureMeasure::new(vec![Component::Grid { nodes: nodes.clone(), weights: weights.clone() }]);
    let en = energy(&measure);
    Ok(DualSolution {
        measure,
        nodes,
        weights,
        value,
        binding_constraints: binding,
        log_integrals,
        energy: en,
        multipliers: (run.lambda, run.a),
        min_slack: run.min_slack,
        rounds: run.rounds,
    })
}

fn sorted_grid(nodes: &[f64], weights: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut pairs: Vec<(f64, f64)> = nodes.iter().copied().zip(weights.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

#[derive(Debug, Clone)]
pub struct CraterReport {
    /// Present when the precondition `int F dmu_P < value` fails.
    pub skipped: Option<String>,
    pub mean_f_over_roots: f64,
    pub log_integral: f64,
    /// `(eps, dual mass within eps of a root of P)`.
    pub mass_near_roots: Vec<(f64, f64)>,
}

impl CraterReport {
    pub fn to_json(&self) -> Value {
        json!({
            "skipped": self.skipped,
            "mean_f_over_roots": fmt_f64(self.mean_f_over_roots),
            "log_integral": fmt_f64(self.log_integral),
            "mass_near_roots": self.mass_near_roots.iter().map(|(e, m)| json!({"eps": fmt_f64(*e), "mass": fmt_f64(*m)})).collect::<Vec<_>>(),
        })
    }
}

/// Compares a dual solution with an exceptional polynomial: its log-integral against
/// the dual measure and the dual mass near its roots, both expected to vanish.
pub fn crater_check(solution: &DualSolution, spec: &ObjectiveSpec, p: &IntPolynomial, eps: &[f64]) -> Result<CraterReport> {
    let rs = real_roots(p, 1e-12)?;
    let roots: Vec<f64> = rs.roots.iter().map(|r| r.mid_f64()).collect();
    let mut rep = CraterReport {
        skipped: None,
        mean_f_over_roots: f64::NAN,
        log_integral: f64::NAN,
        mass_near_roots: Vec::new(),
    };
    if rs.real_count() != p.deg() || p.deg() == 0 {
        rep.skipped = Some("P is not totally real".into());
        return Ok(rep);
    }
    rep.mean_f_over_roots = roots.iter().map(|&x| spec.value(x)).sum::<f64>() / roots.len() as f64;
    if rep.mean_f_over_roots >= solution.value {
        rep.skipped = Some(format!(
            "int F dmu_P = {} is not below the dual value {}",
            fmt_f64(rep.mean_f_over_roots),
            fmt_f64(solution.value)
        ));
        return Ok(rep);
    }
    rep.log_integral = log_integral(p, &solution.measure)?;
    for &e in eps {
        let m: f64 = solution
            .nodes
            .iter()
            .zip(&solution.weights)
            .filter(|(x, _)| roots.iter().any(|r| (*x - r).abs() <= e))
            .map(|(_, w)| w)
            .sum();
        rep.mass_near_roots.push((e, m));
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ray0() -> IntervalUnion {
        IntervalUnion::interval("0", "0").unwrap().with_ray("0", RayDirection::Right).unwrap()
    }

    #[test]
    fn single_log_certificate() {
        let spec = ObjectiveSpec::trace(ray0());
        let cert = optimize_primal(&spec, &[IntPolynomial::from_i64(&[0, 1])], DEFAULT_TOL).unwrap();
        assert!((cert.lambda - 1.0).abs() < 1e-7, "{}", cert.lambda);
        assert!((cert.terms[0].1 - 1.0).abs() < 1e-4);
        assert!(cert.tail_certified);
    }

    #[test]
    fn certificate_json_round_trips() {
        let cert = SmythCertificate::new(1.5, vec![(IntPolynomial::from_i64(&[1, -3, 1]), 0.25)]);
        let back = SmythCertificate::from_json(&cert.to_json()).unwrap();
        assert_eq!(back.lambda, 1.5);
        assert_eq!(back.terms, cert.terms);
    }

    #[test]
    fn hand_certificate_has_zero_slack_at_one() {
        let spec = ObjectiveSpec::trace(ray0());
        let cert = SmythCertificate::new(1.0, vec![(IntPolynomial::from_i64(&[0, 1]), 1.0)]);
        let rep = certify(&spec, &cert, DEFAULT_TOL).unwrap();
        assert!(rep.min_slack.abs() < 1e-12 && (rep.argmin - 1.0).abs() < 1e-6);
        assert!(rep.passed());
        let bad = SmythCertificate::new(1.01, cert.terms.clone());
        assert!(!certify(&spec, &bad, DEFAULT_TOL).unwrap().passed());
    }

    #[test]
    fn empty_pool_gives_minimum_of_f() {
        let spec = ObjectiveSpec::trace(IntervalUnion::interval("0", "4").unwrap());
        let cert = optimize_primal(&spec, &[], DEFAULT_TOL).unwrap();
        assert!(cert.lambda.abs() < 1e-12);
        let dual = optimize_dual(&spec, &[], (0.0, 4.0), DEFAULT_TOL).unwrap();
        assert!(dual.value.abs() < 1e-12);
    }

    #[test]
    fn custom_objective_on_ray_is_flagged() {
        let spec = ObjectiveSpec::custom(vec![0.0, 10.0], vec![0.0, 10.0], ray0()).unwrap();
        let cert = SmythCertificate::new(0.0, Vec::new());
        assert!(matches!(certify(&spec, &cert, DEFAULT_TOL), Err(Error::TailUncertified(_))));
    }

    #[test]
    fn point_count_on_ray_is_unbounded() {
        let spec = ObjectiveSpec::point_count(4.0, IntervalUnion::interval("-10", "-9").unwrap().with_ray("-9", RayDirection::Left).unwrap()).unwrap();
        assert!(matches!(optimize_primal(&spec, &[], DEFAULT_TOL), Err(Error::Unbounded(_))));
    }
}
