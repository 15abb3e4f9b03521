//! Balayage onto intervals, the two-parameter measure `c mu_[a,b] + (1-c) nu_[a,b]`
//! with optimal mean, the resultant-based sufficient condition on measures, and
//! point-count bounds for abelian varieties over finite fields.

use crate::error::{Error, Result};
use crate::interval::{capacity, IntervalUnion};
use crate::measure::{energy, log_integral, potential, potential_complex, Component, MixtureMeasure};
use crate::numeric::{brent, cheb_extrema, cheb_nodes, fmt_f64};
use crate::poly::{is_prime, IntPolynomial};
use crate::smyth::{optimize_dual, optimize_primal, ObjectiveSpec, SmythCertificate, DEFAULT_TOL};
use num_complex::Complex64;
use serde_json::{json, Value};

/// `log((a + 2 sqrt(ab) + b)/(b - a))`, the constant in the potential of `nu_[a,b]`.
pub fn nu_constant(a: f64, b: f64) -> f64 {
    ((a.sqrt() + b.sqrt()).powi(2) / (b - a)).ln()
}

/// `-log|x| + log((a + 2 sqrt(ab) + b)/(b - a))`: the potential of `nu_[a,b]` on `[a, b]`
/// and an upper bound for it elsewhere.
pub fn nu_potential_bound(a: f64, b: f64, z: Complex64) -> f64 {
    -z.norm().ln() + nu_constant(a, b)
}

/// The probability measure `sqrt(ab) dt / (pi t sqrt((b - t)(t - a)))` on `[a, b]`.
pub fn nu_measure(a: f64, b: f64) -> Result<MixtureMeasure> {
    if !(a > 0.0 && b > a && b.is_finite()) {
        return Err(Error::Domain(format!("nu needs 0 < a < b, got [{a}, {b}]")));
    }
    Ok(MixtureMeasure::new(vec![Component::nu(a, b, 1.0)]))
}

#[derive(Debug, Clone)]
pub struct BalayageResult {
    pub measure: MixtureMeasure,
    /// `c` with `U(x) = -log|x - y| + c` on the interval.
    pub constant: f64,
    /// Largest deviation from that identity on the check grid, by quadrature.
    pub match_error: f64,
    /// Largest `U(z) - (-log|z - y| + c)` at exterior test points (should be `<= 0`).
    pub exterior_excess: f64,
}

/// Balayage of the point mass at `y` onto `[a, b]`, obtained from `nu` by the
/// translation (and reflection when `y > b`) taking `0` to `y`.
pub fn balayage_point(y: f64, a: f64, b: f64) -> Result<BalayageResult> {
    if !(b > a) {
        return Err(Error::Domain(format!("empty interval [{a}, {b}]")));
    }
    if y >= a && y <= b {
        return Err(Error::Domain(format!("{y} lies in [{a}, {b}]")));
    }
    let (comp, la, lb) = if y < a {
        let (la, lb) = (a - y, b - y);
        (Component::Nu { a: la, b: lb, weight: 1.0, origin: y, reflect: false }, la, lb)
    } else {
        let (la, lb) = (y - b, y - a);
        (Component::Nu { a: la, b: lb, weight: 1.0, origin: y, reflect: true }, la, lb)
    };
    let measure = MixtureMeasure::new(vec![comp]);
    let constant = nu_constant(la, lb);
    // quadrature of -log|x - t| against the density, independent of the closed form
    let quad = |x: f64| measure.integrate(|t| -(x - t).abs().ln(), &[x]);
    let mut match_error = 0.0f64;
    for x in cheb_nodes(a, b, 33) {
        let target = -(x - y).abs().ln() + constant;
        match_error = match_error.max((quad(x) - target).abs());
    }
    let h = b - a;
    let mut exterior_excess = f64::NEG_INFINITY;
    for x in [a - 0.5 * h, a - 0.01 * h, b + 0.01 * h, b + 0.5 * h, b + 3.0 * h] {
        if (x - y).abs() < 1e-9 * h {
            continue;
        }
        exterior_excess = exterior_excess.max(quad(x) - (-(x - y).abs().ln() + constant));
    }
    let z = Complex64::new(0.5 * (a + b), 0.5 * h);
    let pz = potential_complex(&measure, z).value;
    exterior_excess = exterior_excess.max(pz - (-(z - y).norm().ln() + constant));
    Ok(BalayageResult { measure, constant, match_error, exterior_excess })
}

/// `c mu_[a,b] + (1 - c) nu_[a,b]` with `U(0) = 0`, `U(a) = -(1 - c) log a` and least mean.
#[derive(Debug, Clone)]
pub struct SerreMeasure {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// `int x dmu`.
    pub mean: f64,
    /// `U(0)` and `U(a) + (1 - c) log a`, from the library potentials.
    pub residuals: (f64, f64),
}

impl SerreMeasure {
    pub fn measure(&self) -> MixtureMeasure {
        MixtureMeasure::new(vec![
            Component::equilibrium(self.a, self.b, self.c),
            Component::nu(self.a, self.b, 1.0 - self.c),
        ])
    }

    pub fn to_json(&self) -> Value {
        json!({
            "a": fmt_f64(self.a),
            "b": fmt_f64(self.b),
            "c": fmt_f64(self.c),
            "mean": fmt_f64(self.mean),
            "residual_origin": fmt_f64(self.residuals.0),
            "residual_a": fmt_f64(self.residuals.1),
        })
    }
}

// With S = (sqrt a + sqrt b)^2, on [a, b] the equilibrium part has potential
// -log((b - a)/4) and nu has -log x + log(S/(b - a)); at 0 they are -log(S/4) and
// log(S/(4ab)). The condition at `a` fixes c; the condition at 0 fixes b.
fn mix_weight(a: f64, b: f64) -> f64 {
    let s = (a.sqrt() + b.sqrt()).powi(2);
    let l1 = ((b - a) / 4.0).ln();
    let l2 = (s / (b - a)).ln();
    l2 / (l1 + l2)
}

fn origin_residual(a: f64, b: f64) -> f64 {
    let s = (a.sqrt() + b.sqrt()).powi(2);
    let c = mix_weight(a, b);
    -c * (s / 4.0).ln() + (1.0 - c) * (s / (4.0 * a * b)).ln()
}

/// `(b, c)` solving both potential conditions for the given `a`.
fn serre_curve(a: f64, tol: f64) -> Option<(f64, f64)> {
    let f = |b: f64| origin_residual(a, b);
    let ok = |b: f64| {
        let c = mix_weight(a, b);
        c > 0.0 && c < 1.0 && f(b).is_finite()
    };
    let lo = (4.0 * a).max(a + 1.0);
    let steps = 400;
    let ratio = (64.0 / lo).powf(1.0 / steps as f64);
    let mut prev = lo;
    for k in 1..=steps {
        let b = lo * ratio.powi(k);
        if ok(prev) && ok(b) && f(prev) < 0.0 && f(b) >= 0.0 {
            let root = brent(f, prev, b, tol.min(1e-15)).ok()?;
            return Some((root, mix_weight(a, root)));
        }
        prev = b;
    }
    None
}

fn serre_mean(a: f64, tol: f64) -> Option<f64> {
    let (b, c) = serre_curve(a, tol)?;
    Some(c * 0.5 * (a + b) + (1.0 - c) * (a * b).sqrt())
}

/// Solves for the two-parameter measure: `b` and `c` follow `a` through the two
/// potential conditions, and `a` is the stationary point of the mean.
pub fn serre_solve(tol: f64) -> Result<SerreMeasure> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let mean = |a: f64| serre_mean(a, tol).unwrap_or(f64::INFINITY);
    // coarse scan, then the derivative root by a five-point stencil
    let scan: Vec<(f64, f64)> = (1..100).map(|i| i as f64 * 0.005).map(|a| (a, mean(a))).collect();
    let i = (1..scan.len() - 1)
        .min_by(|&i, &j| scan[i].1.total_cmp(&scan[j].1))
        .ok_or_else(|| Error::IterationLimit("no interior minimum of the mean".into()))?;
    if !scan[i].1.is_finite() {
        return Err(Error::IterationLimit("the potential conditions have no solution".into()));
    }
    let deriv = |a: f64| {
        let h = 1e-4 * a;
        (mean(a - 2.0 * h) - 8.0 * mean(a - h) + 8.0 * mean(a + h) - mean(a + 2.0 * h)) / (12.0 * h)
    };
    let a = brent(deriv, scan[i - 1].0, scan[i + 1].0, 1e-14)
        .map_err(|e| Error::IterationLimit(format!("stationarity solve failed: {e}")))?;
    let (b, c) = serre_curve(a, tol).ok_or_else(|| Error::IterationLimit("lost the solution curve".into()))?;
    let mut sm = SerreMeasure { a, b, c, mean: c * 0.5 * (a + b) + (1.0 - c) * (a * b).sqrt(), residuals: (0.0, 0.0) };
    let mu = sm.measure();
    sm.residuals = (
        potential(&mu, 0.0).value,
        potential(&mu, a).value + (1.0 - c) * a.ln(),
    );
    if sm.residuals.0.abs() > tol.max(1e-12) || sm.residuals.1.abs() > tol.max(1e-12) {
        return Err(Error::IterationLimit(format!(
            "residuals {:e}, {:e} exceed {tol:e}",
            sm.residuals.0, sm.residuals.1
        )));
    }
    Ok(sm)
}

#[derive(Debug, Clone)]
pub struct NeedBalReport {
    pub pool: Vec<(IntPolynomial, f64)>,
    pub degree_sum: f64,
    pub degree_sum_ok: bool,
    pub potential_dominated: bool,
    /// Smallest `sum -a_i log|Q_i(z)| - U(z)` found, and where.
    pub worst_margin: f64,
    pub worst_point: Complex64,
    /// Limit of that difference at infinity.
    pub margin_at_infinity: f64,
    pub log_integrals: Vec<f64>,
    pub energy: f64,
    pub tol: f64,
}

impl NeedBalReport {
    pub fn passed(&self) -> bool {
        self.degree_sum_ok && self.potential_dominated && self.log_integrals.iter().all(|v| *v >= -self.tol)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "pass": self.passed(),
            "degree_sum": fmt_f64(self.degree_sum),
            "degree_sum_ok": self.degree_sum_ok,
            "potential_dominated": self.potential_dominated,
            "worst_margin": fmt_f64(self.worst_margin),
            "worst_point": [fmt_f64(self.worst_point.re), fmt_f64(self.worst_point.im)],
            "margin_at_infinity": fmt_f64(self.margin_at_infinity),
            "log_integrals": self.log_integrals.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>(),
            "energy": fmt_f64(self.energy),
        })
    }
}

/// Checks `U(z) <= sum -a_i log|Q_i(z)|`, `sum a_i deg Q_i <= 1` and
/// `int log|Q_i| dmu >= 0`.
///
/// The difference of the two sides is superharmonic off the support of `mu`, so it is
/// checked on a dense grid of the support hull and at infinity; a coarse grid of a
/// complex box around the support is evaluated as well.
pub fn need_bal_check(mu: &MixtureMeasure, sigma: &IntervalUnion, pool: &[(IntPolynomial, f64)]) -> Result<NeedBalReport> {
    let tol = 1e-9;
    let kappa = capacity(sigma)?.capacity;
    if kappa <= 1.0 {
        return Err(Error::Parameter(format!("capacity {kappa} must exceed 1")));
    }
    mu.validate()?;
    for (q, a) in pool {
        if q.is_zero() || q.deg() == 0 || !(*a > 0.0) {
            return Err(Error::Domain("pool needs nonconstant polynomials with positive weights".into()));
        }
        if q.content() != num_bigint::BigInt::from(1) || !q.is_squarefree() {
            return Err(Error::Domain("pool polynomials must be primitive and squarefree".into()));
        }
    }
    let degree_sum: f64 = pool.iter().map(|(q, a)| a * q.deg() as f64).sum();
    let rhs = |z: Complex64| -> f64 {
        pool.iter().map(|(q, a)| -a * q.eval_c(z).norm().ln()).sum()
    };
    let (lo, hi) = mu.support_hull();
    let w = (hi - lo).max(1e-3);
    let mut pts: Vec<Complex64> = Vec::new();
    for c in &mu.components {
        let (a, b) = c.support();
        pts.extend(cheb_extrema(a, b, 2048).into_iter().map(|x| Complex64::new(x, 0.0)));
    }
    for i in 0..=64 {
        for j in 0..=16 {
            let x = lo - 0.5 * w + 2.0 * w * i as f64 / 64.0;
            let y = w * j as f64 / 16.0;
            pts.push(Complex64::new(x, y));
        }
    }
    let mut worst = (f64::INFINITY, Complex64::new(lo, 0.0));
    for z in pts {
        let u = potential_complex(mu, z).value;
        let d = rhs(z) - u;
        if d.is_nan() {
            continue;
        }
        if d < worst.0 {
            worst = (d, z);
        }
    }
    // at infinity: (1 - sum a_i deg Q_i) log|z| - sum a_i log|lead Q_i|
    let lead_term: f64 = pool
        .iter()
        .map(|(q, a)| a * crate::poly::big_to_f64(&q.lead()).abs().ln())
        .sum();
    let margin_at_infinity = if degree_sum < 1.0 - 1e-12 { f64::INFINITY } else { -lead_term };
    let log_integrals = pool
        .iter()
        .map(|(q, _)| log_integral(q, mu))
        .collect::<Result<Vec<_>>>()?;
    Ok(NeedBalReport {
        pool: pool.to_vec(),
        degree_sum,
        degree_sum_ok: degree_sum <= 1.0 + 1e-12,
        potential_dominated: worst.0 >= -tol && margin_at_infinity >= -tol,
        worst_margin: worst.0,
        worst_point: worst.1,
        margin_at_infinity,
        log_integrals,
        energy: energy(mu),
        tol,
    })
}

#[derive(Debug, Clone)]
pub struct HondaReport {
    pub q: u64,
    /// Certified `lambda(Sigma, F)` from the pool, and the matching dual value.
    pub primal_f: f64,
    pub dual_f: f64,
    /// The same for `-F`.
    pub primal_neg_f: f64,
    pub dual_neg_f: f64,
    /// Only finitely many `A` have `#A(F_q)^{1/dim A}` below `exp(lower_exponent)`
    /// or above `exp(upper_exponent)`.
    pub lower_exponent: f64,
    pub upper_exponent: f64,
    pub gap: f64,
    /// `q + 2 sqrt q - 0.8984` and `q - 2 sqrt q + 2.8984`.
    pub comparison_high: f64,
    pub comparison_low: f64,
    pub certificate_f: SmythCertificate,
    pub certificate_neg_f: SmythCertificate,
}

impl HondaReport {
    pub fn to_json(&self) -> Value {
        json!({
            "q": self.q,
            "lower_exponent": fmt_f64(self.lower_exponent),
            "upper_exponent": fmt_f64(self.upper_exponent),
            "gap": fmt_f64(self.gap),
            "lower_bound": fmt_f64(self.lower_exponent.exp()),
            "upper_bound": fmt_f64(self.upper_exponent.exp()),
            "primal_f": fmt_f64(self.primal_f),
            "dual_f": fmt_f64(self.dual_f),
            "primal_neg_f": fmt_f64(self.primal_neg_f),
            "dual_neg_f": fmt_f64(self.dual_neg_f),
            "comparison_high": comparison_text(self.q, true).unwrap_or_else(|| fmt_f64(self.comparison_high)),
            "comparison_low": comparison_text(self.q, false).unwrap_or_else(|| fmt_f64(self.comparison_low)),
        })
    }
}

/// Exact decimal `q + 2 sqrt q - 0.8984` (or `q - 2 sqrt q + 2.8984`) for square `q`.
pub fn comparison_text(q: u64, high: bool) -> Option<String> {
    let r = (q as f64).sqrt().round() as u64;
    if r * r != q {
        return None;
    }
    // in units of 10^-4
    let v = if high {
        (q + 2 * r) as i64 * 10_000 - 8_984
    } else {
        q as i64 * 10_000 - 2 * r as i64 * 10_000 + 28_984
    };
    let sign = if v < 0 { "-" } else { "" };
    Some(format!("{sign}{}.{:04}", v.abs() / 10_000, v.abs() % 10_000))
}

fn is_prime_power(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    let p = (2..=q).find(|d| q % d == 0).unwrap_or(q);
    let mut r = q;
    while r % p == 0 {
        r /= p;
    }
    r == 1 && is_prime(p)
}

/// The linear pool `x - k` for integers `k` from `-ceil(2 sqrt q)` to `q + 1`.
pub fn honda_pool(q: u64) -> Vec<IntPolynomial> {
    let s = (2.0 * (q as f64).sqrt()).ceil() as i64;
    (-s..=q as i64 + 1).map(|k| IntPolynomial::from_i64(&[-k, 1])).collect()
}

/// Both LP directions for `F(x) = log|q + 1 - x|` on `[-2 sqrt q, 2 sqrt q]`.
pub fn honda_bounds(q: u64) -> Result<HondaReport> {
    honda_bounds_with_pool(q, &honda_pool(q))
}

pub fn honda_bounds_with_pool(q: u64, pool: &[IntPolynomial]) -> Result<HondaReport> {
    if !is_prime_power(q) {
        return Err(Error::Domain(format!("{q} is not a prime power")));
    }
    let s = 2.0 * (q as f64).sqrt();
    let sigma = IntervalUnion::from_f64(&[(-s, s)])?;
    let spec = ObjectiveSpec::point_count(q as f64, sigma)?;
    let neg = spec.negated();
    let cf = optimize_primal(&spec, pool, DEFAULT_TOL)?;
    let df = optimize_dual(&spec, pool, (-s, s), DEFAULT_TOL)?;
    let cn = optimize_primal(&neg, pool, DEFAULT_TOL)?;
    let dn = optimize_dual(&neg, pool, (-s, s), DEFAULT_TOL)?;
    let qf = q as f64;
    Ok(HondaReport {
        q,
        primal_f: cf.lambda,
        dual_f: df.value,
        primal_neg_f: cn.lambda,
        dual_neg_f: dn.value,
        lower_exponent: cf.lambda,
        upper_exponent: -cn.lambda,
        gap: (df.value - cf.lambda).abs().max((dn.value - cn.lambda).abs()),
        comparison_high: qf + 2.0 * qf.sqrt() - 0.8984,
        comparison_low: qf - 2.0 * qf.sqrt() + 2.8984,
        certificate_f: cf,
        certificate_neg_f: cn,
    })
}
