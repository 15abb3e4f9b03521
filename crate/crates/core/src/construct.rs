//! Irreducible monic integer polynomials with all roots in a finite union of intervals.
//!
//! A pruned approximating polynomial `P` of degree `n - m` is multiplied by a real
//! monic `Q` of degree `m` chosen so that the top coefficients of `PQ` are even
//! integers. The low coefficients are replaced by `4R - 2` with `R` an integer
//! polynomial close to `(low part of PQ)/4 + 1/2`, which makes the result
//! Eisenstein at 2. Roots are certified by exact isolation.

use crate::chebyshev::{chebyshev, local_extrema};
use crate::error::{failed, Error, Result};
use crate::interval::{capacity, IntervalUnion};
use crate::lattice::{
    adjust_to_integer, babai, integer_chebyshev, lll_reduce, squarefree_small_norm, CFix, LLL_DELTA,
};
use crate::measure::{cdf_distance, counting_measure_from_roots, potential, MixtureMeasure};
use crate::numeric::{cheb_extrema, cheb_nodes, fmt_f64};
use crate::poly::{
    approximating_polynomial, eisenstein_check, f64_to_dyadic, prune, real_root_points, real_roots,
    ChebExpansion, IntPolynomial, RealPolynomial, RootSet,
};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};
use std::f64::consts::PI;

/// Fractional bits of the fixed-point arithmetic used while forging `Q`.
pub const WORK_PRECISION: u32 = 768;
const W: u32 = WORK_PRECISION;

fn one() -> BigInt {
    BigInt::one() << W as usize
}

fn fixed(x: f64) -> BigInt {
    let (c, k) = f64_to_dyadic(x);
    let s = W as i64 - k as i64;
    if s >= 0 {
        c << s as usize
    } else {
        c >> (-s) as usize
    }
}

fn to_f64_fixed(x: &BigInt) -> f64 {
    crate::poly::big_to_f64_scaled(x, W as i64)
}

fn fmul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut r = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            r[i + j] += x * y;
        }
    }
    r.into_iter().map(|c| c >> W as usize).collect()
}

fn fadd(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| a.get(i).cloned().unwrap_or_default() + b.get(i).cloned().unwrap_or_default())
        .collect()
}

fn fscale(a: &[BigInt], s: &BigInt) -> Vec<BigInt> {
    a.iter().map(|c| (c * s) >> W as usize).collect()
}

/// Degree-`k` coefficient of `a * b`.
fn product_coeff(a: &[BigInt], b: &[BigInt], k: usize) -> BigInt {
    let mut acc = BigInt::zero();
    for (i, x) in a.iter().enumerate() {
        if i > k {
            break;
        }
        if let Some(y) = b.get(k - i) {
            acc += x * y;
        }
    }
    acc >> W as usize
}

fn to_fixed(p: &RealPolynomial) -> Vec<BigInt> {
    let s = W as i64 - p.precision() as i64;
    p.fixed_coeffs()
        .iter()
        .map(|c| if s >= 0 { c << s as usize } else { c >> (-s) as usize })
        .collect()
}

fn from_roots_fixed(roots: &[f64]) -> Vec<BigInt> {
    RealPolynomial::from_roots_with_precision(roots, W).fixed_coeffs().to_vec()
}

fn product_value(roots: &[f64], x: f64) -> f64 {
    roots.iter().map(|r| x - r).product()
}

/// Choice of parity correction at each step of the coefficient passes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParityChoice {
    /// Smallest nonnegative correction.
    Minimal,
    /// Whichever of the nearest corrections up or down keeps the witnesses largest.
    Greedy,
}

/// Levels `c_k` of the stepped product `prod_k (T - c_k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Levels {
    /// `c_k = k * A / (4 D0)` with `A` the smallest critical value of `T`.
    Stepped,
    /// `c_k = A cos(pi (2k+1) / (2 D0))`, so the product is `2^{1-D0} A^{D0} T_{D0}(T/A)`.
    ChebyshevSpread,
}

/// Starting polynomial of the first parity pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StartPolynomial {
    /// The Chebyshev polynomial `T_r` itself.
    Chebyshev,
    /// A degree-`r` pruned polynomial of `T_{r + 3 k0}`.
    Pruned,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdjusterOptions {
    pub d0: usize,
    pub parity: ParityChoice,
    pub levels: Levels,
    pub start: StartPolynomial,
}

impl AdjusterOptions {
    pub fn with_d0(d0: usize) -> Self {
        AdjusterOptions {
            d0,
            parity: ParityChoice::Greedy,
            levels: Levels::ChebyshevSpread,
            start: StartPolynomial::Chebyshev,
        }
    }
}

/// A real monic `Q` of degree `m` such that `PQ` has even integer coefficients in
/// degrees `[n - m, n - 1]`, with all roots in the set and away from the roots of `P`.
#[derive(Debug, Clone)]
pub struct AdjusterResult {
    pub q: RealPolynomial,
    pub roots: Vec<f64>,
    /// Smallest distance from a root of `Q` to a root of `P`.
    pub margin_to_p: f64,
    /// Smallest distance from a root of `Q` to the boundary of the set.
    pub margin_to_boundary: f64,
    /// `(min |Q(x)| / (kappa^m dist(x, roots)), max |Q(x)| / kappa^m)` over a grid on the set.
    pub norm_window: (f64, f64),
    /// Smallest `C` with `n^{-C} <= margins` and the window inside `[n^{-C}, n^C]`.
    pub exponent: f64,
    pub d0: usize,
    pub r: usize,
    pub shift_a: BigInt,
    pub shift_k: u64,
    /// `min T(x_i)/T~(x_i)` after the first pass and `min Q(y_i)/Q_0(y_i)` at the end.
    pub lambda_score: f64,
    pub final_score: f64,
    /// Witness points `y_i` (critical points of the stepped product).
    pub witnesses: Vec<f64>,
}

/// Fixed-point coefficients of `Q`, lifted to `precision` fractional bits.
impl AdjusterResult {
    pub fn to_json(&self) -> Value {
        json!({
            "degree": self.roots.len(),
            "coeffs": self.q.to_f64_coeffs().iter().map(|c| fmt_f64(*c)).collect::<Vec<_>>(),
            "roots": self.roots.iter().map(|r| fmt_f64(*r)).collect::<Vec<_>>(),
            "margin_to_p": fmt_f64(self.margin_to_p),
            "margin_to_boundary": fmt_f64(self.margin_to_boundary),
            "norm_window": [fmt_f64(self.norm_window.0), fmt_f64(self.norm_window.1)],
            "exponent": fmt_f64(self.exponent),
            "d0": self.d0,
            "r": self.r,
        })
    }
}

/// `(m, D0, r)` with `m = D0 r` and `m < n < kappa^{m/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Plan {
    pub m: usize,
    pub d0: usize,
    pub r: usize,
}

fn kappa_of(sigma: &IntervalUnion) -> Result<f64> {
    sigma.require_compact()?;
    let k = capacity(sigma)?.capacity;
    if k <= 1.0 {
        return Err(Error::Parameter(format!("capacity {k} must exceed 1")));
    }
    Ok(k)
}

fn window_ok(kappa: f64, n: usize, m: usize) -> bool {
    m < n && (n as f64).ln() < 0.5 * m as f64 * kappa.ln()
}

/// Parameter choice for degree `n`. `D0` is the smallest value from 2 up for which
/// the measured Chebyshev norms leave the second parity pass room:
/// `sum_{j <= m - r} 2 ||T_j|| <= min |Q_0(y_i)| / 2`, with `min |Q_0(y_i)|` estimated as
/// `2^{1 - D0} (0.9 ||T_r||)^{D0}`. `m` is the multiple of `D0` nearest `3n/4`, kept
/// inside the window `m < n < kappa^{m/2}`.
pub fn plan_parameters(sigma: &IntervalUnion, n: usize) -> Result<Plan> {
    let kappa = kappa_of(sigma)?;
    Ok(plan_ladder_with(sigma, n, kappa)?[0])
}

fn m_range(kappa: f64, n: usize, d0: usize) -> Option<(usize, usize)> {
    if n < 2 + d0 {
        return None;
    }
    let mut lo = d0;
    while !window_ok(kappa, n, lo) {
        lo += d0;
        if lo >= n {
            return None;
        }
    }
    let hi = ((n - 2) / d0) * d0;
    (hi >= lo).then_some((lo, hi))
}

fn target_m(n: usize, d0: usize, lo: usize, hi: usize) -> usize {
    ((0.75 * n as f64 / d0 as f64).round() as usize * d0).clamp(lo, hi)
}

struct NormTable<'a> {
    sigma: &'a IntervalUnion,
    norms: Vec<f64>,
}

impl NormTable<'_> {
    fn get(&mut self, j: usize) -> Result<f64> {
        while self.norms.len() <= j {
            self.norms.push(chebyshev(self.sigma, self.norms.len())?.norm0);
        }
        Ok(self.norms[j])
    }

    /// Smallest feasible `D0` for degree `n` with its `m` window.
    fn feasible(&mut self, kappa: f64, n: usize) -> Result<Option<(usize, usize, usize)>> {
        for d0 in 2..=6 {
            let Some((lo, hi)) = m_range(kappa, n, d0) else {
                continue;
            };
            let m = target_m(n, d0, lo, hi);
            let r = m / d0;
            let est = 2f64.powi(1 - d0 as i32) * (0.9 * self.get(r)?).powi(d0 as i32);
            let mut tail = 0.0;
            for j in 0..=m - r {
                tail += 2.0 * self.get(j)?;
            }
            if tail <= 0.5 * est {
                return Ok(Some((d0, lo, hi)));
            }
        }
        Ok(None)
    }
}

fn plan_ladder_with(sigma: &IntervalUnion, n: usize, kappa: f64) -> Result<Vec<Plan>> {
    let mut table = NormTable { sigma, norms: Vec::new() };
    let Some((d0, lo, hi)) = table.feasible(kappa, n)? else {
        let hint = (n + 1..=4 * n + 64)
            .find(|&k| matches!(table.feasible(kappa, k), Ok(Some(_))))
            .map_or(String::new(), |k| format!("; try n >= {k}"));
        return Err(Error::Parameter(format!(
            "no feasible (m, D0) for n = {n} at capacity {kappa}{hint}"
        )));
    };
    let target = target_m(n, d0, lo, hi);
    let mut ladder = vec![target];
    for step in 1..=3 {
        for m in [target + step * d0, target.saturating_sub(step * d0)] {
            if m >= lo && m <= hi && !ladder.contains(&m) {
                ladder.push(m);
            }
        }
    }
    let mut plans: Vec<Plan> = ladder.into_iter().map(|m| Plan { m, d0, r: m / d0 }).collect();
    // the neighbouring D0 as a last resort
    if let Some((lo1, hi1)) = m_range(kappa, n, d0 + 1) {
        let m = target_m(n, d0 + 1, lo1, hi1);
        plans.push(Plan { m, d0: d0 + 1, r: m / (d0 + 1) });
    }
    Ok(plans)
}

fn parity_candidates(c: &BigInt, choice: ParityChoice) -> Vec<BigInt> {
    let two = one() << 1;
    let rem = c.mod_floor(&two);
    let up = if rem.is_zero() { BigInt::zero() } else { &two - &rem };
    match choice {
        ParityChoice::Minimal => vec![up],
        ParityChoice::Greedy => {
            if rem.is_zero() {
                vec![BigInt::zero()]
            } else {
                vec![up, -rem]
            }
        }
    }
}

fn min_ratio(vals: &[f64], base: &[f64]) -> f64 {
    vals.iter()
        .zip(base)
        .map(|(v, b)| v / b)
        .fold(f64::INFINITY, f64::min)
}

/// Real roots of `f` in the gaps `(y_i, y_{i+1})` that lie inside one component.
fn roots_in_set<F: Fn(f64) -> f64>(f: &F, ys: &[f64], sigma: &IntervalUnion) -> Vec<f64> {
    let mut out = Vec::new();
    for w in ys.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        match (sigma.component_of(a), sigma.component_of(b)) {
            (Some(i), Some(j)) if i == j => {}
            _ => continue,
        }
        let mut fa = f(a);
        let fb = f(b);
        if fa == 0.0 || fb == 0.0 || fa.signum() == fb.signum() {
            continue;
        }
        for _ in 0..80 {
            let c = 0.5 * (a + b);
            if c <= a || c >= b {
                break;
            }
            let fc = f(c);
            if fa.signum() == fc.signum() {
                a = c;
                fa = fc;
            } else {
                b = c;
            }
        }
        out.push(0.5 * (a + b));
    }
    out
}

fn boundary_points(sigma: &IntervalUnion) -> Vec<f64> {
    sigma.components().iter().flat_map(|&(a, b)| [a, b]).collect()
}

fn min_dist(xs: &[f64], ys: &[f64]) -> f64 {
    let mut best = f64::INFINITY;
    for x in xs {
        for y in ys {
            best = best.min((x - y).abs());
        }
    }
    best
}

/// [`forge_adjuster_with`] using the planned `D0` when it divides `m`.
pub fn forge_adjuster(p: &RealPolynomial, sigma: &IntervalUnion, n: usize, m: usize) -> Result<AdjusterResult> {
    let planned = plan_parameters(sigma, n).map(|pl| pl.d0).unwrap_or(2);
    let d0 = [planned, 3, 2, 1].into_iter().find(|d| m % d == 0).unwrap_or(1);
    forge_adjuster_with(p, sigma, n, m, &AdjusterOptions::with_d0(d0))
}

pub fn forge_adjuster_with(
    p: &RealPolynomial,
    sigma: &IntervalUnion,
    n: usize,
    m: usize,
    opts: &AdjusterOptions,
) -> Result<AdjusterResult> {
    let kappa = kappa_of(sigma)?;
    if !window_ok(kappa, n, m) {
        return Err(Error::Parameter(format!(
            "need m < n < kappa^(m/2); got m = {m}, n = {n}, kappa = {kappa}"
        )));
    }
    let d0 = opts.d0.max(1);
    if m % d0 != 0 {
        return Err(Error::Parameter(format!("m = {m} is not divisible by D0 = {d0}")));
    }
    let d = n - m;
    if p.deg() != d || !p.is_monic() {
        return Err(Error::Degree(format!("P must be monic of degree {d}")));
    }
    let p_roots = real_root_points(p)?;
    let pf = to_fixed(p);
    let comps = sigma.components();
    let k0 = comps.len();
    let (lo, hi) = sigma.hull();
    let r = m / d0;

    // Chebyshev family and the starting polynomial
    let top_j = (m - r).max(r + 3 * k0);
    let mut t_roots: Vec<Vec<f64>> = Vec::with_capacity(top_j + 1);
    for j in 0..=top_j {
        let c = chebyshev(sigma, j)?;
        t_roots.push(c.t.roots().map(|x| x.to_vec()).unwrap_or_default());
    }
    let t_fixed: Vec<Vec<BigInt>> = t_roots.iter().map(|rs| from_roots_fixed(rs)).collect();
    let start_roots = match opts.start {
        StartPolynomial::Chebyshev => t_roots[r].clone(),
        StartPolynomial::Pruned => {
            let big = RealPolynomial::from_roots(&t_roots[r + 3 * k0]);
            real_root_points(&prune(&big, sigma, r)?)?
        }
    };
    let start_f = |x: f64| product_value(&start_roots, x);
    let xw: Vec<f64> = local_extrema(&start_f, &comps, 16 * (r + 2))
        .into_iter()
        .map(|e| e.0)
        .collect();
    let base: Vec<f64> = xw.iter().map(|&x| start_f(x)).collect();

    // first parity pass: T + lambda_{r-j} T_{r-j}
    let mut t = from_roots_fixed(&start_roots);
    let mut tvals = base.clone();
    let mut lambda_score = f64::INFINITY;
    for j in 1..=r {
        let mut td = vec![one()];
        for _ in 0..d0 {
            td = fmul(&td, &t);
        }
        let c = product_coeff(&td, &pf, n - j);
        let sv: Vec<f64> = xw.iter().map(|&x| product_value(&t_roots[r - j], x)).collect();
        let mut best: Option<(f64, BigInt, Vec<f64>)> = None;
        for dl in parity_candidates(&c, opts.parity) {
            let lam = dl.div_floor(&BigInt::from(d0));
            let lf = to_f64_fixed(&lam);
            let vals: Vec<f64> = tvals.iter().zip(&sv).map(|(v, s)| v + lf * s).collect();
            let score = min_ratio(&vals, &base);
            if best.as_ref().is_none_or(|b| score > b.0) {
                best = Some((score, lam, vals));
            }
        }
        let (score, lam, vals) = best.expect("at least one candidate");
        t = fadd(&t, &fscale(&t_fixed[r - j], &lam));
        tvals = vals;
        lambda_score = lambda_score.min(score);
    }
    if lambda_score <= 0.0 {
        return Err(failed("lambda-pass", format!("witness ratio fell to {lambda_score}")));
    }

    // stepped product
    let t_exp = ChebExpansion::new(&t, W as i64, lo, hi);
    let t_eval = |x: f64| t_exp.eval(x);
    let crit = local_extrema(&t_eval, &comps, 16 * (r + 2));
    let amp = crit
        .iter()
        .filter(|e| e.0 > lo && e.0 < hi)
        .map(|e| e.1.abs())
        .fold(f64::INFINITY, f64::min);
    let amp = if amp.is_finite() { 0.98 * amp } else { 0.98 * t_eval(hi).abs() };
    let levels: Vec<f64> = (0..d0)
        .map(|k| match opts.levels {
            Levels::Stepped => k as f64 * amp / (4.0 * d0 as f64),
            Levels::ChebyshevSpread => amp * (PI * (2 * k + 1) as f64 / (2 * d0) as f64).cos(),
        })
        .collect();
    let mut q = vec![one()];
    for &c in &levels {
        let mut f = t.clone();
        f[0] -= fixed(c);
        q = fmul(&q, &f);
    }
    let q0_eval = |x: f64| levels.iter().map(|c| t_eval(x) - c).product::<f64>();
    let yw: Vec<f64> = local_extrema(&q0_eval, &comps, 16 * (m + 2))
        .into_iter()
        .map(|e| e.0)
        .collect();
    let qb: Vec<f64> = yw.iter().map(|&y| q0_eval(y)).collect();

    // second parity pass: Q + eps_j T_j
    let mut qvals = qb.clone();
    for j in (0..=m - r).rev() {
        let c = product_coeff(&q, &pf, d + j);
        let tj: Vec<f64> = yw.iter().map(|&y| product_value(&t_roots[j], y)).collect();
        let mut best: Option<(f64, BigInt, Vec<f64>)> = None;
        for e in parity_candidates(&c, opts.parity) {
            let ef = to_f64_fixed(&e);
            let vals: Vec<f64> = qvals.iter().zip(&tj).map(|(v, s)| v + ef * s).collect();
            let score = min_ratio(&vals, &qb);
            if best.as_ref().is_none_or(|b| score > b.0) {
                best = Some((score, e, vals));
            }
        }
        let (_, e, vals) = best.expect("at least one candidate");
        q = fadd(&q, &fscale(&t_fixed[j], &e));
        qvals = vals;
    }

    // shift by k a, k chosen for root separation
    let min_q0 = qb.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
    let a_half = (min_q0 / (8.0 * m as f64 * (k0 + n) as f64)).floor();
    let shift_a = BigInt::from(2) * BigInt::from(a_half.max(1.0) as u64);
    let af = shift_a.to_f64().unwrap_or(2.0);
    let q1_exp = ChebExpansion::new(&q, W as i64, lo, hi);
    let bounds = boundary_points(sigma);
    let kmax = (m * (k0 + n)) as u64;
    let samples: Vec<u64> = if kmax <= 256 {
        (0..=kmax).collect()
    } else {
        (0..=256).map(|i| i * kmax / 256).collect()
    };
    let mut best: Option<(f64, u64, Vec<f64>)> = None;
    for k in samples {
        let s = k as f64 * af;
        let f = |x: f64| q1_exp.eval(x) + s;
        let rts = roots_in_set(&f, &yw, sigma);
        if rts.len() != m {
            continue;
        }
        let sep = min_dist(&rts, &p_roots).min(min_dist(&rts, &bounds));
        if best.as_ref().is_none_or(|b| sep > b.0) {
            best = Some((sep, k, rts));
        }
    }
    let (_, shift_k, roots) = best.ok_or_else(|| failed("k-shift", "no shift keeps all m roots in the set"))?;
    q[0] += &shift_a * BigInt::from(shift_k) << W as usize;
    let shift = shift_k as f64 * af;
    let final_score = min_ratio(
        &qvals.iter().map(|v| v + shift).collect::<Vec<_>>(),
        &qb,
    );
    if final_score < 0.25 {
        return Err(failed("verify", format!("Q(y)/Q0(y) fell to {final_score}")));
    }

    let margin_to_p = min_dist(&roots, &p_roots);
    let margin_to_boundary = min_dist(&roots, &bounds);
    let km = kappa.powi(m as i32);
    let q_exp = ChebExpansion::new(&q, W as i64, lo, hi);
    let (mut wlo, mut whi) = (f64::INFINITY, 0.0f64);
    for &(a, b) in &comps {
        for x in cheb_extrema(a, b, 24 * m + 64) {
            let v = q_exp.eval(x).abs();
            let dist = roots.iter().map(|r| (x - r).abs()).fold(f64::INFINITY, f64::min);
            whi = whi.max(v / km);
            if dist > 0.0 {
                wlo = wlo.min(v / (km * dist));
            }
        }
    }
    let ln_n = (n as f64).ln();
    let exponent = [
        -margin_to_p.min(margin_to_boundary).ln() / ln_n,
        whi.ln() / ln_n,
        -wlo.ln() / ln_n,
    ]
    .into_iter()
    .fold(0.0, f64::max);
    Ok(AdjusterResult {
        q: RealPolynomial::from_fixed(q, W),
        roots,
        margin_to_p,
        margin_to_boundary,
        norm_window: (wlo, whi),
        exponent,
        d0,
        r,
        shift_a,
        shift_k,
        lambda_score,
        final_score,
        witnesses: yw,
    })
}

/// How the low coefficients were replaced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LowRoute {
    /// Adjustment against a squarefree small-norm polynomial of degree `n - m`.
    SquarefreeAdjust,
    /// Nearest-plane rounding against weighted values at Chebyshev nodes of the set.
    EvaluationLattice,
}

impl LowRoute {
    pub fn name(self) -> &'static str {
        match self {
            LowRoute::SquarefreeAdjust => "squarefree-adjust",
            LowRoute::EvaluationLattice => "evaluation-lattice",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConstructionReport {
    pub p_n: IntPolynomial,
    pub degree: usize,
    pub roots: RootSet,
    /// Distance from each isolating interval to the complement of the set.
    pub membership_margins: Vec<f64>,
    pub cdf_dist: f64,
    pub eisenstein_prime: u64,
    /// Trace over degree, `-a_{n-1}/n`.
    pub trace_ratio: f64,
    pub plan: Plan,
    pub low_route: LowRoute,
    pub beta_l1: Option<f64>,
    pub adjuster_exponent: f64,
}

impl ConstructionReport {
    pub fn to_json(&self) -> Value {
        json!({
            "degree": self.degree,
            "coeffs": self.p_n.to_strings(),
            "roots": self.roots.roots.iter().map(|r| json!({
                "lo": r.lo.to_decimal().to_string(),
                "hi": r.hi.to_decimal().to_string(),
            })).collect::<Vec<_>>(),
            "margins": self.membership_margins.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>(),
            "cdf_distance": fmt_f64(self.cdf_dist),
            "trace_ratio": fmt_f64(self.trace_ratio),
            "eisenstein_prime": self.eisenstein_prime,
            "m": self.plan.m,
            "d0": self.plan.d0,
            "low_route": self.low_route.name(),
        })
    }
}

/// Build and certify an Eisenstein polynomial of degree `n` with every root in `sigma`.
/// Parameter choices follow [`plan_parameters`]; on failure nearby `(m, D0)` are tried.
pub fn construct(mu: &MixtureMeasure, sigma: &IntervalUnion, n: usize) -> Result<ConstructionReport> {
    let kappa = kappa_of(sigma)?;
    mu.validate()?;
    let plans = plan_ladder_with(sigma, n, kappa)?;
    let mut notes = Vec::new();
    let mut escaped = false;
    for plan in plans {
        match construct_with(mu, sigma, n, plan, &AdjusterOptions::with_d0(plan.d0)) {
            Ok(rep) => return Ok(rep),
            Err(e) => {
                escaped |= matches!(e, Error::RootEscape(_));
                notes.push(format!("m={} D0={}: {e}", plan.m, plan.d0));
            }
        }
    }
    if escaped {
        return Err(Error::RootEscape(format!(
            "{}; a larger n may succeed",
            notes.join("; ")
        )));
    }
    Err(failed("construct", notes.join("; ")))
}

/// One construction attempt with fixed parameters.
pub fn construct_with(
    mu: &MixtureMeasure,
    sigma: &IntervalUnion,
    n: usize,
    plan: Plan,
    opts: &AdjusterOptions,
) -> Result<ConstructionReport> {
    let m = plan.m;
    let d = n - m;
    let k0 = sigma.component_count();
    let p = if d == 0 {
        RealPolynomial::from_roots(&[])
    } else {
        prune(&approximating_polynomial(mu, d + 2 * k0)?, sigma, d)?
    };
    let adj = forge_adjuster_with(&p, sigma, n, m, opts)?;
    let pq = fmul(&to_fixed(&adj.q), &to_fixed(&p));
    // top coefficients must be even integers up to rounding noise
    let mut top = Vec::with_capacity(m + 1);
    for (i, c) in pq.iter().enumerate().skip(d) {
        let (qt, rem) = c.div_mod_floor(&one());
        let (rounded, err) = if rem > (one() >> 1) {
            (qt + 1, one() - rem)
        } else {
            (qt, rem)
        };
        if i < n && (err.bits() > (W / 2) as u64 || rounded.is_odd()) {
            return Err(failed("parity", format!("coefficient {i} is not an even integer")));
        }
        top.push(rounded);
    }
    // L = low/4 + 1/2 at precision W + 2
    let mut low: Vec<BigInt> = pq[..d].to_vec();
    if d > 0 {
        low[0] += one() << 1;
    }
    let l = RealPolynomial::from_fixed(low, W + 2);

    let qp_roots = {
        let mut v = adj.roots.clone();
        v.extend(real_root_points(&p)?);
        v.sort_by(f64::total_cmp);
        v
    };
    let mut routes: Vec<(LowRoute, Result<(IntPolynomial, Option<f64>)>)> = Vec::new();
    if d >= 2 {
        let attempt = squarefree_small_norm(mu, sigma, d)
            .and_then(|pd| adjust_to_integer(&l, &pd))
            .map(|a| (a.r, Some(a.beta_l1)));
        routes.push((LowRoute::SquarefreeAdjust, attempt));
    }
    let mut notes = Vec::new();
    for route in [LowRoute::SquarefreeAdjust, LowRoute::EvaluationLattice] {
        let got = match route {
            LowRoute::SquarefreeAdjust => match routes.pop() {
                Some((_, r)) => r,
                None => continue,
            },
            LowRoute::EvaluationLattice => evaluation_lattice(&l, d, mu, sigma, n).map(|r| (r, None)),
        };
        let (r, beta_l1) = match got {
            Ok(v) => v,
            Err(e) => {
                notes.push(format!("{}: {e}", route.name()));
                continue;
            }
        };
        let p_n = assemble(&top, &r, d, n);
        match certify(&p_n, sigma, &qp_roots) {
            Ok((roots, margins)) => {
                let mids: Vec<Complex64> = roots
                    .roots
                    .iter()
                    .map(|r| Complex64::new(r.mid_f64(), 0.0))
                    .collect();
                let cdf = cdf_distance(&counting_measure_from_roots(&mids), mu);
                let trace = -p_n.coeff(n - 1).to_f64().unwrap_or(f64::NAN) / n as f64;
                return Ok(ConstructionReport {
                    degree: n,
                    p_n,
                    roots,
                    membership_margins: margins,
                    cdf_dist: cdf,
                    eisenstein_prime: 2,
                    trace_ratio: trace,
                    plan,
                    low_route: route,
                    beta_l1,
                    adjuster_exponent: adj.exponent,
                });
            }
            Err(e) => notes.push(format!("{}: {e}", route.name())),
        }
    }
    Err(Error::RootEscape(notes.join("; ")))
}

/// `z^n + sum_{i >= d} top_i z^i + 4R - 2`.
fn assemble(top: &[BigInt], r: &IntPolynomial, d: usize, n: usize) -> IntPolynomial {
    let mut c = vec![BigInt::zero(); n + 1];
    for (i, t) in top.iter().enumerate() {
        c[d + i] = t.clone();
    }
    c[n] = BigInt::one();
    for i in 0..d {
        c[i] = r.coeff(i) * 4;
    }
    c[0] -= 2;
    IntPolynomial::new(c)
}

/// Eisenstein at 2, sign alternation at witnesses, then exact isolation of all `n`
/// roots inside the set.
fn certify(p_n: &IntPolynomial, sigma: &IntervalUnion, qp_roots: &[f64]) -> Result<(RootSet, Vec<f64>)> {
    let n = p_n.deg();
    if !eisenstein_check(p_n, 2)? {
        return Err(failed("eisenstein", "not Eisenstein at 2"));
    }
    // quick rejection: one sign change between consecutive merged roots
    let mut ws = Vec::with_capacity(qp_roots.len() + 1);
    for (a, b) in sigma.components() {
        let inside: Vec<f64> = qp_roots.iter().cloned().filter(|x| *x > a && *x < b).collect();
        ws.push(a);
        ws.extend(inside.windows(2).map(|w| 0.5 * (w[0] + w[1])));
        ws.push(b);
    }
    let signs: Vec<i32> = ws.iter().map(|&x| p_n.sign_at_f64(x)).collect();
    let changes = signs.windows(2).filter(|s| s[0] * s[1] < 0).count();
    if changes < n {
        return Err(Error::RootEscape(format!("only {changes} of {n} sign changes at witnesses")));
    }
    let roots = real_roots(p_n, 1e-12)?;
    if roots.real_count() != n {
        return Err(Error::RootEscape(format!("{} real roots of {n}", roots.real_count())));
    }
    let mut margins = Vec::with_capacity(n);
    for r in &roots.roots {
        let (lo, hi) = (r.lo.to_decimal(), r.hi.to_decimal());
        let hit = sigma.intervals().iter().find(|iv| iv.lo < lo && hi < iv.hi);
        match hit {
            Some(iv) => {
                let (a, b) = iv.bounds();
                margins.push((r.lo_f64() - a).min(b - r.hi_f64()));
            }
            None => {
                return Err(Error::RootEscape(format!(
                    "root in [{}, {}] is not strictly inside the set",
                    r.lo_f64(),
                    r.hi_f64()
                )))
            }
        }
    }
    Ok((roots, margins))
}

/// Integer `R` of degree `< d` near `L` in the weighted sup sense: nearest-plane
/// rounding of the values `w(x) L(x)` at Chebyshev nodes of each component.
fn evaluation_lattice(l: &RealPolynomial, d: usize, mu: &MixtureMeasure, sigma: &IntervalUnion, n: usize) -> Result<IntPolynomial> {
    if d == 0 {
        return Ok(IntPolynomial::zero());
    }
    let prec = l.precision();
    let comps = sigma.components();
    let mut nodes = Vec::new();
    for &(a, b) in &comps {
        if b > a {
            nodes.extend(cheb_nodes(a, b, 3 * d));
        } else {
            nodes.push(a);
        }
    }
    let lw: Vec<f64> = nodes.iter().map(|&x| n as f64 * potential(mu, x).value).collect();
    let top = lw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = sigma.hull();
    let c = (0.5 * (lo + hi)).round() as i64;
    let cols: Vec<(Vec<BigInt>, BigInt)> = nodes
        .iter()
        .zip(&lw)
        .map(|(&x, l_w)| {
            let w = CFix::from_c64(Complex64::new((l_w - top).exp(), 0.0), prec);
            let y = CFix::from_c64(Complex64::new(x - c as f64, 0.0), prec);
            let vals = crate::lattice::integer_chebyshev_values(&y, d, prec)
                .into_iter()
                .map(|v| v.mul(&w, prec).re)
                .collect();
            let z = CFix::from_c64(Complex64::new(x, 0.0), prec);
            let lv = crate::lattice::eval_fixed(l.fixed_coeffs(), &z, prec).mul(&w, prec).re;
            (vals, lv)
        })
        .collect();
    let emb: Vec<Vec<BigInt>> = (0..d).map(|k| cols.iter().map(|c| c.0[k].clone()).collect()).collect();
    let target: Vec<BigInt> = cols.iter().map(|c| c.1.clone()).collect();
    let coords: Vec<Vec<BigInt>> = (0..d)
        .map(|i| (0..d).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();
    let red = lll_reduce(coords, emb, prec as i64, LLL_DELTA);
    let (comb, _) = babai(&red, &target);
    let mut r = IntPolynomial::zero();
    for (k, ck) in comb.iter().enumerate() {
        if !ck.is_zero() {
            r = &r + &integer_chebyshev(k, c).scale(ck);
        }
    }
    if r.coeffs().iter().any(|x| x.abs().bits() > 4 * W as u64) {
        return Err(failed("evaluation-lattice", "rounding diverged"));
    }
    Ok(r)
}
