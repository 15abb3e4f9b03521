//! Monic Chebyshev polynomials (least sup-norm on a set) by Remez exchange.

use crate::error::{Error, Result};
use crate::interval::IntervalUnion;
use crate::linalg::solve_dense;
use crate::numeric::{cheb_extrema, golden_max};
use crate::poly::RealPolynomial;
use std::f64::consts::PI;

/// Chebyshev polynomial `T_r` of a set together with an alternation set.
#[derive(Debug, Clone)]
pub struct ChebyshevResult {
    pub t: RealPolynomial,
    pub alternation_points: Vec<f64>,
    pub norm0: f64,
    /// Relative gap between the sup norm and the levelled reference error.
    pub residual: f64,
}

// the levelled system is solved in doubles; gaps stall near 1e-11 for r ~ 20
const TOL: f64 = 1e-9;

/// Monic polynomial in the hull Chebyshev basis: `lead T_r(s) + sum c_k T_k(s)`.
struct HullPoly {
    m: f64,
    h: f64,
    c: Vec<f64>,
}

impl HullPoly {
    fn eval(&self, x: f64) -> f64 {
        let s = (x - self.m) / self.h;
        let (mut b1, mut b2) = (0.0, 0.0);
        for k in (1..self.c.len()).rev() {
            let b0 = self.c[k] + 2.0 * s * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        self.c[0] + s * b1 - b2
    }
}

fn cheb_t(k: usize, s: f64) -> f64 {
    if s.abs() <= 1.0 {
        (k as f64 * s.acos()).cos()
    } else {
        let t = s.abs().acosh() * k as f64;
        let v = t.cosh();
        if s < 0.0 && k % 2 == 1 {
            -v
        } else {
            v
        }
    }
}

/// Roots of a continuous `f` between consecutive sign-alternating points.
fn roots_between<F: Fn(f64) -> f64>(f: F, pts: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for w in pts.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        let mut fa = f(a);
        if fa == 0.0 {
            out.push(a);
            continue;
        }
        if fa * f(b) > 0.0 {
            continue;
        }
        for _ in 0..200 {
            let c = 0.5 * (a + b);
            if c <= a || c >= b {
                break;
            }
            let fc = f(c);
            if fa * fc <= 0.0 {
                b = c;
            } else {
                a = c;
                fa = fc;
            }
        }
        out.push(0.5 * (a + b));
    }
    out
}

/// Local extrema of `|f|` on each component (endpoints included), sorted by position.
pub(crate) fn local_extrema<F: Fn(f64) -> f64>(f: &F, comps: &[(f64, f64)], per: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for &(a, b) in comps {
        if b <= a {
            out.push((a, f(a)));
            continue;
        }
        let xs = cheb_extrema(a, b, per);
        let vs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        out.push((a, vs[0]));
        for i in 1..xs.len() - 1 {
            let (l, c, r) = (vs[i - 1].abs(), vs[i].abs(), vs[i + 1].abs());
            if c >= l && c >= r && c > 0.0 {
                let sign = vs[i].signum();
                let (x, _) = golden_max(|x| sign * f(x), xs[i - 1], xs[i + 1], 80);
                out.push((x, f(x)));
            }
        }
        out.push((b, vs[xs.len() - 1]));
    }
    out.sort_by(|p, q| p.0.total_cmp(&q.0));
    out
}

/// The monic degree-`r` polynomial of least sup norm on `sigma`.
pub fn chebyshev(sigma: &IntervalUnion, r: usize) -> Result<ChebyshevResult> {
    sigma.require_compact()?;
    let comps = sigma.components();
    if comps.is_empty() {
        return Err(Error::EmptySet);
    }
    let (lo, hi) = sigma.hull();
    if r == 0 {
        return Ok(ChebyshevResult {
            t: RealPolynomial::from_roots(&[]),
            alternation_points: vec![lo],
            norm0: 1.0,
            residual: 0.0,
        });
    }
    if comps.len() == 1 && hi > lo {
        return Ok(interval_chebyshev(lo, hi, r));
    }
    remez(&comps, lo, hi, r)
}

fn interval_chebyshev(a: f64, b: f64, r: usize) -> ChebyshevResult {
    let m = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let roots: Vec<f64> = (1..=r)
        .map(|k| m - h * (PI * (2 * k - 1) as f64 / (2 * r) as f64).cos())
        .collect();
    let pts = cheb_extrema(a, b, r);
    ChebyshevResult {
        t: RealPolynomial::from_roots(&roots),
        alternation_points: pts,
        norm0: 2.0 * (0.5 * h).powi(r as i32),
        residual: 0.0,
    }
}

fn initial_reference(comps: &[(f64, f64)], r: usize) -> Vec<f64> {
    // points per component in proportion to the equilibrium mass of each component
    let masses = crate::interval::UnionEquilibrium::solve(comps, 16)
        .map(|u| u.masses)
        .unwrap_or_else(|_| {
            let tot: f64 = comps.iter().map(|c| c.1 - c.0).sum();
            comps.iter().map(|c| (c.1 - c.0) / tot).collect()
        });
    let total = r + 1;
    let mut counts: Vec<usize> = masses.iter().map(|w| (w * total as f64).floor() as usize).collect();
    let mut left = total - counts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..comps.len()).collect();
    order.sort_by(|&i, &j| {
        let fi = masses[i] * total as f64 - counts[i] as f64;
        let fj = masses[j] * total as f64 - counts[j] as f64;
        fj.total_cmp(&fi)
    });
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        counts[i] += 1;
        left -= 1;
    }
    let mut pts = Vec::with_capacity(total);
    for (&(a, b), &c) in comps.iter().zip(&counts) {
        match c {
            0 => {}
            1 => pts.push(0.5 * (a + b)),
            _ => pts.extend(cheb_extrema(a, b, c - 1)),
        }
    }
    pts.sort_by(f64::total_cmp);
    pts
}

fn level(ref_pts: &[f64], m: f64, h: f64, r: usize) -> Option<(HullPoly, f64)> {
    let lead = 2f64.powi(1 - r as i32) * h.powi(r as i32);
    let nrow = r + 1;
    let mut a = vec![vec![0.0; nrow]; nrow];
    let mut rhs = vec![0.0; nrow];
    for (i, &x) in ref_pts.iter().enumerate() {
        let s = (x - m) / h;
        for (k, cell) in a[i].iter_mut().take(r).enumerate() {
            *cell = cheb_t(k, s);
        }
        a[i][r] = if (r - i) % 2 == 0 { -1.0 } else { 1.0 };
        rhs[i] = -lead * cheb_t(r, s);
    }
    let sol = solve_dense(a, rhs)?;
    let mut c = sol[..r].to_vec();
    c.push(lead);
    Some((HullPoly { m, h, c }, sol[r]))
}

fn remez(comps: &[(f64, f64)], lo: f64, hi: f64, r: usize) -> Result<ChebyshevResult> {
    let m = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let per = 16 * (r + 2);
    let mut refs = initial_reference(comps, r);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for _ in 0..60 * (r + 1) {
        let (p, e) = level(&refs, m, h, r)
            .ok_or_else(|| Error::IterationLimit("singular Remez reference".into()))?;
        let f = |x: f64| p.eval(x);
        let ext = local_extrema(&f, comps, per);
        let (xmax, vmax) = ext
            .iter()
            .cloned()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .unwrap_or((lo, 0.0));
        let norm = vmax.abs();
        let gap = (norm - e.abs()) / norm;
        if best.as_ref().is_none_or(|b| norm < b.0) {
            best = Some((norm, refs.clone()));
        }
        if gap <= TOL {
            let t_roots = roots_between(f, &refs);
            if t_roots.len() != r {
                break;
            }
            return Ok(ChebyshevResult {
                t: RealPolynomial::from_roots(&t_roots),
                alternation_points: refs,
                norm0: norm,
                residual: gap,
            });
        }
        refs = exchange(&ext, &refs, xmax, vmax, &f, r);
    }
    Err(Error::IterationLimit(format!(
        "Remez exchange did not level (best sup norm {:e})",
        best.map_or(f64::NAN, |b| b.0)
    )))
}

/// New reference: alternating local extrema, trimmed to `r + 1` points. Falls back
/// to a single-point exchange of the global maximum when too few alternate.
fn exchange<F: Fn(f64) -> f64>(ext: &[(f64, f64)], refs: &[f64], xmax: f64, vmax: f64, f: &F, r: usize) -> Vec<f64> {
    let mut alt: Vec<(f64, f64)> = Vec::new();
    for &(x, v) in ext {
        if v == 0.0 {
            continue;
        }
        match alt.last_mut() {
            Some(last) if last.1.signum() == v.signum() => {
                if v.abs() > last.1.abs() {
                    *last = (x, v);
                }
            }
            _ => alt.push((x, v)),
        }
    }
    while alt.len() > r + 1 {
        if alt[0].1.abs() < alt[alt.len() - 1].1.abs() {
            alt.remove(0);
        } else {
            alt.pop();
        }
    }
    if alt.len() == r + 1 && alt.iter().any(|p| p.0 == xmax) {
        return alt.into_iter().map(|p| p.0).collect();
    }
    // single exchange
    let mut out = refs.to_vec();
    let s = vmax.signum();
    let same = |x: f64| f(x).signum() == s;
    match out.iter().position(|&x| x > xmax) {
        Some(0) => {
            if same(out[0]) {
                out[0] = xmax;
            } else {
                out.insert(0, xmax);
                out.pop();
            }
        }
        None => {
            let last = out.len() - 1;
            if same(out[last]) {
                out[last] = xmax;
            } else {
                out.push(xmax);
                out.remove(0);
            }
        }
        Some(i) => {
            if same(out[i - 1]) {
                out[i - 1] = xmax;
            } else {
                out[i] = xmax;
            }
        }
    }
    out
}
