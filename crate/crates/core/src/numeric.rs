//! Small numerical helpers: decimal I/O, tanh-sinh quadrature, scalar root finding.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Parse a decimal string (or plain JSON number text) into the nearest `f64`.
pub fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("not a decimal number: {s:?}")))
}

/// Shortest round-trip decimal text for `x`, always in positional notation.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:?}");
    match s.find(['e', 'E']) {
        None => s,
        Some(pos) => expand_exponent(&s[..pos], s[pos + 1..].parse().unwrap_or(0)),
    }
}

fn expand_exponent(mantissa: &str, exp: i32) -> String {
    let (neg, m) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa),
    };
    let (int_part, frac_part) = m.split_once('.').unwrap_or((m, ""));
    let digits: String = format!("{int_part}{frac_part}");
    let point = int_part.len() as i32 + exp;
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    if point <= 0 {
        out.push_str("0.");
        out.extend(std::iter::repeat('0').take((-point) as usize));
        out.push_str(digits.trim_end_matches('0'));
    } else if point as usize >= digits.len() {
        out.push_str(&digits);
        out.extend(std::iter::repeat('0').take(point as usize - digits.len()));
        out.push_str(".0");
    } else {
        out.push_str(&digits[..point as usize]);
        out.push('.');
        out.push_str(&digits[point as usize..]);
    }
    out
}

/// Tanh-sinh quadrature of `f` over `[a, b]`; tolerates integrable endpoint singularities.
///
/// `f` receives the abscissa together with its distances to `a` and `b`, computed
/// without cancellation so that singular factors can be evaluated accurately.
pub fn tanh_sinh<F>(f: F, a: f64, b: f64, tol: f64) -> (f64, f64)
where
    F: Fn(f64, f64, f64) -> f64,
{
    if b <= a {
        return (0.0, 0.0);
    }
    let half = 0.5 * (b - a);
    let tmax = 4.5;
    let eval_t = |t: f64| -> f64 {
        let u = 0.5 * PI * t.sinh();
        let cu = u.cosh();
        let w = 0.5 * PI * t.cosh() / (cu * cu);
        // distance to the nearer endpoint in units of `half`: 1 - tanh|u| = 2/(1+e^{2|u|})
        let e = (2.0 * u.abs()).exp();
        let near = 2.0 / (1.0 + e);
        let (da, db) = if u < 0.0 {
            (half * near, half * (2.0 - near))
        } else {
            (half * (2.0 - near), half * near)
        };
        if da <= 0.0 || db <= 0.0 {
            return 0.0;
        }
        let x = if u < 0.0 { a + da } else { b - db };
        let v = f(x, da, db);
        if v.is_finite() {
            v * w * half
        } else {
            0.0
        }
    };
    let mut h = 0.5;
    let n0 = (tmax / h) as i64;
    let mut sum: f64 = (-n0..=n0).map(|k| eval_t(k as f64 * h)).sum();
    let mut est = sum * h;
    let mut err = f64::INFINITY;
    for _ in 0..10 {
        h *= 0.5;
        let n = (tmax / h) as i64;
        let odd: f64 = (-n..=n)
            .filter(|k| k % 2 != 0)
            .map(|k| eval_t(k as f64 * h))
            .sum();
        sum += odd;
        let new = sum * h;
        err = (new - est).abs();
        est = new;
        if err <= tol * est.abs().max(1.0) {
            break;
        }
    }
    (est, err)
}

/// Brent's method on a bracketing interval.
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Domain(format!(
            "root not bracketed on [{a}, {b}] (f = {fa}, {fb})"
        )));
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..300 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            if 2.0 * p < (3.0 * xm * q - (tol1 * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
    }
    Err(Error::IterationLimit(format!("brent stalled near {b}")))
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        }
    }
    if f1 > f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// `log(exp(a) + exp(b))` without overflow.
pub fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Chebyshev points of the first kind mapped to `[a, b]`, ascending.
pub fn cheb_nodes(a: f64, b: f64, n: usize) -> Vec<f64> {
    let m = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    (0..n)
        .map(|i| m + h * (PI * ((i as f64 + 0.5) / n as f64 - 0.5)).sin())
        .collect()
}

/// Chebyshev extreme points (second kind) on `[a, b]`, ascending, endpoints included.
pub fn cheb_extrema(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 0 {
        return vec![0.5 * (a + b)];
    }
    let m = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut v: Vec<f64> = (0..=n)
        .map(|i| m + h * (PI * (i as f64 / n as f64 - 0.5)).sin())
        .collect();
    v[0] = a;
    v[n] = b;
    v
}


/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = x;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        xs[n - 1 - i] = x;
        ws[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (xs, ws)
}

/// Integrate a smooth `f` over `[a, b]` with an `n`-point Gauss-Legendre rule.
pub fn gauss_integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rule: &(Vec<f64>, Vec<f64>)) -> f64 {
    let m = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    rule.0
        .iter()
        .zip(&rule.1)
        .map(|(x, w)| w * f(m + h * x))
        .sum::<f64>()
        * h
}
