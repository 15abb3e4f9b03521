use super::int::sign_of;
use super::IntPolynomial;
use crate::error::{domain, Result};
use bigdecimal::BigDecimal;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, Zero};

/// Dyadic number `c * 2^w`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dyadic {
    pub c: BigInt,
    pub w: i64,
}

impl Dyadic {
    pub fn to_decimal(&self) -> BigDecimal {
        if self.w >= 0 {
            BigDecimal::new(&self.c << self.w as usize, 0)
        } else {
            let k = (-self.w) as u32;
            BigDecimal::new(&self.c * num_traits::pow(BigInt::from(5), k as usize), k as i64).normalized()
        }
    }

    pub fn to_f64(&self) -> f64 {
        super::int::big_to_f64_scaled(&self.c, -self.w)
    }
}

/// One real root: it lies in `[lo, hi]` (equal endpoints for an exactly located root).
#[derive(Debug, Clone, PartialEq)]
pub struct IsolatedRoot {
    pub lo: Dyadic,
    pub hi: Dyadic,
    pub multiplicity: usize,
}

impl IsolatedRoot {
    pub fn lo_f64(&self) -> f64 {
        self.lo.to_f64()
    }
    pub fn hi_f64(&self) -> f64 {
        self.hi.to_f64()
    }
    pub fn mid_f64(&self) -> f64 {
        0.5 * (self.lo_f64() + self.hi_f64())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RootSet {
    pub roots: Vec<IsolatedRoot>,
    /// Number of non-real roots counted with multiplicity.
    pub complex_count: usize,
}

impl RootSet {
    pub fn real_count(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }
}

fn taylor_shift_one(c: &mut [BigInt]) {
    let n = c.len();
    for i in 0..n {
        for j in (i..n - 1).rev() {
            let t = c[j + 1].clone();
            c[j] += t;
        }
    }
}

fn sign_variations(c: &[BigInt]) -> usize {
    let mut last = 0;
    let mut v = 0;
    for x in c {
        let s = sign_of(x);
        if s != 0 {
            if last != 0 && s != last {
                v += 1;
            }
            last = s;
        }
    }
    v
}

/// Descartes bound on the number of roots in `(0, 1)`.
fn descartes01(q: &[BigInt]) -> usize {
    let mut r: Vec<BigInt> = q.iter().rev().cloned().collect();
    taylor_shift_one(&mut r);
    sign_variations(&r)
}

fn strip_twos(q: &mut [BigInt]) {
    let tz = q
        .iter()
        .filter(|x| !x.is_zero())
        .map(|x| x.trailing_zeros().unwrap_or(0))
        .min()
        .unwrap_or(0);
    if tz > 0 {
        for x in q.iter_mut() {
            *x >>= tz as usize;
        }
    }
}

/// `2^n Q(x/2)`, the left half mapped to `(0, 1)`.
fn left_half(q: &[BigInt]) -> Vec<BigInt> {
    let n = q.len() - 1;
    q.iter().enumerate().map(|(i, x)| x << (n - i)).collect()
}

struct Node {
    q: Vec<BigInt>,
    c: BigInt,
    w: i64,
}

enum Found {
    Interval(BigInt, i64),
    Exact(Dyadic),
}

/// Isolate the real roots of a squarefree polynomial; results sorted ascending.
fn isolate_squarefree(p: &IntPolynomial) -> Vec<Found> {
    let n = p.deg();
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    // Cauchy bound 1 + max |a_i / a_n| rounded up to a power of two
    let lead = p.lead().abs();
    let maxc = p.coeffs()[..n].iter().map(|x| x.abs()).max().unwrap_or_default();
    let ratio = (&maxc / &lead) + 2u32;
    let e = ratio.bits() as i64;
    let mut c0 = p.coeffs().to_vec();
    if c0[0].is_zero() {
        out.push(Found::Exact(Dyadic {
            c: BigInt::zero(),
            w: 0,
        }));
        c0.remove(0);
    }
    if c0.len() > 1 {
        // positive roots: Q(x) = P(2^e x); negative roots: Q(x) = P(-2^e x), mirrored back
        for mirror in [true, false] {
            let q: Vec<BigInt> = c0
                .iter()
                .enumerate()
                .map(|(i, a)| {
                    let v = a << (e as usize * i);
                    if mirror && i % 2 == 1 {
                        -v
                    } else {
                        v
                    }
                })
                .collect();
            isolate_rec(q, BigInt::zero(), e, mirror, &mut out);
        }
    }
    out.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
    out
}

fn key(f: &Found) -> f64 {
    match f {
        Found::Interval(c, w) => super::int::big_to_f64_scaled(c, -w),
        Found::Exact(d) => d.to_f64(),
    }
}

/// Bisection over `(c 2^w, (c+1) 2^w)`; `mirror` marks that the real coordinate is negated.
fn isolate_rec(q0: Vec<BigInt>, c0: BigInt, w0: i64, mirror: bool, out: &mut Vec<Found>) {
    let mut stack = vec![Node { q: q0, c: c0, w: w0 }];
    let push_interval = |c: BigInt, w: i64, out: &mut Vec<Found>| {
        if mirror {
            out.push(Found::Interval(-(c + BigInt::one()), w));
        } else {
            out.push(Found::Interval(c, w));
        }
    };
    while let Some(Node { mut q, c, w }) = stack.pop() {
        while q.last().is_some_and(Zero::is_zero) {
            q.pop();
        }
        let v = descartes01(&q);
        if v == 0 {
            continue;
        }
        if v == 1 {
            push_interval(c, w, out);
            continue;
        }
        let mut l = left_half(&q);
        strip_twos(&mut l);
        let mut r = l.clone();
        taylor_shift_one(&mut r);
        let cl = &c << 1;
        let cr: BigInt = &cl + 1;
        if r[0].is_zero() {
            let mid = Dyadic {
                c: if mirror { -cr.clone() } else { cr.clone() },
                w: w - 1,
            };
            out.push(Found::Exact(mid));
            r.remove(0);
        }
        stack.push(Node { q: l, c: cl, w: w - 1 });
        stack.push(Node { q: r, c: cr, w: w - 1 });
    }
}

/// Shrink a single-root open interval below `tol` using exact signs.
fn refine(p: &IntPolynomial, c: BigInt, w: i64, tol: f64) -> (Dyadic, Dyadic) {
    let mut lo = Dyadic { c: c.clone(), w };
    let mut hi = Dyadic { c: c + 1, w };
    let sgn = |q: &IntPolynomial, d: &Dyadic| -> i32 {
        if d.w >= 0 {
            sign_of(&q.eval(&(&d.c << d.w as usize)))
        } else {
            sign_of(&q.eval_dyadic(&d.c, (-d.w) as u64))
        }
    };
    // sign just to the right of `lo`; at a root of a squarefree polynomial it is the sign of P'
    let mut slo = sgn(p, &lo);
    if slo == 0 {
        slo = sgn(&p.derivative(), &lo);
    }
    while hi.to_f64() - lo.to_f64() > tol && hi.w > -4000 {
        let mid = Dyadic {
            c: (&lo.c << 1) + 1,
            w: lo.w - 1,
        };
        let sm = sgn(p, &mid);
        if sm == 0 {
            return (mid.clone(), mid);
        }
        if sm == slo {
            hi = Dyadic {
                c: &hi.c << 1,
                w: hi.w - 1,
            };
            lo = mid;
        } else {
            lo = Dyadic {
                c: &lo.c << 1,
                w: lo.w - 1,
            };
            hi = mid;
        }
    }
    (lo, hi)
}

/// Isolate all real roots to width `<= tol` with multiplicities.
pub fn real_roots(p: &IntPolynomial, tol: f64) -> Result<RootSet> {
    if p.is_zero() {
        return domain("real roots of the zero polynomial");
    }
    let tol = if tol > 0.0 { tol } else { 1e-12 };
    real_roots_with_tol(p, &p.squarefree_decomposition(), tol)
}

fn real_roots_with_tol(p: &IntPolynomial, factors: &[IntPolynomial], tol: f64) -> Result<RootSet> {
    let mut roots = Vec::new();
    for (i, f) in factors.iter().enumerate() {
        if f.deg() == 0 {
            continue;
        }
        for found in isolate_squarefree(f) {
            let (lo, hi) = match found {
                Found::Exact(d) => (d.clone(), d),
                Found::Interval(c, w) => refine(f, c, w, tol),
            };
            roots.push(IsolatedRoot {
                lo,
                hi,
                multiplicity: i + 1,
            });
        }
    }
    roots.sort_by(|a, b| a.lo_f64().total_cmp(&b.lo_f64()));
    if tol > 1e-300 && roots.windows(2).any(|x| x[0].hi_f64() > x[1].lo_f64()) {
        return real_roots_with_tol(p, factors, tol * 0.25);
    }
    let real = roots.iter().map(|r| r.multiplicity).sum::<usize>();
    Ok(RootSet {
        roots,
        complex_count: p.deg() - real,
    })
}

/// All complex roots with multiplicity, in `f64`.
///
/// Real roots come from exact isolation; the rest from Aberth iteration on each
/// squarefree factor.
pub fn complex_roots(p: &IntPolynomial) -> Result<Vec<Complex64>> {
    if p.is_zero() {
        return domain("roots of the zero polynomial");
    }
    let mut out = Vec::new();
    for (i, f) in p.squarefree_decomposition().iter().enumerate() {
        if f.deg() == 0 {
            continue;
        }
        let reals: Vec<f64> = real_roots(f, 1e-17)?
            .roots
            .iter()
            .map(|r| nearest_root(f, r))
            .collect();
        let mut all = reals.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>();
        if reals.len() < f.deg() {
            let mut approx = aberth(&f.to_f64_coeffs());
            for &x in &reals {
                if let Some(pos) = approx
                    .iter()
                    .enumerate()
                    .min_by(|a, b| (a.1 - x).norm().total_cmp(&(b.1 - x).norm()))
                    .map(|(k, _)| k)
                {
                    approx.remove(pos);
                }
            }
            // pair up conjugates exactly
            approx.retain(|z| z.im != 0.0);
            let mut uppers: Vec<Complex64> = approx
                .iter()
                .filter(|z| z.im > 0.0)
                .copied()
                .collect();
            uppers.sort_by(|a, b| a.re.total_cmp(&b.re));
            let need = (f.deg() - reals.len()) / 2;
            uppers.truncate(need);
            while uppers.len() < need {
                uppers.push(approx.iter().map(|z| Complex64::new(z.re, z.im.abs())).next().unwrap_or_default());
            }
            for z in uppers {
                all.push(z);
                all.push(z.conj());
            }
        }
        for _ in 0..=i {
            out.extend(all.iter().copied());
        }
    }
    Ok(out)
}

fn nearest_root(f: &IntPolynomial, r: &IsolatedRoot) -> f64 {
    let (lo, hi) = (r.lo_f64(), r.hi_f64());
    if lo == hi {
        return lo;
    }
    // bisection in doubles with exact signs
    let (mut a, mut b) = (lo, hi);
    let sa = f.sign_at_f64(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let sm = f.sign_at_f64(m);
        if sm == 0 {
            return m;
        }
        if sm == sa {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Aberth-Ehrlich simultaneous iteration.
pub fn aberth(c: &[f64]) -> Vec<Complex64> {
    let n = c.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let lead = c[n];
    let a: Vec<f64> = c.iter().map(|x| x / lead).collect();
    let radius = 1.0 + a[..n].iter().map(|x| x.abs()).fold(0.0, f64::max);
    let r0 = radius.min(
        // Fujiwara-type bound keeps the start circle tight
        2.0 * (0..n)
            .map(|i| (a[i].abs()).powf(1.0 / (n - i) as f64))
            .fold(0.0, f64::max)
            .max(1e-3),
    );
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(r0, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64 + 0.4))
        .collect();
    let dc: Vec<f64> = (1..=n).map(|i| a[i] * i as f64).collect();
    for _ in 0..2000 {
        let mut maxstep = 0.0f64;
        for k in 0..n {
            let pv = super::int::horner_c(&a, z[k]);
            let dv = super::int::horner_c(&dc, z[k]);
            if pv == Complex64::new(0.0, 0.0) {
                continue;
            }
            let ratio = pv / dv;
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..n {
                if j != k {
                    s += 1.0 / (z[k] - z[j]);
                }
            }
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            if w.is_finite() {
                z[k] -= w;
                maxstep = maxstep.max(w.norm() / z[k].norm().max(1e-300));
            }
        }
        if maxstep < 1e-16 {
            break;
        }
    }
    z
}
