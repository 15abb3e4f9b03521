use super::int::{big_to_f64_scaled, f64_to_dyadic};
use super::IntPolynomial;
use crate::numeric::fmt_f64;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

pub const DEFAULT_PRECISION: u32 = 512;

/// Real polynomial with fixed-point coefficients `coeffs[i] / 2^precision`.
///
/// When the polynomial was built from its roots they are kept for stable
/// evaluation in product form.
#[derive(Debug, Clone, PartialEq)]
pub struct RealPolynomial {
    coeffs: Vec<BigInt>,
    precision: u32,
    roots: Option<Vec<f64>>,
}

fn round_shift(x: &BigInt, s: i64) -> BigInt {
    if s <= 0 {
        return x << (-s) as usize;
    }
    let half = BigInt::one() << (s as usize - 1);
    (x + half) >> s as usize
}

impl RealPolynomial {
    pub fn from_fixed(mut coeffs: Vec<BigInt>, precision: u32) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        // keep at least 64 fractional bits; lifting preserves the value
        let lift = 64u32.saturating_sub(precision) as usize;
        if lift > 0 {
            coeffs.iter_mut().for_each(|c| *c <<= lift);
        }
        RealPolynomial {
            coeffs,
            precision: precision.max(64),
            roots: None,
        }
    }

    pub fn from_f64(c: &[f64]) -> Self {
        Self::from_f64_with_precision(c, DEFAULT_PRECISION)
    }

    pub fn from_f64_with_precision(c: &[f64], precision: u32) -> Self {
        let v = c
            .iter()
            .map(|&x| {
                let (m, k) = f64_to_dyadic(x);
                round_shift(&m, k as i64 - precision as i64)
            })
            .collect();
        Self::from_fixed(v, precision)
    }

    pub fn from_int(p: &IntPolynomial) -> Self {
        Self::from_fixed(
            p.coeffs().iter().map(|c| c << DEFAULT_PRECISION as usize).collect(),
            DEFAULT_PRECISION,
        )
    }

    /// Monic `prod (z - r_i)`, coefficients rounded once at the end.
    pub fn from_roots(roots: &[f64]) -> Self {
        Self::from_roots_with_precision(roots, DEFAULT_PRECISION)
    }

    pub fn from_roots_with_precision(roots: &[f64], prec: u32) -> Self {
        let dy: Vec<(BigInt, u64)> = roots.iter().map(|&r| f64_to_dyadic(r)).collect();
        let kmax = dy.iter().map(|d| d.1).max().unwrap_or(0);
        // exact product of (2^K z - c_i 2^{K - k_i}); divide by 2^{K n} at the end
        let mut acc = vec![BigInt::one()];
        let lead = BigInt::one() << kmax as usize;
        for (c, k) in &dy {
            let c0 = -(c << (kmax - k) as usize);
            let mut next = vec![BigInt::zero(); acc.len() + 1];
            for (i, a) in acc.iter().enumerate() {
                next[i] += a * &c0;
                next[i + 1] += a * &lead;
            }
            acc = next;
        }
        let total = kmax as i64 * roots.len() as i64;
        let prec = prec.max(64);
        let coeffs = acc
            .iter()
            .map(|a| round_shift(a, total - prec as i64))
            .collect();
        let mut sorted = roots.to_vec();
        sorted.sort_by(f64::total_cmp);
        RealPolynomial {
            coeffs,
            precision: prec,
            roots: Some(sorted),
        }
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn fixed_coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn roots(&self) -> Option<&[f64]> {
        self.roots.as_deref()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn deg(&self) -> usize {
        self.degree().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff_f64(&self, i: usize) -> f64 {
        self.coeffs
            .get(i)
            .map(|c| big_to_f64_scaled(c, self.precision as i64))
            .unwrap_or(0.0)
    }

    pub fn to_f64_coeffs(&self) -> Vec<f64> {
        (0..self.coeffs.len()).map(|i| self.coeff_f64(i)).collect()
    }

    fn aligned(&self, other: &Self) -> (Vec<BigInt>, Vec<BigInt>, u32) {
        let p = self.precision.max(other.precision);
        let lift = |x: &Self| -> Vec<BigInt> {
            x.coeffs
                .iter()
                .map(|c| c << (p - x.precision) as usize)
                .collect()
        };
        (lift(self), lift(other), p)
    }

    pub fn add(&self, other: &Self) -> Self {
        let (a, b, p) = self.aligned(other);
        let n = a.len().max(b.len());
        let z = BigInt::zero();
        Self::from_fixed(
            (0..n)
                .map(|i| a.get(i).unwrap_or(&z) + b.get(i).unwrap_or(&z))
                .collect(),
            p,
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        let (a, b, p) = self.aligned(other);
        let n = a.len().max(b.len());
        let z = BigInt::zero();
        Self::from_fixed(
            (0..n)
                .map(|i| a.get(i).unwrap_or(&z) - b.get(i).unwrap_or(&z))
                .collect(),
            p,
        )
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::from_fixed(Vec::new(), self.precision);
        }
        let (a, b, p) = self.aligned(other);
        let mut c = vec![BigInt::zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                c[i + j] += x * y;
            }
        }
        let mut out = Self::from_fixed(c.iter().map(|v| round_shift(v, p as i64)).collect(), p);
        if let (Some(r1), Some(r2)) = (&self.roots, &other.roots) {
            if self.is_monic() && other.is_monic() {
                let mut r = r1.clone();
                r.extend(r2);
                r.sort_by(f64::total_cmp);
                out.roots = Some(r);
            }
        }
        out
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs
            .last()
            .is_some_and(|c| *c == BigInt::one() << self.precision as usize)
    }

    /// Integer polynomial if every coefficient is an exact integer.
    pub fn to_int_exact(&self) -> Option<IntPolynomial> {
        let mask = (BigInt::one() << self.precision as usize) - 1u32;
        if self.coeffs.iter().any(|c| !(c & &mask).is_zero()) {
            return None;
        }
        Some(IntPolynomial::new(
            self.coeffs
                .iter()
                .map(|c| c >> self.precision as usize)
                .collect(),
        ))
    }

    /// Integer polynomial of numerators: `2^precision * self`.
    pub fn numerator(&self) -> IntPolynomial {
        IntPolynomial::new(self.coeffs.clone())
    }

    /// `P(x)` in doubles: product form when the roots are known, otherwise a
    /// Chebyshev expansion around `x`.
    pub fn eval_f64(&self, x: f64) -> f64 {
        if let Some(r) = &self.roots {
            return r.iter().map(|a| x - a).product();
        }
        let lo = x.abs().max(1.0);
        ChebExpansion::new(&self.coeffs, self.precision as i64, -lo, lo).eval(x)
    }

    pub fn log_abs(&self, x: f64) -> f64 {
        if let Some(r) = &self.roots {
            return r.iter().map(|a| (x - a).abs().ln()).sum();
        }
        self.eval_f64(x).abs().ln()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "coeffs": self.to_f64_coeffs().iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>(),
            "precision": self.precision,
        })
    }
}

/// Chebyshev expansion of a polynomial on `[a, b]`, converted exactly from
/// scaled integer coefficients and evaluated with Clenshaw's recurrence.
#[derive(Debug, Clone)]
pub struct ChebExpansion {
    m: f64,
    h: f64,
    c: Vec<f64>,
    pub abs_sum: f64,
}

impl ChebExpansion {
    /// `coeffs[i] * 2^{-shift}` are the monomial coefficients.
    pub fn new(coeffs: &[BigInt], shift: i64, a: f64, b: f64) -> Self {
        let m = 0.5 * (a + b);
        let h = (0.5 * (b - a)).max(f64::MIN_POSITIVE);
        if coeffs.is_empty() {
            return ChebExpansion {
                m,
                h,
                c: Vec::new(),
                abs_sum: 0.0,
            };
        }
        let (mm, km) = f64_to_dyadic(m);
        let (hh, kh) = f64_to_dyadic(h);
        let e = km.max(kh);
        let mm = mm << (e - km) as usize;
        let hh = hh << (e - kh) as usize;
        let n = coeffs.len() - 1;
        // R(s) = 2^{e n} P(m + h s)
        let mut r: Vec<BigInt> = vec![coeffs[n].clone()];
        for i in (0..n).rev() {
            let mut next = vec![BigInt::zero(); r.len() + 1];
            for (j, v) in r.iter().enumerate() {
                next[j] += v * &mm;
                next[j + 1] += v * &hh;
            }
            next[0] += &coeffs[i] << (e as usize * (n - i));
            r = next;
        }
        // Horner in t = 2s over the Chebyshev basis: C = 2^n R
        let mut c: Vec<BigInt> = vec![r[n].clone()];
        for j in (0..n).rev() {
            let mut next = vec![BigInt::zero(); c.len() + 1];
            for (k, v) in c.iter().enumerate() {
                if k == 0 {
                    next[1] += v << 1;
                } else {
                    next[k + 1] += v;
                    next[k - 1] += v;
                }
            }
            next[0] += &r[j] << (n - j);
            c = next;
        }
        let total = shift + n as i64 + e as i64 * n as i64;
        let c: Vec<f64> = c.iter().map(|v| big_to_f64_scaled(v, total)).collect();
        let abs_sum = c.iter().map(|x| x.abs()).sum();
        ChebExpansion { m, h, c, abs_sum }
    }

    pub fn from_int(p: &IntPolynomial, a: f64, b: f64) -> Self {
        Self::new(p.coeffs(), 0, a, b)
    }

    pub fn from_real(p: &RealPolynomial, a: f64, b: f64) -> Self {
        Self::new(p.fixed_coeffs(), p.precision() as i64, a, b)
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.c
    }

    pub fn eval(&self, x: f64) -> f64 {
        let s = (x - self.m) / self.h;
        let (mut b1, mut b2) = (0.0, 0.0);
        for k in (1..self.c.len()).rev() {
            let b0 = self.c[k] + 2.0 * s * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        match self.c.first() {
            Some(c0) => c0 + s * b1 - b2,
            None => 0.0,
        }
    }
}

impl IntPolynomial {
    /// Nearest-integer rounding of a real polynomial.
    pub fn round_from(p: &RealPolynomial) -> Self {
        IntPolynomial::new(
            p.fixed_coeffs()
                .iter()
                .map(|c| round_shift(c, p.precision() as i64))
                .collect(),
        )
    }
}

#[allow(dead_code)]
fn abs_big(x: &BigInt) -> BigInt {
    x.abs()
}
