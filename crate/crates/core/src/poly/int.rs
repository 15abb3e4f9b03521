use crate::error::{domain, Error, Result};
use num_bigint::{BigInt, Sign};
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Integer polynomial with ascending coefficients; no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct IntPolynomial {
    coeffs: Vec<BigInt>,
}

impl IntPolynomial {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        IntPolynomial { coeffs }
    }

    pub fn from_i64(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn zero() -> Self {
        Self::new(Vec::new())
    }

    pub fn one() -> Self {
        Self::from_i64(&[1])
    }

    /// The monomial `x^k`.
    pub fn monomial(k: usize) -> Self {
        let mut c = vec![BigInt::zero(); k + 1];
        c[k] = BigInt::one();
        Self::new(c)
    }

    /// `x - r` for an integer `r`.
    pub fn linear(r: i64) -> Self {
        Self::from_i64(&[-r, 1])
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn deg(&self) -> usize {
        self.degree().unwrap_or(0)
    }

    pub fn lead(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_default()
    }

    pub fn is_monic(&self) -> bool {
        self.lead().is_one()
    }

    pub fn to_f64_coeffs(&self) -> Vec<f64> {
        self.coeffs.iter().map(big_to_f64).collect()
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        Self::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
    }

    pub fn content(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    /// Primitive part with positive leading coefficient.
    pub fn primitive(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut g = self.content();
        if self.lead().is_negative() {
            g = -g;
        }
        Self::new(self.coeffs.iter().map(|c| c / &g).collect())
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        self.coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    /// `2^{k deg} P(c / 2^k)`, exact.
    pub fn eval_dyadic(&self, c: &BigInt, k: u64) -> BigInt {
        let n = self.deg();
        let mut acc = BigInt::zero();
        for (i, a) in self.coeffs.iter().enumerate().rev() {
            acc = acc * c + (a << (k as usize * (n - i)));
        }
        acc
    }

    /// Sign of `P(x)` at the exact value of the double `x`.
    pub fn sign_at_f64(&self, x: f64) -> i32 {
        let (c, k) = f64_to_dyadic(x);
        sign_of(&self.eval_dyadic(&c, k))
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + big_to_f64(c))
    }

    pub fn eval_c(&self, z: Complex64) -> Complex64 {
        horner_c(&self.to_f64_coeffs(), z)
    }

    /// Pseudo-remainder `lc(B)^{deg A - deg B + 1} A mod B`.
    pub fn prem(&self, b: &Self) -> Self {
        let db = b.deg();
        let lb = b.lead();
        let mut r = self.clone();
        if r.deg() < db || r.is_zero() {
            return r;
        }
        let mut e = r.deg() - db + 1;
        while !r.is_zero() && r.deg() >= db {
            let shift = r.deg() - db;
            let lr = r.lead();
            let mut c: Vec<BigInt> = r.coeffs.iter().map(|x| x * &lb).collect();
            for (i, bc) in b.coeffs.iter().enumerate() {
                c[i + shift] -= &lr * bc;
            }
            r = Self::new(c);
            e -= 1;
        }
        r.scale(&num_traits::pow(lb, e))
    }

    /// Exact division; `None` when `b` does not divide `self` over the integers.
    pub fn div_exact(&self, b: &Self) -> Option<Self> {
        if b.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Self::zero());
        }
        if self.deg() < b.deg() {
            return None;
        }
        let db = b.deg();
        let lb = b.lead();
        let mut r = self.coeffs.clone();
        let mut q = vec![BigInt::zero(); self.deg() - db + 1];
        for k in (0..q.len()).rev() {
            let top = &r[k + db];
            let (qq, rem) = top.div_rem(&lb);
            if !rem.is_zero() {
                return None;
            }
            for (i, bc) in b.coeffs.iter().enumerate() {
                r[k + i] -= &qq * bc;
            }
            q[k] = qq;
        }
        if r.iter().all(Zero::is_zero) {
            Some(Self::new(q))
        } else {
            None
        }
    }

    pub fn div_scalar(&self, c: &BigInt) -> Self {
        Self::new(self.coeffs.iter().map(|x| x / c).collect())
    }

    /// Primitive gcd via the primitive remainder sequence.
    pub fn gcd(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.primitive();
        }
        if other.is_zero() {
            return self.primitive();
        }
        let cont = self.content().gcd(&other.content());
        if super::modp::certainly_coprime(self, other) {
            return IntPolynomial::new(vec![cont]);
        }
        let (mut a, mut b) = if self.deg() >= other.deg() {
            (self.primitive(), other.primitive())
        } else {
            (other.primitive(), self.primitive())
        };
        while !b.is_zero() {
            let r = a.prem(&b);
            a = b;
            b = r.primitive();
        }
        a.primitive().scale(&cont)
    }

    pub fn is_squarefree(&self) -> bool {
        if self.deg() < 1 {
            return true;
        }
        self.gcd(&self.derivative()).deg() == 0
    }

    /// Yun decomposition: `P = c * prod f_i^i` with `f_i` primitive, squarefree, pairwise coprime.
    /// Entry `i-1` holds `f_i`.
    pub fn squarefree_decomposition(&self) -> Vec<Self> {
        let p = self.primitive();
        if p.deg() < 1 {
            return Vec::new();
        }
        let dp = p.derivative();
        let a0 = p.gcd(&dp).primitive();
        // exact quotients by a primitive divisor stay integral (Gauss)
        let mut b = p.div_exact(&a0).expect("gcd divides");
        let mut c = dp.div_exact(&a0).expect("gcd divides");
        let mut d = c.sub(&b.derivative());
        let mut out = Vec::new();
        while b.deg() > 0 {
            let a = b.gcd(&d).primitive();
            b = b.div_exact(&a).expect("factor divides");
            c = d.div_exact(&a).expect("factor divides");
            d = c.sub(&b.derivative());
            out.push(a);
        }
        while out.last().is_some_and(|f| f.deg() == 0) {
            out.pop();
        }
        out
    }

    /// Squarefree part `P / gcd(P, P')`, primitive.
    pub fn squarefree_part(&self) -> Self {
        let g = self.gcd(&self.derivative());
        self.primitive().div_exact(&g).expect("gcd divides").primitive()
    }

    pub fn to_strings(&self) -> Vec<String> {
        if self.coeffs.is_empty() {
            return vec!["0".into()];
        }
        self.coeffs.iter().map(|c| c.to_string()).collect()
    }

    pub fn to_json(&self) -> Value {
        json!({ "coeffs": self.to_strings() })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let arr = v
            .get("coeffs")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("polynomial needs `coeffs`".into()))?;
        let c: Result<Vec<BigInt>> = arr
            .iter()
            .map(|x| {
                let s = match x {
                    Value::String(s) => s.trim().to_string(),
                    Value::Number(n) if n.is_i64() || n.is_u64() => n.to_string(),
                    other => return Err(Error::Parse(format!("integer coefficient expected, got {other}"))),
                };
                s.parse::<BigInt>()
                    .map_err(|_| Error::Parse(format!("not an integer: {s:?}")))
            })
            .collect();
        Ok(Self::new(c?))
    }
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let show_c = !a.is_one() || i == 0;
            if show_c {
                write!(f, "{a}")?;
            }
            match i {
                0 => {}
                1 => write!(f, "x")?,
                _ => write!(f, "x^{i}")?,
            }
        }
        Ok(())
    }
}

impl Add for &IntPolynomial {
    type Output = IntPolynomial;
    fn add(self, o: &IntPolynomial) -> IntPolynomial {
        let n = self.coeffs.len().max(o.coeffs.len());
        IntPolynomial::new((0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }
}

impl IntPolynomial {
    pub fn sub(&self, o: &IntPolynomial) -> IntPolynomial {
        Sub::sub(self, o)
    }
}

impl Sub for &IntPolynomial {
    type Output = IntPolynomial;
    fn sub(self, o: &IntPolynomial) -> IntPolynomial {
        let n = self.coeffs.len().max(o.coeffs.len());
        IntPolynomial::new((0..n).map(|i| self.coeff(i) - o.coeff(i)).collect())
    }
}

impl Neg for &IntPolynomial {
    type Output = IntPolynomial;
    fn neg(self) -> IntPolynomial {
        IntPolynomial::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Mul for &IntPolynomial {
    type Output = IntPolynomial;
    fn mul(self, o: &IntPolynomial) -> IntPolynomial {
        if self.is_zero() || o.is_zero() {
            return IntPolynomial::zero();
        }
        let mut c = vec![BigInt::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        IntPolynomial::new(c)
    }
}

pub fn horner_c(c: &[f64], z: Complex64) -> Complex64 {
    c.iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a)
}

pub(crate) fn sign_of(x: &BigInt) -> i32 {
    match x.sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

/// `x * 2^{-shift}` as the nearest-ish double, without overflow in the intermediate.
pub fn big_to_f64_scaled(x: &BigInt, shift: i64) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let bits = x.bits() as i64;
    let drop = (bits - 64).max(0);
    let top = (x.abs() >> drop as usize).to_u64().unwrap_or(u64::MAX) as f64;
    let out = scale_pow2(top, drop - shift);
    if x.is_negative() {
        -out
    } else {
        out
    }
}

fn scale_pow2(mut v: f64, mut e: i64) -> f64 {
    while e > 1000 {
        v *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        v *= 2f64.powi(-1000);
        e += 1000;
    }
    v * 2f64.powi(e as i32)
}

pub fn big_to_f64(x: &BigInt) -> f64 {
    big_to_f64_scaled(x, 0)
}

/// Exact dyadic form `(c, k)` with `x = c / 2^k`, `k >= 0`.
pub fn f64_to_dyadic(x: f64) -> (BigInt, u64) {
    if x == 0.0 {
        return (BigInt::zero(), 0);
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { -1i64 } else { 1 };
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let mant = if exp == 0 {
        (bits & 0xf_ffff_ffff_ffff) << 1
    } else {
        (bits & 0xf_ffff_ffff_ffff) | 0x10_0000_0000_0000
    };
    let e = exp - 1075;
    let m = BigInt::from(mant) * sign;
    if e >= 0 {
        (m << e as usize, 0)
    } else {
        // strip common factors of two
        let tz = mant.trailing_zeros() as i64;
        let s = tz.min(-e);
        (m >> s as usize, (-e - s) as u64)
    }
}

/// Smallest prime factor test by trial division.
pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Eisenstein's criterion at the prime `p` for a monic polynomial.
pub fn eisenstein_check(poly: &IntPolynomial, p: u64) -> Result<bool> {
    if !is_prime(p) {
        return domain(format!("{p} is not prime"));
    }
    if poly.deg() < 1 {
        return domain("Eisenstein check needs positive degree");
    }
    let pb = BigInt::from(p);
    let n = poly.deg();
    if (poly.lead() % &pb).is_zero() {
        return Ok(false);
    }
    let divides = poly.coeffs[..n].iter().all(|c| (c % &pb).is_zero());
    let p2 = &pb * &pb;
    Ok(divides && !(poly.coeffs[0].clone() % p2).is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_and_display() {
        let p = IntPolynomial::from_i64(&[1, -3, 1]);
        assert_eq!(p.to_string(), "x^2 - 3x + 1");
        let q = &p * &IntPolynomial::linear(2);
        assert_eq!(q.div_exact(&p).unwrap(), IntPolynomial::linear(2));
        assert!(q.div_exact(&IntPolynomial::linear(5)).is_none());
    }

    #[test]
    fn squarefree_examples() {
        assert!(IntPolynomial::from_i64(&[1, -3, 1]).is_squarefree());
        assert!(!IntPolynomial::from_i64(&[1, -2, 1]).is_squarefree());
        assert!(IntPolynomial::from_i64(&[0, -1, 0, 1]).is_squarefree());
    }

    #[test]
    fn yun_decomposition() {
        // (x-1)^3 (x+2)^2 (x-5)
        let a = IntPolynomial::linear(1);
        let b = IntPolynomial::linear(-2);
        let c = IntPolynomial::linear(5);
        let p = &(&(&(&a * &a) * &a) * &(&b * &b)) * &c;
        let f = p.squarefree_decomposition();
        assert_eq!(f.len(), 3);
        assert_eq!(f[0], c);
        assert_eq!(f[1], b);
        assert_eq!(f[2], a);
    }

    #[test]
    fn eisenstein_examples() {
        assert!(eisenstein_check(&IntPolynomial::from_i64(&[-2, 0, 1]), 2).unwrap());
        assert!(!eisenstein_check(&IntPolynomial::from_i64(&[-4, 0, 1]), 2).unwrap());
        assert!(eisenstein_check(&IntPolynomial::from_i64(&[2, 4, 0, 1]), 2).unwrap());
        assert!(eisenstein_check(&IntPolynomial::from_i64(&[2, 4, 0, 1]), 4).is_err());
    }

    #[test]
    fn dyadic_conversion_is_exact() {
        for x in [0.1, -3.75, 1e-300, 6.02e23] {
            let (c, k) = f64_to_dyadic(x);
            assert_eq!(big_to_f64_scaled(&c, k as i64), x);
        }
        let p = IntPolynomial::from_i64(&[-2, 0, 1]);
        assert_eq!(p.sign_at_f64(1.4142135623730951), 1);
        assert_eq!(p.sign_at_f64(1.414213562373095), -1);
    }
}
