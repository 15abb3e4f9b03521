use crate::poly::{big_to_f64_scaled, f64_to_dyadic, IntPolynomial};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::Zero;

/// Fixed-point complex number `(re + i im) / 2^prec`.
#[derive(Debug, Clone, PartialEq)]
pub struct CFix {
    pub re: BigInt,
    pub im: BigInt,
}

fn fix(x: f64, prec: u32) -> BigInt {
    let (c, k) = f64_to_dyadic(x);
    let s = prec as i64 - k as i64;
    if s >= 0 {
        c << s as usize
    } else {
        c >> (-s) as usize
    }
}

impl CFix {
    pub fn zero() -> Self {
        CFix {
            re: BigInt::zero(),
            im: BigInt::zero(),
        }
    }

    pub fn from_c64(z: Complex64, prec: u32) -> Self {
        CFix {
            re: fix(z.re, prec),
            im: fix(z.im, prec),
        }
    }

    pub fn from_real_fixed(re: BigInt) -> Self {
        CFix {
            re,
            im: BigInt::zero(),
        }
    }

    pub fn to_c64(&self, prec: u32) -> Complex64 {
        Complex64::new(
            big_to_f64_scaled(&self.re, prec as i64),
            big_to_f64_scaled(&self.im, prec as i64),
        )
    }

    pub fn add(&self, o: &Self) -> Self {
        CFix {
            re: &self.re + &o.re,
            im: &self.im + &o.im,
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        CFix {
            re: &self.re - &o.re,
            im: &self.im - &o.im,
        }
    }

    pub fn mul(&self, o: &Self, prec: u32) -> Self {
        CFix {
            re: (&self.re * &o.re - &self.im * &o.im) >> prec as usize,
            im: (&self.re * &o.im + &self.im * &o.re) >> prec as usize,
        }
    }

    pub fn div(&self, o: &Self, prec: u32) -> Self {
        let den = &o.re * &o.re + &o.im * &o.im;
        let nre = (&self.re * &o.re + &self.im * &o.im) << prec as usize;
        let nim = (&self.im * &o.re - &self.re * &o.im) << prec as usize;
        CFix {
            re: nre / &den,
            im: nim / den,
        }
    }

    /// Largest absolute component, in units of `2^-prec`.
    pub fn max_abs_bits(&self) -> u64 {
        self.re.bits().max(self.im.bits())
    }
}

/// `P(z)` for an integer polynomial.
pub fn eval_int(p: &IntPolynomial, z: &CFix, prec: u32) -> CFix {
    let mut acc = CFix::zero();
    for c in p.coeffs().iter().rev() {
        acc = acc.mul(z, prec);
        acc.re += c << prec as usize;
    }
    acc
}

/// `P(z)` for fixed-point real coefficients at precision `prec`.
pub fn eval_fixed(coeffs: &[BigInt], z: &CFix, prec: u32) -> CFix {
    let mut acc = CFix::zero();
    for c in coeffs.iter().rev() {
        acc = acc.mul(z, prec);
        acc.re += c;
    }
    acc
}

/// Newton refinement of an approximate simple root to about `prec` bits.
pub fn newton_refine(p: &IntPolynomial, dp: &IntPolynomial, z0: Complex64, prec: u32) -> Option<CFix> {
    // accept once the correction is below 2^{-3 prec / 4}; rounding noise sits far lower
    let target = (prec / 4) as u64;
    let mut z = CFix::from_c64(z0, prec);
    for _ in 0..100 {
        let v = eval_int(p, &z, prec);
        let d = eval_int(dp, &z, prec);
        if d.re.is_zero() && d.im.is_zero() {
            return None;
        }
        let step = v.div(&d, prec);
        z = z.sub(&step);
        if step.max_abs_bits() <= target {
            return Some(z);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn newton_reaches_high_precision() {
        let p = IntPolynomial::from_i64(&[-2, 0, 1]);
        let z = newton_refine(&p, &p.derivative(), Complex64::new(1.4, 0.0), 300).unwrap();
        // z^2 - 2 vanishes to ~2^-290
        let v = eval_int(&p, &z, 300);
        assert!(v.max_abs_bits() < 16);
        assert!((z.to_c64(300).re - 2f64.sqrt()).abs() < 1e-15);
    }
}
