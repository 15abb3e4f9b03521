//! Polynomial gcd modulo a word-size prime, used as a fast coprimality certificate.

use super::IntPolynomial;
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

const PRIMES: [u64; 2] = [2_305_843_009_213_693_951, 4_611_686_018_427_387_847];

fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn powmod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a, p);
        }
        a = mulmod(a, a, p);
        e >>= 1;
    }
    r
}

fn reduce(p: &IntPolynomial, m: u64) -> Vec<u64> {
    let mb = BigInt::from(m);
    let mut v: Vec<u64> = p
        .coeffs()
        .iter()
        .map(|c| {
            let r = c % &mb;
            let r = if r < BigInt::zero() { r + &mb } else { r };
            r.to_u64().unwrap_or(0)
        })
        .collect();
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

fn gcd_degree(mut a: Vec<u64>, mut b: Vec<u64>, p: u64) -> usize {
    if a.len() < b.len() {
        std::mem::swap(&mut a, &mut b);
    }
    while !b.is_empty() {
        // a <- a mod b
        let inv = powmod(*b.last().unwrap(), p - 2, p);
        while a.len() >= b.len() {
            let f = mulmod(*a.last().unwrap(), inv, p);
            let off = a.len() - b.len();
            for (i, bc) in b.iter().enumerate() {
                a[off + i] = (a[off + i] + p - mulmod(f, *bc, p)) % p;
            }
            while a.last() == Some(&0) {
                a.pop();
            }
        }
        std::mem::swap(&mut a, &mut b);
    }
    a.len().saturating_sub(1)
}

/// `true` when `a` and `b` are certainly coprime over the rationals: some prime
/// not dividing either leading coefficient gives a constant gcd. `false` is inconclusive.
pub fn certainly_coprime(a: &IntPolynomial, b: &IntPolynomial) -> bool {
    if a.is_zero() || b.is_zero() {
        return false;
    }
    PRIMES.iter().any(|&p| {
        let (ra, rb) = (reduce(a, p), reduce(b, p));
        ra.len() == a.coeffs().len() && rb.len() == b.coeffs().len() && gcd_degree(ra, rb, p) == 0
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detects_coprime_pairs() {
        let a = IntPolynomial::from_i64(&[-2, 0, 1]);
        let b = IntPolynomial::from_i64(&[0, 1]);
        assert!(certainly_coprime(&a, &b));
        let c = IntPolynomial::from_i64(&[0, 1, 1]);
        assert!(!certainly_coprime(&b, &c));
    }
}
