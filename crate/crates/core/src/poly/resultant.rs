use super::IntPolynomial;
use crate::error::{domain, Result};
use num_bigint::BigInt;
use num_traits::{One, Zero};

/// Sylvester resultant `res(P, Q) = lc(P)^{deg Q} prod_{P(a)=0} Q(a)` by the
/// subresultant remainder sequence.
pub fn resultant(p: &IntPolynomial, q: &IntPolynomial) -> Result<BigInt> {
    if p.is_zero() || q.is_zero() {
        return domain("resultant with the zero polynomial");
    }
    let (dp, dq) = (p.deg(), q.deg());
    if dp == 0 {
        return Ok(num_traits::pow(p.lead(), dq));
    }
    if dq == 0 {
        return Ok(num_traits::pow(q.lead(), dp));
    }
    let ca = p.content();
    let cb = q.content();
    let mut a = p.div_scalar(&ca);
    let mut b = q.div_scalar(&cb);
    let t = num_traits::pow(ca, dq) * num_traits::pow(cb, dp);
    let mut s = BigInt::one();
    if a.deg() < b.deg() {
        std::mem::swap(&mut a, &mut b);
        if a.deg() % 2 == 1 && b.deg() % 2 == 1 {
            s = -s;
        }
    }
    let mut g = BigInt::one();
    let mut h = BigInt::one();
    loop {
        let delta = a.deg() - b.deg();
        if a.deg() % 2 == 1 && b.deg() % 2 == 1 {
            s = -s;
        }
        let r = a.prem(&b);
        if r.is_zero() {
            return Ok(BigInt::zero());
        }
        a = b;
        let div = &g * num_traits::pow(h.clone(), delta);
        b = r.div_scalar(&div);
        g = a.lead();
        h = if delta == 0 {
            h
        } else {
            num_traits::pow(g.clone(), delta) / num_traits::pow(h.clone(), delta - 1)
        };
        if b.deg() == 0 {
            break;
        }
    }
    let da = a.deg();
    let hh = num_traits::pow(b.lead(), da) / num_traits::pow(h, da - 1);
    Ok(s * t * hh)
}
