//! Integer-polynomial lattices: basis reduction, nearest-plane rounding, the
//! adjustment of real polynomials to integer ones, and small-norm bases.

mod adjust;
mod basis;
mod cfix;
mod lll;

pub use adjust::{adjust_to_integer, AdjustmentResult};
pub use basis::{
    combine_squarefree, small_norm_basis, squarefree_small_norm, squarefree_small_norm_report, NormBasis,
    SquarefreeReport,
};
pub use cfix::CFix;
pub(crate) use cfix::eval_fixed;
pub use lll::{babai, lll_reduce, Reduced, LLL_DELTA};

use crate::poly::IntPolynomial;
use num_bigint::BigInt;
use num_traits::{One, Zero};

/// Integer Chebyshev polynomial `2 T_k((z - c)/2)` (monic for `k >= 1`).
pub fn integer_chebyshev(k: usize, c: i64) -> IntPolynomial {
    // C_0 = 1, C_1 = y, C_2 = y^2 - 2, C_{k+1} = y C_k - C_{k-1}; y = z - c
    let y = IntPolynomial::linear(c);
    let mut prev = IntPolynomial::from_i64(&[2]);
    let mut cur = y.clone();
    if k == 0 {
        return IntPolynomial::one();
    }
    for _ in 1..k {
        let next = (&y * &cur).sub(&prev);
        prev = cur;
        cur = next;
    }
    cur
}

/// Fixed-point values `C_0(y), ..., C_{n-1}(y)` of the integer Chebyshev
/// polynomials at a fixed-point complex `y`.
pub(crate) fn integer_chebyshev_values(y: &CFix, n: usize, prec: u32) -> Vec<CFix> {
    let one = BigInt::one() << prec as usize;
    let mut v: Vec<CFix> = Vec::with_capacity(n);
    for k in 0..n {
        let x = match k {
            0 => CFix::from_real_fixed(one.clone()),
            1 => y.clone(),
            2 => {
                let mut t = y.mul(y, prec);
                t.re -= &one << 1;
                t
            }
            _ => y.mul(&v[k - 1], prec).sub(&v[k - 2]),
        };
        v.push(x);
    }
    v
}

pub(crate) fn unit_vector(i: usize, dim: usize) -> Vec<BigInt> {
    (0..dim)
        .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_chebyshev_small_cases() {
        assert_eq!(integer_chebyshev(2, 0), IntPolynomial::from_i64(&[-2, 0, 1]));
        assert_eq!(integer_chebyshev(3, 0), IntPolynomial::from_i64(&[0, -3, 0, 1]));
        assert_eq!(integer_chebyshev(1, 2), IntPolynomial::from_i64(&[-2, 1]));
        let _ = unit_vector(0, 2);
    }
}
