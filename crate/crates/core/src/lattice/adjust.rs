use super::cfix::{eval_fixed, eval_int, newton_refine, CFix};
use super::lll::{babai, lll_reduce, LLL_DELTA};
use crate::error::{Error, Result};
use crate::poly::{big_to_f64_scaled, complex_roots, IntPolynomial, RealPolynomial};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::{json, Value};

/// An integer polynomial `R` with `Q - R = sum_j beta_j P(z)/(z - alpha_j)`.
#[derive(Debug, Clone)]
pub struct AdjustmentResult {
    pub r: IntPolynomial,
    pub betas: Vec<Complex64>,
    pub beta_l1: f64,
    /// Largest coefficient of `Q - sum beta_j P_j - R`, as `log2` (`-inf` when exact).
    pub residual_log2: f64,
    /// `precision` of the input `Q`.
    pub precision: u32,
}

impl AdjustmentResult {
    /// The residual meets the `2^{-precision/2}` bound.
    pub fn residual_ok(&self) -> bool {
        self.residual_log2 <= -(self.precision as f64) / 2.0
    }

    pub fn to_json(&self) -> Value {
        json!({
            "R": self.r.to_json(),
            "betas": self.betas.iter().map(|b| vec![crate::numeric::fmt_f64(b.re), crate::numeric::fmt_f64(b.im)]).collect::<Vec<_>>(),
            "beta_l1": crate::numeric::fmt_f64(self.beta_l1),
        })
    }
}

struct Roots {
    alpha: Vec<CFix>,
    dp: Vec<CFix>,
    prec: u32,
}

fn refined_roots(p: &IntPolynomial, prec: u32) -> Result<Roots> {
    let dpoly = p.derivative();
    let approx = complex_roots(p)?;
    let mut alpha = Vec::with_capacity(approx.len());
    for z in approx {
        let a = newton_refine(p, &dpoly, z, prec)
            .ok_or_else(|| Error::Domain(format!("root refinement failed near {z}")))?;
        alpha.push(a);
    }
    let dp = alpha.iter().map(|a| eval_int(&dpoly, a, prec)).collect();
    Ok(Roots { alpha, dp, prec })
}

fn lift(coeffs: &[BigInt], from: u32, to: u32) -> Vec<BigInt> {
    coeffs.iter().map(|c| c << (to - from) as usize).collect()
}

/// `(Q - R)(alpha_j) / P'(alpha_j)` for every root.
fn betas_of(diff: &[BigInt], roots: &Roots) -> Vec<CFix> {
    roots
        .alpha
        .iter()
        .zip(&roots.dp)
        .map(|(a, d)| eval_fixed(diff, a, roots.prec).div(d, roots.prec))
        .collect()
}

fn l1(betas: &[CFix], prec: u32) -> f64 {
    betas.iter().map(|b| b.to_c64(prec).norm()).sum()
}

fn diff_fixed(q: &[BigInt], r: &IntPolynomial, prec: u32) -> Vec<BigInt> {
    let n = q.len().max(r.coeffs().len());
    (0..n)
        .map(|i| q.get(i).cloned().unwrap_or_default() - (r.coeff(i) << prec as usize))
        .collect()
}

/// Replace a real polynomial `Q` by an integer polynomial `R` whose difference is a
/// small combination of the Lagrange polynomials `P(z)/(z - alpha_j)`. The integer
/// choice starts from coefficient rounding and is refined by nearest-plane rounding
/// in the lattice of values `S(alpha_j)/P'(alpha_j)`.
pub fn adjust_to_integer(q: &RealPolynomial, p: &IntPolynomial) -> Result<AdjustmentResult> {
    let n = p.degree().ok_or_else(|| Error::Degree("P is zero".into()))?;
    if n == 0 {
        return Err(Error::Degree("P must have positive degree".into()));
    }
    if !q.is_zero() && q.deg() >= n {
        return Err(Error::Degree(format!("deg Q = {} must be below deg P = {n}", q.deg())));
    }
    if !p.is_squarefree() {
        return Err(Error::NotSquarefree);
    }
    let prec = q.precision() + 64;
    let roots = refined_roots(p, prec)?;
    let qf = lift(q.fixed_coeffs(), q.precision(), prec);

    let r0 = IntPolynomial::round_from(q);
    let mut best_r = r0.clone();
    let mut best_b = betas_of(&diff_fixed(&qf, &r0, prec), &roots);
    let mut best_l1 = l1(&best_b, prec);

    if best_l1 > 0.0 {
        if let Some(r1) = refine(&qf, &r0, &roots, n) {
            let b1 = betas_of(&diff_fixed(&qf, &r1, prec), &roots);
            let l = l1(&b1, prec);
            if l < best_l1 {
                best_r = r1;
                best_b = b1;
                best_l1 = l;
            }
        }
    }

    let diff = diff_fixed(&qf, &best_r, prec);
    let residual_log2 = residual(&diff, &best_b, p, &roots);
    Ok(AdjustmentResult {
        r: best_r,
        betas: best_b.iter().map(|b| b.to_c64(prec)).collect(),
        beta_l1: best_l1,
        residual_log2,
        precision: q.precision(),
    })
}

fn embed_values(vals: &[CFix], inv_dp: &[CFix], prec: u32) -> Vec<BigInt> {
    let mut out = Vec::with_capacity(2 * vals.len());
    for (v, w) in vals.iter().zip(inv_dp) {
        let z = v.mul(w, prec);
        out.push(z.re);
        out.push(z.im);
    }
    out
}

fn refine(qf: &[BigInt], r0: &IntPolynomial, roots: &Roots, n: usize) -> Option<IntPolynomial> {
    let prec = roots.prec;
    let one = CFix::from_real_fixed(BigInt::one() << prec as usize);
    let inv_dp: Vec<CFix> = roots.dp.iter().map(|d| one.div(d, prec)).collect();
    // basis of integer Chebyshev polynomials centred near the roots
    let mean = roots.alpha.iter().map(|a| a.to_c64(prec).re).sum::<f64>() / n as f64;
    let c = mean.round().to_i64()?;
    let shift = CFix::from_real_fixed(BigInt::from(c) << prec as usize);
    let table: Vec<Vec<CFix>> = roots
        .alpha
        .iter()
        .map(|a| super::integer_chebyshev_values(&a.sub(&shift), n, prec))
        .collect();
    let emb0: Vec<Vec<BigInt>> = (0..n)
        .map(|k| {
            let vals: Vec<CFix> = table.iter().map(|t| t[k].clone()).collect();
            embed_values(&vals, &inv_dp, prec)
        })
        .collect();
    let coords: Vec<Vec<BigInt>> = (0..n).map(|i| super::unit_vector(i, n)).collect();
    let red = lll_reduce(coords, emb0, prec as i64, LLL_DELTA);
    let diff = diff_fixed(qf, r0, prec);
    let vals: Vec<CFix> = roots.alpha.iter().map(|a| eval_fixed(&diff, a, prec)).collect();
    let target = embed_values(&vals, &inv_dp, prec);
    let (comb, _) = babai(&red, &target);
    let mut s = IntPolynomial::zero();
    for (k, ck) in comb.iter().enumerate() {
        if !ck.is_zero() {
            s = &s + &super::integer_chebyshev(k, c).scale(ck);
        }
    }
    Some(r0 + &s)
}

/// `log2` of the largest coefficient of `(Q - R) - sum_j beta_j P(z)/(z - alpha_j)`.
fn residual(diff: &[BigInt], betas: &[CFix], p: &IntPolynomial, roots: &Roots) -> f64 {
    let prec = roots.prec;
    let n = p.deg();
    let mut acc: Vec<CFix> = vec![CFix::zero(); n];
    let pc: Vec<BigInt> = p.coeffs().iter().map(|c| c << prec as usize).collect();
    for (a, b) in roots.alpha.iter().zip(betas) {
        // synthetic division of P by (z - a)
        let mut q = vec![CFix::zero(); n];
        q[n - 1] = CFix::from_real_fixed(pc[n].clone());
        for i in (1..n).rev() {
            q[i - 1] = CFix::from_real_fixed(pc[i].clone()).add(&q[i].mul(a, prec));
        }
        for (s, qi) in acc.iter_mut().zip(&q) {
            *s = s.add(&qi.mul(b, prec));
        }
    }
    let mut worst = f64::NEG_INFINITY;
    for i in 0..n {
        let d = diff.get(i).cloned().unwrap_or_default();
        let re = &d - &acc[i].re;
        let im = &acc[i].im;
        for v in [re, im.clone()] {
            if !v.is_zero() {
                let x = big_to_f64_scaled(&v, prec as i64).abs();
                worst = worst.max(x.log2());
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_input_is_fixed() {
        let p = IntPolynomial::from_i64(&[-2, 0, 1]);
        let q = RealPolynomial::from_int(&IntPolynomial::from_i64(&[3, -1]));
        let a = adjust_to_integer(&q, &p).unwrap();
        assert_eq!(a.r, IntPolynomial::from_i64(&[3, -1]));
        assert_eq!(a.beta_l1, 0.0);
        let z = adjust_to_integer(&RealPolynomial::from_f64(&[]), &p).unwrap();
        assert!(z.r.is_zero() && z.beta_l1 == 0.0);
    }

    #[test]
    fn half_x_over_sqrt2_roots() {
        let p = IntPolynomial::from_i64(&[-2, 0, 1]);
        let q = RealPolynomial::from_f64(&[0.0, 0.5]);
        let a = adjust_to_integer(&q, &p).unwrap();
        assert!(a.beta_l1 <= 0.5 + 1e-12, "{}", a.beta_l1);
        assert!(a.residual_ok(), "{}", a.residual_log2);
        // any integer R in the small box does no better
        for c0 in -2..=2 {
            for c1 in -2..=2 {
                let r = IntPolynomial::from_i64(&[c0, c1]);
                let l: f64 = [2f64.sqrt(), -(2f64.sqrt())]
                    .iter()
                    .map(|&x| ((0.5 * x - (c0 as f64 + c1 as f64 * x)) / (2.0 * x)).abs())
                    .sum();
                assert!(l >= a.beta_l1 - 1e-12, "{r}");
            }
        }
    }

    #[test]
    fn errors() {
        let p = IntPolynomial::from_i64(&[0, 0, 1]);
        let q = RealPolynomial::from_f64(&[0.5]);
        assert_eq!(adjust_to_integer(&q, &p).unwrap_err(), Error::NotSquarefree);
        let p = IntPolynomial::from_i64(&[-2, 0, 1]);
        let q = RealPolynomial::from_f64(&[0.5, 0.0, 1.0]);
        assert!(matches!(adjust_to_integer(&q, &p), Err(Error::Degree(_))));
    }
}
