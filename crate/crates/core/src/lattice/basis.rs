use super::adjust::adjust_to_integer;
use super::lll::{lll_reduce, LLL_DELTA};
use super::{integer_chebyshev, integer_chebyshev_values, unit_vector, CFix};
use crate::error::{domain, failed, Error, Result};
use crate::interval::IntervalUnion;
use crate::measure::{energy, potential, quantile, MixtureMeasure};
use crate::poly::{certainly_coprime, log_n_norm, IntPolynomial, RealPolynomial};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{Signed, ToPrimitive, Zero};

const EMBED_PRECISION: u32 = 256;

/// Linearly independent integer polynomials of degree at most `n` with small n-norms,
/// sorted by norm.
#[derive(Debug, Clone)]
pub struct NormBasis {
    pub polynomials: Vec<IntPolynomial>,
    pub norms: Vec<f64>,
    pub log_norms: Vec<f64>,
    pub product_log: f64,
    /// `log D` for the evaluation body at the quantile points (weights `e^{n U(alpha_i)}`).
    pub log_minkowski_d: f64,
    /// `(product_log - n^2 I / 2) / (n log n)`, or `0` for `n < 2`.
    pub hilbert_constant: f64,
}

fn lgamma_int(m: usize) -> f64 {
    (2..=m).map(|k| (k as f64).ln()).sum()
}

impl NormBasis {
    /// `log` of the lower bound `(1/(m+1)!) exp((mn - m^2/2 + n - m/2) I)` with `R = 1`, `m = n`.
    pub fn squeeze_lower_log(n: usize, energy: f64) -> f64 {
        let (m, nf) = (n as f64, n as f64);
        -lgamma_int(n + 1) + (m * nf - 0.5 * m * m + nf - 0.5 * m) * energy
    }
}

fn hull_centre(sigma: &IntervalUnion) -> Result<i64> {
    let (a, b) = sigma.hull();
    (0.5 * (a + b))
        .round()
        .to_i64()
        .ok_or_else(|| Error::Domain("set too far from the origin".into()))
}

/// LLL-reduced basis of the lattice of integer polynomials of degree at most `n`,
/// embedded by `P -> (e^{n U(alpha_i)} P(alpha_i))_i` at the `i/(n+1)` quantiles of `mu`.
pub fn small_norm_basis(mu: &MixtureMeasure, sigma: &IntervalUnion, n: usize) -> Result<NormBasis> {
    sigma.require_compact()?;
    if mu.has_atoms() {
        return domain("quantile points collide for a measure with atoms");
    }
    let finish = |polys: Vec<IntPolynomial>, log_d: f64| -> Result<NormBasis> {
        let mut rows: Vec<(f64, IntPolynomial)> = polys
            .into_iter()
            .map(|p| Ok((log_n_norm(&p, n, mu, sigma)?, p)))
            .collect::<Result<_>>()?;
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        let log_norms: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let product_log = log_norms.iter().sum();
        let hilbert_constant = if n >= 2 {
            let nf = n as f64;
            (product_log - 0.5 * nf * nf * energy(mu)) / (nf * nf.ln())
        } else {
            0.0
        };
        Ok(NormBasis {
            norms: log_norms.iter().map(|l| l.exp()).collect(),
            log_norms,
            product_log,
            polynomials: rows.into_iter().map(|r| r.1).collect(),
            log_minkowski_d: log_d,
            hilbert_constant,
        })
    };
    if n == 0 {
        return finish(vec![IntPolynomial::one()], 0.0);
    }
    let alpha: Vec<f64> = (1..=n + 1)
        .map(|i| quantile(mu, i as f64 / (n + 1) as f64))
        .collect::<Result<_>>()?;
    if alpha.windows(2).any(|w| w[1] <= w[0]) {
        return domain("quantile points are not distinct");
    }
    let lw: Vec<f64> = alpha
        .iter()
        .map(|&x| n as f64 * potential(mu, x).value)
        .collect();
    let mut log_d: f64 = lw.iter().sum();
    for i in 0..alpha.len() {
        for j in i + 1..alpha.len() {
            log_d += (alpha[j] - alpha[i]).ln();
        }
    }
    let top = lw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let c = hull_centre(sigma)?;
    let dim = n + 1;
    let prec = EMBED_PRECISION;
    let columns: Vec<Vec<BigInt>> = alpha
        .iter()
        .zip(&lw)
        .map(|(&x, l)| {
            let y = CFix::from_c64(Complex64::new(x - c as f64, 0.0), prec);
            let w = CFix::from_c64(Complex64::new((l - top).exp(), 0.0), prec);
            integer_chebyshev_values(&y, dim, prec)
                .iter()
                .map(|v| v.mul(&w, prec).re)
                .collect()
        })
        .collect();
    let emb0: Vec<Vec<BigInt>> = (0..dim)
        .map(|k| (0..dim).map(|i| columns[i][k].clone()).collect())
        .collect();
    let coords: Vec<Vec<BigInt>> = (0..dim).map(|i| unit_vector(i, dim)).collect();
    let red = lll_reduce(coords, emb0, prec as i64, LLL_DELTA);
    let basis: Vec<IntPolynomial> = (0..dim).map(|k| integer_chebyshev(k, c)).collect();
    let polys = red
        .coeffs
        .iter()
        .map(|comb| {
            let mut p = IntPolynomial::zero();
            for (ck, b) in comb.iter().zip(&basis) {
                if !ck.is_zero() {
                    p = &p + &b.scale(ck);
                }
            }
            p
        })
        .collect();
    finish(polys, log_d)
}

fn coprime(a: &IntPolynomial, b: &IntPolynomial) -> bool {
    certainly_coprime(a, b) || a.gcd(b).deg() == 0
}

/// Calls `f` on every vector of `len` entries in `[0, cap]` summing to `s`, in
/// lexicographic order, until it returns `true`.
fn compositions<F: FnMut(&[u64]) -> bool>(len: usize, s: u64, cap: u64, f: &mut F) -> bool {
    fn rec<F: FnMut(&[u64]) -> bool>(v: &mut Vec<u64>, len: usize, left: u64, cap: u64, f: &mut F) -> bool {
        if v.len() + 1 == len {
            if left > cap {
                return false;
            }
            v.push(left);
            let done = f(v);
            v.pop();
            return done;
        }
        let rest = (len - v.len() - 1) as u64;
        let lo = left.saturating_sub(rest * cap);
        for x in lo..=left.min(cap) {
            v.push(x);
            let done = rec(v, len, left - x, cap, f);
            v.pop();
            if done {
                return true;
            }
        }
        false
    }
    if len == 0 {
        return s == 0 && f(&[]);
    }
    rec(&mut Vec::with_capacity(len), len, s, cap, f)
}

fn normalize_sign(p: IntPolynomial) -> IntPolynomial {
    if p.lead().is_negative() {
        -&p
    } else {
        p
    }
}

/// Nonnegative `b_2, ..., b_k` (smallest sum first) with
/// `Q_1 + b_2 Q_2 + ... + b_k Q_k = Q R`, where `Q` is the gcd of the inputs and
/// `R` is squarefree and coprime to every `Q_i`.
pub fn combine_squarefree(qs: &[IntPolynomial]) -> Result<(Vec<u64>, IntPolynomial, IntPolynomial)> {
    if qs.is_empty() || qs.iter().any(IntPolynomial::is_zero) {
        return domain("combine_squarefree needs nonzero polynomials");
    }
    if qs.len() == 1 {
        let q = &qs[0];
        if q.is_squarefree() {
            return Ok((Vec::new(), q.clone(), IntPolynomial::one()));
        }
    }
    let k = qs.len();
    let n = qs.iter().map(IntPolynomial::deg).max().unwrap_or(0);
    let g = normalize_sign(qs.iter().skip(1).fold(qs[0].clone(), |g, q| g.gcd(q)));
    let cap = (n * (k + 2)) as u64;
    let mut found = None;
    for s in 0..=cap * (k as u64 - 1).max(1) {
        let hit = compositions(k - 1, s, cap, &mut |b: &[u64]| {
            let mut sum = qs[0].clone();
            for (bi, q) in b.iter().zip(&qs[1..]) {
                if *bi > 0 {
                    sum = &sum + &q.scale(&BigInt::from(*bi));
                }
            }
            if sum.is_zero() || sum.deg() != n {
                return false;
            }
            let Some(r) = sum.div_exact(&g) else {
                return false;
            };
            if r.is_squarefree() && qs.iter().all(|q| coprime(&r, q)) {
                found = Some((b.to_vec(), r));
                return true;
            }
            false
        });
        if hit || k == 1 {
            break;
        }
    }
    match found {
        Some((b, r)) => Ok((b, g, r)),
        None => Err(failed("combine_squarefree", format!("no combination in the box [0, {cap}]"))),
    }
}

/// Outcome of [`squarefree_small_norm_report`].
#[derive(Debug, Clone)]
pub struct SquarefreeReport {
    pub polynomial: IntPolynomial,
    pub log_norm: f64,
    /// `log ||Q_n||_n / (sqrt(n) log n)`.
    pub c_ratio: f64,
    /// Index of the basis prefix used for the squarefree combination.
    pub prefix: usize,
    pub combination: Vec<u64>,
    /// Integers `i` of the padding factor `prod (z - i)`.
    pub padding: Vec<i64>,
    /// Largest `beta_l1` when adjusting `z^j / 2` against the squarefree part.
    pub half_adjust_l1: f64,
}

/// Squarefree integer polynomial of degree exactly `n` with small n-norm.
pub fn squarefree_small_norm(mu: &MixtureMeasure, sigma: &IntervalUnion, n: usize) -> Result<IntPolynomial> {
    Ok(squarefree_small_norm_report(mu, sigma, n)?.polynomial)
}

/// [`squarefree_small_norm`] together with its bookkeeping.
pub fn squarefree_small_norm_report(mu: &MixtureMeasure, sigma: &IntervalUnion, n: usize) -> Result<SquarefreeReport> {
    if n < 2 {
        return Err(Error::Degree("squarefree_small_norm needs n >= 2".into()));
    }
    let basis = small_norm_basis(mu, sigma, n)?;
    let ps = &basis.polynomials;
    let threshold = n as f64 - (n as f64).sqrt();
    // first prefix whose usable degree reaches n - sqrt(n)
    let mut g = ps[0].clone();
    let mut maxdeg = ps[0].deg();
    let mut start = ps.len() - 1;
    for (i, p) in ps.iter().enumerate() {
        if i > 0 {
            g = g.gcd(p);
            maxdeg = maxdeg.max(p.deg());
        }
        if (maxdeg - g.deg()) as f64 >= threshold {
            start = i;
            break;
        }
    }
    let centre = hull_centre(sigma)?;
    let mut best: Option<SquarefreeReport> = None;
    let mut failures = Vec::new();
    for i in start..(start + 3).min(ps.len()) {
        let qs: Vec<IntPolynomial> = ps[..=i].iter().rev().cloned().collect();
        let (bs, _, r) = match combine_squarefree(&qs) {
            Ok(v) => v,
            Err(e) => {
                failures.push(format!("prefix {i}: {e}"));
                continue;
            }
        };
        let r = normalize_sign(r.primitive());
        if r.deg() > n {
            continue;
        }
        let mut padding = Vec::new();
        let mut step = 0i64;
        while padding.len() < n - r.deg() {
            // integers by distance from the centre: c, c+1, c-1, c+2, ...
            let j = centre + if step % 2 == 0 { step / 2 } else { -(step + 1) / 2 };
            step += 1;
            if !r.eval(&BigInt::from(j)).is_zero() {
                padding.push(j);
            }
        }
        let mut q = r.clone();
        for &j in &padding {
            q = &q * &IntPolynomial::linear(j);
        }
        if q.deg() != n || !q.is_squarefree() {
            failures.push(format!("prefix {i}: padded product not squarefree"));
            continue;
        }
        let log_norm = log_n_norm(&q, n, mu, sigma)?;
        if best.as_ref().is_some_and(|b| b.log_norm <= log_norm) {
            continue;
        }
        let mut half_adjust_l1 = 0.0f64;
        if r.deg() >= 1 {
            for j in [0, r.deg() - 1] {
                let mut c = vec![0.0; j + 1];
                c[j] = 0.5;
                let a = adjust_to_integer(&RealPolynomial::from_f64(&c), &r)?;
                half_adjust_l1 = half_adjust_l1.max(a.beta_l1);
            }
        }
        let nf = n as f64;
        best = Some(SquarefreeReport {
            polynomial: q,
            log_norm,
            c_ratio: log_norm / (nf.sqrt() * nf.ln()),
            prefix: i,
            combination: bs,
            padding,
            half_adjust_l1,
        });
    }
    best.ok_or_else(|| failed("squarefree_small_norm", failures.join("; ")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combine_examples() {
        let q1 = IntPolynomial::from_i64(&[0, 0, 1]);
        let q2 = IntPolynomial::from_i64(&[0, 1, 1]);
        let (b, q, r) = combine_squarefree(&[q1, q2]).unwrap();
        assert_eq!(b, vec![1]);
        assert_eq!(q, IntPolynomial::from_i64(&[0, 1]));
        assert_eq!(r, IntPolynomial::from_i64(&[1, 2]));
        let s = IntPolynomial::from_i64(&[-2, 0, 1]);
        let (b, q, r) = combine_squarefree(std::slice::from_ref(&s)).unwrap();
        assert!(b.is_empty() && q == s && r == IntPolynomial::one());
    }

    #[test]
    fn compositions_in_order() {
        let mut seen = Vec::new();
        compositions(2, 2, 5, &mut |v: &[u64]| {
            seen.push(v.to_vec());
            false
        });
        assert_eq!(seen, vec![vec![0, 2], vec![1, 1], vec![2, 0]]);
    }

    #[test]
    fn trivial_basis() {
        let sigma = IntervalUnion::from_f64(&[(0.0, 4.0)]).unwrap();
        let mu = MixtureMeasure::arcsine(0.0, 4.0);
        let b = small_norm_basis(&mu, &sigma, 0).unwrap();
        assert_eq!(b.polynomials, vec![IntPolynomial::one()]);
        assert!((b.norms[0] - 1.0).abs() < 1e-12);
    }
}
