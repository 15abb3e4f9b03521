use crate::poly::big_to_f64_scaled;
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

/// Default Lovasz parameter.
pub const LLL_DELTA: f64 = 0.99;

/// A reduced basis: exact integer coordinates, exact fixed-point embeddings
/// (`emb_exact / 2^shift`), their double images and Gram-Schmidt data.
#[derive(Debug, Clone)]
pub struct Reduced {
    pub coeffs: Vec<Vec<BigInt>>,
    pub emb_exact: Vec<Vec<BigInt>>,
    pub emb: Vec<Vec<f64>>,
    pub shift: i64,
    gs: Vec<Vec<f64>>,
    bn: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn round_big(x: f64) -> BigInt {
    match x.to_i64() {
        Some(v) if x.abs() < 9e15 => BigInt::from(v),
        _ => {
            let (c, k) = crate::poly::f64_to_dyadic(x.round());
            c >> k as usize
        }
    }
}

fn sub_mul(dst: &mut [BigInt], q: &BigInt, src: &[BigInt]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d -= q * s;
    }
}

impl Reduced {
    fn refresh(&mut self, k: usize) {
        let s = self.shift;
        self.emb[k] = self.emb_exact[k].iter().map(|x| big_to_f64_scaled(x, s)).collect();
    }

    /// Modified Gram-Schmidt for row `k` against rows `< k`.
    fn gs_row(&mut self, k: usize, mu: &mut [f64]) {
        let mut v = self.emb[k].clone();
        for j in 0..k {
            mu[j] = if self.bn[j] > 0.0 {
                dot(&v, &self.gs[j]) / self.bn[j]
            } else {
                0.0
            };
            for (x, g) in v.iter_mut().zip(&self.gs[j]) {
                *x -= mu[j] * g;
            }
        }
        self.bn[k] = dot(&v, &v);
        self.gs[k] = v;
    }

    /// Squared Gram-Schmidt lengths.
    pub fn gs_norms(&self) -> &[f64] {
        &self.bn
    }
}

/// LLL reduction of the lattice whose basis vectors have exact embeddings
/// `emb[i] / 2^shift`, tracking integer coordinates `coeffs[i]` alongside.
pub fn lll_reduce(coeffs: Vec<Vec<BigInt>>, emb: Vec<Vec<BigInt>>, shift: i64, delta: f64) -> Reduced {
    let n = coeffs.len();
    let dim = emb.first().map_or(0, |e| e.len());
    let mut r = Reduced {
        coeffs,
        emb_exact: emb,
        emb: vec![Vec::new(); n],
        shift,
        gs: vec![vec![0.0; dim]; n],
        bn: vec![0.0; n],
    };
    for k in 0..n {
        r.refresh(k);
    }
    if n == 0 {
        return r;
    }
    let mut mu = vec![vec![0.0; n]; n];
    r.gs_row(0, &mut mu[0]);
    let mut k = 1;
    let mut guard = 0usize;
    while k < n {
        guard += 1;
        if guard > 50 * n * n + 10_000 {
            break;
        }
        // size reduction, repeated until the doubles agree that it is done
        for _ in 0..16 {
            let mut row = std::mem::take(&mut mu[k]);
            r.gs_row(k, &mut row);
            mu[k] = row;
            let mut changed = false;
            for j in (0..k).rev() {
                let q = mu[k][j].round();
                if q == 0.0 {
                    continue;
                }
                changed = true;
                let qb = round_big(q);
                let (lo, hi) = r.coeffs.split_at_mut(k);
                sub_mul(&mut hi[0], &qb, &lo[j]);
                let (lo, hi) = r.emb_exact.split_at_mut(k);
                sub_mul(&mut hi[0], &qb, &lo[j]);
                let (mlo, mhi) = mu.split_at_mut(k);
                for i in 0..j {
                    mhi[0][i] -= q * mlo[j][i];
                }
                mhi[0][j] -= q;
            }
            if !changed {
                break;
            }
            r.refresh(k);
        }
        let m = mu[k][k - 1];
        if r.bn[k] >= (delta - m * m) * r.bn[k - 1] {
            k += 1;
        } else {
            r.coeffs.swap(k, k - 1);
            r.emb_exact.swap(k, k - 1);
            r.emb.swap(k, k - 1);
            let km = k - 1;
            let mut row = std::mem::take(&mut mu[km]);
            r.gs_row(km, &mut row);
            mu[km] = row;
            if k > 1 {
                k -= 1;
            }
        }
    }
    for k in 0..n {
        let mut row = std::mem::take(&mut mu[k]);
        r.gs_row(k, &mut row);
        mu[k] = row;
    }
    r
}

/// Nearest-plane rounding of `target / 2^shift` onto the reduced lattice. Returns the
/// integer combination of basis coordinates and the exact residual. Passes repeat
/// until nothing changes, so targets far beyond double range still reduce fully.
pub fn babai(r: &Reduced, target: &[BigInt]) -> (Vec<BigInt>, Vec<BigInt>) {
    let dim = r.coeffs.first().map_or(0, |c| c.len());
    let mut t = target.to_vec();
    let mut acc = vec![BigInt::zero(); dim];
    for _ in 0..64 {
        let mut moved = false;
        for i in (0..r.coeffs.len()).rev() {
            if r.bn[i] <= 0.0 {
                continue;
            }
            let tf: Vec<f64> = t.iter().map(|x| big_to_f64_scaled(x, r.shift)).collect();
            let q = (dot(&tf, &r.gs[i]) / r.bn[i]).round();
            if q == 0.0 || !q.is_finite() {
                continue;
            }
            moved = true;
            let qb = round_big(q);
            for (a, c) in acc.iter_mut().zip(&r.coeffs[i]) {
                *a += &qb * c;
            }
            sub_mul(&mut t, &qb, &r.emb_exact[i]);
        }
        if !moved {
            break;
        }
    }
    (acc, t)
}
