use super::real::ChebExpansion;
use super::{real_roots, IntPolynomial, RealPolynomial};
use crate::error::{domain, Error, Result};
use crate::interval::IntervalUnion;
use crate::measure::{quantile, MixtureMeasure};
use crate::numeric::{cheb_extrema, golden_max};
use num_complex::Complex64;

/// Something whose `log|P(x)|` can be evaluated on a set.
pub trait NormPoly {
    fn degree(&self) -> usize;
    /// Evaluator for `log|P|` accurate on `[a, b]`.
    fn log_abs_on(&self, a: f64, b: f64) -> Box<dyn Fn(f64) -> f64 + '_>;
}

impl NormPoly for IntPolynomial {
    fn degree(&self) -> usize {
        self.deg()
    }
    fn log_abs_on(&self, a: f64, b: f64) -> Box<dyn Fn(f64) -> f64 + '_> {
        let e = ChebExpansion::from_int(self, a, b);
        Box::new(move |x| e.eval(x).abs().ln())
    }
}

impl NormPoly for RealPolynomial {
    fn degree(&self) -> usize {
        self.deg()
    }
    fn log_abs_on(&self, a: f64, b: f64) -> Box<dyn Fn(f64) -> f64 + '_> {
        if self.roots().is_some() {
            return Box::new(move |x| self.log_abs(x));
        }
        let e = ChebExpansion::from_real(self, a, b);
        Box::new(move |x| e.eval(x).abs().ln())
    }
}

/// `log max_{x in sigma} e^{n U^mu(x)} |P(x)|`.
pub fn log_n_norm<P: NormPoly + ?Sized>(p: &P, n: usize, mu: &MixtureMeasure, sigma: &IntervalUnion) -> Result<f64> {
    sigma.require_compact()?;
    let nf = n as f64;
    let mut best = f64::NEG_INFINITY;
    for (a, b) in sigma.components() {
        let lp = p.log_abs_on(a, b);
        let f = |x: f64| {
            let u = if n == 0 {
                0.0
            } else {
                mu.potential_c(Complex64::new(x, 0.0))
            };
            let v = lp(x) + nf * u;
            if v.is_nan() {
                f64::NEG_INFINITY
            } else {
                v
            }
        };
        if b <= a {
            best = best.max(f(a));
            continue;
        }
        let pts = cheb_extrema(a, b, (8 * p.degree() + 200).min(4000));
        let vals: Vec<f64> = pts.iter().map(|&x| f(x)).collect();
        let mut order: Vec<usize> = (0..pts.len()).collect();
        order.sort_by(|&i, &j| vals[j].total_cmp(&vals[i]));
        for &i in order.iter().take(6) {
            best = best.max(vals[i]);
            let lo = pts[i.saturating_sub(1)];
            let hi = pts[(i + 1).min(pts.len() - 1)];
            if hi > lo {
                let (_, v) = golden_max(f, lo, hi, 60);
                best = best.max(v);
            }
        }
    }
    Ok(best)
}

/// The n-norm `max_{x in sigma} e^{n U^mu(x)} |P(x)|`.
pub fn n_norm<P: NormPoly + ?Sized>(p: &P, n: usize, mu: &MixtureMeasure, sigma: &IntervalUnion) -> Result<f64> {
    Ok(log_n_norm(p, n, mu, sigma)?.exp())
}

/// `prod_{i=1..n} (z - alpha_i)` with `alpha_i` the `i/n` quantile of `mu`.
pub fn approximating_polynomial(mu: &MixtureMeasure, n: usize) -> Result<RealPolynomial> {
    if n == 0 {
        return domain("approximating polynomial needs positive degree");
    }
    if mu.has_atoms() {
        return domain("approximating polynomial needs an atomless measure");
    }
    let roots: Result<Vec<f64>> = (1..=n).map(|i| quantile(mu, i as f64 / n as f64)).collect();
    Ok(RealPolynomial::from_roots(&roots?))
}

/// Real roots of a real polynomial: cached ones, or isolated from the exact numerator.
pub fn real_root_points(p: &RealPolynomial) -> Result<Vec<f64>> {
    if let Some(r) = p.roots() {
        return Ok(r.to_vec());
    }
    let rs = real_roots(&p.numerator(), 1e-15)?;
    let mut out = Vec::new();
    for r in rs.roots {
        for _ in 0..r.multiplicity {
            out.push(r.mid_f64());
        }
    }
    Ok(out)
}

/// Degree-`n` pruned polynomial: keeps roots inside `sigma` that are neither the
/// least nor the greatest root in their component.
pub fn prune(p: &RealPolynomial, sigma: &IntervalUnion, n: usize) -> Result<RealPolynomial> {
    sigma.require_compact()?;
    let roots = real_root_points(p)?;
    let comps = sigma.components();
    let mut pools: Vec<Vec<f64>> = comps
        .iter()
        .map(|&(a, b)| {
            let mut inside: Vec<f64> = roots.iter().copied().filter(|&x| a <= x && x <= b).collect();
            inside.sort_by(f64::total_cmp);
            if inside.len() <= 2 {
                Vec::new()
            } else {
                inside[1..inside.len() - 1].to_vec()
            }
        })
        .collect();
    let total: usize = pools.iter().map(Vec::len).sum();
    if total < n {
        return Err(Error::PruneInfeasible(format!(
            "only {total} admissible roots for degree {n}"
        )));
    }
    let mut excess = total - n;
    let mut from_left = vec![true; pools.len()];
    while excess > 0 {
        let j = (0..pools.len())
            .max_by_key(|&j| (pools[j].len(), std::cmp::Reverse(j)))
            .expect("nonempty");
        if from_left[j] {
            pools[j].remove(0);
        } else {
            pools[j].pop();
        }
        from_left[j] = !from_left[j];
        excess -= 1;
    }
    let chosen: Vec<f64> = pools.into_iter().flatten().collect();
    Ok(RealPolynomial::from_roots(&chosen))
}
