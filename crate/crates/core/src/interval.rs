//! Finite unions of closed real intervals, their capacity and equilibrium measure.

use crate::error::{Error, Result};
use crate::measure::{Component, MixtureMeasure};
use crate::numeric::cheb_extrema;
use bigdecimal::{BigDecimal, ToPrimitive};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq)]
pub struct Interval {
    pub lo: BigDecimal,
    pub hi: BigDecimal,
}

impl Interval {
    pub fn new(lo: &str, hi: &str) -> Result<Self> {
        Ok(Interval {
            lo: dec(lo)?,
            hi: dec(hi)?,
        })
    }

    pub fn bounds(&self) -> (f64, f64) {
        (to_f64(&self.lo), to_f64(&self.hi))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RayDirection {
    Left,
    Right,
}

/// Unbounded ray `[start, +inf)` (right) or `(-inf, start]` (left).
#[derive(Debug, Clone, PartialEq)]
pub struct Ray {
    pub start: BigDecimal,
    pub direction: RayDirection,
}

impl Ray {
    pub fn start_f64(&self) -> f64 {
        to_f64(&self.start)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntervalUnion {
    intervals: Vec<Interval>,
    ray: Option<Ray>,
}

pub(crate) fn dec(s: &str) -> Result<BigDecimal> {
    BigDecimal::from_str(s.trim()).map_err(|_| Error::Parse(format!("bad decimal {s:?}")))
}

pub(crate) fn to_f64(d: &BigDecimal) -> f64 {
    // BigDecimal -> f64 via its canonical string is correctly rounded by the std parser.
    d.to_string().parse::<f64>().unwrap_or_else(|_| d.to_f64().unwrap_or(f64::NAN))
}

/// Sort and merge overlapping or touching intervals.
pub fn normalize(raw: &[(BigDecimal, BigDecimal)]) -> Result<IntervalUnion> {
    normalize_with_ray(raw, None)
}

pub fn normalize_with_ray(
    raw: &[(BigDecimal, BigDecimal)],
    ray: Option<Ray>,
) -> Result<IntervalUnion> {
    if raw.is_empty() && ray.is_none() {
        return Err(Error::EmptySet);
    }
    let mut v: Vec<Interval> = Vec::with_capacity(raw.len());
    for (lo, hi) in raw {
        if lo > hi {
            return Err(Error::Domain(format!("interval [{lo}, {hi}] has lo > hi")));
        }
        v.push(Interval {
            lo: lo.clone(),
            hi: hi.clone(),
        });
    }
    v.sort_by(|a, b| a.lo.cmp(&b.lo).then(a.hi.cmp(&b.hi)));
    let mut merged: Vec<Interval> = Vec::with_capacity(v.len());
    for iv in v {
        match merged.last_mut() {
            Some(last) if iv.lo <= last.hi => {
                if iv.hi > last.hi {
                    last.hi = iv.hi;
                }
            }
            _ => merged.push(iv),
        }
    }
    // absorb intervals swallowed by or touching the ray
    let ray = match ray {
        None => None,
        Some(mut r) => {
            match r.direction {
                RayDirection::Right => {
                    while let Some(last) = merged.last() {
                        if last.hi >= r.start {
                            if last.lo < r.start {
                                r.start = last.lo.clone();
                            }
                            merged.pop();
                        } else {
                            break;
                        }
                    }
                }
                RayDirection::Left => {
                    while let Some(first) = merged.first() {
                        if first.lo <= r.start {
                            if first.hi > r.start {
                                r.start = first.hi.clone();
                            }
                            merged.remove(0);
                        } else {
                            break;
                        }
                    }
                }
            }
            Some(r)
        }
    };
    Ok(IntervalUnion {
        intervals: merged,
        ray,
    })
}

impl IntervalUnion {
    /// Single closed interval from decimal strings.
    pub fn interval(lo: &str, hi: &str) -> Result<Self> {
        normalize(&[(dec(lo)?, dec(hi)?)])
    }

    /// Union from `f64` endpoints (converted through their shortest decimal form).
    pub fn from_f64(parts: &[(f64, f64)]) -> Result<Self> {
        let raw: Result<Vec<_>> = parts
            .iter()
            .map(|&(a, b)| {
                Ok((
                    dec(&crate::numeric::fmt_f64(a))?,
                    dec(&crate::numeric::fmt_f64(b))?,
                ))
            })
            .collect();
        normalize(&raw?)
    }

    pub fn with_ray(mut self, start: &str, direction: RayDirection) -> Result<Self> {
        let raw: Vec<_> = self
            .intervals
            .drain(..)
            .map(|iv| (iv.lo, iv.hi))
            .collect();
        normalize_with_ray(
            &raw,
            Some(Ray {
                start: dec(start)?,
                direction,
            }),
        )
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn ray(&self) -> Option<&Ray> {
        self.ray.as_ref()
    }

    pub fn is_compact(&self) -> bool {
        self.ray.is_none()
    }

    pub fn require_compact(&self) -> Result<()> {
        if self.ray.is_some() {
            Err(Error::NotCompact)
        } else {
            Ok(())
        }
    }

    /// Bounded components as `f64` pairs.
    pub fn components(&self) -> Vec<(f64, f64)> {
        self.intervals.iter().map(|iv| iv.bounds()).collect()
    }

    /// Components of positive length.
    pub fn proper_components(&self) -> Vec<(f64, f64)> {
        self.components().into_iter().filter(|(a, b)| b > a).collect()
    }

    pub fn component_count(&self) -> usize {
        self.intervals.len() + usize::from(self.ray.is_some())
    }

    /// True when compact and free of isolated points.
    pub fn is_finite_union_of_intervals(&self) -> bool {
        self.is_compact() && self.intervals.iter().all(|iv| iv.lo < iv.hi)
    }

    pub fn hull(&self) -> (f64, f64) {
        let comps = self.components();
        let mut lo = comps.first().map(|c| c.0).unwrap_or(f64::INFINITY);
        let mut hi = comps.last().map(|c| c.1).unwrap_or(f64::NEG_INFINITY);
        if let Some(r) = &self.ray {
            let s = to_f64(&r.start);
            match r.direction {
                RayDirection::Right => {
                    lo = lo.min(s);
                    hi = f64::INFINITY;
                }
                RayDirection::Left => {
                    lo = f64::NEG_INFINITY;
                    hi = hi.max(s);
                }
            }
        }
        (lo, hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        if self.components().iter().any(|&(a, b)| a <= x && x <= b) {
            return true;
        }
        match &self.ray {
            Some(r) => {
                let s = to_f64(&r.start);
                match r.direction {
                    RayDirection::Right => x >= s,
                    RayDirection::Left => x <= s,
                }
            }
            None => false,
        }
    }

    /// Index of the bounded component containing `x`.
    pub fn component_of(&self, x: f64) -> Option<usize> {
        self.components().iter().position(|&(a, b)| a <= x && x <= b)
    }

    /// Signed distance from `x` to the complement: positive inside, negative outside.
    pub fn margin(&self, x: f64) -> f64 {
        let comps = self.components();
        let mut best = f64::NEG_INFINITY;
        for &(a, b) in &comps {
            let d = if x < a {
                x - a
            } else if x > b {
                b - x
            } else {
                (x - a).min(b - x)
            };
            best = best.max(d);
        }
        best
    }

    pub fn is_subset_of(&self, other: &IntervalUnion) -> bool {
        if self.ray.is_some() && other.ray.as_ref().map(|r| r.direction) != self.ray.as_ref().map(|r| r.direction) {
            return false;
        }
        self.intervals.iter().all(|iv| {
            other
                .intervals
                .iter()
                .any(|ov| ov.lo <= iv.lo && iv.hi <= ov.hi)
                || other.ray.as_ref().is_some_and(|r| match r.direction {
                    RayDirection::Right => iv.lo >= r.start,
                    RayDirection::Left => iv.hi <= r.start,
                })
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CapacityMethod {
    ClosedForm,
    EnergyMinimization,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityResult {
    pub capacity: f64,
    pub method: CapacityMethod,
    pub estimated_error: f64,
}

/// Number of series terms per component used by the union solver.
const SERIES_TERMS: usize = 64;

/// Logarithmic capacity.
pub fn capacity(sigma: &IntervalUnion) -> Result<CapacityResult> {
    sigma.require_compact()?;
    let proper: Vec<&Interval> = sigma.intervals.iter().filter(|iv| iv.lo < iv.hi).collect();
    match proper.len() {
        0 => Ok(CapacityResult {
            capacity: 0.0,
            method: CapacityMethod::ClosedForm,
            estimated_error: 0.0,
        }),
        1 => {
            let iv = proper[0];
            let width = (&iv.hi - &iv.lo) / BigDecimal::from(4);
            Ok(CapacityResult {
                capacity: to_f64(&width),
                method: CapacityMethod::ClosedForm,
                estimated_error: 0.0,
            })
        }
        _ => {
            let sol = UnionEquilibrium::solve(&sigma.proper_components(), SERIES_TERMS)?;
            let cap = (-sol.energy).exp();
            Ok(CapacityResult {
                capacity: cap,
                method: CapacityMethod::EnergyMinimization,
                estimated_error: cap * sol.oscillation(),
            })
        }
    }
}

/// Equilibrium measure; `nodes` is the collocation budget shared by the components.
pub fn equilibrium_measure(sigma: &IntervalUnion, nodes: usize) -> Result<MixtureMeasure> {
    sigma.require_compact()?;
    let comps = sigma.proper_components();
    if comps.is_empty() {
        return Err(Error::Domain("set has zero capacity".into()));
    }
    let per = nodes / comps.len();
    if per < 2 {
        return Err(Error::InsufficientNodes {
            needed: 2 * comps.len(),
            got: nodes,
        });
    }
    if comps.len() == 1 {
        let (a, b) = comps[0];
        return Ok(MixtureMeasure::new(vec![Component::equilibrium(a, b, 1.0)]));
    }
    let sol = UnionEquilibrium::solve(&comps, per.min(SERIES_TERMS))?;
    Ok(sol.to_measure())
}

/// Spectral solution of the equilibrium problem on a union of intervals.
///
/// On component `j` the density is `(w_j + sum_k c_jk T_k(s)) / (pi h_j sqrt(1 - s^2))`
/// with `s = (x - m_j)/h_j`; coefficients come from a Galerkin energy minimisation.
#[derive(Debug, Clone)]
pub struct UnionEquilibrium {
    pub comps: Vec<(f64, f64)>,
    pub masses: Vec<f64>,
    pub coeffs: Vec<Vec<f64>>,
    /// Equilibrium energy `I(mu) = -log capacity`.
    pub energy: f64,
}

/// Joukowski inverse with |phi| >= 1.
pub(crate) fn joukowski_inv(s: Complex64) -> Complex64 {
    let w = s + (s - 1.0).sqrt() * (s + 1.0).sqrt();
    if w.norm() < 1.0 {
        1.0 / w
    } else {
        w
    }
}

/// Real-argument Joukowski inverse, `|phi| >= 1`, sign following `s` outside `[-1, 1]`.
pub(crate) fn joukowski_inv_real(s: f64) -> f64 {
    if s > 1.0 {
        s + ((s - 1.0) * (s + 1.0)).sqrt()
    } else if s < -1.0 {
        s - ((s - 1.0) * (s + 1.0)).sqrt()
    } else {
        1.0_f64.copysign(s)
    }
}

/// Potential of the zero-mass signed measure `T_k(s) ds/(pi sqrt(1-s^2))` at real `s`.
pub(crate) fn cheb_mode_potential(k: usize, s: f64) -> f64 {
    let kf = k as f64;
    if s.abs() <= 1.0 {
        (kf * s.acos()).cos() / kf
    } else {
        joukowski_inv_real(s).powi(-(k as i32)) / kf
    }
}

pub(crate) fn cheb_mode_potential_c(k: usize, s: Complex64) -> f64 {
    if s.im == 0.0 {
        return cheb_mode_potential(k, s.re);
    }
    joukowski_inv(s).powi(-(k as i32)).re / k as f64
}

/// Arcsine potential on `[m-h, m+h]` at real `x`.
pub(crate) fn arcsine_potential(a: f64, b: f64, x: f64) -> f64 {
    let h = 0.5 * (b - a);
    // acosh(1 + e) with e the distance outside [a, b] in units of h
    let e = if x < a {
        (a - x) / h
    } else if x > b {
        (x - b) / h
    } else {
        0.0
    };
    -(0.5 * h).ln() - (e + (e * (2.0 + e)).sqrt()).ln_1p()
}

impl UnionEquilibrium {
    pub fn solve(comps: &[(f64, f64)], terms: usize) -> Result<Self> {
        let k0 = comps.len();
        let kk = terms.max(1);
        let nb = k0 * (kk + 1);
        let nq = 4 * kk + 96;
        let idx = |j: usize, k: usize| j * (kk + 1) + k;
        let geo: Vec<(f64, f64)> = comps
            .iter()
            .map(|&(a, b)| (0.5 * (a + b), 0.5 * (b - a)))
            .collect();
        let ends = comps.to_vec();
        // basis potential: k = 0 arcsine, k >= 1 Chebyshev modes
        let basis_pot = |j: usize, k: usize, x: f64| -> f64 {
            let (m, h) = geo[j];
            if k == 0 {
                arcsine_potential(ends[j].0, ends[j].1, x)
            } else {
                cheb_mode_potential(k, (x - m) / h)
            }
        };
        let mut g = vec![vec![0.0; nb]; nb];
        for j in 0..k0 {
            g[idx(j, 0)][idx(j, 0)] = -(0.5 * geo[j].1).ln();
            for k in 1..=kk {
                g[idx(j, k)][idx(j, k)] = 1.0 / (2.0 * k as f64);
            }
        }
        // cross-component entries by Gauss-Chebyshev quadrature on the receiving component
        for i in 0..k0 {
            let (mi, hi) = geo[i];
            let sq: Vec<f64> = (0..nq)
                .map(|q| (PI * (q as f64 + 0.5) / nq as f64).cos())
                .collect();
            let tl: Vec<Vec<f64>> = sq
                .iter()
                .map(|&s| {
                    let th = s.acos();
                    (0..=kk).map(|l| (l as f64 * th).cos()).collect()
                })
                .collect();
            for j in 0..k0 {
                if j == i {
                    continue;
                }
                for k in 0..=kk {
                    let vals: Vec<f64> = sq.iter().map(|&s| basis_pot(j, k, mi + hi * s)).collect();
                    for l in 0..=kk {
                        let mut acc = 0.0;
                        for q in 0..nq {
                            acc += vals[q] * tl[q][l];
                        }
                        g[idx(j, k)][idx(i, l)] = acc / nq as f64;
                    }
                }
            }
        }
        for a in 0..nb {
            for b in (a + 1)..nb {
                let v = 0.5 * (g[a][b] + g[b][a]);
                g[a][b] = v;
                g[b][a] = v;
            }
        }
        // KKT system: G c - V e = 0, e.c = 1 with e the mass functional
        let n = nb + 1;
        let mut mat = vec![vec![0.0; n]; n];
        let mut rhs = vec![0.0; n];
        for a in 0..nb {
            mat[a][..nb].copy_from_slice(&g[a]);
        }
        for j in 0..k0 {
            mat[idx(j, 0)][nb] = -1.0;
            mat[nb][idx(j, 0)] = 1.0;
        }
        rhs[nb] = 1.0;
        let sol = crate::linalg::solve_dense(mat, rhs)
            .ok_or_else(|| Error::Domain("singular equilibrium system".into()))?;
        let masses: Vec<f64> = (0..k0).map(|j| sol[idx(j, 0)]).collect();
        let coeffs: Vec<Vec<f64>> = (0..k0)
            .map(|j| (1..=kk).map(|k| sol[idx(j, k)]).collect())
            .collect();
        Ok(UnionEquilibrium {
            comps: comps.to_vec(),
            masses,
            coeffs,
            energy: sol[nb],
        })
    }

    pub fn potential(&self, x: f64) -> f64 {
        let mut u = 0.0;
        for (j, &(a, b)) in self.comps.iter().enumerate() {
            let m = 0.5 * (a + b);
            let h = 0.5 * (b - a);
            u += self.masses[j] * arcsine_potential(a, b, x);
            let s = (x - m) / h;
            for (k, c) in self.coeffs[j].iter().enumerate() {
                u += c * cheb_mode_potential(k + 1, s);
            }
        }
        u
    }

    /// Max minus min of the potential over a dense sample of the components.
    pub fn oscillation(&self) -> f64 {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &(a, b) in &self.comps {
            for x in cheb_extrema(a, b, 400) {
                let u = self.potential(x);
                lo = lo.min(u);
                hi = hi.max(u);
            }
        }
        hi - lo
    }

    pub fn to_measure(&self) -> MixtureMeasure {
        let comps = self
            .comps
            .iter()
            .enumerate()
            .map(|(j, &(a, b))| {
                let w = self.masses[j];
                Component::series(a, b, w, self.coeffs[j].iter().map(|c| c / w).collect())
            })
            .collect();
        MixtureMeasure::new(comps)
    }
}

// ---- JSON ----

#[derive(Serialize, Deserialize)]
struct SigmaJson {
    intervals: Vec<[String; 2]>,
    #[serde(default)]
    ray: Option<[String; 2]>,
}

impl IntervalUnion {
    pub fn to_json(&self) -> serde_json::Value {
        let ray = self.ray.as_ref().map(|r| match r.direction {
            RayDirection::Right => [r.start.to_string(), "+inf".to_string()],
            RayDirection::Left => ["-inf".to_string(), r.start.to_string()],
        });
        serde_json::to_value(SigmaJson {
            intervals: self
                .intervals
                .iter()
                .map(|iv| [iv.lo.to_string(), iv.hi.to_string()])
                .collect(),
            ray,
        })
        .expect("serializable")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let s: SigmaJson =
            serde_json::from_value(v.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        let raw: Result<Vec<_>> = s
            .intervals
            .iter()
            .map(|[a, b]| Ok((dec(a)?, dec(b)?)))
            .collect();
        let ray = match s.ray {
            None => None,
            Some([a, b]) => {
                let inf = |t: &str| matches!(t.trim(), "inf" | "+inf" | "infinity" | "+infinity");
                if inf(&b) {
                    Some(Ray {
                        start: dec(&a)?,
                        direction: RayDirection::Right,
                    })
                } else if a.trim() == "-inf" || a.trim() == "-infinity" {
                    Some(Ray {
                        start: dec(&b)?,
                        direction: RayDirection::Left,
                    })
                } else {
                    return Err(Error::Parse("ray needs one infinite endpoint".into()));
                }
            }
        };
        normalize_with_ray(&raw?, ray)
    }
}
