//! Finite positive measures on the real line built from a few component kinds,
//! with closed-form logarithmic potentials wherever one exists.
//!
//! Component kinds:
//! - `Atom`: point mass (the point may be complex, e.g. for counting measures).
//! - `Equilibrium`: arcsine measure of `[a, b]`.
//! - `Series`: arcsine measure modulated by a Chebyshev series,
//!   density `w (1 + sum_k c_k T_k(s)) / (pi h sqrt(1 - s^2))` with `s = (x - m)/h`.
//! - `Nu`: balayage of a unit point mass at `origin` onto `origin + [a, b]`
//!   (or `origin - [b, a]` when `reflect` is set), with `0 < a < b`.
//! - `Grid`: weight `i` spread uniformly over the cell between the midpoints
//!   adjacent to node `i` (half cells at both ends).

use crate::error::{domain, Error, Result};
use crate::interval::{
    arcsine_potential, capacity, cheb_mode_potential_c, equilibrium_measure,
    joukowski_inv, IntervalUnion,
};
use crate::numeric::{cheb_extrema, fmt_f64, gauss_integrate, gauss_legendre, golden_max, parse_f64, tanh_sinh};
use crate::poly::IntPolynomial;
use num_complex::Complex64;
use serde_json::{json, Value};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub enum Component {
    Atom {
        point: Complex64,
        weight: f64,
    },
    Equilibrium {
        a: f64,
        b: f64,
        weight: f64,
    },
    Series {
        a: f64,
        b: f64,
        weight: f64,
        coeffs: Vec<f64>,
    },
    Nu {
        a: f64,
        b: f64,
        weight: f64,
        origin: f64,
        reflect: bool,
    },
    Grid {
        nodes: Vec<f64>,
        weights: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialValue {
    /// `+inf` at the location of an atom.
    pub value: f64,
    pub error_bound: f64,
}

impl PotentialValue {
    pub fn is_infinite(&self) -> bool {
        self.value.is_infinite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Uniform-density potential of the cell `[c, d]` with unit mass at `z`.
fn cell_potential(c: f64, d: f64, z: Complex64) -> f64 {
    if d <= c {
        return -(z - c).norm().ln();
    }
    let y = z.im;
    let prim = |u: f64| -> f64 {
        if y == 0.0 {
            if u == 0.0 {
                0.0
            } else {
                u * u.abs().ln() - u
            }
        } else {
            0.5 * (u * (u * u + y * y).ln() - 2.0 * u + 2.0 * y * (u / y).atan())
        }
    };
    -(prim(d - z.re) - prim(c - z.re)) / (d - c)
}

/// `Phi'' = log|u|`, used for the double integral of `log|s - t|` over two cells.
fn phi2(u: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else {
        0.5 * u * u * u.abs().ln() - 0.75 * u * u
    }
}

fn cell_mutual(c: f64, d: f64, e: f64, f: f64) -> f64 {
    // unit-mass uniform cells; degenerate cells fall back to point evaluations
    match (d > c, f > e) {
        (false, false) => -(c - e).abs().ln(),
        (false, true) => cell_potential(e, f, Complex64::new(c, 0.0)),
        (true, false) => cell_potential(c, d, Complex64::new(e, 0.0)),
        (true, true) => {
            let s = phi2(d - e) - phi2(c - e) - phi2(d - f) + phi2(c - f);
            -s / ((d - c) * (f - e))
        }
    }
}

pub(crate) fn grid_cells(nodes: &[f64]) -> Vec<(f64, f64)> {
    let n = nodes.len();
    (0..n)
        .map(|i| {
            let lo = if i == 0 { nodes[0] } else { 0.5 * (nodes[i - 1] + nodes[i]) };
            let hi = if i + 1 == n { nodes[n - 1] } else { 0.5 * (nodes[i] + nodes[i + 1]) };
            (lo, hi)
        })
        .collect()
}

/// Geometry of `nu_[a, b]` in local coordinates.
struct NuGeo {
    a: f64,
    b: f64,
    m: f64,
    h: f64,
    /// `log|phi(s0)|` with `s0 = -m/h`, i.e. `acosh(m/h)`.
    l: f64,
}

impl NuGeo {
    fn new(a: f64, b: f64) -> Self {
        let m = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        NuGeo {
            a,
            b,
            m,
            h,
            l: (m / h).acosh(),
        }
    }

    /// Potential of the unit measure at local coordinate `u`.
    fn potential(&self, u: Complex64) -> f64 {
        let phi0 = -self.l.exp();
        let phiu = if u.im == 0.0 {
            self.real_phi(u.re)
        } else {
            joukowski_inv((u - self.m) / self.h)
        };
        // (phi_u - phi_0)/u = 2 / (h (1 - 1/(phi_u phi_0))), free of cancellation near u = 0
        let ratio = 2.0 / (self.h * (1.0 - 1.0 / (phiu * phi0)));
        ratio.norm().ln() - (1.0 - phi0 * phiu).norm().ln() + self.l
    }

    /// Inverse Joukowski image of a real point, with `1 +- s` taken from the distances
    /// to the endpoints so that it stays accurate near them.
    fn real_phi(&self, x: f64) -> Complex64 {
        let s = (x - self.m) / self.h;
        let pq = ((x - self.a) / self.h) * ((self.b - x) / self.h);
        if pq >= 0.0 {
            Complex64::new(s, pq.sqrt())
        } else if s < 0.0 {
            Complex64::new(s - (-pq).sqrt(), 0.0)
        } else {
            Complex64::new(s + (-pq).sqrt(), 0.0)
        }
    }

    fn cdf(&self, a: f64, b: f64, t: f64) -> f64 {
        if t <= a {
            return 0.0;
        }
        if t >= b {
            return 1.0;
        }
        let c = ((self.m - t) / self.h).clamp(-1.0, 1.0);
        let tan_half = ((1.0 - c) / (1.0 + c)).sqrt();
        2.0 / PI * ((b / a).sqrt() * tan_half).atan()
    }

    fn quantile(&self, a: f64, b: f64, p: f64) -> f64 {
        if p <= 0.0 {
            return a;
        }
        if p >= 1.0 {
            return b;
        }
        let th = 2.0 * ((a / b).sqrt() * (0.5 * PI * p).tan()).atan();
        self.m - self.h * th.cos()
    }
}

/// Closed-form `nu_[a,b]` potential at 0: `2 log((sqrt a + sqrt b)/(2 sqrt(ab)))`.
pub fn nu_potential_at_origin(a: f64, b: f64) -> f64 {
    2.0 * ((a.sqrt() + b.sqrt()) / (2.0 * (a * b).sqrt())).ln()
}

fn theta_of(m: f64, h: f64, x: f64) -> f64 {
    ((m - x) / h).clamp(-1.0, 1.0).acos()
}

/// Integrate `g(theta)` over `[0, pi]`, splitting at the given angles.
fn integrate_theta<G: Fn(f64) -> f64>(g: G, mut cuts: Vec<f64>) -> f64 {
    cuts.retain(|t| *t > 1e-15 && *t < PI - 1e-15);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut pts = vec![0.0];
    pts.extend(cuts);
    pts.push(PI);
    pts.windows(2)
        .map(|w| tanh_sinh(|x, _, _| g(x), w[0], w[1], 1e-14).0)
        .sum()
}

impl Component {
    pub fn atom(x: f64, weight: f64) -> Self {
        Component::Atom {
            point: Complex64::new(x, 0.0),
            weight,
        }
    }

    pub fn equilibrium(a: f64, b: f64, weight: f64) -> Self {
        Component::Equilibrium { a, b, weight }
    }

    pub fn series(a: f64, b: f64, weight: f64, coeffs: Vec<f64>) -> Self {
        Component::Series {
            a,
            b,
            weight,
            coeffs,
        }
    }

    pub fn nu(a: f64, b: f64, weight: f64) -> Self {
        Component::Nu {
            a,
            b,
            weight,
            origin: 0.0,
            reflect: false,
        }
    }

    pub fn mass(&self) -> f64 {
        match self {
            Component::Atom { weight, .. }
            | Component::Equilibrium { weight, .. }
            | Component::Series { weight, .. }
            | Component::Nu { weight, .. } => *weight,
            Component::Grid { weights, .. } => weights.iter().sum(),
        }
    }

    fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        match &mut out {
            Component::Atom { weight, .. }
            | Component::Equilibrium { weight, .. }
            | Component::Series { weight, .. }
            | Component::Nu { weight, .. } => *weight *= c,
            Component::Grid { weights, .. } => weights.iter_mut().for_each(|w| *w *= c),
        }
        out
    }

    pub fn shifted(&self, t: f64) -> Self {
        let mut out = self.clone();
        match &mut out {
            Component::Atom { point, .. } => *point += t,
            Component::Equilibrium { a, b, .. } | Component::Series { a, b, .. } => {
                *a += t;
                *b += t;
            }
            Component::Nu { origin, .. } => *origin += t,
            Component::Grid { nodes, .. } => nodes.iter_mut().for_each(|x| *x += t),
        }
        out
    }

    /// Real hull of the support.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Component::Atom { point, .. } => (point.re, point.re),
            Component::Equilibrium { a, b, .. } | Component::Series { a, b, .. } => (*a, *b),
            Component::Nu {
                a,
                b,
                origin,
                reflect,
                ..
            } => {
                if *reflect {
                    (origin - b, origin - a)
                } else {
                    (origin + a, origin + b)
                }
            }
            Component::Grid { nodes, .. } => (nodes[0], nodes[nodes.len() - 1]),
        }
    }

    fn is_atom(&self) -> bool {
        matches!(self, Component::Atom { .. })
    }

    /// Points where the potential loses smoothness.
    fn breakpoints(&self) -> Vec<f64> {
        let (lo, hi) = self.support();
        if lo == hi {
            vec![lo]
        } else {
            vec![lo, hi]
        }
    }

    pub fn potential(&self, z: Complex64) -> f64 {
        match self {
            Component::Atom { point, weight } => {
                if z == *point {
                    f64::INFINITY
                } else {
                    -weight * (z - point).norm().ln()
                }
            }
            Component::Equilibrium { a, b, weight } => {
                let m = 0.5 * (a + b);
                let h = 0.5 * (b - a);
                if z.im == 0.0 {
                    weight * arcsine_potential(*a, *b, z.re)
                } else {
                    weight * (-(0.5 * h).ln() - joukowski_inv((z - m) / h).norm().ln())
                }
            }
            Component::Series {
                a,
                b,
                weight,
                coeffs,
            } => {
                let m = 0.5 * (a + b);
                let h = 0.5 * (b - a);
                let base = if z.im == 0.0 {
                    arcsine_potential(*a, *b, z.re)
                } else {
                    -(0.5 * h).ln() - joukowski_inv((z - m) / h).norm().ln()
                };
                weight * (base + series_mode_sum(coeffs, (z - m) / h))
            }
            Component::Nu {
                a,
                b,
                weight,
                origin,
                reflect,
            } => {
                let u = if *reflect { *origin - z } else { z - *origin };
                let u = Complex64::new(u.re, if *reflect { -u.im } else { u.im });
                weight * NuGeo::new(*a, *b).potential(u)
            }
            Component::Grid { nodes, weights } => grid_cells(nodes)
                .iter()
                .zip(weights)
                .filter(|(_, w)| **w != 0.0)
                .map(|(&(c, d), w)| w * cell_potential(c, d, z))
                .sum(),
        }
    }

    /// Mass of `(-inf, x]` (or `(-inf, x)` when `inclusive` is false).
    pub fn cdf(&self, x: f64, inclusive: bool) -> f64 {
        match self {
            Component::Atom { point, weight } => {
                if point.re < x || (inclusive && point.re == x) {
                    *weight
                } else {
                    0.0
                }
            }
            Component::Equilibrium { a, b, weight } => {
                if x <= *a {
                    return 0.0;
                }
                if x >= *b {
                    return *weight;
                }
                weight * theta_of(0.5 * (a + b), 0.5 * (b - a), x) / PI
            }
            Component::Series {
                a,
                b,
                weight,
                coeffs,
            } => {
                if x <= *a {
                    return 0.0;
                }
                if x >= *b {
                    return *weight;
                }
                let th = theta_of(0.5 * (a + b), 0.5 * (b - a), x);
                weight * series_cdf_theta(coeffs, th)
            }
            Component::Nu {
                a,
                b,
                weight,
                origin,
                reflect,
            } => {
                let g = NuGeo::new(*a, *b);
                if *reflect {
                    weight * (1.0 - g.cdf(*a, *b, origin - x))
                } else {
                    weight * g.cdf(*a, *b, x - origin)
                }
            }
            Component::Grid { nodes, weights } => {
                let mut acc = 0.0;
                for (&(c, d), w) in grid_cells(nodes).iter().zip(weights) {
                    if d < x || (d == x && (inclusive || d > c)) {
                        acc += w;
                    } else if c < x {
                        acc += w * (x - c) / (d - c);
                    }
                }
                acc
            }
        }
    }

    /// Integral of a real function against this component; `cuts` are extra
    /// points where `f` is not smooth. Complex atoms contribute through their real part.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, cuts: &[f64]) -> f64 {
        match self {
            Component::Atom { point, weight } => weight * f(point.re),
            Component::Equilibrium { a, b, weight } => {
                let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
                let th: Vec<f64> = cuts.iter().map(|&x| theta_of(m, h, x)).collect();
                weight / PI * integrate_theta(|t| f(m - h * t.cos()), th)
            }
            Component::Series {
                a,
                b,
                weight,
                coeffs,
            } => {
                let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
                let th: Vec<f64> = cuts.iter().map(|&x| theta_of(m, h, x)).collect();
                weight / PI
                    * integrate_theta(|t| f(m - h * t.cos()) * series_weight_theta(coeffs, t), th)
            }
            Component::Nu {
                a,
                b,
                weight,
                origin,
                reflect,
            } => {
                let g = NuGeo::new(*a, *b);
                let sab = (a * b).sqrt();
                let to_x = |u: f64| if *reflect { origin - u } else { origin + u };
                let th: Vec<f64> = cuts
                    .iter()
                    .map(|&x| {
                        let u = if *reflect { origin - x } else { x - origin };
                        theta_of(g.m, g.h, u)
                    })
                    .collect();
                weight / PI
                    * integrate_theta(
                        |t| {
                            let u = g.m - g.h * t.cos();
                            f(to_x(u)) * sab / u
                        },
                        th,
                    )
            }
            Component::Grid { nodes, weights } => {
                let rule = gauss_legendre(12);
                let mut acc = 0.0;
                for (&(c, d), w) in grid_cells(nodes).iter().zip(weights) {
                    if *w == 0.0 {
                        continue;
                    }
                    if d <= c {
                        acc += w * f(c);
                        continue;
                    }
                    let mut pts = vec![c];
                    pts.extend(cuts.iter().copied().filter(|&x| x > c && x < d));
                    pts.push(d);
                    pts.sort_by(f64::total_cmp);
                    let mut s = 0.0;
                    for seg in pts.windows(2) {
                        s += if pts.len() == 2 {
                            gauss_integrate(&f, seg[0], seg[1], &rule)
                        } else {
                            tanh_sinh(|x, _, _| f(x), seg[0], seg[1], 1e-13).0
                        };
                    }
                    acc += w * s / (d - c);
                }
                acc
            }
        }
    }
}

/// `sum_k c_k Re(phi^{-k})/k`, the potential of the Chebyshev modes at `s`.
fn series_mode_sum(coeffs: &[f64], s: Complex64) -> f64 {
    if s.im == 0.0 && s.re.abs() <= 1.0 {
        // sum c_k T_k(s)/k by the three-term recurrence
        let x = s.re;
        let (mut t0, mut t1) = (1.0, x);
        let mut acc = 0.0;
        for (i, c) in coeffs.iter().enumerate() {
            let k = i + 1;
            if k > 1 {
                let t2 = 2.0 * x * t1 - t0;
                t0 = t1;
                t1 = t2;
            }
            acc += c * t1 / k as f64;
        }
        return acc;
    }
    if coeffs.len() <= 2 {
        return coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * cheb_mode_potential_c(i + 1, s))
            .sum();
    }
    let inv = 1.0 / joukowski_inv(s);
    let mut p = Complex64::new(1.0, 0.0);
    let mut acc = 0.0;
    for (i, c) in coeffs.iter().enumerate() {
        p *= inv;
        acc += c * p.re / (i + 1) as f64;
    }
    acc
}

/// Density factor `1 + sum c_k T_k(-cos theta)` of a series component.
fn series_weight_theta(coeffs: &[f64], theta: f64) -> f64 {
    let mut acc = 1.0;
    for (i, c) in coeffs.iter().enumerate() {
        let k = (i + 1) as f64;
        let sign = if (i + 1) % 2 == 0 { 1.0 } else { -1.0 };
        acc += c * sign * (k * theta).cos();
    }
    acc
}

fn series_cdf_theta(coeffs: &[f64], theta: f64) -> f64 {
    let mut acc = theta;
    for (i, c) in coeffs.iter().enumerate() {
        let k = (i + 1) as f64;
        let sign = if (i + 1) % 2 == 0 { 1.0 } else { -1.0 };
        acc += c * sign * (k * theta).sin() / k;
    }
    acc / PI
}

fn same_interval(c1: &Component, c2: &Component) -> Option<(f64, f64, f64, f64, Vec<f64>, Vec<f64>)> {
    let parts = |c: &Component| match c {
        Component::Equilibrium { a, b, weight } => Some((*a, *b, *weight, Vec::new())),
        Component::Series {
            a,
            b,
            weight,
            coeffs,
        } => Some((*a, *b, *weight, coeffs.clone())),
        _ => None,
    };
    let (a1, b1, w1, k1) = parts(c1)?;
    let (a2, b2, w2, k2) = parts(c2)?;
    if a1 == a2 && b1 == b2 {
        Some((a1, b1, w1, w2, k1, k2))
    } else {
        None
    }
}

/// `-double integral log|x - y|` between two components.
fn component_mutual(c1: &Component, c2: &Component) -> f64 {
    if let Component::Atom { point, weight } = c1 {
        return weight * c2.potential(*point);
    }
    if let Component::Atom { point, weight } = c2 {
        return weight * c1.potential(*point);
    }
    if let (Component::Grid { nodes: n1, weights: w1 }, Component::Grid { nodes: n2, weights: w2 }) = (c1, c2) {
        let cells1 = grid_cells(n1);
        let cells2 = grid_cells(n2);
        let mut acc = 0.0;
        for (&(c, d), wa) in cells1.iter().zip(w1) {
            if *wa == 0.0 {
                continue;
            }
            let mut row = 0.0;
            for (&(e, f), wb) in cells2.iter().zip(w2) {
                if *wb != 0.0 {
                    row += wb * cell_mutual(c, d, e, f);
                }
            }
            acc += wa * row;
        }
        return acc;
    }
    if let Some((a, b, w1, w2, k1, k2)) = same_interval(c1, c2) {
        let h = 0.5 * (b - a);
        let modes: f64 = k1
            .iter()
            .zip(&k2)
            .enumerate()
            .map(|(i, (x, y))| x * y / (2.0 * (i + 1) as f64))
            .sum();
        return w1 * w2 * (-(0.5 * h).ln() + modes);
    }
    if let (
        Component::Nu {
            a: a1,
            b: b1,
            weight: w1,
            origin: o1,
            reflect: r1,
        },
        Component::Nu {
            a: a2,
            b: b2,
            weight: w2,
            origin: o2,
            reflect: r2,
        },
    ) = (c1, c2)
    {
        if a1 == a2 && b1 == b2 && o1 == o2 && r1 == r2 {
            let g = NuGeo::new(*a1, *b1);
            return w1 * w2 * (nu_potential_at_origin(*a1, *b1) + g.l);
        }
    }
    // evaluate the cheaper potential, integrate against the other component
    let (pot, over) = if matches!(c1, Component::Grid { .. }) {
        (c2, c1)
    } else {
        (c1, c2)
    };
    over.integrate(|x| pot.potential(Complex64::new(x, 0.0)), &pot.breakpoints())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureMeasure {
    pub components: Vec<Component>,
}

impl MixtureMeasure {
    pub fn new(components: Vec<Component>) -> Self {
        MixtureMeasure { components }
    }

    pub fn dirac(x: f64) -> Self {
        Self::new(vec![Component::atom(x, 1.0)])
    }

    pub fn arcsine(a: f64, b: f64) -> Self {
        Self::new(vec![Component::equilibrium(a, b, 1.0)])
    }

    pub fn mass(&self) -> f64 {
        self.components.iter().map(Component::mass).sum()
    }

    pub fn is_probability(&self) -> bool {
        (self.mass() - 1.0).abs() <= 1e-12
    }

    pub fn has_atoms(&self) -> bool {
        self.components.iter().any(|c| c.is_atom() && c.mass() > 0.0)
    }

    pub fn support_hull(&self) -> (f64, f64) {
        self.components.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |acc, c| {
            let (lo, hi) = c.support();
            (acc.0.min(lo), acc.1.max(hi))
        })
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::new(self.components.iter().map(|x| x.scaled(c)).collect())
    }

    pub fn shifted(&self, t: f64) -> Self {
        Self::new(self.components.iter().map(|x| x.shifted(t)).collect())
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &MixtureMeasure, b: f64) -> Self {
        let mut comps: Vec<Component> = self.components.iter().map(|c| c.scaled(a)).collect();
        comps.extend(other.components.iter().map(|c| c.scaled(b)));
        comps.retain(|c| c.mass() != 0.0);
        Self::new(comps)
    }

    pub fn validate(&self) -> Result<()> {
        for c in &self.components {
            match c {
                Component::Nu { a, b, .. } if !(0.0 < *a && a < b) => {
                    return domain(format!("nu interval needs 0 < a < b, got [{a}, {b}]"))
                }
                Component::Equilibrium { a, b, .. } | Component::Series { a, b, .. } if !(a < b) => {
                    return domain(format!("interval [{a}, {b}] is degenerate"))
                }
                Component::Grid { nodes, weights } => {
                    if nodes.is_empty() || nodes.len() != weights.len() {
                        return domain("grid needs equally many nodes and weights");
                    }
                    if weights.iter().any(|w| *w < 0.0) {
                        return domain("grid weights must be nonnegative");
                    }
                    if nodes.windows(2).any(|w| w[0] >= w[1]) {
                        return domain("grid nodes must be strictly increasing");
                    }
                }
                _ => {}
            }
            if c.mass() < 0.0 {
                return domain("negative component weight");
            }
        }
        Ok(())
    }

    pub fn potential_c(&self, z: Complex64) -> f64 {
        self.components.iter().map(|c| c.potential(z)).sum()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.components.iter().map(|c| c.cdf(x, true)).sum()
    }

    pub fn cdf_left(&self, x: f64) -> f64 {
        self.components.iter().map(|c| c.cdf(x, false)).sum()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, cuts: &[f64]) -> f64 {
        self.components.iter().map(|c| c.integrate(&f, cuts)).sum()
    }
}

/// Logarithmic potential `U(z) = -int log|z - w| dmu(w)` at a real point.
pub fn potential(mu: &MixtureMeasure, z: f64) -> PotentialValue {
    potential_complex(mu, Complex64::new(z, 0.0))
}

pub fn potential_complex(mu: &MixtureMeasure, z: Complex64) -> PotentialValue {
    let mut value = 0.0;
    let mut scale = 0.0;
    for c in &mu.components {
        let v = c.potential(z);
        value += v;
        scale += v.abs();
        if let Component::Series { coeffs, .. } = c {
            scale += coeffs.iter().map(|x| x.abs()).sum::<f64>();
        }
    }
    let cells: usize = mu
        .components
        .iter()
        .map(|c| match c {
            Component::Grid { nodes, .. } => nodes.len(),
            _ => 1,
        })
        .sum();
    PotentialValue {
        value,
        error_bound: if value.is_finite() {
            (scale + 1.0) * 8.0 * f64::EPSILON * (cells as f64).sqrt().max(1.0)
        } else {
            0.0
        },
    }
}

/// Energy `I(mu) = -double integral log|x - y|`, `+inf` with atoms.
pub fn energy(mu: &MixtureMeasure) -> f64 {
    if mu.has_atoms() {
        return f64::INFINITY;
    }
    let n = mu.components.len();
    let mut acc = 0.0;
    for i in 0..n {
        acc += component_mutual(&mu.components[i], &mu.components[i]);
        for j in (i + 1)..n {
            acc += 2.0 * component_mutual(&mu.components[i], &mu.components[j]);
        }
    }
    acc
}

/// Mutual energy; `+inf` when both measures put mass on a common atom.
pub fn mutual_energy(mu: &MixtureMeasure, nu: &MixtureMeasure) -> f64 {
    let mut acc = 0.0;
    for a in &mu.components {
        for b in &nu.components {
            acc += component_mutual(a, b);
        }
    }
    acc
}

/// Minimal `x` with `mu((-inf, x]) >= p`.
pub fn quantile(mu: &MixtureMeasure, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return domain(format!("quantile level {p} outside [0, 1]"));
    }
    let mass = mu.mass();
    if mu.components.len() == 1 && (mass - 1.0).abs() <= 1e-12 {
        match &mu.components[0] {
            Component::Equilibrium { a, b, .. } => {
                return Ok(0.5 * (a + b) - 0.5 * (b - a) * (PI * p).cos());
            }
            Component::Nu {
                a,
                b,
                origin,
                reflect,
                ..
            } => {
                let g = NuGeo::new(*a, *b);
                return Ok(if *reflect {
                    origin - g.quantile(*a, *b, 1.0 - p)
                } else {
                    origin + g.quantile(*a, *b, p)
                });
            }
            _ => {}
        }
    }
    let target = p * mass;
    let (mut lo, mut hi) = mu.support_hull();
    if p == 0.0 {
        return Ok(lo);
    }
    if mu.cdf_left(lo) >= target {
        return Ok(lo);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if mu.cdf(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Counting measure of the roots (with multiplicity) of `p`.
pub fn counting_measure(p: &IntPolynomial) -> Result<MixtureMeasure> {
    let d = p.degree().unwrap_or(0);
    if d < 1 {
        return domain("counting measure of a constant polynomial");
    }
    let roots = crate::poly::complex_roots(p)?;
    Ok(counting_measure_from_roots(&roots))
}

/// Uniform atoms at the given roots; repeated roots merge.
pub fn counting_measure_from_roots(roots: &[Complex64]) -> MixtureMeasure {
    let n = roots.len() as f64;
    let mut comps: Vec<Component> = Vec::new();
    for r in roots {
        match comps.iter_mut().find(|c| matches!(c, Component::Atom { point, .. } if point == r)) {
            Some(Component::Atom { weight, .. }) => *weight += 1.0 / n,
            _ => comps.push(Component::Atom {
                point: *r,
                weight: 1.0 / n,
            }),
        }
    }
    MixtureMeasure::new(comps)
}

/// `int log|Q| dmu`; `-inf` if an atom sits on a root of `Q`.
pub fn log_integral(q: &IntPolynomial, mu: &MixtureMeasure) -> Result<f64> {
    if q.is_zero() {
        return domain("log integral of the zero polynomial");
    }
    let qf = q.to_f64_coeffs();
    let lc = qf.last().copied().unwrap_or(1.0).abs().ln();
    let qroots = if q.degree().unwrap_or(0) > 0 {
        crate::poly::complex_roots(q)?
    } else {
        Vec::new()
    };
    let mut acc = 0.0;
    for c in &mu.components {
        match c {
            Component::Atom { point, weight } => {
                let v = crate::poly::horner_c(&qf, *point).norm();
                // near a root the product form is better conditioned
                let lv = if v > 0.0 && v > 1e-8 * qf.iter().map(|x| x.abs()).fold(0.0, f64::max) {
                    v.ln()
                } else {
                    lc + qroots.iter().map(|r| (point - r).norm().ln()).sum::<f64>()
                };
                acc += weight * lv;
            }
            _ => {
                let mass = c.mass();
                acc += mass * lc - qroots.iter().map(|r| c.potential(*r)).sum::<f64>();
            }
        }
    }
    Ok(acc)
}

/// `nu_[eps^2, eps]` (right) or its mirror image (left).
pub fn smoothing_kernel(eps: f64, side: Side) -> Component {
    Component::Nu {
        a: eps * eps,
        b: eps,
        weight: 1.0,
        origin: 0.0,
        reflect: side == Side::Left,
    }
}

#[derive(Debug, Clone)]
pub struct SmoothResult {
    pub measure: MixtureMeasure,
    /// Observed `sup (U^{smoothed} - U^mu) / sqrt(eps)` on the sample grid.
    pub c_bound: f64,
}

/// Number of translates used for non-atomic components in `smooth`.
pub const SMOOTH_TRANSLATES: usize = 48;

/// Convolution with the smoothing kernel. Atoms convolve exactly into `Nu`
/// components; other components are replaced by a Gauss-Chebyshev mixture of
/// translates along the kernel.
pub fn smooth(mu: &MixtureMeasure, eps: f64, side: Side) -> Result<SmoothResult> {
    if !(eps > 0.0 && eps < 0.5) {
        return domain(format!("smoothing width {eps} outside (0, 1/2)"));
    }
    let a = eps * eps;
    let b = eps;
    let g = NuGeo::new(a, b);
    let sab = (a * b).sqrt();
    let k = SMOOTH_TRANSLATES;
    let mut shifts = Vec::with_capacity(k);
    for i in 0..k {
        let th = PI * (i as f64 + 0.5) / k as f64;
        let u = g.m - g.h * th.cos();
        shifts.push((u, sab / u));
    }
    let total: f64 = shifts.iter().map(|s| s.1).sum();
    let sign = if side == Side::Left { -1.0 } else { 1.0 };
    let mut comps = Vec::new();
    for c in &mu.components {
        match c {
            Component::Atom { point, weight } if point.im == 0.0 => comps.push(Component::Nu {
                a,
                b,
                weight: *weight,
                origin: point.re,
                reflect: side == Side::Left,
            }),
            _ => {
                for &(u, w) in &shifts {
                    comps.push(c.scaled(w / total).shifted(sign * u));
                }
            }
        }
    }
    let measure = MixtureMeasure::new(comps);
    let (lo, hi) = mu.support_hull();
    let mut worst = f64::NEG_INFINITY;
    for x in cheb_extrema(lo - 2.0 * eps, hi + 2.0 * eps, 600) {
        let base = mu.potential_c(Complex64::new(x, 0.0));
        if !base.is_finite() {
            continue;
        }
        let v = measure.potential_c(Complex64::new(x, 0.0)) - base;
        worst = worst.max(v);
    }
    Ok(SmoothResult {
        measure,
        c_bound: worst.max(0.0) / eps.sqrt(),
    })
}

#[derive(Debug, Clone)]
pub struct SweetenResult {
    pub measure: MixtureMeasure,
    pub beta: f64,
    pub gamma: f64,
    /// `beta + gamma - beta gamma`, the mass given to the equilibrium measure.
    pub sweetener: f64,
    pub b_estimate: f64,
    /// `max (U^{sw} - (1 - beta) U^{mu_ref})` over the verification grid.
    pub verification_margin: f64,
}

fn sample_points(sigma: &IntervalUnion, extra: &[(f64, f64)], per: usize) -> Vec<f64> {
    let mut xs = Vec::new();
    for (a, b) in sigma.components().into_iter().chain(extra.iter().copied()) {
        if b > a {
            xs.extend(cheb_extrema(a, b, per));
        } else {
            xs.push(a);
        }
    }
    xs
}

/// Sweetened measure of `nu` relative to `sigma` and `mu_ref`.
pub fn sweeten(nu: &MixtureMeasure, mu_ref: &MixtureMeasure, sigma: &IntervalUnion) -> Result<SweetenResult> {
    let cap = capacity(sigma)?.capacity;
    if cap <= 1.0 {
        return Err(Error::SweetenerUndefined);
    }
    let gamma = 1.0 - nu.mass();
    if !(-1e-12..1.0).contains(&gamma) {
        return domain(format!("mass of nu must lie in (0, 1], got {}", nu.mass()));
    }
    let gamma = gamma.max(0.0);
    if nu.has_atoms() {
        return Err(Error::Unbounded("nu has atoms, its potential is unbounded".into()));
    }
    let mu_sigma = equilibrium_measure(sigma, 2000)?;
    let minus_i = cap.ln();
    let lifted = nu.combine(1.0, &mu_sigma, gamma);
    let diff = |x: f64| {
        let z = Complex64::new(x, 0.0);
        lifted.potential_c(z) - mu_ref.potential_c(z)
    };
    let extra = vec![nu.support_hull(), mu_ref.support_hull()];
    let xs = sample_points(sigma, &extra, 800);
    let mut best = (f64::NEG_INFINITY, 0.0);
    for &x in &xs {
        let v = diff(x);
        if v.is_nan() {
            continue;
        }
        if v > best.0 {
            best = (v, x);
        }
    }
    if best.0.is_infinite() && best.0 > 0.0 {
        return Err(Error::Unbounded(format!("difference unbounded near {}", best.1)));
    }
    // local refinement around the sampled maximiser
    let step = xs.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
    let (_, refined) = golden_max(diff, best.1 - step, best.1 + step, 80);
    // the difference tends to 0 at infinity
    let b_est = best.0.max(refined).max(0.0);
    let beta = b_est / (b_est + minus_i);
    let sweetener = beta + gamma - beta * gamma;
    let measure = mu_sigma.combine(sweetener, nu, 1.0 - beta);
    let mut margin = f64::NEG_INFINITY;
    for &x in &xs {
        let z = Complex64::new(x, 0.0);
        let r = mu_ref.potential_c(z);
        if r.is_finite() {
            margin = margin.max(measure.potential_c(z) - (1.0 - beta) * r);
        }
    }
    Ok(SweetenResult {
        measure,
        beta,
        gamma,
        sweetener,
        b_estimate: b_est,
        verification_margin: margin,
    })
}

/// Kolmogorov distance between the CDFs.
pub fn cdf_distance(mu: &MixtureMeasure, nu: &MixtureMeasure) -> f64 {
    let (a1, b1) = mu.support_hull();
    let (a2, b2) = nu.support_hull();
    let lo = a1.min(a2);
    let hi = b1.max(b2);
    let mut pts: Vec<f64> = Vec::new();
    for c in mu.components.iter().chain(&nu.components) {
        match c {
            Component::Grid { nodes, .. } => pts.extend(grid_cells(nodes).iter().map(|c| c.1)),
            _ => {
                let (l, h) = c.support();
                pts.push(l);
                pts.push(h);
            }
        }
    }
    if hi > lo {
        let n = 4000;
        pts.extend((0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64));
    }
    let d = |x: f64| {
        (mu.cdf(x) - nu.cdf(x))
            .abs()
            .max((mu.cdf_left(x) - nu.cdf_left(x)).abs())
    };
    let mut best = 0.0f64;
    let mut arg = lo;
    for &x in &pts {
        let v = d(x);
        if v > best {
            best = v;
            arg = x;
        }
    }
    // refine between neighbours of the best sample when both measures are continuous there
    if hi > lo {
        let h = (hi - lo) / 4000.0;
        let (_, v) = golden_max(d, arg - h, arg + h, 60);
        best = best.max(v);
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderEstimate {
    pub a: f64,
    pub eta: f64,
    /// True when every component has a known exponent (arcsine-type densities).
    pub closed_form: bool,
}

/// Empirical Hölder constants: `mu([x, y]) <= A |y - x|^eta` over dyadic intervals.
pub fn holder_estimate(mu: &MixtureMeasure) -> HolderEstimate {
    if mu.has_atoms() {
        return HolderEstimate {
            a: mu.mass(),
            eta: 0.0,
            closed_form: true,
        };
    }
    let closed = mu.components.iter().all(|c| {
        matches!(
            c,
            Component::Equilibrium { .. } | Component::Nu { .. } | Component::Series { .. }
        )
    });
    let (lo, hi) = mu.support_hull();
    let len = (hi - lo).max(f64::MIN_POSITIVE);
    let mut logd = Vec::new();
    let mut logm = Vec::new();
    let mut ratio_half = 0.0f64;
    for k in 2..=14 {
        let cells = 1usize << k;
        let delta = len / cells as f64;
        let mut worst = 0.0f64;
        let mut prev = mu.cdf(lo);
        for i in 1..=cells {
            let x = lo + delta * i as f64;
            let cur = mu.cdf(x);
            worst = worst.max(cur - prev);
            prev = cur;
        }
        ratio_half = ratio_half.max(worst / delta.sqrt());
        logd.push(delta.ln());
        logm.push(worst.max(1e-300).ln());
    }
    if closed {
        return HolderEstimate {
            a: ratio_half,
            eta: 0.5,
            closed_form: true,
        };
    }
    // fit on the finest half of the scales
    let h = logd.len() / 2;
    let (c0, c1) = crate::linalg::fit_line(&logd[h..], &logm[h..]);
    let eta = c1.clamp(0.0, 1.0);
    let a = logd
        .iter()
        .zip(&logm)
        .map(|(d, m)| (m - eta * d).exp())
        .fold(c0.exp(), f64::max);
    HolderEstimate {
        a,
        eta,
        closed_form: false,
    }
}

// ---- JSON ----

pub(crate) fn num_str(v: &Value) -> Result<f64> {
    match v {
        Value::String(s) => parse_f64(s),
        Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| Error::Parse(format!("bad number {n}"))),
        other => Err(Error::Parse(format!("expected decimal, got {other}"))),
    }
}

fn pair(v: &Value, key: &str) -> Result<(f64, f64)> {
    let arr = v
        .get(key)
        .and_then(Value::as_array)
        .filter(|a| a.len() == 2)
        .ok_or_else(|| Error::Parse(format!("component needs `{key}` as a pair")))?;
    Ok((num_str(&arr[0])?, num_str(&arr[1])?))
}

fn weight_of(v: &Value) -> Result<f64> {
    v.get("weight").map(num_str).unwrap_or(Ok(1.0))
}

fn list(v: &Value, key: &str) -> Result<Vec<f64>> {
    v.get(key)
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse(format!("component needs list `{key}`")))?
        .iter()
        .map(num_str)
        .collect()
}

impl MixtureMeasure {
    pub fn from_json(v: &Value) -> Result<Self> {
        let comps = v
            .get("components")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("measure needs a `components` list".into()))?;
        let mut out = Vec::new();
        for c in comps {
            let kind = c
                .get("kind")
                .and_then(Value::as_str)
                .ok_or_else(|| Error::Parse("component needs `kind`".into()))?;
            out.push(match kind {
                "atom" => {
                    let x = num_str(c.get("point").ok_or_else(|| Error::Parse("atom needs `point`".into()))?)?;
                    let im = c.get("imag").map(num_str).unwrap_or(Ok(0.0))?;
                    Component::Atom {
                        point: Complex64::new(x, im),
                        weight: weight_of(c)?,
                    }
                }
                "equilibrium" => {
                    let (a, b) = pair(c, "interval")?;
                    Component::equilibrium(a, b, weight_of(c)?)
                }
                "series" => {
                    let (a, b) = pair(c, "interval")?;
                    Component::series(a, b, weight_of(c)?, list(c, "coeffs")?)
                }
                "nu" => {
                    let (a, b) = pair(c, "interval")?;
                    Component::Nu {
                        a,
                        b,
                        weight: weight_of(c)?,
                        origin: c.get("origin").map(num_str).unwrap_or(Ok(0.0))?,
                        reflect: c.get("reflect").and_then(Value::as_bool).unwrap_or(false),
                    }
                }
                "grid" => Component::Grid {
                    nodes: list(c, "nodes")?,
                    weights: list(c, "weights")?,
                },
                other => return Err(Error::Parse(format!("unknown component kind {other:?}"))),
            });
        }
        let m = MixtureMeasure::new(out);
        m.validate()?;
        Ok(m)
    }

    pub fn to_json(&self) -> Value {
        let strs = |v: &[f64]| v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>();
        let comps: Vec<Value> = self
            .components
            .iter()
            .map(|c| match c {
                Component::Atom { point, weight } => {
                    let mut o = json!({"kind": "atom", "point": fmt_f64(point.re), "weight": fmt_f64(*weight)});
                    if point.im != 0.0 {
                        o["imag"] = json!(fmt_f64(point.im));
                    }
                    o
                }
                Component::Equilibrium { a, b, weight } => json!({
                    "kind": "equilibrium", "interval": [fmt_f64(*a), fmt_f64(*b)], "weight": fmt_f64(*weight)
                }),
                Component::Series {
                    a,
                    b,
                    weight,
                    coeffs,
                } => json!({
                    "kind": "series", "interval": [fmt_f64(*a), fmt_f64(*b)], "weight": fmt_f64(*weight),
                    "coeffs": strs(coeffs)
                }),
                Component::Nu {
                    a,
                    b,
                    weight,
                    origin,
                    reflect,
                } => {
                    let mut o = json!({"kind": "nu", "interval": [fmt_f64(*a), fmt_f64(*b)], "weight": fmt_f64(*weight)});
                    if *origin != 0.0 {
                        o["origin"] = json!(fmt_f64(*origin));
                    }
                    if *reflect {
                        o["reflect"] = json!(true);
                    }
                    o
                }
                Component::Grid { nodes, weights } => json!({
                    "kind": "grid", "nodes": strs(nodes), "weights": strs(weights)
                }),
            })
            .collect();
        json!({ "components": comps })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn potential_examples() {
        close(potential(&MixtureMeasure::dirac(0.0), std::f64::consts::E).value, -1.0, 1e-15);
        let nu = MixtureMeasure::new(vec![Component::nu(1.0, 4.0, 1.0)]);
        close(potential(&nu, 2.0).value, 1.5f64.ln(), 1e-14);
        close(potential(&MixtureMeasure::arcsine(0.0, 4.0), 2.0).value, 0.0, 1e-15);
        assert!(potential(&MixtureMeasure::dirac(1.0), 1.0).is_infinite());
    }

    #[test]
    fn nu_potential_at_zero_matches_closed_form() {
        let g = NuGeo::new(1.0, 4.0);
        close(g.potential(Complex64::new(0.0, 0.0)), nu_potential_at_origin(1.0, 4.0), 1e-14);
        close(g.potential(Complex64::new(1e-9, 0.0)), nu_potential_at_origin(1.0, 4.0), 1e-8);
    }

    #[test]
    fn energy_examples() {
        close(energy(&MixtureMeasure::arcsine(0.0, 4.0)), 0.0, 1e-15);
        close(energy(&MixtureMeasure::arcsine(1.0, 2.0)), -(0.25f64).ln(), 1e-14);
        assert!(energy(&MixtureMeasure::dirac(0.0)).is_infinite());
        close(
            mutual_energy(&MixtureMeasure::dirac(0.0), &MixtureMeasure::dirac(1.0)),
            0.0,
            1e-15,
        );
        close(
            mutual_energy(&MixtureMeasure::dirac(0.0), &MixtureMeasure::dirac(std::f64::consts::E)),
            -1.0,
            1e-15,
        );
    }

    #[test]
    fn quantile_examples() {
        let mu = MixtureMeasure::arcsine(0.0, 4.0);
        close(quantile(&mu, 0.5).unwrap(), 2.0, 1e-14);
        close(quantile(&mu, 0.25).unwrap(), 2.0 - 2f64.sqrt(), 1e-14);
        assert!(matches!(quantile(&mu, 1.5), Err(Error::Domain(_))));
        let g = MixtureMeasure::new(vec![Component::Grid {
            nodes: vec![0.0, 1.0, 2.0, 3.0],
            weights: vec![0.1, 0.4, 0.3, 0.2],
        }]);
        for p in [0.05, 0.3, 0.77] {
            close(g.cdf(quantile(&g, p).unwrap()), p, 1e-12);
        }
    }

    #[test]
    fn nu_cdf_and_quantile_agree() {
        let mu = MixtureMeasure::new(vec![Component::nu(0.5, 3.0, 1.0)]);
        for p in [0.1, 0.5, 0.9] {
            close(mu.cdf(quantile(&mu, p).unwrap()), p, 1e-13);
        }
        close(mu.integrate(|_| 1.0, &[]), 1.0, 1e-12);
    }

    #[test]
    fn smooth_atom_is_kernel() {
        let r = smooth(&MixtureMeasure::dirac(0.0), 0.1, Side::Right).unwrap();
        assert_eq!(r.measure.components, vec![Component::nu(0.1 * 0.1, 0.1, 1.0)]);
        assert!(matches!(smooth(&MixtureMeasure::dirac(0.0), 0.7, Side::Right), Err(Error::Domain(_))));
    }

    #[test]
    fn cdf_distance_examples() {
        let mu = MixtureMeasure::arcsine(0.0, 4.0);
        close(cdf_distance(&mu, &mu), 0.0, 1e-15);
        close(cdf_distance(&MixtureMeasure::dirac(0.0), &MixtureMeasure::dirac(1.0)), 1.0, 1e-15);
    }

    #[test]
    fn json_roundtrip() {
        let text = r#"{"components":[{"kind":"equilibrium","interval":["0","4"],"weight":"0.5"},
            {"kind":"nu","interval":["1","4"],"weight":"0.25"},
            {"kind":"atom","point":"2","weight":"0.125"},
            {"kind":"grid","nodes":["0","1"],"weights":["0.0625","0.0625"]}]}"#;
        let v: Value = serde_json::from_str(text).unwrap();
        let m = MixtureMeasure::from_json(&v).unwrap();
        assert!(m.is_probability());
        assert_eq!(MixtureMeasure::from_json(&m.to_json()).unwrap(), m);
    }

    #[test]
    fn holder_exponent_half_for_arcsine() {
        let h = holder_estimate(&MixtureMeasure::arcsine(0.0, 4.0));
        assert_eq!(h.eta, 0.5);
        assert!(h.closed_form && h.a.is_finite());
    }
}
