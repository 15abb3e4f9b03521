use num_bigint::BigInt;
use num_traits::Zero;
use pforge::balayage::{balayage_point, nu_measure};
use pforge::interval::{capacity, equilibrium_measure, IntervalUnion, RayDirection};
use pforge::lattice::combine_squarefree;
use pforge::measure::{
    counting_measure, energy, log_integral, potential, quantile, sweeten, Component, MixtureMeasure,
};
use pforge::poly::{log_n_norm, real_roots, resultant, IntPolynomial};
use pforge::smyth::{certify, optimize_dual, optimize_primal, ObjectiveSpec, DEFAULT_TOL};
use proptest::prelude::*;

fn int_poly(max_deg: usize, monic: bool) -> impl Strategy<Value = IntPolynomial> {
    prop::collection::vec(-6i64..=6, 1..=max_deg + 1).prop_map(move |mut c| {
        let last = c.len() - 1;
        if monic || c[last] == 0 {
            c[last] = 1;
        }
        IntPolynomial::from_i64(&c)
    })
}

/// Two disjoint intervals with decimal endpoints.
fn two_intervals() -> impl Strategy<Value = (f64, f64, f64, f64)> {
    (-5.0f64..5.0, 0.1f64..3.0, 0.1f64..3.0, 0.1f64..3.0).prop_map(|(a, w1, gap, w2)| {
        let r = |x: f64| (x * 1e4).round() / 1e4;
        let a = r(a);
        let b = r(a + w1);
        let c = r(b + gap);
        (a, b, c, r(c + w2))
    })
}

/// `k / 1000` as exact decimal text.
fn milli(k: i64) -> String {
    let sign = if k < 0 { "-" } else { "" };
    format!("{sign}{}.{:03}", k.abs() / 1000, k.abs() % 1000)
}

fn union(a: f64, b: f64, c: f64, d: f64) -> IntervalUnion {
    IntervalUnion::from_f64(&[(a, b), (c, d)]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn interval_capacity_is_quarter_width(lo in -100_000i64..100_000, w in 1i64..100_000) {
        let (a, b) = (milli(lo), milli(lo + w));
        let sigma = IntervalUnion::interval(&a, &b).unwrap();
        let expect = w as f64 / 4000.0;
        prop_assert!((capacity(&sigma).unwrap().capacity - expect).abs() <= 1e-12 * (1.0 + expect));
    }

    #[test]
    fn capacity_is_inclusion_monotone((a, b, c, d) in two_intervals(), grow in 0.0f64..1.0) {
        let small = capacity(&union(a, b, c, d)).unwrap();
        let big = capacity(&union(a - grow, b, c, d + grow)).unwrap();
        let hull = capacity(&IntervalUnion::from_f64(&[(a, d)]).unwrap()).unwrap();
        let err = small.estimated_error + big.estimated_error + 1e-12;
        prop_assert!(small.capacity <= big.capacity + err);
        prop_assert!(big.capacity <= hull.capacity + grow / 2.0 + err);
    }

    #[test]
    fn equilibrium_energy_is_minus_log_capacity((a, b, c, d) in two_intervals()) {
        let sigma = union(a, b, c, d);
        let cap = capacity(&sigma).unwrap();
        let mu = equilibrium_measure(&sigma, 400).unwrap();
        prop_assert!((energy(&mu) + cap.capacity.ln()).abs() <= 1e-6, "{} vs {}", energy(&mu), -cap.capacity.ln());
    }

    #[test]
    fn equilibrium_potential_is_flat_on_the_set((a, b, c, d) in two_intervals()) {
        let sigma = union(a, b, c, d);
        let mu = equilibrium_measure(&sigma, 400).unwrap();
        let mut vals = Vec::new();
        for (lo, hi) in [(a, b), (c, d)] {
            for i in 0..=20 {
                vals.push(potential(&mu, lo + (hi - lo) * i as f64 / 20.0).value);
            }
        }
        let spread = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - vals.iter().cloned().fold(f64::INFINITY, f64::min);
        prop_assert!(spread <= 1e-4, "{spread}");
    }

    #[test]
    fn potential_superposition(x in -6.0f64..6.0, w in 0.05f64..0.95) {
        let mu = MixtureMeasure::arcsine(0.0, 4.0);
        let nu = nu_measure(1.0, 4.0).unwrap();
        let mix = mu.combine(w, &nu, 1.0 - w);
        let lhs = potential(&mix, x);
        let rhs = w * potential(&mu, x).value + (1.0 - w) * potential(&nu, x).value;
        prop_assert!((lhs.value - rhs).abs() <= 1e-10 + lhs.error_bound);
    }

    #[test]
    fn quantile_inverts_cdf(p in 0.001f64..0.999, pick in 0usize..3) {
        let mu = match pick {
            0 => MixtureMeasure::arcsine(-1.0, 3.0),
            1 => nu_measure(0.5, 4.0).unwrap(),
            _ => MixtureMeasure::new(vec![Component::equilibrium(0.0, 1.0, 0.5), Component::nu(2.0, 5.0, 0.5)]),
        };
        let x = quantile(&mu, p).unwrap();
        prop_assert!((mu.cdf(x) - p).abs() <= 1e-9, "cdf({x}) = {} vs {p}", mu.cdf(x));
    }

    #[test]
    fn resultant_is_multiplicative(p in int_poly(5, false), q1 in int_poly(4, false), q2 in int_poly(4, false)) {
        let lhs = resultant(&p, &(&q1 * &q2)).unwrap();
        let rhs = resultant(&p, &q1).unwrap() * resultant(&p, &q2).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn log_integral_matches_resultant(p in int_poly(6, true), q in int_poly(6, false)) {
        let res = resultant(&p, &q).unwrap();
        prop_assume!(!res.is_zero() && p.deg() >= 1);
        let mu = counting_measure(&p).unwrap();
        let lhs = p.deg() as f64 * log_integral(&q, &mu).unwrap();
        let rhs = pforge::poly::big_to_f64(&res).abs().ln();
        prop_assert!((lhs - rhs).abs() <= 1e-9, "{lhs} vs {rhs}");
    }

    #[test]
    fn real_roots_change_sign_exactly(p in int_poly(7, false)) {
        prop_assume!(p.deg() >= 1 && p.is_squarefree());
        let set = real_roots(&p, 1e-10).unwrap();
        let sign = |d: &pforge::poly::Dyadic| {
            if d.w >= 0 { p.eval(&(&d.c << d.w as usize)) } else { p.eval_dyadic(&d.c, (-d.w) as u64) }
        };
        for r in &set.roots {
            if r.lo == r.hi {
                prop_assert!(sign(&r.lo).is_zero());
            } else {
                let (a, b) = (sign(&r.lo), sign(&r.hi));
                prop_assert!(a.sign() != b.sign() && !a.is_zero() && !b.is_zero());
            }
        }
        prop_assert_eq!(set.real_count() + set.complex_count, p.deg());
    }

    #[test]
    fn n_norm_is_submultiplicative(p in int_poly(4, true), q in int_poly(4, true), n in 4usize..10, m in 4usize..10) {
        let sigma = IntervalUnion::from_f64(&[(-2.6, 2.6)]).unwrap();
        let mu = MixtureMeasure::arcsine(-2.6, 2.6);
        let pq = &p * &q;
        let lhs = log_n_norm(&pq, n + m, &mu, &sigma).unwrap();
        let rhs = log_n_norm(&p, n, &mu, &sigma).unwrap() + log_n_norm(&q, m, &mu, &sigma).unwrap();
        prop_assert!(lhs <= rhs + 1e-9, "{lhs} > {rhs}");
    }

    #[test]
    fn combine_squarefree_verifies(qs in prop::collection::vec(int_poly(3, true), 1..4)) {
        prop_assume!(qs.iter().all(|q| q.deg() >= 1));
        let (b, g, r) = combine_squarefree(&qs).unwrap();
        prop_assert!(r.is_squarefree());
        for q in &qs {
            prop_assert_eq!(r.gcd(q).deg(), 0);
        }
        let mut lhs = qs[0].clone();
        for (bk, q) in b.iter().zip(&qs[1..]) {
            lhs = &lhs + &q.scale(&BigInt::from(*bk));
        }
        prop_assert_eq!(lhs, &g * &r);
    }

    #[test]
    fn balayage_does_not_raise_exterior_potential(y in prop_oneof![-6.0f64..0.9, 4.1f64..9.0]) {
        let r = balayage_point(y, 1.0, 4.0).unwrap();
        prop_assert!(r.match_error <= 1e-6);
        prop_assert!(r.exterior_excess <= 1e-9);
        prop_assert!((r.measure.mass() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn sweetened_measure_is_probability(cut in 0.3f64..0.9) {
        let sigma = IntervalUnion::from_f64(&[(0.0, 5.0)]).unwrap();
        let mu = MixtureMeasure::arcsine(0.0, 5.0);
        let nu = MixtureMeasure::arcsine(0.0, 5.0 * cut);
        let r = sweeten(&nu, &mu, &sigma).unwrap();
        prop_assert!((r.measure.mass() - 1.0).abs() <= 1e-12);
        prop_assert!(r.sweetener >= r.gamma);
        prop_assert!(r.verification_margin <= 1e-8);
    }
}

fn trace_candidates() -> Vec<IntPolynomial> {
    let p = IntPolynomial::from_i64;
    vec![p(&[0, 1]), p(&[-1, 1]), p(&[1, -3, 1]), p(&[-2, 1]), p(&[2, -4, 1]), p(&[-3, 1]), p(&[1, -5, 6, -1])]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn lp_runs_are_consistent(mask in 1u8..128, extra in 0usize..7) {
        let cands = trace_candidates();
        let pool: Vec<IntPolynomial> = (0..7).filter(|i| mask >> i & 1 == 1).map(|i| cands[i].clone()).collect();
        let mut bigger = pool.clone();
        if !bigger.contains(&cands[extra]) {
            bigger.push(cands[extra].clone());
        }
        let ray = IntervalUnion::interval("0", "0").unwrap().with_ray("0", RayDirection::Right).unwrap();
        let spec = ObjectiveSpec::trace(ray);
        let cert = optimize_primal(&spec, &pool, DEFAULT_TOL).unwrap();
        let report = certify(&spec, &cert, DEFAULT_TOL).unwrap();
        prop_assert!(report.passed(), "min slack {}", report.min_slack);
        let dual = optimize_dual(&spec, &pool, (0.0, 8.0), DEFAULT_TOL).unwrap();
        prop_assert!(dual.value >= cert.lambda - 10.0 * DEFAULT_TOL, "{} < {}", dual.value, cert.lambda);
        let more = optimize_primal(&spec, &bigger, DEFAULT_TOL).unwrap();
        prop_assert!(more.lambda >= cert.lambda - DEFAULT_TOL);
    }
}
