//! Invariant checks and input strategies shared by the property suites and
//! the acceptance run.

#![allow(dead_code)]

use dynledger::annotations::AnnotationSet;
use dynledger::cycles::{
    cycle_multiplier, find_and_classify, find_cycles, periodic_points, CycleOptions,
};
use dynledger::extjet::global_e1;
use dynledger::numeric::{series_compose, series_reverse, Polynomial, TruncatedSeries};
use dynledger::orbits::classify_tails;
use dynledger::parabolic::{abel_residuals, tangency_and_residu, LocalGerm};
use dynledger::ratmap::{critical_divisor, ram_n, Mobius, RationalMap, SpherePoint};
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{RngSeed, TestCaseError};

pub type Check = Result<(), TestCaseError>;

pub fn seed() -> u64 {
    std::env::var("DYNLEDGER_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(0)
}

pub fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        rng_seed: RngSeed::Fixed(seed()),
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn ok<T, E: std::fmt::Debug>(r: Result<T, E>) -> Result<T, TestCaseError> {
    r.map_err(|e| TestCaseError::fail(format!("{e:?}")))
}

pub fn complex(r: f64) -> impl Strategy<Value = Complex64> {
    (-r..r, -r..r).prop_map(|(a, b)| Complex64::new(a, b))
}

/// Complex number with modulus in `[lo, hi]`.
pub fn annulus(lo: f64, hi: f64) -> impl Strategy<Value = Complex64> {
    (lo..hi, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

/// Rational map of exact degree `d` with coefficients of unit size.
pub fn rational(d: usize) -> impl Strategy<Value = RationalMap> {
    (
        prop::collection::vec(complex(1.0), d),
        annulus(0.5, 1.5),
        prop::collection::vec(complex(1.0), d),
    )
        .prop_filter_map("degree dropped", move |(low, lead, den)| {
            let mut num = low;
            num.push(lead);
            let f = RationalMap::new(Polynomial::new(num), Polynomial::new(den)).ok()?;
            (f.degree() == d).then_some(f)
        })
}

pub fn quadratic(c: Complex64) -> RationalMap {
    RationalMap::new(
        Polynomial::new(vec![c, Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]),
        Polynomial::one(),
    )
    .unwrap()
}

/// `z^2 + c`, or a quadratic or cubic rational map.
pub fn small_map() -> impl Strategy<Value = RationalMap> {
    prop_oneof![complex(1.2).prop_map(quadratic), rational(2), rational(3)]
}

pub fn mobius() -> impl Strategy<Value = Mobius> {
    (complex(0.4), complex(0.4), complex(0.3), complex(0.3)).prop_filter_map(
        "degenerate",
        |(a, d, b, c)| {
            let one = Complex64::new(1.0, 0.0);
            Mobius::new(one + a, b, c, one + d).ok()
        },
    )
}

/// `(z + a z^{k+1} + b z^{k+2}, a, b)`: a parabolic germ with `k` petals at 0.
pub fn parabolic_germ(k: u32) -> impl Strategy<Value = (RationalMap, Complex64, Complex64)> {
    (annulus(0.5, 2.0), complex(0.5)).prop_map(move |(a, b)| {
        let b = b * a * a.powf(1.0 / k as f64);
        let mut c = vec![Complex64::new(0.0, 0.0); k as usize + 3];
        c[1] = Complex64::new(1.0, 0.0);
        c[k as usize + 1] = a;
        c[k as usize + 2] = b;
        (
            RationalMap::new(Polynomial::new(c), Polynomial::one()).unwrap(),
            a,
            b,
        )
    })
}

/// Series `lead z + rest_2 z^2 + ...` with order `rest.len() + 1`.
pub fn invertible_series() -> impl Strategy<Value = TruncatedSeries> {
    (
        annulus(0.5, 2.0),
        prop::collection::vec(complex(1.0), 2..16),
    )
        .prop_map(|(lead, rest)| {
            let n = rest.len() + 1;
            let mut c = vec![Complex64::new(0.0, 0.0), lead];
            c.extend(rest);
            TruncatedSeries::new(c, n)
        })
}

fn origin() -> SpherePoint {
    SpherePoint::finite(0.0, 0.0)
}

/// `Ram^n <= Ram^{n+1}` and `f* Ram^{n+1} >= Ram^n`.
pub fn ram_n_monotone(f: &RationalMap, n: usize) -> Check {
    let crit = ok(critical_divisor(f))?;
    let r = ok(ram_n(f, n))?;
    let next = ok(ram_n(f, n + 1))?;
    prop_assert!(r.le(&next), "Ram^{n} not <= Ram^{}", n + 1);
    for e in &r.entries {
        let pulled = ok(next.pullback_order(f, &crit, e.point))?;
        prop_assert!(
            pulled >= e.multiplicity,
            "f*Ram^{} < Ram^{n} at {}",
            n + 1,
            e.point
        );
    }
    Ok(())
}

/// `Ram_b + Ram_t + Ram_w = Ram_f`, of degree `2d - 2`, with every critical
/// point in exactly one tail.
pub fn divisor_conserved(f: &RationalMap) -> Check {
    let opts = CycleOptions {
        max_period: 2,
        ..CycleOptions::default()
    };
    let none = AnnotationSet::default();
    let cycles = ok(find_and_classify(f, &none, &opts))?;
    let (tails, split) = ok(classify_tails(f, &cycles, &none, 5_000))?;
    let crit = ok(critical_divisor(f))?;
    prop_assert_eq!(crit.degree(), 2 * f.degree() - 2);
    prop_assert!(split.total().same_as(&crit));
    let in_tails: usize = tails
        .iter()
        .flat_map(|t| &t.members)
        .map(|m| m.multiplicity)
        .sum();
    prop_assert_eq!(in_tails, crit.degree());
    Ok(())
}

/// `f^p(z) = z` has `d^p + 1` solutions with multiplicity.
pub fn periodic_count(f: &RationalMap, p: usize) -> Check {
    let pts = ok(periodic_points(f, p, 1e-9))?;
    let total: usize = pts.iter().map(|(_, m)| m).sum();
    prop_assert_eq!(total, f.degree().pow(p as u32) + 1);
    Ok(())
}

pub fn multiplier_invariant(f: &RationalMap, g: &Mobius) -> Check {
    let h = ok(f.conjugate(g))?;
    for c in ok(find_cycles(f, 2, 1e-9))? {
        let moved: Vec<SpherePoint> = c.points.iter().map(|&z| g.apply(z)).collect();
        let l = ok(cycle_multiplier(&h, &moved))?;
        let scale = c.multiplier.norm().max(1.0);
        prop_assert!(
            (l - c.multiplier).norm() <= 1e-6 * scale,
            "cycle {:?}: {} vs {}",
            c.points,
            c.multiplier,
            l
        );
    }
    Ok(())
}

pub fn global_dims(f: &RationalMap) -> Check {
    let d = f.degree();
    let (_, dims) = ok(global_e1(f))?;
    let want = if d == 1 { (1, 1) } else { (0, 2 * d - 2) };
    prop_assert_eq!((dims.ker, dims.coker), want);
    Ok(())
}

/// ν of `z + a z^2 + b z^3` is `1 - b/a^2`, agrees with the index formula,
/// and survives Möbius conjugation.
pub fn nu_invariant(f: &RationalMap, a: Complex64, b: Complex64, g: &Mobius) -> Check {
    let inv = ok(tangency_and_residu(f, origin(), 1, 1, 24))?;
    let nu = Complex64::new(1.0, 0.0) - b / (a * a);
    let scale = nu.norm().max(1.0);
    prop_assert!((inv.nu - nu).norm() < 1e-9 * scale, "{} vs {}", inv.nu, nu);
    prop_assert!((inv.nu - inv.nu_index).norm() < 1e-7 * scale);
    let h = ok(f.conjugate(g))?;
    let moved = ok(tangency_and_residu(&h, g.apply(origin()), 1, 1, 24))?;
    prop_assert_eq!((moved.r, moved.e), (1, 1));
    prop_assert!(
        (moved.nu - inv.nu).norm() < 1e-6 * scale,
        "{} vs {}",
        moved.nu,
        inv.nu
    );
    Ok(())
}

/// ν from truncations 16 and 32 agree.
pub fn nu_stable(f: &RationalMap) -> Check {
    let lo = ok(tangency_and_residu(f, origin(), 1, 1, 16))?;
    let hi = ok(tangency_and_residu(f, origin(), 1, 1, 32))?;
    prop_assert_eq!(lo.e, hi.e);
    prop_assert!(
        (lo.nu - hi.nu).norm() < 1e-9 * hi.nu.norm().max(1.0),
        "{} vs {}",
        lo.nu,
        hi.nu
    );
    Ok(())
}

/// `φ(g h) - φ(h) - 1` below 1e-6 on every petal grid.
pub fn abel_residual(f: &RationalMap) -> Check {
    let inv = ok(tangency_and_residu(f, origin(), 1, 1, 24))?;
    let germ = LocalGerm::new(f, &inv.cycle, 1);
    let checks = abel_residuals(&germ, &inv, 400);
    prop_assert_eq!(checks.len(), 2 * inv.e_loc);
    for c in checks {
        prop_assert!(
            c.skipped < c.points,
            "petal {} fully skipped",
            c.petal_index
        );
        prop_assert!(c.max_residual < 1e-6, "{:?}", c);
    }
    Ok(())
}

/// `a∘b` and `b∘a` are the identity for `b` the reversion of `a`.
pub fn reversion_round_trip(a: &TruncatedSeries) -> Check {
    let n = a.order();
    let b = ok(series_reverse(a, n))?;
    let size = |s: &TruncatedSeries| s.coeffs().iter().map(|z| z.norm()).fold(1.0, f64::max);
    let scale = size(a) * size(&b);
    for comp in [ok(series_compose(a, &b, n))?, ok(series_compose(&b, a, n))?] {
        for k in 0..=n {
            let want = if k == 1 { 1.0 } else { 0.0 };
            prop_assert!(
                (comp.coeff(k) - want).norm() < 1e-10 * scale * scale,
                "k = {k}: {}",
                comp.coeff(k)
            );
        }
    }
    Ok(())
}
