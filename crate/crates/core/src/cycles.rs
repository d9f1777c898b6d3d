//! Periodic cycles: enumeration, multipliers and classification.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::annotations::{Annotation, AnnotationSet};
use crate::error::{DynError, Result};
use crate::numeric::{poly_roots_with, Polynomial, Root, RootOptions};
use crate::parabolic::{
    rotation_order, tangency_and_residu, ParabolicInvariants, DEFAULT_ORDER, UNITY_HORIZON,
    UNITY_TOL,
};
use crate::ratmap::{ChartPoint, RationalMap, SpherePoint};

/// Largest `d^p + 1` handed to the root finder.
pub const DEGREE_CAP: usize = 5000;
/// Distinct periodic points closer than this are the same point.
pub const PERIODIC_MATCH_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CycleClass {
    Attracting,
    SuperAttracting,
    Repelling,
    ParabolicAttracting,
    ParabolicRepelling,
    SiegelDisc,
    Cremer,
    IndifferentUnresolved,
}

impl CycleClass {
    pub fn symbol(&self) -> &'static str {
        match self {
            CycleClass::Attracting => "+",
            CycleClass::SuperAttracting => "++",
            CycleClass::Repelling => "R",
            CycleClass::ParabolicAttracting => "0+",
            CycleClass::ParabolicRepelling => "0-",
            CycleClass::SiegelDisc => "SD",
            CycleClass::Cremer => "CR",
            CycleClass::IndifferentUnresolved => "?",
        }
    }

    pub fn is_parabolic(&self) -> bool {
        matches!(
            self,
            CycleClass::ParabolicAttracting | CycleClass::ParabolicRepelling
        )
    }

    /// Attracting or superattracting.
    pub fn is_attracting(&self) -> bool {
        matches!(self, CycleClass::Attracting | CycleClass::SuperAttracting)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cycle {
    pub id: usize,
    pub period: usize,
    pub points: Vec<SpherePoint>,
    pub multiplier: Complex64,
    /// Multiplicity of the cycle points as roots of `f^p(z) - z`.
    pub root_multiplicity: usize,
    pub class: Option<CycleClass>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parabolic: Option<ParabolicInvariants>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleOptions {
    pub max_period: usize,
    /// Root residual tolerance.
    pub tol: f64,
    pub unity_horizon: usize,
    pub unity_tol: f64,
    /// `|λ|` within this of 0 or 1 is superattracting or indifferent.
    pub class_tol: f64,
    pub series_order: usize,
}

impl Default for CycleOptions {
    fn default() -> Self {
        Self {
            max_period: 4,
            tol: 1e-9,
            unity_horizon: UNITY_HORIZON,
            unity_tol: UNITY_TOL,
            class_tol: 1e-8,
            series_order: DEFAULT_ORDER,
        }
    }
}

/// Product of chart derivatives along the cycle, each read from the chart of
/// one point to the chart of the next.
pub fn cycle_multiplier(f: &RationalMap, points: &[SpherePoint]) -> Result<Complex64> {
    let mut lambda = Complex64::new(1.0, 0.0);
    for (i, &z) in points.iter().enumerate() {
        let next = points[(i + 1) % points.len()];
        let (inf, u) = RationalMap::chart_of(z);
        let (next_inf, _) = RationalMap::chart_of(next);
        lambda *= f.eval_between_charts(u, inf, next_inf)?.1;
    }
    Ok(lambda)
}

/// `(P, P', Y_p)` up to a common factor, where `P(z) = X_p - z Y_p` and
/// `(X_p, Y_p)` is the homogeneous iterate of `(z, 1)`. Renormalizing at every
/// step keeps the values in range; the Newton ratio `P/P'` is exact.
fn iterate_residual(f: &RationalMap, p: usize, z: Complex64) -> (Complex64, Complex64, Complex64) {
    let d = f.degree();
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let (mut x, mut y, mut dx, mut dy) = (z, one, one, zero);
    for _ in 0..p {
        let mut n = [zero; 4];
        for (slot, poly) in [(0usize, f.num()), (2, f.den())] {
            let (mut v, mut vx, mut vy) = (zero, zero, zero);
            for k in 0..=d {
                let a = poly.coeff(k);
                if a == zero {
                    continue;
                }
                let j = d - k;
                v += a * x.powu(k as u32) * y.powu(j as u32);
                if k > 0 {
                    vx += a * k as f64 * x.powu(k as u32 - 1) * y.powu(j as u32);
                }
                if j > 0 {
                    vy += a * j as f64 * x.powu(k as u32) * y.powu(j as u32 - 1);
                }
            }
            n[slot] = v;
            n[slot + 1] = vx * dx + vy * dy;
        }
        let s = n[0].norm().max(n[2].norm());
        let s = if s > 0.0 && s.is_finite() { s } else { 1.0 };
        (x, dx, y, dy) = (n[0] / s, n[1] / s, n[2] / s, n[3] / s);
    }
    (x - z * y, dx - y - z * dy, y)
}

/// Aberth–Ehrlich on the iterate itself, from the given starting points.
fn aberth_on_iterate(f: &RationalMap, p: usize, mut z: Vec<Complex64>) -> Vec<Complex64> {
    let n = z.len();
    let eps = f64::EPSILON;
    let mut done = vec![false; n];
    for _ in 0..500 {
        let mut all = true;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let (v, dv, _) = iterate_residual(f, p, z[i]);
            if v.norm() == 0.0 {
                done[i] = true;
                continue;
            }
            let ratio = v / dv;
            let mut sum = Complex64::new(0.0, 0.0);
            for j in 0..n {
                let diff = z[i] - z[j];
                if j != i && diff.norm() > 0.0 {
                    sum += diff.inv();
                }
            }
            let w = ratio / (1.0 - ratio * sum);
            if !(w.re.is_finite() && w.im.is_finite()) {
                let bump = Complex64::new(1e-9, 1e-9) * (1.0 + z[i].norm());
                z[i] += bump;
                all = false;
                continue;
            }
            z[i] -= w;
            if w.norm() <= 4.0 * eps * z[i].norm().max(1e-300) {
                done[i] = true;
            } else {
                all = false;
            }
        }
        if all {
            break;
        }
    }
    z
}

/// `(f^p)'` at a root of `P`, in the affine chart: there `X_p = z Y_p`, so
/// `(f^p)' = P'/Y_p + 1`.
fn iterate_derivative(f: &RationalMap, p: usize, z: Complex64) -> Complex64 {
    let (_, dv, y) = iterate_residual(f, p, z);
    dv / y + 1.0
}

/// Group refined roots. Only a point where `(f^p)' = 1` can be a multiple
/// root, so nearby roots merge only there.
fn group_roots(f: &RationalMap, p: usize, roots: &[Complex64]) -> Vec<(Complex64, usize)> {
    let n = roots.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(g: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while g[r] != r {
            r = g[r];
        }
        g[i] = r;
        r
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (roots[i] - roots[j]).norm() <= 1e-3 * roots[i].norm().max(1.0) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut buckets: std::collections::BTreeMap<usize, Vec<Complex64>> = Default::default();
    for (i, &z) in roots.iter().enumerate().take(n) {
        let r = find(&mut parent, i);
        buckets.entry(r).or_default().push(z);
    }
    let mut out = Vec::new();
    for members in buckets.into_values() {
        let c = members.iter().sum::<Complex64>() / members.len() as f64;
        let tangent = members.len() > 1 && (iterate_derivative(f, p, c) - 1.0).norm() < 1e-3;
        if tangent {
            out.push((c, members.len()));
        } else {
            out.extend(members.into_iter().map(|m| (m, 1)));
        }
    }
    out
}

/// Multiplicity of infinity as a solution of `f^p(z) = z`. The degree drop of
/// the expanded iterate is trusted only when infinity is parabolic for `f^p`.
fn infinity_multiplicity(f: &RationalMap, p: usize, degree_drop: usize) -> Result<usize> {
    let mut orbit = vec![SpherePoint::Infinity];
    for _ in 0..p {
        let next = f.evaluate(*orbit.last().unwrap_or(&SpherePoint::Infinity))?;
        orbit.push(next);
    }
    if orbit[p].chordal_distance(&SpherePoint::Infinity) > 1e-9 {
        return Ok(0);
    }
    let q = (1..=p)
        .find(|&q| p.is_multiple_of(q) && orbit[q].chordal_distance(&SpherePoint::Infinity) <= 1e-9)
        .unwrap_or(p);
    let lambda = cycle_multiplier(f, &orbit[..q])?.powu((p / q) as u32);
    if (lambda - 1.0).norm() > 1e-6 {
        Ok(1)
    } else {
        Ok(degree_drop.max(2))
    }
}

/// Chordal distance from `z` to `f^p(z)`.
fn periodic_defect(f: &RationalMap, p: usize, z: SpherePoint) -> Result<f64> {
    let mut w = ChartPoint::from_sphere(z);
    for _ in 0..p {
        w = f.eval_chart(w)?;
    }
    Ok(w.to_sphere().chordal_distance(&z))
}

/// Roots of `f^p(z) - z` with multiplicity, infinity included.
pub fn periodic_points(f: &RationalMap, p: usize, tol: f64) -> Result<Vec<(SpherePoint, usize)>> {
    let d = f.degree();
    let total = (d as f64).powi(p as i32) + 1.0;
    if total > DEGREE_CAP as f64 {
        return Err(DynError::Budget(format!(
            "period {p} needs degree {total} > {DEGREE_CAP}"
        )));
    }
    let total = total as usize;
    let g = f.iterate(p);
    let fp = g.num() - &(g.den() * &Polynomial::identity());
    let mut out = Vec::new();
    if fp.is_zero() {
        return Err(DynError::Domain(format!("f^{p} is the identity")));
    }
    let m_inf = infinity_multiplicity(f, p, total - fp.trim_relative(1e-13).degree_or_zero())?;
    let deg = total - m_inf;
    let fp = Polynomial::new(fp.coeffs()[..=deg.min(fp.degree_or_zero())].to_vec());
    if fp.degree_or_zero() < deg {
        return Err(DynError::Internal(format!(
            "iterate f^{p} - z has degree {} where {deg} is expected",
            fp.degree_or_zero()
        )));
    }
    if deg > 0 {
        let opts = RootOptions {
            tol,
            ..RootOptions::default()
        };
        // Roots of the expanded iterate are only starting points: at high
        // degree its coefficients do not pin the roots to full accuracy.
        let seeds: Vec<Root> = match poly_roots_with(&fp, &opts) {
            Ok(r) => r,
            Err(DynError::NonConvergence { best, .. }) => best
                .into_iter()
                .map(|value| Root {
                    value,
                    multiplicity: 1,
                })
                .collect(),
            Err(e) => return Err(e),
        };
        let mut start = Vec::with_capacity(deg);
        for r in &seeds {
            for k in 0..r.multiplicity {
                let spread = if r.multiplicity > 1 {
                    1e-4 * r.value.norm().max(1.0)
                } else {
                    0.0
                };
                let t = 2.0 * std::f64::consts::PI * k as f64 / r.multiplicity as f64 + 0.3;
                start.push(r.value + Complex64::from_polar(spread, t));
            }
        }
        start.truncate(deg);
        let mut k = 0;
        while start.len() < deg {
            start.push(Complex64::from_polar(
                1.0 + 0.01 * k as f64,
                0.7 + 2.4 * k as f64,
            ));
            k += 1;
        }
        let refined = aberth_on_iterate(f, p, start);
        for (value, multiplicity) in group_roots(f, p, &refined) {
            // The clustering pass on the expanded polynomial centres multiple
            // roots more accurately than the mean of the refined copies.
            let value = match seeds.iter().find(|r| {
                r.multiplicity == multiplicity
                    && (r.value - value).norm() < 1e-3 * value.norm().max(1.0)
            }) {
                Some(r) if multiplicity > 1 => r.value,
                _ => value,
            };
            let z = SpherePoint::snapped(value);
            let defect = periodic_defect(f, p, z)?;
            if !(defect <= 1e-6) {
                return Err(DynError::NonConvergence {
                    what: format!("period-{p} point {z} misses its image by {defect:.3e}"),
                    best: refined.clone(),
                });
            }
            out.push((z, multiplicity));
        }
    }
    if m_inf > 0 {
        out.push((SpherePoint::Infinity, m_inf));
    }
    Ok(out)
}

fn divisors(p: usize) -> Vec<usize> {
    (1..p).filter(|&q| p.is_multiple_of(q)).collect()
}

/// All cycles of exact period `<= max_period`, unclassified. Sorted by
/// period, then by the canonical order of their first point; each cycle
/// starts at its canonically smallest point.
pub fn find_cycles(f: &RationalMap, max_period: usize, tol: f64) -> Result<Vec<Cycle>> {
    if max_period == 0 {
        return Err(DynError::Domain("max_period must be at least 1".into()));
    }
    let mut cycles: Vec<Cycle> = Vec::new();
    for p in 1..=max_period {
        let candidates = periodic_points(f, p, tol)?;
        let lower: Vec<SpherePoint> = cycles
            .iter()
            .filter(|c| divisors(p).contains(&c.period))
            .flat_map(|c| c.points.iter().copied())
            .collect();
        let mut fresh: Vec<(SpherePoint, usize)> = candidates
            .into_iter()
            .filter(|(z, _)| !lower.iter().any(|q| q.approx_eq(z, PERIODIC_MATCH_TOL)))
            .collect();
        while let Some((z0, mult)) = fresh.first().copied() {
            fresh.remove(0);
            let mut points = vec![z0];
            let mut z = z0;
            for _ in 1..p {
                let image = f.evaluate_snapped(z)?;
                let hit = fresh
                    .iter()
                    .enumerate()
                    .map(|(i, (q, _))| (i, q.chordal_distance(&image)))
                    .min_by(|a, b| a.1.total_cmp(&b.1));
                z = match hit {
                    Some((i, dist)) if dist <= 1e-5 => fresh.remove(i).0,
                    _ => image,
                };
                points.push(z);
            }
            let start = (0..p)
                .min_by(|&i, &j| points[i].canonical_cmp(&points[j]))
                .unwrap_or(0);
            points.rotate_left(start);
            let multiplier = cycle_multiplier(f, &points)?;
            cycles.push(Cycle {
                id: 0,
                period: p,
                points,
                multiplier,
                root_multiplicity: mult,
                class: None,
                parabolic: None,
            });
        }
    }
    cycles.sort_by(|a, b| {
        a.period
            .cmp(&b.period)
            .then(a.points[0].canonical_cmp(&b.points[0]))
    });
    for (i, c) in cycles.iter_mut().enumerate() {
        c.id = i;
    }
    Ok(cycles)
}

/// Fill in the class (and parabolic invariants) of a cycle.
pub fn classify(
    cycle: &Cycle,
    f: &RationalMap,
    annotations: &AnnotationSet,
    opts: &CycleOptions,
) -> Result<Cycle> {
    let mut out = cycle.clone();
    let l = cycle.multiplier;
    let n = l.norm();
    let tol = opts.class_tol;
    let class = if n <= tol {
        CycleClass::SuperAttracting
    } else if n < 1.0 - tol {
        CycleClass::Attracting
    } else if n > 1.0 + tol {
        CycleClass::Repelling
    } else if let Some(r) = rotation_order(l, opts.unity_horizon, opts.unity_tol) {
        let inv = tangency_and_residu(f, cycle.points[0], cycle.period, r, opts.series_order)?;
        let class = if inv.nu.re <= 0.0 {
            CycleClass::ParabolicAttracting
        } else {
            CycleClass::ParabolicRepelling
        };
        out.parabolic = Some(inv);
        class
    } else {
        let mut class = CycleClass::IndifferentUnresolved;
        for a in &annotations.annotations {
            match a {
                Annotation::RotationNumberBrjuno { cycle: r, .. }
                    if r.matches(cycle.id, &cycle.points) =>
                {
                    class = CycleClass::SiegelDisc;
                }
                Annotation::RotationNumberLiouville { cycle: r }
                    if r.matches(cycle.id, &cycle.points) =>
                {
                    class = CycleClass::Cremer;
                }
                _ => {}
            }
        }
        class
    };
    out.class = Some(class);
    Ok(out)
}

pub fn find_and_classify(
    f: &RationalMap,
    annotations: &AnnotationSet,
    opts: &CycleOptions,
) -> Result<Vec<Cycle>> {
    find_cycles(f, opts.max_period, opts.tol)?
        .iter()
        .map(|c| classify(c, f, annotations, opts))
        .collect()
}
