//! Local invariants at parabolic cycles: rotation order, petal number, the
//! résidu itératif ν, normalizing coordinates and Fatou coordinates.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{DynError, Result};
use crate::numeric::{series_compose, series_reverse, TruncatedSeries};
use crate::ratmap::{RationalMap, SpherePoint};

/// Root-of-unity search horizon.
pub const UNITY_HORIZON: usize = 64;
/// Tolerance on `|λ^k - 1|`.
pub const UNITY_TOL: f64 = 1e-8;
/// Germ coefficients below this are rounding noise of exact zeros.
pub const TANGENCY_TOL: f64 = 1e-8;
/// Default series order for parabolic expansions.
pub const DEFAULT_ORDER: usize = 24;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Least `r <= k` with `|λ^r - 1| <= tol`.
pub fn rotation_order(lambda: Complex64, k: usize, tol: f64) -> Option<usize> {
    if (lambda.norm() - 1.0).abs() > tol {
        return None;
    }
    let mut pw = c(1.0);
    for r in 1..=k {
        pw *= lambda;
        if (pw - c(1.0)).norm() <= tol {
            return Some(r);
        }
    }
    None
}

/// The first-return germ `f^{pr}` at a cycle point, evaluated in the chart of
/// the base point with the base point translated to 0.
#[derive(Clone, Debug)]
pub struct LocalGerm {
    f: RationalMap,
    charts: Vec<(bool, Complex64)>,
    steps: usize,
}

impl LocalGerm {
    /// `cycle` lists the orbit starting at the base point.
    pub fn new(f: &RationalMap, cycle: &[SpherePoint], r: usize) -> Self {
        Self {
            f: f.clone(),
            charts: cycle.iter().map(|&z| RationalMap::chart_of(z)).collect(),
            steps: cycle.len() * r,
        }
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// `(is_infinity_chart, coordinate)` of the base point.
    pub fn base_chart(&self) -> (bool, Complex64) {
        self.charts[0]
    }

    fn chart(&self, i: usize) -> (bool, Complex64) {
        self.charts[i % self.charts.len()]
    }

    /// `g(h)` and `g'(h)`.
    pub fn step(&self, h: Complex64) -> Result<(Complex64, Complex64)> {
        let (inf0, u0) = self.chart(0);
        let mut u = u0 + h;
        let mut inf = inf0;
        let mut d = c(1.0);
        for i in 0..self.steps {
            let (next_inf, _) = self.chart(i + 1);
            let (v, dv) = self.f.eval_between_charts(u, inf, next_inf)?;
            u = v;
            d *= dv;
            inf = next_inf;
        }
        Ok((u - u0, d))
    }

    /// Local inverse `g^{-1}(h)` by Newton from `guess`.
    pub fn step_inverse(&self, h: Complex64, guess: Complex64) -> Result<Complex64> {
        let mut w = guess;
        for _ in 0..60 {
            let (gw, dg) = self.step(w)?;
            let delta = (gw - h) / dg;
            w -= delta;
            if delta.norm() <= 1e-15 * w.norm().max(1e-300) {
                return Ok(w);
            }
        }
        let (gw, _) = self.step(w)?;
        if (gw - h).norm() <= 1e-12 * h.norm().max(1e-300) {
            Ok(w)
        } else {
            Err(DynError::NonConvergence {
                what: format!("local inverse at h = {h}"),
                best: vec![w],
            })
        }
    }

    /// Taylor series of `g` at 0 through order `n`.
    pub fn series(&self, n: usize) -> Result<TruncatedSeries> {
        let p = self.charts.len();
        let mut pieces = Vec::with_capacity(p);
        for i in 0..p {
            let (inf, u) = self.chart(i);
            let (next_inf, _) = self.chart(i + 1);
            let (s, _) = self.f.local_series_in_charts(u, inf, next_inf, n)?;
            pieces.push(s);
        }
        let mut g = TruncatedSeries::identity(n);
        for i in 0..self.steps {
            g = series_compose(&pieces[i % p], &g, n)?;
        }
        Ok(g)
    }

    /// Local coordinate of a sphere point in the base chart.
    pub fn local_coord(&self, z: SpherePoint) -> Result<Complex64> {
        let (inf, u0) = self.chart(0);
        let u = match (z, inf) {
            (SpherePoint::Finite(v), false) => v,
            (SpherePoint::Finite(v), true) => v.inv(),
            (SpherePoint::Infinity, true) => c(0.0),
            (SpherePoint::Infinity, false) => {
                return Err(DynError::Domain(
                    "infinity is outside the base chart".into(),
                ))
            }
        };
        Ok(u - u0)
    }

    pub fn point_of(&self, h: Complex64) -> SpherePoint {
        let (inf, u0) = self.chart(0);
        let u = u0 + h;
        if inf {
            if u.norm() == 0.0 {
                SpherePoint::Infinity
            } else {
                SpherePoint::Finite(u.inv())
            }
        } else {
            SpherePoint::Finite(u)
        }
    }
}

/// Invariants of a parabolic cycle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParabolicInvariants {
    /// Order of the multiplier as a root of unity.
    pub r: usize,
    /// Petal cycles: the first return `f^{pr}` is tangent to the identity to
    /// order `r e + 1`.
    pub e: usize,
    /// Petals of the first return, `r e`.
    pub e_loc: usize,
    /// Leading coefficient `g(z) = z + a z^{e_loc+1} + ...`.
    pub a: Complex64,
    pub nu: Complex64,
    /// ν recomputed from the holomorphic fixed-point index,
    /// `ν = (e_loc + 1)/2 - Res dz/(z - g(z))`.
    pub nu_index: Complex64,
    /// Residual of the order equation that the solve leaves free.
    pub consistency_residual: f64,
    /// Directions (in the base chart) along which orbits converge.
    pub attracting_angles: Vec<f64>,
    pub repelling_angles: Vec<f64>,
    /// Normalizing coordinate `x(z)`.
    pub normal_series: TruncatedSeries,
    /// The first-return germ at the base point.
    pub germ_series: TruncatedSeries,
    /// Orbit of the base point.
    pub cycle: Vec<SpherePoint>,
}

/// Parabolic invariants of the cycle through `z0` of period `p` whose
/// multiplier has order `r`, with series through order `n` (raised to
/// `3(re+1)` when the tangency demands it).
pub fn tangency_and_residu(
    f: &RationalMap,
    z0: SpherePoint,
    p: usize,
    r: usize,
    n: usize,
) -> Result<ParabolicInvariants> {
    let orbit = f.orbit(z0, p.saturating_sub(1))?;
    let germ = LocalGerm::new(f, &orbit, r);
    let mut order = n.max(6);
    loop {
        let g = germ.series(order)?;
        match invariants_from_germ(&g, r, order) {
            Err(DynError::Budget(_)) if order < 120 => {
                order = (2 * order).min(120);
            }
            Err(e) => return Err(e),
            Ok(mut inv) => {
                inv.cycle = orbit;
                return Ok(inv);
            }
        }
    }
}

/// Tangency order of a germ tangent to the identity: `(m, a)` with
/// `g = z + a z^{m+1} + ...`.
pub fn tangency(g: &TruncatedSeries) -> Result<(usize, Complex64)> {
    let g1 = g.coeff(1);
    if (g1 - c(1.0)).norm() > 1e-6 {
        return Err(DynError::Domain(format!(
            "germ is not tangent to the identity (g'(0) = {g1})"
        )));
    }
    for k in 2..=g.order() {
        if g.coeff(k).norm() > TANGENCY_TOL {
            return Ok((k - 1, g.coeff(k)));
        }
    }
    Err(DynError::Budget(format!(
        "tangency order exceeds the series order {}",
        g.order()
    )))
}

/// Full invariant set from the germ series of the first return.
pub fn invariants_from_germ(
    g: &TruncatedSeries,
    r: usize,
    n: usize,
) -> Result<ParabolicInvariants> {
    let (m, _) = tangency(g)?;
    if n < 3 * (m + 1) {
        return Err(DynError::Budget(format!(
            "series order {n} below 3(e_loc+1) = {}",
            3 * (m + 1)
        )));
    }
    // Snap the noise in the coefficients that vanish exactly.
    let mut g = g.truncate(n);
    g.set_coeff(1, c(1.0));
    for k in 2..=m {
        g.set_coeff(k, c(0.0));
    }
    let a = g.coeff(m + 1);
    if m % r != 0 {
        return Err(DynError::Internal(format!(
            "petal count {m} is not a multiple of the rotation order {r}"
        )));
    }
    let (nu, p, consistency) = residu_iteratif(&g, m, a)?;
    let nu_index = c((m + 1) as f64 / 2.0) - index_residue(&g, m)?;
    let x = normal_coordinate(&p, m, a, nu)?;
    let arg = a.arg();
    let attracting_angles = (0..m)
        .map(|k| wrap_angle((PI - arg + 2.0 * PI * k as f64) / m as f64))
        .collect();
    let repelling_angles = (0..m)
        .map(|k| wrap_angle((-arg + 2.0 * PI * k as f64) / m as f64))
        .collect();
    Ok(ParabolicInvariants {
        r,
        e: m / r,
        e_loc: m,
        a,
        nu,
        nu_index,
        consistency_residual: consistency,
        attracting_angles,
        repelling_angles,
        normal_series: x,
        germ_series: g,
        cycle: Vec::new(),
    })
}

fn wrap_angle(t: f64) -> f64 {
    let t = t.rem_euclid(2.0 * PI);
    if t > PI {
        t - 2.0 * PI
    } else {
        t
    }
}

/// Solve `g*ω = ω` for `ω = z^{-m-1} P(z) dz` with `P(0) = 1/a`, order by
/// order. Returns `ν = P_m`, the coefficients of `P`, and the residual of the
/// order-`m` equation (automatically zero for an exact germ).
pub fn residu_iteratif(
    g: &TruncatedSeries,
    m: usize,
    a: Complex64,
) -> Result<(Complex64, TruncatedSeries, f64)> {
    let n = g.order();
    let top = n - 1;
    let u = g.shift_down(1);
    let u_pow = u.reciprocal()?.powi(m + 1).truncate(top);
    let gp = g.derivative().truncate(top);
    let g_t = g.truncate(top);
    let k_max = top - m;
    let mut cols = Vec::with_capacity(k_max + 1);
    let mut gj = TruncatedSeries::constant(c(1.0), top);
    for j in 0..=k_max {
        let mut col = &(&u_pow * &gj) * &gp;
        let cj = col.coeff(j);
        col.set_coeff(j, cj - c(1.0));
        cols.push(col);
        gj = &gj * &g_t;
    }
    let p0 = a.inv();
    // Column j starts at order j + m with pivot j·a, so the equations at
    // orders m+1..top are lower triangular in P_1..P_K.
    let mut p = vec![p0];
    for i in 1..=k_max {
        let order = m + i;
        let pivot = cols[i].coeff(order);
        if !(pivot.norm() > 1e-12 * (i as f64) * a.norm()) {
            return Err(DynError::Singular(format!(
                "vanishing pivot at order {order} of the order-matching system"
            )));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, pj) in p.iter().enumerate() {
            acc += pj * cols[j].coeff(order);
        }
        p.push(-acc / pivot);
    }
    let p = TruncatedSeries::new(p, k_max);
    let consistency = (p0 * cols[0].coeff(m)).norm();
    Ok((p.coeff(m), p, consistency))
}

/// Holomorphic fixed-point index `Res_0 dz/(z - g(z))`.
pub fn index_residue(g: &TruncatedSeries, m: usize) -> Result<Complex64> {
    let n = g.order();
    let diff = g - &TruncatedSeries::identity(n);
    let q = diff.shift_down(m + 1);
    if q.order() < m {
        return Err(DynError::Budget(
            "series too short for the index residue".into(),
        ));
    }
    Ok(-q.reciprocal()?.coeff(m))
}

/// Normalizing coordinate `x(z) = z v(z)` in which `ω` reads
/// `(1 + ν x^m)/x^{m+1} dx`, fixed by `v(0)^m = a` (principal root).
pub fn normal_coordinate(
    p: &TruncatedSeries,
    m: usize,
    a: Complex64,
    nu: Complex64,
) -> Result<TruncatedSeries> {
    let k = p.order();
    // G = -m z^m F with F = Σ_{j≠m} P_j z^{j-m}/(j-m).
    let mut gcoef = vec![c(0.0); k + 1];
    for (j, gc) in gcoef.iter_mut().enumerate() {
        if j != m {
            *gc = p.coeff(j) * (-(m as f64)) / (j as f64 - m as f64);
        }
    }
    let big_g = TruncatedSeries::new(gcoef, k);
    let cc = a.powf(1.0 / m as f64);
    let vk = k.saturating_sub(1);
    let mut v = TruncatedSeries::constant(cc, vk);
    let zm = TruncatedSeries::identity(vk).powi(m);
    for _ in 0..(k / m.max(1) + 3) {
        let ratio = &v.scaled(cc.inv()) - &TruncatedSeries::constant(c(1.0), vk);
        let l = ratio.log1p()?;
        let rhs = &big_g.truncate(vk) + &(&zm * &l).scaled(nu * m as f64);
        let w = rhs.scaled(a).powc(c(-1.0 / m as f64))?;
        v = w.scaled(cc);
    }
    Ok(v.truncate(k).shift_up(1).truncate(k))
}

/// Principal logarithm, or the branch with its cut along the positive real
/// axis for repelling petals.
fn log_branch(t: Complex64, repelling: bool) -> Complex64 {
    if repelling {
        let mut arg = t.arg();
        if arg < 0.0 {
            arg += 2.0 * PI;
        }
        Complex64::new(t.norm().ln(), arg)
    } else {
        t.ln()
    }
}

/// Approximate Fatou coordinate `t - (ν/m) log t` with `t = -1/(m x^m)`.
pub fn model_coordinate(inv: &ParabolicInvariants, h: Complex64, repelling: bool) -> Complex64 {
    let m = inv.e_loc as f64;
    let x = inv.normal_series.eval(h);
    let t = -(x.powu(inv.e_loc as u32) * m).inv();
    t - inv.nu / m * log_branch(t, repelling)
}

/// Index of the direction closest to `arg h`.
fn nearest_direction(angles: &[f64], h: Complex64) -> usize {
    let th = h.arg();
    let mut best = (f64::INFINITY, 0);
    for (k, &a) in angles.iter().enumerate() {
        let d = wrap_angle(th - a).abs();
        if d < best.0 {
            best = (d, k);
        }
    }
    best.1
}

/// Fatou coordinate at `z` on a petal. Attracting petals are numbered
/// `0..e_loc`, repelling petals `-1..=-e_loc`. Computed as
/// `lim t(g^n z) - n - (ν/m) log t(g^n z)` (attracting) or with `g^{-1}`
/// and `+n` (repelling).
pub fn fatou_coordinate(
    f: &RationalMap,
    inv: &ParabolicInvariants,
    z: SpherePoint,
    petal_index: i64,
    n_iter: usize,
) -> Result<Complex64> {
    let germ = LocalGerm::new(f, &inv.cycle, inv.r);
    let h0 = germ.local_coord(z)?;
    fatou_coordinate_local(&germ, inv, h0, petal_index, n_iter)
}

pub fn fatou_coordinate_local(
    germ: &LocalGerm,
    inv: &ParabolicInvariants,
    h0: Complex64,
    petal_index: i64,
    n_iter: usize,
) -> Result<Complex64> {
    let m = inv.e_loc as i64;
    if petal_index >= m || petal_index < -m {
        return Err(DynError::Domain(format!(
            "no petal with index {petal_index}"
        )));
    }
    let repelling = petal_index < 0;
    let (angles, k) = if repelling {
        (&inv.repelling_angles, (-petal_index - 1) as usize)
    } else {
        (&inv.attracting_angles, petal_index as usize)
    };
    if h0.norm() == 0.0 {
        return Err(DynError::Domain(
            "the parabolic point itself has no Fatou coordinate".into(),
        ));
    }
    let bound = 4.0 * h0.norm();
    let mut h = h0;
    for _ in 0..n_iter {
        h = if repelling {
            // g^{-1}(h) ≈ h - a h^{m+1}
            let guess = h - inv.a * h.powu(inv.e_loc as u32 + 1);
            germ.step_inverse(h, guess)?
        } else {
            germ.step(h)?.0
        };
        if !(h.norm() <= bound) || h.norm() == 0.0 {
            return Err(DynError::Domain(format!(
                "orbit left the petal (|h| = {:.3e})",
                h.norm()
            )));
        }
    }
    if n_iter > 0 && nearest_direction(angles, h) != k {
        return Err(DynError::Domain(format!(
            "point is not in petal {petal_index}"
        )));
    }
    let s = model_coordinate(inv, h, repelling);
    let shift = n_iter as f64;
    Ok(if repelling { s + shift } else { s - shift })
}

/// Points on a polar grid inside attracting petal `k` at radii `radii`,
/// with angular offsets `offsets` (radians) from the attracting axis.
pub fn petal_grid(
    inv: &ParabolicInvariants,
    k: usize,
    radii: &[f64],
    offsets: &[f64],
) -> Vec<Complex64> {
    let axis = inv.attracting_angles[k];
    let mut out = Vec::new();
    for &rho in radii {
        for &d in offsets {
            out.push(Complex64::from_polar(rho, axis + d));
        }
    }
    out
}

/// Abel-equation check `φ(g h) - φ(h) - 1` over a petal grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbelCheck {
    pub petal_index: i64,
    pub points: usize,
    /// Grid points whose orbit left the petal.
    pub skipped: usize,
    pub max_residual: f64,
}

/// Grid radius giving a comfortable margin inside the petals: the germ is
/// `h + a h^{m+1} + ...`, so `|a h^m|` sets the scale.
pub fn petal_scale(inv: &ParabolicInvariants) -> f64 {
    let a = inv.a.norm();
    if a > 0.0 {
        0.1 * a.powf(-1.0 / inv.e_loc as f64)
    } else {
        0.1
    }
}

/// Abel residual on every petal, attracting and repelling, using a grid of
/// two radii and three directions per petal.
pub fn abel_residuals(
    germ: &LocalGerm,
    inv: &ParabolicInvariants,
    n_iter: usize,
) -> Vec<AbelCheck> {
    let m = inv.e_loc as i64;
    let rho = petal_scale(inv);
    let spread = PI / (4.0 * m as f64);
    let mut out = Vec::new();
    for idx in (-m..m).rev() {
        let axis = if idx < 0 {
            inv.repelling_angles[(-idx - 1) as usize]
        } else {
            inv.attracting_angles[idx as usize]
        };
        let mut check = AbelCheck {
            petal_index: idx,
            points: 0,
            skipped: 0,
            max_residual: 0.0,
        };
        for r in [0.5 * rho, rho] {
            for d in [-spread, 0.0, spread] {
                let h = Complex64::from_polar(r, axis + d);
                let res = fatou_coordinate_local(germ, inv, h, idx, n_iter).and_then(|s0| {
                    let s1 = fatou_coordinate_local(germ, inv, germ.step(h)?.0, idx, n_iter)?;
                    Ok((s1 - s0 - 1.0).norm())
                });
                check.points += 1;
                match res {
                    Ok(v) => check.max_residual = check.max_residual.max(v),
                    Err(_) => check.skipped += 1,
                }
            }
        }
        out.push(check);
    }
    out
}

/// Inverse normalizing coordinate `z(x)` as a series.
pub fn inverse_normal_series(inv: &ParabolicInvariants) -> Result<TruncatedSeries> {
    series_reverse(&inv.normal_series, inv.normal_series.order())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratmap::parse_map;
    use std::collections::HashMap;

    fn map(s: &str) -> RationalMap {
        parse_map(s, &HashMap::new()).unwrap()
    }

    fn origin() -> SpherePoint {
        SpherePoint::finite(0.0, 0.0)
    }

    #[test]
    fn rotation_orders() {
        assert_eq!(rotation_order(c(1.0), 64, UNITY_TOL), Some(1));
        assert_eq!(rotation_order(c(-1.0), 64, UNITY_TOL), Some(2));
        let theta = (5f64.sqrt() - 1.0) / 2.0;
        let l = Complex64::from_polar(1.0, 2.0 * PI * theta);
        assert_eq!(rotation_order(l, 64, UNITY_TOL), None);
        assert_eq!(rotation_order(c(0.5), 64, UNITY_TOL), None);
    }

    #[test]
    fn z_over_z_plus_1_has_zero_residu() {
        let inv = tangency_and_residu(&map("z/(z+1)"), origin(), 1, 1, 12).unwrap();
        assert_eq!((inv.r, inv.e, inv.e_loc), (1, 1, 1));
        assert!(inv.nu.norm() < 1e-12);
        assert!(inv.nu_index.norm() < 1e-12);
        // the normalizing coordinate is x = -z
        assert!((inv.normal_series.coeff(1) + c(1.0)).norm() < 1e-12);
        for k in 2..=inv.normal_series.order() {
            assert!(inv.normal_series.coeff(k).norm() < 1e-10);
        }
    }

    #[test]
    fn fatou_coordinate_is_inverse_z_for_mobius() {
        let f = map("z/(z+1)");
        let inv = tangency_and_residu(&f, origin(), 1, 1, 12).unwrap();
        for z in [0.3, 0.05] {
            let s = fatou_coordinate(&f, &inv, SpherePoint::finite(z, 0.0), 0, 50).unwrap();
            assert!((s - c(1.0 / z)).norm() < 1e-9, "{s}");
        }
    }

    #[test]
    fn z_plus_z2_and_z_plus_z3() {
        let inv = tangency_and_residu(&map("z + z^2"), origin(), 1, 1, 12).unwrap();
        assert_eq!(inv.e_loc, 1);
        assert!((inv.nu - c(1.0)).norm() < 1e-10);
        assert!((inv.nu - inv.nu_index).norm() < 1e-10);
        assert!((inv.attracting_angles[0].abs() - PI).abs() < 1e-12);
        let inv = tangency_and_residu(&map("z + z^3"), origin(), 1, 1, 12).unwrap();
        assert_eq!(inv.e_loc, 2);
        assert!((inv.nu - c(1.5)).norm() < 1e-10);
        assert!((inv.nu - inv.nu_index).norm() < 1e-10);
    }

    #[test]
    fn abel_equation_on_z_plus_z2() {
        let f = map("z + z^2");
        let inv = tangency_and_residu(&f, origin(), 1, 1, 24).unwrap();
        let germ = LocalGerm::new(&f, &inv.cycle, 1);
        let z = c(-0.1);
        let s0 = fatou_coordinate_local(&germ, &inv, z, 0, 400).unwrap();
        let s1 = fatou_coordinate_local(&germ, &inv, germ.step(z).unwrap().0, 0, 400).unwrap();
        assert!((s1 - s0 - c(1.0)).norm() < 1e-6);
    }

    #[test]
    fn repelling_petal_abel_equation() {
        let f = map("z + z^2");
        let inv = tangency_and_residu(&f, origin(), 1, 1, 24).unwrap();
        let germ = LocalGerm::new(&f, &inv.cycle, 1);
        let z = Complex64::new(0.05, 0.01);
        let s0 = fatou_coordinate_local(&germ, &inv, z, -1, 300).unwrap();
        let s1 = fatou_coordinate_local(&germ, &inv, germ.step(z).unwrap().0, -1, 300).unwrap();
        assert!((s1 - s0 - c(1.0)).norm() < 1e-6, "{}", s1 - s0);
    }

    #[test]
    fn abel_residuals_on_every_petal() {
        for s in ["z + z^2", "z + z^3", "z - z^2 + 0.3z^3"] {
            let f = map(s);
            let inv = tangency_and_residu(&f, origin(), 1, 1, 24).unwrap();
            let germ = LocalGerm::new(&f, &inv.cycle, 1);
            let checks = abel_residuals(&germ, &inv, 400);
            assert_eq!(checks.len(), 2 * inv.e_loc);
            for c in checks {
                assert_eq!(c.skipped, 0, "{s}: {c:?}");
                assert!(c.max_residual < 1e-6, "{s}: {c:?}");
            }
        }
    }

    #[test]
    fn minus_three_quarters_via_second_iterate() {
        let f = map("z^2 - 0.75");
        let inv = tangency_and_residu(&f, SpherePoint::finite(-0.5, 0.0), 1, 2, 24).unwrap();
        assert_eq!((inv.r, inv.e, inv.e_loc), (2, 1, 2));
        assert!((inv.nu - c(11.0 / 8.0)).norm() < 1e-10, "{}", inv.nu);
        assert!((inv.nu - inv.nu_index).norm() < 1e-8);
    }
}
