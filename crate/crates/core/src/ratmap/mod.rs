//! Rational self-maps of the Riemann sphere.

pub mod divisor;
pub mod parse;
pub mod sphere;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{DynError, Result};
use crate::numeric::series::TruncatedSeries;
use crate::numeric::{poly_roots_with, Polynomial, RootOptions};

pub use divisor::{critical_divisor, ram_n, RamificationDivisor};
pub use parse::{parse_complex, parse_map, parse_rational};
pub use sphere::{ChartPoint, SpherePoint, CHART_SWITCH, SNAP_TOL};

/// `f = num/den` with coprime numerator and denominator.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalMap {
    num: Polynomial,
    den: Polynomial,
    degree: usize,
    num_rev: Polynomial,
    den_rev: Polynomial,
}

#[derive(Serialize, Deserialize)]
struct MapJson {
    num: Polynomial,
    den: Polynomial,
}

impl Serialize for RationalMap {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MapJson {
            num: self.num.clone(),
            den: self.den.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for RationalMap {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = MapJson::deserialize(d)?;
        RationalMap::new(m.num, m.den).map_err(serde::de::Error::custom)
    }
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

/// Radius under which a root of the denominator counts as a root of the
/// numerator too.
const COPRIME_RADIUS: f64 = 1e-6;

impl RationalMap {
    /// Cancel numerically common roots and normalize to a monic denominator
    /// (or `den = 1`).
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self> {
        if den.is_zero() {
            return Err(DynError::Domain("denominator is identically zero".into()));
        }
        if !num.is_finite() || !den.is_finite() {
            return Err(DynError::Domain("non-finite coefficients".into()));
        }
        let (num, den) = cancel_common_roots(num, den)?;
        let f = Self::from_parts_unchecked(num, den);
        if f.degree == 0 {
            return Err(DynError::Domain("map has degree 0".into()));
        }
        Ok(f)
    }

    /// Normalize without the coprimality pass. For composites of reduced
    /// maps, which are reduced by construction.
    pub fn from_parts_unchecked(num: Polynomial, den: Polynomial) -> Self {
        let lead = if den.degree_or_zero() > 0 {
            den.leading()
        } else {
            den.coeff(0)
        };
        let s = lead.inv();
        let num = num.scaled(s);
        let den = if den.degree_or_zero() > 0 {
            let mut c = den.scaled(s).coeffs().to_vec();
            *c.last_mut().expect("nonconstant") = one();
            Polynomial::new(c)
        } else {
            Polynomial::one()
        };
        let degree = num.degree_or_zero().max(den.degree_or_zero());
        let num_rev = num.reversed(degree);
        let den_rev = den.reversed(degree);
        Self {
            num,
            den,
            degree,
            num_rev,
            den_rev,
        }
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// The identity map.
    pub fn identity() -> Self {
        Self::from_parts_unchecked(Polynomial::identity(), Polynomial::one())
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.degree_or_zero() == 0
    }

    // Homogeneous pair [A : B] of the image for input coordinate u in the
    // given chart.
    fn pair_in_chart(&self, u: Complex64, infinity_chart: bool) -> (Complex64, Complex64) {
        if infinity_chart {
            (self.num_rev.eval(u), self.den_rev.eval(u))
        } else {
            (self.num.eval(u), self.den.eval(u))
        }
    }

    fn chart_polys(&self, infinity_chart: bool) -> (&Polynomial, &Polynomial) {
        if infinity_chart {
            (&self.num_rev, &self.den_rev)
        } else {
            (&self.num, &self.den)
        }
    }

    /// One step of chart-aware iteration.
    pub fn eval_chart(&self, p: ChartPoint) -> Result<ChartPoint> {
        let (a, b) = match p {
            ChartPoint::Affine(z) => self.pair_in_chart(z, false),
            ChartPoint::AtInfinity(w) => self.pair_in_chart(w, true),
        };
        ChartPoint::from_ratio(a, b, p.is_infinity_chart())
            .ok_or_else(|| DynError::Internal(format!("0/0 while evaluating at {:?}", p)))
    }

    pub fn evaluate(&self, z: SpherePoint) -> Result<SpherePoint> {
        let p = self.eval_chart(ChartPoint::from_sphere(z))?;
        Ok(p.to_sphere())
    }

    /// Replace `z` by `Infinity` when it is within snap tolerance of it.
    pub fn evaluate_snapped(&self, z: SpherePoint) -> Result<SpherePoint> {
        Ok(match self.evaluate(z)? {
            SpherePoint::Finite(v) => SpherePoint::snapped(v),
            SpherePoint::Infinity => SpherePoint::Infinity,
        })
    }

    /// `[z, f(z), ..., f^n(z)]`.
    pub fn orbit(&self, z0: SpherePoint, n: usize) -> Result<Vec<SpherePoint>> {
        let mut out = Vec::with_capacity(n + 1);
        let mut p = ChartPoint::from_sphere(z0);
        out.push(z0);
        for _ in 0..n {
            p = self.eval_chart(p)?;
            out.push(p.to_sphere());
        }
        Ok(out)
    }

    /// Chart used for a point in multiplier and series computations:
    /// affine when `|z| <= 2`, the `w = 1/z` chart otherwise.
    pub fn chart_of(z: SpherePoint) -> (bool, Complex64) {
        match z {
            SpherePoint::Infinity => (true, Complex64::new(0.0, 0.0)),
            SpherePoint::Finite(v) if v.norm() > CHART_SWITCH => (true, v.inv()),
            SpherePoint::Finite(v) => (false, v),
        }
    }

    /// Derivative of `f` at `z` read in the chart of `z` and the chart of
    /// `f(z)`. At a fixed point this is the multiplier.
    pub fn derivative_multiplier_chart(&self, z: SpherePoint) -> Result<Complex64> {
        let image = self.evaluate(z)?;
        let (w_in, u) = Self::chart_of(z);
        let (w_out, _) = Self::chart_of(image);
        let (a, b) = self.chart_polys(w_in);
        let (top, bottom) = if w_out { (b, a) } else { (a, b) };
        let (t, dt) = top.eval_with_derivative(u);
        let (s, ds) = bottom.eval_with_derivative(u);
        if s.norm() == 0.0 {
            return Err(DynError::Internal(format!(
                "pole in the output chart at {z}"
            )));
        }
        Ok((dt * s - t * ds) / (s * s))
    }

    /// Value and derivative of `f` between fixed charts: input coordinate `u`
    /// in the chart `in_inf`, output in the chart `out_inf`.
    pub fn eval_between_charts(
        &self,
        u: Complex64,
        in_inf: bool,
        out_inf: bool,
    ) -> Result<(Complex64, Complex64)> {
        let (a, b) = self.chart_polys(in_inf);
        let (top, bottom) = if out_inf { (b, a) } else { (a, b) };
        let (t, dt) = top.eval_with_derivative(u);
        let (s, ds) = bottom.eval_with_derivative(u);
        if s.norm() == 0.0 {
            return Err(DynError::Domain(format!(
                "pole in the output chart at u = {u}"
            )));
        }
        Ok((t / s, (dt * s - t * ds) / (s * s)))
    }

    /// Taylor series at `z` of `f` in local coordinates: input `u - u(z)` in
    /// the chart of `z`, output `v - v(f(z))` in the chart of `f(z)`. The
    /// constant term is exactly zero.
    pub fn local_series(&self, z: SpherePoint, n: usize) -> Result<TruncatedSeries> {
        let image = self.evaluate(z)?;
        let (w_in, u) = Self::chart_of(z);
        let (w_out, v0) = Self::chart_of(image);
        let (q, c0) = self.local_series_in_charts(u, w_in, w_out, n)?;
        if (c0 - v0).norm() > 1e-9 * (1.0 + v0.norm()) {
            return Err(DynError::Internal(format!(
                "local series at {z}: chart value {c0} differs from image {v0}"
            )));
        }
        Ok(q)
    }

    /// Taylor series of `f` at chart coordinate `u` between fixed charts,
    /// with the constant term removed; also returns that constant.
    pub fn local_series_in_charts(
        &self,
        u: Complex64,
        in_inf: bool,
        out_inf: bool,
        n: usize,
    ) -> Result<(TruncatedSeries, Complex64)> {
        let (a, b) = self.chart_polys(in_inf);
        let (top, bottom) = if out_inf { (b, a) } else { (a, b) };
        let t = TruncatedSeries::from_polynomial(&top.taylor_shift(u), n);
        let s = TruncatedSeries::from_polynomial(&bottom.taylor_shift(u), n);
        let mut q = &t * &s.reciprocal()?;
        let c0 = q.coeff(0);
        q.set_coeff(0, Complex64::new(0.0, 0.0));
        Ok((q, c0))
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &RationalMap) -> RationalMap {
        let (a, b) = (&inner.num, &inner.den);
        let d = self.degree;
        // Σ c_k A^k B^(d-k) for numerator and denominator.
        let mut apow = vec![Polynomial::one()];
        let mut bpow = vec![Polynomial::one()];
        for k in 1..=d {
            apow.push(&apow[k - 1] * a);
            bpow.push(&bpow[k - 1] * b);
        }
        let lift = |p: &Polynomial| {
            let mut acc = Polynomial::zero();
            for k in 0..=d {
                let c = p.coeff(k);
                if c.norm() != 0.0 {
                    acc = &acc + &(&apow[k] * &bpow[d - k]).scaled(c);
                }
            }
            acc
        };
        RationalMap::from_parts_unchecked(lift(&self.num), lift(&self.den))
    }

    /// `f^n` by repeated homogeneous composition.
    pub fn iterate(&self, n: usize) -> RationalMap {
        let mut g = RationalMap::identity();
        for _ in 0..n {
            g = self.compose(&g);
        }
        g
    }

    /// `g ∘ f ∘ g⁻¹`.
    pub fn conjugate(&self, g: &Mobius) -> Result<RationalMap> {
        let gm = g.as_map()?;
        let ginv = g.inverse().as_map()?;
        let h = gm.compose(&self.compose(&ginv));
        RationalMap::new(h.num, h.den)
    }
}

fn cancel_common_roots(num: Polynomial, den: Polynomial) -> Result<(Polynomial, Polynomial)> {
    let (mut num, mut den) = (num, den);
    if num.is_zero() {
        return Ok((num, Polynomial::one()));
    }
    let opts = RootOptions::default();
    loop {
        if num.degree_or_zero() == 0 || den.degree_or_zero() == 0 {
            return Ok((num, den));
        }
        let rn = poly_roots_with(&num, &opts)?;
        let rd = poly_roots_with(&den, &opts)?;
        let common = rd.iter().find_map(|d| {
            rn.iter()
                .find(|n| (n.value - d.value).norm() <= COPRIME_RADIUS * d.value.norm().max(1.0))
                .map(|n| (n.value + d.value) / 2.0)
        });
        match common {
            Some(r) => {
                num = num.deflate(r);
                den = den.deflate(r);
            }
            None => return Ok((num, den)),
        }
    }
}

/// `z ↦ (a z + b)/(c z + d)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mobius {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl Mobius {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        let det = a * d - b * c;
        if det.norm() <= 1e-12 * (a.norm() + b.norm() + c.norm() + d.norm()).powi(2) {
            return Err(DynError::Domain("degenerate Möbius transformation".into()));
        }
        Ok(Self { a, b, c, d })
    }

    pub fn translation(t: Complex64) -> Self {
        Self {
            a: one(),
            b: t,
            c: Complex64::new(0.0, 0.0),
            d: one(),
        }
    }

    pub fn inverse(&self) -> Self {
        Self {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    pub fn apply(&self, z: SpherePoint) -> SpherePoint {
        let (p, q) = match z {
            SpherePoint::Infinity => (self.a, self.c),
            SpherePoint::Finite(v) => (self.a * v + self.b, self.c * v + self.d),
        };
        if q.norm() == 0.0 {
            SpherePoint::Infinity
        } else {
            SpherePoint::snapped(p / q)
        }
    }

    pub fn as_map(&self) -> Result<RationalMap> {
        RationalMap::new(
            Polynomial::new(vec![self.b, self.a]),
            Polynomial::new(vec![self.d, self.c]),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn map(s: &str) -> RationalMap {
        parse_map(s, &HashMap::new()).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        assert!(map("z^2")
            .evaluate(SpherePoint::Infinity)
            .unwrap()
            .is_infinity());
        assert!(map("z/(z+1)")
            .evaluate(SpherePoint::finite(-1.0, 0.0))
            .unwrap()
            .is_infinity());
        let v = map("z^2 + 0.25")
            .evaluate(SpherePoint::finite(0.5, 0.0))
            .unwrap();
        assert_eq!(v, SpherePoint::finite(0.5, 0.0));
    }

    #[test]
    fn multipliers() {
        let l = Complex64::new(0.3, 0.4);
        let f = RationalMap::new(Polynomial::monomial(l, 1), Polynomial::one()).unwrap();
        assert!(
            (f.derivative_multiplier_chart(SpherePoint::finite(0.0, 0.0))
                .unwrap()
                - l)
                .norm()
                < 1e-15
        );
        let f = map("z^2");
        assert!(
            (f.derivative_multiplier_chart(SpherePoint::finite(1.0, 0.0))
                .unwrap()
                - c(2.0))
            .norm()
                < 1e-15
        );
        let f = map("z^2 + 0.3");
        assert!(
            f.derivative_multiplier_chart(SpherePoint::Infinity)
                .unwrap()
                .norm()
                < 1e-15
        );
        let f = map("z/(z+1)");
        assert!(
            (f.derivative_multiplier_chart(SpherePoint::finite(0.0, 0.0))
                .unwrap()
                - c(1.0))
            .norm()
                < 1e-15
        );
    }

    #[test]
    fn orbit_examples() {
        let f = map("z^2");
        let o = f.orbit(SpherePoint::finite(2.0, 0.0), 3).unwrap();
        let want: Vec<SpherePoint> = [2.0, 4.0, 16.0, 256.0]
            .iter()
            .map(|&x| SpherePoint::finite(x, 0.0))
            .collect();
        assert_eq!(o, want);
        let o = f.orbit(SpherePoint::Infinity, 2).unwrap();
        assert!(o.iter().all(|p| p.is_infinity()));
    }

    #[test]
    fn common_factors_cancel() {
        let f = map("(z^2 - 1)/(z - 1)");
        assert_eq!(f.degree(), 1);
        assert!((f.num().coeff(0) - c(1.0)).norm() < 1e-9);
        assert!(parse_map("(z+1)/(z+1)", &HashMap::new()).is_err());
    }

    #[test]
    fn composition_and_conjugation() {
        let f = map("z^2 - 1");
        let f2 = f.iterate(2);
        assert_eq!(f2.degree(), 4);
        let z = SpherePoint::finite(0.3, 0.2);
        let direct = f.evaluate(f.evaluate(z).unwrap()).unwrap();
        assert!(f2.evaluate(z).unwrap().approx_eq(&direct, 1e-13));

        let g = Mobius::new(c(1.0), c(2.0), c(1.0), c(-1.0)).unwrap();
        let h = f.conjugate(&g).unwrap();
        assert_eq!(h.degree(), 2);
        let lhs = h.evaluate(g.apply(z)).unwrap();
        let rhs = g.apply(f.evaluate(z).unwrap());
        assert!(lhs.approx_eq(&rhs, 1e-10));
    }

    #[test]
    fn local_series_of_z_plus_z2() {
        let f = map("z + z^2");
        let s = f.local_series(SpherePoint::finite(0.0, 0.0), 4).unwrap();
        assert_eq!(s.coeffs(), &[c(0.0), c(1.0), c(1.0), c(0.0), c(0.0)]);
        // at infinity z + z^2 reads w ↦ w^2/(1 + w)
        let s = f.local_series(SpherePoint::Infinity, 4).unwrap();
        let want = [0.0, 0.0, 1.0, -1.0, 1.0];
        for (k, &w) in want.iter().enumerate() {
            assert!((s.coeff(k) - c(w)).norm() < 1e-15);
        }
    }
}
