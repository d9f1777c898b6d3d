//! Truncated formal power series `c_0 + c_1 z + ... + c_N z^N`.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::poly::Polynomial;
use crate::error::{DynError, Result};

/// Constant terms below this (relative to the largest coefficient) are
/// treated as the rounding residue of an exact zero.
pub const ZERO_CONSTANT_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncatedSeries {
    order: usize,
    coeffs: Vec<Complex64>,
}

fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

impl TruncatedSeries {
    /// Pads or truncates `coeffs` to exactly `order + 1` entries.
    pub fn new(mut coeffs: Vec<Complex64>, order: usize) -> Self {
        coeffs.resize(order + 1, czero());
        Self { order, coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Self::new(Vec::new(), order)
    }

    pub fn constant(c: Complex64, order: usize) -> Self {
        Self::new(vec![c], order)
    }

    /// The identity series `z`.
    pub fn identity(order: usize) -> Self {
        Self::new(vec![czero(), Complex64::new(1.0, 0.0)], order)
    }

    pub fn from_polynomial(p: &Polynomial, order: usize) -> Self {
        Self::new(p.coeffs().to_vec(), order)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    pub fn set_coeff(&mut self, k: usize, c: Complex64) {
        if k <= self.order {
            self.coeffs[k] = c;
        }
    }

    pub fn truncate(&self, order: usize) -> Self {
        Self::new(self.coeffs.clone(), order)
    }

    pub fn scale(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Index of the first coefficient with magnitude above `tol·scale`, if any.
    pub fn valuation(&self, tol: f64) -> Option<usize> {
        let cut = tol * self.scale();
        self.coeffs.iter().position(|c| c.norm() > cut)
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect(), self.order)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(czero(), |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Self {
        let coeffs = (1..=self.order)
            .map(|k| self.coeffs[k] * k as f64)
            .collect();
        Self::new(coeffs, self.order)
    }

    /// Term-wise antiderivative with zero constant; the top term is dropped.
    pub fn integral(&self) -> Self {
        let mut coeffs = vec![czero()];
        coeffs.extend((0..self.order).map(|k| self.coeffs[k] / (k + 1) as f64));
        Self::new(coeffs, self.order)
    }

    /// Drop the leading `k` coefficients (divide by `z^k`), losing `k` orders.
    pub fn shift_down(&self, k: usize) -> Self {
        let order = self.order.saturating_sub(k);
        Self::new(self.coeffs.iter().skip(k).copied().collect(), order)
    }

    /// Multiply by `z^k`, keeping the order.
    pub fn shift_up(&self, k: usize) -> Self {
        let mut coeffs = vec![czero(); k];
        coeffs.extend_from_slice(&self.coeffs);
        Self::new(coeffs, self.order)
    }

    /// Noise-level constant term, judged against the linear term only: the
    /// formal series met at parabolic points diverge, so high coefficients
    /// say nothing about the size of the constant.
    fn has_zero_constant(&self) -> bool {
        let c1 = self.coeffs.get(1).map_or(0.0, |c| c.norm());
        self.coeffs[0].norm() <= ZERO_CONSTANT_TOL * c1.max(1.0)
    }

    /// `1/self`; needs a nonzero constant term.
    pub fn reciprocal(&self) -> Result<Self> {
        let c0 = self.coeffs[0];
        if c0.norm() == 0.0 || self.has_zero_constant() {
            return Err(DynError::Domain(
                "reciprocal of a series with zero constant term".into(),
            ));
        }
        let n = self.order;
        let mut b = vec![czero(); n + 1];
        b[0] = c0.inv();
        for k in 1..=n {
            let mut s = czero();
            for j in 1..=k {
                s += self.coeffs[j] * b[k - j];
            }
            b[k] = -s * b[0];
        }
        Ok(Self::new(b, n))
    }

    /// `exp(self)` for a series with zero constant term.
    pub fn exp(&self) -> Result<Self> {
        if !self.has_zero_constant() {
            return Err(DynError::Domain(
                "exp of a series with nonzero constant term".into(),
            ));
        }
        let n = self.order;
        let da = self.derivative();
        let mut e = vec![czero(); n + 1];
        e[0] = Complex64::new(1.0, 0.0);
        // e' = a' e, term by term
        for k in 1..=n {
            let mut s = czero();
            for j in 0..k {
                s += da.coeffs[j] * e[k - 1 - j];
            }
            e[k] = s / k as f64;
        }
        Ok(Self::new(e, n))
    }

    /// `log(1 + self)` for a series with zero constant term.
    pub fn log1p(&self) -> Result<Self> {
        if !self.has_zero_constant() {
            return Err(DynError::Domain(
                "log1p of a series with nonzero constant term".into(),
            ));
        }
        let one_plus = self + &Self::constant(Complex64::new(1.0, 0.0), self.order);
        let q = &self.derivative() * &one_plus.reciprocal()?;
        Ok(q.integral())
    }

    /// `self^alpha` with the principal branch at the constant term.
    pub fn powc(&self, alpha: Complex64) -> Result<Self> {
        let c0 = self.coeffs[0];
        if c0.norm() == 0.0 {
            return Err(DynError::Domain(
                "complex power of a series vanishing at 0".into(),
            ));
        }
        let mut u = self.scaled(c0.inv()) - Self::constant(Complex64::new(1.0, 0.0), self.order);
        u.coeffs[0] = czero();
        let l = u.log1p()?.scaled(alpha).exp()?;
        Ok(l.scaled(c0.powc(alpha)))
    }

    pub fn powi(&self, k: usize) -> Self {
        let mut acc = Self::constant(Complex64::new(1.0, 0.0), self.order);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }
}

/// `outer ∘ inner` through order `n`. `inner` must have zero constant term.
pub fn series_compose(
    outer: &TruncatedSeries,
    inner: &TruncatedSeries,
    n: usize,
) -> Result<TruncatedSeries> {
    if !inner.has_zero_constant() {
        return Err(DynError::Domain(
            "composition requires an inner series with zero constant term".into(),
        ));
    }
    let mut inner = inner.truncate(n);
    inner.coeffs[0] = czero();
    let outer = outer.truncate(n);
    let mut acc = TruncatedSeries::zero(n);
    for &c in outer.coeffs.iter().rev() {
        acc = &acc * &inner;
        acc.coeffs[0] += c;
    }
    Ok(acc)
}

/// Compositional inverse through order `n`.
pub fn series_reverse(a: &TruncatedSeries, n: usize) -> Result<TruncatedSeries> {
    if !a.has_zero_constant() {
        return Err(DynError::Domain(
            "reversion requires zero constant term".into(),
        ));
    }
    let a1 = a.coeff(1);
    if a1.norm() == 0.0 || a1.norm() <= ZERO_CONSTANT_TOL * a.scale() {
        return Err(DynError::Domain(
            "reversion requires a nonzero linear term".into(),
        ));
    }
    let a = a.truncate(n);
    let mut b = TruncatedSeries::zero(n);
    if n >= 1 {
        b.coeffs[1] = a1.inv();
    }
    // b_k is fixed by the order-k coefficient of a∘b, which depends on b_k
    // only through a1·b_k.
    for k in 2..=n {
        let comp = series_compose(&a, &b.truncate(k), k)?;
        b.coeffs[k] = -comp.coeffs[k] / a1;
    }
    Ok(b)
}

impl Add for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn add(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        let n = self.order.min(rhs.order);
        TruncatedSeries::new((0..=n).map(|k| self.coeffs[k] + rhs.coeffs[k]).collect(), n)
    }
}

impl Sub for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn sub(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        let n = self.order.min(rhs.order);
        TruncatedSeries::new((0..=n).map(|k| self.coeffs[k] - rhs.coeffs[k]).collect(), n)
    }
}

impl Sub for TruncatedSeries {
    type Output = TruncatedSeries;
    fn sub(self, rhs: TruncatedSeries) -> TruncatedSeries {
        &self - &rhs
    }
}

impl Mul for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn mul(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        let n = self.order.min(rhs.order);
        let mut out = vec![czero(); n + 1];
        for i in 0..=n {
            let a = self.coeffs[i];
            if a.norm() == 0.0 {
                continue;
            }
            for j in 0..=(n - i) {
                out[i + j] += a * rhs.coeffs[j];
            }
        }
        TruncatedSeries::new(out, n)
    }
}

impl Neg for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn neg(self) -> TruncatedSeries {
        self.scaled(Complex64::new(-1.0, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(coeffs: &[f64], n: usize) -> TruncatedSeries {
        TruncatedSeries::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect(), n)
    }

    fn close(a: &TruncatedSeries, b: &TruncatedSeries, tol: f64) -> bool {
        (0..=a.order().min(b.order())).all(|k| (a.coeff(k) - b.coeff(k)).norm() <= tol)
    }

    #[test]
    fn unit_constant_survives_huge_tails() {
        let mut c = vec![1.0, 0.5];
        c.extend((2..30).map(|k| 10f64.powi(k / 2)));
        let a = s(&c, 29);
        let b = a.reciprocal().unwrap();
        assert!(((&a * &b).coeff(0) - 1.0).norm() < 1e-15);
        assert!(s(&[1e-20, 1.0, 1e15], 2).reciprocal().is_err());
    }

    #[test]
    fn identity_outer_returns_inner() {
        let inner = s(&[0.0, 2.0, -1.0, 0.5], 3);
        let out = series_compose(&TruncatedSeries::identity(3), &inner, 3).unwrap();
        assert!(close(&out, &inner, 0.0));
    }

    #[test]
    fn square_of_z_plus_z2() {
        let out = series_compose(&s(&[0.0, 0.0, 1.0], 4), &s(&[0.0, 1.0, 1.0], 4), 4).unwrap();
        assert!(close(&out, &s(&[0.0, 0.0, 1.0, 2.0, 1.0], 4), 0.0));
    }

    #[test]
    fn nonzero_inner_constant_is_rejected() {
        assert!(series_compose(&s(&[0.0, 1.0], 2), &s(&[1.0, 1.0], 2), 2).is_err());
    }

    #[test]
    fn reverse_of_z_plus_z2() {
        let b = series_reverse(&s(&[0.0, 1.0, 1.0], 3), 3).unwrap();
        assert!(close(&b, &s(&[0.0, 1.0, -1.0, 2.0], 3), 1e-15));
        let a = s(&[0.0, 1.0, 1.0], 6);
        let b = series_reverse(&a, 6).unwrap();
        let id = series_compose(&a, &b, 6).unwrap();
        assert!(close(&id, &TruncatedSeries::identity(6), 1e-13));
    }

    #[test]
    fn reverse_linear_scaling() {
        let b = series_reverse(&s(&[0.0, 2.0], 2), 2).unwrap();
        assert!(close(&b, &s(&[0.0, 0.5], 2), 0.0));
        let b = series_reverse(&TruncatedSeries::identity(4), 4).unwrap();
        assert!(close(&b, &TruncatedSeries::identity(4), 0.0));
    }

    #[test]
    fn exp_log_round_trip() {
        let u = s(&[0.0, 0.3, -0.2, 0.1], 8);
        let back = u.exp().unwrap();
        let back = (&back - &TruncatedSeries::constant(Complex64::new(1.0, 0.0), 8))
            .log1p()
            .unwrap();
        assert!(close(&back, &u, 1e-14));
    }

    #[test]
    fn fractional_power() {
        // (1 + z)^(1/2) squared is 1 + z
        let r = s(&[1.0, 1.0], 6).powc(Complex64::new(0.5, 0.0)).unwrap();
        assert!(close(&(&r * &r), &s(&[1.0, 1.0], 6), 1e-14));
    }
}
