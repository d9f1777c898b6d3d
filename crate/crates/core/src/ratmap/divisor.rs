use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{RationalMap, SpherePoint, SNAP_TOL};
use crate::error::Result;
use crate::numeric::{poly_roots_with, Polynomial, RootOptions};

/// A finite effective divisor on the sphere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RamificationDivisor {
    pub label: String,
    pub entries: Vec<DivisorEntry>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivisorEntry {
    pub point: SpherePoint,
    pub multiplicity: usize,
}

impl RamificationDivisor {
    pub fn empty(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            entries: Vec::new(),
        }
    }

    pub fn degree(&self) -> usize {
        self.entries.iter().map(|e| e.multiplicity).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn support(&self) -> Vec<SpherePoint> {
        self.entries.iter().map(|e| e.point).collect()
    }

    /// Multiplicity at `p`, zero off the support.
    pub fn multiplicity_at(&self, p: &SpherePoint) -> usize {
        self.entries
            .iter()
            .find(|e| e.point.approx_eq(p, SNAP_TOL))
            .map(|e| e.multiplicity)
            .unwrap_or(0)
    }

    /// Add `m` at `p`, merging with an existing entry within snap tolerance.
    pub fn add_point(&mut self, p: SpherePoint, m: usize) {
        if m == 0 {
            return;
        }
        match self
            .entries
            .iter_mut()
            .find(|e| e.point.approx_eq(&p, SNAP_TOL))
        {
            Some(e) => e.multiplicity += m,
            None => self.entries.push(DivisorEntry {
                point: p,
                multiplicity: m,
            }),
        }
    }

    pub fn plus(&self, other: &RamificationDivisor, label: impl Into<String>) -> Self {
        let mut out = self.clone();
        out.label = label.into();
        for e in &other.entries {
            out.add_point(e.point, e.multiplicity);
        }
        out.sort();
        out
    }

    /// `self <= other` pointwise.
    pub fn le(&self, other: &RamificationDivisor) -> bool {
        self.entries
            .iter()
            .all(|e| e.multiplicity <= other.multiplicity_at(&e.point))
    }

    /// Same points with the same multiplicities, up to snap tolerance.
    pub fn same_as(&self, other: &RamificationDivisor) -> bool {
        self.le(other) && other.le(self)
    }

    pub fn sort(&mut self) {
        self.entries.sort_by(|a, b| a.point.canonical_cmp(&b.point));
    }

    /// Pull back along `f`: `ord_x(f*D) = e_x(f) · ord_{f(x)}(D)`, evaluated
    /// on the given candidate points.
    pub fn pullback_order(
        &self,
        f: &RationalMap,
        crit: &RamificationDivisor,
        x: SpherePoint,
    ) -> Result<usize> {
        let fx = f.evaluate_snapped(x)?;
        let local_degree = crit.multiplicity_at(&x) + 1;
        Ok(local_degree * self.multiplicity_at(&fx))
    }
}

// Leading coefficients of P'Q - PQ' cancel exactly when paired this way:
// W_k = Σ_{i+j=k+1, i>j} (i - j)(p_i q_j - p_j q_i).
fn wronskian(p: &Polynomial, q: &Polynomial) -> Polynomial {
    let n = p.coeffs().len().max(q.coeffs().len());
    if n < 2 {
        return Polynomial::zero();
    }
    let mut w = vec![Complex64::new(0.0, 0.0); 2 * n];
    for i in 0..n {
        for j in 0..i {
            let c = (p.coeff(i) * q.coeff(j) - p.coeff(j) * q.coeff(i)) * (i - j) as f64;
            w[i + j - 1] += c;
        }
    }
    Polynomial::new(w)
}

/// Critical points with multiplicity (local degree minus one); total degree
/// `2d - 2`.
pub fn critical_divisor(f: &RationalMap) -> Result<RamificationDivisor> {
    let w = wronskian(f.num(), f.den());
    let mut div = RamificationDivisor::empty("Ram_f");
    let total = 2 * f.degree() - 2;
    if w.degree_or_zero() > 0 {
        for r in poly_roots_with(&w, &RootOptions::default())? {
            div.add_point(SpherePoint::snapped(r.value), r.multiplicity);
        }
    }
    // The degree deficit of the Wronskian is the ramification at infinity.
    div.add_point(
        SpherePoint::Infinity,
        total.saturating_sub(w.degree_or_zero()),
    );
    div.sort();
    Ok(div)
}

/// `Ram^n`: `Ram^0 = Ram_f + (Ram_f)_red`, then
/// `|Ram^{k+1}| = |Ram^0| ∪ f(|Ram^k|)` with the `Ram^0` order on `|Ram^0|`
/// and order one at the new points.
pub fn ram_n(f: &RationalMap, n: usize) -> Result<RamificationDivisor> {
    let crit = critical_divisor(f)?;
    ram_n_from(f, &crit, n)
}

pub fn ram_n_from(
    f: &RationalMap,
    crit: &RamificationDivisor,
    n: usize,
) -> Result<RamificationDivisor> {
    let mut r0 = RamificationDivisor::empty("Ram^0");
    for e in &crit.entries {
        r0.add_point(e.point, e.multiplicity + 1);
    }
    let mut current = r0.clone();
    for k in 1..=n {
        let mut next = r0.clone();
        next.label = format!("Ram^{k}");
        for p in current.support() {
            let q = f.evaluate_snapped(p)?;
            if next.multiplicity_at(&q) == 0 {
                next.add_point(q, 1);
            }
        }
        current = next;
    }
    current.sort();
    Ok(current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratmap::parse_map;
    use std::collections::HashMap;

    fn map(s: &str) -> RationalMap {
        parse_map(s, &HashMap::new()).unwrap()
    }

    fn pt(re: f64) -> SpherePoint {
        SpherePoint::finite(re, 0.0)
    }

    #[test]
    fn quadratic_critical_divisors() {
        for s in ["z^2", "z^2 + 0.3"] {
            let d = critical_divisor(&map(s)).unwrap();
            assert_eq!(d.degree(), 2);
            assert_eq!(d.multiplicity_at(&pt(0.0)), 1);
            assert_eq!(d.multiplicity_at(&SpherePoint::Infinity), 1);
        }
        let d = critical_divisor(&map("z^3")).unwrap();
        assert_eq!(d.multiplicity_at(&pt(0.0)), 2);
        assert_eq!(d.multiplicity_at(&SpherePoint::Infinity), 2);
    }

    #[test]
    fn poles_and_infinity_of_rational_maps() {
        // 1/z^2 is critical at 0 and at infinity
        let d = critical_divisor(&map("1/z^2")).unwrap();
        assert_eq!(d.multiplicity_at(&pt(0.0)), 1);
        assert_eq!(d.multiplicity_at(&SpherePoint::Infinity), 1);
        // z + 1/z: critical at ±1 only
        let d = critical_divisor(&map("z + 1/z")).unwrap();
        assert_eq!(d.degree(), 2);
        assert_eq!(d.multiplicity_at(&SpherePoint::Infinity), 0);
        assert_eq!(d.multiplicity_at(&pt(1.0)), 1);
    }

    #[test]
    fn ram_n_examples() {
        let f = map("z^2");
        for n in [0, 5] {
            let r = ram_n(&f, n).unwrap();
            assert_eq!(r.entries.len(), 2);
            assert_eq!(r.multiplicity_at(&pt(0.0)), 2);
            assert_eq!(r.multiplicity_at(&SpherePoint::Infinity), 2);
        }
        let f = map("z^2 - 2");
        let r1 = ram_n(&f, 1).unwrap();
        assert_eq!(r1.multiplicity_at(&pt(-2.0)), 1);
        assert_eq!(r1.multiplicity_at(&pt(2.0)), 0);
        let r2 = ram_n(&f, 2).unwrap();
        assert_eq!(r2.multiplicity_at(&pt(2.0)), 1);
        let r9 = ram_n(&f, 9).unwrap();
        assert_eq!(r9.degree(), 2 + 2 + 1 + 1);
    }
}
