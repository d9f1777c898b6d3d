//! Simultaneous root extraction (Aberth–Ehrlich) with multiplicity clustering.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::poly::Polynomial;
use crate::error::{DynError, Result};

/// Knobs for [`poly_roots`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootOptions {
    /// Relative residual bound `|p(r)| <= tol * scale`.
    pub tol: f64,
    /// Roots closer than `cluster_radius * max(1, |r|)` always merge.
    pub cluster_radius: f64,
    pub max_iter: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            cluster_radius: 1e-6,
            max_iter: 800,
        }
    }
}

/// A root with its multiplicity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub value: Complex64,
    pub multiplicity: usize,
}

/// Roots of `p` with multiplicity, using default clustering and the given
/// residual tolerance.
pub fn poly_roots(p: &Polynomial, tol: f64) -> Result<Vec<Root>> {
    poly_roots_with(
        p,
        &RootOptions {
            tol,
            ..RootOptions::default()
        },
    )
}

/// Residual of `p` at `r` read in the sphere chart containing `r`:
/// `|p(r)|` on the unit disc and `|w^n p(1/w)|` at `w = 1/r` outside it.
/// Compare against `tol * p.scale()`.
pub fn projective_residual(p: &Polynomial, r: Complex64) -> f64 {
    let n = p.degree_or_zero();
    if r.norm() <= 1.0 {
        p.eval(r).norm()
    } else {
        p.reversed(n).eval(r.inv()).norm()
    }
}

pub fn poly_roots_with(p: &Polynomial, opts: &RootOptions) -> Result<Vec<Root>> {
    let Some(n) = p.degree() else {
        return Err(DynError::Domain("roots of the zero polynomial".into()));
    };
    if !p.is_finite() {
        return Err(DynError::Domain(
            "polynomial has non-finite coefficients".into(),
        ));
    }
    let mut out = Vec::new();
    let v = p.valuation();
    if v > 0 {
        out.push(Root {
            value: Complex64::new(0.0, 0.0),
            multiplicity: v,
        });
    }
    if n == v {
        return Ok(out);
    }
    let q = Polynomial::new(p.coeffs()[v..].to_vec());
    let simple = aberth(&q, opts)?;
    out.extend(cluster(&q, simple, opts));
    for root in &out {
        let res = projective_residual(p, root.value);
        let scale = p.scale();
        if !(res <= opts.tol * scale) {
            return Err(DynError::NonConvergence {
                what: format!(
                    "root residual {res:.3e} exceeds {:.3e} at {}",
                    opts.tol * scale,
                    root.value
                ),
                best: out.iter().map(|r| r.value).collect(),
            });
        }
    }
    out.sort_by(|a, b| {
        a.value
            .re
            .total_cmp(&b.value.re)
            .then(a.value.im.total_cmp(&b.value.im))
    });
    Ok(out)
}

// Newton correction p/p', evaluated through the reversed polynomial when
// |z| > 1 so large roots do not overflow.
fn newton_ratio(p: &Polynomial, rev: &Polynomial, n: usize, z: Complex64) -> (Complex64, f64) {
    if z.norm() <= 1.0 {
        let (v, dv) = p.eval_with_derivative(z);
        (v / dv, v.norm() / p.abs_scale_at(z).max(f64::MIN_POSITIVE))
    } else {
        let w = z.inv();
        let (r, dr) = rev.eval_with_derivative(w);
        let denom = Complex64::new(n as f64, 0.0) - w * dr / r;
        (
            z / denom,
            r.norm() / rev.abs_scale_at(w).max(f64::MIN_POSITIVE),
        )
    }
}

fn aberth(p: &Polynomial, opts: &RootOptions) -> Result<Vec<Complex64>> {
    let n = p.degree().unwrap_or(0);
    if n == 1 {
        return Ok(vec![-p.coeff(0) / p.coeff(1)]);
    }
    let rev = p.reversed(n);
    let lead = p.leading().norm();
    // Initial radius from the geometric mean of root moduli, bounded by the
    // Fujiwara bound to stay inside the root annulus.
    let mean = (p.coeff(0).norm() / lead).powf(1.0 / n as f64);
    let fujiwara = (0..n)
        .map(|k| (p.coeff(k).norm() / lead).powf(1.0 / (n - k) as f64))
        .fold(0.0, f64::max)
        * 2.0;
    let radius = mean.clamp(1e-3 * fujiwara.max(1e-300), fujiwara.max(1e-300));
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4;
            Complex64::from_polar(radius, theta)
        })
        .collect();
    let mut done = vec![false; n];
    let eps = f64::EPSILON;
    for _ in 0..opts.max_iter {
        let mut all = true;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let (ratio, rel_res) = newton_ratio(p, &rev, n, z[i]);
            if rel_res <= 4.0 * eps * (n as f64) {
                done[i] = true;
                continue;
            }
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    let d = z[i] - z[j];
                    if d.norm() > 0.0 {
                        s += d.inv();
                    }
                }
            }
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            if !(w.re.is_finite() && w.im.is_finite()) {
                let bump = Complex64::new(1e-8, 1e-8) * (1.0 + z[i].norm());
                z[i] += bump;
                all = false;
                continue;
            }
            z[i] -= w;
            if w.norm() <= 2.0 * eps * z[i].norm() {
                done[i] = true;
            } else {
                all = false;
            }
        }
        if all {
            return Ok(z);
        }
    }
    // Iterates that stalled near a multiple root still carry the information
    // the clustering pass needs; the residual check downstream decides.
    Ok(z)
}

fn spread(points: &[Complex64], c: Complex64) -> f64 {
    points.iter().map(|z| (z - c).norm()).fold(0.0, f64::max)
}

fn mean(points: &[Complex64]) -> Complex64 {
    points.iter().sum::<Complex64>() / points.len() as f64
}

// Single-linkage grouping at radius `rad(z)`.
fn link(points: &[Complex64], rad: impl Fn(Complex64) -> f64) -> Vec<Vec<Complex64>> {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        let mut i = i;
        while parent[i] != r {
            let next = parent[i];
            parent[i] = r;
            i = next;
        }
        r
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (points[i] - points[j]).norm() <= rad(points[i]).max(rad(points[j])) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<Complex64>> = Vec::new();
    let mut index = vec![usize::MAX; n];
    for (i, &z) in points.iter().enumerate().take(n) {
        let r = find(&mut parent, i);
        if index[r] == usize::MAX {
            index[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[index[r]].push(z);
    }
    groups
}

// Expected perturbation radius of a k-fold root at `c` under rounding.
fn predicted_spread(p: &Polynomial, c: Complex64, k: usize) -> f64 {
    let shifted = p.taylor_shift(c);
    let bk = shifted.coeff(k).norm();
    if bk == 0.0 {
        return f64::INFINITY;
    }
    let s = p.abs_scale_at(c).max(p.scale());
    (8.0 * f64::EPSILON * s / bk).powf(1.0 / k as f64)
}

// Newton on p^{(k-1)} from the cluster mean; the k-fold root is simple there.
fn refine_center(p: &Polynomial, c: Complex64, k: usize, limit: f64) -> Complex64 {
    let mut dp = p.clone();
    for _ in 0..(k - 1) {
        dp = dp.derivative();
    }
    let mut z = c;
    for _ in 0..8 {
        let (v, dv) = dp.eval_with_derivative(z);
        if dv.norm() == 0.0 {
            break;
        }
        let step = v / dv;
        if !(step.re.is_finite() && step.im.is_finite()) {
            break;
        }
        z -= step;
        if step.norm() <= 2.0 * f64::EPSILON * z.norm().max(1e-300) {
            break;
        }
    }
    if (z - c).norm() <= limit && p.eval(z).norm() <= p.eval(c).norm() {
        z
    } else {
        c
    }
}

fn cluster(p: &Polynomial, roots: Vec<Complex64>, opts: &RootOptions) -> Vec<Root> {
    let strict = |z: Complex64| opts.cluster_radius * z.norm().max(1.0);
    let loose = |z: Complex64| 1e-3 * z.norm().max(1.0);
    let mut out = Vec::new();
    for group in link(&roots, loose) {
        let k = group.len();
        let c = mean(&group);
        let accept = k == 1 || {
            let s = spread(&group, c);
            s <= strict(c) || s <= 10.0 * predicted_spread(p, c, k)
        };
        let parts = if accept {
            vec![group]
        } else {
            link(&group, strict)
        };
        for part in parts {
            let k = part.len();
            let c = mean(&part);
            let value = if k == 1 {
                polish(p, c)
            } else {
                refine_center(p, c, k, 4.0 * spread(&part, c) + strict(c))
            };
            out.push(Root {
                value,
                multiplicity: k,
            });
        }
    }
    out
}

fn polish(p: &Polynomial, z0: Complex64) -> Complex64 {
    let mut z = z0;
    let mut best = (p.eval(z).norm(), z);
    for _ in 0..3 {
        let (v, dv) = p.eval_with_derivative(z);
        if dv.norm() == 0.0 {
            break;
        }
        z -= v / dv;
        let r = p.eval(z).norm();
        if r < best.0 {
            best = (r, z);
        }
    }
    best.1
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn z2_minus_1() {
        let r = poly_roots(&Polynomial::from_real(&[-1.0, 0.0, 1.0]), 1e-9).unwrap();
        assert_eq!(r.len(), 2);
        assert!((r[0].value - c(-1.0, 0.0)).norm() < 1e-12);
        assert!((r[1].value - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn z_cubed_is_one_triple_root() {
        let r = poly_roots(&Polynomial::from_real(&[0.0, 0.0, 0.0, 1.0]), 1e-9).unwrap();
        assert_eq!(
            r,
            vec![Root {
                value: c(0.0, 0.0),
                multiplicity: 3
            }]
        );
    }

    #[test]
    fn zero_polynomial_is_rejected() {
        assert!(poly_roots(&Polynomial::zero(), 1e-9).is_err());
    }

    #[test]
    fn random_degree_20_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let coeffs: Vec<Complex64> = (0..=20)
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let p = Polynomial::new(coeffs);
        let roots = poly_roots(&p, 1e-9).unwrap();
        assert_eq!(roots.iter().map(|r| r.multiplicity).sum::<usize>(), 20);
        for r in roots {
            assert!(projective_residual(&p, r.value) <= 1e-8 * p.scale());
        }
    }

    #[test]
    fn shifted_triple_root_clusters() {
        // (z + 1/2)^3 (z - 3/2), the period-2 polynomial of z^2 - 3/4
        let p = Polynomial::from_roots(c(1.0, 0.0), &[c(-0.5, 0.0); 3])
            .compose(&Polynomial::identity());
        let p = &p * &Polynomial::from_real(&[-1.5, 1.0]);
        let r = poly_roots(&p, 1e-9).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[0].multiplicity, 3);
        assert!((r[0].value - c(-0.5, 0.0)).norm() < 1e-6);
    }

    #[test]
    fn close_but_distinct_roots_stay_apart() {
        let p =
            Polynomial::from_roots(c(1.0, 0.0), &[c(0.3, 0.0), c(0.3 + 1e-4, 0.0), c(2.0, 1.0)]);
        let r = poly_roots(&p, 1e-9).unwrap();
        assert_eq!(r.len(), 3);
    }

    #[test]
    fn large_roots_do_not_overflow() {
        let roots: Vec<Complex64> = (0..12)
            .map(|k| Complex64::from_polar(1e3, k as f64))
            .collect();
        let p = Polynomial::from_roots(c(1.0, 0.0), &roots);
        let r = poly_roots(&p, 1e-9).unwrap();
        assert_eq!(r.len(), 12);
    }
}
