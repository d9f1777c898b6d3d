//! Dynamical residue of densities `|W|^{2/m}` at fixed points and cycles.
//!
//! The measure is normalized as `dA / π`, so that `|z|^{-2}` has residue
//! `log |λ|^2` at a linear fixed point. Residues are those of the first
//! return germ `f^{pr}` at the base point, where `r` is the rotation order of
//! the multiplier (1 off the parabolic locus).

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cycles::cycle_multiplier;
use crate::error::{DynError, Result};
use crate::numeric::{gauss_legendre, Polynomial, TruncatedSeries};
use crate::parabolic::{
    inverse_normal_series, rotation_order, tangency_and_residu, LocalGerm, ParabolicInvariants,
    DEFAULT_ORDER, UNITY_HORIZON, UNITY_TOL,
};
use crate::ratmap::{RationalMap, SpherePoint};

/// Density `|W(z)|^{2/m}` of the `m`-form `W(z) dz^m`, with `W = num/den`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormDensity {
    pub m: usize,
    pub num: Polynomial,
    pub den: Polynomial,
}

impl FormDensity {
    pub fn new(m: usize, num: Polynomial, den: Polynomial) -> Result<Self> {
        if m == 0 {
            return Err(DynError::Domain("form degree m must be positive".into()));
        }
        if den.is_zero() {
            return Err(DynError::Domain("zero denominator".into()));
        }
        Ok(Self { m, num, den })
    }

    /// `|z - z0|^{-2}`.
    pub fn log_pole(z0: Complex64) -> Self {
        let den = Polynomial::new(vec![-z0, Complex64::new(1.0, 0.0)]);
        Self {
            m: 1,
            num: Polynomial::one(),
            den,
        }
    }

    /// Density in `z`, as a multiple of `dA`.
    pub fn density(&self, z: Complex64) -> f64 {
        let w = self.num.eval(z) / self.den.eval(z);
        w.norm().powf(2.0 / self.m as f64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegionKind {
    /// ε-discs about the point in the base chart.
    Disc,
    /// Boxes `max(|Re t|, |Im t|) > R` in the model coordinate at a parabolic
    /// point; model discs `|h| < |λ|^{±R}` at a hyperbolic point.
    FatouBox,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Region {
    Disc { eps: f64 },
    FatouBox { r: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionFamily {
    pub kind: RegionKind,
    /// ε values (decreasing) or R values (increasing).
    pub params: Vec<f64>,
}

impl RegionFamily {
    pub fn discs(params: Vec<f64>) -> Self {
        Self {
            kind: RegionKind::Disc,
            params,
        }
    }

    pub fn fatou_boxes(params: Vec<f64>) -> Self {
        Self {
            kind: RegionKind::FatouBox,
            params,
        }
    }

    fn region(&self, p: f64) -> Region {
        match self.kind {
            RegionKind::Disc => Region::Disc { eps: p },
            RegionKind::FatouBox => Region::FatouBox { r: p },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig {
    /// Density evaluations per region.
    pub budget: usize,
    /// Relative agreement between successive refinements.
    pub tol: f64,
    pub seed: u64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            budget: 1_000_000,
            tol: 1e-10,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionValue {
    pub value: f64,
    pub evaluations: usize,
    /// False when the adaptive rule missed its tolerance and the
    /// quasi-Monte-Carlo fallback was used.
    pub reliable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidueEstimate {
    pub value: f64,
    pub error_bar: f64,
    pub parameter_trace: Vec<(f64, f64)>,
    pub reliable: bool,
    /// Successive trace increments fail to shrink.
    pub diverging: bool,
}

/// The fixed point or cycle at which residues are taken.
#[derive(Clone, Debug)]
pub struct ResidueSite {
    pub germ: LocalGerm,
    pub multiplier: Complex64,
    pub parabolic: Option<ParabolicInvariants>,
    inverse_normal: Option<TruncatedSeries>,
}

impl ResidueSite {
    /// Site at the cycle of period `p` through `z0`.
    pub fn new(f: &RationalMap, z0: SpherePoint, p: usize) -> Result<Self> {
        if p == 0 {
            return Err(DynError::Domain("period must be positive".into()));
        }
        let orbit = f.orbit(z0, p)?;
        if !orbit[p].approx_eq(&z0, 1e-7) {
            return Err(DynError::Domain(format!(
                "{z0} is not periodic of period {p}"
            )));
        }
        let cycle = &orbit[..p];
        let multiplier = cycle_multiplier(f, cycle)?;
        let r = rotation_order(multiplier, UNITY_HORIZON, UNITY_TOL);
        let (parabolic, inverse_normal) = match r {
            Some(r) => {
                let inv = tangency_and_residu(f, z0, p, r, DEFAULT_ORDER)?;
                let zinv = inverse_normal_series(&inv)?;
                (Some(inv), Some(zinv))
            }
            None => (None, None),
        };
        Ok(Self {
            germ: LocalGerm::new(f, cycle, r.unwrap_or(1)),
            multiplier: multiplier.powu(r.unwrap_or(1) as u32),
            parabolic,
            inverse_normal,
        })
    }

    /// Density in the local coordinate `h` of the base chart, times `dA_h`.
    fn density_local(&self, mu: &FormDensity, h: Complex64) -> f64 {
        let (inf, u0) = self.germ.base_chart();
        if inf {
            let w = u0 + h;
            let z = w.inv();
            // dz/dw = -1/w^2
            mu.density(z) * w.norm().powi(-4)
        } else {
            mu.density(u0 + h)
        }
    }
}

/// Adaptive rule: `eval(level)` returns the level's value and cost; levels
/// double the resolution until two agree.
fn adaptive(
    mut eval: impl FnMut(usize) -> Result<f64>,
    cost: impl Fn(usize) -> usize,
    quad: &QuadConfig,
) -> Result<Option<(f64, usize)>> {
    let mut spent = cost(0);
    let mut prev = eval(0)?;
    let mut level = 1;
    while spent + cost(level) <= quad.budget {
        let cur = eval(level)?;
        spent += cost(level);
        if (cur - prev).abs() <= quad.tol * cur.abs().max(1.0) {
            return Ok(Some((cur, spent)));
        }
        prev = cur;
        level += 1;
    }
    Ok(None)
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut x = 0.0;
    while i > 0 {
        x += (i % base) as f64 * inv;
        i /= base;
        inv /= base as f64;
    }
    x
}

/// Randomly shifted Halton estimate of `∫_{[0,1]^2} g`, as (mean, standard
/// error over shifts).
fn qmc_unit_square(g: &dyn Fn(f64, f64) -> Result<f64>, n: usize, seed: u64) -> Result<(f64, f64)> {
    const SHIFTS: usize = 8;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let per = (n / SHIFTS).max(16);
    let mut means = Vec::with_capacity(SHIFTS);
    for _ in 0..SHIFTS {
        let (s0, s1): (f64, f64) = (rng.random(), rng.random());
        let mut acc = 0.0;
        for i in 1..=per as u64 {
            let u = (radical_inverse(i, 2) + s0).fract();
            let v = (radical_inverse(i, 3) + s1).fract();
            acc += g(u, v)?;
        }
        means.push(acc / per as f64);
    }
    let mean = means.iter().sum::<f64>() / SHIFTS as f64;
    let var = means.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (SHIFTS - 1) as f64;
    Ok((mean, (var / SHIFTS as f64).sqrt()))
}

const QMC_RELIABLE: f64 = 1e-6;

fn finish(
    adaptive_result: Option<(f64, usize)>,
    g: &dyn Fn(f64, f64) -> Result<f64>,
    quad: &QuadConfig,
) -> Result<RegionValue> {
    match adaptive_result {
        Some((value, evaluations)) => Ok(RegionValue {
            value,
            evaluations,
            reliable: true,
        }),
        None => {
            let (value, se) = qmc_unit_square(g, quad.budget, quad.seed)?;
            Ok(RegionValue {
                value,
                evaluations: quad.budget,
                reliable: se <= QMC_RELIABLE * value.abs().max(1.0),
            })
        }
    }
}

/// Signed residue over the star-shaped region between the circle `|h| = ε`
/// and its image `ρ(θ)`, in polar form. `image(φ)` returns the image point
/// of `ε e^{iφ}` and its φ-derivative.
fn polar_between(
    site: &ResidueSite,
    mu: &FormDensity,
    eps: f64,
    image: &dyn Fn(f64) -> Result<(Complex64, Complex64)>,
    quad: &QuadConfig,
) -> Result<RegionValue> {
    // Integrand on the unit square: u ↦ φ = 2π u, v ↦ r = ε (ρ/ε)^v.
    let g = |u: f64, v: f64| -> Result<f64> {
        let phi = 2.0 * PI * u;
        let (q, dq) = image(phi)?;
        let dtheta = (dq / q).im;
        if !(dtheta > 0.0) {
            return Err(DynError::Domain(
                "image of the region is not star-shaped about the point".into(),
            ));
        }
        let l = (q.norm() / eps).ln();
        let r = eps * (l * v).exp();
        let h = Complex64::from_polar(r, q.arg());
        // dA = r dr dθ, dr = r l dv, dθ = θ' 2π du, measure dA/π
        Ok(site.density_local(mu, h) * r * r * l * dtheta * 2.0)
    };
    let eval = |level: usize| -> Result<f64> {
        let na = 64 << level;
        let nr = 8 << level.min(3);
        let (x, w) = gauss_legendre(nr);
        let mut acc = 0.0;
        for j in 0..na {
            let u = j as f64 / na as f64;
            for (xi, wi) in x.iter().zip(&w) {
                acc += wi * 0.5 * g(u, 0.5 * (xi + 1.0))?;
            }
        }
        Ok(acc / na as f64)
    };
    let cost = |level: usize| (64usize << level) * (8usize << level.min(3));
    let res = adaptive(eval, cost, quad)?;
    finish(res, &g, quad)
}

/// Residue over one region of the family.
pub fn residue_for_region(
    site: &ResidueSite,
    mu: &FormDensity,
    region: Region,
    quad: &QuadConfig,
) -> Result<RegionValue> {
    match region {
        Region::Disc { eps } => {
            if !(eps > 0.0) {
                return Err(DynError::Domain("disc radius must be positive".into()));
            }
            let image = |phi: f64| -> Result<(Complex64, Complex64)> {
                let h = Complex64::from_polar(eps, phi);
                let (gh, dg) = site.germ.step(h)?;
                Ok((gh, dg * h * Complex64::i()))
            };
            polar_between(site, mu, eps, &image, quad)
        }
        Region::FatouBox { r } => match &site.parabolic {
            Some(inv) => fatou_box(site, inv, mu, r, quad),
            None => {
                let l = site.multiplier.norm();
                if l == 0.0 || (l - 1.0).abs() <= UNITY_TOL {
                    return Err(DynError::Domain(format!(
                        "no model boxes at a point with multiplier {}",
                        site.multiplier
                    )));
                }
                let eps = if l < 1.0 { l.powf(r) } else { l.powf(-r) };
                let lam = site.multiplier;
                let image = move |phi: f64| -> Result<(Complex64, Complex64)> {
                    let q = lam * Complex64::from_polar(eps, phi);
                    Ok((q, q * Complex64::i()))
                };
                polar_between(site, mu, eps, &image, quad)
            }
        },
    }
}

/// Model boxes at a parabolic point: `V = {max(|Re t|, |Im t|) > R}` with
/// `t = -1/(m x^m)` and the model image `f(V) = V + 1`. The symmetric
/// difference is the pair of strips `Re t ∈ [-R, 1-R]`, `Re t ∈ [R, R+1]`
/// with `|Im t| <= R`, on each of the `m` sheets.
fn fatou_box(
    site: &ResidueSite,
    inv: &ParabolicInvariants,
    mu: &FormDensity,
    big_r: f64,
    quad: &QuadConfig,
) -> Result<RegionValue> {
    if !(big_r > 1.0) {
        return Err(DynError::Domain("box size R must exceed 1".into()));
    }
    let m = inv.e_loc;
    let zinv = site
        .inverse_normal
        .as_ref()
        .ok_or_else(|| DynError::Internal("missing inverse normal series".into()))?;
    let dzinv = zinv.derivative();
    let roots: Vec<Complex64> = (0..m)
        .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / m as f64))
        .collect();
    let mf = m as f64;
    // Density in t summed over sheets.
    let dens_t = |t: Complex64| -> f64 {
        let x0 = (-(t * mf)).inv().powf(1.0 / mf);
        roots
            .iter()
            .map(|&zeta| {
                let x = x0 * zeta;
                let h = zinv.eval(x);
                let dhdx = dzinv.eval(x);
                let dxdt = x.powu(m as u32 + 1);
                site.density_local(mu, h) * (dhdx * dxdt).norm_sqr()
            })
            .sum()
    };
    let g = |u: f64, v: f64| -> Result<f64> {
        let y = big_r * (2.0 * v - 1.0);
        let left = Complex64::new(-big_r + u, y);
        let right = Complex64::new(big_r + u, y);
        // area factor 2R, measure dA/π
        Ok((dens_t(left) - dens_t(right)) * 2.0 * big_r / PI)
    };
    let eval = |level: usize| -> Result<f64> {
        let nu = 8 << level.min(2);
        let nv = 32 << level;
        let (xu, wu) = gauss_legendre(nu);
        let (xv, wv) = gauss_legendre(nv);
        let mut acc = 0.0;
        for (a, wa) in xu.iter().zip(&wu) {
            for (b, wb) in xv.iter().zip(&wv) {
                acc += wa * wb * 0.25 * g(0.5 * (a + 1.0), 0.5 * (b + 1.0))?;
            }
        }
        Ok(acc)
    };
    let cost = |level: usize| 2 * m * (8usize << level.min(2)) * (32usize << level);
    let res = adaptive(eval, cost, quad)?;
    finish(res, &g, quad)
}

/// Least-squares fit of `value = L + Σ_j c_j h^j`; returns `L`.
fn extrapolate(hs: &[f64], vals: &[f64], terms: usize) -> f64 {
    let n = hs.len();
    let k = terms + 1;
    let a = nalgebra::DMatrix::from_fn(n, k, |i, j| hs[i].powi(j as i32));
    let b = nalgebra::DVector::from_column_slice(vals);
    match a.svd(true, true).solve(&b, 1e-14) {
        Ok(x) => x[0],
        Err(_) => vals[n - 1],
    }
}

/// Residue limit along a region family, extrapolated in the family's
/// natural small parameter.
pub fn dynamical_residue(
    site: &ResidueSite,
    mu: &FormDensity,
    family: &RegionFamily,
    quad: &QuadConfig,
) -> Result<ResidueEstimate> {
    if family.params.is_empty() {
        return Err(DynError::Domain("empty parameter grid".into()));
    }
    let mut trace = Vec::with_capacity(family.params.len());
    let mut reliable = true;
    for &p in &family.params {
        let v = residue_for_region(site, mu, family.region(p), quad)?;
        reliable &= v.reliable;
        trace.push((p, v.value));
    }
    let m = site.parabolic.as_ref().map_or(1, |inv| inv.e_loc) as f64;
    let l = site.multiplier.norm();
    let hs: Vec<f64> = family
        .params
        .iter()
        .map(|&p| match (family.kind, &site.parabolic) {
            (RegionKind::Disc, _) => p.powf(1.0 / m),
            (RegionKind::FatouBox, Some(_)) => p.powf(-1.0 / m),
            (RegionKind::FatouBox, None) => {
                if l < 1.0 {
                    l.powf(p)
                } else {
                    l.powf(-p)
                }
            }
        })
        .collect();
    let vals: Vec<f64> = trace.iter().map(|t| t.1).collect();
    let n = vals.len();
    let (value, error_bar) = if n == 1 {
        (vals[0], f64::INFINITY)
    } else {
        let terms = (n - 1).min(2);
        let full = extrapolate(&hs, &vals, terms);
        let lower = if terms > 1 {
            extrapolate(&hs, &vals, terms - 1)
        } else {
            vals[n - 1]
        };
        let dropped = if n > terms + 1 {
            extrapolate(&hs[1..], &vals[1..], terms)
        } else {
            lower
        };
        let floor = quad.tol * full.abs().max(1.0);
        (
            full,
            (full - lower).abs().max((full - dropped).abs()).max(floor),
        )
    };
    let diverging = n >= 3 && {
        let first = (vals[1] - vals[0]).abs();
        let last = (vals[n - 1] - vals[n - 2]).abs();
        last > 1e-9 * value.abs().max(1.0) && last >= 0.9 * first
    };
    Ok(ResidueEstimate {
        value,
        error_bar,
        parameter_trace: trace,
        reliable,
        diverging,
    })
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
    fn linear_maps_give_log_multiplier() {
        let mu = FormDensity::log_pole(Complex64::new(0.0, 0.0));
        for (s, l) in [("2z", 2.0f64), ("0.5z", 0.5)] {
            let site = ResidueSite::new(&map(s), origin(), 1).unwrap();
            let v = residue_for_region(
                &site,
                &mu,
                Region::Disc { eps: 0.1 },
                &QuadConfig::default(),
            )
            .unwrap();
            assert!((v.value - (l * l).ln()).abs() < 1e-9, "{s}: {}", v.value);
            assert!(v.reliable);
        }
    }

    #[test]
    fn parabolic_box_residue_tracks_nu() {
        let f = map("z + z^2 + 0.3 z^3");
        let site = ResidueSite::new(&f, origin(), 1).unwrap();
        let nu = site.parabolic.as_ref().unwrap().nu;
        let mut num = Polynomial::new(vec![Complex64::new(1.0, 0.0), nu]);
        num = num.trim_relative(0.0);
        let mu =
            FormDensity::new(1, num, Polynomial::monomial(Complex64::new(1.0, 0.0), 2)).unwrap();
        let fam = RegionFamily::fatou_boxes(vec![16.0, 32.0, 64.0, 128.0]);
        let est = dynamical_residue(&site, &mu, &fam, &QuadConfig::default()).unwrap();
        assert!(est.reliable);
        assert!(!est.diverging);
        assert!((est.value - 2.0 * nu.re).abs() < 0.05 * nu.re, "{est:?}");
        let discs = RegionFamily::discs(vec![0.04, 0.02, 0.01]);
        let d = dynamical_residue(&site, &mu, &discs, &QuadConfig::default()).unwrap();
        assert!((d.value - est.value).abs() <= d.error_bar + est.error_bar);
    }

    #[test]
    fn hyperbolic_boxes_match_discs() {
        let mu = FormDensity::log_pole(Complex64::new(0.0, 0.0));
        let site = ResidueSite::new(&map("0.5z"), origin(), 1).unwrap();
        let q = QuadConfig::default();
        let b = dynamical_residue(
            &site,
            &mu,
            &RegionFamily::fatou_boxes(vec![2.0, 4.0, 8.0]),
            &q,
        )
        .unwrap();
        for (_, v) in &b.parameter_trace {
            assert!((v - 0.25f64.ln()).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_non_periodic_point() {
        assert!(ResidueSite::new(&map("z^2"), SpherePoint::finite(0.5, 0.0), 1).is_err());
    }
}
