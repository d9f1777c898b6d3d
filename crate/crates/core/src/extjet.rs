//! The equalizer `v ↦ v∘f - f'·v` as a matrix: on global vector fields of
//! the sphere, and on jets at a cycle point for the first return map.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cycles::Cycle;
use crate::error::{DynError, Result};
use crate::numeric::{rank_nullity, DenseOperator, Polynomial, TruncatedSeries, RANK_TOL};
use crate::parabolic::LocalGerm;
use crate::ratmap::RationalMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct E1Dims {
    pub ker: usize,
    pub coker: usize,
}

/// The `(2d+1) × 3` matrix of `v ↦ v(P/Q) Q^2 - (P'Q - PQ') v` on
/// `v ∈ {1, z, z^2}`, with images in coefficients of degree `<= 2d`.
pub fn global_operator(f: &RationalMap) -> DenseOperator {
    let d = f.degree();
    let s = f.num().scale().max(f.den().scale());
    let p = f.num().scaled(Complex64::new(1.0 / s, 0.0));
    let q = f.den().scaled(Complex64::new(1.0 / s, 0.0));
    let wronskian = &(&p.derivative() * &q) - &(&p * &q.derivative());
    let columns: Vec<Vec<Complex64>> = (0..3)
        .map(|k| {
            let v = Polynomial::monomial(Complex64::new(1.0, 0.0), k);
            let image = &(&p.pow(k) * &q.pow(2 - k)) - &(&wronskian * &v);
            (0..=2 * d).map(|i| image.coeff(i)).collect()
        })
        .collect();
    DenseOperator::from_columns(2 * d + 1, &columns).with_labels("H0(T)", "H0(f*T)")
}

pub fn global_e1(f: &RationalMap) -> Result<(DenseOperator, E1Dims)> {
    let op = global_operator(f);
    let rep = rank_nullity(&op, RANK_TOL)?;
    Ok((
        op,
        E1Dims {
            ker: rep.kernel_dim,
            coker: rep.cokernel_dim,
        },
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum JetKind {
    FullJets,
    /// Jets modulo the square of the maximal ideal.
    TwoJets,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum JetSite {
    Global,
    Cycle(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JetSpec {
    pub site: JetSite,
    pub truncation: usize,
    pub kind: JetKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JetReport {
    pub kernel_dim: usize,
    pub cokernel_dim: usize,
    /// Dimensions agree at truncations `N - 1` and `N`.
    pub stabilized: bool,
}

/// Conjugate `g` by `h ↦ ρ h` so its coefficients are of unit size, then
/// stretch by a further factor. Ranks are unchanged; the stretch offsets the
/// binomial growth of `g^j` in high jet orders.
fn balanced(g: &TruncatedSeries, stretch: f64) -> TruncatedSeries {
    let mut rho: f64 = 1.0;
    for k in 2..=g.order() {
        let c = g.coeff(k).norm();
        if c > 0.0 {
            rho = rho.max(c.powf(1.0 / (k - 1) as f64));
        }
    }
    rho *= stretch;
    // g̃(h) = g(h/ρ) ρ
    let coeffs = (0..=g.order())
        .map(|k| g.coeff(k) * rho.powi(1 - k as i32))
        .collect();
    TruncatedSeries::new(coeffs, g.order())
}

/// Square matrix of `v ↦ v(g) - g'·v` on jets of degree `<= n`.
pub fn jet_operator(g: &TruncatedSeries, n: usize) -> Result<DenseOperator> {
    if g.order() < n {
        return Err(DynError::Domain(format!(
            "germ series of order {} cannot give {n}-jets",
            g.order()
        )));
    }
    let g = g.truncate(n);
    let dg = g.derivative();
    let mut power = TruncatedSeries::constant(Complex64::new(1.0, 0.0), n);
    let mut columns = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let hj = TruncatedSeries::identity(n).powi(j);
        let image = &power - &(&dg * &hj);
        columns.push((0..=n).map(|i| image.coeff(i)).collect::<Vec<_>>());
        power = &power * &g;
    }
    Ok(DenseOperator::from_columns(n + 1, &columns).with_labels("J^N(T)", "J^N(g*T)"))
}

/// Scale columns to unit norm. Ranks do not change, and kernel vectors
/// only change by a diagonal factor, so projections keep their rank.
fn column_normalized(mut op: DenseOperator) -> DenseOperator {
    for j in 0..op.cols {
        let norm = (0..op.rows)
            .map(|i| op.get(i, j).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if norm > 0.0 {
            for i in 0..op.rows {
                let v = op.get(i, j) / norm;
                op.set(i, j, v);
            }
        }
    }
    op
}

/// Order to which kernel vectors of the `n`-jet problem are extended.
pub fn extension_order(n: usize) -> usize {
    n + (n / 2).max(8)
}

/// Cokernel of the `n`-jet operator, and the dimension of the image in
/// `n`-jets of the kernel at the extension order.
pub fn jet_dims(g: &TruncatedSeries, n: usize, kind: JetKind) -> Result<E1Dims> {
    let g = balanced(g, 1.0 + extension_order(n) as f64 / 2.0);
    match kind {
        JetKind::TwoJets => {
            let op = column_normalized(jet_operator(&g, 1)?);
            let rep = rank_nullity(&op, RANK_TOL)?;
            Ok(E1Dims {
                ker: rep.kernel_dim,
                coker: rep.cokernel_dim,
            })
        }
        JetKind::FullJets => {
            let rep = rank_nullity(&column_normalized(jet_operator(&g, n)?), RANK_TOL)?;
            let op = column_normalized(jet_operator(&g, extension_order(n))?);
            let kernel = op.nullspace(RANK_TOL)?;
            let projected: Vec<Vec<Complex64>> = kernel.iter().map(|v| v[..=n].to_vec()).collect();
            let ker = if projected.is_empty() {
                0
            } else {
                rank_nullity(&DenseOperator::from_columns(n + 1, &projected), 1e-6)?.rank
            };
            Ok(E1Dims {
                ker,
                coker: rep.cokernel_dim,
            })
        }
    }
}

/// Germ series of the first return `f^p` at the base point of a cycle.
pub fn first_return_series(
    f: &RationalMap,
    cycle: &Cycle,
    order: usize,
) -> Result<TruncatedSeries> {
    LocalGerm::new(f, &cycle.points, 1).series(order)
}

pub fn jet_e1(f: &RationalMap, cycles: &[Cycle], spec: &JetSpec) -> Result<JetReport> {
    match spec.site {
        JetSite::Global => {
            let (_, d) = global_e1(f)?;
            Ok(JetReport {
                kernel_dim: d.ker,
                cokernel_dim: d.coker,
                stabilized: true,
            })
        }
        JetSite::Cycle(id) => {
            let cycle = cycles
                .iter()
                .find(|c| c.id == id)
                .ok_or_else(|| DynError::Domain(format!("no cycle with id {id}")))?;
            let n = spec.truncation;
            if n < 2 && spec.kind == JetKind::FullJets {
                return Err(DynError::Domain("full jets need truncation N >= 2".into()));
            }
            let g = first_return_series(f, cycle, extension_order(n))?;
            let here = jet_dims(&g, n, spec.kind)?;
            let before = jet_dims(&g, n - 1, spec.kind)?;
            Ok(JetReport {
                kernel_dim: here.ker,
                cokernel_dim: here.coker,
                stabilized: here == before,
            })
        }
    }
}
