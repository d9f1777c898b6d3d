//! The two audited counting inequalities.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::annotations::AnnotationSet;
use crate::cycles::{Cycle, CycleClass};
use crate::error::{DynError, Result};
use crate::orbits::{Confidence, RamSplit, Tail, TailClass};
use crate::ratmap::{RationalMap, SpherePoint, SNAP_TOL};

/// How cycles with an undecided irrational rotation enter the counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum UnresolvedPolicy {
    /// Count them as Cremer cycles, which stresses both inequalities.
    #[default]
    CountAsCremer,
    Exclude,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountReport {
    #[serde(rename = "n_SD")]
    pub n_sd: usize,
    #[serde(rename = "n_CR")]
    pub n_cr: usize,
    #[serde(rename = "n_HR")]
    pub n_hr: usize,
    pub n_parabolic: usize,
    /// Attracting, not superattracting.
    pub n_attracting: usize,
    pub n_super: usize,
    pub n_unresolved: usize,
    /// Parabolic cycles with `Re ν <= 0`.
    pub n_parabolic_attracting: usize,
    pub e_by_parabolic: BTreeMap<String, usize>,
    pub deltas: BTreeMap<String, u8>,
    pub delta: usize,
    pub epsilons: BTreeMap<String, u8>,
    pub wild_tails: usize,
    /// Distinct critical points in wild tails, without multiplicity.
    pub wild_ram_points: usize,
    pub lhs_v79: i64,
    pub rhs_v79: i64,
    #[serde(rename = "lhs_I41")]
    pub lhs_i41: i64,
    #[serde(rename = "rhs_I41")]
    pub rhs_i41: i64,
    pub satisfied_v79: bool,
    #[serde(rename = "satisfied_I41")]
    pub satisfied_i41: bool,
    pub caveats: Vec<String>,
}

#[allow(clippy::too_many_arguments)]
pub fn evaluate_counts(
    f: &RationalMap,
    cycles: &[Cycle],
    tails: &[Tail],
    _split: &RamSplit,
    epsilons: &BTreeMap<String, u8>,
    deltas: &BTreeMap<String, u8>,
    annotations: &AnnotationSet,
    policy: UnresolvedPolicy,
) -> Result<CountReport> {
    if f.degree() < 2 {
        return Err(DynError::Domain(format!(
            "counting needs degree at least 2, got {}",
            f.degree()
        )));
    }
    let count = |k: CycleClass| cycles.iter().filter(|c| c.class == Some(k)).count();
    let n_sd = count(CycleClass::SiegelDisc);
    let n_unresolved = count(CycleClass::IndifferentUnresolved);
    let mut n_cr = count(CycleClass::Cremer);
    let mut caveats = Vec::new();
    if n_unresolved > 0 {
        match policy {
            UnresolvedPolicy::CountAsCremer => {
                n_cr += n_unresolved;
                caveats.push(format!(
                    "{n_unresolved} unresolved indifferent cycle(s) counted as Cremer"
                ));
            }
            UnresolvedPolicy::Exclude => caveats.push(format!(
                "{n_unresolved} unresolved indifferent cycle(s) excluded from the counts"
            )),
        }
    }
    let n_hr = annotations.herman_rings().count();
    let parabolic: Vec<&Cycle> = cycles.iter().filter(|c| c.parabolic.is_some()).collect();
    let e_by_parabolic = parabolic
        .iter()
        .map(|c| {
            (
                format!("cycle:{}", c.id),
                c.parabolic.as_ref().map_or(0, |p| p.e),
            )
        })
        .collect();
    let n_parabolic_attracting = parabolic
        .iter()
        .filter(|c| c.parabolic.as_ref().is_some_and(|p| p.nu.re <= 0.0))
        .count();

    let mut wild_tails = 0;
    let mut wild_points = Vec::new();
    for t in tails {
        if let TailClass::Wild(stats) = &t.classification {
            wild_tails += 1;
            if stats.confidence == Confidence::Low {
                caveats.push(format!("wild tail {} is a low-confidence call", t.id));
            }
            for m in &t.members {
                if !wild_points
                    .iter()
                    .any(|p: &SpherePoint| p.approx_eq(&m.point, SNAP_TOL))
                {
                    wild_points.push(m.point);
                }
            }
        }
    }
    let wild_ram_points = wild_points.len();
    let delta: usize = deltas.values().map(|&d| d as usize).sum();
    let eps_sum: i64 = epsilons.values().map(|&e| e as i64).sum();
    let eps_hr: i64 = epsilons
        .iter()
        .filter(|(k, _)| k.starts_with("HR:"))
        .map(|(_, &e)| e as i64)
        .sum();
    if annotations.is_lattes() {
        caveats.push(
            "Lattès map: the vanishing for m = 1 has its one-dimensional exception here".into(),
        );
    }

    let lhs_v79 = 2 * n_hr as i64 + n_sd as i64 + n_cr as i64 + delta as i64;
    let rhs_v79 = eps_sum + wild_tails as i64;
    let lhs_i41 = n_sd as i64 + n_cr as i64 + 2 * n_hr as i64;
    let rhs_i41 = (wild_ram_points as i64).min(eps_hr + wild_tails as i64);
    Ok(CountReport {
        n_sd,
        n_cr,
        n_hr,
        n_parabolic: parabolic.len(),
        n_attracting: count(CycleClass::Attracting),
        n_super: count(CycleClass::SuperAttracting),
        n_unresolved,
        n_parabolic_attracting,
        e_by_parabolic,
        deltas: deltas.clone(),
        delta,
        epsilons: epsilons.clone(),
        wild_tails,
        wild_ram_points,
        lhs_v79,
        rhs_v79,
        lhs_i41,
        rhs_i41,
        satisfied_v79: lhs_v79 <= rhs_v79,
        satisfied_i41: lhs_i41 <= rhs_i41,
        caveats,
    })
}

impl CountReport {
    /// Plain-text table of the terms.
    pub fn table(&self) -> String {
        let mut s = String::new();
        let rows: [(&str, String); 12] = [
            ("#SD", self.n_sd.to_string()),
            ("#CR", self.n_cr.to_string()),
            ("#HR", self.n_hr.to_string()),
            ("#parabolic", self.n_parabolic.to_string()),
            ("#attracting", self.n_attracting.to_string()),
            ("#superattracting", self.n_super.to_string()),
            ("delta", self.delta.to_string()),
            (
                "sum eps",
                self.epsilons
                    .values()
                    .map(|&e| e as usize)
                    .sum::<usize>()
                    .to_string(),
            ),
            ("wild tails", self.wild_tails.to_string()),
            ("wild ram points", self.wild_ram_points.to_string()),
            (
                "v79",
                format!(
                    "{} <= {}  {}",
                    self.lhs_v79,
                    self.rhs_v79,
                    ok(self.satisfied_v79)
                ),
            ),
            (
                "I41",
                format!(
                    "{} <= {}  {}",
                    self.lhs_i41,
                    self.rhs_i41,
                    ok(self.satisfied_i41)
                ),
            ),
        ];
        for (k, v) in rows {
            s.push_str(&format!("{k:<18}{v}\n"));
        }
        for c in &self.caveats {
            s.push_str(&format!("caveat: {c}\n"));
        }
        s
    }
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "VIOLATED"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cycles::{find_and_classify, CycleOptions};
    use crate::orbits::{classify_tails, delta_marks, epsilon_marks};
    use crate::ratmap::parse_map;
    use std::collections::HashMap;

    fn report(
        s: &str,
        annotations: &AnnotationSet,
        policy: UnresolvedPolicy,
    ) -> Result<CountReport> {
        let f = parse_map(s, &HashMap::new())?;
        let opts = CycleOptions {
            max_period: 2,
            ..CycleOptions::default()
        };
        let cycles = find_and_classify(&f, annotations, &opts)?;
        let (tails, split) = classify_tails(&f, &cycles, annotations, 20_000)?;
        let eps = epsilon_marks(&split, &cycles, annotations);
        let delta = delta_marks(&cycles, &split);
        evaluate_counts(
            &f,
            &cycles,
            &tails,
            &split,
            &eps,
            &delta,
            annotations,
            policy,
        )
    }

    #[test]
    fn parabolic_quadratic_reads_zero_le_zero() {
        let r = report(
            "z + z^2",
            &AnnotationSet::default(),
            UnresolvedPolicy::default(),
        )
        .unwrap();
        assert_eq!(
            (r.n_sd, r.n_cr, r.n_hr, r.n_parabolic, r.delta),
            (0, 0, 0, 1, 0)
        );
        assert_eq!((r.lhs_v79, r.rhs_v79), (0, 0));
        assert!(r.satisfied_v79 && r.satisfied_i41);
    }

    #[test]
    fn degree_one_is_a_domain_error() {
        let err = report(
            "z/(z+1)",
            &AnnotationSet::default(),
            UnresolvedPolicy::default(),
        );
        assert!(matches!(err, Err(DynError::Domain(_))));
    }

    #[test]
    fn unresolved_cycles_follow_the_policy() {
        // An irrational-looking rotation with no annotation stays unresolved.
        let l = num_complex::Complex64::from_polar(1.0, 2.0);
        let c = l / 2.0 - l * l / 4.0;
        let s = format!("z^2 + ({} + {}i)", c.re, c.im);
        let none = AnnotationSet::default();
        let counted = report(&s, &none, UnresolvedPolicy::CountAsCremer).unwrap();
        assert_eq!((counted.n_unresolved, counted.n_cr), (1, 1));
        assert!(counted
            .caveats
            .iter()
            .any(|c| c.contains("counted as Cremer")));
        let excluded = report(&s, &none, UnresolvedPolicy::Exclude).unwrap();
        assert_eq!(excluded.n_cr, 0);
        assert_eq!(excluded.lhs_i41, counted.lhs_i41 - 1);
    }

    #[test]
    fn rhs_is_a_minimum() {
        let r = report(
            "z^2 - 1",
            &AnnotationSet::default(),
            UnresolvedPolicy::default(),
        )
        .unwrap();
        let eps_hr: i64 = r
            .epsilons
            .iter()
            .filter(|(k, _)| k.starts_with("HR:"))
            .map(|(_, &e)| e as i64)
            .sum();
        assert!(r.rhs_i41 <= r.wild_ram_points as i64);
        assert!(r.rhs_i41 <= eps_hr + r.wild_tails as i64);
        assert!(r.delta <= r.n_parabolic);
    }
}
