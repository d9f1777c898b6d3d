//! End-to-end analysis of one map: cycles, tails, marks, counts and
//! Ext dimensions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::annotations::AnnotationSet;
use crate::count::{evaluate_counts, CountReport, UnresolvedPolicy};
use crate::cycles::{find_and_classify, Cycle, CycleClass, CycleOptions, PERIODIC_MATCH_TOL};
use crate::error::Result;
use crate::extjet::{global_e1, jet_e1, E1Dims, JetKind, JetReport, JetSite, JetSpec};
use crate::orbits::{
    classify_tails, delta_marks, epsilon_marks, RamSplit, Tail, TailClass, Target,
};
use crate::ratmap::{critical_divisor, RamificationDivisor, RationalMap, SpherePoint};

/// Default critical-orbit budget.
pub const DEFAULT_BUDGET: usize = 100_000;
/// Default jet truncation.
pub const DEFAULT_JET_ORDER: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub cycles: CycleOptions,
    pub budget: usize,
    pub jet_order: usize,
    pub unresolved: UnresolvedPolicy,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            cycles: CycleOptions::default(),
            budget: DEFAULT_BUDGET,
            jet_order: DEFAULT_JET_ORDER,
            unresolved: UnresolvedPolicy::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleExt {
    pub cycle: usize,
    pub kind: JetKind,
    pub truncation: usize,
    #[serde(flatten)]
    pub report: JetReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtReport {
    pub global: E1Dims,
    pub per_cycle: Vec<CycleExt>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub map: RationalMap,
    pub degree: usize,
    pub ramification: RamificationDivisor,
    pub cycles: Vec<Cycle>,
    pub tails: Vec<Tail>,
    pub split: RamSplit,
    pub epsilons: BTreeMap<String, u8>,
    pub deltas: BTreeMap<String, u8>,
    /// Absent for Möbius maps, where the counting theorems do not apply.
    pub counts: Option<CountReport>,
    pub ext: ExtReport,
    pub audits: Audits,
}

/// Critical orbits received by one attracting or parabolic cycle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasinCheck {
    pub cycle: usize,
    pub class: String,
    /// 1 for attracting cycles, `e` for parabolic ones.
    pub required: usize,
    /// Critical points with multiplicity whose orbits converge to or land
    /// on the cycle.
    pub received: usize,
    pub ok: bool,
}

/// For a parabolic cycle whose tame ramification is exactly `e`, the
/// cycle must be parabolic repelling (`Re ν > 0`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParabolicCheck {
    pub cycle: usize,
    pub e: usize,
    pub e_loc: usize,
    pub nu: [f64; 2],
    pub nu_index: [f64; 2],
    pub tame: usize,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Audits {
    /// Every critical orbit lands exactly on a cycle within the budget.
    pub postcritically_finite: bool,
    pub basin: Vec<BasinCheck>,
    pub parabolic: Vec<ParabolicCheck>,
    pub basin_ok: bool,
    pub parabolic_ok: bool,
}

/// Does the orbit of `z`, followed for `steps` iterates, meet the cycle?
fn lands_on(f: &RationalMap, z: SpherePoint, steps: usize, cycle: &Cycle) -> Result<bool> {
    let mut w = z;
    for _ in 0..=steps {
        if cycle
            .points
            .iter()
            .any(|q| q.approx_eq(&w, PERIODIC_MATCH_TOL))
        {
            return Ok(true);
        }
        w = f.evaluate_snapped(w)?;
    }
    Ok(false)
}

pub fn audits(
    f: &RationalMap,
    cycles: &[Cycle],
    tails: &[Tail],
    split: &RamSplit,
) -> Result<Audits> {
    let postcritically_finite = tails
        .iter()
        .all(|t| matches!(t.classification, TailClass::Bounded { .. }));
    let mut basin = Vec::new();
    let mut parabolic = Vec::new();
    for c in cycles {
        let Some(class) = c.class else { continue };
        let target = Target::Cycle(c.id);
        let required = match (&c.parabolic, class.is_attracting()) {
            (Some(inv), _) => inv.e,
            (None, true) => 1,
            _ => continue,
        };
        let mut received = split.tame_degree(&target);
        for t in tails {
            if let TailClass::Bounded { landing_step } = t.classification {
                for m in &t.members {
                    if lands_on(f, m.point, landing_step + c.period, c)? {
                        received += m.multiplicity;
                    }
                }
            }
        }
        // Möbius maps have no critical points; the capture statement is
        // about degree two and up.
        if f.degree() >= 2 {
            basin.push(BasinCheck {
                cycle: c.id,
                class: class.symbol().to_string(),
                required,
                received,
                ok: received >= required,
            });
        }
        if let Some(inv) = &c.parabolic {
            let tame = split.tame_degree(&target);
            parabolic.push(ParabolicCheck {
                cycle: c.id,
                e: inv.e,
                e_loc: inv.e_loc,
                nu: [inv.nu.re, inv.nu.im],
                nu_index: [inv.nu_index.re, inv.nu_index.im],
                tame,
                ok: tame != inv.e || inv.nu.re > 0.0,
            });
        }
    }
    Ok(Audits {
        postcritically_finite,
        basin_ok: basin.iter().all(|b| b.ok),
        parabolic_ok: parabolic.iter().all(|p| p.ok),
        basin,
        parabolic,
    })
}

/// Jets at the non-repelling cycles: full jets except at Cremer cycles,
/// where only 2-jets are meaningful.
pub fn ext_report(f: &RationalMap, cycles: &[Cycle], jet_order: usize) -> Result<ExtReport> {
    let (_, global) = global_e1(f)?;
    let mut per_cycle = Vec::new();
    for c in cycles {
        let kind = match c.class {
            Some(k) if k.is_attracting() || k.is_parabolic() => JetKind::FullJets,
            Some(CycleClass::Cremer) => JetKind::TwoJets,
            _ => continue,
        };
        let truncation = match &c.parabolic {
            Some(inv) => jet_order.max(2 * inv.e_loc + 1),
            None => jet_order,
        };
        let spec = JetSpec {
            site: JetSite::Cycle(c.id),
            truncation,
            kind,
        };
        per_cycle.push(CycleExt {
            cycle: c.id,
            kind,
            truncation,
            report: jet_e1(f, cycles, &spec)?,
        });
    }
    Ok(ExtReport { global, per_cycle })
}

pub fn analyze(
    f: &RationalMap,
    annotations: &AnnotationSet,
    config: &AnalysisConfig,
) -> Result<Analysis> {
    let cycles = find_and_classify(f, annotations, &config.cycles)?;
    let (tails, split) = classify_tails(f, &cycles, annotations, config.budget)?;
    let epsilons = epsilon_marks(&split, &cycles, annotations);
    let deltas = delta_marks(&cycles, &split);
    let counts = if f.degree() >= 2 {
        Some(evaluate_counts(
            f,
            &cycles,
            &tails,
            &split,
            &epsilons,
            &deltas,
            annotations,
            config.unresolved,
        )?)
    } else {
        None
    };
    let ext = ext_report(f, &cycles, config.jet_order)?;
    let audits = audits(f, &cycles, &tails, &split)?;
    Ok(Analysis {
        map: f.clone(),
        degree: f.degree(),
        ramification: critical_divisor(f)?,
        cycles,
        tails,
        split,
        epsilons,
        deltas,
        counts,
        ext,
        audits,
    })
}
