//! Command implementations. Each returns its output instead of printing it
//! so the binary and the tests share one code path.

use std::collections::HashMap;

use dynledger::annotations::AnnotationSet;
use dynledger::count::{evaluate_counts, UnresolvedPolicy};
use dynledger::cycles::{find_and_classify, Cycle, CycleOptions};
use dynledger::orbits::{
    classify_tails, delta_marks, epsilon_marks, orbit_transcript, transcript_csv,
};
use dynledger::parabolic::{abel_residuals, LocalGerm};
use dynledger::pipeline::{ext_report, AnalysisConfig};
use dynledger::ratmap::{critical_divisor, parse_rational, RationalMap};
use dynledger::residue::{dynamical_residue, FormDensity, QuadConfig, RegionFamily, ResidueSite};
use dynledger::{DynError, Result};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::cli::{Command, Family, GlobalArgs, Unresolved};
use crate::corpus::{run_corpus, Corpus};
use crate::input::{load_annotations, parse_param, read_file, MapSpec};
use crate::raster::{render, RasterSpec};

/// What a command produced.
#[derive(Clone, Debug, PartialEq)]
pub enum Output {
    Json(Value),
    Text(String),
    Bytes(Vec<u8>),
}

/// A finished command: its output, any side files, and whether every
/// expectation held (only `corpus-run` can report false).
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub output: Output,
    pub side_files: Vec<(std::path::PathBuf, String)>,
    pub passed: bool,
}

impl Outcome {
    fn json(v: Value) -> Self {
        Self {
            output: Output::Json(v),
            side_files: Vec::new(),
            passed: true,
        }
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| DynError::Internal(format!("serializing output: {e}")))
}

fn c2(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn map_spec(g: &GlobalArgs) -> Result<MapSpec> {
    let mut spec = match (&g.map, &g.map_file) {
        (Some(expr), _) => MapSpec {
            expr: expr.clone(),
            params: Default::default(),
        },
        (None, Some(path)) => MapSpec::from_json(&read_file(&path.to_string_lossy())?)?,
        (None, None) => {
            return Err(DynError::Input(
                "no map given; use --map or --map-file".into(),
            ))
        }
    };
    for p in &g.params {
        let (k, v) = parse_param(p)?;
        spec.params.insert(k, v);
    }
    Ok(spec)
}

pub fn analysis_config(g: &GlobalArgs, unresolved: Unresolved) -> AnalysisConfig {
    AnalysisConfig {
        cycles: CycleOptions {
            max_period: g.max_period,
            tol: g.tol,
            ..CycleOptions::default()
        },
        budget: g.budget,
        jet_order: g.jet_order,
        unresolved: match unresolved {
            Unresolved::Count => UnresolvedPolicy::CountAsCremer,
            Unresolved::Exclude => UnresolvedPolicy::Exclude,
        },
    }
}

struct Loaded {
    spec: MapSpec,
    f: RationalMap,
    annotations: AnnotationSet,
    config: AnalysisConfig,
}

fn load(g: &GlobalArgs, unresolved: Unresolved) -> Result<Loaded> {
    let spec = map_spec(g)?;
    let f = spec.build()?;
    let annotations = load_annotations(g.annot.as_deref().and_then(|p| p.to_str()))?;
    annotations.validate()?;
    Ok(Loaded {
        spec,
        f,
        annotations,
        config: analysis_config(g, unresolved),
    })
}

fn cycles_of(l: &Loaded) -> Result<Vec<Cycle>> {
    find_and_classify(&l.f, &l.annotations, &l.config.cycles)
}

pub fn execute(global: &GlobalArgs, command: &Command) -> Result<Outcome> {
    match command {
        Command::Parse => {
            let l = load(global, Unresolved::Count)?;
            Ok(Outcome::json(json!({
                "expr": l.spec.expr,
                "degree": l.f.degree(),
                "polynomial": l.f.is_polynomial(),
                "map": to_json(&l.f)?,
                "ramification": to_json(&critical_divisor(&l.f)?)?,
            })))
        }
        Command::Cycles => {
            let l = load(global, Unresolved::Count)?;
            let cycles = cycles_of(&l)?;
            Ok(Outcome::json(json!({
                "degree": l.f.degree(),
                "max_period": l.config.cycles.max_period,
                "cycles": to_json(&cycles)?,
            })))
        }
        Command::Parabolic { abel_iters } => {
            let l = load(global, Unresolved::Count)?;
            let cycles = cycles_of(&l)?;
            let mut out = Vec::new();
            for c in &cycles {
                let Some(inv) = &c.parabolic else { continue };
                let germ = LocalGerm::new(&l.f, &inv.cycle, inv.r);
                let abel = abel_residuals(&germ, inv, *abel_iters);
                out.push(json!({
                    "cycle": c.id,
                    "period": c.period,
                    "points": to_json(&c.points)?,
                    "multiplier": c2(c.multiplier),
                    "r": inv.r,
                    "e": inv.e,
                    "e_loc": inv.e_loc,
                    "a": c2(inv.a),
                    "nu": c2(inv.nu),
                    "nu_index": c2(inv.nu_index),
                    "consistency_residual": inv.consistency_residual,
                    "attracting_angles": inv.attracting_angles,
                    "repelling_angles": inv.repelling_angles,
                    "abel": to_json(&abel)?,
                }));
            }
            Ok(Outcome::json(json!({ "parabolic": out })))
        }
        Command::Residue {
            form,
            form_order,
            family,
            grid,
            cycle,
            quad_budget,
            quad_tol,
            csv,
        } => {
            let l = load(global, Unresolved::Count)?;
            let cycles = cycles_of(&l)?;
            let c = cycles
                .iter()
                .find(|c| c.id == *cycle)
                .ok_or_else(|| DynError::Input(format!("no cycle with id {cycle}")))?;
            let z0 = c.points[0];
            let site = ResidueSite::new(&l.f, z0, c.period)?;
            let nu = site.parabolic.as_ref().map(|p| p.nu);
            let mu = if form.trim() == "log" {
                let z = z0.as_finite().ok_or_else(|| {
                    DynError::Domain("the log form needs a finite base point".into())
                })?;
                FormDensity::log_pole(z)
            } else {
                let mut params: HashMap<String, Complex64> = l.spec.param_values()?;
                params
                    .entry("nu".into())
                    .or_insert(nu.unwrap_or(Complex64::new(0.0, 0.0)));
                let (num, den) = parse_rational(form, &params)?;
                FormDensity::new(*form_order, num, den)?
            };
            let fam = match family {
                Family::Fatou => {
                    let params = if !grid.is_empty() {
                        grid.clone()
                    } else if site.parabolic.is_some() {
                        vec![16.0, 32.0, 64.0, 128.0]
                    } else {
                        vec![2.0, 4.0, 8.0]
                    };
                    RegionFamily::fatou_boxes(params)
                }
                Family::Disc => RegionFamily::discs(if grid.is_empty() {
                    vec![0.04, 0.02, 0.01]
                } else {
                    grid.clone()
                }),
            };
            let quad = QuadConfig {
                budget: *quad_budget,
                tol: *quad_tol,
                seed: global.seed,
            };
            let est = dynamical_residue(&site, &mu, &fam, &quad)?;
            let mut outcome = Outcome::json(json!({
                "cycle": c.id,
                "period": c.period,
                "point": to_json(&z0)?,
                "multiplier": c2(c.multiplier),
                "nu": nu.map(c2),
                "family": to_json(&fam)?,
                "seed": global.seed,
                "estimate": to_json(&est)?,
            }));
            if let Some(path) = csv {
                let mut s = String::from("param,value\n");
                for (p, v) in &est.parameter_trace {
                    s.push_str(&format!("{p:e},{v:e}\n"));
                }
                outcome.side_files.push((path.clone(), s));
            }
            Ok(outcome)
        }
        Command::Tails { transcript, steps } => {
            let l = load(global, Unresolved::Count)?;
            if let Some(i) = transcript {
                let ram = critical_divisor(&l.f)?;
                let entry = ram.entries.get(*i).ok_or_else(|| {
                    DynError::Input(format!(
                        "critical point index {i} out of range (divisor has {} points)",
                        ram.entries.len()
                    ))
                })?;
                let rows = orbit_transcript(&l.f, entry.point, *steps)?;
                return Ok(Outcome {
                    output: Output::Text(transcript_csv(&rows)),
                    side_files: Vec::new(),
                    passed: true,
                });
            }
            let cycles = cycles_of(&l)?;
            let (tails, split) = classify_tails(&l.f, &cycles, &l.annotations, l.config.budget)?;
            let epsilons = epsilon_marks(&split, &cycles, &l.annotations);
            let deltas = delta_marks(&cycles, &split);
            Ok(Outcome::json(json!({
                "ramification": to_json(&critical_divisor(&l.f)?)?,
                "tails": to_json(&tails)?,
                "split": to_json(&split)?,
                "epsilons": to_json(&epsilons)?,
                "deltas": to_json(&deltas)?,
            })))
        }
        Command::Ext => {
            let l = load(global, Unresolved::Count)?;
            let cycles = cycles_of(&l)?;
            Ok(Outcome::json(to_json(&ext_report(
                &l.f,
                &cycles,
                l.config.jet_order,
            )?)?))
        }
        Command::Count { table, unresolved } => {
            let l = load(global, *unresolved)?;
            let cycles = cycles_of(&l)?;
            let (tails, split) = classify_tails(&l.f, &cycles, &l.annotations, l.config.budget)?;
            let epsilons = epsilon_marks(&split, &cycles, &l.annotations);
            let deltas = delta_marks(&cycles, &split);
            let report = evaluate_counts(
                &l.f,
                &cycles,
                &tails,
                &split,
                &epsilons,
                &deltas,
                &l.annotations,
                l.config.unresolved,
            )?;
            Ok(if *table {
                Outcome {
                    output: Output::Text(report.table()),
                    side_files: Vec::new(),
                    passed: true,
                }
            } else {
                Outcome::json(to_json(&report)?)
            })
        }
        Command::CorpusRun { corpus, filter } => {
            let corpus = match corpus {
                Some(p) => Corpus::from_json(&read_file(&p.to_string_lossy())?)?,
                None => Corpus::builtin(),
            };
            let run = run_corpus(
                &corpus,
                &analysis_config(global, Unresolved::Count),
                filter.as_deref(),
            );
            Ok(Outcome {
                passed: run.passed,
                output: Output::Json(to_json(&run)?),
                side_files: Vec::new(),
            })
        }
        Command::Raster {
            width,
            height,
            center,
            radius,
            iters,
        } => {
            let l = load(global, Unresolved::Count)?;
            let cycles = cycles_of(&l)?;
            let spec = RasterSpec {
                width: *width,
                height: *height,
                center: Complex64::new(center[0], center[1]),
                radius: *radius,
                max_iter: *iters,
            };
            Ok(Outcome {
                output: Output::Bytes(render(&l.f, &cycles, &spec)?),
                side_files: Vec::new(),
                passed: true,
            })
        }
    }
}

/// Exit status for an error: 2 for bad input, 3 for numerical failure.
pub fn exit_code(e: &DynError) -> i32 {
    match e {
        DynError::Input(_)
        | DynError::Parse { .. }
        | DynError::UnboundParameter(_)
        | DynError::Domain(_) => 2,
        _ => 3,
    }
}

/// The machine-readable error document written to stderr.
pub fn error_json(kind: &str, message: &str) -> Value {
    json!({ "error": { "kind": kind, "message": message } })
}
