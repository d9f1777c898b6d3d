//! Critical orbits: tails, the tame/wild/bounded split of the ramification
//! divisor, and the ε and δ marks.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::annotations::{Annotation, AnnotationSet};
use crate::cycles::{Cycle, CycleClass};
use crate::error::{DynError, Result};
use crate::parabolic::LocalGerm;
use crate::ratmap::{
    critical_divisor, ChartPoint, RamificationDivisor, RationalMap, SpherePoint, SNAP_TOL,
};

/// Consecutive decreasing steps required by the geometric detector.
pub const GEOMETRIC_STEPS: usize = 20;
/// Final distance required by the geometric detector.
pub const GEOMETRIC_DIST: f64 = 1e-6;
/// Consecutive first returns required by the petal detector.
pub const PETAL_RETURNS: usize = 50;
/// Consecutive iterations inside an annotated region.
pub const DWELL: usize = 1000;
/// How far back a landing is searched for.
const LANDING_WINDOW: usize = 64;
/// A landing must arrive from at least this chordal distance.
const LANDING_JUMP: f64 = 1e-3;
/// Orbit prefix used for tail merging.
const MERGE_PREFIX: usize = 4096;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "id")]
pub enum Target {
    Cycle(usize),
    /// Siegel disc about the cycle with this id.
    Siegel(usize),
    /// Herman ring given by the annotation with this index.
    Herman(usize),
}

impl Target {
    pub fn key(&self) -> String {
        match self {
            Target::Cycle(i) => format!("cycle:{i}"),
            Target::Siegel(i) => format!("SD:{i}"),
            Target::Herman(i) => format!("HR:{i}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Confidence {
    High,
    Low,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WildStats {
    pub budget: usize,
    pub confidence: Confidence,
    pub last_point: SpherePoint,
    /// Least chordal distance to a non-repelling cycle over the second half
    /// of the run.
    pub min_distance_late: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum TailClass {
    Bounded { landing_step: usize },
    Tame { target: Target, detected_at: usize },
    Wild(WildStats),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailMember {
    pub point: SpherePoint,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tail {
    pub id: usize,
    pub members: Vec<TailMember>,
    pub classification: TailClass,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RamSplit {
    pub ram_b: RamificationDivisor,
    pub ram_t: RamificationDivisor,
    pub ram_w: RamificationDivisor,
    /// Tame ramification keyed by target (`cycle:i`, `SD:i`, `HR:i`).
    pub tame_by_target: BTreeMap<String, RamificationDivisor>,
    /// Tame ramification keyed by the class symbol of its target.
    pub tame_by_class: BTreeMap<String, RamificationDivisor>,
}

impl RamSplit {
    pub fn total(&self) -> RamificationDivisor {
        self.ram_b.plus(&self.ram_t, "Ram").plus(&self.ram_w, "Ram")
    }

    pub fn tame_degree(&self, target: &Target) -> usize {
        self.tame_by_target
            .get(&target.key())
            .map_or(0, |d| d.degree())
    }
}

/// Parabolic petal watch for one cycle.
struct PetalWatch {
    cycle: usize,
    germ: LocalGerm,
    angles: Vec<f64>,
    half_width: f64,
    radius: f64,
    steps: usize,
}

/// Annotated invariant region.
enum Region {
    Disc {
        target: Target,
        centers: Vec<SpherePoint>,
        radius: f64,
    },
    Ring {
        target: Target,
        center: SpherePoint,
        annulus: [f64; 2],
        period: usize,
    },
}

impl Region {
    fn contains(&self, z: SpherePoint) -> bool {
        match self {
            Region::Disc {
                centers, radius, ..
            } => match z {
                SpherePoint::Finite(v) => centers
                    .iter()
                    .filter_map(|c| c.as_finite())
                    .any(|c| (v - c).norm() <= *radius),
                SpherePoint::Infinity => false,
            },
            Region::Ring {
                center, annulus, ..
            } => match (z, center.as_finite()) {
                (SpherePoint::Finite(v), Some(c)) => {
                    let r = (v - c).norm();
                    annulus[0] <= r && r <= annulus[1]
                }
                _ => false,
            },
        }
    }

    fn period(&self) -> usize {
        match self {
            Region::Disc { .. } => 1,
            Region::Ring { period, .. } => *period,
        }
    }

    fn target(&self) -> Target {
        match self {
            Region::Disc { target, .. } | Region::Ring { target, .. } => target.clone(),
        }
    }
}

fn wrap_angle(x: f64) -> f64 {
    let mut y = x % (2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    if y < -PI {
        y += 2.0 * PI;
    }
    y
}

struct Watchers {
    geometric: Vec<(usize, Vec<SpherePoint>)>,
    petals: Vec<PetalWatch>,
    regions: Vec<Region>,
    non_repelling: Vec<SpherePoint>,
}

fn build_watchers(cycles: &[Cycle], f: &RationalMap, annotations: &AnnotationSet) -> Watchers {
    let mut geometric = Vec::new();
    let mut petals = Vec::new();
    let mut regions = Vec::new();
    let mut non_repelling = Vec::new();
    for c in cycles {
        match c.class {
            Some(k) if k.is_attracting() => {
                geometric.push((c.id, c.points.clone()));
                non_repelling.extend(c.points.iter().copied());
            }
            Some(k) if k.is_parabolic() => {
                non_repelling.extend(c.points.iter().copied());
                if let Some(inv) = &c.parabolic {
                    let m = inv.e_loc;
                    let scale = inv.a.norm().powf(1.0 / m as f64).max(1e-12);
                    petals.push(PetalWatch {
                        cycle: c.id,
                        germ: LocalGerm::new(f, &c.points, inv.r),
                        angles: inv.attracting_angles.clone(),
                        half_width: PI / (2.0 * m as f64),
                        radius: 0.1 / scale,
                        steps: c.period * inv.r,
                    });
                }
            }
            Some(CycleClass::SiegelDisc) => {
                non_repelling.extend(c.points.iter().copied());
                for a in &annotations.annotations {
                    if let Annotation::RotationNumberBrjuno {
                        cycle,
                        disc_radius: Some(r),
                    } = a
                    {
                        if cycle.matches(c.id, &c.points) {
                            regions.push(Region::Disc {
                                target: Target::Siegel(c.id),
                                centers: c.points.clone(),
                                radius: *r,
                            });
                        }
                    }
                }
            }
            Some(CycleClass::Cremer) | Some(CycleClass::IndifferentUnresolved) => {
                non_repelling.extend(c.points.iter().copied());
            }
            _ => {}
        }
    }
    for (i, period, annulus, center) in annotations.herman_rings() {
        regions.push(Region::Ring {
            target: Target::Herman(i),
            center,
            annulus,
            period,
        });
    }
    Watchers {
        geometric,
        petals,
        regions,
        non_repelling,
    }
}

/// Outcome of following one critical orbit.
struct OrbitRun {
    class: TailClass,
    prefix: Vec<SpherePoint>,
}

fn follow(f: &RationalMap, z0: SpherePoint, w: &Watchers, budget: usize) -> Result<OrbitRun> {
    let mut prefix: Vec<SpherePoint> = vec![z0];
    let mut window: VecDeque<SpherePoint> = VecDeque::from([z0]);
    let mut p = ChartPoint::from_sphere(z0);
    let mut geo_runs = vec![0usize; w.geometric.len()];
    let mut geo_prev: Vec<Vec<f64>> = w
        .geometric
        .iter()
        .map(|(_, pts)| vec![f64::INFINITY; pts.len().max(1)])
        .collect();
    let mut petal_runs = vec![0usize; w.petals.len()];
    let mut petal_last: Vec<Option<(usize, f64)>> = vec![None; w.petals.len()];
    let mut dwell: Vec<Vec<usize>> = w.regions.iter().map(|r| vec![0; r.period()]).collect();
    let mut min_late = f64::INFINITY;
    let mut z = z0;

    for n in 1..=budget {
        p = f.eval_chart(p)?;
        z = match p.to_sphere() {
            SpherePoint::Finite(v) => SpherePoint::snapped(v),
            s => s,
        };
        if prefix.len() < MERGE_PREFIX {
            prefix.push(z);
        }

        // Exact landing on an earlier point: window[j] is iterate n - len + j.
        let len = window.len();
        for j in (0..len).rev() {
            if z.approx_eq(&window[j], SNAP_TOL) {
                let k = n - len + j;
                let jump = k == 0
                    || (j > 0 && window[len - 1].chordal_distance(&window[j - 1]) > LANDING_JUMP);
                if jump {
                    return Ok(OrbitRun {
                        class: TailClass::Bounded { landing_step: n },
                        prefix,
                    });
                }
                break;
            }
        }
        window.push_back(z);
        if window.len() > LANDING_WINDOW {
            window.pop_front();
        }

        // Geometric convergence, compared one period back.
        for (i, (id, pts)) in w.geometric.iter().enumerate() {
            let d = pts
                .iter()
                .map(|q| q.chordal_distance(&z))
                .fold(f64::INFINITY, f64::min);
            let slot = n % geo_prev[i].len();
            let before = geo_prev[i][slot];
            geo_prev[i][slot] = d;
            if d < before || d == 0.0 {
                geo_runs[i] += 1;
            } else {
                geo_runs[i] = 0;
            }
            if geo_runs[i] >= GEOMETRIC_STEPS && d < GEOMETRIC_DIST {
                return Ok(OrbitRun {
                    class: TailClass::Tame {
                        target: Target::Cycle(*id),
                        detected_at: n,
                    },
                    prefix,
                });
            }
        }

        // Petal sectors at parabolic base points, read once per first return.
        for (i, pw) in w.petals.iter().enumerate() {
            let h = match pw.germ.local_coord(z) {
                Ok(h) => h,
                Err(_) => continue,
            };
            let r = h.norm();
            if r == 0.0 || r > pw.radius {
                continue;
            }
            if let Some((last_n, _)) = petal_last[i] {
                if (n - last_n) % pw.steps != 0 {
                    continue;
                }
            }
            let in_sector = pw
                .angles
                .iter()
                .any(|&a| wrap_angle(h.arg() - a).abs() < pw.half_width);
            let decaying = match petal_last[i] {
                Some((last_n, last_r)) => n - last_n == pw.steps && r < last_r,
                None => true,
            };
            if in_sector && decaying {
                petal_runs[i] += 1;
            } else {
                petal_runs[i] = usize::from(in_sector);
            }
            petal_last[i] = Some((n, r));
            if petal_runs[i] >= PETAL_RETURNS {
                return Ok(OrbitRun {
                    class: TailClass::Tame {
                        target: Target::Cycle(pw.cycle),
                        detected_at: n,
                    },
                    prefix,
                });
            }
        }

        // Dwell in annotated regions.
        for (i, reg) in w.regions.iter().enumerate() {
            let slot = n % reg.period();
            if reg.contains(z) {
                dwell[i][slot] += 1;
            } else {
                dwell[i][slot] = 0;
            }
            if dwell[i][slot] >= DWELL {
                return Ok(OrbitRun {
                    class: TailClass::Tame {
                        target: reg.target(),
                        detected_at: n,
                    },
                    prefix,
                });
            }
        }

        if 2 * n >= budget {
            for q in &w.non_repelling {
                min_late = min_late.min(q.chordal_distance(&z));
            }
        }
    }
    let last_point = z;
    let confidence = if min_late > 1e-3 {
        Confidence::High
    } else {
        Confidence::Low
    };
    Ok(OrbitRun {
        class: TailClass::Wild(WildStats {
            budget,
            confidence,
            last_point,
            min_distance_late: min_late,
        }),
        prefix,
    })
}

/// Quantized chart coordinates for hashing orbit points.
fn cell(z: &SpherePoint) -> (bool, i64, i64) {
    let q = |x: f64| (x / SNAP_TOL).floor() as i64;
    match z {
        SpherePoint::Infinity => (true, 0, 0),
        SpherePoint::Finite(v) if v.norm() > 1.0 => {
            let w = v.inv();
            (true, q(w.re), q(w.im))
        }
        SpherePoint::Finite(v) => (false, q(v.re), q(v.im)),
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, i: usize) -> usize {
        let mut r = i;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut j = i;
        while self.0[j] != r {
            let next = self.0[j];
            self.0[j] = r;
            j = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi] = lo;
        }
    }
}

/// Orbit points near an attracting cycle only merge when they agree far
/// beyond snap tolerance; convergent orbits in one basin are not one tail.
fn merge_tolerance(z: &SpherePoint, sinks: &[SpherePoint]) -> f64 {
    if sinks.iter().any(|q| q.chordal_distance(z) < 1e-4) {
        1e-13
    } else {
        SNAP_TOL
    }
}

fn rank(c: &TailClass) -> u8 {
    match c {
        TailClass::Bounded { .. } => 0,
        TailClass::Tame { .. } => 1,
        TailClass::Wild(_) => 2,
    }
}

/// Follow every critical point for up to `budget` iterations, merge tails
/// by forward-orbit intersection and split `Ram_f` accordingly.
pub fn classify_tails(
    f: &RationalMap,
    cycles: &[Cycle],
    annotations: &AnnotationSet,
    budget: usize,
) -> Result<(Vec<Tail>, RamSplit)> {
    if budget == 0 {
        return Err(DynError::Domain(
            "iteration budget must be at least 1".into(),
        ));
    }
    let crit = critical_divisor(f)?;
    let watchers = build_watchers(cycles, f, annotations);
    let runs: Vec<OrbitRun> = crit
        .entries
        .iter()
        .map(|e| follow(f, e.point, &watchers, budget))
        .collect::<Result<_>>()?;

    let sinks: Vec<SpherePoint> = watchers
        .geometric
        .iter()
        .flat_map(|(_, pts)| pts.iter().copied())
        .collect();
    let mut uf = UnionFind((0..runs.len()).collect());
    let mut table: HashMap<(bool, i64, i64), Vec<(usize, SpherePoint)>> = HashMap::new();
    for (i, run) in runs.iter().enumerate() {
        for z in &run.prefix {
            let (s, a, b) = cell(z);
            let tol = merge_tolerance(z, &sinks);
            for da in -1..=1 {
                for db in -1..=1 {
                    if let Some(list) = table.get(&(s, a + da, b + db)) {
                        let hits: Vec<usize> = list
                            .iter()
                            .filter(|(j, q)| *j != i && q.approx_eq(z, tol))
                            .map(|(j, _)| *j)
                            .collect();
                        for j in hits {
                            uf.union(i, j);
                        }
                    }
                }
            }
            // Points at infinity share one cell; compare directly there.
            table.entry((s, a, b)).or_default().push((i, *z));
        }
    }

    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..runs.len() {
        groups.entry(uf.find(i)).or_default().push(i);
    }
    let mut tails = Vec::new();
    for (id, members) in groups.values().enumerate() {
        let class = members
            .iter()
            .map(|&i| &runs[i].class)
            .min_by_key(|c| rank(c))
            .cloned()
            .ok_or_else(|| DynError::Internal("empty tail".into()))?;
        tails.push(Tail {
            id,
            members: members
                .iter()
                .map(|&i| TailMember {
                    point: crit.entries[i].point,
                    multiplicity: crit.entries[i].multiplicity,
                })
                .collect(),
            classification: class,
        });
    }

    let class_of: HashMap<usize, Option<CycleClass>> =
        cycles.iter().map(|c| (c.id, c.class)).collect();
    let mut split = RamSplit {
        ram_b: RamificationDivisor::empty("Ram_b"),
        ram_t: RamificationDivisor::empty("Ram_t"),
        ram_w: RamificationDivisor::empty("Ram_w"),
        tame_by_target: BTreeMap::new(),
        tame_by_class: BTreeMap::new(),
    };
    for t in &tails {
        for m in &t.members {
            match &t.classification {
                TailClass::Bounded { .. } => split.ram_b.add_point(m.point, m.multiplicity),
                TailClass::Wild(_) => split.ram_w.add_point(m.point, m.multiplicity),
                TailClass::Tame { target, .. } => {
                    split.ram_t.add_point(m.point, m.multiplicity);
                    split
                        .tame_by_target
                        .entry(target.key())
                        .or_insert_with(|| {
                            RamificationDivisor::empty(format!("Ram_t[{}]", target.key()))
                        })
                        .add_point(m.point, m.multiplicity);
                    let symbol = match target {
                        Target::Cycle(i) => class_of
                            .get(i)
                            .copied()
                            .flatten()
                            .map_or("?", |c| c.symbol()),
                        Target::Siegel(_) => "SD",
                        Target::Herman(_) => "HR",
                    };
                    split
                        .tame_by_class
                        .entry(symbol.to_string())
                        .or_insert_with(|| RamificationDivisor::empty(format!("Ram_t^{symbol}")))
                        .add_point(m.point, m.multiplicity);
                }
            }
        }
    }
    for d in [&mut split.ram_b, &mut split.ram_t, &mut split.ram_w] {
        d.sort();
    }
    for d in split
        .tame_by_target
        .values_mut()
        .chain(split.tame_by_class.values_mut())
    {
        d.sort();
    }
    Ok((tails, split))
}

/// `ε = 1` for each Siegel or Herman region with tame ramification.
pub fn epsilon_marks(
    split: &RamSplit,
    cycles: &[Cycle],
    annotations: &AnnotationSet,
) -> BTreeMap<String, u8> {
    let mut out = BTreeMap::new();
    for c in cycles {
        if c.class == Some(CycleClass::SiegelDisc) {
            let t = Target::Siegel(c.id);
            out.insert(t.key(), u8::from(split.tame_degree(&t) > 0));
        }
    }
    for (i, ..) in annotations.herman_rings() {
        let t = Target::Herman(i);
        out.insert(t.key(), u8::from(split.tame_degree(&t) > 0));
    }
    out
}

/// `δ = 1` for a parabolic cycle with `Re ν <= 0` whose tame ramification,
/// with multiplicity, is exactly `e`.
pub fn delta_marks(cycles: &[Cycle], split: &RamSplit) -> BTreeMap<String, u8> {
    let mut out = BTreeMap::new();
    for c in cycles {
        if let Some(inv) = &c.parabolic {
            let t = Target::Cycle(c.id);
            let d = inv.nu.re <= 0.0 && split.tame_degree(&t) == inv.e;
            out.insert(t.key(), u8::from(d));
        }
    }
    out
}

/// One row of an orbit transcript.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranscriptRow {
    pub index: usize,
    pub re: f64,
    pub im: f64,
    /// `"z"` for the affine chart, `"w"` for `w = 1/z`.
    pub chart: &'static str,
}

pub fn orbit_transcript(f: &RationalMap, z0: SpherePoint, n: usize) -> Result<Vec<TranscriptRow>> {
    let mut rows = Vec::with_capacity(n + 1);
    let mut p = ChartPoint::from_sphere(z0);
    for index in 0..=n {
        let (chart, u) = match p {
            ChartPoint::Affine(z) => ("z", z),
            ChartPoint::AtInfinity(w) => ("w", w),
        };
        rows.push(TranscriptRow {
            index,
            re: u.re,
            im: u.im,
            chart,
        });
        if index < n {
            p = f.eval_chart(p)?;
        }
    }
    Ok(rows)
}

pub fn transcript_csv(rows: &[TranscriptRow]) -> String {
    let mut s = String::from("index,re,im,chart\n");
    for r in rows {
        s.push_str(&format!("{},{:e},{:e},{}\n", r.index, r.re, r.im, r.chart));
    }
    s
}
