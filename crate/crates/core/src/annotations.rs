//! Caller-supplied facts the numerics cannot decide: Brjuno or Liouville
//! rotation numbers, Herman rings, Lattès structure.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{DynError, Result};
use crate::ratmap::SpherePoint;

/// Refers to a cycle by its index in the sorted cycle list or by one of its
/// points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CycleRef {
    Index(usize),
    Point(SpherePoint),
}

/// Chordal radius for matching a user-supplied point to a cycle point.
pub const CYCLE_MATCH_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Annotation {
    RotationNumberBrjuno {
        cycle: CycleRef,
        /// Radius of a closed disc about the cycle point inside the Siegel
        /// disc, used for dwell tests.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        disc_radius: Option<f64>,
    },
    RotationNumberLiouville {
        cycle: CycleRef,
    },
    HermanRing {
        period: usize,
        /// `[r_in, r_out]` of a closed round annulus inside the ring.
        annulus: [f64; 2],
        #[serde(default = "origin")]
        center: SpherePoint,
    },
    LattesFlag,
}

fn origin() -> SpherePoint {
    SpherePoint::Finite(Complex64::new(0.0, 0.0))
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AnnotationSet {
    pub annotations: Vec<Annotation>,
}

impl AnnotationSet {
    pub fn from_json(text: &str) -> Result<Self> {
        let set: AnnotationSet =
            serde_json::from_str(text).map_err(|e| DynError::Input(format!("annotations: {e}")))?;
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        for a in &self.annotations {
            match a {
                Annotation::HermanRing {
                    period, annulus, ..
                } => {
                    if *period == 0 || !(0.0 < annulus[0] && annulus[0] < annulus[1]) {
                        return Err(DynError::Input(format!(
                            "Herman ring annotation needs period >= 1 and 0 < r_in < r_out, got {period} {annulus:?}"
                        )));
                    }
                }
                Annotation::RotationNumberBrjuno {
                    disc_radius: Some(r),
                    ..
                } if !(*r > 0.0) => {
                    return Err(DynError::Input("disc_radius must be positive".into()));
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn is_lattes(&self) -> bool {
        self.annotations
            .iter()
            .any(|a| matches!(a, Annotation::LattesFlag))
    }

    pub fn herman_rings(&self) -> impl Iterator<Item = (usize, usize, [f64; 2], SpherePoint)> + '_ {
        self.annotations
            .iter()
            .enumerate()
            .filter_map(|(i, a)| match a {
                Annotation::HermanRing {
                    period,
                    annulus,
                    center,
                } => Some((i, *period, *annulus, *center)),
                _ => None,
            })
    }
}

impl CycleRef {
    pub fn matches(&self, index: usize, points: &[SpherePoint]) -> bool {
        match self {
            CycleRef::Index(i) => *i == index,
            CycleRef::Point(p) => points.iter().any(|q| q.approx_eq(p, CYCLE_MATCH_TOL)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_annotation_file() {
        let text = r#"{"annotations":[
            {"kind":"RotationNumberBrjuno","cycle":0,"disc_radius":0.05},
            {"kind":"RotationNumberLiouville","cycle":[0.5,0.25]},
            {"kind":"HermanRing","period":1,"annulus":[0.98,1.02]},
            {"kind":"LattesFlag"}]}"#;
        let set = AnnotationSet::from_json(text).unwrap();
        assert_eq!(set.annotations.len(), 4);
        assert!(set.is_lattes());
        assert!(matches!(
            set.annotations[1],
            Annotation::RotationNumberLiouville {
                cycle: CycleRef::Point(_)
            }
        ));
        assert_eq!(set.herman_rings().count(), 1);
    }

    #[test]
    fn rejects_bad_annulus() {
        let text = r#"{"annotations":[{"kind":"HermanRing","period":1,"annulus":[1.0,0.5]}]}"#;
        assert!(AnnotationSet::from_json(text).is_err());
    }
}
