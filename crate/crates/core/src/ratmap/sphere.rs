use std::fmt;

use num_complex::Complex64;
use serde::de::{self, Deserializer, Visitor};
use serde::ser::{SerializeTuple, Serializer};
use serde::{Deserialize, Serialize};

/// Chordal snap tolerance for point identity.
pub const SNAP_TOL: f64 = 1e-7;
/// Leave the affine chart above this modulus.
pub const CHART_SWITCH: f64 = 2.0;

/// A point of the Riemann sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpherePoint {
    Finite(Complex64),
    Infinity,
}

impl SpherePoint {
    pub fn finite(re: f64, im: f64) -> Self {
        SpherePoint::Finite(Complex64::new(re, im))
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, SpherePoint::Infinity)
    }

    pub fn as_finite(&self) -> Option<Complex64> {
        match *self {
            SpherePoint::Finite(z) => Some(z),
            SpherePoint::Infinity => None,
        }
    }

    /// Wrap a complex value, sending non-finite values and values within the
    /// snap tolerance of infinity to `Infinity`.
    pub fn snapped(z: Complex64) -> Self {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return SpherePoint::Infinity;
        }
        let p = SpherePoint::Finite(z);
        if p.chordal_distance(&SpherePoint::Infinity) <= SNAP_TOL {
            SpherePoint::Infinity
        } else {
            p
        }
    }

    /// Chordal distance, in `[0, 2]`.
    pub fn chordal_distance(&self, other: &SpherePoint) -> f64 {
        match (*self, *other) {
            (SpherePoint::Infinity, SpherePoint::Infinity) => 0.0,
            (SpherePoint::Finite(z), SpherePoint::Infinity)
            | (SpherePoint::Infinity, SpherePoint::Finite(z)) => 2.0 / (1.0 + z.norm_sqr()).sqrt(),
            (SpherePoint::Finite(a), SpherePoint::Finite(b)) => {
                // Evaluate in the chart where both points are small, so the
                // difference does not lose digits far from the origin.
                if a.norm() > 1.0 && b.norm() > 1.0 {
                    let (wa, wb) = (a.inv(), b.inv());
                    2.0 * (wa - wb).norm() / ((1.0 + wa.norm_sqr()) * (1.0 + wb.norm_sqr())).sqrt()
                } else {
                    2.0 * (a - b).norm() / ((1.0 + a.norm_sqr()) * (1.0 + b.norm_sqr())).sqrt()
                }
            }
        }
    }

    pub fn approx_eq(&self, other: &SpherePoint, tol: f64) -> bool {
        self.chordal_distance(other) <= tol
    }

    /// Total order used for canonical sorting: finite points by (re, im),
    /// infinity last.
    pub fn canonical_cmp(&self, other: &SpherePoint) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        match (self, other) {
            (SpherePoint::Infinity, SpherePoint::Infinity) => Ordering::Equal,
            (SpherePoint::Infinity, _) => Ordering::Greater,
            (_, SpherePoint::Infinity) => Ordering::Less,
            (SpherePoint::Finite(a), SpherePoint::Finite(b)) => {
                a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
            }
        }
    }
}

impl fmt::Display for SpherePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpherePoint::Finite(z) => write!(f, "{z}"),
            SpherePoint::Infinity => write!(f, "inf"),
        }
    }
}

// Finite points serialize as `[re, im]`, infinity as the string "inf".
impl Serialize for SpherePoint {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            SpherePoint::Finite(z) => {
                let mut t = s.serialize_tuple(2)?;
                t.serialize_element(&z.re)?;
                t.serialize_element(&z.im)?;
                t.end()
            }
            SpherePoint::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for SpherePoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = SpherePoint;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "[re, im] or \"inf\"")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<SpherePoint, E> {
                if v == "inf" {
                    Ok(SpherePoint::Infinity)
                } else {
                    Err(E::custom(format!("unknown point `{v}`")))
                }
            }
            fn visit_seq<A: de::SeqAccess<'de>>(self, mut a: A) -> Result<SpherePoint, A::Error> {
                let re: f64 = a
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(0, &self))?;
                let im: f64 = a
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(1, &self))?;
                Ok(SpherePoint::Finite(Complex64::new(re, im)))
            }
        }
        d.deserialize_any(V)
    }
}

/// A point in one of the two standard charts: `Affine(z)` or `AtInfinity(w)`
/// with `w = 1/z`. Used for iteration so that large values keep full
/// precision instead of overflowing or snapping.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChartPoint {
    Affine(Complex64),
    AtInfinity(Complex64),
}

impl ChartPoint {
    pub fn from_sphere(p: SpherePoint) -> Self {
        match p {
            SpherePoint::Infinity => ChartPoint::AtInfinity(Complex64::new(0.0, 0.0)),
            SpherePoint::Finite(z) if z.norm() > CHART_SWITCH => ChartPoint::AtInfinity(z.inv()),
            SpherePoint::Finite(z) => ChartPoint::Affine(z),
        }
    }

    pub fn to_sphere(self) -> SpherePoint {
        match self {
            ChartPoint::Affine(z) => SpherePoint::Finite(z),
            ChartPoint::AtInfinity(w) => {
                if w.norm() == 0.0 {
                    SpherePoint::Infinity
                } else {
                    let z = w.inv();
                    if z.re.is_finite() && z.im.is_finite() {
                        SpherePoint::Finite(z)
                    } else {
                        SpherePoint::Infinity
                    }
                }
            }
        }
    }

    /// Pick the chart for the value `[a : b]` (meaning `a/b`), preferring the
    /// chart of `prefer` unless the value leaves it by the hysteresis margin.
    pub fn from_ratio(a: Complex64, b: Complex64, prefer_infinity: bool) -> Option<Self> {
        let (na, nb) = (a.norm(), b.norm());
        if na == 0.0 && nb == 0.0 {
            return None;
        }
        let use_w = if prefer_infinity {
            na >= nb / CHART_SWITCH
        } else {
            na > CHART_SWITCH * nb
        };
        Some(if use_w {
            ChartPoint::AtInfinity(b / a)
        } else {
            ChartPoint::Affine(a / b)
        })
    }

    pub fn is_infinity_chart(&self) -> bool {
        matches!(self, ChartPoint::AtInfinity(_))
    }

    pub fn coordinate(&self) -> Complex64 {
        match *self {
            ChartPoint::Affine(z) | ChartPoint::AtInfinity(z) => z,
        }
    }
}
