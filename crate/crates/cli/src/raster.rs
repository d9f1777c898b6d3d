//! Escape-time picture of the basins of the non-repelling cycles, as a
//! binary PPM. For visual sanity checks only.

use dynledger::cycles::Cycle;
use dynledger::ratmap::{ChartPoint, RationalMap, SpherePoint};
use dynledger::{DynError, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Chordal radius at which an orbit counts as captured by a sink.
const CAPTURE: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RasterSpec {
    pub width: usize,
    pub height: usize,
    pub center: Complex64,
    /// Half the width of the view in the plane.
    pub radius: f64,
    pub max_iter: usize,
}

impl Default for RasterSpec {
    fn default() -> Self {
        Self {
            width: 400,
            height: 400,
            center: Complex64::new(0.0, 0.0),
            radius: 2.0,
            max_iter: 200,
        }
    }
}

const PALETTE: [[u8; 3]; 6] = [
    [230, 97, 1],
    [94, 60, 153],
    [27, 158, 119],
    [217, 95, 2],
    [31, 120, 180],
    [231, 41, 138],
];

/// Row-major RGB bytes, top row first, preceded by a `P6` header.
pub fn render(f: &RationalMap, cycles: &[Cycle], spec: &RasterSpec) -> Result<Vec<u8>> {
    if spec.width == 0 || spec.height == 0 || !(spec.radius > 0.0) {
        return Err(DynError::Input(
            "raster needs positive width, height and radius".into(),
        ));
    }
    let sinks: Vec<(usize, SpherePoint)> = cycles
        .iter()
        .filter(|c| {
            c.class
                .is_some_and(|k| k.is_attracting() || k.is_parabolic())
        })
        .enumerate()
        .flat_map(|(i, c)| c.points.iter().map(move |&p| (i, p)))
        .collect();
    let mut out = format!("P6\n{} {}\n255\n", spec.width, spec.height).into_bytes();
    let scale = 2.0 * spec.radius / spec.width as f64;
    for row in 0..spec.height {
        for col in 0..spec.width {
            let z = spec.center
                + Complex64::new(
                    (col as f64 + 0.5) * scale - spec.radius,
                    (spec.height as f64 / 2.0 - row as f64 - 0.5) * scale,
                );
            let mut p = ChartPoint::from_sphere(SpherePoint::Finite(z));
            let mut pixel = [0u8; 3];
            for n in 0..spec.max_iter {
                let s = p.to_sphere();
                if let Some((i, _)) = sinks.iter().find(|(_, q)| q.chordal_distance(&s) < CAPTURE) {
                    let shade = 1.0 - 0.8 * (n as f64 / spec.max_iter as f64).sqrt();
                    let base = PALETTE[i % PALETTE.len()];
                    pixel = base.map(|c| (c as f64 * shade) as u8);
                    break;
                }
                p = match f.eval_chart(p) {
                    Ok(next) => next,
                    Err(_) => break,
                };
            }
            out.extend_from_slice(&pixel);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use dynledger::annotations::AnnotationSet;
    use dynledger::cycles::{find_and_classify, CycleOptions};
    use dynledger::ratmap::parse_map;
    use std::collections::HashMap;

    #[test]
    fn header_and_size() {
        let f = parse_map("z^2 - 1", &HashMap::new()).unwrap();
        let cycles =
            find_and_classify(&f, &AnnotationSet::default(), &CycleOptions::default()).unwrap();
        let spec = RasterSpec {
            width: 8,
            height: 6,
            max_iter: 50,
            ..RasterSpec::default()
        };
        let img = render(&f, &cycles, &spec).unwrap();
        let header = b"P6\n8 6\n255\n";
        assert_eq!(&img[..header.len()], header);
        assert_eq!(img.len(), header.len() + 8 * 6 * 3);
        // The corners escape to infinity, which is superattracting.
        assert_ne!(&img[header.len()..header.len() + 3], &[0, 0, 0]);
    }
}
