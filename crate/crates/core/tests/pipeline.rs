use std::collections::HashMap;

use dynledger::annotations::AnnotationSet;
use dynledger::pipeline::{analyze, AnalysisConfig};
use dynledger::ratmap::parse_map;

fn audit(expr: &str) -> dynledger::pipeline::Audits {
    let f = parse_map(expr, &HashMap::new()).unwrap();
    analyze(&f, &AnnotationSet::default(), &AnalysisConfig::default())
        .unwrap()
        .audits
}

#[test]
fn parabolic_quadratic_captures_its_critical_orbit() {
    let a = audit("z^2 + 0.25");
    let b = a.basin.iter().find(|b| b.class.starts_with('0')).unwrap();
    assert_eq!((b.required, b.received), (1, 1));
    assert!(a.basin_ok && a.parabolic_ok);
}

#[test]
fn cubic_petals_each_capture_an_orbit() {
    let a = audit("z + z^3");
    let b = a.basin.iter().find(|b| b.class.starts_with('0')).unwrap();
    assert_eq!((b.required, b.received), (2, 2));
}

#[test]
fn mobius_maps_have_no_basin_requirement() {
    let a = audit("z/(z+1)");
    assert!(a.basin.is_empty());
    assert!(a.basin_ok);
    assert_eq!(a.parabolic.len(), 1);
}
