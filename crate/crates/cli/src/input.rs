//! Map and annotation input shared by every command.

use std::collections::{BTreeMap, HashMap};

use dynledger::annotations::AnnotationSet;
use dynledger::ratmap::{parse_complex, parse_map, RationalMap};
use dynledger::{DynError, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A parameter value: an expression such as `"-3/4"` or `"0.1+0.2i"`, or a
/// `[re, im]` pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Pair([f64; 2]),
    Expr(String),
}

impl ParamValue {
    pub fn value(&self) -> Result<Complex64> {
        match self {
            ParamValue::Pair([re, im]) => Ok(Complex64::new(*re, *im)),
            ParamValue::Expr(s) => parse_complex(s, &HashMap::new()),
        }
    }
}

/// Map given as an expression in `z` with named parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapSpec {
    pub expr: String,
    #[serde(default)]
    pub params: BTreeMap<String, ParamValue>,
}

impl MapSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| DynError::Input(format!("map file: {e}")))
    }

    pub fn param_values(&self) -> Result<HashMap<String, Complex64>> {
        self.params
            .iter()
            .map(|(k, v)| Ok((k.clone(), v.value()?)))
            .collect()
    }

    pub fn build(&self) -> Result<RationalMap> {
        parse_map(&self.expr, &self.param_values()?)
    }
}

/// Parse `name=value` from the command line.
pub fn parse_param(arg: &str) -> Result<(String, ParamValue)> {
    let (k, v) = arg.split_once('=').ok_or_else(|| {
        DynError::Input(format!("parameter `{arg}` is not of the form name=value"))
    })?;
    let k = k.trim();
    if k.is_empty() || !k.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(DynError::Input(format!("bad parameter name `{k}`")));
    }
    let value = ParamValue::Expr(v.trim().to_string());
    value.value()?;
    Ok((k.to_string(), value))
}

pub fn read_file(path: &str) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| DynError::Input(format!("{path}: {e}")))
}

pub fn load_annotations(path: Option<&str>) -> Result<AnnotationSet> {
    match path {
        Some(p) => AnnotationSet::from_json(&read_file(p)?),
        None => Ok(AnnotationSet::default()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_accept_pairs_and_expressions() {
        let spec =
            MapSpec::from_json(r#"{"expr": "z^2 + c", "params": {"c": [0.25, 0]}}"#).unwrap();
        assert_eq!(spec.build().unwrap().degree(), 2);
        let spec = MapSpec::from_json(r#"{"expr": "z^2 + c", "params": {"c": "-3/4"}}"#).unwrap();
        assert_eq!(
            spec.param_values().unwrap()["c"],
            Complex64::new(-0.75, 0.0)
        );
        assert!(parse_param("c").is_err());
        assert!(parse_param("c=1+").is_err());
        assert_eq!(parse_param(" c = 2i ").unwrap().0, "c");
    }
}
