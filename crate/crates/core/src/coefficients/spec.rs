//! Versioned JSON description of a coefficient and density.
//!
//! ```json
//! {"schema": 1, "kind": "example41", "n_max": 10, "density": {"kind": "uniform"}}
//! ```

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::coefficients::{
    make_example_bump_train, make_example_factorial, Coefficient, Density, Example41Spec,
    Example42Spec,
};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosedFormFamily {
    /// `a ≡ value`.
    Constant,
    /// `a(x) = √(1 + x²)`.
    SqrtOnePlusSquare,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoefficientKind {
    ClosedForm {
        family: ClosedFormFamily,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        value: Option<f64>,
    },
    Example41 {
        n_max: usize,
    },
    Example42 {
        n_terms: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensitySpec {
    Uniform {},
    Constant { value: f64 },
    /// `ρ = scale / a`.
    Reciprocal { scale: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientFile {
    pub kind: CoefficientKind,
    pub density: DensitySpec,
}

impl CoefficientFile {
    pub fn parse(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text)
            .map_err(|e| Error::ConfigInvalid(format!("coefficient spec is not JSON: {e}")))?;
        Self::from_value(value)
    }

    pub fn from_value(value: Value) -> Result<Self> {
        let Value::Object(mut map) = value else {
            return Err(Error::ConfigInvalid("coefficient spec must be an object".into()));
        };
        match map.remove("schema") {
            Some(Value::Number(n)) if n.as_u64() == Some(SCHEMA_VERSION) => {}
            Some(other) => {
                return Err(Error::ConfigInvalid(format!(
                    "unsupported schema {other}, expected {SCHEMA_VERSION}"
                )))
            }
            None => return Err(Error::ConfigInvalid("missing \"schema\" field".into())),
        }
        let density = match map.remove("density") {
            Some(d) => serde_json::from_value(d)
                .map_err(|e| Error::ConfigInvalid(format!("density: {e}")))?,
            None => DensitySpec::Uniform {},
        };
        let kind: CoefficientKind = serde_json::from_value(Value::Object(map))
            .map_err(|e| Error::ConfigInvalid(format!("coefficient: {e}")))?;
        Ok(Self { kind, density })
    }

    pub fn to_json(&self) -> Value {
        let mut v = serde_json::to_value(&self.kind).expect("serializable");
        v["schema"] = Value::from(SCHEMA_VERSION);
        v["density"] = serde_json::to_value(&self.density).expect("serializable");
        v
    }

    pub fn build(&self) -> Result<(Coefficient, Density)> {
        let coef = match &self.kind {
            CoefficientKind::ClosedForm { family, value } => match (family, value) {
                (ClosedFormFamily::Constant, Some(v)) => Coefficient::constant(*v)?,
                (ClosedFormFamily::Constant, None) => {
                    return Err(Error::ConfigInvalid("constant family needs \"value\"".into()))
                }
                (ClosedFormFamily::SqrtOnePlusSquare, None) => Coefficient::sqrt_one_plus_square(),
                (ClosedFormFamily::SqrtOnePlusSquare, Some(_)) => {
                    return Err(Error::ConfigInvalid(
                        "sqrt_one_plus_square takes no \"value\"".into(),
                    ))
                }
            },
            CoefficientKind::Example41 { n_max } => {
                make_example_factorial(Example41Spec::new(*n_max)?)?
            }
            CoefficientKind::Example42 { n_terms } => {
                make_example_bump_train(Example42Spec::new(*n_terms)?)?
            }
        };
        let density = match self.density {
            DensitySpec::Uniform {} => Density::uniform(),
            DensitySpec::Constant { value } => Density::constant(value)?,
            DensitySpec::Reciprocal { scale } => Density::reciprocal_of(&coef, scale)?,
        };
        Ok((coef, density))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_each_kind() {
        let f = CoefficientFile::parse(r#"{"schema":1,"kind":"example41","n_max":6}"#).unwrap();
        assert_eq!(f.kind, CoefficientKind::Example41 { n_max: 6 });
        assert_eq!(f.density, DensitySpec::Uniform {});
        let f = CoefficientFile::parse(
            r#"{"schema":1,"kind":"closed_form","family":"constant","value":2,"density":{"kind":"reciprocal","scale":1}}"#,
        )
        .unwrap();
        let (a, rho) = f.build().unwrap();
        assert_eq!(a.a(5.0), 2.0);
        assert_eq!(rho.rho(5.0), 0.5);
        let f = CoefficientFile::parse(r#"{"schema":1,"kind":"example42","n_terms":3}"#).unwrap();
        assert!(f.build().unwrap().0.a(16.0 * 4.0 + 1.0).is_nan());
    }

    #[test]
    fn rejects_drift() {
        for bad in [
            r#"{"kind":"example41","n_max":6}"#,
            r#"{"schema":2,"kind":"example41","n_max":6}"#,
            r#"{"schema":1,"kind":"example41","n_max":6,"extra":1}"#,
            r#"{"schema":1,"kind":"example43"}"#,
            r#"{"schema":1,"kind":"example41","n_max":6,"density":{"kind":"uniform","x":1}}"#,
            r#"[1,2]"#,
        ] {
            assert!(matches!(CoefficientFile::parse(bad), Err(Error::ConfigInvalid(_))), "{bad}");
        }
        let f = CoefficientFile::parse(r#"{"schema":1,"kind":"closed_form","family":"constant"}"#)
            .unwrap();
        assert!(f.build().is_err());
    }

    #[test]
    fn roundtrip() {
        let f = CoefficientFile {
            kind: CoefficientKind::Example42 { n_terms: 5 },
            density: DensitySpec::Constant { value: 2.0 },
        };
        assert_eq!(CoefficientFile::from_value(f.to_json()).unwrap(), f);
    }
}
