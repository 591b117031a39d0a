//! JSON family configuration.
//!
//! ```json
//! {
//!   "theta_domain": ["-inf", 1.0],
//!   "support": [0.0, "inf"],
//!   "components": [
//!     {"kind": "exponential", "rate": 1.0},
//!     {"repeat": {"pattern": [{"kind": "gamma", "shape": 2.0, "rate": 2.0}], "count": 99}}
//!   ]
//! }
//! ```
//!
//! `theta_domain` and `support` are optional and default to the intersection
//! of the component tilt domains and the hull of their supports. Infinite
//! endpoints are written as the strings `"-inf"` and `"inf"`. A `repeat`
//! block cycles its pattern until `count` components have been produced; it
//! may also stand alone at the top level in place of `components`.

use std::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::distributions::{Component, DistributionFamily, Interval};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A real number or `±∞`, serialized as a JSON number or `"inf"`/`"-inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtReal(pub f64);

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0 == f64::INFINITY {
            s.serialize_str("inf")
        } else if self.0 == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = ExtReal;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number, \"inf\" or \"-inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<ExtReal, E> {
                Ok(ExtReal(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<ExtReal, E> {
                Ok(ExtReal(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<ExtReal, E> {
                Ok(ExtReal(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<ExtReal, E> {
                match v {
                    "inf" | "+inf" => Ok(ExtReal(f64::INFINITY)),
                    "-inf" => Ok(ExtReal(f64::NEG_INFINITY)),
                    other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
                }
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Repeat {
    pub pattern: Vec<Component<f64>>,
    pub count: usize,
}

impl Repeat {
    fn expand(&self, out: &mut Vec<Component<f64>>) -> Result<()> {
        if self.pattern.is_empty() {
            return Err(Error::Config("repeat pattern is empty".into()));
        }
        out.extend(self.pattern.iter().cycle().take(self.count).copied());
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComponentEntry {
    Repeat { repeat: Repeat },
    Single(Component<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_domain: Option<[ExtReal; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<[ExtReal; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub components: Vec<ComponentEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repeat: Option<Repeat>,
}

impl FamilyConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// The flat component list after expanding `repeat` blocks.
    pub fn expanded(&self) -> Result<Vec<Component<f64>>> {
        let mut out = Vec::new();
        for entry in &self.components {
            match entry {
                ComponentEntry::Single(c) => out.push(*c),
                ComponentEntry::Repeat { repeat } => repeat.expand(&mut out)?,
            }
        }
        if let Some(r) = &self.repeat {
            r.expand(&mut out)?;
        }
        if out.is_empty() {
            return Err(Error::Config("family has no components".into()));
        }
        Ok(out)
    }

    /// Builds and validates the family in precision `T`.
    pub fn build<T: Scalar>(&self) -> Result<DistributionFamily<T>> {
        let cast = |c: &Component<f64>| -> Result<Component<T>> {
            let c = match *c {
                Component::Gaussian { mean, sd } => Component::gaussian(T::lit(mean), T::lit(sd)),
                Component::Gamma { shape, rate } => Component::gamma(T::lit(shape), T::lit(rate)),
                Component::Exponential { rate } => Component::exponential(T::lit(rate)),
                Component::ShiftedExponential { rate, shift } => Component::shifted_exponential(T::lit(rate), T::lit(shift)),
            };
            c.map_err(|e| Error::Config(e.to_string()))
        };
        let components = self.expanded()?.iter().map(cast).collect::<Result<Vec<_>>>()?;
        let interval = |v: [ExtReal; 2]| Interval::new(T::lit(v[0].0), T::lit(v[1].0));
        let family = match (self.theta_domain, self.support) {
            (None, None) => DistributionFamily::from_components(components),
            (theta, support) => {
                let derived = DistributionFamily::from_components(components.clone())
                    .map_err(|e| Error::Config(e.to_string()))?;
                DistributionFamily::new(
                    components,
                    theta.map(interval).unwrap_or(derived.theta_domain()),
                    support.map(interval).unwrap_or(derived.support()),
                )
            }
        };
        family.map_err(|e| Error::Config(e.to_string()))
    }
}
