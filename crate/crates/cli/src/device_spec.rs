//! Device description files.
//!
//! A device is one JSON object. Grammar (keys may appear in any order,
//! each at most once):
//!
//! ```text
//! device  := { "type": "pbs",                 "omega_deg": number }
//!          | { "type": "ideal_michalski",     "omega_deg": number }
//!          | { "type": "simplified_analyzer", "omega_deg": number }
//!          | { "type": "zeno_cascade",        "omega_deg": number, "n": integer >= 2 }
//!          | { "type": "coarse_grained",      "inner": device }
//! ```
//!
//! A `coarse_grained` device may not wrap another `coarse_grained` device
//! (nesting depth at most 2). Angles are in degrees.

use std::fmt;

use serde::de::{self, DeserializeSeed, MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserializer, Serialize, Serializer};
use telephone_core::{
    coarse_grain, ideal_michalski, pbs_instrument, simplified_analyzer, zeno_cascade,
    CascadeParams, PolarizationAngle, QuantumInstrument,
};
use thiserror::Error;

pub const MAX_NESTING: usize = 2;

const FIELD_NAMES: [&str; 4] = ["type", "omega_deg", "n", "inner"];

const TYPE_NAMES: [&str; 5] = [
    "pbs",
    "ideal_michalski",
    "zeno_cascade",
    "simplified_analyzer",
    "coarse_grained",
];

#[derive(Debug, Clone, PartialEq)]
pub enum DeviceSpecDocument {
    Pbs { omega_deg: f64 },
    IdealMichalski { omega_deg: f64 },
    ZenoCascade { omega_deg: f64, n: usize },
    SimplifiedAnalyzer { omega_deg: f64 },
    CoarseGrained { inner: Box<DeviceSpecDocument> },
}

/// Parse failure with the 1-based position at which it was detected.
#[derive(Debug, Clone, PartialEq, Error)]
pub struct SpecError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            f.write_str(&self.message)
        } else {
            write!(
                f,
                "line {}, column {}: {}",
                self.line, self.column, self.message
            )
        }
    }
}

impl From<serde_json::Error> for SpecError {
    fn from(err: serde_json::Error) -> Self {
        let text = err.to_string();
        let message = match text.rfind(" at line ") {
            Some(i) if err.line() > 0 => text[..i].to_string(),
            _ => text,
        };
        SpecError {
            line: err.line(),
            column: err.column(),
            message,
        }
    }
}

impl DeviceSpecDocument {
    pub fn type_name(&self) -> &'static str {
        match self {
            DeviceSpecDocument::Pbs { .. } => "pbs",
            DeviceSpecDocument::IdealMichalski { .. } => "ideal_michalski",
            DeviceSpecDocument::ZenoCascade { .. } => "zeno_cascade",
            DeviceSpecDocument::SimplifiedAnalyzer { .. } => "simplified_analyzer",
            DeviceSpecDocument::CoarseGrained { .. } => "coarse_grained",
        }
    }

    /// Device orientation in radians, if the device has one.
    pub fn omega(&self) -> Option<PolarizationAngle> {
        match self {
            DeviceSpecDocument::Pbs { omega_deg }
            | DeviceSpecDocument::IdealMichalski { omega_deg }
            | DeviceSpecDocument::ZenoCascade { omega_deg, .. }
            | DeviceSpecDocument::SimplifiedAnalyzer { omega_deg } => {
                Some(PolarizationAngle::from_degrees(*omega_deg))
            }
            DeviceSpecDocument::CoarseGrained { .. } => None,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            DeviceSpecDocument::CoarseGrained { inner } => 1 + inner.depth(),
            _ => 1,
        }
    }

    pub fn to_instrument(&self) -> QuantumInstrument {
        match self {
            DeviceSpecDocument::Pbs { .. } => pbs_instrument(self.omega().unwrap()),
            DeviceSpecDocument::IdealMichalski { .. } => ideal_michalski(self.omega().unwrap()),
            DeviceSpecDocument::SimplifiedAnalyzer { .. } => {
                simplified_analyzer(self.omega().unwrap())
            }
            DeviceSpecDocument::ZenoCascade { n, .. } => zeno_cascade(
                CascadeParams::new(*n, self.omega().unwrap()).expect("n validated when parsed"),
            ),
            DeviceSpecDocument::CoarseGrained { inner } => coarse_grain(&inner.to_instrument()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data")
    }
}

impl Serialize for DeviceSpecDocument {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(None)?;
        map.serialize_entry("type", self.type_name())?;
        match self {
            DeviceSpecDocument::Pbs { omega_deg }
            | DeviceSpecDocument::IdealMichalski { omega_deg }
            | DeviceSpecDocument::SimplifiedAnalyzer { omega_deg } => {
                map.serialize_entry("omega_deg", omega_deg)?;
            }
            DeviceSpecDocument::ZenoCascade { omega_deg, n } => {
                map.serialize_entry("omega_deg", omega_deg)?;
                map.serialize_entry("n", n)?;
            }
            DeviceSpecDocument::CoarseGrained { inner } => {
                map.serialize_entry("inner", inner)?;
            }
        }
        map.end()
    }
}

fn allowed_fields(type_name: &str) -> &'static [&'static str] {
    match type_name {
        "zeno_cascade" => &["type", "omega_deg", "n"],
        "coarse_grained" => &["type", "inner"],
        _ => &["type", "omega_deg"],
    }
}

fn disallowed<E: de::Error>(field: &str, type_name: &str) -> E {
    E::custom(format!(
        "field `{field}` is not allowed for device type `{type_name}`"
    ))
}

// Value checks live in the value's own visitor so that errors carry the
// position of the offending value rather than of the token after it.
struct TypeTag(String);

impl<'de> de::Deserialize<'de> for TypeTag {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = TypeTag;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a device type name")
            }
            fn visit_str<E: de::Error>(self, t: &str) -> Result<TypeTag, E> {
                if TYPE_NAMES.contains(&t) {
                    Ok(TypeTag(t.to_string()))
                } else {
                    Err(E::custom(format!(
                        "unknown device type `{t}` (expected one of {})",
                        TYPE_NAMES.join(", ")
                    )))
                }
            }
        }
        deserializer.deserialize_str(V)
    }
}

struct CascadeLength(usize);

impl<'de> de::Deserialize<'de> for CascadeLength {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = CascadeLength;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an integer n ≥ 2")
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<CascadeLength, E> {
                if v < 2 {
                    return Err(E::custom(format!("n must be ≥ 2, got {v}")));
                }
                usize::try_from(v)
                    .map(CascadeLength)
                    .map_err(|_| E::custom("n is too large"))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<CascadeLength, E> {
                match u64::try_from(v) {
                    Ok(v) => self.visit_u64(v),
                    Err(_) => Err(E::custom(format!("n must be ≥ 2, got {v}"))),
                }
            }
        }
        deserializer.deserialize_u64(V)
    }
}

struct DocSeed {
    depth: usize,
}

impl<'de> DeserializeSeed<'de> for DocSeed {
    type Value = DeviceSpecDocument;

    fn deserialize<D: Deserializer<'de>>(self, deserializer: D) -> Result<Self::Value, D::Error> {
        deserializer.deserialize_map(self)
    }
}

impl<'de> Visitor<'de> for DocSeed {
    type Value = DeviceSpecDocument;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("a device object")
    }

    fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Self::Value, A::Error> {
        if self.depth > MAX_NESTING {
            return Err(de::Error::custom(format!(
                "nesting depth exceeds {MAX_NESTING}: coarse_grained cannot wrap coarse_grained"
            )));
        }
        let mut type_name: Option<String> = None;
        let mut omega_deg: Option<f64> = None;
        let mut n: Option<usize> = None;
        let mut inner: Option<DeviceSpecDocument> = None;
        let mut seen: Vec<String> = Vec::new();

        while let Some(key) = map.next_key::<String>()? {
            if seen.contains(&key) {
                return Err(de::Error::custom(format!("duplicate field `{key}`")));
            }
            if !FIELD_NAMES.contains(&key.as_str()) {
                return Err(de::Error::custom(format!(
                    "unknown field `{key}` (expected type, omega_deg, n or inner)"
                )));
            }
            if let Some(t) = &type_name {
                if !allowed_fields(t).contains(&key.as_str()) && key != "type" {
                    return Err(disallowed(&key, t));
                }
            }
            match key.as_str() {
                "type" => {
                    let TypeTag(t) = map.next_value()?;
                    if let Some(extra) = seen
                        .iter()
                        .find(|k| !allowed_fields(&t).contains(&k.as_str()))
                    {
                        return Err(disallowed(extra, &t));
                    }
                    type_name = Some(t);
                }
                "omega_deg" => {
                    let v: f64 = map.next_value()?;
                    if !v.is_finite() {
                        return Err(de::Error::custom("omega_deg must be finite"));
                    }
                    omega_deg = Some(v);
                }
                "n" => {
                    let CascadeLength(v) = map.next_value()?;
                    n = Some(v);
                }
                "inner" => {
                    inner = Some(map.next_value_seed(DocSeed {
                        depth: self.depth + 1,
                    })?);
                }
                _ => unreachable!("checked against FIELD_NAMES"),
            }
            seen.push(key);
        }

        let type_name = type_name.ok_or_else(|| de::Error::missing_field("type"))?;
        let omega = || omega_deg.ok_or_else(|| de::Error::missing_field("omega_deg"));
        Ok(match type_name.as_str() {
            "pbs" => DeviceSpecDocument::Pbs {
                omega_deg: omega()?,
            },
            "ideal_michalski" => DeviceSpecDocument::IdealMichalski {
                omega_deg: omega()?,
            },
            "simplified_analyzer" => DeviceSpecDocument::SimplifiedAnalyzer {
                omega_deg: omega()?,
            },
            "zeno_cascade" => DeviceSpecDocument::ZenoCascade {
                omega_deg: omega()?,
                n: n.ok_or_else(|| de::Error::missing_field("n"))?,
            },
            _ => DeviceSpecDocument::CoarseGrained {
                inner: Box::new(inner.ok_or_else(|| de::Error::missing_field("inner"))?),
            },
        })
    }
}

/// Parses and validates one device description.
pub fn parse_device_spec(text: &str) -> Result<DeviceSpecDocument, SpecError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let doc = DocSeed { depth: 1 }.deserialize(&mut de)?;
    de.end()?;
    Ok(doc)
}
