use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// A tuning parameter that is either fixed by the caller or chosen by a data-driven rule.
///
/// Serializes as the string `"auto"` or as the bare value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(untagged)]
pub enum Tuning<T> {
    Fixed(T),
    #[default]
    #[serde(with = "auto_tag")]
    Auto,
}

impl<T: Copy> Tuning<T> {
    pub fn fixed(self) -> Option<T> {
        match self {
            Tuning::Fixed(v) => Some(v),
            Tuning::Auto => None,
        }
    }

    pub fn resolve(self, auto: impl FnOnce() -> T) -> T {
        match self {
            Tuning::Fixed(v) => v,
            Tuning::Auto => auto(),
        }
    }
}

impl<T: fmt::Display> fmt::Display for Tuning<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tuning::Fixed(v) => v.fmt(f),
            Tuning::Auto => f.write_str("auto"),
        }
    }
}

impl<T: FromStr> FromStr for Tuning<T>
where
    T::Err: fmt::Display,
{
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim().eq_ignore_ascii_case("auto") {
            Ok(Tuning::Auto)
        } else {
            s.trim()
                .parse()
                .map(Tuning::Fixed)
                .map_err(|e| format!("expected \"auto\" or a value: {e}"))
        }
    }
}

mod auto_tag {
    use serde::de::{self, Deserializer, Visitor};
    use serde::Serializer;
    use std::fmt;

    pub fn serialize<S: Serializer>(s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str("auto")
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(), D::Error> {
        struct AutoVisitor;
        impl Visitor<'_> for AutoVisitor {
            type Value = ();
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("the string \"auto\"")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<(), E> {
                if v.eq_ignore_ascii_case("auto") {
                    Ok(())
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }
        }
        d.deserialize_str(AutoVisitor)
    }
}
