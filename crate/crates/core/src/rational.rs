//! Exact rationals and their `"p/q"` string form.

use num_rational::Rational64;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

pub type Q = Rational64;

/// Parses `"p/q"` or a bare integer.
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let parsed: Q = s
        .parse()
        .map_err(|_| Error::InvalidTuple(format!("`{s}` is not a rational of the form p/q")))?;
    Ok(parsed)
}

/// Formats as `"p/q"`, always including the denominator.
pub fn format_q(q: &Q) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

pub fn is_nonnegative(q: &Q) -> bool {
    q.is_zero() || q.is_positive()
}

/// Serde adapter for a single rational as a `"p/q"` string.
pub mod serde_q {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_q(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Q, D::Error> {
        let s = String::deserialize(d)?;
        parse_q(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for a fixed array of six rationals.
pub mod serde_q6 {
    use super::*;
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(qs: &[Q; 6], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(6))?;
        for q in qs {
            seq.serialize_element(&format_q(q))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<[Q; 6], D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        if v.len() != 6 {
            return Err(serde::de::Error::invalid_length(v.len(), &"six rationals"));
        }
        let mut out = [Q::zero(); 6];
        for (slot, s) in out.iter_mut().zip(&v) {
            *slot = parse_q(s).map_err(serde::de::Error::custom)?;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_q("1/2").unwrap(), Q::new(1, 2));
        assert_eq!(parse_q(" 3 ").unwrap(), Q::from_integer(3));
        assert_eq!(parse_q("4/8").unwrap(), Q::new(1, 2));
        assert!(parse_q("0.5").is_err());
        assert!(parse_q("1/0").is_err());
    }

    #[test]
    fn format_always_has_denominator() {
        assert_eq!(format_q(&Q::from_integer(2)), "2/1");
        assert_eq!(format_q(&Q::new(-3, 6)), "-1/2");
    }
}
