//! Matrix literal format shared by every config and report: a JSON array of
//! rows, each row an array of `[re, im]` pairs. Bare numbers are accepted as
//! real entries when reading.

use num_complex::Complex64;
use serde::de::{self, Deserializer};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::linalg::ComplexMatrix;

#[derive(Deserialize)]
#[serde(untagged)]
enum Entry {
    Pair([f64; 2]),
    Real(f64),
}

impl From<Entry> for Complex64 {
    fn from(e: Entry) -> Self {
        match e {
            Entry::Pair([re, im]) => Complex64::new(re, im),
            Entry::Real(re) => Complex64::new(re, 0.0),
        }
    }
}

struct Row<'a>(&'a [Complex64]);

impl Serialize for Row<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.0.len()))?;
        for z in self.0 {
            seq.serialize_element(&[z.re, z.im])?;
        }
        seq.end()
    }
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let cols = self.cols();
        let mut seq = s.serialize_seq(Some(self.rows()))?;
        for row in self.as_slice().chunks(cols) {
            seq.serialize_element(&Row(row))?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows: Vec<Vec<Entry>> = Vec::deserialize(d)?;
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(de::Error::custom("matrix rows have different lengths"));
        }
        let data = rows.into_iter().flatten().map(Complex64::from).collect();
        ComplexMatrix::from_vec(r, c, data).map_err(de::Error::custom)
    }
}

pub fn to_json(m: &ComplexMatrix) -> serde_json::Value {
    serde_json::to_value(m).expect("matrix serialization is infallible")
}

pub fn from_json(v: &serde_json::Value) -> crate::Result<ComplexMatrix> {
    Ok(ComplexMatrix::deserialize(v)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c64;

    #[test]
    fn reads_pairs_and_reals() {
        let m: ComplexMatrix = serde_json::from_str("[[[1,0],[0,2]],[3,[0,-1]]]").unwrap();
        assert_eq!(m[(0, 1)], c64(0.0, 2.0));
        assert_eq!(m[(1, 0)], c64(3.0, 0.0));
        assert_eq!(m[(1, 1)], c64(0.0, -1.0));
    }

    #[test]
    fn writes_pairs() {
        let m = ComplexMatrix::from_vec(1, 2, vec![c64(1.5, 0.0), c64(0.0, -2.0)]).unwrap();
        assert_eq!(serde_json::to_string(&m).unwrap(), "[[[1.5,0.0],[0.0,-2.0]]]");
    }

    #[test]
    fn rejects_ragged() {
        assert!(serde_json::from_str::<ComplexMatrix>("[[1,2],[3]]").is_err());
        assert!(serde_json::from_str::<ComplexMatrix>("[]").is_err());
    }
}
