//! JSON encodings for complex matrices.
//!
//! A matrix is a row-major array of rows, each row an array of `[re, im]`
//! pairs. `serde_json` is built with `float_roundtrip`, so finite doubles
//! survive a write/read cycle bit for bit.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::linalg::{c, CMat};

pub type MatrixDoc = Vec<Vec<[f64; 2]>>;

pub fn to_doc(a: &CMat) -> MatrixDoc {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| [a[(i, j)].re, a[(i, j)].im]).collect())
        .collect()
}

pub fn from_doc(doc: &MatrixDoc) -> Result<CMat, String> {
    let rows = doc.len();
    let cols = doc.first().map_or(0, Vec::len);
    if doc.iter().any(|r| r.len() != cols) {
        return Err("ragged matrix rows".into());
    }
    let mut out = CMat::zeros(rows, cols);
    for (i, row) in doc.iter().enumerate() {
        for (j, z) in row.iter().enumerate() {
            out[(i, j)] = c(z[0], z[1]);
        }
    }
    Ok(out)
}

pub mod cmat {
    use super::*;

    pub fn serialize<S: Serializer>(a: &CMat, s: S) -> Result<S::Ok, S::Error> {
        to_doc(a).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMat, D::Error> {
        let doc = MatrixDoc::deserialize(d)?;
        from_doc(&doc).map_err(serde::de::Error::custom)
    }
}

pub mod cmat_vec {
    use super::*;

    pub fn serialize<S: Serializer>(a: &[CMat], s: S) -> Result<S::Ok, S::Error> {
        a.iter().map(to_doc).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<CMat>, D::Error> {
        let docs = Vec::<MatrixDoc>::deserialize(d)?;
        docs.iter()
            .map(|m| from_doc(m).map_err(serde::de::Error::custom))
            .collect()
    }
}
