//! Binary container for named complex matrices.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic   8 bytes   b"YDOFMAT1"
//! count   u32       number of matrices
//! repeated `count` times:
//!   name_len u32, name (UTF-8, name_len bytes)
//!   rows u32, cols u32
//!   rows*cols entries, row-major, each as (re: f64, im: f64)
//! ```

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::CMat;

pub const MAGIC: &[u8; 8] = b"YDOFMAT1";

pub fn write_matrices<W: Write>(mut w: W, mats: &[(String, &CMat)]) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&(mats.len() as u32).to_le_bytes())?;
    for (name, m) in mats {
        w.write_all(&(name.len() as u32).to_le_bytes())?;
        w.write_all(name.as_bytes())?;
        w.write_all(&(m.nrows() as u32).to_le_bytes())?;
        w.write_all(&(m.ncols() as u32).to_le_bytes())?;
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                let z = m[(r, c)];
                w.write_all(&z.re.to_le_bytes())?;
                w.write_all(&z.im.to_le_bytes())?;
            }
        }
    }
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)
        .map_err(|e| Error::Container(format!("truncated header: {e}")))?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)
        .map_err(|e| Error::Container(format!("truncated matrix data: {e}")))?;
    Ok(f64::from_le_bytes(b))
}

pub fn read_matrices<R: Read>(mut r: R) -> Result<Vec<(String, CMat)>> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)
        .map_err(|e| Error::Container(format!("missing magic: {e}")))?;
    if &magic != MAGIC {
        return Err(Error::Container("bad magic".into()));
    }
    let count = read_u32(&mut r)? as usize;
    let mut out = Vec::with_capacity(count.min(1024));
    for _ in 0..count {
        let len = read_u32(&mut r)? as usize;
        let mut name = vec![0u8; len];
        r.read_exact(&mut name)
            .map_err(|e| Error::Container(format!("truncated name: {e}")))?;
        let name = String::from_utf8(name).map_err(|_| Error::Container("name is not UTF-8".into()))?;
        let rows = read_u32(&mut r)? as usize;
        let cols = read_u32(&mut r)? as usize;
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            let re = read_f64(&mut r)?;
            let im = read_f64(&mut r)?;
            data.push(Complex64::new(re, im));
        }
        out.push((name, CMat::from_row_slice(rows, cols, &data)));
    }
    Ok(out)
}

/// JSON form of a complex matrix: `{rows, cols, data}` with `data` the
/// row-major interleaved real/imaginary parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl From<&CMat> for JsonMatrix {
    fn from(m: &CMat) -> Self {
        let mut data = Vec::with_capacity(2 * m.len());
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                data.push(m[(r, c)].re);
                data.push(m[(r, c)].im);
            }
        }
        JsonMatrix { rows: m.nrows(), cols: m.ncols(), data }
    }
}

impl TryFrom<JsonMatrix> for CMat {
    type Error = Error;

    fn try_from(j: JsonMatrix) -> Result<CMat> {
        if j.data.len() != 2 * j.rows * j.cols {
            return Err(Error::Shape(format!(
                "{}x{} matrix needs {} values, got {}",
                j.rows,
                j.cols,
                2 * j.rows * j.cols,
                j.data.len()
            )));
        }
        let vals: Vec<Complex64> =
            j.data.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect();
        Ok(CMat::from_row_slice(j.rows, j.cols, &vals))
    }
}

/// Serde adapter storing a [`CMat`] as a [`JsonMatrix`].
pub mod serde_cmat {
    use super::*;

    pub fn serialize<S: Serializer>(m: &CMat, s: S) -> std::result::Result<S::Ok, S::Error> {
        JsonMatrix::from(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CMat, D::Error> {
        CMat::try_from(JsonMatrix::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for a list of matrices.
pub mod serde_cmat_vec {
    use super::*;


    pub fn serialize<S: Serializer>(v: &[CMat], s: S) -> std::result::Result<S::Ok, S::Error> {
        v.iter().map(JsonMatrix::from).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<CMat>, D::Error> {
        Vec::<JsonMatrix>::deserialize(d)?
            .into_iter()
            .map(|j| CMat::try_from(j).map_err(serde::de::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_cn;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn layout_is_row_major_interleaved() {
        let m = CMat::from_row_slice(
            1,
            2,
            &[Complex64::new(1.0, 2.0), Complex64::new(3.0, 4.0)],
        );
        let mut buf = Vec::new();
        write_matrices(&mut buf, &[("a".into(), &m)]).unwrap();
        assert_eq!(&buf[..8], MAGIC);
        assert_eq!(u32::from_le_bytes(buf[8..12].try_into().unwrap()), 1);
        let body = &buf[12 + 4 + 1 + 8..];
        let vals: Vec<f64> =
            body.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().unwrap())).collect();
        assert_eq!(vals, vec![1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn rejects_bad_magic_and_truncation() {
        assert!(read_matrices(&b"NOTMAGIC\0\0\0\0"[..]).is_err());
        let m = CMat::zeros(2, 2);
        let mut buf = Vec::new();
        write_matrices(&mut buf, &[("x".into(), &m)]).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(matches!(read_matrices(&buf[..]), Err(Error::Container(_))));
    }

    proptest! {
        #[test]
        fn roundtrip(rows in 0usize..5, cols in 0usize..5, seed in any::<u64>(), name in "[a-z/0-9.]{0,12}") {
            let m = random_cn(rows, cols, &mut ChaCha8Rng::seed_from_u64(seed));
            let mut buf = Vec::new();
            write_matrices(&mut buf, &[(name.clone(), &m)]).unwrap();
            let back = read_matrices(&buf[..]).unwrap();
            prop_assert_eq!(back.len(), 1);
            prop_assert_eq!(&back[0].0, &name);
            prop_assert_eq!(&back[0].1, &m);
            let json: CMat = JsonMatrix::from(&m).try_into().unwrap();
            prop_assert_eq!(json, m);
        }
    }
}
