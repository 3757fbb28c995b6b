//! Little-endian binary formats.
//!
//! | file  | layout |
//! |-------|--------|
//! | T3DX  | magic, u32 version, u32 order, u32 dims[order], f64 entries (row-major) |
//! | CMPX  | magic, u32 version, u32 d, u32 n, then n vectors of d f64 |
//! | EIGX  | magic, u32 version, u32 rows, u32 k, f64 eigenvalues[k], f64 U (column-major) |

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::tensor::{ComponentSet, Tensor3};

const VERSION: u32 = 1;

fn put_u32(w: &mut impl Write, x: u32) -> Result<()> {
    w.write_all(&x.to_le_bytes())?;
    Ok(())
}

fn put_f64s<'a>(w: &mut impl Write, xs: impl IntoIterator<Item = &'a f64>) -> Result<()> {
    for x in xs {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

fn get_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn get_f64s(r: &mut impl Read, n: usize) -> Result<Vec<f64>> {
    let mut buf = vec![0u8; n * 8];
    r.read_exact(&mut buf)?;
    Ok(buf.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
}

fn header(r: &mut impl Read, magic: &[u8; 4]) -> Result<()> {
    let mut m = [0u8; 4];
    r.read_exact(&mut m)?;
    if &m != magic {
        return Err(Error::Format(format!(
            "expected magic {:?}, found {:?}",
            String::from_utf8_lossy(magic),
            String::from_utf8_lossy(&m)
        )));
    }
    let v = get_u32(r)?;
    if v != VERSION {
        return Err(Error::Format(format!("unsupported version {v}")));
    }
    Ok(())
}

fn ensure_eof(r: &mut impl Read) -> Result<()> {
    let mut b = [0u8; 1];
    match r.read(&mut b)? {
        0 => Ok(()),
        _ => Err(Error::Format("trailing bytes after payload".into())),
    }
}

pub fn write_tensor(w: &mut impl Write, t: &Tensor3) -> Result<()> {
    w.write_all(b"T3DX")?;
    put_u32(w, VERSION)?;
    put_u32(w, 3)?;
    for _ in 0..3 {
        put_u32(w, t.dim() as u32)?;
    }
    put_f64s(w, t.as_slice())
}

pub fn read_tensor(r: &mut impl Read) -> Result<Tensor3> {
    header(r, b"T3DX")?;
    let order = get_u32(r)?;
    if order != 3 {
        return Err(Error::Format(format!("expected an order-3 tensor, found order {order}")));
    }
    let dims = [get_u32(r)?, get_u32(r)?, get_u32(r)?];
    if dims[0] != dims[1] || dims[1] != dims[2] {
        return Err(Error::Format(format!("non-cubical dimensions {dims:?}")));
    }
    let d = dims[0] as usize;
    let data = get_f64s(r, d * d * d)?;
    ensure_eof(r)?;
    Tensor3::from_vec(d, data)
}

pub fn write_components(w: &mut impl Write, c: &ComponentSet) -> Result<()> {
    w.write_all(b"CMPX")?;
    put_u32(w, VERSION)?;
    put_u32(w, c.dim() as u32)?;
    put_u32(w, c.len() as u32)?;
    // column-major storage already lays the vectors out one after another
    put_f64s(w, c.as_matrix().as_slice())
}

pub fn read_components(r: &mut impl Read) -> Result<ComponentSet> {
    header(r, b"CMPX")?;
    let d = get_u32(r)? as usize;
    let n = get_u32(r)? as usize;
    let data = get_f64s(r, d * n)?;
    ensure_eof(r)?;
    if d == 0 {
        return Err(Error::Format("component dimension is zero".into()));
    }
    ComponentSet::from_matrix(DMatrix::from_vec(d, n, data))
}

/// Eigenvectors (as columns of `u`) and their eigenvalues.
pub fn write_eigx(w: &mut impl Write, eigvals: &DVector<f64>, u: &DMatrix<f64>) -> Result<()> {
    if eigvals.len() != u.ncols() {
        return Err(Error::Shape(format!("{} eigenvalues for {} vectors", eigvals.len(), u.ncols())));
    }
    w.write_all(b"EIGX")?;
    put_u32(w, VERSION)?;
    put_u32(w, u.nrows() as u32)?;
    put_u32(w, u.ncols() as u32)?;
    put_f64s(w, eigvals.as_slice())?;
    put_f64s(w, u.as_slice())
}

pub fn read_eigx(r: &mut impl Read) -> Result<(DVector<f64>, DMatrix<f64>)> {
    header(r, b"EIGX")?;
    let rows = get_u32(r)? as usize;
    let k = get_u32(r)? as usize;
    let vals = DVector::from_vec(get_f64s(r, k)?);
    let u = DMatrix::from_vec(rows, k, get_f64s(r, rows * k)?);
    ensure_eof(r)?;
    Ok((vals, u))
}

pub fn save_tensor(path: impl AsRef<Path>, t: &Tensor3) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_tensor(&mut w, t)?;
    w.flush()?;
    Ok(())
}

pub fn load_tensor(path: impl AsRef<Path>) -> Result<Tensor3> {
    read_tensor(&mut BufReader::new(File::open(path)?))
}

pub fn save_components(path: impl AsRef<Path>, c: &ComponentSet) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_components(&mut w, c)?;
    w.flush()?;
    Ok(())
}

pub fn load_components(path: impl AsRef<Path>) -> Result<ComponentSet> {
    read_components(&mut BufReader::new(File::open(path)?))
}

pub fn save_eigx(path: impl AsRef<Path>, eigvals: &DVector<f64>, u: &DMatrix<f64>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_eigx(&mut w, eigvals, u)?;
    w.flush()?;
    Ok(())
}

pub fn load_eigx(path: impl AsRef<Path>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    read_eigx(&mut BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::build_symmetric_tensor;

    #[test]
    fn tensor_roundtrip_is_bit_exact() {
        let c = ComponentSet::from_matrix(DMatrix::from_fn(3, 2, |i, j| (i as f64 + 1.0) / (j as f64 + 3.0))).unwrap();
        let t = build_symmetric_tensor(&c).unwrap();
        let mut buf = Vec::new();
        write_tensor(&mut buf, &t).unwrap();
        assert_eq!(&buf[..4], b"T3DX");
        assert_eq!(buf.len(), 4 + 4 + 4 + 12 + 27 * 8);
        assert_eq!(read_tensor(&mut buf.as_slice()).unwrap(), t);

        let mut cb = Vec::new();
        write_components(&mut cb, &c).unwrap();
        assert_eq!(read_components(&mut cb.as_slice()).unwrap(), c);
    }

    #[test]
    fn bad_magic_and_truncation() {
        let mut buf = b"XXXX".to_vec();
        buf.extend_from_slice(&1u32.to_le_bytes());
        assert!(matches!(read_tensor(&mut buf.as_slice()), Err(Error::Format(_))));

        let c = ComponentSet::from_matrix(DMatrix::identity(2, 2)).unwrap();
        let mut cb = Vec::new();
        write_components(&mut cb, &c).unwrap();
        cb.pop();
        assert!(read_components(&mut cb.as_slice()).is_err());
    }

    #[test]
    fn eigx_roundtrip() {
        let u = DMatrix::from_fn(8, 2, |i, j| (i * 2 + j) as f64);
        let vals = DVector::from_vec(vec![2.0, -1.5]);
        let mut buf = Vec::new();
        write_eigx(&mut buf, &vals, &u).unwrap();
        let (v2, u2) = read_eigx(&mut buf.as_slice()).unwrap();
        assert_eq!((v2, u2), (vals, u));
    }
}
