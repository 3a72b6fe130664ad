//! Little-endian binary helpers shared by the cube, sample-store and
//! checkpoint formats.

use crate::{Error, Result};
use byteorder::{ReadBytesExt, WriteBytesExt, LE};
use std::io::{Read, Write};

pub(crate) fn write_magic<W: Write>(w: &mut W, magic: &[u8; 8], version: u16) -> Result<()> {
    w.write_all(magic)?;
    w.write_u16::<LE>(version)?;
    Ok(())
}

pub(crate) fn expect_magic<R: Read>(r: &mut R, magic: &[u8; 8], version: u16) -> Result<()> {
    let mut got = [0u8; 8];
    r.read_exact(&mut got)
        .map_err(|_| Error::format("file too short for magic header"))?;
    if &got != magic {
        return Err(Error::format(format!(
            "bad magic {:?}, expected {:?}",
            String::from_utf8_lossy(&got),
            String::from_utf8_lossy(magic)
        )));
    }
    let v = r.read_u16::<LE>()?;
    if v != version {
        return Err(Error::format(format!(
            "unsupported format version {v}, expected {version}"
        )));
    }
    Ok(())
}

pub(crate) fn write_str<W: Write>(w: &mut W, s: &str) -> Result<()> {
    w.write_u32::<LE>(s.len() as u32)?;
    w.write_all(s.as_bytes())?;
    Ok(())
}

pub(crate) fn read_str<R: Read>(r: &mut R) -> Result<String> {
    let len = r.read_u32::<LE>()? as usize;
    if len > 64 * 1024 * 1024 {
        return Err(Error::format(format!("unreasonable string length {len}")));
    }
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)
        .map_err(|_| Error::format("truncated string field"))?;
    String::from_utf8(buf).map_err(|_| Error::format("string field is not UTF-8"))
}

pub(crate) fn write_f64s<W: Write>(w: &mut W, xs: &[f64]) -> Result<()> {
    for &x in xs {
        w.write_f64::<LE>(x)?;
    }
    Ok(())
}

pub(crate) fn read_f64s<R: Read>(r: &mut R, n: usize) -> Result<Vec<f64>> {
    let mut out = vec![0.0; n];
    for slot in out.iter_mut() {
        *slot = r
            .read_f64::<LE>()
            .map_err(|_| Error::format("truncated f64 block"))?;
    }
    Ok(out)
}

pub(crate) fn expect_eof<R: Read>(r: &mut R) -> Result<()> {
    let mut probe = [0u8; 1];
    match r.read(&mut probe)? {
        0 => Ok(()),
        _ => Err(Error::format("trailing bytes after expected end of file")),
    }
}
