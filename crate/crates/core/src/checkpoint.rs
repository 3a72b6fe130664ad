//! Shared checkpoint container: magic, version, a kind tag, a key=value
//! metadata block, then named shape-tagged f64 tensors. Neural and baseline
//! models all persist through this one format.

use crate::binio;
use crate::nn::tensor::Tensor;
use crate::{Error, Result};
use byteorder::{ReadBytesExt, WriteBytesExt, LE};
use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

const CKPT_MAGIC: &[u8; 8] = b"GRIDCKPT";
const CKPT_VERSION: u16 = 1;

/// Model kinds that may appear in a checkpoint's kind tag.
pub const MODEL_KINDS: [&str; 6] = ["tarpml", "lasso", "svr", "dtr", "arma", "havg"];

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub kind: String,
    pub meta: BTreeMap<String, String>,
    pub tensors: Vec<(String, Tensor)>,
}

impl Checkpoint {
    pub fn meta_parse<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        self.meta
            .get(key)
            .ok_or_else(|| Error::format(format!("checkpoint missing `{key}`")))?
            .parse()
            .map_err(|_| Error::format(format!("bad `{key}` in checkpoint")))
    }

    pub fn tensor(&self, name: &str) -> Result<&Tensor> {
        self.tensors
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t)
            .ok_or_else(|| Error::format(format!("checkpoint missing tensor `{name}`")))
    }
}

pub fn save(ckpt: &Checkpoint, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    binio::write_magic(&mut w, CKPT_MAGIC, CKPT_VERSION)?;
    binio::write_str(&mut w, &ckpt.kind)?;

    let meta_block: String = ckpt
        .meta
        .iter()
        .map(|(k, v)| format!("{k}={v}\n"))
        .collect();
    binio::write_str(&mut w, &meta_block)?;

    w.write_u32::<LE>(ckpt.tensors.len() as u32)?;
    for (name, t) in &ckpt.tensors {
        binio::write_str(&mut w, name)?;
        w.write_u8(t.shape().len() as u8)?;
        for &d in t.shape() {
            w.write_u32::<LE>(d as u32)?;
        }
        binio::write_f64s(&mut w, t.data())?;
    }
    w.flush()?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Checkpoint> {
    let mut r = BufReader::new(File::open(path)?);
    binio::expect_magic(&mut r, CKPT_MAGIC, CKPT_VERSION)?;
    let kind = binio::read_str(&mut r)?;
    if !MODEL_KINDS.contains(&kind.as_str()) {
        return Err(Error::format(format!("unknown checkpoint kind `{kind}`")));
    }

    let meta_block = binio::read_str(&mut r)?;
    let mut meta = BTreeMap::new();
    for line in meta_block.lines() {
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::format(format!("bad metadata line `{line}`")))?;
        meta.insert(k.to_string(), v.to_string());
    }

    let n_tensors = r.read_u32::<LE>()? as usize;
    let mut tensors = Vec::with_capacity(n_tensors);
    for _ in 0..n_tensors {
        let name = binio::read_str(&mut r)?;
        let ndim = r.read_u8()? as usize;
        if ndim == 0 || ndim > 4 {
            return Err(Error::format(format!("tensor `{name}` has bad rank {ndim}")));
        }
        let mut shape = Vec::with_capacity(ndim);
        let mut len = 1usize;
        for _ in 0..ndim {
            let d = r.read_u32::<LE>()? as usize;
            len = len
                .checked_mul(d)
                .ok_or_else(|| Error::format("tensor dimensions overflow"))?;
            shape.push(d);
        }
        let data = binio::read_f64s(&mut r, len)?;
        tensors.push((name, Tensor::from_vec(&shape, data)));
    }
    binio::expect_eof(&mut r)?;
    Ok(Checkpoint { kind, meta, tensors })
}
