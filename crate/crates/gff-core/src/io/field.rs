//! `FLD1` binary field format: magic `FLD1`, little-endian `u32` version = 1,
//! `u64` vertex count, `u64` seed, `u8` method tag, then the values as
//! little-endian IEEE-754 `f64` in vertex-id order. A text sidecar
//! (same basename, `.meta`) records provenance.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{GffError, Result};
use crate::sampler::{FieldSample, SampleMethod};

const MAGIC: &[u8; 4] = b"FLD1";
const VERSION: u32 = 1;

pub fn write_field(path: &Path, sample: &FieldSample) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(MAGIC)?;
    f.write_all(&VERSION.to_le_bytes())?;
    f.write_all(&(sample.values.len() as u64).to_le_bytes())?;
    f.write_all(&sample.seed.to_le_bytes())?;
    f.write_all(&[sample.method.tag()])?;
    let mut buf = Vec::with_capacity(sample.values.len() * 8);
    for v in &sample.values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    f.write_all(&buf)?;
    Ok(())
}

pub fn read_field(path: &Path) -> Result<FieldSample> {
    let mut f = std::fs::File::open(path)?;
    let mut magic = [0u8; 4];
    f.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(GffError::Format("not an FLD1 file".into()));
    }
    let mut u32buf = [0u8; 4];
    f.read_exact(&mut u32buf)?;
    let version = u32::from_le_bytes(u32buf);
    if version != VERSION {
        return Err(GffError::Format(format!(
            "unsupported FLD1 version {version}"
        )));
    }
    let mut u64buf = [0u8; 8];
    f.read_exact(&mut u64buf)?;
    let n = u64::from_le_bytes(u64buf) as usize;
    f.read_exact(&mut u64buf)?;
    let seed = u64::from_le_bytes(u64buf);
    let mut tag = [0u8; 1];
    f.read_exact(&mut tag)?;
    let method = SampleMethod::from_tag(tag[0])
        .ok_or_else(|| GffError::Format(format!("unknown method tag {}", tag[0])))?;
    let mut data = vec![0u8; n * 8];
    f.read_exact(&mut data)?;
    let values = data
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(FieldSample {
        values,
        seed,
        method,
    })
}

/// Sidecar metadata, written as `key = value` lines next to the field file.
#[derive(Debug, Clone, Default)]
pub struct FieldMeta {
    pub graph: String,
    pub method: String,
    pub params: Vec<(String, String)>,
}

pub fn write_field_meta(field_path: &Path, meta: &FieldMeta) -> Result<PathBuf> {
    let meta_path = field_path.with_extension("meta");
    let mut out = String::new();
    out.push_str(&format!("graph = {}\n", meta.graph));
    out.push_str(&format!("method = {}\n", meta.method));
    for (k, v) in &meta.params {
        out.push_str(&format!("{k} = {v}\n"));
    }
    std::fs::write(&meta_path, out)?;
    Ok(meta_path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn field_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.fld");
        let sample = FieldSample {
            values: vec![0.5, -1.25, 3.0e-7, 0.0],
            seed: 99,
            method: SampleMethod::Fft,
        };
        write_field(&path, &sample).unwrap();
        let back = read_field(&path).unwrap();
        assert_eq!(back.values, sample.values);
        assert_eq!(back.seed, 99);
        assert_eq!(back.method, SampleMethod::Fft);
    }

    #[test]
    fn bad_magic_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.fld");
        std::fs::write(&path, b"NOTF00").unwrap();
        assert!(matches!(
            read_field(&path).unwrap_err(),
            GffError::Format(_)
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn arbitrary_fields_round_trip(
            values in proptest::collection::vec(-1e12f64..1e12, 0..64),
            seed in any::<u64>(),
            tag in 0u8..6,
        ) {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("p.fld");
            let sample = FieldSample {
                values,
                seed,
                method: SampleMethod::from_tag(tag).unwrap(),
            };
            write_field(&path, &sample).unwrap();
            let back = read_field(&path).unwrap();
            prop_assert_eq!(back.values, sample.values);
            prop_assert_eq!(back.seed, sample.seed);
            prop_assert_eq!(back.method.tag(), tag);
        }
    }
}
