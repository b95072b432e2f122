//! Binary cache for partition tables. The layout is documented in `docs/partition-cache.md`.
//!
//! All integers and reals are little-endian.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::base::density::Density;
use crate::error::{Error, Result};

use super::table::{PartitionTable, TableRow};

pub const MAGIC: &[u8; 8] = b"CHLBPTAB";
pub const VERSION: u32 = 1;
/// Environment variable naming the cache directory.
pub const CACHE_ENV: &str = "CHAOSLAB_CACHE_DIR";

/// Cache directory from the environment, falling back to a temp subdirectory.
pub fn cache_dir() -> PathBuf {
    std::env::var_os(CACHE_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("chaoslab-cache"))
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ *b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// File name keyed by (density, u spacing, max_N).
pub fn cache_key(f: &Density, du: f64, max_n: usize) -> String {
    let json = serde_json::to_string(f).expect("densities serialize");
    let key = format!("{json}|{:016x}|{max_n}", du.to_bits());
    format!("partition-{:016x}.bin", fnv1a(key.as_bytes()))
}

pub fn encode(t: &PartitionTable) -> Vec<u8> {
    let json = serde_json::to_vec(&t.density).expect("densities serialize");
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    out.extend_from_slice(&(t.max_n as u64).to_le_bytes());
    for x in [t.du, t.e, t.sigma] {
        out.extend_from_slice(&x.to_le_bytes());
    }
    for row in &t.rows {
        out.extend_from_slice(&(row.stride as u64).to_le_bytes());
        out.extend_from_slice(&(row.log_zp.len() as u64).to_le_bytes());
        for x in &row.log_zp {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.data.len());
        let end = end.ok_or_else(|| Error::Cache(format!("truncated at byte {}", self.pos)))?;
        let s = &self.data[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn decode(data: &[u8]) -> Result<PartitionTable> {
    let mut c = Cursor { data, pos: 0 };
    if c.take(8)? != MAGIC {
        return Err(Error::Cache("bad magic".into()));
    }
    let version = c.u32()?;
    if version != VERSION {
        return Err(Error::Cache(format!("unsupported version {version}")));
    }
    let len = c.u32()? as usize;
    let density: Density =
        serde_json::from_slice(c.take(len)?).map_err(|e| Error::Cache(format!("density header: {e}")))?;
    let max_n = c.u64()? as usize;
    let (du, e, sigma) = (c.f64()?, c.f64()?, c.f64()?);
    if max_n < 2 {
        return Err(Error::Cache(format!("max_N = {max_n}")));
    }
    let mut rows = Vec::with_capacity(max_n - 1);
    for _ in 2..=max_n {
        let stride = c.u64()? as usize;
        let n = c.u64()? as usize;
        if stride == 0 || n > data.len() / 8 {
            return Err(Error::Cache("corrupt row header".into()));
        }
        let log_zp = (0..n).map(|_| c.f64()).collect::<Result<Vec<_>>>()?;
        rows.push(TableRow { stride, log_zp });
    }
    if c.pos != data.len() {
        return Err(Error::Cache(format!("{} trailing bytes", data.len() - c.pos)));
    }
    Ok(PartitionTable { density, max_n, du, e, sigma, rows })
}

pub fn save(t: &PartitionTable, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("tmp");
    fs::File::create(&tmp)?.write_all(&encode(t))?;
    fs::rename(tmp, path)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<PartitionTable> {
    let mut buf = Vec::new();
    fs::File::open(path)?.read_to_end(&mut buf)?;
    decode(&buf)
}

/// Loads the table for `(f, du, max_n)` from `dir`, building and storing it on a miss.
pub fn load_or_build(f: &Density, max_n: usize, du: f64, dir: &Path) -> Result<PartitionTable> {
    let path = dir.join(cache_key(f, du, max_n));
    if path.exists() {
        if let Ok(t) = load(&path) {
            if &t.density == f && t.max_n == max_n && t.du == du {
                return Ok(t);
            }
        }
    }
    let t = PartitionTable::build_with(f, max_n, du)?;
    save(&t, &path)?;
    Ok(t)
}

/// Removes cached tables from `dir`; returns how many files were deleted.
pub fn clear(dir: &Path) -> Result<usize> {
    if !dir.exists() {
        return Ok(0);
    }
    let mut n = 0;
    for entry in fs::read_dir(dir)? {
        let p = entry?.path();
        let name = p.file_name().and_then(|s| s.to_str()).unwrap_or("");
        if name.starts_with("partition-") && name.ends_with(".bin") {
            fs::remove_file(&p)?;
            n += 1;
        }
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let t = PartitionTable::build(&Density::bimodal(), 12).unwrap();
        let bytes = encode(&t);
        let back = decode(&bytes).unwrap();
        assert_eq!(back.rows.len(), t.rows.len());
        for (a, b) in back.rows.iter().zip(&t.rows) {
            assert_eq!(a.stride, b.stride);
            assert!(a.log_zp.iter().zip(&b.log_zp).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
        assert!(decode(&bytes[..bytes.len() - 3]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(decode(&bad), Err(Error::Cache(_))));
    }

    #[test]
    fn keys_differ_by_parameters() {
        let g = Density::standard_gaussian();
        assert_ne!(cache_key(&g, 0.0625, 10), cache_key(&g, 0.0625, 11));
        assert_ne!(cache_key(&g, 0.0625, 10), cache_key(&Density::bimodal(), 0.0625, 10));
    }

    #[test]
    fn load_or_build_uses_directory() {
        let dir = std::env::temp_dir().join(format!("chaoslab-test-{}", std::process::id()));
        let g = Density::standard_gaussian();
        let a = load_or_build(&g, 8, 0.0625, &dir).unwrap();
        let b = load_or_build(&g, 8, 0.0625, &dir).unwrap();
        assert_eq!(a, b);
        assert_eq!(clear(&dir).unwrap(), 1);
        let _ = fs::remove_dir_all(&dir);
    }
}
