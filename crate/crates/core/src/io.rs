//! Small file helpers shared by the text formats.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// 17 significant digits; parses back to the identical `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn parse_f64(s: &str) -> Option<f64> {
    s.trim().parse().ok()
}

/// Exact bit pattern of a float as 16 hex digits.
pub fn hex_f64(x: f64) -> String {
    format!("{:016x}", x.to_bits())
}

pub fn unhex_f64(s: &str) -> Option<f64> {
    u64::from_str_radix(s.trim(), 16).ok().map(f64::from_bits)
}

pub fn hex_list(xs: &[f64]) -> String {
    xs.iter().map(|&x| hex_f64(x)).collect::<Vec<_>>().join(" ")
}

pub fn unhex_list(s: &str) -> Option<Vec<f64>> {
    s.split_whitespace().map(unhex_f64).collect()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn temp_sibling(path: &Path) -> PathBuf {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!(".{name}.tmp-{}", std::process::id()))
}

/// Writes `bytes` to a temporary sibling and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let tmp = temp_sibling(path);
    let res = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = res {
        let _ = fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    Ok(())
}

/// Populates a directory under a temporary name, then renames it into place.
/// An existing directory at `path` is replaced.
pub fn write_dir_atomic(path: &Path, fill: impl FnOnce(&Path) -> Result<()>) -> Result<()> {
    let tmp = temp_sibling(path);
    if tmp.exists() {
        fs::remove_dir_all(&tmp).map_err(|e| Error::io(&tmp, e))?;
    }
    fs::create_dir_all(&tmp).map_err(|e| Error::io(&tmp, e))?;
    if let Err(e) = fill(&tmp) {
        let _ = fs::remove_dir_all(&tmp);
        return Err(e);
    }
    if path.exists() {
        fs::remove_dir_all(path).map_err(|e| Error::io(path, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}
