//! Binary field files with JSON sidecars.
//!
//! Layout: a 64-byte header (`"SFLD"`, version `u32`, dim `u32`, `N u32`,
//! `L f64`, component count `u32`, zero padding), then each component's
//! samples as little-endian `f64` in row-major order. The sidecar
//! `<file>.json` repeats the grid parameters and carries a provenance string.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;

pub const MAGIC: &[u8; 4] = b"SFLD";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sidecar {
    pub version: u32,
    pub dim: usize,
    pub n: usize,
    pub half_width: f64,
    pub components: usize,
    pub provenance: String,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Writes the components (all on one grid) and the sidecar.
pub fn write_components(path: &Path, comps: &[&ScalarField], provenance: &str) -> Result<()> {
    let first = comps
        .first()
        .ok_or_else(|| Error::Format("nothing to write".into()))?;
    let g = *first.grid();
    for c in comps {
        first.check_same_grid(c)?;
    }
    let mut w = BufWriter::new(File::create(path)?);
    let mut header = Vec::with_capacity(HEADER_LEN);
    header.extend_from_slice(MAGIC);
    header.write_u32::<LittleEndian>(VERSION)?;
    header.write_u32::<LittleEndian>(g.dim() as u32)?;
    header.write_u32::<LittleEndian>(g.n() as u32)?;
    header.write_f64::<LittleEndian>(g.half_width())?;
    header.write_u32::<LittleEndian>(comps.len() as u32)?;
    header.resize(HEADER_LEN, 0);
    w.write_all(&header)?;
    for c in comps {
        for &v in c.values() {
            w.write_f64::<LittleEndian>(v)?;
        }
    }
    w.flush()?;
    let side = Sidecar {
        version: VERSION,
        dim: g.dim(),
        n: g.n(),
        half_width: g.half_width(),
        components: comps.len(),
        provenance: provenance.to_string(),
    };
    std::fs::write(sidecar_path(path), serde_json::to_string_pretty(&side)?)?;
    Ok(())
}

pub fn write_scalar(path: &Path, f: &ScalarField, provenance: &str) -> Result<()> {
    write_components(path, &[f], provenance)
}

pub fn write_vector(path: &Path, v: &VectorField, provenance: &str) -> Result<()> {
    let refs: Vec<&ScalarField> = v.components().iter().collect();
    write_components(path, &refs, provenance)
}

/// Reads every component; the sidecar is optional but must agree when present.
pub fn read_components(path: &Path) -> Result<(Vec<ScalarField>, Option<Sidecar>)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut header = [0u8; HEADER_LEN];
    r.read_exact(&mut header)?;
    if &header[0..4] != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let mut h = &header[4..];
    let version = h.read_u32::<LittleEndian>()?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let dim = h.read_u32::<LittleEndian>()? as usize;
    let n = h.read_u32::<LittleEndian>()? as usize;
    let half_width = h.read_f64::<LittleEndian>()?;
    let count = h.read_u32::<LittleEndian>()? as usize;
    let grid = Grid::new(dim, half_width, n)?;
    if count == 0 || count > 16 {
        return Err(Error::Format(format!("implausible component count {count}")));
    }
    let mut comps = Vec::with_capacity(count);
    for _ in 0..count {
        let mut vals = vec![0.0; grid.len()];
        r.read_f64_into::<LittleEndian>(&mut vals)
            .map_err(|e| Error::Format(format!("truncated payload: {e}")))?;
        comps.push(ScalarField::new(grid, vals)?);
    }
    let mut rest = Vec::new();
    r.read_to_end(&mut rest)?;
    if !rest.is_empty() {
        return Err(Error::Format(format!("{} trailing bytes", rest.len())));
    }
    let sp = sidecar_path(path);
    let side = if sp.exists() {
        let s: Sidecar = serde_json::from_str(&std::fs::read_to_string(&sp)?)?;
        if s.dim != dim || s.n != n || s.half_width != half_width || s.components != count {
            return Err(Error::Format("sidecar disagrees with header".into()));
        }
        Some(s)
    } else {
        None
    };
    Ok((comps, side))
}

pub fn read_scalar(path: &Path) -> Result<ScalarField> {
    let (mut c, _) = read_components(path)?;
    if c.len() != 1 {
        return Err(Error::Format(format!("expected 1 component, found {}", c.len())));
    }
    Ok(c.remove(0))
}

pub fn read_vector(path: &Path) -> Result<VectorField> {
    let (c, _) = read_components(path)?;
    VectorField::new(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_with_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("u.sfld");
        let g = Grid::new(2, 1.5, 16).unwrap();
        let v = VectorField::from_fn(g, |x| [x[0].sin(), x[1] * x[0], 0.0]);
        write_vector(&p, &v, "unit test").unwrap();
        assert_eq!(std::fs::metadata(&p).unwrap().len() as usize, 64 + 2 * 256 * 8);
        let (back, side) = read_components(&p).unwrap();
        assert_eq!(VectorField::new(back).unwrap(), v);
        assert_eq!(side.unwrap().provenance, "unit test");
    }

    #[test]
    fn rejects_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.sfld");
        let g = Grid::new(2, 1.0, 16).unwrap();
        write_scalar(&p, &ScalarField::constant(g, 2.0), "x").unwrap();
        let mut bytes = std::fs::read(&p).unwrap();
        bytes.truncate(100);
        std::fs::write(&p, &bytes).unwrap();
        assert!(read_scalar(&p).is_err());
        bytes[0] = b'X';
        std::fs::write(&p, &bytes).unwrap();
        assert!(matches!(read_scalar(&p), Err(Error::Format(_))));
    }
}
