//! Binary checkpoints.
//!
//! Layout, all little-endian: `"LDGQ"`, `u32` version, `u32` n_rho, `u32` n_z,
//! `f64` rho_max, `f64` z_max, `u8` half_plane, `u8` graded, then for graded
//! grids `f64` h_min, ratio, h_max and the ρ and z bands (`u32` count followed
//! by `f64` pairs), then `f64` ξ, one class byte per node and five `f64`
//! components per node, nodes ordered with z outer and ρ inner.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{build_grid, FieldArray, Grading, GridSpec, NodeClass};
use crate::qtensor::QComponents;

pub const MAGIC: &[u8; 4] = b"LDGQ";
pub const VERSION: u32 = 1;

pub fn encode(field: &FieldArray, xi: f64) -> Vec<u8> {
    let g = &field.grid;
    let s = &g.spec;
    let mut b = Vec::with_capacity(64 + g.len() * 41);
    b.extend_from_slice(MAGIC);
    b.extend_from_slice(&VERSION.to_le_bytes());
    b.extend_from_slice(&(g.n_rho() as u32).to_le_bytes());
    b.extend_from_slice(&(g.n_z() as u32).to_le_bytes());
    b.extend_from_slice(&s.rho_max.to_le_bytes());
    b.extend_from_slice(&s.z_max.to_le_bytes());
    b.push(s.half_plane as u8);
    b.push(s.grading.is_some() as u8);
    if let Some(gr) = &s.grading {
        for v in [gr.h_min, gr.ratio, gr.h_max] {
            b.extend_from_slice(&v.to_le_bytes());
        }
        for bands in [&gr.rho_bands, &gr.z_bands] {
            b.extend_from_slice(&(bands.len() as u32).to_le_bytes());
            for &(lo, hi) in bands.iter() {
                b.extend_from_slice(&lo.to_le_bytes());
                b.extend_from_slice(&hi.to_le_bytes());
            }
        }
    }
    b.extend_from_slice(&xi.to_le_bytes());
    b.extend(g.class.iter().map(|&c| c as u8));
    for q in &field.values {
        for v in q.0 {
            b.extend_from_slice(&v.to_le_bytes());
        }
    }
    b
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::Format {
                offset: self.pos as u64,
                message: format!("file ends while reading {what} ({} of {n} bytes left)", self.buf.len() - self.pos),
            });
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().expect("4 bytes")))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().expect("8 bytes")))
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn bad(&self, at: usize, message: String) -> Error {
        Error::Format { offset: at as u64, message }
    }
}

/// Decodes a checkpoint, rebuilding its grid; returns the field and ξ.
pub fn decode(buf: &[u8]) -> Result<(FieldArray, f64)> {
    let mut r = Reader { buf, pos: 0 };
    if r.take(4, "magic")? != MAGIC {
        return Err(r.bad(0, "missing LDGQ magic".into()));
    }
    let version = r.u32("version")?;
    if version != VERSION {
        return Err(Error::UnsupportedVersion { found: version, expected: VERSION });
    }
    let dims_at = r.pos;
    let n_rho = r.u32("n_rho")? as usize;
    let n_z = r.u32("n_z")? as usize;
    let rho_max = r.f64("rho_max")?;
    let z_max = r.f64("z_max")?;
    let half_plane = r.u8("half_plane flag")? != 0;
    let graded = r.u8("grading flag")? != 0;
    let grading = if graded {
        let h_min = r.f64("h_min")?;
        let ratio = r.f64("ratio")?;
        let h_max = r.f64("h_max")?;
        let mut bands = [Vec::new(), Vec::new()];
        for b in bands.iter_mut() {
            let at = r.pos;
            let n = r.u32("band count")? as usize;
            if n > 64 {
                return Err(r.bad(at, format!("implausible band count {n}")));
            }
            for _ in 0..n {
                b.push((r.f64("band")?, r.f64("band")?));
            }
        }
        let [rho_bands, z_bands] = bands;
        Some(Grading { h_min, ratio, h_max, rho_bands, z_bands })
    } else {
        None
    };
    let xi = r.f64("xi")?;
    let spec = GridSpec { rho_max, z_max, n_rho, n_z, grading, half_plane };
    let grid = build_grid(&spec).map_err(|e| r.bad(dims_at, format!("grid parameters rejected: {e}")))?;
    if grid.n_rho() != n_rho || grid.n_z() != n_z {
        return Err(r.bad(
            dims_at,
            format!("stored dimensions {n_rho}x{n_z} differ from the rebuilt grid {}x{}", grid.n_rho(), grid.n_z()),
        ));
    }
    let n = grid.len();
    let class_at = r.pos;
    let classes = r.take(n, "node classes")?;
    for (k, &c) in classes.iter().enumerate() {
        if NodeClass::from_u8(c) != Some(grid.class[k]) {
            return Err(r.bad(class_at + k, format!("node class {c} does not match the rebuilt grid")));
        }
    }
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        let mut q = [0.0; 5];
        for v in q.iter_mut() {
            *v = r.f64("field values")?;
        }
        values.push(QComponents(q));
    }
    if r.pos != buf.len() {
        return Err(r.bad(r.pos, format!("{} trailing bytes", buf.len() - r.pos)));
    }
    Ok((FieldArray { grid: Arc::new(grid), values }, xi))
}

pub fn write_checkpoint(field: &FieldArray, xi: f64, path: &Path) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(&encode(field, xi))?;
    f.sync_all()?;
    Ok(())
}

pub fn read_checkpoint(path: &Path) -> Result<(FieldArray, f64)> {
    decode(&std::fs::read(path)?)
}
