//! Binary field files: raw little-endian values with a JSON sidecar.
//!
//! `<stem>.bin` holds `components` blocks back to back; each block is a
//! row-major array over `dims` with axis 0 slowest. Complex values are stored
//! as interleaved `(re, im)` pairs.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ScalarField, SpinorField, VectorField, C64};
use crate::grid::UniformGrid;

pub const FIELD_FORMAT: &str = "pauli-field";
pub const FIELD_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dtype {
    F64,
    C128,
}

impl Dtype {
    fn reals(self) -> usize {
        match self {
            Dtype::F64 => 1,
            Dtype::C128 => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldHeader {
    pub format: String,
    pub version: u32,
    pub dims: Vec<usize>,
    pub extents: Vec<f64>,
    pub dtype: Dtype,
    pub components: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hbar: Option<f64>,
    pub byte_order: String,
    pub layout: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl FieldHeader {
    pub fn new(
        dims: Vec<usize>,
        extents: Vec<f64>,
        dtype: Dtype,
        components: usize,
        hbar: Option<f64>,
    ) -> Self {
        Self {
            format: FIELD_FORMAT.into(),
            version: FIELD_VERSION,
            dims,
            extents,
            dtype,
            components,
            hbar,
            byte_order: "little".into(),
            layout: "components outermost, then row-major with axis 0 slowest".into(),
            name: None,
        }
    }

    pub fn for_grid(
        grid: &UniformGrid,
        dtype: Dtype,
        components: usize,
        hbar: Option<f64>,
    ) -> Self {
        let d = grid.dim();
        Self::new(
            grid.shape()[..d].to_vec(),
            grid.extents()[..d].to_vec(),
            dtype,
            components,
            hbar,
        )
    }

    /// Number of `f64` values in the payload.
    pub fn reals(&self) -> usize {
        self.dims.iter().product::<usize>() * self.components * self.dtype.reals()
    }

    fn check(&self) -> Result<()> {
        if self.format != FIELD_FORMAT || self.version != FIELD_VERSION {
            return Err(Error::Format(format!(
                "unsupported format {} v{}",
                self.format, self.version
            )));
        }
        if self.byte_order != "little" {
            return Err(Error::Format(format!(
                "unsupported byte order {}",
                self.byte_order
            )));
        }
        if self.dims.len() != self.extents.len() || self.dims.is_empty() || self.components == 0 {
            return Err(Error::Format(
                "dims, extents and components are inconsistent".into(),
            ));
        }
        Ok(())
    }

    /// Grid described by the header, when it is a position-space field.
    pub fn grid(&self) -> Result<UniformGrid> {
        UniformGrid::new(self.dims.len(), &self.dims, &self.extents)
    }
}

fn paths(stem: &Path) -> (PathBuf, PathBuf) {
    (stem.with_extension("bin"), stem.with_extension("json"))
}

/// Writes `<stem>.bin` and `<stem>.json`; returns both paths.
pub fn write_raw(stem: &Path, header: &FieldHeader, values: &[f64]) -> Result<(PathBuf, PathBuf)> {
    header.check()?;
    if values.len() != header.reals() {
        return Err(Error::Format(format!(
            "payload has {} values, header needs {}",
            values.len(),
            header.reals()
        )));
    }
    let (bin, json) = paths(stem);
    let mut bytes = Vec::with_capacity(values.len() * 8);
    for v in values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(&bin, bytes)?;
    fs::write(&json, serde_json::to_string_pretty(header)?)?;
    Ok((bin, json))
}

pub fn read_raw(stem: &Path) -> Result<(FieldHeader, Vec<f64>)> {
    let (bin, json) = paths(stem);
    let header: FieldHeader = serde_json::from_str(&fs::read_to_string(json)?)?;
    header.check()?;
    let bytes = fs::read(bin)?;
    if bytes.len() != header.reals() * 8 {
        return Err(Error::Format(format!(
            "payload has {} bytes, header needs {}",
            bytes.len(),
            header.reals() * 8
        )));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    Ok((header, values))
}

fn interleave(blocks: &[&[C64]]) -> Vec<f64> {
    blocks
        .iter()
        .flat_map(|b| b.iter().flat_map(|z| [z.re, z.im]))
        .collect()
}

pub fn write_scalar(stem: &Path, f: &ScalarField, hbar: Option<f64>) -> Result<(PathBuf, PathBuf)> {
    write_raw(
        stem,
        &FieldHeader::for_grid(f.grid(), Dtype::F64, 1, hbar),
        f.values(),
    )
}

pub fn write_vector(stem: &Path, f: &VectorField, hbar: Option<f64>) -> Result<(PathBuf, PathBuf)> {
    let values: Vec<f64> = (0..3)
        .flat_map(|c| f.component(c).iter().copied())
        .collect();
    write_raw(
        stem,
        &FieldHeader::for_grid(f.grid(), Dtype::F64, 3, hbar),
        &values,
    )
}

pub fn write_spinor(stem: &Path, f: &SpinorField, hbar: Option<f64>) -> Result<(PathBuf, PathBuf)> {
    let values = interleave(&[f.component(0), f.component(1)]);
    write_raw(
        stem,
        &FieldHeader::for_grid(f.grid(), Dtype::C128, 2, hbar),
        &values,
    )
}

fn expect(header: &FieldHeader, dtype: Dtype, components: usize) -> Result<UniformGrid> {
    if header.dtype != dtype || header.components != components {
        return Err(Error::Format(format!(
            "expected {components} {dtype:?} components, found {} {:?}",
            header.components, header.dtype
        )));
    }
    header.grid()
}

pub fn read_scalar(stem: &Path) -> Result<(ScalarField, Option<f64>)> {
    let (h, v) = read_raw(stem)?;
    let grid = expect(&h, Dtype::F64, 1)?;
    Ok((ScalarField::new(grid, v)?, h.hbar))
}

pub fn read_vector(stem: &Path) -> Result<(VectorField, Option<f64>)> {
    let (h, v) = read_raw(stem)?;
    let grid = expect(&h, Dtype::F64, 3)?;
    let n = grid.len();
    let comps = [v[..n].to_vec(), v[n..2 * n].to_vec(), v[2 * n..].to_vec()];
    Ok((VectorField::new(grid, comps)?, h.hbar))
}

pub fn read_spinor(stem: &Path) -> Result<(SpinorField, Option<f64>)> {
    let (h, v) = read_raw(stem)?;
    let grid = expect(&h, Dtype::C128, 2)?;
    let z: Vec<C64> = v.chunks_exact(2).map(|c| C64::new(c[0], c[1])).collect();
    let n = grid.len();
    Ok((
        SpinorField::new(grid, z[..n].to_vec(), z[n..].to_vec())?,
        h.hbar,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spinor_round_trip_is_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let g = UniformGrid::new(2, &[4, 8], &[2.0, 3.0]).unwrap();
        let up: Vec<C64> = (0..32)
            .map(|i| C64::new(i as f64 * 0.1, -1.0 / (i as f64 + 1.0)))
            .collect();
        let down: Vec<C64> = (0..32).map(|i| C64::new((i as f64).sin(), 0.5)).collect();
        let psi = SpinorField::new(g, up, down).unwrap();
        let stem = dir.path().join("psi");
        write_spinor(&stem, &psi, Some(0.25)).unwrap();
        let (back, hbar) = read_spinor(&stem).unwrap();
        assert_eq!(back, psi);
        assert_eq!(hbar, Some(0.25));
        let bytes = std::fs::read(stem.with_extension("bin")).unwrap();
        assert_eq!(bytes.len(), 2 * 32 * 16);
        // Second value is Im(up[0]).
        assert_eq!(f64::from_le_bytes(bytes[8..16].try_into().unwrap()), -1.0);
    }

    #[test]
    fn row_major_axis_zero_slowest() {
        let dir = tempfile::tempdir().unwrap();
        let g = UniformGrid::new(2, &[2, 4], &[1.0, 1.0]).unwrap();
        let f = ScalarField::new(g, (0..8).map(|i| i as f64).collect()).unwrap();
        let stem = dir.path().join("rho");
        write_scalar(&stem, &f, None).unwrap();
        let (h, v) = read_raw(&stem).unwrap();
        assert_eq!(h.dims, vec![2, 4]);
        // Entry (i0, i1) sits at i0 * 4 + i1.
        assert_eq!(v[4 + 3], f.values()[g.index([1, 3, 0])]);
        let (back, _) = read_scalar(&stem).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn truncated_payload_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let g = UniformGrid::cubic(1, 8, 1.0).unwrap();
        let stem = dir.path().join("v");
        write_scalar(&stem, &ScalarField::zeros(g), Some(1.0)).unwrap();
        std::fs::write(stem.with_extension("bin"), [0u8; 10]).unwrap();
        assert!(matches!(read_scalar(&stem), Err(Error::Format(_))));
        assert!(read_vector(&stem).is_err());
    }
}
