//! Named gauge-field presets.

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::gauge::GaugeField;
use crate::grid::UniformGrid;

#[derive(Debug, Clone, PartialEq)]
pub enum GaugePreset {
    Zero,
    /// `A = (-b0 y, 0, 0)`, `B = (0, 0, b0)`.
    UniformBLandau {
        b0: f64,
    },
    /// `A = (b0/2)(-y, x, 0)`, `B = (0, 0, b0)`.
    UniformBSymmetric {
        b0: f64,
    },
    UserTable {
        a: VectorField,
        v_ext: Option<ScalarField>,
    },
}

impl GaugePreset {
    /// Builds a preset from its tag name and scalar parameters.
    pub fn from_tag(tag: &str, b0: Option<f64>) -> Result<Self> {
        match tag {
            "zero" => Ok(Self::Zero),
            "uniform_b_landau" => Ok(Self::UniformBLandau {
                b0: b0.ok_or_else(|| Error::Config("uniform_b_landau needs b0".into()))?,
            }),
            "uniform_b_symmetric" => Ok(Self::UniformBSymmetric {
                b0: b0.ok_or_else(|| Error::Config("uniform_b_symmetric needs b0".into()))?,
            }),
            "user_table" => Err(Error::Config(
                "user_table presets are built from field files".into(),
            )),
            other => Err(Error::Config(format!("unknown gauge preset `{other}`"))),
        }
    }
}

pub fn gauge_preset(grid: &UniformGrid, preset: &GaugePreset) -> Result<GaugeField> {
    match preset {
        GaugePreset::Zero => Ok(GaugeField::zero(*grid)),
        GaugePreset::UniformBLandau { b0 } => {
            if !b0.is_finite() {
                return Err(Error::Config("b0 must be finite".into()));
            }
            GaugeField::uniform_b_landau(*grid, *b0)
        }
        GaugePreset::UniformBSymmetric { b0 } => {
            if !b0.is_finite() {
                return Err(Error::Config("b0 must be finite".into()));
            }
            GaugeField::uniform_b_symmetric(*grid, *b0)
        }
        GaugePreset::UserTable { a, v_ext } => {
            grid.ensure_same(a.grid())?;
            let v = v_ext.clone().unwrap_or_else(|| ScalarField::zeros(*grid));
            GaugeField::from_table(a.clone(), v)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_tag_rejected() {
        assert!(GaugePreset::from_tag("dipole", None).is_err());
        assert!(GaugePreset::from_tag("uniform_b_landau", None).is_err());
        assert_eq!(
            GaugePreset::from_tag("zero", None).unwrap(),
            GaugePreset::Zero
        );
    }

    #[test]
    fn landau_curl_oracle() {
        let g = UniformGrid::cubic(3, 8, 2.0).unwrap();
        let gf = gauge_preset(&g, &GaugePreset::UniformBLandau { b0: 1.0 }).unwrap();
        for i in 0..g.len() {
            assert_eq!(gf.b().at(i), [0.0, 0.0, 1.0]);
        }
        let sym = gauge_preset(&g, &GaugePreset::UniformBSymmetric { b0: 2.0 }).unwrap();
        assert!(sym.is_splitting_compatible());
        for i in 0..g.len() {
            assert!((sym.b().at(i)[2] - 2.0).abs() < 1e-12);
        }
    }
}
