use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::gauge::GaugeField;
use crate::grid::UniformGrid;
use crate::wigner::TestFunction;

/// Largest phase-space array accepted (64^4 with headroom).
pub const VLASOV_POINT_BUDGET: usize = 1 << 25;

/// Reduced phase space: a periodic position grid and a momentum window of the
/// same dimension (1d1v or 2d2v). Values are stored with all position axes
/// slower than all momentum axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VlasovGrid {
    x: UniformGrid,
    p: UniformGrid,
}

impl VlasovGrid {
    pub fn new(x: UniformGrid, p: UniformGrid) -> Result<Self> {
        if x.dim() != p.dim() || !(1..=2).contains(&x.dim()) {
            return Err(Error::InvalidGrid(format!(
                "phase space must be 1d1v or 2d2v, got {}d{}v",
                x.dim(),
                p.dim()
            )));
        }
        for a in 0..x.dim() {
            if !x.is_periodic(a) {
                return Err(Error::NonPeriodicAxis(a));
            }
        }
        let total = x.len() as u128 * p.len() as u128;
        if total > VLASOV_POINT_BUDGET as u128 {
            return Err(Error::Budget {
                requested: total,
                budget: VLASOV_POINT_BUDGET as u128,
            });
        }
        Ok(Self { x, p })
    }

    pub fn x(&self) -> &UniformGrid {
        &self.x
    }

    pub fn p(&self) -> &UniformGrid {
        &self.p
    }

    pub fn dim(&self) -> usize {
        self.x.dim()
    }

    pub fn len(&self) -> usize {
        self.x.len() * self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Active axis sizes, position axes first.
    pub fn shape(&self) -> Vec<usize> {
        let d = self.dim();
        (0..d)
            .map(|a| self.x.points(a))
            .chain((0..d).map(|a| self.p.points(a)))
            .collect()
    }

    pub fn cell_volume(&self) -> f64 {
        self.x.cell_volume() * self.p.cell_volume()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceDensity {
    grid: VlasovGrid,
    values: Vec<f64>,
}

impl PhaseSpaceDensity {
    pub fn new(grid: VlasovGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidField(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidField("non-finite phase-space value".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: VlasovGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn(grid: VlasovGrid, f: impl Fn([f64; 3], [f64; 3]) -> f64 + Sync) -> Self {
        let np = grid.p.len();
        let mut values = vec![0.0; grid.len()];
        values.par_chunks_mut(np).enumerate().for_each(|(ix, row)| {
            let x = grid.x.position(ix);
            for (ip, v) in row.iter_mut().enumerate() {
                *v = f(x, grid.p.position(ip));
            }
        });
        Self { grid, values }
    }

    pub fn grid(&self) -> &VlasovGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum::<f64>() * self.grid.cell_volume()
    }

    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }

    /// `rho(x) = int f dp`.
    pub fn density(&self) -> ScalarField {
        let np = self.grid.p.len();
        let dp = self.grid.p.cell_volume();
        let rho = self
            .values
            .par_chunks(np)
            .map(|row| row.iter().sum::<f64>() * dp)
            .collect();
        ScalarField::new(self.grid.x, rho).expect("density length")
    }

    /// `J(x) = int p f dp`.
    pub fn current(&self) -> VectorField {
        let g = self.grid;
        let np = g.p.len();
        let dp = g.p.cell_volume();
        let rows: Vec<[f64; 3]> = self
            .values
            .par_chunks(np)
            .map(|row| {
                let mut j = [0.0; 3];
                for (ip, v) in row.iter().enumerate() {
                    let p = g.p.position(ip);
                    for a in 0..g.dim() {
                        j[a] += p[a] * v * dp;
                    }
                }
                j
            })
            .collect();
        let comps = [0, 1, 2].map(|a| rows.iter().map(|j| j[a]).collect());
        VectorField::new(g.x, comps).expect("current length")
    }

    /// `1/2 int |p|^2 f dx dp`.
    pub fn kinetic_energy(&self) -> f64 {
        let g = self.grid;
        let np = g.p.len();
        let p2: Vec<f64> = (0..np)
            .map(|ip| g.p.position(ip).iter().map(|v| v * v).sum())
            .collect();
        0.5 * self
            .values
            .par_chunks(np)
            .map(|row| row.iter().zip(&p2).map(|(f, q)| f * q).sum::<f64>())
            .collect::<Vec<_>>()
            .iter()
            .sum::<f64>()
            * g.cell_volume()
    }

    /// Phase-space averages of `x` and `p` (position not unwrapped).
    pub fn mean_position_momentum(&self) -> ([f64; 3], [f64; 3]) {
        let g = self.grid;
        let np = g.p.len();
        let (mut xs, mut ps, mut m) = ([0.0; 3], [0.0; 3], 0.0);
        for (i, v) in self.values.iter().enumerate() {
            let x = g.x.position(i / np);
            let p = g.p.position(i % np);
            for a in 0..g.dim() {
                xs[a] += x[a] * v;
                ps[a] += p[a] * v;
            }
            m += v;
        }
        (xs.map(|v| v / m), ps.map(|v| v / m))
    }

    /// Mass in the outermost `width` cells of the momentum window.
    pub fn edge_mass(&self, width: usize) -> f64 {
        let g = self.grid;
        let np = g.p.len();
        let d = g.dim();
        let edge: Vec<bool> = (0..np)
            .map(|ip| {
                let i = g.p.unravel(ip);
                (0..d).any(|a| i[a] < width || i[a] + width >= g.p.points(a))
            })
            .collect();
        self.values
            .par_chunks(np)
            .map(|row| {
                row.iter()
                    .zip(&edge)
                    .filter(|(_, e)| **e)
                    .map(|(v, _)| v.abs())
                    .sum::<f64>()
            })
            .collect::<Vec<_>>()
            .iter()
            .sum::<f64>()
            * g.cell_volume()
    }

    /// `int int f(x, p) phi(x, p + A(x)) dx dp`: the test function is read in
    /// canonical momentum, the density lives in kinetic momentum.
    pub fn pair(&self, phi: &TestFunction, gauge: Option<&GaugeField>) -> f64 {
        let g = self.grid;
        let np = g.p.len();
        let d = g.dim();
        let ext = g.x.extents();
        self.values
            .par_chunks(np)
            .enumerate()
            .map(|(ix, row)| {
                let x = g.x.position(ix);
                let a = gauge.map_or([0.0; 3], |gf| gf.a_at(ix));
                let xf: f64 = (0..d).map(|k| phi.x_factor(k, x[k], ext[k])).product();
                if xf == 0.0 {
                    return 0.0;
                }
                let pf: f64 = row
                    .iter()
                    .enumerate()
                    .map(|(ip, v)| {
                        let p = g.p.position(ip);
                        v * (0..d)
                            .map(|k| phi.xi_factor(k, p[k] + a[k]))
                            .product::<f64>()
                    })
                    .sum();
                xf * pf
            })
            .collect::<Vec<_>>()
            .iter()
            .sum::<f64>()
            * g.cell_volume()
    }
}

/// Density and current of `f`.
pub fn moments(f: &PhaseSpaceDensity) -> (ScalarField, VectorField) {
    (f.density(), f.current())
}
