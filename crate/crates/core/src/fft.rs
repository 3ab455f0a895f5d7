//! Multi-dimensional FFTs over row-major arrays of arbitrary shape.

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Cached forward/inverse plans for an array shape. Transforms are unnormalized
/// in the forward direction and scaled by `1/n` per axis in the inverse.
#[derive(Clone)]
pub struct NdFft {
    shape: Vec<usize>,
    forward: Vec<Option<Arc<dyn Fft<f64>>>>,
    inverse: Vec<Option<Arc<dyn Fft<f64>>>>,
}

impl std::fmt::Debug for NdFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NdFft").field("shape", &self.shape).finish()
    }
}

impl NdFft {
    pub fn new(shape: &[usize]) -> Self {
        let mut planner = FftPlanner::<f64>::new();
        let mut cache: HashMap<usize, (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>)> = HashMap::new();
        let mut forward = Vec::with_capacity(shape.len());
        let mut inverse = Vec::with_capacity(shape.len());
        for &n in shape {
            if n <= 1 {
                forward.push(None);
                inverse.push(None);
                continue;
            }
            let (f, i) = cache
                .entry(n)
                .or_insert_with(|| (planner.plan_fft_forward(n), planner.plan_fft_inverse(n)))
                .clone();
            forward.push(Some(f));
            inverse.push(Some(i));
        }
        Self {
            shape: shape.to_vec(),
            forward,
            inverse,
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Forward transform along one axis.
    pub fn forward_axis(&self, data: &mut [Complex64], axis: usize) {
        if let Some(plan) = &self.forward[axis] {
            apply_along_axis(&self.shape, data, axis, plan.as_ref(), 1.0);
        }
    }

    /// Normalized inverse transform along one axis.
    pub fn inverse_axis(&self, data: &mut [Complex64], axis: usize) {
        if let Some(plan) = &self.inverse[axis] {
            let scale = 1.0 / self.shape[axis] as f64;
            apply_along_axis(&self.shape, data, axis, plan.as_ref(), scale);
        }
    }

    pub fn forward_axes(&self, data: &mut [Complex64], axes: &[usize]) {
        for &a in axes {
            self.forward_axis(data, a);
        }
    }

    pub fn inverse_axes(&self, data: &mut [Complex64], axes: &[usize]) {
        for &a in axes {
            self.inverse_axis(data, a);
        }
    }

    pub fn forward_all(&self, data: &mut [Complex64]) {
        for a in 0..self.shape.len() {
            self.forward_axis(data, a);
        }
    }

    pub fn inverse_all(&self, data: &mut [Complex64]) {
        for a in 0..self.shape.len() {
            self.inverse_axis(data, a);
        }
    }
}

fn apply_along_axis(
    shape: &[usize],
    data: &mut [Complex64],
    axis: usize,
    plan: &dyn Fft<f64>,
    scale: f64,
) {
    let n = shape[axis];
    let stride: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    debug_assert_eq!(data.len(), outer * n * stride);
    let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
    if stride == 1 {
        plan.process_with_scratch(data, &mut scratch);
        if scale != 1.0 {
            data.iter_mut().for_each(|v| *v *= scale);
        }
        return;
    }
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for o in 0..outer {
        let block = o * n * stride;
        for s in 0..stride {
            let base = block + s;
            for (i, v) in line.iter_mut().enumerate() {
                *v = data[base + i * stride];
            }
            plan.process_with_scratch(&mut line, &mut scratch);
            for (i, v) in line.iter().enumerate() {
                data[base + i * stride] = *v * scale;
            }
        }
    }
}

/// Calls `f(line)` for each 1-D line of `data` along `axis`, writing results back.
pub fn for_each_line<F>(shape: &[usize], data: &mut [f64], axis: usize, mut f: F)
where
    F: FnMut(usize, &mut [f64]),
{
    let n = shape[axis];
    let stride: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let mut line = vec![0.0; n];
    let mut counter = 0;
    for o in 0..outer {
        let block = o * n * stride;
        for s in 0..stride {
            let base = block + s;
            for (i, v) in line.iter_mut().enumerate() {
                *v = data[base + i * stride];
            }
            f(counter, &mut line);
            for (i, v) in line.iter().enumerate() {
                data[base + i * stride] = *v;
            }
            counter += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_3d() {
        let shape = [4, 8, 2];
        let fft = NdFft::new(&shape);
        let orig: Vec<Complex64> = (0..fft.len())
            .map(|i| Complex64::new(i as f64, (i * i) as f64 * 0.1))
            .collect();
        let mut data = orig.clone();
        fft.forward_all(&mut data);
        fft.inverse_all(&mut data);
        for (a, b) in orig.iter().zip(&data) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn single_mode_lands_on_expected_bin() {
        let shape = [8, 4];
        let fft = NdFft::new(&shape);
        let mut data: Vec<Complex64> = (0..32)
            .map(|idx| {
                let (i, j) = (idx / 4, idx % 4);
                let ph = 2.0 * std::f64::consts::PI * (2.0 * i as f64 / 8.0 + 1.0 * j as f64 / 4.0);
                Complex64::from_polar(1.0, ph)
            })
            .collect();
        fft.forward_all(&mut data);
        for (idx, v) in data.iter().enumerate() {
            let expect = if idx == 2 * 4 + 1 { 32.0 } else { 0.0 };
            assert!((v.norm() - expect).abs() < 1e-9, "{idx} {v}");
        }
    }
}
