//! Periodic cubic B-spline interpolation along one axis of a row-major array.

use rayon::prelude::*;

const POLE: f64 = -0.267_949_192_431_122_7; // sqrt(3) - 2

/// Turns samples into periodic cubic B-spline coefficients in place.
pub(crate) fn prefilter(c: &mut [f64]) {
    let n = c.len();
    if n < 2 {
        return;
    }
    let z = POLE;
    let zn = z.powi(n as i32);
    // Causal pass, exact periodic initialization.
    let mut acc = c[0];
    let mut zk = z;
    for k in 1..n {
        acc += zk * c[n - k];
        zk *= z;
    }
    c[0] = acc / (1.0 - zn);
    for i in 1..n {
        c[i] += z * c[i - 1];
    }
    // Anticausal pass.
    let mut acc = c[n - 1];
    let mut zk = z;
    for k in 0..n - 1 {
        acc += zk * c[k];
        zk *= z;
    }
    c[n - 1] = acc / (1.0 - zn);
    for i in (0..n - 1).rev() {
        c[i] += z * c[i + 1];
    }
    let g = -6.0 * z;
    c.iter_mut().for_each(|v| *v *= g);
}

#[inline]
fn weights(u: f64) -> [f64; 4] {
    let u2 = u * u;
    let u3 = u2 * u;
    let v = 1.0 - u;
    [
        v * v * v / 6.0,
        (4.0 - 6.0 * u2 + 3.0 * u3) / 6.0,
        (1.0 + 3.0 * u + 3.0 * u2 - 3.0 * u3) / 6.0,
        u3 / 6.0,
    ]
}

/// `out[i] = s(i - shift)` for the periodic spline `s` with coefficients `c`.
pub(crate) fn evaluate_shifted(c: &[f64], shift: f64, out: &mut [f64]) {
    let n = c.len();
    let t0 = -shift;
    let j = t0.floor();
    let u = t0 - j;
    let w = weights(u);
    let base = (j as i64).rem_euclid(n as i64) as usize;
    for (i, o) in out.iter_mut().enumerate() {
        let k = base + i + n;
        *o =
            w[0] * c[(k - 1) % n] + w[1] * c[k % n] + w[2] * c[(k + 1) % n] + w[3] * c[(k + 2) % n];
    }
}

/// Shifts one periodic line by `shift` cells using the scratch buffer `c`.
pub(crate) fn shift_line(line: &mut [f64], shift: f64, c: &mut Vec<f64>) {
    let n = line.len();
    if n == 1 || shift == 0.0 {
        return;
    }
    let r = shift.round();
    if (shift - r).abs() < 1e-13 {
        let k = (r as i64).rem_euclid(n as i64) as usize;
        line.rotate_right(k);
        return;
    }
    c.clear();
    c.extend_from_slice(line);
    prefilter(c);
    evaluate_shifted(c, shift, line);
}

fn decode(mut flat: usize, dims: &[usize], out: &mut [usize]) {
    for (a, &n) in dims.iter().enumerate().rev() {
        out[a] = flat % n;
        flat /= n;
    }
}

const TILE: usize = 64;

/// Shifts every line along `axis` of a row-major array of `shape`; `shift`
/// receives the full multi-index (its `axis` entry is zero) and returns the
/// displacement in cells.
pub(crate) fn shift_axis_serial<F>(data: &mut [f64], shape: &[usize], axis: usize, shift: &F)
where
    F: Fn(&[usize]) -> f64,
{
    let n = shape[axis];
    if n == 1 {
        return;
    }
    let inner: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let mut idx = vec![0usize; shape.len()];
    let mut line = vec![0.0; n];
    let mut scratch = Vec::with_capacity(n);
    let mut tile = vec![0.0; n * TILE];
    for o in 0..outer {
        decode(o, &shape[..axis], &mut idx[..axis]);
        let block = &mut data[o * n * inner..(o + 1) * n * inner];
        let mut s0 = 0;
        while s0 < inner {
            let w = TILE.min(inner - s0);
            for i in 0..n {
                tile[i * TILE..i * TILE + w]
                    .copy_from_slice(&block[i * inner + s0..i * inner + s0 + w]);
            }
            for q in 0..w {
                decode(s0 + q, &shape[axis + 1..], &mut idx[axis + 1..]);
                let d = shift(&idx);
                if d == 0.0 {
                    continue;
                }
                for i in 0..n {
                    line[i] = tile[i * TILE + q];
                }
                shift_line(&mut line, d, &mut scratch);
                for i in 0..n {
                    tile[i * TILE + q] = line[i];
                }
            }
            for i in 0..n {
                block[i * inner + s0..i * inner + s0 + w]
                    .copy_from_slice(&tile[i * TILE..i * TILE + w]);
            }
            s0 += w;
        }
    }
}

/// Parallel version of [`shift_axis_serial`], splitting over the leading
/// axes when `axis > 0` and over the trailing index range otherwise.
pub(crate) fn shift_axis<F>(data: &mut [f64], shape: &[usize], axis: usize, shift: &F)
where
    F: Fn(&[usize]) -> f64 + Sync,
{
    if axis > 0 {
        let lead = shape[0];
        let chunk = data.len() / lead;
        data.par_chunks_mut(chunk)
            .enumerate()
            .for_each(|(i0, part)| {
                let f = |idx: &[usize]| {
                    let mut full = Vec::with_capacity(shape.len());
                    full.push(i0);
                    full.extend_from_slice(idx);
                    shift(&full)
                };
                shift_axis_serial(part, &shape[1..], axis - 1, &f);
            });
    } else {
        shift_axis_serial(data, shape, axis, shift);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump(n: usize, x0: f64) -> Vec<f64> {
        (0..n)
            .map(|i| (-((i as f64 - x0) / 3.0).powi(2)).exp())
            .collect()
    }

    #[test]
    fn prefilter_reproduces_samples() {
        let s = bump(16, 6.3);
        let mut c = s.clone();
        prefilter(&mut c);
        for i in 0..16 {
            let v = (c[(i + 15) % 16] + 4.0 * c[i] + c[(i + 1) % 16]) / 6.0;
            assert!((v - s[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_and_integer_shifts_are_exact() {
        let s = bump(32, 10.0);
        let mut scratch = Vec::new();
        let mut a = s.clone();
        shift_line(&mut a, 3.0, &mut scratch);
        for i in 0..32 {
            assert_eq!(a[(i + 3) % 32], s[i]);
        }
        let mut c = s.clone();
        prefilter(&mut c);
        let mut out = vec![0.0; 32];
        evaluate_shifted(&c, 0.0, &mut out);
        assert!(out.iter().zip(&s).all(|(a, b)| (a - b).abs() < 1e-14));
    }

    #[test]
    fn shift_preserves_sum_and_moves_the_mean() {
        let s = bump(64, 30.0);
        let mut a = s.clone();
        shift_line(&mut a, 2.37, &mut Vec::new());
        let m0: f64 = s.iter().sum();
        let m1: f64 = a.iter().sum();
        assert!((m0 - m1).abs() < 1e-13 * m0);
        let c0: f64 = s.iter().enumerate().map(|(i, v)| i as f64 * v).sum::<f64>() / m0;
        let c1: f64 = a.iter().enumerate().map(|(i, v)| i as f64 * v).sum::<f64>() / m1;
        assert!((c1 - c0 - 2.37).abs() < 1e-12);
    }

    #[test]
    fn fourth_order_in_spacing() {
        let err = |n: usize| {
            let h = 1.0 / n as f64;
            let f = |x: f64| (2.0 * std::f64::consts::PI * x).sin();
            let mut line: Vec<f64> = (0..n).map(|i| f(i as f64 * h)).collect();
            shift_line(&mut line, 0.3, &mut Vec::new());
            (0..n)
                .map(|i| (line[i] - f((i as f64 - 0.3) * h)).abs())
                .fold(0.0, f64::max)
        };
        let rate = (err(16) / err(32)).log2();
        assert!(rate > 3.8, "rate {rate}");
    }

    #[test]
    fn axis_shift_matches_line_shift() {
        let shape = [4, 8, 16];
        let data: Vec<f64> = (0..shape.iter().product::<usize>())
            .map(|i| ((i * 7919) % 31) as f64)
            .collect();
        let shift = |idx: &[usize]| 0.1 * idx[0] as f64 + 0.37 * idx[2] as f64;
        let mut a = data.clone();
        shift_axis(&mut a, &shape, 1, &shift);
        for i0 in 0..4 {
            for i2 in 0..16 {
                let mut line: Vec<f64> = (0..8).map(|i1| data[(i0 * 8 + i1) * 16 + i2]).collect();
                shift_line(&mut line, shift(&[i0, 0, i2]), &mut Vec::new());
                for i1 in 0..8 {
                    assert!((a[(i0 * 8 + i1) * 16 + i2] - line[i1]).abs() < 1e-14);
                }
            }
        }
        let mut b = data.clone();
        shift_axis(&mut b, &shape, 0, &|idx: &[usize]| {
            0.5 + idx[1] as f64 * 0.01
        });
        assert!((b.iter().sum::<f64>() - data.iter().sum::<f64>()).abs() < 1e-10);
    }
}
