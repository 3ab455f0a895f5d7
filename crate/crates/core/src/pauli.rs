//! Pauli matrices and small 2x2 complex helpers.

use crate::field::C64;

pub type Mat2 = [[C64; 2]; 2];

const O: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// The three Pauli matrices.
pub struct PauliMatrices;

impl PauliMatrices {
    pub const SIGMA1: Mat2 = [[O, ONE], [ONE, O]];
    pub const SIGMA2: Mat2 = [[O, C64::new(0.0, -1.0)], [I, O]];
    pub const SIGMA3: Mat2 = [[ONE, O], [O, C64::new(-1.0, 0.0)]];
    pub const IDENTITY: Mat2 = [[ONE, O], [O, ONE]];

    pub fn sigma(k: usize) -> Mat2 {
        match k {
            0 => Self::SIGMA1,
            1 => Self::SIGMA2,
            2 => Self::SIGMA3,
            _ => panic!("Pauli index {k} out of range"),
        }
    }
}

/// `sigma . b`.
#[inline]
pub fn sigma_dot(b: [f64; 3]) -> Mat2 {
    [
        [C64::new(b[2], 0.0), C64::new(b[0], -b[1])],
        [C64::new(b[0], b[1]), C64::new(-b[2], 0.0)],
    ]
}

#[inline]
pub fn mat_vec(m: &Mat2, v: [C64; 2]) -> [C64; 2] {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[O; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn adjoint(a: &Mat2) -> Mat2 {
    [
        [a[0][0].conj(), a[1][0].conj()],
        [a[0][1].conj(), a[1][1].conj()],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &Mat2, b: &Mat2) -> bool {
        (0..2).all(|i| (0..2).all(|j| (a[i][j] - b[i][j]).norm() < 1e-15))
    }

    #[test]
    fn algebra() {
        for k in 0..3 {
            let s = PauliMatrices::sigma(k);
            assert!(close(&s, &adjoint(&s)));
            assert!(close(&mat_mul(&s, &s), &PauliMatrices::IDENTITY));
        }
        let s12 = mat_mul(&PauliMatrices::SIGMA1, &PauliMatrices::SIGMA2);
        let is3 = PauliMatrices::SIGMA3.map(|r| r.map(|v| v * I));
        assert!(close(&s12, &is3));
    }

    #[test]
    fn sigma_dot_matches_sum() {
        let b = [0.3, -1.2, 2.5];
        let mut sum = [[O; 2]; 2];
        for k in 0..3 {
            let s = PauliMatrices::sigma(k);
            for i in 0..2 {
                for j in 0..2 {
                    sum[i][j] += s[i][j] * b[k];
                }
            }
        }
        assert!(close(&sigma_dot(b), &sum));
    }
}
