//! Banded matrix storage for the angular and tridiagonal radial factors.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::Matrix;

/// A square matrix stored as a list of diagonals. Offset `d` holds the
/// entries `(i, i+d)`; negative offsets are stored explicitly, so both
/// symmetric and antisymmetric band structures fit.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BandedMatrix {
    dim: usize,
    bands: Vec<(i32, Vec<f64>)>,
}

impl BandedMatrix {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            bands: Vec::new(),
        }
    }

    pub fn from_bands(dim: usize, bands: Vec<(i32, Vec<f64>)>) -> Self {
        for (offset, values) in &bands {
            assert_eq!(
                values.len(),
                dim - offset.unsigned_abs() as usize,
                "band length must be dim - |offset|"
            );
        }
        Self { dim, bands }
    }

    /// Insert a diagonal; `values[k]` is the entry at row `max(0,-d)+k`.
    pub fn set_band(&mut self, offset: i32, values: Vec<f64>) {
        assert_eq!(values.len(), self.dim - offset.unsigned_abs() as usize);
        self.bands.retain(|(d, _)| *d != offset);
        self.bands.push((offset, values));
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bands(&self) -> &[(i32, Vec<f64>)] {
        &self.bands
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let offset = j as i64 - i as i64;
        for (d, values) in &self.bands {
            if *d as i64 == offset {
                let start = if *d < 0 { (-d) as usize } else { 0 };
                return values[i - start];
            }
        }
        0.0
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.dim, self.dim);
        for (d, values) in &self.bands {
            let row0 = if *d < 0 { (-d) as usize } else { 0 };
            for (k, &v) in values.iter().enumerate() {
                let i = row0 + k;
                let j = (i as i64 + *d as i64) as usize;
                m[(i, j)] += v;
            }
        }
        m
    }

    /// y += B x
    pub fn apply_add(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        for (d, values) in &self.bands {
            let row0 = if *d < 0 { (-d) as usize } else { 0 };
            for (k, &v) in values.iter().enumerate() {
                let i = row0 + k;
                let j = (i as i64 + *d as i64) as usize;
                y[i] += v * x[j];
            }
        }
    }

    /// Banded product; exact band structure is preserved (structural zeros
    /// stay exact zeros), so the result is extracted diagonal by diagonal.
    pub fn mat_mul(&self, other: &BandedMatrix) -> BandedMatrix {
        assert_eq!(self.dim, other.dim);
        let dense = self.to_dense().mat_mul(&other.to_dense());
        Self::from_dense_exact(&dense)
    }

    /// Collect every diagonal of `m` that contains a nonzero entry.
    pub fn from_dense_exact(m: &Matrix) -> BandedMatrix {
        let n = m.rows();
        let mut out = BandedMatrix::new(n);
        for d in -(n as i32 - 1)..(n as i32) {
            let len = n - d.unsigned_abs() as usize;
            let row0 = if d < 0 { (-d) as usize } else { 0 };
            let mut values = vec![0.0; len];
            let mut any = false;
            for (k, value) in values.iter_mut().enumerate() {
                let i = row0 + k;
                let j = (i as i64 + d as i64) as usize;
                *value = m[(i, j)];
                if *value != 0.0 {
                    any = true;
                }
            }
            if any {
                out.bands.push((d, values));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_round_trip() {
        let mut b = BandedMatrix::new(4);
        b.set_band(0, vec![1.0, 2.0, 3.0, 4.0]);
        b.set_band(2, vec![5.0, 6.0]);
        b.set_band(-2, vec![5.0, 6.0]);
        let d = b.to_dense();
        assert_eq!(d[(0, 2)], 5.0);
        assert_eq!(d[(3, 1)], 6.0);
        assert_eq!(d[(2, 2)], 3.0);
        assert_eq!(b.get(1, 3), 6.0);
        assert_eq!(b.get(0, 1), 0.0);
        let back = BandedMatrix::from_dense_exact(&d);
        assert_eq!(back.to_dense(), d);
    }

    #[test]
    fn apply_matches_dense() {
        let mut b = BandedMatrix::new(5);
        b.set_band(0, vec![1.0; 5]);
        b.set_band(1, vec![0.5, -0.25, 2.0, 1.5]);
        b.set_band(-1, vec![0.5, -0.25, 2.0, 1.5]);
        let x = [1.0, -1.0, 2.0, 0.5, 3.0];
        let mut y = vec![0.0; 5];
        b.apply_add(&x, &mut y);
        let want = b.to_dense().matvec(&x);
        for (a, w) in y.iter().zip(want.iter()) {
            assert!((a - w).abs() < 1e-15);
        }
    }

    #[test]
    fn product_keeps_band_structure() {
        let mut a = BandedMatrix::new(6);
        a.set_band(1, vec![1.0; 5]);
        a.set_band(-1, vec![1.0; 5]);
        let sq = a.mat_mul(&a);
        // (shift + shift^T)^2 has offsets {-2, 0, 2} only
        let mut offsets: Vec<i32> = sq.bands().iter().map(|(d, _)| *d).collect();
        offsets.sort_unstable();
        assert_eq!(offsets, vec![-2, 0, 2]);
        let want = a.to_dense().mat_mul(&a.to_dense());
        assert_eq!(sq.to_dense(), want);
    }
}
