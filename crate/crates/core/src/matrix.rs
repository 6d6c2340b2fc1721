use std::fmt;
use std::hash::Hasher;

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Dense row-major single-precision matrix. Element `(i, j)` lives at
/// `data[i * cols + j]`.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f32>,
}

impl Matrix {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f32>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidDimension(format!(
                "matrix must be at least 1x1, got {rows}x{cols}"
            )));
        }
        let expected = rows
            .checked_mul(cols)
            .ok_or_else(|| Error::InvalidDimension(format!("{rows}x{cols} overflows")))?;
        if data.len() != expected {
            return Err(Error::Shape(format!(
                "{rows}x{cols} matrix needs {expected} elements, got {}",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from nested rows. Mostly useful for small fixtures.
    pub fn from_rows<R: AsRef<[f32]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(Error::Shape(format!(
                    "row {i} has {} columns, expected {cols}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Self::from_vec(rows.len(), cols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::from_vec(rows, cols, vec![0.0; rows.saturating_mul(cols)])
    }

    /// `n x n` matrix of uniform samples in `[0, 1)` drawn from
    /// [`SplitMix64`] seeded with `seed`, filled in row-major order.
    pub fn random(n: usize, seed: u64) -> Result<Self> {
        check_square_dim(n)?;
        let mut rng = SplitMix64::new(seed);
        let data = (0..n * n).map(|_| rng.next_unit_f32()).collect();
        Self::from_vec(n, n, data)
    }

    pub fn identity(n: usize) -> Result<Self> {
        check_square_dim(n)?;
        let mut m = Self::zeros(n, n)?;
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        Ok(m)
    }

    pub fn zero(n: usize) -> Result<Self> {
        check_square_dim(n)?;
        Self::zeros(n, n)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f32> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f32> {
        if row < self.rows && col < self.cols {
            Some(self.data[row * self.cols + col])
        } else {
            None
        }
    }

    pub fn row(&self, row: usize) -> &[f32] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    /// Bitwise equality, distinguishing `-0.0` from `0.0` and comparing NaN
    /// payloads.
    pub fn bitwise_eq(&self, other: &Matrix) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }

    /// Stable 64-bit FNV-1a digest over the shape and the raw element bits.
    pub fn digest(&self) -> u64 {
        let mut h = Fnv1a::default();
        h.write_u64(self.rows as u64);
        h.write_u64(self.cols as u64);
        for v in &self.data {
            h.write_u32(v.to_bits());
        }
        h.finish()
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.data.len() <= 64 {
            let rows: Vec<&[f32]> = (0..self.rows).map(|r| self.row(r)).collect();
            f.debug_struct("Matrix")
                .field("rows", &self.rows)
                .field("cols", &self.cols)
                .field("data", &rows)
                .finish()
        } else {
            f.debug_struct("Matrix")
                .field("rows", &self.rows)
                .field("cols", &self.cols)
                .field("digest", &format_args!("{:016x}", self.digest()))
                .finish_non_exhaustive()
        }
    }
}

fn check_square_dim(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidDimension("n must be >= 1".into()))
    } else {
        Ok(())
    }
}

struct Fnv1a(u64);

impl Default for Fnv1a {
    fn default() -> Self {
        Fnv1a(0xcbf2_9ce4_8422_2325)
    }
}

impl Hasher for Fnv1a {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }

    fn write_u32(&mut self, v: u32) {
        self.write(&v.to_le_bytes());
    }

    fn write_u64(&mut self, v: u64) {
        self.write(&v.to_le_bytes());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_is_deterministic() {
        let a = Matrix::random(4, 42).unwrap();
        let b = Matrix::random(4, 42).unwrap();
        assert!(a.bitwise_eq(&b));
        assert_ne!(a, Matrix::random(4, 43).unwrap());
    }

    #[test]
    fn random_seed7_golden() {
        // 24-bit mantissas of the first four SplitMix64 words for seed 7.
        const TOP24: [u32; 4] = [6_540_257, 281_660, 15_112_256, 9_779_947];
        let m = Matrix::random(2, 7).unwrap();
        let want: Vec<f32> = TOP24.iter().map(|&v| v as f32 / 16_777_216.0).collect();
        assert_eq!(m.as_slice(), want.as_slice());
        assert_eq!(m.get(0, 0).unwrap().to_bits(), 1_053_267_906);
    }

    #[test]
    fn random_elements_in_unit_interval() {
        let m = Matrix::random(128, 9).unwrap();
        assert_eq!(m.as_slice().len(), 16_384);
        assert!(m.as_slice().iter().all(|&v| (0.0..1.0).contains(&v)));
    }

    #[test]
    fn zero_dimension_rejected() {
        assert!(matches!(Matrix::random(0, 1), Err(Error::InvalidDimension(_))));
        assert!(matches!(Matrix::identity(0), Err(Error::InvalidDimension(_))));
        assert!(matches!(Matrix::zero(0), Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn identity_and_zero_fixtures() {
        assert_eq!(Matrix::identity(1).unwrap().as_slice(), &[1.0]);
        assert_eq!(Matrix::zero(2).unwrap().as_slice(), &[0.0; 4]);
        let i3 = Matrix::identity(3).unwrap();
        let sums: Vec<f32> = (0..3).map(|r| i3.row(r).iter().sum()).collect();
        assert_eq!(sums, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn from_vec_checks_length() {
        assert!(matches!(
            Matrix::from_vec(2, 2, vec![0.0; 3]),
            Err(Error::Shape(_))
        ));
        assert!(Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
    }

    #[test]
    fn digest_tracks_bits() {
        let a = Matrix::from_rows(&[[0.0f32]]).unwrap();
        let b = Matrix::from_rows(&[[-0.0f32]]).unwrap();
        assert_ne!(a.digest(), b.digest());
        assert_eq!(a.digest(), Matrix::zero(1).unwrap().digest());
    }
}
