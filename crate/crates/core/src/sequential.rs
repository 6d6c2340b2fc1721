//! Reference triple-loop kernel. Its accumulation order (k ascending, single
//! precision, no fused multiply-add) is the oracle every other backend is
//! checked against.

use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub fn matmul_sequential(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    check_shapes(a, b)?;
    let (rows, cols) = (a.rows(), b.cols());
    let mut out = vec![0.0f32; rows * cols];
    for row in 0..rows {
        for col in 0..cols {
            out[row * cols + col] = dot_element(a, b, row, col);
        }
    }
    Matrix::from_vec(rows, cols, out)
}

/// One output element, `sum_k a[row][k] * b[k][col]` accumulated with k
/// ascending in `f32`.
#[inline]
pub(crate) fn dot_element(a: &Matrix, b: &Matrix, row: usize, col: usize) -> f32 {
    let b_cols = b.cols();
    let b_data = b.as_slice();
    let mut sum = 0.0f32;
    for (k, &x) in a.row(row).iter().enumerate() {
        sum += x * b_data[k * b_cols + col];
    }
    sum
}

pub(crate) fn check_shapes(a: &Matrix, b: &Matrix) -> Result<()> {
    if a.cols() != b.rows() {
        return Err(Error::Shape(format!(
            "cannot multiply {}x{} by {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_hand_computed() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        let b = Matrix::from_rows(&[[5.0, 6.0], [7.0, 8.0]]).unwrap();
        let c = matmul_sequential(&a, &b).unwrap();
        assert_eq!(c.as_slice(), &[19.0, 22.0, 43.0, 50.0]);
    }

    #[test]
    fn identity_right_is_bitwise() {
        let a = Matrix::random(33, 5).unwrap();
        let c = matmul_sequential(&a, &Matrix::identity(33).unwrap()).unwrap();
        assert!(c.bitwise_eq(&a));
    }

    #[test]
    fn zero_left_gives_zero() {
        let b = Matrix::random(9, 5).unwrap();
        let c = matmul_sequential(&Matrix::zero(9).unwrap(), &b).unwrap();
        assert!(c.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rectangular_shapes() {
        let a = Matrix::from_rows(&[[1.0, 2.0, 3.0]]).unwrap();
        let b = Matrix::from_rows(&[[1.0], [1.0], [1.0]]).unwrap();
        let c = matmul_sequential(&a, &b).unwrap();
        assert_eq!((c.rows(), c.cols()), (1, 1));
        assert_eq!(c.as_slice(), &[6.0]);
        assert!(matches!(matmul_sequential(&a, &a), Err(Error::Shape(_))));
    }
}
