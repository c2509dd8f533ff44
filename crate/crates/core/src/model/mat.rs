//! Minimal row-major matrix used by the classifier layers.

use crate::num::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Mat<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// `out = A x`.
    pub fn matvec_into(&self, x: &[T], out: &mut [T]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (r, slot) in out.iter_mut().enumerate() {
            let mut acc = T::zero();
            for (&a, &b) in self.row(r).iter().zip(x) {
                acc += a * b;
            }
            *slot = acc;
        }
    }

    /// `out += A x`.
    pub fn matvec_add_into(&self, x: &[T], out: &mut [T]) {
        for (r, slot) in out.iter_mut().enumerate() {
            let mut acc = T::zero();
            for (&a, &b) in self.row(r).iter().zip(x) {
                acc += a * b;
            }
            *slot += acc;
        }
    }

    /// `out += A^T x`.
    pub fn matvec_t_add_into(&self, x: &[T], out: &mut [T]) {
        debug_assert_eq!(x.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        for (r, &xr) in x.iter().enumerate() {
            for (slot, &a) in out.iter_mut().zip(self.row(r)) {
                *slot += a * xr;
            }
        }
    }

    /// `A += u v^T`.
    pub fn add_outer(&mut self, u: &[T], v: &[T]) {
        debug_assert_eq!(u.len(), self.rows);
        debug_assert_eq!(v.len(), self.cols);
        for (r, &ur) in u.iter().enumerate() {
            let row = &mut self.data[r * self.cols..(r + 1) * self.cols];
            for (slot, &vc) in row.iter_mut().zip(v) {
                *slot += ur * vc;
            }
        }
    }
}
