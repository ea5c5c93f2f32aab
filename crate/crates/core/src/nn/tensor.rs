use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major `(rows, cols)` matrix of `f64`; rows index the batch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape {
                context: "tensor data",
                expected: rows * cols,
                actual: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn identity(n: usize) -> Self {
        let mut t = Self::zeros(n, n);
        for i in 0..n {
            t.data[i * n + i] = 1.0;
        }
        t
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor {
        Tensor {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `self * rhs`.
    pub fn matmul(&self, rhs: &Tensor) -> Result<Tensor> {
        self.check_inner("matmul", self.cols, rhs.rows)?;
        let mut out = Tensor::zeros(self.rows, rhs.cols);
        gemm(
            self.rows,
            self.cols,
            rhs.cols,
            (&self.data, self.cols as isize, 1),
            (&rhs.data, rhs.cols as isize, 1),
            &mut out.data,
        );
        Ok(out)
    }

    /// `self^T * rhs`.
    pub fn t_matmul(&self, rhs: &Tensor) -> Result<Tensor> {
        self.check_inner("transposed matmul", self.rows, rhs.rows)?;
        let mut out = Tensor::zeros(self.cols, rhs.cols);
        gemm(
            self.cols,
            self.rows,
            rhs.cols,
            (&self.data, 1, self.cols as isize),
            (&rhs.data, rhs.cols as isize, 1),
            &mut out.data,
        );
        Ok(out)
    }

    /// `self * rhs^T`.
    pub fn matmul_t(&self, rhs: &Tensor) -> Result<Tensor> {
        self.check_inner("matmul by transpose", self.cols, rhs.cols)?;
        let mut out = Tensor::zeros(self.rows, rhs.rows);
        gemm(
            self.rows,
            self.cols,
            rhs.rows,
            (&self.data, self.cols as isize, 1),
            (&rhs.data, 1, rhs.cols as isize),
            &mut out.data,
        );
        Ok(out)
    }

    fn check_inner(&self, context: &'static str, a: usize, b: usize) -> Result<()> {
        if a != b {
            return Err(Error::Shape {
                context,
                expected: a,
                actual: b,
            });
        }
        Ok(())
    }
}

fn gemm(
    m: usize,
    k: usize,
    n: usize,
    (a, rsa, csa): (&[f64], isize, isize),
    (b, rsb, csb): (&[f64], isize, isize),
    c: &mut [f64],
) {
    if m == 0 || n == 0 {
        return;
    }
    if k == 0 {
        c.iter_mut().for_each(|v| *v = 0.0);
        return;
    }
    // SAFETY: the strides describe matrices that lie inside `a`, `b` and `c`,
    // whose lengths were checked against the same dimensions by the callers.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            0.0,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}
