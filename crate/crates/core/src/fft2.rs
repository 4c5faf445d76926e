//! Two-dimensional complex FFT on a row-major `p1 x p2` buffer.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub(crate) struct Fft2 {
    pub p1: usize,
    pub p2: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
    tmp: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl Fft2 {
    pub fn new(p1: usize, p2: usize) -> Self {
        let mut planner = FftPlanner::new();
        let row_fwd = planner.plan_fft_forward(p2);
        let row_inv = planner.plan_fft_inverse(p2);
        let col_fwd = planner.plan_fft_forward(p1);
        let col_inv = planner.plan_fft_inverse(p1);
        let scratch_len = [&row_fwd, &row_inv, &col_fwd, &col_inv]
            .iter()
            .map(|f| f.get_inplace_scratch_len())
            .max()
            .unwrap_or(0);
        Fft2 {
            p1,
            p2,
            row_fwd,
            row_inv,
            col_fwd,
            col_inv,
            tmp: vec![Complex64::default(); p1 * p2],
            scratch: vec![Complex64::default(); scratch_len],
        }
    }

    pub fn len(&self) -> usize {
        self.p1 * self.p2
    }

    pub fn forward(&mut self, buf: &mut [Complex64]) {
        self.run(buf, true);
    }

    /// Unnormalised inverse; divide by `len()` to invert `forward`.
    pub fn inverse(&mut self, buf: &mut [Complex64]) {
        self.run(buf, false);
    }

    fn run(&mut self, buf: &mut [Complex64], fwd: bool) {
        assert_eq!(buf.len(), self.len());
        let (row, col) = if fwd {
            (&self.row_fwd, &self.col_fwd)
        } else {
            (&self.row_inv, &self.col_inv)
        };
        row.process_with_scratch(buf, &mut self.scratch);
        transpose(buf, &mut self.tmp, self.p1, self.p2);
        col.process_with_scratch(&mut self.tmp, &mut self.scratch);
        transpose(&self.tmp, buf, self.p2, self.p1);
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    for r in 0..rows {
        for c in 0..cols {
            dst[c * rows + r] = src[r * cols + c];
        }
    }
}
