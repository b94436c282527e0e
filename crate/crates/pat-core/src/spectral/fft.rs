use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::FftPlanner;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FftDirection {
    /// `X_j = sum_n x_n e^{-2 pi i j n / N}`, unnormalized.
    Forward,
    /// Inverse transform including the `1/N` factor.
    Inverse,
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// In-place `dim`-dimensional DFT of a row-major cube with `n` points per axis.
pub fn fft_nd(values: &mut [Complex64], dim: usize, n: usize, direction: FftDirection) {
    assert_eq!(values.len(), n.pow(dim as u32), "buffer does not match grid");
    let plan = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        match direction {
            FftDirection::Forward => p.plan_fft_forward(n),
            FftDirection::Inverse => p.plan_fft_inverse(n),
        }
    });
    let total = values.len();
    let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..dim {
        let stride = n.pow((dim - 1 - axis) as u32);
        if stride == 1 {
            for chunk in values.chunks_exact_mut(n) {
                plan.process_with_scratch(chunk, &mut scratch);
            }
            continue;
        }
        let block = stride * n;
        for base in (0..total).step_by(block) {
            for off in 0..stride {
                let start = base + off;
                for (j, z) in line.iter_mut().enumerate() {
                    *z = values[start + j * stride];
                }
                plan.process_with_scratch(&mut line, &mut scratch);
                for (j, z) in line.iter().enumerate() {
                    values[start + j * stride] = *z;
                }
            }
        }
    }
    if direction == FftDirection::Inverse {
        let s = 1.0 / total as f64;
        values.iter_mut().for_each(|z| *z *= s);
    }
}
