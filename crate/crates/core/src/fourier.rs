//! Thin wrappers over `rustfft` for the 1-D pulse and 2-D beam transforms.
//!
//! Envelopes evolve as `e^{−iωt}` (and `e^{+i k·r}` transversely), so forward
//! FFT bin `j` of a time series carries angular frequency `−2π j_s/(N dt)`,
//! where `j_s` is the signed bin index.

use num_complex::Complex64;
use rustfft::FftPlanner;

pub(crate) fn forward(buf: &mut [Complex64]) {
    FftPlanner::new().plan_fft_forward(buf.len()).process(buf);
}

/// Unnormalised inverse followed by `1/N`.
pub(crate) fn inverse(buf: &mut [Complex64]) {
    let n = buf.len();
    FftPlanner::new().plan_fft_inverse(n).process(buf);
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|v| *v *= scale);
}

pub(crate) fn signed_index(j: usize, n: usize) -> i64 {
    if j < n.div_ceil(2) {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// In-place 2-D transform of an `n × n` row-major array.
pub(crate) fn transform_2d(data: &mut [Complex64], n: usize, inverse_dir: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse_dir {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    for row in data.chunks_exact_mut(n) {
        fft.process(row);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for c in 0..n {
        for r in 0..n {
            col[r] = data[r * n + c];
        }
        fft.process(&mut col);
        for r in 0..n {
            data[r * n + c] = col[r];
        }
    }
    if inverse_dir {
        let scale = 1.0 / (n * n) as f64;
        data.iter_mut().for_each(|v| *v *= scale);
    }
}
