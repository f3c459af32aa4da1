//! Two-dimensional complex FFTs with a process-wide plan cache.

use ndarray::Array2;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

pub(crate) struct Plan2d {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

fn cache() -> &'static Mutex<HashMap<usize, Arc<Plan2d>>> {
    static PLANS: OnceLock<Mutex<HashMap<usize, Arc<Plan2d>>>> = OnceLock::new();
    PLANS.get_or_init(|| Mutex::new(HashMap::new()))
}

pub(crate) fn plan(len: usize) -> Arc<Plan2d> {
    let mut plans = cache().lock().unwrap_or_else(|e| e.into_inner());
    plans
        .entry(len)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(Plan2d {
                len,
                forward: planner.plan_fft_forward(len),
                inverse: planner.plan_fft_inverse(len),
            })
        })
        .clone()
}

impl Plan2d {
    /// Unnormalized forward transform `X_k = Σ_j x_j e^{−2πi j·k/n}`.
    pub(crate) fn forward(&self, data: &mut Array2<Complex64>) {
        self.process(data, false);
    }

    /// Unnormalized inverse transform `x_j = Σ_k X_k e^{2πi j·k/n}`.
    pub(crate) fn inverse(&self, data: &mut Array2<Complex64>) {
        self.process(data, true);
    }

    fn process(&self, data: &mut Array2<Complex64>, inverse: bool) {
        let n = self.len;
        assert_eq!(data.dim(), (n, n));
        let fft = if inverse { &self.inverse } else { &self.forward };
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];

        // rows, then columns via a transposed copy
        {
            let buf = data
                .as_slice_mut()
                .expect("spectral arrays are kept in standard layout");
            fft.process_with_scratch(buf, &mut scratch);
        }
        let mut t = data.t().as_standard_layout().into_owned();
        fft.process_with_scratch(t.as_slice_mut().unwrap(), &mut scratch);
        data.assign(&t.t());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_inverse_is_scaled_identity() {
        let n = 12;
        let mut a = Array2::from_shape_fn((n, n), |(i, j)| {
            Complex64::new((i * 7 + j) as f64 % 5.0, (i as f64 - j as f64) * 0.1)
        });
        let orig = a.clone();
        let p = plan(n);
        p.forward(&mut a);
        p.inverse(&mut a);
        for (x, y) in a.iter().zip(orig.iter()) {
            assert!((x / (n * n) as f64 - y).norm() < 1e-12);
        }
    }

    #[test]
    fn single_mode_lands_in_one_bin() {
        let n = 8;
        let mut a = Array2::from_shape_fn((n, n), |(i, j)| {
            let ph = 2.0 * std::f64::consts::PI * (2.0 * i as f64 + 3.0 * j as f64) / n as f64;
            Complex64::new(ph.cos(), ph.sin())
        });
        plan(n).forward(&mut a);
        for ((i, j), v) in a.indexed_iter() {
            let expected = if (i, j) == (2, 3) { (n * n) as f64 } else { 0.0 };
            assert!((v.re - expected).abs() < 1e-10 && v.im.abs() < 1e-10);
        }
    }
}
