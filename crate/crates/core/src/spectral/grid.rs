use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::SpectralError;
use crate::par::Exec;

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Square periodic grid `[0, L)²` with `n` points per axis.
#[derive(Clone)]
pub struct Grid {
    n: usize,
    box_length: f64,
    plans: Arc<Plans>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n", &self.n)
            .field("box_length", &self.box_length)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.box_length == other.box_length
    }
}

/// Physical frequency of one lattice point, with the odd components zeroed on
/// Nyquist lines so that odd multipliers keep fields real.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Wavevector {
    pub xi1: f64,
    pub xi2: f64,
    pub odd1: f64,
    pub odd2: f64,
    pub norm: f64,
}

impl Grid {
    pub fn new(n: usize, box_length: f64) -> Result<Self, SpectralError> {
        if n < 8 || !n.is_power_of_two() {
            return Err(SpectralError::Config(format!(
                "n must be a power of two >= 8, got {n}"
            )));
        }
        if !(box_length > 0.0) || !box_length.is_finite() {
            return Err(SpectralError::Config(format!(
                "box length must be positive, got {box_length}"
            )));
        }
        let mut planner = FftPlanner::new();
        let plans = Plans {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        };
        Ok(Self {
            n,
            box_length,
            plans: Arc::new(plans),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    pub fn area(&self) -> f64 {
        self.box_length * self.box_length
    }

    /// Lattice spacing `2π/L`, the smallest nonzero `|ξ|`.
    pub fn dk(&self) -> f64 {
        2.0 * PI / self.box_length
    }

    pub fn dx(&self) -> f64 {
        self.box_length / self.n as f64
    }

    /// Integer wavenumber stored at FFT index `i`, in `[-n/2, n/2)`.
    #[inline]
    pub fn wavenumber(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// FFT index of integer wavenumber `k` (taken modulo n).
    #[inline]
    pub fn index_of(&self, k: i64) -> usize {
        k.rem_euclid(self.n as i64) as usize
    }

    #[inline]
    pub fn is_nyquist(&self, i: usize) -> bool {
        i == self.n / 2
    }

    /// Per-axis wavenumbers in ascending order.
    pub fn wavenumbers(&self) -> Vec<i64> {
        let mut k: Vec<i64> = (0..self.n).map(|i| self.wavenumber(i)).collect();
        k.sort_unstable();
        k
    }

    #[inline]
    pub fn frequency(&self, i: usize) -> f64 {
        self.dk() * self.wavenumber(i) as f64
    }

    #[inline]
    pub fn wavevector(&self, i1: usize, i2: usize) -> Wavevector {
        let xi1 = self.frequency(i1);
        let xi2 = self.frequency(i2);
        Wavevector {
            xi1,
            xi2,
            odd1: if self.is_nyquist(i1) { 0.0 } else { xi1 },
            odd2: if self.is_nyquist(i2) { 0.0 } else { xi2 },
            norm: xi1.hypot(xi2),
        }
    }

    /// Largest `|ξ|` on the lattice.
    pub fn max_frequency(&self) -> f64 {
        self.dk() * (self.n as f64 / 2.0) * 2f64.sqrt()
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        i as f64 * self.dx()
    }

    /// Same box, `factor` times more points.
    pub fn refined(&self, factor: usize) -> Result<Self, SpectralError> {
        Self::new(self.n * factor, self.box_length)
    }

    /// Unnormalized forward transform followed by the `n⁻²` factor.
    pub(crate) fn forward(&self, data: &mut Array2<Complex64>, exec: Exec) {
        self.transform(data, &self.plans.forward, exec);
        let s = 1.0 / (self.n * self.n) as f64;
        data.mapv_inplace(|c| c * s);
    }

    pub(crate) fn inverse(&self, data: &mut Array2<Complex64>, exec: Exec) {
        self.transform(data, &self.plans.inverse, exec);
    }

    fn transform(&self, data: &mut Array2<Complex64>, fft: &Arc<dyn Fft<f64>>, exec: Exec) {
        let n = self.n;
        assert_eq!(data.dim(), (n, n), "array does not match grid");
        let rows = |buf: &mut [Complex64]| {
            let scratch_len = fft.get_inplace_scratch_len();
            exec.for_each_chunk(buf, n * 16.min(n), |_, chunk| {
                let mut scratch = vec![Complex64::new(0.0, 0.0); scratch_len];
                fft.process_with_scratch(chunk, &mut scratch);
            });
        };
        // along axis 1 (contiguous)
        if data.is_standard_layout() {
            rows(data.as_slice_mut().unwrap());
        } else {
            let mut tmp = data.as_standard_layout().to_owned();
            rows(tmp.as_slice_mut().unwrap());
            data.assign(&tmp);
        }
        // along axis 0 via transpose
        let mut t = data.view().reversed_axes().as_standard_layout().to_owned();
        rows(t.as_slice_mut().unwrap());
        data.assign(&t.view().reversed_axes());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_for_small_grid() {
        let g = Grid::new(8, 2.0 * PI).unwrap();
        assert_eq!(g.wavenumbers(), vec![-4, -3, -2, -1, 0, 1, 2, 3]);
        assert_eq!(g.wavenumbers().iter().filter(|&&k| k == 0).count(), 1);
        assert!((g.dk() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(matches!(Grid::new(7, 2.0 * PI), Err(SpectralError::Config(_))));
        assert!(Grid::new(4, 1.0).is_err());
        assert!(Grid::new(12, 1.0).is_err());
        assert!(Grid::new(16, 0.0).is_err());
        assert!(Grid::new(16, -1.0).is_err());
    }

    #[test]
    fn big_box_spacing() {
        let g = Grid::new(256, 32.0 * PI).unwrap();
        assert!((g.dk() - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn nyquist_is_odd_free() {
        let g = Grid::new(8, 2.0 * PI).unwrap();
        let w = g.wavevector(4, 1);
        assert_eq!(w.xi1, -4.0);
        assert_eq!(w.odd1, 0.0);
        assert_eq!(w.odd2, 1.0);
        assert_eq!(g.index_of(-1), 7);
    }
}
