use num_complex::Complex64;

use super::SolverError;
use crate::spectral::{Grid, SpectralField};

/// Profile `θ̄(x₂)` on the `x₂` axis of a grid, coefficients in FFT order.
#[derive(Clone, Debug, PartialEq)]
pub struct Profile1D {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl Profile1D {
    pub fn zeros(grid: &Grid) -> Self {
        Self {
            grid: grid.clone(),
            coeffs: vec![Complex64::new(0.0, 0.0); grid.n()],
        }
    }

    /// Samples `f(x₂)` and transforms; the result is real by symmetrization.
    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> f64) -> Result<Self, SolverError> {
        Self::from_field(&SpectralField::from_fn(grid, |_, x2| f(x2))?)
    }

    /// The `ξ₁ = 0` line of an `x₁`-independent field.
    pub fn from_field(f: &SpectralField) -> Result<Self, SolverError> {
        let c = f.coeffs();
        let n = f.grid().n();
        let off: f64 = (1..n).flat_map(|i1| (0..n).map(move |i2| (i1, i2))).map(|(i1, i2)| c[[i1, i2]].norm_sqr()).sum();
        let total: f64 = c.iter().map(|z| z.norm_sqr()).sum();
        if off > 1e-24 * total.max(f64::MIN_POSITIVE) {
            return Err(SolverError::Config("profile depends on x1".into()));
        }
        Ok(Self {
            grid: f.grid().clone(),
            coeffs: (0..n).map(|i2| c[[0, i2]]).collect(),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeff(&self, k2: i64) -> Complex64 {
        self.coeffs[self.grid.index_of(k2)]
    }

    pub fn set_coeff(&mut self, k2: i64, v: Complex64) {
        let i = self.grid.index_of(k2);
        self.coeffs[i] = v;
    }

    /// Embeds the profile as an `x₁`-independent field.
    pub fn to_field(&self) -> SpectralField {
        let mut f = SpectralField::zeros(&self.grid);
        for (i2, c) in self.coeffs.iter().enumerate() {
            f.coeffs_mut()[[0, i2]] = *c;
        }
        f
    }

    /// `L²(T²)` norm of the embedded field.
    pub fn norm_l2(&self) -> f64 {
        self.grid.box_length() * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Exact solution of `∂_t θ̄ + ν|D₂|^α θ̄ = 0`.
pub fn solve_limit_1d(bar0: &Profile1D, t: f64, nu: f64, alpha: f64) -> Result<Profile1D, SolverError> {
    if !(t >= 0.0 && nu >= 0.0 && alpha > 0.0) {
        return Err(SolverError::Config(format!("need t >= 0, nu >= 0, alpha > 0; got t={t}, nu={nu}, alpha={alpha}")));
    }
    let grid = bar0.grid.clone();
    let coeffs = bar0
        .coeffs
        .iter()
        .enumerate()
        .map(|(i2, c)| {
            let k = grid.frequency(i2).abs();
            if k == 0.0 {
                *c
            } else {
                c * (-nu * t * k.powf(alpha)).exp()
            }
        })
        .collect();
    Ok(Profile1D { grid, coeffs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> Grid {
        Grid::new(32, 2.0 * PI).unwrap()
    }

    #[test]
    fn identity_at_zero_time() {
        let p = Profile1D::from_fn(&grid(), |x| x.sin() + 0.3 * (3.0 * x).cos()).unwrap();
        assert_eq!(solve_limit_1d(&p, 0.0, 1.0, 0.5).unwrap(), p);
    }

    #[test]
    fn single_mode_factor() {
        let mut p = Profile1D::zeros(&grid());
        p.set_coeff(2, Complex64::new(1.0, 0.0));
        let q = solve_limit_1d(&p, 1.0, 1.0, 0.5).unwrap();
        assert!((q.coeff(2).re - (-(2f64).sqrt()).exp()).abs() < 1e-16);
    }

    #[test]
    fn exponential_law() {
        let p = Profile1D::from_fn(&grid(), |x| (x.cos() * 2.0).exp()).unwrap();
        let a = solve_limit_1d(&solve_limit_1d(&p, 0.4, 1.0, 0.5).unwrap(), 0.9, 1.0, 0.5).unwrap();
        let b = solve_limit_1d(&p, 1.3, 1.0, 0.5).unwrap();
        for k in -15..=15 {
            assert!((a.coeff(k) - b.coeff(k)).norm() <= 1e-14 * p.coeff(0).norm());
        }
    }

    #[test]
    fn rejects_x1_dependence() {
        let f = SpectralField::from_fn(&grid(), |x1, x2| x1.sin() + x2.cos()).unwrap();
        assert!(Profile1D::from_field(&f).is_err());
        let g = SpectralField::from_fn(&grid(), |_, x2| x2.cos()).unwrap();
        assert!((Profile1D::from_field(&g).unwrap().norm_l2() - g.norm_l2()).abs() < 1e-13);
    }
}
