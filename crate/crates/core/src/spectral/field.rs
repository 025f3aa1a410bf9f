use std::ops::{Add, Mul, Sub};

use ndarray::{Array2, Zip};
use num_complex::Complex64;

use super::{Grid, SpectralError, Symbol, Wavevector};
use crate::par::Exec;

/// Real scalar field stored by its Fourier coefficients (FFT index order).
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Array2<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: &Grid) -> Self {
        let n = grid.n();
        Self {
            grid: grid.clone(),
            coeffs: Array2::zeros((n, n)),
        }
    }

    /// Wrap raw coefficients. The caller is responsible for conjugate symmetry.
    pub fn from_coeffs(grid: &Grid, coeffs: Array2<Complex64>) -> Result<Self, SpectralError> {
        let n = grid.n();
        if coeffs.dim() != (n, n) {
            return Err(SpectralError::Data(format!(
                "coefficient array {:?} does not match grid n={n}",
                coeffs.dim()
            )));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(SpectralError::Data("non-finite coefficient".into()));
        }
        Ok(Self {
            grid: grid.clone(),
            coeffs,
        })
    }

    pub fn from_physical(grid: &Grid, samples: &Array2<f64>) -> Result<Self, SpectralError> {
        let n = grid.n();
        if samples.dim() != (n, n) {
            return Err(SpectralError::Data(format!(
                "sample array {:?} does not match grid n={n}",
                samples.dim()
            )));
        }
        if let Some(bad) = samples.iter().find(|v| !v.is_finite()) {
            return Err(SpectralError::Data(format!("non-finite sample {bad}")));
        }
        let mut c = samples.mapv(|v| Complex64::new(v, 0.0));
        grid.forward(&mut c, Exec::default());
        Ok(Self {
            grid: grid.clone(),
            coeffs: c,
        })
    }

    /// Sample `f(x₁, x₂)` on the grid and transform.
    pub fn from_fn(grid: &Grid, f: impl Fn(f64, f64) -> f64) -> Result<Self, SpectralError> {
        let n = grid.n();
        let samples = Array2::from_shape_fn((n, n), |(i, j)| {
            f(grid.coordinate(i), grid.coordinate(j))
        });
        Self::from_physical(grid, &samples)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &Array2<Complex64> {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut Array2<Complex64> {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Array2<Complex64> {
        self.coeffs
    }

    /// Coefficient at integer wavenumber `(k₁, k₂)`.
    pub fn coeff(&self, k1: i64, k2: i64) -> Complex64 {
        self.coeffs[[self.grid.index_of(k1), self.grid.index_of(k2)]]
    }

    pub fn set_coeff(&mut self, k1: i64, k2: i64, value: Complex64) {
        let (i, j) = (self.grid.index_of(k1), self.grid.index_of(k2));
        self.coeffs[[i, j]] = value;
    }

    pub fn to_physical_complex(&self) -> Array2<Complex64> {
        let mut c = self.coeffs.clone();
        self.grid.inverse(&mut c, Exec::default());
        c
    }

    pub fn to_physical(&self) -> Array2<f64> {
        self.to_physical_complex().mapv(|c| c.re)
    }

    /// `max |f̂(-k) - conj f̂(k)|` over the lattice.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.grid.n();
        let mut worst = 0.0f64;
        for i in 0..n {
            let mi = (n - i) % n;
            for j in 0..n {
                let mj = (n - j) % n;
                let d = (self.coeffs[[mi, mj]] - self.coeffs[[i, j]].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Replace every coefficient with the conjugate-symmetric average.
    pub fn symmetrize(&mut self) {
        let n = self.grid.n();
        let old = self.coeffs.clone();
        for i in 0..n {
            let mi = (n - i) % n;
            for j in 0..n {
                let mj = (n - j) % n;
                self.coeffs[[i, j]] = 0.5 * (old[[i, j]] + old[[mi, mj]].conj());
            }
        }
    }

    /// Coefficient-wise product with an arbitrary multiplier.
    pub fn map_multiplier(&self, m: impl Fn(&Wavevector) -> Complex64) -> Self {
        let n = self.grid.n();
        let mut out = self.coeffs.clone();
        for i in 0..n {
            for j in 0..n {
                let w = self.grid.wavevector(i, j);
                out[[i, j]] *= m(&w);
            }
        }
        Self {
            grid: self.grid.clone(),
            coeffs: out,
        }
    }

    /// Apply a validated symbol.
    pub fn apply(&self, s: &Symbol) -> Result<Self, SpectralError> {
        s.validate()?;
        Ok(self.map_multiplier(|w| s.eval(w)))
    }

    /// Apply a symbol that is known to be valid (internal hot paths).
    pub(crate) fn apply_unchecked(&self, s: &Symbol) -> Self {
        self.map_multiplier(|w| s.eval(w))
    }

    /// 2/3-rule truncation: zero every `max(|k₁|,|k₂|) > n/3`.
    pub fn dealias(&self) -> Self {
        let mut out = self.clone();
        out.dealias_in_place();
        out
    }

    pub fn dealias_in_place(&mut self) {
        let n = self.grid.n();
        let cut = n as f64 / 3.0;
        for i in 0..n {
            let k1 = self.grid.wavenumber(i).abs() as f64;
            for j in 0..n {
                let k2 = self.grid.wavenumber(j).abs() as f64;
                if k1.max(k2) > cut {
                    self.coeffs[[i, j]] = Complex64::new(0.0, 0.0);
                }
            }
        }
    }

    /// Velocity `R^⊥θ = (-R₂θ, R₁θ)`.
    pub fn perp_velocity(&self) -> (Self, Self) {
        let u1 = self.apply_unchecked(&Symbol::Riesz { axis: 2 }).scaled(-1.0);
        let u2 = self.apply_unchecked(&Symbol::Riesz { axis: 1 });
        (u1, u2)
    }

    pub fn gradient(&self) -> (Self, Self) {
        (
            self.apply_unchecked(&Symbol::Derivative { axis: 1 }),
            self.apply_unchecked(&Symbol::Derivative { axis: 2 }),
        )
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            coeffs: self.coeffs.mapv(|c| c * s),
        }
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[[0, 0]].re
    }

    /// Real `L²` inner product via Parseval.
    pub fn inner(&self, other: &Self) -> f64 {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        let s: f64 = Zip::from(&self.coeffs)
            .and(&other.coeffs)
            .fold(0.0, |acc, a, b| acc + (a * b.conj()).re);
        s * self.grid.area()
    }

    pub fn norm_l2_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.area()
    }

    pub fn norm_l2(&self) -> f64 {
        self.norm_l2_sq().sqrt()
    }

    /// `Σ w(ξ) |f̂(ξ)|²` scaled by the box area.
    pub fn weighted_sq(&self, w: impl Fn(&Wavevector) -> f64) -> f64 {
        let n = self.grid.n();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                let wv = self.grid.wavevector(i, j);
                s += w(&wv) * self.coeffs[[i, j]].norm_sqr();
            }
        }
        s * self.grid.area()
    }

    /// `‖f‖²_{H^s}` (inhomogeneous) or `‖f‖²_{Ḣ^s}` (homogeneous, zero mode dropped).
    pub fn sobolev_sq(&self, s: f64, homogeneous: bool) -> f64 {
        if homogeneous {
            self.weighted_sq(|w| if w.norm == 0.0 { 0.0 } else { w.norm.powf(2.0 * s) })
        } else {
            self.weighted_sq(|w| (1.0 + w.norm * w.norm).powf(s))
        }
    }

    /// Spectral interpolation onto a grid `factor` times finer (same box).
    pub fn interpolate(&self, factor: usize) -> Result<Self, SpectralError> {
        if factor == 1 {
            return Ok(self.clone());
        }
        let fine = self.grid.refined(factor)?;
        let n = self.grid.n();
        let mut out = Array2::zeros((fine.n(), fine.n()));
        let targets = |i: usize| -> Vec<(usize, f64)> {
            let k = self.grid.wavenumber(i);
            if self.grid.is_nyquist(i) {
                vec![(fine.index_of(k), 0.5), (fine.index_of(-k), 0.5)]
            } else {
                vec![(fine.index_of(k), 1.0)]
            }
        };
        for i in 0..n {
            let ti = targets(i);
            for j in 0..n {
                let c = self.coeffs[[i, j]];
                if c == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for &(a, wa) in &ti {
                    for &(b, wb) in &targets(j) {
                        out[[a, b]] += c * (wa * wb);
                    }
                }
            }
        }
        Ok(Self {
            grid: fine,
            coeffs: out,
        })
    }

    /// Grid-quadrature `L^p` norm; `p = ∞` is the grid maximum.
    pub fn norm_lp(&self, p: f64) -> f64 {
        lp_of_samples(&self.to_physical(), p, self.grid.dx())
    }

    /// `L^p` norm evaluated on the `factor`-times zero-padded interpolant.
    pub fn norm_lp_fine(&self, p: f64, factor: usize) -> Result<f64, SpectralError> {
        Ok(self.interpolate(factor)?.norm_lp(p))
    }

    /// Pointwise product of the physical fields, computed on this grid with no
    /// anti-aliasing; callers truncate inputs/outputs as needed.
    pub fn product(&self, other: &Self) -> Self {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        let a = self.to_physical_complex();
        let b = other.to_physical_complex();
        let mut c = Zip::from(&a).and(&b).map_collect(|x, y| Complex64::new(x.re * y.re, 0.0));
        self.grid.forward(&mut c, Exec::default());
        Self {
            grid: self.grid.clone(),
            coeffs: c,
        }
    }

    /// Exact product: evaluated on the 2× padded grid and truncated back.
    pub fn product_exact(&self, other: &Self) -> Self {
        let a = self.interpolate(2).expect("refined grid");
        let b = other.interpolate(2).expect("refined grid");
        a.product(&b).restrict(&self.grid)
    }

    /// Keep the lattice points representable on `coarse` (same box).
    pub fn restrict(&self, coarse: &Grid) -> Self {
        assert_eq!(coarse.box_length(), self.grid.box_length());
        let n = coarse.n();
        let mut out = Array2::zeros((n, n));
        for i in 0..n {
            let k1 = coarse.wavenumber(i);
            for j in 0..n {
                let k2 = coarse.wavenumber(j);
                if coarse.is_nyquist(i) || coarse.is_nyquist(j) {
                    continue;
                }
                out[[i, j]] = self.coeff(k1, k2);
            }
        }
        Self {
            grid: coarse.clone(),
            coeffs: out,
        }
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// `self += s·other`.
    pub fn add_scaled_assign(&mut self, other: &Self, s: f64) {
        Zip::from(&mut self.coeffs)
            .and(&other.coeffs)
            .for_each(|a, b| *a += b * s);
    }
}

pub(crate) fn lp_of_samples(v: &Array2<f64>, p: f64, dx: f64) -> f64 {
    if p.is_infinite() {
        v.iter().fold(0.0, |m, x| m.max(x.abs()))
    } else if p == 2.0 {
        (v.iter().map(|x| x * x).sum::<f64>() * dx * dx).sqrt()
    } else {
        (v.iter().map(|x| x.abs().powf(p)).sum::<f64>() * dx * dx).powf(1.0 / p)
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        assert_eq!(self.grid, rhs.grid, "fields live on different grids");
        SpectralField {
            grid: self.grid.clone(),
            coeffs: &self.coeffs + &rhs.coeffs,
        }
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        assert_eq!(self.grid, rhs.grid, "fields live on different grids");
        SpectralField {
            grid: self.grid.clone(),
            coeffs: &self.coeffs - &rhs.coeffs,
        }
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, rhs: f64) -> SpectralField {
        self.scaled(rhs)
    }
}
