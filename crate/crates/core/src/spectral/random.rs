use ndarray::Array2;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{Grid, SpectralField};

/// Recipe for seeded random real fields with a power-law envelope.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomFieldSpec {
    /// Amplitude envelope `|ξ|^{-gamma}`.
    pub gamma: f64,
    /// Keep only `min_freq <= |ξ| <= max_freq` (physical units).
    pub min_freq: f64,
    pub max_freq: f64,
    /// Restrict to the 2/3-rule band of the grid.
    pub dealiased: bool,
    /// Rescale to this `L²` norm; `None` keeps raw Gaussian amplitudes.
    pub l2_norm: Option<f64>,
}

impl Default for RandomFieldSpec {
    fn default() -> Self {
        Self {
            gamma: 2.0,
            min_freq: 0.0,
            max_freq: f64::INFINITY,
            dealiased: true,
            l2_norm: Some(1.0),
        }
    }
}

impl RandomFieldSpec {
    pub fn shell(lo: f64, hi: f64) -> Self {
        Self {
            min_freq: lo,
            max_freq: hi,
            ..Self::default()
        }
    }
}

/// Deterministic random field for `(seed, member)`. Mean and Nyquist modes are
/// zero. Coefficients are drawn in lattice order from a ChaCha stream, so the
/// result does not depend on thread scheduling.
pub fn random_field(grid: &Grid, spec: &RandomFieldSpec, seed: u64, member: u64) -> SpectralField {
    let n = grid.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(member);
    let cut = n as f64 / 3.0;
    let mut c = Array2::<Complex64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            if grid.is_nyquist(i) || grid.is_nyquist(j) {
                continue;
            }
            let (k1, k2) = (grid.wavenumber(i), grid.wavenumber(j));
            if spec.dealiased && (k1.abs().max(k2.abs()) as f64) > cut {
                continue;
            }
            let w = grid.wavevector(i, j);
            if w.norm == 0.0 || w.norm < spec.min_freq || w.norm > spec.max_freq {
                continue;
            }
            c[[i, j]] = Complex64::new(re, im) * w.norm.powf(-spec.gamma);
        }
    }
    let mut f = SpectralField::from_coeffs(grid, c).expect("finite by construction");
    f.symmetrize();
    if let Some(target) = spec.l2_norm {
        let norm = f.norm_l2();
        if norm > 0.0 {
            f = f.scaled(target / norm);
        }
    }
    f
}

/// `amplitude · exp(-|x - center|²/(2 width²))` summed over periodic images.
pub fn gaussian_bump(grid: &Grid, center: (f64, f64), width: f64, amplitude: f64) -> SpectralField {
    let l = grid.box_length();
    let wrap = |d: f64| d - l * (d / l).round();
    SpectralField::from_fn(grid, |x, y| {
        let dx = wrap(x - center.0);
        let dy = wrap(y - center.1);
        amplitude * (-(dx * dx + dy * dy) / (2.0 * width * width)).exp()
    })
    .expect("finite samples")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_member_dependent() {
        let g = Grid::new(32, 10.0).unwrap();
        let spec = RandomFieldSpec::default();
        let a = random_field(&g, &spec, 7, 0);
        let b = random_field(&g, &spec, 7, 0);
        let c = random_field(&g, &spec, 7, 1);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.symmetry_defect() < 1e-16);
        assert!((a.norm_l2() - 1.0).abs() < 1e-12);
        assert_eq!(a.mean(), 0.0);
    }

    #[test]
    fn shell_support() {
        let g = Grid::new(64, 2.0 * std::f64::consts::PI).unwrap();
        let f = random_field(&g, &RandomFieldSpec::shell(4.0, 8.0), 1, 0);
        for i in 0..64 {
            for j in 0..64 {
                let w = g.wavevector(i, j);
                if w.norm < 4.0 || w.norm > 8.0 {
                    assert_eq!(f.coeffs()[[i, j]], Complex64::new(0.0, 0.0));
                }
            }
        }
        assert!(f.norm_l2() > 0.0);
    }
}
