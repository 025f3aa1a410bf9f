use crate::spectral::{smooth_step_down, Grid, SpectralField};

use super::LpError;

/// Low-frequency profile `ζ`: 1 on `|ξ| <= 3/4`, 0 on `|ξ| >= 4/3`.
#[inline]
pub fn zeta(rho: f64) -> f64 {
    smooth_step_down(rho, 0.75, 4.0 / 3.0)
}

/// Shell profile `ψ(ξ) = ζ(ξ/2) - ζ(ξ)`, supported in `3/4 <= |ξ| <= 8/3`.
#[inline]
pub fn psi(rho: f64) -> f64 {
    zeta(0.5 * rho) - zeta(rho)
}

/// Index ranges of the dyadic blocks that can see the lattice of a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct DyadicPartition {
    grid: Grid,
    /// Lowest homogeneous block whose support reaches the lattice.
    q_min: i32,
    /// Highest block needed to reconstruct every lattice point.
    q_max: i32,
}

impl DyadicPartition {
    pub fn new(grid: &Grid) -> Self {
        let top = grid.max_frequency();
        let mut q_max = -1;
        // Σ_{q<=q_max} blocks telescopes to ζ(2^{-q_max-1}ξ), which is 1 once
        // |ξ| <= 2^{q_max+1}·3/4.
        while 2f64.powi(q_max + 1) * 0.75 < top {
            q_max += 1;
        }
        let bottom = grid.dk();
        let mut q_min = 0;
        // the homogeneous sum from q_min leaves out ζ(2^{-q_min}ξ), zero once
        // 2^{q_min}·4/3 <= |ξ|
        while 2f64.powi(q_min) * 4.0 / 3.0 > bottom {
            q_min -= 1;
        }
        Self {
            grid: grid.clone(),
            q_min,
            q_max,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Inclusive block range; inhomogeneous blocks start at `-1` (the `ζ` block).
    pub fn range(&self, homogeneous: bool) -> (i32, i32) {
        if homogeneous {
            (self.q_min, self.q_max)
        } else {
            (-1, self.q_max)
        }
    }

    /// Multiplier of block `q` at radius `rho`.
    #[inline]
    pub fn weight(q: i32, homogeneous: bool, rho: f64) -> f64 {
        if !homogeneous && q == -1 {
            zeta(rho)
        } else {
            psi(rho / 2f64.powi(q))
        }
    }

    pub fn block(&self, f: &SpectralField, q: i32, homogeneous: bool) -> Result<SpectralField, LpError> {
        let (lo, hi) = self.range(homogeneous);
        if q < lo || q > hi {
            return Err(LpError::Range { q, lo, hi });
        }
        Ok(f.map_multiplier(|w| Self::weight(q, homogeneous, w.norm).into()))
    }

    pub fn blocks(&self, f: &SpectralField, homogeneous: bool) -> Vec<(i32, SpectralField)> {
        let (lo, hi) = self.range(homogeneous);
        (lo..=hi)
            .map(|q| (q, self.block(f, q, homogeneous).expect("in range")))
            .collect()
    }

    /// Lower end `c_ψ` of `Σ_j φ_j(ξ)²` (upper end is 1), from a dense radial
    /// scan. The homogeneous family is scale invariant, so one octave suffices.
    pub fn square_sum_floor(homogeneous: bool) -> f64 {
        let mut lo = f64::INFINITY;
        let steps = 200_000;
        for i in 0..=steps {
            let rho = if homogeneous {
                1.0 + i as f64 / steps as f64
            } else {
                8.0 * i as f64 / steps as f64
            };
            let mut s = if homogeneous { 0.0 } else { zeta(rho).powi(2) };
            let start = if homogeneous { -4 } else { 0 };
            for j in start..8 {
                s += psi(rho / 2f64.powi(j)).powi(2);
            }
            lo = lo.min(s);
        }
        lo
    }

    /// Bounds of `‖f‖²_{B^s_{2,2}} / ‖f‖²_{H^s}` over all fields on this grid:
    /// the extreme per-lattice-point ratios.
    pub fn sobolev_equivalence(&self, s: f64, homogeneous: bool) -> (f64, f64) {
        let (q_lo, q_hi) = self.range(homogeneous);
        let n = self.grid.n();
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let rho = self.grid.wavevector(i, j).norm;
                if homogeneous && rho == 0.0 {
                    continue;
                }
                let besov: f64 = (q_lo..=q_hi)
                    .map(|q| 2f64.powf(2.0 * q as f64 * s) * Self::weight(q, homogeneous, rho).powi(2))
                    .sum();
                let sob = if homogeneous {
                    rho.powf(2.0 * s)
                } else {
                    (1.0 + rho * rho).powf(s)
                };
                let r = besov / sob;
                lo = lo.min(r);
                hi = hi.max(r);
            }
        }
        (lo, hi)
    }
}

/// `(s, p, r)` plus the homogeneous flag.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BesovNormSpec {
    pub s: f64,
    pub p: f64,
    pub r: f64,
    pub homogeneous: bool,
}

impl BesovNormSpec {
    pub fn new(s: f64, p: f64, r: f64, homogeneous: bool) -> Result<Self, LpError> {
        let ok = |x: f64| x >= 1.0;
        if !ok(p) || !ok(r) || !s.is_finite() {
            return Err(LpError::Config(format!(
                "Besov indices need p, r in [1, ∞] and finite s; got s={s}, p={p}, r={r}"
            )));
        }
        Ok(Self { s, p, r, homogeneous })
    }

    pub fn sobolev(s: f64, homogeneous: bool) -> Self {
        Self {
            s,
            p: 2.0,
            r: 2.0,
            homogeneous,
        }
    }
}

/// `‖{2^{qs} ‖Δ_q f‖_{L^p}}_q‖_{ℓ^r}` over the partition's block range.
pub fn besov_norm(part: &DyadicPartition, f: &SpectralField, spec: &BesovNormSpec) -> f64 {
    let terms: Vec<f64> = part
        .blocks(f, spec.homogeneous)
        .into_iter()
        .map(|(q, b)| {
            let lp = if spec.p == 2.0 { b.norm_l2() } else { b.norm_lp(spec.p) };
            2f64.powf(q as f64 * spec.s) * lp
        })
        .collect();
    sequence_norm(&terms, spec.r)
}

pub(crate) fn sequence_norm(terms: &[f64], r: f64) -> f64 {
    if r.is_infinite() {
        terms.iter().fold(0.0, |m, x| m.max(x.abs()))
    } else {
        terms.iter().map(|x| x.abs().powf(r)).sum::<f64>().powf(1.0 / r)
    }
}
