use std::f64::consts::PI;

use super::{eval_kernel_k, KernelError, KernelParams, KernelRow};
use crate::par::Exec;

/// Offsets `z = ρ_z μ (cos φ, sin φ)`. Directions cover `[0, π]`, which with
/// evenness in `z₂` reaches every `z`.
#[derive(Clone, Debug, PartialEq)]
pub struct ZSampling {
    /// `|z| / μ`.
    pub radii: Vec<f64>,
    pub directions: Vec<f64>,
}

impl Default for ZSampling {
    fn default() -> Self {
        Self {
            radii: vec![0.0, 0.25, 0.5, 1.0, 2.0],
            directions: (0..=8).map(|k| k as f64 * PI / 8.0).collect(),
        }
    }
}

impl ZSampling {
    pub fn validate(&self) -> Result<(), KernelError> {
        if self.radii.is_empty() || self.directions.is_empty() {
            return Err(KernelError::Config("z sampling needs radii and directions".into()));
        }
        if self.radii.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(KernelError::Config(format!("radii must be finite and >= 0: {:?}", self.radii)));
        }
        if self.directions.iter().any(|d| !(0.0..=PI).contains(d)) {
            return Err(KernelError::Config(format!("directions must lie in [0, pi]: {:?}", self.directions)));
        }
        Ok(())
    }

    /// Sample offsets at `mu`, with the origin listed once.
    pub fn points(&self, mu: f64) -> Vec<[f64; 2]> {
        let mut out = Vec::new();
        for &rad in &self.radii {
            let len = rad * mu;
            if len == 0.0 {
                if !out.contains(&[0.0, 0.0]) {
                    out.push([0.0, 0.0]);
                }
                continue;
            }
            for &phi in &self.directions {
                out.push([len * phi.cos(), len * phi.sin()]);
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SupSample {
    pub mu: f64,
    pub sup_abs: f64,
    pub z_at_sup: [f64; 2],
    /// Samples whose quadrature did not converge; their best estimates still
    /// enter the maximum.
    pub failures: usize,
    pub rows: Vec<KernelRow>,
}

/// `sup_z |K(t, μ, z)|` over the sample set, for each `μ` of the ladder.
pub fn sweep_kernel_sup(
    base: &KernelParams,
    mu_ladder: &[f64],
    z: &ZSampling,
    tol: f64,
    exec: Exec,
) -> Result<Vec<SupSample>, KernelError> {
    base.validate()?;
    z.validate()?;
    super::eval::check_tol(tol)?;
    let jobs: Vec<KernelParams> = mu_ladder
        .iter()
        .flat_map(|&mu| z.points(mu).into_iter().map(move |zp| KernelParams { mu, z: zp, ..*base }))
        .collect();
    for j in &jobs {
        j.validate()?;
    }
    let rows: Vec<KernelRow> = exec.map(&jobs, |p| {
        let (value, est_err, converged) = match eval_kernel_k(p, tol) {
            Ok(v) => (v.value, v.est_err, true),
            Err(KernelError::Accuracy { estimate, error, .. }) => (estimate, error, false),
            Err(e) => unreachable!("validated parameters: {e}"),
        };
        KernelRow {
            t: p.t,
            mu: p.mu,
            z1: p.z[0],
            z2: p.z[1],
            re_k: value.re,
            im_k: value.im,
            abs_k: value.norm(),
            est_err,
            converged,
        }
    });
    let mut out = Vec::new();
    for &mu in mu_ladder {
        let mine: Vec<KernelRow> = rows.iter().filter(|r| r.mu == mu).cloned().collect();
        let best = mine
            .iter()
            .filter(|r| r.abs_k.is_finite())
            .max_by(|a, b| a.abs_k.total_cmp(&b.abs_k));
        out.push(SupSample {
            mu,
            sup_abs: best.map_or(f64::NAN, |r| r.abs_k),
            z_at_sup: best.map_or([f64::NAN; 2], |r| [r.z1, r.z2]),
            failures: mine.iter().filter(|r| !r.converged).count(),
            rows: mine,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_listed_once() {
        let z = ZSampling::default();
        assert_eq!(z.points(10.0).len(), 1 + 4 * 9);
        assert_eq!(z.points(0.0).len(), 1);
    }

    #[test]
    fn small_mu_sup_bounded_by_envelope() {
        let base = KernelParams::default();
        let z = ZSampling {
            radii: vec![0.0, 0.5],
            directions: vec![0.0, PI / 2.0, PI],
        };
        let s = sweep_kernel_sup(&base, &[1e-3], &z, 1e-8, Exec::Serial).unwrap();
        let env = super::super::kernel_envelope(&base).unwrap();
        assert!(s[0].sup_abs <= env && s[0].sup_abs > 0.99 * env);
        assert_eq!(s[0].failures, 0);
    }

    #[test]
    fn parallel_matches_serial() {
        let base = KernelParams::default();
        let z = ZSampling {
            radii: vec![0.0, 1.0],
            directions: vec![0.0, 3.0 * PI / 4.0],
        };
        let a = sweep_kernel_sup(&base, &[5.0, 50.0], &z, 1e-7, Exec::Serial).unwrap();
        let b = sweep_kernel_sup(&base, &[5.0, 50.0], &z, 1e-7, Exec::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn later_time_shrinks_sup_by_dissipation_factor() {
        let z = ZSampling {
            radii: vec![0.0, 0.25],
            directions: vec![0.0, PI / 2.0, 7.0 * PI / 8.0],
        };
        let at = |t: f64| {
            let base = KernelParams { t, ..KernelParams::default() };
            sweep_kernel_sup(&base, &[100.0], &z, 1e-7, Exec::Serial).unwrap()[0].sup_abs
        };
        let (a, b) = (at(0.1), at(1.1));
        assert!(b <= a * (-1.0f64 / 4.0).exp());
    }

    #[test]
    fn rejects_directions_outside_half_plane() {
        let z = ZSampling {
            radii: vec![1.0],
            directions: vec![4.0],
        };
        assert!(sweep_kernel_sup(&KernelParams::default(), &[1.0], &z, 1e-6, Exec::Serial).is_err());
    }
}
