use std::f64::consts::PI;
use std::io::Write;

use serde::Serialize;

use super::partition::{besov_norm, BesovNormSpec, DyadicPartition};
use super::LpError;
use crate::fit::fit_decay;
use crate::par::Exec;
use crate::spectral::{random_field, Grid, RandomFieldSpec, SpectralField};

/// One CSV line of an audit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditRow {
    pub audit: String,
    /// Block index `q`, or `λ` for Bernstein rows, or the ladder position.
    pub index: i64,
    pub params: String,
    /// Smallest ratio over the ensemble.
    pub empirical_ratio: f64,
    pub ensemble_median: f64,
    pub ensemble_max: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditReport {
    pub name: String,
    pub rows: Vec<AuditRow>,
    /// Headline constant: ensemble median and max.
    pub constant_median: f64,
    pub constant_max: f64,
    /// Worst ratio between the largest and smallest constant across the
    /// audit's scale parameter (λ, or band doubling). 1 when not applicable.
    pub stability: f64,
    /// Fitted scaling exponent of the constant, when the audit sweeps a scale.
    pub exponent: Option<f64>,
}

impl AuditReport {
    /// `max <= 4 × median` for the headline constant.
    pub fn bounded(&self) -> bool {
        self.constant_max <= 4.0 * self.constant_median
    }

    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for r in &self.rows {
            wr.serialize(r)?;
        }
        wr.flush()?;
        Ok(())
    }
}

pub(crate) fn stats(v: &[f64]) -> (f64, f64, f64) {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    let m = s.len();
    let median = if m % 2 == 1 {
        s[m / 2]
    } else {
        0.5 * (s[m / 2 - 1] + s[m / 2])
    };
    (s[0], median, s[m - 1])
}

fn row(audit: &str, index: i64, params: String, values: &[f64]) -> AuditRow {
    let (lo, med, hi) = stats(values);
    AuditRow {
        audit: audit.to_string(),
        index,
        params,
        empirical_ratio: lo,
        ensemble_median: med,
        ensemble_max: hi,
    }
}

fn check_ensemble(size: usize) -> Result<(), LpError> {
    if size == 0 {
        Err(LpError::Config("ensemble size must be >= 1".into()))
    } else {
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BernsteinConfig {
    pub n: usize,
    pub box_length: f64,
    pub lambdas: Vec<f64>,
    pub orders: Vec<f64>,
    /// Shell `a λ <= |ξ| <= b λ`.
    pub a: f64,
    pub b: f64,
    pub gamma: f64,
    pub ensemble_size: usize,
    pub seed: u64,
}

impl Default for BernsteinConfig {
    fn default() -> Self {
        Self {
            n: 256,
            box_length: 2.0 * PI,
            lambdas: vec![4.0, 8.0, 16.0, 32.0],
            orders: vec![0.5, 1.0],
            a: 1.0,
            b: 2.0,
            gamma: 2.0,
            ensemble_size: 32,
            seed: 0,
        }
    }
}

/// Empirical Bernstein constants for shell-supported random fields:
/// `‖|D|^k f‖_2 / (λ^k ‖f‖_2)` and `‖|D|^k f‖_∞ / (λ^{k+1} ‖f‖_2)`.
pub fn bernstein_audit(cfg: &BernsteinConfig, exec: Exec) -> Result<AuditReport, LpError> {
    check_ensemble(cfg.ensemble_size)?;
    if !(cfg.a > 0.0 && cfg.a <= cfg.b) {
        return Err(LpError::Config(format!("need 0 < a <= b, got a={}, b={}", cfg.a, cfg.b)));
    }
    let grid = Grid::new(cfg.n, cfg.box_length)?;
    let reach = cfg.b * cfg.lambdas.iter().cloned().fold(0.0, f64::max);
    if reach > grid.dk() * cfg.n as f64 / 3.0 {
        return Err(LpError::Config(format!(
            "shell radius {reach} exceeds the dealiased band of n={}",
            cfg.n
        )));
    }
    // ratios[λ][member] = (k, r22, r2inf) per order
    let per_lambda: Vec<Vec<Vec<(f64, f64)>>> = cfg
        .lambdas
        .iter()
        .map(|&lam| {
            let spec = RandomFieldSpec {
                gamma: cfg.gamma,
                ..RandomFieldSpec::shell(cfg.a * lam, cfg.b * lam)
            };
            exec.map_range(cfg.ensemble_size, |m| {
                let f = random_field(&grid, &spec, cfg.seed, m as u64);
                let l2 = f.norm_l2();
                cfg.orders
                    .iter()
                    .map(|&k| {
                        let dk = f.map_multiplier(|w| w.norm.powf(k).into());
                        let r22 = dk.norm_l2() / (lam.powf(k) * l2);
                        let r2i = dk.norm_lp(f64::INFINITY) / (lam.powf(k + 1.0) * l2);
                        (r22, r2i)
                    })
                    .collect()
            })
        })
        .collect();

    let mut rows = Vec::new();
    let mut stability: f64 = 1.0;
    let mut headline = Vec::new();
    for (oi, &k) in cfg.orders.iter().enumerate() {
        let mut lower22 = Vec::new();
        let mut upper22 = Vec::new();
        let mut upper2i = Vec::new();
        for (li, &lam) in cfg.lambdas.iter().enumerate() {
            let r22: Vec<f64> = per_lambda[li].iter().map(|m| m[oi].0).collect();
            let r2i: Vec<f64> = per_lambda[li].iter().map(|m| m[oi].1).collect();
            let params = format!("k={k};a={};b={}", cfg.a, cfg.b);
            let a = row("bernstein_p2_q2", lam as i64, params.clone(), &r22);
            let b = row("bernstein_p2_qinf", lam as i64, params, &r2i);
            lower22.push(a.empirical_ratio);
            upper22.push(a.ensemble_max);
            upper2i.push(b.ensemble_max);
            headline.extend_from_slice(&r2i);
            rows.push(a);
            rows.push(b);
        }
        for series in [&lower22, &upper22, &upper2i] {
            let (lo, _, hi) = stats(series);
            stability = stability.max(hi / lo);
        }
    }
    let (_, med, max) = stats(&headline);
    Ok(AuditReport {
        name: "bernstein".into(),
        rows,
        constant_median: med,
        constant_max: max,
        stability,
        exponent: None,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CommutatorConfig {
    pub n: usize,
    pub box_length: f64,
    pub s: f64,
    pub beta: f64,
    /// Inclusive block range; `None` means every block `q >= 0` the padded
    /// grid resolves.
    pub q_range: Option<(i32, i32)>,
    pub gamma: f64,
    /// Largest frequency of the ensemble; infinite fills the dealiased band.
    pub max_freq: f64,
    pub ensemble_size: usize,
    pub seed: u64,
}

impl Default for CommutatorConfig {
    fn default() -> Self {
        Self {
            n: 128,
            box_length: 2.0 * PI,
            s: 0.5,
            beta: 0.5,
            q_range: None,
            gamma: 2.0,
            max_freq: f64::INFINITY,
            ensemble_size: 32,
            seed: 0,
        }
    }
}

/// `u·∇g` on a grid where the product is alias free.
pub(crate) fn advect(u1: &SpectralField, u2: &SpectralField, g: &SpectralField) -> SpectralField {
    let (g1, g2) = g.gradient();
    &u1.product(&g1) + &u2.product(&g2)
}

/// `[Δ_q, v]·∇f = Δ_q(v·∇f) - v·∇Δ_q f`. Inputs must be band limited so that
/// products on their grid are exact.
pub fn commutator(
    part: &DyadicPartition,
    v: (&SpectralField, &SpectralField),
    f: &SpectralField,
    q: i32,
) -> Result<SpectralField, LpError> {
    let whole = part.block(&advect(v.0, v.1, f), q, false)?;
    let inner = advect(v.0, v.1, &part.block(f, q, false)?);
    Ok(&whole - &inner)
}

/// Commutator estimate with `v = R^⊥f`: ratios
/// `2^{q(s-β)} ‖[Δ_q, v]·∇f‖ / (‖f‖_{Ḃ^{2-β}_{2,2}} ‖f‖_{B^s_{2,2}})`
/// per block, and the per-member `Σ_q ratio_q²` as the headline constant.
pub fn commutator_audit(cfg: &CommutatorConfig, exec: Exec) -> Result<AuditReport, LpError> {
    check_ensemble(cfg.ensemble_size)?;
    if !(cfg.beta > 0.0 && cfg.beta < 2.0) {
        return Err(LpError::Config(format!("beta must lie in (0, 2), got {}", cfg.beta)));
    }
    if !(cfg.s > cfg.beta - 2.0 && cfg.s < 2.0) {
        return Err(LpError::Config(format!(
            "s must lie in (beta - 2, 2) = ({}, 2), got {}",
            cfg.beta - 2.0,
            cfg.s
        )));
    }
    let grid = Grid::new(cfg.n, cfg.box_length)?;
    let coarse = DyadicPartition::new(&grid);
    let fine_grid = grid.refined(2)?;
    let fine = DyadicPartition::new(&fine_grid);
    let (q_lo, q_hi) = cfg.q_range.unwrap_or((0, fine.range(false).1));
    if q_lo < 0 || q_hi > fine.range(false).1 || q_lo > q_hi {
        return Err(LpError::Config(format!("q range ({q_lo}, {q_hi}) not resolvable")));
    }
    if !(cfg.max_freq >= grid.dk()) {
        return Err(LpError::Config(format!("max_freq must be >= {}, got {}", grid.dk(), cfg.max_freq)));
    }
    let spec = RandomFieldSpec {
        gamma: cfg.gamma,
        max_freq: cfg.max_freq,
        ..RandomFieldSpec::default()
    };
    let hom = BesovNormSpec::sobolev(2.0 - cfg.beta, true);
    let inh = BesovNormSpec::sobolev(cfg.s, false);
    let per_member: Vec<Vec<f64>> = exec.map_range(cfg.ensemble_size, |m| {
        let f = random_field(&grid, &spec, cfg.seed, m as u64);
        let denom = besov_norm(&coarse, &f, &hom) * besov_norm(&coarse, &f, &inh);
        let ff = f.interpolate(2).expect("refined grid");
        let (v1, v2) = ff.perp_velocity();
        (q_lo..=q_hi)
            .map(|q| {
                let c = commutator(&fine, (&v1, &v2), &ff, q).expect("q in range");
                2f64.powf(q as f64 * (cfg.s - cfg.beta)) * c.norm_l2() / denom
            })
            .collect()
    });
    let params = format!("s={};beta={};n={};max_freq={}", cfg.s, cfg.beta, cfg.n, cfg.max_freq);
    let mut rows = Vec::new();
    for (i, q) in (q_lo..=q_hi).enumerate() {
        let vals: Vec<f64> = per_member.iter().map(|r| r[i]).collect();
        rows.push(row("commutator", q as i64, params.clone(), &vals));
    }
    let sums: Vec<f64> = per_member.iter().map(|r| r.iter().map(|x| x * x).sum()).collect();
    rows.push(row("commutator_sum_sq", -1, params, &sums));
    let (_, med, max) = stats(&sums);
    Ok(AuditReport {
        name: "commutator".into(),
        rows,
        constant_median: med,
        constant_max: max,
        stability: 1.0,
        exponent: None,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProductConfig {
    pub n: usize,
    pub box_length: f64,
    pub s: f64,
    pub beta: f64,
    /// Band limits `R` (physical frequency), increasing.
    pub r_bands: Vec<f64>,
    pub gamma: f64,
    pub ensemble_size: usize,
    pub seed: u64,
}

impl Default for ProductConfig {
    fn default() -> Self {
        Self {
            n: 128,
            box_length: 2.0 * PI,
            s: 0.5,
            beta: 0.5,
            r_bands: vec![4.0, 8.0, 16.0, 32.0],
            gamma: 0.0,
            ensemble_size: 32,
            seed: 0,
        }
    }
}

/// Product estimates for band-limited `f` and `v = R^⊥f`:
/// high blocks `2^{q(s-β)} ‖Δ_q(v·∇f)‖ / (R^{1+s-β} ‖f‖_2 ‖f‖_∞)` (ℓ² over q),
/// and low homogeneous blocks `‖Δ̇_q(v·∇f)‖ / (2^{q(2-β)} ‖|D|^β v‖ ‖f‖)` for `q <= 0`.
pub fn product_audit(cfg: &ProductConfig, exec: Exec) -> Result<AuditReport, LpError> {
    check_ensemble(cfg.ensemble_size)?;
    if !(cfg.beta > 0.0 && cfg.beta < 1.0) {
        return Err(LpError::Config(format!("beta must lie in (0, 1), got {}", cfg.beta)));
    }
    if !(cfg.s + 1.0 - cfg.beta > 0.0) {
        return Err(LpError::Config(format!("need s + 1 - beta > 0, got s={}", cfg.s)));
    }
    if cfg.r_bands.is_empty() || cfg.r_bands.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LpError::Config("band ladder must be nonempty and increasing".into()));
    }
    let grid = Grid::new(cfg.n, cfg.box_length)?;
    let top = grid.dk() * (cfg.n as f64 / 3.0).floor();
    if let Some(&r) = cfg.r_bands.iter().find(|&&r| r > top || r < grid.dk()) {
        return Err(LpError::Config(format!(
            "band {r} outside the resolvable range [{}, {top}]",
            grid.dk()
        )));
    }
    let fine_grid = grid.refined(2)?;
    let fine = DyadicPartition::new(&fine_grid);
    let q_hi = fine.range(false).1;
    let q_min = fine.range(true).0;
    let power = 1.0 + cfg.s - cfg.beta;

    let mut rows = Vec::new();
    let mut high_max = Vec::new();
    let mut raw_median = Vec::new();
    let mut all_high = Vec::new();
    for (bi, &band) in cfg.r_bands.iter().enumerate() {
        let spec = RandomFieldSpec {
            gamma: cfg.gamma,
            max_freq: band,
            ..RandomFieldSpec::default()
        };
        let per_member: Vec<(f64, f64)> = exec.map_range(cfg.ensemble_size, |m| {
            let f = random_field(&grid, &spec, cfg.seed, m as u64);
            let ff = f.interpolate(2).expect("refined grid");
            let (v1, v2) = ff.perp_velocity();
            let w = advect(&v1, &v2, &ff);
            let linf = ff.norm_lp(f64::INFINITY);
            let l2 = ff.norm_l2();
            let high: f64 = (0..=q_hi)
                .map(|q| {
                    let b = fine.block(&w, q, false).expect("in range");
                    (2f64.powf(q as f64 * (cfg.s - cfg.beta)) * b.norm_l2()).powi(2)
                })
                .sum::<f64>()
                .sqrt();
            let dbv = ff.sobolev_sq(cfg.beta, true).sqrt();
            let low = (q_min..=0)
                .map(|q| {
                    let b = fine.block(&w, q, true).expect("in range");
                    b.norm_l2() / (2f64.powf(q as f64 * (2.0 - cfg.beta)) * dbv * l2)
                })
                .fold(0.0, f64::max);
            (high / (band.powf(power) * l2 * linf), low)
        });
        let high: Vec<f64> = per_member.iter().map(|p| p.0).collect();
        let low: Vec<f64> = per_member.iter().map(|p| p.1).collect();
        let params = format!("s={};beta={};R={band};n={}", cfg.s, cfg.beta, cfg.n);
        let hr = row("product_high", bi as i64, params.clone(), &high);
        high_max.push(hr.ensemble_max);
        raw_median.push((band, hr.ensemble_median * band.powf(power)));
        all_high.extend_from_slice(&high);
        rows.push(hr);
        rows.push(row("product_low", bi as i64, params, &low));
    }
    let stability = high_max
        .windows(2)
        .map(|w| (w[1] / w[0]).max(w[0] / w[1]))
        .fold(1.0, f64::max);
    let exponent = fit_decay(&raw_median).ok().map(|f| f.slope);
    let (_, med, max) = stats(&all_high);
    Ok(AuditReport {
        name: "product".into(),
        rows,
        constant_median: med,
        constant_max: max,
        stability,
        exponent,
    })
}
