use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;

use super::quad::ChebTable;
use super::{KernelError, KernelParams, KernelValue};
use crate::spectral::chi;

/// Convergence is judged against `max(|K|, FLOOR · envelope)`.
pub const FLOOR: f64 = 1e-6;
/// Absolute accuracy is never demanded below `ROUNDOFF · envelope`.
pub const ROUNDOFF: f64 = 1e-13;
/// Cumulative integrand evaluations allowed per call.
pub const NODE_BUDGET: u64 = 1 << 26;

const TABLE_PIECES: usize = 64;
const TABLE_DEGREE: usize = 24;
const TABLE_RHO_NODES: usize = 2048;
const WINDOW_LADDER: [f64; 8] = [50.0, 100.0, 200.0, 400.0, 800.0, 1600.0, 3200.0, 6400.0];
const WINDOW_PROBES: usize = 32;
/// Radial bandwidth used to size unwindowed rules; refinement takes it from there.
const BASE_BAND: f64 = 400.0;
const MAX_LEVELS: u32 = 12;
const ANCHOR: usize = 128;

/// Radial slice of the integrand in polar coordinates `ξ = ρ(cos ω, sin ω)`:
/// `h(ρ, c) = χ(ρ/R) (1 - χ(2ρc/r)) ρ e^{-νtρ^α}` with `c = |cos ω|`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Radial {
    r: f64,
    big_r: f64,
    nu_t: f64,
    alpha: f64,
}

impl Radial {
    pub fn new(p: &KernelParams) -> Self {
        Self {
            r: p.r,
            big_r: p.big_r,
            nu_t: p.nu * p.t,
            alpha: p.alpha,
        }
    }

    fn lo(&self) -> f64 {
        0.5 * self.r
    }

    fn hi(&self) -> f64 {
        2.0 * self.big_r
    }

    /// Rays with `|cos ω| <= c_min` miss the support.
    fn c_min(&self) -> f64 {
        self.r / (4.0 * self.big_r)
    }

    fn outer(&self, rho: f64) -> f64 {
        chi(rho / self.big_r) * rho * (-self.nu_t * rho.powf(self.alpha)).exp()
    }
}

/// Trapezoid rule on `[r/2, 2R]`; `h` vanishes to all orders at both ends.
struct RhoRule {
    lo: f64,
    step: f64,
    weights: Vec<f64>,
}

impl RhoRule {
    fn new(rad: &Radial, n: usize) -> Self {
        let lo = rad.lo();
        let step = (rad.hi() - lo) / n as f64;
        let weights = (0..=n).map(|k| rad.outer(lo + k as f64 * step) * step).collect();
        Self { lo, step, weights }
    }

    fn len(&self) -> usize {
        self.weights.len()
    }

    /// First node inside the support of `h(·, c)` and the node where the
    /// inner cutoff reaches 1.
    fn span(&self, rad: &Radial, c: f64) -> (usize, usize) {
        let start = ((rad.r / (2.0 * c) - self.lo) / self.step).ceil().max(0.0) as usize;
        let flat = ((rad.r / c - self.lo) / self.step).ceil().max(0.0) as usize;
        (start.min(self.len()), flat.min(self.len()))
    }

    fn weight(&self, rad: &Radial, k: usize, c: f64, flat: usize) -> f64 {
        if k >= flat {
            self.weights[k]
        } else {
            let rho = self.lo + k as f64 * self.step;
            self.weights[k] * (1.0 - chi(2.0 * rho * c / rad.r))
        }
    }

    /// `∫ h(ρ, c) dρ`.
    fn profile(&self, rad: &Radial, c: f64) -> f64 {
        if c <= rad.c_min() {
            return 0.0;
        }
        let (start, flat) = self.span(rad, c);
        (start..self.len()).map(|k| self.weight(rad, k, c, flat)).sum()
    }

    /// `∫ h(ρ, c) e^{iρs} dρ`.
    fn transform(&self, rad: &Radial, c: f64, s: f64) -> Complex64 {
        if c <= rad.c_min() {
            return Complex64::new(0.0, 0.0);
        }
        let (start, flat) = self.span(rad, c);
        let turn = Complex64::from_polar(1.0, self.step * s);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut e = Complex64::new(1.0, 0.0);
        for k in start..self.len() {
            if (k - start) % ANCHOR == 0 {
                e = Complex64::from_polar(1.0, (self.lo + k as f64 * self.step) * s);
            }
            acc += e * self.weight(rad, k, c, flat);
            e *= turn;
        }
        acc
    }
}

/// `G(c) = ∫ h(ρ, c) dρ` tabulated on `[c_min, 1]`, with an interpolation
/// error estimate.
pub(crate) struct ProfileTable {
    rad: Radial,
    table: ChebTable,
    pub error: f64,
}

impl ProfileTable {
    pub fn new(rad: Radial) -> Self {
        let rule = RhoRule::new(&rad, TABLE_RHO_NODES);
        let table = ChebTable::build(rad.c_min(), 1.0, TABLE_PIECES, TABLE_DEGREE, |c| rule.profile(&rad, c));
        let mut error: f64 = 0.0;
        for p in 0..table.pieces() {
            let (a, w) = table.piece(p);
            for u in [0.015, 0.5, 0.985] {
                let c = a + u * w;
                error = error.max((table.eval(c) - rule.profile(&rad, c)).abs());
            }
        }
        Self { rad, table, error }
    }

    pub fn eval(&self, c: f64) -> f64 {
        if c <= self.rad.c_min() {
            0.0
        } else {
            self.table.eval(c.min(1.0))
        }
    }

    /// `∫ G(|cos ω|) dω` over the circle, i.e. `∫ Ψ e^{-νt|ξ|^α} dξ`.
    pub fn envelope(&self) -> f64 {
        quarter_sum(4096, |w| self.eval(w.cos()))
    }
}

/// `4 ∫_0^{π/2} g dω` by the trapezoid rule with `m` panels; exact to
/// spectral accuracy when `g(|cos ω|)` extends smoothly to the circle.
fn quarter_sum<F: Fn(f64) -> f64>(m: usize, g: F) -> f64 {
    let dw = FRAC_PI_2 / m as f64;
    let inner: f64 = (1..m).map(|j| g(j as f64 * dw)).sum();
    4.0 * dw * (inner + 0.5 * (g(0.0) + g(FRAC_PI_2)))
}

/// `∫ Ψ e^{-νt|ξ|^α} dξ`, which dominates `|K|` for every `μ` and `z`.
pub fn kernel_envelope(p: &KernelParams) -> Result<f64, KernelError> {
    p.validate()?;
    Ok(ProfileTable::new(Radial::new(p)).envelope())
}

/// Absolute error accepted for a value of magnitude `abs`.
pub(crate) fn target(abs: f64, tol: f64, envelope: f64) -> f64 {
    (tol * abs.max(FLOOR * envelope)).max(ROUNDOFF * envelope)
}

pub(crate) fn check_tol(tol: f64) -> Result<(), KernelError> {
    if (1e-10..=1e-3).contains(&tol) {
        Ok(())
    } else {
        Err(KernelError::Config(format!("tol must lie in [1e-10, 1e-3], got {tol}")))
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Options {
    pub budget: u64,
    /// Integrate the whole circle even when windows would suffice.
    pub full_circle: bool,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            budget: NODE_BUDGET,
            full_circle: false,
        }
    }
}

/// `K(t, μ, z) = ∫ Ψ(ξ) e^{iμξ₁/|ξ| + iz·ξ - νt|ξ|^α} dξ` with
/// `Ψ(ξ) = χ(|ξ|/R)(1 - χ(2|ξ₁|/r))`.
///
/// Polar trapezoid rules, doubled in both directions until successive levels
/// agree to `tol · max(|K|, FLOOR · envelope)`. For `|z|` beyond the radial
/// bandwidth only the two angular windows where `|z·ξ̂|` is below it are
/// integrated; the neglected remainder is bounded a posteriori and added to
/// the reported error.
pub fn eval_kernel_k(p: &KernelParams, tol: f64) -> Result<KernelValue, KernelError> {
    eval_with(p, tol, Options::default())
}

pub(crate) fn eval_with(p: &KernelParams, tol: f64, opt: Options) -> Result<KernelValue, KernelError> {
    p.validate()?;
    check_tol(tol)?;
    let rad = Radial::new(p);
    let table = ProfileTable::new(rad);
    let envelope = table.envelope();
    let zabs = p.z[0].hypot(p.z[1]);
    if zabs == 0.0 {
        origin(p, tol, opt, &table, envelope)
    } else {
        offset(p, tol, opt, envelope, zabs)
    }
}

struct Refinement {
    used: u64,
    prev: Option<Complex64>,
    diff: f64,
}

enum Step {
    Done(KernelValue),
    More,
}

impl Refinement {
    fn new() -> Self {
        Self {
            used: 0,
            prev: None,
            diff: f64::INFINITY,
        }
    }

    fn admit(&self, cost: u64, budget: u64, extra_err: f64) -> Result<(), KernelError> {
        if self.used + cost <= budget {
            return Ok(());
        }
        let estimate = self.prev.unwrap_or(Complex64::new(f64::NAN, f64::NAN));
        Err(KernelError::Accuracy {
            estimate,
            error: self.diff + extra_err,
            nodes: self.used,
        })
    }

    fn record(&mut self, k: Complex64, cost: u64, tol: f64, extra_err: f64, envelope: f64) -> Step {
        self.used += cost;
        if let Some(prev) = self.prev {
            self.diff = (k - prev).norm();
        }
        self.prev = Some(k);
        if self.diff + extra_err <= target(k.norm(), tol, envelope) {
            Step::Done(KernelValue {
                value: k,
                est_err: self.diff + extra_err,
                nodes: self.used,
                envelope,
            })
        } else {
            Step::More
        }
    }

    fn exhausted(&self, extra_err: f64) -> KernelError {
        KernelError::Accuracy {
            estimate: self.prev.unwrap_or(Complex64::new(f64::NAN, f64::NAN)),
            error: self.diff + extra_err,
            nodes: self.used,
        }
    }
}

/// `z = 0`: `K = 4 ∫_0^{π/2} G(cos ω) cos(μ cos ω) dω`.
fn origin(
    p: &KernelParams,
    tol: f64,
    opt: Options,
    table: &ProfileTable,
    envelope: f64,
) -> Result<KernelValue, KernelError> {
    let setup = (TABLE_PIECES * (TABLE_DEGREE + 4) * (TABLE_RHO_NODES + 1)) as u64;
    let mut refine = Refinement::new();
    refine.used = setup;
    let mut m = ((p.mu + 1024.0) / 4.0).ceil() as usize + 16;
    for _ in 0..MAX_LEVELS {
        let cost = (m + 1) as u64;
        refine.admit(cost, opt.budget, table.error)?;
        let k = quarter_sum(m, |w| {
            let c = w.cos();
            table.eval(c) * (p.mu * c).cos()
        });
        if let Step::Done(v) = refine.record(k.into(), cost, tol, table.error, envelope) {
            return Ok(v);
        }
        m *= 2;
    }
    Err(refine.exhausted(table.error))
}

/// Smallest ladder bandwidth beyond which `|∫ h(ρ,c) e^{iρs} dρ|` stays below
/// `threshold` on probe rays; falls back to the top rung with its residual.
fn radial_bandwidth(rad: &Radial, threshold: f64) -> (f64, f64) {
    let mut last = (0.0, f64::INFINITY);
    for &band in WINDOW_LADDER.iter() {
        let n = ((rad.hi() - rad.lo()) * 8.0 * band / TAU).ceil() as usize;
        let rule = RhoRule::new(rad, n);
        let mut worst: f64 = 0.0;
        for i in 0..WINDOW_PROBES {
            let c = rad.c_min() + (1.0 - rad.c_min()) * (i as f64 + 1.0) / WINDOW_PROBES as f64;
            for f in [1.0, 1.5, 2.0, 3.0] {
                worst = worst.max(rule.transform(rad, c, f * band).norm());
            }
        }
        last = (band, TAU * worst);
        if last.1 <= threshold {
            break;
        }
    }
    last
}

fn offset(
    p: &KernelParams,
    tol: f64,
    opt: Options,
    envelope: f64,
    zabs: f64,
) -> Result<KernelValue, KernelError> {
    let rad = Radial::new(p);
    let phi = p.z[1].atan2(p.z[0]);
    let mut band = BASE_BAND;
    let mut windows = vec![0.0];
    let mut half = PI;
    let mut extra_err = 0.0;
    if zabs > WINDOW_LADDER[0] && !opt.full_circle {
        let (b, tail) = radial_bandwidth(&rad, 0.1 * target(0.0, tol, envelope));
        if zabs > b {
            band = b;
            half = (b / zabs).asin();
            windows = vec![phi + FRAC_PI_2 - half, phi - FRAC_PI_2 - half];
            extra_err = tail;
        }
    }
    let windowed = windows.len() == 2;
    let width = 2.0 * half;
    let smax = if windowed { band } else { zabs };
    let freq = p.mu + rad.hi() * zabs + 0.5 * p.big_r * band;
    let mut n_rho = ((rad.hi() - rad.lo()) * (smax + band) / TAU).ceil() as usize + 32;
    let mut n_w = (width * freq / TAU).ceil() as usize + 32;
    let mut refine = Refinement::new();
    for _ in 0..MAX_LEVELS {
        let cost = (windows.len() * n_w * (n_rho + 1)) as u64;
        refine.admit(cost, opt.budget, extra_err)?;
        let rule = RhoRule::new(&rad, n_rho);
        let dw = width / n_w as f64;
        let mut k = Complex64::new(0.0, 0.0);
        for &start in &windows {
            for j in 0..n_w {
                let w = start + (j as f64 + 0.5) * dw;
                let c = w.cos();
                let s = zabs * (w - phi).cos();
                let inner = rule.transform(&rad, c.abs(), s);
                k += inner * Complex64::from_polar(1.0, p.mu * c);
            }
        }
        k *= dw;
        if let Step::Done(v) = refine.record(k, cost, tol, extra_err, envelope) {
            return Ok(v);
        }
        n_rho *= 2;
        n_w *= 2;
    }
    Err(refine.exhausted(extra_err))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> KernelParams {
        KernelParams::default()
    }

    /// Cartesian trapezoid of the full integrand; spectrally accurate for
    /// small phases since the integrand is C^∞ with compact support.
    fn dense_oracle(p: &KernelParams, n: usize) -> Complex64 {
        let l = 2.0 * p.big_r;
        let d = 2.0 * l / n as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let x1 = -l + i as f64 * d;
            let cut1 = 1.0 - chi(2.0 * x1 / p.r);
            if cut1 == 0.0 {
                continue;
            }
            for j in 0..n {
                let x2 = -l + j as f64 * d;
                let rho = x1.hypot(x2);
                let amp = chi(rho / p.big_r) * cut1;
                if amp == 0.0 {
                    continue;
                }
                let decay = (-p.nu * p.t * rho.powf(p.alpha)).exp();
                let phase = p.mu * x1 / rho + p.z[0] * x1 + p.z[1] * x2;
                acc += Complex64::from_polar(amp * decay, phase);
            }
        }
        acc * d * d
    }

    #[test]
    fn plain_area_matches_dense_grid() {
        let p = KernelParams { t: 0.0, ..base() };
        let k = eval_kernel_k(&p, 1e-10).unwrap();
        let oracle = dense_oracle(&p, 4096);
        assert!((k.value - oracle).norm() <= 1e-8 * oracle.norm(), "{} vs {}", k.value, oracle);
        assert!(k.value.re > 0.0 && k.value.im == 0.0);
        assert!((k.envelope - oracle.re).abs() <= 1e-8 * oracle.re);
    }

    #[test]
    fn oscillatory_case_matches_dense_grid() {
        let p = KernelParams { mu: 3.0, z: [2.0, -1.5], ..base() };
        let k = eval_kernel_k(&p, 1e-9).unwrap();
        let oracle = dense_oracle(&p, 2048);
        assert!((k.value - oracle).norm() <= 1e-8 * oracle.norm(), "{} vs {}", k.value, oracle);
    }

    #[test]
    fn windows_agree_with_full_circle() {
        for (mu, z) in [(1e3, [-200.0, 700.0]), (50.0, [-500.0, 620.0]), (1e3, [900.0, 300.0])] {
            let p = KernelParams { mu, z, ..base() };
            let w = eval_kernel_k(&p, 1e-8).unwrap();
            let opt = Options { full_circle: true, budget: 1 << 30 };
            let f = eval_with(&p, 1e-8, opt).unwrap();
            let tol = target(w.value.norm(), 1e-8, w.envelope);
            assert!((w.value - f.value).norm() <= 2.0 * tol, "{mu} {z:?}: {} vs {}", w.value, f.value);
        }
    }

    #[test]
    fn value_is_real_and_even_in_z2() {
        for (mu, z) in [(40.0, [3.0, 2.0]), (300.0, [-60.0, 45.0]), (2e3, [-500.0, -1200.0])] {
            let p = KernelParams { mu, z, ..base() };
            let k = eval_kernel_k(&p, 1e-9).unwrap();
            let q = eval_kernel_k(&KernelParams { z: [z[0], -z[1]], ..p }, 1e-9).unwrap();
            let tol = target(k.value.norm(), 1e-9, k.envelope);
            assert!(k.value.im.abs() <= tol, "{}", k.value);
            assert!((k.value - q.value).norm() <= 2.0 * tol);
        }
    }

    #[test]
    fn reflecting_z1_is_not_a_symmetry() {
        // a(ξ) is odd in ξ₁, so z ↦ -z swaps the sign of μ rather than conjugating
        let p = KernelParams { mu: 100.0, z: [-25.0, 10.0], ..base() };
        let k = eval_kernel_k(&p, 1e-9).unwrap().value;
        let m = eval_kernel_k(&KernelParams { z: [25.0, -10.0], ..p }, 1e-9).unwrap().value;
        assert!((k - m.conj()).norm() > 1e-3 * k.norm());
    }

    #[test]
    fn origin_follows_stationary_phase() {
        let p = base();
        let rad = Radial::new(&p);
        let g1 = RhoRule::new(&rad, 4096).profile(&rad, 1.0);
        for mu in [1e5, 1e6] {
            let k = eval_kernel_k(&KernelParams { mu, ..p }, 1e-8).unwrap().value.re;
            let lead = 2.0 * g1 * (TAU / mu).sqrt() * (mu - PI / 4.0).cos();
            assert!((k - lead).abs() <= 3.0 / mu.sqrt() * g1, "{mu}: {k} vs {lead}");
        }
    }

    #[test]
    fn bounded_by_envelope_which_decreases_in_t() {
        let mut prev = f64::INFINITY;
        for t in [0.0, 0.1, 0.5, 2.0] {
            let p = KernelParams { t, mu: 30.0, z: [-5.0, 1.0], ..base() };
            let k = eval_kernel_k(&p, 1e-8).unwrap();
            assert!(k.value.norm() <= k.envelope);
            assert!(k.envelope < prev);
            prev = k.envelope;
        }
    }

    #[test]
    fn tighter_tolerance_moves_result_within_tol() {
        let p = KernelParams { mu: 500.0, z: [-100.0, 40.0], ..base() };
        let a = eval_kernel_k(&p, 1e-5).unwrap();
        let b = eval_kernel_k(&p, 1e-9).unwrap();
        assert!((a.value - b.value).norm() <= target(b.value.norm(), 1e-5, b.envelope));
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let p = KernelParams { mu: 1e4, z: [-2000.0, 500.0], ..base() };
        let opt = Options { budget: 1_000_000, full_circle: false };
        match eval_with(&p, 1e-10, opt) {
            Err(KernelError::Accuracy { nodes, estimate, .. }) => {
                assert!(nodes <= 1_000_000);
                assert!(estimate.re.is_nan());
            }
            other => panic!("expected accuracy error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(eval_kernel_k(&base(), 1e-2).is_err());
        assert!(eval_kernel_k(&KernelParams { r: 5.0, ..base() }, 1e-6).is_err());
        assert!(eval_kernel_k(&KernelParams { mu: -1.0, ..base() }, 1e-6).is_err());
    }
}
