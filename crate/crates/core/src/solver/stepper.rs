use ndarray::{Array2, Zip};
use num_complex::Complex64;

use super::SolverError;
use crate::par::Exec;
use crate::spectral::{Grid, Symbol};

const I: Complex64 = Complex64::new(0.0, 1.0);

pub(crate) fn multiplier(grid: &Grid, s: Symbol) -> Array2<Complex64> {
    let n = grid.n();
    Array2::from_shape_fn((n, n), |(i1, i2)| s.eval(&grid.wavevector(i1, i2)))
}

/// Precomputed multipliers and the 2/3 mask for pseudo-spectral products.
pub(crate) struct Ops {
    pub grid: Grid,
    pub exec: Exec,
    mask: Option<Array2<f64>>,
    u1: Array2<Complex64>,
    u2: Array2<Complex64>,
    d1: Array2<Complex64>,
    d2: Array2<Complex64>,
    hilbert: Array2<Complex64>,
}

/// Physical fields of an `x₁`-independent background: `Hθ̄` and `∂₂θ̄`.
pub(crate) struct Background {
    pub hilbert: Array2<f64>,
    pub d2: Array2<f64>,
}

impl Ops {
    pub fn new(grid: &Grid, dealias: bool, exec: Exec) -> Self {
        let n = grid.n();
        let cut = n as f64 / 3.0;
        let mask = dealias.then(|| {
            Array2::from_shape_fn((n, n), |(i1, i2)| {
                let k = grid.wavenumber(i1).abs().max(grid.wavenumber(i2).abs()) as f64;
                if k > cut {
                    0.0
                } else {
                    1.0
                }
            })
        });
        Self {
            grid: grid.clone(),
            exec,
            mask,
            u1: multiplier(grid, Symbol::Riesz { axis: 2 }).mapv(|c| -c),
            u2: multiplier(grid, Symbol::Riesz { axis: 1 }),
            d1: multiplier(grid, Symbol::Derivative { axis: 1 }),
            d2: multiplier(grid, Symbol::Derivative { axis: 2 }),
            hilbert: multiplier(grid, Symbol::Hilbert1D { axis: 2 }),
        }
    }

    fn project(&self, c: &mut Array2<Complex64>) {
        if let Some(m) = &self.mask {
            Zip::from(c).and(m).for_each(|z, &w| *z *= w);
        }
    }

    /// Two real fields `ma·f` and `mb·f` in physical space with one transform.
    fn pair(&self, f: &Array2<Complex64>, ma: &Array2<Complex64>, mb: &Array2<Complex64>) -> Array2<Complex64> {
        let mut buf = Array2::zeros(f.dim());
        Zip::from(&mut buf)
            .and(f)
            .and(ma)
            .and(mb)
            .for_each(|o, &z, &a, &b| *o = a * z + I * (b * z));
        self.grid.inverse(&mut buf, self.exec);
        buf
    }

    pub fn background(&self, bar: &Array2<Complex64>) -> Background {
        let mut b = bar.clone();
        self.project(&mut b);
        let p = self.pair(&b, &self.hilbert, &self.d2);
        Background {
            hilbert: p.mapv(|z| z.re),
            d2: p.mapv(|z| z.im),
        }
    }

    /// `-P[(R^⊥θ)·∇θ]`, or with a background `θ̄(x₂)` the difference-equation
    /// term `-P[(R^⊥θ)·∇θ - (Hθ̄)∂₁θ + (R₁θ)∂₂θ̄]`. Returns the term and
    /// `max|u|` of the total velocity.
    pub fn advection(&self, theta: &Array2<Complex64>, bg: Option<&Background>) -> (Array2<Complex64>, f64) {
        let mut t = theta.clone();
        self.project(&mut t);
        let vel = self.pair(&t, &self.u1, &self.u2);
        let grad = self.pair(&t, &self.d1, &self.d2);
        let mut w = Array2::<Complex64>::zeros(t.dim());
        let mut umax = 0f64;
        match bg {
            None => {
                Zip::from(&mut w).and(&vel).and(&grad).for_each(|o, v, g| {
                    *o = Complex64::new(v.re * g.re + v.im * g.im, 0.0);
                });
                umax = vel.iter().fold(0.0, |m, v| m.max(v.norm()));
            }
            Some(b) => {
                Zip::from(&mut w)
                    .and(&vel)
                    .and(&grad)
                    .and(&b.hilbert)
                    .and(&b.d2)
                    .for_each(|o, v, g, &h, &d| {
                        let u1 = v.re - h;
                        *o = Complex64::new(u1 * g.re + v.im * (g.im + d), 0.0);
                        umax = umax.max(u1.hypot(v.im));
                    });
            }
        }
        self.grid.forward(&mut w, self.exec);
        self.project(&mut w);
        w.mapv_inplace(|z| -z);
        (w, umax)
    }
}

/// Moments `I_k(x) = ∫₀¹ x e^{-xτ} τ^k dτ`, `k = 0..3`.
pub(crate) fn moments(x: f64) -> [f64; 4] {
    let mut out = [0.0; 4];
    if x == 0.0 {
        return out;
    }
    if x < 1.0 {
        for (k, o) in out.iter_mut().enumerate() {
            let mut term = x;
            let mut sum = 0.0;
            for m in 0..40 {
                let add = term / (k + m + 1) as f64;
                sum += add;
                if add.abs() < 1e-18 * sum.abs() {
                    break;
                }
                term *= -x / (m + 1) as f64;
            }
            *o = sum;
        }
    } else {
        let e = (-x).exp();
        out[0] = -(-x).exp_m1();
        for k in 1..4 {
            out[k] = -e + k as f64 / x * out[k - 1];
        }
    }
    out
}

/// Per-step dissipation `∫ 2ν‖|D|^{α/2}θ‖² ds`: the integrating-factor energy
/// `g(s) = e^{λs}|θ̂(s)|²` of each mode is a Hermite cubic from its end values
/// and slopes, integrated exactly against `λe^{-λs}`.
pub(crate) struct Dissipation {
    lambda: Array2<f64>,
    area: f64,
}

impl Dissipation {
    pub fn new(grid: &Grid, nu: f64, alpha: f64) -> Self {
        let n = grid.n();
        Self {
            lambda: Array2::from_shape_fn((n, n), |(i1, i2)| 2.0 * nu * grid.wavevector(i1, i2).norm.powf(alpha)),
            area: grid.area(),
        }
    }

    pub fn step(
        &self,
        h: f64,
        (th0, n0): (&Array2<Complex64>, &Array2<Complex64>),
        (th1, n1): (&Array2<Complex64>, &Array2<Complex64>),
    ) -> f64 {
        let mut sum = 0.0;
        Zip::from(&self.lambda)
            .and(th0)
            .and(n0)
            .and(th1)
            .and(n1)
            .for_each(|&lam, a, na, b, nb| {
                let x = lam * h;
                if x == 0.0 {
                    return;
                }
                let m = moments(x);
                let g0 = a.norm_sqr();
                let s0 = 2.0 * (a.conj() * na).re;
                let mut v = g0 * (m[0] - 3.0 * m[2] + 2.0 * m[3]) + h * s0 * (m[1] - 2.0 * m[2] + m[3]);
                if x < 700.0 {
                    let e = x.exp();
                    let g1 = e * b.norm_sqr();
                    let s1 = 2.0 * e * (b.conj() * nb).re;
                    v += g1 * (3.0 * m[2] - 2.0 * m[3]) + h * s1 * (m[3] - m[2]);
                }
                sum += v;
            });
        self.area * sum
    }
}

/// Integrating-factor RK4 with the full linear symbol in the exponential.
pub(crate) struct Integrator {
    grid: Grid,
    amplitude: f64,
    nu: f64,
    alpha: f64,
    h: f64,
    full: Array2<Complex64>,
    half: Array2<Complex64>,
}

pub(crate) struct StepOutcome {
    pub state: Array2<Complex64>,
    pub rhs: Array2<Complex64>,
    pub umax: f64,
}

impl Integrator {
    pub fn new(grid: &Grid, amplitude: f64, nu: f64, alpha: f64) -> Self {
        Self {
            grid: grid.clone(),
            amplitude,
            nu,
            alpha,
            h: f64::NAN,
            full: Array2::zeros((0, 0)),
            half: Array2::zeros((0, 0)),
        }
    }

    fn factors(&mut self, h: f64) {
        if self.h.to_bits() == h.to_bits() {
            return;
        }
        let prop = |t| Symbol::LinearPropagator {
            amplitude: self.amplitude,
            nu: self.nu,
            alpha: self.alpha,
            t,
        };
        self.full = multiplier(&self.grid, prop(h));
        self.half = multiplier(&self.grid, prop(0.5 * h));
        self.h = h;
    }

    /// One step from `(t, θ)` given `k1 = N(t, θ)`; returns `θ(t+h)` and
    /// `N(t+h, θ(t+h))`.
    pub fn step(
        &mut self,
        t: f64,
        h: f64,
        theta: &Array2<Complex64>,
        k1: &Array2<Complex64>,
        rhs: &mut dyn FnMut(f64, &Array2<Complex64>) -> (Array2<Complex64>, f64),
    ) -> StepOutcome {
        self.factors(h);
        let (e, eh) = (&self.full, &self.half);
        let hh = 0.5 * h;
        let mut a = Array2::zeros(theta.dim());
        Zip::from(&mut a).and(theta).and(k1).and(eh).for_each(|o, &x, &k, &m| *o = m * (x + hh * k));
        let (k2, _) = rhs(t + hh, &a);
        let mut b = Array2::zeros(theta.dim());
        Zip::from(&mut b).and(theta).and(&k2).and(eh).for_each(|o, &x, &k, &m| *o = m * x + hh * k);
        let (k3, _) = rhs(t + hh, &b);
        let mut c = Array2::zeros(theta.dim());
        Zip::from(&mut c)
            .and(theta)
            .and(&k3)
            .and(e)
            .and(eh)
            .for_each(|o, &x, &k, &m, &mh| *o = m * x + h * (mh * k));
        let (k4, _) = rhs(t + h, &c);
        let s = h / 6.0;
        let mut next = Array2::zeros(theta.dim());
        Zip::from(&mut next)
            .and(theta)
            .and(k1)
            .and(&k4)
            .and(e)
            .for_each(|o, &x, &q1, &q4, &m| *o = m * (x + s * q1) + s * q4);
        Zip::from(&mut next)
            .and(&k2)
            .and(&k3)
            .and(eh)
            .for_each(|o, &q2, &q3, &mh| *o += 2.0 * s * mh * (q2 + q3));
        let (rhs1, umax) = rhs(t + h, &next);
        StepOutcome { state: next, rhs: rhs1, umax }
    }
}

pub(crate) fn is_finite(a: &Array2<Complex64>) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub(crate) fn check_samples(times: &[f64], horizon: f64) -> Result<(), SolverError> {
    if times.is_empty() {
        return Err(SolverError::Config("no sample times".into()));
    }
    if times[0] < 0.0 || !times.windows(2).all(|w| w[1] > w[0]) {
        return Err(SolverError::Config("sample times must be >= 0 and strictly increasing".into()));
    }
    let last = *times.last().unwrap();
    if !(last <= horizon * (1.0 + 1e-12)) {
        return Err(SolverError::Config(format!("sample time {last} beyond horizon {horizon}")));
    }
    Ok(())
}
