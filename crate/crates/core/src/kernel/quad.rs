use std::f64::consts::PI;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug)]
pub(crate) struct Quad {
    pub value: f64,
    pub error: f64,
    pub evals: u64,
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let d = h * XGK[i];
        let s = f(c - d) + f(c + d);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Globally adaptive Gauss–Kronrod 7/15. `Err` carries the best estimate
/// when `max_intervals` bisections do not reach the tolerance.
pub(crate) fn adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Result<Quad, Quad> {
    let (v, e) = gk15(&mut f, a, b);
    let mut parts = vec![(a, b, v, e)];
    let mut evals = 15u64;
    loop {
        let value: f64 = parts.iter().map(|p| p.2).sum();
        let error: f64 = parts.iter().map(|p| p.3).sum();
        let q = Quad { value, error, evals };
        if error <= abs_tol.max(rel_tol * value.abs()) {
            return Ok(q);
        }
        if parts.len() >= max_intervals {
            return Err(q);
        }
        let worst = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|x| x.0)
            .expect("nonempty");
        let (lo, hi, _, _) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        evals += 30;
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
}

/// Piecewise Chebyshev interpolant on `[a, b]`.
#[derive(Clone, Debug)]
pub(crate) struct ChebTable {
    a: f64,
    width: f64,
    degree: usize,
    coeffs: Vec<f64>,
}

impl ChebTable {
    pub fn build<F: FnMut(f64) -> f64>(a: f64, b: f64, pieces: usize, degree: usize, mut f: F) -> Self {
        let width = (b - a) / pieces as f64;
        let m = degree + 1;
        let mut coeffs = Vec::with_capacity(pieces * m);
        let mut vals = vec![0.0; m];
        for p in 0..pieces {
            let lo = a + p as f64 * width;
            for (j, v) in vals.iter_mut().enumerate() {
                let x = (PI * (j as f64 + 0.5) / m as f64).cos();
                *v = f(lo + 0.5 * width * (x + 1.0));
            }
            for k in 0..m {
                let s: f64 = vals
                    .iter()
                    .enumerate()
                    .map(|(j, v)| v * (PI * k as f64 * (j as f64 + 0.5) / m as f64).cos())
                    .sum();
                coeffs.push(if k == 0 { s / m as f64 } else { 2.0 * s / m as f64 });
            }
        }
        Self { a, width, degree, coeffs }
    }

    pub fn pieces(&self) -> usize {
        self.coeffs.len() / (self.degree + 1)
    }

    /// Left end and width of piece `p`.
    pub fn piece(&self, p: usize) -> (f64, f64) {
        (self.a + p as f64 * self.width, self.width)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.pieces();
        let p = (((x - self.a) / self.width).floor().max(0.0) as usize).min(n - 1);
        let u = 2.0 * (x - self.a - p as f64 * self.width) / self.width - 1.0;
        let c = &self.coeffs[p * (self.degree + 1)..(p + 1) * (self.degree + 1)];
        let (mut b1, mut b2) = (0.0, 0.0);
        for &ck in c.iter().skip(1).rev() {
            let b0 = 2.0 * u * b1 - b2 + ck;
            b2 = b1;
            b1 = b0;
        }
        u * b1 - b2 + c[0]
    }
}
