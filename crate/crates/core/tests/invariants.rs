use proptest::prelude::*;
use qglab::semigroup::propagate;
use qglab::spectral::{random_field, Grid, RandomFieldSpec, SpectralField, Symbol};

fn field(n: usize, len: f64, seed: u64, gamma: f64) -> SpectralField {
    let g = Grid::new(n, len).unwrap();
    let spec = RandomFieldSpec {
        gamma,
        min_freq: 1e-9,
        ..RandomFieldSpec::default()
    };
    random_field(&g, &spec, seed, 0)
}

fn diff_l2(a: &SpectralField, b: &SpectralField) -> f64 {
    let mut d = a.clone();
    d.add_scaled_assign(b, -1.0);
    d.norm_l2()
}

fn params() -> impl Strategy<Value = (usize, f64, u64, f64)> {
    (
        prop::sample::select(vec![16usize, 32, 64]),
        prop::sample::select(vec![2.0 * std::f64::consts::PI, 10.0, 50.0]),
        any::<u64>(),
        0.0..3.0f64,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn riesz_is_skew_adjoint((n, len, seed, gamma) in params(), axis in 1u8..=2) {
        let f = field(n, len, seed, gamma);
        let g = field(n, len, seed ^ 0x5a5a, gamma);
        let r = Symbol::Riesz { axis };
        let lhs = f.apply(&r).unwrap().inner(&g);
        let rhs = -f.inner(&g.apply(&r).unwrap());
        prop_assert!((lhs - rhs).abs() <= 1e-12 * f.norm_l2() * g.norm_l2());
        prop_assert!(f.apply(&r).unwrap().inner(&f).abs() <= 1e-12 * f.norm_l2_sq());
    }

    #[test]
    fn riesz_pair_is_an_isometry_on_dealiased_fields((n, len, seed, gamma) in params()) {
        let f = field(n, len, seed, gamma);
        let (u1, u2) = f.perp_velocity();
        let lhs = u1.norm_l2_sq() + u2.norm_l2_sq();
        prop_assert!((lhs - f.norm_l2_sq()).abs() <= 1e-12 * f.norm_l2_sq());
    }

    #[test]
    fn fourier_multipliers_commute((n, len, seed, gamma) in params(), s in 0.1..2.0f64) {
        let f = field(n, len, seed, gamma);
        let lap = Symbol::FractionalLaplacian { alpha: s };
        let r = Symbol::Riesz { axis: 1 };
        let a = f.apply(&lap).unwrap().apply(&r).unwrap();
        let b = f.apply(&r).unwrap().apply(&lap).unwrap();
        prop_assert!(diff_l2(&a, &b) <= 1e-12 * a.norm_l2().max(1e-300));
    }

    #[test]
    fn parseval_holds((n, len, seed, gamma) in params()) {
        let f = field(n, len, seed, gamma);
        let g = f.grid().clone();
        let phys = f.to_physical();
        let cell = g.dx() * g.dx();
        let direct: f64 = phys.iter().map(|v| v * v).sum::<f64>() * cell;
        prop_assert!((direct - f.norm_l2_sq()).abs() <= 1e-12 * direct);
    }

    #[test]
    fn velocity_is_divergence_free((n, len, seed, gamma) in params()) {
        let f = field(n, len, seed, gamma);
        let (u1, u2) = f.perp_velocity();
        let mut div = u1.apply(&Symbol::Derivative { axis: 1 }).unwrap();
        div.add_scaled_assign(&u2.apply(&Symbol::Derivative { axis: 2 }).unwrap(), 1.0);
        let scale = f.apply(&Symbol::FractionalLaplacian { alpha: 1.0 }).unwrap().norm_l2();
        prop_assert!(div.norm_l2() <= 1e-12 * scale);
    }

    #[test]
    fn semigroup_does_not_increase_l2(
        (n, len, seed, gamma) in params(),
        t in 0.0..3.0f64,
        a in 0.0..1e3f64,
        nu in 0.0..2.0f64,
        alpha in 0.05..0.95f64,
    ) {
        let f = field(n, len, seed, gamma);
        let p = propagate(&f, t, a, nu, alpha).unwrap();
        prop_assert!(p.norm_l2() <= f.norm_l2() * (1.0 + 1e-12));
        if nu == 0.0 {
            prop_assert!((p.norm_l2() - f.norm_l2()).abs() <= 1e-12 * f.norm_l2());
        }
    }
}
