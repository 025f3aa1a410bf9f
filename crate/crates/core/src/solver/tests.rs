use super::*;
use crate::spectral::{random_field, RandomFieldSpec};

fn cfg(n: usize) -> SolverConfig {
    SolverConfig {
        n,
        box_length: 2.0 * PI,
        dt: 0.02,
        horizon: 1.0,
        ..SolverConfig::default()
    }
}

fn datum(c: &SolverConfig, seed: u64) -> SpectralField {
    let spec = RandomFieldSpec {
        max_freq: 6.0,
        ..RandomFieldSpec::default()
    };
    random_field(&c.grid().unwrap(), &spec, seed, 0)
}

fn samples(t: f64, k: usize) -> Vec<f64> {
    (1..=k).map(|i| t * i as f64 / k as f64).collect()
}

fn samples0(t: f64, k: usize) -> Vec<f64> {
    (0..=k).map(|i| t * i as f64 / k as f64).collect()
}

fn last(out: &SolveOutput) -> &SpectralField {
    out.trajectory.fields().last().unwrap()
}

#[test]
fn zero_stays_zero() {
    let c = cfg(32);
    let z = SpectralField::zeros(&c.grid().unwrap());
    let out = solve_full(&z, &c, &samples(1.0, 4), Exec::Serial).unwrap();
    assert!(out.trajectory.fields().iter().all(|f| f.max_abs_coeff() == 0.0));
}

#[test]
fn shear_mode_decays_exactly() {
    let c = SolverConfig { amplitude: 7.0, ..cfg(32) };
    let g = c.grid().unwrap();
    let th = SpectralField::from_fn(&g, |_, x2| x2.cos()).unwrap();
    let out = solve_full(&th, &c, &samples(1.0, 5), Exec::Serial).unwrap();
    for (t, f) in out.trajectory.times().iter().zip(out.trajectory.fields()) {
        let exact = th.scaled((-t).exp());
        assert!(relative_l2_difference(f, &exact) < 1e-13, "t={t}");
    }
}

#[test]
fn inviscid_transport_conserves_l2() {
    let c = SolverConfig { nu: 0.0, dt: 0.01, ..cfg(32) };
    let th = datum(&c, 3);
    let out = solve_full(&th, &c, &samples0(1.0, 10), Exec::Serial).unwrap();
    let rep = energy_audit(&out, &c, false).unwrap();
    let e0 = th.norm_l2_sq();
    let drift = out
        .trajectory
        .fields()
        .iter()
        .map(|f| (f.norm_l2_sq() - e0).abs() / e0)
        .fold(0.0, f64::max);
    assert!(drift <= 1e-8, "drift {drift}");
    assert!(rep.budget_drift() <= 1e-8);
    assert!(rep.rows.iter().all(|r| r.diss_integral == 0.0));
    assert!(relative_l2_difference(last(&out), &th) > 1e-2, "flow should move the field");
}

#[test]
fn mean_is_conserved() {
    let c = SolverConfig { amplitude: 20.0, ..cfg(32) };
    let mut th = datum(&c, 5);
    th.set_coeff(0, 0, Complex64::new(0.7, 0.0));
    let out = solve_full(&th, &c, &samples(1.0, 4), Exec::Serial).unwrap();
    for f in out.trajectory.fields() {
        assert!((f.coeff(0, 0) - Complex64::new(0.7, 0.0)).norm() <= 1e-12);
    }
}

#[test]
fn x1_independent_data_stay_independent() {
    let c = SolverConfig { amplitude: 50.0, ..cfg(32) };
    let g = c.grid().unwrap();
    let th = SpectralField::from_fn(&g, |_, x2| (x2.sin() + 0.5 * (2.0 * x2).cos()).exp() - 1.0).unwrap();
    let out = solve_full(&th, &c, &samples(1.0, 4), Exec::Serial).unwrap();
    for f in out.trajectory.fields() {
        let off = f.weighted_sq(|w| if w.xi1 == 0.0 { 0.0 } else { 1.0 });
        assert!(off <= 1e-12 * f.norm_l2_sq());
    }
    let bar = Profile1D::from_field(&th.dealias()).unwrap();
    let exact = solve_limit_1d(&bar, 1.0, c.nu, c.alpha).unwrap().to_field();
    assert!(relative_l2_difference(&last(&out).dealias(), &exact) < 1e-13);
}

#[test]
fn fourth_order_in_time() {
    let c = SolverConfig {
        dt: 0.1,
        amplitude: 1.0,
        ..cfg(32)
    };
    let th = datum(&c, 7).scaled(2.0);
    let study = dt_halving(&th, &c, &[1.0], Exec::Serial).unwrap();
    assert!((12.0..=20.0).contains(&study.ratio), "ratio {} errors {:?} {:?}", study.ratio, study.coarse_error, study.fine_error);
}

#[test]
fn theta_form_without_profile_is_full_solve() {
    let c = SolverConfig { amplitude: 3.0, ..cfg(32) };
    let th = datum(&c, 11);
    let s = samples(0.5, 3);
    let full = solve_full(&th, &c, &s, Exec::Serial).unwrap();
    let bar = Profile1D::zeros(&c.grid().unwrap());
    let pert = solve_perturbation_theta(&th, &bar, &c, &s, Exec::Serial).unwrap();
    for (a, b) in full.trajectory.fields().iter().zip(pert.trajectory.fields()) {
        assert!(relative_l2_difference(a, b) <= 1e-12);
    }
    let zero = SpectralField::zeros(&c.grid().unwrap());
    let bar = Profile1D::from_fn(&c.grid().unwrap(), |x| x.cos()).unwrap();
    let out = solve_perturbation_theta(&zero, &bar, &c, &s, Exec::Serial).unwrap();
    assert!(out.trajectory.fields().iter().all(|f| f.max_abs_coeff() == 0.0));
}

#[test]
fn theta_form_matches_full_solve() {
    let c = SolverConfig {
        amplitude: 5.0,
        dt: 0.05,
        ..cfg(32)
    };
    let g = c.grid().unwrap();
    let bar = Profile1D::from_fn(&g, |x| (x.sin()).exp() - 1.0).unwrap();
    let tilde = datum(&c, 13);
    let mut th0 = bar.to_field();
    th0.add_scaled_assign(&tilde, 1.0);
    let s = samples(1.0, 4);
    let study = dt_halving(&th0, &c, &s, Exec::Serial).unwrap();
    let pert = solve_perturbation_theta(&tilde, &bar, &c, &s, Exec::Serial).unwrap();
    for (i, (&t, f)) in s.iter().zip(pert.trajectory.fields()).enumerate() {
        let mut sum = solve_limit_1d(&bar, t, c.nu, c.alpha).unwrap().to_field();
        sum.add_scaled_assign(f, 1.0);
        let d = relative_l2_difference(&sum, &study.runs[0].trajectory.fields()[i]);
        assert!(d <= 10.0 * study.coarse_error[i], "t={t}: {d} vs {}", study.coarse_error[i]);
    }
}

#[test]
fn eta_form_reconstructs_full_solve() {
    let c = SolverConfig {
        amplitude: 10.0,
        dt: 0.05,
        band: Some([1.0, 4.0]),
        ..cfg(32)
    };
    let th = datum(&c, 17).scaled(2.0);
    let s = samples(1.0, 4);
    let study = dt_halving(&th, &c, &s, Exec::Serial).unwrap();
    let (eta, lin) = solve_perturbation_eta(&th, &c, &s, Exec::Serial).unwrap();
    for i in 0..s.len() {
        let mut sum = eta.trajectory.fields()[i].clone();
        sum.add_scaled_assign(&lin.fields()[i], 1.0);
        let d = relative_l2_difference(&sum, &study.runs[0].trajectory.fields()[i]);
        assert!(d <= 10.0 * study.coarse_error[i], "i={i}: {d} vs {}", study.coarse_error[i]);
    }
    let zero = SpectralField::zeros(&c.grid().unwrap());
    let (eta, lin) = solve_perturbation_eta(&zero, &c, &s, Exec::Serial).unwrap();
    assert!(eta.trajectory.fields().iter().chain(lin.fields()).all(|f| f.max_abs_coeff() == 0.0));
}

#[test]
fn eta_starts_at_zero_for_pass_band_data() {
    let c = SolverConfig {
        box_length: 8.0 * PI,
        amplitude: 10.0,
        dt: 0.05,
        band: Some([0.5, 8.0]),
        ..cfg(64)
    };
    let g = c.grid().unwrap();
    // every mode has |ξ₁| >= 2r and |ξ| <= R
    let th = SpectralField::from_fn(&g, |x1, x2| x1.cos() * (1.25 * x2).sin() + 0.5 * (1.5 * x1 + 0.5 * x2).sin()).unwrap();
    let s = samples(0.5, 2);
    let (eta, lin) = solve_perturbation_eta(&th, &c, &[0.0, 0.25, 0.5], Exec::Serial).unwrap();
    assert!(eta.trajectory.fields()[0].norm_l2() <= 1e-14 * th.norm_l2());
    let full = solve_full(&th, &c, &s, Exec::Serial).unwrap();
    for (i, f) in full.trajectory.fields().iter().enumerate() {
        let mut diff = f.clone();
        diff.add_scaled_assign(&lin.fields()[i + 1], -1.0);
        let e = &eta.trajectory.fields()[i + 1];
        assert!(relative_l2_difference(e, &diff) < 1e-10);
    }
}

#[test]
fn linear_budget_is_exact_and_independent_of_amplitude() {
    let mut budgets = Vec::new();
    for a in [0.0, 1e3] {
        let c = SolverConfig {
            amplitude: a,
            nonlinear: false,
            ..cfg(32)
        };
        let th = datum(&c, 19);
        let out = solve_full(&th, &c, &samples0(1.0, 5), Exec::Serial).unwrap();
        let rep = energy_audit(&out, &c, true).unwrap();
        assert!(rep.budget_drift() <= 1e-10, "A={a}: {}", rep.budget_drift());
        let exact = propagate(&th, 1.0, a, c.nu, c.alpha).unwrap();
        assert!(relative_l2_difference(last(&out), &exact) <= 1e-12);
        budgets.push(rep.rows.iter().map(|r| r.budget).collect::<Vec<_>>());
    }
    for (x, y) in budgets[0].iter().zip(&budgets[1]) {
        assert!((x - y).abs() <= 1e-10 * x);
    }
}

#[test]
fn nonlinear_budget_holds_for_several_amplitudes() {
    let mut curves = Vec::new();
    for a in [0.0, 10.0, 1000.0] {
        let c = SolverConfig {
            amplitude: a,
            dt: 1e-3,
            ..cfg(32)
        };
        let th = datum(&c, 23);
        let out = solve_full(&th, &c, &samples0(1.0, 5), Exec::Serial).unwrap();
        let rep = energy_audit(&out, &c, false).unwrap();
        rep.check(TOL_ENERGY).unwrap();
        curves.push(rep.rows.iter().map(|r| r.budget).collect::<Vec<_>>());
    }
    for c in &curves[1..] {
        for (x, y) in curves[0].iter().zip(c) {
            assert!((x - y).abs() <= 1e-6 * curves[0][0]);
        }
    }
}

#[test]
fn step_dissipation_agrees_with_dense_trapezoid() {
    let c = SolverConfig { dt: 0.005, ..cfg(32) };
    let th = datum(&c, 29);
    let s = samples(1.0, 400);
    let out = solve_full(&th, &c, &s, Exec::Serial).unwrap();
    let mut times = vec![0.0];
    times.extend(&s);
    let mut fields = vec![th.clone()];
    fields.extend(out.trajectory.fields().iter().cloned());
    let _ = energy_audit(&out, &c, false).unwrap_err();
    let rep = EnergyReport::from_snapshots(&Trajectory::new(times, fields).unwrap(), c.nu, c.alpha, false);
    let a = *out.dissipation.last().unwrap();
    let b = rep.rows.last().unwrap().diss_integral;
    assert!((a - b).abs() <= 1e-4 * a, "{a} vs {b}");
}

#[test]
fn audit_flags_growing_budget() {
    let rows = [(0.0, 1.0), (0.5, 1.0 + 1e-7), (1.0, 1.0 + 1e-3)]
        .iter()
        .map(|&(t, b)| EnergyRow {
            t,
            l2_sq: b,
            diss_integral: 0.0,
            budget: b,
            sobolev_2ma: None,
        })
        .collect();
    let err = EnergyReport { rows }.check(TOL_ENERGY).unwrap_err();
    assert!(matches!(err, SolverError::Audit { time, .. } if time == 1.0));
}

#[test]
fn trajectory_file_round_trip() {
    let c = SolverConfig { amplitude: 2.0, ..cfg(16) };
    let th = datum(&c, 31);
    let out = solve_full(&th, &c, &samples(0.2, 2), Exec::Serial).unwrap();
    let mut buf = Vec::new();
    write_trajectory(&mut buf, &out.trajectory, &c).unwrap();
    assert_eq!(buf.len(), 8 * 8 + 2 * (8 + 16 * 16 * 16));
    let (h, t) = read_trajectory(&buf[..]).unwrap();
    assert_eq!((h.n, h.count, h.equation_form, h.amplitude), (16, 2, EquationForm::Full, 2.0));
    assert_eq!(t.times(), out.trajectory.times());
    assert_eq!(t.fields(), out.trajectory.fields());
    assert!(read_trajectory(&buf[..buf.len() - 1]).is_err());
    let mut extra = buf.clone();
    extra.push(0);
    assert!(matches!(read_trajectory(&extra[..]), Err(SolverError::Format(_))));
}

#[test]
fn large_steps_warn_and_blow_up() {
    let c = SolverConfig {
        nu: 0.0,
        dt: 1.0,
        horizon: 200.0,
        ..cfg(32)
    };
    let th = datum(&c, 37).scaled(50.0);
    match solve_full(&th, &c, &[200.0], Exec::Serial) {
        Err(SolverError::BlowUp { time }) => assert!(time < 200.0),
        other => panic!("expected blow-up, got {:?}", other.map(|o| o.max_cfl)),
    }
    let c = SolverConfig { dt: 0.5, ..cfg(32) };
    let out = solve_full(&datum(&c, 37).scaled(3.0), &c, &[0.5], Exec::Serial).unwrap();
    assert!(out.max_cfl > CFL_LIMIT && out.warnings.len() == 1);
}

#[test]
fn stable_dt_respects_both_limits() {
    let c = SolverConfig { amplitude: 100.0, ..cfg(32) };
    let th = datum(&c, 41);
    let dt = c.stable_dt(&th, 0.25, 0.5).unwrap();
    assert!(dt <= 0.5 / 100.0 + 1e-15);
    let c = SolverConfig { dt, ..c };
    let out = solve_full(&th, &c, &[0.1], Exec::Serial).unwrap();
    assert!(out.max_cfl <= 0.25 * 1.5);
}

#[test]
fn serial_and_parallel_agree() {
    let c = SolverConfig { amplitude: 4.0, ..cfg(64) };
    let th = datum(&c, 43);
    let a = solve_full(&th, &c, &[0.2], Exec::Serial).unwrap();
    let b = solve_full(&th, &c, &[0.2], Exec::Parallel).unwrap();
    assert_eq!(last(&a), last(&b));
}

#[test]
fn configuration_errors() {
    let th = datum(&cfg(32), 1);
    for bad in [
        SolverConfig { alpha: 1.0, ..cfg(32) },
        SolverConfig { dt: 0.0, ..cfg(32) },
        SolverConfig { horizon: 0.01, ..cfg(32) },
        SolverConfig { nu: -1.0, ..cfg(32) },
        SolverConfig {
            equation_form: EquationForm::EtaPerturbation,
            ..cfg(32)
        },
        SolverConfig {
            band: Some([4.0, 1.0]),
            ..cfg(32)
        },
    ] {
        assert!(matches!(solve_full(&th, &bad, &[0.5], Exec::Serial), Err(SolverError::Config(_))), "{bad:?}");
    }
    assert!(solve_full(&th, &cfg(32), &[0.5, 0.5], Exec::Serial).is_err());
    assert!(solve_full(&th, &cfg(32), &[2.0], Exec::Serial).is_err());
    assert!(solve_full(&th, &cfg(64), &[0.5], Exec::Serial).is_err());
}
