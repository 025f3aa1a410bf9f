use std::f64::consts::PI;
use std::fs;

use super::*;

fn small(experiment: Experiment, dir: &Path) -> ExperimentConfig {
    let mut c = ExperimentConfig::for_experiment(experiment);
    c.output_dir = dir.to_path_buf();
    c.energy = EnergySection {
        n: 32,
        horizon: 0.2,
        samples: 4,
        members: 2,
        max_freq: 6.0,
        conservation_horizon: 0.2,
        ..EnergySection::default()
    };
    c.converge = ConvergeSection {
        n: 32,
        box_length: 8.0 * PI,
        horizon: Some(0.2),
        samples: 8,
        ..ConvergeSection::default()
    };
    c.stability = StabilitySection {
        n: 32,
        box_length: 8.0 * PI,
        horizon: Some(0.2),
        samples: 4,
        ..StabilitySection::default()
    };
    c.kernel = KernelSection {
        mu_ladder: vec![1.0, 10.0, 100.0, 1000.0],
        radii: vec![0.0, 0.5],
        directions: vec![0.0, PI],
        htilde_mu: vec![1e2, 1e3, 1e4, 1e5],
        ..KernelSection::default()
    };
    c.strichartz = StrichartzSection {
        n: 32,
        box_length: 8.0 * PI,
        samples: 16,
        horizon: 1.0,
        ..StrichartzSection::default()
    };
    c.lp_audit = AuditSection {
        grids: vec![64, 128],
        ensemble_size: 4,
        r_bands: vec![2.0, 4.0, 8.0, 16.0],
        bernstein_n: 64,
        lambdas: vec![2.0, 4.0, 8.0],
        ..AuditSection::default()
    };
    c
}

fn csv_bytes(dir: &Path, s: &RunSummary) -> Vec<Vec<u8>> {
    s.outcome.files.iter().map(|f| fs::read(dir.join(f)).unwrap()).collect()
}

#[test]
fn empty_file_gives_defaults_and_round_trips() {
    let c = ExperimentConfig::from_toml("").unwrap();
    assert_eq!(c, ExperimentConfig::default());
    for e in Experiment::ALL {
        let c = ExperimentConfig::for_experiment(e);
        assert_eq!(ExperimentConfig::from_toml(&c.to_toml()).unwrap(), c);
    }
    let c = ExperimentConfig::from_toml("experiment = \"lp_audit\"\n[energy]\nn = 64\n").unwrap();
    assert_eq!((c.experiment, c.energy.n), (Experiment::LpAudit, 64));
}

#[test]
fn unknown_keys_and_bad_values_are_configuration_errors() {
    let e = ExperimentConfig::from_toml("experimnet = \"energy\"").unwrap_err();
    assert_eq!(e.exit_code(), 1);
    let mut c = ExperimentConfig::for_experiment(Experiment::Converge);
    c.sigma = 3.0;
    let e = c.validate().unwrap_err();
    assert_eq!(e.exit_code(), 1);
    assert!(e.to_string().contains("]2, 4/(2-alpha)["), "{e}");
    c.sigma = 2.0;
    assert!(c.validate().is_err());
    c.sigma = 2.4;
    c.validate().unwrap();
    c.a_ladder = Some(vec![1.0, 10.0, 10.0]);
    assert!(c.validate().is_err());
    // sigma only matters for the convergence sweep
    let c = ExperimentConfig {
        sigma: 9.0,
        ..ExperimentConfig::default()
    };
    c.validate().unwrap();
}

#[test]
fn energy_run_is_deterministic_and_recorded() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let s1 = run(&small(Experiment::Energy, &a), Exec::Parallel).unwrap();
    let s2 = run(&small(Experiment::Energy, &b), Exec::Serial).unwrap();
    assert_eq!(s1.exit_code(), 0, "{:?}", s1.outcome.checks);
    assert_eq!(s1.outcome.files, s2.outcome.files);
    assert_eq!(csv_bytes(&a, &s1), csv_bytes(&b, &s2));
    assert!(s1.outcome.files.iter().any(|f| f.to_str() == Some("energy_m1_A0.csv")));
    let text = fs::read_to_string(&s1.manifest).unwrap();
    let m: toml::Value = toml::from_str(&text).unwrap();
    let outputs = m["outputs"].as_array().unwrap();
    assert_eq!(outputs.len(), s1.outcome.files.len());
    for o in outputs {
        let file = o["file"].as_str().unwrap();
        assert_eq!(o["sha256"].as_str().unwrap(), sha256_hex(&fs::read(a.join(file)).unwrap()));
    }
    let echoed: ExperimentConfig = m["config"].clone().try_into().unwrap();
    assert_eq!(echoed, small(Experiment::Energy, &a));
}

#[test]
fn converge_exact_case_vanishes() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = small(Experiment::Converge, tmp.path());
    c.a_ladder = Some(vec![1.0, 10.0, 100.0]);
    let s = run(&c, Exec::Serial).unwrap();
    assert!(s.outcome.check("converge_exact").unwrap().passed);
    assert!(s.outcome.check("converge_decreasing").is_some());
    let text = fs::read_to_string(tmp.path().join("converge.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 6);
}

#[test]
fn stability_of_zero_datum_is_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = small(Experiment::Stability, tmp.path());
    c.data.amplitude = 0.0;
    c.a_ladder = Some(vec![10.0, 100.0]);
    let s = run(&c, Exec::Serial).unwrap();
    let rows = fs::read_to_string(tmp.path().join("stability.csv")).unwrap();
    let mut rd = csv::Reader::from_reader(rows.as_bytes());
    for r in rd.records() {
        let r = r.unwrap();
        assert_eq!(&r[1], "0.0");
        assert_eq!(&r[2], "0.0");
    }
    // zero differences are not strictly decreasing
    assert!(!s.outcome.check("stability_decreasing").unwrap().passed);
    assert_eq!(s.exit_code(), 3);
}

#[test]
fn stability_small_run_reconstructs() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = small(Experiment::Stability, tmp.path());
    c.a_ladder = Some(vec![10.0, 100.0]);
    let s = run(&c, Exec::Serial).unwrap();
    assert!(s.outcome.check("stability_reconstruction").unwrap().passed, "{:?}", s.outcome.checks);
}

#[test]
fn kernel_strichartz_and_audit_smoke() {
    for e in [Experiment::Kernel, Experiment::Strichartz, Experiment::LpAudit] {
        let tmp = tempfile::tempdir().unwrap();
        let s = run(&small(e, tmp.path()), Exec::Parallel).unwrap();
        assert!(!s.outcome.checks.is_empty() && !s.outcome.files.is_empty());
        assert!(s.outcome.failures.is_empty());
        for f in &s.outcome.files {
            assert!(fs::metadata(tmp.path().join(f)).unwrap().len() > 0);
        }
    }
}
