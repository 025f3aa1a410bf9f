use std::f64::consts::PI;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::ExperimentError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Energy,
    Kernel,
    Strichartz,
    Converge,
    Stability,
    LpAudit,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Self::Energy,
        Self::Kernel,
        Self::Strichartz,
        Self::Converge,
        Self::Stability,
        Self::LpAudit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Energy => "energy",
            Self::Kernel => "kernel",
            Self::Strichartz => "strichartz",
            Self::Converge => "converge",
            Self::Stability => "stability",
            Self::LpAudit => "lp_audit",
        }
    }

    /// Ladder in `A` used when the configuration gives none.
    pub fn default_ladder(self) -> Vec<f64> {
        match self {
            Self::Energy => vec![0.0],
            Self::Converge => vec![1.0, 10.0, 100.0, 1000.0],
            Self::Strichartz | Self::Stability => vec![10.0, 100.0, 1000.0, 10000.0],
            Self::Kernel | Self::LpAudit => Vec::new(),
        }
    }
}

/// Initial datum of the solver experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataKind {
    /// Two Gaussian bumps of opposite sign, offset along `x₁` about the box centre.
    VortexPair,
    /// Seeded random field with envelope `|ξ|^{-2}` below `max_freq`.
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    pub kind: DataKind,
    pub width: f64,
    pub separation: f64,
    pub amplitude: f64,
    pub max_freq: f64,
    /// Rescale to this `H^{2-α}` norm.
    pub h_norm: Option<f64>,
}

impl Default for DataSection {
    fn default() -> Self {
        Self {
            kind: DataKind::VortexPair,
            width: 1.0,
            separation: 2.0,
            amplitude: 1.0,
            max_freq: 4.0,
            h_norm: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergySection {
    pub n: usize,
    pub box_length: f64,
    pub horizon: f64,
    pub samples: usize,
    /// Random data members, one stream each.
    pub members: u64,
    pub max_freq: f64,
    pub l2_norm: f64,
    pub cfl: f64,
    /// Bound on `A·dt`.
    pub phase: f64,
    /// Horizon of the inviscid, non-dispersive conservation run.
    pub conservation_horizon: f64,
    pub sobolev: bool,
}

impl Default for EnergySection {
    fn default() -> Self {
        Self {
            n: 256,
            box_length: 2.0 * PI,
            horizon: 2.0,
            samples: 20,
            members: 3,
            max_freq: 16.0,
            l2_norm: 1.0,
            cfl: 0.25,
            phase: 4.0,
            conservation_horizon: 1.0,
            sobolev: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelSection {
    pub t: f64,
    pub r: f64,
    pub big_r: f64,
    pub mu_ladder: Vec<f64>,
    /// `|z| / μ`.
    pub radii: Vec<f64>,
    pub directions: Vec<f64>,
    pub tol: f64,
    pub htilde_mu: Vec<f64>,
    pub htilde_tol: f64,
}

impl Default for KernelSection {
    fn default() -> Self {
        let z = crate::kernel::ZSampling::default();
        Self {
            t: 0.1,
            r: 1.0,
            big_r: 4.0,
            mu_ladder: vec![1e2, 1e3, 1e4, 1e5, 1e6],
            radii: z.radii,
            directions: z.directions,
            tol: 1e-6,
            htilde_mu: (0..9).map(|k| 10f64.powf(4.0 + 0.5 * k as f64)).collect(),
            htilde_tol: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StrichartzSection {
    pub n: usize,
    pub box_length: f64,
    pub horizon: f64,
    pub samples: usize,
    pub r: f64,
    pub big_r: f64,
    /// Width of the bump the band-limited datum is cut from.
    pub width: f64,
    pub interp: usize,
    pub p: f64,
    /// Space exponents swept; each gets its own rows.
    pub q_values: Vec<f64>,
}

impl Default for StrichartzSection {
    fn default() -> Self {
        Self {
            n: 128,
            box_length: 16.0 * PI,
            horizon: 4.0,
            samples: 4096,
            r: 1.0,
            big_r: 4.0,
            width: 1.0,
            interp: 2,
            p: 2.0,
            q_values: vec![f64::INFINITY, 2.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergeSection {
    pub n: usize,
    pub box_length: f64,
    /// Defaults to `2/ν`.
    pub horizon: Option<f64>,
    pub samples: usize,
    pub cfl: f64,
    /// Bound on `A·dt`.
    pub phase: f64,
    /// Profile `θ̄₀(x₂) = a·exp(-(x₂ - L/2)²/(2w²))`.
    pub bar_amplitude: f64,
    pub bar_width: f64,
    /// Also run `θ̃₀ = 0`, where `E(A)` must vanish.
    pub exact_case: bool,
}

impl Default for ConvergeSection {
    fn default() -> Self {
        Self {
            n: 256,
            box_length: 32.0 * PI,
            horizon: None,
            samples: 64,
            cfl: 0.25,
            phase: 4.0,
            bar_amplitude: 1.0,
            bar_width: 1.0,
            exact_case: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilitySection {
    pub n: usize,
    pub box_length: f64,
    /// Defaults to `2/ν`.
    pub horizon: Option<f64>,
    /// Equispaced sample times after `t = 0`.
    pub samples: usize,
    pub cfl: f64,
    pub phase: f64,
    /// `(r, R)` of the band cutoff in the perturbation split.
    pub band: [f64; 2],
    /// Run the `dt/2` solve and the perturbation split for the
    /// reconstruction check.
    pub reconstruction: bool,
}

impl Default for StabilitySection {
    fn default() -> Self {
        Self {
            n: 64,
            box_length: 16.0 * PI,
            horizon: None,
            samples: 40,
            cfl: 0.25,
            phase: 4.0,
            band: [1.0, 4.0],
            reconstruction: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AuditSection {
    /// Grid sizes of the commutator and product audits.
    pub grids: Vec<usize>,
    pub box_length: f64,
    pub ensemble_size: usize,
    pub s: f64,
    pub beta: f64,
    /// Largest frequency of the commutator ensemble. Unset means the
    /// dealiased band of the coarsest grid, so every grid resolves the same
    /// distribution.
    pub commutator_band: Option<f64>,
    /// Band limits of the product audit.
    pub r_bands: Vec<f64>,
    pub bernstein_n: usize,
    pub lambdas: Vec<f64>,
}

impl Default for AuditSection {
    fn default() -> Self {
        Self {
            grids: vec![128, 256],
            box_length: 2.0 * PI,
            ensemble_size: 32,
            s: 0.5,
            beta: 0.5,
            commutator_band: None,
            r_bands: vec![4.0, 8.0, 16.0, 32.0],
            bernstein_n: 256,
            lambdas: vec![4.0, 8.0, 16.0, 32.0],
        }
    }
}

/// Pass/fail thresholds of the checks each experiment reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub energy: f64,
    pub conservation: f64,
    pub kernel_variation: f64,
    pub kernel_origin_slope: f64,
    pub htilde_axis: [f64; 2],
    pub htilde_diagonal: [f64; 2],
    pub strichartz_variation: f64,
    pub strichartz_l2_slope: f64,
    pub converge_ratio: f64,
    pub converge_exact: f64,
    pub reconstruction_factor: f64,
    pub audit_grid_factor: f64,
    pub bernstein_factor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            energy: crate::solver::TOL_ENERGY,
            conservation: 1e-8,
            kernel_variation: 3.0,
            kernel_origin_slope: -0.45,
            htilde_axis: [-0.55, -0.45],
            htilde_diagonal: [-0.30, -0.20],
            strichartz_variation: 3.0,
            strichartz_l2_slope: 0.02,
            converge_ratio: 0.5,
            converge_exact: 1e-10,
            reconstruction_factor: 10.0,
            audit_grid_factor: 2.0,
            bernstein_factor: 2.0,
        }
    }
}

/// One experiment run. Every field has a default, so an empty file selects
/// the energy audit with reference parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub nu: f64,
    pub alpha: f64,
    /// Strictly increasing; the experiment's own default when absent.
    pub a_ladder: Option<Vec<f64>>,
    /// Space exponent of the convergence norm.
    pub sigma: f64,
    pub data: DataSection,
    pub energy: EnergySection,
    pub kernel: KernelSection,
    pub strichartz: StrichartzSection,
    pub converge: ConvergeSection,
    pub stability: StabilitySection,
    pub lp_audit: AuditSection,
    pub tolerances: Tolerances,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: Experiment::Energy,
            seed: 1,
            output_dir: PathBuf::from("out"),
            nu: 1.0,
            alpha: 0.5,
            a_ladder: None,
            sigma: 2.4,
            data: DataSection::default(),
            energy: EnergySection::default(),
            kernel: KernelSection::default(),
            strichartz: StrichartzSection::default(),
            converge: ConvergeSection::default(),
            stability: StabilitySection::default(),
            lp_audit: AuditSection::default(),
            tolerances: Tolerances::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn for_experiment(experiment: Experiment) -> Self {
        Self {
            experiment,
            ..Self::default()
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ExperimentError> {
        toml::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always serializable")
    }

    pub fn ladder(&self) -> Vec<f64> {
        self.a_ladder.clone().unwrap_or_else(|| self.experiment.default_ladder())
    }

    /// Open interval of admissible convergence exponents, `(2, 4/(2-α))`.
    pub fn sigma_range(&self) -> (f64, f64) {
        (2.0, 4.0 / (2.0 - self.alpha))
    }

    pub fn horizon(&self, explicit: Option<f64>) -> f64 {
        explicit.unwrap_or(2.0 / self.nu)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::Config(m));
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return bad(format!("nu must be > 0, got {}", self.nu));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if let Some(l) = &self.a_ladder {
            if l.is_empty() || l.iter().any(|a| !(*a >= 0.0 && a.is_finite())) {
                return bad(format!("a_ladder must be non-empty, finite and >= 0: {l:?}"));
            }
            if !l.windows(2).all(|w| w[1] > w[0]) {
                return bad(format!("a_ladder must be strictly increasing: {l:?}"));
            }
        }
        if self.experiment == Experiment::Converge {
            let (lo, hi) = self.sigma_range();
            if !(self.sigma > lo && self.sigma < hi) {
                return bad(format!(
                    "sigma = {} outside the admissible open interval ]2, 4/(2-alpha)[ = ]{lo}, {hi:.6}[ for alpha = {}",
                    self.sigma, self.alpha
                ));
            }
        }
        let d = &self.data;
        if !(d.width > 0.0 && d.separation >= 0.0 && d.amplitude.is_finite() && d.max_freq > 0.0) {
            return bad("data: need width > 0, separation >= 0, finite amplitude, max_freq > 0".into());
        }
        if matches!(d.h_norm, Some(h) if !(h > 0.0 && h.is_finite())) {
            return bad("data.h_norm must be > 0".into());
        }
        for (name, c) in [
            ("energy.cfl", self.energy.cfl),
            ("energy.phase", self.energy.phase),
            ("converge.cfl", self.converge.cfl),
            ("stability.cfl", self.stability.cfl),
            ("converge.phase", self.converge.phase),
            ("stability.phase", self.stability.phase),
        ] {
            if !(c > 0.0 && c.is_finite()) {
                return bad(format!("{name} must be > 0, got {c}"));
            }
        }
        if self.energy.samples == 0 || self.energy.members == 0 {
            return bad("energy.samples and energy.members must be >= 1".into());
        }
        if self.converge.samples < 4 || self.stability.samples < 1 || self.strichartz.samples < 4 {
            return bad("too few time samples".into());
        }
        if self.lp_audit.grids.len() < 2 {
            return bad("lp_audit.grids needs at least two sizes".into());
        }
        Ok(())
    }
}
