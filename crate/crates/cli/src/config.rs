//! Run configuration: the raw JSON/flag layer and its validated, SI form.
//!
//! Units on the raw layer: ω in rad/s, k in 1/m, d1/d2/z in nm, x in µm.

use std::path::PathBuf;

use lrspp::dispersion::Branch;
use lrspp::grid::linspace;
use lrspp::DielectricModel;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

// Raw units per meter; dividing keeps round values exact (100 nm -> 1e-7).
const NM: f64 = 1e9;
const UM: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BranchSelection {
    Plus,
    Minus,
    #[default]
    Both,
}

impl BranchSelection {
    pub fn branches(self) -> Vec<Branch> {
        match self {
            BranchSelection::Plus => vec![Branch::Antisymmetric],
            BranchSelection::Minus => vec![Branch::Symmetric],
            BranchSelection::Both => Branch::BOTH.to_vec(),
        }
    }
}

impl std::str::FromStr for BranchSelection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "both" => Ok(BranchSelection::Both),
            other => match other.parse::<Branch>()? {
                Branch::Antisymmetric => Ok(BranchSelection::Plus),
                Branch::Symmetric => Ok(BranchSelection::Minus),
            },
        }
    }
}

/// Metal given either as a preset name or as a preset plus overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MaterialSpec {
    Name(String),
    Custom(CustomMaterial),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct CustomMaterial {
    pub preset: Option<String>,
    pub plasma_frequency: Option<f64>,
    pub damping_rate: Option<f64>,
    pub real_correction_coeff: Option<f64>,
    pub imag_correction: Option<f64>,
}

/// Configuration as read from JSON and command-line flags. Every field is
/// optional; `validate_config` fills in defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub material: Option<MaterialSpec>,
    pub branch: Option<BranchSelection>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,

    pub omega: Option<f64>,
    pub omega_min: Option<f64>,
    pub omega_max: Option<f64>,
    pub omega_steps: Option<usize>,
    pub d1_nm: Option<f64>,
    pub d1_min: Option<f64>,
    pub d1_max: Option<f64>,
    pub d1_steps: Option<usize>,
    pub d2_nm: Option<f64>,
    pub d2_min: Option<f64>,
    pub d2_max: Option<f64>,
    pub d2_steps: Option<usize>,
    pub k_min: Option<f64>,
    pub k_max: Option<f64>,
    pub k_steps: Option<usize>,
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    pub x_steps: Option<usize>,
    pub z_min: Option<f64>,
    pub z_max: Option<f64>,
    pub z_steps: Option<usize>,
    pub alpha: Option<f64>,
    pub alpha_min: Option<f64>,
    pub alpha_max: Option<f64>,
    pub alpha_steps: Option<usize>,

    pub delta_omega: Option<f64>,
    pub eps_prism: Option<f64>,
    pub mu: Option<f64>,
    pub n: Option<u32>,
}

impl RawConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text)
            .map_err(|e| CliError::Config(format!("malformed config JSON: {e}")))
    }

    /// Fields set in `other` replace those in `self`.
    pub fn merge(self, other: RawConfig) -> RawConfig {
        macro_rules! pick {
            ($($f:ident),*) => { RawConfig { $($f: other.$f.or(self.$f)),* } };
        }
        pick!(
            material,
            branch,
            format,
            out,
            omega,
            omega_min,
            omega_max,
            omega_steps,
            d1_nm,
            d1_min,
            d1_max,
            d1_steps,
            d2_nm,
            d2_min,
            d2_max,
            d2_steps,
            k_min,
            k_max,
            k_steps,
            x_min,
            x_max,
            x_steps,
            z_min,
            z_max,
            z_steps,
            alpha,
            alpha_min,
            alpha_max,
            alpha_steps,
            delta_omega,
            eps_prism,
            mu,
            n
        )
    }
}

/// Uniform grid in SI units. A single-point grid has `min == max` and one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Grid {
    pub fn point(v: f64) -> Self {
        Self {
            min: v,
            max: v,
            steps: 1,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            vec![self.min]
        } else {
            linspace(self.min, self.max, self.steps)
        }
    }
}

/// Validated configuration, SI units throughout.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub material: DielectricModel,
    pub branch: BranchSelection,
    pub format: Format,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    pub omega: Grid,
    pub d1: Grid,
    pub d2: Grid,
    /// Fixed gap for `field`; the optimizer picks it otherwise.
    pub d2_fixed: Option<f64>,
    pub k: Grid,
    pub x: Grid,
    pub z: Grid,
    pub alpha: Grid,
    pub delta_omega: f64,
    pub eps_prism: f64,
    pub mu: f64,
    pub n: Option<u32>,
    #[serde(skip)]
    pub warnings: Vec<String>,
}

impl RunConfig {
    pub fn branches(&self) -> Vec<Branch> {
        self.branch.branches()
    }
}

fn material(spec: &Option<MaterialSpec>) -> Result<DielectricModel, CliError> {
    let preset = |name: &str| {
        DielectricModel::preset(name)
            .ok_or_else(|| CliError::Config(format!("material: unknown preset `{name}`")))
    };
    let model = match spec {
        None => DielectricModel::SILVER,
        Some(MaterialSpec::Name(name)) => preset(name)?,
        Some(MaterialSpec::Custom(c)) => {
            let base = match &c.preset {
                Some(name) => preset(name)?,
                None => DielectricModel::SILVER,
            };
            DielectricModel {
                plasma_frequency: c.plasma_frequency.unwrap_or(base.plasma_frequency),
                damping_rate: c.damping_rate.unwrap_or(base.damping_rate),
                real_correction_coeff: c
                    .real_correction_coeff
                    .unwrap_or(base.real_correction_coeff),
                imag_correction: c.imag_correction.unwrap_or(base.imag_correction),
            }
        }
    };
    model
        .validate()
        .map_err(|e| CliError::Config(format!("material: {e}")))?;
    Ok(model)
}

struct GridSpec<'a> {
    key: &'a str,
    point: Option<f64>,
    min: Option<f64>,
    max: Option<f64>,
    steps: Option<usize>,
    default: (f64, f64, usize),
    unit: f64,
}

impl GridSpec<'_> {
    fn build(&self) -> Result<Grid, CliError> {
        let key = self.key;
        let bad = |m: String| Err(CliError::Config(format!("{key}: {m}")));
        if let Some(v) = self.point {
            if self.min.is_some() || self.max.is_some() || self.steps.is_some() {
                return bad("a fixed value excludes the min/max/steps keys".into());
            }
            if !v.is_finite() {
                return bad(format!("value must be finite, got {v}"));
            }
            return Ok(Grid::point(v / self.unit));
        }
        let min = self.min.unwrap_or(self.default.0);
        let max = self.max.unwrap_or(self.default.1);
        let steps = self.steps.unwrap_or(self.default.2);
        if !(min.is_finite() && max.is_finite()) {
            return bad(format!("bounds must be finite, got {min} and {max}"));
        }
        if !(min < max) {
            return bad(format!("{key}_min ({min}) must be below {key}_max ({max})"));
        }
        if steps < 2 {
            return bad(format!("{key}_steps must be at least 2, got {steps}"));
        }
        Ok(Grid {
            min: min / self.unit,
            max: max / self.unit,
            steps,
        })
    }
}

/// Injects defaults, converts to SI and enforces grid and range invariants.
pub fn validate_config(raw: &RawConfig) -> Result<RunConfig, CliError> {
    let material = material(&raw.material)?;
    let mut warnings = Vec::new();

    let spec = |key, point, min, max, steps, default, unit| GridSpec {
        key,
        point,
        min,
        max,
        steps,
        default,
        unit,
    };
    let mut omega = spec(
        "omega",
        raw.omega,
        raw.omega_min,
        raw.omega_max,
        raw.omega_steps,
        (2e15, 5.4e15, 120),
        1.0,
    )
    .build()?;
    let d1 = spec(
        "d1",
        raw.d1_nm,
        raw.d1_min,
        raw.d1_max,
        raw.d1_steps,
        (10.0, 100.0, 60),
        NM,
    )
    .build()?;
    let d2 = spec(
        "d2",
        None,
        raw.d2_min,
        raw.d2_max,
        raw.d2_steps,
        (50.0, 3000.0, 80),
        NM,
    )
    .build()?;
    let k = spec(
        "k",
        None,
        raw.k_min,
        raw.k_max,
        raw.k_steps,
        (2e6, 6e7, 200),
        1.0,
    )
    .build()?;
    let x = spec(
        "x",
        None,
        raw.x_min,
        raw.x_max,
        raw.x_steps,
        (0.0, 50.0, 51),
        UM,
    )
    .build()?;
    let z = spec(
        "z",
        None,
        raw.z_min,
        raw.z_max,
        raw.z_steps,
        (-1000.0, 500.0, 301),
        NM,
    )
    .build()?;
    let alpha = spec(
        "alpha",
        raw.alpha,
        raw.alpha_min,
        raw.alpha_max,
        raw.alpha_steps,
        (2.0, 5.0, 2),
        1.0,
    )
    .build()?;

    let wsp = material
        .surface_plasma_frequency()
        .map_err(|e| CliError::Config(format!("material: {e}")))?;
    if !(omega.min > 0.0) {
        return Err(CliError::Config(format!(
            "omega: frequencies must be positive, got {}",
            omega.min
        )));
    }
    let ceiling = wsp * (1.0 - 1e-6);
    if omega.max >= ceiling {
        if omega.min >= ceiling {
            return Err(CliError::Config(format!(
                "omega: grid starts at or above the surface plasma frequency {wsp:e} rad/s"
            )));
        }
        warnings.push(format!(
            "omega: upper bound {:e} clipped to {ceiling:e} rad/s, just below the surface plasma frequency",
            omega.max
        ));
        omega.max = ceiling;
    }
    if !(d1.min > 0.0) {
        return Err(CliError::Config("d1: thickness must be positive".into()));
    }
    if !(d2.min > 0.0) {
        return Err(CliError::Config("d2: gap must be positive".into()));
    }
    if !(k.min > 0.0) {
        return Err(CliError::Config("k: wavenumbers must be positive".into()));
    }
    if !(x.min >= 0.0) {
        return Err(CliError::Config("x: distances must be non-negative".into()));
    }
    if !(alpha.min > 0.0) {
        return Err(CliError::Config("alpha: amplitude must be positive".into()));
    }
    let d2_fixed = match raw.d2_nm {
        Some(v) if v > 0.0 && v.is_finite() => Some(v / NM),
        Some(v) => {
            return Err(CliError::Config(format!(
                "d2_nm: gap must be positive, got {v}"
            )))
        }
        None => None,
    };

    let positive = |key: &str, v: Option<f64>, default: f64| match v {
        None => Ok(default),
        Some(v) if v > 0.0 && v.is_finite() => Ok(v),
        Some(v) => Err(CliError::Config(format!(
            "{key}: must be positive, got {v}"
        ))),
    };
    let delta_omega = positive(
        "delta_omega",
        raw.delta_omega,
        lrspp::coupling::DEFAULT_DELTA_OMEGA,
    )?;
    let eps_prism = positive(
        "eps_prism",
        raw.eps_prism,
        lrspp::dispersion::DEFAULT_PRISM_PERMITTIVITY,
    )?;
    if eps_prism <= 1.0 {
        return Err(CliError::Config(format!(
            "eps_prism: must exceed 1, got {eps_prism}"
        )));
    }
    let mu = raw.mu.unwrap_or(0.65);
    if !(0.0..=1.0).contains(&mu) {
        return Err(CliError::Config(format!(
            "mu: detector efficiency must lie in [0, 1], got {mu}"
        )));
    }
    if raw.n == Some(0) {
        return Err(CliError::Config(
            "n: photon number must be at least 1".into(),
        ));
    }

    Ok(RunConfig {
        material,
        branch: raw.branch.unwrap_or_default(),
        format: raw.format.unwrap_or_default(),
        out: raw.out.clone(),
        omega,
        d1,
        d2,
        d2_fixed,
        k,
        x,
        z,
        alpha,
        delta_omega,
        eps_prism,
        mu,
        n: raw.n,
        warnings,
    })
}
