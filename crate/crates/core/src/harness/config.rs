use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::EstimatorConfig;
use crate::geometry::WaveguideConfig;
use crate::pilot::SubarrayLayout;

/// Estimators (and the perfect-CSI reference) compared by the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "LS")]
    Ls,
    Coarse,
    Refined,
    Oracle,
    #[serde(rename = "PerfectCSI")]
    PerfectCsi,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Ls,
        Method::Coarse,
        Method::Refined,
        Method::Oracle,
        Method::PerfectCsi,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Ls => "LS",
            Method::Coarse => "Coarse",
            Method::Refined => "Refined",
            Method::Oracle => "Oracle",
            Method::PerfectCsi => "PerfectCSI",
        }
    }

    /// Uses the near/far subarray frames.
    pub fn is_sparse(&self) -> bool {
        matches!(self, Method::Coarse | Method::Refined | Method::Oracle)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown method `{s}`")))
    }
}

/// Parses a comma separated method list such as `LS,Refined`.
pub fn parse_methods(list: &str) -> Result<Vec<Method>> {
    let mut out: Vec<Method> = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect::<Result<_>>()?;
    out.sort();
    out.dedup();
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum AngleLaw {
    /// Uniform over `[angle_min_rad, angle_max_rad]`.
    Uniform,
    Fixed { angle_rad: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RcsLaw {
    Constant { rcs_m2: f64 },
    Uniform { min_m2: f64, max_m2: f64 },
}

/// Random scene generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneLaw {
    pub user_distance_m: f64,
    pub user_angle: AngleLaw,
    pub scatterer_count: usize,
    pub scatterer_distance_min_m: f64,
    pub scatterer_distance_max_m: f64,
    pub angle_min_rad: f64,
    pub angle_max_rad: f64,
    pub rcs: RcsLaw,
    /// Multiplies every RCS draw; below 1 makes the LoS path more dominant.
    pub nlos_gain_scale: f64,
    /// Snap every drawn angle and distance to the estimator grids.
    pub on_grid: bool,
}

impl Default for SceneLaw {
    fn default() -> Self {
        Self {
            user_distance_m: 5.0,
            user_angle: AngleLaw::Uniform,
            scatterer_count: 2,
            scatterer_distance_min_m: 3.0,
            scatterer_distance_max_m: 10.0,
            angle_min_rad: -0.5 * PI,
            angle_max_rad: 0.5 * PI,
            rcs: RcsLaw::Constant { rcs_m2: 1.0 },
            nlos_gain_scale: 1.0,
            on_grid: false,
        }
    }
}

impl SceneLaw {
    pub fn line_of_sight() -> Self {
        Self {
            scatterer_count: 0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        if !(self.user_distance_m > 0.0) {
            return bad("user distance must be positive");
        }
        if !(self.scatterer_distance_min_m > 0.0 && self.scatterer_distance_max_m >= self.scatterer_distance_min_m) {
            return bad("scatterer distance range must be positive and ordered");
        }
        if !(self.angle_min_rad >= -0.5 * PI && self.angle_max_rad <= 0.5 * PI && self.angle_min_rad <= self.angle_max_rad) {
            return bad("angle range must lie inside [-pi/2, pi/2]");
        }
        if let AngleLaw::Fixed { angle_rad } = self.user_angle {
            if !(angle_rad.abs() <= 0.5 * PI) {
                return bad("fixed user angle must lie inside [-pi/2, pi/2]");
            }
        }
        match self.rcs {
            RcsLaw::Constant { rcs_m2 } if !(rcs_m2 > 0.0) => return bad("RCS must be positive"),
            RcsLaw::Uniform { min_m2, max_m2 } if !(min_m2 > 0.0 && max_m2 >= min_m2) => {
                return bad("RCS range must be positive and ordered")
            }
            _ => {}
        }
        if !(self.nlos_gain_scale > 0.0) {
            return bad("NLoS gain scale must be positive");
        }
        Ok(())
    }
}

/// Subarray allocation sweep at a fixed pilot power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SubarraySweep {
    pub pilot_power_dbm: f64,
    /// `(near_count, far_count)` pairs.
    pub splits: Vec<(usize, usize)>,
}

impl Default for SubarraySweep {
    fn default() -> Self {
        Self {
            pilot_power_dbm: 40.0,
            splits: vec![(10, 50), (20, 40), (30, 30), (40, 20), (50, 10)],
        }
    }
}

/// Everything needed to reproduce one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub waveguide: WaveguideConfig,
    pub scene: SceneLaw,
    pub layout: SubarrayLayout,
    /// Grid settings; the pursuit order is always `scatterer_count + 1`.
    pub estimator: EstimatorConfig,
    pub noise_dbm: f64,
    pub pilot_power_dbm: Vec<f64>,
    pub comm_power_dbm: f64,
    pub trials: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub subarray_sweep: SubarraySweep,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            waveguide: WaveguideConfig::default(),
            scene: SceneLaw::default(),
            layout: SubarrayLayout::default(),
            estimator: EstimatorConfig::default(),
            noise_dbm: -100.0,
            pilot_power_dbm: vec![0.0, 10.0, 20.0, 30.0, 40.0],
            comm_power_dbm: 40.0,
            trials: 200,
            seed: 1,
            methods: Method::ALL.to_vec(),
            subarray_sweep: SubarraySweep::default(),
            output: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.waveguide.validate()?;
        self.scene.validate()?;
        self.layout.validate(self.waveguide.antenna_count())?;
        self.estimator_config().validate()?;
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if !self.noise_dbm.is_finite() || !self.comm_power_dbm.is_finite() {
            return Err(Error::Config("noise and communication power must be finite".into()));
        }
        if self.pilot_power_dbm.is_empty() {
            return Err(Error::Config("pilot power list is empty".into()));
        }
        if self.pilot_power_dbm.iter().any(|q| !q.is_finite()) || !self.subarray_sweep.pilot_power_dbm.is_finite() {
            return Err(Error::Config("pilot power values must be finite".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("no methods selected".into()));
        }
        Ok(())
    }

    /// Highest configured pilot power, the operating point of a single run.
    pub fn max_pilot_power_dbm(&self) -> f64 {
        self.pilot_power_dbm.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Estimator settings with the pursuit order matched to the scene law.
    pub fn estimator_config(&self) -> EstimatorConfig {
        self.estimator.with_pursuit_order(self.scene.scatterer_count + 1)
    }

    pub fn runs(&self, method: Method) -> bool {
        self.methods.contains(&method)
    }
}
