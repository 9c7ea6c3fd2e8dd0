use std::cmp::Ordering;
use std::time::{Duration, Instant};

use rand::Rng;

use super::config::{AngleLaw, ExperimentConfig, Method, RcsLaw, SceneLaw};
use crate::error::Result;
use crate::estimator::{ls_full_csi, EstimatorConfig, SparseEstimator};
use crate::geometry::{path_gains, synthesize_channel, ChannelVector, Polar, Scatterer, Scene};
use crate::metrics::{achievable_rate, nmse, select_antenna, RateConfig};
use crate::pilot::{dbm_to_watts, make_pilot_symbols, receive_sequential, NoiseModel, SubarrayLayout, TrialRng};

// labels of the per-trial random streams
const SCENE_STREAM: u64 = 1;
const SPARSE_NOISE_STREAM: u64 = 2;
const LS_NOISE_STREAM: u64 = 3;

fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.random_range(lo..=hi)
    } else {
        lo
    }
}

/// Draws one scene from `law`.
pub fn sample_scene<R: Rng + ?Sized>(rng: &mut R, law: &SceneLaw) -> Result<Scene> {
    let user_angle = match law.user_angle {
        AngleLaw::Uniform => uniform(rng, law.angle_min_rad, law.angle_max_rad),
        AngleLaw::Fixed { angle_rad } => angle_rad,
    };
    let user = Polar::new(law.user_distance_m, user_angle);
    let scatterers = (0..law.scatterer_count)
        .map(|_| {
            let distance = uniform(rng, law.scatterer_distance_min_m, law.scatterer_distance_max_m);
            let angle = uniform(rng, law.angle_min_rad, law.angle_max_rad);
            let rcs = match law.rcs {
                RcsLaw::Constant { rcs_m2 } => rcs_m2,
                RcsLaw::Uniform { min_m2, max_m2 } => uniform(rng, min_m2, max_m2),
            };
            Scatterer {
                position: Polar::new(distance, angle),
                rcs_m2: rcs * law.nlos_gain_scale,
            }
        })
        .collect();
    Scene::new(user, scatterers)
}

/// Moves every angle and distance of `scene` onto the estimator grids.
pub fn snap_scene(scene: &Scene, grid: &EstimatorConfig) -> Result<Scene> {
    let snap = |p: &Polar| Polar::new(grid.snap_distance(p.distance_m), grid.snap_angle(p.angle_rad));
    Scene::new(
        snap(&scene.user),
        scene
            .scatterers
            .iter()
            .map(|s| Scatterer {
                position: snap(&s.position),
                rcs_m2: s.rcs_m2,
            })
            .collect(),
    )
}

/// Pilot power and subarray layout of one sweep point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub pilot_power_w: f64,
    pub layout: SubarrayLayout,
    /// Distinguishes the noise streams of different sweep points.
    pub sweep_index: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodMetrics {
    pub nmse: f64,
    pub selected_antenna: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodOutcome {
    pub method: Method,
    /// Estimation failures are recorded here rather than aborting the trial.
    pub metrics: std::result::Result<MethodMetrics, String>,
}

/// Result of one Monte Carlo trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: u64,
    pub scene: Scene,
    pub outcomes: Vec<MethodOutcome>,
    /// Wall time per method; not part of the reproducible output.
    pub wall_times: Vec<(Method, Duration)>,
}

impl TrialRecord {
    pub fn outcome(&self, method: Method) -> Option<&MethodMetrics> {
        self.outcomes
            .iter()
            .find(|o| o.method == method)
            .and_then(|o| o.metrics.as_ref().ok())
    }

    /// Same record with timings removed, for reproducibility checks.
    pub fn without_timing(&self) -> TrialRecord {
        TrialRecord {
            wall_times: Vec::new(),
            ..self.clone()
        }
    }
}

/// Experiment bound to one operating point; the estimator's fixed
/// dictionaries are built once and shared by all trials.
#[derive(Debug, Clone)]
pub struct Experiment {
    config: ExperimentConfig,
    point: OperatingPoint,
    estimator: SparseEstimator,
    rate: RateConfig,
    noise: NoiseModel,
}

impl Experiment {
    pub fn new(config: &ExperimentConfig, point: OperatingPoint) -> Result<Self> {
        config.validate()?;
        let estimator = SparseEstimator::new(config.waveguide, point.layout, config.estimator_config())?;
        let noise = NoiseModel::from_dbm(config.noise_dbm)?;
        let rate = RateConfig::new(dbm_to_watts(config.comm_power_dbm), noise.variance())?;
        Ok(Self {
            config: config.clone(),
            point,
            estimator,
            rate,
            noise,
        })
    }

    /// Operating point given by the highest configured pilot power and the
    /// configured layout.
    pub fn default_point(config: &ExperimentConfig) -> OperatingPoint {
        OperatingPoint {
            pilot_power_w: dbm_to_watts(config.max_pilot_power_dbm()),
            layout: config.layout,
            sweep_index: 0,
        }
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn point(&self) -> &OperatingPoint {
        &self.point
    }

    pub fn scene(&self, trial: u64) -> Result<Scene> {
        let mut rng = TrialRng::new(self.config.seed, trial).fork(SCENE_STREAM);
        let scene = sample_scene(&mut rng, &self.config.scene)?;
        if self.config.scene.on_grid {
            snap_scene(&scene, self.estimator.settings())
        } else {
            Ok(scene)
        }
    }

    fn score(&self, h: &ChannelVector, estimate: &[num_complex::Complex64]) -> Result<MethodMetrics> {
        let selected_antenna = select_antenna(estimate)?;
        Ok(MethodMetrics {
            nmse: nmse(estimate, h)?,
            selected_antenna,
            rate: achievable_rate(h, selected_antenna, &self.rate)?,
        })
    }

    pub fn run_trial(&self, trial: u64) -> Result<TrialRecord> {
        let cfg = &self.config.waveguide;
        let layout = &self.point.layout;
        let scene = self.scene(trial)?;
        let h = synthesize_channel(cfg, &scene);
        let base = TrialRng::new(self.config.seed, trial);

        let sparse_frames = if self.config.methods.iter().any(Method::is_sparse) {
            let pilots = make_pilot_symbols(self.point.pilot_power_w, layout.slot_count())?;
            let mut rng = base.fork(SPARSE_NOISE_STREAM).fork(self.point.sweep_index);
            let (ne, fe) = pilots.split_at(layout.near_count);
            let near = receive_sequential(cfg, &h, &layout.near_indices(), ne, &self.noise, &mut rng)?;
            let far = receive_sequential(cfg, &h, &layout.far_indices(), fe, &self.noise, &mut rng)?;
            Some((near, far))
        } else {
            None
        };

        let mut outcomes = Vec::with_capacity(self.config.methods.len());
        let mut wall_times = Vec::with_capacity(self.config.methods.len());
        for &method in &self.config.methods {
            let start = Instant::now();
            let estimate: std::result::Result<Vec<num_complex::Complex64>, String> = match method {
                Method::PerfectCsi => Ok(h.0.clone()),
                Method::Ls => {
                    let all: Vec<usize> = (1..=cfg.antenna_count()).collect();
                    let pilots = make_pilot_symbols(self.point.pilot_power_w, all.len())?;
                    let mut rng = base.fork(LS_NOISE_STREAM).fork(self.point.sweep_index);
                    let frame = receive_sequential(cfg, &h, &all, &pilots, &self.noise, &mut rng)?;
                    ls_full_csi(cfg, &frame).map(|v| v.0).map_err(|e| e.to_string())
                }
                Method::Coarse | Method::Refined | Method::Oracle => {
                    let (near, far) = sparse_frames.as_ref().expect("frames exist for sparse methods");
                    let est = match method {
                        Method::Coarse => self.estimator.coarse_only(near, far),
                        Method::Refined => self.estimator.algorithm1(near, far),
                        _ => {
                            let mut paths = path_gains(cfg, &scene).paths;
                            paths.sort_by(|a, b| b.gain.norm().partial_cmp(&a.gain.norm()).unwrap_or(Ordering::Equal));
                            let angles: Vec<f64> = paths.iter().map(|p| p.angle_rad).collect();
                            self.estimator.oracle(near, far, &angles)
                        }
                    };
                    est.map(|e| e.channel.0).map_err(|e| e.to_string())
                }
            };
            let metrics = estimate.and_then(|e| self.score(&h, &e).map_err(|err| err.to_string()));
            wall_times.push((method, start.elapsed()));
            outcomes.push(MethodOutcome { method, metrics });
        }

        Ok(TrialRecord {
            trial,
            scene,
            outcomes,
            wall_times,
        })
    }
}

/// One trial at the configuration's default operating point.
pub fn run_trial(config: &ExperimentConfig, trial: u64) -> Result<TrialRecord> {
    Experiment::new(config, Experiment::default_point(config))?.run_trial(trial)
}
