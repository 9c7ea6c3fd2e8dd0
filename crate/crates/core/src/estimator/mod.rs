//! Channel estimators: the full-array LS baseline and the two-subarray
//! sparse estimator.

mod dictionary;
mod ls;
mod omp;
mod sparse;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::{full_steering, ChannelVector, WaveguideConfig};

pub use dictionary::{
    angle_grid, build_far_dict_distance, build_near_dict_firstorder, build_near_dict_secondorder,
    distance_grid, nearest_angle_index, nearest_distance_index, AtomModel, DictionaryGrid,
    ParameterKind,
};
pub use ls::ls_full_csi;
pub use omp::{omp, OmpOutcome};
pub use sparse::{AngleEstimates, DistanceEstimates, GainEstimates, SparseEstimator};

/// Grid sizes and pursuit settings of the sparse estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorConfig {
    /// Angle dictionary size `C_ne`.
    pub angle_grid_size: usize,
    /// Distance dictionary size `C_fe`.
    pub distance_grid_size: usize,
    pub distance_min_m: f64,
    pub distance_max_m: f64,
    /// Number of paths to extract (LoS plus scatterers).
    #[serde(skip)]
    pub pursuit_order: usize,
    /// Upper bound on angle/distance refinement passes; refinement stops
    /// early once a pass leaves every estimate unchanged.
    pub refinement_passes: usize,
    /// Sweeps revisiting each distance pick with the other paths fixed.
    pub backfit_sweeps: usize,
    /// Angle candidates per path tried by the joint angle/distance update;
    /// zero disables it.
    pub angle_candidates: usize,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            angle_grid_size: 1024,
            distance_grid_size: 2048,
            distance_min_m: 1.0,
            distance_max_m: 15.0,
            pursuit_order: 3,
            refinement_passes: 4,
            backfit_sweeps: 4,
            angle_candidates: 4,
        }
    }
}

impl EstimatorConfig {
    pub fn with_pursuit_order(mut self, k: usize) -> Self {
        self.pursuit_order = k;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.angle_grid_size < 2 || self.distance_grid_size < 2 {
            return Err(invalid("dictionary grids need at least two points"));
        }
        if !(self.distance_min_m > 0.0 && self.distance_max_m > self.distance_min_m) {
            return Err(invalid(format!(
                "distance range [{}, {}] must satisfy 0 < min < max",
                self.distance_min_m, self.distance_max_m
            )));
        }
        if self.pursuit_order < 1 {
            return Err(invalid("pursuit order must be at least 1"));
        }
        Ok(())
    }

    pub fn angle_grid(&self) -> Vec<f64> {
        angle_grid(self.angle_grid_size)
    }

    pub fn distance_grid(&self) -> Vec<f64> {
        distance_grid(self.distance_grid_size, self.distance_min_m, self.distance_max_m)
    }

    /// Distance grid resolution `Δd`.
    pub fn distance_step(&self) -> f64 {
        (self.distance_max_m - self.distance_min_m) / (self.distance_grid_size - 1) as f64
    }

    pub fn snap_angle(&self, angle: f64) -> f64 {
        self.angle_grid()[nearest_angle_index(self.angle_grid_size, angle)]
    }

    pub fn snap_distance(&self, distance: f64) -> f64 {
        let i = nearest_distance_index(
            self.distance_grid_size,
            self.distance_min_m,
            self.distance_max_m,
            distance,
        );
        self.distance_grid()[i]
    }
}

/// Estimated parameters of one path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathEstimate {
    pub angle_rad: f64,
    pub distance_m: f64,
    pub gain: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    CoarseAngles,
    CoarseDistances,
    RefinedAngles,
    RefinedDistances,
    Gains,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    /// Residual norm left by each stage, in execution order.
    pub stage_residuals: Vec<(Stage, f64)>,
    /// Condition number of the gain design matrix.
    pub gain_condition_number: f64,
    pub rank_deficient: bool,
    /// One flag per path: the selected distance sits on a grid boundary.
    pub distance_at_boundary: Vec<bool>,
}

/// Output of the sparse estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct FullEstimate {
    pub paths: Vec<PathEstimate>,
    pub channel: ChannelVector,
    pub diagnostics: Diagnostics,
}

/// Rebuilds the channel over every candidate position from path estimates
/// using the exact near-field response.
pub fn reconstruct(cfg: &WaveguideConfig, paths: &[PathEstimate]) -> ChannelVector {
    let mut h = ChannelVector::zeros(cfg.antenna_count());
    for p in paths {
        if p.gain == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (hm, a) in h.0.iter_mut().zip(full_steering(cfg, p.distance_m, p.angle_rad)) {
            *hm += p.gain * a;
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{path_gains, synthesize_channel, Polar, Scatterer, Scene};

    #[test]
    fn reconstruct_from_true_parameters() {
        let cfg = WaveguideConfig::default();
        let scene = Scene::new(
            Polar::new(5.0, 0.2),
            vec![Scatterer {
                position: Polar::new(8.0, -0.9),
                rcs_m2: 1.0,
            }],
        )
        .unwrap();
        let truth = synthesize_channel(&cfg, &scene);
        let est: Vec<PathEstimate> = path_gains(&cfg, &scene)
            .iter()
            .map(|p| PathEstimate {
                angle_rad: p.angle_rad,
                distance_m: p.distance_m,
                gain: p.gain,
            })
            .collect();
        let h = reconstruct(&cfg, &est);
        for (a, b) in h.iter().zip(truth.iter()) {
            assert!((a - b).norm() <= 1e-12 * b.norm());
        }
        let zero: Vec<PathEstimate> = est
            .iter()
            .map(|p| PathEstimate {
                gain: Complex64::new(0.0, 0.0),
                ..*p
            })
            .collect();
        assert_eq!(reconstruct(&cfg, &zero).norm_sqr(), 0.0);
    }

    #[test]
    fn config_validation() {
        assert!(EstimatorConfig::default().validate().is_ok());
        let mut c = EstimatorConfig::default();
        c.distance_min_m = 20.0;
        assert!(c.validate().is_err());
        let c = EstimatorConfig::default().with_pursuit_order(0);
        assert!(c.validate().is_err());
        let c = EstimatorConfig::default();
        assert!((c.distance_step() - 14.0 / 2047.0).abs() < 1e-15);
        assert_eq!(c.snap_distance(100.0), 15.0);
    }
}
