//! Two-subarray sparse estimator.
//!
//! The near-end block (antennas next to the feed point) sees every path as an
//! almost planar wave and is used for angles; the far-end block sits a few
//! meters down the waveguide, where the wavefront curvature makes the
//! response distance dependent. The pipeline is
//!
//! 1. coarse angles: OMP on the near-end frame with a planar dictionary,
//! 2. coarse distances: per-path distance dictionaries on the far-end frame,
//! 3. refined angles: per-path angle dictionaries that include the Fresnel
//!    term for that path's estimated range,
//! 4. refined distances: step 2 again with the refined angles,
//! 5. path gains: joint LS over both frames, followed by reconstruction of
//!    the channel at every candidate position.
//!
//! Paths are handled in descending order of their coarse OMP coefficient.
//! Steps 2 and 4 match each path against its own dictionary on the residual
//! left by the paths already fitted and re-fit all fitted gains after each
//! pick. Step 3 re-selects each angle against the near-end observation with
//! all other paths' current fit removed.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::dictionary::{
    build_far_dict_distance, build_near_dict_firstorder, build_near_dict_secondorder, nearest_distance_index,
    DictionaryGrid,
};
use super::omp::{best_atom_given, omp, projected_scores, sequential_pursuit, stack_columns};
use super::{reconstruct, Diagnostics, EstimatorConfig, FullEstimate, PathEstimate, Stage};
use crate::error::{invalid, Error, Result};
use crate::geometry::{steering_entry, WaveguideConfig};
use crate::linalg::{column_space, min_norm_lstsq};
use crate::pilot::{ReceivedFrame, SubarrayLayout};

#[derive(Debug, Clone, PartialEq)]
pub struct AngleEstimates {
    pub angles: Vec<f64>,
    pub grid_indices: Vec<usize>,
    /// Fitted coefficient of each path on the near-end frame.
    pub coefficients: Vec<Complex64>,
    pub residual_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceEstimates {
    pub distances: Vec<f64>,
    pub grid_indices: Vec<usize>,
    /// Selected distance is the first or last grid point.
    pub at_boundary: Vec<bool>,
    pub coefficients: Vec<Complex64>,
    pub residual_norm: f64,
    pub rank_deficient: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GainEstimates {
    pub gains: Vec<Complex64>,
    pub condition_number: f64,
    pub rank_deficient: bool,
    pub residual_norm: f64,
}

/// Estimator bound to one waveguide and subarray layout. Dictionaries that
/// do not depend on the observation are built once.
#[derive(Debug, Clone)]
pub struct SparseEstimator {
    cfg: WaveguideConfig,
    layout: SubarrayLayout,
    settings: EstimatorConfig,
    near_first: DictionaryGrid,
    near_positions: Vec<f64>,
    far_positions: Vec<f64>,
}

impl SparseEstimator {
    pub fn new(cfg: WaveguideConfig, layout: SubarrayLayout, settings: EstimatorConfig) -> Result<Self> {
        cfg.validate()?;
        layout.validate(cfg.antenna_count())?;
        settings.validate()?;
        if layout.near_count < 2 {
            return Err(invalid("angle estimation needs at least two near-end antennas"));
        }
        if settings.pursuit_order > settings.angle_grid_size {
            return Err(invalid("pursuit order exceeds the angle grid size"));
        }
        let near_first = build_near_dict_firstorder(&cfg, layout.near_count, settings.angle_grid_size)?;
        let near_positions = layout
            .near_indices()
            .into_iter()
            .map(|m| cfg.position(m))
            .collect::<Result<_>>()?;
        let far_positions = layout
            .far_indices()
            .into_iter()
            .map(|m| cfg.position(m))
            .collect::<Result<_>>()?;
        Ok(Self {
            cfg,
            layout,
            settings,
            near_first,
            near_positions,
            far_positions,
        })
    }

    pub fn waveguide(&self) -> &WaveguideConfig {
        &self.cfg
    }

    pub fn layout(&self) -> &SubarrayLayout {
        &self.layout
    }

    pub fn settings(&self) -> &EstimatorConfig {
        &self.settings
    }

    /// Observation vector and known slot gains `w ⊙ s`, after checking that
    /// the frame activated exactly `expected` in order.
    fn unpack(&self, frame: &ReceivedFrame, expected: &[usize]) -> Result<(DVector<Complex64>, Vec<Complex64>)> {
        if frame.len() != expected.len() {
            return Err(Error::DimensionMismatch {
                expected: expected.len(),
                actual: frame.len(),
            });
        }
        if frame.antennas() != expected {
            return Err(invalid("frame does not follow the subarray activation order"));
        }
        let g = frame.slot_gains(&self.cfg)?;
        if g.iter().any(|v| *v == Complex64::new(0.0, 0.0)) {
            let slot = g.iter().position(|v| *v == Complex64::new(0.0, 0.0)).unwrap_or(0);
            return Err(Error::ZeroPilot { slot });
        }
        Ok((DVector::from_vec(frame.observations()), g))
    }

    fn near(&self, frame: &ReceivedFrame) -> Result<(DVector<Complex64>, Vec<Complex64>)> {
        self.unpack(frame, &self.layout.near_indices())
    }

    fn far(&self, frame: &ReceivedFrame) -> Result<(DVector<Complex64>, Vec<Complex64>)> {
        self.unpack(frame, &self.layout.far_indices())
    }

    fn check_path_count(&self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(invalid("at least one path is required"));
        }
        Ok(())
    }

    /// `diag(g) a(r, φ)` over the given positions with the exact response.
    fn effective_steering(&self, positions: &[f64], g: &[Complex64], r: f64, phi: f64) -> DVector<Complex64> {
        let k = self.cfg.wavenumber();
        DVector::from_iterator(
            positions.len(),
            positions.iter().zip(g).map(|(&x, &gi)| gi * steering_entry(k, r, phi, x)),
        )
    }

    /// Step 1: OMP over the planar near-end dictionary. Angles come back in
    /// descending order of coefficient magnitude.
    pub fn coarse_angles(&self, frame_ne: &ReceivedFrame) -> Result<AngleEstimates> {
        let (y, g) = self.near(frame_ne)?;
        if y.iter().all(|v| *v == Complex64::new(0.0, 0.0)) {
            return Err(Error::Degenerate("near-end observation is identically zero".into()));
        }
        let atoms = self.near_first.weighted(&g);
        let out = omp(&y, &atoms, self.settings.pursuit_order)?;

        let mut order: Vec<usize> = (0..out.support.len()).collect();
        // stable sort keeps selection order among equal magnitudes
        order.sort_by(|&a, &b| {
            out.coefficients[b]
                .norm()
                .partial_cmp(&out.coefficients[a].norm())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let grid_indices: Vec<usize> = order.iter().map(|&i| out.support[i]).collect();
        Ok(AngleEstimates {
            angles: grid_indices.iter().map(|&c| self.near_first.values[c]).collect(),
            coefficients: order.iter().map(|&i| out.coefficients[i]).collect(),
            grid_indices,
            residual_norm: out.residual_norm(),
        })
    }

    /// Steps 2 and 4: one distance per path from its own far-end dictionary.
    pub fn coarse_distances(&self, frame_fe: &ReceivedFrame, angles: &[f64]) -> Result<DistanceEstimates> {
        self.check_path_count(angles.len())?;
        let (y, g) = self.far(frame_fe)?;
        let s = &self.settings;
        let dicts: Vec<DictionaryGrid> = angles
            .iter()
            .map(|&phi| {
                build_far_dict_distance(
                    &self.cfg,
                    phi,
                    &self.layout,
                    s.distance_grid_size,
                    s.distance_min_m,
                    s.distance_max_m,
                )
            })
            .collect::<Result<_>>()?;
        let weighted: Vec<DMatrix<Complex64>> = dicts.iter().map(|d| d.weighted(&g)).collect();
        let fit = sequential_pursuit(&y, &weighted, s.backfit_sweeps);
        let last = s.distance_grid_size - 1;
        Ok(DistanceEstimates {
            distances: fit
                .picks
                .iter()
                .zip(&dicts)
                .map(|(&c, d)| d.values[c])
                .collect(),
            at_boundary: fit.picks.iter().map(|&c| c == 0 || c == last).collect(),
            grid_indices: fit.picks,
            coefficients: fit.coefficients,
            residual_norm: fit.residual.norm(),
            rank_deficient: fit.rank_deficient,
        })
    }

    /// Step 3: re-select every angle from a Fresnel-corrected dictionary
    /// built for that path's range, against the near-end observation minus
    /// the current fit of all other paths.
    pub fn refine_angles(&self, frame_ne: &ReceivedFrame, angles: &[f64], distances: &[f64]) -> Result<AngleEstimates> {
        self.check_path_count(angles.len())?;
        if angles.len() != distances.len() {
            return Err(Error::DimensionMismatch {
                expected: angles.len(),
                actual: distances.len(),
            });
        }
        let (y, g) = self.near(frame_ne)?;
        if y.iter().all(|v| *v == Complex64::new(0.0, 0.0)) {
            return Err(Error::Degenerate("near-end observation is identically zero".into()));
        }
        let s = &self.settings;
        let mut angles = angles.to_vec();
        let mut grid_indices = vec![0; angles.len()];

        for p in 0..angles.len() {
            let others: Vec<DVector<Complex64>> = (0..angles.len())
                .filter(|&q| q != p)
                .map(|q| self.effective_steering(&self.near_positions, &g, distances[q], angles[q]))
                .collect();
            let basis = column_space(&stack_columns(&others, y.len()));
            let dict = build_near_dict_secondorder(&self.cfg, distances[p], self.layout.near_count, s.angle_grid_size)?;
            let (c, _) = best_atom_given(&dict.weighted(&g), &basis, &y).expect("angle dictionary is never empty");
            angles[p] = dict.values[c];
            grid_indices[p] = c;
        }

        let columns: Vec<DVector<Complex64>> = angles
            .iter()
            .zip(distances)
            .map(|(&phi, &r)| self.effective_steering(&self.near_positions, &g, r, phi))
            .collect();
        let fit = min_norm_lstsq(&stack_columns(&columns, y.len()), &y);
        Ok(AngleEstimates {
            angles,
            grid_indices,
            coefficients: fit.coefficients.iter().copied().collect(),
            residual_norm: fit.residual.norm(),
        })
    }

    /// Joint per-path update used between refinement passes. For each path
    /// the best `angle_candidates` atoms of its Fresnel-corrected angle
    /// dictionary are paired with their best far-end distance, and the pair
    /// that leaves the smallest stacked residual (other paths fixed) replaces
    /// the current one if it does better.
    fn joint_update(
        &self,
        frame_ne: &ReceivedFrame,
        frame_fe: &ReceivedFrame,
        angles: &mut [f64],
        distances: &mut [f64],
    ) -> Result<bool> {
        let s = &self.settings;
        let (y_ne, g_ne) = self.near(frame_ne)?;
        let (y_fe, g_fe) = self.far(frame_fe)?;
        let rows = y_ne.len() + y_fe.len();
        let y = DVector::from_iterator(rows, y_ne.iter().chain(y_fe.iter()).copied());
        let stacked = |phi: f64, r: f64| {
            let ne = self.effective_steering(&self.near_positions, &g_ne, r, phi);
            let fe = self.effective_steering(&self.far_positions, &g_fe, r, phi);
            DVector::from_iterator(rows, ne.iter().chain(fe.iter()).copied())
        };
        let mut changed = false;
        for p in 0..angles.len() {
            let others: Vec<usize> = (0..angles.len()).filter(|&q| q != p).collect();
            let basis_ne = column_space(&stack_columns(
                &others
                    .iter()
                    .map(|&q| self.effective_steering(&self.near_positions, &g_ne, distances[q], angles[q]))
                    .collect::<Vec<_>>(),
                y_ne.len(),
            ));
            let basis_fe = column_space(&stack_columns(
                &others
                    .iter()
                    .map(|&q| self.effective_steering(&self.far_positions, &g_fe, distances[q], angles[q]))
                    .collect::<Vec<_>>(),
                y_fe.len(),
            ));
            let basis = column_space(&stack_columns(
                &others.iter().map(|&q| stacked(angles[q], distances[q])).collect::<Vec<_>>(),
                rows,
            ));

            let near_dict = build_near_dict_secondorder(&self.cfg, distances[p], self.layout.near_count, s.angle_grid_size)?;
            let scores = projected_scores(&near_dict.weighted(&g_ne), &basis_ne, &y_ne);
            let mut order: Vec<usize> = (0..scores.len()).collect();
            order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap_or(std::cmp::Ordering::Equal));

            let current = stacked(angles[p], distances[p]);
            let (_, mut best_gain) = best_atom_given(&DMatrix::from_column_slice(rows, 1, current.as_slice()), &basis, &y)
                .expect("one column");
            let mut best = None;
            for &c in order.iter().take(s.angle_candidates) {
                let phi = near_dict.values[c];
                let r = self.scan_distance(phi, &g_fe, &y_fe, &basis_fe);
                let col = stacked(phi, r);
                let (_, gain) = best_atom_given(&DMatrix::from_column_slice(rows, 1, col.as_slice()), &basis, &y)
                    .expect("one column");
                if gain > best_gain {
                    best_gain = gain;
                    best = Some((phi, r));
                }
            }
            if let Some((phi, r)) = best {
                angles[p] = phi;
                distances[p] = r;
                changed = true;
            }
        }
        Ok(changed)
    }

    /// Step 4 has the same contract as step 2, fed with refined angles.
    pub fn refine_distances(&self, frame_fe: &ReceivedFrame, angles: &[f64]) -> Result<DistanceEstimates> {
        self.coarse_distances(frame_fe, angles)
    }

    /// Step 5: joint LS over the stacked near/far observation for all path
    /// gains (LoS included).
    pub fn estimate_gains(
        &self,
        frame_ne: &ReceivedFrame,
        frame_fe: &ReceivedFrame,
        angles: &[f64],
        distances: &[f64],
    ) -> Result<GainEstimates> {
        self.check_path_count(angles.len())?;
        if angles.len() != distances.len() {
            return Err(Error::DimensionMismatch {
                expected: angles.len(),
                actual: distances.len(),
            });
        }
        let (y_ne, g_ne) = self.near(frame_ne)?;
        let (y_fe, g_fe) = self.far(frame_fe)?;
        let rows = y_ne.len() + y_fe.len();
        if angles.len() > rows {
            return Err(invalid(format!("{} paths exceed {rows} observations", angles.len())));
        }
        let y = DVector::from_iterator(rows, y_ne.iter().chain(y_fe.iter()).copied());
        let columns: Vec<DVector<Complex64>> = angles
            .iter()
            .zip(distances)
            .map(|(&phi, &r)| {
                let ne = self.effective_steering(&self.near_positions, &g_ne, r, phi);
                let fe = self.effective_steering(&self.far_positions, &g_fe, r, phi);
                DVector::from_iterator(rows, ne.iter().chain(fe.iter()).copied())
            })
            .collect();
        let fit = min_norm_lstsq(&stack_columns(&columns, rows), &y);
        Ok(GainEstimates {
            gains: fit.coefficients.iter().copied().collect(),
            condition_number: fit.condition_number,
            rank_deficient: fit.rank_deficient,
            residual_norm: fit.residual.norm(),
        })
    }

    pub fn reconstruct(&self, paths: &[PathEstimate]) -> crate::geometry::ChannelVector {
        reconstruct(&self.cfg, paths)
    }

    fn finish(
        &self,
        frame_ne: &ReceivedFrame,
        frame_fe: &ReceivedFrame,
        angles: &[f64],
        distances: &DistanceEstimates,
        mut diagnostics: Diagnostics,
    ) -> Result<FullEstimate> {
        let gains = self.estimate_gains(frame_ne, frame_fe, angles, &distances.distances)?;
        diagnostics.stage_residuals.push((Stage::Gains, gains.residual_norm));
        diagnostics.gain_condition_number = gains.condition_number;
        diagnostics.rank_deficient |= gains.rank_deficient;
        diagnostics.distance_at_boundary = distances.at_boundary.clone();
        let paths: Vec<PathEstimate> = angles
            .iter()
            .zip(&distances.distances)
            .zip(&gains.gains)
            .map(|((&angle_rad, &distance_m), &gain)| PathEstimate {
                angle_rad,
                distance_m,
                gain,
            })
            .collect();
        Ok(FullEstimate {
            channel: self.reconstruct(&paths),
            paths,
            diagnostics,
        })
    }

    /// Full pipeline: coarse angles and distances, `refinement_passes`
    /// rounds of angle/distance refinement, gains, reconstruction.
    pub fn algorithm1(&self, frame_ne: &ReceivedFrame, frame_fe: &ReceivedFrame) -> Result<FullEstimate> {
        self.run(frame_ne, frame_fe, self.settings.refinement_passes)
    }

    /// Steps 1, 2 and 5 only: the reconstruction uses the coarse estimates.
    pub fn coarse_only(&self, frame_ne: &ReceivedFrame, frame_fe: &ReceivedFrame) -> Result<FullEstimate> {
        self.run(frame_ne, frame_fe, 0)
    }

    fn run(&self, frame_ne: &ReceivedFrame, frame_fe: &ReceivedFrame, passes: usize) -> Result<FullEstimate> {
        let mut diag = Diagnostics::default();
        let coarse = self.coarse_angles(frame_ne)?;
        diag.stage_residuals.push((Stage::CoarseAngles, coarse.residual_norm));
        let mut distances = self.coarse_distances(frame_fe, &coarse.angles)?;
        diag.stage_residuals.push((Stage::CoarseDistances, distances.residual_norm));
        diag.rank_deficient |= distances.rank_deficient;
        let mut angles = coarse.angles;

        for _ in 0..passes {
            let refined = self.refine_angles(frame_ne, &angles, &distances.distances)?;
            diag.stage_residuals.push((Stage::RefinedAngles, refined.residual_norm));
            let next = self.refine_distances(frame_fe, &refined.angles)?;
            diag.stage_residuals.push((Stage::RefinedDistances, next.residual_norm));
            diag.rank_deficient |= next.rank_deficient;
            let mut settled = refined.angles == angles && next.grid_indices == distances.grid_indices;
            angles = refined.angles;
            distances = next;
            if self.settings.angle_candidates > 0 {
                let mut d = distances.distances.clone();
                if self.joint_update(frame_ne, frame_fe, &mut angles, &mut d)? {
                    settled = false;
                    distances = self.far_fit(frame_fe, &angles, &d)?;
                }
            }
            if settled {
                break;
            }
        }
        self.finish(frame_ne, frame_fe, &angles, &distances, diag)
    }

    /// Grid distance whose far-end column best extends the fixed span
    /// `basis`. Scans every `SCAN_STRIDE`th grid point, then searches the
    /// neighbourhoods of the best few; far-end atoms vary slowly over a
    /// stride, so this finds the full-grid maximum without building the
    /// whole dictionary.
    fn scan_distance(&self, phi: f64, g: &[Complex64], y: &DVector<Complex64>, basis: &DMatrix<Complex64>) -> f64 {
        const SCAN_STRIDE: usize = 8;
        const SCAN_PEAKS: usize = 3;
        let s = &self.settings;
        let grid = s.distance_grid();
        let k = self.cfg.wavenumber();
        let z = y - basis * basis.ad_mul(y);
        let score = |c: usize| {
            let col = DVector::from_iterator(
                g.len(),
                self.far_positions.iter().zip(g).map(|(&x, &gi)| gi * steering_entry(k, grid[c], phi, x)),
            );
            let total = col.norm_squared();
            let outside = total - basis.ad_mul(&col).norm_squared();
            if outside > 1e-12 * total {
                col.dotc(&z).norm_sqr() / outside
            } else {
                0.0
            }
        };
        let last = grid.len() - 1;
        let mut coarse: Vec<(usize, f64)> = (0..=last)
            .step_by(SCAN_STRIDE)
            .chain(std::iter::once(last))
            .map(|c| (c, score(c)))
            .collect();
        coarse.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal).then(a.0.cmp(&b.0)));
        let mut best = (usize::MAX, f64::NEG_INFINITY);
        for &(c, _) in coarse.iter().take(SCAN_PEAKS) {
            for i in c.saturating_sub(SCAN_STRIDE)..=(c + SCAN_STRIDE).min(last) {
                let v = score(i);
                if v > best.1 || (v == best.1 && i < best.0) {
                    best = (i, v);
                }
            }
        }
        grid[best.0]
    }

    /// Far-end LS fit at fixed angles and grid distances.
    fn far_fit(&self, frame_fe: &ReceivedFrame, angles: &[f64], distances: &[f64]) -> Result<DistanceEstimates> {
        let (y, g) = self.far(frame_fe)?;
        let s = &self.settings;
        let columns: Vec<DVector<Complex64>> = angles
            .iter()
            .zip(distances)
            .map(|(&phi, &r)| self.effective_steering(&self.far_positions, &g, r, phi))
            .collect();
        let fit = min_norm_lstsq(&stack_columns(&columns, y.len()), &y);
        let grid_indices: Vec<usize> = distances
            .iter()
            .map(|&r| nearest_distance_index(s.distance_grid_size, s.distance_min_m, s.distance_max_m, r))
            .collect();
        let last = s.distance_grid_size - 1;
        Ok(DistanceEstimates {
            distances: distances.to_vec(),
            at_boundary: grid_indices.iter().map(|&c| c == 0 || c == last).collect(),
            grid_indices,
            coefficients: fit.coefficients.iter().copied().collect(),
            residual_norm: fit.residual.norm(),
            rank_deficient: fit.rank_deficient,
        })
    }

    /// Genie-aided variant that knows the true angles and runs only the
    /// distance and gain steps. Angles are processed in the given order.
    pub fn oracle(&self, frame_ne: &ReceivedFrame, frame_fe: &ReceivedFrame, true_angles: &[f64]) -> Result<FullEstimate> {
        let mut diag = Diagnostics::default();
        let distances = self.coarse_distances(frame_fe, true_angles)?;
        diag.stage_residuals.push((Stage::CoarseDistances, distances.residual_norm));
        diag.rank_deficient |= distances.rank_deficient;
        self.finish(frame_ne, frame_fe, true_angles, &distances, diag)
    }
}
