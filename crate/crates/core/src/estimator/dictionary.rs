//! Steering-vector dictionaries over angle and distance grids.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::geometry::{second_order_term, steering_entry, WaveguideConfig};
use crate::pilot::SubarrayLayout;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParameterKind {
    Angle,
    Distance,
}

/// Phase model used to generate the atoms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtomModel {
    /// Planar wavefront, `e^{jk x sinθ}`.
    FirstOrder,
    /// Planar wavefront plus the Fresnel term for a given range.
    SecondOrder,
    /// Full spherical wavefront including the amplitude taper.
    ExactNearField,
}

/// A parameter grid and one atom (column) per grid value.
#[derive(Debug, Clone)]
pub struct DictionaryGrid {
    pub kind: ParameterKind,
    pub model: AtomModel,
    pub values: Vec<f64>,
    pub atoms: DMatrix<Complex64>,
}

impl DictionaryGrid {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Atoms with row `i` multiplied by `row_gains[i]`, i.e. `diag(g) C`.
    pub fn weighted(&self, row_gains: &[Complex64]) -> DMatrix<Complex64> {
        debug_assert_eq!(row_gains.len(), self.atoms.nrows());
        let mut out = self.atoms.clone();
        for (mut row, &g) in out.row_iter_mut().zip(row_gains) {
            row *= g;
        }
        out
    }
}

/// Uniform angle grid `-π/2 + πc/C`, `c = 0..C`.
pub fn angle_grid(size: usize) -> Vec<f64> {
    (0..size)
        .map(|c| -0.5 * PI + PI * c as f64 / size as f64)
        .collect()
}

/// Uniform distance grid from `d_min` to `d_max`, both endpoints included.
pub fn distance_grid(size: usize, d_min: f64, d_max: f64) -> Vec<f64> {
    let step = (d_max - d_min) / (size - 1) as f64;
    (0..size)
        .map(|c| if c + 1 == size { d_max } else { d_min + c as f64 * step })
        .collect()
}

/// Index of the angle grid point nearest to `angle`.
pub fn nearest_angle_index(size: usize, angle: f64) -> usize {
    let c = ((angle + 0.5 * PI) * size as f64 / PI).round();
    c.clamp(0.0, (size - 1) as f64) as usize
}

/// Index of the distance grid point nearest to `distance` (clamped to the grid).
pub fn nearest_distance_index(size: usize, d_min: f64, d_max: f64, distance: f64) -> usize {
    let step = (d_max - d_min) / (size - 1) as f64;
    let c = ((distance - d_min) / step).round();
    c.clamp(0.0, (size - 1) as f64) as usize
}

fn check_sizes(rows: usize, cols: usize) -> Result<()> {
    if rows == 0 {
        return Err(invalid("dictionary needs at least one antenna"));
    }
    if cols < 2 {
        return Err(invalid(format!("grid size {cols} must be at least 2")));
    }
    Ok(())
}

fn near_positions(cfg: &WaveguideConfig, near_count: usize) -> Result<Vec<f64>> {
    (1..=near_count).map(|m| cfg.position(m)).collect()
}

/// Far-field angle dictionary over antennas `1..=near_count`.
pub fn build_near_dict_firstorder(
    cfg: &WaveguideConfig,
    near_count: usize,
    grid_size: usize,
) -> Result<DictionaryGrid> {
    check_sizes(near_count, grid_size)?;
    let xs = near_positions(cfg, near_count)?;
    let k = cfg.wavenumber();
    let values = angle_grid(grid_size);
    let atoms = DMatrix::from_fn(near_count, grid_size, |i, c| {
        Complex64::from_polar(1.0, k * xs[i] * values[c].sin())
    });
    Ok(DictionaryGrid {
        kind: ParameterKind::Angle,
        model: AtomModel::FirstOrder,
        values,
        atoms,
    })
}

/// Angle dictionary with the Fresnel phase for a source at range `range_m`.
pub fn build_near_dict_secondorder(
    cfg: &WaveguideConfig,
    range_m: f64,
    near_count: usize,
    grid_size: usize,
) -> Result<DictionaryGrid> {
    check_sizes(near_count, grid_size)?;
    if !(range_m > 0.0) {
        return Err(invalid(format!("range {range_m} m must be positive")));
    }
    let xs = near_positions(cfg, near_count)?;
    let k = cfg.wavenumber();
    let values = angle_grid(grid_size);
    let atoms = DMatrix::from_fn(near_count, grid_size, |i, c| {
        let theta = values[c];
        let path = -xs[i] * theta.sin() + second_order_term(range_m, theta, xs[i]);
        Complex64::from_polar(1.0, -k * path)
    });
    Ok(DictionaryGrid {
        kind: ParameterKind::Angle,
        model: AtomModel::SecondOrder,
        values,
        atoms,
    })
}

/// Distance dictionary over the far-end antennas for a fixed angle, using
/// the exact near-field response.
pub fn build_far_dict_distance(
    cfg: &WaveguideConfig,
    angle: f64,
    layout: &SubarrayLayout,
    grid_size: usize,
    d_min: f64,
    d_max: f64,
) -> Result<DictionaryGrid> {
    layout.validate(cfg.antenna_count())?;
    check_sizes(layout.far_count, grid_size)?;
    if !(d_min > 0.0 && d_max > d_min) {
        return Err(invalid(format!("distance range [{d_min}, {d_max}] is empty")));
    }
    let xs: Vec<f64> = layout
        .far_indices()
        .into_iter()
        .map(|m| cfg.position(m))
        .collect::<Result<_>>()?;
    let k = cfg.wavenumber();
    let values = distance_grid(grid_size, d_min, d_max);
    let atoms = DMatrix::from_fn(xs.len(), grid_size, |i, c| steering_entry(k, values[c], angle, xs[i]));
    Ok(DictionaryGrid {
        kind: ParameterKind::Distance,
        model: AtomModel::ExactNearField,
        values,
        atoms,
    })
}
