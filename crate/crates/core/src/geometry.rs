//! Free-space near-field channel model for a dielectric waveguide with
//! pinching antennas.
//!
//! The waveguide lies on the x-axis with its feed point at the origin.
//! Candidate antenna positions are spaced by half a wavelength, and antenna
//! index 1 sits on the feed point, which is also the reference point for all
//! polar coordinates (distance, angle of arrival).
//!
//! Antenna indices are 1-based throughout the public API, matching the usual
//! `m = 1..M` numbering. Vectors returned by this module are stored 0-based,
//! so entry `i` belongs to antenna `i + 1`.

use std::f64::consts::PI;
use std::ops::Deref;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Speed of light used for every wavelength computation (m/s).
pub const LIGHT_SPEED: f64 = 3.0e8;

/// Physical description of the waveguide.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WaveguideConfig {
    pub length_m: f64,
    pub carrier_hz: f64,
    pub refractive_index: f64,
}

impl Default for WaveguideConfig {
    /// 3 m waveguide at 28 GHz with refractive index 1.4.
    fn default() -> Self {
        Self {
            length_m: 3.0,
            carrier_hz: 28.0e9,
            refractive_index: 1.4,
        }
    }
}

impl WaveguideConfig {
    pub fn new(length_m: f64, carrier_hz: f64, refractive_index: f64) -> Result<Self> {
        let cfg = Self {
            length_m,
            carrier_hz,
            refractive_index,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length_m > 0.0 && self.length_m.is_finite()) {
            return Err(invalid(format!("waveguide length {} m must be positive", self.length_m)));
        }
        if !(self.carrier_hz > 0.0 && self.carrier_hz.is_finite()) {
            return Err(invalid(format!("carrier {} Hz must be positive", self.carrier_hz)));
        }
        if !(self.refractive_index >= 1.0 && self.refractive_index.is_finite()) {
            return Err(invalid(format!(
                "refractive index {} must be at least 1",
                self.refractive_index
            )));
        }
        if self.antenna_count() < 2 {
            return Err(invalid("waveguide must hold at least two candidate positions"));
        }
        Ok(())
    }

    /// Free-space wavelength `c / f_c` in meters.
    pub fn wavelength(&self) -> f64 {
        LIGHT_SPEED / self.carrier_hz
    }

    /// Spacing between neighbouring candidate positions (half a wavelength).
    pub fn spacing(&self) -> f64 {
        0.5 * self.wavelength()
    }

    /// Free-space wavenumber `2π/λ` in rad/m.
    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength()
    }

    /// In-guide propagation constant `η_g · 2π/λ` in rad/m.
    pub fn propagation_constant(&self) -> f64 {
        self.refractive_index * self.wavenumber()
    }

    /// Number of candidate positions, `floor(2L/λ)`.
    pub fn antenna_count(&self) -> usize {
        // 2L/λ written as 2 L f_c / c so that exact products stay exact
        let slots = 2.0 * self.length_m * self.carrier_hz / LIGHT_SPEED;
        (slots + 1e-9).floor() as usize
    }

    /// Position of antenna `m` (1-based) measured from the feed point.
    pub fn position(&self, m: usize) -> Result<f64> {
        self.check_index(m)?;
        Ok(self.position_unchecked(m))
    }

    pub(crate) fn position_unchecked(&self, m: usize) -> f64 {
        (m - 1) as f64 * self.spacing()
    }

    /// All candidate positions `x_m = (m-1)·λ/2`, `m = 1..=M`.
    pub fn candidate_positions(&self) -> Vec<f64> {
        (1..=self.antenna_count())
            .map(|m| self.position_unchecked(m))
            .collect()
    }

    pub fn check_index(&self, m: usize) -> Result<()> {
        let count = self.antenna_count();
        if m == 0 || m > count {
            return Err(Error::IndexOutOfRange { index: m, count });
        }
        Ok(())
    }

    /// Radiation coefficient `e^{-j β_g x_m}` of antenna `m`.
    pub fn radiation_coefficient(&self, m: usize) -> Result<Complex64> {
        self.check_index(m)?;
        Ok(self.radiation_unchecked(m))
    }

    pub(crate) fn radiation_unchecked(&self, m: usize) -> Complex64 {
        Complex64::from_polar(1.0, -self.propagation_constant() * self.position_unchecked(m))
    }

    /// Radiation coefficients for an ordered set of antenna indices.
    pub fn radiation_vector(&self, indices: &[usize]) -> Result<Vec<Complex64>> {
        indices.iter().map(|&m| self.radiation_coefficient(m)).collect()
    }
}

/// Distance from a point at polar coordinates `(r, φ)` (seen from the feed
/// point) to the waveguide position `x`.
pub fn distance_to_position(r: f64, phi: f64, x: f64) -> f64 {
    if x == 0.0 {
        return r;
    }
    (r * r - 2.0 * r * x * phi.sin() + x * x).max(0.0).sqrt()
}

/// `distance_to_position(r, φ, x) - r`, evaluated without cancellation.
fn excess_path(r: f64, phi: f64, x: f64) -> (f64, f64) {
    let dist = distance_to_position(r, phi, x);
    if x == 0.0 {
        return (dist, 0.0);
    }
    (dist, x * (x - 2.0 * r * phi.sin()) / (dist + r))
}

/// Distance between the user at `(r_0, φ_0)` and a scatterer at `(r_p, φ_p)`.
pub fn scatterer_user_distance(r0: f64, phi0: f64, rp: f64, phip: f64) -> f64 {
    (r0 * r0 - 2.0 * r0 * rp * (phi0 - phip).cos() + rp * rp)
        .max(0.0)
        .sqrt()
}

/// Order of the Taylor expansion of the path distance in the position `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaylorOrder {
    /// `r - x sinφ` (far-field, planar wavefront).
    First,
    /// Adds the Fresnel term `x² cos²φ / (2r)`.
    Second,
}

impl TryFrom<u8> for TaylorOrder {
    type Error = Error;

    fn try_from(order: u8) -> Result<Self> {
        match order {
            1 => Ok(TaylorOrder::First),
            2 => Ok(TaylorOrder::Second),
            other => Err(invalid(format!("Taylor order must be 1 or 2, got {other}"))),
        }
    }
}

/// Quadratic (Fresnel) term of the distance expansion, `x² cos²φ / (2r)`.
pub fn second_order_term(r: f64, phi: f64, x: f64) -> f64 {
    let c = phi.cos();
    x * x * c * c / (2.0 * r)
}

/// Taylor approximation of [`distance_to_position`].
pub fn taylor_distance(r: f64, phi: f64, x: f64, order: TaylorOrder) -> f64 {
    let first = r - x * phi.sin();
    match order {
        TaylorOrder::First => first,
        TaylorOrder::Second => first + second_order_term(r, phi, x),
    }
}

/// Single entry `(r/r_x) e^{-jk(r_x - r)}` of the near-field array response.
pub(crate) fn steering_entry(wavenumber: f64, r: f64, phi: f64, x: f64) -> Complex64 {
    if x == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let (dist, excess) = excess_path(r, phi, x);
    Complex64::from_polar(r / dist, -wavenumber * excess)
}

/// Near-field array response of a source at `(r, φ)` over the given antennas.
///
/// Entry for antenna `m` is `(r / r_m) · e^{-j(2π/λ)(r_m - r)}`, so antenna 1
/// always contributes exactly `1`.
pub fn steering_vector(
    cfg: &WaveguideConfig,
    r: f64,
    phi: f64,
    indices: &[usize],
) -> Result<Vec<Complex64>> {
    if indices.is_empty() {
        return Err(invalid("steering vector needs at least one antenna"));
    }
    if !(r > 0.0) {
        return Err(invalid(format!("source distance {r} m must be positive")));
    }
    let k = cfg.wavenumber();
    indices
        .iter()
        .map(|&m| {
            cfg.check_index(m)?;
            Ok(steering_entry(k, r, phi, cfg.position_unchecked(m)))
        })
        .collect()
}

/// Full-length steering vector over every candidate position.
pub(crate) fn full_steering(cfg: &WaveguideConfig, r: f64, phi: f64) -> Vec<Complex64> {
    let k = cfg.wavenumber();
    cfg.candidate_positions()
        .into_iter()
        .map(|x| steering_entry(k, r, phi, x))
        .collect()
}

/// Polar coordinates relative to the feed point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Polar {
    pub distance_m: f64,
    pub angle_rad: f64,
}

impl Polar {
    pub fn new(distance_m: f64, angle_rad: f64) -> Self {
        Self {
            distance_m,
            angle_rad,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scatterer {
    pub position: Polar,
    /// Radar cross section in m².
    pub rcs_m2: f64,
}

/// User location plus the scatterers that create the NLoS paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub user: Polar,
    pub scatterers: Vec<Scatterer>,
}

impl Scene {
    pub fn new(user: Polar, scatterers: Vec<Scatterer>) -> Result<Self> {
        let scene = Self { user, scatterers };
        scene.validate()?;
        Ok(scene)
    }

    pub fn line_of_sight(user: Polar) -> Result<Self> {
        Self::new(user, Vec::new())
    }

    pub fn validate(&self) -> Result<()> {
        let check = |p: &Polar, what: &str| -> Result<()> {
            if !(p.distance_m > 0.0 && p.distance_m.is_finite()) {
                return Err(invalid(format!("{what} distance {} must be positive", p.distance_m)));
            }
            if !(p.angle_rad.abs() <= 0.5 * PI) {
                return Err(invalid(format!(
                    "{what} angle {} outside [-pi/2, pi/2]",
                    p.angle_rad
                )));
            }
            Ok(())
        };
        check(&self.user, "user")?;
        for s in &self.scatterers {
            check(&s.position, "scatterer")?;
            if !(s.rcs_m2 > 0.0 && s.rcs_m2.is_finite()) {
                return Err(invalid(format!("RCS {} must be positive", s.rcs_m2)));
            }
        }
        Ok(())
    }

    /// Number of scattered paths `P`.
    pub fn scatterer_count(&self) -> usize {
        self.scatterers.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathKind {
    LineOfSight,
    Scattered,
}

/// One propagation path seen from the waveguide.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Path {
    pub kind: PathKind,
    pub distance_m: f64,
    pub angle_rad: f64,
    /// Scatterer-to-user leg; `None` for the LoS path.
    pub scatterer_user_m: Option<f64>,
    pub gain: Complex64,
}

/// Paths of a scene in canonical order: LoS first, then scatterers.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    pub paths: Vec<Path>,
}

impl PathSet {
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Path> {
        self.paths.iter()
    }

    /// `h = Σ_p β_p a(r_p, φ_p)` over every candidate position.
    pub fn channel(&self, cfg: &WaveguideConfig) -> ChannelVector {
        let mut h = vec![Complex64::new(0.0, 0.0); cfg.antenna_count()];
        for path in &self.paths {
            for (hm, a) in h
                .iter_mut()
                .zip(full_steering(cfg, path.distance_m, path.angle_rad))
            {
                *hm += path.gain * a;
            }
        }
        ChannelVector(h)
    }
}

/// Complex path gains of every path in the scene.
pub fn path_gains(cfg: &WaveguideConfig, scene: &Scene) -> PathSet {
    let lambda = cfg.wavelength();
    let k = cfg.wavenumber();
    let r0 = scene.user.distance_m;
    let phi0 = scene.user.angle_rad;

    let mut paths = Vec::with_capacity(scene.scatterer_count() + 1);
    paths.push(Path {
        kind: PathKind::LineOfSight,
        distance_m: r0,
        angle_rad: phi0,
        scatterer_user_m: None,
        gain: Complex64::from_polar(lambda / (4.0 * PI * r0), -k * r0),
    });

    let scale = lambda / (4.0 * PI).powf(1.5);
    for s in &scene.scatterers {
        let rp = s.position.distance_m;
        let phip = s.position.angle_rad;
        let ru = scatterer_user_distance(r0, phi0, rp, phip);
        paths.push(Path {
            kind: PathKind::Scattered,
            distance_m: rp,
            angle_rad: phip,
            scatterer_user_m: Some(ru),
            gain: Complex64::from_polar(scale * s.rcs_m2 / (rp * ru), -k * (rp + ru)),
        });
    }
    PathSet { paths }
}

/// Channel between every candidate position and the user, evaluated
/// term by term from the free-space multipath expression.
pub fn synthesize_channel(cfg: &WaveguideConfig, scene: &Scene) -> ChannelVector {
    let lambda = cfg.wavelength();
    let k = cfg.wavenumber();
    let r0 = scene.user.distance_m;
    let phi0 = scene.user.angle_rad;
    let scale = lambda / (4.0 * PI).powf(1.5);
    let legs: Vec<(f64, f64, f64, f64)> = scene
        .scatterers
        .iter()
        .map(|s| {
            let (rp, phip) = (s.position.distance_m, s.position.angle_rad);
            (rp, phip, s.rcs_m2, scatterer_user_distance(r0, phi0, rp, phip))
        })
        .collect();

    let h = cfg
        .candidate_positions()
        .into_iter()
        .map(|x| {
            // e^{-jk r_m} is evaluated as e^{-jk r}·e^{-jk(r_m - r)}; a single
            // argument of order k·r would lose ~k·r·ε of phase
            let (r0m, d0) = excess_path(r0, phi0, x);
            let mut hm = Complex64::from_polar(lambda / (4.0 * PI * r0m), -k * d0) * Complex64::cis(-k * r0);
            for &(rp, phip, alpha, ru) in &legs {
                let (rpm, dp) = excess_path(rp, phip, x);
                hm += Complex64::from_polar(scale * alpha / (rpm * ru), -k * dp) * Complex64::cis(-k * (rp + ru));
            }
            hm
        })
        .collect();
    ChannelVector(h)
}

/// Minimum number of half-wavelength spaced antennas whose aperture puts a
/// target at `r_max` inside the near field, `ceil(1 + sqrt(8 r_max / λ))`.
pub fn fresnel_critical_count(cfg: &WaveguideConfig, r_max: f64) -> usize {
    // values within 1e-9 of an integer are not bumped to the next one
    (1.0 + (8.0 * r_max / cfg.wavelength()).sqrt() - 1e-9).ceil() as usize
}

/// Channel (or channel estimate) over the candidate positions.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ChannelVector(pub Vec<Complex64>);

impl ChannelVector {
    pub fn zeros(len: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); len])
    }

    /// Entry for antenna `m` (1-based).
    pub fn at(&self, m: usize) -> Option<Complex64> {
        m.checked_sub(1).and_then(|i| self.0.get(i)).copied()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }
}

impl Deref for ChannelVector {
    type Target = [Complex64];

    fn deref(&self) -> &[Complex64] {
        &self.0
    }
}

impl From<Vec<Complex64>> for ChannelVector {
    fn from(v: Vec<Complex64>) -> Self {
        Self(v)
    }
}
