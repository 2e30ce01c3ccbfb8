//! Closed-form mobility estimators and the power-law fit used to validate
//! Monte Carlo output against them.
//!
//! All estimators are pure functions of scenario parameters. The encounter
//! probability integrates the random-waypoint spatial density exactly (the
//! integrand is a separable polynomial); the numerical Simpson rule lives in
//! test code only, as an independent oracle.

use crate::scenario::{FieldSpec, Point, Rect};
use thiserror::Error;

/// Expected leg length of a random-waypoint node in a unit square, as a
/// fraction of the side.
pub const RWP_MEAN_LEG_COEFF: f64 = 0.5214;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticsError {
    #[error("{name} must be > 0, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("encounter region around ({x}, {y}) does not intersect the field")]
    EmptyRegion { x: f64, y: f64 },
    #[error("cube-law fit needs at least 3 samples with positive area and count, got {0}")]
    InsufficientSamples(usize),
    #[error("cube-law fit needs distinct areas")]
    DegenerateSamples,
}

/// The square of side `2R` around a static node, clipped to the field: the
/// region within which a mobile node is in RF range under the square-region
/// approximation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncounterRegion {
    pub center: Point,
    pub half_width: f64,
    pub clipped: Rect,
}

impl EncounterRegion {
    pub fn new(center: Point, half_width: f64, field: &FieldSpec) -> Result<Self, AnalyticsError> {
        if !(half_width > 0.0) {
            return Err(AnalyticsError::NonPositive {
                name: "half_width",
                value: half_width,
            });
        }
        let clipped = Rect::new(
            (center.x - half_width).max(0.0),
            (center.y - half_width).max(0.0),
            (center.x + half_width).min(field.side),
            (center.y + half_width).min(field.side),
        );
        if !clipped.is_well_formed() {
            return Err(AnalyticsError::EmptyRegion {
                x: center.x,
                y: center.y,
            });
        }
        Ok(Self {
            center,
            half_width,
            clipped,
        })
    }
}

/// Antiderivative of `(x^2 - a^2/4)` along one axis, in centered coordinates.
fn axis_antiderivative(x: f64, side: f64) -> f64 {
    x * x * x / 3.0 - side * side * x / 4.0
}

/// Probability that a random-waypoint node is found inside the clipped
/// encounter region, i.e. the spatial density integrated in closed form.
pub fn encounter_probability(region: &EncounterRegion, field: &FieldSpec) -> f64 {
    let a = field.side;
    let half = a / 2.0;
    let ix = axis_antiderivative(region.clipped.x_max - half, a)
        - axis_antiderivative(region.clipped.x_min - half, a);
    let iy = axis_antiderivative(region.clipped.y_max - half, a)
        - axis_antiderivative(region.clipped.y_min - half, a);
    (36.0 / a.powi(6) * ix * iy).clamp(0.0, 1.0)
}

/// Expected transition (leg) length of a mobile node: `0.5214 a`.
pub fn expected_transition_length(field: &FieldSpec) -> f64 {
    RWP_MEAN_LEG_COEFF * field.side
}

/// Expected epoch time between two waypoints, pause excluded: `E[l] / v`.
pub fn expected_epoch_time(field: &FieldSpec, velocity: f64) -> Result<f64, AnalyticsError> {
    if !(velocity > 0.0) {
        return Err(AnalyticsError::NonPositive {
            name: "velocity",
            value: velocity,
        });
    }
    Ok(expected_transition_length(field) / velocity)
}

/// Expected contact duration between a mobile node and a static node:
/// `2R / v`, the diametral crossing bound.
pub fn expected_contact_duration(rf_range: f64, velocity: f64) -> Result<f64, AnalyticsError> {
    for (name, value) in [("rf_range", rf_range), ("velocity", velocity)] {
        if !(value > 0.0) {
            return Err(AnalyticsError::NonPositive { name, value });
        }
    }
    Ok(2.0 * rf_range / velocity)
}

/// Largest inter-contact time for which the source backlog accumulated over
/// the gap still fits in one contact's transfer budget: `2Rb / (lambda v)`.
pub fn max_intercontact_time(
    rf_range: f64,
    bit_rate: f64,
    lambda: f64,
    velocity: f64,
) -> Result<f64, AnalyticsError> {
    for (name, value) in [
        ("rf_range", rf_range),
        ("bit_rate", bit_rate),
        ("lambda", lambda),
        ("velocity", velocity),
    ] {
        if !(value > 0.0) {
            return Err(AnalyticsError::NonPositive { name, value });
        }
    }
    Ok(2.0 * rf_range * bit_rate / (lambda * velocity))
}

/// Result of a log-log least-squares fit of `count = c * area^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubeLawFit {
    pub c: f64,
    pub exponent: f64,
    /// RMS of the residuals in log space.
    pub residual: f64,
}

/// Least-squares line on `(log area, log count)`.
pub fn fit_cube_law(samples: &[(f64, f64)]) -> Result<CubeLawFit, AnalyticsError> {
    if samples.len() < 3 || samples.iter().any(|&(a, n)| a <= 0.0 || n <= 0.0) {
        return Err(AnalyticsError::InsufficientSamples(samples.len()));
    }
    let xs: Vec<f64> = samples.iter().map(|&(a, _)| a.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|&(_, n)| n.ln()).collect();
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let var_x: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
    if var_x < 1e-12 {
        return Err(AnalyticsError::DegenerateSamples);
    }
    let cov: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    let slope = cov / var_x;
    let intercept = mean_y - slope * mean_x;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - (intercept + slope * x)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(CubeLawFit {
        c: intercept.exp(),
        exponent: slope,
        residual,
    })
}
