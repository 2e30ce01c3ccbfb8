//! Waypoint mobility: generic random-waypoint and affinity-biased waypoint
//! selection, piecewise-linear leg interpolation with pauses, and the
//! closed-form random-waypoint spatial density.
//!
//! Unbiased helpers pick waypoints uniformly over the field. Satellite nodes
//! draw a selector variate `r` from a normal with mean 0.5 (truncated to
//! `[0, 1]` by rejection) and pick the next waypoint inside their bias region
//! when `r <= degree`, otherwise uniformly over the exact geometric
//! complement of the region.

use crate::rng::RngStream;
use crate::scenario::{BiasSpec, FieldSpec, NodeSpec, Point, Rect};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MobilityError {
    #[error("point ({x}, {y}) lies outside the field of side {side}")]
    OutsideField { x: f64, y: f64, side: f64 },
    #[error("t={t} outside the current leg [{start}, {end}]")]
    OutsideLeg { t: f64, start: f64, end: f64 },
    #[error("mobility operation on static node {id}")]
    StaticNode { id: u32 },
    #[error("no sigma solves the quantile constraint (degree={degree}, target={target})")]
    NoSolution { degree: f64, target: f64 },
}

/// Per-node waypoint-interpolation state: one travel leg plus the pause at
/// its end. Invariant: `leg_start <= leg_arrival <= pause_until` and
/// `distance(origin, target) = velocity * (leg_arrival - leg_start)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobilityState {
    pub origin: Point,
    pub target: Point,
    pub leg_start: f64,
    pub leg_arrival: f64,
    pub pause_until: f64,
    pub velocity: f64,
}

/// Long-run random-waypoint spatial density at `p`, per square meter.
///
/// The density is `(36/a^6) (x'^2 - a^2/4)(y'^2 - a^2/4)` in coordinates
/// centered on the field; positions here use the `[0, a]^2` convention and
/// are translated by `-a/2` per axis before evaluation.
pub fn rwp_pdf(p: Point, field: &FieldSpec) -> Result<f64, MobilityError> {
    if !field.contains(p) {
        return Err(MobilityError::OutsideField {
            x: p.x,
            y: p.y,
            side: field.side,
        });
    }
    let a = field.side;
    let xc = p.x - a / 2.0;
    let yc = p.y - a / 2.0;
    let quarter = a * a / 4.0;
    Ok(36.0 / a.powi(6) * (xc * xc - quarter) * (yc * yc - quarter))
}

/// Next waypoint of an unbiased node: uniform over the field.
pub fn next_waypoint_rwp(rng: &mut RngStream, field: &FieldSpec) -> Point {
    Point::new(
        rng.uniform_in(0.0, field.side),
        rng.uniform_in(0.0, field.side),
    )
}

fn uniform_in_rect(rng: &mut RngStream, rect: &Rect) -> Point {
    Point::new(
        rng.uniform_in(rect.x_min, rect.x_max),
        rng.uniform_in(rect.y_min, rect.y_max),
    )
}

/// Solves for the selector standard deviation such that a
/// `Normal(0.5, sigma)` variate satisfies `P(r <= degree) = target_prob`.
///
/// Bisection on the normal CDF to an absolute tolerance of 1e-9. Only the
/// open ranges `0.5 < degree < 1` and `0.5 < target_prob < 1` admit a
/// solution.
pub fn bias_sigma_from_quantile(degree: f64, target_prob: f64) -> Result<f64, MobilityError> {
    if !(degree > 0.5 && degree < 1.0 && target_prob > 0.5 && target_prob < 1.0) {
        return Err(MobilityError::NoSolution {
            degree,
            target: target_prob,
        });
    }
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let f = |sigma: f64| std_normal.cdf((degree - 0.5) / sigma) - target_prob;

    // f is strictly decreasing in sigma: sigma -> 0 gives CDF -> 1,
    // sigma -> inf gives CDF -> 0.5.
    let mut lo = 1e-12;
    let mut hi = 1e6;
    if !(f(lo) > 0.0 && f(hi) < 0.0) {
        return Err(MobilityError::NoSolution {
            degree,
            target: target_prob,
        });
    }
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Probability that a truncated selector lands at or below the degree of
/// bias, i.e. the long-run fraction of waypoints a satellite places inside
/// its region: `P(r <= d | 0 <= r <= 1)` for `r ~ Normal(0.5, sigma)`.
pub fn region_visit_probability(bias: &BiasSpec) -> f64 {
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let z = |r: f64| (r - 0.5) / bias.sigma;
    let lo = std_normal.cdf(z(0.0));
    let hi = std_normal.cdf(z(1.0));
    let d = std_normal.cdf(z(bias.degree.clamp(0.0, 1.0)));
    (d - lo) / (hi - lo)
}

/// Next waypoint of a satellite node.
///
/// Draws the selector `r` from `Normal(0.5, sigma)` truncated to `[0, 1]` by
/// rejection (redraw, no clipping). `r <= degree` places the waypoint
/// uniformly in the bias region; otherwise it is drawn uniformly over the
/// field and rejected until it falls outside the region.
pub fn next_waypoint_biased(rng: &mut RngStream, field: &FieldSpec, bias: &BiasSpec) -> Point {
    let r = loop {
        let r = rng.normal(0.5, bias.sigma);
        if (0.0..=1.0).contains(&r) {
            break r;
        }
    };
    if r <= bias.degree {
        return uniform_in_rect(rng, &bias.region);
    }
    if bias.region.covers_field(field) {
        // The complement is empty; the region is the only place to go.
        return uniform_in_rect(rng, &bias.region);
    }
    loop {
        let p = next_waypoint_rwp(rng, field);
        if !bias.region.contains(p) {
            return p;
        }
    }
}

/// Position along a leg at time `t`: linear interpolation while traveling,
/// the target while paused.
pub fn position_at(state: &MobilityState, t: f64) -> Result<Point, MobilityError> {
    if t < state.leg_start || t > state.pause_until {
        return Err(MobilityError::OutsideLeg {
            t,
            start: state.leg_start,
            end: state.pause_until,
        });
    }
    if t >= state.leg_arrival {
        return Ok(state.target);
    }
    let frac = (t - state.leg_start) / (state.leg_arrival - state.leg_start);
    Ok(Point::new(
        state.origin.x + (state.target.x - state.origin.x) * frac,
        state.origin.y + (state.target.y - state.origin.y) * frac,
    ))
}

/// Starts the next leg at `now`: the old target becomes the origin, a fresh
/// waypoint is drawn (biased for satellites, uniform otherwise), and the
/// pause at arrival is uniform in `[pause_min, pause_max]`.
pub fn advance(
    state: &MobilityState,
    now: f64,
    spec: &NodeSpec,
    field: &FieldSpec,
    rng: &mut RngStream,
) -> Result<MobilityState, MobilityError> {
    let velocity = spec
        .velocity
        .ok_or(MobilityError::StaticNode { id: spec.id })?;
    debug_assert!(now >= state.pause_until);
    let origin = state.target;
    let target = match &spec.bias {
        Some(bias) => next_waypoint_biased(rng, field, bias),
        None => next_waypoint_rwp(rng, field),
    };
    let leg_arrival = now + origin.distance(target) / velocity;
    let pause = rng.uniform_in(
        spec.pause_min.unwrap_or(0.0),
        spec.pause_max.unwrap_or(0.0),
    );
    Ok(MobilityState {
        origin,
        target,
        leg_start: now,
        leg_arrival,
        pause_until: leg_arrival + pause,
        velocity,
    })
}

/// Initial state of a mobile node: parked on a drawn point with a
/// zero-length leg ending at `start_time`, so the first engine step
/// immediately starts a real leg.
pub fn initial_state(
    spec: &NodeSpec,
    field: &FieldSpec,
    rng: &mut RngStream,
    start_time: f64,
) -> Result<MobilityState, MobilityError> {
    let velocity = spec
        .velocity
        .ok_or(MobilityError::StaticNode { id: spec.id })?;
    let start = match &spec.bias {
        Some(bias) => next_waypoint_biased(rng, field, bias),
        None => next_waypoint_rwp(rng, field),
    };
    Ok(MobilityState {
        origin: start,
        target: start,
        leg_start: start_time,
        leg_arrival: start_time,
        pause_until: start_time,
        velocity,
    })
}
