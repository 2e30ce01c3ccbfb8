//! Scenario domain types, configuration invariants and validation.
//!
//! Every other module consumes these types. A [`ScenarioConfig`] that has
//! passed [`validate_scenario`] is immutable by convention and safe to share
//! across threads; the engine treats it as the complete description of one
//! simulation run.

use thiserror::Error;

/// A position in field coordinates. The origin is the lower-left corner of
/// the square field; valid positions satisfy `0 <= x, y <= side`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        self.distance_sq(other).sqrt()
    }

    pub fn distance_sq(self, other: Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }
}

/// Square simulation field `[0, side] x [0, side]`, side in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSpec {
    pub side: f64,
}

impl FieldSpec {
    pub fn new(side: f64) -> Self {
        Self { side }
    }

    /// Field area in square meters.
    pub fn area(&self) -> f64 {
        self.side * self.side
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= 0.0 && p.x <= self.side && p.y >= 0.0 && p.y <= self.side
    }
}

/// Axis-aligned rectangle in field coordinates (bias regions, clipped
/// integration windows).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Self {
        Self {
            x_min,
            y_min,
            x_max,
            y_max,
        }
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    /// Closed-boundary containment.
    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }

    pub fn is_well_formed(&self) -> bool {
        self.x_min < self.x_max && self.y_min < self.y_max
    }

    pub fn inside_field(&self, field: &FieldSpec) -> bool {
        self.x_min >= 0.0 && self.y_min >= 0.0 && self.x_max <= field.side && self.y_max <= field.side
    }

    /// Whether this rectangle covers the entire field.
    pub fn covers_field(&self, field: &FieldSpec) -> bool {
        self.x_min <= 0.0 && self.y_min <= 0.0 && self.x_max >= field.side && self.y_max >= field.side
    }
}

/// Waypoint bias for a satellite node: a region, the degree of bias `d`
/// (threshold on the normal selector variate) and the selector's standard
/// deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasSpec {
    pub region: Rect,
    pub degree: f64,
    pub sigma: f64,
}

impl BiasSpec {
    /// Semantic label only: `degree >= 0.5` denotes a positive bias.
    pub fn is_positive(&self) -> bool {
        self.degree >= 0.5
    }
}

/// What a node does in the scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeRole {
    StaticSource,
    StaticDestination,
    Helper,
    Satellite,
}

impl NodeRole {
    pub fn is_static(self) -> bool {
        matches!(self, NodeRole::StaticSource | NodeRole::StaticDestination)
    }

    pub fn is_mobile(self) -> bool {
        !self.is_static()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NodeRole::StaticSource => "static-source",
            NodeRole::StaticDestination => "static-destination",
            NodeRole::Helper => "helper",
            NodeRole::Satellite => "satellite",
        }
    }

    pub fn parse(s: &str) -> Option<NodeRole> {
        match s {
            "static-source" => Some(NodeRole::StaticSource),
            "static-destination" => Some(NodeRole::StaticDestination),
            "helper" => Some(NodeRole::Helper),
            "satellite" => Some(NodeRole::Satellite),
            _ => None,
        }
    }
}

/// One node of the scenario. Static roles carry a fixed position; mobile
/// roles carry velocity and pause bounds; only satellites carry a bias.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSpec {
    pub id: u32,
    pub role: NodeRole,
    /// Fixed position, static roles only.
    pub position: Option<Point>,
    /// RF range `R` in meters.
    pub rf_range: f64,
    /// Link bit rate `b` in bytes per second.
    pub bit_rate: f64,
    /// Constant movement velocity `v` in meters per second, mobile roles only.
    pub velocity: Option<f64>,
    pub pause_min: Option<f64>,
    pub pause_max: Option<f64>,
    /// Queue size `B` in bytes.
    pub buffer_capacity: u64,
    pub bias: Option<BiasSpec>,
}

/// Traffic generated by the two static endpoints (ping-pong application).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrafficSpec {
    pub packet_size: u64,
    /// One packet per interval per endpoint, seconds.
    pub generation_interval: f64,
    pub ttl: f64,
}

impl TrafficSpec {
    /// Source data rate `lambda` in bytes per second.
    pub fn lambda(&self) -> f64 {
        self.packet_size as f64 / self.generation_interval
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RouterKind {
    Epidemic,
    SprayAndWait,
    Prophet,
}

impl RouterKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RouterKind::Epidemic => "epidemic",
            RouterKind::SprayAndWait => "snw",
            RouterKind::Prophet => "prophet",
        }
    }

    pub fn parse(s: &str) -> Option<RouterKind> {
        match s {
            "epidemic" => Some(RouterKind::Epidemic),
            "snw" => Some(RouterKind::SprayAndWait),
            "prophet" => Some(RouterKind::Prophet),
            _ => None,
        }
    }
}

/// Router constants. All fields are always populated (defaults below); the
/// active router reads only its own.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RouterParams {
    pub snw_initial_copies: u32,
    pub prophet_p0: f64,
    pub prophet_beta: f64,
    pub prophet_alpha: f64,
}

impl Default for RouterParams {
    fn default() -> Self {
        Self {
            snw_initial_copies: 6,
            prophet_p0: 0.75,
            prophet_beta: 0.25,
            prophet_alpha: 0.98,
        }
    }
}

/// Full parameterization of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub field: FieldSpec,
    pub nodes: Vec<NodeSpec>,
    pub traffic: TrafficSpec,
    pub router: RouterKind,
    pub router_params: RouterParams,
    /// Total simulated time in seconds.
    pub sim_time: f64,
    /// Fixed step `dt` in seconds, `0 < dt <= 1`.
    pub time_step: f64,
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn source(&self) -> Option<&NodeSpec> {
        self.nodes.iter().find(|n| n.role == NodeRole::StaticSource)
    }

    pub fn destination(&self) -> Option<&NodeSpec> {
        self.nodes
            .iter()
            .find(|n| n.role == NodeRole::StaticDestination)
    }

    pub fn mobile_nodes(&self) -> impl Iterator<Item = &NodeSpec> {
        self.nodes.iter().filter(|n| n.role.is_mobile())
    }

    /// Whether any node carries a waypoint bias.
    pub fn is_biased(&self) -> bool {
        self.nodes.iter().any(|n| n.bias.is_some())
    }
}

/// Rescales a scenario to a new field side. Each coordinate keeps its
/// offset from the nearest field edge, so corner placements stay a fixed
/// number of meters into their corner while the field grows or shrinks.
pub fn rescale_to_side(cfg: &ScenarioConfig, new_side: f64) -> ScenarioConfig {
    let old = cfg.field.side;
    let map = |c: f64| {
        if c <= old / 2.0 {
            c
        } else {
            new_side - (old - c)
        }
    };
    let mut out = cfg.clone();
    out.field.side = new_side;
    for node in &mut out.nodes {
        if let Some(p) = &mut node.position {
            p.x = map(p.x);
            p.y = map(p.y);
        }
        if let Some(bias) = &mut node.bias {
            bias.region.x_min = map(bias.region.x_min);
            bias.region.x_max = map(bias.region.x_max);
            bias.region.y_min = map(bias.region.y_min);
            bias.region.y_max = map(bias.region.y_max);
        }
    }
    out
}

/// Strips every waypoint bias: satellites become plain helpers.
pub fn unbias(cfg: &ScenarioConfig) -> ScenarioConfig {
    let mut out = cfg.clone();
    for node in &mut out.nodes {
        if node.role == NodeRole::Satellite {
            node.role = NodeRole::Helper;
            node.bias = None;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// Node or region outside the field.
    Geometry,
    /// Wrong role structure (zero or multiple sources, role/field mismatch).
    Roles,
    /// Non-positive or out-of-range quantity.
    Parameter,
}

impl ViolationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationKind::Geometry => "invalid-geometry",
            ViolationKind::Roles => "invalid-roles",
            ViolationKind::Parameter => "invalid-parameter",
        }
    }
}

/// One invariant violation, naming the offending field.
#[derive(Debug, Clone)]
pub struct Violation {
    pub kind: ViolationKind,
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} [{}]: {}", self.kind.as_str(), self.field, self.message)
    }
}

#[derive(Debug, Clone, Error)]
#[error("scenario validation failed:\n{}", .violations.iter().map(|v| format!("  {v}")).collect::<Vec<_>>().join("\n"))]
pub struct ValidationError {
    pub violations: Vec<Violation>,
}

/// Checks every type invariant and returns the config untouched on success,
/// otherwise the full list of violations.
pub fn validate_scenario(cfg: &ScenarioConfig) -> Result<(), ValidationError> {
    let mut v: Vec<Violation> = Vec::new();
    let mut push = |kind: ViolationKind, field: &str, message: String| {
        v.push(Violation {
            kind,
            field: field.to_string(),
            message,
        });
    };

    if !(cfg.field.side > 0.0) {
        push(
            ViolationKind::Parameter,
            "field.side",
            format!("side must be > 0, got {}", cfg.field.side),
        );
    }
    if !(cfg.traffic.packet_size > 0) {
        push(
            ViolationKind::Parameter,
            "traffic.packet_size",
            "packet size must be > 0".into(),
        );
    }
    if !(cfg.traffic.generation_interval > 0.0) {
        push(
            ViolationKind::Parameter,
            "traffic.generation_interval",
            format!("must be > 0, got {}", cfg.traffic.generation_interval),
        );
    }
    if !(cfg.traffic.ttl > 0.0) {
        push(
            ViolationKind::Parameter,
            "traffic.ttl",
            format!("must be > 0, got {}", cfg.traffic.ttl),
        );
    }
    if !(cfg.sim_time > 0.0) {
        push(
            ViolationKind::Parameter,
            "sim.sim_time",
            format!("must be > 0, got {}", cfg.sim_time),
        );
    }
    if !(cfg.time_step > 0.0 && cfg.time_step <= 1.0) {
        push(
            ViolationKind::Parameter,
            "sim.time_step",
            format!("must be in (0, 1], got {}", cfg.time_step),
        );
    }
    if cfg.router_params.snw_initial_copies < 1 {
        push(
            ViolationKind::Parameter,
            "router.snw_copies",
            "initial copy count must be >= 1".into(),
        );
    }
    for (name, value) in [
        ("router.prophet_p0", cfg.router_params.prophet_p0),
        ("router.prophet_beta", cfg.router_params.prophet_beta),
        ("router.prophet_alpha", cfg.router_params.prophet_alpha),
    ] {
        if !(value > 0.0 && value < 1.0) {
            push(
                ViolationKind::Parameter,
                name,
                format!("must be in (0, 1), got {value}"),
            );
        }
    }

    let sources = cfg
        .nodes
        .iter()
        .filter(|n| n.role == NodeRole::StaticSource)
        .count();
    let destinations = cfg
        .nodes
        .iter()
        .filter(|n| n.role == NodeRole::StaticDestination)
        .count();
    if sources != 1 {
        push(
            ViolationKind::Roles,
            "nodes",
            format!("exactly one static-source required, found {sources}"),
        );
    }
    if destinations != 1 {
        push(
            ViolationKind::Roles,
            "nodes",
            format!("exactly one static-destination required, found {destinations}"),
        );
    }

    let mut seen_ids = std::collections::HashSet::new();
    for (i, node) in cfg.nodes.iter().enumerate() {
        let field = |suffix: &str| format!("nodes[{i}].{suffix}");
        if !seen_ids.insert(node.id) {
            push(
                ViolationKind::Parameter,
                &field("id"),
                format!("duplicate node id {}", node.id),
            );
        }
        if !(node.rf_range > 0.0) {
            push(
                ViolationKind::Parameter,
                &field("rf_range"),
                format!("must be > 0, got {}", node.rf_range),
            );
        }
        if !(node.bit_rate > 0.0) {
            push(
                ViolationKind::Parameter,
                &field("bit_rate"),
                format!("must be > 0, got {}", node.bit_rate),
            );
        }
        if node.buffer_capacity == 0 {
            push(
                ViolationKind::Parameter,
                &field("buffer_capacity"),
                "must be > 0".into(),
            );
        }

        if node.role.is_static() {
            match node.position {
                None => push(
                    ViolationKind::Roles,
                    &field("position"),
                    "static node requires a fixed position".into(),
                ),
                Some(p) => {
                    if !cfg.field.contains(p) {
                        push(
                            ViolationKind::Geometry,
                            &field("position"),
                            format!("({}, {}) outside field of side {}", p.x, p.y, cfg.field.side),
                        );
                    }
                }
            }
            if node.velocity.is_some() || node.pause_min.is_some() || node.pause_max.is_some() {
                push(
                    ViolationKind::Roles,
                    &field("velocity"),
                    "static nodes take no velocity or pause bounds".into(),
                );
            }
            if node.bias.is_some() {
                push(
                    ViolationKind::Roles,
                    &field("bias_region"),
                    "static nodes take no bias".into(),
                );
            }
        } else {
            if node.position.is_some() {
                push(
                    ViolationKind::Roles,
                    &field("position"),
                    "mobile nodes take no fixed position".into(),
                );
            }
            match node.velocity {
                None => push(
                    ViolationKind::Roles,
                    &field("velocity"),
                    "mobile node requires a velocity".into(),
                ),
                Some(v) if !(v > 0.0) => push(
                    ViolationKind::Parameter,
                    &field("velocity"),
                    format!("must be > 0, got {v}"),
                ),
                _ => {}
            }
            match (node.pause_min, node.pause_max) {
                (Some(lo), Some(hi)) => {
                    if !(lo >= 0.0 && lo <= hi) {
                        push(
                            ViolationKind::Parameter,
                            &field("pause_min"),
                            format!("need 0 <= pause_min <= pause_max, got {lo}/{hi}"),
                        );
                    }
                }
                _ => push(
                    ViolationKind::Roles,
                    &field("pause_min"),
                    "mobile node requires pause_min and pause_max".into(),
                ),
            }
            match node.role {
                NodeRole::Helper => {
                    if node.bias.is_some() {
                        push(
                            ViolationKind::Roles,
                            &field("bias_region"),
                            "helper nodes take no bias".into(),
                        );
                    }
                }
                NodeRole::Satellite => match node.bias {
                    None => push(
                        ViolationKind::Roles,
                        &field("bias_region"),
                        "satellite node requires a bias".into(),
                    ),
                    Some(bias) => {
                        if !bias.region.is_well_formed() {
                            push(
                                ViolationKind::Geometry,
                                &field("bias_region"),
                                "region must satisfy x_min < x_max and y_min < y_max".into(),
                            );
                        } else if !bias.region.inside_field(&cfg.field) {
                            push(
                                ViolationKind::Geometry,
                                &field("bias_region"),
                                format!(
                                    "region ({}, {}, {}, {}) extends outside field of side {}",
                                    bias.region.x_min,
                                    bias.region.y_min,
                                    bias.region.x_max,
                                    bias.region.y_max,
                                    cfg.field.side
                                ),
                            );
                        }
                        if !(0.0..=1.0).contains(&bias.degree) {
                            push(
                                ViolationKind::Parameter,
                                &field("bias_degree"),
                                format!("must be in [0, 1], got {}", bias.degree),
                            );
                        }
                        if !(bias.sigma > 0.0) {
                            push(
                                ViolationKind::Parameter,
                                &field("bias_sigma"),
                                format!("must be > 0, got {}", bias.sigma),
                            );
                        }
                    }
                },
                _ => {}
            }
        }
    }

    if v.is_empty() {
        Ok(())
    } else {
        Err(ValidationError { violations: v })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn static_node(id: u32, role: NodeRole, x: f64, y: f64) -> NodeSpec {
        NodeSpec {
            id,
            role,
            position: Some(Point::new(x, y)),
            rf_range: 80.0,
            bit_rate: 250_000.0,
            velocity: None,
            pause_min: None,
            pause_max: None,
            buffer_capacity: 512 * 1024,
            bias: None,
        }
    }

    pub(crate) fn helper_node(id: u32) -> NodeSpec {
        NodeSpec {
            id,
            role: NodeRole::Helper,
            position: None,
            rf_range: 80.0,
            bit_rate: 250_000.0,
            velocity: Some(10.0),
            pause_min: Some(5.0),
            pause_max: Some(10.0),
            buffer_capacity: 512 * 1024,
            bias: None,
        }
    }

    pub(crate) fn reference_config() -> ScenarioConfig {
        let mut nodes = vec![
            static_node(0, NodeRole::StaticSource, 500.0, 4500.0),
            static_node(1, NodeRole::StaticDestination, 4500.0, 500.0),
        ];
        for id in 2..6 {
            let mut n = helper_node(id);
            n.role = NodeRole::Satellite;
            n.bias = Some(BiasSpec {
                region: Rect::new(0.0, 4000.0, 1000.0, 5000.0),
                degree: 0.8,
                sigma: 0.5018,
            });
            nodes.push(n);
        }
        for id in 6..10 {
            let mut n = helper_node(id);
            n.role = NodeRole::Satellite;
            n.bias = Some(BiasSpec {
                region: Rect::new(4000.0, 0.0, 5000.0, 1000.0),
                degree: 0.8,
                sigma: 0.5018,
            });
            nodes.push(n);
        }
        for id in 10..30 {
            nodes.push(helper_node(id));
        }
        ScenarioConfig {
            field: FieldSpec::new(5000.0),
            nodes,
            traffic: TrafficSpec {
                packet_size: 1024,
                generation_interval: 500.0,
                ttl: 12_000.0,
            },
            router: RouterKind::Epidemic,
            router_params: RouterParams::default(),
            sim_time: 30_000.0,
            time_step: 0.1,
            seed: 1,
        }
    }

    #[test]
    fn reference_scenario_is_accepted() {
        validate_scenario(&reference_config()).unwrap();
    }

    #[test]
    fn two_sources_rejected_as_invalid_roles() {
        let mut cfg = reference_config();
        cfg.nodes[1].role = NodeRole::StaticSource;
        let err = validate_scenario(&cfg).unwrap_err();
        assert!(err
            .violations
            .iter()
            .any(|v| v.kind == ViolationKind::Roles && v.field == "nodes"));
    }

    #[test]
    fn bias_region_outside_field_rejected_as_invalid_geometry() {
        let mut cfg = reference_config();
        let bias = cfg.nodes[2].bias.as_mut().unwrap();
        bias.region.x_max = 6000.0;
        let err = validate_scenario(&cfg).unwrap_err();
        assert!(err
            .violations
            .iter()
            .any(|v| v.kind == ViolationKind::Geometry && v.field.contains("bias_region")));
    }

    #[test]
    fn non_positive_quantities_rejected() {
        let mut cfg = reference_config();
        cfg.nodes[3].rf_range = 0.0;
        cfg.traffic.ttl = -1.0;
        cfg.time_step = 1.5;
        let err = validate_scenario(&cfg).unwrap_err();
        assert_eq!(err.violations.len(), 3);
        assert!(err
            .violations
            .iter()
            .all(|v| v.kind == ViolationKind::Parameter));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let mut cfg = reference_config();
        cfg.nodes[5].id = 2;
        assert!(validate_scenario(&cfg).is_err());
    }

    #[test]
    fn helper_with_bias_rejected() {
        let mut cfg = reference_config();
        cfg.nodes[10].bias = Some(BiasSpec {
            region: Rect::new(0.0, 0.0, 100.0, 100.0),
            degree: 0.8,
            sigma: 0.5,
        });
        let err = validate_scenario(&cfg).unwrap_err();
        assert!(err.violations.iter().any(|v| v.kind == ViolationKind::Roles));
    }

    #[test]
    fn static_node_outside_field_rejected() {
        let mut cfg = reference_config();
        cfg.nodes[0].position = Some(Point::new(-1.0, 100.0));
        let err = validate_scenario(&cfg).unwrap_err();
        assert!(err
            .violations
            .iter()
            .any(|v| v.kind == ViolationKind::Geometry));
    }

    #[test]
    fn rescale_keeps_corner_offsets() {
        let cfg = reference_config();
        let scaled = rescale_to_side(&cfg, 2000.0);
        let src = scaled.source().unwrap().position.unwrap();
        let dst = scaled.destination().unwrap().position.unwrap();
        assert_eq!((src.x, src.y), (500.0, 1500.0));
        assert_eq!((dst.x, dst.y), (1500.0, 500.0));
        let bias = scaled.nodes[2].bias.unwrap();
        assert_eq!(
            (
                bias.region.x_min,
                bias.region.y_min,
                bias.region.x_max,
                bias.region.y_max
            ),
            (0.0, 1000.0, 1000.0, 2000.0)
        );
        validate_scenario(&scaled).unwrap();
    }

    #[test]
    fn unbias_turns_satellites_into_helpers() {
        let cfg = reference_config();
        assert!(cfg.is_biased());
        let plain = unbias(&cfg);
        assert!(!plain.is_biased());
        assert_eq!(
            plain
                .nodes
                .iter()
                .filter(|n| n.role == NodeRole::Helper)
                .count(),
            28
        );
        validate_scenario(&plain).unwrap();
    }
}
