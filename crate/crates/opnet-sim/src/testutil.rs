//! Shared builders for in-crate tests.

use crate::scenario::{
    BiasSpec, FieldSpec, NodeRole, NodeSpec, Point, Rect, RouterKind, RouterParams,
    ScenarioConfig, TrafficSpec,
};

pub fn static_spec(id: u32, role: NodeRole, x: f64, y: f64) -> NodeSpec {
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

pub fn helper_spec(id: u32) -> NodeSpec {
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

pub fn satellite_spec(id: u32, region: Rect) -> NodeSpec {
    let mut spec = helper_spec(id);
    spec.role = NodeRole::Satellite;
    spec.bias = Some(BiasSpec {
        region,
        degree: 0.8,
        sigma: crate::mobility::bias_sigma_from_quantile(0.8, 0.725).unwrap(),
    });
    spec
}

/// A small valid scenario: two far-apart endpoints plus `helpers` mobile
/// nodes in a 1000 m field.
pub fn small_config(helpers: u32, router: RouterKind, seed: u64) -> ScenarioConfig {
    let mut nodes = vec![
        static_spec(0, NodeRole::StaticSource, 100.0, 900.0),
        static_spec(1, NodeRole::StaticDestination, 900.0, 100.0),
    ];
    for id in 2..2 + helpers {
        nodes.push(helper_spec(id));
    }
    ScenarioConfig {
        field: FieldSpec::new(1000.0),
        nodes,
        traffic: TrafficSpec {
            packet_size: 1024,
            generation_interval: 100.0,
            ttl: 2_000.0,
        },
        router,
        router_params: RouterParams::default(),
        sim_time: 1_000.0,
        time_step: 0.1,
        seed,
    }
}
