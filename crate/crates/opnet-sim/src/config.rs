//! Scenario config file format.
//!
//! Line-oriented UTF-8 text: `[section]` headers with `key = value` pairs.
//! Sections are `[field]`, `[traffic]`, `[router]`, `[sim]` and one `[node]`
//! block per node. Blank lines and `#` comments are ignored; unknown
//! sections or keys are errors. Parsing is purely syntactic; semantic
//! invariants are enforced by [`crate::scenario::validate_scenario`].

use crate::mobility::bias_sigma_from_quantile;
use crate::scenario::{
    BiasSpec, FieldSpec, NodeRole, NodeSpec, Point, Rect, RouterKind, RouterParams,
    ScenarioConfig, TrafficSpec,
};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing [{0}] section")]
    MissingSection(&'static str),
    #[error("missing key `{key}` in [{section}]")]
    MissingKey {
        section: &'static str,
        key: &'static str,
    },
}

fn syntax(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError::Syntax {
        line,
        message: message.into(),
    }
}

#[derive(Default)]
struct NodeDraft {
    line: usize,
    id: Option<u32>,
    role: Option<NodeRole>,
    position: Option<Point>,
    rf_range: Option<f64>,
    bit_rate: Option<f64>,
    velocity: Option<f64>,
    pause_min: Option<f64>,
    pause_max: Option<f64>,
    buffer_capacity: Option<u64>,
    bias_region: Option<Rect>,
    bias_degree: Option<f64>,
    bias_sigma: Option<f64>,
}

impl NodeDraft {
    fn finish(self) -> Result<NodeSpec, ConfigError> {
        let line = self.line;
        let id = self
            .id
            .ok_or_else(|| syntax(line, "node block missing `id`"))?;
        let role = self
            .role
            .ok_or_else(|| syntax(line, format!("node {id} missing `role`")))?;
        let bias = match (self.bias_region, self.bias_degree, self.bias_sigma) {
            (None, None, None) => None,
            (Some(region), Some(degree), sigma) => {
                let sigma = match sigma {
                    Some(s) => s,
                    None => bias_sigma_from_quantile(degree, 0.725).map_err(|_| {
                        syntax(
                            line,
                            format!(
                                "node {id}: bias_sigma required (degree {degree} has no \
                                 0.725-quantile calibration; only 0.5 < degree < 1 does)"
                            ),
                        )
                    })?,
                };
                Some(BiasSpec {
                    region,
                    degree,
                    sigma,
                })
            }
            _ => {
                return Err(syntax(
                    line,
                    format!("node {id}: bias_region and bias_degree must appear together"),
                ))
            }
        };
        Ok(NodeSpec {
            id,
            role,
            position: self.position,
            rf_range: self
                .rf_range
                .ok_or_else(|| syntax(line, format!("node {id} missing `rf_range`")))?,
            bit_rate: self
                .bit_rate
                .ok_or_else(|| syntax(line, format!("node {id} missing `bit_rate`")))?,
            velocity: self.velocity,
            pause_min: self.pause_min,
            pause_max: self.pause_max,
            buffer_capacity: self
                .buffer_capacity
                .ok_or_else(|| syntax(line, format!("node {id} missing `buffer_capacity`")))?,
            bias,
        })
    }
}

#[derive(PartialEq, Clone, Copy)]
enum Section {
    None,
    Field,
    Traffic,
    Router,
    Sim,
    Node,
}

/// Parses scenario text into a [`ScenarioConfig`]. Optional keys take their
/// documented defaults: `time_step = 0.1`, `seed = 0`, `snw_copies = 6`,
/// `prophet_p0/beta/alpha = 0.75/0.25/0.98`, and a satellite's `bias_sigma`
/// is calibrated from `bias_degree` at the 0.725 quantile when unset.
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let mut section = Section::None;
    let mut saw = [false; 4]; // field, traffic, router, sim

    let mut side: Option<f64> = None;
    let mut packet_size: Option<u64> = None;
    let mut generation_interval: Option<f64> = None;
    let mut ttl: Option<f64> = None;
    let mut router: Option<RouterKind> = None;
    let mut params = RouterParams::default();
    let mut sim_time: Option<f64> = None;
    let mut time_step: f64 = 0.1;
    let mut seed: u64 = 0;
    let mut nodes: Vec<NodeSpec> = Vec::new();
    let mut draft: Option<NodeDraft> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }

        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            if let Some(d) = draft.take() {
                nodes.push(d.finish()?);
            }
            section = match name {
                "field" => {
                    saw[0] = true;
                    Section::Field
                }
                "traffic" => {
                    saw[1] = true;
                    Section::Traffic
                }
                "router" => {
                    saw[2] = true;
                    Section::Router
                }
                "sim" => {
                    saw[3] = true;
                    Section::Sim
                }
                "node" => {
                    draft = Some(NodeDraft {
                        line: line_no,
                        ..Default::default()
                    });
                    Section::Node
                }
                other => return Err(syntax(line_no, format!("unknown section [{other}]"))),
            };
            continue;
        }

        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| syntax(line_no, format!("expected `key = value`, got `{line}`")))?;
        let key = key.trim();
        let value = value.trim();

        let f = |v: &str| -> Result<f64, ConfigError> {
            v.parse::<f64>()
                .map_err(|_| syntax(line_no, format!("`{key}`: invalid number `{v}`")))
        };
        let u = |v: &str| -> Result<u64, ConfigError> {
            v.parse::<u64>()
                .map_err(|_| syntax(line_no, format!("`{key}`: invalid integer `{v}`")))
        };
        let numbers = |v: &str, n: usize| -> Result<Vec<f64>, ConfigError> {
            let parts: Vec<&str> = v.split(',').map(str::trim).collect();
            if parts.len() != n {
                return Err(syntax(
                    line_no,
                    format!("`{key}`: expected {n} comma-separated numbers, got `{v}`"),
                ));
            }
            parts.iter().map(|p| f(p)).collect()
        };

        match section {
            Section::None => {
                return Err(syntax(line_no, format!("`{key}` outside any section")));
            }
            Section::Field => match key {
                "side" => side = Some(f(value)?),
                _ => return Err(syntax(line_no, format!("unknown key `{key}` in [field]"))),
            },
            Section::Traffic => match key {
                "packet_size" => packet_size = Some(u(value)?),
                "generation_interval" => generation_interval = Some(f(value)?),
                "ttl" => ttl = Some(f(value)?),
                _ => return Err(syntax(line_no, format!("unknown key `{key}` in [traffic]"))),
            },
            Section::Router => match key {
                "router" => {
                    router = Some(RouterKind::parse(value).ok_or_else(|| {
                        syntax(
                            line_no,
                            format!("`router` must be epidemic|snw|prophet, got `{value}`"),
                        )
                    })?)
                }
                "snw_copies" => {
                    params.snw_initial_copies = u(value)? as u32;
                }
                "prophet_p0" => params.prophet_p0 = f(value)?,
                "prophet_beta" => params.prophet_beta = f(value)?,
                "prophet_alpha" => params.prophet_alpha = f(value)?,
                _ => return Err(syntax(line_no, format!("unknown key `{key}` in [router]"))),
            },
            Section::Sim => match key {
                "sim_time" => sim_time = Some(f(value)?),
                "time_step" => time_step = f(value)?,
                "seed" => seed = u(value)?,
                _ => return Err(syntax(line_no, format!("unknown key `{key}` in [sim]"))),
            },
            Section::Node => {
                let d = draft.as_mut().expect("in a node section");
                match key {
                    "id" => d.id = Some(u(value)? as u32),
                    "role" => {
                        d.role = Some(NodeRole::parse(value).ok_or_else(|| {
                            syntax(line_no, format!("unknown role `{value}`"))
                        })?)
                    }
                    "position" => {
                        let v = numbers(value, 2)?;
                        d.position = Some(Point::new(v[0], v[1]));
                    }
                    "rf_range" => d.rf_range = Some(f(value)?),
                    "bit_rate" => d.bit_rate = Some(f(value)?),
                    "velocity" => d.velocity = Some(f(value)?),
                    "pause_min" => d.pause_min = Some(f(value)?),
                    "pause_max" => d.pause_max = Some(f(value)?),
                    "buffer_capacity" => d.buffer_capacity = Some(u(value)?),
                    "bias_region" => {
                        let v = numbers(value, 4)?;
                        d.bias_region = Some(Rect::new(v[0], v[1], v[2], v[3]));
                    }
                    "bias_degree" => d.bias_degree = Some(f(value)?),
                    "bias_sigma" => d.bias_sigma = Some(f(value)?),
                    _ => return Err(syntax(line_no, format!("unknown key `{key}` in [node]"))),
                }
            }
        }
    }
    if let Some(d) = draft.take() {
        nodes.push(d.finish()?);
    }

    for (&present, name) in saw.iter().zip(["field", "traffic", "router", "sim"]) {
        if !present {
            return Err(ConfigError::MissingSection(name));
        }
    }

    Ok(ScenarioConfig {
        field: FieldSpec::new(side.ok_or(ConfigError::MissingKey {
            section: "field",
            key: "side",
        })?),
        nodes,
        traffic: TrafficSpec {
            packet_size: packet_size.ok_or(ConfigError::MissingKey {
                section: "traffic",
                key: "packet_size",
            })?,
            generation_interval: generation_interval.ok_or(ConfigError::MissingKey {
                section: "traffic",
                key: "generation_interval",
            })?,
            ttl: ttl.ok_or(ConfigError::MissingKey {
                section: "traffic",
                key: "ttl",
            })?,
        },
        router: router.ok_or(ConfigError::MissingKey {
            section: "router",
            key: "router",
        })?,
        router_params: params,
        sim_time: sim_time.ok_or(ConfigError::MissingKey {
            section: "sim",
            key: "sim_time",
        })?,
        time_step,
        seed,
    })
}

/// Renders a config in the canonical section order; `parse_scenario` of the
/// result reproduces the input exactly.
pub fn emit_scenario(cfg: &ScenarioConfig) -> String {
    let mut out = String::new();
    let w = &mut out;
    writeln!(w, "[field]").unwrap();
    writeln!(w, "side = {}", cfg.field.side).unwrap();
    writeln!(w).unwrap();
    writeln!(w, "[traffic]").unwrap();
    writeln!(w, "packet_size = {}", cfg.traffic.packet_size).unwrap();
    writeln!(w, "generation_interval = {}", cfg.traffic.generation_interval).unwrap();
    writeln!(w, "ttl = {}", cfg.traffic.ttl).unwrap();
    writeln!(w).unwrap();
    writeln!(w, "[router]").unwrap();
    writeln!(w, "router = {}", cfg.router.as_str()).unwrap();
    writeln!(w, "snw_copies = {}", cfg.router_params.snw_initial_copies).unwrap();
    writeln!(w, "prophet_p0 = {}", cfg.router_params.prophet_p0).unwrap();
    writeln!(w, "prophet_beta = {}", cfg.router_params.prophet_beta).unwrap();
    writeln!(w, "prophet_alpha = {}", cfg.router_params.prophet_alpha).unwrap();
    writeln!(w).unwrap();
    writeln!(w, "[sim]").unwrap();
    writeln!(w, "sim_time = {}", cfg.sim_time).unwrap();
    writeln!(w, "time_step = {}", cfg.time_step).unwrap();
    writeln!(w, "seed = {}", cfg.seed).unwrap();
    for node in &cfg.nodes {
        writeln!(w).unwrap();
        writeln!(w, "[node]").unwrap();
        writeln!(w, "id = {}", node.id).unwrap();
        writeln!(w, "role = {}", node.role.as_str()).unwrap();
        if let Some(p) = node.position {
            writeln!(w, "position = {},{}", p.x, p.y).unwrap();
        }
        writeln!(w, "rf_range = {}", node.rf_range).unwrap();
        writeln!(w, "bit_rate = {}", node.bit_rate).unwrap();
        if let Some(v) = node.velocity {
            writeln!(w, "velocity = {v}").unwrap();
        }
        if let Some(v) = node.pause_min {
            writeln!(w, "pause_min = {v}").unwrap();
        }
        if let Some(v) = node.pause_max {
            writeln!(w, "pause_max = {v}").unwrap();
        }
        writeln!(w, "buffer_capacity = {}", node.buffer_capacity).unwrap();
        if let Some(b) = node.bias {
            writeln!(
                w,
                "bias_region = {},{},{},{}",
                b.region.x_min, b.region.y_min, b.region.x_max, b.region.y_max
            )
            .unwrap();
            writeln!(w, "bias_degree = {}", b.degree).unwrap();
            writeln!(w, "bias_sigma = {}", b.sigma).unwrap();
        }
    }
    out
}
