//! Sweep execution: expands a base scenario along one or more axes
//! (area side, mobility variant, router), runs every point across the
//! requested replications and assembles rows in deterministic axis order.

use crate::report::ReportRow;
use anyhow::{anyhow, bail, Result};
use opnet_sim::engine::{self, count_encounters};
use opnet_sim::scenario::{rescale_to_side, unbias, RouterKind, ScenarioConfig};
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MobilityVariant {
    Biased,
    Unbiased,
}

impl MobilityVariant {
    fn as_str(self) -> &'static str {
        match self {
            MobilityVariant::Biased => "biased",
            MobilityVariant::Unbiased => "unbiased",
        }
    }
}

#[derive(Debug, Clone)]
pub enum Axis {
    AreaSide(Vec<f64>),
    Mobility(Vec<MobilityVariant>),
    Router(Vec<RouterKind>),
}

/// Parses `name=v1,v2,...` axis specs: `area_side`, `mobility`, `router`.
pub fn parse_axis(spec: &str) -> Result<Axis> {
    let (name, values) = spec
        .split_once('=')
        .ok_or_else(|| anyhow!("axis must look like name=v1,v2,... got `{spec}`"))?;
    let values: Vec<&str> = values.split(',').map(str::trim).collect();
    if values.is_empty() || values.iter().any(|v| v.is_empty()) {
        bail!("axis `{name}` needs at least one non-empty value");
    }
    let axis = match name.trim() {
        "area_side" => {
            let sides = values
                .iter()
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|_| anyhow!("area_side value `{v}` is not a number"))
                })
                .collect::<Result<Vec<f64>>>()?;
            Axis::AreaSide(sides)
        }
        "mobility" => Axis::Mobility(
            values
                .iter()
                .map(|v| match *v {
                    "biased" => Ok(MobilityVariant::Biased),
                    "unbiased" => Ok(MobilityVariant::Unbiased),
                    other => bail!("mobility value must be biased|unbiased, got `{other}`"),
                })
                .collect::<Result<Vec<_>>>()?,
        ),
        "router" => Axis::Router(
            values
                .iter()
                .map(|v| {
                    RouterKind::parse(v)
                        .ok_or_else(|| anyhow!("router value must be epidemic|snw|prophet, got `{v}`"))
                })
                .collect::<Result<Vec<_>>>()?,
        ),
        other => bail!("unknown axis `{other}` (expected area_side, mobility or router)"),
    };
    let distinct = match &axis {
        Axis::AreaSide(v) => v.len() == {
            let mut s = v.clone();
            s.sort_by(f64::total_cmp);
            s.dedup();
            s.len()
        },
        Axis::Mobility(v) => {
            let mut s: Vec<&str> = v.iter().map(|m| m.as_str()).collect();
            s.sort_unstable();
            s.dedup();
            s.len() == v.len()
        }
        Axis::Router(v) => {
            let mut s = v.clone();
            s.sort_by_key(|r| r.as_str());
            s.dedup();
            s.len() == v.len()
        }
    };
    if !distinct {
        bail!("axis values must be distinct");
    }
    Ok(axis)
}

/// A sweep: base scenario, axes to cross, replication count. Replication
/// `k` runs with `seed = base seed + k`.
pub struct SweepSpec {
    pub base: ScenarioConfig,
    pub base_name: String,
    pub axes: Vec<Axis>,
    pub replications: u64,
}

struct SweepPoint {
    cfg: ScenarioConfig,
    scenario: String,
    mobility_label: &'static str,
}

fn expand(spec: &SweepSpec) -> Vec<SweepPoint> {
    let base_label = if spec.base.is_biased() {
        "biased"
    } else {
        "unbiased"
    };
    let mut points = vec![SweepPoint {
        cfg: spec.base.clone(),
        scenario: spec.base_name.clone(),
        mobility_label: base_label,
    }];
    for axis in &spec.axes {
        let mut next = Vec::new();
        for point in &points {
            match axis {
                Axis::AreaSide(sides) => {
                    for &side in sides {
                        next.push(SweepPoint {
                            cfg: rescale_to_side(&point.cfg, side),
                            scenario: point.scenario.clone(),
                            mobility_label: point.mobility_label,
                        });
                    }
                }
                Axis::Mobility(variants) => {
                    for &variant in variants {
                        let cfg = match variant {
                            MobilityVariant::Biased => point.cfg.clone(),
                            MobilityVariant::Unbiased => unbias(&point.cfg),
                        };
                        next.push(SweepPoint {
                            cfg,
                            scenario: point.scenario.clone(),
                            mobility_label: variant.as_str(),
                        });
                    }
                }
                Axis::Router(routers) => {
                    for &router in routers {
                        let mut cfg = point.cfg.clone();
                        cfg.router = router;
                        next.push(SweepPoint {
                            cfg,
                            scenario: point.scenario.clone(),
                            mobility_label: point.mobility_label,
                        });
                    }
                }
            }
        }
        points = next;
    }
    // Replications innermost.
    let mut with_reps = Vec::with_capacity(points.len() * spec.replications as usize);
    for point in points {
        for rep in 0..spec.replications {
            let mut cfg = point.cfg.clone();
            cfg.seed = spec.base.seed + rep;
            with_reps.push(SweepPoint {
                cfg,
                scenario: point.scenario.clone(),
                mobility_label: point.mobility_label,
            });
        }
    }
    with_reps
}

/// Runs one scenario into a report row; a failed point yields a row with
/// `NA` in every result column.
pub fn run_point(cfg: &ScenarioConfig, scenario: &str, mobility_label: &str) -> ReportRow {
    let mut row = ReportRow {
        scenario: scenario.replace(',', "_"),
        seed: cfg.seed,
        router: cfg.router.as_str().to_string(),
        mobility: mobility_label.to_string(),
        area_side: cfg.field.side,
        created: None,
        delivered: None,
        relayed: None,
        dropped_ttl: None,
        dropped_buffer: None,
        delivery_probability: None,
        overhead_ratio: None,
        avg_latency_s: None,
        encounters_src: None,
        encounters_dst: None,
    };
    let Ok((report, log)) = engine::run(cfg) else {
        return row;
    };
    let src_id = cfg.source().expect("validated by engine").id;
    let dst_id = cfg.destination().expect("validated by engine").id;
    let (enc_src, enc_dst) = count_encounters(&log, src_id, dst_id);
    row.created = Some(report.created);
    row.delivered = Some(report.delivered);
    row.relayed = Some(report.relayed);
    row.dropped_ttl = Some(report.dropped_ttl);
    row.dropped_buffer = Some(report.dropped_buffer);
    row.delivery_probability = Some(report.delivery_probability);
    row.overhead_ratio = report.overhead_ratio;
    row.avg_latency_s = report.average_latency;
    row.encounters_src = Some(enc_src);
    row.encounters_dst = Some(enc_dst);
    row
}

/// Runs every sweep point, in parallel, and returns rows in deterministic
/// axis-then-replication order regardless of worker count.
pub fn run_sweep(spec: &SweepSpec) -> Vec<ReportRow> {
    let points = expand(spec);
    points
        .par_iter()
        .map(|p| run_point(&p.cfg, &p.scenario, p.mobility_label))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_parsing() {
        assert!(matches!(
            parse_axis("area_side=1000,1500").unwrap(),
            Axis::AreaSide(v) if v == vec![1000.0, 1500.0]
        ));
        assert!(matches!(
            parse_axis("mobility=biased,unbiased").unwrap(),
            Axis::Mobility(v) if v.len() == 2
        ));
        assert!(matches!(
            parse_axis("router=epidemic,snw,prophet").unwrap(),
            Axis::Router(v) if v.len() == 3
        ));
        assert!(parse_axis("router=epidemic,epidemic").is_err());
        assert!(parse_axis("area_side=").is_err());
        assert!(parse_axis("nonsense=1").is_err());
    }

    #[test]
    fn expansion_order_is_axes_then_replications() {
        let text = std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/../../scenarios/smoke.cfg"
        ))
        .unwrap();
        let base = opnet_sim::config::parse_scenario(&text).unwrap();
        let spec = SweepSpec {
            base_name: "smoke".into(),
            axes: vec![
                parse_axis("router=epidemic,snw").unwrap(),
                parse_axis("mobility=unbiased").unwrap(),
            ],
            replications: 2,
            base: base.clone(),
        };
        let points = expand(&spec);
        assert_eq!(points.len(), 4);
        assert_eq!(points[0].cfg.router, RouterKind::Epidemic);
        assert_eq!(points[0].cfg.seed, base.seed);
        assert_eq!(points[1].cfg.seed, base.seed + 1);
        assert_eq!(points[2].cfg.router, RouterKind::SprayAndWait);
        assert_eq!(points[3].cfg.router, RouterKind::SprayAndWait);
    }
}
