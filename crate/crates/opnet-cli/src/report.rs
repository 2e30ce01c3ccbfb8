//! CSV report rows with a stable schema.
//!
//! Undefined values render as `NA`; numbers render at full precision
//! (shortest round-trip form), so `parse_report(emit_report(rows)) == rows`.

use std::fmt::Write as _;

pub const CSV_HEADER: &str = "scenario,seed,router,mobility,area_side,created,delivered,relayed,\
dropped_ttl,dropped_buffer,delivery_probability,overhead_ratio,avg_latency_s,\
encounters_src,encounters_dst";

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub scenario: String,
    pub seed: u64,
    pub router: String,
    pub mobility: String,
    pub area_side: f64,
    pub created: Option<u64>,
    pub delivered: Option<u64>,
    pub relayed: Option<u64>,
    pub dropped_ttl: Option<u64>,
    pub dropped_buffer: Option<u64>,
    pub delivery_probability: Option<f64>,
    pub overhead_ratio: Option<f64>,
    pub avg_latency_s: Option<f64>,
    pub encounters_src: Option<u64>,
    pub encounters_dst: Option<u64>,
}

fn opt_u64(v: Option<u64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "NA".into())
}

fn opt_f64(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "NA".into())
}

/// Renders the header plus one line per row. The header is present even for
/// zero rows.
pub fn emit_report(rows: &[ReportRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.scenario,
            r.seed,
            r.router,
            r.mobility,
            r.area_side,
            opt_u64(r.created),
            opt_u64(r.delivered),
            opt_u64(r.relayed),
            opt_u64(r.dropped_ttl),
            opt_u64(r.dropped_buffer),
            opt_f64(r.delivery_probability),
            opt_f64(r.overhead_ratio),
            opt_f64(r.avg_latency_s),
            opt_u64(r.encounters_src),
            opt_u64(r.encounters_dst),
        )
        .expect("writing to a String");
    }
    out
}

fn parse_opt_u64(s: &str) -> Result<Option<u64>, String> {
    if s == "NA" {
        return Ok(None);
    }
    s.parse::<u64>()
        .map(Some)
        .map_err(|_| format!("invalid integer `{s}`"))
}

fn parse_opt_f64(s: &str) -> Result<Option<f64>, String> {
    if s == "NA" {
        return Ok(None);
    }
    s.parse::<f64>()
        .map(Some)
        .map_err(|_| format!("invalid number `{s}`"))
}

/// Parses text produced by [`emit_report`].
pub fn parse_report(text: &str) -> Result<Vec<ReportRow>, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        Some(h) => return Err(format!("unexpected header `{h}`")),
        None => return Err("empty report".into()),
    }
    let mut rows = Vec::new();
    for (idx, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 15 {
            return Err(format!("row {}: expected 15 fields, got {}", idx + 2, fields.len()));
        }
        let err = |e: String| format!("row {}: {e}", idx + 2);
        rows.push(ReportRow {
            scenario: fields[0].to_string(),
            seed: fields[1].parse().map_err(|_| err("bad seed".into()))?,
            router: fields[2].to_string(),
            mobility: fields[3].to_string(),
            area_side: fields[4].parse().map_err(|_| err("bad area_side".into()))?,
            created: parse_opt_u64(fields[5]).map_err(err)?,
            delivered: parse_opt_u64(fields[6]).map_err(err)?,
            relayed: parse_opt_u64(fields[7]).map_err(err)?,
            dropped_ttl: parse_opt_u64(fields[8]).map_err(err)?,
            dropped_buffer: parse_opt_u64(fields[9]).map_err(err)?,
            delivery_probability: parse_opt_f64(fields[10]).map_err(err)?,
            overhead_ratio: parse_opt_f64(fields[11]).map_err(err)?,
            avg_latency_s: parse_opt_f64(fields[12]).map_err(err)?,
            encounters_src: parse_opt_u64(fields[13]).map_err(err)?,
            encounters_dst: parse_opt_u64(fields[14]).map_err(err)?,
        });
    }
    Ok(rows)
}
