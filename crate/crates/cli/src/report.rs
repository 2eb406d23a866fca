//! JSON reports. Entropies are in nats rounded to 12 decimals; `bits`
//! repeats them in bits for reading only.

use entropy_wb::coupling::tail_error_bound;
use entropy_wb::{entropy_report, nats_to_bits, CouplingTable, GreedyTrace};
use serde::Serialize;

pub fn round12(v: f64) -> f64 {
    if v.is_finite() {
        let r = (v * 1e12).round() / 1e12;
        // Avoid "-0.0" in output.
        if r == 0.0 { 0.0 } else { r }
    } else {
        v
    }
}

#[derive(Debug, Serialize)]
pub struct Bits {
    pub h_x: f64,
    pub h_y: f64,
    pub h_xy: f64,
    pub mutual_information: f64,
}

#[derive(Debug, Serialize)]
pub struct TableReport {
    pub provenance: String,
    pub rows: usize,
    pub cols: usize,
    pub h_x: f64,
    pub h_y: f64,
    pub h_xy: f64,
    pub mutual_information: f64,
    pub upper_bound_slack: f64,
    pub lower_bound_slack: f64,
    pub tie_break_log: Vec<String>,
    pub tail_error_bound: f64,
    pub bits: Bits,
}

impl TableReport {
    pub fn new(t: &CouplingTable, trace: Option<&GreedyTrace>) -> Self {
        let r = entropy_report(t);
        let tail = t.row_marginal().tail_mass() + t.col_marginal().tail_mass();
        Self {
            provenance: t.provenance().to_string(),
            rows: t.rows(),
            cols: t.cols(),
            h_x: round12(r.h_x),
            h_y: round12(r.h_y),
            h_xy: round12(r.h_xy),
            mutual_information: round12(r.mutual_information),
            upper_bound_slack: round12(r.upper_bound_slack),
            lower_bound_slack: round12(r.lower_bound_slack),
            tie_break_log: trace.map(GreedyTrace::tie_log).unwrap_or_default(),
            tail_error_bound: round12(tail_error_bound(tail, t.rows() * t.cols())),
            bits: Bits {
                h_x: round12(nats_to_bits(r.h_x)),
                h_y: round12(nats_to_bits(r.h_y)),
                h_xy: round12(nats_to_bits(r.h_xy)),
                mutual_information: round12(nats_to_bits(r.mutual_information)),
            },
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}
