use std::f64::consts::LN_2;

use crate::marginal::MarginalDistribution;
use crate::sum::compensated_sum;
use crate::table::CouplingTable;

/// `-p ln p`, with the `0 ln 0 = 0` convention taken explicitly.
#[inline]
pub(crate) fn neg_xlogx(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.ln()
    } else {
        0.0
    }
}

/// Shannon entropy of a raw probability slice, in nats.
pub fn entropy_of(probs: &[f64]) -> f64 {
    compensated_sum(probs.iter().map(|&p| neg_xlogx(p)))
}

/// Shannon entropy of a marginal, in nats.
pub fn entropy(d: &MarginalDistribution) -> f64 {
    entropy_of(d.probs())
}

/// Joint entropy `H(X,Y)` of a table, in nats.
pub fn joint_entropy(t: &CouplingTable) -> f64 {
    entropy_of(t.cells())
}

pub fn nats_to_bits(nats: f64) -> f64 {
    nats / LN_2
}

/// Marginal and joint entropies of a table plus the slack in
/// `max(H(X), H(Y)) <= H(X,Y) <= H(X) + H(Y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyReport {
    pub h_x: f64,
    pub h_y: f64,
    pub h_xy: f64,
    pub mutual_information: f64,
    /// `h_x + h_y - h_xy`; nonnegative up to rounding.
    pub upper_bound_slack: f64,
    /// `h_xy - max(h_x, h_y)`; nonnegative up to rounding.
    pub lower_bound_slack: f64,
}

impl EntropyReport {
    pub fn from_entropies(h_x: f64, h_y: f64, h_xy: f64) -> Self {
        let mutual_information = h_x + h_y - h_xy;
        Self {
            h_x,
            h_y,
            h_xy,
            mutual_information,
            upper_bound_slack: mutual_information,
            lower_bound_slack: h_xy - h_x.max(h_y),
        }
    }

    pub fn bounds_hold(&self, tol: f64) -> bool {
        self.upper_bound_slack >= -tol && self.lower_bound_slack >= -tol
    }
}

pub fn entropy_report(t: &CouplingTable) -> EntropyReport {
    EntropyReport::from_entropies(
        entropy(t.row_marginal()),
        entropy(t.col_marginal()),
        joint_entropy(t),
    )
}
