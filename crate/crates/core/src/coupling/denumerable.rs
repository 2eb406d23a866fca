use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::marginal::{MarginalDistribution, DEFAULT_TOL};
use crate::sum::NeumaierSum;

/// Prefix length beyond which a law is declared non-summable.
pub const MAX_ATOMS: usize = 1_000_000;

/// A law on the positive integers, or an already finite one.
#[derive(Clone)]
pub enum DenumerableFamily {
    /// `P(r) = p (1 - p)^r` for `r = 0, 1, ...`.
    Geometric { p: f64 },
    /// Atom `r` has mass `f(r)`; masses must total one.
    Explicit(Arc<dyn Fn(usize) -> f64 + Send + Sync>),
    Finite(MarginalDistribution),
}

impl fmt::Debug for DenumerableFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Geometric { p } => f.debug_struct("Geometric").field("p", p).finish(),
            Self::Explicit(_) => f.write_str("Explicit(..)"),
            Self::Finite(d) => f.debug_tuple("Finite").field(d).finish(),
        }
    }
}

/// Shortest prefix whose discarded mass is at most `tail_tol`.
///
/// The discarded mass is kept as `tail_mass` on the result.
pub fn truncate_denumerable(family: &DenumerableFamily, tail_tol: f64) -> Result<MarginalDistribution> {
    if !(tail_tol.is_finite() && tail_tol > 0.0 && tail_tol < 1.0) {
        return Err(Error::OutOfRange { what: "tail_tol", value: tail_tol });
    }
    match family {
        DenumerableFamily::Finite(d) => Ok(d.clone()),
        DenumerableFamily::Geometric { p } => {
            let p = *p;
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::BadParams(format!("geometric parameter {p} not in (0, 1]")));
            }
            let q = 1.0 - p;
            let mut atoms = Vec::new();
            let mut survivor = 1.0;
            while survivor > tail_tol {
                if atoms.len() >= MAX_ATOMS {
                    return Err(Error::NonSummable { atoms: atoms.len(), reached: 1.0 - survivor });
                }
                atoms.push(p * survivor);
                survivor *= q;
            }
            MarginalDistribution::with_tail(atoms, survivor, DEFAULT_TOL)
        }
        DenumerableFamily::Explicit(f) => {
            let mut atoms = Vec::new();
            let mut acc = NeumaierSum::new();
            loop {
                let tail = 1.0 - acc.total();
                if tail <= tail_tol {
                    return MarginalDistribution::with_tail(atoms, tail.max(0.0), DEFAULT_TOL);
                }
                if atoms.len() >= MAX_ATOMS {
                    return Err(Error::NonSummable { atoms: atoms.len(), reached: acc.total() });
                }
                let v = f(atoms.len());
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::NegativeMass { index: atoms.len(), value: v });
                }
                atoms.push(v);
                acc.add(v);
            }
        }
    }
}

/// Bound on the entropy a truncated tail can still carry in a table of
/// `cells` cells: `tail |ln tail| + tail ln(cells)`.
pub fn tail_error_bound(tail_mass: f64, cells: usize) -> f64 {
    if tail_mass <= 0.0 {
        return 0.0;
    }
    tail_mass * tail_mass.ln().abs() + tail_mass * (cells.max(1) as f64).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_half_to_1e12() {
        let d = truncate_denumerable(&DenumerableFamily::Geometric { p: 0.5 }, 1e-12).unwrap();
        assert_eq!(d.len(), 40);
        assert!(d.tail_mass() <= 1e-12);
        assert_eq!(d.tail_mass(), 2f64.powi(-40));
    }

    #[test]
    fn geometric_half_coarse() {
        let d = truncate_denumerable(&DenumerableFamily::Geometric { p: 0.5 }, 0.25).unwrap();
        assert_eq!(d.probs(), &[0.5, 0.25]);
        assert_eq!(d.tail_mass(), 0.25);
    }

    #[test]
    fn finite_is_identity() {
        let x = MarginalDistribution::new(vec![0.2, 0.8]).unwrap();
        let d = truncate_denumerable(&DenumerableFamily::Finite(x.clone()), 1e-12).unwrap();
        assert_eq!(d, x);
        assert_eq!(d.tail_mass(), 0.0);
    }

    #[test]
    fn explicit_generator_matches_geometric() {
        let f = DenumerableFamily::Explicit(Arc::new(|r| 0.5f64.powi(r as i32 + 1)));
        let d = truncate_denumerable(&f, 1e-12).unwrap();
        assert_eq!(d.len(), 40);
    }

    #[test]
    fn non_summable_generator() {
        let f = DenumerableFamily::Explicit(Arc::new(|_| 0.0));
        assert!(matches!(truncate_denumerable(&f, 1e-3), Err(Error::NonSummable { .. })));
    }

    #[test]
    fn tail_bound_vanishes_with_tail() {
        assert_eq!(tail_error_bound(0.0, 10), 0.0);
        let b = tail_error_bound(1e-12, 100);
        assert!(b > 0.0 && b < 4e-11);
    }
}
