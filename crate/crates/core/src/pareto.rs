//! Dominance utilities and exact Pareto-frontier extraction.
//!
//! The filter is the plain O(n^2) pairwise check: inputs are evaluated or
//! surrogate-scored design points at desk scale, a few thousand at most.

use crate::error::{Error, Result};
use crate::space::{Direction, ParameterVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Evaluated,
    SurrogatePredicted,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::Evaluated => "evaluated",
            Provenance::SurrogatePredicted => "predicted",
        }
    }
}

impl std::str::FromStr for Provenance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Provenance> {
        match s {
            "evaluated" => Ok(Provenance::Evaluated),
            "predicted" => Ok(Provenance::SurrogatePredicted),
            other => Err(Error::Config(format!(
                "unknown provenance {other:?}; expected evaluated or predicted"
            ))),
        }
    }
}

/// A design point with its objective vector.
#[derive(Debug, Clone)]
pub struct ObjectivePoint {
    pub params: ParameterVector,
    pub values: Vec<f64>,
    pub provenance: Provenance,
}

/// True iff `a` is at least as good as `b` in every objective and strictly
/// better in at least one.
pub fn dominates(a: &ObjectivePoint, b: &ObjectivePoint, directions: &[Direction]) -> Result<bool> {
    if a.values.len() != b.values.len() || a.values.len() != directions.len() {
        return Err(Error::Argument(format!(
            "objective counts differ: {} vs {} with {} directions",
            a.values.len(),
            b.values.len(),
            directions.len()
        )));
    }
    let mut strictly_better = false;
    for ((&av, &bv), dir) in a.values.iter().zip(&b.values).zip(directions) {
        if dir.improves(bv, av) {
            return Ok(false); // b beats a somewhere
        }
        if dir.improves(av, bv) {
            strictly_better = true;
        }
    }
    Ok(strictly_better)
}

/// Exactly the non-dominated subset. Objective-space duplicates collapse to
/// the first occurrence by input order; the output is sorted by the first
/// objective (ties broken by the remaining objectives).
pub fn pareto_frontier(
    points: &[ObjectivePoint],
    directions: &[Direction],
) -> Result<Vec<ObjectivePoint>> {
    for p in points {
        if p.values.len() != directions.len() {
            return Err(Error::Argument(format!(
                "point has {} objectives, expected {}",
                p.values.len(),
                directions.len()
            )));
        }
        if p.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data(format!(
                "non-finite objective value at point {}",
                p.params
            )));
        }
    }

    // Collapse objective-space duplicates, keeping the first by input order.
    let mut unique: Vec<&ObjectivePoint> = Vec::with_capacity(points.len());
    let mut seen = std::collections::HashSet::new();
    for p in points {
        let key: Vec<u64> = p.values.iter().map(|v| v.to_bits()).collect();
        if seen.insert(key) {
            unique.push(p);
        }
    }

    let mut frontier: Vec<ObjectivePoint> = Vec::new();
    for candidate in &unique {
        let mut dominated = false;
        for other in &unique {
            if dominates(other, candidate, directions)? {
                dominated = true;
                break;
            }
        }
        if !dominated {
            frontier.push((*candidate).clone());
        }
    }

    frontier.sort_by(|a, b| {
        a.values
            .iter()
            .zip(&b.values)
            .find_map(|(x, y)| x.partial_cmp(y).filter(|o| o.is_ne()))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(frontier)
}
