//! Design-space schema: named parameters over finite ordered level grids,
//! plus the manifest file that declares them.

use std::fmt;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Optimization direction of an objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "max", alias = "maximize")]
    Maximize,
    #[serde(rename = "min", alias = "minimize")]
    Minimize,
}

impl Direction {
    /// True when `candidate` is strictly better than `incumbent` under this direction.
    pub fn improves(&self, candidate: f64, incumbent: f64) -> bool {
        match self {
            Direction::Maximize => candidate > incumbent,
            Direction::Minimize => candidate < incumbent,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Direction::Maximize => "max",
            Direction::Minimize => "min",
        }
    }
}

impl std::str::FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" | "maximize" => Ok(Direction::Maximize),
            "min" | "minimize" => Ok(Direction::Minimize),
            other => Err(Error::Config(format!(
                "unknown direction {other:?}, expected \"min\" or \"max\""
            ))),
        }
    }
}

/// One point in the design space: raw level values in parameter order.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterVector(Vec<f64>);

impl ParameterVector {
    pub fn new(values: Vec<f64>) -> Self {
        ParameterVector(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Canonical hashable key: the bit patterns of the raw values, with
    /// negative zero folded onto positive zero.
    pub fn key(&self) -> PointKey {
        PointKey(
            self.0
                .iter()
                .map(|&v| if v == 0.0 { 0.0f64.to_bits() } else { v.to_bits() })
                .collect(),
        )
    }
}

impl fmt::Display for ParameterVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Exact-match lookup key for a [`ParameterVector`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PointKey(Vec<u64>);

impl PointKey {
    pub fn bits(&self) -> &[u64] {
        &self.0
    }
}

/// A named design parameter with a finite, ascending level grid.
#[derive(Debug, Clone)]
pub struct Parameter {
    pub name: String,
    pub levels: Vec<f64>,
}

/// The discrete design space: an ordered list of parameters.
#[derive(Debug, Clone)]
pub struct DesignSpace {
    parameters: Vec<Parameter>,
}

impl DesignSpace {
    /// Builds a space, validating names and domains. Levels are sorted
    /// ascending; duplicate level values are rejected.
    pub fn new(parameters: Vec<Parameter>) -> Result<Self> {
        if parameters.is_empty() {
            return Err(Error::Config("design space has no parameters".into()));
        }
        let mut seen = std::collections::HashSet::new();
        let mut parameters = parameters;
        for p in &mut parameters {
            if !seen.insert(p.name.clone()) {
                return Err(Error::Config(format!(
                    "duplicate parameter name {:?}",
                    p.name
                )));
            }
            if p.levels.is_empty() {
                return Err(Error::Config(format!(
                    "parameter {:?} has an empty domain",
                    p.name
                )));
            }
            if p.levels.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config(format!(
                    "parameter {:?} has a non-finite level",
                    p.name
                )));
            }
            p.levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
            if p.levels.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Config(format!(
                    "parameter {:?} has a duplicate level",
                    p.name
                )));
            }
        }
        Ok(DesignSpace { parameters })
    }

    pub fn parameters(&self) -> &[Parameter] {
        &self.parameters
    }

    pub fn dimension(&self) -> usize {
        self.parameters.len()
    }

    pub fn parameter_names(&self) -> Vec<String> {
        self.parameters.iter().map(|p| p.name.clone()).collect()
    }

    /// Number of distinct points (product of domain sizes), saturating.
    pub fn cardinality(&self) -> u128 {
        self.parameters
            .iter()
            .map(|p| p.levels.len() as u128)
            .fold(1u128, |acc, n| acc.saturating_mul(n))
    }

    /// Per-dimension (min, max) over the raw levels.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        self.parameters
            .iter()
            .map(|p| (p.levels[0], *p.levels.last().unwrap()))
            .collect()
    }

    /// Min-max normalizes a raw point into the unit hypercube.
    /// A single-level dimension maps to 0.
    pub fn normalize(&self, x: &ParameterVector) -> Result<Vec<f64>> {
        if x.len() != self.dimension() {
            return Err(Error::Argument(format!(
                "point has dimension {}, space has {}",
                x.len(),
                self.dimension()
            )));
        }
        Ok(self
            .parameters
            .iter()
            .zip(x.values())
            .map(|(p, &v)| {
                let lo = p.levels[0];
                let hi = *p.levels.last().unwrap();
                if hi > lo {
                    (v - lo) / (hi - lo)
                } else {
                    0.0
                }
            })
            .collect())
    }

    /// True when every coordinate is exactly one of the declared levels.
    pub fn contains(&self, x: &ParameterVector) -> bool {
        x.len() == self.dimension()
            && self
                .parameters
                .iter()
                .zip(x.values())
                .all(|(p, v)| p.levels.iter().any(|l| l == v))
    }

    /// The point at the given per-parameter level indices.
    pub fn point(&self, indices: &[usize]) -> ParameterVector {
        assert_eq!(indices.len(), self.dimension());
        ParameterVector::new(
            self.parameters
                .iter()
                .zip(indices)
                .map(|(p, &i)| p.levels[i])
                .collect(),
        )
    }

    /// Uniform random point (independent uniform level per parameter).
    pub fn sample_point<R: Rng>(&self, rng: &mut R) -> ParameterVector {
        ParameterVector::new(
            self.parameters
                .iter()
                .map(|p| p.levels[rng.gen_range(0..p.levels.len())])
                .collect(),
        )
    }

    /// Enumerates every point in the space in mixed-radix order.
    /// Intended for desk-scale spaces; callers should check cardinality first.
    pub fn enumerate(&self) -> SpaceIter<'_> {
        SpaceIter {
            space: self,
            indices: vec![0; self.dimension()],
            done: false,
        }
    }
}

pub struct SpaceIter<'a> {
    space: &'a DesignSpace,
    indices: Vec<usize>,
    done: bool,
}

impl Iterator for SpaceIter<'_> {
    type Item = ParameterVector;

    fn next(&mut self) -> Option<ParameterVector> {
        if self.done {
            return None;
        }
        let point = self.space.point(&self.indices);
        // advance mixed-radix counter, last parameter fastest
        for d in (0..self.indices.len()).rev() {
            self.indices[d] += 1;
            if self.indices[d] < self.space.parameters[d].levels.len() {
                return Some(point);
            }
            self.indices[d] = 0;
        }
        self.done = true;
        Some(point)
    }
}

/// Samples `n` distinct points uniformly. Clamps to the space cardinality
/// with a warning when the space is smaller than the request.
pub(crate) fn sample_distinct_points<R: Rng>(
    space: &DesignSpace,
    n: usize,
    rng: &mut R,
) -> Vec<ParameterVector> {
    let cardinality = space.cardinality();
    if (n as u128) >= cardinality {
        if (n as u128) > cardinality {
            log::warn!(
                "requested {n} distinct points but the space has only {cardinality}; returning all of them"
            );
        }
        let mut all: Vec<ParameterVector> = space.enumerate().collect();
        shuffle(&mut all, rng);
        return all;
    }
    sample_filtered(space, n, &std::collections::HashSet::new(), rng)
}

/// Samples up to `n` distinct points not present in `excluded`. Returns
/// fewer (possibly zero) points when the space is nearly exhausted.
pub(crate) fn sample_unvisited_points<R: Rng>(
    space: &DesignSpace,
    n: usize,
    excluded: &std::collections::HashSet<PointKey>,
    rng: &mut R,
) -> Vec<ParameterVector> {
    let cardinality = space.cardinality();
    let remaining = cardinality.saturating_sub(excluded.len() as u128);
    if remaining == 0 {
        return Vec::new();
    }
    // Small spaces, or requests close to what is left: enumerate instead of
    // rejection-sampling.
    if remaining <= n as u128 || cardinality <= (n as u128).saturating_mul(4).max(4096) {
        let mut rest: Vec<ParameterVector> = space
            .enumerate()
            .filter(|p| !excluded.contains(&p.key()))
            .collect();
        shuffle(&mut rest, rng);
        rest.truncate(n);
        return rest;
    }
    sample_filtered(space, n, excluded, rng)
}

fn sample_filtered<R: Rng>(
    space: &DesignSpace,
    n: usize,
    excluded: &std::collections::HashSet<PointKey>,
    rng: &mut R,
) -> Vec<ParameterVector> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::with_capacity(n);
    let mut misses = 0usize;
    while out.len() < n {
        let p = space.sample_point(rng);
        let key = p.key();
        if excluded.contains(&key) || !seen.insert(key) {
            misses += 1;
            // Dense request over an enumerable space: finish exhaustively.
            if misses > 200 * n.max(64) && space.cardinality() <= 1 << 22 {
                let mut rest: Vec<ParameterVector> = space
                    .enumerate()
                    .filter(|p| !excluded.contains(&p.key()) && !seen.contains(&p.key()))
                    .collect();
                shuffle(&mut rest, rng);
                out.extend(rest.into_iter().take(n - out.len()));
                break;
            }
        } else {
            out.push(p);
        }
    }
    out
}

fn shuffle<T, R: Rng>(items: &mut [T], rng: &mut R) {
    for i in (1..items.len()).rev() {
        items.swap(i, rng.gen_range(0..=i));
    }
}

/// One objective declaration from a manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveDecl {
    pub name: String,
    pub direction: Direction,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParameterDecl {
    name: String,
    levels: Vec<f64>,
}

/// A versioned manifest declaring parameters (with level grids) and
/// objectives (with directions).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub version: u32,
    #[serde(rename = "parameter")]
    parameters: Vec<ParameterDecl>,
    #[serde(rename = "objective", default)]
    pub objectives: Vec<ObjectiveDecl>,
}

impl Manifest {
    /// Builds a manifest describing an existing space and objective set.
    pub fn describe(space: &DesignSpace, objectives: Vec<ObjectiveDecl>) -> Manifest {
        Manifest {
            version: 1,
            parameters: space
                .parameters()
                .iter()
                .map(|p| ParameterDecl {
                    name: p.name.clone(),
                    levels: p.levels.clone(),
                })
                .collect(),
            objectives,
        }
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("manifest serialization is infallible")
    }

    pub fn load(path: &Path) -> Result<Manifest> {
        let text = std::fs::read_to_string(path)?;
        Manifest::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> Result<Manifest> {
        let manifest: Manifest = toml::from_str(text).map_err(|e| {
            let line = e
                .span()
                .map(|s| text[..s.start.min(text.len())].lines().count().max(1))
                .unwrap_or(0);
            Error::Format {
                path: origin.to_string(),
                line,
                message: e.message().to_string(),
            }
        })?;
        if manifest.version != 1 {
            return Err(Error::Format {
                path: origin.to_string(),
                line: 1,
                message: format!("unsupported manifest version {}", manifest.version),
            });
        }
        let mut seen = std::collections::HashSet::new();
        for o in &manifest.objectives {
            if !seen.insert(o.name.clone()) {
                return Err(Error::Config(format!(
                    "duplicate objective name {:?} in {origin}",
                    o.name
                )));
            }
        }
        Ok(manifest)
    }

    /// The design space declared by this manifest.
    pub fn design_space(&self) -> Result<DesignSpace> {
        DesignSpace::new(
            self.parameters
                .iter()
                .map(|p| Parameter {
                    name: p.name.clone(),
                    levels: p.levels.clone(),
                })
                .collect(),
        )
    }

    pub fn objective_names(&self) -> Vec<String> {
        self.objectives.iter().map(|o| o.name.clone()).collect()
    }
}

/// Loads a manifest and returns its validated design space.
pub fn load_design_space(path: &Path) -> Result<DesignSpace> {
    Manifest::load(path)?.design_space()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space_2x3() -> DesignSpace {
        DesignSpace::new(vec![
            Parameter {
                name: "a".into(),
                levels: vec![1.0, 2.0],
            },
            Parameter {
                name: "b".into(),
                levels: vec![0.0, 5.0, 10.0],
            },
        ])
        .unwrap()
    }

    #[test]
    fn cardinality_and_enumeration() {
        let s = space_2x3();
        assert_eq!(s.cardinality(), 6);
        let pts: Vec<_> = s.enumerate().collect();
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[0].values(), &[1.0, 0.0]);
        assert_eq!(pts[5].values(), &[2.0, 10.0]);
    }

    #[test]
    fn single_level_space_has_cardinality_one() {
        let s = DesignSpace::new(vec![Parameter {
            name: "only".into(),
            levels: vec![3.0],
        }])
        .unwrap();
        assert_eq!(s.cardinality(), 1);
        assert_eq!(s.normalize(&ParameterVector::new(vec![3.0])).unwrap(), vec![0.0]);
    }

    #[test]
    fn normalization_maps_bounds_to_unit_interval() {
        let s = space_2x3();
        let z = s.normalize(&ParameterVector::new(vec![2.0, 5.0])).unwrap();
        assert_eq!(z, vec![1.0, 0.5]);
    }

    #[test]
    fn duplicate_parameter_name_rejected() {
        let err = DesignSpace::new(vec![
            Parameter {
                name: "x".into(),
                levels: vec![1.0],
            },
            Parameter {
                name: "x".into(),
                levels: vec![2.0],
            },
        ])
        .unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn manifest_round_trip() {
        let text = r#"
            version = 1

            [[parameter]]
            name = "cache"
            levels = [8, 16, 32]

            [[objective]]
            name = "latency"
            direction = "min"
        "#;
        let m = Manifest::parse(text, "inline").unwrap();
        let s = m.design_space().unwrap();
        assert_eq!(s.dimension(), 1);
        assert_eq!(m.objectives[0].direction, Direction::Minimize);
    }

    #[test]
    fn manifest_unknown_field_reports_location() {
        let text = "version = 1\n\n[[parameter]]\nname = \"a\"\nlevels = [1]\nbogus = 2\n";
        let err = Manifest::parse(text, "inline").unwrap_err();
        match err {
            Error::Format { line, .. } => assert!(line >= 3, "line was {line}"),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn point_key_folds_negative_zero() {
        let a = ParameterVector::new(vec![0.0]);
        let b = ParameterVector::new(vec![-0.0]);
        assert_eq!(a.key(), b.key());
    }
}
