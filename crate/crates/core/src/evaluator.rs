//! Evaluators stand in for synthesis tools: they answer objective values for
//! design points, either by replaying a result table or from a synthetic
//! closed form. Queries are cached; repeated queries are answered
//! bit-identically with no evaluator work.

use std::collections::HashMap;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::RwLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::space::{DesignSpace, Direction, Manifest, ObjectiveDecl, ParameterVector, PointKey};

/// A dataset table: parameter columns then objective columns, one design
/// point per row. This is the interchange schema for every CSV the toolkit
/// reads or writes.
#[derive(Debug, Clone)]
pub struct TableData {
    pub parameter_names: Vec<String>,
    pub objective_names: Vec<String>,
    pub rows: Vec<(ParameterVector, Vec<f64>)>,
}

impl TableData {
    /// Loads a dataset CSV, validating the header and every row against the
    /// manifest's parameter domains.
    pub fn load(path: &Path, manifest: &Manifest) -> Result<TableData> {
        let space = manifest.design_space()?;
        let parameter_names = space.parameter_names();
        let objective_names = manifest.objective_names();
        let origin = path.display().to_string();
        let format_err = |line: usize, message: String| Error::Format {
            path: origin.clone(),
            line,
            message,
        };

        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| format_err(1, e.to_string()))?;

        let expected: Vec<&str> = parameter_names
            .iter()
            .chain(objective_names.iter())
            .map(|s| s.as_str())
            .collect();
        let header = reader.headers().map_err(|e| format_err(1, e.to_string()))?;
        let found: Vec<&str> = header.iter().collect();
        if found != expected {
            return Err(format_err(
                1,
                format!("header mismatch: expected {expected:?}, found {found:?}"),
            ));
        }

        let p = parameter_names.len();
        let mut rows = Vec::new();
        for (idx, record) in reader.records().enumerate() {
            let line = idx + 2;
            let record = record.map_err(|e| format_err(line, e.to_string()))?;
            if record.len() != expected.len() {
                return Err(format_err(
                    line,
                    format!("row has {} fields, expected {}", record.len(), expected.len()),
                ));
            }
            let mut values = Vec::with_capacity(record.len());
            for field in record.iter() {
                let v: f64 = field
                    .parse()
                    .map_err(|_| format_err(line, format!("invalid number {field:?}")))?;
                values.push(v);
            }
            let point = ParameterVector::new(values[..p].to_vec());
            for (param, v) in space.parameters().iter().zip(point.values()) {
                if !param.levels.iter().any(|l| l == v) {
                    return Err(format_err(
                        line,
                        format!("value {v} is not a declared level of parameter {:?}", param.name),
                    ));
                }
            }
            rows.push((point, values[p..].to_vec()));
        }

        Ok(TableData {
            parameter_names,
            objective_names,
            rows,
        })
    }

    /// Writes the table as CSV. Numbers use shortest round-trip formatting,
    /// so reloading reproduces every value bit-exactly.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut writer = csv::Writer::from_path(path)?;
        let header: Vec<&str> = self
            .parameter_names
            .iter()
            .chain(self.objective_names.iter())
            .map(|s| s.as_str())
            .collect();
        writer.write_record(&header)?;
        for (point, values) in &self.rows {
            let fields: Vec<String> = point
                .values()
                .iter()
                .chain(values.iter())
                .map(|v| format!("{v}"))
                .collect();
            writer.write_record(&fields)?;
        }
        writer.flush()?;
        Ok(())
    }

    /// Column index of an objective by name.
    pub fn objective_index(&self, name: &str) -> Result<usize> {
        self.objective_names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| {
                Error::Config(format!(
                    "objective {name:?} not found; available: {:?}",
                    self.objective_names
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvaluatorKind {
    Table,
    Synthetic,
}

/// Shipped synthetic objective generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntheticKind {
    /// `sum_i (z_i - c_i)^2` over normalized coordinates, centered on the
    /// middle grid point. Single objective "cost", minimized, optimum 0.
    QuadraticBowl,
    /// Bowl plus a cosine ripple, centered on a seeded grid point. The
    /// ripple is nonnegative, so the global optimum is still exactly 0 at
    /// the seeded center. Single objective "cost", minimized.
    Multimodal,
    /// Two correlated objectives "source" and "target": the source is the
    /// rippled bowl of [`SyntheticKind::Multimodal`]; the target adds a
    /// smooth seeded perturbation to it. Both minimized.
    CorrelatedPair,
    /// `z_1 * z_2` plus small per-point Gaussian noise: a nonlinear
    /// interaction no linear model can capture. Single objective
    /// "response", minimized.
    Interaction,
}

impl std::str::FromStr for SyntheticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<SyntheticKind> {
        match s {
            "bowl" => Ok(SyntheticKind::QuadraticBowl),
            "multimodal" => Ok(SyntheticKind::Multimodal),
            "correlated" => Ok(SyntheticKind::CorrelatedPair),
            "interaction" => Ok(SyntheticKind::Interaction),
            other => Err(Error::Config(format!(
                "unknown synthetic generator {other:?}; available: bowl, multimodal, correlated, interaction"
            ))),
        }
    }
}

/// Weight of the target perturbation in the correlated pair; keeps the
/// full-space correlation of the two objectives above 0.9.
const CORRELATED_PAIR_GAMMA: f64 = 0.25;
/// Ripple amplitude of the multimodal generator.
const MULTIMODAL_AMPLITUDE: f64 = 0.15;
/// Noise scale of the interaction generator.
const INTERACTION_NOISE: f64 = 0.02;

#[derive(Debug, Clone)]
struct SyntheticFunction {
    kind: SyntheticKind,
    seed: u64,
    /// Normalized coordinates of the seeded center grid point.
    center: Vec<f64>,
    /// Per-dimension phases for the perturbation term.
    phases: Vec<f64>,
    /// Per-dimension weights for the perturbation term.
    weights: Vec<f64>,
}

impl SyntheticFunction {
    fn new(kind: SyntheticKind, space: &DesignSpace, seed: u64) -> Result<SyntheticFunction> {
        if kind == SyntheticKind::Interaction && space.dimension() < 2 {
            return Err(Error::Config(
                "interaction generator needs at least two parameters".into(),
            ));
        }
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let center_indices: Vec<usize> = match kind {
            SyntheticKind::QuadraticBowl => space
                .parameters()
                .iter()
                .map(|p| (p.levels.len() - 1) / 2)
                .collect(),
            _ => space
                .parameters()
                .iter()
                .map(|p| rng.gen_range(0..p.levels.len()))
                .collect(),
        };
        let center = space.normalize(&space.point(&center_indices))?;
        let phases: Vec<f64> = (0..space.dimension())
            .map(|_| rng.gen::<f64>() * std::f64::consts::TAU)
            .collect();
        let weights: Vec<f64> = (0..space.dimension())
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        Ok(SyntheticFunction {
            kind,
            seed,
            center,
            phases,
            weights,
        })
    }

    fn objective_names(&self) -> Vec<String> {
        match self.kind {
            SyntheticKind::CorrelatedPair => vec!["source".into(), "target".into()],
            SyntheticKind::Interaction => vec!["response".into()],
            _ => vec!["cost".into()],
        }
    }

    fn directions(&self) -> Vec<Direction> {
        match self.kind {
            SyntheticKind::CorrelatedPair => vec![Direction::Minimize, Direction::Minimize],
            _ => vec![Direction::Minimize],
        }
    }

    fn bowl(&self, z: &[f64]) -> f64 {
        z.iter()
            .zip(&self.center)
            .map(|(zi, ci)| (zi - ci) * (zi - ci))
            .sum()
    }

    /// Smooth, zero-centered perturbation used by the correlated pair.
    fn perturbation(&self, z: &[f64]) -> f64 {
        let d = z.len() as f64;
        z.iter()
            .zip(self.phases.iter().zip(&self.weights))
            .map(|(zi, (phi, w))| w * (std::f64::consts::TAU * zi + phi).cos())
            .sum::<f64>()
            / d.sqrt()
    }

    /// Bowl plus a nonnegative cosine ripple; zero exactly at the center.
    fn rippled_bowl(&self, z: &[f64]) -> f64 {
        let ripple: f64 = z
            .iter()
            .zip(&self.center)
            .map(|(zi, ci)| {
                MULTIMODAL_AMPLITUDE * (1.0 - (4.0 * std::f64::consts::PI * (zi - ci)).cos())
            })
            .sum();
        self.bowl(z) + ripple
    }

    fn evaluate(&self, z: &[f64], point: &ParameterVector) -> Vec<f64> {
        match self.kind {
            SyntheticKind::QuadraticBowl => vec![self.bowl(z)],
            SyntheticKind::Multimodal => vec![self.rippled_bowl(z)],
            SyntheticKind::CorrelatedPair => {
                let g = self.rippled_bowl(z);
                vec![g, g + CORRELATED_PAIR_GAMMA * self.perturbation(z)]
            }
            SyntheticKind::Interaction => {
                let noise: f64 = {
                    let mut rng = ChaCha20Rng::seed_from_u64(point_hash(self.seed, &point.key()));
                    rng.sample(StandardNormal)
                };
                vec![z[0] * z[1] + INTERACTION_NOISE * noise]
            }
        }
    }

    /// Exact global optimum, when one is known in closed form.
    fn known_optimum(&self, space: &DesignSpace) -> Option<(ParameterVector, Vec<f64>)> {
        match self.kind {
            SyntheticKind::QuadraticBowl | SyntheticKind::Multimodal => {
                let point = space
                    .enumerate()
                    .find(|p| space.normalize(p).ok().as_deref() == Some(&self.center[..]))?;
                Some((point, vec![0.0]))
            }
            _ => None,
        }
    }
}

/// Deterministic per-point hash so synthetic noise is a pure function of
/// (seed, point) independent of query order.
fn point_hash(seed: u64, key: &PointKey) -> u64 {
    let mut h = 0xcbf29ce484222325u64 ^ seed.wrapping_mul(0x100000001b3);
    for &b in key.bits() {
        h ^= b;
        h = h.wrapping_mul(0x100000001b3);
        h ^= h >> 29;
    }
    h
}

enum Source {
    Table(HashMap<PointKey, Vec<f64>>),
    Synthetic(SyntheticFunction),
}

/// Answers objective values for design points. Deterministic and
/// repeatable: the same point always yields bit-identical values.
pub struct Evaluator {
    space: DesignSpace,
    objective_names: Vec<String>,
    directions: Vec<Direction>,
    source: Source,
    cache: RwLock<HashMap<PointKey, Vec<f64>>>,
    cache_hits: AtomicU64,
}

impl Evaluator {
    /// Builds a table evaluator from in-memory rows. Identical duplicate
    /// rows are collapsed; conflicting duplicates are rejected.
    pub fn from_table(
        space: DesignSpace,
        objectives: Vec<ObjectiveDecl>,
        rows: Vec<(ParameterVector, Vec<f64>)>,
    ) -> Result<Evaluator> {
        let mut table: HashMap<PointKey, Vec<f64>> = HashMap::with_capacity(rows.len());
        for (i, (point, values)) in rows.iter().enumerate() {
            if values.len() != objectives.len() {
                return Err(Error::Data(format!(
                    "row {} has {} objective values, expected {}",
                    i + 1,
                    values.len(),
                    objectives.len()
                )));
            }
            if !space.contains(point) {
                return Err(Error::Data(format!(
                    "row {} point {point} is outside the design space",
                    i + 1
                )));
            }
            match table.entry(point.key()) {
                std::collections::hash_map::Entry::Occupied(existing) => {
                    if existing.get() != values {
                        return Err(Error::Data(format!(
                            "row {} duplicates point {point} with conflicting objectives",
                            i + 1
                        )));
                    }
                }
                std::collections::hash_map::Entry::Vacant(slot) => {
                    slot.insert(values.clone());
                }
            }
        }
        Ok(Evaluator {
            space,
            objective_names: objectives.iter().map(|o| o.name.clone()).collect(),
            directions: objectives.iter().map(|o| o.direction).collect(),
            source: Source::Table(table),
            cache: RwLock::new(HashMap::new()),
            cache_hits: AtomicU64::new(0),
        })
    }

    /// Builds a synthetic evaluator from a named generator.
    pub fn synthetic(kind: SyntheticKind, space: DesignSpace, seed: u64) -> Result<Evaluator> {
        let function = SyntheticFunction::new(kind, &space, seed)?;
        Ok(Evaluator {
            objective_names: function.objective_names(),
            directions: function.directions(),
            space,
            source: Source::Synthetic(function),
            cache: RwLock::new(HashMap::new()),
            cache_hits: AtomicU64::new(0),
        })
    }

    pub fn kind(&self) -> EvaluatorKind {
        match self.source {
            Source::Table(_) => EvaluatorKind::Table,
            Source::Synthetic(_) => EvaluatorKind::Synthetic,
        }
    }

    pub fn space(&self) -> &DesignSpace {
        &self.space
    }

    pub fn objective_names(&self) -> &[String] {
        &self.objective_names
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn cache_hits(&self) -> u64 {
        self.cache_hits.load(Ordering::Relaxed)
    }

    /// Exact global optimum of a synthetic generator, when known.
    pub fn known_optimum(&self) -> Option<(ParameterVector, Vec<f64>)> {
        match &self.source {
            Source::Synthetic(f) => f.known_optimum(&self.space),
            Source::Table(_) => None,
        }
    }

    /// Objective vector for an in-domain design point.
    pub fn query(&self, x: &ParameterVector) -> Result<Vec<f64>> {
        if !self.space.contains(x) {
            return Err(Error::Argument(format!(
                "query point {x} is outside the design space"
            )));
        }
        let key = x.key();
        if let Some(hit) = self.cache.read().expect("cache lock").get(&key) {
            self.cache_hits.fetch_add(1, Ordering::Relaxed);
            return Ok(hit.clone());
        }
        let values = match &self.source {
            Source::Table(table) => table
                .get(&key)
                .cloned()
                .ok_or_else(|| Error::NotCovered(format!("table has no row for point {x}")))?,
            Source::Synthetic(f) => {
                let z = self.space.normalize(x)?;
                f.evaluate(&z, x)
            }
        };
        self.cache
            .write()
            .expect("cache lock")
            .insert(key, values.clone());
        Ok(values)
    }
}

/// Loads a manifest plus a dataset CSV into a replay evaluator.
pub fn load_table_evaluator(csv_path: &Path, manifest_path: &Path) -> Result<Evaluator> {
    let manifest = Manifest::load(manifest_path)?;
    if manifest.objectives.is_empty() {
        return Err(Error::Config(format!(
            "manifest {} declares no objectives",
            manifest_path.display()
        )));
    }
    let space = manifest.design_space()?;
    let table = TableData::load(csv_path, &manifest)?;
    // Re-map conflicts onto CSV line numbers for the diagnostic.
    let mut seen: HashMap<PointKey, (usize, Vec<f64>)> = HashMap::new();
    for (i, (point, values)) in table.rows.iter().enumerate() {
        let line = i + 2;
        if let Some((first_line, existing)) = seen.get(&point.key()) {
            if existing != values {
                return Err(Error::Format {
                    path: csv_path.display().to_string(),
                    line,
                    message: format!(
                        "point {point} duplicates line {first_line} with conflicting objectives"
                    ),
                });
            }
        } else {
            seen.insert(point.key(), (line, values.clone()));
        }
    }
    Evaluator::from_table(space, manifest.objectives.clone(), table.rows)
}

/// Builds a synthetic evaluator from a generator name.
pub fn make_synthetic_evaluator(name: &str, space: DesignSpace, seed: u64) -> Result<Evaluator> {
    Evaluator::synthetic(name.parse()?, space, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Parameter;

    fn grid(levels_per_dim: &[usize]) -> DesignSpace {
        DesignSpace::new(
            levels_per_dim
                .iter()
                .enumerate()
                .map(|(i, &n)| Parameter {
                    name: format!("p{i}"),
                    levels: (0..n).map(|k| k as f64).collect(),
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn bowl_center_is_exact_minimum() {
        let space = grid(&[5, 5]);
        let ev = Evaluator::synthetic(SyntheticKind::QuadraticBowl, space, 7).unwrap();
        let (opt, value) = ev.known_optimum().unwrap();
        assert_eq!(ev.query(&opt).unwrap(), value);
        assert_eq!(value[0], 0.0);
        for p in ev.space().enumerate() {
            assert!(ev.query(&p).unwrap()[0] >= 0.0);
        }
    }

    #[test]
    fn multimodal_optimum_is_seeded_center() {
        let space = grid(&[7, 7]);
        let ev = Evaluator::synthetic(SyntheticKind::Multimodal, space, 123).unwrap();
        let (opt, _) = ev.known_optimum().unwrap();
        let best = ev
            .space()
            .enumerate()
            .map(|p| ev.query(&p).unwrap()[0])
            .fold(f64::INFINITY, f64::min);
        assert_eq!(ev.query(&opt).unwrap()[0], best);
        assert!(best.abs() < 1e-12);
    }

    #[test]
    fn same_seed_gives_identical_surface() {
        let space = grid(&[4, 4, 4]);
        let a = Evaluator::synthetic(SyntheticKind::Interaction, space.clone(), 42).unwrap();
        let b = Evaluator::synthetic(SyntheticKind::Interaction, space, 42).unwrap();
        for p in a.space().enumerate() {
            assert_eq!(a.query(&p).unwrap(), b.query(&p).unwrap());
        }
    }

    #[test]
    fn cache_hit_counter_increments_on_repeat_query() {
        let space = grid(&[3]);
        let ev = Evaluator::synthetic(SyntheticKind::QuadraticBowl, space, 0).unwrap();
        let p = ParameterVector::new(vec![1.0]);
        let first = ev.query(&p).unwrap();
        assert_eq!(ev.cache_hits(), 0);
        let second = ev.query(&p).unwrap();
        assert_eq!(ev.cache_hits(), 1);
        assert_eq!(first, second);
    }

    #[test]
    fn out_of_domain_query_is_argument_error() {
        let space = grid(&[3]);
        let ev = Evaluator::synthetic(SyntheticKind::QuadraticBowl, space, 0).unwrap();
        assert!(matches!(
            ev.query(&ParameterVector::new(vec![9.0])),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn table_replay_and_not_covered() {
        let space = grid(&[2, 2]);
        let objectives = vec![ObjectiveDecl {
            name: "latency".into(),
            direction: Direction::Minimize,
        }];
        let rows = vec![
            (ParameterVector::new(vec![0.0, 0.0]), vec![5.0]),
            (ParameterVector::new(vec![1.0, 0.0]), vec![3.0]),
            // identical duplicate, deduplicated silently
            (ParameterVector::new(vec![1.0, 0.0]), vec![3.0]),
        ];
        let ev = Evaluator::from_table(space, objectives, rows).unwrap();
        assert_eq!(ev.query(&ParameterVector::new(vec![0.0, 0.0])).unwrap(), vec![5.0]);
        assert!(matches!(
            ev.query(&ParameterVector::new(vec![0.0, 1.0])),
            Err(Error::NotCovered(_))
        ));
    }

    #[test]
    fn conflicting_duplicate_rows_rejected() {
        let space = grid(&[2]);
        let objectives = vec![ObjectiveDecl {
            name: "y".into(),
            direction: Direction::Minimize,
        }];
        let rows = vec![
            (ParameterVector::new(vec![0.0]), vec![1.0]),
            (ParameterVector::new(vec![0.0]), vec![2.0]),
        ];
        assert!(matches!(
            Evaluator::from_table(space, objectives, rows),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let manifest_text = r#"
            version = 1
            [[parameter]]
            name = "p0"
            levels = [0, 1, 2]
            [[objective]]
            name = "y"
            direction = "min"
        "#;
        let manifest = Manifest::parse(manifest_text, "inline").unwrap();
        let table = TableData {
            parameter_names: vec!["p0".into()],
            objective_names: vec!["y".into()],
            rows: vec![
                (ParameterVector::new(vec![0.0]), vec![0.1 + 0.2]),
                (ParameterVector::new(vec![1.0]), vec![1.0 / 3.0]),
                (ParameterVector::new(vec![2.0]), vec![-5.5e-13]),
            ],
        };
        let path = dir.path().join("data.csv");
        table.save(&path).unwrap();
        let reloaded = TableData::load(&path, &manifest).unwrap();
        for (a, b) in table.rows.iter().zip(&reloaded.rows) {
            assert_eq!(a.0, b.0);
            assert!(a.1.iter().zip(&b.1).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
    }

    #[test]
    fn csv_header_mismatch_reports_line_one() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = Manifest::parse(
            "version = 1\n[[parameter]]\nname = \"a\"\nlevels = [0, 1]\n[[objective]]\nname = \"y\"\ndirection = \"min\"\n",
            "inline",
        )
        .unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "wrong,y\n0,1\n").unwrap();
        match TableData::load(&path, &manifest) {
            Err(Error::Format { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn csv_out_of_domain_value_reports_row() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = Manifest::parse(
            "version = 1\n[[parameter]]\nname = \"a\"\nlevels = [0, 1]\n[[objective]]\nname = \"y\"\ndirection = \"min\"\n",
            "inline",
        )
        .unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "a,y\n0,1\n7,2\n").unwrap();
        match TableData::load(&path, &manifest) {
            Err(Error::Format { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected format error, got {other:?}"),
        }
    }
}
