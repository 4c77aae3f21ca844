//! Random-forest regression: CART trees grown on bootstrap row samples with
//! variance-reduction splits over a random feature subset per split.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::regression::RegressionDataset;

#[derive(Debug, Clone)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Features considered at each split; `None` means `ceil(p / 3)`.
    pub features_per_split: Option<usize>,
    pub seed: u64,
    /// Grow each tree on a bootstrap resample of the rows. Disable to train
    /// every tree on the full dataset.
    pub row_sampling: bool,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            max_depth: 16,
            min_leaf: 2,
            features_per_split: None,
            seed: 0,
            row_sampling: true,
        }
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn predict(&self, row: &[f64]) -> f64 {
        let mut idx = 0;
        loop {
            match &self.nodes[idx] {
                Node::Leaf { value } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    idx = if row[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct ForestModel {
    trees: Vec<Tree>,
    pub feature_names: Vec<String>,
}

impl ForestModel {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict(row)).sum::<f64>() / self.trees.len() as f64
    }

    pub fn predict(&self, features: &[Vec<f64>]) -> Vec<f64> {
        features.iter().map(|r| self.predict_row(r)).collect()
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }
}

pub fn fit_random_forest(data: &RegressionDataset, cfg: &ForestConfig) -> Result<ForestModel> {
    let n = data.n_samples();
    let p = data.n_features();
    if n < 2 {
        return Err(Error::Data(format!("forest needs at least 2 rows, got {n}")));
    }
    if cfg.n_trees == 0 {
        return Err(Error::Config("forest needs at least one tree".into()));
    }
    if cfg.min_leaf == 0 {
        return Err(Error::Config("min_leaf must be at least 1".into()));
    }
    let m = cfg.features_per_split.unwrap_or(p.div_ceil(3)).clamp(1, p);

    // Derive one independent stream per tree up front so fitting order (or a
    // future parallel fit) cannot change the result.
    let mut master = ChaCha20Rng::seed_from_u64(cfg.seed);
    let tree_seeds: Vec<u64> = (0..cfg.n_trees).map(|_| master.gen()).collect();

    let trees = tree_seeds
        .into_iter()
        .map(|seed| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let rows: Vec<usize> = if cfg.row_sampling {
                (0..n).map(|_| rng.gen_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            let mut builder = TreeBuilder {
                data,
                cfg,
                m,
                rng,
                nodes: Vec::new(),
            };
            builder.grow(rows, 0);
            Tree {
                nodes: builder.nodes,
            }
        })
        .collect();

    Ok(ForestModel {
        trees,
        feature_names: data.feature_names().to_vec(),
    })
}

struct TreeBuilder<'a> {
    data: &'a RegressionDataset,
    cfg: &'a ForestConfig,
    m: usize,
    rng: ChaCha20Rng,
    nodes: Vec<Node>,
}

impl TreeBuilder<'_> {
    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let targets = self.data.targets();
        let mean = rows.iter().map(|&i| targets[i]).sum::<f64>() / rows.len() as f64;

        let splittable = depth < self.cfg.max_depth
            && rows.len() >= 2 * self.cfg.min_leaf
            && rows.iter().any(|&i| targets[i] != targets[rows[0]]);
        if !splittable {
            return self.push(Node::Leaf { value: mean });
        }

        match self.best_split(&rows) {
            None => self.push(Node::Leaf { value: mean }),
            Some((feature, threshold)) => {
                let features = self.data.features();
                let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
                    .into_iter()
                    .partition(|&i| features[i][feature] <= threshold);
                // Reserve this node's slot before growing children.
                let idx = self.push(Node::Leaf { value: mean });
                let left = self.grow(left_rows, depth + 1);
                let right = self.grow(right_rows, depth + 1);
                self.nodes[idx] = Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                };
                idx
            }
        }
    }

    fn push(&mut self, node: Node) -> usize {
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    /// Best variance-reduction split over a random feature subset, or None
    /// when no split satisfies the leaf-size constraint.
    fn best_split(&mut self, rows: &[usize]) -> Option<(usize, f64)> {
        let p = self.data.n_features();
        let mut feature_pool: Vec<usize> = (0..p).collect();
        for i in 0..self.m.min(p) {
            let j = self.rng.gen_range(i..p);
            feature_pool.swap(i, j);
        }
        let candidates = &feature_pool[..self.m.min(p)];

        let features = self.data.features();
        let targets = self.data.targets();
        let total_sum: f64 = rows.iter().map(|&i| targets[i]).sum();
        let n = rows.len();

        let mut best: Option<(usize, f64, f64)> = None; // (feature, threshold, score)
        let mut sorted = rows.to_vec();
        for &f in candidates {
            sorted.sort_by(|&a, &b| {
                features[a][f]
                    .partial_cmp(&features[b][f])
                    .unwrap()
                    .then(a.cmp(&b))
            });
            let mut left_sum = 0.0;
            for split_at in 1..n {
                let i = sorted[split_at - 1];
                left_sum += targets[i];
                let v = features[i][f];
                let next = features[sorted[split_at]][f];
                if v == next {
                    continue;
                }
                if split_at < self.cfg.min_leaf || n - split_at < self.cfg.min_leaf {
                    continue;
                }
                let right_sum = total_sum - left_sum;
                // Maximizing this score minimizes the summed child SSE.
                let score = left_sum * left_sum / split_at as f64
                    + right_sum * right_sum / (n - split_at) as f64;
                let threshold = v + 0.5 * (next - v);
                if best.map(|(_, _, s)| score > s).unwrap_or(true) {
                    best = Some((f, threshold, score));
                }
            }
        }
        best.map(|(f, t, _)| (f, t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn dataset(features: Vec<Vec<f64>>, targets: Vec<f64>) -> RegressionDataset {
        let p = features[0].len();
        RegressionDataset::new(
            features,
            targets,
            (0..p).map(|i| format!("x{i}")).collect(),
        )
        .unwrap()
    }

    #[test]
    fn constant_target_predicts_constant() {
        let data = dataset((0..10).map(|i| vec![i as f64]).collect(), vec![2.5; 10]);
        let model = fit_random_forest(&data, &ForestConfig::default()).unwrap();
        for i in 0..10 {
            assert_eq!(model.predict_row(&[i as f64]), 2.5);
        }
    }

    #[test]
    fn depth_zero_trees_predict_sample_means() {
        let data = dataset(
            (0..8).map(|i| vec![i as f64]).collect(),
            (0..8).map(|i| i as f64).collect(),
        );
        let cfg = ForestConfig {
            n_trees: 1,
            max_depth: 0,
            row_sampling: false,
            ..ForestConfig::default()
        };
        let model = fit_random_forest(&data, &cfg).unwrap();
        assert!((model.predict_row(&[0.0]) - 3.5).abs() < 1e-12);
    }

    #[test]
    fn single_unrestricted_tree_interpolates_distinct_points() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let features: Vec<Vec<f64>> = (0..8)
            .map(|_| vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)])
            .collect();
        let targets: Vec<f64> = (0..8).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let data = dataset(features.clone(), targets.clone());
        let cfg = ForestConfig {
            n_trees: 1,
            max_depth: usize::MAX,
            min_leaf: 1,
            features_per_split: Some(2),
            seed: 0,
            row_sampling: false,
        };
        let model = fit_random_forest(&data, &cfg).unwrap();
        for (row, y) in features.iter().zip(&targets) {
            assert!((model.predict_row(row) - y).abs() < 1e-12);
        }
    }

    #[test]
    fn identical_config_gives_identical_predictions() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let features: Vec<Vec<f64>> = (0..40)
            .map(|_| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let targets: Vec<f64> = features.iter().map(|r| r[0] * r[1] + r[2]).collect();
        let data = dataset(features.clone(), targets);
        let cfg = ForestConfig {
            n_trees: 25,
            seed: 99,
            ..ForestConfig::default()
        };
        let a = fit_random_forest(&data, &cfg).unwrap();
        let b = fit_random_forest(&data, &cfg).unwrap();
        for row in &features {
            assert_eq!(a.predict_row(row).to_bits(), b.predict_row(row).to_bits());
        }
    }

    #[test]
    fn forest_beats_linear_on_interaction_data() {
        use crate::regression::{fit_linear, normalized_rmse};
        let mut wins = 0;
        for seed in 0..20u64 {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let gen_rows = |rng: &mut ChaCha20Rng, n: usize| -> (Vec<Vec<f64>>, Vec<f64>) {
                let xs: Vec<Vec<f64>> = (0..n)
                    .map(|_| vec![rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0)])
                    .collect();
                let ys: Vec<f64> = xs
                    .iter()
                    .map(|r| r[0] * r[1] + 2.0 + 0.02 * rng.gen_range(-1.0..1.0))
                    .collect();
                (xs, ys)
            };
            let (train_x, train_y) = gen_rows(&mut rng, 200);
            let (test_x, test_y) = gen_rows(&mut rng, 80);
            let train = dataset(train_x, train_y);

            let linear = fit_linear(&train).unwrap();
            let forest = fit_random_forest(
                &train,
                &ForestConfig {
                    n_trees: 60,
                    seed,
                    ..ForestConfig::default()
                },
            )
            .unwrap();
            let lin_err = normalized_rmse(&linear.predict(&test_x), &test_y).unwrap();
            let rf_err = normalized_rmse(&forest.predict(&test_x), &test_y).unwrap();
            if rf_err < lin_err {
                wins += 1;
            }
        }
        assert!(wins >= 18, "forest beat linear in only {wins}/20 runs");
    }
}
