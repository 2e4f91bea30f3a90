//! Binary CART classifier: Gini impurity, midpoint thresholds, deterministic
//! tie-breaking (lowest feature index, then lowest threshold).

use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;

pub const DEFAULT_MAX_DEPTH: usize = 8;
pub const DEFAULT_MIN_LEAF: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Leaf { prediction: u8 },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeModel {
    pub nodes: Vec<TreeNode>,
    pub feature_count: usize,
}

fn gini(pos: usize, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let p = pos as f64 / total as f64;
    2.0 * p * (1.0 - p)
}

/// Majority label; ties go to the positive class.
fn majority(pos: usize, total: usize) -> u8 {
    if 2 * pos >= total {
        1
    } else {
        0
    }
}

struct Builder<'a> {
    x: &'a FeatureMatrix,
    y: &'a [u8],
    max_depth: usize,
    min_leaf: usize,
    nodes: Vec<TreeNode>,
}

impl Builder<'_> {
    fn build(&mut self, rows: &[usize], depth: usize) -> usize {
        let total = rows.len();
        let pos = rows.iter().filter(|&&r| self.y[r] == 1).count();
        let parent_impurity = gini(pos, total);

        let make_leaf = depth >= self.max_depth
            || total < 2 * self.min_leaf
            || pos == 0
            || pos == total;
        if !make_leaf {
            if let Some((feature, threshold)) = self.best_split(rows, parent_impurity) {
                let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
                    .iter()
                    .partition(|&&r| self.x.row(r)[feature] <= threshold);
                let id = self.nodes.len();
                self.nodes.push(TreeNode::Leaf { prediction: 0 }); // patched below
                let left = self.build(&left_rows, depth + 1);
                let right = self.build(&right_rows, depth + 1);
                self.nodes[id] = TreeNode::Split { feature, threshold, left, right };
                return id;
            }
        }
        let id = self.nodes.len();
        self.nodes.push(TreeNode::Leaf { prediction: majority(pos, total) });
        id
    }

    /// Best (gain, feature, threshold); thresholds are midpoints between
    /// consecutive distinct values, children must satisfy min_leaf.
    fn best_split(&self, rows: &[usize], parent_impurity: f64) -> Option<(usize, f64)> {
        let total = rows.len();
        let total_pos = rows.iter().filter(|&&r| self.y[r] == 1).count();
        let mut best: Option<(f64, usize, f64)> = None;

        for feature in 0..self.x.n_cols() {
            // Aggregate counts per distinct value so the scan does not depend
            // on the row order.
            let mut pairs: Vec<(f64, usize)> = rows.iter().map(|&r| (self.x.row(r)[feature], r)).collect();
            pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite values"));
            let mut groups: Vec<(f64, usize, usize)> = Vec::new(); // (value, count, pos)
            for (v, r) in pairs {
                let is_pos = (self.y[r] == 1) as usize;
                match groups.last_mut() {
                    Some((gv, c, p)) if *gv == v => {
                        *c += 1;
                        *p += is_pos;
                    }
                    _ => groups.push((v, 1, is_pos)),
                }
            }
            let mut left_n = 0usize;
            let mut left_pos = 0usize;
            for window in 0..groups.len().saturating_sub(1) {
                left_n += groups[window].1;
                left_pos += groups[window].2;
                let right_n = total - left_n;
                let right_pos = total_pos - left_pos;
                if left_n < self.min_leaf || right_n < self.min_leaf {
                    continue;
                }
                let weighted = (left_n as f64 * gini(left_pos, left_n)
                    + right_n as f64 * gini(right_pos, right_n))
                    / total as f64;
                let gain = parent_impurity - weighted;
                if gain <= 1e-12 {
                    continue;
                }
                let threshold = (groups[window].0 + groups[window + 1].0) / 2.0;
                let better = match best {
                    None => true,
                    Some((bg, bf, bt)) => {
                        gain > bg + 1e-15
                            || ((gain - bg).abs() <= 1e-15
                                && (feature < bf || (feature == bf && threshold < bt)))
                    }
                };
                if better {
                    best = Some((gain, feature, threshold));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }
}

impl TreeModel {
    pub fn fit(x: &FeatureMatrix, y: &[u8], max_depth: usize, min_leaf: usize) -> Result<Self> {
        if y.len() != x.n_rows() {
            return Err(Error::Train(format!(
                "label count {} does not match {} rows",
                y.len(),
                x.n_rows()
            )));
        }
        if !y.contains(&0) || !y.contains(&1) {
            return Err(Error::Train("training labels contain a single class".into()));
        }
        let min_leaf = min_leaf.max(1);
        let mut builder = Builder { x, y, max_depth, min_leaf, nodes: Vec::new() };
        let rows: Vec<usize> = (0..x.n_rows()).collect();
        builder.build(&rows, 0);
        Ok(TreeModel { nodes: builder.nodes, feature_count: x.n_cols() })
    }

    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<u8>> {
        if x.n_cols() != self.feature_count {
            return Err(Error::Predict(format!(
                "expected {} features, got {}",
                self.feature_count,
                x.n_cols()
            )));
        }
        Ok(x.rows()
            .map(|row| {
                let mut node = 0usize;
                loop {
                    match &self.nodes[node] {
                        TreeNode::Leaf { prediction } => return *prediction,
                        TreeNode::Split { feature, threshold, left, right } => {
                            node = if row[*feature] <= *threshold { *left } else { *right };
                        }
                    }
                }
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_zero_predicts_majority_everywhere() {
        let x = FeatureMatrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        let y = vec![1, 1, 1, 0];
        let model = TreeModel::fit(&x, &y, 0, 1).unwrap();
        assert_eq!(model.predict(&x).unwrap(), vec![1, 1, 1, 1]);
        // tie goes to the positive class
        let tie = TreeModel::fit(&x, &[1, 1, 0, 0], 0, 1).unwrap();
        assert_eq!(tie.predict(&x).unwrap(), vec![1, 1, 1, 1]);
    }

    #[test]
    fn learns_an_axis_split() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, 0.5]).collect();
        let y: Vec<u8> = (0..20).map(|i| (i >= 10) as u8).collect();
        let x = FeatureMatrix::from_rows(&rows).unwrap();
        let model = TreeModel::fit(&x, &y, 4, 2).unwrap();
        assert_eq!(model.predict(&x).unwrap(), y);
        match &model.nodes[0] {
            TreeNode::Split { feature, threshold, .. } => {
                assert_eq!(*feature, 0);
                assert_eq!(*threshold, 9.5);
            }
            other => panic!("expected a split at the root, got {other:?}"),
        }
    }

    #[test]
    fn row_permutation_gives_identical_tree() {
        let rows: Vec<Vec<f64>> = (0..30).map(|i| vec![(i * 7 % 30) as f64, (i % 3) as f64]).collect();
        let y: Vec<u8> = (0..30).map(|i| ((i * 7 % 30) >= 15) as u8).collect();
        let x = FeatureMatrix::from_rows(&rows).unwrap();
        let a = TreeModel::fit(&x, &y, 5, 2).unwrap();
        let perm: Vec<usize> = (0..30).rev().collect();
        let xp = x.select_rows(&perm).unwrap();
        let yp: Vec<u8> = perm.iter().map(|&i| y[i]).collect();
        let b = TreeModel::fit(&xp, &yp, 5, 2).unwrap();
        assert_eq!(a.nodes, b.nodes);
    }

    #[test]
    fn min_leaf_is_respected() {
        let rows: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64]).collect();
        let y = vec![0, 0, 0, 0, 1, 1, 1, 1];
        let x = FeatureMatrix::from_rows(&rows).unwrap();
        let model = TreeModel::fit(&x, &y, 8, 5).unwrap();
        // 8 rows cannot produce two children of size >= 5
        assert_eq!(model.nodes.len(), 1);
    }
}
