use std::fmt;

use serde::{Deserialize, Serialize};

use super::split::{split_unchecked, SplitCertificate};
use super::TreeError;
use crate::class_model::{FunctionFamily, ProbabilityMeasure};
use crate::metric_entropy::{DistanceMatrix, LpExponent};
use crate::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeSplit<S> {
    pub coordinate: usize,
    pub threshold: S,
    /// Required margin between the sons on `coordinate`.
    pub gap: S,
    pub plus: usize,
    pub minus: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<SplitCertificate<S>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeNode<S> {
    /// Row indices into the family, increasing.
    pub rows: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub split: Option<NodeSplit<S>>,
}

/// Arena-stored binary tree; node 0 is the root.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparatingTree<S> {
    pub gap: S,
    pub nodes: Vec<TreeNode<S>>,
}

impl<S: Scalar> SeparatingTree<S> {
    pub fn root(&self) -> &TreeNode<S> {
        &self.nodes[0]
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.split.is_none()).count()
    }

    pub fn depth(&self) -> usize {
        let mut depth = 0;
        let mut stack = vec![(0usize, 0usize)];
        while let Some((id, d)) = stack.pop() {
            depth = depth.max(d);
            if let Some(s) = &self.nodes[id].split {
                stack.push((s.plus, d + 1));
                stack.push((s.minus, d + 1));
            }
        }
        depth
    }

    pub fn leaves(&self) -> impl Iterator<Item = &TreeNode<S>> {
        self.nodes.iter().filter(|n| n.split.is_none())
    }
}

/// Builds a `t/6`-separating tree of a `t`-separated class.
///
/// Each node with at least two rows is split on the coordinate returned by
/// the separating-coordinate search; rows within `t/12` of the threshold go
/// to neither son.
pub fn build_separating_tree<S: Scalar>(
    family: &FunctionFamily<S>,
    measure: &ProbabilityMeasure<S>,
    t: S,
) -> Result<SeparatingTree<S>, TreeError> {
    if !(t > S::zero()) {
        return Err(TreeError::InvalidScale(t.as_f64()));
    }
    let dm = DistanceMatrix::new(family, measure, LpExponent::L2)?;
    if let Some((i, j)) = dm.first_unseparated_pair(t) {
        return Err(TreeError::NotSeparated { first: i, second: j, distance: dm.get(i, j).as_f64(), t: t.as_f64() });
    }
    let half_gap = t / S::of(12.0);
    let mut nodes = vec![TreeNode { rows: (0..family.len()).collect(), split: None }];
    let mut pending = vec![0usize];
    while let Some(id) = pending.pop() {
        let rows = nodes[id].rows.clone();
        if rows.len() < 2 {
            continue;
        }
        let sub = family.select_rows(&rows);
        let choice = split_unchecked(&sub, t)?;
        let a = choice.certificate.threshold;
        let c = choice.coordinate;
        let plus: Vec<usize> = rows.iter().copied().filter(|&r| family.value(r, c) > a + half_gap).collect();
        let minus: Vec<usize> = rows.iter().copied().filter(|&r| family.value(r, c) < a - half_gap).collect();
        if plus.is_empty() || minus.is_empty() {
            return Err(TreeError::SplitNotFound { gap: half_gap.as_f64() });
        }
        let plus_id = nodes.len();
        nodes.push(TreeNode { rows: plus, split: None });
        let minus_id = nodes.len();
        nodes.push(TreeNode { rows: minus, split: None });
        nodes[id].split = Some(NodeSplit {
            coordinate: c,
            threshold: a,
            gap: half_gap + half_gap,
            plus: plus_id,
            minus: minus_id,
            certificate: Some(choice.certificate),
        });
        pending.push(minus_id);
        pending.push(plus_id);
    }
    Ok(SeparatingTree { gap: t / S::of(6.0), nodes })
}

/// First structural or gap defect found in a tree.
#[derive(Clone, Debug, PartialEq)]
pub enum TreeViolation {
    NoNodes,
    EmptyNode { node: usize },
    RowOutOfRange { node: usize, row: usize },
    ChildOutOfRange { node: usize, child: usize },
    CoordinateOutOfRange { node: usize, coordinate: usize },
    NotASubset { node: usize, son: usize, row: usize },
    SonsOverlap { node: usize, row: usize },
    SharedChild { child: usize },
    GapViolated { node: usize, plus_row: usize, minus_row: usize, coordinate: usize, difference: f64, gap: f64 },
}

impl fmt::Display for TreeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NoNodes => write!(f, "tree has no nodes"),
            Self::EmptyNode { node } => write!(f, "node {node} is empty"),
            Self::RowOutOfRange { node, row } => write!(f, "node {node} references row {row}, out of range"),
            Self::ChildOutOfRange { node, child } => write!(f, "node {node} points to missing child {child}"),
            Self::CoordinateOutOfRange { node, coordinate } => {
                write!(f, "node {node} splits on coordinate {coordinate}, out of range")
            }
            Self::NotASubset { node, son, row } => write!(f, "row {row} of son {son} is not in parent {node}"),
            Self::SonsOverlap { node, row } => write!(f, "sons of node {node} share row {row}"),
            Self::SharedChild { child } => write!(f, "node {child} has more than one parent"),
            Self::GapViolated { node, plus_row, minus_row, coordinate, difference, gap } => write!(
                f,
                "node {node}: rows {plus_row} (plus) and {minus_row} (minus) differ by {difference} on coordinate {coordinate}, need more than {gap}"
            ),
        }
    }
}

/// Rechecks a tree against `family` with margin `gap`: every node nonempty,
/// sons disjoint subsets of their parent, and `f(i) > g(i) + gap` for every
/// `f` in the plus son and `g` in the minus son.
pub fn validate_tree<S: Scalar>(
    tree: &SeparatingTree<S>,
    family: &FunctionFamily<S>,
    gap: S,
) -> Result<(), TreeViolation> {
    if tree.nodes.is_empty() {
        return Err(TreeViolation::NoNodes);
    }
    let m = family.len();
    let mut parent_seen = vec![false; tree.nodes.len()];
    let mut stack = vec![0usize];
    while let Some(id) = stack.pop() {
        let node = &tree.nodes[id];
        if node.rows.is_empty() {
            return Err(TreeViolation::EmptyNode { node: id });
        }
        if let Some(&row) = node.rows.iter().find(|&&r| r >= m) {
            return Err(TreeViolation::RowOutOfRange { node: id, row });
        }
        let Some(split) = &node.split else { continue };
        for child in [split.plus, split.minus] {
            if child >= tree.nodes.len() || child == 0 {
                return Err(TreeViolation::ChildOutOfRange { node: id, child });
            }
            if std::mem::replace(&mut parent_seen[child], true) {
                return Err(TreeViolation::SharedChild { child });
            }
        }
        if split.plus == split.minus {
            return Err(TreeViolation::SharedChild { child: split.plus });
        }
        if split.coordinate >= family.domain_size() {
            return Err(TreeViolation::CoordinateOutOfRange { node: id, coordinate: split.coordinate });
        }
        let plus = &tree.nodes[split.plus].rows;
        let minus = &tree.nodes[split.minus].rows;
        for (son, rows) in [(split.plus, plus), (split.minus, minus)] {
            if let Some(&row) = rows.iter().find(|r| !node.rows.contains(r)) {
                return Err(TreeViolation::NotASubset { node: id, son, row });
            }
        }
        if let Some(&row) = plus.iter().find(|r| minus.contains(r)) {
            return Err(TreeViolation::SonsOverlap { node: id, row });
        }
        let c = split.coordinate;
        for &f in plus {
            for &g in minus {
                if f >= m || g >= m {
                    continue;
                }
                let diff = family.value(f, c) - family.value(g, c);
                if !(diff > gap) {
                    return Err(TreeViolation::GapViolated {
                        node: id,
                        plus_row: f,
                        minus_row: g,
                        coordinate: c,
                        difference: diff.as_f64(),
                        gap: gap.as_f64(),
                    });
                }
            }
        }
        stack.push(split.minus);
        stack.push(split.plus);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube() -> FunctionFamily<f64> {
        FunctionFamily::real(vec![vec![1.0, 1.0], vec![1.0, -1.0], vec![-1.0, 1.0], vec![-1.0, -1.0]]).unwrap()
    }

    #[test]
    fn sign_cube_tree() {
        let fam = cube();
        let tree = build_separating_tree(&fam, &ProbabilityMeasure::uniform(2), 1.4).unwrap();
        assert_eq!(tree.leaf_count(), 4);
        assert_eq!(tree.depth(), 2);
        let root = tree.root().split.as_ref().unwrap();
        assert_eq!(root.coordinate, 0);
        for child in [root.plus, root.minus] {
            assert_eq!(tree.nodes[child].split.as_ref().unwrap().coordinate, 1);
        }
        assert_eq!(validate_tree(&tree, &fam, 1.4 / 6.0), Ok(()));
        // coordinate gaps are exactly 2
        assert!(validate_tree(&tree, &fam, 2.0).is_err());
        assert_eq!(validate_tree(&tree, &fam, 1.99), Ok(()));
    }

    #[test]
    fn pair_and_singleton() {
        let mu = ProbabilityMeasure::uniform(1);
        let pair = FunctionFamily::real(vec![vec![0.0], vec![1.0]]).unwrap();
        let tree = build_separating_tree(&pair, &mu, 0.5).unwrap();
        assert_eq!(tree.leaf_count(), 2);
        assert_eq!(tree.nodes.len(), 3);
        let single = FunctionFamily::real(vec![vec![0.3]]).unwrap();
        let tree = build_separating_tree(&single, &mu, 0.5).unwrap();
        assert_eq!(tree.leaf_count(), 1);
        assert_eq!(validate_tree(&tree, &single, 0.5 / 6.0), Ok(()));
    }

    #[test]
    fn overlapping_sons_rejected() {
        let fam = cube();
        let tree = SeparatingTree {
            gap: 0.1,
            nodes: vec![
                TreeNode {
                    rows: vec![0, 1, 2, 3],
                    split: Some(NodeSplit { coordinate: 0, threshold: 0.0, gap: 0.1, plus: 1, minus: 2, certificate: None }),
                },
                TreeNode { rows: vec![0, 1], split: None },
                TreeNode { rows: vec![1, 2], split: None },
            ],
        };
        assert_eq!(validate_tree(&tree, &fam, 0.1), Err(TreeViolation::SonsOverlap { node: 0, row: 1 }));
    }

    #[test]
    fn json_round_trip() {
        let tree = build_separating_tree(&cube(), &ProbabilityMeasure::uniform(2), 1.4).unwrap();
        let text = serde_json::to_string(&tree).unwrap();
        let back: SeparatingTree<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, tree);
    }
}
