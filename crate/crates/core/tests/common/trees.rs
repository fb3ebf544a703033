//! Rooted trees and the Runge-Kutta order conditions they index.

use std::collections::BTreeSet;

use mppfv::tableau::ButcherTableau;

/// Rooted tree as the sorted list of its subtrees.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Tree(pub Vec<Tree>);

impl Tree {
    pub fn order(&self) -> usize {
        1 + self.0.iter().map(Tree::order).sum::<usize>()
    }

    pub fn density(&self) -> f64 {
        self.order() as f64 * self.0.iter().map(Tree::density).product::<f64>()
    }

    /// Stage vector Φ with Φ(•) = e and Φ([t1..tk]) = Π_k A Φ(t_k).
    pub fn stage_weights(&self, a: &[Vec<f64>]) -> Vec<f64> {
        let m = a.len();
        let mut out = vec![1.0; m];
        for child in &self.0 {
            let g = child.stage_weights(a);
            for (i, o) in out.iter_mut().enumerate() {
                *o *= (0..m).map(|s| a[i][s] * g[s]).sum::<f64>();
            }
        }
        out
    }
}

/// All rooted trees with `n` vertices.
pub fn trees(n: usize) -> BTreeSet<Tree> {
    if n == 1 {
        return BTreeSet::from([Tree(Vec::new())]);
    }
    forests(n - 1).into_iter().map(Tree).collect()
}

/// All multisets of trees with `n` vertices in total, children sorted.
pub fn forests(n: usize) -> BTreeSet<Vec<Tree>> {
    let mut out = BTreeSet::new();
    if n == 0 {
        out.insert(Vec::new());
        return out;
    }
    for first in 1..=n {
        for t in trees(first) {
            for mut rest in forests(n - first) {
                rest.push(t.clone());
                rest.sort();
                out.insert(rest);
            }
        }
    }
    out
}

/// Largest |b·Φ(t) - 1/γ(t)| over the trees of order `p`.
pub fn order_defect(tab: &ButcherTableau, p: usize) -> f64 {
    trees(p)
        .iter()
        .map(|t| {
            let phi = t.stage_weights(&tab.a);
            let lhs: f64 = tab.b.iter().zip(&phi).map(|(b, g)| b * g).sum();
            (lhs - 1.0 / t.density()).abs()
        })
        .fold(0.0, f64::max)
}
