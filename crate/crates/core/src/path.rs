//! Regularization path over a geometric `lambda1` grid with warm starts,
//! and the feature ranking derived from path entry order.

use crate::elastic_net::{lambda_max, solve, AugmentedProblem, CoefMatrix, SolveOptions};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathGrid {
    pub count: usize,
    /// `lambda_min / lambda_max`.
    pub ratio: f64,
}

impl Default for PathGrid {
    fn default() -> Self {
        Self { count: 100, ratio: 1e-3 }
    }
}

impl PathGrid {
    /// Descending geometric grid from `lambda_max` to `ratio * lambda_max`.
    pub fn lambdas(&self, lambda_max: f64) -> Result<Vec<f64>> {
        if self.count < 2 {
            return Err(Error::invalid(format!("path grid needs at least 2 points, got {}", self.count)));
        }
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            return Err(Error::invalid(format!("grid ratio must lie in (0, 1), got {}", self.ratio)));
        }
        if !(lambda_max > 0.0) {
            return Err(Error::invalid("lambda_max is zero: the target is orthogonal to every feature"));
        }
        let step = self.ratio.ln() / (self.count - 1) as f64;
        Ok((0..self.count).map(|k| lambda_max * (step * k as f64).exp()).collect())
    }
}

#[derive(Debug, Clone)]
pub struct PathResult {
    pub lambdas: Vec<f64>,
    pub coefs: Vec<CoefMatrix>,
    /// Grid index at which each feature first has a nonzero row.
    pub entry_index: Vec<Option<usize>>,
    /// Coordinate-descent sweeps summed over the grid.
    pub total_sweeps: usize,
}

impl PathResult {
    pub fn entry_lambda(&self, feature: usize) -> Option<f64> {
        self.entry_index[feature].map(|k| self.lambdas[k])
    }

    pub fn active_sets(&self) -> Vec<Vec<usize>> {
        self.coefs.iter().map(CoefMatrix::active_set).collect()
    }

    /// `||W(lambda)||_21 / ||W(lambda_min)||_21` per grid point.
    pub fn normalized_l21(&self) -> Vec<f64> {
        let last = self.coefs.last().map_or(0.0, CoefMatrix::l21_norm);
        self.coefs.iter().map(|c| if last > 0.0 { c.l21_norm() / last } else { 0.0 }).collect()
    }
}

pub fn compute_path(prob: &AugmentedProblem, grid: PathGrid, opts: &SolveOptions) -> Result<PathResult> {
    let lambdas = grid.lambdas(lambda_max(prob))?;
    let p = prob.n_features();
    let mut coefs = Vec::with_capacity(lambdas.len());
    let mut entry_index = vec![None; p];
    let mut total_sweeps = 0;
    let mut warm = opts.warm_start.clone();
    for (k, &lambda) in lambdas.iter().enumerate() {
        let step_opts = SolveOptions { warm_start: warm.take(), ..opts.clone() };
        let sol = solve(prob, lambda, &step_opts).map_err(|e| Error::PathSolve { lambda, source: Box::new(e) })?;
        total_sweeps += sol.sweeps;
        for j in sol.coef.active_set() {
            entry_index[j].get_or_insert(k);
        }
        warm = Some(sol.coef.values().to_owned());
        coefs.push(sol.coef);
    }
    Ok(PathResult { lambdas, coefs, entry_index, total_sweeps })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedFeature {
    pub feature: usize,
    pub entry_lambda: f64,
    /// 1-based tie group; features entering at the same grid point share it.
    pub group: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRanking {
    pub ranked: Vec<RankedFeature>,
}

impl FeatureRanking {
    pub fn order(&self) -> Vec<usize> {
        self.ranked.iter().map(|r| r.feature).collect()
    }

    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = Vec::new();
        for r in &self.ranked {
            if out.len() < r.group {
                out.push(Vec::new());
            }
            out[r.group - 1].push(r.feature);
        }
        out
    }
}

/// Orders the features active at the smallest `lambda` by how early they
/// entered the path. Ties keep ascending feature index.
pub fn rank_features(path: &PathResult) -> Result<FeatureRanking> {
    let last = path.coefs.last().ok_or(Error::NothingToRank)?;
    let mut active: Vec<(usize, usize)> =
        last.active_set().into_iter().filter_map(|j| path.entry_index[j].map(|k| (j, k))).collect();
    if active.is_empty() {
        return Err(Error::NothingToRank);
    }
    active.sort_by_key(|&(j, k)| (k, j));
    let mut group = 0;
    let mut prev = None;
    let ranked = active
        .into_iter()
        .map(|(feature, k)| {
            if prev != Some(k) {
                group += 1;
                prev = Some(k);
            }
            RankedFeature { feature, entry_lambda: path.lambdas[k], group }
        })
        .collect();
    Ok(FeatureRanking { ranked })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    fn orthonormal(corr: &[f64]) -> AugmentedProblem {
        // identity design; the target's rows are the feature correlations
        let p = corr.len();
        let phi = Array2::<f64>::eye(p);
        let y = Array2::from_shape_fn((p, 1), |(i, _)| corr[i]);
        AugmentedProblem::from_design(phi.view(), y.view()).unwrap()
    }

    #[test]
    fn grid_is_geometric_and_descending() {
        let l = PathGrid { count: 4, ratio: 1e-3 }.lambdas(2.0).unwrap();
        assert_eq!(l.len(), 4);
        assert!((l[0] - 2.0).abs() < 1e-15);
        assert!((l[3] - 2e-3).abs() < 1e-15);
        assert!(l.windows(2).all(|w| w[1] < w[0]));
        assert!(PathGrid { count: 1, ratio: 0.1 }.lambdas(1.0).is_err());
        assert!(PathGrid { count: 5, ratio: 1.0 }.lambdas(1.0).is_err());
    }

    #[test]
    fn first_grid_point_is_empty() {
        let prob = orthonormal(&[3.0, -1.0, 0.5]);
        let path = compute_path(&prob, PathGrid::default(), &SolveOptions::default()).unwrap();
        assert!(path.coefs[0].active_set().is_empty());
    }

    #[test]
    fn orthonormal_entries_follow_closed_form() {
        let corr = [3.0, -1.0, 0.5, 2.2];
        let prob = orthonormal(&corr);
        let grid = PathGrid { count: 60, ratio: 1e-2 };
        let path = compute_path(&prob, grid, &SolveOptions::default()).unwrap();
        let step = (1.0 / grid.ratio).powf(1.0 / (grid.count - 1) as f64);
        for (j, c) in corr.iter().enumerate() {
            // enters once lambda drops below 2 |phi_j' y|
            let threshold = 2.0 * c.abs();
            let got = path.entry_lambda(j).unwrap();
            assert!(got < threshold && got * step >= threshold * (1.0 - 1e-12), "{j}: {got} vs {threshold}");
        }
        let sets = path.active_sets();
        for w in sets.windows(2) {
            assert!(w[0].iter().all(|j| w[1].contains(j)));
        }
    }

    #[test]
    fn ranking_orders_by_correlation() {
        let prob = orthonormal(&[1.0, 3.0]);
        let path = compute_path(&prob, PathGrid::default(), &SolveOptions::default()).unwrap();
        let r = rank_features(&path).unwrap();
        assert_eq!(r.order(), vec![1, 0]);
        assert!(r.ranked.windows(2).all(|w| w[0].entry_lambda >= w[1].entry_lambda));
    }

    #[test]
    fn single_feature_ranking() {
        let phi = array![[1.0], [1.0]];
        let y = array![[1.0], [2.0]];
        let prob = AugmentedProblem::from_design(phi.view(), y.view()).unwrap();
        let path = compute_path(&prob, PathGrid::default(), &SolveOptions::default()).unwrap();
        assert_eq!(rank_features(&path).unwrap().order(), vec![0]);
    }

    #[test]
    fn equal_correlations_share_a_group() {
        let prob = orthonormal(&[2.0, 2.0, 0.5]);
        let path = compute_path(&prob, PathGrid::default(), &SolveOptions::default()).unwrap();
        let r = rank_features(&path).unwrap();
        assert_eq!(r.groups(), vec![vec![0, 1], vec![2]]);
    }

    #[test]
    fn zero_target_cannot_build_a_grid() {
        let prob = orthonormal(&[0.0, 0.0]);
        assert!(compute_path(&prob, PathGrid::default(), &SolveOptions::default()).is_err());
    }
}
