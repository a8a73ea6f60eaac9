//! Rank statistics for comparing classifiers across datasets.
//!
//! Classifiers are ranked per dataset (Friedman), compared pairwise with
//! two-sided Wilcoxon signed-rank tests, and grouped into cliques of
//! classifiers with no significant Holm-adjusted pairwise difference.

use statrs::function::erf::erfc;
use statrs::function::gamma::gamma_ur;

use crate::error::{Error, Result};

/// Largest number of non-zero differences handled by the exact null
/// distribution; larger samples use the normal approximation.
pub const EXACT_WILCOXON_MAX: usize = 20;

/// Classifier × dataset accuracies with their per-dataset ranks.
#[derive(Debug, Clone, PartialEq)]
pub struct RankTable {
    /// `accuracy[c][d]` for classifier `c` on dataset `d`.
    pub accuracy: Vec<Vec<f64>>,
    /// Rank 1 is the best; tied classifiers share the mean of their positions.
    pub ranks: Vec<Vec<f64>>,
    pub mean_ranks: Vec<f64>,
}

impl RankTable {
    pub fn classifiers(&self) -> usize {
        self.accuracy.len()
    }

    pub fn datasets(&self) -> usize {
        self.accuracy.first().map_or(0, Vec::len)
    }

    /// Friedman chi-square statistic and its p-value on `c - 1` degrees of
    /// freedom.
    pub fn friedman_test(&self) -> (f64, f64) {
        let k = self.classifiers() as f64;
        let n = self.datasets() as f64;
        let sum_sq: f64 = self.mean_ranks.iter().map(|r| r * r).sum();
        let stat = 12.0 * n / (k * (k + 1.0)) * (sum_sq - k * (k + 1.0) * (k + 1.0) / 4.0);
        let stat = stat.max(0.0);
        let p = if stat == 0.0 {
            1.0
        } else {
            gamma_ur((k - 1.0) / 2.0, stat / 2.0)
        };
        (stat, p)
    }

    /// Classifier indices sorted by mean rank, best first; ties keep input
    /// order.
    pub fn order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.classifiers()).collect();
        order.sort_by(|&a, &b| self.mean_ranks[a].total_cmp(&self.mean_ranks[b]));
        order
    }
}

/// Ranks `values` descending (largest gets rank 1) with average ranks for
/// ties.
fn rank_descending(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    average_ranks(values, &order)
}

/// Assigns 1-based positions along `order`, averaging runs of equal values.
fn average_ranks(values: &[f64], order: &[usize]) -> Vec<f64> {
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // Positions start+1..=end share their mean.
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Per-dataset ranks of a classifier × dataset accuracy grid.
pub fn friedman_ranks(grid: &[Vec<f64>]) -> Result<RankTable> {
    if grid.len() < 2 {
        return Err(Error::invalid_input("ranking needs at least two classifiers"));
    }
    let datasets = grid[0].len();
    if datasets == 0 {
        return Err(Error::invalid_input("ranking needs at least one dataset"));
    }
    for (c, row) in grid.iter().enumerate() {
        if row.len() != datasets {
            return Err(Error::invalid_input(format!(
                "classifier {c} has {} results, expected {datasets}",
                row.len()
            )));
        }
        if let Some(d) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid_input(format!(
                "classifier {c} is missing a result for dataset {d}"
            )));
        }
    }
    let mut ranks = vec![vec![0.0; datasets]; grid.len()];
    for d in 0..datasets {
        let column: Vec<f64> = grid.iter().map(|row| row[d]).collect();
        for (c, r) in rank_descending(&column).into_iter().enumerate() {
            ranks[c][d] = r;
        }
    }
    let mean_ranks = ranks.iter().map(|r| r.iter().sum::<f64>() / datasets as f64).collect();
    Ok(RankTable {
        accuracy: grid.to_vec(),
        ranks,
        mean_ranks,
    })
}

/// Two-sided Wilcoxon signed-rank p-value for paired samples `a` and `b`.
///
/// Zero differences are dropped and tied absolute differences share their
/// average rank. Up to [`EXACT_WILCOXON_MAX`] non-zero differences the null
/// distribution of the positive rank sum is computed exactly over all sign
/// assignments; beyond that a tie-corrected normal approximation is used.
/// If every difference is zero the p-value is 1.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::invalid_input(format!(
            "paired samples of lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::invalid_input("paired samples must be finite"));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    let n = diffs.len();
    if n == 0 {
        return Ok(1.0);
    }
    if n <= EXACT_WILCOXON_MAX {
        Ok(wilcoxon_exact(&diffs))
    } else {
        Ok(wilcoxon_normal(&diffs))
    }
}

fn signed_ranks(diffs: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<usize>) {
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let mut order: Vec<usize> = (0..diffs.len()).collect();
    order.sort_by(|&x, &y| abs[x].total_cmp(&abs[y]));
    let ranks = average_ranks(&abs, &order);
    (abs, ranks, order)
}

fn wilcoxon_exact(diffs: &[f64]) -> f64 {
    let (_, ranks, _) = signed_ranks(diffs);
    // Doubled ranks are integers even with ties.
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let total: usize = doubled.iter().sum();
    let mut counts = vec![0u64; total + 1];
    counts[0] = 1;
    for &r in &doubled {
        for s in (r..=total).rev() {
            counts[s] += counts[s - r];
        }
    }
    let observed: usize = doubled
        .iter()
        .zip(diffs)
        .filter(|(_, d)| **d > 0.0)
        .map(|(r, _)| r)
        .sum();
    let dev = (2 * observed).abs_diff(total);
    let extreme: u64 = counts
        .iter()
        .enumerate()
        .filter(|(s, _)| (2 * s).abs_diff(total) >= dev)
        .map(|(_, c)| c)
        .sum();
    (extreme as f64 / 2f64.powi(diffs.len() as i32)).min(1.0)
}

fn wilcoxon_normal(diffs: &[f64]) -> f64 {
    let (abs, ranks, order) = signed_ranks(diffs);
    let n = diffs.len();
    let nf = n as f64;
    let w_plus: f64 = ranks.iter().zip(diffs).filter(|(_, d)| **d > 0.0).map(|(r, _)| r).sum();
    let mean = nf * (nf + 1.0) / 4.0;
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && abs[order[j]] == abs[order[i]] {
            j += 1;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term / 48.0;
    if var <= 0.0 {
        return 1.0;
    }
    let z = (w_plus - mean) / var.sqrt();
    erfc(z.abs() / std::f64::consts::SQRT_2).min(1.0)
}

/// Holm step-down adjustment of a family of p-values, returned in input
/// order.
pub fn holm_adjust(p: &[f64]) -> Vec<f64> {
    let m = p.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p[a].total_cmp(&p[b]));
    let mut adjusted = vec![0.0; m];
    let mut running = 0.0f64;
    for (step, &i) in order.iter().enumerate() {
        running = running.max(((m - step) as f64 * p[i]).min(1.0));
        adjusted[i] = running;
    }
    adjusted
}

/// Holm-adjusts the upper triangle of a pairwise p-value matrix and returns
/// the symmetric adjusted matrix (diagonal 1).
pub fn holm_adjust_matrix(pairwise_p: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let c = pairwise_p.len();
    let pairs: Vec<(usize, usize)> = (0..c).flat_map(|i| (i + 1..c).map(move |j| (i, j))).collect();
    let raw: Vec<f64> = pairs.iter().map(|&(i, j)| pairwise_p[i][j]).collect();
    let adjusted = holm_adjust(&raw);
    let mut out = vec![vec![1.0; c]; c];
    for (&(i, j), p) in pairs.iter().zip(adjusted) {
        out[i][j] = p;
        out[j][i] = p;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clique {
    pub members: Vec<String>,
}

/// Groups `classifiers`, which must be listed in mean-rank order, into
/// maximal runs of consecutive classifiers whose Holm-adjusted pairwise
/// p-values all reach `alpha`. A classifier significantly different from all
/// of its neighbours forms a singleton clique.
pub fn holm_cliques(classifiers: &[String], pairwise_p: &[Vec<f64>], alpha: f64) -> Vec<Clique> {
    let adjusted = holm_adjust_matrix(pairwise_p);
    let c = classifiers.len();
    let mut spans: Vec<(usize, usize)> = Vec::new();
    for start in 0..c {
        let mut end = start;
        while end + 1 < c && (start..=end).all(|i| adjusted[i][end + 1] >= alpha) {
            end += 1;
        }
        // A span reaching no further than the previous one is contained in it.
        if spans.last().is_none_or(|&(_, prev_end)| end > prev_end) {
            spans.push((start, end));
        }
    }
    spans
        .into_iter()
        .map(|(s, e)| Clique {
            members: classifiers[s..=e].to_vec(),
        })
        .collect()
}

/// Ranks, pairwise tests and cliques for one accuracy grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub names: Vec<String>,
    pub table: RankTable,
    /// Classifier indices by mean rank, best first.
    pub order: Vec<usize>,
    /// Raw pairwise Wilcoxon p-values in `order`.
    pub pairwise_p: Vec<Vec<f64>>,
    pub cliques: Vec<Clique>,
}

pub fn compare(names: &[String], grid: &[Vec<f64>], alpha: f64) -> Result<Comparison> {
    if names.len() != grid.len() {
        return Err(Error::invalid_input(format!(
            "{} names for {} classifiers",
            names.len(),
            grid.len()
        )));
    }
    let table = friedman_ranks(grid)?;
    let order = table.order();
    let c = order.len();
    let mut pairwise_p = vec![vec![1.0; c]; c];
    for i in 0..c {
        for j in i + 1..c {
            let p = wilcoxon_signed_rank(&grid[order[i]], &grid[order[j]])?;
            pairwise_p[i][j] = p;
            pairwise_p[j][i] = p;
        }
    }
    let ordered: Vec<String> = order.iter().map(|&i| names[i].clone()).collect();
    let cliques = holm_cliques(&ordered, &pairwise_p, alpha);
    Ok(Comparison {
        names: names.to_vec(),
        table,
        order,
        pairwise_p,
        cliques,
    })
}
