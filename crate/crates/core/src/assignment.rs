//! Cost-matrix construction and optimal bipartite assignment with gating.
//!
//! Similarity metrics (higher = better) are converted by callers into costs
//! (lower = better) before solving; gates are expressed in cost space.

use crate::scalar::Real;

/// Dense cost matrix with a validity mask. `None` entries are gated out and
/// can never produce a retained match.
#[derive(Debug, Clone)]
pub struct CostMatrix<S = f64> {
    rows: usize,
    cols: usize,
    entries: Vec<Option<S>>,
}

impl<S: Real> CostMatrix<S> {
    pub fn new(rows: usize, cols: usize) -> Self {
        CostMatrix { rows, cols, entries: vec![None; rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Option<S>) -> Self {
        let mut m = CostMatrix::new(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.entries[r * cols + c] = f(r, c);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn set(&mut self, row: usize, col: usize, cost: S) {
        debug_assert!(cost.is_finite(), "costs on valid entries must be finite");
        self.entries[row * self.cols + col] = Some(cost);
    }

    pub fn get(&self, row: usize, col: usize) -> Option<S> {
        self.entries[row * self.cols + col]
    }
}

/// A retained match produced by [`solve_assignment`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchedPair<S = f64> {
    pub row: usize,
    pub col: usize,
    pub cost: S,
}

/// Result of one assignment solve: every row and column appears exactly once
/// across the three sets.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment<S = f64> {
    pub pairs: Vec<MatchedPair<S>>,
    pub unmatched_rows: Vec<usize>,
    pub unmatched_cols: Vec<usize>,
    /// Sum of retained pair costs, accumulated in row order.
    pub total_cost: S,
}

/// Exact candidate score used during tie-breaking: number of padded/invalid
/// slots consumed, then the sum of real costs (accumulated in a fixed order
/// so float comparisons are reproducible).
#[derive(Debug, Clone, Copy, PartialEq)]
struct Score<S> {
    bigs: usize,
    real: S,
}

impl<S: Real> Score<S> {
    fn better_than(&self, other: &Score<S>) -> bool {
        self.bigs < other.bigs || (self.bigs == other.bigs && self.real < other.real)
    }
}

struct Padded<S> {
    rows: usize,
    cols: usize,
    n: usize,
    big: S,
    cost: Vec<S>,
}

impl<S: Real> Padded<S> {
    fn new(m: &CostMatrix<S>) -> Self {
        let n = m.rows.max(m.cols);
        let mut max_abs = S::zero();
        for e in m.entries.iter().flatten() {
            max_abs = max_abs.max(e.abs());
        }
        // Large enough that avoiding an invalid/pad slot always wins, small
        // enough that potentials keep adequate float precision.
        let big = (max_abs + S::one()) * crate::scalar::real::<S>((n + 1) as f64);
        let mut cost = vec![big; n * n];
        for r in 0..m.rows {
            for c in 0..m.cols {
                if let Some(v) = m.entries[r * m.cols + c] {
                    cost[r * n + c] = v;
                }
            }
        }
        Padded { rows: m.rows, cols: m.cols, n, big, cost }
    }

    fn at(&self, r: usize, c: usize) -> S {
        self.cost[r * self.n + c]
    }

    fn is_real(&self, r: usize, c: usize) -> bool {
        r < self.rows && c < self.cols && self.at(r, c) < self.big
    }

    /// Exact score of assigning `row_ids[i] -> col_ids[assign[i]]`.
    fn score_assignment(&self, row_ids: &[usize], col_ids: &[usize], assign: &[usize]) -> Score<S> {
        let mut score = Score { bigs: 0, real: S::zero() };
        for (i, &j) in assign.iter().enumerate() {
            if i >= row_ids.len() {
                continue; // pad row
            }
            let r = row_ids[i];
            if j < col_ids.len() && self.is_real(r, col_ids[j]) {
                score.real += self.at(r, col_ids[j]);
            } else {
                score.bigs += 1;
            }
        }
        score
    }

    /// Optimal completion score for the subproblem spanned by `row_ids` and
    /// `col_ids` (padded internally to a square problem).
    fn best_completion(&self, row_ids: &[usize], col_ids: &[usize]) -> Score<S> {
        if row_ids.is_empty() {
            return Score { bigs: 0, real: S::zero() };
        }
        let k = row_ids.len().max(col_ids.len());
        let assign = hungarian_square(k, |i, j| {
            if i < row_ids.len() && j < col_ids.len() {
                self.at(row_ids[i], col_ids[j])
            } else {
                self.big
            }
        });
        self.score_assignment(row_ids, col_ids, &assign)
    }
}

/// Minimum-cost square assignment via shortest augmenting paths with
/// potentials; returns the column assigned to each row.
fn hungarian_square<S: Real>(n: usize, cost: impl Fn(usize, usize) -> S) -> Vec<usize> {
    let inf = S::infinity();
    let mut u = vec![S::zero(); n + 1];
    let mut v = vec![S::zero(); n + 1];
    let mut col_row = vec![0usize; n + 1]; // 1-based row occupying column j; 0 = free
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        col_row[0] = i;
        let mut j0 = 0usize;
        let mut min_reduced = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = col_row[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < min_reduced[j] {
                    min_reduced[j] = cur;
                    way[j] = j0;
                }
                if min_reduced[j] < delta {
                    delta = min_reduced[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[col_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_reduced[j] -= delta;
                }
            }
            j0 = j1;
            if col_row[j0] == 0 {
                break;
            }
        }
        // Unwind the augmenting path.
        while j0 != 0 {
            let j1 = way[j0];
            col_row[j0] = col_row[j1];
            j0 = j1;
        }
    }
    let mut row_col = vec![0usize; n];
    for j in 1..=n {
        if col_row[j] != 0 {
            row_col[col_row[j] - 1] = j - 1;
        }
    }
    row_col
}

/// Solves the gated minimum-cost one-to-one assignment.
///
/// Among equal-cost optima the result is the lexicographically smallest:
/// rows are scanned in order and each takes the lowest column index that
/// still permits an optimal completion. Retained pairs satisfy
/// `cost <= gate`; assigned pairs beyond the gate (or on invalid entries)
/// are demoted to unmatched.
pub fn solve_assignment<S: Real>(costs: &CostMatrix<S>, gate: S) -> Assignment<S> {
    debug_assert!(gate.is_finite(), "gate must be finite");
    let rows = costs.rows;
    let cols = costs.cols;
    if rows == 0 || cols == 0 {
        return Assignment {
            pairs: Vec::new(),
            unmatched_rows: (0..rows).collect(),
            unmatched_cols: (0..cols).collect(),
            total_cost: S::zero(),
        };
    }

    let padded = Padded::new(costs);
    let mut available: Vec<usize> = (0..cols).collect();
    let mut chosen: Vec<Option<usize>> = Vec::with_capacity(rows);

    for r in 0..rows {
        let remaining_rows: Vec<usize> = (r + 1..rows).collect();
        let mut best: Option<(Option<usize>, Score<S>)> = None;
        // Real columns in ascending order, then the "unmatched" option.
        let mut candidates: Vec<Option<usize>> = available.iter().copied().map(Some).collect();
        candidates.push(None);
        for cand in candidates {
            let mut score = Score { bigs: 0, real: S::zero() };
            match cand {
                Some(c) if padded.is_real(r, c) => score.real += padded.at(r, c),
                _ => score.bigs += 1,
            }
            let rest_cols: Vec<usize> = match cand {
                Some(c) => available.iter().copied().filter(|&x| x != c).collect(),
                None => available.clone(),
            };
            let completion = padded.best_completion(&remaining_rows, &rest_cols);
            score.bigs += completion.bigs;
            score.real += completion.real;
            let better = match &best {
                Some((_, cur)) => score.better_than(cur),
                None => true,
            };
            if better {
                best = Some((cand, score));
            }
        }
        let (cand, _) = best.expect("at least the unmatched candidate exists");
        if let Some(c) = cand {
            available.retain(|&x| x != c);
        }
        chosen.push(cand);
    }

    let mut pairs = Vec::new();
    let mut unmatched_rows = Vec::new();
    let mut unmatched_cols = Vec::new();
    let mut total = S::zero();
    for (r, cand) in chosen.iter().enumerate() {
        match cand {
            Some(c) => match costs.get(r, *c) {
                Some(cost) if cost <= gate => {
                    total += cost;
                    pairs.push(MatchedPair { row: r, col: *c, cost });
                }
                _ => {
                    unmatched_rows.push(r);
                    unmatched_cols.push(*c);
                }
            },
            None => unmatched_rows.push(r),
        }
    }
    unmatched_cols.extend(available);
    unmatched_cols.sort_unstable();

    Assignment { pairs, unmatched_rows, unmatched_cols, total_cost: total }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Brute-force oracle: minimum total cost over all max-cardinality
    /// injective assignments of valid entries, lexicographically smallest
    /// first. Only used to cross-check the solver.
    pub(crate) fn brute_force<S: Real>(m: &CostMatrix<S>) -> (Vec<(usize, usize)>, S) {
        fn recurse<S: Real>(
            m: &CostMatrix<S>,
            row: usize,
            used: &mut Vec<bool>,
            current: &mut Vec<(usize, usize)>,
            best: &mut Option<(usize, S, Vec<(usize, usize)>)>,
        ) {
            if row == m.rows() {
                let count = current.len();
                let mut total = S::zero();
                for &(r, c) in current.iter() {
                    total += m.get(r, c).unwrap();
                }
                let better = match best {
                    Some((bc, bt, _)) => count > *bc || (count == *bc && total < *bt),
                    None => true,
                };
                if better {
                    *best = Some((count, total, current.clone()));
                }
                return;
            }
            // Candidates in ascending column order, then "skip"; keeping the
            // first best makes the oracle lexicographic too.
            for c in 0..m.cols() {
                if !used[c] {
                    if m.get(row, c).is_some() {
                        used[c] = true;
                        current.push((row, c));
                        recurse(m, row + 1, used, current, best);
                        current.pop();
                        used[c] = false;
                    }
                }
            }
            recurse(m, row + 1, used, current, best);
        }
        let mut best = None;
        recurse(m, 0, &mut vec![false; m.cols()], &mut Vec::new(), &mut best);
        let (_, total, pairs) = best.unwrap();
        (pairs, total)
    }

    #[test]
    fn two_by_two_prefers_diagonal() {
        let m = CostMatrix::from_fn(2, 2, |r, c| {
            Some([[1.0, 2.0], [2.0, 1.0]][r][c])
        });
        let a = solve_assignment(&m, 10.0);
        assert_eq!(
            a.pairs.iter().map(|p| (p.row, p.col)).collect::<Vec<_>>(),
            vec![(0, 0), (1, 1)]
        );
        assert_eq!(a.total_cost, 2.0);
        assert!(a.unmatched_rows.is_empty());
        assert!(a.unmatched_cols.is_empty());
    }

    #[test]
    fn tight_gate_demotes_everything() {
        let m = CostMatrix::from_fn(2, 2, |r, c| {
            Some([[1.0, 2.0], [2.0, 1.0]][r][c])
        });
        let a = solve_assignment(&m, 0.5);
        assert!(a.pairs.is_empty());
        assert_eq!(a.unmatched_rows, vec![0, 1]);
        assert_eq!(a.unmatched_cols, vec![0, 1]);
    }

    #[test]
    fn empty_column_side_leaves_rows_unmatched() {
        let m = CostMatrix::<f64>::new(1, 0);
        let a = solve_assignment(&m, 1.0);
        assert!(a.pairs.is_empty());
        assert_eq!(a.unmatched_rows, vec![0]);
        assert!(a.unmatched_cols.is_empty());
    }

    #[test]
    fn equal_costs_break_ties_lexicographically() {
        let m = CostMatrix::from_fn(2, 2, |_, _| Some(1.0));
        let a = solve_assignment(&m, 10.0);
        assert_eq!(
            a.pairs.iter().map(|p| (p.row, p.col)).collect::<Vec<_>>(),
            vec![(0, 0), (1, 1)]
        );

        // Rectangular with ties: row 0 takes the lowest column.
        let m = CostMatrix::from_fn(1, 3, |_, _| Some(2.0));
        let a = solve_assignment(&m, 10.0);
        assert_eq!(a.pairs[0].col, 0);
        assert_eq!(a.unmatched_cols, vec![1, 2]);
    }

    #[test]
    fn invalid_entries_never_match() {
        // Row 1 has no valid entry at all.
        let m = CostMatrix::from_fn(2, 2, |r, c| {
            if r == 1 { None } else { Some([0.3, 0.1][c]) }
        });
        let a = solve_assignment(&m, 1.0);
        assert_eq!(
            a.pairs.iter().map(|p| (p.row, p.col)).collect::<Vec<_>>(),
            vec![(0, 1)]
        );
        assert_eq!(a.unmatched_rows, vec![1]);
        assert_eq!(a.unmatched_cols, vec![0]);
    }

    #[test]
    fn matches_brute_force_on_rectangular_fixture() {
        let data = [
            [8.0, 5.0, 9.0, 2.0],
            [4.0, 2.0, 4.0, 9.0],
            [7.0, 3.0, 8.0, 1.0],
        ];
        let m = CostMatrix::from_fn(3, 4, |r, c| Some(data[r][c]));
        let a = solve_assignment(&m, 100.0);
        let (pairs, total) = brute_force(&m);
        assert_eq!(a.total_cost, total);
        assert_eq!(a.pairs.iter().map(|p| (p.row, p.col)).collect::<Vec<_>>(), pairs);
    }

    proptest! {
        #[test]
        fn partition_property_holds(
            rows in 0usize..6, cols in 0usize..6, seed in 0u64..1000,
            gate in 0.0..2.0f64,
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let m = CostMatrix::from_fn(rows, cols, |_, _| {
                if rng.gen_bool(0.85) { Some(rng.gen_range(0.0..2.0)) } else { None }
            });
            let a = solve_assignment(&m, gate);
            prop_assert_eq!(a.pairs.len() + a.unmatched_rows.len(), rows);
            prop_assert_eq!(a.pairs.len() + a.unmatched_cols.len(), cols);
            // Each row/col appears exactly once across the outputs.
            let mut seen_rows: Vec<usize> = a.pairs.iter().map(|p| p.row)
                .chain(a.unmatched_rows.iter().copied()).collect();
            seen_rows.sort_unstable();
            prop_assert_eq!(seen_rows, (0..rows).collect::<Vec<_>>());
            let mut seen_cols: Vec<usize> = a.pairs.iter().map(|p| p.col)
                .chain(a.unmatched_cols.iter().copied()).collect();
            seen_cols.sort_unstable();
            prop_assert_eq!(seen_cols, (0..cols).collect::<Vec<_>>());
            // Every retained pair respects the gate.
            for p in &a.pairs {
                prop_assert!(p.cost <= gate);
            }
        }

        #[test]
        fn gate_loosening_never_reduces_matches(
            rows in 1usize..6, cols in 1usize..6, seed in 0u64..1000,
            g1 in 0.0..2.0f64, g2 in 0.0..2.0f64,
        ) {
            use rand::{Rng, SeedableRng};
            let (lo, hi) = if g1 <= g2 { (g1, g2) } else { (g2, g1) };
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let m = CostMatrix::from_fn(rows, cols, |_, _| Some(rng.gen_range(0.0..2.0)));
            let tight = solve_assignment(&m, lo);
            let loose = solve_assignment(&m, hi);
            prop_assert!(loose.pairs.len() >= tight.pairs.len());
        }

        #[test]
        fn optimal_total_matches_brute_force(
            rows in 1usize..6, cols in 1usize..6, seed in 0u64..500,
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let m = CostMatrix::from_fn(rows, cols, |_, _| Some(rng.gen_range(0.0..1.0)));
            let a = solve_assignment(&m, f64::MAX / 4.0);
            let (_, total) = brute_force(&m);
            prop_assert_eq!(a.total_cost, total);
        }
    }

    #[test]
    fn solver_is_scalar_generic() {
        let m = CostMatrix::<f32>::from_fn(2, 2, |r, c| Some([[1.0f32, 2.0], [2.0, 1.0]][r][c]));
        let a = solve_assignment(&m, 10.0f32);
        assert_eq!(a.total_cost, 2.0f32);
    }
}
