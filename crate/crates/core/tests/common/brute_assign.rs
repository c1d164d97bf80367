//! Exhaustive assignment oracle: enumerates every injective matching,
//! keeping the one with the most pairs, then the smallest total cost, then
//! the lexicographically smallest pair list (rows ascending, columns
//! ascending per row).

use asyncmot::assignment::CostMatrix;

pub fn brute_force_min(m: &CostMatrix) -> (Vec<(usize, usize)>, f64) {
    fn recurse(
        m: &CostMatrix,
        row: usize,
        used: &mut Vec<bool>,
        current: &mut Vec<(usize, usize)>,
        best: &mut Option<(usize, f64, Vec<(usize, usize)>)>,
    ) {
        if row == m.rows() {
            let count = current.len();
            let mut total = 0.0;
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
        for c in 0..m.cols() {
            if !used[c] && m.get(row, c).is_some() {
                used[c] = true;
                current.push((row, c));
                recurse(m, row + 1, used, current, best);
                current.pop();
                used[c] = false;
            }
        }
        recurse(m, row + 1, used, current, best);
    }
    let mut best = None;
    recurse(m, 0, &mut vec![false; m.cols()], &mut Vec::new(), &mut best);
    let (_, total, pairs) = best.expect("at least the empty matching exists");
    (pairs, total)
}
