//! Exact solvers for the square linear assignment problem.

use nalgebra::DMatrix;

/// Minimum-cost perfect assignment on a square cost matrix via shortest
/// augmenting paths with dual potentials, O(n^3). Returns the column
/// assigned to each row and the total cost.
pub fn solve_min_cost(cost: &DMatrix<f64>) -> (Vec<usize>, f64) {
    let n = cost.nrows();
    assert_eq!(n, cost.ncols(), "cost matrix must be square");
    if n == 0 {
        return (Vec::new(), 0.0);
    }

    // 1-indexed with a virtual column 0; row_of[j] is the row matched to
    // column j.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut path = vec![0usize; n + 1];

    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0usize;
        let mut min_to = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let reduced = cost[(i0 - 1, j - 1)] - u[i0] - v[j];
                if reduced < min_to[j] {
                    min_to[j] = reduced;
                    path[j] = j0;
                }
                if min_to[j] < delta {
                    delta = min_to[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_to[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        // Augment along the alternating path.
        while j0 != 0 {
            let j1 = path[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
        }
    }

    let mut assigned = vec![0usize; n];
    for j in 1..=n {
        assigned[row_of[j] - 1] = j - 1;
    }
    let total = assigned
        .iter()
        .enumerate()
        .map(|(i, &j)| cost[(i, j)])
        .sum();
    (assigned, total)
}

/// Bottleneck assignment: the smallest value `b` such that a perfect
/// matching exists using only entries `<= b`. Solved by binary search over
/// the distinct costs with an augmenting-path matching test.
pub fn solve_bottleneck(cost: &DMatrix<f64>) -> f64 {
    let n = cost.nrows();
    assert_eq!(n, cost.ncols(), "cost matrix must be square");
    if n == 0 {
        return 0.0;
    }
    let mut values: Vec<f64> = cost.iter().copied().collect();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values.dedup();

    let feasible = |bound: f64| -> bool {
        let mut match_of_col = vec![usize::MAX; n];
        fn try_assign(
            row: usize,
            bound: f64,
            cost: &DMatrix<f64>,
            visited: &mut [bool],
            match_of_col: &mut [usize],
        ) -> bool {
            let n = cost.ncols();
            for col in 0..n {
                if cost[(row, col)] <= bound && !visited[col] {
                    visited[col] = true;
                    if match_of_col[col] == usize::MAX
                        || try_assign(match_of_col[col], bound, cost, visited, match_of_col)
                    {
                        match_of_col[col] = row;
                        return true;
                    }
                }
            }
            false
        }
        for row in 0..n {
            let mut visited = vec![false; n];
            if !try_assign(row, bound, cost, &mut visited, &mut match_of_col) {
                return false;
            }
        }
        true
    };

    let mut lo = 0usize;
    let mut hi = values.len() - 1;
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(values[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    values[lo]
}
