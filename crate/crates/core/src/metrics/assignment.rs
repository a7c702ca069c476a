//! Maximum-overlap one-to-one matching of gold and predicted spans.

use crate::span::MentionSpan;

/// Maximum total weight of a one-to-one matching on a rectangular matrix
/// of non-negative weights, with the column chosen for each row
/// (Hungarian algorithm with potentials).
fn hungarian(w: &[Vec<i64>]) -> (i64, Vec<Option<usize>>) {
    let rows = w.len();
    let cols = w.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return (0, vec![None; rows]);
    }
    let n = rows.max(cols);
    let cost = |i: usize, j: usize| -> i64 {
        if i < rows && j < cols {
            -w[i][j]
        } else {
            0
        }
    };

    // 1-based arrays; p[j] is the row matched to column j.
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![i64::MAX; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = i64::MAX;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_to_col = vec![None; rows];
    let mut total = 0;
    for j in 1..=n {
        let i = p[j];
        if i >= 1 && i <= rows && j <= cols {
            row_to_col[i - 1] = Some(j - 1);
            total += w[i - 1][j - 1];
        }
    }
    (total, row_to_col)
}

fn best_total(w: &[Vec<i64>], rows: &[usize], cols: &[usize]) -> i64 {
    let sub: Vec<Vec<i64>> = rows.iter().map(|&i| cols.iter().map(|&j| w[i][j]).collect()).collect();
    hungarian(&sub).0
}

/// Optimal matching within one group of mutually reachable spans, as
/// `(row, col)` pairs of positive weight. Among optimal matchings the one
/// chosen pairs each row, in order, with the lowest column that still
/// allows an optimum.
fn assign_group(w: &[Vec<i64>], rows: &[usize], cols: &[usize]) -> Vec<(usize, usize)> {
    let target = best_total(w, rows, cols);
    let mut free: Vec<usize> = cols.to_vec();
    let mut fixed = 0;
    let mut out = Vec::new();
    for (k, &i) in rows.iter().enumerate() {
        let rest = &rows[k + 1..];
        let mut chosen = None;
        for (pos, &j) in free.iter().enumerate() {
            if w[i][j] == 0 {
                continue;
            }
            let others: Vec<usize> = free.iter().copied().filter(|&c| c != j).collect();
            if fixed + w[i][j] + best_total(w, rest, &others) == target {
                chosen = Some(pos);
                break;
            }
        }
        if let Some(pos) = chosen {
            let j = free.remove(pos);
            fixed += w[i][j];
            out.push((i, j));
        }
    }
    out
}

/// One-to-one matching of `gold` to `pred` maximizing total character
/// overlap. Pairs that share no characters are never matched. Ties go to
/// the lowest gold index, then the lowest predicted index. Returns
/// `(gold_idx, pred_idx)` pairs sorted by gold index.
pub fn optimal_assignment(gold: &[MentionSpan], pred: &[MentionSpan]) -> Vec<(usize, usize)> {
    let w: Vec<Vec<i64>> =
        gold.iter().map(|g| pred.iter().map(|p| g.intersection(p) as i64).collect()).collect();

    // Split into connected groups of the overlap graph; each is solved alone.
    let (ng, np) = (gold.len(), pred.len());
    let mut group = vec![usize::MAX; ng + np];
    let mut groups = Vec::new();
    for start in 0..ng {
        if group[start] != usize::MAX {
            continue;
        }
        let id = groups.len();
        let (mut rows, mut cols) = (Vec::new(), Vec::new());
        let mut stack = vec![start];
        group[start] = id;
        while let Some(x) = stack.pop() {
            if x < ng {
                rows.push(x);
                for j in 0..np {
                    if w[x][j] > 0 && group[ng + j] == usize::MAX {
                        group[ng + j] = id;
                        stack.push(ng + j);
                    }
                }
            } else {
                cols.push(x - ng);
                for i in 0..ng {
                    if w[i][x - ng] > 0 && group[i] == usize::MAX {
                        group[i] = id;
                        stack.push(i);
                    }
                }
            }
        }
        rows.sort_unstable();
        cols.sort_unstable();
        groups.push((rows, cols));
    }

    let mut out: Vec<(usize, usize)> =
        groups.iter().filter(|(_, c)| !c.is_empty()).flat_map(|(r, c)| assign_group(&w, r, c)).collect();
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(a: usize, b: usize) -> MentionSpan {
        MentionSpan::new(a, b)
    }

    #[test]
    fn single_candidate() {
        assert_eq!(optimal_assignment(&[s(0, 10)], &[s(5, 15)]), vec![(0, 0)]);
    }

    #[test]
    fn tie_goes_to_lowest_gold() {
        assert_eq!(optimal_assignment(&[s(0, 4), s(4, 8)], &[s(2, 6)]), vec![(0, 0)]);
        assert_eq!(optimal_assignment(&[s(2, 6)], &[s(0, 4), s(4, 8)]), vec![(0, 0)]);
    }

    #[test]
    fn empty_sides_and_disjoint_spans() {
        assert!(optimal_assignment(&[], &[s(0, 3)]).is_empty());
        assert!(optimal_assignment(&[s(0, 3)], &[]).is_empty());
        assert!(optimal_assignment(&[s(0, 3)], &[s(3, 5)]).is_empty());
    }

    #[test]
    fn global_optimum_beats_greedy() {
        // Greedy on gold 0 would take pred 0 (overlap 3) and strand gold 1.
        let gold = [s(0, 5), s(5, 8)];
        let pred = [s(2, 7), s(0, 2)];
        let pairs = optimal_assignment(&gold, &pred);
        let total: usize = pairs.iter().map(|&(g, p)| gold[g].intersection(&pred[p])).sum();
        assert_eq!(total, 4);
        assert_eq!(pairs, vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn hungarian_rectangular() {
        let w = vec![vec![1, 9, 0], vec![8, 7, 0]];
        assert_eq!(hungarian(&w), (17, vec![Some(1), Some(0)]));
        let w = vec![vec![3], vec![5], vec![4]];
        assert_eq!(hungarian(&w).0, 5);
    }
}
