//! Linear assignment: Hungarian solver and Murty's K-best enumeration.
//!
//! Costs are minimized. `f64::INFINITY` marks a forbidden cell.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::DMatrix;

/// A full row assignment: `cols[r]` is the column taken by row `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub cols: Vec<usize>,
    pub cost: f64,
}

/// Minimum-cost assignment of every row to a distinct column (`rows ≤ cols`).
///
/// Returns `None` when no assignment avoids forbidden cells.
pub fn hungarian(cost: &DMatrix<f64>) -> Option<Assignment> {
    let n = cost.nrows();
    let m = cost.ncols();
    assert!(n <= m, "hungarian needs rows <= cols ({n} > {m})");
    if n == 0 {
        return Some(Assignment {
            cols: Vec::new(),
            cost: 0.0,
        });
    }
    // Potentials formulation, 1-based with a virtual column 0.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost[(i0 - 1, j - 1)] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            if !delta.is_finite() {
                return None;
            }
            for j in 0..=m {
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
    let mut cols = vec![0; n];
    for j in 1..=m {
        if p[j] != 0 {
            cols[p[j] - 1] = j - 1;
        }
    }
    let total = cols.iter().enumerate().map(|(r, &c)| cost[(r, c)]).sum();
    Some(Assignment { cols, cost: total })
}

struct Node {
    sol: Assignment,
    forced: Vec<Option<usize>>,
    forbidden: Vec<(usize, usize)>,
}

fn cmp_solutions(a: &Assignment, b: &Assignment) -> Ordering {
    a.cost.total_cmp(&b.cost).then_with(|| a.cols.cmp(&b.cols))
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        cmp_solutions(&self.sol, &other.sol) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // Reversed: BinaryHeap is a max-heap.
    fn cmp(&self, other: &Self) -> Ordering {
        cmp_solutions(&other.sol, &self.sol)
    }
}

fn solve_constrained(
    cost: &DMatrix<f64>,
    forced: &[Option<usize>],
    forbidden: &[(usize, usize)],
) -> Option<Assignment> {
    let mut c = cost.clone();
    for (r, f) in forced.iter().enumerate() {
        if let Some(col) = *f {
            for j in 0..c.ncols() {
                if j != col {
                    c[(r, j)] = f64::INFINITY;
                }
            }
            for i in 0..c.nrows() {
                if i != r {
                    c[(i, col)] = f64::INFINITY;
                }
            }
        }
    }
    for &(r, col) in forbidden {
        c[(r, col)] = f64::INFINITY;
    }
    let mut sol = hungarian(&c)?;
    sol.cost = sol.cols.iter().enumerate().map(|(r, &col)| cost[(r, col)]).sum();
    Some(sol)
}

/// The `k` cheapest distinct assignments, ascending by cost with ties ordered
/// lexicographically on the column vector. Fewer are returned when fewer exist.
pub fn murty_k_best(cost: &DMatrix<f64>, k: usize) -> Vec<Assignment> {
    let n = cost.nrows();
    let mut out = Vec::new();
    if k == 0 {
        return out;
    }
    let Some(best) = hungarian(cost) else {
        return out;
    };
    let mut heap = BinaryHeap::new();
    heap.push(Node {
        sol: best,
        forced: vec![None; n],
        forbidden: Vec::new(),
    });
    while let Some(node) = heap.pop() {
        let Node {
            sol,
            forced,
            forbidden,
        } = node;
        if out.len() + 1 < k {
            // Partition the remaining solution space of this node.
            let mut child_forced = forced.clone();
            for r in 0..n {
                if forced[r].is_none() {
                    let mut child_forbidden = forbidden.clone();
                    child_forbidden.push((r, sol.cols[r]));
                    if let Some(s) = solve_constrained(cost, &child_forced, &child_forbidden) {
                        heap.push(Node {
                            sol: s,
                            forced: child_forced.clone(),
                            forbidden: child_forbidden,
                        });
                    }
                }
                child_forced[r] = Some(sol.cols[r]);
            }
        }
        out.push(sol);
        if out.len() == k {
            break;
        }
    }
    // Equal-cost solutions can surface from different partitions out of order.
    out.sort_by(cmp_solutions);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force(cost: &DMatrix<f64>) -> Vec<Assignment> {
        fn rec(cost: &DMatrix<f64>, r: usize, used: &mut Vec<bool>, cur: &mut Vec<usize>, out: &mut Vec<Assignment>) {
            if r == cost.nrows() {
                let c: f64 = cur.iter().enumerate().map(|(i, &j)| cost[(i, j)]).sum();
                if c.is_finite() {
                    out.push(Assignment {
                        cols: cur.clone(),
                        cost: c,
                    });
                }
                return;
            }
            for j in 0..cost.ncols() {
                if !used[j] {
                    used[j] = true;
                    cur.push(j);
                    rec(cost, r + 1, used, cur, out);
                    cur.pop();
                    used[j] = false;
                }
            }
        }
        let mut out = Vec::new();
        rec(cost, 0, &mut vec![false; cost.ncols()], &mut Vec::new(), &mut out);
        out.sort_by(cmp_solutions);
        out
    }

    fn lcg(seed: &mut u64) -> f64 {
        *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (*seed >> 11) as f64 / (1u64 << 53) as f64
    }

    #[test]
    fn hungarian_small() {
        let c = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 3.0, 2.0, 0.0, 5.0, 3.0, 2.0, 2.0]);
        let a = hungarian(&c).unwrap();
        assert_eq!(a.cost, 5.0);
        assert_eq!(a.cols, vec![1, 0, 2]);
    }

    #[test]
    fn hungarian_infeasible() {
        let inf = f64::INFINITY;
        let c = DMatrix::from_row_slice(2, 2, &[1.0, inf, 2.0, inf]);
        assert!(hungarian(&c).is_none());
    }

    #[test]
    fn murty_matches_brute_force() {
        let mut seed = 7;
        for trial in 0..40 {
            let n = 1 + trial % 3;
            let m = n + trial % 4;
            let mut c = DMatrix::from_fn(n, m, |_, _| (lcg(&mut seed) * 10.0).round());
            if trial % 5 == 0 {
                c[(0, 0)] = f64::INFINITY;
            }
            let all = brute_force(&c);
            for k in [1, 3, 10, all.len() + 2] {
                let got = murty_k_best(&c, k);
                assert_eq!(got.len(), k.min(all.len()));
                for (g, w) in got.iter().zip(&all) {
                    assert_eq!(g.cost, w.cost);
                }
                if k >= all.len() {
                    assert_eq!(got, all);
                }
            }
        }
    }

    #[test]
    fn all_equal_ties_are_lexicographic() {
        let c = DMatrix::from_element(2, 3, 1.0);
        let got = murty_k_best(&c, 100);
        let cols: Vec<_> = got.iter().map(|a| a.cols.clone()).collect();
        assert_eq!(
            cols,
            vec![vec![0, 1], vec![0, 2], vec![1, 0], vec![1, 2], vec![2, 0], vec![2, 1]]
        );
    }
}
