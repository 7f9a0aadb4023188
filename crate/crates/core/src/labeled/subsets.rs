//! Best-first enumeration of subsets of independent binary choices.
//!
//! Each item `i` is either included with log-weight `ln_in[i]` or excluded with
//! `ln_out[i]`; a subset's log-weight is the sum. Starting from the best subset,
//! every other subset is a set of flips whose cost is `|ln_in − ln_out|`, so the
//! K best subsets are the K smallest flip-cost subset sums, generated exactly by
//! the classic heap walk over costs sorted ascending.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[derive(Debug, Clone, PartialEq)]
pub struct RankedSubset {
    pub log_weight: f64,
    /// Included item indices, ascending.
    pub included: Vec<usize>,
}

#[derive(PartialEq)]
struct State {
    cost: f64,
    flips: Vec<usize>,
}

impl Eq for State {}

impl Ord for State {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on cost, then lexicographic flip positions
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.flips.cmp(&self.flips))
    }
}

impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// The `k` heaviest subsets, in non-increasing weight order.
pub fn k_best_subsets(ln_in: &[f64], ln_out: &[f64], k: usize) -> Vec<RankedSubset> {
    assert_eq!(ln_in.len(), ln_out.len());
    if k == 0 {
        return Vec::new();
    }
    let n = ln_in.len();
    let mut best_in = vec![false; n];
    let mut base = 0.0;
    let mut flippable: Vec<(f64, usize)> = Vec::new();
    for i in 0..n {
        let (a, b) = (ln_in[i], ln_out[i]);
        if a == f64::NEG_INFINITY && b == f64::NEG_INFINITY {
            return Vec::new();
        }
        if a > b {
            best_in[i] = true;
            base += a;
        } else {
            base += b;
        }
        let c = (a - b).abs();
        if c.is_finite() {
            flippable.push((c, i));
        }
    }
    flippable.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));

    let build = |flips: &[usize], cost: f64| -> RankedSubset {
        let mut inc = best_in.clone();
        for &f in flips {
            let item = flippable[f].1;
            inc[item] = !inc[item];
        }
        RankedSubset {
            log_weight: base - cost,
            included: (0..n).filter(|&i| inc[i]).collect(),
        }
    };

    let mut out = vec![build(&[], 0.0)];
    let mut heap = BinaryHeap::new();
    if !flippable.is_empty() {
        heap.push(State {
            cost: flippable[0].0,
            flips: vec![0],
        });
    }
    while out.len() < k {
        let Some(State { cost, flips }) = heap.pop() else {
            break;
        };
        out.push(build(&flips, cost));
        let last = *flips.last().unwrap();
        if last + 1 < flippable.len() {
            let mut add = flips.clone();
            add.push(last + 1);
            heap.push(State {
                cost: cost + flippable[last + 1].0,
                flips: add,
            });
            let mut replace = flips;
            *replace.last_mut().unwrap() = last + 1;
            heap.push(State {
                cost: cost - flippable[last].0 + flippable[last + 1].0,
                flips: replace,
            });
        }
    }
    out
}

/// Existence-probability convenience wrapper: item `i` is present with
/// probability `r[i]`.
pub fn k_best_bernoulli_subsets(r: &[f64], k: usize) -> Vec<RankedSubset> {
    let ln_in: Vec<f64> = r.iter().map(|&x| crate::linalg::ln_clamped(x)).collect();
    let ln_out: Vec<f64> = r.iter().map(|&x| crate::linalg::ln_clamped(1.0 - x)).collect();
    k_best_subsets(&ln_in, &ln_out, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(r: &[f64]) -> Vec<(f64, Vec<usize>)> {
        let n = r.len();
        let mut all = Vec::new();
        for mask in 0u32..(1 << n) {
            let mut w = 1.0;
            let mut inc = Vec::new();
            for (i, ri) in r.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    w *= ri;
                    inc.push(i);
                } else {
                    w *= 1.0 - ri;
                }
            }
            all.push((w, inc));
        }
        all.sort_by(|a, b| b.0.total_cmp(&a.0));
        all
    }

    #[test]
    fn matches_sorted_enumeration() {
        let r = [0.9, 0.2, 0.55, 0.01, 0.7];
        let got = k_best_bernoulli_subsets(&r, 32);
        let want = brute(&r);
        assert_eq!(got.len(), 32);
        for (g, w) in got.iter().zip(&want) {
            assert!((g.log_weight.exp() - w.0).abs() < 1e-14);
        }
        let mut sets: Vec<Vec<usize>> = got.iter().map(|g| g.included.clone()).collect();
        sets.sort();
        sets.dedup();
        assert_eq!(sets.len(), 32);
    }

    #[test]
    fn certain_and_impossible_items_are_fixed() {
        let got = k_best_bernoulli_subsets(&[1.0, 0.0, 0.5], 10);
        assert_eq!(got.len(), 2);
        for g in &got {
            assert!(g.included.contains(&0));
            assert!(!g.included.contains(&1));
        }
    }
}
