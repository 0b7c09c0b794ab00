//! Approximate minimum degree ordering on a quotient graph.
//!
//! Eliminated nodes become elements whose variable lists stand in for the
//! fill clique they would create. Degrees are the usual approximate external
//! degree bound `|A_i| + |L_p \ i| + sum_e |L_e \ L_p|`. Elements that are
//! covered by the newest element are absorbed.

use alloc::vec;
use alloc::vec::Vec;

use super::CscMatrix;

const NONE: usize = usize::MAX;

/// Returns a permutation `perm` such that `perm[k]` is the original index of
/// the node eliminated at step `k`. The pattern is taken from `upper`
/// (either triangle or the full matrix; it is symmetrized).
pub fn minimum_degree_order(upper: &CscMatrix) -> Vec<usize> {
    let n = upper.ncols();
    assert_eq!(upper.nrows(), n, "ordering needs a square pattern");
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, j, _) in upper.triplets() {
        if i != j {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    for a in adj.iter_mut() {
        a.sort_unstable();
        a.dedup();
    }

    let mut elems_of: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut evars: Vec<Vec<usize>> = vec![Vec::new(); n];
    // 0 = variable, 1 = live element, 2 = absorbed
    let mut state = vec![0u8; n];
    let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();

    // Degree buckets as doubly linked lists.
    let mut head = vec![NONE; n + 1];
    let mut next = vec![NONE; n];
    let mut prev = vec![NONE; n];
    let insert = |i: usize, d: usize, head: &mut [usize], next: &mut [usize], prev: &mut [usize]| {
        next[i] = head[d];
        prev[i] = NONE;
        if head[d] != NONE {
            prev[head[d]] = i;
        }
        head[d] = i;
    };
    let remove = |i: usize, d: usize, head: &mut [usize], next: &mut [usize], prev: &mut [usize]| {
        if prev[i] != NONE {
            next[prev[i]] = next[i];
        } else {
            head[d] = next[i];
        }
        if next[i] != NONE {
            prev[next[i]] = prev[i];
        }
    };
    for i in 0..n {
        insert(i, degree[i], &mut head, &mut next, &mut prev);
    }

    let mut mark = vec![0usize; n];
    let mut stamp = 0usize;
    let mut wflag = vec![0usize; n];
    let mut wval = vec![0usize; n];
    let mut perm = Vec::with_capacity(n);
    let mut mindeg = 0usize;
    let mut lp: Vec<usize> = Vec::new();

    for k in 0..n {
        while head[mindeg] == NONE {
            mindeg += 1;
        }
        let p = head[mindeg];
        remove(p, mindeg, &mut head, &mut next, &mut prev);
        perm.push(p);

        // Build the new element L_p.
        stamp += 1;
        mark[p] = stamp;
        lp.clear();
        for &j in &adj[p] {
            if state[j] == 0 && mark[j] != stamp {
                mark[j] = stamp;
                lp.push(j);
            }
        }
        for idx in 0..elems_of[p].len() {
            let e = elems_of[p][idx];
            if state[e] != 1 {
                continue;
            }
            for &j in &evars[e] {
                if state[j] == 0 && mark[j] != stamp {
                    mark[j] = stamp;
                    lp.push(j);
                }
            }
            state[e] = 2;
            evars[e] = Vec::new();
        }
        state[p] = 1;
        adj[p] = Vec::new();
        elems_of[p] = Vec::new();

        // Update adjacency of every variable in L_p.
        for &i in &lp {
            remove(i, degree[i], &mut head, &mut next, &mut prev);
            adj[i].retain(|&j| state[j] == 0 && mark[j] != stamp);
            elems_of[i].retain(|&e| state[e] == 1);
            elems_of[i].push(p);
        }

        // |L_e \ L_p| for elements touching L_p.
        stamp += 1;
        for &i in &lp {
            for &e in &elems_of[i] {
                if e == p {
                    continue;
                }
                if wflag[e] != stamp {
                    wflag[e] = stamp;
                    wval[e] = evars[e].len();
                }
                wval[e] -= 1;
            }
        }
        let remaining = n - k - 1;
        let lp_len = lp.len();
        for &i in &lp {
            let mut d = adj[i].len() + lp_len - 1;
            let mut absorbed_any = false;
            for &e in &elems_of[i] {
                if e == p || state[e] != 1 {
                    continue;
                }
                if wval[e] == 0 {
                    // Entirely inside L_p, so redundant.
                    absorbed_any = true;
                    state[e] = 2;
                    evars[e] = Vec::new();
                } else {
                    d += wval[e];
                }
            }
            if absorbed_any {
                elems_of[i].retain(|&e| state[e] == 1);
            }
            d = d.min(remaining.saturating_sub(1)).min(degree[i] + lp_len - 1);
            degree[i] = d;
            insert(i, d, &mut head, &mut next, &mut prev);
            mindeg = mindeg.min(d);
        }
        evars[p] = core::mem::take(&mut lp);
    }
    perm
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::TripletBuilder;

    fn is_perm(p: &[usize], n: usize) -> bool {
        let mut seen = vec![false; n];
        p.len() == n && p.iter().all(|&i| i < n && !core::mem::replace(&mut seen[i], true))
    }

    #[test]
    fn arrow_matrix_eliminates_hub_last() {
        // Node 0 connects to everything; minimum degree must defer it.
        let n = 6;
        let mut b = TripletBuilder::new(n, n);
        for j in 0..n {
            b.push(j, j, 1.0);
            if j > 0 {
                b.push(0, j, 1.0);
            }
        }
        let p = minimum_degree_order(&b.build());
        assert!(is_perm(&p, n));
        assert!(p[..n - 2].iter().all(|&i| i != 0));
    }

    #[test]
    fn grid_ordering_is_permutation() {
        let side = 12;
        let n = side * side;
        let mut b = TripletBuilder::new(n, n);
        for r in 0..side {
            for c in 0..side {
                let i = r * side + c;
                b.push(i, i, 4.0);
                if c + 1 < side {
                    b.push(i, i + 1, -1.0);
                }
                if r + 1 < side {
                    b.push(i, i + side, -1.0);
                }
            }
        }
        let p = minimum_degree_order(&b.build());
        assert!(is_perm(&p, n));
    }
}
