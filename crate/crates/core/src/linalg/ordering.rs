//! Bandwidth-reducing symmetric permutations.

use std::collections::VecDeque;

use crate::model::Position;

/// `perm[new] = old` together with its inverse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    pub perm: Vec<usize>,
    pub inv: Vec<usize>,
}

impl Permutation {
    pub fn from_order(perm: Vec<usize>) -> Self {
        let mut inv = vec![0; perm.len()];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        Self { perm, inv }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_order((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    /// Half-bandwidth of the permuted pattern.
    pub fn bandwidth(&self, pattern: &[Vec<usize>]) -> usize {
        pattern
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |&j| self.inv[i].abs_diff(self.inv[j])))
            .max()
            .unwrap_or(0)
    }
}

/// Reverse Cuthill-McKee ordering, each component started from a
/// pseudo-peripheral node.
pub fn reverse_cuthill_mckee(pattern: &[Vec<usize>]) -> Permutation {
    let n = pattern.len();
    let mut placed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let degree = |i: usize| pattern[i].len();
    for seed in 0..n {
        if placed[seed] {
            continue;
        }
        let start = pseudo_peripheral(pattern, seed);
        let mut queue = VecDeque::from([start]);
        placed[start] = true;
        while let Some(u) = queue.pop_front() {
            order.push(u);
            let mut next: Vec<usize> = pattern[u].iter().copied().filter(|&v| !placed[v]).collect();
            next.sort_by_key(|&v| (degree(v), v));
            for v in next {
                placed[v] = true;
                queue.push_back(v);
            }
        }
    }
    order.reverse();
    Permutation::from_order(order)
}

fn bfs_levels(pattern: &[Vec<usize>], start: usize) -> (usize, usize) {
    let mut dist = vec![usize::MAX; pattern.len()];
    dist[start] = 0;
    let mut queue = VecDeque::from([start]);
    let mut last = start;
    while let Some(u) = queue.pop_front() {
        last = u;
        for &v in &pattern[u] {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    (last, dist[last])
}

fn pseudo_peripheral(pattern: &[Vec<usize>], seed: usize) -> usize {
    let (mut node, mut ecc) = bfs_levels(pattern, seed);
    for _ in 0..4 {
        let (far, e) = bfs_levels(pattern, node);
        if e <= ecc {
            break;
        }
        node = far;
        ecc = e;
    }
    node
}

/// Sort by one coordinate, ties broken by the other.
pub fn coordinate_order(positions: &[Position], by_y: bool) -> Permutation {
    let key = |p: &Position| if by_y { (p.y, p.x) } else { (p.x, p.y) };
    let mut order: Vec<usize> = (0..positions.len()).collect();
    order.sort_by(|&a, &b| {
        key(&positions[a])
            .partial_cmp(&key(&positions[b]))
            .unwrap()
            .then(a.cmp(&b))
    });
    Permutation::from_order(order)
}

/// The candidate with the smallest bandwidth among RCM and, when node
/// coordinates are known, the two coordinate sweeps.
pub fn best_ordering(pattern: &[Vec<usize>], positions: Option<&[Position]>) -> Permutation {
    let mut candidates = vec![reverse_cuthill_mckee(pattern)];
    if let Some(pos) = positions.filter(|p| p.len() == pattern.len()) {
        candidates.push(coordinate_order(pos, true));
        candidates.push(coordinate_order(pos, false));
    }
    candidates
        .into_iter()
        .min_by_key(|p| p.bandwidth(pattern))
        .expect("at least one candidate")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Vec<Vec<usize>> {
        (0..n)
            .map(|i| {
                let mut v = Vec::new();
                if i > 0 {
                    v.push(i - 1);
                }
                if i + 1 < n {
                    v.push(i + 1);
                }
                v
            })
            .collect()
    }

    #[test]
    fn rcm_on_a_scrambled_path_has_unit_bandwidth() {
        let base = path(10);
        let relabel = [3, 7, 1, 9, 0, 5, 2, 8, 6, 4];
        let mut scrambled = vec![Vec::new(); 10];
        for (i, row) in base.iter().enumerate() {
            scrambled[relabel[i]] = row.iter().map(|&j| relabel[j]).collect();
        }
        assert!(Permutation::identity(10).bandwidth(&scrambled) > 1);
        let p = reverse_cuthill_mckee(&scrambled);
        assert_eq!(p.bandwidth(&scrambled), 1);
        let mut sorted = p.perm.clone();
        sorted.sort();
        assert_eq!(sorted, (0..10).collect::<Vec<_>>());
    }
}
