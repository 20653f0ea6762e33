//! Maximum bipartite matching for small graphs.
//!
//! Slots hold a handful of terms, so augmenting paths (Kuhn) are plenty.
//! [`lexicographic_max_matching`] additionally picks, among all maximum
//! matchings, the one whose sorted pair list is lexicographically smallest.

/// Size of a maximum matching. `edge(i, j)` tells whether left `i` may pair with right `j`.
pub fn max_matching_size(left: usize, right: usize, edge: impl Fn(usize, usize) -> bool) -> usize {
    let mut g = Kuhn::new(left, right, &edge, &[], &[]);
    g.run()
}

/// Maximum matching as `(left, right)` index pairs, sorted by the caller's key order.
///
/// `key_left`/`key_right` give the sort keys of each side. Pairs are chosen
/// greedily in ascending `(key_left, key_right)` order, keeping a pair only if
/// a maximum matching still exists that contains every pair chosen so far.
pub fn lexicographic_max_matching<K: Ord>(
    key_left: &[K],
    key_right: &[K],
    edge: impl Fn(usize, usize) -> bool,
) -> Vec<(usize, usize)> {
    let (n, m) = (key_left.len(), key_right.len());
    let best = max_matching_size(n, m, &edge);
    let mut candidates: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .filter(|&(i, j)| edge(i, j))
        .collect();
    candidates.sort_by(|&(i1, j1), &(i2, j2)| {
        (&key_left[i1], &key_right[j1]).cmp(&(&key_left[i2], &key_right[j2]))
    });

    let mut used_left = vec![false; n];
    let mut used_right = vec![false; m];
    let mut chosen = Vec::new();
    for (i, j) in candidates {
        if chosen.len() == best {
            break;
        }
        if used_left[i] || used_right[j] {
            continue;
        }
        used_left[i] = true;
        used_right[j] = true;
        let rest = Kuhn::new(n, m, &edge, &used_left, &used_right).run();
        if chosen.len() + 1 + rest == best {
            chosen.push((i, j));
        } else {
            used_left[i] = false;
            used_right[j] = false;
        }
    }
    chosen
}

struct Kuhn<'a, F: Fn(usize, usize) -> bool> {
    left: usize,
    right: usize,
    edge: &'a F,
    blocked_left: &'a [bool],
    blocked_right: &'a [bool],
    owner: Vec<Option<usize>>,
    visited: Vec<bool>,
}

impl<'a, F: Fn(usize, usize) -> bool> Kuhn<'a, F> {
    fn new(left: usize, right: usize, edge: &'a F, blocked_left: &'a [bool], blocked_right: &'a [bool]) -> Self {
        Kuhn {
            left,
            right,
            edge,
            blocked_left,
            blocked_right,
            owner: vec![None; right],
            visited: vec![false; right],
        }
    }

    fn blocked(flags: &[bool], i: usize) -> bool {
        flags.get(i).copied().unwrap_or(false)
    }

    fn augment(&mut self, v: usize) -> bool {
        for to in 0..self.right {
            if self.visited[to] || Self::blocked(self.blocked_right, to) || !(self.edge)(v, to) {
                continue;
            }
            self.visited[to] = true;
            let free = match self.owner[to] {
                None => true,
                Some(other) => self.augment(other),
            };
            if free {
                self.owner[to] = Some(v);
                return true;
            }
        }
        false
    }

    fn run(&mut self) -> usize {
        let mut size = 0;
        for v in 0..self.left {
            if Self::blocked(self.blocked_left, v) {
                continue;
            }
            self.visited.iter_mut().for_each(|x| *x = false);
            if self.augment(v) {
                size += 1;
            }
        }
        size
    }
}
