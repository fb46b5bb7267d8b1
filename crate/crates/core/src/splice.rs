//! Single-vertex insertions into tight paths and cycles.

use crate::bitset::VertexSet;
use crate::hypergraph::{Hypergraph3, Vertex};

/// Inserts `v` into the tight path `p` (at an end or between two consecutive
/// vertices) so that it stays tight. Returns false if no position works.
pub fn insert_into_path(h: &Hypergraph3, p: &mut Vec<Vertex>, v: Vertex) -> bool {
    let k = p.len();
    if k < 2 {
        return false;
    }
    if h.has_edge(p[k - 2], p[k - 1], v) {
        p.push(v);
        return true;
    }
    if h.has_edge(v, p[0], p[1]) {
        p.insert(0, v);
        return true;
    }
    for i in 0..k - 1 {
        let ok = (i == 0 || h.has_edge(p[i - 1], p[i], v))
            && h.has_edge(p[i], v, p[i + 1])
            && (i + 2 >= k || h.has_edge(v, p[i + 1], p[i + 2]));
        if ok {
            p.insert(i + 1, v);
            return true;
        }
    }
    false
}

/// Inserts `v` between two cyclically consecutive vertices of the tight
/// cycle `c`.
pub fn insert_into_cycle(h: &Hypergraph3, c: &mut Vec<Vertex>, v: Vertex) -> bool {
    let k = c.len();
    if k < 4 {
        return false;
    }
    for i in 0..k {
        let (prev, a, b, next) = (c[(i + k - 1) % k], c[i], c[(i + 1) % k], c[(i + 2) % k]);
        if h.has_edge(prev, a, v) && h.has_edge(a, v, b) && h.has_edge(v, b, next) {
            c.insert(i + 1, v);
            return true;
        }
    }
    false
}

/// Repeatedly appends (then prepends) vertices accepted by `free` while the
/// path can be extended. Returns the added vertices.
pub fn extend_ends(h: &Hypergraph3, p: &mut Vec<Vertex>, free: &mut VertexSet) -> Vec<Vertex> {
    let mut added = Vec::new();
    if p.len() < 2 {
        return added;
    }
    loop {
        let k = p.len();
        let next = h.neighbor_iter(p[k - 2], p[k - 1]).find(|&v| free.contains(v));
        match next {
            Some(v) => {
                free.remove(v);
                p.push(v);
                added.push(v);
            }
            None => break,
        }
    }
    loop {
        let prev = h.neighbor_iter(p[0], p[1]).find(|&v| free.contains(v));
        match prev {
            Some(v) => {
                free.remove(v);
                p.insert(0, v);
                added.push(v);
            }
            None => break,
        }
    }
    added
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::complete;
    use crate::hypergraph::{validate_tight_cycle, validate_tight_path, TightCycle, TightPath};

    #[test]
    fn insertions_keep_tightness() {
        let h = complete(8).unwrap();
        let mut p = vec![1, 2, 3];
        assert!(insert_into_path(&h, &mut p, 4));
        assert!(validate_tight_path(&h, &TightPath::new(p.clone())).unwrap().is_valid());
        let mut c = vec![1, 2, 3, 4];
        assert!(insert_into_cycle(&h, &mut c, 5));
        assert_eq!(c.len(), 5);
        assert!(validate_tight_cycle(&h, &TightCycle::new(c).unwrap())
            .unwrap()
            .is_valid());
    }

    #[test]
    fn interior_insertion_only() {
        let h = Hypergraph3::new(
            7,
            [
                [1, 2, 3],
                [2, 3, 4],
                [3, 4, 5],
                [4, 5, 6],
                [2, 3, 7],
                [3, 4, 7],
                [4, 5, 7],
            ],
        )
        .unwrap();
        let mut p = vec![1, 2, 3, 4, 5, 6];
        assert!(insert_into_path(&h, &mut p, 7));
        assert_eq!(p, vec![1, 2, 3, 7, 4, 5, 6]);
    }

    #[test]
    fn end_extension_uses_free_vertices() {
        let h = complete(7).unwrap();
        let mut p = vec![3, 4];
        let mut free = VertexSet::from_iter_with(7, [1, 6]);
        let added = extend_ends(&h, &mut p, &mut free);
        assert_eq!(added, vec![1, 6]);
        assert_eq!(p.len(), 4);
        assert!(free.is_empty());
    }
}
