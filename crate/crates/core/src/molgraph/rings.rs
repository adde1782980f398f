use std::collections::{BTreeSet, VecDeque};

use super::MolGraph;

/// A ring as a closed walk of distinct atoms: starts at its smallest atom
/// index and continues towards the smaller of that atom's two ring neighbours.
pub type Ring = Vec<usize>;

/// `true` for every bond that lies on some cycle (i.e. is not a bridge).
pub fn ring_bonds(g: &MolGraph) -> Vec<bool> {
    let n = g.atom_count();
    let mut in_ring = vec![true; g.bonds().len()];
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut time = 0;
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        // (vertex, bond used to enter it, next neighbour slot)
        let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
        disc[root] = time;
        low[root] = time;
        time += 1;
        while let Some(&mut (v, via, ref mut slot)) = stack.last_mut() {
            if let Some(&(w, k)) = g.neighbors(v).get(*slot) {
                *slot += 1;
                if k == via {
                    continue;
                }
                if disc[w] == usize::MAX {
                    disc[w] = time;
                    low[w] = time;
                    time += 1;
                    stack.push((w, k, 0));
                } else {
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                stack.pop();
                if let Some(&(parent, _, _)) = stack.last() {
                    low[parent] = low[parent].min(low[v]);
                    if low[v] > disc[parent] {
                        in_ring[via] = false;
                    }
                }
            }
        }
    }
    in_ring
}

fn canonical_walk(mut walk: Vec<usize>) -> Ring {
    let pos = walk
        .iter()
        .enumerate()
        .min_by_key(|(_, a)| **a)
        .map_or(0, |(p, _)| p);
    walk.rotate_left(pos);
    if walk.len() > 2 && walk[walk.len() - 1] < walk[1] {
        walk[1..].reverse();
    }
    walk
}

/// Smallest set of smallest rings.
///
/// Candidate cycles are generated Horton-style from shortest-path trees
/// rooted at every ring atom, ordered by size and then by member indices,
/// and accepted greedily while they stay independent over GF(2). The result
/// is sorted by size, then by the canonical walk.
pub fn perceive_rings(g: &MolGraph) -> Vec<Ring> {
    let in_ring = ring_bonds(g);
    let ring_bond_count = in_ring.iter().filter(|r| **r).count();
    if ring_bond_count == 0 {
        return Vec::new();
    }
    let n = g.atom_count();
    let mut core_atoms = BTreeSet::new();
    for (k, b) in g.bonds().iter().enumerate() {
        if in_ring[k] {
            core_atoms.insert(b.a);
            core_atoms.insert(b.b);
        }
    }
    // cyclomatic number of the ring-bond subgraph
    let components = {
        let mut seen = vec![false; n];
        let mut count = 0;
        for &start in &core_atoms {
            if seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                for &(w, k) in g.neighbors(v) {
                    if in_ring[k] && !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        count
    };
    let target = ring_bond_count + components - core_atoms.len();

    let mut candidates: BTreeSet<(usize, Vec<usize>, Ring)> = BTreeSet::new();
    let mut dist = vec![usize::MAX; n];
    let mut parent = vec![usize::MAX; n];
    let mut on_path = vec![false; n];
    for &root in &core_atoms {
        dist.iter_mut().for_each(|d| *d = usize::MAX);
        parent.iter_mut().for_each(|p| *p = usize::MAX);
        dist[root] = 0;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &(w, k) in g.neighbors(v) {
                if in_ring[k] && dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    parent[w] = v;
                    queue.push_back(w);
                }
            }
        }
        let path = |mut v: usize| {
            let mut p = vec![v];
            while v != root {
                v = parent[v];
                p.push(v);
            }
            p.reverse();
            p
        };
        for (k, b) in g.bonds().iter().enumerate() {
            if !in_ring[k] || dist[b.a] == usize::MAX || dist[b.b] == usize::MAX {
                continue;
            }
            if parent[b.a] == b.b || parent[b.b] == b.a {
                continue;
            }
            let px = path(b.a);
            let py = path(b.b);
            for &v in &px[1..] {
                on_path[v] = true;
            }
            let disjoint = py[1..].iter().all(|v| !on_path[*v]);
            for &v in &px[1..] {
                on_path[v] = false;
            }
            if !disjoint {
                continue;
            }
            let mut walk = px;
            walk.extend(py[1..].iter().rev());
            if walk.len() < 3 {
                continue;
            }
            let walk = canonical_walk(walk);
            let mut members = walk.clone();
            members.sort_unstable();
            candidates.insert((walk.len(), members, walk));
        }
    }

    let words = g.bonds().len().div_ceil(64);
    let mut basis: Vec<(usize, Vec<u64>)> = Vec::new();
    let mut rings = Vec::new();
    for (_, _, walk) in candidates {
        if rings.len() == target {
            break;
        }
        let mut bits = vec![0u64; words];
        for i in 0..walk.len() {
            let k = g
                .bond_between(walk[i], walk[(i + 1) % walk.len()])
                .expect("cycle edges exist");
            bits[k / 64] ^= 1 << (k % 64);
        }
        for (pivot, vec) in &basis {
            if bits[pivot / 64] >> (pivot % 64) & 1 == 1 {
                bits.iter_mut().zip(vec).for_each(|(a, b)| *a ^= b);
            }
        }
        let Some(pivot) = bits
            .iter()
            .enumerate()
            .find(|(_, w)| **w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
        else {
            continue;
        };
        for (_, vec) in basis.iter_mut() {
            if vec[pivot / 64] >> (pivot % 64) & 1 == 1 {
                vec.iter_mut().zip(&bits).for_each(|(a, b)| *a ^= b);
            }
        }
        basis.push((pivot, bits));
        rings.push(walk);
    }
    rings.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    rings
}
