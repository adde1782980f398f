//! Test oracles written independently of the library internals.
#![allow(dead_code)]

use std::path::PathBuf;

use markushkit::metrics::OcrCell;
use markushkit::molgraph::{ring_bonds, BondOrder};
use markushkit::MolGraph;

/// Resolves from either workspace crate, since the acceptance suite in the
/// CLI crate shares this module.
pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data")
}

/// `(fixture name, expected CXSMILES)` rows of `mol/expected.tsv`.
pub fn golden_mol_fixtures() -> Vec<(String, String)> {
    let text = std::fs::read_to_string(data_dir().join("mol").join("expected.tsv")).unwrap();
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let (name, cx) = l.split_once('\t').unwrap();
            (name.to_string(), cx.to_string())
        })
        .collect()
}

/// Backtracking isomorphism test on backbones.
///
/// Atoms must agree on element, charge, total hydrogens and degree. Bond
/// orders are compared only on acyclic bonds: two Kekulé drawings of one
/// aromatic ring differ only in ring bond orders, and once hydrogens are
/// fixed on every atom the ring orders are determined up to such drawings
/// for molecules whose only conjugated cycles are six-membered aromatic
/// rings (the shape produced by the random generator).
pub fn isomorphic(g1: &MolGraph, g2: &MolGraph) -> bool {
    let n = g1.atom_count();
    if n != g2.atom_count() || g1.bonds().len() != g2.bonds().len() {
        return false;
    }
    let sig = |g: &MolGraph, i: usize| {
        let a = g.atom(i);
        (a.element.clone(), a.formal_charge, g.total_h(i), g.degree(i))
    };
    let s1: Vec<_> = (0..n).map(|i| sig(g1, i)).collect();
    let s2: Vec<_> = (0..n).map(|i| sig(g2, i)).collect();
    let mut a = s1.clone();
    let mut b = s2.clone();
    a.sort();
    b.sort();
    if a != b {
        return false;
    }
    let r1 = ring_bonds(g1);
    let r2 = ring_bonds(g2);
    let order_of = |g: &MolGraph, rings: &[bool], k: usize| -> Option<BondOrder> {
        (!rings[k]).then(|| g.bonds()[k].order)
    };

    // visit atoms in BFS order so each new atom has a mapped neighbour
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        order.push(root);
        let mut head = order.len() - 1;
        while head < order.len() {
            let v = order[head];
            head += 1;
            for &(w, _) in g1.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    order.push(w);
                }
            }
        }
    }

    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];

    #[allow(clippy::too_many_arguments)]
    fn extend(
        depth: usize,
        order: &[usize],
        g1: &MolGraph,
        g2: &MolGraph,
        s1: &[(String, i8, u8, usize)],
        s2: &[(String, i8, u8, usize)],
        bond_ok: &dyn Fn(usize, usize) -> bool,
        map: &mut [usize],
        used: &mut [bool],
    ) -> bool {
        if depth == order.len() {
            return true;
        }
        let v = order[depth];
        for c in 0..g2.atom_count() {
            if used[c] || s1[v] != s2[c] {
                continue;
            }
            let consistent = g1.neighbors(v).iter().all(|&(w, k1)| {
                if map[w] == usize::MAX {
                    return true;
                }
                match g2.bond_between(c, map[w]) {
                    Some(k2) => bond_ok(k1, k2),
                    None => false,
                }
            });
            // mapped neighbours of c must be neighbours of v
            let reverse = g2.neighbors(c).iter().all(|&(x, _)| {
                match map.iter().position(|&m| m == x) {
                    Some(w) => g1.bond_between(v, w).is_some(),
                    None => true,
                }
            });
            if !consistent || !reverse {
                continue;
            }
            map[v] = c;
            used[c] = true;
            if extend(depth + 1, order, g1, g2, s1, s2, bond_ok, map, used) {
                return true;
            }
            map[v] = usize::MAX;
            used[c] = false;
        }
        false
    }

    let bond_ok = |k1: usize, k2: usize| {
        r1[k1] == r2[k2] && order_of(g1, &r1, k1) == order_of(g2, &r2, k2)
    };
    extend(0, &order, g1, g2, &s1, &s2, &bond_ok, &mut map, &mut used)
}

fn box_iou(a: [f64; 4], b: [f64; 4]) -> f64 {
    let area = |r: [f64; 4]| (r[2] - r[0]).max(0.0) * (r[3] - r[1]).max(0.0);
    let ix = (a[2].min(b[2]) - a[0].max(b[0])).max(0.0);
    let iy = (a[3].min(b[3]) - a[1].max(b[1])).max(0.0);
    let inter = ix * iy;
    let union = area(a) + area(b) - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

/// Largest number of one-to-one pairs with equal trimmed text and IoU
/// above `threshold`, by trying every assignment.
pub fn exhaustive_matches(pred: &[OcrCell], gt: &[OcrCell], threshold: f64) -> usize {
    fn best(i: usize, pred: &[OcrCell], gt: &[OcrCell], t: f64, used: &mut Vec<bool>) -> usize {
        if i == pred.len() {
            return 0;
        }
        let mut top = best(i + 1, pred, gt, t, used);
        for j in 0..gt.len() {
            let p = &pred[i];
            let g = &gt[j];
            let pb = [p.bbox.x0, p.bbox.y0, p.bbox.x1, p.bbox.y1];
            let gb = [g.bbox.x0, g.bbox.y0, g.bbox.x1, g.bbox.y1];
            if !used[j] && p.text.trim() == g.text.trim() && box_iou(pb, gb) > t {
                used[j] = true;
                top = top.max(1 + best(i + 1, pred, gt, t, used));
                used[j] = false;
            }
        }
        top
    }
    best(0, pred, gt, threshold, &mut vec![false; gt.len()])
}

/// Precision, recall and F1 in percent from match counts; both sides empty
/// scores 100.
pub fn oracle_prf(m: usize, np: usize, ng: usize) -> (f64, f64, f64) {
    if np == 0 && ng == 0 {
        return (100.0, 100.0, 100.0);
    }
    let p = if np == 0 { 0.0 } else { 100.0 * m as f64 / np as f64 };
    let r = if ng == 0 { 0.0 } else { 100.0 * m as f64 / ng as f64 };
    let f = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
    (p, r, f)
}
