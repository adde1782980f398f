//! Explicit isomorphism search between two graphs.

use crate::molgraph::{Bond, MolGraph};
use crate::notation::MarkushFeatures;

use super::search::{initial_classes, refine, LabelOptions};

const STEP_BUDGET: usize = 2_000_000;

/// Colours for both graphs computed on their disjoint union, so that equal
/// colours mean the same thing on either side.
pub(crate) fn joint_colors(g1: &MolGraph, g2: &MolGraph, opts: LabelOptions) -> (Vec<u32>, Vec<u32>) {
    let n1 = g1.atom_count();
    let (a1, b1, f1) = g1.clone().into_parts();
    let (a2, b2, f2) = g2.clone().into_parts();
    let mut atoms = a1;
    atoms.extend(a2);
    let mut bonds = b1;
    bonds.extend(b2.into_iter().map(|b| Bond {
        a: b.a + n1,
        b: b.b + n1,
        ..b
    }));
    let shift: Vec<Option<usize>> = (0..g2.atom_count()).map(|i| Some(i + n1)).collect();
    let f2 = f2.remap(&shift);
    let features = MarkushFeatures {
        labels: f1.labels.into_iter().chain(f2.labels).collect(),
        attach_points: f1.attach_points.into_iter().chain(f2.attach_points).collect(),
        m_sections: f1.m_sections.into_iter().chain(f2.m_sections).collect(),
        sg_sections: f1.sg_sections.into_iter().chain(f2.sg_sections).collect(),
    };
    let union = MolGraph::new(atoms, bonds)
        .and_then(|g| g.with_features(features))
        .expect("disjoint union of valid graphs");
    let mut colors = initial_classes(&union, opts, &[]);
    refine(&union, &mut colors);
    let c2 = colors.split_off(n1);
    (colors, c2)
}

/// Whether `map` (g1 atom -> g2 atom) preserves atoms, bonds and bond orders.
pub(crate) fn preserves_structure(g1: &MolGraph, g2: &MolGraph, map: &[usize]) -> bool {
    if g1.atom_count() != g2.atom_count() || g1.bonds().len() != g2.bonds().len() {
        return false;
    }
    let mut seen = vec![false; g2.atom_count()];
    for (v, &w) in map.iter().enumerate() {
        if w >= seen.len() || std::mem::replace(&mut seen[w], true) {
            return false;
        }
        let (a, b) = (g1.atom(v), g2.atom(w));
        if a.element != b.element
            || a.formal_charge != b.formal_charge
            || a.isotope != b.isotope
            || a.aromatic != b.aromatic
            || g1.total_h(v) != g2.total_h(w)
        {
            return false;
        }
    }
    g1.bonds().iter().all(|bond| {
        g2.bond_between(map[bond.a], map[bond.b])
            .is_some_and(|k| g2.bonds()[k].order == bond.order)
    })
}

/// Backtracking search for an isomorphism whose full mapping also passes
/// `accept`. Candidates must share joint colours.
pub(crate) fn find_isomorphism(
    g1: &MolGraph,
    g2: &MolGraph,
    opts: LabelOptions,
    accept: &dyn Fn(&[usize]) -> bool,
) -> Option<Vec<usize>> {
    let n = g1.atom_count();
    if n != g2.atom_count() || g1.bonds().len() != g2.bonds().len() {
        return None;
    }
    if n == 0 {
        return accept(&[]).then(Vec::new);
    }
    let (c1, c2) = joint_colors(g1, g2, opts);
    let mut s1 = c1.clone();
    s1.sort_unstable();
    let mut s2 = c2.clone();
    s2.sort_unstable();
    if s1 != s2 {
        return None;
    }
    // visit g1 atoms so that each (after the first of a component) touches a mapped one
    let mut order = Vec::with_capacity(n);
    let mut placed = vec![false; n];
    let mut starts: Vec<usize> = (0..n).collect();
    starts.sort_by_key(|&v| (c1.iter().filter(|&&c| c == c1[v]).count(), v));
    for s in starts {
        if placed[s] {
            continue;
        }
        placed[s] = true;
        let mut i = order.len();
        order.push(s);
        while i < order.len() {
            let v = order[i];
            i += 1;
            for &(w, _) in g1.neighbors(v) {
                if !placed[w] {
                    placed[w] = true;
                    order.push(w);
                }
            }
        }
    }

    struct State<'a> {
        g1: &'a MolGraph,
        g2: &'a MolGraph,
        c1: &'a [u32],
        c2: &'a [u32],
        order: &'a [usize],
        map: Vec<usize>,
        used: Vec<bool>,
        steps: usize,
    }
    fn extend(st: &mut State, depth: usize, accept: &dyn Fn(&[usize]) -> bool) -> Option<bool> {
        st.steps += 1;
        if st.steps > STEP_BUDGET {
            return None;
        }
        if depth == st.order.len() {
            return Some(accept(&st.map));
        }
        let v = st.order[depth];
        for w in 0..st.g2.atom_count() {
            if st.used[w] || st.c1[v] != st.c2[w] || st.g1.degree(v) != st.g2.degree(w) {
                continue;
            }
            let consistent = st.g1.neighbors(v).iter().all(|&(u, k)| {
                let mu = st.map[u];
                mu == usize::MAX
                    || st
                        .g2
                        .bond_between(w, mu)
                        .is_some_and(|k2| st.g2.bonds()[k2].order == st.g1.bonds()[k].order)
            });
            if !consistent {
                continue;
            }
            st.map[v] = w;
            st.used[w] = true;
            match extend(st, depth + 1, accept) {
                Some(true) => return Some(true),
                None => return None,
                Some(false) => {}
            }
            st.map[v] = usize::MAX;
            st.used[w] = false;
        }
        Some(false)
    }
    let mut st = State {
        g1,
        g2,
        c1: &c1,
        c2: &c2,
        order: &order,
        map: vec![usize::MAX; n],
        used: vec![false; n],
        steps: 0,
    };
    match extend(&mut st, 0, accept) {
        Some(true) => Some(st.map),
        _ => None,
    }
}
