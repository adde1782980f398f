//! Hydrogen folding, kekulization and Hückel aromaticity.
//!
//! Electron counts depend only on which atoms carry an in-ring double bond,
//! never on where a particular Kekulé structure put it, so aromatic and
//! kekulized spellings of the same molecule normalize identically.

use std::collections::BTreeSet;

use crate::molgraph::{
    elements, perceive_rings, permutation_is_odd, ring_bonds, Atom, Bond, BondOrder, MolGraph,
    StereoRef,
};

pub(crate) struct Normalized {
    pub graph: MolGraph,
    /// input atom -> normalized atom; folded hydrogens map to `None`.
    pub map: Vec<Option<usize>>,
    pub warnings: Vec<String>,
}

const KEKULE_BUDGET: usize = 200_000;

pub(crate) fn normalize(g: &MolGraph) -> Normalized {
    let mut warnings = Vec::new();
    let (g, map) = fold_hydrogens(g);
    let g = freeze_hydrogens(&g);
    let g = aromatize(&g, &mut warnings);
    Normalized {
        graph: g,
        map,
        warnings,
    }
}

fn feature_atoms(g: &MolGraph) -> BTreeSet<usize> {
    let f = g.features();
    let mut s: BTreeSet<usize> = f.labels.keys().copied().collect();
    s.extend(f.attach_points.iter().copied());
    for m in &f.m_sections {
        s.insert(m.attachment);
        s.extend(m.candidates.iter().copied());
    }
    for sg in &f.sg_sections {
        s.extend(sg.atoms.iter().copied());
    }
    s
}

/// Fold plain `[H]` atoms into their neighbour's hydrogen count.
fn fold_hydrogens(g: &MolGraph) -> (MolGraph, Vec<Option<usize>>) {
    let protected = feature_atoms(g);
    let foldable: BTreeSet<usize> = (0..g.atom_count())
        .filter(|&i| {
            let a = g.atom(i);
            a.element == "H"
                && a.isotope.is_none()
                && a.formal_charge == 0
                && a.explicit_h.unwrap_or(0) == 0
                && g.degree(i) == 1
                && !protected.contains(&i)
                && {
                    let (p, k) = g.neighbors(i)[0];
                    g.atom(p).element != "H" && g.bonds()[k].order == BondOrder::Single
                }
        })
        .collect();
    if foldable.is_empty() {
        return (g.clone(), (0..g.atom_count()).map(Some).collect());
    }
    let mut extra = vec![0u8; g.atom_count()];
    for &h in &foldable {
        extra[g.neighbors(h)[0].0] += 1;
    }
    let (reduced, map) = g.without_atoms(&foldable);
    let (mut atoms, bonds, features) = reduced.into_parts();
    for old in 0..g.atom_count() {
        let Some(new) = map[old] else { continue };
        if extra[old] == 0 {
            continue;
        }
        let total = g.total_h(old).saturating_add(extra[old]);
        atoms[new].explicit_h = Some(total);
        atoms[new].stereo = None;
        if let Some(mark) = g.atom(old).stereo {
            if total <= 1 {
                let before: Vec<StereoRef> = g
                    .stereo_reference(old)
                    .into_iter()
                    .map(|r| match r {
                        StereoRef::Atom(a) if foldable.contains(&a) => StereoRef::ImplicitH,
                        StereoRef::Atom(a) => StereoRef::Atom(map[a].unwrap()),
                        h => h,
                    })
                    .collect();
                let mut after = before.clone();
                after.sort_by_key(|r| match r {
                    StereoRef::ImplicitH => (0, 0),
                    StereoRef::Atom(a) => (1, *a),
                });
                atoms[new].stereo = Some(mark.flipped_if(permutation_is_odd(&before, &after)));
            }
        }
    }
    let out = MolGraph::new(atoms, bonds)
        .and_then(|m| m.with_features(features))
        .expect("folding keeps the graph valid");
    (out, map)
}

fn freeze_hydrogens(g: &MolGraph) -> MolGraph {
    let (mut atoms, bonds, features) = g.clone().into_parts();
    for (i, a) in atoms.iter_mut().enumerate() {
        if !a.is_pseudo() {
            a.explicit_h = Some(g.total_h(i));
        }
    }
    rebuild(atoms, bonds, features)
}

fn rebuild(
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    features: crate::notation::MarkushFeatures,
) -> MolGraph {
    MolGraph::new(atoms, bonds)
        .and_then(|m| m.with_features(features))
        .expect("normalization keeps the graph valid")
}

/// Whether atom `v` has a free valence that an aromatic bond must supply.
fn needs_pi(g: &MolGraph, v: usize) -> bool {
    let a = g.atom(v);
    let Some(z) = a.atomic_number() else {
        return false;
    };
    let Some(valences) = elements::default_valences(z, a.formal_charge) else {
        return false;
    };
    let sum: u32 = g
        .neighbors(v)
        .iter()
        .map(|&(_, k)| g.bonds()[k].order.valence() as u32)
        .sum::<u32>()
        + a.explicit_h.unwrap_or(0) as u32;
    valences
        .iter()
        .find(|&&val| val as u32 >= sum)
        .is_some_and(|&val| val as u32 > sum)
}

/// Pick double bonds for the aromatic bonds of one component. Returns the
/// bonds to make double, or `None` when no Kekulé structure exists.
fn kekulize_component(
    g: &MolGraph,
    need: &[bool],
    aromatic_ring_bond: &[bool],
    atoms: &[usize],
) -> Option<Vec<usize>> {
    let targets: Vec<usize> = atoms.iter().copied().filter(|&v| need[v]).collect();
    if targets.is_empty() {
        return Some(Vec::new());
    }
    let options = |v: usize| -> Vec<(usize, usize)> {
        g.neighbors(v)
            .iter()
            .copied()
            .filter(|&(w, k)| aromatic_ring_bond[k] && need[w])
            .collect()
    };
    let mut partner: Vec<Option<usize>> = vec![None; g.atom_count()];
    let mut chosen = Vec::new();
    let mut steps = 0usize;

    fn solve(
        targets: &[usize],
        options: &dyn Fn(usize) -> Vec<(usize, usize)>,
        partner: &mut Vec<Option<usize>>,
        chosen: &mut Vec<usize>,
        steps: &mut usize,
    ) -> Option<bool> {
        *steps += 1;
        if *steps > KEKULE_BUDGET {
            return None;
        }
        // most constrained unmatched atom first
        let mut best: Option<(usize, Vec<(usize, usize)>)> = None;
        for &v in targets {
            if partner[v].is_some() {
                continue;
            }
            let free: Vec<(usize, usize)> = options(v)
                .into_iter()
                .filter(|(w, _)| partner[*w].is_none())
                .collect();
            if best.as_ref().is_none_or(|(_, b)| free.len() < b.len()) {
                let done = free.len() <= 1;
                best = Some((v, free));
                if done {
                    break;
                }
            }
        }
        let Some((v, free)) = best else {
            return Some(true);
        };
        for (w, k) in free {
            partner[v] = Some(w);
            partner[w] = Some(v);
            chosen.push(k);
            match solve(targets, options, partner, chosen, steps) {
                Some(true) => return Some(true),
                None => return None,
                Some(false) => {}
            }
            chosen.pop();
            partner[v] = None;
            partner[w] = None;
        }
        Some(false)
    }

    match solve(&targets, &options, &mut partner, &mut chosen, &mut steps) {
        Some(true) => Some(chosen),
        _ => None,
    }
}

/// Pi electrons contributed to a ring by atom `v`, `None` when `v` cannot
/// take part in an aromatic ring.
fn ring_electrons(g: &MolGraph, in_ring: &[bool], v: usize) -> Option<u32> {
    let a = g.atom(v);
    a.atomic_number()?;
    let mut exo_hetero_double = false;
    for &(w, k) in g.neighbors(v) {
        match g.bonds()[k].order {
            BondOrder::Double if in_ring[k] => return Some(1),
            BondOrder::Double => {
                if matches!(g.atom(w).element.as_str(), "O" | "N" | "S" | "Se") {
                    exo_hetero_double = true;
                } else {
                    return None;
                }
            }
            BondOrder::Triple | BondOrder::Aromatic => return None,
            BondOrder::Single => {}
        }
    }
    if exo_hetero_double {
        return Some(0);
    }
    let conn = g.degree(v) + a.explicit_h.unwrap_or(0) as usize;
    match (a.element.as_str(), a.formal_charge, conn) {
        ("N" | "P" | "As", 0, 3) => Some(2),
        ("N" | "P" | "As", -1, 2) => Some(2),
        ("O" | "S" | "Se" | "Te", 0, 2) => Some(2),
        ("C", -1, 3) => Some(2),
        ("C", 1, 3) | ("B", 0, 3) => Some(0),
        _ => None,
    }
}

struct Kekulized {
    graph: MolGraph,
    in_ring: Vec<bool>,
    aromatic_ring_bond: Vec<bool>,
    unresolved: Vec<bool>,
}

/// Kekulé form with hydrogen counts frozen; aromatic systems that admit no
/// Kekulé structure stay aromatic.
pub(crate) fn kekule_form(g: &MolGraph) -> MolGraph {
    kekulize(&freeze_hydrogens(g), &mut Vec::new()).graph
}

fn kekulize(g: &MolGraph, warnings: &mut Vec<String>) -> Kekulized {
    let in_ring = ring_bonds(g);
    let (mut atoms, mut bonds, features) = g.clone().into_parts();

    // aromatic bonds outside rings cannot be aromatic
    for (k, b) in bonds.iter_mut().enumerate() {
        if b.order == BondOrder::Aromatic && !in_ring[k] {
            b.order = BondOrder::Single;
        }
    }
    let aromatic_ring_bond: Vec<bool> = bonds
        .iter()
        .enumerate()
        .map(|(k, b)| b.order == BondOrder::Aromatic && in_ring[k])
        .collect();
    let staged = rebuild(atoms.clone(), bonds.clone(), features.clone());
    let need: Vec<bool> = (0..staged.atom_count())
        .map(|v| {
            staged
                .neighbors(v)
                .iter()
                .any(|&(_, k)| aromatic_ring_bond[k])
                && needs_pi(&staged, v)
        })
        .collect();

    // components of the aromatic-bond subgraph
    let n = staged.atom_count();
    let mut comp = vec![usize::MAX; n];
    let mut unresolved = vec![false; n];
    let mut doubles = Vec::new();
    for start in 0..n {
        if comp[start] != usize::MAX
            || !staged
                .neighbors(start)
                .iter()
                .any(|&(_, k)| aromatic_ring_bond[k])
        {
            continue;
        }
        let mut members = vec![start];
        comp[start] = start;
        let mut i = 0;
        while i < members.len() {
            let v = members[i];
            i += 1;
            for &(w, k) in staged.neighbors(v) {
                if aromatic_ring_bond[k] && comp[w] == usize::MAX {
                    comp[w] = start;
                    members.push(w);
                }
            }
        }
        match kekulize_component(&staged, &need, &aromatic_ring_bond, &members) {
            Some(d) => doubles.extend(d),
            None => {
                warnings.push(format!(
                    "could not kekulize aromatic system at atom {start}; kept as written"
                ));
                for &v in &members {
                    unresolved[v] = true;
                }
            }
        }
    }
    for (k, b) in bonds.iter_mut().enumerate() {
        if aromatic_ring_bond[k] && !unresolved[b.a] {
            b.order = BondOrder::Single;
        }
    }
    for k in doubles {
        bonds[k].order = BondOrder::Double;
    }
    for (i, a) in atoms.iter_mut().enumerate() {
        if !unresolved[i] {
            a.aromatic = false;
        }
    }
    Kekulized {
        graph: rebuild(atoms, bonds, features),
        in_ring,
        aromatic_ring_bond,
        unresolved,
    }
}

fn aromatize(g: &MolGraph, warnings: &mut Vec<String>) -> MolGraph {
    let input_aromatic_atom: Vec<bool> = g.atoms().iter().map(|a| a.aromatic).collect();
    let Kekulized {
        graph: kek,
        in_ring,
        aromatic_ring_bond,
        unresolved,
    } = kekulize(g, warnings);
    let n = kek.atom_count();

    // Hückel on SSSR rings, then on fused pairs
    let rings = perceive_rings(&kek);
    let electrons: Vec<Option<u32>> = (0..n)
        .map(|v| {
            if unresolved[v] {
                None
            } else {
                ring_electrons(&kek, &in_ring, v)
            }
        })
        .collect();
    let count = |members: &BTreeSet<usize>| -> Option<u32> {
        members.iter().map(|&v| electrons[v]).sum::<Option<u32>>()
    };
    let huckel = |e: Option<u32>| e.is_some_and(|e| e % 4 == 2);
    let ring_sets: Vec<BTreeSet<usize>> = rings.iter().map(|r| r.iter().copied().collect()).collect();
    let mut aromatic_ring: Vec<bool> = ring_sets.iter().map(|s| huckel(count(s))).collect();
    let mut fused_hits = Vec::new();
    for i in 0..rings.len() {
        for j in i + 1..rings.len() {
            if aromatic_ring[i] && aromatic_ring[j] {
                continue;
            }
            if ring_sets[i].intersection(&ring_sets[j]).count() < 2 {
                continue;
            }
            let union: BTreeSet<usize> = ring_sets[i].union(&ring_sets[j]).copied().collect();
            if huckel(count(&union)) {
                fused_hits.push((i, j));
            }
        }
    }
    for (i, j) in fused_hits {
        aromatic_ring[i] = true;
        aromatic_ring[j] = true;
    }

    let (mut atoms, mut bonds, features) = kek.into_parts();
    let mut ring_edges = BTreeSet::new();
    for (r, ring) in rings.iter().enumerate() {
        if !aromatic_ring[r] {
            continue;
        }
        for (p, &v) in ring.iter().enumerate() {
            atoms[v].aromatic = true;
            let w = ring[(p + 1) % ring.len()];
            ring_edges.insert((v.min(w), v.max(w)));
        }
    }
    // ring bonds whose every atom is aromatic, such as the links in biphenylene
    for ring in &rings {
        if ring.iter().all(|&v| atoms[v].aromatic) {
            for (p, &v) in ring.iter().enumerate() {
                let w = ring[(p + 1) % ring.len()];
                ring_edges.insert((v.min(w), v.max(w)));
            }
        }
    }
    for (k, b) in bonds.iter_mut().enumerate() {
        if ring_edges.contains(&(b.a.min(b.b), b.a.max(b.b))) {
            b.order = BondOrder::Aromatic;
        } else if aromatic_ring_bond[k]
            && input_aromatic_atom[b.a]
            && input_aromatic_atom[b.b]
            && !unresolved[b.a]
        {
            // written aromatic but not Hückel: keep it aromatic rather than
            // pick an arbitrary Kekulé structure
            b.order = BondOrder::Aromatic;
            atoms[b.a].aromatic = true;
            atoms[b.b].aromatic = true;
        }
    }
    for b in bonds.iter_mut() {
        if b.order == BondOrder::Aromatic {
            b.stereo = None;
        }
    }
    rebuild(atoms, bonds, features)
}
