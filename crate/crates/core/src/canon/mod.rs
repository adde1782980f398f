//! Canonical ranking, structural keys and verified graph equivalence.
//!
//! Everything goes through one normalization path: explicit `[H]` atoms are
//! folded, hydrogen counts frozen, aromatic systems kekulized and
//! re-perceived. Stereo marks that cannot describe a real stereocentre are
//! dropped before ranking, so `C[C@H](C)O` and `CC(C)O` share a key.

pub(crate) mod aromatic;
mod external;
mod iso;
mod search;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::molgraph::{permutation_is_odd, BondStereo, MolGraph, StereoRef};
use crate::notation::{is_attach_point_label, MarkushFeatures};

pub(crate) use aromatic::normalize;
pub use external::ExternalKeyTool;
use search::{
    canonical_labeling, double_bond_configs, initial_classes, reference_neighbor, refine,
    relative_trans, DoubleBondConfig, LabelOptions,
};

/// Comparison switches. The default ignores stereochemistry and keeps charges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KeyFlags {
    pub ignore_stereo: bool,
    pub ignore_charges: bool,
}

impl Default for KeyFlags {
    fn default() -> Self {
        KeyFlags {
            ignore_stereo: true,
            ignore_charges: false,
        }
    }
}

impl KeyFlags {
    pub fn with_stereo() -> Self {
        KeyFlags {
            ignore_stereo: false,
            ignore_charges: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KeySource {
    Internal,
    External,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct StructuralKey {
    pub key: String,
    pub flags: KeyFlags,
    pub source: KeySource,
}

/// Outcome of [`equivalent`]. `mapping[i]` is the atom of the second graph
/// matched to atom `i` of the first; folded `[H]` atoms map to `None`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Equivalence {
    pub equivalent: bool,
    pub mapping: Option<Vec<Option<usize>>>,
}

impl Equivalence {
    fn no() -> Self {
        Equivalence {
            equivalent: false,
            mapping: None,
        }
    }
}

pub(crate) struct CanonicalForm {
    pub graph: MolGraph,
    pub rank: Vec<usize>,
    /// input atom -> atom of `graph`
    pub map: Vec<Option<usize>>,
    configs: Vec<DoubleBondConfig>,
    pub warnings: Vec<String>,
}

/// Copy of `g` where named pseudo atoms become `*` carrying their name as a
/// label, and every attach point carries an `_AP<n>` label.
pub(crate) fn feature_view(g: &MolGraph) -> MolGraph {
    let (mut atoms, bonds, mut f) = g.clone().into_parts();
    for (i, a) in atoms.iter_mut().enumerate() {
        if a.is_pseudo() && a.element != "*" {
            f.labels.entry(i).or_insert_with(|| a.element.clone());
            a.element = "*".into();
        }
    }
    for &i in &f.attach_points {
        if !f.labels.get(&i).is_some_and(|l| is_attach_point_label(l)) {
            f.labels.insert(i, "_AP1".into());
        }
    }
    let ap: Vec<usize> = f
        .labels
        .iter()
        .filter(|(_, l)| is_attach_point_label(l))
        .map(|(i, _)| *i)
        .collect();
    f.attach_points.extend(ap);
    MolGraph::new(atoms, bonds)
        .and_then(|m| m.with_features(f))
        .expect("feature view keeps the graph valid")
}

/// Backbone only: features removed and every pseudo atom reduced to `*`.
pub(crate) fn backbone_view(g: &MolGraph) -> MolGraph {
    let (mut atoms, bonds, _) = g.clone().into_parts();
    for a in atoms.iter_mut() {
        if a.is_pseudo() {
            a.element = "*".into();
        }
    }
    MolGraph::new(atoms, bonds).expect("backbone view keeps the graph valid")
}

fn strip_features(g: &MolGraph) -> MolGraph {
    let (atoms, bonds, _) = g.clone().into_parts();
    MolGraph::new(atoms, bonds).expect("same atoms and bonds")
}

/// Drop marks that cannot describe a stereocentre and collect the
/// double-bond configurations worth keeping; directional marks are cleared.
fn clean_stereo(g: &MolGraph, features: bool) -> (MolGraph, Vec<DoubleBondConfig>) {
    let opts = LabelOptions {
        stereo: false,
        features,
    };
    let mut colors = initial_classes(g, opts, &[]);
    refine(g, &mut colors);
    let distinct = |atoms: &[usize]| {
        let set: BTreeSet<u32> = atoms.iter().map(|&a| colors[a]).collect();
        set.len() == atoms.len()
    };
    let configs: Vec<DoubleBondConfig> = double_bond_configs(g)
        .into_iter()
        .filter(|c| {
            [(c.a, c.b), (c.b, c.a)].iter().all(|&(end, partner)| {
                let subs: Vec<usize> = g
                    .neighbors(end)
                    .iter()
                    .map(|&(w, _)| w)
                    .filter(|&w| w != partner)
                    .collect();
                !subs.is_empty() && subs.len() <= 2 && distinct(&subs)
            })
        })
        .collect();
    let (mut atoms, mut bonds, features) = g.clone().into_parts();
    for (v, a) in atoms.iter_mut().enumerate() {
        if a.stereo.is_none() {
            continue;
        }
        let nbrs: Vec<usize> = g.neighbors(v).iter().map(|&(w, _)| w).collect();
        let refs = g.stereo_reference(v);
        if refs.len() < 3 || refs.len() > 4 || g.total_h(v) > 1 || !distinct(&nbrs) {
            a.stereo = None;
        }
    }
    for b in bonds.iter_mut() {
        b.stereo = None;
    }
    let graph = MolGraph::new(atoms, bonds)
        .and_then(|m| m.with_features(features))
        .expect("stereo cleanup keeps the graph valid");
    (graph, configs)
}

/// Write directional marks for `configs`, each on the bond to the
/// lowest-ranked substituent of either end.
fn place_marks(
    g: &MolGraph,
    configs: &[DoubleBondConfig],
    rank: &[usize],
    warnings: &mut Vec<String>,
) -> MolGraph {
    let rank32: Vec<u32> = rank.iter().map(|&r| r as u32).collect();
    let (atoms, mut bonds, features) = g.clone().into_parts();
    let probe = g.clone();
    let mut order: Vec<&DoubleBondConfig> = configs.iter().collect();
    order.sort_by_key(|c| rank[c.a].min(rank[c.b]));
    for c in order {
        // orient from the lower-ranked end so the marks do not depend on
        // how the input stored the double bond
        let flipped;
        let c = if rank[c.a] < rank[c.b] {
            c
        } else {
            flipped = DoubleBondConfig {
                a: c.b,
                b: c.a,
                x: c.y,
                y: c.x,
                ..*c
            };
            &flipped
        };
        let p = reference_neighbor(&probe, c.a, c.b, &rank32);
        let q = reference_neighbor(&probe, c.b, c.a, &rank32);
        let trans = relative_trans(&probe, c, &rank32);
        let kp = probe.bond_between(p, c.a).unwrap();
        let kq = probe.bond_between(c.b, q).unwrap();
        let read = |k: usize, from: usize| {
            bonds[k]
                .stereo
                .map(|s| if bonds[k].a == from { s } else { s.reversed() })
        };
        let follow = |s: BondStereo| if trans { s } else { s.reversed() };
        let (sp, sq) = match (read(kp, p), read(kq, c.b)) {
            (None, None) => (BondStereo::Up, follow(BondStereo::Up)),
            (Some(sp), None) => (sp, follow(sp)),
            (None, Some(sq)) => (follow(sq), sq),
            (Some(sp), Some(sq)) => {
                if follow(sp) != sq {
                    warnings.push(format!(
                        "double bond {}={} configuration conflicts with a neighbour and was dropped",
                        c.a, c.b
                    ));
                }
                continue;
            }
        };
        let set = |bonds: &mut Vec<crate::molgraph::Bond>, k: usize, from: usize, s: BondStereo| {
            bonds[k].stereo = Some(if bonds[k].a == from { s } else { s.reversed() });
        };
        set(&mut bonds, kp, p, sp);
        set(&mut bonds, kq, c.b, sq);
    }
    MolGraph::new(atoms, bonds)
        .and_then(|m| m.with_features(features))
        .expect("marks keep the graph valid")
}

pub(crate) fn canonical_form(
    g: &MolGraph,
    stereo: bool,
    features: bool,
    ignore_charges: bool,
) -> CanonicalForm {
    let n = normalize(g);
    let mut warnings = n.warnings;
    let mut graph = n.graph;
    if ignore_charges {
        let (mut atoms, bonds, f) = graph.into_parts();
        for a in atoms.iter_mut() {
            a.formal_charge = 0;
        }
        graph = MolGraph::new(atoms, bonds)
            .and_then(|m| m.with_features(f))
            .expect("charges do not affect validity");
    }
    if !features {
        graph = strip_features(&graph);
    }
    let (graph, configs) = if stereo {
        clean_stereo(&graph, features)
    } else {
        let (mut atoms, mut bonds, f) = graph.into_parts();
        atoms.iter_mut().for_each(|a| a.stereo = None);
        bonds.iter_mut().for_each(|b| b.stereo = None);
        let g = MolGraph::new(atoms, bonds)
            .and_then(|m| m.with_features(f))
            .expect("stereo does not affect validity");
        (g, Vec::new())
    };
    let opts = LabelOptions { stereo, features };
    let rank = canonical_labeling(&graph, opts, &configs);
    let graph = if configs.is_empty() {
        graph
    } else {
        place_marks(&graph, &configs, &rank, &mut warnings)
    };
    CanonicalForm {
        graph,
        rank,
        map: n.map,
        configs,
        warnings,
    }
}

/// Canonical rank of every atom of `g` (a permutation of `0..n`).
///
/// Ranks come from refinement seeded with element, isotope, charge,
/// aromaticity, hydrogen count, degree, ring membership and Markush labels,
/// followed by a search over tie-breaking choices. Explicit `[H]` atoms are
/// ranked last, after their neighbours.
pub fn canonical_ranks(g: &MolGraph) -> Vec<usize> {
    let cf = canonical_form(&feature_view(g), true, true, false);
    let heavy = cf.graph.atom_count();
    let mut out = vec![0usize; g.atom_count()];
    let mut folded = Vec::new();
    for (i, m) in cf.map.iter().enumerate() {
        match m {
            Some(v) => out[i] = cf.rank[*v],
            None => {
                let parent = g.neighbors(i).first().map(|&(p, _)| p);
                let key = parent.and_then(|p| cf.map[p]).map_or(usize::MAX, |v| cf.rank[v]);
                folded.push((key, i));
            }
        }
    }
    folded.sort_unstable();
    for (pos, (_, i)) in folded.into_iter().enumerate() {
        out[i] = heavy + pos;
    }
    out
}

/// Canonical SMILES of the backbone (features ignored, stereo kept).
pub fn canonical_smiles(g: &MolGraph) -> String {
    crate::notation::write_smiles(g, true)
}

/// Notes raised while normalizing `g` for canonicalization: aromatic
/// systems that could not be kekulized, stereo marks that were dropped.
pub fn normalization_warnings(g: &MolGraph) -> Vec<String> {
    canonical_form(&backbone_view(g), true, false, false).warnings
}

fn backbone_form(g: &MolGraph, flags: KeyFlags) -> (CanonicalForm, String) {
    let cf = canonical_form(&backbone_view(g), !flags.ignore_stereo, false, flags.ignore_charges);
    let text = crate::notation::writer::emit(&cf.graph, &cf.rank).text;
    (cf, text)
}

fn digest(text: &str) -> String {
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Fixed-length digest of the canonical backbone. Markush features never
/// contribute; every pseudo atom counts as a plain `*`.
pub fn structural_key(g: &MolGraph, flags: KeyFlags) -> StructuralKey {
    let (_, text) = backbone_form(g, flags);
    StructuralKey {
        key: digest(&text),
        flags,
        source: KeySource::Internal,
    }
}

/// Like [`structural_key`] but asks `tool` first; any failure of the tool
/// falls back to the internal key.
pub fn structural_key_with(
    tool: Option<&ExternalKeyTool>,
    g: &MolGraph,
    flags: KeyFlags,
) -> StructuralKey {
    if let Some(key) = tool.and_then(|t| t.key(&backbone_view(g))) {
        return StructuralKey {
            key,
            flags,
            source: KeySource::External,
        };
    }
    structural_key(g, flags)
}

fn stereo_preserved(
    g1: &MolGraph,
    c1: &[DoubleBondConfig],
    g2: &MolGraph,
    c2: &[DoubleBondConfig],
    map: &[usize],
) -> bool {
    for v in 0..g1.atom_count() {
        let w = map[v];
        match (g1.atom(v).stereo, g2.atom(w).stereo) {
            (None, None) => {}
            (Some(s1), Some(s2)) => {
                let mapped: Vec<StereoRef> = g1
                    .stereo_reference(v)
                    .into_iter()
                    .map(|r| match r {
                        StereoRef::Atom(a) => StereoRef::Atom(map[a]),
                        h => h,
                    })
                    .collect();
                let reference = g2.stereo_reference(w);
                if mapped.len() != reference.len()
                    || s1.flipped_if(permutation_is_odd(&mapped, &reference)) != s2
                {
                    return false;
                }
            }
            _ => return false,
        }
    }
    if c1.len() != c2.len() {
        return false;
    }
    c1.iter().all(|c| {
        let (a, b, x, y) = (map[c.a], map[c.b], map[c.x], map[c.y]);
        c2.iter().any(|d| {
            let (p, q) = if d.a == a && d.b == b {
                (x, y)
            } else if d.a == b && d.b == a {
                (y, x)
            } else {
                return false;
            };
            (d.trans ^ (p != d.x) ^ (q != d.y)) == c.trans
        })
    })
}

fn features_preserved(f1: &MarkushFeatures, f2: &MarkushFeatures, map: &[usize]) -> bool {
    if f1.labels.len() != f2.labels.len()
        || f1.attach_points.len() != f2.attach_points.len()
        || f1.m_sections.len() != f2.m_sections.len()
        || f1.sg_sections.len() != f2.sg_sections.len()
    {
        return false;
    }
    if f1
        .labels
        .iter()
        .any(|(i, l)| f2.labels.get(&map[*i]) != Some(l))
    {
        return false;
    }
    if f1
        .attach_points
        .iter()
        .any(|i| !f2.attach_points.contains(&map[*i]))
    {
        return false;
    }
    let m_set = |f: &MarkushFeatures, m: &dyn Fn(usize) -> usize| -> BTreeSet<(usize, BTreeSet<usize>)> {
        f.m_sections
            .iter()
            .map(|s| (m(s.attachment), s.candidates.iter().map(|&c| m(c)).collect()))
            .collect()
    };
    let sg_set = |f: &MarkushFeatures, m: &dyn Fn(usize) -> usize| {
        f.sg_sections
            .iter()
            .map(|s| {
                (
                    s.atoms.iter().map(|&a| m(a)).collect::<BTreeSet<usize>>(),
                    s.subscript.clone(),
                    s.connectivity,
                )
            })
            .collect::<BTreeSet<_>>()
    };
    let mapped = |i: usize| map[i];
    let same = |i: usize| i;
    m_set(f1, &mapped) == m_set(f2, &same) && sg_set(f1, &mapped) == sg_set(f2, &same)
}

fn compose_mapping(
    cf1: &CanonicalForm,
    cf2: &CanonicalForm,
    inner: &[usize],
) -> Vec<Option<usize>> {
    let mut back2 = vec![0usize; cf2.graph.atom_count()];
    for (j, m) in cf2.map.iter().enumerate() {
        if let Some(v) = m {
            back2[*v] = j;
        }
    }
    cf1.map
        .iter()
        .map(|m| m.map(|v| back2[inner[v]]))
        .collect()
}

fn verified_mapping(
    cf1: &CanonicalForm,
    cf2: &CanonicalForm,
    stereo: bool,
    features: bool,
) -> Option<Vec<usize>> {
    let (g1, g2) = (&cf1.graph, &cf2.graph);
    let accept = |m: &[usize]| {
        (!stereo || stereo_preserved(g1, &cf1.configs, g2, &cf2.configs, m))
            && (!features || features_preserved(g1.features(), g2.features(), m))
    };
    let mut by_rank = vec![0usize; g2.atom_count()];
    for (w, &r) in cf2.rank.iter().enumerate() {
        by_rank[r] = w;
    }
    let candidate: Vec<usize> = cf1.rank.iter().map(|&r| by_rank[r]).collect();
    if iso::preserves_structure(g1, g2, &candidate) && accept(&candidate) {
        return Some(candidate);
    }
    let opts = LabelOptions {
        stereo: false,
        features,
    };
    iso::find_isomorphism(g1, g2, opts, &|m| {
        iso::preserves_structure(g1, g2, m) && accept(m)
    })
}

/// Backbone equivalence: equal structural keys and an explicit isomorphism.
pub fn equivalent(g1: &MolGraph, g2: &MolGraph, flags: KeyFlags) -> Equivalence {
    equivalent_with(None, g1, g2, flags)
}

/// [`equivalent`] with keys optionally taken from an external tool. The
/// isomorphism is always checked internally.
pub fn equivalent_with(
    tool: Option<&ExternalKeyTool>,
    g1: &MolGraph,
    g2: &MolGraph,
    flags: KeyFlags,
) -> Equivalence {
    let (cf1, t1) = backbone_form(g1, flags);
    let (cf2, t2) = backbone_form(g2, flags);
    if let Some(tool) = tool {
        let k1 = structural_key_with(Some(tool), g1, flags);
        let k2 = structural_key_with(Some(tool), g2, flags);
        if k1.source == KeySource::External && k2.source == KeySource::External {
            if k1.key != k2.key {
                return Equivalence::no();
            }
        } else if t1 != t2 {
            return Equivalence::no();
        }
    } else if t1 != t2 {
        return Equivalence::no();
    }
    match verified_mapping(&cf1, &cf2, !flags.ignore_stereo, false) {
        Some(inner) => Equivalence {
            equivalent: true,
            mapping: Some(compose_mapping(&cf1, &cf2, &inner)),
        },
        None => Equivalence::no(),
    }
}

pub(crate) fn feature_form(g: &MolGraph, flags: KeyFlags) -> (CanonicalForm, String) {
    let cf = canonical_form(&feature_view(g), !flags.ignore_stereo, true, flags.ignore_charges);
    let text = crate::notation::render_canonical(&cf).text;
    (cf, text)
}

/// Equivalence of backbone and Markush layer together: some isomorphism
/// maps labels, attach points, `m` and `Sg` sections onto each other.
pub fn feature_equivalent(g1: &MolGraph, g2: &MolGraph, flags: KeyFlags) -> Equivalence {
    let (cf1, t1) = feature_form(g1, flags);
    let (cf2, t2) = feature_form(g2, flags);
    if t1 != t2 {
        return Equivalence::no();
    }
    match verified_mapping(&cf1, &cf2, !flags.ignore_stereo, true) {
        Some(inner) => Equivalence {
            equivalent: true,
            mapping: Some(compose_mapping(&cf1, &cf2, &inner)),
        },
        None => Equivalence::no(),
    }
}
