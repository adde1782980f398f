//! Molecular graph model shared by every other module.
//!
//! Atoms are ordered and the order is significant: CXSMILES extension
//! sections address atoms by position. Graphs are immutable once built; the
//! constructor checks every structural invariant.

pub mod elements;
mod rings;

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::notation::{is_attach_point_label, MarkushFeatures};

pub use rings::{perceive_rings, ring_bonds, Ring};

/// Tetrahedral mark. `CounterClockwise` is SMILES `@`, `Clockwise` is `@@`.
///
/// The mark is interpreted against the atom's reference neighbour order:
/// an implicit hydrogen (if the atom carries exactly one) first, then the
/// bonded neighbours by ascending atom index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Chirality {
    Clockwise,
    CounterClockwise,
}

impl Chirality {
    pub fn inverted(self) -> Self {
        match self {
            Chirality::Clockwise => Chirality::CounterClockwise,
            Chirality::CounterClockwise => Chirality::Clockwise,
        }
    }

    pub(crate) fn flipped_if(self, odd: bool) -> Self {
        if odd {
            self.inverted()
        } else {
            self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Contribution to the bond-order sum; aromatic bonds count as one.
    pub fn valence(self) -> u8 {
        match self {
            BondOrder::Single | BondOrder::Aromatic => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
        }
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            BondOrder::Single => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            BondOrder::Aromatic => 4,
        }
    }
}

/// Directional single-bond mark, read along the bond from `a` to `b`:
/// `Up` is SMILES `/`, `Down` is `\`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum BondStereo {
    Up,
    Down,
}

impl BondStereo {
    pub fn reversed(self) -> Self {
        match self {
            BondStereo::Up => BondStereo::Down,
            BondStereo::Down => BondStereo::Up,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Atom {
    pub element: String,
    pub formal_charge: i8,
    pub isotope: Option<u16>,
    pub aromatic: bool,
    pub explicit_h: Option<u8>,
    pub coords: Option<(f64, f64)>,
    pub stereo: Option<Chirality>,
}

impl Atom {
    pub fn new(element: impl Into<String>) -> Self {
        Atom {
            element: element.into(),
            formal_charge: 0,
            isotope: None,
            aromatic: false,
            explicit_h: None,
            coords: None,
            stereo: None,
        }
    }

    pub fn pseudo() -> Self {
        Atom::new("*")
    }

    pub fn aromatic(mut self) -> Self {
        self.aromatic = true;
        self
    }

    pub fn with_charge(mut self, charge: i8) -> Self {
        self.formal_charge = charge;
        self
    }

    pub fn with_h(mut self, h: u8) -> Self {
        self.explicit_h = Some(h);
        self
    }

    pub fn at(mut self, x: f64, y: f64) -> Self {
        self.coords = Some((x, y));
        self
    }

    pub fn atomic_number(&self) -> Option<u8> {
        elements::atomic_number(&self.element)
    }

    /// Anything outside the periodic table: `*`, `R1`, abbreviation text.
    pub fn is_pseudo(&self) -> bool {
        self.atomic_number().is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub order: BondOrder,
    pub stereo: Option<BondStereo>,
}

impl Bond {
    pub fn new(a: usize, b: usize, order: BondOrder) -> Self {
        Bond {
            a,
            b,
            order,
            stereo: None,
        }
    }

    pub fn other(&self, atom: usize) -> usize {
        if self.a == atom {
            self.b
        } else {
            self.a
        }
    }

    /// Stereo mark as read from `from` towards the other end.
    pub fn stereo_from(&self, from: usize) -> Option<BondStereo> {
        self.stereo
            .map(|s| if from == self.a { s } else { s.reversed() })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("atom {0} has an empty element symbol")]
    EmptyElement(usize),
    #[error("pseudo atom {0} ({1}) cannot be aromatic")]
    AromaticPseudo(usize, String),
    #[error("bond {bond} references atom {atom} but the graph has {len} atoms")]
    BondOutOfRange { bond: usize, atom: usize, len: usize },
    #[error("bond {0} joins an atom to itself")]
    SelfBond(usize),
    #[error("duplicate bond between atoms {0} and {1}")]
    DuplicateBond(usize, usize),
    #[error("feature references atom {atom} but the graph has {len} atoms")]
    FeatureOutOfRange { atom: usize, len: usize },
    #[error("positional variation on atom {0} has no candidates")]
    EmptyCandidates(usize),
    #[error("positional variation on atom {0} lists candidate {1} twice")]
    DuplicateCandidate(usize, usize),
    #[error("positional variation attachment {0} is also listed as a candidate")]
    AttachmentIsCandidate(usize),
    #[error("repeating unit has no atoms")]
    EmptyRepeatUnit,
    #[error("repeating unit lists atom {0} twice")]
    DuplicateRepeatAtom(usize),
    #[error("repeating unit has an empty subscript")]
    EmptySubscript,
    #[error("attach point {0} is neither a `*` atom nor labelled `_AP<n>`")]
    AttachPointNotPseudo(usize),
    #[error("atom order is not a permutation of 0..{0}")]
    BadPermutation(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("atom {atom} ({element}) has no valence model")]
pub struct ValenceError {
    pub atom: usize,
    pub element: String,
}

/// Entry of an atom's stereo reference order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum StereoRef {
    ImplicitH,
    Atom(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MolGraph {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    features: MarkushFeatures,
    #[serde(skip)]
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl MolGraph {
    pub fn new(atoms: Vec<Atom>, bonds: Vec<Bond>) -> Result<Self, GraphError> {
        let n = atoms.len();
        for (i, a) in atoms.iter().enumerate() {
            if a.element.is_empty() {
                return Err(GraphError::EmptyElement(i));
            }
            if a.aromatic && a.is_pseudo() {
                return Err(GraphError::AromaticPseudo(i, a.element.clone()));
            }
        }
        let mut adjacency = vec![Vec::new(); n];
        for (k, b) in bonds.iter().enumerate() {
            for atom in [b.a, b.b] {
                if atom >= n {
                    return Err(GraphError::BondOutOfRange {
                        bond: k,
                        atom,
                        len: n,
                    });
                }
            }
            if b.a == b.b {
                return Err(GraphError::SelfBond(k));
            }
            adjacency[b.a].push((b.b, k));
            adjacency[b.b].push((b.a, k));
        }
        for (i, nbrs) in adjacency.iter_mut().enumerate() {
            nbrs.sort_unstable();
            if let Some(w) = nbrs.windows(2).find(|w| w[0].0 == w[1].0) {
                return Err(GraphError::DuplicateBond(i.min(w[0].0), i.max(w[0].0)));
            }
        }
        Ok(MolGraph {
            atoms,
            bonds,
            features: MarkushFeatures::default(),
            adjacency,
        })
    }

    pub fn empty() -> Self {
        MolGraph {
            atoms: Vec::new(),
            bonds: Vec::new(),
            features: MarkushFeatures::default(),
            adjacency: Vec::new(),
        }
    }

    /// Attach a Markush layer, checking it against this backbone.
    pub fn with_features(mut self, features: MarkushFeatures) -> Result<Self, GraphError> {
        self.check_features(&features)?;
        self.features = features;
        Ok(self)
    }

    fn check_features(&self, f: &MarkushFeatures) -> Result<(), GraphError> {
        let n = self.atoms.len();
        let in_range = |atom: usize| {
            if atom < n {
                Ok(())
            } else {
                Err(GraphError::FeatureOutOfRange { atom, len: n })
            }
        };
        for i in f.labels.keys() {
            in_range(*i)?;
        }
        for &i in &f.attach_points {
            in_range(i)?;
            let labelled = f.labels.get(&i).is_some_and(|l| is_attach_point_label(l));
            if !labelled && self.atoms[i].element != "*" {
                return Err(GraphError::AttachPointNotPseudo(i));
            }
        }
        for m in &f.m_sections {
            in_range(m.attachment)?;
            if m.candidates.is_empty() {
                return Err(GraphError::EmptyCandidates(m.attachment));
            }
            let mut seen = BTreeSet::new();
            for &c in &m.candidates {
                in_range(c)?;
                if c == m.attachment {
                    return Err(GraphError::AttachmentIsCandidate(c));
                }
                if !seen.insert(c) {
                    return Err(GraphError::DuplicateCandidate(m.attachment, c));
                }
            }
        }
        for sg in &f.sg_sections {
            if sg.atoms.is_empty() {
                return Err(GraphError::EmptyRepeatUnit);
            }
            if sg.subscript.is_empty() {
                return Err(GraphError::EmptySubscript);
            }
            let mut seen = BTreeSet::new();
            for &a in &sg.atoms {
                in_range(a)?;
                if !seen.insert(a) {
                    return Err(GraphError::DuplicateRepeatAtom(a));
                }
            }
        }
        Ok(())
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn atom(&self, i: usize) -> &Atom {
        &self.atoms[i]
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn features(&self) -> &MarkushFeatures {
        &self.features
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Non-hydrogen atoms, pseudo atoms included.
    pub fn heavy_atom_count(&self) -> usize {
        self.atoms.iter().filter(|a| a.element != "H").count()
    }

    /// `(neighbour, bond index)` pairs sorted by neighbour index.
    pub fn neighbors(&self, i: usize) -> &[(usize, usize)] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<usize> {
        self.adjacency
            .get(a)?
            .binary_search_by_key(&b, |(n, _)| *n)
            .ok()
            .map(|p| self.adjacency[a][p].1)
    }

    pub fn into_parts(self) -> (Vec<Atom>, Vec<Bond>, MarkushFeatures) {
        (self.atoms, self.bonds, self.features)
    }

    /// Label shown for atom `i`: its CXSMILES label, or the element text of
    /// a named pseudo atom such as `R1`.
    pub fn effective_label(&self, i: usize) -> Option<&str> {
        if let Some(l) = self.features.labels.get(&i) {
            return Some(l);
        }
        let a = &self.atoms[i];
        (a.is_pseudo() && a.element != "*").then_some(a.element.as_str())
    }

    fn bond_order_sum(&self, i: usize) -> u8 {
        let mut sum: u32 = 0;
        for &(_, k) in &self.adjacency[i] {
            sum += self.bonds[k].order.valence() as u32;
        }
        if self.atoms[i].aromatic {
            sum += 1;
        }
        sum.min(u8::MAX as u32) as u8
    }

    /// Hydrogens the valence model assigns to atom `i`, ignoring `explicit_h`.
    /// `None` for pseudo atoms.
    pub(crate) fn model_h(&self, i: usize) -> Option<u8> {
        let atom = &self.atoms[i];
        let z = atom.atomic_number()?;
        let Some(valences) = elements::default_valences(z, atom.formal_charge) else {
            return Some(0);
        };
        let sum = self.bond_order_sum(i);
        if atom.aromatic {
            return Some(valences[0].saturating_sub(sum));
        }
        Some(
            valences
                .iter()
                .find(|v| **v >= sum)
                .map_or(0, |v| v - sum),
        )
    }

    /// Implicit hydrogen count of atom `i` under the SMILES organic-subset
    /// valence model; an explicit count on the atom takes precedence.
    pub fn implicit_h(&self, i: usize) -> Result<u8, ValenceError> {
        let atom = &self.atoms[i];
        if atom.is_pseudo() {
            return Err(ValenceError {
                atom: i,
                element: atom.element.clone(),
            });
        }
        Ok(atom.explicit_h.unwrap_or_else(|| self.model_h(i).unwrap_or(0)))
    }

    /// Attached hydrogens, never failing: pseudo atoms report their explicit
    /// count or zero.
    pub fn total_h(&self, i: usize) -> u8 {
        let atom = &self.atoms[i];
        match atom.explicit_h {
            Some(h) => h,
            None => self.model_h(i).unwrap_or(0),
        }
    }

    /// Hydrogen count over the whole graph, explicit `[H]` atoms included.
    pub fn hydrogen_count(&self) -> usize {
        (0..self.atoms.len())
            .map(|i| self.total_h(i) as usize + usize::from(self.atoms[i].element == "H"))
            .sum()
    }

    pub(crate) fn stereo_reference(&self, i: usize) -> Vec<StereoRef> {
        let mut order = Vec::with_capacity(4);
        if self.total_h(i) == 1 {
            order.push(StereoRef::ImplicitH);
        }
        order.extend(self.adjacency[i].iter().map(|(n, _)| StereoRef::Atom(*n)));
        order
    }

    /// Relabel atoms: `order[old] = new`. Features, bond endpoints and
    /// tetrahedral marks are carried along so the molecule is unchanged.
    pub fn permuted(&self, order: &[usize]) -> Result<MolGraph, GraphError> {
        let n = self.atoms.len();
        if order.len() != n {
            return Err(GraphError::BadPermutation(n));
        }
        let mut seen = vec![false; n];
        for &p in order {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(GraphError::BadPermutation(n));
            }
        }
        let mut atoms: Vec<Option<Atom>> = vec![None; n];
        for (old, atom) in self.atoms.iter().enumerate() {
            let mut atom = atom.clone();
            if let Some(st) = atom.stereo {
                let before: Vec<StereoRef> = self
                    .stereo_reference(old)
                    .into_iter()
                    .map(|r| match r {
                        StereoRef::Atom(a) => StereoRef::Atom(order[a]),
                        h => h,
                    })
                    .collect();
                let mut after = before.clone();
                after.sort_by_key(|r| match r {
                    StereoRef::ImplicitH => (0, 0),
                    StereoRef::Atom(a) => (1, *a),
                });
                atom.stereo = Some(st.flipped_if(permutation_is_odd(&before, &after)));
            }
            atoms[order[old]] = Some(atom);
        }
        let atoms = atoms.into_iter().map(|a| a.expect("permutation")).collect();
        let bonds = self
            .bonds
            .iter()
            .map(|b| Bond {
                a: order[b.a],
                b: order[b.b],
                ..*b
            })
            .collect();
        let map: Vec<Option<usize>> = order.iter().map(|&p| Some(p)).collect();
        MolGraph::new(atoms, bonds)?.with_features(self.features.remap(&map))
    }

    /// Drop the given atoms and their bonds. Returns the new graph and the
    /// old -> new index map. Surviving atoms keep their relative order;
    /// tetrahedral marks on atoms that lost a neighbour are cleared.
    pub fn without_atoms(&self, remove: &BTreeSet<usize>) -> (MolGraph, Vec<Option<usize>>) {
        let mut map = vec![None; self.atoms.len()];
        let mut atoms = Vec::new();
        for (i, atom) in self.atoms.iter().enumerate() {
            if remove.contains(&i) {
                continue;
            }
            map[i] = Some(atoms.len());
            let mut atom = atom.clone();
            if atom.stereo.is_some()
                && self.adjacency[i].iter().any(|(n, _)| remove.contains(n))
            {
                atom.stereo = None;
            }
            atoms.push(atom);
        }
        let bonds = self
            .bonds
            .iter()
            .filter_map(|b| {
                Some(Bond {
                    a: map[b.a]?,
                    b: map[b.b]?,
                    ..*b
                })
            })
            .collect();
        let mut features = self.features.remap(&map);
        // attach points survive only on atoms that still qualify
        let g = MolGraph::new(atoms, bonds).expect("subgraph of a valid graph");
        features.attach_points.retain(|i| {
            features.labels.get(i).is_some_and(|l| is_attach_point_label(l))
                || g.atoms[*i].element == "*"
        });
        let g = g.with_features(features).expect("remapped features stay valid");
        (g, map)
    }

    /// Connected components as sorted atom lists, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.atoms.len();
        let mut comp = vec![usize::MAX; n];
        let mut out = Vec::new();
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![start];
            comp[start] = id;
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                for &(w, _) in &self.adjacency[v] {
                    if comp[w] == usize::MAX {
                        comp[w] = id;
                        members.push(w);
                        stack.push(w);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    /// Elemental formula (Hill order), pseudo atoms listed as `*`.
    pub fn formula(&self) -> String {
        let mut counts: std::collections::BTreeMap<String, usize> = Default::default();
        for (i, a) in self.atoms.iter().enumerate() {
            let key = if a.is_pseudo() { "*".to_string() } else { a.element.clone() };
            *counts.entry(key).or_default() += 1;
            let h = self.total_h(i) as usize;
            if h > 0 {
                *counts.entry("H".into()).or_default() += h;
            }
        }
        let mut out = String::new();
        let mut push = |sym: &str, n: usize| {
            out.push_str(sym);
            if n > 1 {
                out.push_str(&n.to_string());
            }
        };
        let carbon = counts.remove("C");
        if let Some(c) = carbon {
            push("C", c);
            if let Some(h) = counts.remove("H") {
                push("H", h);
            }
        }
        for (sym, n) in counts {
            push(&sym, n);
        }
        out
    }
}

impl fmt::Display for MolGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::notation::write_cxsmiles(self).text)
    }
}

/// Parity of the permutation taking `from` to `to` (same elements, any order).
pub(crate) fn permutation_is_odd<T: PartialEq>(from: &[T], to: &[T]) -> bool {
    let target: Vec<usize> = from
        .iter()
        .map(|x| to.iter().position(|y| y == x).unwrap_or(0))
        .collect();
    let mut seen = vec![false; target.len()];
    let mut cycles = 0;
    for start in 0..target.len() {
        if seen[start] {
            continue;
        }
        cycles += 1;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = target[i];
        }
    }
    (target.len() - cycles) % 2 == 1
}
