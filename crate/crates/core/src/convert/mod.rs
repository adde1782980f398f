//! MOL V2000 to CXSMILES conversion with Markush feature reconstruction.
//!
//! Pipeline: [`Converter::clean`] removes stray text atoms,
//! [`Converter::derive_rgroups`] turns aliases, superatoms and `R#` atoms
//! into labels or expanded abbreviations, the backbone graph is built,
//! [`Converter::reconstruct_positional_variation`] finds ring-interior
//! anchors, [`Converter::extract_frequency_variation`] maps SRU Sgroups,
//! and the result is written as CXSMILES.

mod dictionary;
pub mod geometry;

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::molfile::{
    parse_molfile_with, AtomNumber, BondNumber, MolfileDoc, MolfileError, ParseOptions,
    SgroupRecord, SgroupType, SruConnectivity,
};
use crate::molgraph::{elements, perceive_rings, Atom, Bond, BondOrder, GraphError, MolGraph, Ring};
use crate::notation::{
    is_attach_point_label, write_cxsmiles, CxString, FrequencyVariation, MarkushFeatures,
    PositionalVariation, SgConnectivity,
};

pub use dictionary::{Abbreviation, AbbreviationDict, DictionaryError};

pub const DEFAULT_RGROUP_PATTERN: &str = r"R\d+'*|R'+|[XYZW]\d*'*";

/// Conversion settings; every field has a default so a config file may set
/// any subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvertConfig {
    /// Regular expression a whole label must match to count as a variable group.
    pub rgroup_pattern: String,
    /// Replaces the bundled abbreviation dictionary.
    pub abbreviation_dictionary_path: Option<PathBuf>,
    pub strict: bool,
    /// Distance under which a point on a ring edge counts as inside the ring.
    pub geometry_tolerance: f64,
}

impl Default for ConvertConfig {
    fn default() -> Self {
        ConvertConfig {
            rgroup_pattern: DEFAULT_RGROUP_PATTERN.to_string(),
            abbreviation_dictionary_path: None,
            strict: false,
            geometry_tolerance: 1e-9,
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid rgroup_pattern: {0}")]
    Pattern(#[from] regex::Error),
    #[error(transparent)]
    Dictionary(#[from] DictionaryError),
    #[error("geometry_tolerance must be finite and non-negative")]
    Tolerance,
}

#[derive(Debug, Error)]
pub enum ConvertError {
    #[error("no structure")]
    NoStructure,
    #[error(transparent)]
    Molfile(#[from] MolfileError),
    #[error("{0}")]
    Strict(String),
    #[error("inconsistent features: {0}")]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConversionReport {
    /// Variable-group labels (pattern matches) in the output.
    pub rgroups_derived: usize,
    /// Other non-attach-point labels, such as unknown abbreviations.
    pub pseudo_labels: usize,
    pub attach_points: usize,
    pub sg_extracted: usize,
    pub m_reconstructed: usize,
    pub removed_elements: Vec<String>,
    pub warnings: Vec<String>,
    pub input_atoms: usize,
    pub anchors_removed: usize,
    pub superatom_atoms_collapsed: usize,
    pub expansion_atoms_added: usize,
    pub attach_atoms_added: usize,
    pub output_atoms: usize,
}

/// How a label text is realised in the backbone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelUse {
    Variable(String),
    AttachPoint(String),
    /// Expand from the abbreviation dictionary.
    Expand(String),
    /// Alias that names an element: the atom becomes that element.
    Element(String),
    /// Unknown text kept as a pseudo-atom label.
    Pseudo(String),
}

impl LabelUse {
    pub fn text(&self) -> &str {
        match self {
            LabelUse::Variable(t)
            | LabelUse::AttachPoint(t)
            | LabelUse::Expand(t)
            | LabelUse::Element(t)
            | LabelUse::Pseudo(t) => t,
        }
    }
}

/// Result of [`Converter::derive_rgroups`], indexed by 0-based atom index.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DerivedGroups {
    pub uses: BTreeMap<usize, LabelUse>,
    /// Superatoms collapsed into their lowest-numbered atom.
    pub collapses: Vec<(usize, BTreeSet<usize>)>,
    pub warnings: Vec<String>,
}

impl DerivedGroups {
    /// Atom index -> label for every atom that ends up as a labelled pseudo
    /// atom.
    pub fn labels(&self) -> BTreeMap<usize, String> {
        self.uses
            .iter()
            .filter(|(_, u)| {
                matches!(
                    u,
                    LabelUse::Variable(_) | LabelUse::AttachPoint(_) | LabelUse::Pseudo(_)
                )
            })
            .map(|(i, u)| (*i, u.text().to_string()))
            .collect()
    }
}

/// Positional variation found in a built graph.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PositionalResult {
    pub sections: Vec<PositionalVariation>,
    pub anchors: BTreeSet<usize>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Converter {
    config: ConvertConfig,
    pattern: Regex,
    dict: AbbreviationDict,
}

fn atom_symbol_element(symbol: &str) -> Option<(&'static str, Option<u16>)> {
    match symbol {
        "D" => Some(("H", Some(2))),
        "T" => Some(("H", Some(3))),
        s => elements::atomic_number(s)
            .and_then(elements::symbol)
            .map(|e| (e, None)),
    }
}

fn is_anonymous_symbol(symbol: &str) -> bool {
    matches!(symbol, "*" | "A" | "Q" | "L" | "LP" | "M")
        && atom_symbol_element(symbol).is_none()
}

/// Drop atoms (and any bonds touching them) from a document, renumbering
/// every property that refers to atoms or bonds.
fn drop_atoms(doc: &MolfileDoc, remove: &BTreeSet<usize>) -> MolfileDoc {
    let mut amap = vec![None; doc.atoms.len()];
    let mut out = MolfileDoc {
        header: doc.header.clone(),
        unknown_lines: doc.unknown_lines.clone(),
        warnings: doc.warnings.clone(),
        ..Default::default()
    };
    for (i, a) in doc.atoms.iter().enumerate() {
        if !remove.contains(&i) {
            amap[i] = Some(AtomNumber::from_index(out.atoms.len()));
            out.atoms.push(a.clone());
        }
    }
    let m = |n: &AtomNumber| amap[n.index()];
    let mut bmap = vec![None; doc.bonds.len()];
    for (k, b) in doc.bonds.iter().enumerate() {
        if let (Some(a), Some(c)) = (m(&b.a), m(&b.b)) {
            bmap[k] = Some(BondNumber(out.bonds.len() as u32 + 1));
            out.bonds.push(crate::molfile::MolBond {
                a,
                b: c,
                ..b.clone()
            });
        }
    }
    out.aliases = doc.aliases.iter().filter_map(|(n, v)| Some((m(n)?, v.clone()))).collect();
    out.rgp_lines = doc.rgp_lines.iter().filter_map(|(n, v)| Some((m(n)?, *v))).collect();
    out.charges = doc.charges.iter().filter_map(|(n, v)| Some((m(n)?, *v))).collect();
    out.isotopes = doc.isotopes.iter().filter_map(|(n, v)| Some((m(n)?, *v))).collect();
    out.attach_points = doc
        .attach_points
        .iter()
        .filter_map(|(n, v)| Some((m(n)?, *v)))
        .collect();
    out.sgroups = doc
        .sgroups
        .iter()
        .map(|s| SgroupRecord {
            atoms: s.atoms.iter().filter_map(m).collect(),
            crossing_bonds: s
                .crossing_bonds
                .iter()
                .filter_map(|b| bmap[b.index()])
                .collect(),
            ..s.clone()
        })
        .collect();
    out
}

impl Default for Converter {
    fn default() -> Self {
        Converter::with_dictionary(ConvertConfig::default(), AbbreviationDict::builtin())
            .expect("default pattern compiles")
    }
}

impl Converter {
    /// Builds a converter, loading the dictionary from the configured path
    /// or falling back to the bundled one.
    pub fn new(config: ConvertConfig) -> Result<Self, ConfigError> {
        let dict = match &config.abbreviation_dictionary_path {
            Some(p) => AbbreviationDict::load(p)?,
            None => AbbreviationDict::builtin(),
        };
        Self::with_dictionary(config, dict)
    }

    pub fn with_dictionary(config: ConvertConfig, dict: AbbreviationDict) -> Result<Self, ConfigError> {
        if !config.geometry_tolerance.is_finite() || config.geometry_tolerance < 0.0 {
            return Err(ConfigError::Tolerance);
        }
        let pattern = Regex::new(&format!("^(?:{})$", config.rgroup_pattern))?;
        Ok(Converter {
            config,
            pattern,
            dict,
        })
    }

    pub fn config(&self) -> &ConvertConfig {
        &self.config
    }

    pub fn dictionary(&self) -> &AbbreviationDict {
        &self.dict
    }

    pub fn is_variable_group(&self, label: &str) -> bool {
        self.pattern.is_match(label)
    }

    pub fn classify(&self, text: &str) -> LabelUse {
        let t = text.trim().to_string();
        if self.is_variable_group(&t) {
            LabelUse::Variable(t)
        } else if is_attach_point_label(&t) {
            LabelUse::AttachPoint(t)
        } else if self.dict.contains(&t) {
            LabelUse::Expand(t)
        } else if atom_symbol_element(&t).is_some() {
            LabelUse::Element(t)
        } else {
            LabelUse::Pseudo(t)
        }
    }

    fn is_chemical_label(&self, text: &str) -> bool {
        !matches!(self.classify(text), LabelUse::Pseudo(_))
    }

    /// Remove unbonded atoms that carry pure text (captions, compound
    /// numbers) and isolated single-character labels far from the drawing.
    /// Returns the cleaned document and one description per removal.
    pub fn clean(&self, doc: &MolfileDoc) -> (MolfileDoc, Vec<String>) {
        let degrees = doc.degrees();
        let bonded: Vec<usize> = (0..doc.atoms.len()).filter(|&i| degrees[i] > 0).collect();
        let far_field = if bonded.is_empty() {
            None
        } else {
            let xs = bonded.iter().map(|&i| doc.atoms[i].x);
            let ys = bonded.iter().map(|&i| doc.atoms[i].y);
            let (x0, x1) = xs.fold((f64::MAX, f64::MIN), |(lo, hi), v| (lo.min(v), hi.max(v)));
            let (y0, y1) = ys.fold((f64::MAX, f64::MIN), |(lo, hi), v| (lo.min(v), hi.max(v)));
            let mean_bond = doc
                .bonds
                .iter()
                .map(|b| {
                    let (p, q) = (&doc.atoms[b.a.index()], &doc.atoms[b.b.index()]);
                    geometry::distance((p.x, p.y), (q.x, q.y))
                })
                .sum::<f64>()
                / doc.bonds.len() as f64;
            let margin = 2.0 * if mean_bond > 0.0 { mean_bond } else { 1.0 };
            Some((x0 - margin, x1 + margin, y0 - margin, y1 + margin))
        };
        let mut remove = BTreeSet::new();
        let mut removed = Vec::new();
        for i in 0..doc.atoms.len() {
            if degrees[i] > 0 {
                continue;
            }
            let n = AtomNumber::from_index(i);
            let atom = &doc.atoms[i];
            let text = doc.aliases.get(&n).map(String::as_str).or_else(|| {
                (atom_symbol_element(&atom.symbol).is_none()
                    && atom.symbol != "R#"
                    && !is_anonymous_symbol(&atom.symbol))
                .then_some(atom.symbol.as_str())
            });
            if let Some(t) = text {
                if !self.is_chemical_label(t) {
                    remove.insert(i);
                    removed.push(format!("atom {n} {t:?}: unbonded text label"));
                    continue;
                }
            }
            let shown = text.unwrap_or(&atom.symbol);
            let far = far_field.is_some_and(|(x0, x1, y0, y1)| {
                atom.x < x0 || atom.x > x1 || atom.y < y0 || atom.y > y1
            });
            if shown.chars().count() == 1 && far && atom.charge == 0 {
                remove.insert(i);
                removed.push(format!(
                    "atom {n} {shown:?}: isolated single-character label far from the structure"
                ));
            }
        }
        if remove.is_empty() {
            return (doc.clone(), removed);
        }
        (drop_atoms(doc, &remove), removed)
    }

    /// Label handling for aliases, SUP superatoms, `R#` atoms and atom
    /// symbols that are not elements.
    pub fn derive_rgroups(&self, doc: &MolfileDoc) -> Result<DerivedGroups, ConvertError> {
        let mut out = DerivedGroups::default();
        for (n, text) in &doc.aliases {
            if n.index() >= doc.atoms.len() {
                let msg = format!("alias on nonexistent atom {n}");
                if self.config.strict {
                    return Err(ConvertError::Strict(msg));
                }
                out.warnings.push(msg);
                continue;
            }
            out.uses.insert(n.index(), self.classify(text));
        }
        for sg in doc.sgroups.iter().filter(|s| s.stype == SgroupType::Sup) {
            let atoms: BTreeSet<usize> = sg.atoms.iter().map(|a| a.index()).collect();
            let Some(&keep) = atoms.iter().next() else {
                out.warnings
                    .push(format!("superatom {} has no atoms; ignored", sg.index));
                continue;
            };
            let label = sg.subscript.trim();
            if label.is_empty() {
                continue;
            }
            if atoms.len() == 1 {
                out.uses.entry(keep).or_insert_with(|| self.classify(label));
                continue;
            }
            if atoms.iter().any(|a| out.uses.contains_key(a)) {
                out.warnings.push(format!(
                    "superatom {label:?} overlaps an alias; kept expanded"
                ));
                continue;
            }
            match self.classify(label) {
                // already drawn expanded
                LabelUse::Expand(_) | LabelUse::Element(_) => {}
                u => {
                    out.uses.insert(keep, u);
                    out.collapses.push((keep, atoms));
                }
            }
        }
        for (i, atom) in doc.atoms.iter().enumerate() {
            if out.uses.contains_key(&i) {
                continue;
            }
            let n = AtomNumber::from_index(i);
            if atom.symbol == "R#" {
                let label = doc.rgroup_label(n).expect("R# atom");
                if label == "R?" {
                    out.warnings.push(format!("R# atom {n} has no RGP line"));
                }
                out.uses.insert(i, LabelUse::Variable(label));
            } else if atom_symbol_element(&atom.symbol).is_none()
                && !is_anonymous_symbol(&atom.symbol)
            {
                out.uses.insert(i, self.classify(&atom.symbol));
            }
        }
        for u in out.uses.values() {
            if let LabelUse::Pseudo(t) = u {
                out.warnings
                    .push(format!("unknown abbreviation {t:?} kept as a pseudo atom"));
            }
        }
        Ok(out)
    }

    /// SRU Sgroups as frequency variation, in 0-based atom indices.
    /// Sections whose atom sets overlap are all dropped.
    pub fn extract_frequency_variation(
        &self,
        doc: &MolfileDoc,
    ) -> (Vec<FrequencyVariation>, Vec<String>) {
        let mut warnings = Vec::new();
        let srus: Vec<&SgroupRecord> = doc
            .sgroups
            .iter()
            .filter(|s| s.stype == SgroupType::Sru)
            .collect();
        let sets: Vec<BTreeSet<usize>> = srus
            .iter()
            .map(|s| s.atoms.iter().map(|a| a.index()).collect())
            .collect();
        let mut dropped = vec![false; srus.len()];
        for i in 0..srus.len() {
            for j in i + 1..srus.len() {
                if !sets[i].is_disjoint(&sets[j]) {
                    dropped[i] = true;
                    dropped[j] = true;
                    warnings.push(format!(
                        "SRU Sgroups {} and {} share atoms; both dropped",
                        srus[i].index, srus[j].index
                    ));
                }
            }
        }
        let mut out = Vec::new();
        for (k, s) in srus.iter().enumerate() {
            if dropped[k] {
                continue;
            }
            if sets[k].is_empty() {
                warnings.push(format!("SRU Sgroup {} has no atoms; dropped", s.index));
                continue;
            }
            let subscript = match s.subscript.trim() {
                "" => {
                    warnings.push(format!("SRU Sgroup {} has no subscript; using n", s.index));
                    "n".to_string()
                }
                t => t.to_string(),
            };
            let connectivity = match s.connectivity {
                Some(SruConnectivity::HT) => SgConnectivity::HeadToTail,
                Some(SruConnectivity::HH) => SgConnectivity::HeadToHead,
                Some(SruConnectivity::EU) | None => SgConnectivity::Unknown,
            };
            out.push(FrequencyVariation {
                atoms: sets[k].iter().copied().collect(),
                subscript,
                connectivity,
            });
        }
        (out, warnings)
    }

    /// Ring-interior anchors: an atom of degree one whose coordinates lie
    /// inside a ring it does not belong to. Its neighbour becomes the
    /// attachment of an m-section over that ring and the anchor is marked
    /// for removal. Atoms listed in `protected` (labelled atoms) are never
    /// anchors.
    pub fn reconstruct_positional_variation(
        &self,
        g: &MolGraph,
        rings: &[Ring],
        protected: &BTreeSet<usize>,
    ) -> PositionalResult {
        let tol = self.config.geometry_tolerance;
        let mut out = PositionalResult::default();
        let polygons: Vec<Option<Vec<geometry::Point>>> = rings
            .iter()
            .map(|r| r.iter().map(|&v| g.atom(v).coords).collect())
            .collect();
        let mut attachments = BTreeSet::new();
        for u in 0..g.atom_count() {
            if g.degree(u) != 1 || protected.contains(&u) || attachments.contains(&u) {
                continue;
            }
            let Some(p) = g.atom(u).coords else {
                continue;
            };
            let v = g.neighbors(u)[0].0;
            if out.anchors.contains(&v) {
                continue;
            }
            let mut hits: Vec<(f64, usize, usize)> = Vec::new();
            for (r, ring) in rings.iter().enumerate() {
                let Some(poly) = &polygons[r] else {
                    continue;
                };
                if ring.contains(&u) || ring.contains(&v) {
                    continue;
                }
                if geometry::point_in_polygon(p, poly, tol) {
                    let d = geometry::distance(p, geometry::centroid(poly));
                    hits.push((d, ring.len(), r));
                }
            }
            if hits.is_empty() {
                continue;
            }
            hits.sort_by(|a, b| {
                let by_distance = if (a.0 - b.0).abs() <= tol {
                    std::cmp::Ordering::Equal
                } else {
                    a.0.total_cmp(&b.0)
                };
                by_distance.then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2))
            });
            if hits.len() > 1 {
                out.warnings.push(format!(
                    "anchor atom {} lies inside {} rings; using the ring with the nearest centroid",
                    u + 1,
                    hits.len()
                ));
            }
            let mut candidates = rings[hits[0].2].clone();
            candidates.sort_unstable();
            out.anchors.insert(u);
            attachments.insert(v);
            out.sections.push(PositionalVariation {
                attachment: v,
                candidates,
            });
        }
        out
    }

    /// Parse MOL text (strict or lenient per config) and convert it.
    pub fn convert_text(&self, text: &str) -> Result<(CxString, ConversionReport), ConvertError> {
        let doc = parse_molfile_with(
            text,
            ParseOptions {
                strict: self.config.strict,
            },
        )?;
        self.mol_to_cxsmiles(&doc)
    }

    pub fn mol_to_cxsmiles(
        &self,
        doc: &MolfileDoc,
    ) -> Result<(CxString, ConversionReport), ConvertError> {
        let (g, report) = self.build(doc)?;
        Ok((write_cxsmiles(&g), report))
    }

    /// The whole pipeline up to the final graph.
    pub fn build(&self, doc: &MolfileDoc) -> Result<(MolGraph, ConversionReport), ConvertError> {
        let mut report = ConversionReport {
            input_atoms: doc.atoms.len(),
            warnings: doc.warnings.clone(),
            ..Default::default()
        };
        let (doc, removed) = self.clean(doc);
        report.removed_elements = removed;
        if doc.atoms.is_empty() {
            return Err(ConvertError::NoStructure);
        }
        let derived = self.derive_rgroups(&doc)?;
        report.warnings.extend(derived.warnings.iter().cloned());

        let mut atoms: Vec<Atom> = doc
            .atoms
            .iter()
            .map(|a| {
                let mut atom = match atom_symbol_element(&a.symbol) {
                    Some((e, iso)) => {
                        let mut atom = Atom::new(e);
                        atom.isotope = iso;
                        atom
                    }
                    None => Atom::pseudo(),
                };
                atom.formal_charge = a.charge;
                if a.isotope.is_some() {
                    atom.isotope = a.isotope;
                }
                atom.at(a.x, a.y)
            })
            .collect();
        let mut labels = BTreeMap::new();
        let mut expansions = Vec::new();
        for (&i, u) in &derived.uses {
            match u {
                LabelUse::Variable(t) | LabelUse::AttachPoint(t) | LabelUse::Pseudo(t) => {
                    atoms[i] = Atom::pseudo().at(doc.atoms[i].x, doc.atoms[i].y);
                    labels.insert(i, t.clone());
                }
                LabelUse::Element(t) => {
                    let (e, iso) = atom_symbol_element(t).expect("classified as element");
                    atoms[i].element = e.to_string();
                    atoms[i].isotope = iso;
                }
                LabelUse::Expand(t) => expansions.push((i, t.clone())),
            }
        }

        // bonds, with superatom collapses redirected onto the kept atom
        let mut owner: Vec<usize> = (0..atoms.len()).collect();
        let mut collapsed = BTreeSet::new();
        for (keep, set) in &derived.collapses {
            for &a in set {
                owner[a] = *keep;
                if a != *keep {
                    collapsed.insert(a);
                }
            }
        }
        let mut bonds: Vec<Bond> = Vec::new();
        let mut seen = BTreeSet::new();
        for b in &doc.bonds {
            let (a, c) = (owner[b.a.index()], owner[b.b.index()]);
            if a == c {
                continue;
            }
            if !seen.insert((a.min(c), a.max(c))) {
                report
                    .warnings
                    .push(format!("duplicate bond {}-{} after collapsing a superatom", a + 1, c + 1));
                continue;
            }
            let order = match b.order {
                2 => BondOrder::Double,
                3 => BondOrder::Triple,
                4 if !atoms[a].is_pseudo() && !atoms[c].is_pseudo() => {
                    atoms[a].aromatic = true;
                    atoms[c].aromatic = true;
                    BondOrder::Aromatic
                }
                _ => BondOrder::Single,
            };
            bonds.push(Bond::new(a, c, order));
        }
        // labelled atoms never carry aromatic flags
        for &i in labels.keys() {
            atoms[i].aromatic = false;
        }
        report.superatom_atoms_collapsed = collapsed.len();

        let before_expansion = atoms.len();
        for (i, label) in expansions {
            let abbr = self.dict.get(&label).expect("classified from the dictionary");
            let bond_ids: Vec<usize> = (0..bonds.len())
                .filter(|&k| bonds[k].a == i || bonds[k].b == i)
                .collect();
            let k = abbr.attach.len();
            if k > 1 && bond_ids.len() != k {
                report.warnings.push(format!(
                    "abbreviation {label:?} on atom {} needs {k} bonds, found {}; kept as a pseudo atom",
                    i + 1,
                    bond_ids.len()
                ));
                atoms[i] = Atom::pseudo().at(doc.atoms[i].x, doc.atoms[i].y);
                labels.insert(i, label);
                continue;
            }
            let frag = &abbr.fragment;
            let first = abbr.attach[0];
            let mut fmap = vec![0; frag.atom_count()];
            for (j, fa) in frag.atoms().iter().enumerate() {
                if j == first {
                    fmap[j] = i;
                    let coords = atoms[i].coords;
                    atoms[i] = fa.clone();
                    atoms[i].coords = coords;
                } else {
                    fmap[j] = atoms.len();
                    let mut a = fa.clone();
                    a.coords = None;
                    atoms.push(a);
                }
            }
            for fb in frag.bonds() {
                bonds.push(Bond::new(fmap[fb.a], fmap[fb.b], fb.order));
            }
            for (slot, &k_id) in bond_ids.iter().enumerate() {
                let target = fmap[abbr.attach[if k == 1 { 0 } else { slot }]];
                let b = &mut bonds[k_id];
                if b.a == i {
                    b.a = target;
                } else {
                    b.b = target;
                }
            }
        }
        report.expansion_atoms_added = atoms.len() - before_expansion;

        let mut attach_points = BTreeSet::new();
        let before_ap = atoms.len();
        for (n, &v) in &doc.attach_points {
            let host = owner[n.index()];
            for (bit, label) in [(1u8, "_AP1"), (2u8, "_AP2")] {
                if v & bit != 0 {
                    let ap = atoms.len();
                    atoms.push(Atom::pseudo());
                    bonds.push(Bond::new(host, ap, BondOrder::Single));
                    labels.insert(ap, label.to_string());
                    attach_points.insert(ap);
                }
            }
        }
        report.attach_atoms_added = atoms.len() - before_ap;

        let staged = MolGraph::new(atoms, bonds)?;
        let rings = perceive_rings(&staged);
        let protected: BTreeSet<usize> = labels.keys().copied().collect();
        let positional = self.reconstruct_positional_variation(&staged, &rings, &protected);
        report.warnings.extend(positional.warnings.iter().cloned());
        report.anchors_removed = positional.anchors.len();

        let (sg_sections, sg_warnings) = self.extract_frequency_variation(&doc);
        report.warnings.extend(sg_warnings);
        let features = MarkushFeatures {
            labels,
            attach_points,
            m_sections: positional.sections,
            sg_sections,
        };
        let staged = staged.with_features(features)?;
        let remove: BTreeSet<usize> = collapsed.union(&positional.anchors).copied().collect();
        let (g, _) = staged.without_atoms(&remove);
        let lost_sg = staged.features().sg_sections.len() - g.features().sg_sections.len();
        if lost_sg > 0 {
            report
                .warnings
                .push(format!("{lost_sg} SRU Sgroup(s) lay entirely inside collapsed superatoms"));
        }
        if g.is_empty() {
            return Err(ConvertError::NoStructure);
        }

        let f = g.features();
        report.rgroups_derived = f
            .variable_groups()
            .filter(|(_, l)| self.is_variable_group(l))
            .count();
        report.pseudo_labels = f.variable_groups().count() - report.rgroups_derived;
        report.attach_points = f.attach_points.len();
        report.sg_extracted = f.sg_sections.len();
        report.m_reconstructed = f.m_sections.len();
        report.output_atoms = g.atom_count();
        Ok((g, report))
    }
}

/// Convert with the default configuration and bundled dictionary.
pub fn mol_to_cxsmiles(doc: &MolfileDoc) -> Result<(CxString, ConversionReport), ConvertError> {
    Converter::default().mol_to_cxsmiles(doc)
}

#[cfg(test)]
mod tests;
