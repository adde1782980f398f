//! Seeded CXSMILES augmentation: inject Markush features into plain SMILES.
//!
//! The input is first rewritten in canonical atom order, so the chosen sites
//! depend only on the molecule and the seed.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canon::{feature_equivalent, KeyFlags};
use crate::molgraph::{perceive_rings, ring_bonds, Atom, Bond, BondOrder, MolGraph};
use crate::notation::{
    parse_cxsmiles, parse_smiles, write_cxsmiles, CxString, FrequencyVariation, MarkushFeatures,
    PositionalVariation, SgConnectivity, SmilesError,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentConfig {
    pub p_variable_group: f64,
    pub p_attach_point: f64,
    pub p_m_section: f64,
    pub p_sg_section: f64,
    pub max_features_per_molecule: usize,
    pub label_vocabulary: Vec<String>,
    pub seed: u64,
}

/// Defaults are tuned to land near the feature mix of patent Markush
/// corpora; every value is meant to be overridden.
impl Default for AugmentConfig {
    fn default() -> Self {
        let mut vocab: Vec<String> = (1..=10).map(|i| format!("R{i}")).collect();
        vocab.extend(["X", "Y", "Z"].map(String::from));
        AugmentConfig {
            p_variable_group: 0.91,
            p_attach_point: 0.08,
            p_m_section: 0.42,
            p_sg_section: 0.55,
            max_features_per_molecule: 4,
            label_vocabulary: vocab,
            seed: 0,
        }
    }
}

impl AugmentConfig {
    /// All probabilities zero: augmentation only canonicalizes.
    pub fn none() -> Self {
        AugmentConfig {
            p_variable_group: 0.0,
            p_attach_point: 0.0,
            p_m_section: 0.0,
            p_sg_section: 0.0,
            ..AugmentConfig::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), AugmentError> {
        for (name, p) in [
            ("p_variable_group", self.p_variable_group),
            ("p_attach_point", self.p_attach_point),
            ("p_m_section", self.p_m_section),
            ("p_sg_section", self.p_sg_section),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(AugmentError::Config(format!("{name} = {p} is not in [0, 1]")));
            }
        }
        if self.label_vocabulary.iter().all(|l| l.is_empty()) {
            return Err(AugmentError::Config("label_vocabulary is empty".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    VariableGroup,
    AttachPoint,
    MSection,
    SgSection,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Skip {
    pub feature: Feature,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Augmented {
    pub cxsmiles: CxString,
    pub applied: Vec<Feature>,
    pub skipped: Vec<Skip>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AugmentError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("input does not parse: {0}")]
    Parse(#[from] SmilesError),
    #[error("input has no heavy atoms")]
    Empty,
    /// Internal failure: the emitted CXSMILES did not re-parse to the same
    /// structure.
    #[error("output failed the validity gate: {0}")]
    Gate(String),
}

struct Work {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    features: MarkushFeatures,
    in_ring_atom: Vec<bool>,
}

impl Work {
    fn degree(&self, i: usize) -> usize {
        self.bonds.iter().filter(|b| b.a == i || b.b == i).count()
    }

    fn incident(&self, i: usize) -> impl Iterator<Item = (usize, &Bond)> {
        self.bonds
            .iter()
            .enumerate()
            .filter(move |(_, b)| b.a == i || b.b == i)
    }

    fn add_pseudo(&mut self, label: String) -> usize {
        let i = self.atoms.len();
        self.atoms.push(Atom::pseudo());
        self.in_ring_atom.push(false);
        self.features.labels.insert(i, label);
        i
    }

    fn bond(&mut self, a: usize, b: usize) {
        self.bonds.push(Bond::new(a, b, BondOrder::Single));
    }

    fn graph(&self) -> MolGraph {
        MolGraph::new(self.atoms.clone(), self.bonds.clone())
            .and_then(|g| g.with_features(self.features.clone()))
            .expect("augmentation keeps the graph valid")
    }
}

fn pick_label<R: Rng>(rng: &mut R, cfg: &AugmentConfig) -> String {
    let usable: Vec<&String> = cfg.label_vocabulary.iter().filter(|l| !l.is_empty()).collect();
    usable.choose(rng).expect("validated vocabulary").to_string()
}

fn variable_group<R: Rng>(w: &mut Work, rng: &mut R, cfg: &AugmentConfig) -> Result<(), String> {
    let sites: Vec<usize> = (0..w.atoms.len())
        .filter(|&i| {
            !w.atoms[i].is_pseudo()
                && !w.features.labels.contains_key(&i)
                && w.degree(i) == 1
                && w.incident(i).all(|(_, b)| b.order == BondOrder::Single)
        })
        .collect();
    let &site = sites.choose(rng).ok_or("no terminal single-bonded atom")?;
    let label = pick_label(rng, cfg);
    w.atoms[site] = Atom::pseudo();
    for k in w.incident(site).map(|(k, _)| k).collect::<Vec<_>>() {
        w.bonds[k].stereo = None;
    }
    w.features.labels.insert(site, label);
    Ok(())
}

fn attach_point<R: Rng>(w: &mut Work, rng: &mut R, g: &MolGraph) -> Result<(), String> {
    let sites: Vec<usize> = (0..g.atom_count())
        .filter(|&i| {
            !w.atoms[i].is_pseudo() && w.atoms[i].stereo.is_none() && g.total_h(i) > 0
        })
        .collect();
    let &site = sites.choose(rng).ok_or("no atom carries a hydrogen")?;
    if let Some(h) = w.atoms[site].explicit_h {
        w.atoms[site].explicit_h = Some(h - 1);
    }
    let n = w.features.attach_points.len() + 1;
    let ap = w.add_pseudo(format!("_AP{n}"));
    w.features.attach_points.insert(ap);
    w.bond(site, ap);
    Ok(())
}

fn m_section<R: Rng>(w: &mut Work, rng: &mut R, cfg: &AugmentConfig, g: &MolGraph) -> Result<(), String> {
    let rings = perceive_rings(g);
    let ring = rings.choose(rng).ok_or("no ring")?;
    let mut candidates = ring.clone();
    candidates.sort_unstable();
    let label = pick_label(rng, cfg);
    let attachment = w.add_pseudo(label);
    w.features.m_sections.push(PositionalVariation {
        attachment,
        candidates,
    });
    Ok(())
}

fn sg_section<R: Rng>(w: &mut Work, rng: &mut R) -> Result<(), String> {
    let eligible = |w: &Work, i: usize| {
        i < w.atoms.len()
            && !w.atoms[i].is_pseudo()
            && !w.in_ring_atom[i]
            && w.atoms[i].stereo.is_none()
            && w.degree(i) == 2
            && w
                .incident(i)
                .all(|(_, b)| b.order == BondOrder::Single && b.stereo.is_none())
    };
    let sites: Vec<usize> = (0..w.atoms.len()).filter(|&i| eligible(w, i)).collect();
    let &start = sites.choose(rng).ok_or("no acyclic chain atom")?;
    let mut unit = vec![start];
    if rng.gen_bool(0.5) {
        let next: Vec<usize> = w
            .incident(start)
            .map(|(_, b)| b.other(start))
            .filter(|&j| eligible(w, j))
            .collect();
        if let Some(&j) = next.choose(rng) {
            unit.push(j);
        }
    }
    unit.sort_unstable();
    w.features.sg_sections.push(FrequencyVariation {
        atoms: unit,
        subscript: "n".into(),
        connectivity: SgConnectivity::HeadToTail,
    });
    Ok(())
}

/// Canonicalize `smiles` and inject features as configured. A feature
/// that cannot be placed is recorded in `skipped`, as is any feature
/// beyond `max_features_per_molecule`.
pub fn augment(smiles: &str, cfg: &AugmentConfig) -> Result<Augmented, AugmentError> {
    cfg.validate()?;
    let parsed = parse_smiles(smiles)?;
    if parsed.heavy_atom_count() == 0 {
        return Err(AugmentError::Empty);
    }
    let g = parse_smiles(&crate::write_smiles(&parsed, true))?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let in_ring_bond = ring_bonds(&g);
    let mut in_ring_atom = vec![false; g.atom_count()];
    for (k, b) in g.bonds().iter().enumerate() {
        if in_ring_bond[k] {
            in_ring_atom[b.a] = true;
            in_ring_atom[b.b] = true;
        }
    }
    let (atoms, bonds, features) = g.clone().into_parts();
    let mut w = Work {
        atoms,
        bonds,
        features,
        in_ring_atom,
    };

    let plan = [
        (Feature::VariableGroup, cfg.p_variable_group),
        (Feature::AttachPoint, cfg.p_attach_point),
        (Feature::MSection, cfg.p_m_section),
        (Feature::SgSection, cfg.p_sg_section),
    ];
    let mut applied = Vec::new();
    let mut skipped = Vec::new();
    for (feature, p) in plan {
        if !rng.gen_bool(p) {
            continue;
        }
        if applied.len() >= cfg.max_features_per_molecule {
            skipped.push(Skip {
                feature,
                reason: "feature limit reached".into(),
            });
            continue;
        }
        let result = match feature {
            Feature::VariableGroup => variable_group(&mut w, &mut rng, cfg),
            Feature::AttachPoint => attach_point(&mut w, &mut rng, &g),
            Feature::MSection => m_section(&mut w, &mut rng, cfg, &g),
            Feature::SgSection => sg_section(&mut w, &mut rng),
        };
        match result {
            Ok(()) => applied.push(feature),
            Err(reason) => skipped.push(Skip { feature, reason }),
        }
    }

    let out = w.graph();
    let cx = write_cxsmiles(&out);
    let back = parse_cxsmiles(cx.as_str()).map_err(|e| AugmentError::Gate(format!("{}: {e}", cx.as_str())))?;
    if !feature_equivalent(&out, &back, KeyFlags::with_stereo()).equivalent {
        return Err(AugmentError::Gate(format!("{} does not round-trip", cx.as_str())));
    }
    Ok(Augmented {
        cxsmiles: cx,
        applied,
        skipped,
    })
}
