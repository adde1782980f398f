use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::molgraph::MolGraph;
use crate::notation::parse_smiles;

const BUILTIN: &str = include_str!("../../data/abbreviations.tsv");

#[derive(Debug, Error)]
pub enum DictionaryError {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
}

/// A group abbreviation and where it bonds to the rest of the molecule.
#[derive(Debug, Clone)]
pub struct Abbreviation {
    pub smiles: String,
    /// Fragment without its `*` atoms.
    pub fragment: MolGraph,
    /// Fragment atom bonded to each `*`, in `*` order.
    pub attach: Vec<usize>,
}

impl Abbreviation {
    pub fn new(smiles: &str) -> Result<Self, String> {
        let g = parse_smiles(smiles).map_err(|e| e.to_string())?;
        let stars: Vec<usize> = (0..g.atom_count())
            .filter(|&i| g.atom(i).element == "*")
            .collect();
        if stars.is_empty() {
            return Err("no `*` attachment atom".into());
        }
        let mut attach_old = Vec::new();
        for &s in &stars {
            match g.neighbors(s) {
                [(w, _)] if g.atom(*w).element != "*" => attach_old.push(*w),
                _ => return Err("each `*` needs exactly one non-`*` neighbour".into()),
            }
        }
        let (fragment, map) = g.without_atoms(&stars.iter().copied().collect());
        if fragment.is_empty() {
            return Err("fragment has no atoms".into());
        }
        let attach = attach_old
            .into_iter()
            .map(|a| map[a].expect("attachment atoms are kept"))
            .collect();
        Ok(Abbreviation {
            smiles: smiles.to_string(),
            fragment,
            attach,
        })
    }
}

/// Label -> fragment table used to expand abbreviations such as `OMe`.
/// The text format is one `label<TAB>smiles` pair per line with `*` at each
/// attachment; blank lines and `#` comments are ignored.
#[derive(Debug, Clone, Default)]
pub struct AbbreviationDict {
    entries: BTreeMap<String, Abbreviation>,
}

impl AbbreviationDict {
    pub fn builtin() -> Self {
        Self::parse(BUILTIN).expect("bundled dictionary is valid")
    }

    pub fn parse(text: &str) -> Result<Self, DictionaryError> {
        let mut dict = AbbreviationDict::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| DictionaryError::Line {
                line: i + 1,
                message,
            };
            let (label, smiles) = line
                .split_once('\t')
                .ok_or_else(|| err("expected label<TAB>smiles".into()))?;
            let (label, smiles) = (label.trim(), smiles.trim());
            if label.is_empty() {
                return Err(err("empty label".into()));
            }
            let abbr = Abbreviation::new(smiles).map_err(|m| err(format!("{label}: {m}")))?;
            dict.entries.insert(label.to_string(), abbr);
        }
        Ok(dict)
    }

    pub fn load(path: &Path) -> Result<Self, DictionaryError> {
        let text = std::fs::read_to_string(path).map_err(|source| DictionaryError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn get(&self, label: &str) -> Option<&Abbreviation> {
        self.entries.get(label)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.entries.contains_key(label)
    }

    pub fn insert(&mut self, label: impl Into<String>, smiles: &str) -> Result<(), String> {
        self.entries.insert(label.into(), Abbreviation::new(smiles)?);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
