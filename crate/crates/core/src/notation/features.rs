use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

/// Repeat-unit connectivity of a frequency-variation section.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SgConnectivity {
    #[serde(rename = "ht")]
    HeadToTail,
    #[serde(rename = "hh")]
    HeadToHead,
    #[serde(rename = "eu")]
    Unknown,
}

impl SgConnectivity {
    pub fn as_str(self) -> &'static str {
        match self {
            SgConnectivity::HeadToTail => "ht",
            SgConnectivity::HeadToHead => "hh",
            SgConnectivity::Unknown => "eu",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        match code.to_ascii_lowercase().as_str() {
            "ht" => Some(SgConnectivity::HeadToTail),
            "hh" => Some(SgConnectivity::HeadToHead),
            "eu" | "" => Some(SgConnectivity::Unknown),
            _ => None,
        }
    }
}

impl fmt::Display for SgConnectivity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A substituent whose bond may land on any of several ring positions (`m:` section).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PositionalVariation {
    pub attachment: usize,
    pub candidates: Vec<usize>,
}

/// A structural repeating unit (`Sg:n:` section).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FrequencyVariation {
    pub atoms: Vec<usize>,
    pub subscript: String,
    pub connectivity: SgConnectivity,
}

/// The Markush layer carried on top of a backbone graph.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct MarkushFeatures {
    pub labels: BTreeMap<usize, String>,
    pub attach_points: BTreeSet<usize>,
    pub m_sections: Vec<PositionalVariation>,
    pub sg_sections: Vec<FrequencyVariation>,
}

/// `_AP<digits>` marks an attachment point.
pub fn is_attach_point_label(label: &str) -> bool {
    label
        .strip_prefix("_AP")
        .is_some_and(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
}

impl MarkushFeatures {
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
            && self.attach_points.is_empty()
            && self.m_sections.is_empty()
            && self.sg_sections.is_empty()
    }

    /// Labels that are not attachment points.
    pub fn variable_groups(&self) -> impl Iterator<Item = (usize, &str)> {
        self.labels
            .iter()
            .filter(|(_, l)| !is_attach_point_label(l))
            .map(|(i, l)| (*i, l.as_str()))
    }

    /// Re-index through `map` (old index -> new index). Entries whose atoms
    /// vanish are dropped; sections emptied by the mapping are dropped too.
    pub fn remap(&self, map: &[Option<usize>]) -> MarkushFeatures {
        let m = |i: usize| map.get(i).copied().flatten();
        let labels = self
            .labels
            .iter()
            .filter_map(|(i, l)| Some((m(*i)?, l.clone())))
            .collect();
        let attach_points = self.attach_points.iter().filter_map(|i| m(*i)).collect();
        let m_sections = self
            .m_sections
            .iter()
            .filter_map(|s| {
                let attachment = m(s.attachment)?;
                let candidates: Vec<usize> = s.candidates.iter().filter_map(|c| m(*c)).collect();
                (!candidates.is_empty()).then_some(PositionalVariation {
                    attachment,
                    candidates,
                })
            })
            .collect();
        let sg_sections = self
            .sg_sections
            .iter()
            .filter_map(|s| {
                let atoms: Vec<usize> = s.atoms.iter().filter_map(|a| m(*a)).collect();
                (!atoms.is_empty()).then(|| FrequencyVariation {
                    atoms,
                    subscript: s.subscript.clone(),
                    connectivity: s.connectivity,
                })
            })
            .collect();
        MarkushFeatures {
            labels,
            attach_points,
            m_sections,
            sg_sections,
        }
    }
}
