//! The `|...|` extension block: labels, `m:` and `Sg:` sections.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::features::{
    is_attach_point_label, FrequencyVariation, MarkushFeatures, PositionalVariation,
    SgConnectivity,
};
use super::smiles::{parse_smiles, SmilesError};
use super::writer::emit;
use crate::canon::{canonical_form, feature_view, CanonicalForm};
use crate::molgraph::{GraphError, MolGraph};

/// A SMILES string, optionally followed by one space and a `|...|` block.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CxString {
    pub text: String,
}

impl CxString {
    pub fn new(text: impl Into<String>) -> Self {
        CxString { text: text.into() }
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    /// The SMILES before any whitespace.
    pub fn smiles_part(&self) -> &str {
        let t = self.text.trim_start();
        t.split(|c: char| c.is_ascii_whitespace()).next().unwrap_or("")
    }

    pub fn has_extension(&self) -> bool {
        self.text.trim_start()[self.smiles_part().len()..]
            .trim_start()
            .starts_with('|')
    }
}

impl fmt::Display for CxString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

impl From<String> for CxString {
    fn from(text: String) -> Self {
        CxString { text }
    }
}

impl From<&str> for CxString {
    fn from(text: &str) -> Self {
        CxString::new(text)
    }
}

impl FromStr for CxString {
    type Err = std::convert::Infallible;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(CxString::new(s))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CxParseError {
    #[error("SMILES: {0}")]
    Smiles(#[from] SmilesError),
    #[error("section `{section}` at offset {offset}: {message}")]
    Extension {
        section: String,
        offset: usize,
        message: String,
    },
}

impl CxParseError {
    pub fn offset(&self) -> usize {
        match self {
            CxParseError::Smiles(e) => e.offset,
            CxParseError::Extension { offset, .. } => *offset,
        }
    }
}

pub fn parse_cxsmiles(s: &str) -> Result<MolGraph, CxParseError> {
    parse_cxsmiles_with_warnings(s).map(|(g, _)| g)
}

/// Parse and also return the warnings raised for skipped or repaired parts
/// of the extension block.
pub fn parse_cxsmiles_with_warnings(s: &str) -> Result<(MolGraph, Vec<String>), CxParseError> {
    let lead = s.len() - s.trim_start().len();
    let body = s.trim_start();
    let split = body
        .find(|c: char| c.is_ascii_whitespace())
        .unwrap_or(body.len());
    let graph = parse_smiles(&body[..split]).map_err(|e| SmilesError {
        offset: e.offset + lead,
        kind: e.kind,
    })?;
    let rest = &body[split..];
    let rest_lead = lead + split + (rest.len() - rest.trim_start().len());
    let rest = rest.trim_start();
    let mut warnings = Vec::new();
    if !rest.starts_with('|') {
        return Ok((graph, warnings));
    }
    let Some(close) = rest[1..].find('|') else {
        return Err(CxParseError::Extension {
            section: "|".into(),
            offset: rest_lead,
            message: "unterminated extension block".into(),
        });
    };
    let block = &rest[1..1 + close];
    let mut p = BlockParser {
        src: block.as_bytes(),
        text: block,
        pos: 0,
        base: rest_lead + 1,
        atoms: graph.atom_count(),
        features: MarkushFeatures::default(),
        warnings: &mut warnings,
    };
    p.run()?;
    let features = p.features;
    let base = rest_lead;
    let graph = graph.with_features(features).map_err(|e| {
        let section = match e {
            GraphError::EmptyRepeatUnit
            | GraphError::DuplicateRepeatAtom(_)
            | GraphError::EmptySubscript => "Sg",
            GraphError::EmptyCandidates(_)
            | GraphError::DuplicateCandidate(..)
            | GraphError::AttachmentIsCandidate(_) => "m",
            _ => "$",
        };
        CxParseError::Extension {
            section: section.into(),
            offset: base,
            message: e.to_string(),
        }
    })?;
    Ok((graph, warnings))
}

struct BlockParser<'a> {
    src: &'a [u8],
    text: &'a str,
    pos: usize,
    base: usize,
    atoms: usize,
    features: MarkushFeatures,
    warnings: &'a mut Vec<String>,
}

impl BlockParser<'_> {
    fn error(&self, section: &str, message: impl Into<String>) -> CxParseError {
        CxParseError::Extension {
            section: section.into(),
            offset: self.base + self.pos,
            message: message.into(),
        }
    }

    fn starts_with(&self, s: &str) -> bool {
        self.src[self.pos..].starts_with(s.as_bytes())
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn find_from(&self, from: usize, c: u8) -> Option<usize> {
        self.src[from..].iter().position(|&b| b == c).map(|p| p + from)
    }

    fn run(&mut self) -> Result<(), CxParseError> {
        while self.pos < self.src.len() {
            if self.starts_with("$_AV:") {
                let end = self
                    .find_from(self.pos + 5, b'$')
                    .ok_or_else(|| self.error("$_AV", "unterminated atom values"))?;
                self.warnings.push("atom values section dropped".into());
                self.pos = end + 1;
            } else if self.starts_with("$") {
                self.labels()?;
            } else if self.starts_with("(") {
                let end = self
                    .find_from(self.pos, b')')
                    .ok_or_else(|| self.error("(", "unterminated coordinates"))?;
                self.warnings.push("coordinates section dropped".into());
                self.pos = end + 1;
            } else if self.starts_with("m:") {
                self.pos += 2;
                self.m_section()?;
            } else if self.starts_with("Sg:") {
                self.pos += 3;
                self.sg_section()?;
            } else {
                self.skip_unknown();
            }
            match self.peek() {
                None => {}
                Some(b',') => self.pos += 1,
                Some(_) => return Err(self.error("|", "expected ',' between sections")),
            }
        }
        Ok(())
    }

    fn labels(&mut self) -> Result<(), CxParseError> {
        let start = self.pos + 1;
        let end = self
            .find_from(start, b'$')
            .ok_or_else(|| self.error("$", "unterminated label section"))?;
        let content = &self.text[start..end];
        let parts: Vec<&str> = if content.is_empty() {
            Vec::new()
        } else {
            content.split(';').collect()
        };
        if parts.len() > self.atoms {
            return Err(self.error(
                "$",
                format!("{} labels for {} atoms", parts.len(), self.atoms),
            ));
        }
        for (i, part) in parts.into_iter().enumerate() {
            if part.is_empty() {
                continue;
            }
            let label = unescape(part);
            if is_attach_point_label(&label) {
                self.features.attach_points.insert(i);
            }
            self.features.labels.insert(i, label);
        }
        self.pos = end + 1;
        Ok(())
    }

    fn index(&mut self, section: &str) -> Result<usize, CxParseError> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error(section, "expected an atom index"));
        }
        let value: usize = self.text[start..self.pos]
            .parse()
            .map_err(|_| self.error(section, "atom index too large"))?;
        if value >= self.atoms {
            self.pos = start;
            return Err(self.error(
                section,
                format!("atom index {value} out of range for {} atoms", self.atoms),
            ));
        }
        Ok(value)
    }

    fn m_section(&mut self) -> Result<(), CxParseError> {
        loop {
            let attachment = self.index("m")?;
            if self.peek() != Some(b':') {
                return Err(self.error("m", "expected ':' after attachment atom"));
            }
            self.pos += 1;
            let mut candidates = vec![self.index("m")?];
            while self.peek() == Some(b'.') {
                self.pos += 1;
                candidates.push(self.index("m")?);
            }
            self.features.m_sections.push(PositionalVariation {
                attachment,
                candidates,
            });
            // `m:1:2.3,4:5.6` continues the same section
            let continues = self.peek() == Some(b',')
                && self.src.get(self.pos + 1).is_some_and(|c| c.is_ascii_digit());
            if !continues {
                return Ok(());
            }
            self.pos += 1;
        }
    }

    fn field(&mut self) -> &str {
        let start = self.pos;
        while self.peek().is_some_and(|c| c != b':' && c != b',') {
            self.pos += 1;
        }
        &self.text[start..self.pos]
    }

    fn sg_section(&mut self) -> Result<(), CxParseError> {
        let kind = self.field().to_string();
        if self.peek() != Some(b':') {
            return Err(self.error("Sg", "expected ':' after group type"));
        }
        self.pos += 1;
        let mut atoms = vec![self.index("Sg")?];
        while matches!(self.peek(), Some(b',' | b'.'))
            && self.src.get(self.pos + 1).is_some_and(|c| c.is_ascii_digit())
        {
            self.pos += 1;
            atoms.push(self.index("Sg")?);
        }
        let mut subscript = String::new();
        let mut connectivity = SgConnectivity::Unknown;
        if self.peek() == Some(b':') {
            self.pos += 1;
            subscript = unescape(self.field());
            if self.peek() == Some(b':') {
                self.pos += 1;
                let code = self.field().to_string();
                connectivity = SgConnectivity::from_code(&code).unwrap_or_else(|| {
                    self.warnings
                        .push(format!("unknown Sg connectivity {code:?}, using eu"));
                    SgConnectivity::Unknown
                });
            }
            // trailing fields some writers append
            while self.peek() == Some(b':') {
                self.pos += 1;
                self.field();
            }
        }
        if kind != "n" {
            self.warnings
                .push(format!("Sg section of type {kind:?} dropped"));
            return Ok(());
        }
        if subscript.is_empty() {
            self.warnings
                .push("Sg section without subscript, using \"n\"".into());
            subscript = "n".into();
        }
        self.features.sg_sections.push(FrequencyVariation {
            atoms,
            subscript,
            connectivity,
        });
        Ok(())
    }

    fn skip_unknown(&mut self) {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c == b',' && self.src.get(self.pos + 1).is_some_and(|n| !n.is_ascii_digit()) {
                break;
            }
            self.pos += 1;
        }
        if self.peek() == Some(b',') && self.pos + 1 == self.src.len() {
            self.pos += 1;
        }
        let name: String = self.text[start..self.pos]
            .chars()
            .take_while(|c| *c != ':')
            .take(12)
            .collect();
        self.warnings
            .push(format!("unsupported section {name:?} dropped"));
    }
}

fn unescape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(p) = rest.find("&#") {
        out.push_str(&rest[..p]);
        let tail = &rest[p + 2..];
        let decoded = tail.find(';').and_then(|end| {
            let code: u32 = tail[..end].parse().ok()?;
            Some((char::from_u32(code)?, end))
        });
        match decoded {
            Some((c, end)) => {
                out.push(c);
                rest = &tail[end + 1..];
            }
            None => {
                out.push_str("&#");
                rest = tail;
            }
        }
    }
    out.push_str(rest);
    out
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        if matches!(c, ';' | '$' | '|' | '&' | ':' | ',') || c.is_whitespace() {
            out.push_str(&format!("&#{};", c as u32));
        } else {
            out.push(c);
        }
    }
    out
}

/// Full CXSMILES text for a canonical form: the traversal fixes the atom
/// order and every section is re-indexed to it.
pub(crate) fn render_canonical(cf: &CanonicalForm) -> CxString {
    let g = &cf.graph;
    let emission = emit(g, &cf.rank);
    let mut pos = vec![0usize; g.atom_count()];
    for (i, &v) in emission.order.iter().enumerate() {
        pos[v] = i;
    }
    let f = g.features();
    let mut sections = Vec::new();
    if !f.labels.is_empty() {
        let mut slots = vec![String::new(); g.atom_count()];
        for (&v, l) in &f.labels {
            slots[pos[v]] = escape(l);
        }
        sections.push(format!("${}$", slots.join(";")));
    }
    let mut ms: Vec<(usize, Vec<usize>)> = f
        .m_sections
        .iter()
        .map(|m| {
            let mut c: Vec<usize> = m.candidates.iter().map(|&c| pos[c]).collect();
            c.sort_unstable();
            (pos[m.attachment], c)
        })
        .collect();
    ms.sort();
    for (a, c) in ms {
        let list: Vec<String> = c.iter().map(usize::to_string).collect();
        sections.push(format!("m:{a}:{}", list.join(".")));
    }
    let mut sgs: Vec<(Vec<usize>, String, SgConnectivity)> = f
        .sg_sections
        .iter()
        .map(|s| {
            let mut a: Vec<usize> = s.atoms.iter().map(|&a| pos[a]).collect();
            a.sort_unstable();
            (a, s.subscript.clone(), s.connectivity)
        })
        .collect();
    sgs.sort();
    for (a, sub, conn) in sgs {
        let list: Vec<String> = a.iter().map(usize::to_string).collect();
        sections.push(format!("Sg:n:{}:{}:{}", list.join(","), escape(&sub), conn));
    }
    let mut text = emission.text;
    if !sections.is_empty() {
        text.push_str(" |");
        text.push_str(&sections.join(","));
        text.push('|');
    }
    CxString { text }
}

/// Canonical CXSMILES. Atoms are written in canonical order and every
/// section refers to that order; a graph without features gives plain SMILES.
pub fn write_cxsmiles(g: &MolGraph) -> CxString {
    render_canonical(&canonical_form(&feature_view(g), true, true, false))
}
