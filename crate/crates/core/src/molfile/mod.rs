//! MOL V2000 connection tables.
//!
//! Atom and bond numbers stay 1-based inside [`MolfileDoc`] (as
//! [`AtomNumber`] / [`BondNumber`]); [`AtomNumber::index`] is the only place
//! they turn into 0-based graph indices.

mod writer;

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

pub use writer::write_molfile;

/// 1-based atom number as written in the file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct AtomNumber(pub u32);

impl AtomNumber {
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    pub fn from_index(i: usize) -> Self {
        AtomNumber(i as u32 + 1)
    }
}

impl fmt::Display for AtomNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// 1-based bond number as written in the file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct BondNumber(pub u32);

impl BondNumber {
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MolAtom {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub symbol: String,
    /// Charge after `M  CHG` lines are applied.
    pub charge: i8,
    pub isotope: Option<u16>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MolBond {
    pub a: AtomNumber,
    pub b: AtomNumber,
    /// 1 single, 2 double, 3 triple, 4 aromatic.
    pub order: u8,
    pub stereo: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum SgroupType {
    Sru,
    Sup,
    Other(String),
}

impl SgroupType {
    fn from_code(code: &str) -> Self {
        match code {
            "SRU" => SgroupType::Sru,
            "SUP" => SgroupType::Sup,
            other => SgroupType::Other(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SruConnectivity {
    HT,
    HH,
    EU,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SgroupRecord {
    pub index: u32,
    pub stype: SgroupType,
    pub atoms: Vec<AtomNumber>,
    /// `M  SMT` text: the repeat subscript of an SRU, the label of a SUP.
    pub subscript: String,
    pub connectivity: Option<SruConnectivity>,
    pub crossing_bonds: Vec<BondNumber>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct MolfileDoc {
    pub header: Vec<String>,
    pub atoms: Vec<MolAtom>,
    pub bonds: Vec<MolBond>,
    pub aliases: BTreeMap<AtomNumber, String>,
    pub rgp_lines: BTreeMap<AtomNumber, u32>,
    pub charges: BTreeMap<AtomNumber, i8>,
    pub isotopes: BTreeMap<AtomNumber, u16>,
    /// `M  APO` values: 1 first, 2 second, 3 both attachment points.
    pub attach_points: BTreeMap<AtomNumber, u8>,
    pub sgroups: Vec<SgroupRecord>,
    pub unknown_lines: Vec<String>,
    pub warnings: Vec<String>,
}

impl MolfileDoc {
    pub fn atom(&self, n: AtomNumber) -> Option<&MolAtom> {
        n.0.checked_sub(1).and_then(|i| self.atoms.get(i as usize))
    }

    /// Degree of every atom, by 0-based index.
    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.atoms.len()];
        for b in &self.bonds {
            d[b.a.index()] += 1;
            d[b.b.index()] += 1;
        }
        d
    }

    /// `R<n>` for an `R#` atom with an `M  RGP` entry, `R?` without one.
    pub fn rgroup_label(&self, n: AtomNumber) -> Option<String> {
        let atom = self.atom(n)?;
        if atom.symbol != "R#" {
            return None;
        }
        Some(match self.rgp_lines.get(&n) {
            Some(r) => format!("R{r}"),
            None => "R?".to_string(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MolfileError {
    #[error("no counts line")]
    MissingCountsLine,
    #[error("V3000 files are not supported")]
    V3000,
    #[error("line {line}: malformed counts line")]
    BadCountsLine { line: usize },
    #[error("atom block ends after {found} of {expected} atoms")]
    ShortAtomBlock { expected: usize, found: usize },
    #[error("bond block ends after {found} of {expected} bonds")]
    ShortBondBlock { expected: usize, found: usize },
    #[error("line {line}: {reason}")]
    BadAtomLine { line: usize, reason: String },
    #[error("line {line}: atom symbol is not aligned to column 32")]
    MisalignedSymbol { line: usize },
    #[error("line {line}: {reason}")]
    BadBondLine { line: usize, reason: String },
    #[error("line {line}: {reason}")]
    Property { line: usize, reason: String },
    #[error("missing `M  END`")]
    MissingEnd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ParseOptions {
    /// Turn recoverable problems (bad property lines, query bond types, a
    /// missing `M  END`) into errors instead of warnings.
    pub strict: bool,
}

/// Decode file bytes: UTF-8 when valid, otherwise Latin-1.
pub fn decode_text(bytes: &[u8]) -> Cow<'_, str> {
    match std::str::from_utf8(bytes) {
        Ok(s) => Cow::Borrowed(s),
        Err(_) => Cow::Owned(bytes.iter().map(|&b| b as char).collect()),
    }
}

pub fn parse_molfile(text: &str) -> Result<MolfileDoc, MolfileError> {
    parse_molfile_with(text, ParseOptions::default())
}

fn column(line: &str, from: usize, to: usize) -> &str {
    let to = to.min(line.len());
    if from >= to {
        return "";
    }
    line.get(from..to).unwrap_or("")
}

fn charge_code(code: i32) -> i8 {
    match code {
        1 => 3,
        2 => 2,
        3 => 1,
        5 => -1,
        6 => -2,
        7 => -3,
        _ => 0,
    }
}

struct Props<'a> {
    doc: MolfileDoc,
    strict: bool,
    line: usize,
    _text: std::marker::PhantomData<&'a ()>,
}

impl Props<'_> {
    fn problem(&mut self, reason: impl Into<String>) -> Result<(), MolfileError> {
        let reason = reason.into();
        if self.strict {
            return Err(MolfileError::Property {
                line: self.line,
                reason,
            });
        }
        self.doc.warnings.push(format!("line {}: {reason}", self.line));
        Ok(())
    }

    fn atom(&self, n: i64) -> Option<AtomNumber> {
        (n >= 1 && (n as usize) <= self.doc.atoms.len()).then_some(AtomNumber(n as u32))
    }

    fn sgroup(&mut self, idx: u32) -> Option<&mut SgroupRecord> {
        self.doc.sgroups.iter_mut().find(|s| s.index == idx)
    }

    /// `M  XXX  n a1 v1 a2 v2 ...` with integer values.
    fn pairs(&mut self, tokens: &[&str]) -> Result<Option<Vec<(i64, String)>>, MolfileError> {
        let Some(count) = tokens.first().and_then(|t| t.parse::<usize>().ok()) else {
            self.problem("missing entry count")?;
            return Ok(None);
        };
        if tokens.len() < 1 + 2 * count {
            self.problem(format!("expected {count} entries"))?;
            return Ok(None);
        }
        let mut out = Vec::with_capacity(count);
        for i in 0..count {
            let Ok(a) = tokens[1 + 2 * i].parse::<i64>() else {
                self.problem(format!("bad number {:?}", tokens[1 + 2 * i]))?;
                return Ok(None);
            };
            out.push((a, tokens[2 + 2 * i].to_string()));
        }
        Ok(Some(out))
    }

    fn int_pairs(
        &mut self,
        tokens: &[&str],
        what: &str,
    ) -> Result<Vec<(AtomNumber, i64)>, MolfileError> {
        let Some(pairs) = self.pairs(tokens)? else {
            return Ok(Vec::new());
        };
        let mut out = Vec::new();
        for (a, v) in pairs {
            let Ok(v) = v.parse::<i64>() else {
                self.problem(format!("bad {what} value {v:?}"))?;
                continue;
            };
            match self.atom(a) {
                Some(n) => out.push((n, v)),
                None => self.problem(format!("{what} on nonexistent atom {a}"))?,
            }
        }
        Ok(out)
    }
}

pub fn parse_molfile_with(text: &str, opts: ParseOptions) -> Result<MolfileDoc, MolfileError> {
    let mut lines: Vec<&str> = text
        .split('\n')
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .collect();
    if lines.last() == Some(&"") {
        lines.pop();
    }
    if lines.len() < 4 {
        return Err(MolfileError::MissingCountsLine);
    }
    let counts = lines[3];
    if counts.contains("V3000") {
        return Err(MolfileError::V3000);
    }
    let n_atoms: usize = column(counts, 0, 3)
        .trim()
        .parse()
        .map_err(|_| MolfileError::BadCountsLine { line: 4 })?;
    let n_bonds: usize = column(counts, 3, 6)
        .trim()
        .parse()
        .map_err(|_| MolfileError::BadCountsLine { line: 4 })?;

    let mut doc = MolfileDoc {
        header: lines[..3].iter().map(|s| s.to_string()).collect(),
        ..Default::default()
    };
    let mut block_charge = Vec::with_capacity(n_atoms);
    for i in 0..n_atoms {
        let idx = 4 + i;
        let Some(&line) = lines.get(idx) else {
            return Err(MolfileError::ShortAtomBlock {
                expected: n_atoms,
                found: i,
            });
        };
        let line_no = idx + 1;
        let bad = |reason: &str| MolfileError::BadAtomLine {
            line: line_no,
            reason: reason.to_string(),
        };
        let coord = |from: usize, to: usize| -> Result<f64, MolfileError> {
            column(line, from, to)
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad("malformed coordinate"))
        };
        let (x, y, z) = (coord(0, 10)?, coord(10, 20)?, coord(20, 30)?);
        if !column(line, 30, 31).trim().is_empty() {
            return Err(MolfileError::MisalignedSymbol { line: line_no });
        }
        let field = column(line, 31, 34);
        if field.starts_with(' ') && !field.trim().is_empty() {
            return Err(MolfileError::MisalignedSymbol { line: line_no });
        }
        let symbol = field.trim_end();
        if symbol.is_empty() {
            return Err(bad("missing atom symbol"));
        }
        let charge = match column(line, 36, 39).trim() {
            "" => 0,
            c => charge_code(c.parse().map_err(|_| bad("malformed charge field"))?),
        };
        block_charge.push(charge);
        doc.atoms.push(MolAtom {
            x,
            y,
            z,
            symbol: symbol.to_string(),
            charge,
            isotope: None,
        });
    }
    for i in 0..n_bonds {
        let idx = 4 + n_atoms + i;
        let Some(&line) = lines.get(idx) else {
            return Err(MolfileError::ShortBondBlock {
                expected: n_bonds,
                found: i,
            });
        };
        let line_no = idx + 1;
        let bad = |reason: String| MolfileError::BadBondLine {
            line: line_no,
            reason,
        };
        let num = |from: usize, to: usize, what: &str| -> Result<i64, MolfileError> {
            column(line, from, to)
                .trim()
                .parse::<i64>()
                .map_err(|_| bad(format!("malformed {what}")))
        };
        let (a, b, t) = (num(0, 3, "atom")?, num(3, 6, "atom")?, num(6, 9, "bond type")?);
        let stereo = match column(line, 9, 12).trim() {
            "" => 0,
            s => s.parse::<u8>().unwrap_or(0),
        };
        for atom in [a, b] {
            if atom < 1 || atom as usize > n_atoms {
                return Err(bad(format!("bond references atom {atom} of {n_atoms}")));
            }
        }
        if a == b {
            return Err(bad("bond joins an atom to itself".into()));
        }
        let order = match t {
            1..=4 => t as u8,
            5..=8 => {
                if opts.strict {
                    return Err(bad(format!("query bond type {t}")));
                }
                doc.warnings
                    .push(format!("line {line_no}: query bond type {t} read as single"));
                1
            }
            _ => return Err(bad(format!("unknown bond type {t}"))),
        };
        doc.bonds.push(MolBond {
            a: AtomNumber(a as u32),
            b: AtomNumber(b as u32),
            order,
            stereo,
        });
    }

    let mut p = Props {
        doc,
        strict: opts.strict,
        line: 0,
        _text: std::marker::PhantomData,
    };
    let mut saw_chg = false;
    let mut ended = false;
    let mut i = 4 + n_atoms + n_bonds;
    while i < lines.len() {
        let line = lines[i];
        p.line = i + 1;
        i += 1;
        if line.starts_with("M  END") {
            ended = true;
            break;
        }
        if let Some(rest) = line.strip_prefix("A  ") {
            let n = rest.trim().parse::<i64>().ok().and_then(|n| p.atom(n));
            let Some(&text) = lines.get(i) else {
                p.problem("alias line without text")?;
                continue;
            };
            i += 1;
            match n {
                Some(n) => {
                    p.doc.aliases.insert(n, text.trim().to_string());
                }
                None => p.problem(format!("alias on nonexistent atom {:?}", rest.trim()))?,
            }
            continue;
        }
        if line.starts_with("G  ") {
            i += 1;
            continue;
        }
        if line.starts_with("V  ") {
            continue;
        }
        if let Some(rest) = line.strip_prefix("S  SKP") {
            match rest.trim().parse::<usize>() {
                Ok(n) => i += n,
                Err(_) => p.problem("malformed skip count")?,
            }
            continue;
        }
        if !line.starts_with("M  ") {
            if !line.trim().is_empty() {
                p.doc.unknown_lines.push(line.to_string());
            }
            continue;
        }
        let tag = column(line, 3, 6);
        let body = column(line, 6, line.len());
        let tokens: Vec<&str> = body.split_whitespace().collect();
        match tag {
            "CHG" => {
                if !saw_chg {
                    // the first CHG line supersedes every atom-block charge
                    saw_chg = true;
                    for a in p.doc.atoms.iter_mut() {
                        a.charge = 0;
                    }
                }
                for (n, v) in p.int_pairs(&tokens, "charge")? {
                    if !(-15..=15).contains(&v) {
                        p.problem(format!("charge {v} out of range"))?;
                        continue;
                    }
                    p.doc.charges.insert(n, v as i8);
                    p.doc.atoms[n.index()].charge = v as i8;
                }
            }
            "ISO" => {
                for (n, v) in p.int_pairs(&tokens, "isotope")? {
                    if !(1..=u16::MAX as i64).contains(&v) {
                        p.problem(format!("isotope {v} out of range"))?;
                        continue;
                    }
                    p.doc.isotopes.insert(n, v as u16);
                    p.doc.atoms[n.index()].isotope = Some(v as u16);
                }
            }
            "RGP" => {
                for (n, v) in p.int_pairs(&tokens, "R-group")? {
                    if v < 0 {
                        p.problem(format!("R-group number {v}"))?;
                        continue;
                    }
                    p.doc.rgp_lines.insert(n, v as u32);
                }
            }
            "APO" => {
                for (n, v) in p.int_pairs(&tokens, "attachment")? {
                    if !(1..=3).contains(&v) {
                        p.problem(format!("attachment value {v}"))?;
                        continue;
                    }
                    p.doc.attach_points.insert(n, v as u8);
                }
            }
            "STY" => {
                let Some(pairs) = p.pairs(&tokens)? else {
                    continue;
                };
                for (idx, code) in pairs {
                    if idx < 1 {
                        p.problem(format!("Sgroup index {idx}"))?;
                        continue;
                    }
                    if p.sgroup(idx as u32).is_some() {
                        p.problem(format!("Sgroup {idx} declared twice"))?;
                        continue;
                    }
                    p.doc.sgroups.push(SgroupRecord {
                        index: idx as u32,
                        stype: SgroupType::from_code(&code),
                        atoms: Vec::new(),
                        subscript: String::new(),
                        connectivity: None,
                        crossing_bonds: Vec::new(),
                    });
                }
            }
            "SAL" | "SBL" => {
                let nums: Option<Vec<i64>> = tokens.iter().map(|t| t.parse().ok()).collect();
                let Some(nums) = nums.filter(|n| n.len() >= 2) else {
                    p.problem(format!("malformed {tag} line"))?;
                    continue;
                };
                let (idx, count) = (nums[0], nums[1]);
                if count < 0 || nums.len() < 2 + count as usize {
                    p.problem(format!("{tag} lists fewer than {count} entries"))?;
                    continue;
                }
                let items = nums[2..2 + count as usize].to_vec();
                if tag == "SAL" {
                    let mut atoms = Vec::new();
                    for a in items {
                        match p.atom(a) {
                            Some(n) => atoms.push(n),
                            None => p.problem(format!("Sgroup atom {a} does not exist"))?,
                        }
                    }
                    match p.sgroup(idx as u32) {
                        Some(s) => s.atoms.extend(atoms),
                        None => p.problem(format!("SAL for undeclared Sgroup {idx}"))?,
                    }
                } else {
                    let n_bonds = p.doc.bonds.len() as i64;
                    let mut bonds = Vec::new();
                    for b in items {
                        if (1..=n_bonds).contains(&b) {
                            bonds.push(BondNumber(b as u32));
                        } else {
                            p.problem(format!("Sgroup bond {b} does not exist"))?;
                        }
                    }
                    match p.sgroup(idx as u32) {
                        Some(s) => s.crossing_bonds.extend(bonds),
                        None => p.problem(format!("SBL for undeclared Sgroup {idx}"))?,
                    }
                }
            }
            "SMT" => {
                let trimmed = body.trim_start();
                let (idx, text) = trimmed
                    .split_once(char::is_whitespace)
                    .unwrap_or((trimmed, ""));
                let Ok(idx) = idx.parse::<u32>() else {
                    p.problem("malformed SMT line")?;
                    continue;
                };
                let text = text.trim().to_string();
                match p.sgroup(idx) {
                    Some(s) => s.subscript = text,
                    None => p.problem(format!("SMT for undeclared Sgroup {idx}"))?,
                }
            }
            "SCN" => {
                let Some(pairs) = p.pairs(&tokens)? else {
                    continue;
                };
                for (idx, code) in pairs {
                    let conn = match code.to_ascii_uppercase().as_str() {
                        "HT" => SruConnectivity::HT,
                        "HH" => SruConnectivity::HH,
                        "EU" => SruConnectivity::EU,
                        _ => {
                            p.problem(format!("unknown connectivity {code:?}"))?;
                            continue;
                        }
                    };
                    match p.sgroup(idx as u32) {
                        Some(s) => s.connectivity = Some(conn),
                        None => p.problem(format!("SCN for undeclared Sgroup {idx}"))?,
                    }
                }
            }
            "SST" | "SLB" | "SDS" | "SPL" | "SNC" | "SDI" | "SAP" | "SCL" | "SDT" | "SDD"
            | "SCD" | "SED" | "SPA" | "SBV" | "SBT" | "SMD" | "RAD" | "ALS" | "LOG" | "RBC"
            | "SUB" | "UNS" | "LIN" | "ZZC" | "STB" | "REG" | "AAL" | "PXA" => {}
            _ => p.doc.unknown_lines.push(line.to_string()),
        }
    }
    if !ended {
        if opts.strict {
            return Err(MolfileError::MissingEnd);
        }
        p.doc.warnings.push("missing `M  END`".into());
    }
    let _ = block_charge;
    Ok(p.doc)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn atom_line(x: f64, y: f64, sym: &str) -> String {
        format!("{x:>10.4}{y:>10.4}{:>10.4} {sym:<3} 0  0  0  0  0  0  0  0  0  0  0  0", 0.0)
    }

    fn mol(atoms: &[(f64, f64, &str)], bonds: &[(usize, usize, u8)], props: &[&str]) -> String {
        let mut s = String::from("name\n  test\n\n");
        s.push_str(&format!(
            "{:>3}{:>3}  0  0  0  0  0  0  0  0999 V2000\n",
            atoms.len(),
            bonds.len()
        ));
        for &(x, y, sym) in atoms {
            s.push_str(&atom_line(x, y, sym));
            s.push('\n');
        }
        for &(a, b, t) in bonds {
            s.push_str(&format!("{a:>3}{b:>3}{t:>3}  0\n"));
        }
        for p in props {
            s.push_str(p);
            s.push('\n');
        }
        s.push_str("M  END\n");
        s
    }

    #[test]
    fn methane() {
        let doc = parse_molfile(&mol(&[(0.0, 0.0, "C")], &[], &[])).unwrap();
        assert_eq!(doc.atoms.len(), 1);
        assert_eq!(doc.atoms[0].symbol, "C");
        assert!(doc.aliases.is_empty() && doc.sgroups.is_empty() && doc.rgp_lines.is_empty());
        assert!(doc.warnings.is_empty());
    }

    #[test]
    fn alias_line() {
        let text = mol(
            &[(0.0, 0.0, "C"), (1.0, 0.0, "C")],
            &[(1, 2, 1)],
            &["A    2", "R1"],
        );
        let doc = parse_molfile(&text).unwrap();
        assert_eq!(doc.aliases, [(AtomNumber(2), "R1".to_string())].into());
        assert_eq!(AtomNumber(2).index(), 1);
    }

    #[test]
    fn sru_sgroup() {
        let text = mol(
            &[(0.0, 0.0, "C"), (1.0, 0.0, "C"), (2.0, 0.0, "C"), (3.0, 0.0, "C")],
            &[(1, 2, 1), (2, 3, 1), (3, 4, 1)],
            &[
                "M  STY  1   1 SRU",
                "M  SAL   1  2   2   3",
                "M  SMT   1 n",
                "M  SCN  1   1 HT",
            ],
        );
        let doc = parse_molfile(&text).unwrap();
        assert_eq!(
            doc.sgroups,
            vec![SgroupRecord {
                index: 1,
                stype: SgroupType::Sru,
                atoms: vec![AtomNumber(2), AtomNumber(3)],
                subscript: "n".into(),
                connectivity: Some(SruConnectivity::HT),
                crossing_bonds: vec![],
            }]
        );
    }

    #[test]
    fn charges_isotopes_rgroups() {
        let text = mol(
            &[(0.0, 0.0, "N"), (1.0, 0.0, "C"), (2.0, 0.0, "R#")],
            &[(1, 2, 1), (2, 3, 1)],
            &["M  CHG  1   1   1", "M  ISO  1   2  13", "M  RGP  1   3   2"],
        );
        let doc = parse_molfile(&text).unwrap();
        assert_eq!(doc.atoms[0].charge, 1);
        assert_eq!(doc.atoms[1].isotope, Some(13));
        assert_eq!(doc.rgroup_label(AtomNumber(3)).as_deref(), Some("R2"));
        let text = mol(&[(0.0, 0.0, "R#")], &[], &[]);
        let doc = parse_molfile(&text).unwrap();
        assert_eq!(doc.rgroup_label(AtomNumber(1)).as_deref(), Some("R?"));
    }

    #[test]
    fn crlf_and_trailing_whitespace() {
        let text = mol(&[(0.0, 0.0, "O"), (1.0, 0.0, "C")], &[(1, 2, 1)], &["A    2", "R1"]);
        let base = parse_molfile(&text).unwrap();
        let crlf = text.replace('\n', "\r\n");
        assert_eq!(parse_molfile(&crlf).unwrap(), base);
        let padded: String = text.lines().map(|l| format!("{l}   \n")).collect();
        let mut padded_doc = parse_molfile(&padded).unwrap();
        padded_doc.header = base.header.clone();
        assert_eq!(padded_doc, base);
    }

    #[test]
    fn shifted_symbol_is_detected() {
        let text = mol(&[(0.0, 0.0, "C")], &[], &[]);
        let shifted = text.replace(" C   0", "  C  0");
        assert!(matches!(
            parse_molfile(&shifted),
            Err(MolfileError::MisalignedSymbol { line: 5 })
        ));
        let early = text.replace("0.0000 C   0", "0.0000C    0");
        assert!(matches!(
            parse_molfile(&early),
            Err(MolfileError::MisalignedSymbol { line: 5 })
        ));
    }

    #[test]
    fn structural_errors() {
        assert_eq!(parse_molfile("a\nb\n"), Err(MolfileError::MissingCountsLine));
        assert_eq!(
            parse_molfile("\n\n\n  0  0  0     0  0            999 V3000\n"),
            Err(MolfileError::V3000)
        );
        let text = mol(&[(0.0, 0.0, "C"), (1.0, 0.0, "C")], &[(1, 2, 1)], &[]);
        let short: String = text.lines().take(5).map(|l| format!("{l}\n")).collect();
        assert_eq!(
            parse_molfile(&short),
            Err(MolfileError::ShortAtomBlock {
                expected: 2,
                found: 1
            })
        );
        let bad_bond = text.replace("  1  2  1", "  1  9  1");
        assert!(matches!(parse_molfile(&bad_bond), Err(MolfileError::BadBondLine { .. })));
    }

    #[test]
    fn lenient_and_strict_modes() {
        let text = mol(
            &[(0.0, 0.0, "C"), (1.0, 0.0, "C")],
            &[(1, 2, 5)],
            &["M  CHG  1   7   1", "M  FOO bar"],
        );
        let doc = parse_molfile(&text).unwrap();
        assert_eq!(doc.bonds[0].order, 1);
        assert_eq!(doc.warnings.len(), 2);
        assert_eq!(doc.unknown_lines, vec!["M  FOO bar".to_string()]);
        let strict = ParseOptions { strict: true };
        assert!(parse_molfile_with(&text, strict).is_err());
        let clean = mol(&[(0.0, 0.0, "C")], &[], &[]);
        let no_end = clean.replace("M  END\n", "");
        assert_eq!(parse_molfile_with(&no_end, strict), Err(MolfileError::MissingEnd));
    }

    #[test]
    fn atom_block_charges_and_chg_override() {
        let mut text = mol(&[(0.0, 0.0, "O")], &[], &[]);
        text = text.replace(" O   0  0", " O   0  5");
        assert_eq!(parse_molfile(&text).unwrap().atoms[0].charge, -1);
        let with_chg = text.replace("M  END", "M  CHG  1   1  -2\nM  END");
        assert_eq!(parse_molfile(&with_chg).unwrap().atoms[0].charge, -2);
    }

    #[test]
    fn latin1_bytes_decode() {
        let bytes = b"caf\xe9";
        assert_eq!(decode_text(bytes), "caf\u{e9}");
    }
}
