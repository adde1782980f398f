//! SMILES reader.
//!
//! Atoms are numbered in the order they appear in the string. Lowercase
//! atoms are flagged aromatic and unmarked bonds between two aromatic atoms
//! are aromatic. Tetrahedral marks are re-expressed against the graph's
//! reference neighbour order (see [`Chirality`]).

use std::collections::{HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::molgraph::{
    elements, permutation_is_odd, Atom, Bond, BondOrder, BondStereo, Chirality, GraphError,
    MolGraph, StereoRef,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SmilesErrorKind {
    Empty,
    UnexpectedChar(char),
    UnknownElement(String),
    BadCharge,
    BadIsotope,
    UnterminatedBracket,
    UnclosedBranch,
    UnmatchedCloseBranch,
    EmptyBranch,
    DanglingBond,
    UnclosedRing(u32),
    RingBondConflict(u32),
    SelfLoop,
    DuplicateBond,
    UnsupportedBond(char),
    Graph(GraphError),
}

impl fmt::Display for SmilesErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use SmilesErrorKind::*;
        match self {
            Empty => write!(f, "empty SMILES"),
            UnexpectedChar(c) => write!(f, "unexpected character {c:?}"),
            UnknownElement(s) => write!(f, "unknown element {s:?}"),
            BadCharge => write!(f, "malformed charge"),
            BadIsotope => write!(f, "malformed isotope"),
            UnterminatedBracket => write!(f, "unterminated bracket atom"),
            UnclosedBranch => write!(f, "unclosed branch"),
            UnmatchedCloseBranch => write!(f, "unmatched ')'"),
            EmptyBranch => write!(f, "empty branch"),
            DanglingBond => write!(f, "bond symbol without a following atom"),
            UnclosedRing(d) => write!(f, "ring bond {d} is never closed"),
            RingBondConflict(d) => write!(f, "conflicting bond symbols on ring bond {d}"),
            SelfLoop => write!(f, "ring bond closes on its own atom"),
            DuplicateBond => write!(f, "atoms are already bonded"),
            UnsupportedBond(c) => write!(f, "unsupported bond symbol {c:?}"),
            Graph(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at offset {offset}")]
pub struct SmilesError {
    pub offset: usize,
    pub kind: SmilesErrorKind,
}

fn err<T>(offset: usize, kind: SmilesErrorKind) -> Result<T, SmilesError> {
    Err(SmilesError { offset, kind })
}

#[derive(Clone, Copy, PartialEq)]
enum Slot {
    H,
    Atom(usize),
    Ring(usize),
}

struct OpenRing {
    atom: usize,
    order: Option<BondOrder>,
    stereo: Option<BondStereo>,
    slot_id: usize,
}

struct Pending {
    order: BondOrder,
    stereo: Option<BondStereo>,
    explicit: bool,
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    slots: Vec<Vec<Slot>>,
    pairs: HashSet<(usize, usize)>,
    prev: Option<usize>,
    pending: Option<(Pending, usize)>,
    branches: Vec<(Option<usize>, usize, usize)>,
    rings: HashMap<u32, (OpenRing, usize)>,
    next_ring_slot: usize,
}

/// Parse a plain SMILES string.
pub fn parse_smiles(s: &str) -> Result<MolGraph, SmilesError> {
    if s.is_empty() {
        return err(0, SmilesErrorKind::Empty);
    }
    let mut p = Parser {
        src: s.as_bytes(),
        pos: 0,
        atoms: Vec::new(),
        bonds: Vec::new(),
        slots: Vec::new(),
        pairs: HashSet::new(),
        prev: None,
        pending: None,
        branches: Vec::new(),
        rings: HashMap::new(),
        next_ring_slot: 0,
    };
    p.run()?;
    p.finish()
}

impl Parser<'_> {
    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn unexpected(&self) -> SmilesError {
        // report the full character, not a UTF-8 continuation byte
        let c = std::str::from_utf8(&self.src[self.pos..])
            .ok()
            .and_then(|s| s.chars().next())
            .unwrap_or(self.src[self.pos] as char);
        SmilesError {
            offset: self.pos,
            kind: SmilesErrorKind::UnexpectedChar(c),
        }
    }

    fn run(&mut self) -> Result<(), SmilesError> {
        while let Some(c) = self.peek() {
            let start = self.pos;
            match c {
                b'(' => {
                    if self.prev.is_none() || self.pending.is_some() {
                        return Err(self.unexpected());
                    }
                    self.branches.push((self.prev, self.atoms.len(), start));
                    self.pos += 1;
                }
                b')' => {
                    if self.pending.is_some() {
                        return err(start, SmilesErrorKind::DanglingBond);
                    }
                    let Some((prev, count, _)) = self.branches.pop() else {
                        return err(start, SmilesErrorKind::UnmatchedCloseBranch);
                    };
                    if self.atoms.len() == count {
                        return err(start, SmilesErrorKind::EmptyBranch);
                    }
                    self.prev = prev;
                    self.pos += 1;
                }
                b'.' => {
                    if self.pending.is_some() || self.prev.is_none() {
                        return Err(self.unexpected());
                    }
                    self.prev = None;
                    self.pos += 1;
                }
                b'-' | b'=' | b'#' | b':' | b'/' | b'\\' => {
                    if self.prev.is_none() || self.pending.is_some() {
                        return Err(self.unexpected());
                    }
                    let (order, stereo) = match c {
                        b'-' => (BondOrder::Single, None),
                        b'=' => (BondOrder::Double, None),
                        b'#' => (BondOrder::Triple, None),
                        b':' => (BondOrder::Aromatic, None),
                        b'/' => (BondOrder::Single, Some(BondStereo::Up)),
                        _ => (BondOrder::Single, Some(BondStereo::Down)),
                    };
                    self.pending = Some((
                        Pending {
                            order,
                            stereo,
                            explicit: true,
                        },
                        start,
                    ));
                    self.pos += 1;
                }
                b'$' => return err(start, SmilesErrorKind::UnsupportedBond('$')),
                b'0'..=b'9' | b'%' => self.ring_bond()?,
                b'[' => {
                    let atom = self.bracket_atom()?;
                    self.add_atom(atom, start)?;
                }
                _ => {
                    let atom = self.organic_atom()?;
                    self.add_atom(atom, start)?;
                }
            }
        }
        Ok(())
    }

    fn organic_atom(&mut self) -> Result<Atom, SmilesError> {
        let c = self.src[self.pos];
        let next = self.src.get(self.pos + 1).copied();
        let (symbol, aromatic, len) = match (c, next) {
            (b'C', Some(b'l')) => ("Cl", false, 2),
            (b'B', Some(b'r')) => ("Br", false, 2),
            (b'B', _) => ("B", false, 1),
            (b'C', _) => ("C", false, 1),
            (b'N', _) => ("N", false, 1),
            (b'O', _) => ("O", false, 1),
            (b'P', _) => ("P", false, 1),
            (b'S', _) => ("S", false, 1),
            (b'F', _) => ("F", false, 1),
            (b'I', _) => ("I", false, 1),
            (b'b', _) => ("B", true, 1),
            (b'c', _) => ("C", true, 1),
            (b'n', _) => ("N", true, 1),
            (b'o', _) => ("O", true, 1),
            (b'p', _) => ("P", true, 1),
            (b's', _) => ("S", true, 1),
            (b'*', _) => ("*", false, 1),
            _ => return Err(self.unexpected()),
        };
        self.pos += len;
        let mut atom = Atom::new(symbol);
        atom.aromatic = aromatic;
        Ok(atom)
    }

    fn digits(&mut self, max_len: usize) -> Option<u32> {
        let start = self.pos;
        while self.pos - start < max_len && self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return None;
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .ok()?
            .parse()
            .ok()
    }

    fn bracket_atom(&mut self) -> Result<Atom, SmilesError> {
        let open = self.pos;
        self.pos += 1;
        let iso_start = self.pos;
        let isotope = match self.digits(5) {
            Some(v) if v <= u16::MAX as u32 => Some(v as u16),
            Some(_) => return err(iso_start, SmilesErrorKind::BadIsotope),
            None => None,
        };
        let sym_start = self.pos;
        let (symbol, aromatic) = match self.peek() {
            Some(b'*') => {
                self.pos += 1;
                ("*".to_string(), false)
            }
            Some(c) if c.is_ascii_uppercase() => {
                let two = self
                    .src
                    .get(self.pos..self.pos + 2)
                    .and_then(|s| std::str::from_utf8(s).ok())
                    .filter(|s| s.as_bytes()[1].is_ascii_lowercase() && elements::is_element(s));
                if let Some(two) = two {
                    self.pos += 2;
                    (two.to_string(), false)
                } else {
                    let one = (c as char).to_string();
                    if !elements::is_element(&one) {
                        let mut end = self.pos + 1;
                        while self.src.get(end).is_some_and(|c| c.is_ascii_lowercase()) {
                            end += 1;
                        }
                        let text = String::from_utf8_lossy(&self.src[self.pos..end]).into_owned();
                        return err(sym_start, SmilesErrorKind::UnknownElement(text));
                    }
                    self.pos += 1;
                    (one, false)
                }
            }
            Some(c) if c.is_ascii_lowercase() => {
                let two = self.src.get(self.pos..self.pos + 2);
                if let Some(sym) = two.and_then(|t| match t {
                    b"se" => Some("Se"),
                    b"as" => Some("As"),
                    b"te" => Some("Te"),
                    _ => None,
                }) {
                    self.pos += 2;
                    (sym.to_string(), true)
                } else {
                    let sym = match c {
                        b'b' => "B",
                        b'c' => "C",
                        b'n' => "N",
                        b'o' => "O",
                        b'p' => "P",
                        b's' => "S",
                        _ => {
                            return err(
                                sym_start,
                                SmilesErrorKind::UnknownElement((c as char).to_string()),
                            )
                        }
                    };
                    self.pos += 1;
                    (sym.to_string(), true)
                }
            }
            None => return err(open, SmilesErrorKind::UnterminatedBracket),
            Some(_) => return Err(self.unexpected()),
        };
        let mut atom = Atom::new(symbol);
        atom.aromatic = aromatic;
        atom.isotope = isotope;

        if self.peek() == Some(b'@') {
            self.pos += 1;
            if self.peek() == Some(b'@') {
                self.pos += 1;
                atom.stereo = Some(Chirality::Clockwise);
            } else if matches!(
                self.src.get(self.pos..self.pos + 2),
                Some(b"TH" | b"AL" | b"SP" | b"TB" | b"OH")
            ) {
                let class = &self.src[self.pos..self.pos + 2];
                self.pos += 2;
                let n = self.digits(2);
                if n.is_none() {
                    return Err(if self.pos < self.src.len() {
                        self.unexpected()
                    } else {
                        SmilesError {
                            offset: open,
                            kind: SmilesErrorKind::UnterminatedBracket,
                        }
                    });
                }
                atom.stereo = match (class, n) {
                    (b"TH", Some(1)) => Some(Chirality::CounterClockwise),
                    (b"TH", Some(2)) => Some(Chirality::Clockwise),
                    _ => None,
                };
            } else {
                atom.stereo = Some(Chirality::CounterClockwise);
            }
        }

        let mut h = 0u8;
        if self.peek() == Some(b'H') {
            self.pos += 1;
            h = self.digits(1).unwrap_or(1) as u8;
        }
        atom.explicit_h = Some(h);

        let charge_start = self.pos;
        if let Some(sign @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let unit: i32 = if sign == b'+' { 1 } else { -1 };
            let mut magnitude = 1i32;
            if let Some(n) = self.digits(2) {
                magnitude = n as i32;
            } else {
                while self.peek() == Some(sign) {
                    self.pos += 1;
                    magnitude += 1;
                }
            }
            if magnitude > 15 || matches!(self.peek(), Some(b'+' | b'-')) {
                return err(charge_start, SmilesErrorKind::BadCharge);
            }
            atom.formal_charge = (unit * magnitude) as i8;
        }

        if self.peek() == Some(b':') {
            self.pos += 1;
            if self.digits(9).is_none() {
                return Err(if self.pos < self.src.len() {
                    self.unexpected()
                } else {
                    SmilesError {
                        offset: open,
                        kind: SmilesErrorKind::UnterminatedBracket,
                    }
                });
            }
        }
        match self.peek() {
            Some(b']') => {
                self.pos += 1;
                Ok(atom)
            }
            None => err(open, SmilesErrorKind::UnterminatedBracket),
            Some(_) => Err(self.unexpected()),
        }
    }

    fn default_order(&self, a: usize, b: usize) -> BondOrder {
        if self.atoms[a].aromatic && self.atoms[b].aromatic {
            BondOrder::Aromatic
        } else {
            BondOrder::Single
        }
    }

    fn link(&mut self, a: usize, b: usize, bond: Bond, offset: usize) -> Result<(), SmilesError> {
        if a == b {
            return err(offset, SmilesErrorKind::SelfLoop);
        }
        if !self.pairs.insert((a.min(b), a.max(b))) {
            return err(offset, SmilesErrorKind::DuplicateBond);
        }
        self.bonds.push(bond);
        Ok(())
    }

    fn add_atom(&mut self, atom: Atom, offset: usize) -> Result<(), SmilesError> {
        let idx = self.atoms.len();
        let one_h = atom.explicit_h == Some(1);
        self.atoms.push(atom);
        self.slots.push(Vec::new());
        if let Some(p) = self.prev {
            let (pending, _) = self.pending.take().map_or_else(
                || {
                    (
                        Pending {
                            order: self.default_order(p, idx),
                            stereo: None,
                            explicit: false,
                        },
                        offset,
                    )
                },
                |x| x,
            );
            let bond = Bond {
                a: p,
                b: idx,
                order: pending.order,
                stereo: pending.stereo,
            };
            self.link(p, idx, bond, offset)?;
            self.slots[idx].push(Slot::Atom(p));
            self.slots[p].push(Slot::Atom(idx));
        }
        if one_h {
            self.slots[idx].push(Slot::H);
        }
        self.prev = Some(idx);
        Ok(())
    }

    fn ring_bond(&mut self) -> Result<(), SmilesError> {
        let start = self.pos;
        let Some(current) = self.prev else {
            return Err(self.unexpected());
        };
        let number = if self.peek() == Some(b'%') {
            self.pos += 1;
            if self.peek() == Some(b'(') {
                self.pos += 1;
                let n = self.digits(5);
                if n.is_none() || self.peek() != Some(b')') {
                    return Err(if self.pos < self.src.len() {
                        self.unexpected()
                    } else {
                        SmilesError {
                            offset: start,
                            kind: SmilesErrorKind::UnclosedRing(0),
                        }
                    });
                }
                self.pos += 1;
                n.unwrap()
            } else {
                let before = self.pos;
                match self.digits(2) {
                    Some(n) if self.pos - before == 2 => n,
                    _ => {
                        self.pos = before.min(self.src.len());
                        return Err(if self.pos < self.src.len() {
                            self.unexpected()
                        } else {
                            SmilesError {
                                offset: start,
                                kind: SmilesErrorKind::UnclosedRing(0),
                            }
                        });
                    }
                }
            }
        } else {
            let d = (self.src[self.pos] - b'0') as u32;
            self.pos += 1;
            d
        };
        let pending = self.pending.take();
        if let Some((open, _)) = self.rings.remove(&number) {
            let close_order = pending.as_ref().filter(|(p, _)| p.explicit).map(|(p, _)| p.order);
            let order = match (open.order, close_order) {
                (Some(a), Some(b)) if a != b => {
                    return err(start, SmilesErrorKind::RingBondConflict(number))
                }
                (Some(a), _) | (None, Some(a)) => a,
                (None, None) => self.default_order(open.atom, current),
            };
            let bond = match (open.stereo, pending.and_then(|(p, _)| p.stereo)) {
                (Some(s), _) => Bond {
                    a: open.atom,
                    b: current,
                    order,
                    stereo: Some(s),
                },
                (None, Some(s)) => Bond {
                    a: current,
                    b: open.atom,
                    order,
                    stereo: Some(s),
                },
                (None, None) => Bond::new(open.atom, current, order),
            };
            self.link(open.atom, current, bond, start)?;
            if let Some(slot) = self.slots[open.atom]
                .iter_mut()
                .find(|s| **s == Slot::Ring(open.slot_id))
            {
                *slot = Slot::Atom(current);
            }
            self.slots[current].push(Slot::Atom(open.atom));
        } else {
            let (order, stereo) = match pending {
                Some((p, _)) if p.explicit => (Some(p.order), p.stereo),
                _ => (None, None),
            };
            let slot_id = self.next_ring_slot;
            self.next_ring_slot += 1;
            self.slots[current].push(Slot::Ring(slot_id));
            self.rings.insert(
                number,
                (
                    OpenRing {
                        atom: current,
                        order,
                        stereo,
                        slot_id,
                    },
                    start,
                ),
            );
        }
        Ok(())
    }

    fn finish(mut self) -> Result<MolGraph, SmilesError> {
        let end = self.src.len();
        if self.pending.is_some() {
            return err(end, SmilesErrorKind::DanglingBond);
        }
        if !self.branches.is_empty() {
            return err(end, SmilesErrorKind::UnclosedBranch);
        }
        if let Some((number, (_, offset))) = self.rings.iter().min_by_key(|(_, (_, o))| *o) {
            return err(*offset, SmilesErrorKind::UnclosedRing(*number));
        }
        let stereo_atoms: Vec<usize> = (0..self.atoms.len())
            .filter(|i| self.atoms[*i].stereo.is_some())
            .collect();
        let graph = MolGraph::new(std::mem::take(&mut self.atoms), self.bonds)
            .map_err(|e| SmilesError {
                offset: end,
                kind: SmilesErrorKind::Graph(e),
            })?;
        if stereo_atoms.is_empty() {
            return Ok(graph);
        }
        let (mut atoms, bonds, _) = graph.clone().into_parts();
        for i in stereo_atoms {
            let written: Vec<StereoRef> = self.slots[i]
                .iter()
                .filter_map(|s| match s {
                    Slot::H => Some(StereoRef::ImplicitH),
                    Slot::Atom(a) => Some(StereoRef::Atom(*a)),
                    Slot::Ring(_) => None,
                })
                .collect();
            let reference = graph.stereo_reference(i);
            if reference.len() < 3 || written.len() != reference.len() {
                atoms[i].stereo = None;
                continue;
            }
            let odd = permutation_is_odd(&written, &reference);
            atoms[i].stereo = atoms[i].stereo.map(|s| s.flipped_if(odd));
        }
        Ok(MolGraph::new(atoms, bonds).expect("stereo does not affect validity"))
    }
}
