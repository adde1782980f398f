//! Seeded random molecules for property tests and synthetic corpora.
//!
//! Molecules are assembled from chains, Kekulé aromatic rings, saturated
//! rings and fused rings while tracking free valence, so every result is a
//! valid graph. Aromatic rings are built in Kekulé form and left for the
//! normalizer to perceive.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::molgraph::{Atom, Bond, BondOrder, BondStereo, Chirality, MolGraph};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub min_atoms: usize,
    pub max_atoms: usize,
    /// Chance that a growth step adds a ring rather than a chain atom.
    pub p_ring: f64,
    pub p_stereo: f64,
    pub p_charge: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            min_atoms: 3,
            max_atoms: 30,
            p_ring: 0.3,
            p_stereo: 0.15,
            p_charge: 0.05,
        }
    }
}

struct Builder {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    cap: Vec<u8>,
    used: Vec<u8>,
}

const CHAIN_ELEMENTS: [(&str, u8, u32); 9] = [
    ("C", 4, 60),
    ("N", 3, 12),
    ("O", 2, 12),
    ("S", 2, 4),
    ("F", 1, 4),
    ("Cl", 1, 4),
    ("Br", 1, 2),
    ("I", 1, 1),
    ("P", 3, 1),
];

impl Builder {
    fn new() -> Self {
        Builder {
            atoms: Vec::new(),
            bonds: Vec::new(),
            cap: Vec::new(),
            used: Vec::new(),
        }
    }

    fn free(&self, i: usize) -> u8 {
        self.cap[i] - self.used[i]
    }

    fn add(&mut self, element: &str, cap: u8) -> usize {
        self.atoms.push(Atom::new(element));
        self.cap.push(cap);
        self.used.push(0);
        self.atoms.len() - 1
    }

    fn bond(&mut self, a: usize, b: usize, order: BondOrder) {
        let v = order.valence();
        self.used[a] += v;
        self.used[b] += v;
        self.bonds.push(Bond::new(a, b, order));
    }

    fn hosts(&self) -> Vec<usize> {
        (0..self.atoms.len()).filter(|&i| self.free(i) > 0).collect()
    }

    fn chain_atom<R: Rng>(&mut self, rng: &mut R, host: Option<usize>) -> usize {
        let total: u32 = CHAIN_ELEMENTS.iter().map(|e| e.2).sum();
        let mut pick = rng.gen_range(0..total);
        let &(el, cap, _) = CHAIN_ELEMENTS
            .iter()
            .find(|e| {
                if pick < e.2 {
                    true
                } else {
                    pick -= e.2;
                    false
                }
            })
            .expect("weights cover the range");
        let v = self.add(el, cap);
        if let Some(h) = host {
            let room = self.free(h).min(cap);
            let order = if room >= 3 && rng.gen_bool(0.04) {
                BondOrder::Triple
            } else if room >= 2 && rng.gen_bool(0.15) {
                BondOrder::Double
            } else {
                BondOrder::Single
            };
            self.bond(h, v, order);
        }
        v
    }

    /// Adds a ring; returns its atoms in ring order.
    fn ring<R: Rng>(&mut self, rng: &mut R) -> Vec<usize> {
        match rng.gen_range(0..4) {
            0 | 1 => {
                // benzene or pyridine in Kekulé form
                let n_pos = if rng.gen_bool(0.3) { Some(rng.gen_range(0..6)) } else { None };
                let ids: Vec<usize> = (0..6)
                    .map(|k| if Some(k) == n_pos { self.add("N", 3) } else { self.add("C", 4) })
                    .collect();
                for k in 0..6 {
                    let order = if k % 2 == 0 { BondOrder::Double } else { BondOrder::Single };
                    self.bond(ids[k], ids[(k + 1) % 6], order);
                }
                ids
            }
            2 => {
                // furan, thiophene or pyrrole
                let (el, cap) = *[("O", 2), ("S", 2), ("N", 3)].choose(rng).expect("non-empty");
                let x = self.add(el, cap);
                let c: Vec<usize> = (0..4).map(|_| self.add("C", 4)).collect();
                self.bond(x, c[0], BondOrder::Single);
                self.bond(c[0], c[1], BondOrder::Double);
                self.bond(c[1], c[2], BondOrder::Single);
                self.bond(c[2], c[3], BondOrder::Double);
                self.bond(c[3], x, BondOrder::Single);
                let mut ids = vec![x];
                ids.extend(c);
                ids
            }
            _ => {
                let size = rng.gen_range(3..=7);
                let hetero = if rng.gen_bool(0.3) { Some(rng.gen_range(0..size)) } else { None };
                let ids: Vec<usize> = (0..size)
                    .map(|k| {
                        if Some(k) == hetero {
                            if rng.gen_bool(0.5) { self.add("N", 3) } else { self.add("O", 2) }
                        } else {
                            self.add("C", 4)
                        }
                    })
                    .collect();
                for k in 0..size {
                    self.bond(ids[k], ids[(k + 1) % size], BondOrder::Single);
                }
                ids
            }
        }
    }

    /// Saturated chain of `len` carbons from `a` to its neighbour `b`.
    fn fuse<R: Rng>(&mut self, rng: &mut R, a: usize, b: usize) {
        let len = rng.gen_range(2..=4);
        let mut prev = a;
        for _ in 0..len {
            let c = self.add("C", 4);
            self.bond(prev, c, BondOrder::Single);
            prev = c;
        }
        self.bond(prev, b, BondOrder::Single);
    }
}

/// A random valid molecule of between `min_atoms` and about `max_atoms`
/// heavy atoms (a ring added last may overshoot by a few atoms).
/// Growth that runs out of free valence early is retried.
pub fn random_molecule<R: Rng>(rng: &mut R, cfg: &SynthConfig) -> MolGraph {
    let min = cfg.min_atoms.max(1);
    loop {
        let target = rng.gen_range(min..=cfg.max_atoms.max(min));
        if let Some(g) = grow(rng, cfg, target) {
            return g;
        }
    }
}

fn grow<R: Rng>(rng: &mut R, cfg: &SynthConfig, target: usize) -> Option<MolGraph> {
    let mut b = Builder::new();
    if rng.gen_bool(cfg.p_ring.clamp(0.0, 1.0)) {
        b.ring(rng);
    } else {
        b.chain_atom(rng, None);
    }
    while b.atoms.len() < target {
        let hosts = b.hosts();
        let Some(&host) = hosts.choose(rng) else {
            break;
        };
        let roll: f64 = rng.gen();
        if roll < cfg.p_ring && target - b.atoms.len() >= 3 {
            let ring = b.ring(rng);
            let entry = *ring
                .iter()
                .copied()
                .filter(|&r| b.free(r) > 0)
                .collect::<Vec<_>>()
                .choose(rng)
                .expect("every ring has a free atom");
            b.bond(host, entry, BondOrder::Single);
        } else if roll < cfg.p_ring * 1.3 && target - b.atoms.len() >= 2 {
            let partners: Vec<usize> = b
                .bonds
                .iter()
                .filter(|bd| bd.a == host || bd.b == host)
                .map(|bd| bd.other(host))
                .filter(|&w| b.free(w) > 0)
                .collect();
            match partners.choose(rng) {
                Some(&w) => b.fuse(rng, host, w),
                None => {
                    b.chain_atom(rng, Some(host));
                }
            }
        } else {
            b.chain_atom(rng, Some(host));
        }
    }
    if b.atoms.len() < cfg.min_atoms {
        return None;
    }

    let n = b.atoms.len();
    for i in 0..n {
        if !rng.gen_bool(cfg.p_charge.clamp(0.0, 1.0)) {
            continue;
        }
        match (b.atoms[i].element.as_str(), b.used[i]) {
            ("N", u) if u <= 3 && b.free(i) > 0 || u == 3 => {
                b.atoms[i].formal_charge = 1;
                b.cap[i] = 4;
            }
            ("O", 1) => {
                b.atoms[i].formal_charge = -1;
                b.cap[i] = 1;
            }
            _ => {}
        }
    }

    let mut degree = vec![0usize; n];
    let mut all_single = vec![true; n];
    let mut in_double = vec![false; n];
    for bd in &b.bonds {
        for x in [bd.a, bd.b] {
            degree[x] += 1;
            if bd.order != BondOrder::Single {
                all_single[x] = false;
            }
            if bd.order == BondOrder::Double {
                in_double[x] = true;
            }
        }
    }
    for i in 0..n {
        if b.atoms[i].element == "C"
            && degree[i] >= 3
            && all_single[i]
            && rng.gen_bool(cfg.p_stereo.clamp(0.0, 1.0))
        {
            b.atoms[i].stereo = Some(if rng.gen() {
                Chirality::Clockwise
            } else {
                Chirality::CounterClockwise
            });
        }
    }
    let g = MolGraph::new(b.atoms.clone(), b.bonds.clone()).expect("builder keeps the graph valid");
    let in_ring = crate::molgraph::ring_bonds(&g);
    let mut bonds = b.bonds;
    for k in 0..bonds.len() {
        if bonds[k].order != BondOrder::Double || in_ring[k] {
            continue;
        }
        if !rng.gen_bool(cfg.p_stereo.clamp(0.0, 1.0)) {
            continue;
        }
        let (x, y) = (bonds[k].a, bonds[k].b);
        let side = |end: usize, partner: usize| -> Option<usize> {
            g.neighbors(end).iter().map(|&(_, bk)| bk).find(|&bk| {
                bk != k && {
                    let other = bonds[bk].other(end);
                    other != partner
                        && bonds[bk].order == BondOrder::Single
                        && bonds[bk].stereo.is_none()
                        && !in_double[other]
                }
            })
        };
        if let (Some(s1), Some(s2)) = (side(x, y), side(y, x)) {
            if s1 == s2 {
                continue;
            }
            for s in [s1, s2] {
                bonds[s].stereo = Some(if rng.gen() { BondStereo::Up } else { BondStereo::Down });
            }
        }
    }
    let (atoms, _, _) = g.into_parts();
    Some(MolGraph::new(atoms, bonds).expect("stereo marks keep the graph valid"))
}

/// `g` with its atoms in a random order.
pub fn shuffled<R: Rng>(g: &MolGraph, rng: &mut R) -> MolGraph {
    let mut order: Vec<usize> = (0..g.atom_count()).collect();
    order.shuffle(rng);
    g.permuted(&order).expect("a permutation of a valid graph")
}

/// Non-canonical SMILES of a random molecule written in a random atom order.
pub fn random_smiles<R: Rng>(rng: &mut R, cfg: &SynthConfig) -> String {
    let g = random_molecule(rng, cfg);
    crate::write_smiles(&shuffled(&g, rng), false)
}
