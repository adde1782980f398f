//! Canonical labelling by colour refinement and individualization.
//!
//! Every discrete partition reached by the search is a candidate labelling;
//! the one with the smallest certificate wins. Automorphisms found along the
//! way (two leaves with equal certificates) prune branches that would only
//! repeat an explored subtree.

use std::collections::BTreeMap;

use crate::molgraph::{permutation_is_odd, ring_bonds, Chirality, MolGraph, StereoRef};

const LEAF_BUDGET: usize = 5_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct LabelOptions {
    pub stereo: bool,
    pub features: bool,
}

/// A double bond with a cis/trans mark: `x` hangs off `a`, `y` off `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct DoubleBondConfig {
    pub bond: usize,
    pub a: usize,
    pub b: usize,
    pub x: usize,
    pub y: usize,
    pub trans: bool,
}

/// Configurations implied by directional single bonds on acyclic double bonds.
pub(crate) fn double_bond_configs(g: &MolGraph) -> Vec<DoubleBondConfig> {
    let in_ring = ring_bonds(g);
    let mut out = Vec::new();
    for (k, bond) in g.bonds().iter().enumerate() {
        if bond.order != crate::molgraph::BondOrder::Double || in_ring[k] {
            continue;
        }
        let marked = |end: usize, other: usize| {
            g.neighbors(end)
                .iter()
                .find(|&&(w, kk)| w != other && g.bonds()[kk].stereo.is_some())
                .copied()
        };
        let (Some((x, kx)), Some((y, ky))) = (marked(bond.a, bond.b), marked(bond.b, bond.a))
        else {
            continue;
        };
        let sa = g.bonds()[kx].stereo_from(x);
        let sb = g.bonds()[ky].stereo_from(bond.b);
        out.push(DoubleBondConfig {
            bond: k,
            a: bond.a,
            b: bond.b,
            x,
            y,
            trans: sa == sb,
        });
    }
    out
}

/// Initial atom classes: dense ids of a sorted invariant tuple.
pub(crate) fn initial_classes(
    g: &MolGraph,
    opts: LabelOptions,
    configs: &[DoubleBondConfig],
) -> Vec<u32> {
    let in_ring = ring_bonds(g);
    let f = g.features();
    type Inv = (
        String,
        u16,
        i8,
        bool,
        u8,
        usize,
        usize,
        String,
        bool,
        (usize, usize),
        Vec<(String, u8)>,
        (bool, bool),
    );
    let invariants: Vec<Inv> = (0..g.atom_count())
        .map(|v| {
            let a = g.atom(v);
            let ring_degree = g.neighbors(v).iter().filter(|(_, k)| in_ring[*k]).count();
            let (label, ap, m, sg) = if opts.features {
                let label = f.labels.get(&v).cloned().unwrap_or_default();
                let m = (
                    f.m_sections.iter().filter(|s| s.attachment == v).count(),
                    f.m_sections
                        .iter()
                        .filter(|s| s.candidates.contains(&v))
                        .count(),
                );
                let mut sg: Vec<(String, u8)> = f
                    .sg_sections
                    .iter()
                    .filter(|s| s.atoms.contains(&v))
                    .map(|s| (s.subscript.clone(), s.connectivity as u8))
                    .collect();
                sg.sort();
                (label, f.attach_points.contains(&v), m, sg)
            } else {
                (String::new(), false, (0, 0), Vec::new())
            };
            let stereo = if opts.stereo {
                (
                    a.stereo.is_some(),
                    configs.iter().any(|c| c.a == v || c.b == v),
                )
            } else {
                (false, false)
            };
            (
                a.element.clone(),
                a.isotope.unwrap_or(0),
                a.formal_charge,
                a.aromatic,
                g.total_h(v),
                g.degree(v),
                ring_degree,
                label,
                ap,
                m,
                sg,
                stereo,
            )
        })
        .collect();
    dense(&invariants)
}

fn dense<T: Ord>(keys: &[T]) -> Vec<u32> {
    let mut idx: Vec<usize> = (0..keys.len()).collect();
    idx.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    let mut out = vec![0u32; keys.len()];
    let mut id = 0u32;
    for (p, &i) in idx.iter().enumerate() {
        if p > 0 && keys[idx[p - 1]] != keys[i] {
            id += 1;
        }
        out[i] = id;
    }
    out
}

fn class_count(colors: &[u32]) -> usize {
    colors.iter().max().map_or(0, |m| *m as usize + 1)
}

/// Refine to the coarsest equitable partition below `colors`.
pub(crate) fn refine(g: &MolGraph, colors: &mut Vec<u32>) {
    let mut classes = class_count(colors);
    loop {
        let sigs: Vec<(u32, Vec<(u32, u8)>)> = (0..g.atom_count())
            .map(|v| {
                let mut nb: Vec<(u32, u8)> = g
                    .neighbors(v)
                    .iter()
                    .map(|&(w, k)| (colors[w], g.bonds()[k].order.code()))
                    .collect();
                nb.sort_unstable();
                (colors[v], nb)
            })
            .collect();
        let next = dense(&sigs);
        let next_classes = class_count(&next);
        *colors = next;
        if next_classes == classes {
            return;
        }
        classes = next_classes;
    }
}

struct Search<'a> {
    g: &'a MolGraph,
    opts: LabelOptions,
    initial: Vec<u32>,
    configs: Vec<DoubleBondConfig>,
    subscripts: BTreeMap<String, u32>,
    best: Option<(Vec<u32>, Vec<u32>)>,
    first: Option<(Vec<u32>, Vec<u32>)>,
    automorphisms: Vec<Vec<usize>>,
    leaves: usize,
}

impl Search<'_> {
    fn certificate(&self, rank: &[u32]) -> Vec<u32> {
        let g = self.g;
        let n = g.atom_count();
        let mut inv = vec![0usize; n];
        for (v, &r) in rank.iter().enumerate() {
            inv[r as usize] = v;
        }
        let mut cert = Vec::with_capacity(n * 6);
        for &v in &inv {
            cert.push(self.initial[v]);
            let mut nb: Vec<u32> = g
                .neighbors(v)
                .iter()
                .map(|&(w, k)| rank[w] * 8 + g.bonds()[k].order.code() as u32)
                .collect();
            nb.sort_unstable();
            cert.push(nb.len() as u32);
            cert.extend(nb);
        }
        if self.opts.stereo {
            for &v in &inv {
                cert.push(match tetrahedral_parity(g, v, rank) {
                    None => 0,
                    Some(Chirality::CounterClockwise) => 1,
                    Some(Chirality::Clockwise) => 2,
                });
            }
            let mut db: Vec<(u32, u32, u32)> = self
                .configs
                .iter()
                .map(|c| {
                    let t = relative_trans(g, c, rank);
                    let (ra, rb) = (rank[c.a], rank[c.b]);
                    (ra.min(rb), ra.max(rb), t as u32)
                })
                .collect();
            db.sort_unstable();
            cert.push(u32::MAX);
            for (a, b, t) in db {
                cert.extend([a, b, t]);
            }
        }
        if self.opts.features {
            let f = g.features();
            let mut ms: Vec<Vec<u32>> = f
                .m_sections
                .iter()
                .map(|m| {
                    let mut c: Vec<u32> = m.candidates.iter().map(|&c| rank[c]).collect();
                    c.sort_unstable();
                    let mut e = vec![rank[m.attachment], c.len() as u32];
                    e.extend(c);
                    e
                })
                .collect();
            ms.sort();
            cert.push(u32::MAX);
            for m in ms {
                cert.extend(m);
            }
            let mut sgs: Vec<Vec<u32>> = f
                .sg_sections
                .iter()
                .map(|s| {
                    let mut a: Vec<u32> = s.atoms.iter().map(|&a| rank[a]).collect();
                    a.sort_unstable();
                    let mut e = vec![self.subscripts[&s.subscript], s.connectivity as u32];
                    e.push(a.len() as u32);
                    e.extend(a);
                    e
                })
                .collect();
            sgs.sort();
            cert.push(u32::MAX);
            for s in sgs {
                cert.extend(s);
            }
        }
        cert
    }

    fn target_cell(colors: &[u32]) -> Option<Vec<usize>> {
        let mut cells: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for (v, &c) in colors.iter().enumerate() {
            cells.entry(c).or_default().push(v);
        }
        cells
            .into_values()
            .filter(|c| c.len() > 1)
            .min_by_key(|c| c.len())
    }

    fn visit(&mut self, colors: Vec<u32>, prefix: &mut Vec<usize>) {
        if self.leaves >= LEAF_BUDGET {
            return;
        }
        let Some(cell) = Self::target_cell(&colors) else {
            self.leaf(colors);
            return;
        };
        let mut explored: Vec<usize> = Vec::new();
        for &v in &cell {
            if self.leaves >= LEAF_BUDGET {
                return;
            }
            if !explored.is_empty() && self.in_explored_orbit(v, &explored, prefix) {
                continue;
            }
            let mut next: Vec<u32> = colors
                .iter()
                .enumerate()
                .map(|(w, &c)| 2 * c + u32::from(colors[w] == colors[v] && w != v))
                .collect();
            next = dense(&next);
            refine(self.g, &mut next);
            prefix.push(v);
            self.visit(next, prefix);
            prefix.pop();
            explored.push(v);
        }
    }

    fn in_explored_orbit(&self, v: usize, explored: &[usize], prefix: &[usize]) -> bool {
        let n = self.g.atom_count();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut any = false;
        for gamma in &self.automorphisms {
            if prefix.iter().any(|&p| gamma[p] != p) {
                continue;
            }
            any = true;
            for (x, &y) in gamma.iter().enumerate() {
                let (rx, ry) = (find(&mut parent, x), find(&mut parent, y));
                if rx != ry {
                    parent[rx] = ry;
                }
            }
        }
        if !any {
            return false;
        }
        let rv = find(&mut parent, v);
        explored.iter().any(|&e| find(&mut parent, e) == rv)
    }

    fn leaf(&mut self, rank: Vec<u32>) {
        self.leaves += 1;
        let cert = self.certificate(&rank);
        let automorphism = |other: &[u32]| -> Vec<usize> {
            // atom with rank r in `other` maps to the atom with rank r here
            let mut by_rank = vec![0usize; rank.len()];
            for (v, &r) in rank.iter().enumerate() {
                by_rank[r as usize] = v;
            }
            other.iter().map(|&r| by_rank[r as usize]).collect()
        };
        if let Some((first_cert, first_rank)) = &self.first {
            if *first_cert == cert {
                let gamma = automorphism(first_rank);
                self.automorphisms.push(gamma);
                return;
            }
        } else {
            self.first = Some((cert.clone(), rank.clone()));
        }
        match &self.best {
            Some((best_cert, best_rank)) if *best_cert == cert => {
                let gamma = automorphism(best_rank);
                self.automorphisms.push(gamma);
            }
            Some((best_cert, _)) if *best_cert <= cert => {}
            _ => self.best = Some((cert, rank)),
        }
    }
}

/// Tetrahedral mark re-expressed against neighbours ordered by `rank`
/// (implicit hydrogen first).
pub(crate) fn tetrahedral_parity(g: &MolGraph, v: usize, rank: &[u32]) -> Option<Chirality> {
    let mark = g.atom(v).stereo?;
    let reference = g.stereo_reference(v);
    if reference.len() < 3 {
        return None;
    }
    let mut ranked = reference.clone();
    ranked.sort_by_key(|r| match r {
        StereoRef::ImplicitH => (0, 0),
        StereoRef::Atom(a) => (1, rank[*a]),
    });
    Some(mark.flipped_if(permutation_is_odd(&reference, &ranked)))
}

/// Lowest-ranked substituent on `end`, other than `partner`.
pub(crate) fn reference_neighbor(g: &MolGraph, end: usize, partner: usize, rank: &[u32]) -> usize {
    g.neighbors(end)
        .iter()
        .map(|&(w, _)| w)
        .filter(|&w| w != partner)
        .min_by_key(|&w| rank[w])
        .expect("configured double bond ends have substituents")
}

/// Whether the lowest-ranked substituents on either end are trans.
pub(crate) fn relative_trans(g: &MolGraph, c: &DoubleBondConfig, rank: &[u32]) -> bool {
    let ra = reference_neighbor(g, c.a, c.b, rank);
    let rb = reference_neighbor(g, c.b, c.a, rank);
    c.trans ^ (ra != c.x) ^ (rb != c.y)
}

/// Canonical rank of every atom (`rank[atom]`), a permutation of `0..n`.
pub(crate) fn canonical_labeling(
    g: &MolGraph,
    opts: LabelOptions,
    configs: &[DoubleBondConfig],
) -> Vec<usize> {
    let n = g.atom_count();
    if n == 0 {
        return Vec::new();
    }
    let configs = if opts.stereo { configs.to_vec() } else { Vec::new() };
    let initial = initial_classes(g, opts, &configs);
    let mut colors = initial.clone();
    refine(g, &mut colors);
    let subscripts = {
        let mut s: Vec<String> = g
            .features()
            .sg_sections
            .iter()
            .map(|s| s.subscript.clone())
            .collect();
        s.sort();
        s.dedup();
        s.into_iter().enumerate().map(|(i, s)| (s, i as u32)).collect()
    };
    let mut search = Search {
        g,
        opts,
        initial,
        configs,
        subscripts,
        best: None,
        first: None,
        automorphisms: Vec::new(),
        leaves: 0,
    };
    search.visit(colors, &mut Vec::new());
    let (_, rank) = search.best.expect("search reaches at least one leaf");
    if search.leaves >= LEAF_BUDGET {
        log::warn!("canonical search stopped after {LEAF_BUDGET} leaves");
    }
    rank.into_iter().map(|r| r as usize).collect()
}
