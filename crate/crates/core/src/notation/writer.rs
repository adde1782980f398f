//! Depth-first SMILES emission under a caller-supplied atom priority.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::molgraph::{
    elements, permutation_is_odd, BondOrder, BondStereo, Chirality, MolGraph, StereoRef,
};

pub(crate) struct Emission {
    pub text: String,
    /// Atom indices in the order they appear in `text`.
    pub order: Vec<usize>,
}

#[derive(Default, Clone)]
struct Node {
    parent: Option<(usize, usize)>,
    children: Vec<(usize, usize)>,
    /// Ring bonds closed here (this atom is the later one): (partner, bond).
    closes: Vec<(usize, usize)>,
    /// Ring bonds opened here: (partner, bond).
    opens: Vec<(usize, usize)>,
}

/// Write `g` as SMILES, visiting lower `priority` values first.
pub(crate) fn emit(g: &MolGraph, priority: &[usize]) -> Emission {
    let n = g.atom_count();
    let mut nodes = vec![Node::default(); n];
    let mut visited = vec![false; n];
    let mut bond_used = vec![false; g.bonds().len()];
    let mut preorder = Vec::with_capacity(n);
    let mut roots = Vec::new();

    let mut starts: Vec<usize> = (0..n).collect();
    starts.sort_by_key(|&i| (priority[i], i));
    let sorted_neighbors = |v: usize| {
        let mut nb: Vec<(usize, usize)> = g.neighbors(v).to_vec();
        nb.sort_by_key(|&(w, _)| (priority[w], w));
        nb
    };

    for &root in &starts {
        if visited[root] {
            continue;
        }
        roots.push(root);
        visited[root] = true;
        preorder.push(root);
        let mut stack: Vec<(usize, Vec<(usize, usize)>, usize)> =
            vec![(root, sorted_neighbors(root), 0)];
        // Ring closures first: a neighbour that is already visited (an
        // ancestor) is recorded before descending so that digits precede branches.
        while let Some((v, nbrs, pos)) = stack.last_mut() {
            let v = *v;
            if *pos == 0 {
                for &(w, k) in nbrs.iter() {
                    if visited[w] && !bond_used[k] {
                        bond_used[k] = true;
                        nodes[v].closes.push((w, k));
                        nodes[w].opens.push((v, k));
                    }
                }
            }
            if let Some(&(w, k)) = nbrs.get(*pos) {
                *pos += 1;
                if bond_used[k] || visited[w] {
                    continue;
                }
                bond_used[k] = true;
                visited[w] = true;
                preorder.push(w);
                nodes[w].parent = Some((v, k));
                nodes[v].children.push((w, k));
                let nb = sorted_neighbors(w);
                stack.push((w, nb, 0));
            } else {
                stack.pop();
            }
        }
    }

    let position: Vec<usize> = {
        let mut p = vec![0; n];
        for (i, &a) in preorder.iter().enumerate() {
            p[a] = i;
        }
        p
    };
    for node in nodes.iter_mut() {
        node.opens.sort_by_key(|&(w, _)| position[w]);
    }

    enum Step {
        Atom(usize),
        Open,
        Close,
        Dot,
    }
    let mut text = String::new();
    let mut digits_in_use: BTreeSet<u32> = BTreeSet::new();
    let mut digit_of_bond = vec![0u32; g.bonds().len()];
    let mut steps: Vec<Step> = Vec::new();
    for (i, &root) in roots.iter().enumerate().rev() {
        steps.push(Step::Atom(root));
        if i > 0 {
            steps.push(Step::Dot);
        }
    }
    while let Some(step) = steps.pop() {
        let v = match step {
            Step::Open => {
                text.push('(');
                continue;
            }
            Step::Close => {
                text.push(')');
                continue;
            }
            Step::Dot => {
                text.push('.');
                continue;
            }
            Step::Atom(v) => v,
        };
        let node = &nodes[v];
        if let Some((p, k)) = node.parent {
            text.push_str(bond_symbol(g, k, p, v));
        }
        // neighbour order as written: parent, implicit H, ring digits, children
        let mut written = Vec::with_capacity(4);
        if let Some((p, _)) = node.parent {
            written.push(StereoRef::Atom(p));
        }
        if g.total_h(v) == 1 {
            written.push(StereoRef::ImplicitH);
        }
        let mut ring_text = String::new();
        for &(w, k) in &node.closes {
            let d = digit_of_bond[k];
            digits_in_use.remove(&d);
            push_digit(&mut ring_text, d);
            written.push(StereoRef::Atom(w));
        }
        for &(w, k) in &node.opens {
            let d = (1..).find(|d| !digits_in_use.contains(d)).unwrap();
            digits_in_use.insert(d);
            digit_of_bond[k] = d;
            ring_text.push_str(bond_symbol(g, k, v, w));
            push_digit(&mut ring_text, d);
            written.push(StereoRef::Atom(w));
        }
        written.extend(node.children.iter().map(|&(c, _)| StereoRef::Atom(c)));
        let chirality = g.atom(v).stereo.and_then(|mark| {
            let reference = g.stereo_reference(v);
            (reference.len() == written.len() && reference.len() >= 3)
                .then(|| mark.flipped_if(permutation_is_odd(&reference, &written)))
        });
        text.push_str(&atom_token(g, v, chirality));
        text.push_str(&ring_text);

        let kids = &node.children;
        for (i, &(c, _)) in kids.iter().enumerate().rev() {
            if i + 1 == kids.len() {
                steps.push(Step::Atom(c));
            } else {
                steps.push(Step::Close);
                steps.push(Step::Atom(c));
                steps.push(Step::Open);
            }
        }
    }
    Emission {
        text,
        order: preorder,
    }
}

fn push_digit(out: &mut String, d: u32) {
    if d < 10 {
        let _ = write!(out, "{d}");
    } else if d < 100 {
        let _ = write!(out, "%{d}");
    } else {
        let _ = write!(out, "%({d})");
    }
}

fn bond_symbol(g: &MolGraph, k: usize, from: usize, to: usize) -> &'static str {
    let bond = &g.bonds()[k];
    let both_aromatic = g.atom(from).aromatic && g.atom(to).aromatic;
    match bond.order {
        BondOrder::Single => match bond.stereo_from(from) {
            Some(BondStereo::Up) => "/",
            Some(BondStereo::Down) => "\\",
            None if both_aromatic => "-",
            None => "",
        },
        BondOrder::Double => "=",
        BondOrder::Triple => "#",
        BondOrder::Aromatic if both_aromatic => "",
        BondOrder::Aromatic => ":",
    }
}

fn atom_token(g: &MolGraph, v: usize, chirality: Option<Chirality>) -> String {
    let atom = g.atom(v);
    let h = g.total_h(v);
    let pseudo = atom.is_pseudo();
    let plain_ok = atom.formal_charge == 0 && atom.isotope.is_none() && chirality.is_none();
    if pseudo && plain_ok && h == 0 {
        return "*".to_string();
    }
    let symbol = if pseudo { "*" } else { atom.element.as_str() };
    let aromatic_organic = matches!(symbol, "B" | "C" | "N" | "O" | "P" | "S");
    if !pseudo
        && plain_ok
        && elements::is_organic_subset(symbol)
        && (!atom.aromatic || aromatic_organic)
        && g.model_h(v) == Some(h)
    {
        return if atom.aromatic {
            symbol.to_ascii_lowercase()
        } else {
            symbol.to_string()
        };
    }
    let mut out = String::from("[");
    if let Some(iso) = atom.isotope {
        let _ = write!(out, "{iso}");
    }
    if atom.aromatic && elements::has_aromatic_form(symbol) {
        out.push_str(&symbol.to_ascii_lowercase());
    } else {
        out.push_str(symbol);
    }
    match chirality {
        Some(Chirality::CounterClockwise) => out.push('@'),
        Some(Chirality::Clockwise) => out.push_str("@@"),
        None => {}
    }
    if h > 0 {
        out.push('H');
        if h > 1 {
            let _ = write!(out, "{h}");
        }
    }
    match atom.formal_charge {
        0 => {}
        1 => out.push('+'),
        -1 => out.push('-'),
        c if c > 0 => {
            let _ = write!(out, "+{c}");
        }
        c => {
            let _ = write!(out, "-{}", -c);
        }
    }
    out.push(']');
    out
}
