use std::fmt::Write;

use crate::molgraph::{BondOrder, MolGraph};

fn rgroup_number(label: &str) -> Option<u32> {
    label.strip_prefix('R')?.parse().ok()
}

fn push_pairs(out: &mut String, tag: &str, pairs: &[(usize, i64)]) {
    for chunk in pairs.chunks(8) {
        let _ = write!(out, "M  {tag}{:>3}", chunk.len());
        for (a, v) in chunk {
            let _ = write!(out, " {:>3} {:>3}", a + 1, v);
        }
        out.push('\n');
    }
}

/// MOL V2000 text for `g`. Aromatic systems are written in Kekulé form
/// where one exists. Variable groups become `R#` atoms with `M  RGP`, other
/// labelled pseudo atoms become `A` atoms with an alias, and frequency
/// variation becomes SRU Sgroups; positional variation has no V2000 form
/// here and is left out.
pub fn write_molfile(g: &MolGraph) -> String {
    let k = crate::canon::aromatic::kekule_form(g);
    let f = g.features();
    let mut out = String::from("\n  markushkit\n\n");
    let _ = writeln!(
        out,
        "{:>3}{:>3}  0  0  0  0  0  0  0  0999 V2000",
        k.atom_count(),
        k.bonds().len()
    );
    let mut rgp = Vec::new();
    let mut aliases = Vec::new();
    let mut charges = Vec::new();
    let mut isotopes = Vec::new();
    for (i, a) in k.atoms().iter().enumerate() {
        let (x, y) = a.coords.unwrap_or((0.0, 0.0));
        let symbol = if a.is_pseudo() {
            let label = g.effective_label(i);
            match label.and_then(rgroup_number) {
                Some(n) => {
                    rgp.push((i, n as i64));
                    "R#".to_string()
                }
                None => {
                    if let Some(l) = label {
                        aliases.push((i, l.to_string()));
                    }
                    "A".to_string()
                }
            }
        } else {
            a.element.clone()
        };
        let _ = writeln!(
            out,
            "{x:>10.4}{y:>10.4}{:>10.4} {symbol:<3} 0  0  0  0  0  0  0  0  0  0  0  0",
            0.0
        );
        if a.formal_charge != 0 {
            charges.push((i, a.formal_charge as i64));
        }
        if let Some(iso) = a.isotope {
            isotopes.push((i, iso as i64));
        }
    }
    for b in k.bonds() {
        let order = match b.order {
            BondOrder::Single => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            BondOrder::Aromatic => 4,
        };
        let _ = writeln!(out, "{:>3}{:>3}{order:>3}  0", b.a + 1, b.b + 1);
    }
    push_pairs(&mut out, "CHG", &charges);
    push_pairs(&mut out, "ISO", &isotopes);
    push_pairs(&mut out, "RGP", &rgp);
    for (s, sg) in f.sg_sections.iter().enumerate() {
        let idx = s + 1;
        let _ = writeln!(out, "M  STY  1 {idx:>3} SRU");
        for chunk in sg.atoms.chunks(15) {
            let _ = write!(out, "M  SAL {idx:>3}{:>3}", chunk.len());
            for a in chunk {
                let _ = write!(out, " {:>3}", a + 1);
            }
            out.push('\n');
        }
        let _ = writeln!(out, "M  SMT {idx:>3} {}", sg.subscript);
        let _ = writeln!(
            out,
            "M  SCN  1 {idx:>3} {}",
            sg.connectivity.as_str().to_ascii_uppercase()
        );
    }
    for (i, text) in aliases {
        let _ = writeln!(out, "A  {:>3}\n{text}", i + 1);
    }
    out.push_str("M  END\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molfile::{parse_molfile, AtomNumber, SgroupType};
    use crate::notation::parse_cxsmiles;

    #[test]
    fn benzene_is_written_kekule() {
        let g = crate::parse_smiles("c1ccccc1").unwrap();
        let doc = parse_molfile(&write_molfile(&g)).unwrap();
        assert_eq!(doc.atoms.len(), 6);
        let doubles = doc.bonds.iter().filter(|b| b.order == 2).count();
        assert_eq!(doubles, 3);
    }

    #[test]
    fn markush_layer_survives() {
        let g = parse_cxsmiles("*CC(C)C* |$R1;;;;;Ph$,Sg:n:1,2::ht|").unwrap();
        let doc = parse_molfile(&write_molfile(&g)).unwrap();
        assert_eq!(doc.rgroup_label(AtomNumber(1)).as_deref(), Some("R1"));
        assert_eq!(doc.aliases.get(&AtomNumber(6)).map(String::as_str), Some("Ph"));
        assert_eq!(doc.sgroups.len(), 1);
        assert_eq!(doc.sgroups[0].stype, SgroupType::Sru);
        assert_eq!(doc.sgroups[0].atoms, vec![AtomNumber(2), AtomNumber(3)]);
        assert_eq!(doc.sgroups[0].subscript, "n");
    }

    #[test]
    fn charges_and_isotopes() {
        let g = crate::parse_smiles("[13CH3][NH3+]").unwrap();
        let doc = parse_molfile(&write_molfile(&g)).unwrap();
        assert_eq!(doc.atoms[0].isotope, Some(13));
        assert_eq!(doc.atoms[1].charge, 1);
    }
}
