use super::*;
use crate::molfile::{MolAtom, MolBond};
use crate::notation::parse_cxsmiles;

fn doc(atoms: &[(&str, f64, f64)], bonds: &[(u32, u32, u8)]) -> MolfileDoc {
    MolfileDoc {
        atoms: atoms
            .iter()
            .map(|&(s, x, y)| MolAtom {
                x,
                y,
                z: 0.0,
                symbol: s.to_string(),
                charge: 0,
                isotope: None,
            })
            .collect(),
        bonds: bonds
            .iter()
            .map(|&(a, b, order)| MolBond {
                a: AtomNumber(a),
                b: AtomNumber(b),
                order,
                stereo: 0,
            })
            .collect(),
        ..Default::default()
    }
}

fn sgroup(index: u32, stype: SgroupType, atoms: &[u32], text: &str) -> SgroupRecord {
    SgroupRecord {
        index,
        stype,
        atoms: atoms.iter().map(|&a| AtomNumber(a)).collect(),
        subscript: text.to_string(),
        connectivity: None,
        crossing_bonds: vec![],
    }
}

/// Hexagon of radius 1.4 around (cx, cy), first vertex at angle 0.
fn hexagon(cx: f64, cy: f64) -> Vec<(f64, f64)> {
    (0..6)
        .map(|k| {
            let t = std::f64::consts::PI / 3.0 * k as f64;
            (cx + 1.4 * t.cos(), cy + 1.4 * t.sin())
        })
        .collect()
}

fn benzene_atoms() -> Vec<(&'static str, f64, f64)> {
    hexagon(0.0, 0.0).into_iter().map(|(x, y)| ("C", x, y)).collect()
}

fn benzene_bonds() -> Vec<(u32, u32, u8)> {
    (1..=6).map(|i| (i, i % 6 + 1, if i % 2 == 1 { 2 } else { 1 })).collect()
}

#[test]
fn alias_matching_the_pattern_is_a_variable_group() {
    let mut d = doc(&[("*", 0.0, 0.0), ("C", 1.0, 0.0)], &[(1, 2, 1)]);
    d.aliases.insert(AtomNumber(1), "R1".into());
    let derived = Converter::default().derive_rgroups(&d).unwrap();
    assert_eq!(derived.labels(), [(0, "R1".to_string())].into());
    assert!(derived.warnings.is_empty());
}

#[test]
fn pattern_variants() {
    let c = Converter::default();
    for l in ["R1", "R12", "R'", "R''", "R1'", "X", "Y2", "Z'", "W"] {
        assert!(c.is_variable_group(l), "{l}");
    }
    for l in ["R", "Rx", "OMe", "XY", "r1", "(I)"] {
        assert!(!c.is_variable_group(l), "{l}");
    }
    let custom = Converter::with_dictionary(
        ConvertConfig {
            rgroup_pattern: "G\\d+".into(),
            ..Default::default()
        },
        AbbreviationDict::default(),
    )
    .unwrap();
    assert!(custom.is_variable_group("G7"));
    assert!(!custom.is_variable_group("R1"));
}

#[test]
fn superatom_expands_from_the_dictionary() {
    // ethyl carbon 2 carries a one-atom OMe superatom
    let mut d = doc(
        &[("C", 0.0, 0.0), ("C", 1.0, 0.0), ("C", 2.0, 0.0)],
        &[(1, 2, 1), (2, 3, 1)],
    );
    d.sgroups.push(sgroup(1, SgroupType::Sup, &[3], "OMe"));
    let c = Converter::default();
    let derived = c.derive_rgroups(&d).unwrap();
    assert_eq!(derived.uses[&2], LabelUse::Expand("OMe".into()));
    let (g, report) = c.build(&d).unwrap();
    // CH3-CH2-O-CH3: the group adds O, C and three H to ethyl
    assert_eq!(g.formula(), "C3H8O");
    assert_eq!(g.atom(2).element, "O");
    assert_eq!(report.expansion_atoms_added, 1);
    let expected = crate::parse_smiles("CCOC").unwrap();
    assert!(crate::canon::equivalent(&g, &expected, Default::default()).equivalent);
}

#[test]
fn bivalent_abbreviation_bridges_two_bonds() {
    let mut d = doc(
        &[("C", 0.0, 0.0), ("C", 1.0, 0.0), ("C", 2.0, 0.0)],
        &[(1, 2, 1), (2, 3, 1)],
    );
    d.aliases.insert(AtomNumber(2), "SO2".into());
    let (g, _) = Converter::default().build(&d).unwrap();
    let expected = crate::parse_smiles("CS(=O)(=O)C").unwrap();
    assert!(crate::canon::equivalent(&g, &expected, Default::default()).equivalent);
}

#[test]
fn unknown_abbreviation_is_kept_with_a_warning() {
    let mut d = doc(&[("C", 0.0, 0.0), ("C", 1.0, 0.0)], &[(1, 2, 1)]);
    d.aliases.insert(AtomNumber(2), "Boc".into());
    let mut small = AbbreviationDict::default();
    small.insert("Me", "*C").unwrap();
    let c = Converter::with_dictionary(ConvertConfig::default(), small).unwrap();
    let derived = c.derive_rgroups(&d).unwrap();
    assert_eq!(derived.uses[&1], LabelUse::Pseudo("Boc".into()));
    assert_eq!(derived.warnings.len(), 1);
    let (g, report) = c.build(&d).unwrap();
    assert_eq!(g.features().labels[&1], "Boc");
    assert_eq!(report.pseudo_labels, 1);
    assert_eq!(report.rgroups_derived, 0);
}

#[test]
fn rgroup_atoms_and_element_aliases() {
    let mut d = doc(
        &[("R#", 0.0, 0.0), ("C", 1.0, 0.0), ("R#", 2.0, 0.0), ("C", 3.0, 0.0)],
        &[(1, 2, 1), (2, 3, 1), (3, 4, 1)],
    );
    d.rgp_lines.insert(AtomNumber(1), 2);
    d.aliases.insert(AtomNumber(4), "Cl".into());
    let derived = Converter::default().derive_rgroups(&d).unwrap();
    assert_eq!(
        derived.labels(),
        [(0, "R2".to_string()), (2, "R?".to_string())].into()
    );
    assert_eq!(derived.uses[&3], LabelUse::Element("Cl".into()));
    let (g, _) = Converter::default().build(&d).unwrap();
    assert_eq!(g.atom(3).element, "Cl");
}

#[test]
fn multi_atom_superatom_collapses_unless_known() {
    let mut d = doc(
        &[("C", 0.0, 0.0), ("C", 1.0, 0.0), ("C", 2.0, 0.0), ("O", 3.0, 0.0)],
        &[(1, 2, 1), (2, 3, 1), (3, 4, 1)],
    );
    d.sgroups.push(sgroup(1, SgroupType::Sup, &[2, 3, 4], "Foo"));
    let (g, report) = Converter::default().build(&d).unwrap();
    assert_eq!(g.atom_count(), 2);
    assert_eq!(g.features().labels[&1], "Foo");
    assert_eq!(report.superatom_atoms_collapsed, 2);

    d.sgroups[0].subscript = "Et".into();
    let (g, _) = Converter::default().build(&d).unwrap();
    assert_eq!(g.atom_count(), 4);
    assert!(g.features().labels.is_empty());
}

#[test]
fn sru_mapping() {
    let c = Converter::default();
    let mut d = doc(&[("C", 0.0, 0.0), ("C", 1.0, 0.0)], &[(1, 2, 1)]);
    let mut s = sgroup(1, SgroupType::Sru, &[1], "n");
    s.connectivity = Some(SruConnectivity::HT);
    d.sgroups.push(s);
    let (sg, w) = c.extract_frequency_variation(&d);
    assert!(w.is_empty());
    assert_eq!(
        sg,
        vec![FrequencyVariation {
            atoms: vec![0],
            subscript: "n".into(),
            connectivity: SgConnectivity::HeadToTail
        }]
    );
    d.sgroups[0].connectivity = None;
    assert_eq!(
        c.extract_frequency_variation(&d).0[0].connectivity,
        SgConnectivity::Unknown
    );
    d.sgroups[0].connectivity = Some(SruConnectivity::HH);
    assert_eq!(
        c.extract_frequency_variation(&d).0[0].connectivity,
        SgConnectivity::HeadToHead
    );
}

#[test]
fn overlapping_srus_are_dropped() {
    let c = Converter::default();
    let mut d = doc(
        &[("C", 0.0, 0.0), ("C", 1.0, 0.0), ("C", 2.0, 0.0), ("C", 3.0, 0.0)],
        &[(1, 2, 1), (2, 3, 1), (3, 4, 1)],
    );
    d.sgroups.push(sgroup(1, SgroupType::Sru, &[2, 3], "n"));
    d.sgroups.push(sgroup(2, SgroupType::Sru, &[3, 4], "m"));
    let (sg, w) = c.extract_frequency_variation(&d);
    assert!(sg.is_empty());
    assert_eq!(w.len(), 1);
}

fn benzene_with_interior_anchor() -> MolfileDoc {
    // anchor exactly at the ring centroid, bonded to a methyl outside the ring
    let mut atoms = benzene_atoms();
    atoms.push(("*", 0.0, 0.0));
    atoms.push(("C", 0.0, 2.8));
    let mut bonds = benzene_bonds();
    bonds.push((7, 8, 1));
    doc(&atoms, &bonds)
}

#[test]
fn interior_anchor_gives_positional_variation() {
    let c = Converter::default();
    let (g, report) = c.build(&benzene_with_interior_anchor()).unwrap();
    assert_eq!(g.atom_count(), 7);
    let m = &g.features().m_sections;
    assert_eq!(m.len(), 1);
    let carbon = (0..7).find(|&i| g.degree(i) == 0).unwrap();
    assert_eq!(m[0].attachment, carbon);
    let mut cand = m[0].candidates.clone();
    cand.sort();
    assert_eq!(cand, vec![0, 1, 2, 3, 4, 5]);
    assert_eq!(report.anchors_removed, 1);
    assert_eq!(report.m_reconstructed, 1);
}

#[test]
fn substituents_on_ring_members_are_not_anchors() {
    let c = Converter::default();
    let mut atoms = benzene_atoms();
    atoms.push(("C", 2.8, 0.0));
    let mut bonds = benzene_bonds();
    bonds.push((1, 7, 1));
    let (g, _) = c.build(&doc(&atoms, &bonds)).unwrap();
    assert!(g.features().m_sections.is_empty());
    let (g, _) = c
        .build(&doc(
            &[("C", 0.0, 0.0), ("C", 1.0, 0.5), ("O", 2.0, 0.0)],
            &[(1, 2, 1), (2, 3, 1)],
        ))
        .unwrap();
    assert!(g.features().m_sections.is_empty());
}

#[test]
fn anchor_inside_two_rings_picks_nearest_centroid() {
    // a small hexagon inside a large 8-ring; the anchor sits near the small
    // ring's centre
    let big: Vec<(f64, f64)> = (0..8)
        .map(|k| {
            let t = std::f64::consts::PI / 4.0 * k as f64;
            (6.0 * t.cos(), 6.0 * t.sin())
        })
        .collect();
    let small = hexagon(1.0, 0.0);
    let mut atoms: Vec<(&str, f64, f64)> = big.iter().map(|&(x, y)| ("C", x, y)).collect();
    atoms.extend(small.iter().map(|&(x, y)| ("C", x, y)));
    atoms.push(("*", 1.1, 0.0));
    atoms.push(("C", 1.1, 1.7));
    let mut bonds: Vec<(u32, u32, u8)> = (1..=8).map(|i| (i, i % 8 + 1, 1)).collect();
    bonds.extend((1..=6).map(|i| (8 + i, 8 + i % 6 + 1, 1)));
    bonds.push((15, 16, 1));
    let c = Converter::default();
    let (g, report) = c.build(&doc(&atoms, &bonds)).unwrap();
    let m = &g.features().m_sections;
    assert_eq!(m.len(), 1);
    assert_eq!(m[0].candidates, (8..14).collect::<Vec<_>>());
    assert_eq!(report.warnings.len(), 1);
}

#[test]
fn clean_removes_unbonded_text() {
    let c = Converter::default();
    let mut d = doc(
        &[("C", 0.0, 0.0), ("C", 1.0, 0.0), ("C", 0.5, -2.0)],
        &[(1, 2, 1)],
    );
    d.aliases.insert(AtomNumber(3), "(I)".into());
    let (cleaned, removed) = c.clean(&d);
    assert_eq!(cleaned.atoms.len(), 2);
    assert_eq!(removed.len(), 1);
    assert!(removed[0].contains("(I)"));
    assert_eq!(c.clean(&cleaned).0, cleaned);
}

#[test]
fn clean_keeps_connected_abbreviations_and_fixed_points() {
    let c = Converter::default();
    let mut d = doc(&[("C", 0.0, 0.0), ("C", 1.0, 0.0)], &[(1, 2, 1)]);
    d.aliases.insert(AtomNumber(2), "Boc".into());
    let (cleaned, removed) = c.clean(&d);
    assert_eq!(cleaned, d);
    assert!(removed.is_empty());
}

#[test]
fn clean_strips_far_single_letters() {
    let c = Converter::default();
    let d = doc(
        &[("C", 0.0, 0.0), ("C", 1.0, 0.0), ("I", 20.0, 20.0), ("I", 1.5, 0.5)],
        &[(1, 2, 1)],
    );
    let (cleaned, removed) = c.clean(&d);
    assert_eq!(cleaned.atoms.len(), 3);
    assert_eq!(removed.len(), 1);
    assert_eq!(c.clean(&cleaned).0, cleaned);
}

#[test]
fn methane_passes_through() {
    let (cx, report) = mol_to_cxsmiles(&doc(&[("C", 0.0, 0.0)], &[])).unwrap();
    assert_eq!(cx.as_str(), "C");
    assert!(report.removed_elements.is_empty() && report.warnings.is_empty());
    assert_eq!(
        (report.rgroups_derived, report.sg_extracted, report.m_reconstructed),
        (0, 0, 0)
    );
}

#[test]
fn empty_after_cleaning_is_an_error() {
    let mut d = doc(&[("C", 0.0, 0.0)], &[]);
    d.aliases.insert(AtomNumber(1), "(III)".into());
    assert!(matches!(mol_to_cxsmiles(&d), Err(ConvertError::NoStructure)));
}

#[test]
fn alias_and_sru_on_one_atom() {
    let mut d = doc(
        &[("C", 0.0, 0.0), ("*", 1.0, 0.0), ("C", 2.0, 0.0)],
        &[(1, 2, 1), (2, 3, 1)],
    );
    d.aliases.insert(AtomNumber(2), "R1".into());
    d.sgroups.push(sgroup(1, SgroupType::Sru, &[2], "n"));
    let (cx, report) = mol_to_cxsmiles(&d).unwrap();
    assert!(cx.as_str().contains('$') && cx.as_str().contains("Sg:"), "{cx}");
    let g = parse_cxsmiles(cx.as_str()).unwrap();
    assert_eq!(g.features().variable_groups().count(), 1);
    assert_eq!(g.features().sg_sections.len(), 1);
    assert_eq!((report.rgroups_derived, report.sg_extracted), (1, 1));
}

#[test]
fn attach_point_with_frequency_variation() {
    // -[CH2-CH2]n-C(=O)O with an attachment point on the first carbon
    let mut d = doc(
        &[("C", 0.0, 0.0), ("C", 1.0, 0.0), ("C", 2.0, 0.0), ("O", 3.0, 0.0), ("O", 2.0, 1.0)],
        &[(1, 2, 1), (2, 3, 1), (3, 4, 1), (3, 5, 2)],
    );
    d.attach_points.insert(AtomNumber(1), 1);
    let mut s = sgroup(1, SgroupType::Sru, &[1, 2], "n");
    s.connectivity = Some(SruConnectivity::HT);
    d.sgroups.push(s);
    let (cx, report) = mol_to_cxsmiles(&d).unwrap();
    let g = parse_cxsmiles(cx.as_str()).unwrap();
    let f = g.features();
    assert_eq!(f.attach_points.len(), 1);
    assert_eq!(f.sg_sections.len(), 1);
    assert_eq!(f.sg_sections[0].subscript, "n");
    assert_eq!((report.attach_points, report.attach_atoms_added), (1, 1));
}

#[test]
fn both_attachment_points() {
    let mut d = doc(&[("C", 0.0, 0.0), ("C", 1.0, 0.0)], &[(1, 2, 1)]);
    d.attach_points.insert(AtomNumber(1), 3);
    let (g, _) = Converter::default().build(&d).unwrap();
    let labels: Vec<&str> = g.features().labels.values().map(String::as_str).collect();
    assert_eq!(labels, vec!["_AP1", "_AP2"]);
    assert_eq!(g.features().attach_points.len(), 2);
}

#[test]
fn atom_conservation() {
    let mut d = benzene_with_interior_anchor();
    let n = d.atoms.len() as u32;
    d.atoms.push(MolAtom {
        x: 0.0,
        y: -6.0,
        z: 0.0,
        symbol: "C".into(),
        charge: 0,
        isotope: None,
    });
    d.aliases.insert(AtomNumber(n + 1), "(2)".into());
    d.aliases.insert(AtomNumber(n), "OMe".into());
    d.attach_points.insert(AtomNumber(1), 1);
    let (g, r) = Converter::default().build(&d).unwrap();
    assert_eq!(r.removed_elements.len(), 1);
    assert_eq!(r.expansion_atoms_added, 1);
    assert_eq!(
        r.output_atoms,
        r.input_atoms - r.removed_elements.len() - r.anchors_removed - r.superatom_atoms_collapsed
            + r.expansion_atoms_added
            + r.attach_atoms_added
    );
    assert_eq!(r.output_atoms, g.atom_count());
}

#[test]
fn deterministic_output() {
    let d = benzene_with_interior_anchor();
    let a = mol_to_cxsmiles(&d).unwrap();
    let b = mol_to_cxsmiles(&d).unwrap();
    assert_eq!(a, b);
}

#[test]
fn config_from_partial_json() {
    let cfg: ConvertConfig = serde_json::from_str(r#"{"strict": true}"#).unwrap();
    assert!(cfg.strict);
    assert_eq!(cfg.rgroup_pattern, DEFAULT_RGROUP_PATTERN);
    assert!(serde_json::from_str::<ConvertConfig>(r#"{"bogus": 1}"#).is_err());
    let bad = ConvertConfig {
        rgroup_pattern: "(".into(),
        ..Default::default()
    };
    assert!(matches!(Converter::new(bad), Err(ConfigError::Pattern(_))));
}
