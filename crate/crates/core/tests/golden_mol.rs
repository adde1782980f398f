mod common;

use markushkit::canon::{feature_equivalent, KeyFlags};
use markushkit::convert::Converter;
use markushkit::molfile::parse_molfile;
use markushkit::{parse_cxsmiles, write_cxsmiles};

#[test]
fn fixtures_match_expected_features() {
    let conv = Converter::default();
    let fixtures = common::golden_mol_fixtures();
    assert_eq!(fixtures.len(), 6);
    for (name, expected) in fixtures {
        let path = common::data_dir().join("mol").join(format!("{name}.mol"));
        let text = std::fs::read_to_string(&path).unwrap();
        let (cx, report) = conv.convert_text(&text).unwrap();
        let got = parse_cxsmiles(cx.as_str()).unwrap_or_else(|e| panic!("{name}: {cx:?} does not re-parse: {e}"));
        let want = parse_cxsmiles(&expected).unwrap();
        assert!(
            feature_equivalent(&got, &want, KeyFlags::default()).equivalent,
            "{name}: got {}, expected {expected}",
            cx.as_str()
        );
        assert_eq!(
            report.rgroups_derived,
            want.features().variable_groups().count(),
            "{name}"
        );
        assert_eq!(report.attach_points, want.features().attach_points.len(), "{name}");
        assert_eq!(report.m_reconstructed, want.features().m_sections.len(), "{name}");
        assert_eq!(report.sg_extracted, want.features().sg_sections.len(), "{name}");
    }
}

#[test]
fn output_is_a_fixed_point_of_parse_and_write() {
    let conv = Converter::default();
    for (name, _) in common::golden_mol_fixtures() {
        let text = std::fs::read_to_string(common::data_dir().join("mol").join(format!("{name}.mol"))).unwrap();
        let (cx, _) = conv.convert_text(&text).unwrap();
        let again = write_cxsmiles(&parse_cxsmiles(cx.as_str()).unwrap());
        assert_eq!(again, cx, "{name}");
    }
}

#[test]
fn caption_removal_is_reported() {
    let text = std::fs::read_to_string(common::data_dir().join("mol").join("cleanup_caption.mol")).unwrap();
    let (cx, report) = Converter::default().convert_text(&text).unwrap();
    assert_eq!(cx.as_str(), "C(C)O");
    assert_eq!(report.removed_elements.len(), 1);
    assert!(report.removed_elements[0].contains("(I)"));
}

#[test]
fn fixtures_parse_as_plain_molfiles() {
    for (name, _) in common::golden_mol_fixtures() {
        let text = std::fs::read_to_string(common::data_dir().join("mol").join(format!("{name}.mol"))).unwrap();
        let doc = parse_molfile(&text).unwrap();
        assert!(doc.warnings.is_empty(), "{name}: {:?}", doc.warnings);
    }
}
