//! Arbitrary input must give a value or a structured error, never a panic.

use markushkit::convert::Converter;
use markushkit::molfile::{parse_molfile, parse_molfile_with, ParseOptions};
use markushkit::{parse_cxsmiles, parse_smiles, write_cxsmiles};
use proptest::prelude::*;

const SMILES_ALPHABET: &str = "CNOSPFIBrcl[]()=#@+-/\\%0123456789.*H$|;:,m Sg_AP";

fn smiles_like() -> impl Strategy<Value = String> {
    let chars: Vec<char> = SMILES_ALPHABET.chars().collect();
    prop::collection::vec(prop::sample::select(chars), 0..40).prop_map(|v| v.into_iter().collect())
}

fn mol_like() -> impl Strategy<Value = String> {
    let lines = prop::collection::vec(
        prop_oneof![
            Just("  2  1  0  0  0  0  0  0  0  0999 V2000".to_string()),
            Just("    0.0000    0.0000    0.0000 C   0  0  0  0  0  0  0  0  0  0  0  0".to_string()),
            Just("    1.0000    0.0000    0.0000 R#  0  0  0  0  0  0  0  0  0  0  0  0".to_string()),
            Just("  1  2  1  0".to_string()),
            Just("M  RGP  1   2   1".to_string()),
            Just("M  STY  1   1 SRU".to_string()),
            Just("M  SAL   1  2   1   2".to_string()),
            Just("M  SMT   1 n".to_string()),
            Just("A    1".to_string()),
            Just("M  END".to_string()),
            "[ -~]{0,50}",
        ],
        0..14,
    );
    lines.prop_map(|l| format!("x\n  fuzz\n\n{}", l.join("\n")))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(3000))]

    #[test]
    fn smiles_and_cxsmiles_never_panic(s in smiles_like()) {
        let _ = parse_smiles(&s);
        if let Ok(g) = parse_cxsmiles(&s) {
            let w = write_cxsmiles(&g);
            prop_assert!(parse_cxsmiles(w.as_str()).is_ok(), "{s} -> {w:?}");
        }
    }

    #[test]
    fn molfiles_never_panic(s in mol_like()) {
        let _ = parse_molfile_with(&s, ParseOptions { strict: true });
        if let Ok(doc) = parse_molfile(&s) {
            if let Ok((cx, _)) = Converter::default().mol_to_cxsmiles(&doc) {
                prop_assert!(parse_cxsmiles(cx.as_str()).is_ok(), "{cx:?}");
            }
        }
    }
}
