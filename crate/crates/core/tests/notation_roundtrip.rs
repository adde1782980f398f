use markushkit::augment::{augment, AugmentConfig};
use markushkit::canon::{feature_equivalent, KeyFlags};
use markushkit::synth::{random_smiles, SynthConfig};
use markushkit::{parse_cxsmiles, parse_smiles, write_cxsmiles};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn augmented_corpus_survives_parse_and_write() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let synth = SynthConfig::default();
    for k in 0..2000u64 {
        let s = random_smiles(&mut rng, &synth);
        let a = augment(&s, &AugmentConfig::default().with_seed(42 ^ k)).unwrap();
        let g = parse_cxsmiles(a.cxsmiles.as_str()).unwrap();
        let back = parse_cxsmiles(write_cxsmiles(&g).as_str()).unwrap();
        assert!(
            feature_equivalent(&g, &back, KeyFlags::with_stereo()).equivalent,
            "{}",
            a.cxsmiles.as_str()
        );
        assert!(a.applied.len() <= 4);
    }
}

#[test]
fn augmentation_ignores_input_atom_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let synth = SynthConfig::default();
    for k in 0..200u64 {
        let g = markushkit::synth::random_molecule(&mut rng, &synth);
        let s1 = markushkit::write_smiles(&g, false);
        let s2 = markushkit::write_smiles(&markushkit::synth::shuffled(&g, &mut rng), false);
        let cfg = AugmentConfig::default().with_seed(k);
        assert_eq!(augment(&s1, &cfg).unwrap(), augment(&s2, &cfg).unwrap(), "{s1} / {s2}");
    }
}

#[test]
fn writer_output_is_stable() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let synth = SynthConfig::default();
    for _ in 0..300 {
        let s = random_smiles(&mut rng, &synth);
        let g = parse_smiles(&s).unwrap();
        let once = write_cxsmiles(&g);
        let twice = write_cxsmiles(&parse_cxsmiles(once.as_str()).unwrap());
        assert_eq!(once, twice, "{s}");
    }
}
