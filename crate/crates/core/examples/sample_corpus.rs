//! Writes the synthetic sample corpora used by the test suite:
//! `sample_corpus stats <n>` prints stats records, `sample_corpus eval <n>`
//! prints ground-truth evaluation records with tables and OCR cells.

use std::collections::BTreeMap;

use markushkit::augment::{augment, AugmentConfig};
use markushkit::metrics::{OcrCell, Record, StatsRecord, SubstituentTable};
use markushkit::parse_cxsmiles;
use markushkit::synth::{random_smiles, SynthConfig};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SUBSTITUENTS: [&str; 10] = ["C", "CC", "Cl", "F", "OC", "N", "c1ccccc1", "C(F)(F)F", "CC(C)C", "O"];

fn corpus(n: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let synth = SynthConfig::default();
    let mut out = Vec::new();
    let mut k = 0u64;
    while out.len() < n {
        let s = random_smiles(&mut rng, &synth);
        if let Ok(a) = augment(&s, &AugmentConfig::default().with_seed(seed ^ k)) {
            out.push(a.cxsmiles.text);
        }
        k += 1;
    }
    out
}

fn ocr_cells<R: Rng>(rng: &mut R, labels: &[String]) -> Vec<OcrCell> {
    let mut texts: Vec<String> = labels.to_vec();
    for _ in 0..rng.gen_range(0..4) {
        texts.push(["O", "N", "S", "n", "Cl"].choose(rng).unwrap().to_string());
    }
    texts
        .into_iter()
        .enumerate()
        .map(|(i, t)| {
            let x = 40.0 * i as f64 + rng.gen_range(0.0..10.0);
            let y = rng.gen_range(0.0..200.0);
            OcrCell::new(t, [x, y, x + 24.0, y + 16.0])
        })
        .collect()
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let mode = args.get(1).map(String::as_str).unwrap_or("stats");
    let n: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(200);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    match mode {
        "stats" => {
            for cx in corpus(n, 2025) {
                let g = parse_cxsmiles(&cx).unwrap();
                let labels = g.features().labels.len();
                let rec = StatsRecord {
                    cxsmiles: cx,
                    ocr_cells: Some(labels + rng.gen_range(0..6)),
                };
                println!("{}", serde_json::to_string(&rec).unwrap());
            }
        }
        "eval" => {
            for (i, cx) in corpus(n, 99).into_iter().enumerate() {
                let g = parse_cxsmiles(&cx).unwrap();
                let labels: Vec<String> = g
                    .features()
                    .variable_groups()
                    .map(|(_, l)| l.to_string())
                    .collect();
                let mut rows = BTreeMap::new();
                for l in &labels {
                    let k = rng.gen_range(1..=3);
                    let subs: Vec<String> = SUBSTITUENTS
                        .choose_multiple(&mut rng, k)
                        .map(|s| s.to_string())
                        .collect();
                    rows.insert(l.clone(), subs);
                }
                let rec = Record {
                    id: format!("s{i:03}"),
                    cxsmiles: cx,
                    table: Some(SubstituentTable { rows }),
                    ocr: Some(ocr_cells(&mut rng, &labels)),
                };
                println!("{}", serde_json::to_string(&rec).unwrap());
            }
        }
        other => {
            eprintln!("unknown mode {other}");
            std::process::exit(1);
        }
    }
}
