mod common;

use markushkit::metrics::{iou, ocr_image_accuracy, ocr_match, BBox, OcrCell};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_cells<R: Rng>(rng: &mut R, n: usize) -> Vec<OcrCell> {
    let texts = ["R1", "R2", "X", "n", "OMe"];
    (0..n)
        .map(|_| {
            let x = rng.gen_range(0..6) as f64;
            let y = rng.gen_range(0..6) as f64;
            let w = rng.gen_range(1..4) as f64;
            let h = rng.gen_range(1..4) as f64;
            OcrCell::new(texts[rng.gen_range(0..texts.len())], [x, y, x + w, y + h])
        })
        .collect()
}

/// Fixture sets of up to six cells on each side, on a coarse grid so that
/// ties and crossing overlaps are common.
fn fixture_sets(seed: u64, count: usize) -> Vec<(Vec<OcrCell>, Vec<OcrCell>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let np = rng.gen_range(0..=6);
            let ng = rng.gen_range(0..=6);
            (random_cells(&mut rng, np), random_cells(&mut rng, ng))
        })
        .collect()
}

#[test]
fn unit_iou_arithmetic() {
    // overlap 1x1, union 4 + 4 - 1
    let v = iou(&BBox::new(0.0, 0.0, 2.0, 2.0), &BBox::new(1.0, 1.0, 3.0, 3.0));
    assert!((v - 1.0 / 7.0).abs() < 1e-12);
}

#[test]
fn greedy_matching_equals_exhaustive_optimum() {
    for t in [0.0, 0.1, 0.3, 0.5] {
        for (pred, gt) in fixture_sets(11, 3000) {
            let m = ocr_match(&pred, &gt, t);
            let best = common::exhaustive_matches(&pred, &gt, t);
            assert_eq!(m.matches(), best, "t={t} pred={pred:?} gt={gt:?}");
            let (p, r, f) = m.scores();
            let (op, or, of) = common::oracle_prf(best, pred.len(), gt.len());
            assert!((p - op).abs() < 1e-12 && (r - or).abs() < 1e-12 && (f - of).abs() < 1e-12);
        }
    }
}

#[test]
fn image_accuracy_is_monotone_in_the_threshold() {
    for seed in 0..20 {
        // near-miss predictions: shifted copies of the ground truth
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples: Vec<(Vec<OcrCell>, Vec<OcrCell>)> = (0..50)
            .map(|_| {
                let n = rng.gen_range(1..=6);
                let gt = random_cells(&mut rng, n);
                let pred = gt
                    .iter()
                    .map(|c| {
                        let dx = rng.gen_range(0.0..1.5);
                        OcrCell {
                            text: c.text.clone(),
                            bbox: BBox::new(c.bbox.x0 + dx, c.bbox.y0, c.bbox.x1 + dx, c.bbox.y1),
                        }
                    })
                    .collect();
                (pred, gt)
            })
            .collect();
        let a0 = ocr_image_accuracy(&samples, 0.0);
        let a3 = ocr_image_accuracy(&samples, 0.3);
        let a5 = ocr_image_accuracy(&samples, 0.5);
        assert!(a0 >= a3 && a3 >= a5, "{a0} {a3} {a5}");
    }
}
