use serde::{Deserialize, Serialize};

/// Axis-aligned box in pixels, serialized as `[x0, y0, x1, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct BBox {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl BBox {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        BBox { x0, y0, x1, y1 }
    }

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0).max(0.0) * (self.y1 - self.y0).max(0.0)
    }

    pub fn is_valid(&self) -> bool {
        self.x0 < self.x1 && self.y0 < self.y1
    }
}

impl From<[f64; 4]> for BBox {
    fn from(v: [f64; 4]) -> Self {
        BBox::new(v[0], v[1], v[2], v[3])
    }
}

impl From<BBox> for [f64; 4] {
    fn from(b: BBox) -> Self {
        [b.x0, b.y0, b.x1, b.y1]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OcrCell {
    pub text: String,
    pub bbox: BBox,
}

impl OcrCell {
    pub fn new(text: impl Into<String>, bbox: [f64; 4]) -> Self {
        OcrCell {
            text: text.into(),
            bbox: bbox.into(),
        }
    }
}

pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let w = (a.x1.min(b.x1) - a.x0.max(b.x0)).max(0.0);
    let h = (a.y1.min(b.y1) - a.y0.max(b.y0)).max(0.0);
    let inter = w * h;
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        return 0.0;
    }
    inter / union
}

/// Surrounding whitespace is ignored; case and inner spacing are kept.
pub fn normalize_text(s: &str) -> &str {
    s.trim()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OcrMatch {
    /// `(pred index, gt index)` pairs, sorted by pred index.
    pub pairs: Vec<(usize, usize)>,
    pub n_pred: usize,
    pub n_gt: usize,
}

/// Precision, recall and F1 in percent. An empty side gives 0 for the
/// ratio it would divide; F1 is 0 unless both P and R are positive.
pub fn prf(matches: usize, n_pred: usize, n_gt: usize) -> (f64, f64, f64) {
    if n_pred == 0 && n_gt == 0 {
        return (100.0, 100.0, 100.0);
    }
    let p = if n_pred == 0 {
        0.0
    } else {
        100.0 * matches as f64 / n_pred as f64
    };
    let r = if n_gt == 0 {
        0.0
    } else {
        100.0 * matches as f64 / n_gt as f64
    };
    (p, r, f1(p, r))
}

pub fn f1(p: f64, r: f64) -> f64 {
    if p > 0.0 && r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

impl OcrMatch {
    pub fn matches(&self) -> usize {
        self.pairs.len()
    }

    pub fn scores(&self) -> (f64, f64, f64) {
        prf(self.pairs.len(), self.n_pred, self.n_gt)
    }

    /// Every predicted and every ground-truth cell is matched.
    pub fn is_perfect(&self) -> bool {
        self.pairs.len() == self.n_pred && self.pairs.len() == self.n_gt
    }
}

/// One-to-one matching of cells with IoU above `threshold` and equal text.
/// Pairs are taken greedily by descending IoU, then augmenting paths grow
/// the matching to maximum size, so P/R equal the best achievable.
pub fn ocr_match(pred: &[OcrCell], gt: &[OcrCell], threshold: f64) -> OcrMatch {
    let mut edges: Vec<(f64, usize, usize)> = Vec::new();
    let mut adj = vec![Vec::new(); pred.len()];
    for (i, p) in pred.iter().enumerate() {
        for (j, g) in gt.iter().enumerate() {
            if normalize_text(&p.text) != normalize_text(&g.text) {
                continue;
            }
            let v = iou(&p.bbox, &g.bbox);
            if v > threshold {
                edges.push((v, i, j));
                adj[i].push(j);
            }
        }
    }
    edges.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut of_pred: Vec<Option<usize>> = vec![None; pred.len()];
    let mut of_gt: Vec<Option<usize>> = vec![None; gt.len()];
    for &(_, i, j) in &edges {
        if of_pred[i].is_none() && of_gt[j].is_none() {
            of_pred[i] = Some(j);
            of_gt[j] = Some(i);
        }
    }

    fn augment(
        i: usize,
        adj: &[Vec<usize>],
        seen: &mut [bool],
        of_pred: &mut [Option<usize>],
        of_gt: &mut [Option<usize>],
    ) -> bool {
        for &j in &adj[i] {
            if seen[j] {
                continue;
            }
            seen[j] = true;
            let free = match of_gt[j] {
                None => true,
                Some(k) => augment(k, adj, seen, of_pred, of_gt),
            };
            if free {
                of_pred[i] = Some(j);
                of_gt[j] = Some(i);
                return true;
            }
        }
        false
    }

    for i in 0..pred.len() {
        if of_pred[i].is_none() {
            let mut seen = vec![false; gt.len()];
            augment(i, &adj, &mut seen, &mut of_pred, &mut of_gt);
        }
    }
    OcrMatch {
        pairs: of_pred
            .iter()
            .enumerate()
            .filter_map(|(i, j)| j.map(|j| (i, j)))
            .collect(),
        n_pred: pred.len(),
        n_gt: gt.len(),
    }
}

/// Percentage of images whose cells match perfectly.
pub fn ocr_image_accuracy(samples: &[(Vec<OcrCell>, Vec<OcrCell>)], threshold: f64) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let correct = samples
        .iter()
        .filter(|(p, g)| ocr_match(p, g, threshold).is_perfect())
        .count();
    100.0 * correct as f64 / samples.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iou_examples() {
        let a = BBox::new(0.0, 0.0, 2.0, 2.0);
        assert_eq!(iou(&a, &a), 1.0);
        assert_eq!(iou(&a, &BBox::new(5.0, 5.0, 6.0, 6.0)), 0.0);
        // inter 1, union 4 + 4 - 1
        assert!((iou(&a, &BBox::new(1.0, 1.0, 3.0, 3.0)) - 1.0 / 7.0).abs() < 1e-12);
        // touching edges share no area
        assert_eq!(iou(&a, &BBox::new(2.0, 0.0, 4.0, 2.0)), 0.0);
    }

    #[test]
    fn self_match_and_empty_sides() {
        let cells = vec![
            OcrCell::new("R1", [0.0, 0.0, 10.0, 10.0]),
            OcrCell::new("OMe", [20.0, 0.0, 40.0, 10.0]),
        ];
        let m = ocr_match(&cells, &cells, 0.5);
        assert_eq!(m.scores(), (100.0, 100.0, 100.0));
        assert!(m.is_perfect());
        assert_eq!(ocr_match(&[], &cells, 0.5).scores(), (0.0, 0.0, 0.0));
    }

    #[test]
    fn one_wrong_text() {
        let gt = vec![
            OcrCell::new("R1", [0.0, 0.0, 10.0, 10.0]),
            OcrCell::new("R2", [20.0, 0.0, 30.0, 10.0]),
        ];
        let pred = vec![
            OcrCell::new("R1", [0.0, 0.0, 10.0, 10.0]),
            OcrCell::new("R3", [20.0, 0.0, 30.0, 10.0]),
        ];
        let (p, r, f) = ocr_match(&pred, &gt, 0.5).scores();
        assert_eq!((p, r, f), (50.0, 50.0, 50.0));
    }

    #[test]
    fn text_comparison_trims_but_keeps_case() {
        let gt = vec![OcrCell::new("Co", [0.0, 0.0, 1.0, 1.0])];
        assert_eq!(ocr_match(&[OcrCell::new(" Co ", [0.0, 0.0, 1.0, 1.0])], &gt, 0.5).matches(), 1);
        assert_eq!(ocr_match(&[OcrCell::new("CO", [0.0, 0.0, 1.0, 1.0])], &gt, 0.5).matches(), 0);
    }

    #[test]
    fn augmenting_beats_plain_greedy() {
        // greedy takes p0-g0 (IoU 1); the optimum pairs p0-g1 and p1-g0
        let gt = vec![
            OcrCell::new("A", [0.0, 0.0, 10.0, 10.0]),
            OcrCell::new("A", [2.0, 0.0, 12.0, 10.0]),
        ];
        let pred = vec![
            OcrCell::new("A", [0.0, 0.0, 10.0, 10.0]),
            OcrCell::new("A", [-3.0, 0.0, 7.0, 10.0]),
        ];
        let m = ocr_match(&pred, &gt, 0.5);
        assert_eq!(m.matches(), 2);
    }

    #[test]
    fn image_accuracy_with_spurious_cell() {
        let a = vec![OcrCell::new("X", [0.0, 0.0, 5.0, 5.0])];
        let mut b = a.clone();
        b.push(OcrCell::new("Y", [10.0, 10.0, 15.0, 15.0]));
        let samples = vec![(a.clone(), a.clone()), (b, a)];
        assert_eq!(ocr_image_accuracy(&samples, 0.5), 50.0);
    }

    #[test]
    fn bbox_serializes_as_array() {
        let c = OcrCell::new("R", [1.0, 2.0, 3.0, 4.0]);
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(s, r#"{"text":"R","bbox":[1.0,2.0,3.0,4.0]}"#);
        assert_eq!(serde_json::from_str::<OcrCell>(&s).unwrap(), c);
    }
}
