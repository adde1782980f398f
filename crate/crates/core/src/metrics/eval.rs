use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::ocr::{ocr_match, OcrCell};
use super::table::{table_score, SubstituentTable, TableGranularity};
use crate::canon::{equivalent_with, feature_equivalent, ExternalKeyTool, KeyFlags};
use crate::molgraph::MolGraph;
use crate::notation::{is_attach_point_label, parse_cxsmiles, MarkushFeatures};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Correct,
    /// Backbone matches, Markush features do not.
    BackboneOnly,
    Wrong,
    /// The prediction does not parse.
    Invalid,
}

/// The four feature classes scored separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureClass {
    Variable,
    AttachPoint,
    M,
    Sg,
}

impl FeatureClass {
    pub const ALL: [FeatureClass; 4] = [
        FeatureClass::Variable,
        FeatureClass::AttachPoint,
        FeatureClass::M,
        FeatureClass::Sg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureClass::Variable => "variable",
            FeatureClass::AttachPoint => "attach_point",
            FeatureClass::M => "m",
            FeatureClass::Sg => "sg",
        }
    }

    /// Whether `f` contains at least one feature of this class.
    pub fn present_in(self, f: &MarkushFeatures) -> bool {
        match self {
            FeatureClass::Variable => f.variable_groups().next().is_some(),
            FeatureClass::AttachPoint => {
                !f.attach_points.is_empty() || f.labels.values().any(|l| is_attach_point_label(l))
            }
            FeatureClass::M => !f.m_sections.is_empty(),
            FeatureClass::Sg => !f.sg_sections.is_empty(),
        }
    }

    /// `f` restricted to this class.
    pub fn project(self, f: &MarkushFeatures) -> MarkushFeatures {
        let mut out = MarkushFeatures::default();
        match self {
            FeatureClass::Variable => {
                out.labels = f.variable_groups().map(|(i, l)| (i, l.to_string())).collect();
            }
            FeatureClass::AttachPoint => {
                out.labels = f
                    .labels
                    .iter()
                    .filter(|(_, l)| is_attach_point_label(l))
                    .map(|(i, l)| (*i, l.clone()))
                    .collect();
                out.attach_points = f.attach_points.clone();
            }
            FeatureClass::M => out.m_sections = f.m_sections.clone(),
            FeatureClass::Sg => out.sg_sections = f.sg_sections.clone(),
        }
        out
    }
}

fn with_only(g: &MolGraph, class: FeatureClass) -> MolGraph {
    let (atoms, bonds, f) = g.clone().into_parts();
    MolGraph::new(atoms, bonds)
        .and_then(|m| m.with_features(class.project(&f)))
        .expect("a subset of valid features is valid")
}

/// Detailed comparison of one parsed prediction with its ground truth.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CxComparison {
    pub verdict: Verdict,
    /// Per class present in the ground truth: backbone matches and the
    /// class's features agree.
    pub features: BTreeMap<FeatureClass, bool>,
}

pub fn compare_graphs(
    pred: &MolGraph,
    gt: &MolGraph,
    flags: KeyFlags,
    tool: Option<&ExternalKeyTool>,
) -> CxComparison {
    let backbone = equivalent_with(tool, pred, gt, flags).equivalent;
    let mut features = BTreeMap::new();
    for class in FeatureClass::ALL {
        if class.present_in(gt.features()) {
            let ok = backbone
                && feature_equivalent(&with_only(pred, class), &with_only(gt, class), flags)
                    .equivalent;
            features.insert(class, ok);
        }
    }
    let verdict = if !backbone {
        Verdict::Wrong
    } else if feature_equivalent(pred, gt, flags).equivalent {
        Verdict::Correct
    } else {
        Verdict::BackboneOnly
    };
    CxComparison { verdict, features }
}

/// Verdict for a prediction string against a parsed ground truth.
pub fn cxsmiles_accuracy(pred: &str, gt: &MolGraph, flags: KeyFlags) -> Verdict {
    match parse_cxsmiles(pred) {
        Ok(p) => compare_graphs(&p, gt, flags, None).verdict,
        Err(_) => Verdict::Invalid,
    }
}

/// One line of a prediction or ground-truth JSONL file. The `pred_` and
/// `gt_` prefixed field names are accepted as aliases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub id: String,
    #[serde(alias = "pred_cxsmiles", alias = "gt_cxsmiles")]
    pub cxsmiles: String,
    #[serde(default, alias = "pred_table", alias = "gt_table", skip_serializing_if = "Option::is_none")]
    pub table: Option<SubstituentTable>,
    #[serde(default, alias = "pred_ocr", alias = "gt_ocr", skip_serializing_if = "Option::is_none")]
    pub ocr: Option<Vec<OcrCell>>,
}

/// A ground truth with its prediction, if any.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSample {
    pub id: String,
    pub pred_cxsmiles: Option<String>,
    pub gt_cxsmiles: String,
    #[serde(default)]
    pub pred_table: Option<SubstituentTable>,
    #[serde(default)]
    pub gt_table: Option<SubstituentTable>,
    #[serde(default)]
    pub pred_ocr: Option<Vec<OcrCell>>,
    #[serde(default)]
    pub gt_ocr: Option<Vec<OcrCell>>,
}

/// Pair predictions with ground truths by id, in ground-truth order.
/// Returns the samples and the ids of predictions without a ground truth.
pub fn pair_records(pred: &[Record], gt: &[Record]) -> (Vec<EvalSample>, Vec<String>) {
    let mut by_id: BTreeMap<&str, &Record> = BTreeMap::new();
    for p in pred {
        by_id.entry(p.id.as_str()).or_insert(p);
    }
    let gt_ids: BTreeSet<&str> = gt.iter().map(|g| g.id.as_str()).collect();
    let samples = gt
        .iter()
        .map(|g| {
            let p = by_id.get(g.id.as_str());
            EvalSample {
                id: g.id.clone(),
                pred_cxsmiles: p.map(|p| p.cxsmiles.clone()),
                gt_cxsmiles: g.cxsmiles.clone(),
                pred_table: p.and_then(|p| p.table.clone()),
                gt_table: g.table.clone(),
                pred_ocr: p.and_then(|p| p.ocr.clone()),
                gt_ocr: g.ocr.clone(),
            }
        })
        .collect();
    let orphans = pred
        .iter()
        .filter(|p| !gt_ids.contains(p.id.as_str()))
        .map(|p| p.id.clone())
        .collect();
    (samples, orphans)
}

#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub flags: KeyFlags,
    pub iou_threshold: f64,
    pub table_granularity: TableGranularity,
    pub key_tool: Option<ExternalKeyTool>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            flags: KeyFlags::default(),
            iou_threshold: 0.5,
            table_granularity: TableGranularity::Cell,
            key_tool: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleResult {
    pub id: String,
    /// `None` when the ground truth does not parse and the sample is excluded.
    pub verdict: Option<Verdict>,
    pub features: BTreeMap<FeatureClass, bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table_correct: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table_f1: Option<f64>,
    pub markush_correct: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ocr: Option<OcrSampleResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OcrSampleResult {
    pub matches: usize,
    pub n_pred: usize,
    pub n_gt: usize,
    pub image_correct: bool,
}

/// Scores for one sample. Pure, so samples can be scored in parallel and
/// folded with [`aggregate`].
pub fn score_sample(s: &EvalSample, opts: &EvalOptions) -> SampleResult {
    let mut out = SampleResult {
        id: s.id.clone(),
        verdict: None,
        features: BTreeMap::new(),
        table_correct: None,
        table_f1: None,
        markush_correct: false,
        ocr: None,
        note: None,
    };
    let gt = match parse_cxsmiles(&s.gt_cxsmiles) {
        Ok(g) => g,
        Err(e) => {
            out.note = Some(format!("ground truth does not parse: {e}"));
            return out;
        }
    };
    let cmp = match &s.pred_cxsmiles {
        None => {
            out.note = Some("no prediction".into());
            CxComparison {
                verdict: Verdict::Wrong,
                features: FeatureClass::ALL
                    .into_iter()
                    .filter(|c| c.present_in(gt.features()))
                    .map(|c| (c, false))
                    .collect(),
            }
        }
        Some(p) => match parse_cxsmiles(p) {
            Ok(pg) => compare_graphs(&pg, &gt, opts.flags, opts.key_tool.as_ref()),
            Err(e) => {
                out.note = Some(format!("prediction does not parse: {e}"));
                CxComparison {
                    verdict: Verdict::Invalid,
                    features: FeatureClass::ALL
                        .into_iter()
                        .filter(|c| c.present_in(gt.features()))
                        .map(|c| (c, false))
                        .collect(),
                }
            }
        },
    };
    out.verdict = Some(cmp.verdict);
    out.features = cmp.features;
    let mut table_ok = true;
    if s.pred_table.is_some() || s.gt_table.is_some() {
        let empty = SubstituentTable::default();
        let score = table_score(
            s.pred_table.as_ref().unwrap_or(&empty),
            s.gt_table.as_ref().unwrap_or(&empty),
            opts.table_granularity,
        );
        table_ok = score.accuracy == 100.0;
        out.table_correct = Some(table_ok);
        out.table_f1 = Some(score.f1);
    }
    out.markush_correct = cmp.verdict == Verdict::Correct && table_ok;
    if let Some(gt_cells) = &s.gt_ocr {
        let pred_cells = s.pred_ocr.clone().unwrap_or_default();
        let m = ocr_match(&pred_cells, gt_cells, opts.iou_threshold);
        out.ocr = Some(OcrSampleResult {
            matches: m.matches(),
            n_pred: m.n_pred,
            n_gt: m.n_gt,
            image_correct: m.is_perfect(),
        });
    }
    out
}

/// Aggregate metrics in percent. Table and OCR figures are `None` when no
/// sample carries that kind of data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub samples: usize,
    pub scored: usize,
    pub excluded: Vec<String>,
    pub unmatched_predictions: Vec<String>,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "A_inchikey")]
    pub a_inchikey: f64,
    pub invalid_rate: f64,
    #[serde(rename = "table_A")]
    pub table_a: Option<f64>,
    #[serde(rename = "table_F1")]
    pub table_f1: Option<f64>,
    #[serde(rename = "markush_A")]
    pub markush_a: f64,
    #[serde(rename = "ocr_P")]
    pub ocr_p: Option<f64>,
    #[serde(rename = "ocr_R")]
    pub ocr_r: Option<f64>,
    #[serde(rename = "ocr_F1")]
    pub ocr_f1: Option<f64>,
    #[serde(rename = "ocr_image_A")]
    pub ocr_image_a: Option<f64>,
    pub per_feature: BTreeMap<String, f64>,
    pub flags: KeyFlags,
    pub iou_threshold: f64,
}

fn pct(n: usize, d: usize) -> f64 {
    if d == 0 {
        0.0
    } else {
        100.0 * n as f64 / d as f64
    }
}

pub fn aggregate(results: &[SampleResult], opts: &EvalOptions, unmatched: Vec<String>) -> EvalReport {
    let scored: Vec<&SampleResult> = results.iter().filter(|r| r.verdict.is_some()).collect();
    let n = scored.len();
    let count = |f: &dyn Fn(&SampleResult) -> bool| scored.iter().filter(|r| f(r)).count();
    let a = pct(count(&|r| r.verdict == Some(Verdict::Correct)), n);
    let a_inchikey = pct(
        count(&|r| matches!(r.verdict, Some(Verdict::Correct | Verdict::BackboneOnly))),
        n,
    );
    let invalid_rate = pct(count(&|r| r.verdict == Some(Verdict::Invalid)), n);
    let with_table = count(&|r| r.table_correct.is_some());
    let (table_a, table_f1) = if with_table == 0 {
        (None, None)
    } else {
        // samples without any table count as matching empty tables
        let ok = count(&|r| r.table_correct != Some(false));
        let f1_sum: f64 = scored.iter().filter_map(|r| r.table_f1).sum();
        (Some(pct(ok, n)), Some(f1_sum / with_table as f64))
    };
    let markush_a = pct(count(&|r| r.markush_correct), n);

    let ocr: Vec<&OcrSampleResult> = scored.iter().filter_map(|r| r.ocr.as_ref()).collect();
    let (ocr_p, ocr_r, ocr_f1, ocr_image_a) = if ocr.is_empty() {
        (None, None, None, None)
    } else {
        let m: usize = ocr.iter().map(|o| o.matches).sum();
        let np: usize = ocr.iter().map(|o| o.n_pred).sum();
        let ng: usize = ocr.iter().map(|o| o.n_gt).sum();
        let (p, r, f) = super::ocr::prf(m, np, ng);
        let img = pct(ocr.iter().filter(|o| o.image_correct).count(), ocr.len());
        (Some(p), Some(r), Some(f), Some(img))
    };

    let mut per_feature = BTreeMap::new();
    for class in FeatureClass::ALL {
        let relevant: Vec<bool> = scored.iter().filter_map(|r| r.features.get(&class).copied()).collect();
        if !relevant.is_empty() {
            let ok = relevant.iter().filter(|&&b| b).count();
            per_feature.insert(class.name().to_string(), pct(ok, relevant.len()));
        }
    }
    EvalReport {
        samples: results.len(),
        scored: n,
        excluded: results
            .iter()
            .filter(|r| r.verdict.is_none())
            .map(|r| r.id.clone())
            .collect(),
        unmatched_predictions: unmatched,
        a,
        a_inchikey,
        invalid_rate,
        table_a,
        table_f1,
        markush_a,
        ocr_p,
        ocr_r,
        ocr_f1,
        ocr_image_a,
        per_feature,
        flags: opts.flags,
        iou_threshold: opts.iou_threshold,
    }
}

/// Score every sample in order and aggregate.
pub fn evaluate(samples: &[EvalSample], opts: &EvalOptions) -> (EvalReport, Vec<SampleResult>) {
    let results: Vec<SampleResult> = samples.iter().map(|s| score_sample(s, opts)).collect();
    (aggregate(&results, opts, Vec::new()), results)
}

impl EvalReport {
    /// Aligned text table: the CXSMILES and table block, the OCR block,
    /// then the per-feature breakdown.
    pub fn to_text(&self) -> String {
        let fmt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.1}"));
        let mut s = String::new();
        let _ = writeln!(
            s,
            "samples {} (scored {}, excluded {})",
            self.samples,
            self.scored,
            self.excluded.len()
        );
        let _ = writeln!(
            s,
            "stereo {}  iou>{}",
            if self.flags.ignore_stereo { "ignored" } else { "compared" },
            self.iou_threshold
        );
        s.push('\n');
        let head = ["A", "A_InChIKey", "invalid", "Table A", "Table F1", "Markush A"];
        let vals = [
            fmt(Some(self.a)),
            fmt(Some(self.a_inchikey)),
            fmt(Some(self.invalid_rate)),
            fmt(self.table_a),
            fmt(self.table_f1),
            fmt(Some(self.markush_a)),
        ];
        row(&mut s, &head, &vals);
        s.push('\n');
        let head = ["OCR P", "OCR R", "OCR F1", "Image A"];
        let vals = [
            fmt(self.ocr_p),
            fmt(self.ocr_r),
            fmt(self.ocr_f1),
            fmt(self.ocr_image_a),
        ];
        row(&mut s, &head, &vals);
        if !self.per_feature.is_empty() {
            s.push('\n');
            let head: Vec<&str> = self.per_feature.keys().map(String::as_str).collect();
            let vals: Vec<String> = self.per_feature.values().map(|v| format!("{v:.1}")).collect();
            row(&mut s, &head, &vals);
        }
        s
    }
}

fn row(s: &mut String, head: &[&str], vals: &[String]) {
    let widths: Vec<usize> = head
        .iter()
        .zip(vals)
        .map(|(h, v)| h.len().max(v.len()))
        .collect();
    let line = |cells: Vec<&str>| -> String {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect::<Vec<_>>()
            .join("  ")
    };
    let _ = writeln!(s, "{}", line(head.to_vec()));
    let _ = writeln!(s, "{}", line(vals.iter().map(String::as_str).collect()));
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gt(s: &str) -> MolGraph {
        parse_cxsmiles(s).unwrap()
    }

    #[test]
    fn verdict_examples() {
        let f = KeyFlags::default();
        let x = "*c1ccccc1 |$R1;;;;;;$|";
        assert_eq!(cxsmiles_accuracy(x, &gt(x), f), Verdict::Correct);
        assert_eq!(
            cxsmiles_accuracy("*c1ccccc1 |$R2;;;;;;$|", &gt(x), f),
            Verdict::BackboneOnly
        );
        assert_eq!(cxsmiles_accuracy("not-a-smiles", &gt(x), f), Verdict::Invalid);
        assert_eq!(cxsmiles_accuracy("*C1CCCCC1 |$R1;;;;;;$|", &gt(x), f), Verdict::Wrong);
    }

    #[test]
    fn verdict_ignores_atom_order() {
        let f = KeyFlags::default();
        let x = "*c1ccc(C)cc1 |$R1;;;;;;;$|";
        assert_eq!(cxsmiles_accuracy("Cc1ccc(*)cc1 |$;;;;;R1;;$|", &gt(x), f), Verdict::Correct);
    }

    #[test]
    fn per_feature_breakdown() {
        let g = gt("*CC(*)C |$R1;;;_AP1;$|");
        let p = gt("*CC(*)C |$R2;;;_AP1;$|");
        let c = compare_graphs(&p, &g, KeyFlags::default(), None);
        assert_eq!(c.verdict, Verdict::BackboneOnly);
        assert_eq!(c.features[&FeatureClass::Variable], false);
        assert_eq!(c.features[&FeatureClass::AttachPoint], true);
        assert!(!c.features.contains_key(&FeatureClass::M));
    }

    #[test]
    fn reflexive_report() {
        let table = SubstituentTable::from([("R1", &["C", "CC"][..])]);
        let cells = vec![OcrCell::new("R1", [0.0, 0.0, 5.0, 5.0])];
        let samples: Vec<EvalSample> = ["*c1ccccc1 |$R1;;;;;;$|", "CCO", "*CC* |Sg:n:1,2::ht|"]
            .iter()
            .enumerate()
            .map(|(i, s)| EvalSample {
                id: i.to_string(),
                pred_cxsmiles: Some(s.to_string()),
                gt_cxsmiles: s.to_string(),
                pred_table: Some(table.clone()),
                gt_table: Some(table.clone()),
                pred_ocr: Some(cells.clone()),
                gt_ocr: Some(cells.clone()),
            })
            .collect();
        let (r, _) = evaluate(&samples, &EvalOptions::default());
        assert_eq!((r.a, r.a_inchikey, r.markush_a), (100.0, 100.0, 100.0));
        assert_eq!((r.table_a, r.table_f1), (Some(100.0), Some(100.0)));
        assert_eq!(
            (r.ocr_p, r.ocr_r, r.ocr_f1, r.ocr_image_a),
            (Some(100.0), Some(100.0), Some(100.0), Some(100.0))
        );
    }

    #[test]
    fn missing_predictions_and_bad_ground_truth() {
        let pred = vec![Record {
            id: "a".into(),
            cxsmiles: "CC".into(),
            table: None,
            ocr: None,
        }, Record {
            id: "z".into(),
            cxsmiles: "CC".into(),
            table: None,
            ocr: None,
        }];
        let gt_recs = vec![
            Record { id: "a".into(), cxsmiles: "CC".into(), table: None, ocr: None },
            Record { id: "b".into(), cxsmiles: "CC".into(), table: None, ocr: None },
            Record { id: "c".into(), cxsmiles: "C(".into(), table: None, ocr: None },
        ];
        let (samples, orphans) = pair_records(&pred, &gt_recs);
        assert_eq!(orphans, vec!["z".to_string()]);
        let (r, per) = evaluate(&samples, &EvalOptions::default());
        assert_eq!(r.excluded, vec!["c".to_string()]);
        assert_eq!(r.scored, 2);
        assert_eq!(r.a, 50.0);
        assert_eq!(per[1].verdict, Some(Verdict::Wrong));
    }

    #[test]
    fn record_aliases() {
        let r: Record = serde_json::from_str(
            r#"{"id":"1","gt_cxsmiles":"CC","gt_table":{"R1":["C"]},"gt_ocr":[{"text":"R1","bbox":[0,0,1,1]}]}"#,
        )
        .unwrap();
        assert_eq!(r.cxsmiles, "CC");
        assert_eq!(r.table.unwrap().rows["R1"], vec!["C".to_string()]);
        assert_eq!(r.ocr.unwrap().len(), 1);
    }

    #[test]
    fn joint_accuracy_is_bounded() {
        let t1 = SubstituentTable::from([("R1", &["C"][..])]);
        let t2 = SubstituentTable::from([("R1", &["N"][..])]);
        let mk = |id: &str, p: &str, g: &str, pt: &SubstituentTable| EvalSample {
            id: id.into(),
            pred_cxsmiles: Some(p.into()),
            gt_cxsmiles: g.into(),
            pred_table: Some(pt.clone()),
            gt_table: Some(t1.clone()),
            pred_ocr: None,
            gt_ocr: None,
        };
        let samples = vec![
            mk("1", "CC", "CC", &t2),
            mk("2", "CN", "CC", &t1),
            mk("3", "CC", "CC", &t1),
        ];
        let (r, _) = evaluate(&samples, &EvalOptions::default());
        assert!(r.markush_a <= r.a.min(r.table_a.unwrap()));
        assert!((r.markush_a - 100.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn text_report_has_all_blocks() {
        let s = EvalSample {
            id: "1".into(),
            pred_cxsmiles: Some("CC".into()),
            gt_cxsmiles: "CC".into(),
            pred_table: None,
            gt_table: None,
            pred_ocr: None,
            gt_ocr: None,
        };
        let (r, _) = evaluate(&[s], &EvalOptions::default());
        let t = r.to_text();
        assert!(t.contains("A_InChIKey") && t.contains("OCR F1") && t.contains("100.0"));
    }
}
