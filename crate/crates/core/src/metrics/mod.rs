//! Evaluation metrics for Markush structure recognition: CXSMILES verdicts,
//! substituent-table scores, OCR cell matching and dataset statistics.

mod eval;
mod ocr;
mod stats;
mod table;

pub use eval::{
    aggregate, compare_graphs, cxsmiles_accuracy, evaluate, pair_records, score_sample,
    CxComparison, EvalOptions, EvalReport, EvalSample, FeatureClass, OcrSampleResult, Record,
    SampleResult, Verdict,
};
pub use ocr::{
    f1, iou, normalize_text, ocr_image_accuracy, ocr_match, prf, BBox, OcrCell, OcrMatch,
};
pub use stats::{dataset_stats, StatsRecord, StatsTable};
pub use table::{
    normalize_substituent, table_score, SubstituentTable, TableGranularity, TableScore,
};
