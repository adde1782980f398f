use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::eval::FeatureClass;
use crate::notation::parse_cxsmiles;

/// Input to [`dataset_stats`]: a CXSMILES and, when known, its OCR cell count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsRecord {
    #[serde(alias = "gt_cxsmiles")]
    pub cxsmiles: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ocr_cells: Option<usize>,
}

impl StatsRecord {
    pub fn new(cxsmiles: impl Into<String>) -> Self {
        StatsRecord {
            cxsmiles: cxsmiles.into(),
            ocr_cells: None,
        }
    }
}

/// Feature percentages over the parsed records, mean heavy-atom count and
/// mean OCR cell count (over records that report one).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsTable {
    pub samples: usize,
    pub parsed: usize,
    pub unparseable: usize,
    pub variable_group: f64,
    pub attach_point: f64,
    pub m_section: f64,
    pub sg_section: f64,
    pub mean_atoms: f64,
    pub mean_ocr_cells: Option<f64>,
}

pub fn dataset_stats(records: &[StatsRecord]) -> StatsTable {
    let mut parsed = 0usize;
    let mut with = [0usize; 4];
    let mut atoms = 0usize;
    let (mut ocr_sum, mut ocr_n) = (0usize, 0usize);
    for r in records {
        let Ok(g) = parse_cxsmiles(&r.cxsmiles) else {
            continue;
        };
        parsed += 1;
        for (k, class) in FeatureClass::ALL.iter().enumerate() {
            if class.present_in(g.features()) {
                with[k] += 1;
            }
        }
        atoms += g.heavy_atom_count();
        if let Some(c) = r.ocr_cells {
            ocr_sum += c;
            ocr_n += 1;
        }
    }
    let pct = |n: usize| {
        if parsed == 0 {
            0.0
        } else {
            100.0 * n as f64 / parsed as f64
        }
    };
    StatsTable {
        samples: records.len(),
        parsed,
        unparseable: records.len() - parsed,
        variable_group: pct(with[0]),
        attach_point: pct(with[1]),
        m_section: pct(with[2]),
        sg_section: pct(with[3]),
        mean_atoms: if parsed == 0 {
            0.0
        } else {
            atoms as f64 / parsed as f64
        },
        mean_ocr_cells: (ocr_n > 0).then(|| ocr_sum as f64 / ocr_n as f64),
    }
}

impl StatsTable {
    /// Two-column table: feature rows in percent, then the means, all
    /// rounded to whole numbers.
    pub fn to_text(&self, title: &str) -> String {
        let rows: [(&str, String); 6] = [
            ("Variable group", format!("{:.0}", self.variable_group)),
            ("Attach point", format!("{:.0}", self.attach_point)),
            ("m-section", format!("{:.0}", self.m_section)),
            ("Sg-section", format!("{:.0}", self.sg_section)),
            ("Mean num. atoms", format!("{:.0}", self.mean_atoms)),
            (
                "Mean num. OCR cells",
                self.mean_ocr_cells.map_or("-".into(), |v| format!("{v:.0}")),
            ),
        ];
        let width = rows.iter().map(|(l, _)| l.len()).max().unwrap_or(0);
        let mut s = String::new();
        let _ = writeln!(s, "{title} ({} samples, {} unparseable)", self.samples, self.unparseable);
        for (label, value) in rows {
            let _ = writeln!(s, "{label:<width$}  {value:>4}");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_smiles_have_no_features() {
        let recs: Vec<StatsRecord> = ["CCO", "c1ccccc1", "N"].iter().map(|s| StatsRecord::new(*s)).collect();
        let t = dataset_stats(&recs);
        assert_eq!(
            (t.variable_group, t.attach_point, t.m_section, t.sg_section),
            (0.0, 0.0, 0.0, 0.0)
        );
        // 3 + 6 + 1 heavy atoms over 3 records
        assert!((t.mean_atoms - 10.0 / 3.0).abs() < 1e-12);
        assert_eq!(t.mean_ocr_cells, None);
    }

    #[test]
    fn feature_percentages() {
        let recs = vec![
            StatsRecord { cxsmiles: "*c1ccccc1 |$R1;;;;;;$|".into(), ocr_cells: Some(3) },
            StatsRecord { cxsmiles: "*CC* |$_AP1;;;$,Sg:n:1,2::ht|".into(), ocr_cells: Some(5) },
            StatsRecord::new("*C.c1ccccc1 |m:0:2.3.4|"),
            StatsRecord::new("C(("),
        ];
        let t = dataset_stats(&recs);
        assert_eq!((t.samples, t.parsed, t.unparseable), (4, 3, 1));
        let third = 100.0 / 3.0;
        assert_eq!(t.variable_group, third);
        assert_eq!(t.attach_point, third);
        assert_eq!(t.m_section, third);
        assert_eq!(t.sg_section, third);
        assert_eq!(t.mean_ocr_cells, Some(4.0));
        let text = t.to_text("sample");
        assert!(text.contains("Variable group") && text.contains("Mean num. OCR cells"));
    }
}
