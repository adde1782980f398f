use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::ocr::f1;

/// Variable-group label -> allowed substituents.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SubstituentTable {
    pub rows: BTreeMap<String, Vec<String>>,
}

impl<const N: usize> From<[(&str, &[&str]); N]> for SubstituentTable {
    fn from(rows: [(&str, &[&str]); N]) -> Self {
        SubstituentTable {
            rows: rows
                .into_iter()
                .map(|(l, s)| (l.to_string(), s.iter().map(|x| x.to_string()).collect()))
                .collect(),
        }
    }
}

/// Substituent text in comparable form: canonical SMILES when it parses,
/// trimmed text otherwise.
pub fn normalize_substituent(s: &str) -> String {
    let t = s.trim();
    match crate::notation::parse_cxsmiles(t) {
        Ok(g) if !g.is_empty() => crate::write_cxsmiles(&g).text,
        _ => t.to_string(),
    }
}

impl SubstituentTable {
    pub fn is_empty(&self) -> bool {
        self.rows.values().all(|r| r.is_empty())
    }

    /// Trimmed, case-folded labels mapped to sets of normalized substituents.
    /// Rows with an empty label are dropped.
    pub fn normalized(&self) -> BTreeMap<String, BTreeSet<String>> {
        let mut out: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (label, subs) in &self.rows {
            let l = label.trim().to_lowercase();
            if l.is_empty() {
                continue;
            }
            out.entry(l)
                .or_default()
                .extend(subs.iter().map(|s| normalize_substituent(s)));
        }
        out.retain(|_, v| !v.is_empty());
        out
    }
}

/// Unit over which table precision and recall are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableGranularity {
    /// Each (label, substituent) pair.
    #[default]
    Cell,
    /// Each whole row (label with its full substituent set).
    Row,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TableScore {
    /// 100 when the normalized tables are identical, else 0.
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

pub fn table_score(
    pred: &SubstituentTable,
    gt: &SubstituentTable,
    granularity: TableGranularity,
) -> TableScore {
    let (p, g) = (pred.normalized(), gt.normalized());
    let accuracy = if p == g { 100.0 } else { 0.0 };
    let units = |t: &BTreeMap<String, BTreeSet<String>>| -> BTreeSet<String> {
        match granularity {
            TableGranularity::Cell => t
                .iter()
                .flat_map(|(l, subs)| subs.iter().map(move |s| format!("{l}\u{1f}{s}")))
                .collect(),
            TableGranularity::Row => t
                .iter()
                .map(|(l, subs)| {
                    let joined: Vec<&str> = subs.iter().map(String::as_str).collect();
                    format!("{l}\u{1f}{}", joined.join("\u{1e}"))
                })
                .collect(),
        }
    };
    let (up, ug) = (units(&p), units(&g));
    if up.is_empty() && ug.is_empty() {
        return TableScore {
            accuracy,
            precision: 100.0,
            recall: 100.0,
            f1: 100.0,
        };
    }
    let hits = up.intersection(&ug).count() as f64;
    let precision = if up.is_empty() {
        0.0
    } else {
        100.0 * hits / up.len() as f64
    };
    let recall = if ug.is_empty() {
        0.0
    } else {
        100.0 * hits / ug.len() as f64
    };
    TableScore {
        accuracy,
        precision,
        recall,
        f1: f1(precision, recall),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_tables() {
        let t = SubstituentTable::from([("R1", &["C", "Cl"][..]), ("X", &["O", "S"][..])]);
        let s = table_score(&t, &t, TableGranularity::Cell);
        assert_eq!((s.accuracy, s.f1), (100.0, 100.0));
    }

    #[test]
    fn missing_cell() {
        let gt = SubstituentTable::from([("R1", &["A", "B"][..])]);
        let pred = SubstituentTable::from([("R1", &["A"][..])]);
        let s = table_score(&pred, &gt, TableGranularity::Cell);
        assert_eq!(s.accuracy, 0.0);
        assert_eq!((s.precision, s.recall), (100.0, 50.0));
        // 2PR/(P+R) = 2*100*50/150
        assert!((s.f1 - 200.0 / 3.0).abs() < 1e-9);
        let row = table_score(&pred, &gt, TableGranularity::Row);
        assert_eq!((row.precision, row.recall, row.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn empty_prediction() {
        let gt = SubstituentTable::from([("R1", &["A"][..])]);
        let s = table_score(&SubstituentTable::default(), &gt, TableGranularity::Cell);
        assert_eq!((s.accuracy, s.f1), (0.0, 0.0));
    }

    #[test]
    fn normalization() {
        let a = SubstituentTable::from([(" r1 ", &["OCC", "CCO", " methyl "][..])]);
        let b = SubstituentTable::from([("R1", &["CCO", "methyl"][..])]);
        assert_eq!(a.normalized(), b.normalized());
        assert_eq!(table_score(&a, &b, TableGranularity::Cell).accuracy, 100.0);
        assert_eq!(normalize_substituent("c1ccccc1"), normalize_substituent("C1=CC=CC=C1"));
    }
}
