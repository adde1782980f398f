use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_markushkit"));
    c.env_remove("MARKUSHKIT_ABBREV_DICT");
    c
}

fn core_data() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const METHANE: &str = "methane\n  test\n\n  1  0  0  0  0  0  0  0  0  0999 V2000\n    0.0000    0.0000    0.0000 C   0  0  0  0  0  0  0  0  0  0  0  0\nM  END\n";

fn json_lines(path: &Path) -> Vec<serde_json::Value> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn convert_methane() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in");
    fs::create_dir(&input).unwrap();
    fs::write(input.join("m1.mol"), METHANE).unwrap();
    let out = dir.path().join("out.jsonl");
    let o = bin().arg("convert").arg(&input).arg("-o").arg(&out).output().unwrap();
    assert!(o.status.success(), "{o:?}");
    let recs = json_lines(&out);
    assert_eq!(recs.len(), 1);
    assert_eq!(recs[0]["id"], "m1");
    assert_eq!(recs[0]["cxsmiles"], "C");
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out.jsonl.manifest.json")).unwrap()).unwrap();
    assert_eq!((manifest["ok"].as_u64(), manifest["failed"].as_u64(), manifest["total"].as_u64()), (Some(1), Some(0), Some(1)));
}

#[test]
fn convert_lenient_and_strict() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in");
    fs::create_dir(&input).unwrap();
    fs::write(input.join("good.mol"), METHANE).unwrap();
    fs::write(input.join("bad.mol"), "garbage\n").unwrap();
    let out = dir.path().join("out.jsonl");
    let o = bin().arg("convert").arg(&input).arg("-o").arg(&out).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json_lines(&out).len(), 1);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out.jsonl.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["failed"], 1);
    assert_eq!(manifest["failures"][0]["id"], "bad");

    let o = bin().args(["--strict", "convert"]).arg(&input).arg("-o").arg(&out).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn convert_is_deterministic_across_job_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mols = core_data().join("mol");
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    assert!(bin().args(["--jobs", "1", "convert"]).arg(&mols).arg("-o").arg(&a).status().unwrap().success());
    assert!(bin().args(["--jobs", "4", "convert"]).arg(&mols).arg("-o").arg(&b).status().unwrap().success());
    let (ta, tb) = (fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    assert_eq!(json_lines(&a).len(), 6);
}

#[test]
fn unreadable_input_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .arg("convert")
        .arg(dir.path().join("missing"))
        .arg("-o")
        .arg(dir.path().join("x.jsonl"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(bin().arg("frobnicate").output().unwrap().status.code(), Some(1));
    assert_eq!(bin().args(["--jobs", "0", "parse", "C"]).output().unwrap().status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "[convert]\nno_such_key = 1\n").unwrap();
    let o = bin().arg("--config").arg(&cfg).args(["parse", "C"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(bin().arg("--help").output().unwrap().status.code(), Some(0));
}

#[test]
fn config_file_sets_the_rgroup_pattern() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "[convert]\nrgroup_pattern = 'G\\d+'\n").unwrap();
    let mol = dir.path().join("g.mol");
    fs::write(
        &mol,
        "g\n  test\n\n  2  1  0  0  0  0  0  0  0  0999 V2000\n    0.0000    0.0000    0.0000 C   0  0  0  0  0  0  0  0  0  0  0  0\n    1.0000    0.0000    0.0000 A   0  0  0  0  0  0  0  0  0  0  0  0\n  1  2  1  0\nA    2\nG1\nM  END\n",
    )
    .unwrap();
    let o = bin().arg("--config").arg(&cfg).args(["parse", "--mol"]).arg(&mol).output().unwrap();
    assert!(o.status.success(), "{o:?}");
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["cxsmiles"], "*C |$G1;$|");
}

#[test]
fn dictionary_env_var_overrides_the_bundled_dictionary() {
    let dir = tempfile::tempdir().unwrap();
    let dict = dir.path().join("dict.tsv");
    fs::write(&dict, "Foo\t*CCl\n").unwrap();
    let mol = dir.path().join("foo.mol");
    fs::write(
        &mol,
        "foo\n  test\n\n  2  1  0  0  0  0  0  0  0  0999 V2000\n    0.0000    0.0000    0.0000 C   0  0  0  0  0  0  0  0  0  0  0  0\n    1.0000    0.0000    0.0000 A   0  0  0  0  0  0  0  0  0  0  0  0\n  1  2  1  0\nA    2\nFoo\nM  END\n",
    )
    .unwrap();
    let with = bin().env("MARKUSHKIT_ABBREV_DICT", &dict).args(["parse", "--mol"]).arg(&mol).output().unwrap();
    let v: serde_json::Value = serde_json::from_slice(&with.stdout).unwrap();
    assert_eq!(v["formula"], "C2H5Cl");
    let without = bin().args(["parse", "--mol"]).arg(&mol).output().unwrap();
    let v: serde_json::Value = serde_json::from_slice(&without.stdout).unwrap();
    assert_ne!(v["formula"], "C2H5Cl");
}

#[test]
fn eval_reflexive_and_corrupted() {
    let data = core_data().join("eval");
    let gt = data.join("gt.jsonl");
    let o = bin().arg("eval").arg(&gt).arg(&gt).output().unwrap();
    assert!(o.status.success());
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    for k in ["A", "A_inchikey", "table_A", "markush_A", "ocr_P", "ocr_R", "ocr_F1", "ocr_image_A"] {
        assert_eq!(r[k].as_f64(), Some(100.0), "{k}: {r}");
    }

    let o = bin().arg("eval").arg(data.join("pred_corrupt_half.jsonl")).arg(&gt).output().unwrap();
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["invalid_rate"].as_f64(), Some(50.0));
    assert!(r["A"].as_f64().unwrap() <= 50.0);
}

#[test]
fn eval_writes_report_files() {
    let dir = tempfile::tempdir().unwrap();
    let data = core_data().join("eval");
    let o = bin()
        .arg("eval")
        .arg(data.join("pred_adversarial.jsonl"))
        .arg(data.join("gt.jsonl"))
        .arg("--out-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    for f in ["report.json", "report.txt", "samples.jsonl", "manifest.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let samples = json_lines(&dir.path().join("samples.jsonl"));
    assert_eq!(samples.len(), 30);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["unmatched_predictions"][0], "orphan");
}

#[test]
fn with_stereo_flag_changes_backbone_accuracy() {
    let dir = tempfile::tempdir().unwrap();
    let gt = dir.path().join("gt.jsonl");
    let pred = dir.path().join("pred.jsonl");
    fs::write(&gt, "{\"id\":\"a\",\"cxsmiles\":\"C[C@H](N)O\"}\n").unwrap();
    fs::write(&pred, "{\"id\":\"a\",\"cxsmiles\":\"C[C@@H](N)O\"}\n").unwrap();
    let a = |extra: &[&str]| -> f64 {
        let o = bin().args(extra).arg("eval").arg(&pred).arg(&gt).output().unwrap();
        let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        r["A"].as_f64().unwrap()
    };
    assert_eq!(a(&[]), 100.0);
    assert_eq!(a(&["--with-stereo"]), 0.0);
}

#[test]
fn eval_ocr_sweep_is_monotone() {
    let data = core_data().join("eval");
    let o = bin()
        .args(["eval-ocr", "--sweep", "0.0,0.3,0.5"])
        .arg(data.join("pred_adversarial.jsonl"))
        .arg(data.join("gt.jsonl"))
        .output()
        .unwrap();
    assert!(o.status.success());
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let acc: Vec<f64> = r["scores"].as_array().unwrap().iter().map(|s| s["image_a"].as_f64().unwrap()).collect();
    assert_eq!(acc.len(), 3);
    assert!(acc[0] >= acc[1] && acc[1] >= acc[2]);
}

#[test]
fn parse_canon_stats() {
    let o = bin().args(["parse", "CC"]).output().unwrap();
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["atom_count"], 2);
    assert_eq!(v["graph"]["atoms"].as_array().unwrap().len(), 2);

    let o = bin().args(["canon", "OCC", "CCO"]).output().unwrap();
    assert!(stdout(&o).lines().any(|l| l == "equivalent: true"));
    let o = bin().args(["canon", "OCC", "CCC"]).output().unwrap();
    assert!(stdout(&o).lines().any(|l| l == "equivalent: false"));

    let o = bin().args(["parse", "C(("]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));

    let o = bin().arg("stats").arg(core_data().join("stats/sample.jsonl")).output().unwrap();
    let text = stdout(&o);
    for row in ["Variable group", "Attach point", "m-section", "Sg-section", "Mean num. atoms", "Mean num. OCR cells"] {
        assert!(text.contains(row), "{row}");
    }
}

#[test]
fn augment_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.smi");
    fs::write(&input, "c1ccccc1C\nCCCOc1ccccc1\n\n# comment\nC((\nCCN(CC)CC\n").unwrap();
    let run = |jobs: &str, name: &str| {
        let out = dir.path().join(name);
        let o = bin().args(["--jobs", jobs, "augment", "--seed", "5"]).arg(&input).arg("-o").arg(&out).output().unwrap();
        assert!(o.status.success(), "{o:?}");
        fs::read(out).unwrap()
    };
    let a = run("1", "a.jsonl");
    let b = run("3", "b.jsonl");
    assert_eq!(a, b);
    let recs = json_lines(&dir.path().join("a.jsonl"));
    assert_eq!(recs.len(), 4);
    assert_eq!(recs[2]["line"], 5);
    assert!(recs[2]["error"].is_string());
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("a.jsonl.manifest.json")).unwrap()).unwrap();
    assert_eq!((manifest["ok"].as_u64(), manifest["failed"].as_u64()), (Some(3), Some(1)));
}
