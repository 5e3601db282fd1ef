//! Whole-command runs through `execute`, as the binary would see them.

use std::path::{Path, PathBuf};

use super::execute;

struct Output {
    code: u8,
    stdout: Vec<u8>,
    stderr: Vec<u8>,
}

impl Output {
    fn success(&self) -> bool {
        self.code == 0
    }
}

fn smallsd(args: &[&str]) -> Output {
    let mut stdout = Vec::new();
    let mut stderr = Vec::new();
    let argv = std::iter::once("smallsd").chain(args.iter().copied());
    let code = execute(argv, &mut stdout, &mut stderr);
    Output {
        code,
        stdout,
        stderr,
    }
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

struct TempDir(PathBuf);

impl TempDir {
    fn new(tag: &str) -> Self {
        let p = std::env::temp_dir().join(format!("smallsd-cli-{tag}-{}", std::process::id()));
        std::fs::create_dir_all(&p).unwrap();
        TempDir(p)
    }

    fn file(&self, name: &str, contents: &str) -> PathBuf {
        let p = self.0.join(name);
        std::fs::write(&p, contents).unwrap();
        p
    }
}

impl Drop for TempDir {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn column(text: &str, sep: char, i: usize) -> Vec<String> {
    text.lines()
        .skip(1)
        .map(|l| l.split(sep).nth(i).unwrap_or_default().to_string())
        .collect()
}

#[test]
fn every_subcommand_has_help() {
    for cmd in ["estimate", "tables", "refit", "oracle"] {
        let o = smallsd(&[cmd, "--help"]);
        assert!(o.success(), "{cmd}");
        assert!(stdout(&o).contains("Usage"));
    }
    let o = smallsd(&["estimate", "--help"]);
    assert!(stdout(&o).contains("Experimental"));
}

#[test]
fn estimate_c1_example() {
    let dir = TempDir::new("c1");
    let input = dir.file("in.csv", "study_id,n,min,q1,median,q3,max\nx,10,0,,4,,10\n");
    let o = smallsd(&["estimate", path(&input), "--format", "jsonl"]);
    assert!(o.success());
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["mean"].as_f64().unwrap(), 4.55);
    let xi = smallsd::xi_hat(10).unwrap();
    assert_eq!(v["sd"].as_f64().unwrap(), 10.0 / xi);
    assert_eq!(v["scenario"], "C1");
    assert_eq!(v["correction"], "first");
}

#[test]
fn estimate_flags() {
    let dir = TempDir::new("flags");
    let input = dir.file(
        "in.csv",
        "study_id,n,min,q1,median,q3,max\nx,10,0,3,4,6,10\n",
    );
    let o = smallsd(&["estimate", path(&input), "--format", "tsv"]);
    assert_eq!(column(&stdout(&o), '\t', 2), ["C2"]);

    let o = smallsd(&[
        "estimate",
        path(&input),
        "--scenario",
        "c1",
        "--correction",
        "none",
        "--simplified-mean",
    ]);
    let out = stdout(&o);
    assert_eq!(column(&out, ',', 2), ["C1"]);
    assert_eq!(column(&out, ',', 3), ["none"]);
    assert_eq!(column(&out, ',', 4), ["4.5"]);
    let blom = smallsd::estimators::blom_xi(10).unwrap();
    assert_eq!(column(&out, ',', 5)[0].parse::<f64>().unwrap(), 10.0 / blom);

    // with the cutoff below n the divisor is the uncorrected one
    let o = smallsd(&[
        "estimate",
        path(&input),
        "--scenario",
        "c1",
        "--cutoff",
        "5",
    ]);
    assert_eq!(column(&stdout(&o), ',', 6)[0].parse::<f64>().unwrap(), blom);

    let o = smallsd(&["estimate", path(&input), "--cutoff", "1"]);
    assert_eq!(o.code, 2);
}

#[test]
fn estimate_output_file_and_rejection_of_outputs() {
    let dir = TempDir::new("roundtrip");
    let input = dir.file("in.csv", "study_id,n,min,q1,median,q3,max\nx,10,0,,4,,10\n");
    let out = dir.0.join("out.csv");
    let o = smallsd(&["estimate", path(&input), "-o", path(&out)]);
    assert!(o.success());
    assert!(stdout(&o).is_empty());
    let o = smallsd(&["estimate", path(&out)]);
    assert!(!o.success());
    assert!(stderr(&o).contains("malformed header"));
}

#[test]
fn estimate_fatal_errors() {
    let o = smallsd(&["estimate", "/nonexistent/studies.csv"]);
    assert_eq!(o.code, 1);
    assert!(stderr(&o).starts_with("error: cannot read"));

    let dir = TempDir::new("fatal");
    let input = dir.file("in.csv", "study,n,min,q1,median,q3,max\nx,10,0,,4,,10\n");
    let o = smallsd(&["estimate", path(&input)]);
    assert_eq!(o.code, 1);
    assert!(stdout(&o).is_empty());

    let input = dir.file("semi.csv", "study_id;n;min;q1;median;q3;max\n");
    assert!(!smallsd(&["estimate", path(&input)]).success());
}

#[test]
fn estimate_comma_decimals_are_row_errors() {
    let dir = TempDir::new("comma");
    let input = dir.file(
        "in.csv",
        "study_id,n,min,q1,median,q3,max\nx,10,0,,4,5,,10\ny,10,0,,\"4,5\",,10\n",
    );
    let o = smallsd(&["estimate", path(&input)]);
    assert!(o.success());
    assert_eq!(stdout(&o).lines().count(), 1);
    assert_eq!(stderr(&o).matches("error: line").count(), 2);
}

#[test]
fn tables_xi_full_range() {
    let o = smallsd(&["tables", "--which", "xi", "--range", "2:50"]);
    assert!(o.success());
    let out = stdout(&o);
    assert_eq!(
        out.lines().next(),
        Some("n\ttable\tblom\tcorrected\tresidual")
    );
    let residuals: Vec<f64> = column(&out, '\t', 4)
        .iter()
        .map(|c| c.parse().unwrap())
        .collect();
    assert_eq!(residuals.len(), 49);
    let sup = residuals.iter().map(|r| r.abs()).fold(0.0, f64::max);
    assert!((sup - 0.005).abs() < 0.001, "{sup}");

    let default = smallsd(&["tables", "--which", "xi"]);
    assert_eq!(default.stdout, o.stdout);
}

#[test]
fn tables_eta_beyond_fixture() {
    let o = smallsd(&[
        "tables", "--which", "eta", "--range", "60:70", "--format", "csv",
    ]);
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 12);
    assert!(column(&out, ',', 1).iter().all(String::is_empty));
    assert!(column(&out, ',', 2)
        .iter()
        .all(|c| c.parse::<f64>().is_ok()));
    assert!(column(&out, ',', 3)
        .iter()
        .all(|c| c.parse::<f64>().is_ok()));
}

#[test]
fn tables_rejects_bad_ranges() {
    for r in ["1:10", "10:2", "x", "3-9"] {
        let o = smallsd(&["tables", "--which", "xi", "--range", r]);
        assert_eq!(o.code, 2, "{r}");
        assert!(stderr(&o).contains("error"));
    }
}

#[test]
fn refit_reports() {
    fn estimate(out: &str, name: &str) -> f64 {
        out.lines()
            .find(|l| l.split_whitespace().next() == Some(name))
            .and_then(|l| l.split_whitespace().nth(1))
            .unwrap()
            .parse()
            .unwrap()
    }
    let out = stdout(&smallsd(&["refit", "--kind", "epsilon"]));
    assert!((estimate(&out, "a") + 2.8822).abs() < 1e-3);
    assert!((estimate(&out, "b") + 0.2308).abs() < 1e-4);

    let out = stdout(&smallsd(&["refit", "--kind", "delta"]));
    assert!((estimate(&out, "a") + 0.0626).abs() < 1e-4);
    assert!((estimate(&out, "b") - 0.0197).abs() < 1e-4);

    let o = smallsd(&["refit", "--kind", "epsilon", "--order", "second"]);
    assert!(stdout(&o).contains("on 45 degrees of freedom"));

    let o = smallsd(&["refit", "--kind", "delta", "--order", "second"]);
    assert_eq!(o.code, 2);
}

#[test]
fn refit_emits_series() {
    let dir = TempDir::new("series");
    let p = dir.0.join("eps.tsv");
    let o = smallsd(&["refit", "--kind", "epsilon", "--emit-series", path(&p)]);
    assert!(o.success());
    let text = std::fs::read_to_string(&p).unwrap();
    assert!(text.starts_with("n\tepsilon\ty\tfitted\tresidual\tepsilon_fitted\n"));
    assert_eq!(text.lines().count(), 50);
}

#[test]
fn oracle_xi() {
    let dir = TempDir::new("oracle");
    let report = dir.0.join("report.tsv");
    let o = smallsd(&[
        "oracle",
        "--which",
        "xi",
        "--range",
        "2:50",
        "--report",
        path(&report),
    ]);
    assert!(o.success());
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 49);
    let t = smallsd::tables::table(smallsd::DivisorKind::Xi);
    let worst = out
        .lines()
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            let n: u32 = f[0].parse().unwrap();
            (f[1].parse::<f64>().unwrap() - t.get(n).unwrap()).abs()
        })
        .fold(0.0, f64::max);
    // the table rounds E[range(12)] = 3.258455 to 3.259
    assert!(worst < 0.00055, "{worst}");
    let report = std::fs::read_to_string(&report).unwrap();
    assert!(
        report.contains("# xi max |deviation| 0.000545 at n = 12"),
        "{report}"
    );

    let o = smallsd(&["oracle", "--which", "xi", "--range", "2:2"]);
    assert_eq!(stdout(&o), "2\t1.128379\t\n");
    assert!(stderr(&o).contains("xi_dev"));
}

#[test]
fn oracle_eta_is_deterministic() {
    let args = [
        "oracle", "--which", "eta", "--range", "5:6", "--reps", "20000", "--seed", "7",
    ];
    let a = smallsd(&args);
    let b = smallsd(&args);
    assert!(a.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stderr, b.stderr);
    let mut other = args;
    other[8] = "8";
    assert_ne!(smallsd(&other).stdout, a.stdout);
}

#[test]
fn oracle_rejects_too_few_replications() {
    let o = smallsd(&["oracle", "--which", "eta", "--range", "5:5", "--reps", "10"]);
    assert_eq!(o.code, 1);
    assert!(stderr(&o).starts_with("error:"));
}
