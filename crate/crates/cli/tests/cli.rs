use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn corpus(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/corpus").join(rel)
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("compmodels-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_compmodels")).args(args).output().unwrap()
}

fn code(args: &[&str]) -> i32 {
    cli(args).status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_tm_exit_codes() {
    let onon = corpus("tm/onon.tm");
    assert_eq!(code(&["run", "tm", path(&onon), "--input", "0011", "--fuel", "500"]), 0);
    assert_eq!(code(&["run", "tm", path(&onon), "--input", "0101", "--fuel", "500"]), 1);
    assert_eq!(code(&["run", "tm", path(&onon), "--input", "000111", "--fuel", "3"]), 2);
    assert_eq!(code(&["run", "tm", path(&onon), "--input", "012"]), 3);
}

#[test]
fn trace_goes_to_stderr() {
    let o = cli(&["run", "tm", path(&corpus("tm/onon.tm")), "--input", "01", "--trace"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).lines().count() > 1);
}

#[test]
fn compiled_lambda_adds() {
    let dir = scratch("add-lam");
    let out = dir.join("add.lam");
    assert_eq!(code(&["compile", "--from", "prf", "--to", "lam", path(&corpus("prf/add.prf")), "-o", path(&out)]), 0);
    let o = cli(&["run", "lam", path(&out), "--apply", "#2 #3", "--fuel", "1000000"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "#5");
}

#[test]
fn prf_arity_mismatch_is_invalid() {
    let add = corpus("prf/add.prf");
    assert_eq!(code(&["run", "prf", path(&add), "--args", "2"]), 3);
    let o = cli(&["run", "prf", path(&add), "--args", "2", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "5");
}

#[test]
fn divergence_exhausts_fuel() {
    let diverge = corpus("prf/diverge.prf");
    assert_eq!(code(&["run", "prf", path(&diverge), "--args", "0", "--fuel", "10000"]), 2);
    let dir = scratch("omega");
    let omega = dir.join("omega.lam");
    fs::write(&omega, "(\\x. x x) (\\x. x x)\n").unwrap();
    assert_eq!(code(&["run", "lam", path(&omega), "--fuel", "1000"]), 2);
}

#[test]
fn corpus_checks_clean() {
    for sub in ["tm", "prf", "lam"] {
        for e in fs::read_dir(corpus(sub)).unwrap() {
            let p = e.unwrap().path();
            let o = cli(&["check", path(&p)]);
            assert_eq!(o.status.code(), Some(0), "{}", p.display());
            assert!(stdout(&o).starts_with("ok"));
        }
    }
}

#[test]
fn malformed_files_report_positions() {
    for e in fs::read_dir(corpus("malformed")).unwrap() {
        let p = e.unwrap().path();
        let text = fs::read_to_string(&p).unwrap();
        let want = text.lines().next().unwrap().split_whitespace().last().unwrap().to_string();
        let o = cli(&["check", path(&p)]);
        assert_eq!(o.status.code(), Some(3), "{}", p.display());
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(&format!(":{want}:")), "{}: {err}", p.display());
    }
}

#[test]
fn equiv_exit_codes() {
    let dir = scratch("equiv");
    let add_lam = dir.join("add.lam");
    let mul_tm = dir.join("mul.tm");
    assert_eq!(code(&["compile", "--from", "prf", "--to", "lam", path(&corpus("prf/add.prf")), "-o", path(&add_lam)]), 0);
    assert_eq!(code(&["compile", "--from", "prf", "--to", "tm", path(&corpus("prf/mul.prf")), "-o", path(&mul_tm)]), 0);
    let (add_prf, add_tm) = (corpus("prf/add.prf"), corpus("tm/add.tm"));
    let add = ["equiv", "--prf", path(&add_prf), "--lam", path(&add_lam)];

    let o = cli(&[&add[..], &["--tm", path(&add_tm), "--grid", "0..3"]].concat());
    assert_eq!(o.status.code(), Some(0));
    let report = stdout(&o);
    assert!(report.contains("summary: 16 agree, 0 disagree, 0 inconclusive"), "{report}");
    assert!(report.contains("(2,3);tm;5"));

    let o = cli(&[&add[..], &["--tm", path(&mul_tm), "--grid", "0..2"]].concat());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("(0,1)"));

    let diverge = corpus("prf/diverge.prf");
    let d_tm = dir.join("diverge.tm");
    let d_lam = dir.join("diverge.lam");
    assert_eq!(code(&["compile", "--from", "prf", "--to", "tm", path(&diverge), "-o", path(&d_tm)]), 0);
    assert_eq!(code(&["compile", "--from", "prf", "--to", "lam", path(&diverge), "-o", path(&d_lam)]), 0);
    let args = ["equiv", "--prf", path(&diverge), "--tm", path(&d_tm), "--lam", path(&d_lam)];
    assert_eq!(code(&[&args[..], &["--grid", "0..0", "--fuel", "20000", "--no-roundtrip"]].concat()), 2);
    assert_eq!(code(&[&args[..], &["--grid", "0..x"]].concat()), 3);
}

#[test]
fn equiv_with_round_trip() {
    let dir = scratch("succ");
    let lam = dir.join("succ.lam");
    let succ = corpus("prf/succ.prf");
    assert_eq!(code(&["compile", "--from", "prf", "--to", "lam", path(&succ), "-o", path(&lam)]), 0);
    let o = cli(&["equiv", "--prf", path(&succ), "--tm", path(&corpus("tm/succ.tm")), "--lam", path(&lam), "--grid", "0..3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("(3);roundtrip;4"), "{}", stdout(&o));
}

#[test]
fn transforms() {
    let dir = scratch("transform");
    let single = dir.join("copier1.tm");
    assert_eq!(code(&["transform", "--single-tape", path(&corpus("tm/copier.tm")), "-o", path(&single)]), 0);
    assert_eq!(code(&["check", path(&single)]), 0);
    assert_eq!(code(&["run", "tm", path(&single), "--input", "0110"]), 0);

    let guess = corpus("tm/contains11.tm");
    let o = cli(&["transform", "--nd-run", path(&guess), "--input", "011", "--depth", "10"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("Accept"));
    assert_eq!(code(&["transform", "--nd-run", path(&guess), "--input", "000", "--depth", "10"]), 1);
}

#[test]
fn compile_routes() {
    let dir = scratch("routes");
    let suite = dir.join("suite");
    assert_eq!(code(&["compile", "--from", "lam", "--to", "tm-suite", path(&corpus("lam/swap.lam")), "-o", path(&suite)]), 0);
    for f in ["term.wire", "v.tm", "cf.tm", "cbv.tm", "ae.tm", "nf.tm", "br1.tm"] {
        assert!(suite.join(f).exists(), "{f}");
    }
    assert_eq!(code(&["check", path(&suite.join("br1.tm"))]), 0);

    let pred_tm = dir.join("pred.tm");
    assert_eq!(code(&["compile", "--from", "prf", "--to", "tm", path(&corpus("prf/pred.prf")), "-o", path(&pred_tm)]), 0);
    let o = cli(&["run", "tm", path(&pred_tm), "--args", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().last(), Some("2"));

    let lam_out = dir.join("x.tm");
    assert_eq!(code(&["compile", "--from", "lam", "--to", "tm", path(&corpus("lam/swap.lam")), "-o", path(&lam_out)]), 3);
}

#[test]
fn bad_usage_is_invalid() {
    assert_eq!(code(&["frobnicate"]), 3);
    assert_eq!(code(&["run", "tm"]), 3);
    assert_eq!(code(&["check", "/nonexistent/file.tm"]), 3);
    assert_eq!(code(&["--help"]), 0);
}
