use std::fs;
use std::path::{Path, PathBuf};

use compmodels::formats::*;
use compmodels::lambda::alpha_eq;
use compmodels::tm::validate_machine;

fn files(dir: &str) -> Vec<PathBuf> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus").join(dir);
    let mut v: Vec<PathBuf> = fs::read_dir(root).unwrap().map(|e| e.unwrap().path()).collect();
    v.sort();
    v
}

#[test]
fn machines_round_trip() {
    let mut count = 0;
    for p in files("tm") {
        let text = fs::read_to_string(&p).unwrap();
        let parsed = parse_tm(&text).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        let printed = print_tm(&parsed);
        assert_eq!(parse_tm(&printed).unwrap(), parsed, "{}", p.display());
        assert_eq!(print_tm(&parse_tm(&printed).unwrap()), printed);
        if let TmFile::Machine(spec) = parsed {
            validate_machine(spec).unwrap();
            count += 1;
        }
    }
    assert!(count >= 10);
}

#[test]
fn prf_round_trip() {
    let mut defs = 0;
    for p in files("prf") {
        let text = fs::read_to_string(&p).unwrap();
        let parsed = parse_prf(&text).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        let printed = print_prf(&parsed);
        assert_eq!(parse_prf(&printed).unwrap(), parsed, "{}", p.display());
        assert_eq!(print_prf(&parse_prf(&printed).unwrap()), printed);
        defs += parsed.defs.len();
    }
    assert!(defs >= 10);
}

#[test]
fn lam_round_trip() {
    let mut terms = 0;
    for p in files("lam") {
        let text = fs::read_to_string(&p).unwrap();
        let parsed = parse_lam(&text).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        let printed = print_lam(&parsed);
        let again = parse_lam(&printed).unwrap();
        assert_eq!(print_lam(&again), printed);
        for ((n1, a), (n2, b)) in parsed.defs.iter().zip(&again.defs) {
            assert_eq!(n1, n2);
            assert!(alpha_eq(a, b), "{n1} in {}", p.display());
        }
        terms += parsed.defs.len() + parsed.main.iter().count();
    }
    assert!(terms >= 15);
}

#[test]
fn malformed_inputs_report_positions() {
    for p in files("malformed") {
        let text = fs::read_to_string(&p).unwrap();
        let first = text.lines().next().unwrap();
        let want = first.split_whitespace().last().unwrap();
        let (l, c) = want.split_once(':').unwrap();
        let (line, column): (usize, usize) = (l.parse().unwrap(), c.parse().unwrap());
        let got = match Kind::from_path(&p).unwrap() {
            Kind::Tm => parse_tm(&text).unwrap_err(),
            Kind::Lam => parse_lam(&text).unwrap_err(),
            Kind::Prf => match parse_prf(&text).unwrap_err() {
                FormatError::Parse(e) => e,
                FormatError::Validation(v) => panic!("{}: {v}", p.display()),
            },
        };
        assert_eq!((got.line, got.column), (line, column), "{}: {}", p.display(), got.message);
        let len = text.lines().nth(line - 1).unwrap().chars().count();
        assert!(column >= 1 && column <= len + 1);
    }
}
