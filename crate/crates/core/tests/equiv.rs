use compmodels::equiv::{equiv_grid, Grid, Model, DEFAULT_FUEL};
use compmodels::prf::stdlib;
use compmodels::prf_to_lambda::compile_prf_to_lambda;
use compmodels::prf_to_tm::compile_prf_to_tm;

#[test]
fn pred_agrees_including_round_trip() {
    let pred = stdlib::pred();
    let tm = compile_prf_to_tm(&pred).unwrap().machine;
    let lam = compile_prf_to_lambda(&pred).unwrap();
    let r = equiv_grid(&pred, &tm, &lam, &Grid::new(0, 4, 1), DEFAULT_FUEL).unwrap();
    assert!(r.models.contains(&Model::Roundtrip));
    assert_eq!(r.summary.agree, 5, "{}", r.serialize());
    assert!(r.serialize().contains("(4);roundtrip;3"));
}

#[test]
fn reports_are_deterministic() {
    let add = stdlib::add();
    let tm = compile_prf_to_tm(&add).unwrap().machine;
    let lam = compile_prf_to_lambda(&add).unwrap();
    let grid = Grid::new(0, 2, 2);
    let a = equiv_grid(&add, &tm, &lam, &grid, DEFAULT_FUEL).unwrap();
    let b = equiv_grid(&add, &tm, &lam, &grid, DEFAULT_FUEL).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.serialize(), b.serialize());
}
