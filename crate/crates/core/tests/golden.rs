//! Outputs pinned to files under `tests/golden`. Regenerate with
//! `RELFIX_BLESS=1 cargo test -p relfix-core --test golden`.

use std::fs;
use std::path::PathBuf;

use relfix_core::relation::is_preserving;
use relfix_core::{Grid, MetricSpace, Point, Relation, Sampling};

fn check_golden(name: &str, actual: &str) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("RELFIX_BLESS").is_some() {
        fs::write(&path, actual).unwrap();
        return;
    }
    let expected = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "golden mismatch for {name}");
}

#[test]
fn function_space_sample_seed_7() {
    let space = MetricSpace::functions(Grid::new(4).unwrap());
    let sample = space.sample(Sampling::random(3), 7).unwrap();
    assert_eq!(sample.len(), 4);
    assert_eq!(sample[3].as_grid().unwrap().sup_norm(), 0.0);
    let json = serde_json::to_string_pretty(&sample).unwrap() + "\n";
    check_golden("sample_functions_n4_count3_seed7.json", &json);
}

#[test]
fn product_relation_verdicts() {
    let rel = Relation::product_below_either();
    let seq = |v: &[f64]| v.iter().map(|&x| Point::Scalar(x)).collect::<Vec<_>>();
    let mut out = String::new();
    for s in [vec![2.0, 1.5, 1.0], vec![1.0, 0.75, 0.25, 0.25 / 3.0], vec![0.5, 0.5, 0.5]] {
        out.push_str(&format!("{s:?} -> {}\n", is_preserving(&rel, &seq(&s))));
    }
    check_golden("product_relation_verdicts.txt", &out);
}
