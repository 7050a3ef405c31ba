use relfix_wasm::{lambda_curves_json, picard_orbit_json, solve_fbvp_json};
use serde_json::Value;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn orbit_bound_dominates_distance_to_limit() {
    let v = parse(picard_orbit_json("ex2.4", 2.0, 200).unwrap());
    let pts: Vec<f64> = v["points"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    let bound: Vec<f64> = v["bound"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    let limit = *pts.last().unwrap();
    assert!(limit.abs() < 1e-6);
    for (x, b) in pts.iter().zip(&bound) {
        assert!((x - limit).abs() <= b + 1e-12, "{x} vs bound {b}");
    }
}

#[test]
fn ex2_3_orbit_hits_two() {
    let v = parse(picard_orbit_json("ex2.3", 2.5, 50).unwrap());
    let pts = v["points"].as_array().unwrap();
    assert_eq!(pts.last().unwrap().as_f64().unwrap(), 2.0);
}

#[test]
fn curves_hit_known_value() {
    let v = parse(lambda_curves_json(0.5, 2).unwrap());
    assert_eq!(v["beta"][1], 2.0);
    let tight = v["tight"][1].as_f64().unwrap();
    assert!((tight - 26.0 / 27.0).abs() < 1e-12);
}

#[test]
fn both_variants_solve() {
    for green in [false, true] {
        let v = parse(solve_fbvp_json(1.8, 0.3, 0.1, green, 32).unwrap());
        assert_eq!(v["converged"], true);
        assert!(v["contraction_factor"].as_f64().unwrap() < 1.0);
    }
    assert!(solve_fbvp_json(0.5, 0.3, 0.1, false, 32).is_err());
}
