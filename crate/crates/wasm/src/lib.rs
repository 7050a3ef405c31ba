//! Browser bindings: each call returns a JSON string for the demo page.
//!
//! The `*_json` functions are plain Rust so they can be tested natively; the
//! exported wrappers only convert errors.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use serde::Serialize;
use wasm_bindgen::prelude::*;

use relfix_core::engine::{iterate, IterateOptions};
use relfix_core::fixtures::ExampleId;
use relfix_core::fractional::{lambda_loose, lambda_tight, solve_fbvp, FbvpProblem, OperatorVariant, Source};
use relfix_core::verifier::estimate_lambda_on_sample;
use relfix_core::{Error, Grid, GridFn, Point};

#[derive(Serialize)]
struct Orbit {
    example: String,
    lambda_hat: f64,
    points: Vec<f64>,
    p_gaps: Vec<f64>,
    d_gaps: Vec<f64>,
    bound: Vec<f64>,
    stop_reason: String,
    in_relation: Vec<bool>,
}

/// Picard orbit of a scalar example from `x0`, iterated with the example's
/// lattice `lambda_hat`.
pub fn picard_orbit_json(example: &str, x0: f64, max_iter: usize) -> Result<String, String> {
    let id: ExampleId = example.parse().map_err(|e: Error| e.to_string())?;
    let fx = id.fixture();
    if !matches!(id, ExampleId::Ex2_3 | ExampleId::Ex2_4) {
        return Err(format!("{id} has no contraction to iterate; pick ex2.3 or ex2.4"));
    }
    let start = Point::scalar(x0).map_err(|e| e.to_string())?;
    if !fx.space.contains(&start) {
        return Err(format!("x0 = {x0} is outside the space of {id}"));
    }
    let sample = fx.sample(fx.default_step).map_err(|e| e.to_string())?;
    let est = estimate_lambda_on_sample(&fx.map, &fx.p, &fx.relation, &sample, false).map_err(|e| e.to_string())?;
    let opts = IterateOptions {
        max_iter: max_iter.clamp(1, 10_000),
        ..IterateOptions::scalar(est.lambda_hat)
    };
    let trace = iterate(&fx.map, &start, &fx.p, &fx.space, &opts).map_err(|e| e.to_string())?;
    let in_relation = trace.points.windows(2).map(|w| fx.relation.holds(&w[0], &w[1])).collect();
    let orbit = Orbit {
        example: id.to_string(),
        lambda_hat: est.lambda_hat,
        points: trace.points.iter().map(|p| p.magnitude()).collect(),
        p_gaps: trace.p_gaps,
        d_gaps: trace.d_gaps,
        bound: trace.bound,
        stop_reason: format!("{:?}", trace.stop_reason),
        in_relation,
    };
    serde_json::to_string(&orbit).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct LambdaCurves {
    k: f64,
    beta: Vec<f64>,
    loose: Vec<f64>,
    tight: Vec<f64>,
}

/// Both contraction constants over `beta` in `(1, 2]` at fixed `k`.
pub fn lambda_curves_json(k: f64, points: usize) -> Result<String, String> {
    let points = points.clamp(2, 2000);
    let mut curves = LambdaCurves {
        k,
        beta: Vec::with_capacity(points),
        loose: Vec::with_capacity(points),
        tight: Vec::with_capacity(points),
    };
    for i in 1..=points {
        let beta = 1.0 + i as f64 / points as f64;
        curves.beta.push(beta);
        curves.loose.push(lambda_loose(beta, k).map_err(|e| e.to_string())?);
        curves.tight.push(lambda_tight(beta, k).map_err(|e| e.to_string())?);
    }
    serde_json::to_string(&curves).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Solution {
    t: Vec<f64>,
    x: Vec<f64>,
    iterations: usize,
    converged: bool,
    contraction_factor: f64,
    lambda_loose: f64,
    lambda_tight: f64,
    fixed_point_residual: f64,
    boundary_residual: f64,
    caputo_residual: f64,
    gap_ratio: Option<f64>,
}

/// Solves with `f(t, x) = a (1 + t + sin² x)` and `L = a`.
pub fn solve_fbvp_json(beta: f64, k: f64, a: f64, green: bool, n: usize) -> Result<String, String> {
    if !(a >= 0.0) {
        return Err(format!("source scale must be >= 0, got {a}"));
    }
    let grid = Grid::new(n.clamp(4, 2048)).map_err(|e| e.to_string())?;
    let problem = FbvpProblem {
        beta,
        k,
        lipschitz: a,
        source: Source::sin_squared(a),
        variant: if green {
            OperatorVariant::GreenCorrected
        } else {
            OperatorVariant::Additive
        },
        grid,
    };
    let x0 = GridFn::constant(grid, 0.0).map_err(|e| e.to_string())?;
    let sol = solve_fbvp(&problem, &x0, 1e-8, 500).map_err(|e| e.to_string())?;
    let out = Solution {
        t: grid.nodes().collect(),
        x: sol.x.values().to_vec(),
        iterations: sol.iterations,
        converged: sol.converged(),
        contraction_factor: sol.contraction_factor,
        lambda_loose: sol.lambda_loose,
        lambda_tight: sol.lambda_tight,
        fixed_point_residual: sol.fixed_point_residual,
        boundary_residual: sol.boundary_residual,
        caputo_residual: sol.caputo_residual,
        gap_ratio: sol.max_gap_ratio,
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn picard_orbit(example: &str, x0: f64, max_iter: usize) -> Result<String, JsError> {
    picard_orbit_json(example, x0, max_iter).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn lambda_curves(k: f64, points: usize) -> Result<String, JsError> {
    lambda_curves_json(k, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn solve_fbvp_sin_squared(beta: f64, k: f64, a: f64, green: bool, n: usize) -> Result<String, JsError> {
    solve_fbvp_json(beta, k, a, green, n).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn orbit_of_ex2_4() {
        let v: Value = serde_json::from_str(&picard_orbit_json("ex2.4", 2.0, 100).unwrap()).unwrap();
        assert_eq!(v["lambda_hat"], 0.75);
        assert_eq!(v["stop_reason"], "Converged");
        assert_eq!(v["points"][1], 1.5);
        // 2 * 1.5 exceeds both
        assert_eq!(v["in_relation"][0], false);
    }

    #[test]
    fn orbit_rejects_bad_input() {
        assert!(picard_orbit_json("ex1.7", 2.0, 10).is_err());
        assert!(picard_orbit_json("ex2.4", 3.0, 10).is_err());
        assert!(picard_orbit_json("nope", 1.0, 10).is_err());
    }

    #[test]
    fn curves_are_ordered() {
        let v: Value = serde_json::from_str(&lambda_curves_json(0.5, 20).unwrap()).unwrap();
        let loose = v["loose"].as_array().unwrap();
        let tight = v["tight"].as_array().unwrap();
        assert_eq!(loose.len(), 20);
        for (p, t) in loose.iter().zip(tight) {
            assert!(t.as_f64().unwrap() <= p.as_f64().unwrap());
        }
        assert!(lambda_curves_json(1.5, 10).is_err());
    }

    #[test]
    fn solve_small_grid() {
        let v: Value = serde_json::from_str(&solve_fbvp_json(1.5, 0.5, 0.2, true, 64).unwrap()).unwrap();
        assert_eq!(v["converged"], true);
        assert_eq!(v["x"][0], 0.0);
        assert_eq!(v["t"].as_array().unwrap().len(), 65);
        assert!(v["boundary_residual"].as_f64().unwrap() < 1e-4);
        assert!(solve_fbvp_json(1.5, 0.5, -1.0, false, 64).is_err());
    }
}
