//! Caputo boundary-value problem
//!
//! ```text
//! ᶜDᵝ x(t) = f(t, x(t)),  0 < t < 1,  1 < β <= 2
//! x(0) = 0,  x(1) = -∫₀ᵏ x(s) ds
//! ```
//!
//! solved as a fixed point of an integral operator built from
//! Riemann–Liouville integrals. The weakly singular kernel `(t - s)^(β-1)` is
//! integrated exactly against the piecewise-linear interpolant of the data
//! (product trapezoidal rule), which is exact on linear data and second order
//! on smooth data.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::engine::{iterate, IterateOptions, OrbitTrace, SelfMap, StopReason};
use crate::error::{Error, Result};
use crate::space::{Grid, GridFn, MetricSpace, Point};
use crate::wdistance::WDistance;

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Γ(z) for `z > 0` (Lanczos, g = 7). Arguments below 1/2 are lifted with
/// `Γ(z) = Γ(z + 1) / z` instead of reflection.
pub fn gamma_fn(z: f64) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::Domain(format!("gamma is defined here for finite z > 0, got {z}")));
    }
    if z < 0.5 {
        return Ok(gamma_fn(z + 1.0)? / z);
    }
    let x = z - 1.0;
    let mut sum = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        sum += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    // split the power to stay finite up to z ≈ 171
    let half = t.powf((x + 0.5) / 2.0);
    Ok((2.0 * PI).sqrt() * half * (half * (-t).exp()) * sum)
}

fn gamma(z: f64) -> f64 {
    gamma_fn(z).expect("argument checked positive by caller")
}

/// Product-trapezoidal weights for `I^α` on a fixed grid.
///
/// `I^α f(t_j) ≈ h^α / Γ(α + 2) · [w_j f_0 + Σ_{i=1}^{j-1} a_{j-i} f_i + f_j]`
/// with `a_m = (m+1)^{α+1} - 2 m^{α+1} + (m-1)^{α+1}` and
/// `w_j = (j-1)^{α+1} - (j-1-α) j^α`.
#[derive(Debug, Clone)]
pub struct RlQuadrature {
    order: f64,
    grid: Grid,
    scale: f64,
    interior: Vec<f64>,
    first: Vec<f64>,
}

impl RlQuadrature {
    pub fn new(order: f64, grid: Grid) -> Result<Self> {
        if !(order > 0.0) || !order.is_finite() {
            return Err(Error::Domain(format!("integral order must be positive, got {order}")));
        }
        let n = grid.intervals();
        let pow1: Vec<f64> = (0..=n + 1).map(|m| (m as f64).powf(order + 1.0)).collect();
        let interior = (0..=n)
            .map(|m| if m == 0 { 0.0 } else { pow1[m + 1] - 2.0 * pow1[m] + pow1[m - 1] })
            .collect();
        let first = (0..=n)
            .map(|j| {
                if j == 0 {
                    0.0
                } else {
                    let jf = j as f64;
                    pow1[j - 1] - (jf - 1.0 - order) * jf.powf(order)
                }
            })
            .collect();
        Ok(RlQuadrature {
            order,
            grid,
            scale: grid.step().powf(order) / gamma(order + 2.0),
            interior,
            first,
        })
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    /// `I^α f(t_j)`.
    pub fn at(&self, f: &[f64], j: usize) -> f64 {
        if j == 0 {
            return 0.0;
        }
        let mut acc = self.first[j] * f[0] + f[j];
        for (i, fi) in f.iter().enumerate().take(j).skip(1) {
            acc += self.interior[j - i] * fi;
        }
        self.scale * acc
    }

    /// `I^α f` at every node.
    pub fn all(&self, f: &[f64]) -> Vec<f64> {
        (0..self.grid.len()).map(|j| self.at(f, j)).collect()
    }
}

/// Riemann–Liouville integral `I^β` of grid data at node `t_index`.
pub fn rl_integral(values: &GridFn, beta: f64, t_index: usize) -> Result<f64> {
    let grid = values.grid();
    if t_index > grid.intervals() {
        return Err(Error::Shape(format!("node {t_index} outside grid with n = {}", grid.intervals())));
    }
    Ok(RlQuadrature::new(beta, grid)?.at(values.values(), t_index))
}

/// Caputo derivative of order `1 < β <= 2` at every node: `I^{2-β}` applied
/// to central second differences. Endpoint second differences are linearly
/// extrapolated; the endpoint results are not meaningful residuals.
pub fn caputo_derivative(x: &GridFn, beta: f64) -> Result<Vec<f64>> {
    if !(beta > 1.0 && beta <= 2.0) {
        return Err(Error::Domain(format!("Caputo order must lie in (1, 2], got {beta}")));
    }
    let grid = x.grid();
    let n = grid.intervals();
    if n < 3 {
        return Err(Error::Shape("need at least 3 subintervals for second differences".into()));
    }
    let v = x.values();
    let h2 = grid.step() * grid.step();
    let mut second = vec![0.0; n + 1];
    for i in 1..n {
        second[i] = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / h2;
    }
    second[0] = 2.0 * second[1] - second[2];
    second[n] = 2.0 * second[n - 1] - second[n - 2];
    if beta == 2.0 {
        return Ok(second);
    }
    Ok(RlQuadrature::new(2.0 - beta, grid)?.all(&second))
}

/// `|ᶜDᵝ x(t) - f(t, x(t))|` at an interior node.
pub fn caputo_residual(x: &GridFn, beta: f64, f: &dyn Fn(f64, f64) -> f64, t_index: usize) -> Result<f64> {
    let grid = x.grid();
    if t_index == 0 || t_index >= grid.intervals() {
        return Err(Error::Precondition(format!("node {t_index} is not interior")));
    }
    let d = caputo_derivative(x, beta)?;
    let t = grid.node(t_index);
    Ok((d[t_index] - f(t, x.values()[t_index])).abs())
}

/// Max of [`caputo_residual`] over all interior nodes.
pub fn max_caputo_residual(x: &GridFn, beta: f64, f: &dyn Fn(f64, f64) -> f64) -> Result<f64> {
    let grid = x.grid();
    let d = caputo_derivative(x, beta)?;
    Ok((1..grid.intervals())
        .map(|i| (d[i] - f(grid.node(i), x.values()[i])).abs())
        .fold(0.0, f64::max))
}

fn check_order_and_k(beta: f64, k: f64) -> Result<()> {
    if !(beta > 1.0 && beta <= 2.0) {
        return Err(Error::Domain(format!("beta must lie in (1, 2], got {beta}")));
    }
    if !(k > 0.0 && k < 1.0) {
        return Err(Error::Domain(format!("k must lie in (0, 1), got {k}")));
    }
    Ok(())
}

/// `1/Γ(β+1) + 2/(Γ(β+1)(2+k²)) + 2k^{1+β}/(Γ(β+1)(2+k²))`, the looser of the two constants.
pub fn lambda_loose(beta: f64, k: f64) -> Result<f64> {
    check_order_and_k(beta, k)?;
    let g1 = gamma(beta + 1.0);
    let denom = 2.0 + k * k;
    Ok(1.0 / g1 + 2.0 / (g1 * denom) + 2.0 * k.powf(1.0 + beta) / (g1 * denom))
}

/// `1/Γ(β+1) + 2/((2+k²)Γ(β+1)) + 2k^{β+1}/((2+k²)Γ(β+2))`: the operator's
/// Lipschitz factor per unit `L`, with the double integral evaluated exactly.
pub fn lambda_tight(beta: f64, k: f64) -> Result<f64> {
    check_order_and_k(beta, k)?;
    let g1 = gamma(beta + 1.0);
    let g2 = gamma(beta + 2.0);
    let denom = 2.0 + k * k;
    Ok(1.0 / g1 + 2.0 / (denom * g1) + 2.0 * k.powf(beta + 1.0) / (denom * g2))
}

type SourceFn = dyn Fn(f64, f64) -> f64 + Send + Sync;

/// Right-hand side `f(t, x)`.
#[derive(Clone)]
pub struct Source {
    name: String,
    params: Vec<f64>,
    f: Arc<SourceFn>,
}

impl fmt::Debug for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Source")
            .field("name", &self.name)
            .field("params", &self.params)
            .finish()
    }
}

impl Serialize for Source {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Source", 2)?;
        st.serialize_field("name", &self.name)?;
        st.serialize_field("params", &self.params)?;
        st.end()
    }
}

impl Source {
    pub const BUILTINS: [&'static str; 3] = ["constant", "sin-squared", "affine"];

    pub fn custom(name: impl Into<String>, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Source {
            name: name.into(),
            params: Vec::new(),
            f: Arc::new(f),
        }
    }

    /// `f ≡ c`.
    pub fn constant(c: f64) -> Self {
        Source {
            name: "constant".into(),
            params: vec![c],
            f: Arc::new(move |_, _| c),
        }
    }

    /// `f(t, x) = a (1 + t + sin² x)`, Lipschitz in `x` with constant `|a|`.
    pub fn sin_squared(a: f64) -> Self {
        Source {
            name: "sin-squared".into(),
            params: vec![a],
            f: Arc::new(move |t, x| a * (1.0 + t + x.sin().powi(2))),
        }
    }

    /// `f(t, x) = a + b t + c x`.
    pub fn affine(a: f64, b: f64, c: f64) -> Self {
        Source {
            name: "affine".into(),
            params: vec![a, b, c],
            f: Arc::new(move |t, x| a + b * t + c * x),
        }
    }

    /// Looks a source up by registry name.
    pub fn builtin(name: &str, params: &[f64]) -> Result<Self> {
        let want = |k: usize| -> Result<()> {
            if params.len() != k {
                return Err(Error::Precondition(format!(
                    "source {name:?} takes {k} parameter(s), got {}",
                    params.len()
                )));
            }
            Ok(())
        };
        match name {
            "constant" => want(1).map(|_| Source::constant(params[0])),
            "sin-squared" => want(1).map(|_| Source::sin_squared(params[0])),
            "affine" => want(3).map(|_| Source::affine(params[0], params[1], params[2])),
            _ => Err(Error::Precondition(format!(
                "unknown source {name:?}; known: {}",
                Source::BUILTINS.join(", ")
            ))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn eval(&self, t: f64, x: f64) -> f64 {
        (self.f)(t, x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OperatorVariant {
    /// Both boundary terms added.
    Additive,
    /// Boundary terms subtracted, so fixed points meet `x(1) = -∫₀ᵏ x`.
    GreenCorrected,
}

#[derive(Debug, Clone, Serialize)]
pub struct FbvpProblem {
    pub beta: f64,
    pub k: f64,
    pub lipschitz: f64,
    pub source: Source,
    pub variant: OperatorVariant,
    pub grid: Grid,
}

impl FbvpProblem {
    /// Checks the parameter ranges, then spot-checks `f >= 0` and the
    /// Lipschitz bound on `t` in `{0, 0.1, ..., 1}`, `x` in `{0, 0.25, ..., 4}`.
    pub fn validate(&self) -> Result<()> {
        check_order_and_k(self.beta, self.k)?;
        if !(self.lipschitz >= 0.0) || !self.lipschitz.is_finite() {
            return Err(Error::Domain(format!("Lipschitz constant must be >= 0, got {}", self.lipschitz)));
        }
        let ts: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let xs: Vec<f64> = (0..=16).map(|i| i as f64 / 4.0).collect();
        for &t in &ts {
            for &x in &xs {
                let fx = self.source.eval(t, x);
                if !(fx >= 0.0) {
                    return Err(Error::Domain(format!("f({t}, {x}) = {fx} is negative")));
                }
                for &y in &xs {
                    let lhs = (fx - self.source.eval(t, y)).abs();
                    if lhs > self.lipschitz * (x - y).abs() + 1e-12 {
                        return Err(Error::Domain(format!(
                            "|f({t}, {x}) - f({t}, {y})| = {lhs} exceeds L |x - y| with L = {}",
                            self.lipschitz
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn lambda_tight(&self) -> Result<f64> {
        lambda_tight(self.beta, self.k)
    }

    pub fn lambda_loose(&self) -> Result<f64> {
        lambda_loose(self.beta, self.k)
    }

    /// `L · lambda_tight`.
    pub fn contraction_factor(&self) -> Result<f64> {
        Ok(self.lipschitz * self.lambda_tight()?)
    }

    pub fn space(&self) -> MetricSpace {
        MetricSpace::functions(self.grid)
    }
}

/// Where the boundary-integral upper limit `k` landed on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KSnap {
    pub requested: f64,
    pub snapped: f64,
    pub node: usize,
    pub distance: f64,
}

/// The integral operator
///
/// `Tx(t) = Iᵝg(t) ± 2t/(2+k²) · [Iᵝg(1) + ∫₀ᵏ Iᵝg(s) ds]`, `g(s) = f(s, x(s))`.
///
/// The double integral is evaluated as `I^{β+1}g(k)`, which keeps the rule
/// exact on constant and linear `g`.
#[derive(Debug, Clone)]
pub struct FbvpOperator {
    problem: FbvpProblem,
    quad: RlQuadrature,
    quad_up: RlQuadrature,
    snap: KSnap,
    coeff: f64,
}

impl FbvpOperator {
    pub fn new(problem: &FbvpProblem) -> Result<Self> {
        check_order_and_k(problem.beta, problem.k)?;
        let grid = problem.grid;
        let node = grid.nearest_node(problem.k);
        let snapped = grid.node(node);
        Ok(FbvpOperator {
            problem: problem.clone(),
            quad: RlQuadrature::new(problem.beta, grid)?,
            quad_up: RlQuadrature::new(problem.beta + 1.0, grid)?,
            snap: KSnap {
                requested: problem.k,
                snapped,
                node,
                distance: (snapped - problem.k).abs(),
            },
            coeff: 2.0 / (2.0 + snapped * snapped),
        })
    }

    pub fn k_snap(&self) -> KSnap {
        self.snap
    }

    pub fn apply(&self, x: &GridFn) -> Result<GridFn> {
        let grid = self.problem.grid;
        if x.grid() != grid {
            return Err(Error::Shape(format!(
                "operator on n = {} applied to n = {}",
                grid.intervals(),
                x.grid().intervals()
            )));
        }
        let g: Vec<f64> = grid
            .nodes()
            .zip(x.values())
            .map(|(t, &v)| self.problem.source.eval(t, v))
            .collect();
        let mut out = self.quad.all(&g);
        let boundary = self.coeff * (out[grid.intervals()] + self.quad_up.at(&g, self.snap.node));
        let sign = match self.problem.variant {
            OperatorVariant::Additive => 1.0,
            OperatorVariant::GreenCorrected => -1.0,
        };
        for (i, v) in out.iter_mut().enumerate() {
            *v += sign * boundary * grid.node(i);
        }
        GridFn::new(grid, out)
    }

    /// `|x(1) + ∫₀ᵏ x ds|` with the trapezoidal rule up to the snapped `k`.
    pub fn boundary_residual(&self, x: &GridFn) -> f64 {
        let v = x.values();
        let h = self.problem.grid.step();
        let m = self.snap.node;
        let integral = if m == 0 {
            0.0
        } else {
            h * (0.5 * v[0] + v[1..m].iter().sum::<f64>() + 0.5 * v[m])
        };
        (v[v.len() - 1] + integral).abs()
    }

    pub fn as_self_map(&self) -> SelfMap {
        let op = self.clone();
        SelfMap::new(format!("fbvp-{:?}", self.problem.variant), move |x| match x {
            Point::Grid(g) => op.apply(g).map(Point::Grid),
            Point::Scalar(_) => Err(Error::Shape("operator acts on grid functions".into())),
        })
    }
}

/// Convenience wrapper around [`FbvpOperator::apply`].
pub fn apply_operator(problem: &FbvpProblem, x: &GridFn) -> Result<GridFn> {
    FbvpOperator::new(problem)?.apply(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolveStatus {
    Contracting,
    /// `L · lambda_tight >= 1`; the iteration was attempted anyway.
    ContractionWarning,
}

#[derive(Debug, Clone, Serialize)]
pub struct FbvpSolution {
    pub x: GridFn,
    pub iterations: usize,
    pub stop_reason: StopReason,
    /// `max |x - Tx|` after one extra application.
    pub fixed_point_residual: f64,
    pub boundary_residual: f64,
    pub caputo_residual: f64,
    pub lambda_loose: f64,
    pub lambda_tight: f64,
    pub contraction_factor: f64,
    pub max_gap_ratio: Option<f64>,
    pub status: SolveStatus,
    pub variant: OperatorVariant,
    pub k_snap: KSnap,
    #[serde(skip)]
    pub trace: OrbitTrace,
}

impl FbvpSolution {
    pub fn converged(&self) -> bool {
        self.stop_reason == StopReason::Converged
    }

    /// Two columns `t,x`.
    pub fn to_csv(&self) -> String {
        let grid = self.x.grid();
        let mut out = String::from("t,x\n");
        for (t, v) in grid.nodes().zip(self.x.values()) {
            out.push_str(&format!("{t},{v}\n"));
        }
        out
    }
}

/// Picard iteration of the operator from a nonnegative start.
pub fn solve_fbvp(problem: &FbvpProblem, x0: &GridFn, tol: f64, max_iter: usize) -> Result<FbvpSolution> {
    problem.validate()?;
    if x0.grid() != problem.grid {
        return Err(Error::Shape("initial guess lives on a different grid".into()));
    }
    if let Some(i) = x0.values().iter().position(|&v| v < 0.0) {
        return Err(Error::Precondition(format!("initial guess is negative at node {i}")));
    }
    let lambda_tight = problem.lambda_tight()?;
    let lambda_loose = problem.lambda_loose()?;
    let factor = problem.lipschitz * lambda_tight;
    let status = if factor < 1.0 {
        SolveStatus::Contracting
    } else {
        log::warn!("L * lambda_tight = {factor} >= 1; Picard convergence is not guaranteed");
        SolveStatus::ContractionWarning
    };

    let op = FbvpOperator::new(problem)?;
    let map = op.as_self_map();
    let space = problem.space();
    let opts = IterateOptions {
        lambda: (factor < 1.0).then_some(factor),
        max_iter,
        tol,
        divergence_gap: 1e8,
    };
    let trace = iterate(&map, &Point::Grid(x0.clone()), &WDistance::metric(space), &space, &opts)?;
    let x = trace.last().as_grid().expect("operator yields grid functions").clone();
    let tx = op.apply(&x)?;
    let source = problem.source.clone();
    let f = move |t: f64, v: f64| source.eval(t, v);
    Ok(FbvpSolution {
        fixed_point_residual: x.max_distance(&tx)?,
        boundary_residual: op.boundary_residual(&x),
        caputo_residual: max_caputo_residual(&x, problem.beta, &f)?,
        iterations: trace.steps(),
        stop_reason: trace.stop_reason,
        max_gap_ratio: trace.max_gap_ratio(),
        x,
        lambda_loose,
        lambda_tight,
        contraction_factor: factor,
        status,
        variant: problem.variant,
        k_snap: op.k_snap(),
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn problem(source: Source, lipschitz: f64, n: usize, variant: OperatorVariant) -> FbvpProblem {
        FbvpProblem {
            beta: 1.5,
            k: 0.5,
            lipschitz,
            source,
            variant,
            grid: Grid::new(n).unwrap(),
        }
    }

    #[test]
    fn gamma_classical_values() {
        assert_relative_eq!(gamma_fn(1.0).unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(gamma_fn(0.5).unwrap(), PI.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(gamma_fn(2.5).unwrap(), 0.75 * PI.sqrt(), max_relative = 1e-14);
        assert!(gamma_fn(0.0).is_err());
        assert!(gamma_fn(-1.5).is_err());
        assert!(gamma_fn(f64::NAN).is_err());
    }

    #[test]
    fn gamma_factorials() {
        let mut fact = 1.0f64;
        for n in 1..=30 {
            assert_relative_eq!(gamma_fn(n as f64).unwrap(), fact, max_relative = 1e-12);
            fact *= n as f64;
        }
    }

    #[test]
    fn gamma_half_integers() {
        // Γ(n + 1/2) = (2n)! √π / (4^n n!)
        let mut g = PI.sqrt();
        for n in 0..29 {
            let z = n as f64 + 0.5;
            assert_relative_eq!(gamma_fn(z).unwrap(), g, max_relative = 1e-12);
            g *= z;
        }
    }

    #[test]
    fn rl_exact_on_constants_and_linears() {
        for &beta in &[1.1, 1.5, 2.0] {
            let grid = Grid::new(32).unwrap();
            let one = GridFn::constant(grid, 1.0).unwrap();
            let lin = GridFn::from_fn(grid, |t| t).unwrap();
            for j in 0..grid.len() {
                let t = grid.node(j);
                let exact1 = t.powf(beta) / gamma(beta + 1.0);
                let exact_lin = t.powf(beta + 1.0) / gamma(beta + 2.0);
                assert!((rl_integral(&one, beta, j).unwrap() - exact1).abs() <= 1e-10);
                assert!((rl_integral(&lin, beta, j).unwrap() - exact_lin).abs() <= 1e-10);
            }
        }
        let lin = GridFn::from_fn(Grid::new(16).unwrap(), |t| t).unwrap();
        assert!((rl_integral(&lin, 1.5, 16).unwrap() - 0.300_901_111).abs() < 1e-9);
    }

    #[test]
    fn rl_second_order_on_square() {
        let exact = 2.0 / gamma(4.5);
        let err = |n: usize| {
            let g = GridFn::from_fn(Grid::new(n).unwrap(), |t| t * t).unwrap();
            (rl_integral(&g, 1.5, n).unwrap() - exact).abs()
        };
        let ratio = err(64) / err(128);
        assert!((ratio - 4.0).abs() <= 0.6, "ratio {ratio}");
    }

    #[test]
    fn rl_rejects_bad_input() {
        let g = GridFn::constant(Grid::new(4).unwrap(), 1.0).unwrap();
        assert!(rl_integral(&g, 0.0, 1).is_err());
        assert!(rl_integral(&g, 1.5, 5).is_err());
    }

    #[test]
    fn caputo_power_rules() {
        let grid = Grid::new(64).unwrap();
        let sq = GridFn::from_fn(grid, |t| t * t).unwrap();
        let rule = |t: f64, _x: f64| 2.0 * t.sqrt() / gamma(1.5);
        for i in 1..64 {
            assert!(caputo_residual(&sq, 1.5, &rule, i).unwrap() <= 1e-10);
        }
        let lin = GridFn::from_fn(grid, |t| t).unwrap();
        let zero = |_: f64, _: f64| 0.0;
        assert!(max_caputo_residual(&lin, 1.7, &zero).unwrap() <= 1e-9);
        assert!(caputo_residual(&lin, 1.7, &zero, 0).is_err());
        assert!(caputo_residual(&lin, 1.7, &zero, 64).is_err());
        assert!(caputo_derivative(&lin, 0.5).is_err());
    }

    #[test]
    fn lambda_constants() {
        assert!((lambda_loose(2.0, 0.5).unwrap() - 1.0).abs() < 1e-14);
        // 1/2 + 2/4.5 + 0.25/13.5
        assert!((lambda_tight(2.0, 0.5).unwrap() - (0.5 + 2.0 / 4.5 + 0.25 / 13.5)).abs() < 1e-14);
        assert!((lambda_loose(1.5, 0.5).unwrap() - 1.53913).abs() < 1e-5);
        assert!((lambda_tight(1.5, 0.5).unwrap() - 1.468_204).abs() < 1e-6);
        // k -> 0: both tend to 2 / Γ(β + 1)
        for beta in [1.2, 1.5, 2.0] {
            let limit = 2.0 / gamma(beta + 1.0);
            assert!((lambda_loose(beta, 1e-9).unwrap() - limit).abs() < 1e-8);
            assert!((lambda_tight(beta, 1e-9).unwrap() - limit).abs() < 1e-8);
        }
        assert!(lambda_loose(1.0, 0.5).is_err());
        assert!(lambda_tight(1.5, 1.0).is_err());
        assert!(lambda_tight(2.5, 0.5).is_err());
    }

    #[test]
    fn operator_on_constant_source_matches_closed_form() {
        let c = 0.7;
        let p = problem(Source::constant(c), 0.0, 64, OperatorVariant::Additive);
        let x = GridFn::from_fn(p.grid, |t| t.sin()).unwrap();
        let tx = apply_operator(&p, &x).unwrap();
        let (b, k) = (p.beta, p.k);
        let closed = |t: f64| {
            c * (t.powf(b) / gamma(b + 1.0)
                + 2.0 * t / ((2.0 + k * k) * gamma(b + 1.0))
                + 2.0 * t * k.powf(b + 1.0) / ((2.0 + k * k) * gamma(b + 2.0)))
        };
        for (t, v) in p.grid.nodes().zip(tx.values()) {
            assert!((v - closed(t)).abs() <= 1e-10, "t = {t}");
        }
        assert_eq!(tx.values()[0], 0.0);
    }

    #[test]
    fn zero_source_gives_zero() {
        let p = problem(Source::constant(0.0), 0.0, 16, OperatorVariant::GreenCorrected);
        let x = GridFn::from_fn(p.grid, |t| 3.0 * t).unwrap();
        assert!(apply_operator(&p, &x).unwrap().values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn operator_rejects_foreign_grid() {
        let p = problem(Source::constant(1.0), 0.0, 16, OperatorVariant::Additive);
        let x = GridFn::constant(Grid::new(8).unwrap(), 0.0).unwrap();
        assert!(matches!(apply_operator(&p, &x), Err(Error::Shape(_))));
    }

    #[test]
    fn k_snaps_to_nearest_node() {
        let mut p = problem(Source::constant(1.0), 0.0, 10, OperatorVariant::Additive);
        p.k = 0.33;
        let snap = FbvpOperator::new(&p).unwrap().k_snap();
        assert_eq!(snap.node, 3);
        assert!((snap.distance - 0.03).abs() < 1e-12);
    }

    #[test]
    fn constant_source_solves_in_two_steps() {
        let p = problem(Source::constant(0.4), 0.0, 64, OperatorVariant::Additive);
        let sol = solve_fbvp(&p, &GridFn::constant(p.grid, 0.0).unwrap(), 1e-8, 100).unwrap();
        assert_eq!(sol.iterations, 2);
        assert!(sol.converged());
        assert_eq!(sol.fixed_point_residual, 0.0);
        assert_eq!(sol.x.values()[0], 0.0);
    }

    #[test]
    fn green_variant_meets_boundary_condition() {
        let p = problem(Source::sin_squared(0.2), 0.2, 128, OperatorVariant::GreenCorrected);
        let sol = solve_fbvp(&p, &GridFn::constant(p.grid, 0.0).unwrap(), 1e-10, 200).unwrap();
        assert!(sol.converged());
        assert!(sol.boundary_residual < 1e-4, "{}", sol.boundary_residual);
        let p = problem(Source::sin_squared(0.2), 0.2, 128, OperatorVariant::Additive);
        let sol = solve_fbvp(&p, &GridFn::constant(p.grid, 0.0).unwrap(), 1e-10, 200).unwrap();
        // the additive sign pattern cannot satisfy it for a positive source
        assert!(sol.boundary_residual > 0.1);
    }

    #[test]
    fn strong_source_warns() {
        let p = problem(Source::affine(2.0, 0.0, 2.0), 2.0, 32, OperatorVariant::Additive);
        assert!(p.contraction_factor().unwrap() > 1.0);
        match solve_fbvp(&p, &GridFn::constant(p.grid, 0.0).unwrap(), 1e-8, 500) {
            Ok(sol) => assert_eq!(sol.status, SolveStatus::ContractionWarning),
            Err(Error::Diverged { .. }) => {}
            Err(e) => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn validation() {
        let neg = problem(Source::affine(-1.0, 0.0, 0.0), 0.0, 8, OperatorVariant::Additive);
        assert!(neg.validate().is_err());
        let lip = problem(Source::sin_squared(0.5), 0.1, 8, OperatorVariant::Additive);
        assert!(lip.validate().is_err());
        assert!(problem(Source::sin_squared(0.5), 0.5, 8, OperatorVariant::Additive).validate().is_ok());
        let mut bad = problem(Source::constant(1.0), 0.0, 8, OperatorVariant::Additive);
        bad.beta = 0.9;
        assert!(bad.validate().is_err());
        assert!(Source::builtin("sin-squared", &[0.2]).is_ok());
        assert!(Source::builtin("affine", &[0.2]).is_err());
        assert!(Source::builtin("cubic", &[]).is_err());
    }

    #[test]
    fn negative_start_rejected() {
        let p = problem(Source::constant(1.0), 0.0, 8, OperatorVariant::Additive);
        let x0 = GridFn::constant(p.grid, -1.0).unwrap();
        assert!(matches!(solve_fbvp(&p, &x0, 1e-8, 10), Err(Error::Precondition(_))));
    }
}
