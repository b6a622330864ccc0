//! Numeric primitives shared by the analytic modules: standard normal
//! density/CDF/quantile, Gaussian-weighted quadrature in one and two
//! dimensions, and scalar bisection.
//!
//! Quadrature is Gauss-Legendre on the truncated domain
//! `[-truncation_bound, truncation_bound]` with the normal density folded
//! into the weights. The integrands arising here (products and powers of
//! `Φ` terms against `φ`) are entire functions, so a 128-node rule sits
//! far past the convergence plateau.

use crate::error::{Error, Result};
use statrs::function::erf;
use std::f64::consts::{PI, SQRT_2};

/// Standard normal density `φ(x)`.
pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Standard normal CDF `Φ(x)`, absolute error below 1e-12.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Standard normal quantile `Φ⁻¹(p)`, refined to near machine precision
/// with one Newton step on the CDF.
pub fn std_normal_quantile(p: f64) -> f64 {
    let q = -SQRT_2 * erf::erfc_inv(2.0 * p);
    let d = std_normal_pdf(q);
    if d > 0.0 {
        q - (std_normal_cdf(q) - p) / d
    } else {
        q
    }
}

/// Node count and truncation for the Gaussian-weighted rules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Nodes per axis.
    pub node_count: usize,
    /// Integration limits are `±truncation_bound`; normal mass beyond
    /// `±8` is under 1.3e-15.
    pub truncation_bound: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            node_count: 128,
            truncation_bound: 8.0,
        }
    }
}

impl QuadratureSpec {
    pub fn new(node_count: usize, truncation_bound: f64) -> Result<Self> {
        if node_count < 16 {
            return Err(Error::InvalidParams {
                field: "node_count",
                message: format!("must be at least 16, got {node_count}"),
            });
        }
        if !truncation_bound.is_finite() || truncation_bound < 8.0 {
            return Err(Error::InvalidParams {
                field: "truncation_bound",
                message: format!("must be at least 8, got {truncation_bound}"),
            });
        }
        Ok(Self {
            node_count,
            truncation_bound,
        })
    }
}

/// Gauss-Legendre abscissae and weights, rescaled to the truncated domain
/// with `φ` absorbed into the weights, so that
/// `Σ wᵢ f(xᵢ) ≈ ∫ f(x) φ(x) dx`.
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(spec: &QuadratureSpec) -> Self {
        let n = spec.node_count;
        let b = spec.truncation_bound;
        let (t, w) = legendre_nodes(n);
        let nodes: Vec<f64> = t.iter().map(|&ti| b * ti).collect();
        let weights: Vec<f64> = w
            .iter()
            .zip(&nodes)
            .map(|(&wi, &xi)| b * wi * std_normal_pdf(xi))
            .collect();
        Self { nodes, weights }
    }
}

/// Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// three-term recurrence.
fn legendre_nodes(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess for the i-th root.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = x;
            for j in 2..=n {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `∫ f(x) φ(x) dx` over the truncated domain.
pub fn gauss_weighted_integral_1d<F>(f: F, spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let rule = GaussRule::new(spec);
    let mut acc = 0.0;
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let v = f(x);
        if !v.is_finite() {
            return Err(Error::InvalidIntegrand { at: x });
        }
        acc += w * v;
    }
    Ok(acc)
}

/// `∬ f(a, b) φ(a) φ(b) da db` via the tensor product of the 1-D rule.
pub fn gauss_weighted_integral_2d<F>(f: F, spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
{
    let rule = GaussRule::new(spec);
    let mut acc = 0.0;
    for (&a, &wa) in rule.nodes.iter().zip(&rule.weights) {
        let mut inner = 0.0;
        for (&b, &wb) in rule.nodes.iter().zip(&rule.weights) {
            let v = f(a, b);
            if !v.is_finite() {
                return Err(Error::InvalidIntegrand { at: a });
            }
            inner += wb * v;
        }
        acc += wa * inner;
    }
    Ok(acc)
}

/// Bracket and tolerances for [`bisect`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BisectionSpec {
    pub lo: f64,
    pub hi: f64,
    pub x_tolerance: f64,
    pub max_iterations: u32,
}

impl BisectionSpec {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            x_tolerance: 1e-6,
            max_iterations: 200,
        }
    }
}

/// Root of a sign-changing `g` on `[lo, hi]` to within `x_tolerance`.
pub fn bisect<G>(g: G, spec: &BisectionSpec) -> Result<f64>
where
    G: Fn(f64) -> f64,
{
    if spec.lo.is_nan()
        || spec.hi.is_nan()
        || spec.lo >= spec.hi
        || spec.x_tolerance.is_nan()
        || spec.x_tolerance <= 0.0
    {
        return Err(Error::InvalidParams {
            field: "bisection",
            message: format!("need lo < hi and x_tolerance > 0, got [{}, {}]", spec.lo, spec.hi),
        });
    }
    let (mut lo, mut hi) = (spec.lo, spec.hi);
    let mut g_lo = g(lo);
    let g_hi = g(hi);
    if g_lo == 0.0 {
        return Ok(lo);
    }
    if g_hi == 0.0 {
        return Ok(hi);
    }
    if g_lo.signum() == g_hi.signum() {
        return Err(Error::Bracket { lo, hi });
    }
    for _ in 0..spec.max_iterations {
        let mid = 0.5 * (lo + hi);
        if 0.5 * (hi - lo) <= spec.x_tolerance {
            return Ok(mid);
        }
        let g_mid = g(mid);
        if g_mid == 0.0 {
            return Ok(mid);
        }
        if g_mid.signum() == g_lo.signum() {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Convergence {
        max_iterations: spec.max_iterations,
    })
}
