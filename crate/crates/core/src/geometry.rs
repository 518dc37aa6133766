//! Geometry of lp and polyhedral setups: dual exponents, regularity
//! constants of the dual norm, overflow-safe norms, gradients of the squared
//! smooth norm, linear minimization oracles, and the uniform convexity
//! estimate used by the risk-to-distance certificates.
//!
//! Exponents are `f64` with `f64::INFINITY` as the max-norm sentinel. All
//! logarithms here are natural.

use serde::Serialize;
use std::f64::consts::E;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("norm exponent must satisfy p >= 1, got {0}")]
    InvalidExponent(f64),
    #[error("lq regularity covers 1 < p <= 2; p = 1 is served by the polyhedral route")]
    PolyhedralExponent,
    #[error("lq regularity covers 1 < p <= 2; for p = {0} > 2 use norm_conversion_factors")]
    LargeExponent(f64),
    #[error("conversion factors apply to p >= 2, got {0}")]
    ConversionExponent(f64),
    #[error("dimension must be at least {min}, got {got}")]
    BadDimension { min: usize, got: usize },
    #[error("polytope needs at least one vertex")]
    EmptyPolytope,
    #[error("vertex count must be at least 2 for polyhedral regularity, got {0}")]
    TooFewVertices(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("{what} must be positive, got {got}")]
    NonPositive { what: &'static str, got: f64 },
    #[error("point outside the unit lp ball: norm = {0}")]
    OutsideUnitBall(f64),
    #[error("smoothing exponent must satisfy r >= 2, got {0}")]
    InvalidSmoothingExponent(f64),
}

/// Constants of an lp setup with 1 < p <= 2: the dual exponent q, the
/// regularity constant kappa of the dual lq norm, and the smoothing exponent
/// r whose squared norm is (r - 1)-smooth and stays within a factor
/// kappa / kappa_plus of the squared lq norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpaceSpec {
    pub p: f64,
    pub q: f64,
    pub d: usize,
    pub kappa: f64,
    pub r: f64,
    pub kappa_plus: f64,
}

/// Regularity constants of a polyhedral norm whose unit ball has K vertices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolyRegularity {
    pub kappa: f64,
    pub smoothing_exponent: f64,
    pub kappa_plus: f64,
}

/// Dual exponent: 1/p + 1/q = 1, with the pair (1, infinity) at the ends.
pub fn dual_exponent(p: f64) -> Result<f64, GeometryError> {
    if p.is_nan() || p < 1.0 {
        return Err(GeometryError::InvalidExponent(p));
    }
    if p == 1.0 {
        Ok(f64::INFINITY)
    } else if p.is_infinite() {
        Ok(1.0)
    } else {
        Ok(p / (p - 1.0))
    }
}

/// Regularity constants for the lp setup, 1 < p <= 2, d >= 2:
/// kappa = min(q - 1, 2e ln d), r = min(q, 2 ln d + 1), kappa_plus = r - 1.
pub fn regularity(p: f64, d: usize) -> Result<SpaceSpec, GeometryError> {
    if p.is_nan() || p < 1.0 {
        return Err(GeometryError::InvalidExponent(p));
    }
    if p == 1.0 {
        return Err(GeometryError::PolyhedralExponent);
    }
    if p > 2.0 {
        return Err(GeometryError::LargeExponent(p));
    }
    if d < 2 {
        return Err(GeometryError::BadDimension { min: 2, got: d });
    }
    let q = p / (p - 1.0);
    let ln_d = (d as f64).ln();
    let kappa = (q - 1.0).min(2.0 * E * ln_d);
    let r = q.min(2.0 * ln_d + 1.0);
    Ok(SpaceSpec { p, q, d, kappa, r, kappa_plus: r - 1.0 })
}

/// Regularity constants of a polyhedral norm with K >= 2 vertices:
/// kappa = 2e ln K with smoothing exponent 2 ln K + 1.
pub fn polyhedral_regularity(k: usize) -> Result<PolyRegularity, GeometryError> {
    if k < 2 {
        return Err(GeometryError::TooFewVertices(k));
    }
    let ln_k = (k as f64).ln();
    let qs = 2.0 * ln_k + 1.0;
    Ok(PolyRegularity { kappa: 2.0 * E * ln_k, smoothing_exponent: qs, kappa_plus: qs - 1.0 })
}

/// lp norm with rescaling by the max entry so that extreme magnitudes do not
/// overflow or underflow the p-th powers. NaN entries are rejected.
pub fn lp_norm(x: &[f64], p: f64) -> Result<f64, GeometryError> {
    if p.is_nan() || p < 1.0 {
        return Err(GeometryError::InvalidExponent(p));
    }
    let mut max = 0.0f64;
    for &v in x {
        if v.is_nan() {
            return Err(GeometryError::NonFinite("lp_norm input"));
        }
        max = max.max(v.abs());
    }
    if max == 0.0 {
        return Ok(0.0);
    }
    if max.is_infinite() || p.is_infinite() {
        return Ok(max);
    }
    if p == 1.0 {
        return Ok(x.iter().map(|v| v.abs()).sum());
    }
    let sum: f64 = x.iter().map(|v| (v.abs() / max).powf(p)).sum();
    Ok(max * sum.powf(1.0 / p))
}

/// Gradient of the squared smooth norm x -> ||x||_r^2 for r >= 2:
/// component j is 2 ||x||_r (|x_j| / ||x||_r)^(r-1) sign(x_j), and the zero
/// vector maps to zero. The ratio form keeps the powers in [0, 1].
pub fn smooth_norm_grad_sq(x: &[f64], r: f64) -> Result<Vec<f64>, GeometryError> {
    if r.is_nan() || r < 2.0 || r.is_infinite() {
        return Err(GeometryError::InvalidSmoothingExponent(r));
    }
    for &v in x {
        if !v.is_finite() {
            return Err(GeometryError::NonFinite("smooth_norm_grad_sq input"));
        }
    }
    let nrm = lp_norm(x, r)?;
    if nrm == 0.0 {
        return Ok(vec![0.0; x.len()]);
    }
    Ok(x.iter()
        .map(|&v| {
            if v == 0.0 {
                0.0
            } else {
                2.0 * nrm * (v.abs() / nrm).powf(r - 1.0) * v.signum()
            }
        })
        .collect())
}

/// Linear minimization over the lp ball of the given radius:
/// argmin ||v||_p <= radius of <g, v>, attaining -radius * ||g||_q.
///
/// For p > 1 the components are computed in log space,
/// exp((q-1)(ln|g_j| - ln||g||_q)), which survives the huge dual exponents
/// that arise as p -> 1. For p = 1 the output is the signed coordinate
/// vertex of the largest |g_j|, lowest index on ties. g = 0 maps to 0.
pub fn lmo_lp_ball(g: &[f64], p: f64, radius: f64) -> Result<Vec<f64>, GeometryError> {
    if p.is_nan() || p < 1.0 {
        return Err(GeometryError::InvalidExponent(p));
    }
    if !radius.is_finite() || radius <= 0.0 {
        return Err(GeometryError::NonPositive { what: "radius", got: radius });
    }
    for &v in g {
        if !v.is_finite() {
            return Err(GeometryError::NonFinite("lmo gradient"));
        }
    }
    if g.iter().all(|&v| v == 0.0) {
        return Ok(vec![0.0; g.len()]);
    }
    if p == 1.0 {
        let mut best = 0usize;
        for (j, &v) in g.iter().enumerate() {
            if v.abs() > g[best].abs() {
                best = j;
            }
        }
        let mut out = vec![0.0; g.len()];
        out[best] = -radius * g[best].signum();
        return Ok(out);
    }
    if p.is_infinite() {
        return Ok(g.iter().map(|&v| if v == 0.0 { 0.0 } else { -radius * v.signum() }).collect());
    }
    let q = p / (p - 1.0);
    let ln_nq = lp_norm(g, q)?.ln();
    Ok(g.iter()
        .map(|&v| {
            if v == 0.0 {
                0.0
            } else {
                -radius * v.signum() * ((q - 1.0) * (v.abs().ln() - ln_nq)).exp()
            }
        })
        .collect())
}

/// Uniform convexity gap of the lp norm for 1 < p <= 2 on the unit ball:
/// 1 - (p-1)/8 * ||x - y||_p^2 - ||(x + y)/2||_p, which is nonnegative up
/// to rounding for feasible x, y.
pub fn uniform_convexity_gap(x: &[f64], y: &[f64], p: f64) -> Result<f64, GeometryError> {
    if p.is_nan() || p <= 1.0 || p > 2.0 {
        return Err(GeometryError::InvalidExponent(p));
    }
    if x.len() != y.len() {
        return Err(GeometryError::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    const BALL_TOL: f64 = 1e-12;
    let nx = lp_norm(x, p)?;
    if nx > 1.0 + BALL_TOL {
        return Err(GeometryError::OutsideUnitBall(nx));
    }
    let ny = lp_norm(y, p)?;
    if ny > 1.0 + BALL_TOL {
        return Err(GeometryError::OutsideUnitBall(ny));
    }
    let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let mid: Vec<f64> = x.iter().zip(y).map(|(a, b)| 0.5 * (a + b)).collect();
    Ok(1.0 - (p - 1.0) / 8.0 * lp_norm(&diff, p)?.powi(2) - lp_norm(&mid, p)?)
}

/// Reduction factors for solving an lp problem, p >= 2, with a Euclidean
/// method: distances inflate by d^(1/2 - 1/p) and smoothness carries over
/// unchanged. Returns (distance_factor, smoothness_factor).
pub fn norm_conversion_factors(p: f64, d: usize) -> Result<(f64, f64), GeometryError> {
    if p.is_nan() || p < 2.0 {
        return Err(GeometryError::ConversionExponent(p));
    }
    if d < 1 {
        return Err(GeometryError::BadDimension { min: 1, got: d });
    }
    let exponent = if p.is_infinite() { 0.5 } else { 0.5 - 1.0 / p };
    Ok(((d as f64).powf(exponent), 1.0))
}

/// Polytope given by an explicit vertex list, with the diameter measured in
/// the ambient lp norm. A single vertex is allowed (a degenerate point set);
/// polyhedral regularity additionally requires K >= 2.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Polytope {
    vertices: Vec<Vec<f64>>,
    ambient_p: f64,
    diameter: f64,
}

impl Polytope {
    pub fn new(vertices: Vec<Vec<f64>>, ambient_p: f64) -> Result<Self, GeometryError> {
        if vertices.is_empty() {
            return Err(GeometryError::EmptyPolytope);
        }
        if ambient_p.is_nan() || ambient_p < 1.0 {
            return Err(GeometryError::InvalidExponent(ambient_p));
        }
        let d = vertices[0].len();
        for v in &vertices {
            if v.len() != d {
                return Err(GeometryError::DimensionMismatch { expected: d, got: v.len() });
            }
            if v.iter().any(|c| !c.is_finite()) {
                return Err(GeometryError::NonFinite("polytope vertex"));
            }
        }
        let mut diameter = 0.0f64;
        let mut diff = vec![0.0; d];
        for i in 0..vertices.len() {
            for j in (i + 1)..vertices.len() {
                for (k, dv) in diff.iter_mut().enumerate() {
                    *dv = vertices[i][k] - vertices[j][k];
                }
                diameter = diameter.max(lp_norm(&diff, ambient_p)?);
            }
        }
        Ok(Self { vertices, ambient_p, diameter })
    }

    /// The l1 ball of the given radius as a cross-polytope with 2d vertices.
    pub fn l1_ball(d: usize, radius: f64) -> Result<Self, GeometryError> {
        if d == 0 {
            return Err(GeometryError::BadDimension { min: 1, got: 0 });
        }
        if !radius.is_finite() || radius <= 0.0 {
            return Err(GeometryError::NonPositive { what: "radius", got: radius });
        }
        let mut vertices = Vec::with_capacity(2 * d);
        for j in 0..d {
            for sign in [1.0, -1.0] {
                let mut v = vec![0.0; d];
                v[j] = sign * radius;
                vertices.push(v);
            }
        }
        Self::new(vertices, 1.0)
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].len()
    }

    pub fn ambient_p(&self) -> f64 {
        self.ambient_p
    }

    /// Max pairwise vertex distance in the ambient norm.
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Largest ambient norm over the vertices.
    pub fn vertex_norm_bound(&self) -> f64 {
        self.vertices
            .iter()
            .map(|v| lp_norm(v, self.ambient_p).expect("vertices validated finite"))
            .fold(0.0, f64::max)
    }
}

/// Exhaustive linear minimization over the vertex list: the minimizing
/// vertex of <g, v>, lowest index on ties. Returns the index and the vertex.
pub fn lmo_polytope<'a>(g: &[f64], poly: &'a Polytope) -> Result<(usize, &'a [f64]), GeometryError> {
    if g.len() != poly.dim() {
        return Err(GeometryError::DimensionMismatch { expected: poly.dim(), got: g.len() });
    }
    for &v in g {
        if !v.is_finite() {
            return Err(GeometryError::NonFinite("lmo gradient"));
        }
    }
    let mut best = 0usize;
    let mut best_score = f64::INFINITY;
    for (i, v) in poly.vertices.iter().enumerate() {
        let score: f64 = v.iter().zip(g).map(|(a, b)| a * b).sum();
        if score < best_score {
            best = i;
            best_score = score;
        }
    }
    Ok((best, &poly.vertices[best]))
}

/// A feasible set a Frank-Wolfe step can minimize over: an lp ball with a
/// closed-form oracle or an explicit polytope scanned vertex by vertex.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum FeasibleSet {
    LpBall { p: f64, radius: f64 },
    Polytope(Polytope),
}

impl FeasibleSet {
    pub fn lp_ball(p: f64, radius: f64) -> Result<Self, GeometryError> {
        if p.is_nan() || p < 1.0 {
            return Err(GeometryError::InvalidExponent(p));
        }
        if !radius.is_finite() || radius <= 0.0 {
            return Err(GeometryError::NonPositive { what: "radius", got: radius });
        }
        Ok(Self::LpBall { p, radius })
    }

    pub fn lmo(&self, g: &[f64]) -> Result<Vec<f64>, GeometryError> {
        match self {
            Self::LpBall { p, radius } => lmo_lp_ball(g, *p, *radius),
            Self::Polytope(poly) => lmo_polytope(g, poly).map(|(_, v)| v.to_vec()),
        }
    }

    /// Diameter in the set's own norm: 2 * radius for the ball, the max
    /// pairwise vertex distance for the polytope.
    pub fn diameter(&self) -> f64 {
        match self {
            Self::LpBall { radius, .. } => 2.0 * radius,
            Self::Polytope(poly) => poly.diameter(),
        }
    }

    /// Membership up to `tol`. For polytopes this is the ambient-norm
    /// necessary condition; iterates built as convex combinations of
    /// vertices satisfy exact membership by construction.
    pub fn contains(&self, x: &[f64], tol: f64) -> Result<bool, GeometryError> {
        match self {
            Self::LpBall { p, radius } => {
                let n = lp_norm(x, *p)?;
                Ok(n <= radius * (1.0 + tol) + tol)
            }
            Self::Polytope(poly) => {
                if x.len() != poly.dim() {
                    return Err(GeometryError::DimensionMismatch { expected: poly.dim(), got: x.len() });
                }
                let n = lp_norm(x, poly.ambient_p())?;
                Ok(n <= poly.vertex_norm_bound() * (1.0 + tol) + tol)
            }
        }
    }

    /// Canonical feasible starting point: the origin for balls, the first
    /// vertex for polytopes.
    pub fn default_start(&self, d: usize) -> Vec<f64> {
        match self {
            Self::LpBall { .. } => vec![0.0; d],
            Self::Polytope(poly) => poly.vertices[0].clone(),
        }
    }
}


#[cfg(test)]
mod property_tests {
    use super::*;
    use proptest::prelude::*;

    fn finite_vec(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-1e3..1e3f64, 1..max_len)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn regularity_constants_are_consistent(p in 1.0001..2.0f64, d in 2usize..1_000_000) {
            let s = regularity(p, d).unwrap();
            prop_assert!(s.kappa_plus == s.r - 1.0);
            prop_assert!(s.kappa_plus >= 1.0 - 1e-12);
            prop_assert!(s.kappa_plus <= s.kappa + 1e-12);
            prop_assert!(s.kappa <= s.q - 1.0 + 1e-9);
            prop_assert!(s.kappa <= 2.0 * E * (d as f64).ln() + 1e-9);
            prop_assert!(s.r >= 2.0);
        }

        #[test]
        fn polyhedral_kappa_grows_with_k(k in 2usize..100_000) {
            let a = polyhedral_regularity(k).unwrap();
            let b = polyhedral_regularity(k + 1).unwrap();
            prop_assert!(b.kappa > a.kappa);
            prop_assert!(a.kappa_plus <= a.kappa);
        }

        #[test]
        fn lp_norm_triangle_and_homogeneity(x in finite_vec(12), c in -50.0..50.0f64, p in prop::sample::select(vec![1.0, 1.5, 2.0, 3.0, f64::INFINITY])) {
            let y: Vec<f64> = x.iter().rev().cloned().collect();
            let nx = lp_norm(&x, p).unwrap();
            let ny = lp_norm(&y, p).unwrap();
            let sum: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
            prop_assert!(lp_norm(&sum, p).unwrap() <= nx + ny + 1e-9 * (1.0 + nx + ny));
            let scaled: Vec<f64> = x.iter().map(|v| c * v).collect();
            let ns = lp_norm(&scaled, p).unwrap();
            prop_assert!((ns - c.abs() * nx).abs() <= 1e-9 * (1.0 + ns));
        }

        #[test]
        fn lp_norms_decrease_in_p(x in finite_vec(12)) {
            let n1 = lp_norm(&x, 1.0).unwrap();
            let n15 = lp_norm(&x, 1.5).unwrap();
            let n2 = lp_norm(&x, 2.0).unwrap();
            let ninf = lp_norm(&x, f64::INFINITY).unwrap();
            prop_assert!(n1 + 1e-12 >= n15 && n15 + 1e-12 >= n2 && n2 + 1e-12 >= ninf);
        }

        #[test]
        fn lmo_is_feasible_and_optimal(g in finite_vec(10), p in prop::sample::select(vec![1.0, 1.2, 1.5, 2.0]), radius in 0.1..10.0f64) {
            let v = lmo_lp_ball(&g, p, radius).unwrap();
            prop_assert!(lp_norm(&v, p).unwrap() <= radius * (1.0 + 1e-9));
            let q = dual_exponent(p).unwrap();
            let attained: f64 = g.iter().zip(&v).map(|(a, b)| a * b).sum();
            let want = -radius * lp_norm(&g, q).unwrap();
            prop_assert!((attained - want).abs() <= 1e-9 * (1.0 + want.abs()));
        }
    }
}
