//! Loss families with certified constants, synthetic data, and analytic
//! ground truth.
//!
//! Two losses are registered. The linear loss `f(x, z) = -<x, z>` over
//! the cube alphabet `{-d^{-1/q}, d^{-1/q}}^d` has L0 = 1, L1 = 0 and a
//! closed-form constrained minimizer, which makes excess risk exactly
//! computable. The least-squares loss `f(x, (a, b)) = (<a, x> - b)^2/2`
//! is a smooth companion with L1 > 0 so the variance-reduction path of
//! the solvers is exercised; labels are generated by a feasible
//! reference point, so its population minimum is exactly 0 at that
//! point.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{dual_exponent, lp_norm, FeasibleSet};
use crate::util::fmt_f64;

/// Errors from problem construction, data generation, and risk oracles.
#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("dimension must be at least 1")]
    BadDimension,
    #[error("bias entries must lie in [-1, 1], got {0}")]
    InvalidBias(f64),
    #[error("{what} must be positive and finite, got {got}")]
    NonPositive { what: &'static str, got: f64 },
    #[error("the population minimum has no registered closed form for this instance")]
    UnsupportedCombination,
    #[error("sample {row} violates the declared sample-space bound")]
    SampleOutOfRange { row: usize },
    #[error("risk went negative beyond tolerance ({got}): minimizer oracle is inconsistent")]
    InternalInconsistency { got: f64 },
    #[error("dataset file is malformed: {0}")]
    BadFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Geometry(#[from] crate::geometry::GeometryError),
}

/// Which loss family a problem instance uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossKind {
    Linear,
    LeastSquares,
}

/// Row layout of a dataset: plain sample vectors, or feature vectors
/// with a trailing label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleEncoding {
    Plain,
    FeatureLabel,
}

impl SampleEncoding {
    fn tag(self) -> u64 {
        match self {
            SampleEncoding::Plain => 0,
            SampleEncoding::FeatureLabel => 1,
        }
    }

    fn from_tag(tag: u64) -> Result<Self, ProblemError> {
        match tag {
            0 => Ok(SampleEncoding::Plain),
            1 => Ok(SampleEncoding::FeatureLabel),
            other => Err(ProblemError::BadFormat(format!("unknown encoding tag {other}"))),
        }
    }

    fn row_width(self, d: usize) -> usize {
        match self {
            SampleEncoding::Plain => d,
            SampleEncoding::FeatureLabel => d + 1,
        }
    }
}

/// An ordered set of samples stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    d: usize,
    encoding: SampleEncoding,
    data: Vec<f64>,
}

impl Dataset {
    pub fn from_rows(
        d: usize,
        encoding: SampleEncoding,
        data: Vec<f64>,
    ) -> Result<Self, ProblemError> {
        if d == 0 {
            return Err(ProblemError::BadDimension);
        }
        let w = encoding.row_width(d);
        if !data.len().is_multiple_of(w) {
            return Err(ProblemError::BadFormat(format!(
                "{} values do not form rows of width {w}",
                data.len()
            )));
        }
        Ok(Self { d, encoding, data })
    }

    pub fn n(&self) -> usize {
        self.data.len() / self.encoding.row_width(self.d)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn encoding(&self) -> SampleEncoding {
        self.encoding
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.encoding.row_width(self.d);
        &self.data[i * w..(i + 1) * w]
    }

    /// Binary layout: three little-endian u64 header words (n, d,
    /// encoding tag) followed by the row-major body as little-endian
    /// f64.
    pub fn write_binary(&self, path: &Path) -> Result<(), ProblemError> {
        let mut out = BufWriter::new(File::create(path)?);
        out.write_all(&(self.n() as u64).to_le_bytes())?;
        out.write_all(&(self.d as u64).to_le_bytes())?;
        out.write_all(&self.encoding.tag().to_le_bytes())?;
        for v in &self.data {
            out.write_all(&v.to_le_bytes())?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_binary(path: &Path) -> Result<Self, ProblemError> {
        let mut input = BufReader::new(File::open(path)?);
        let mut word = [0u8; 8];
        let mut read_u64 = |input: &mut BufReader<File>| -> Result<u64, ProblemError> {
            input.read_exact(&mut word).map_err(|_| {
                ProblemError::BadFormat("truncated header".into())
            })?;
            Ok(u64::from_le_bytes(word))
        };
        let n = read_u64(&mut input)? as usize;
        let d = read_u64(&mut input)? as usize;
        let encoding = SampleEncoding::from_tag(read_u64(&mut input)?)?;
        if d == 0 {
            return Err(ProblemError::BadFormat("zero dimension".into()));
        }
        let total = n
            .checked_mul(encoding.row_width(d))
            .ok_or_else(|| ProblemError::BadFormat("size overflow".into()))?;
        let mut data = Vec::with_capacity(total);
        let mut buf = [0u8; 8];
        for _ in 0..total {
            input
                .read_exact(&mut buf)
                .map_err(|_| ProblemError::BadFormat("truncated body".into()))?;
            data.push(f64::from_le_bytes(buf));
        }
        if input.read(&mut buf)? != 0 {
            return Err(ProblemError::BadFormat("trailing bytes after body".into()));
        }
        Ok(Self { d, encoding, data })
    }

    /// Plain-text export for eyeballing; full 17-significant-digit
    /// round-trippable formatting.
    pub fn write_csv(&self, path: &Path) -> Result<(), ProblemError> {
        let mut out = BufWriter::new(File::create(path)?);
        let w = self.encoding.row_width(self.d);
        let mut header: Vec<String> = (0..self.d).map(|j| format!("z{j}")).collect();
        if self.encoding == SampleEncoding::FeatureLabel {
            header.push("label".into());
        }
        writeln!(out, "{}", header.join(","))?;
        for i in 0..self.n() {
            let row: Vec<String> =
                self.data[i * w..(i + 1) * w].iter().map(|&v| fmt_f64(v)).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        out.flush()?;
        Ok(())
    }

    /// Check every row against the sample-space bounds the problem
    /// declares. Run once at load time; the gradient paths then trust
    /// the rows.
    pub fn validate_for(&self, problem: &Problem) -> Result<(), ProblemError> {
        if self.d != problem.d {
            return Err(ProblemError::DimensionMismatch { expected: problem.d, got: self.d });
        }
        let expected = match problem.kind {
            LossKind::Linear => SampleEncoding::Plain,
            LossKind::LeastSquares => SampleEncoding::FeatureLabel,
        };
        if self.encoding != expected {
            return Err(ProblemError::BadFormat("encoding does not match loss kind".into()));
        }
        let slack = 1.0 + 1e-9;
        for i in 0..self.n() {
            let row = self.row(i);
            match problem.kind {
                LossKind::Linear => {
                    let sup = row.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                    if !sup.is_finite() || sup > problem.cube_magnitude * slack {
                        return Err(ProblemError::SampleOutOfRange { row: i });
                    }
                }
                LossKind::LeastSquares => {
                    let (a, b) = split_labeled(row);
                    let norm = lp_norm(a, problem.q)?;
                    if norm > problem.feature_scale * slack || b.abs() > problem.label_bound * slack
                    {
                        return Err(ProblemError::SampleOutOfRange { row: i });
                    }
                }
            }
        }
        Ok(())
    }
}

fn split_labeled(row: &[f64]) -> (&[f64], f64) {
    let (features, label) = row.split_at(row.len() - 1);
    (features, label[0])
}

/// A loss family over a feasible set, with certified constants and the
/// exact population quantities needed for risk reporting.
#[derive(Debug, Clone)]
pub struct Problem {
    pub kind: LossKind,
    pub space: FeasibleSet,
    /// Lipschitz constant of the per-sample loss w.r.t. the ambient
    /// norm.
    pub l0: f64,
    /// Smoothness constant of the per-sample gradient.
    pub l1: f64,
    /// Diameter of the feasible set in the ambient norm.
    pub m_diam: f64,
    /// Per-coordinate sign biases of the sample distribution.
    pub mean_bias: Vec<f64>,
    /// Feature norm bound A (least squares); 1 for the linear loss.
    pub feature_scale: f64,
    pub has_analytic_minimizer: bool,
    d: usize,
    /// Dual exponent of the ambient norm.
    q: f64,
    /// Common coordinate magnitude d^{-1/q} of the cube alphabet.
    cube_magnitude: f64,
    /// Least squares only: labels are <a, label_point> for this
    /// strictly feasible point, so the population minimum is 0 there.
    label_point: Vec<f64>,
    label_bound: f64,
}

impl Problem {
    /// Linear loss `-<x, z>` over `space`, samples from the cube
    /// alphabet with the given per-coordinate biases.
    pub fn linear(space: FeasibleSet, mean_bias: Vec<f64>) -> Result<Self, ProblemError> {
        let d = mean_bias.len();
        Self::validate_bias(&mean_bias)?;
        let (q, m_diam) = Self::space_constants(&space, d)?;
        let cube_magnitude = (d as f64).powf(-1.0 / q);
        Ok(Self {
            kind: LossKind::Linear,
            space,
            // ||z||_q = 1 exactly on the cube alphabet, and the loss is
            // linear, hence L0 = 1, L1 = 0.
            l0: 1.0,
            l1: 0.0,
            m_diam,
            mean_bias,
            feature_scale: 1.0,
            has_analytic_minimizer: true,
            d,
            q,
            cube_magnitude,
            label_point: Vec::new(),
            label_bound: 0.0,
        })
    }

    /// Least-squares loss `(<a, x> - b)^2 / 2`. Features are
    /// `feature_scale` times a cube-alphabet vector (so ||a||_q =
    /// feature_scale exactly); labels come from a reference point at 60%
    /// of the radius (lp balls) or 60% of the first vertex (polytopes).
    ///
    /// The reference point is strictly feasible for balls and for
    /// polytopes containing the antipode of their first vertex; only then
    /// is the population minimum the interpolation value 0, so
    /// `has_analytic_minimizer` is cleared for other polytopes.
    pub fn least_squares(
        space: FeasibleSet,
        mean_bias: Vec<f64>,
        feature_scale: f64,
    ) -> Result<Self, ProblemError> {
        let d = mean_bias.len();
        Self::validate_bias(&mean_bias)?;
        if !feature_scale.is_finite() || feature_scale <= 0.0 {
            return Err(ProblemError::NonPositive { what: "feature_scale", got: feature_scale });
        }
        let (q, m_diam) = Self::space_constants(&space, d)?;
        let cube_magnitude = (d as f64).powf(-1.0 / q);
        let (label_point, label_bound, analytic) = match &space {
            FeasibleSet::LpBall { p, radius } => {
                // ||x||_p = 0.6 * radius exactly, alternating signs.
                let unit = (d as f64).powf(-1.0 / *p);
                let point: Vec<f64> = (0..d)
                    .map(|j| 0.6 * radius * unit * if j % 2 == 0 { 1.0 } else { -1.0 })
                    .collect();
                (point, feature_scale * 0.6 * radius, true)
            }
            FeasibleSet::Polytope(poly) => {
                let v0 = &poly.vertices()[0];
                let point: Vec<f64> = v0.iter().map(|c| 0.6 * c).collect();
                let norm = lp_norm(&point, poly.ambient_p())?;
                let antipode = poly
                    .vertices()
                    .iter()
                    .any(|v| v.iter().zip(v0).all(|(a, b)| *a == -b));
                (point, feature_scale * norm, antipode)
            }
        };
        let a = feature_scale;
        Ok(Self {
            kind: LossKind::LeastSquares,
            space,
            // |f(x)-f(y)| <= ||a||_q (||a||_q M + B) ||x-y||_p.
            l0: a * (a * m_diam + label_bound),
            l1: a * a,
            m_diam,
            mean_bias,
            feature_scale,
            has_analytic_minimizer: analytic,
            d,
            q,
            cube_magnitude,
            label_point,
            label_bound,
        })
    }

    fn validate_bias(bias: &[f64]) -> Result<(), ProblemError> {
        if bias.is_empty() {
            return Err(ProblemError::BadDimension);
        }
        for &b in bias {
            if !b.is_finite() || !(-1.0..=1.0).contains(&b) {
                return Err(ProblemError::InvalidBias(b));
            }
        }
        Ok(())
    }

    fn space_constants(space: &FeasibleSet, d: usize) -> Result<(f64, f64), ProblemError> {
        let q = match space {
            FeasibleSet::LpBall { p, .. } => dual_exponent(*p)?,
            FeasibleSet::Polytope(poly) => {
                if poly.dim() != d {
                    return Err(ProblemError::DimensionMismatch { expected: d, got: poly.dim() });
                }
                dual_exponent(poly.ambient_p())?
            }
        };
        Ok((q, space.diameter()))
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn dual_q(&self) -> f64 {
        self.q
    }

    pub fn encoding(&self) -> SampleEncoding {
        match self.kind {
            LossKind::Linear => SampleEncoding::Plain,
            LossKind::LeastSquares => SampleEncoding::FeatureLabel,
        }
    }

    pub fn label_point(&self) -> &[f64] {
        &self.label_point
    }

    /// Draw a dataset of n rows; the stream consumption is exactly n
    /// independent sample draws in index order.
    pub fn generate_dataset<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Dataset {
        let w = self.encoding().row_width(self.d);
        let mut data = Vec::with_capacity(n * w);
        for _ in 0..n {
            let z = cube_distribution_sample(&self.mean_bias, self.q, rng);
            match self.kind {
                LossKind::Linear => data.extend_from_slice(&z),
                LossKind::LeastSquares => {
                    let a: Vec<f64> = z.iter().map(|v| v * self.feature_scale).collect();
                    let b: f64 = a.iter().zip(&self.label_point).map(|(x, y)| x * y).sum();
                    data.extend_from_slice(&a);
                    data.push(b);
                }
            }
        }
        Dataset { d: self.d, encoding: self.encoding(), data }
    }

    /// Per-sample gradient written into `out`. Rows must come from a
    /// dataset validated by `Dataset::validate_for`; shape errors are
    /// programmer errors and panic.
    pub fn sample_gradient_into(&self, x: &[f64], row: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.d, "iterate dimension");
        assert_eq!(out.len(), self.d, "output dimension");
        assert_eq!(row.len(), self.encoding().row_width(self.d), "row width");
        match self.kind {
            LossKind::Linear => {
                for (o, z) in out.iter_mut().zip(row) {
                    *o = -z;
                }
            }
            LossKind::LeastSquares => {
                let (a, b) = split_labeled(row);
                let residual = a.iter().zip(x).map(|(ai, xi)| ai * xi).sum::<f64>() - b;
                for (o, ai) in out.iter_mut().zip(a) {
                    *o = ai * residual;
                }
            }
        }
    }

    /// Per-sample loss value.
    pub fn sample_loss(&self, x: &[f64], row: &[f64]) -> f64 {
        assert_eq!(row.len(), self.encoding().row_width(self.d), "row width");
        match self.kind {
            LossKind::Linear => -x.iter().zip(row).map(|(xi, zi)| xi * zi).sum::<f64>(),
            LossKind::LeastSquares => {
                let (a, b) = split_labeled(row);
                let residual = a.iter().zip(x).map(|(ai, xi)| ai * xi).sum::<f64>() - b;
                0.5 * residual * residual
            }
        }
    }

    /// Exact population mean of the sample vectors (features for least
    /// squares).
    pub fn population_mean(&self) -> Vec<f64> {
        let scale = self.cube_magnitude * self.feature_scale;
        self.mean_bias.iter().map(|b| b * scale).collect()
    }

    /// Exact population objective F(x).
    pub fn population_value(&self, x: &[f64]) -> Result<f64, ProblemError> {
        if x.len() != self.d {
            return Err(ProblemError::DimensionMismatch { expected: self.d, got: x.len() });
        }
        match self.kind {
            LossKind::Linear => {
                let mean = self.population_mean();
                Ok(-x.iter().zip(&mean).map(|(xi, mi)| xi * mi).sum::<f64>())
            }
            LossKind::LeastSquares => {
                // E (…)^2/2 = (x - x_ref)' Sigma (x - x_ref) / 2 with
                // Sigma = A^2 mag^2 [diag(1 - bias^2) + bias bias'].
                let w: Vec<f64> =
                    x.iter().zip(&self.label_point).map(|(xi, ri)| xi - ri).collect();
                let scale = (self.feature_scale * self.cube_magnitude).powi(2);
                let dot_bias: f64 = w.iter().zip(&self.mean_bias).map(|(wi, bi)| wi * bi).sum();
                let diag: f64 = w
                    .iter()
                    .zip(&self.mean_bias)
                    .map(|(wi, bi)| (1.0 - bi * bi) * wi * wi)
                    .sum();
                Ok(0.5 * scale * (dot_bias * dot_bias + diag))
            }
        }
    }

    /// Exact population gradient of F at x.
    pub fn population_gradient(&self, x: &[f64]) -> Result<Vec<f64>, ProblemError> {
        if x.len() != self.d {
            return Err(ProblemError::DimensionMismatch { expected: self.d, got: x.len() });
        }
        match self.kind {
            LossKind::Linear => Ok(self.population_mean().iter().map(|m| -m).collect()),
            LossKind::LeastSquares => {
                let w: Vec<f64> =
                    x.iter().zip(&self.label_point).map(|(xi, ri)| xi - ri).collect();
                let scale = (self.feature_scale * self.cube_magnitude).powi(2);
                let dot_bias: f64 = w.iter().zip(&self.mean_bias).map(|(wi, bi)| wi * bi).sum();
                Ok(w
                    .iter()
                    .zip(&self.mean_bias)
                    .map(|(wi, bi)| scale * ((1.0 - bi * bi) * wi + bi * dot_bias))
                    .collect())
            }
        }
    }

    /// Population minimizer and minimum value over the feasible set.
    pub fn population_minimum(&self) -> Result<(Vec<f64>, f64), ProblemError> {
        match self.kind {
            LossKind::LeastSquares => {
                if !self.has_analytic_minimizer {
                    // The reference point may sit outside the feasible
                    // set; no closed form is claimed then.
                    return Err(ProblemError::UnsupportedCombination);
                }
                // Labels interpolate at the strictly feasible reference
                // point, so the minimum is exactly zero there.
                Ok((self.label_point.clone(), 0.0))
            }
            LossKind::Linear => {
                let mean = self.population_mean();
                match &self.space {
                    FeasibleSet::LpBall { p, radius } => {
                        let (x, value) = closed_form_minimizer(&mean, *p, *radius)?;
                        Ok((x, value))
                    }
                    FeasibleSet::Polytope(poly) => {
                        // Linear objective: best vertex wins.
                        let mut best = (0usize, f64::INFINITY);
                        for (i, v) in poly.vertices().iter().enumerate() {
                            let val = -v.iter().zip(&mean).map(|(vi, mi)| vi * mi).sum::<f64>();
                            if val < best.1 {
                                best = (i, val);
                            }
                        }
                        Ok((poly.vertices()[best.0].clone(), best.1))
                    }
                }
            }
        }
    }
}

/// Gradient of the linear loss: constant -z.
pub fn linear_loss_grad(x: &[f64], z: &[f64]) -> Result<Vec<f64>, ProblemError> {
    if x.len() != z.len() {
        return Err(ProblemError::DimensionMismatch { expected: x.len(), got: z.len() });
    }
    Ok(z.iter().map(|v| -v).collect())
}

/// Gradient of the least-squares loss: a * (<a, x> - b).
pub fn least_squares_grad(x: &[f64], a: &[f64], b: f64) -> Result<Vec<f64>, ProblemError> {
    if x.len() != a.len() {
        return Err(ProblemError::DimensionMismatch { expected: x.len(), got: a.len() });
    }
    let residual = a.iter().zip(x).map(|(ai, xi)| ai * xi).sum::<f64>() - b;
    Ok(a.iter().map(|ai| ai * residual).collect())
}

/// One draw from the cube alphabet: coordinate j is +-d^{-1/q}, with
/// P(+) = (1 + bias_j)/2, independently across coordinates. Consumes
/// exactly d uniform draws.
pub fn cube_distribution_sample<R: Rng + ?Sized>(
    mean_bias: &[f64],
    q: f64,
    rng: &mut R,
) -> Vec<f64> {
    let d = mean_bias.len();
    assert!(d > 0, "empty bias vector");
    assert!(q >= 1.0, "dual exponent must be >= 1, got {q}");
    let magnitude = (d as f64).powf(-1.0 / q);
    mean_bias
        .iter()
        .map(|&b| {
            debug_assert!((-1.0..=1.0).contains(&b));
            let u = rng.random::<f64>();
            if u < 0.5 * (1.0 + b) {
                magnitude
            } else {
                -magnitude
            }
        })
        .collect()
}

/// Closed-form maximizer of `<x, z_bar>` over the lp ball of the given
/// radius, returned with the minimum value `-radius * ||z_bar||_q` of
/// the linear loss:
/// `x*_j = radius * (|z_bar_j| / ||z_bar||_q)^{q-1} * sign(z_bar_j)`.
///
/// A zero mean is degenerate (every feasible point is optimal); the
/// origin is returned with value 0 rather than failing a whole sweep.
pub fn closed_form_minimizer(
    z_bar: &[f64],
    p: f64,
    radius: f64,
) -> Result<(Vec<f64>, f64), ProblemError> {
    if !(1.0..=2.0).contains(&p) || p == 1.0 {
        return Err(ProblemError::NonPositive { what: "exponent p in (1, 2]", got: p });
    }
    if !radius.is_finite() || radius <= 0.0 {
        return Err(ProblemError::NonPositive { what: "radius", got: radius });
    }
    let q = dual_exponent(p)?;
    let norm = lp_norm(z_bar, q)?;
    if norm == 0.0 {
        return Ok((vec![0.0; z_bar.len()], 0.0));
    }
    let x = z_bar
        .iter()
        .map(|&zj| radius * (zj.abs() / norm).powf(q - 1.0) * zj.signum())
        .collect();
    Ok((x, -radius * norm))
}

/// Uniform-convexity transfer from excess risk to distance for the
/// linear loss over an lp ball: `||x - x*||_p <=
/// sqrt(8 alpha / ((p - 1) ||z_bar||_q))`.
pub fn risk_to_distance_bound(alpha_gap: f64, p: f64, z_bar_q_norm: f64) -> f64 {
    assert!(alpha_gap >= 0.0, "excess risk must be nonnegative, got {alpha_gap}");
    assert!(p > 1.0 && p < 2.0, "exponent must lie in (1, 2), got {p}");
    assert!(
        z_bar_q_norm > 0.0 && z_bar_q_norm.is_finite(),
        "mean norm must be positive, got {z_bar_q_norm}"
    );
    (8.0 * alpha_gap / ((p - 1.0) * z_bar_q_norm)).sqrt()
}

/// Population excess risk F(x) - F*, clipped of float dust at the
/// minimum; a value below -1e-12 (relative) means the minimizer oracle
/// and the objective disagree and is reported as an error.
pub fn excess_risk(x: &[f64], problem: &Problem) -> Result<f64, ProblemError> {
    let value = problem.population_value(x)?;
    let (_, minimum) = problem.population_minimum()?;
    let gap = value - minimum;
    let tol = 1e-12 * (1.0 + value.abs() + minimum.abs());
    if gap < -tol {
        return Err(ProblemError::InternalInconsistency { got: gap });
    }
    Ok(gap.max(0.0))
}
