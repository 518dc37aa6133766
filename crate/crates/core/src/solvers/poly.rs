//! Polyhedral private Frank-Wolfe: single-sample recursive gradient
//! estimates with report-noisy-min vertex selection.

use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

use super::schedule::{poly_sensitivity_schedule, poly_step_size};
use super::{
    batch_gradients, convex_step, dot, norm_of_diff, RunReport, SampleStream, SolverError,
    DEFAULT_TRACE_BETA,
};
use crate::estimators::{spider_update, BiasTrace, EstimatorState};
use crate::geometry::{polyhedral_regularity, FeasibleSet, Polytope};
use crate::mechanisms::{report_noisy_min, PrivacyBudget};
use crate::problems::{excess_risk, Dataset, Problem};

/// Configuration of the polyhedral solver. `for_problem` derives the step
/// size ln(n / ln K) / n and copies the problem constants; fields stay
/// public so tests can pin values before validation.
#[derive(Debug, Clone, Serialize)]
pub struct PolySfwConfig {
    /// Step size, also the mixing weight of the gradient recursion.
    pub eta: f64,
    /// Privacy budget the selection noise is calibrated to.
    pub budget: PrivacyBudget,
    /// Declared Lipschitz constant; must dominate the problem's.
    pub l0: f64,
    /// Declared smoothness constant; must dominate the problem's.
    pub l1: f64,
    /// Declared feasible-set diameter; must dominate the problem's.
    pub m_diam: f64,
    pub polytope: Polytope,
    pub x0: Vec<f64>,
    pub seed: u64,
    /// Test-only: zero all selection noise. The command-line harness
    /// refuses this flag without an explicit unsafe override.
    pub disable_noise: bool,
    /// Confidence level the bias trace bounds are evaluated at.
    pub trace_beta: f64,
}

impl PolySfwConfig {
    pub fn for_problem(
        problem: &Problem,
        n: usize,
        budget: PrivacyBudget,
        seed: u64,
    ) -> Result<Self, SolverError> {
        let polytope = match &problem.space {
            FeasibleSet::Polytope(p) => p.clone(),
            FeasibleSet::LpBall { .. } => return Err(SolverError::NotPolyhedral),
        };
        let k = polytope.num_vertices();
        // A single vertex never reads the step size; any in-range value
        // keeps validation happy.
        let eta = if k == 1 { 0.5 } else { poly_step_size(n, k)? };
        Ok(Self {
            eta,
            budget,
            l0: problem.l0,
            l1: problem.l1,
            m_diam: problem.m_diam,
            x0: problem.space.default_start(problem.d()),
            polytope,
            seed,
            disable_noise: false,
            trace_beta: DEFAULT_TRACE_BETA,
        })
    }

    /// Laplace scale of the vertex scores at sensitivity `s_t`:
    /// 2 s_t sqrt(n ln(1/delta)) / eps. At the initial sensitivity
    /// 2 L0 M / n this works out to 4 L0 M sqrt(ln(1/delta)) / (eps sqrt(n)).
    pub fn selection_scale(&self, s_t: f64, n: usize) -> f64 {
        if self.disable_noise {
            return 0.0;
        }
        2.0 * s_t * (n as f64 * (1.0 / self.budget.delta).ln()).sqrt() / self.budget.eps
    }

    pub fn validate_for(&self, dataset: &Dataset, problem: &Problem) -> Result<(), SolverError> {
        let d = problem.d();
        if self.polytope.dim() != d {
            return Err(SolverError::DimensionMismatch { expected: d, got: self.polytope.dim() });
        }
        if self.x0.len() != d {
            return Err(SolverError::DimensionMismatch { expected: d, got: self.x0.len() });
        }
        if dataset.d() != d {
            return Err(SolverError::DimensionMismatch { expected: d, got: dataset.d() });
        }
        if dataset.encoding() != problem.encoding() {
            return Err(SolverError::EncodingMismatch);
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(SolverError::InvalidStep(self.eta));
        }
        for (what, got, floor) in [
            ("l0", self.l0, problem.l0),
            ("l1", self.l1, problem.l1),
            ("m_diam", self.m_diam, problem.m_diam),
        ] {
            // Declared constants feed the score sensitivities, so they
            // must dominate the problem's certified values.
            if !got.is_finite() || got < floor * (1.0 - 1e-12) {
                return Err(SolverError::BadConstant { what, got });
            }
        }
        if !(self.budget.eps > 0.0 && self.budget.eps.is_finite()) {
            return Err(SolverError::BadConstant { what: "eps", got: self.budget.eps });
        }
        if !(self.budget.delta > 0.0 && self.budget.delta < 1.0) {
            return Err(SolverError::BadConstant { what: "delta", got: self.budget.delta });
        }
        if !(self.trace_beta > 0.0 && self.trace_beta < 1.0) {
            return Err(SolverError::BadConstant { what: "trace_beta", got: self.trace_beta });
        }
        if !problem.space.contains(&self.x0, 1e-9)? {
            return Err(SolverError::InfeasibleStart);
        }
        Ok(())
    }
}

/// Bias bound of this solver's estimator chain at step t: initial batch
/// of h entries, then t single-sample updates with mixing eta and no
/// vector noise. Same constant and structure as `estimator_bias_bound`, but
/// with each batch attached to its own event; the shared oracle's slot
/// layout reads slot 0 for both the initialization term and the first
/// update, which only coincides when all batches are equal.
#[allow(clippy::too_many_arguments)]
fn poly_bias_bound(
    t: usize,
    h: usize,
    horizon: usize,
    eta: f64,
    l0: f64,
    l1: f64,
    m_diam: f64,
    kappa: f64,
    beta: f64,
) -> f64 {
    let c_beta = (std::f64::consts::E * kappa).sqrt()
        + (3.0 * (2.0 * horizon as f64 / beta).ln()).sqrt();
    let init = (1.0 - eta).powi(t as i32) * l0 / (h as f64).sqrt();
    let mut weights = 0.0;
    let mut w = 1.0;
    for _ in 0..t {
        weights += w;
        w *= 1.0 - eta;
    }
    c_beta * (init + (l1 * m_diam * eta + eta * l0) * weights)
}

fn finite_or_err(state: &EstimatorState, context: &str) -> Result<(), SolverError> {
    if state.current.iter().any(|v| !v.is_finite()) {
        return Err(SolverError::NonFinite { context: context.to_string() });
    }
    Ok(())
}

/// Run the polyhedral solver: an initial estimate on floor(n/2) entries
/// and a noisy-min vertex pick, then floor(n/2) single-sample steps, each
/// re-scoring all vertices at the step's sensitivity. Outputs the iterate
/// after the last step. Randomness goes: dataset permutation, then one
/// batch of K Laplace draws per selection in step order.
pub fn poly_sfw<R: Rng + ?Sized>(
    dataset: &Dataset,
    problem: &Problem,
    cfg: &PolySfwConfig,
    rng: &mut R,
) -> Result<RunReport, SolverError> {
    let start = Instant::now();
    cfg.validate_for(dataset, problem)?;
    let n = dataset.n();
    let d = problem.d();
    let vertices = cfg.polytope.vertices();
    let k = vertices.len();

    let finish = |x: Vec<f64>,
                  consumed: usize,
                  trace: BiasTrace,
                  nu_trace: Vec<f64>,
                  descent: Vec<(f64, f64)>|
     -> Result<RunReport, SolverError> {
        let excess = if problem.has_analytic_minimizer {
            Some(excess_risk(&x, problem)?)
        } else {
            None
        };
        Ok(RunReport {
            x_out: x,
            excess_risk: excess,
            samples_consumed: consumed,
            bias_trace: trace,
            noise_suboptimality_trace: nu_trace,
            descent_check: descent,
            wall_time_ns: start.elapsed().as_nanos() as u64,
            seed: cfg.seed,
            config: serde_json::to_value(cfg).expect("config serializes"),
        })
    };

    if k == 1 {
        // The feasible set is a single point; no data needed.
        return finish(
            vertices[0].clone(),
            0,
            BiasTrace::new(cfg.trace_beta),
            Vec::new(),
            Vec::new(),
        );
    }
    if n < 4 {
        return Err(SolverError::InsufficientData { min: 4, got: n });
    }

    let h = n / 2;
    let eta = cfg.eta;
    let kappa = polyhedral_regularity(k)?.kappa;
    let q = problem.dual_q();
    let fmin = if problem.has_analytic_minimizer {
        Some(problem.population_minimum()?.1)
    } else {
        None
    };
    let log_descent = cfg.disable_noise && fmin.is_some();

    let mut stream = SampleStream::new(n, rng);
    let mut trace = BiasTrace::new(cfg.trace_beta);
    let mut nu_trace = Vec::with_capacity(h + 1);
    let mut descent: Vec<(f64, f64)> = Vec::new();

    let batch = stream.take(h)?.to_vec();
    let mut flat = Vec::new();
    batch_gradients(problem, &cfg.x0, dataset, &batch, &mut flat);
    let zero = EstimatorState::new(vec![0.0; d], 1.0, 0)?;
    let mut state = spider_update(&zero, &flat, &flat, 1.0, None)?;
    finite_or_err(&state, "initial batch")?;

    let mut x = cfg.x0.clone();
    let mut x_prev = cfg.x0.clone();
    let (mut g_new, mut g_old) = (vec![0.0; d], vec![0.0; d]);

    for t in 0..=h {
        if t > 0 {
            let zi = stream.take(1)?[0] as usize;
            let row = dataset.row(zi);
            problem.sample_gradient_into(&x, row, &mut g_new);
            problem.sample_gradient_into(&x_prev, row, &mut g_old);
            state = spider_update(&state, &g_new, &g_old, eta, None)?;
            finite_or_err(&state, &format!("step {t}"))?;
        }

        // d_t estimates the population gradient at the current iterate;
        // trace it before the step moves x.
        let pop_grad = problem.population_gradient(&x)?;
        let observed = norm_of_diff(&state.current, &pop_grad, q)?;
        let bound =
            poly_bias_bound(t, h, h, eta, cfg.l0, cfg.l1, cfg.m_diam, kappa, cfg.trace_beta);
        trace.push(t, observed, bound);

        let s_t = poly_sensitivity_schedule(t, eta, cfg.l0, cfg.l1, cfg.m_diam, n);
        let scores: Vec<f64> = vertices.iter().map(|v| dot(v, &state.current)).collect();
        let (pick, nu) = report_noisy_min(&scores, cfg.selection_scale(s_t, n), rng)?;
        nu_trace.push(nu);

        let gap_before = if log_descent {
            Some(problem.population_value(&x)? - fmin.expect("analytic minimum"))
        } else {
            None
        };
        x_prev.copy_from_slice(&x);
        convex_step(&mut x, &vertices[pick], eta);
        debug_assert!(
            problem.space.contains(&x, 1e-9).unwrap_or(false),
            "iterate left the polytope"
        );
        if let Some(gap) = gap_before {
            let lhs = problem.population_value(&x)? - fmin.expect("analytic minimum");
            let rhs = (1.0 - eta) * gap
                + 2.0 * eta * cfg.m_diam * observed
                + cfg.l1 * eta * eta * cfg.m_diam * cfg.m_diam / 2.0;
            descent.push((lhs, rhs));
        }
    }

    finish(x, stream.consumed(), trace, nu_trace, descent)
}

/// Replay the estimator recursion on a neighboring dataset pair with every
/// vertex selection pinned to `forced_vertices`, so both trajectories
/// coincide, and report the worst score-sensitivity violation
/// max over t and v of |<v, d_t - d_t'>| - s_t. A nonpositive value
/// certifies the sensitivity schedule on this instance. Both runs consume
/// the same seed-determined permutation, so the differing entry lands at
/// the same position in both trajectories.
pub fn replay_sensitivity_check(
    dataset: &Dataset,
    neighbor: &Dataset,
    problem: &Problem,
    cfg: &PolySfwConfig,
    forced_vertices: &[usize],
) -> Result<f64, SolverError> {
    cfg.validate_for(dataset, problem)?;
    let n = dataset.n();
    if neighbor.n() != n || neighbor.d() != dataset.d() {
        return Err(SolverError::DimensionMismatch { expected: dataset.d(), got: neighbor.d() });
    }
    if neighbor.encoding() != dataset.encoding() {
        return Err(SolverError::EncodingMismatch);
    }
    if n < 4 {
        return Err(SolverError::InsufficientData { min: 4, got: n });
    }
    let differing = (0..n).filter(|&i| dataset.row(i) != neighbor.row(i)).count();
    if differing > 1 {
        return Err(SolverError::InvalidNeighbor { differing });
    }
    let k = cfg.polytope.num_vertices();
    let h = n / 2;
    if forced_vertices.len() < h + 1 {
        return Err(SolverError::ForcedTooShort { needed: h + 1, got: forced_vertices.len() });
    }
    if let Some(&bad) = forced_vertices.iter().take(h + 1).find(|&&i| i >= k) {
        return Err(SolverError::ForcedOutOfRange { index: bad, vertices: k });
    }

    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let perm = SampleStream::new(n, &mut rng).permutation().to_vec();
    let d_a = forced_estimates(dataset, problem, cfg, forced_vertices, &perm)?;
    let d_b = forced_estimates(neighbor, problem, cfg, forced_vertices, &perm)?;

    let mut violation = f64::NEG_INFINITY;
    for t in 0..=h {
        let s_t = poly_sensitivity_schedule(t, cfg.eta, cfg.l0, cfg.l1, cfg.m_diam, n);
        for v in cfg.polytope.vertices() {
            let score_diff: f64 = v
                .iter()
                .zip(d_a[t].iter().zip(&d_b[t]))
                .map(|(vj, (aj, bj))| vj * (aj - bj))
                .sum();
            violation = violation.max(score_diff.abs() - s_t);
        }
    }
    Ok(violation)
}

/// Noiseless estimator trajectory d_0..d_h with the vertex picks forced.
fn forced_estimates(
    dataset: &Dataset,
    problem: &Problem,
    cfg: &PolySfwConfig,
    forced: &[usize],
    perm: &[u32],
) -> Result<Vec<Vec<f64>>, SolverError> {
    let d = problem.d();
    let h = dataset.n() / 2;
    let vertices = cfg.polytope.vertices();
    let mut stream = SampleStream::from_permutation(perm.to_vec());

    let batch = stream.take(h)?.to_vec();
    let mut flat = Vec::new();
    batch_gradients(problem, &cfg.x0, dataset, &batch, &mut flat);
    let zero = EstimatorState::new(vec![0.0; d], 1.0, 0)?;
    let mut state = spider_update(&zero, &flat, &flat, 1.0, None)?;

    let mut out = Vec::with_capacity(h + 1);
    out.push(state.current.clone());
    let mut x = cfg.x0.clone();
    let mut x_prev = cfg.x0.clone();
    let (mut g_new, mut g_old) = (vec![0.0; d], vec![0.0; d]);
    x_prev.copy_from_slice(&x);
    convex_step(&mut x, &vertices[forced[0]], cfg.eta);
    for t in 1..=h {
        let zi = stream.take(1)?[0] as usize;
        let row = dataset.row(zi);
        problem.sample_gradient_into(&x, row, &mut g_new);
        problem.sample_gradient_into(&x_prev, row, &mut g_old);
        state = spider_update(&state, &g_new, &g_old, cfg.eta, None)?;
        out.push(state.current.clone());
        x_prev.copy_from_slice(&x);
        convex_step(&mut x, &vertices[forced[t]], cfg.eta);
    }
    Ok(out)
}
