//! Tree-structured variance-reduced Frank-Wolfe with generalized Gaussian
//! gradient noise.

use std::time::Instant;

use rand::Rng;
use serde::Serialize;

use super::schedule::{dfs_schedule, tree_demand, tree_sfw_schedule};
use super::{
    batch_gradients, convex_step, norm_of_diff, RunReport, SampleStream, SolverError,
    DEFAULT_TRACE_BETA,
};
use crate::estimators::{estimator_bias_bound, spider_update, BiasTrace, EstimatorState};
use crate::geometry::{dual_exponent, polyhedral_regularity, regularity, FeasibleSet, SpaceSpec};
use crate::mechanisms::{gg_calibrate, gg_light_tail_nu, GGParams, GGSampler, PrivacyBudget};
use crate::problems::{excess_risk, Dataset, Problem};

/// Configuration of the tree solver. `for_problem` derives every field
/// from the problem and sample size; the fields stay public so tests can
/// pin specific phase counts or batch sizes before validation.
#[derive(Debug, Clone, Serialize)]
pub struct TreeSfwConfig {
    /// Number of phases; phase t traverses a depth-t tree.
    pub t_phases: usize,
    /// Root batch size; depth-j vertices use max(1, floor(b / 2^j)).
    pub b: usize,
    /// Per-release privacy budget the noise variances are calibrated to.
    pub budget: PrivacyBudget,
    /// Declared Lipschitz constant; must dominate the problem's.
    pub l0: f64,
    /// Declared smoothness constant; must dominate the problem's.
    pub l1: f64,
    /// Declared feasible-set diameter; must dominate the problem's.
    pub m_diam: f64,
    /// Regularity constants of the ambient geometry (kappa for the
    /// calibration, r for the noise shape).
    pub space: SpaceSpec,
    pub x0: Vec<f64>,
    pub seed: u64,
    /// Test-only: zero both noise variances. The command-line harness
    /// refuses this flag without an explicit unsafe override.
    pub disable_noise: bool,
    /// Confidence level the bias trace bounds are evaluated at.
    pub trace_beta: f64,
}

impl TreeSfwConfig {
    /// Schedule T and b from the sample size and pull constants and
    /// geometry from the problem. Ball problems use the lp regularity
    /// constants; polytope problems use the polyhedral ones with the
    /// polytope's ambient exponent.
    pub fn for_problem(
        problem: &Problem,
        n: usize,
        budget: PrivacyBudget,
        seed: u64,
    ) -> Result<Self, SolverError> {
        let sched = tree_sfw_schedule(n)?;
        let d = problem.d();
        let space = match &problem.space {
            FeasibleSet::LpBall { p, .. } => regularity(*p, d)?,
            FeasibleSet::Polytope(poly) => {
                let reg = polyhedral_regularity(poly.num_vertices())?;
                let p = poly.ambient_p();
                SpaceSpec {
                    p,
                    q: dual_exponent(p)?,
                    d,
                    kappa: reg.kappa,
                    r: reg.smoothing_exponent,
                    kappa_plus: reg.kappa_plus,
                }
            }
        };
        Ok(Self {
            t_phases: sched.t_phases,
            b: sched.b,
            budget,
            l0: problem.l0,
            l1: problem.l1,
            m_diam: problem.m_diam,
            space,
            x0: problem.space.default_start(d),
            seed,
            disable_noise: false,
            trace_beta: DEFAULT_TRACE_BETA,
        })
    }

    /// Root-estimate noise variance: the generalized Gaussian calibration
    /// at sensitivity 2 L0 / b, which works out to
    /// 8 kappa L0^2 ln(1/delta) / (b^2 eps^2).
    pub fn sigma2_root(&self) -> f64 {
        if self.disable_noise {
            return 0.0;
        }
        gg_calibrate(2.0 * self.l0 / self.b as f64, self.space.kappa, &self.budget)
    }

    /// Correction noise variance: the calibration at sensitivity
    /// 8 L1 M / b, i.e. 128 kappa L1^2 M^2 ln(1/delta) / (b^2 eps^2).
    pub fn sigma2_delta(&self) -> f64 {
        if self.disable_noise {
            return 0.0;
        }
        gg_calibrate(8.0 * self.l1 * self.m_diam / self.b as f64, self.space.kappa, &self.budget)
    }

    pub fn validate_for(&self, dataset: &Dataset, problem: &Problem) -> Result<(), SolverError> {
        if self.t_phases == 0 {
            return Err(SolverError::NoPhases);
        }
        if self.t_phases >= 63 {
            return Err(SolverError::BadConstant { what: "t_phases", got: self.t_phases as f64 });
        }
        if self.b == 0 {
            return Err(SolverError::EmptyBatch);
        }
        let d = problem.d();
        if self.space.d != d {
            return Err(SolverError::DimensionMismatch { expected: d, got: self.space.d });
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
        for (what, got, floor) in [
            ("l0", self.l0, problem.l0),
            ("l1", self.l1, problem.l1),
            ("m_diam", self.m_diam, problem.m_diam),
        ] {
            // Declared constants feed the privacy calibration, so they
            // must dominate the problem's certified values.
            if !got.is_finite() || got < floor * (1.0 - 1e-12) {
                return Err(SolverError::BadConstant { what, got });
            }
        }
        if !(self.space.kappa >= 1.0) {
            return Err(SolverError::BadConstant { what: "kappa", got: self.space.kappa });
        }
        if !(self.space.r >= 2.0) {
            return Err(SolverError::BadConstant { what: "r", got: self.space.r });
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
        let demand = tree_demand(self.t_phases, self.b);
        if demand > dataset.n() {
            return Err(SolverError::DemandExceedsData { demand, got: dataset.n() });
        }
        if !problem.space.contains(&self.x0, 1e-9)? {
            return Err(SolverError::InfeasibleStart);
        }
        Ok(())
    }
}

/// Per-vertex bookkeeping carried down the traversal: the gradient
/// estimate, the iterate at entry (right children correct against it),
/// and the chain data the bias bound needs.
struct NodeCtx {
    state: EstimatorState,
    x_entry: Vec<f64>,
    /// Batch sizes of the corrections applied along the path to the root.
    corr_batches: Vec<usize>,
    /// Largest per-event displacement along the path, as a fraction of
    /// the diameter.
    max_disp: f64,
}

/// Evaluate the recursive-estimator bias bound for a leaf whose chain
/// consists of the root noise event followed by one event per correction.
/// The root batch fills slot 0 (so the initialization term reads the true
/// root batch), corrections fill the rest, and the drift slot takes the
/// worst per-event displacement observed on the path, which keeps the
/// bound valid for multi-step displacements between tree vertices.
#[allow(clippy::too_many_arguments)]
fn leaf_bias_bound(
    ctx: &NodeCtx,
    root_batch: usize,
    horizon: usize,
    nu_root: f64,
    nu_delta: f64,
    cfg: &TreeSfwConfig,
) -> f64 {
    let t_chain = 1 + ctx.corr_batches.len();
    let mut batches = Vec::with_capacity(t_chain);
    batches.push(root_batch);
    batches.extend_from_slice(&ctx.corr_batches);
    let mut nus = Vec::with_capacity(t_chain);
    nus.push(nu_root);
    nus.resize(t_chain, nu_delta);
    let etas = vec![ctx.max_disp; t_chain + 1];
    estimator_bias_bound(
        t_chain,
        horizon,
        0.0,
        &etas,
        &batches,
        &nus,
        cfg.l0,
        cfg.l1,
        cfg.m_diam,
        cfg.space.kappa,
        cfg.trace_beta,
    )
}

/// Run the tree solver: per phase, a noisy root estimate on a batch of b
/// entries, then a depth-first traversal where left children copy the
/// parent state, right children re-estimate the gradient change on
/// max(1, floor(b / 2^j)) entries plus noise, and every leaf takes a
/// Frank-Wolfe step with step size 2 / (2^(t-1) + leaf + 1).
///
/// Randomness is consumed in a fixed order (dataset permutation, then per
/// phase the root noise followed by right-child noise in traversal
/// order), so identical (dataset, config, seed) triples replay bitwise.
pub fn noisy_tree_sfw<R: Rng + ?Sized>(
    dataset: &Dataset,
    problem: &Problem,
    cfg: &TreeSfwConfig,
    rng: &mut R,
) -> Result<RunReport, SolverError> {
    let start = Instant::now();
    cfg.validate_for(dataset, problem)?;
    let d = problem.d();

    let sigma2_root = cfg.sigma2_root();
    let sigma2_delta = cfg.sigma2_delta();
    let root_noise = if sigma2_root > 0.0 {
        Some(GGSampler::new(&GGParams::centered(d, cfg.space.r, sigma2_root)?))
    } else {
        None
    };
    let delta_noise = if sigma2_delta > 0.0 {
        Some(GGSampler::new(&GGParams::centered(d, cfg.space.r, sigma2_delta)?))
    } else {
        None
    };
    let nu_root = if sigma2_root > 0.0 { gg_light_tail_nu(d, sigma2_root)? } else { 0.0 };
    let nu_delta = if sigma2_delta > 0.0 { gg_light_tail_nu(d, sigma2_delta)? } else { 0.0 };

    let mut stream = SampleStream::new(dataset.n(), rng);
    let mut x = cfg.x0.clone();
    let mut trace = BiasTrace::new(cfg.trace_beta);
    // One bound evaluation per leaf; the union bound runs over all of
    // them.
    let horizon = (1usize << (cfg.t_phases + 1)) - 2;
    let zero_state = EstimatorState::new(vec![0.0; d], 1.0, 0)?;

    let mut flat_new: Vec<f64> = Vec::new();
    let mut flat_old: Vec<f64> = Vec::new();
    let mut leaf_counter = 0usize;

    for t in 1..=cfg.t_phases {
        let batch = stream.take(cfg.b)?.to_vec();
        batch_gradients(problem, &x, dataset, &batch, &mut flat_new);
        let g = root_noise.as_ref().map(|s| s.sample(rng));
        let root_state = spider_update(&zero_state, &flat_new, &flat_new, 1.0, g.as_deref())?;
        if root_state.current.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::NonFinite { context: format!("phase {t}, root") });
        }
        let mut stack = vec![NodeCtx {
            state: root_state,
            x_entry: x.clone(),
            corr_batches: Vec::new(),
            max_disp: 0.0,
        }];

        for node in dfs_schedule(t) {
            stack.truncate(node.depth);
            let parent = stack.last().expect("parent context on stack");
            let ctx = if node.is_right {
                let bsz = (cfg.b >> node.depth).max(1);
                let idx = stream.take(bsz)?.to_vec();
                batch_gradients(problem, &x, dataset, &idx, &mut flat_new);
                batch_gradients(problem, &parent.x_entry, dataset, &idx, &mut flat_old);
                let g = delta_noise.as_ref().map(|s| s.sample(rng));
                let state =
                    spider_update(&parent.state, &flat_new, &flat_old, 0.0, g.as_deref())?;
                if state.current.iter().any(|v| !v.is_finite()) {
                    return Err(SolverError::NonFinite {
                        context: format!("phase {t}, vertex {}", node.path_string()),
                    });
                }
                let disp = norm_of_diff(&x, &parent.x_entry, cfg.space.p)? / cfg.m_diam;
                let mut corr_batches = parent.corr_batches.clone();
                corr_batches.push(bsz);
                NodeCtx {
                    state,
                    x_entry: x.clone(),
                    corr_batches,
                    max_disp: parent.max_disp.max(disp),
                }
            } else {
                NodeCtx {
                    state: parent.state.clone(),
                    x_entry: parent.x_entry.clone(),
                    corr_batches: parent.corr_batches.clone(),
                    max_disp: parent.max_disp,
                }
            };

            if node.is_leaf {
                let pop_grad = problem.population_gradient(&x)?;
                let observed = norm_of_diff(&ctx.state.current, &pop_grad, cfg.space.q)?;
                let bound = leaf_bias_bound(&ctx, cfg.b, horizon, nu_root, nu_delta, cfg);
                trace.push(leaf_counter, observed, bound);
                leaf_counter += 1;

                let v = problem.space.lmo(&ctx.state.current)?;
                convex_step(&mut x, &v, node.eta);
                debug_assert!(
                    problem.space.contains(&x, 1e-9).unwrap_or(false),
                    "iterate left the feasible set"
                );
            }
            stack.push(ctx);
        }
    }

    let excess = if problem.has_analytic_minimizer {
        Some(excess_risk(&x, problem)?)
    } else {
        None
    };
    Ok(RunReport {
        x_out: x,
        excess_risk: excess,
        samples_consumed: stream.consumed(),
        bias_trace: trace,
        noise_suboptimality_trace: Vec::new(),
        descent_check: Vec::new(),
        wall_time_ns: start.elapsed().as_nanos() as u64,
        seed: cfg.seed,
        config: serde_json::to_value(cfg).expect("config serializes"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::lp_norm;
    use crate::problems::SampleEncoding;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn budget(eps: f64, delta: f64) -> PrivacyBudget {
        PrivacyBudget::new(eps, delta).unwrap()
    }

    fn linear_ball_problem(p: f64, radius: f64, bias: Vec<f64>) -> Problem {
        Problem::linear(FeasibleSet::lp_ball(p, radius).unwrap(), bias).unwrap()
    }

    fn run(
        problem: &Problem,
        n: usize,
        seed: u64,
        disable_noise: bool,
    ) -> Result<RunReport, SolverError> {
        let mut cfg = TreeSfwConfig::for_problem(problem, n, budget(1.0, 1e-6), seed).unwrap();
        cfg.disable_noise = disable_noise;
        let mut data_rng = ChaCha12Rng::seed_from_u64(seed ^ 0x9e3779b97f4a7c15);
        let dataset = problem.generate_dataset(n, &mut data_rng);
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        noisy_tree_sfw(&dataset, problem, &cfg, &mut rng)
    }

    #[test]
    fn noise_variances_match_the_closed_forms() {
        // kappa = 1 comes from p = 2; with L0 = 1, delta = 1/e, eps = 1,
        // b = 100 the root variance is 8 kappa L0^2 ln(1/delta) / (b eps)^2
        // = 8e-4.
        let problem = linear_ball_problem(2.0, 0.5, vec![0.1; 4]);
        let mut cfg =
            TreeSfwConfig::for_problem(&problem, 4096, budget(1.0, (-1.0f64).exp()), 3).unwrap();
        cfg.b = 100;
        assert_eq!(cfg.space.kappa, 1.0);
        assert!((cfg.sigma2_root() - 8e-4).abs() < 1e-18);
        // Linear loss: L1 = 0, so corrections carry no noise.
        assert_eq!(cfg.sigma2_delta(), 0.0);
        cfg.disable_noise = true;
        assert_eq!(cfg.sigma2_root(), 0.0);
    }

    #[test]
    fn noise_variance_ratio_is_sixteen_l1m_over_l0_squared() {
        let space = FeasibleSet::lp_ball(2.0, 2.0).unwrap();
        let problem = Problem::least_squares(space, vec![0.2; 6], 1.5).unwrap();
        let cfg = TreeSfwConfig::for_problem(&problem, 4096, budget(0.7, 1e-5), 5).unwrap();
        let ratio = cfg.sigma2_delta() / cfg.sigma2_root();
        let expected = 16.0 * (problem.l1 * problem.m_diam / problem.l0).powi(2);
        assert!(
            (ratio / expected - 1.0).abs() < 1e-12,
            "ratio {ratio} vs expected {expected}"
        );
        // And both match the generic calibration applied to the two
        // sensitivities.
        let b = cfg.b as f64;
        let root = gg_calibrate(2.0 * problem.l0 / b, cfg.space.kappa, &cfg.budget);
        let delta =
            gg_calibrate(8.0 * problem.l1 * problem.m_diam / b, cfg.space.kappa, &cfg.budget);
        assert_eq!(cfg.sigma2_root(), root);
        assert_eq!(cfg.sigma2_delta(), delta);
    }

    #[test]
    fn zero_variance_linear_problem_converges_noiselessly() {
        // All samples identical (biases pinned at 1), so every estimate
        // is the exact population gradient and the first leaf step (eta =
        // 1) jumps straight to the minimizing vertex.
        let problem = linear_ball_problem(1.5, 1.0, vec![1.0; 4]);
        let report = run(&problem, 4096, 11, true).unwrap();
        let excess = report.excess_risk.unwrap();
        assert!(excess <= 1e-6, "excess risk {excess} after noiseless run");
        assert!(report.bias_trace.max_gap().unwrap() <= 0.0);
    }

    #[test]
    fn least_squares_converges_at_the_frank_wolfe_rate() {
        // Identical samples again (deterministic gradients); the curvature
        // makes convergence sublinear rather than one-shot. After phase T
        // the last completed step index is m = 3 * 2^(T-1) - 1 >= 95, and
        // the classical rate gives excess <= 2 L1 M^2 / (m + 2).
        let space = FeasibleSet::lp_ball(2.0, 1.0).unwrap();
        let problem = Problem::least_squares(space, vec![1.0; 5], 1.0).unwrap();
        let report = run(&problem, 4096, 13, true).unwrap();
        let excess = report.excess_risk.unwrap();
        let budget_bound = 0.04 * problem.l1 * problem.m_diam * problem.m_diam;
        assert!(excess <= budget_bound, "excess {excess} above rate bound {budget_bound}");
    }

    #[test]
    fn sample_budget_holds_across_the_size_range() {
        let problem = linear_ball_problem(1.5, 1.0, vec![0.3, -0.2]);
        for shift in [6usize, 8, 10, 14, 18] {
            for n in [1usize << shift, (1usize << shift) + 17] {
                let sched = tree_sfw_schedule(n).unwrap();
                let report = run(&problem, n, 100 + shift as u64, false).unwrap();
                assert_eq!(report.samples_consumed, sched.demand);
                assert!(report.samples_consumed <= n);
            }
        }
    }

    #[test]
    fn output_feasible_with_noise_on() {
        let radius = 0.7;
        let problem = linear_ball_problem(1.3, radius, vec![0.4, 0.0, -0.6]);
        let report = run(&problem, 4096, 21, false).unwrap();
        let norm = lp_norm(&report.x_out, 1.3).unwrap();
        assert!(norm <= radius * (1.0 + 1e-9), "||x||_p = {norm} beyond {radius}");
        assert!(report.excess_risk.unwrap().is_finite());
    }

    #[test]
    fn bias_trace_stays_under_the_bound_with_noise() {
        let problem = linear_ball_problem(1.5, 0.5, {
            let mut bias = vec![0.0; 20];
            for (j, b) in bias.iter_mut().enumerate() {
                *b = 0.8 * if j % 2 == 0 { 1.0 } else { -1.0 };
            }
            bias
        });
        let report = run(&problem, 4096, 17, false).unwrap();
        assert_eq!(report.bias_trace.entries.len(), (1 << 7) - 2);
        let gap = report.bias_trace.max_gap().unwrap();
        assert!(gap <= 0.0, "observed bias exceeded its bound by {gap}");
        // The bound is meaningful, not vacuous: within a modest factor of
        // the largest observation.
        let max_obs = report
            .bias_trace
            .entries
            .iter()
            .map(|e| e.observed)
            .fold(0.0f64, f64::max);
        let max_bound = report
            .bias_trace
            .entries
            .iter()
            .map(|e| e.bound)
            .fold(0.0f64, f64::max);
        assert!(max_bound < 100.0 * max_obs.max(1e-3), "bound {max_bound} is vacuous");
    }

    #[test]
    fn polytope_backend_runs_and_stays_feasible() {
        let poly = crate::geometry::Polytope::l1_ball(3, 1.0).unwrap();
        let problem =
            Problem::linear(FeasibleSet::Polytope(poly), vec![0.5, -0.25, 0.1]).unwrap();
        let cfg = TreeSfwConfig::for_problem(&problem, 4096, budget(1.0, 1e-6), 37).unwrap();
        // Polyhedral regularity for the 6-vertex cross-polytope.
        assert!((cfg.space.kappa - 2.0 * std::f64::consts::E * 6.0f64.ln()).abs() < 1e-12);
        assert!((cfg.space.r - (2.0 * 6.0f64.ln() + 1.0)).abs() < 1e-12);
        let mut data_rng = ChaCha12Rng::seed_from_u64(99);
        let dataset = problem.generate_dataset(4096, &mut data_rng);
        let mut rng = ChaCha12Rng::seed_from_u64(37);
        let report = noisy_tree_sfw(&dataset, &problem, &cfg, &mut rng).unwrap();
        assert!(problem.space.contains(&report.x_out, 1e-9).unwrap());
        assert!(report.excess_risk.unwrap().is_finite());
    }

    #[test]
    fn identical_runs_replay_bitwise() {
        let problem = linear_ball_problem(1.8, 1.0, vec![0.2, -0.5, 0.7, 0.0]);
        let a = run(&problem, 1024, 5, false).unwrap();
        let b = run(&problem, 1024, 5, false).unwrap();
        let bits =
            |xs: &[f64]| xs.iter().map(|v| v.to_bits()).collect::<Vec<u64>>();
        assert_eq!(bits(&a.x_out), bits(&b.x_out));
        assert_eq!(a.samples_consumed, b.samples_consumed);
        assert_eq!(
            a.excess_risk.unwrap().to_bits(),
            b.excess_risk.unwrap().to_bits()
        );
        assert_eq!(a.bias_trace.entries.len(), b.bias_trace.entries.len());
        for (ea, eb) in a.bias_trace.entries.iter().zip(&b.bias_trace.entries) {
            assert_eq!(ea.observed.to_bits(), eb.observed.to_bits());
            assert_eq!(ea.bound.to_bits(), eb.bound.to_bits());
        }
        let c = run(&problem, 1024, 6, false).unwrap();
        assert_ne!(bits(&a.x_out), bits(&c.x_out), "different seeds should differ");
    }

    #[test]
    fn non_finite_gradients_surface_as_errors_with_context() {
        let space = FeasibleSet::lp_ball(2.0, 10.0).unwrap();
        let problem = Problem::least_squares(space, vec![0.0, 0.0], 1.0).unwrap();
        // Hand-built rows whose features overflow the gradient once the
        // iterate moves away from the origin; skipping validate_for on
        // purpose.
        let mut rows = Vec::new();
        for _ in 0..64 {
            rows.extend_from_slice(&[1e307, 1e307, 1.0]);
        }
        let dataset = Dataset::from_rows(2, SampleEncoding::FeatureLabel, rows).unwrap();
        let mut cfg = TreeSfwConfig::for_problem(&problem, 64, budget(1.0, 1e-6), 1).unwrap();
        cfg.disable_noise = true;
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let err = noisy_tree_sfw(&dataset, &problem, &cfg, &mut rng).unwrap_err();
        match err {
            SolverError::NonFinite { context } => {
                assert!(context.contains("phase 1"), "context: {context}");
            }
            other => panic!("expected NonFinite, got {other}"),
        }
    }

    #[test]
    fn config_validation_rejects_understated_constants_and_bad_starts() {
        let problem = linear_ball_problem(1.5, 1.0, vec![0.1, 0.2]);
        let mut data_rng = ChaCha12Rng::seed_from_u64(2);
        let dataset = problem.generate_dataset(256, &mut data_rng);
        let good = TreeSfwConfig::for_problem(&problem, 256, budget(1.0, 1e-6), 0).unwrap();
        good.validate_for(&dataset, &problem).unwrap();

        let mut understated = good.clone();
        understated.l0 = 0.5 * problem.l0;
        assert!(matches!(
            understated.validate_for(&dataset, &problem),
            Err(SolverError::BadConstant { what: "l0", .. })
        ));

        let mut outside = good.clone();
        outside.x0 = vec![5.0, 5.0];
        assert!(matches!(
            outside.validate_for(&dataset, &problem),
            Err(SolverError::InfeasibleStart)
        ));

        let mut greedy = good.clone();
        greedy.b = 10_000;
        assert!(matches!(
            greedy.validate_for(&dataset, &problem),
            Err(SolverError::DemandExceedsData { .. })
        ));
    }
}
