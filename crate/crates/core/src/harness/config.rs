//! Experiment configuration: a strict JSON schema (unknown keys are
//! errors) describing the solver, problem, geometry, and grids.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::geometry::{FeasibleSet, Polytope};
use crate::problems::Problem;

/// Environment variable overriding the configured output directory.
pub const OUT_DIR_ENV: &str = "GNFW_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    TreeSfw,
    PolySfw,
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverKind::TreeSfw => "tree_sfw",
            SolverKind::PolySfw => "poly_sfw",
        })
    }
}

/// Feasible set descriptor. `l1_ball` expands to the cross polytope with
/// K = 2d vertices; `lp_ball` keeps the smooth-geometry path.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeometrySpec {
    LpBall { p: f64, radius: f64 },
    L1Ball { radius: f64 },
    Polytope { vertices: Vec<Vec<f64>>, ambient_p: f64 },
}

impl GeometrySpec {
    pub fn build(&self, d: usize) -> Result<FeasibleSet, HarnessError> {
        Ok(match self {
            GeometrySpec::LpBall { p, radius } => FeasibleSet::lp_ball(*p, *radius)?,
            GeometrySpec::L1Ball { radius } => {
                FeasibleSet::Polytope(Polytope::l1_ball(d, *radius)?)
            }
            GeometrySpec::Polytope { vertices, ambient_p } => {
                let poly = Polytope::new(vertices.clone(), *ambient_p)?;
                if poly.dim() != d {
                    return Err(HarnessError::Config(format!(
                        "polytope dimension {} does not match the problem dimension {d}",
                        poly.dim()
                    )));
                }
                FeasibleSet::Polytope(poly)
            }
        })
    }

    /// Whether the built set takes the polyhedral solver path.
    pub fn is_polyhedral(&self) -> bool {
        !matches!(self, GeometrySpec::LpBall { .. })
    }

    /// Value of the shared `p_or_K` results column: the exponent for
    /// balls, the vertex count for polytopes.
    pub fn p_or_k(&self, d: usize) -> f64 {
        match self {
            GeometrySpec::LpBall { p, .. } => *p,
            GeometrySpec::L1Ball { .. } => (2 * d) as f64,
            GeometrySpec::Polytope { vertices, .. } => vertices.len() as f64,
        }
    }
}

/// Loss descriptor; the bias vector fixes the dimension.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "loss", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    Linear { bias: Vec<f64> },
    LeastSquares { bias: Vec<f64>, feature_scale: f64 },
}

impl ProblemSpec {
    pub fn dim(&self) -> usize {
        match self {
            ProblemSpec::Linear { bias } | ProblemSpec::LeastSquares { bias, .. } => bias.len(),
        }
    }

    pub fn build(&self, space: FeasibleSet) -> Result<Problem, HarnessError> {
        Ok(match self {
            ProblemSpec::Linear { bias } => Problem::linear(space, bias.clone())?,
            ProblemSpec::LeastSquares { bias, feature_scale } => {
                Problem::least_squares(space, bias.clone(), *feature_scale)?
            }
        })
    }
}

/// One experiment: a solver, a problem, and the (n, eps, trial) grid it
/// runs over. `seed_root` alone determines every random choice.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub solver: SolverKind,
    pub problem: ProblemSpec,
    pub geometry: GeometrySpec,
    pub n_grid: Vec<usize>,
    pub eps_grid: Vec<f64>,
    pub delta: f64,
    pub trials: usize,
    pub seed_root: u64,
    pub output_dir: PathBuf,
    /// Test only: run the solver with all noise zeroed. The CLI refuses
    /// such configs without an explicit unsafe override flag.
    #[serde(default)]
    pub disable_noise: bool,
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)?;
        let cfg: Self = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.n_grid.is_empty() {
            return Err(HarnessError::Config("n_grid must not be empty".into()));
        }
        if self.eps_grid.is_empty() {
            return Err(HarnessError::Config("eps_grid must not be empty".into()));
        }
        if let Some(&n) = self.n_grid.iter().find(|&&n| n < 4) {
            return Err(HarnessError::Config(format!("n_grid entries must be >= 4, got {n}")));
        }
        if let Some(&eps) = self.eps_grid.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
            return Err(HarnessError::Config(format!("eps_grid entries must be > 0, got {eps}")));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(HarnessError::Config(format!("delta must be in (0, 1), got {}", self.delta)));
        }
        if self.trials == 0 {
            return Err(HarnessError::Config("trials must be >= 1".into()));
        }
        if self.solver == SolverKind::PolySfw && !self.geometry.is_polyhedral() {
            return Err(HarnessError::Config(
                "poly_sfw requires a polyhedral geometry (l1_ball or polytope)".into(),
            ));
        }
        // Surface construction errors (bad bias, bad vertices, bad p)
        // at config time rather than inside a worker.
        self.build_problem()?;
        Ok(())
    }

    pub fn build_problem(&self) -> Result<Problem, HarnessError> {
        let d = self.problem.dim();
        self.problem.build(self.geometry.build(d)?)
    }

    pub fn p_or_k(&self) -> f64 {
        self.geometry.p_or_k(self.problem.dim())
    }
}

/// Output directory precedence: explicit CLI flag, then the environment
/// override, then the configured path.
pub fn resolve_output_dir(cli: Option<&Path>, cfg: &ExperimentConfig) -> PathBuf {
    if let Some(dir) = cli {
        return dir.to_path_buf();
    }
    if let Some(dir) = std::env::var_os(OUT_DIR_ENV) {
        return PathBuf::from(dir);
    }
    cfg.output_dir.clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_json() -> String {
        r#"{
            "solver": "tree_sfw",
            "problem": {"loss": "linear", "bias": [0.5, -0.25, 0.1]},
            "geometry": {"kind": "lp_ball", "p": 1.5, "radius": 1.0},
            "n_grid": [1024, 4096],
            "eps_grid": [1.0],
            "delta": 1e-6,
            "trials": 3,
            "seed_root": 7,
            "output_dir": "out"
        }"#
        .to_string()
    }

    #[test]
    fn parses_and_validates_a_well_formed_config() {
        let cfg: ExperimentConfig = serde_json::from_str(&sample_json()).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.solver, SolverKind::TreeSfw);
        assert_eq!(cfg.p_or_k(), 1.5);
        assert!(!cfg.disable_noise);
        let problem = cfg.build_problem().unwrap();
        assert_eq!(problem.d(), 3);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = sample_json().replace("\"seed_root\": 7", "\"seed_root\": 7, \"sed_root\": 1");
        let err = serde_json::from_str::<ExperimentConfig>(&text).unwrap_err();
        assert!(err.to_string().contains("sed_root"), "{err}");
        // Nested specs are strict too.
        let text = sample_json().replace("\"p\": 1.5,", "\"p\": 1.5, \"radius2\": 2.0,");
        assert!(serde_json::from_str::<ExperimentConfig>(&text).is_err());
    }

    #[test]
    fn semantic_validation_catches_bad_grids_and_solver_geometry() {
        let mut cfg: ExperimentConfig = serde_json::from_str(&sample_json()).unwrap();
        cfg.n_grid.clear();
        assert!(matches!(cfg.validate(), Err(HarnessError::Config(_))));

        let mut cfg: ExperimentConfig = serde_json::from_str(&sample_json()).unwrap();
        cfg.eps_grid = vec![0.0];
        assert!(cfg.validate().is_err());

        let mut cfg: ExperimentConfig = serde_json::from_str(&sample_json()).unwrap();
        cfg.trials = 0;
        assert!(cfg.validate().is_err());

        // poly_sfw over a smooth ball is a config error.
        let mut cfg: ExperimentConfig = serde_json::from_str(&sample_json()).unwrap();
        cfg.solver = SolverKind::PolySfw;
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("polyhedral"), "{err}");

        // Bad problem parameters surface at validation time.
        let mut cfg: ExperimentConfig = serde_json::from_str(&sample_json()).unwrap();
        cfg.problem = ProblemSpec::Linear { bias: vec![2.0] };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn geometry_specs_build_the_right_sets() {
        let l1 = GeometrySpec::L1Ball { radius: 2.0 };
        match l1.build(3).unwrap() {
            FeasibleSet::Polytope(p) => {
                assert_eq!(p.num_vertices(), 6);
                assert_eq!(p.diameter(), 4.0);
            }
            _ => panic!("expected a polytope"),
        }
        assert_eq!(l1.p_or_k(3), 6.0);
        assert!(l1.is_polyhedral());

        let tri = GeometrySpec::Polytope {
            vertices: vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0]],
            ambient_p: 2.0,
        };
        assert_eq!(tri.p_or_k(2), 3.0);
        assert!(tri.build(3).is_err(), "dimension mismatch must be caught");
    }

    #[test]
    fn output_dir_resolution_precedence() {
        let cfg: ExperimentConfig = serde_json::from_str(&sample_json()).unwrap();
        std::env::remove_var(OUT_DIR_ENV);
        assert_eq!(resolve_output_dir(None, &cfg), PathBuf::from("out"));
        std::env::set_var(OUT_DIR_ENV, "/tmp/envdir");
        assert_eq!(resolve_output_dir(None, &cfg), PathBuf::from("/tmp/envdir"));
        assert_eq!(
            resolve_output_dir(Some(Path::new("/tmp/cli")), &cfg),
            PathBuf::from("/tmp/cli")
        );
        std::env::remove_var(OUT_DIR_ENV);
    }
}
