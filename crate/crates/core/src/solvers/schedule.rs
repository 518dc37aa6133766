//! Hyperparameter schedules shared by the two solvers: phase/batch sizing
//! and tree traversal order for the tree solver, score sensitivities and
//! the step size for the polyhedral solver.

use serde::Serialize;

use super::SolverError;

/// Phase count and root batch size for the tree solver, plus the exact
/// number of dataset entries a run will consume.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TreeSchedule {
    pub t_phases: usize,
    pub b: usize,
    /// Total entries drawn across all phases: the root batch plus every
    /// right-child batch, with per-vertex flooring applied.
    pub demand: usize,
}

/// Exact sample demand of a run with `t_phases` phases and root batch `b`:
/// each phase draws the root batch and one batch of max(1, floor(b / 2^j))
/// per right child, of which there are 2^(j-1) at depth j. Monotone
/// nondecreasing in `b`.
pub fn tree_demand(t_phases: usize, b: usize) -> usize {
    let mut total = 0usize;
    for t in 1..=t_phases {
        total += b;
        for j in 1..=t {
            total += (1usize << (j - 1)) * (b >> j).max(1);
        }
    }
    total
}

/// Phase count T = floor(log2(n) / 2) and root batch b = floor(4n /
/// log2(n)^2), with b reduced when needed to the largest value whose exact
/// demand fits in n.
pub fn tree_sfw_schedule(n: usize) -> Result<TreeSchedule, SolverError> {
    if n < 64 {
        return Err(SolverError::InsufficientData { min: 64, got: n });
    }
    let log2n = (n as f64).log2();
    let t_phases = (log2n / 2.0).floor() as usize;
    let b_raw = (4.0 * n as f64 / (log2n * log2n)).floor() as usize;

    let b = if tree_demand(t_phases, b_raw) <= n {
        b_raw
    } else {
        // Largest b with demand <= n; demand is monotone in b, so a
        // binary search over [1, b_raw] finds it.
        let (mut lo, mut hi) = (1usize, b_raw);
        while lo < hi {
            let mid = (lo + hi).div_ceil(2);
            if tree_demand(t_phases, mid) <= n {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        lo
    };
    let demand = tree_demand(t_phases, b);
    if demand > n {
        return Err(SolverError::DemandExceedsData { demand, got: n });
    }
    Ok(TreeSchedule { t_phases, b, demand })
}

/// One vertex of the phase-t traversal. The path is `depth` bits of
/// `label`, most significant first, so `label` is the integer the bit
/// string spells out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TreeNode {
    /// Depth |s| in [1, t].
    pub depth: usize,
    /// Integer value of the bit string s.
    pub label: u64,
    pub is_leaf: bool,
    /// Last bit of s; right children are the ones that consume a batch,
    /// left children copy the parent state.
    pub is_right: bool,
    /// Step size 2 / (2^(t-1) + label + 1); applied at leaves.
    pub eta: f64,
    /// Nominal batch fraction 2^(-depth) of the root batch.
    pub batch_fraction: f64,
}

impl TreeNode {
    /// The bit string s, e.g. "101" for depth 3, label 5.
    pub fn path_string(&self) -> String {
        (0..self.depth)
            .rev()
            .map(|bit| if self.label >> bit & 1 == 1 { '1' } else { '0' })
            .collect()
    }
}

/// Depth-first, left-child-first order over the nonempty bit strings of
/// length at most `t`: the traversal order of one phase of the tree
/// solver. Phases are at least 1.
pub fn dfs_schedule(t: usize) -> Vec<TreeNode> {
    assert!(t >= 1, "phase index must be at least 1");
    assert!(t < 63, "phase depth {t} overflows the label type");
    let mut out = Vec::with_capacity((1usize << (t + 1)) - 2);
    let base = (1u64 << (t - 1)) as f64;
    fn walk(depth: usize, label: u64, t: usize, base: f64, out: &mut Vec<TreeNode>) {
        out.push(TreeNode {
            depth,
            label,
            is_leaf: depth == t,
            is_right: label & 1 == 1,
            eta: 2.0 / (base + label as f64 + 1.0),
            batch_fraction: (0.5f64).powi(depth as i32),
        });
        if depth < t {
            walk(depth + 1, label << 1, t, base, out);
            walk(depth + 1, (label << 1) | 1, t, base, out);
        }
    }
    walk(1, 0, t, base, &mut out);
    walk(1, 1, t, base, &mut out);
    out
}

/// Score sensitivity of the polyhedral solver's vertex selection at step
/// t: the initial-batch term (1-eta)^t * 2 L0 M / n for t = 0, and its
/// max with the per-step drift term 2 eta (L1 M^2 + L0 M) afterwards.
pub fn poly_sensitivity_schedule(
    t: usize,
    eta: f64,
    l0: f64,
    l1: f64,
    m_diam: f64,
    n: usize,
) -> f64 {
    assert!((0.0..1.0).contains(&eta), "step size out of range: {eta}");
    assert!(l0 >= 0.0 && l1 >= 0.0 && m_diam >= 0.0, "constants must be nonnegative");
    assert!(n >= 1, "empty dataset");
    let initial = (1.0 - eta).powi(t as i32) * 2.0 * l0 * m_diam / n as f64;
    if t == 0 {
        initial
    } else {
        initial.max(2.0 * eta * (l1 * m_diam * m_diam + l0 * m_diam))
    }
}

/// Step size of the polyhedral solver, ln(n / ln K) / n. Needs K >= 2
/// vertices and enough samples for the value to land in (0, 1).
pub fn poly_step_size(n: usize, num_vertices: usize) -> Result<f64, SolverError> {
    if num_vertices < 2 {
        return Err(SolverError::Geometry(crate::geometry::GeometryError::TooFewVertices(
            num_vertices,
        )));
    }
    if n < 4 {
        return Err(SolverError::InsufficientData { min: 4, got: n });
    }
    let eta = (n as f64 / (num_vertices as f64).ln()).ln() / n as f64;
    if !(0.0..1.0).contains(&eta) || eta == 0.0 {
        return Err(SolverError::InvalidStep(eta));
    }
    Ok(eta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    #[test]
    fn schedule_matches_hand_computed_values() {
        // n = 4096: T = 12/2 = 6, b = floor(4 * 4096 / 144) = 113, and
        // the demand (1814 entries) fits, so no capping.
        let s = tree_sfw_schedule(4096).unwrap();
        assert_eq!((s.t_phases, s.b), (6, 113));
        assert_eq!(s.demand, tree_demand(6, 113));
        assert!(s.demand <= 4096);

        // n = 64: T = 3, b = floor(256 / 36) = 7.
        let s = tree_sfw_schedule(64).unwrap();
        assert_eq!((s.t_phases, s.b), (3, 7));
        assert!(s.demand <= 64);

        assert!(matches!(
            tree_sfw_schedule(63),
            Err(SolverError::InsufficientData { min: 64, got: 63 })
        ));
    }

    #[test]
    fn demand_counts_every_vertex_batch() {
        // T = 2, b = 8: phase 1 draws 8 + 4, phase 2 draws 8 + 4 + 2*2.
        assert_eq!(tree_demand(2, 8), 12 + 16);
        // Flooring bottoms out at one entry per vertex: b = 1 makes every
        // phase cost 1 + (2^t - 1) = 2^t.
        assert_eq!(tree_demand(3, 1), 2 + 4 + 8);
        // Monotone in b.
        for t in 1..=6 {
            for b in 1..200 {
                assert!(tree_demand(t, b) <= tree_demand(t, b + 1));
            }
        }
    }

    #[test]
    fn schedule_picks_the_largest_feasible_batch() {
        for shift in 6..=18 {
            for n in [1usize << shift, (1usize << shift) + 1, (3usize << shift) / 2] {
                let s = tree_sfw_schedule(n).unwrap();
                assert!(s.demand <= n, "demand {} exceeds n {}", s.demand, n);
                let b_raw =
                    (4.0 * n as f64 / (n as f64).log2().powi(2)).floor() as usize;
                assert!(
                    s.b == b_raw || tree_demand(s.t_phases, s.b + 1) > n,
                    "b = {} not maximal for n = {}",
                    s.b,
                    n
                );
            }
        }
    }

    #[test]
    fn dfs_order_for_one_and_two_phases() {
        let t1 = dfs_schedule(1);
        assert_eq!(t1.len(), 2);
        assert_eq!((t1[0].depth, t1[0].label, t1[0].is_leaf), (1, 0, true));
        assert_eq!(t1[0].eta, 1.0);
        assert_eq!((t1[1].depth, t1[1].label), (1, 1));
        assert_eq!(t1[1].eta, 2.0 / 3.0);

        let t2 = dfs_schedule(2);
        let got: Vec<(usize, u64)> = t2.iter().map(|n| (n.depth, n.label)).collect();
        assert_eq!(got, vec![(1, 0), (2, 0), (2, 1), (1, 1), (2, 2), (2, 3)]);
        let leaf_etas: Vec<f64> =
            t2.iter().filter(|n| n.is_leaf).map(|n| n.eta).collect();
        assert_eq!(leaf_etas, vec![2.0 / 3.0, 2.0 / 4.0, 2.0 / 5.0, 2.0 / 6.0]);
        assert_eq!(t2[0].path_string(), "0");
        assert_eq!(t2[2].path_string(), "01");
        assert_eq!(t2[5].path_string(), "11");
        for n in &t2 {
            assert_eq!(n.batch_fraction, 0.5f64.powi(n.depth as i32));
            assert_eq!(n.is_right, n.label & 1 == 1);
        }
    }

    #[test]
    fn leaf_indices_cover_every_global_step() {
        // The global leaf index m = 2^(t-1) + label covers 1..=2^T across
        // phases with no gaps, and the leaf step size 2/(m+1) depends
        // only on m, so it is strictly decreasing in m.
        let t_max = 6usize;
        let mut etas: BTreeMap<u64, f64> = BTreeMap::new();
        for t in 1..=t_max {
            let mut last_m = 0u64;
            for node in dfs_schedule(t).iter().filter(|n| n.is_leaf) {
                let m = (1u64 << (t - 1)) + node.label;
                assert!(m > last_m, "leaf order not increasing in m");
                last_m = m;
                if let Some(prev) = etas.insert(m, node.eta) {
                    assert_eq!(prev, node.eta, "same m, different eta");
                }
            }
        }
        let ms: Vec<u64> = etas.keys().copied().collect();
        assert_eq!(ms[0], 1);
        assert!(ms.windows(2).all(|w| w[1] == w[0] + 1), "gap in leaf indices");
        assert!(*ms.last().unwrap() >= 1 << t_max);
        let eta_vals: Vec<f64> = etas.values().copied().collect();
        assert!(eta_vals.windows(2).all(|w| w[1] < w[0]), "eta not decreasing");
    }

    #[test]
    fn right_children_per_depth_double() {
        for t in 1..=5 {
            let sched = dfs_schedule(t);
            assert_eq!(sched.len(), (1 << (t + 1)) - 2);
            for j in 1..=t {
                let rights =
                    sched.iter().filter(|n| n.depth == j && n.is_right).count();
                assert_eq!(rights, 1 << (j - 1));
            }
        }
    }

    #[test]
    fn sensitivity_schedule_hand_values() {
        // t = 0 is the pure initial-batch sensitivity.
        assert_eq!(poly_sensitivity_schedule(0, 0.3, 2.0, 5.0, 1.5, 50), 2.0 * 2.0 * 1.5 / 50.0);
        // eta = 0: no decay and no drift term, every step equals 2 L0 M / n.
        for t in [0, 1, 7, 200] {
            assert_eq!(poly_sensitivity_schedule(t, 0.0, 1.0, 9.0, 2.0, 10), 0.4);
        }
        // L0 = L1 = M = 1, n = 100, eta = 0.05, t = 20:
        // max(0.95^20 * 0.02, 0.1 * 2) = 0.2.
        let s = poly_sensitivity_schedule(20, 0.05, 1.0, 1.0, 1.0, 100);
        assert!((s - 0.2).abs() < 1e-15, "got {s}");
    }

    #[test]
    fn sensitivity_decays_then_plateaus() {
        // Small eta so the initial arm dominates for a stretch before the
        // drift floor takes over.
        let (eta, l0, l1, m, n) = (0.001, 1.0, 0.5, 2.0, 100);
        let floor = 2.0 * eta * (l1 * m * m + l0 * m);
        let s0 = poly_sensitivity_schedule(0, eta, l0, l1, m, n);
        assert_eq!(s0, 2.0 * l0 * m / n as f64);
        let mut prev = s0;
        let mut hit_floor = false;
        for t in 1..5000 {
            let s = poly_sensitivity_schedule(t, eta, l0, l1, m, n);
            assert!(s <= prev + 1e-15, "sensitivity increased at t = {t}");
            assert!(s >= floor);
            hit_floor |= s == floor;
            prev = s;
        }
        assert!(hit_floor, "large t should sit on the drift floor");
        assert_eq!(prev, floor);

        // When the drift floor exceeds the initial arm, the t = 0
        // selection is still scored at the cheaper initial sensitivity
        // and the schedule steps up once at t = 1.
        let s0_jump = poly_sensitivity_schedule(0, 0.05, 1.0, 0.5, 2.0, 1000);
        let s1_jump = poly_sensitivity_schedule(1, 0.05, 1.0, 0.5, 2.0, 1000);
        assert!(s0_jump < s1_jump);
        assert_eq!(s1_jump, 2.0 * 0.05 * (0.5 * 4.0 + 2.0));
    }

    #[test]
    fn step_size_examples_and_rejections() {
        let eta = poly_step_size(1000, 6).unwrap();
        assert!((eta - (1000.0 / 6f64.ln()).ln() / 1000.0).abs() < 1e-15);
        assert!(eta > 0.0 && eta < 1.0);
        assert!(matches!(poly_step_size(1000, 1), Err(SolverError::Geometry(_))));
        assert!(matches!(poly_step_size(3, 4), Err(SolverError::InsufficientData { .. })));
        // So many vertices that n / ln K < 1: the formula goes negative.
        assert!(matches!(poly_step_size(4, 1000), Err(SolverError::InvalidStep(_))));
    }
}
