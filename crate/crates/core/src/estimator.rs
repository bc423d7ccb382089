//! Iterative estimation of the sparse-cut closure value.
//!
//! `estimate_zcut` alternates LP solves with cut generation over a cyclic
//! family of supports: while the LP value keeps improving by more than ε
//! the current support is reused, otherwise the next support is tried, and
//! the run stops once every support in a row fails to improve. Cuts are
//! found by row generation (`generate_cut`): a separation LP maximizes the
//! violation of `x*` over inequalities with unit L1-norm coefficients on
//! the support, and an exact inner optimization over the integer points
//! either certifies validity or supplies a new point for the next round.
//! Certified cuts have the ε slack folded into the right-hand side, so
//! every stored cut is exactly valid for the integer hull.
//!
//! Minimize instances are handled by mirroring the improvement test, the
//! cut direction (≥ instead of ≤), and the inner optimization.

use crate::instance::{Cut, Instance, Kind, Q, Relation, Sense, VarKind};
use crate::kernel::{
    enumerate_integer_points_with_cap, optimize_over_points, solve_lp, solve_milp, KernelError,
    PointSet, SolveStatus, DEFAULT_POINT_CAP,
};
use crate::simplex::{solve_linear_program, LinearProgram, SimplexError, TableauStatus};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeSet;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Clone)]
pub struct EstimatorConfig {
    pub epsilon: Q,
    pub max_cuts: usize,
    pub max_rounds: usize,
    /// Lattice cap for enumerating integer points; past it the inner
    /// optimization falls back to branch-and-bound.
    pub point_cap: u64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            epsilon: Q::new(BigInt::one(), BigInt::from(1_000_000)),
            max_cuts: 200,
            max_rounds: 500,
            point_cap: DEFAULT_POINT_CAP,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    IntegralSolution,
    StalledAllSupports,
    CapHit,
}

#[derive(Debug, Clone)]
pub struct TraceRow {
    pub round: usize,
    pub support: usize,
    pub z: Q,
    /// Separation violation when a cut was attempted this round.
    pub violation: Option<Q>,
    /// Index into `cuts_added`, when this round stored a cut.
    pub cut_id: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct ClosureRun {
    pub z_estimate: Q,
    pub cuts_added: Vec<Cut>,
    pub rounds: usize,
    pub termination: Termination,
    pub trace: Vec<TraceRow>,
}

impl ClosureRun {
    pub fn trace_csv(&self) -> String {
        let mut s = String::from("round,support_id,z_value,violation,cut_id\n");
        for r in &self.trace {
            writeln!(
                s,
                "{},{},{},{},{}",
                r.round,
                r.support,
                crate::instance::format_rational(&r.z),
                r.violation.as_ref().map(crate::instance::format_rational).unwrap_or_default(),
                r.cut_id.map(|i| i.to_string()).unwrap_or_default(),
            )
            .unwrap();
        }
        s
    }
}

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Simplex(#[from] SimplexError),
    #[error("LP relaxation not optimal: {0:?}")]
    LpFailed(SolveStatus),
    #[error("inner optimization failed: {0:?} (missing variable bounds?)")]
    InnerFailed(SolveStatus),
    #[error("epsilon must be positive")]
    BadEpsilon,
}

/// Inner optimizer over the integer points: enumerate-and-scan when the
/// lattice fits under the cap, branch-and-bound otherwise.
enum Inner {
    Points(PointSet),
    BranchBound,
}

impl Inner {
    fn build(instance: &Instance, cap: u64) -> Result<Self, EstimatorError> {
        match enumerate_integer_points_with_cap(instance, cap) {
            Ok(p) => Ok(Inner::Points(p)),
            Err(KernelError::CapExceeded { .. }) => Ok(Inner::BranchBound),
            Err(e) => Err(e.into()),
        }
    }

    /// Optimize `alpha` (dense over all vars) over the integer points.
    fn optimize(
        &self,
        instance: &Instance,
        alpha: &[Q],
        maximize: bool,
    ) -> Result<(Q, Vec<Q>), EstimatorError> {
        match self {
            Inner::Points(points) => {
                let Some((v, idx)) = optimize_over_points(points, alpha, maximize) else {
                    return Err(EstimatorError::InnerFailed(SolveStatus::Infeasible));
                };
                Ok((v, points.point_as_rationals(idx)))
            }
            Inner::BranchBound => {
                let mut inst = instance.clone();
                inst.objective = alpha.to_vec();
                inst.sense = if maximize { Sense::Maximize } else { Sense::Minimize };
                let r = solve_milp(&inst, &[])?;
                if r.status != SolveStatus::Optimal {
                    return Err(EstimatorError::InnerFailed(r.status));
                }
                Ok((r.value, r.solution))
            }
        }
    }
}

fn max_upper_bound(instance: &Instance) -> Q {
    instance
        .bounds
        .iter()
        .filter_map(|(_, u)| u.clone())
        .max()
        .unwrap_or_else(Q::one)
}

/// One round of row generation on a single support. Returns the certified
/// cut and the separation violation, or `None` with the violation when no
/// cut separates `x_star` by more than ε.
#[allow(clippy::too_many_arguments)]
fn generate_cut_with_pool(
    instance: &Instance,
    support: &BTreeSet<usize>,
    x_star: &[Q],
    config: &EstimatorConfig,
    inner: &Inner,
    pool: &mut Vec<Vec<Q>>,
) -> Result<(Option<Cut>, Option<Q>), EstimatorError> {
    if support.is_empty() {
        return Ok((None, None));
    }
    let maximize = instance.sense == Sense::Maximize;
    let cols: Vec<usize> = support.iter().copied().collect();
    let k = cols.len();
    // Undominated packing cuts have nonnegative coefficients.
    let with_neg = instance.kind != Kind::Packing;
    // Layout: alpha_plus[k], (alpha_minus[k]), beta_plus, beta_minus.
    let nvars = if with_neg { 2 * k + 2 } else { k + 2 };
    let bp = nvars - 2;
    let bm = nvars - 1;
    let beta_bound = Q::one() + max_upper_bound(instance) * Q::from_integer(BigInt::from(k as i64));
    loop {
        // Separation LP: maximize the violation at x_star subject to
        // validity on the pooled points and the L1 normalization.
        let mut c = vec![Q::zero(); nvars];
        let sgn = if maximize { Q::one() } else { -Q::one() };
        for (t, &j) in cols.iter().enumerate() {
            c[t] = &x_star[j] * &sgn;
            if with_neg {
                c[k + t] = -&x_star[j] * &sgn;
            }
        }
        c[bp] = -&sgn;
        c[bm] = sgn.clone();
        let mut rows: Vec<(Vec<(usize, Q)>, Relation, Q)> = Vec::new();
        for p in pool.iter() {
            let mut coeffs: Vec<(usize, Q)> = Vec::new();
            for (t, &j) in cols.iter().enumerate() {
                if !p[j].is_zero() {
                    coeffs.push((t, &p[j] * &sgn));
                    if with_neg {
                        coeffs.push((k + t, -&p[j] * &sgn));
                    }
                }
            }
            coeffs.push((bp, -&sgn));
            coeffs.push((bm, sgn.clone()));
            rows.push((coeffs, Relation::Le, Q::zero()));
        }
        let norm: Vec<(usize, Q)> = (0..if with_neg { 2 * k } else { k })
            .map(|t| (t, Q::one()))
            .collect();
        rows.push((norm, Relation::Eq, Q::one()));
        rows.push((vec![(bp, Q::one())], Relation::Le, beta_bound.clone()));
        rows.push((vec![(bm, Q::one())], Relation::Le, beta_bound.clone()));
        let sep = solve_linear_program(&LinearProgram { n: nvars, c, rows })?;
        if sep.status != TableauStatus::Optimal {
            return Err(EstimatorError::LpFailed(match sep.status {
                TableauStatus::Infeasible => SolveStatus::Infeasible,
                _ => SolveStatus::Unbounded,
            }));
        }
        let violation = sep.value.clone();
        if violation <= config.epsilon {
            return Ok((None, Some(violation)));
        }
        let mut alpha = vec![Q::zero(); instance.num_vars];
        for (t, &j) in cols.iter().enumerate() {
            alpha[j] = sep.x[t].clone();
            if with_neg {
                alpha[j] -= &sep.x[k + t];
            }
        }
        let beta = &sep.x[bp] - &sep.x[bm];
        // Exact validity check over the integer points.
        let (opt, witness) = inner.optimize(instance, &alpha, maximize)?;
        let slack_ok = if maximize { &opt - &beta } else { &beta - &opt };
        if slack_ok <= config.epsilon {
            // Fold the slack into the rhs so the cut is exactly valid.
            let rhs = if maximize { beta.clone().max(opt) } else { beta.clone().min(opt) };
            let coeffs: Vec<(usize, Q)> = cols
                .iter()
                .filter(|&&j| !alpha[j].is_zero())
                .map(|&j| (j, alpha[j].clone()))
                .collect();
            let relation = if maximize { Relation::Le } else { Relation::Ge };
            let cut = Cut::new(coeffs, relation, rhs, support.clone());
            return Ok((Some(cut), Some(violation)));
        }
        pool.push(witness);
    }
}

/// Generate one valid cut on `support` separating `x_star`, if such a cut
/// with violation above ε exists.
pub fn generate_cut(
    instance: &Instance,
    support: &BTreeSet<usize>,
    x_star: &[Q],
    config: &EstimatorConfig,
) -> Result<Option<Cut>, EstimatorError> {
    let inner = Inner::build(instance, config.point_cap)?;
    let mut pool = Vec::new();
    let (cut, _) = generate_cut_with_pool(instance, support, x_star, config, &inner, &mut pool)?;
    Ok(cut)
}

/// Iteratively estimate the closure value over a family of supports.
pub fn estimate_zcut(
    instance: &Instance,
    supports: &[BTreeSet<usize>],
    config: &EstimatorConfig,
) -> Result<ClosureRun, EstimatorError> {
    if !config.epsilon.is_positive() {
        return Err(EstimatorError::BadEpsilon);
    }
    let maximize = instance.sense == Sense::Maximize;
    let t = supports.len();
    let inner = Inner::build(instance, config.point_cap)?;
    let mut pools: Vec<Vec<Vec<Q>>> = vec![Vec::new(); t];
    let mut cuts: Vec<Cut> = Vec::new();
    let mut trace: Vec<TraceRow> = Vec::new();
    let mut i = 0usize;
    let mut count = 0usize;
    let mut z_prev: Option<Q> = None;
    let mut rounds = 0usize;
    let termination = loop {
        let lp = solve_lp(instance, &cuts)?;
        if lp.status != SolveStatus::Optimal {
            return Err(EstimatorError::LpFailed(lp.status));
        }
        let z = lp.value.clone();
        let integral = instance
            .var_kinds
            .iter()
            .zip(&lp.solution)
            .all(|(k, v)| *k != VarKind::Integer || v.is_integer());
        if integral {
            trace.push(TraceRow { round: rounds, support: i, z, violation: None, cut_id: None });
            break Termination::IntegralSolution;
        }
        if rounds >= config.max_rounds || cuts.len() >= config.max_cuts {
            trace.push(TraceRow { round: rounds, support: i, z, violation: None, cut_id: None });
            break Termination::CapHit;
        }
        let improved = match &z_prev {
            None => true,
            Some(p) => {
                let delta = if maximize { p - &z } else { &z - p };
                delta > config.epsilon
            }
        };
        if improved {
            count = 0;
        } else {
            if count == t {
                trace.push(TraceRow { round: rounds, support: i, z, violation: None, cut_id: None });
                break Termination::StalledAllSupports;
            }
            i = (i + 1) % t;
            count += 1;
        }
        let (cut, violation) =
            generate_cut_with_pool(instance, &supports[i], &lp.solution, config, &inner, &mut pools[i])?;
        let cut_id = cut.as_ref().map(|_| cuts.len());
        if let Some(c) = cut {
            cuts.push(c);
        }
        trace.push(TraceRow { round: rounds, support: i, z: z.clone(), violation, cut_id });
        z_prev = Some(z);
        rounds += 1;
    };
    let z_estimate = trace.last().map(|r| r.z.clone()).unwrap_or_else(Q::zero);
    Ok(ClosureRun { z_estimate, cuts_added: cuts, rounds, termination, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{q, qr, Row};
    use crate::kernel::{enumerate_integer_points, exact_closure_value, OracleConfig};

    fn path_instance(rhs: Q) -> Instance {
        Instance::binary(
            Sense::Maximize,
            Kind::Packing,
            vec![q(1), q(1), q(1)],
            vec![
                Row::new(vec![(0, q(1)), (1, q(1))], Relation::Le, rhs.clone()),
                Row::new(vec![(0, q(1)), (2, q(1))], Relation::Le, rhs),
            ],
        )
    }

    fn pair_supports() -> Vec<BTreeSet<usize>> {
        vec![BTreeSet::from([0, 1]), BTreeSet::from([0, 2])]
    }

    #[test]
    fn estimate_matches_oracle_on_pairs() {
        let inst = path_instance(qr(3, 2));
        let run = estimate_zcut(&inst, &pair_supports(), &EstimatorConfig::default()).unwrap();
        let exact =
            exact_closure_value(&inst, &[vec![0, 1], vec![0, 2]], OracleConfig::default()).unwrap();
        assert_eq!(run.z_estimate, exact.value);
        assert_eq!(run.z_estimate, q(2));
        assert_eq!(run.termination, Termination::IntegralSolution);
    }

    #[test]
    fn integral_lp_means_no_cuts() {
        let inst = Instance::binary(
            Sense::Maximize,
            Kind::Packing,
            vec![q(1), q(1)],
            vec![Row::new(vec![(0, q(1)), (1, q(1))], Relation::Le, q(1))],
        );
        let run = estimate_zcut(&inst, &pair_supports()[..1].to_vec(), &EstimatorConfig::default())
            .unwrap();
        assert_eq!(run.termination, Termination::IntegralSolution);
        assert!(run.cuts_added.is_empty());
        assert_eq!(run.z_estimate, q(1));
    }

    #[test]
    fn generated_cut_separates_and_is_valid() {
        let inst = path_instance(qr(3, 2));
        let x_star = vec![qr(3, 4), qr(3, 4), qr(3, 4)];
        let cut = generate_cut(&inst, &BTreeSet::from([0, 1]), &x_star, &EstimatorConfig::default())
            .unwrap()
            .expect("a violated cut exists");
        assert!(cut.is_well_formed());
        // Valid on every integer point, violated at x_star.
        let pts = enumerate_integer_points(&inst).unwrap();
        for idx in 0..pts.len() {
            let p = pts.point_as_rationals(idx);
            assert!(cut.as_row().satisfied_by(&p), "cut violated by {p:?}");
        }
        assert!(!cut.as_row().satisfied_by(&x_star));
    }

    #[test]
    fn integral_point_yields_none() {
        let inst = path_instance(qr(3, 2));
        let x_star = vec![q(0), q(1), q(1)];
        let cut =
            generate_cut(&inst, &BTreeSet::from([0, 1]), &x_star, &EstimatorConfig::default())
                .unwrap();
        assert!(cut.is_none());
    }

    #[test]
    fn empty_support_yields_none() {
        let inst = path_instance(qr(3, 2));
        let x_star = vec![qr(3, 4); 3];
        let cut =
            generate_cut(&inst, &BTreeSet::new(), &x_star, &EstimatorConfig::default()).unwrap();
        assert!(cut.is_none());
    }

    #[test]
    fn covering_mirror() {
        let inst = Instance::binary(
            Sense::Minimize,
            Kind::Covering,
            vec![q(1), q(1)],
            vec![Row::new(vec![(0, q(1)), (1, q(1))], Relation::Ge, qr(3, 2))],
        );
        let run = estimate_zcut(&inst, &[BTreeSet::from([0, 1])], &EstimatorConfig::default())
            .unwrap();
        assert_eq!(run.z_estimate, q(2));
        // Stored covering cuts use >= and hold on all integer points.
        let pts = enumerate_integer_points(&inst).unwrap();
        for c in &run.cuts_added {
            assert_eq!(c.relation, Relation::Ge);
            for idx in 0..pts.len() {
                assert!(c.as_row().satisfied_by(&pts.point_as_rationals(idx)));
            }
        }
    }

    #[test]
    fn sandwich_and_monotone_z() {
        let inst = path_instance(qr(5, 3));
        let supports = pair_supports();
        let run = estimate_zcut(&inst, &supports, &EstimatorConfig::default()).unwrap();
        let lp = solve_lp(&inst, &[]).unwrap();
        let ip = solve_milp(&inst, &[]).unwrap();
        let exact =
            exact_closure_value(&inst, &[vec![0, 1], vec![0, 2]], OracleConfig::default()).unwrap();
        assert!(ip.value <= exact.value);
        assert!(exact.value <= run.z_estimate);
        assert!(run.z_estimate <= lp.value);
        for w in run.trace.windows(2) {
            assert!(w[1].z <= w[0].z, "z must be non-increasing");
        }
    }

    #[test]
    fn deterministic_traces() {
        let inst = path_instance(qr(3, 2));
        let a = estimate_zcut(&inst, &pair_supports(), &EstimatorConfig::default()).unwrap();
        let b = estimate_zcut(&inst, &pair_supports(), &EstimatorConfig::default()).unwrap();
        assert_eq!(a.trace_csv(), b.trace_csv());
        assert_eq!(a.cuts_added.len(), b.cuts_added.len());
    }

    #[test]
    fn cap_hit_records_termination() {
        let inst = path_instance(qr(3, 2));
        let cfg = EstimatorConfig { max_rounds: 0, ..Default::default() };
        let run = estimate_zcut(&inst, &pair_supports(), &cfg).unwrap();
        assert_eq!(run.termination, Termination::CapHit);
        assert!(run.cuts_added.is_empty());
    }

    #[test]
    fn rejects_nonpositive_epsilon() {
        let inst = path_instance(qr(3, 2));
        let cfg = EstimatorConfig { epsilon: q(0), ..Default::default() };
        assert!(matches!(
            estimate_zcut(&inst, &pair_supports(), &cfg),
            Err(EstimatorError::BadEpsilon)
        ));
    }
}
