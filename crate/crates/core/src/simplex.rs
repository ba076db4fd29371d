//! Dense revised simplex with a product-form basis factorization.
//!
//! Phase 1 uses artificial variables (skipped when the slack identity gives a
//! feasible start), phase 2 prices with Dantzig's rule and falls back to
//! Bland's rule after a stall, which guarantees termination under degeneracy.

use std::sync::Arc;

use ndarray::{Array1, Array2, ArrayView1};

use crate::error::{LpError, Result};
use crate::linalg::BasisFactorization;
use crate::lp::{
    Basis, BasicFeasibleSolution, SolveStats, StandardFormLP, TOL_FEAS, TOL_OBJ, TOL_PIVOT,
    TOL_ZERO,
};

#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    /// Hard pivot cap per solve; 0 means `50 * (n + m) + 10_000`.
    pub max_pivots: usize,
    /// Refactor the basis after this many eta updates.
    pub refactor_every: usize,
    /// Switch to Bland's rule after `factor * (n + m)` pivots without
    /// objective improvement.
    pub bland_stall_factor: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_pivots: 0,
            refactor_every: 64,
            bland_stall_factor: 5,
        }
    }
}

/// A simplex solver instance. Owns no problem data; mutable factorization
/// state lives on the stack of each solve, so a solver must not be shared
/// across threads mid-solve (use one per worker).
#[derive(Clone, Debug)]
pub struct SimplexSolver {
    stats: Arc<SolveStats>,
    opts: SolverOptions,
}

struct CoreOutcome {
    basic: Vec<usize>,
    x_basic: Array1<f64>,
    objective: f64,
    pivots: usize,
}

impl SimplexSolver {
    pub fn new(stats: Arc<SolveStats>) -> Self {
        Self {
            stats,
            opts: SolverOptions::default(),
        }
    }

    pub fn with_options(stats: Arc<SolveStats>, opts: SolverOptions) -> Self {
        Self { stats, opts }
    }

    pub fn stats(&self) -> &Arc<SolveStats> {
        &self.stats
    }

    /// Minimize (or maximize, per the LP's recorded sense) `c^T z` over the
    /// feasible region. `c` may be structural-only or full length.
    pub fn solve(&self, lp: &StandardFormLP, c: ArrayView1<'_, f64>) -> Result<BasicFeasibleSolution> {
        self.solve_restricted(lp, c, None, None)
    }

    /// `solve` with optional column bans (banned columns never enter the
    /// basis) and an optional right-hand-side override. Used by
    /// branch-and-bound to fix binary variables without rebuilding `A`.
    pub fn solve_restricted(
        &self,
        lp: &StandardFormLP,
        c: ArrayView1<'_, f64>,
        banned: Option<&[bool]>,
        b_override: Option<ArrayView1<'_, f64>>,
    ) -> Result<BasicFeasibleSolution> {
        let c_user = lp.extend_costs(c)?;
        let c_int = lp.internal_costs(c)?;
        let m = lp.m();
        let n = lp.n();
        let b = match b_override {
            Some(bv) => bv.to_owned(),
            None => lp.b.clone(),
        };
        if let Some(bn) = banned {
            if bn.len() != n {
                return Err(LpError::ShapeMismatch {
                    context: "banned mask",
                    expected: n,
                    got: bn.len(),
                });
            }
        }
        let is_banned = |j: usize| banned.map_or(false, |bn| bn[j]);

        self.stats.record_lp_solve();

        let max_pivots = if self.opts.max_pivots == 0 {
            50 * (n + m) + 10_000
        } else {
            self.opts.max_pivots
        };

        // Feasible slack start: the LP carries a slack identity block, the
        // right-hand side is nonnegative and no slack is banned.
        let has_slack_identity = lp.n_structural + m == n;
        let slack_start_ok = has_slack_identity
            && b.iter().all(|&v| v >= 0.0)
            && (lp.n_structural..n).all(|j| !is_banned(j))
            && {
                let mut ok = true;
                'outer: for i in 0..m {
                    for r in 0..m {
                        let expect = if r == i { 1.0 } else { 0.0 };
                        if lp.a[[r, lp.n_structural + i]] != expect {
                            ok = false;
                            break 'outer;
                        }
                    }
                }
                ok
            };

        let mut total_pivots = 0usize;
        let outcome = if slack_start_ok {
            let basic: Vec<usize> = (lp.n_structural..n).collect();
            let allowed: Vec<bool> = (0..n).map(|j| !is_banned(j)).collect();
            self.run_core(
                &lp.a,
                &b,
                c_int.view(),
                basic,
                b.clone(),
                &allowed,
                max_pivots,
                &mut total_pivots,
            )?
        } else {
            self.two_phase(lp, &b, c_int.view(), banned, max_pivots, &mut total_pivots)?
        };

        self.stats.record_pivots(total_pivots as u64);

        let mut z = Array1::zeros(n);
        for (pos, &j) in outcome.basic.iter().enumerate() {
            z[j] = outcome.x_basic[pos];
        }
        // Clamp pivot noise on the nonnegativity bound.
        z.mapv_inplace(|v| if v < 0.0 && v > -TOL_FEAS { 0.0 } else { v });

        let scale = 1.0 + b.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
        let residual = {
            let az = lp.a.dot(&z);
            az.iter()
                .zip(b.iter())
                .fold(0.0_f64, |acc, (l, r)| acc.max((l - r).abs()))
        };
        if residual > TOL_FEAS * scale * 100.0 || z.iter().any(|&v| v < -TOL_FEAS * 100.0) {
            return Err(LpError::NonFinite {
                context: format!("solution residual {residual:.3e} after {total_pivots} pivots"),
            });
        }

        let objective_value = c_user.dot(&z);
        let basis = Basis::from_basic(outcome.basic, n);
        let _ = outcome.objective;
        Ok(BasicFeasibleSolution::new(z, basis, objective_value))
    }

    /// Phase 1 with artificial columns (rows sign-flipped so b >= 0), then
    /// phase 2 on the original columns.
    #[allow(clippy::too_many_arguments)]
    fn two_phase(
        &self,
        lp: &StandardFormLP,
        b: &Array1<f64>,
        c_int: ArrayView1<'_, f64>,
        banned: Option<&[bool]>,
        max_pivots: usize,
        total_pivots: &mut usize,
    ) -> Result<CoreOutcome> {
        let m = lp.m();
        let n = lp.n();
        let is_banned = |j: usize| banned.map_or(false, |bn| bn[j]);

        let mut a_aug = Array2::zeros((m, n + m));
        let mut b_pos = Array1::zeros(m);
        for i in 0..m {
            let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
            for j in 0..n {
                a_aug[[i, j]] = sign * lp.a[[i, j]];
            }
            a_aug[[i, n + i]] = 1.0;
            b_pos[i] = sign * b[i];
        }

        // Phase 1: minimize the artificial sum from the artificial basis.
        let mut c1 = Array1::zeros(n + m);
        for j in n..n + m {
            c1[j] = 1.0;
        }
        let mut allowed = vec![false; n + m];
        for (j, a) in allowed.iter_mut().enumerate().take(n) {
            *a = !is_banned(j);
        }
        let basic: Vec<usize> = (n..n + m).collect();
        let phase1 = self.run_core(
            &a_aug,
            &b_pos,
            c1.view(),
            basic,
            b_pos.clone(),
            &allowed,
            max_pivots,
            total_pivots,
        )?;

        let scale = 1.0 + b_pos.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
        if phase1.objective > TOL_FEAS * scale * 10.0 {
            return Err(LpError::Infeasible {
                phase1_obj: phase1.objective,
            });
        }

        // Drive any zero-level artificial out of the basis.
        let mut basic = phase1.basic;
        let mut x_basic = phase1.x_basic;
        if basic.iter().any(|&j| j >= n) {
            let fact = BasisFactorization::new(
                a_aug.select(ndarray::Axis(1), &basic).view(),
                TOL_PIVOT,
            )?;
            let mut swaps: Vec<(usize, usize)> = Vec::new();
            for (pos, &jb) in basic.iter().enumerate() {
                if jb < n {
                    continue;
                }
                let mut e = Array1::zeros(m);
                e[pos] = 1.0;
                let row = fact.btran(e.view());
                let mut chosen = None;
                for j in 0..n {
                    if !allowed[j] || basic.contains(&j) {
                        continue;
                    }
                    let piv: f64 = row.dot(&a_aug.column(j));
                    if piv.abs() > 1e-7 {
                        chosen = Some(j);
                        break;
                    }
                }
                match chosen {
                    Some(j) => swaps.push((pos, j)),
                    None => {
                        return Err(LpError::Invalid(format!(
                            "artificial variable stuck in row {pos}: restricted columns are rank deficient"
                        )))
                    }
                }
            }
            for (pos, j) in swaps {
                basic[pos] = j;
                x_basic[pos] = 0.0;
            }
        }

        // Phase 2 on the augmented matrix; artificials can no longer enter.
        let mut c2 = Array1::zeros(n + m);
        c2.slice_mut(ndarray::s![..n]).assign(&c_int);
        self.run_core(
            &a_aug,
            &b_pos,
            c2.view(),
            basic,
            x_basic,
            &allowed,
            max_pivots,
            total_pivots,
        )
    }

    /// Primal simplex iterations from a feasible basis.
    #[allow(clippy::too_many_arguments)]
    fn run_core(
        &self,
        a: &Array2<f64>,
        b: &Array1<f64>,
        c: ArrayView1<'_, f64>,
        mut basic: Vec<usize>,
        mut x_basic: Array1<f64>,
        allowed: &[bool],
        max_pivots: usize,
        total_pivots: &mut usize,
    ) -> Result<CoreOutcome> {
        let m = a.nrows();
        let n_all = a.ncols();
        let mut in_basis = vec![false; n_all];
        for &j in &basic {
            in_basis[j] = true;
        }

        let mut fact = BasisFactorization::new(a.select(ndarray::Axis(1), &basic).view(), TOL_PIVOT)?;
        let cost_scale = 1.0 + c.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
        let tol_rd = 1e-9 * cost_scale;

        let mut objective = basic
            .iter()
            .zip(x_basic.iter())
            .map(|(&j, &x)| c[j] * x)
            .sum::<f64>();
        let mut pivots_here = 0usize;
        let stall_limit = self.opts.bland_stall_factor * (n_all + m);
        let mut stalled_pivots = 0usize;
        let mut use_bland = false;

        loop {
            if *total_pivots >= max_pivots {
                return Err(LpError::MaxPivotsExceeded {
                    limit: max_pivots,
                    pivots: *total_pivots,
                    objective,
                });
            }

            let c_basic = Array1::from_iter(basic.iter().map(|&j| c[j]));
            let y = fact.btran(c_basic.view());

            // Price the nonbasic columns.
            let mut entering: Option<(usize, f64)> = None;
            for j in 0..n_all {
                if in_basis[j] || !allowed[j] {
                    continue;
                }
                let rc = c[j] - y.dot(&a.column(j));
                if rc < -tol_rd {
                    if use_bland {
                        entering = Some((j, rc));
                        break;
                    }
                    match entering {
                        Some((_, best)) if rc >= best => {}
                        _ => entering = Some((j, rc)),
                    }
                }
            }
            let Some((q, rc_q)) = entering else {
                return Ok(CoreOutcome {
                    basic,
                    x_basic,
                    objective,
                    pivots: pivots_here,
                });
            };

            let d = fact.ftran(a.column(q));

            // Ratio test: largest step before a basic variable hits zero.
            let mut theta = f64::INFINITY;
            for i in 0..m {
                if d[i] > TOL_ZERO {
                    let ratio = (x_basic[i].max(0.0)) / d[i];
                    if ratio < theta {
                        theta = ratio;
                    }
                }
            }
            if !theta.is_finite() {
                return Err(LpError::Unbounded { entering: q });
            }

            // Leaving choice among the (near-)tied minimizers: Bland takes the
            // lowest variable index, Dantzig mode prefers the largest pivot.
            let mut leave: Option<usize> = None;
            for i in 0..m {
                if d[i] > TOL_ZERO {
                    let ratio = (x_basic[i].max(0.0)) / d[i];
                    if ratio <= theta + TOL_ZERO {
                        leave = Some(match leave {
                            None => i,
                            Some(cur) => {
                                if use_bland {
                                    if basic[i] < basic[cur] {
                                        i
                                    } else {
                                        cur
                                    }
                                } else if d[i] > d[cur] * (1.0 + 1e-12)
                                    || (d[i] == d[cur] && basic[i] < basic[cur])
                                {
                                    i
                                } else {
                                    cur
                                }
                            }
                        });
                    }
                }
            }
            let r = leave.expect("finite theta implies a leaving candidate");

            // Apply the step.
            for i in 0..m {
                x_basic[i] -= theta * d[i];
                if x_basic[i] < 0.0 && x_basic[i] > -TOL_FEAS {
                    x_basic[i] = 0.0;
                }
            }
            x_basic[r] = theta;
            in_basis[basic[r]] = false;
            in_basis[q] = true;
            basic[r] = q;

            let gain = -rc_q * theta;
            if gain > TOL_OBJ {
                stalled_pivots = 0;
            } else {
                stalled_pivots += 1;
                if stalled_pivots > stall_limit {
                    use_bland = true;
                }
            }
            objective += rc_q * theta;

            pivots_here += 1;
            *total_pivots += 1;

            let need_refactor =
                fact.eta_count() >= self.opts.refactor_every || !fact.update(r, d.view(), TOL_PIVOT);
            if need_refactor {
                fact =
                    BasisFactorization::new(a.select(ndarray::Axis(1), &basic).view(), TOL_PIVOT)?;
                // Recompute the basic values from scratch to shed drift.
                x_basic = fact.ftran(b.view());
                for v in x_basic.iter_mut() {
                    if *v < 0.0 && *v > -TOL_FEAS {
                        *v = 0.0;
                    }
                }
                objective = basic
                    .iter()
                    .zip(x_basic.iter())
                    .map(|(&j, &x)| c[j] * x)
                    .sum::<f64>();
            }
        }
    }
}
