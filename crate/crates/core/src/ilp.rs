//! Depth-first branch-and-bound for LPs with binary variables, using the LP
//! relaxation for bounds. Fixing a variable never rebuilds `A`: a variable
//! fixed to 0 is banned from the basis, a variable fixed to 1 is banned and
//! its column is subtracted from the right-hand side.

use ndarray::{Array1, ArrayView1};

use crate::error::{LpError, Result};
use crate::lp::{Sense, StandardFormLP};
use crate::simplex::SimplexSolver;

const INT_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct IlpSolution {
    /// Full standard-form point with binary entries snapped to {0, 1} and
    /// slacks recomputed exactly.
    pub z: Array1<f64>,
    /// Objective in the LP's user-facing sense.
    pub objective: f64,
    pub nodes_explored: usize,
}

#[derive(Clone, Copy, PartialEq)]
enum Fix {
    Free,
    Zero,
    One,
}

/// Solve `opt c^T z` with `z_j in {0,1}` for `j in binary_indices`, all other
/// structural variables continuous.
pub fn solve_binary_ilp(
    solver: &SimplexSolver,
    lp: &StandardFormLP,
    c: ArrayView1<'_, f64>,
    binary_indices: &[usize],
    node_limit: usize,
) -> Result<IlpSolution> {
    let c_user = lp.extend_costs(c)?;
    let sense_sign = match lp.original_sense {
        Sense::Min => 1.0,
        Sense::Max => -1.0,
    };
    for &j in binary_indices {
        if j >= lp.n_structural {
            return Err(LpError::Invalid(format!(
                "binary index {j} is not a structural variable"
            )));
        }
    }
    solver.stats().record_ilp_solve();

    let mut fixes = vec![Fix::Free; lp.n()];
    let mut nodes = 0usize;
    let mut best: Option<(f64, Array1<f64>)> = None; // internal objective, point

    branch(
        solver,
        lp,
        &c_user,
        sense_sign,
        binary_indices,
        &mut fixes,
        node_limit,
        &mut nodes,
        &mut best,
    )?;

    match best {
        Some((obj_int, z)) => Ok(IlpSolution {
            z,
            objective: sense_sign * obj_int,
            nodes_explored: nodes,
        }),
        None => Err(LpError::Infeasible { phase1_obj: f64::NAN }),
    }
}

#[allow(clippy::too_many_arguments)]
fn branch(
    solver: &SimplexSolver,
    lp: &StandardFormLP,
    c_user: &Array1<f64>,
    sense_sign: f64,
    binary_indices: &[usize],
    fixes: &mut Vec<Fix>,
    node_limit: usize,
    nodes: &mut usize,
    best: &mut Option<(f64, Array1<f64>)>,
) -> Result<()> {
    if *nodes >= node_limit {
        return Err(LpError::NodeLimitExceeded {
            limit: node_limit,
            incumbent: best.as_ref().map(|(obj, _)| sense_sign * *obj),
        });
    }
    *nodes += 1;

    // Build the node LP: banned columns plus a shifted right-hand side for
    // the variables fixed at one.
    let mut banned = vec![false; lp.n()];
    let mut b_node = lp.b.clone();
    for (j, f) in fixes.iter().enumerate() {
        match f {
            Fix::Free => {}
            Fix::Zero => banned[j] = true,
            Fix::One => {
                banned[j] = true;
                b_node -= &lp.a.column(j).to_owned();
            }
        }
    }

    let relax = match solver.solve_restricted(lp, c_user.view(), Some(&banned), Some(b_node.view()))
    {
        Ok(bfs) => bfs,
        Err(LpError::Infeasible { .. }) => return Ok(()),
        Err(e) => return Err(e),
    };

    // Objective of the node in internal (minimization) terms, including the
    // contribution of variables fixed at one.
    let fixed_cost: f64 = fixes
        .iter()
        .enumerate()
        .filter(|(_, f)| **f == Fix::One)
        .map(|(j, _)| c_user[j])
        .sum();
    let bound_int = sense_sign * (relax.objective_value + fixed_cost);
    if let Some((incumbent, _)) = best {
        if bound_int >= *incumbent - 1e-9 {
            return Ok(());
        }
    }

    // Most fractional branching variable.
    let mut branch_var: Option<(usize, f64)> = None;
    for &j in binary_indices {
        if fixes[j] != Fix::Free {
            continue;
        }
        let v = relax.z[j];
        let frac = (v - v.round()).abs();
        if frac > INT_TOL {
            let score = (v - 0.5).abs();
            match branch_var {
                Some((_, s)) if score >= s => {}
                _ => branch_var = Some((j, score)),
            }
        }
    }

    match branch_var {
        None => {
            // Integral: assemble the full point with snapped binaries.
            let mut z = relax.z.clone();
            for (j, f) in fixes.iter().enumerate() {
                match f {
                    Fix::Zero => z[j] = 0.0,
                    Fix::One => z[j] = 1.0,
                    Fix::Free => {}
                }
            }
            for &j in binary_indices {
                z[j] = z[j].round();
            }
            // Recompute slacks exactly when the LP carries a slack identity.
            if lp.n_structural + lp.m() == lp.n() {
                let structural = z.slice(ndarray::s![..lp.n_structural]).to_owned();
                let a_struct = lp.a.slice(ndarray::s![.., ..lp.n_structural]);
                let used = a_struct.dot(&structural);
                for i in 0..lp.m() {
                    z[lp.n_structural + i] = lp.b[i] - used[i];
                }
            }
            let obj_int = sense_sign * c_user.dot(&z);
            let better = match best {
                Some((incumbent, _)) => obj_int < *incumbent - 1e-12,
                None => true,
            };
            if better {
                *best = Some((obj_int, z));
            }
            Ok(())
        }
        Some((j, _)) => {
            // Dive toward the rounded value first.
            let first = if relax.z[j] >= 0.5 { Fix::One } else { Fix::Zero };
            let second = if first == Fix::One { Fix::Zero } else { Fix::One };
            for side in [first, second] {
                fixes[j] = side;
                branch(
                    solver,
                    lp,
                    c_user,
                    sense_sign,
                    binary_indices,
                    fixes,
                    node_limit,
                    nodes,
                    best,
                )?;
            }
            fixes[j] = Fix::Free;
            Ok(())
        }
    }
}
