//! Standard-form LP representation and basis bookkeeping.
//!
//! Everything downstream (simplex, adjacency enumeration, losses) works on
//! the equality form `min c^T z, Az = b, z >= 0` with full-row-rank `A`.
//! Maximization problems are stored unchanged and negated at solve time.

use std::sync::atomic::{AtomicU64, Ordering};

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{LpError, Result};
use crate::linalg::{independent_rows, LuFactors};

/// Feasibility tolerance on `Az = b` and `z >= 0`.
pub const TOL_FEAS: f64 = 1e-8;
/// A basic variable at or below this is considered zero (degeneracy detection).
pub const TOL_ZERO: f64 = 1e-9;
/// Objective comparisons.
pub const TOL_OBJ: f64 = 1e-7;
/// Row-rank tolerance, relative to the largest row norm.
pub const TOL_RANK_REL: f64 = 1e-10;
/// Infinity-norm tolerance for deduplicating vertices.
pub const TOL_VERTEX_DEDUP: f64 = 1e-7;
/// Ratio-test threshold separating degenerate from nondegenerate pivots.
pub const TOL_RATIO: f64 = 1e-9;
/// LU pivot threshold.
pub const TOL_PIVOT: f64 = 1e-11;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Min,
    Max,
}

/// Equality-form LP `{z | Az = b, z >= 0}` with cost bookkeeping.
#[derive(Clone, Debug)]
pub struct StandardFormLP {
    pub a: Array2<f64>,
    pub b: Array1<f64>,
    /// Count of original (non-slack) variables; slack columns follow them.
    pub n_structural: usize,
    /// Sense of the user-facing objective. Costs are negated at solve time
    /// for `Max`; stored data is never mutated.
    pub original_sense: Sense,
    pub names: Vec<String>,
}

impl StandardFormLP {
    pub fn m(&self) -> usize {
        self.a.nrows()
    }

    pub fn n(&self) -> usize {
        self.a.ncols()
    }

    /// Extend a structural-only cost vector with zero slack costs. Full-length
    /// vectors pass through unchanged.
    pub fn extend_costs(&self, c: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        if c.len() == self.n() {
            return Ok(c.to_owned());
        }
        if c.len() != self.n_structural {
            return Err(LpError::ShapeMismatch {
                context: "cost vector",
                expected: self.n_structural,
                got: c.len(),
            });
        }
        let mut full = Array1::zeros(self.n());
        full.slice_mut(ndarray::s![..self.n_structural]).assign(&c);
        Ok(full)
    }

    /// Costs in the internal minimization convention.
    pub fn internal_costs(&self, c: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        let full = self.extend_costs(c)?;
        Ok(match self.original_sense {
            Sense::Min => full,
            Sense::Max => -full,
        })
    }

    /// `Az = b` and `z >= 0` within `tol`.
    pub fn is_feasible_point(&self, z: ArrayView1<'_, f64>, tol: f64) -> bool {
        if z.len() != self.n() || z.iter().any(|&v| v < -tol) {
            return false;
        }
        let residual = &self.a.dot(&z) - &self.b;
        residual.iter().all(|v| v.abs() <= tol)
    }
}

/// An ordered partition of the column indices into basic and nonbasic sets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Basis {
    pub basic: Vec<usize>,
    pub nonbasic: Vec<usize>,
}

impl Basis {
    pub fn new(basic: Vec<usize>, nonbasic: Vec<usize>) -> Self {
        Self { basic, nonbasic }
    }

    /// Build from the basic set alone; nonbasic indices are ascending.
    pub fn from_basic(basic: Vec<usize>, n: usize) -> Self {
        let mut member = vec![false; n];
        for &j in &basic {
            member[j] = true;
        }
        let nonbasic = (0..n).filter(|&j| !member[j]).collect();
        Self { basic, nonbasic }
    }

    pub fn key(&self) -> BasisKey {
        let mut k = self.basic.clone();
        k.sort_unstable();
        BasisKey(k)
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.basic.len() + self.nonbasic.len() != n {
            return Err(LpError::Invalid(format!(
                "basis partition covers {} columns, LP has {}",
                self.basic.len() + self.nonbasic.len(),
                n
            )));
        }
        let mut seen = vec![false; n];
        for &j in self.basic.iter().chain(self.nonbasic.iter()) {
            if j >= n || seen[j] {
                return Err(LpError::Invalid(format!(
                    "column {j} repeated or out of range in basis partition"
                )));
            }
            seen[j] = true;
        }
        Ok(())
    }
}

/// Canonical hashable identity of a basis: its sorted basic set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisKey(pub Vec<usize>);

/// A vertex of the feasible polytope together with one witnessing basis.
#[derive(Clone, Debug)]
pub struct BasicFeasibleSolution {
    pub z: Array1<f64>,
    pub basis: Basis,
    /// Count of zero-valued basic variables.
    pub sigma: usize,
    /// Objective under the cost vector this BFS was solved for (user sense).
    pub objective_value: f64,
}

impl BasicFeasibleSolution {
    pub fn new(z: Array1<f64>, basis: Basis, objective_value: f64) -> Self {
        let sigma = basis
            .basic
            .iter()
            .filter(|&&j| z[j].abs() <= TOL_ZERO)
            .count();
        Self {
            z,
            basis,
            sigma,
            objective_value,
        }
    }
}

/// Solver-call and pivot counters; shared across workers via atomics.
#[derive(Debug, Default)]
pub struct SolveStats {
    lp_solve_calls: AtomicU64,
    ilp_solve_calls: AtomicU64,
    simplex_pivots: AtomicU64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsSnapshot {
    pub lp_solve_calls: u64,
    pub ilp_solve_calls: u64,
    pub simplex_pivots: u64,
}

impl SolveStats {
    pub fn record_lp_solve(&self) {
        self.lp_solve_calls.fetch_add(1, Ordering::Relaxed);
    }

    pub fn record_ilp_solve(&self) {
        self.ilp_solve_calls.fetch_add(1, Ordering::Relaxed);
    }

    pub fn record_pivots(&self, count: u64) {
        self.simplex_pivots.fetch_add(count, Ordering::Relaxed);
    }

    pub fn snapshot(&self) -> StatsSnapshot {
        StatsSnapshot {
            lp_solve_calls: self.lp_solve_calls.load(Ordering::Relaxed),
            ilp_solve_calls: self.ilp_solve_calls.load(Ordering::Relaxed),
            simplex_pivots: self.simplex_pivots.load(Ordering::Relaxed),
        }
    }
}

impl StatsSnapshot {
    pub fn lp_calls_since(&self, earlier: &StatsSnapshot) -> u64 {
        self.lp_solve_calls - earlier.lp_solve_calls
    }
}

/// Convert `A_ineq z <= b_ineq, z >= 0` to equality form by appending one
/// slack column (+1 coefficient) per row.
pub fn to_standard_form(
    a_ineq: ArrayView2<'_, f64>,
    b_ineq: ArrayView1<'_, f64>,
    sense: Sense,
) -> Result<StandardFormLP> {
    let m = a_ineq.nrows();
    let n_structural = a_ineq.ncols();
    if b_ineq.len() != m {
        return Err(LpError::ShapeMismatch {
            context: "b vector",
            expected: m,
            got: b_ineq.len(),
        });
    }
    let n = n_structural + m;
    let mut a = Array2::zeros((m, n));
    a.slice_mut(ndarray::s![.., ..n_structural]).assign(&a_ineq);
    for i in 0..m {
        a[[i, n_structural + i]] = 1.0;
    }
    // The slack identity always yields rank m; verify anyway so the contract
    // holds for adversarial input.
    let (rank, _) = independent_rows(a.view(), TOL_RANK_REL);
    if rank < m {
        return Err(LpError::RankDeficient { rank, rows: m });
    }
    let mut names: Vec<String> = (0..n_structural).map(|j| format!("z{j}")).collect();
    names.extend((0..m).map(|i| format!("s{i}")));
    Ok(StandardFormLP {
        a,
        b: b_ineq.to_owned(),
        n_structural,
        original_sense: sense,
        names,
    })
}

/// Ingest a system that is already in equality form. Linearly dependent rows
/// are dropped (with a warning) so that `A` has full row rank.
pub fn from_equality_form(
    a_eq: ArrayView2<'_, f64>,
    b_eq: ArrayView1<'_, f64>,
    sense: Sense,
    names: Vec<String>,
) -> Result<StandardFormLP> {
    let m = a_eq.nrows();
    if b_eq.len() != m {
        return Err(LpError::ShapeMismatch {
            context: "b vector",
            expected: m,
            got: b_eq.len(),
        });
    }
    let (rank, kept) = check_full_row_rank(a_eq);
    let (a, b) = if rank < m {
        log::warn!("dropping {} dependent row(s) of {}", m - rank, m);
        let a = a_eq.select(ndarray::Axis(0), &kept);
        let b = b_eq.select(ndarray::Axis(0), &kept);
        (a, b)
    } else {
        (a_eq.to_owned(), b_eq.to_owned())
    };
    let n = a.ncols();
    let names = if names.len() == n {
        names
    } else {
        (0..n).map(|j| format!("z{j}")).collect()
    };
    Ok(StandardFormLP {
        a,
        b,
        n_structural: n,
        original_sense: sense,
        names,
    })
}

/// Numerical row rank plus a maximal independent row subset.
pub fn check_full_row_rank(a: ArrayView2<'_, f64>) -> (usize, Vec<usize>) {
    independent_rows(a, TOL_RANK_REL)
}

/// Basic solution for a given basis: `z_B = B^{-1} b`, nonbasic entries zero.
/// Feasibility is not asserted.
pub fn basic_solution_from_basis(lp: &StandardFormLP, basis: &Basis) -> Result<Array1<f64>> {
    basis.validate(lp.n())?;
    let bmat = lp.a.select(ndarray::Axis(1), &basis.basic);
    let lu = LuFactors::factor(bmat.view(), TOL_PIVOT)?;
    let zb = lu.solve(lp.b.view());
    let mut z = Array1::zeros(lp.n());
    for (pos, &j) in basis.basic.iter().enumerate() {
        z[j] = zb[pos];
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn unit_box() -> StandardFormLP {
        to_standard_form(
            array![[1.0, 0.0], [0.0, 1.0]].view(),
            array![1.0, 1.0].view(),
            Sense::Min,
        )
        .unwrap()
    }

    #[test]
    fn slack_append_shapes() {
        let lp = unit_box();
        assert_eq!(lp.n(), 4);
        assert_eq!(lp.m(), 2);
        assert_eq!(lp.n_structural, 2);
        assert_eq!(
            lp.a,
            array![[1.0, 0.0, 1.0, 0.0], [0.0, 1.0, 0.0, 1.0]]
        );
    }

    #[test]
    fn rank_check_identity_and_duplicate() {
        let (rank, _) = check_full_row_rank(Array2::eye(3).view());
        assert_eq!(rank, 3);
        let dup = array![[1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [1.0, 2.0, 3.0]];
        let (rank, kept) = check_full_row_rank(dup.view());
        assert_eq!(rank, 2);
        assert!(!kept.contains(&2));
    }

    #[test]
    fn basic_solution_slack_basis() {
        let lp = unit_box();
        let basis = Basis::from_basic(vec![2, 3], 4);
        let z = basic_solution_from_basis(&lp, &basis).unwrap();
        assert_eq!(z, array![0.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn basic_solution_mixed_basis() {
        let lp = unit_box();
        let basis = Basis::from_basic(vec![0, 3], 4);
        let z = basic_solution_from_basis(&lp, &basis).unwrap();
        assert_eq!(z, array![1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn singular_basis_rejected() {
        let lp = to_standard_form(
            array![[1.0, 1.0], [1.0, 1.0]].view(),
            array![1.0, 2.0].view(),
            Sense::Min,
        )
        .unwrap();
        // Columns 0 and 1 are identical in both rows.
        let basis = Basis::from_basic(vec![0, 1], 4);
        assert!(matches!(
            basic_solution_from_basis(&lp, &basis),
            Err(LpError::SingularBasis { .. })
        ));
    }

    #[test]
    fn cost_extension_and_sense() {
        let mut lp = unit_box();
        let c = array![1.0, 2.0];
        let full = lp.extend_costs(c.view()).unwrap();
        assert_eq!(full, array![1.0, 2.0, 0.0, 0.0]);
        lp.original_sense = Sense::Max;
        let internal = lp.internal_costs(c.view()).unwrap();
        assert_eq!(internal, array![-1.0, -2.0, 0.0, 0.0]);
    }

    #[test]
    fn sigma_counts_zero_basic_variables() {
        let z = array![0.0, 0.0, 1.0, 0.0, 0.0];
        let basis = Basis::from_basic(vec![2, 3], 5);
        let bfs = BasicFeasibleSolution::new(z, basis, 0.0);
        assert_eq!(bfs.sigma, 1);
    }

    #[test]
    fn equality_form_drops_dependent_row() {
        // Third row is the sum of the first two.
        let a = array![
            [1.0, 0.0, 1.0],
            [0.0, 1.0, 1.0],
            [1.0, 1.0, 2.0]
        ];
        let b = array![1.0, 1.0, 2.0];
        let lp = from_equality_form(a.view(), b.view(), Sense::Min, vec![]).unwrap();
        assert_eq!(lp.m(), 2);
        assert_eq!(lp.n_structural, 3);
    }
}
