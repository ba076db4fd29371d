//! Enumeration of all vertices adjacent to a basic feasible solution.
//!
//! For a nondegenerate vertex every neighbor is one pivot away from the
//! unique basis. Degenerate vertices have many witnessing bases; those are
//! explored breadth-first through zero-step pivots, with the leaving
//! variable chosen by the transition-node pivoting (TNP) rule so that the
//! walk stays on bases from which the vertex can still be left.

use std::collections::{HashSet, VecDeque};

use ndarray::{Array1, Array2, ArrayView1};

use crate::error::{LpError, Result};
use crate::linalg::LuFactors;
use crate::lp::{
    Basis, BasicFeasibleSolution, StandardFormLP, TOL_FEAS, TOL_PIVOT, TOL_RATIO,
    TOL_VERTEX_DEDUP, TOL_ZERO,
};

/// Directions of movement of the basic variables: `D = -B^{-1} N`, one
/// column per nonbasic variable (in `basis.nonbasic` order).
#[derive(Clone, Debug)]
pub struct PivotDirectionMatrix {
    pub d: Array2<f64>,
}

/// A vertex together with all its adjacent vertices, one per row.
#[derive(Clone, Debug)]
pub struct AdjacencySet {
    pub vertex: Array1<f64>,
    pub adjacent: Array2<f64>,
    pub bases_visited: usize,
    pub sigma: usize,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct AdjacencyOptions {
    /// Overrides the default exploration cap `10 * 2^(sigma-1) * (n-sigma+2)`.
    pub cap_override: Option<usize>,
}

/// Result of the minimum ratio test along one pivot direction column.
#[derive(Clone, Debug)]
pub struct RatioTest {
    /// Largest feasible step; `+inf` when no basic variable blocks.
    pub theta: f64,
    /// Basic positions attaining the minimum (within tolerance).
    pub argmin: Vec<usize>,
}

impl RatioTest {
    pub fn is_degenerate(&self) -> bool {
        self.theta.is_finite() && self.theta <= TOL_RATIO
    }

    /// Boundedness is an input assumption; an unbounded edge is an error.
    pub fn require_bounded(&self, entering: usize) -> Result<()> {
        if self.theta.is_finite() {
            Ok(())
        } else {
            Err(LpError::UnboundedEdge { entering })
        }
    }
}

/// `D = -B^{-1} N`, columns ordered to match `basis.nonbasic`.
pub fn compute_directions(lp: &StandardFormLP, basis: &Basis) -> Result<PivotDirectionMatrix> {
    let m = lp.m();
    let bmat = lp.a.select(ndarray::Axis(1), &basis.basic);
    let lu = LuFactors::factor(bmat.view(), TOL_PIVOT)?;
    let mut d = Array2::zeros((m, basis.nonbasic.len()));
    for (col, &j) in basis.nonbasic.iter().enumerate() {
        let dir = lu.solve(lp.a.column(j));
        for i in 0..m {
            d[[i, col]] = -dir[i];
        }
    }
    Ok(PivotDirectionMatrix { d })
}

/// Minimum ratio test for direction column `d_col`:
/// `theta = min over {i : d_i < 0} of -z[basic(i)] / d_i`.
pub fn min_ratio_test(z: ArrayView1<'_, f64>, basis: &Basis, d_col: ArrayView1<'_, f64>) -> RatioTest {
    let mut theta = f64::INFINITY;
    for (i, &d) in d_col.iter().enumerate() {
        if d < -TOL_ZERO {
            let ratio = -(z[basis.basic[i]].max(0.0)) / d;
            if ratio < theta {
                theta = ratio;
            }
        }
    }
    let mut argmin = Vec::new();
    if theta.is_finite() {
        for (i, &d) in d_col.iter().enumerate() {
            if d < -TOL_ZERO {
                let ratio = -(z[basis.basic[i]].max(0.0)) / d;
                if ratio <= theta + TOL_RATIO {
                    argmin.push(i);
                }
            }
        }
    }
    RatioTest { theta, argmin }
}

/// TNP leaving rule: among the ratio-test minimizers pick the row maximizing
/// `D[k, t] / D[k, j]`, where `t` is a transition column of the current
/// basis. Ties break toward the lowest basic variable index.
pub fn tnp_select_leaving(
    directions: &PivotDirectionMatrix,
    t: usize,
    j: usize,
    argmin: &[usize],
    basic: &[usize],
) -> Result<usize> {
    if argmin.is_empty() {
        return Err(LpError::PivotContract("empty argmin set".into()));
    }
    if t == j {
        return Err(LpError::PivotContract(
            "transition column equals entering column".into(),
        ));
    }
    let d = &directions.d;
    let mut best: Option<(usize, f64)> = None;
    for &k in argmin {
        let dkj = d[[k, j]];
        if dkj >= -TOL_ZERO {
            return Err(LpError::PivotContract(format!(
                "argmin row {k} has nonnegative direction {dkj:.3e} in entering column"
            )));
        }
        let score = d[[k, t]] / dkj;
        best = Some(match best {
            None => (k, score),
            Some((bk, bs)) => {
                if score > bs || (score == bs && basic[k] < basic[bk]) {
                    (k, score)
                } else {
                    (bk, bs)
                }
            }
        });
    }
    Ok(best.expect("argmin nonempty").0)
}

fn first_transition_column(
    lp: &StandardFormLP,
    basis: &Basis,
    z: ArrayView1<'_, f64>,
    directions: &PivotDirectionMatrix,
) -> Result<Option<usize>> {
    for j in 0..basis.nonbasic.len() {
        let rt = min_ratio_test(z, basis, directions.d.column(j));
        rt.require_bounded(basis.nonbasic[j])?;
        if rt.theta > TOL_RATIO {
            return Ok(Some(j));
        }
    }
    Ok(None)
}

/// Find a basis of the same vertex from which at least one pivot leaves the
/// vertex (a transition node of its degeneracy graph). Zero-step pivots are
/// explored breadth-first in index order, so the result is deterministic.
pub fn find_transition_basis(lp: &StandardFormLP, bfs: &BasicFeasibleSolution) -> Result<Basis> {
    let cap = exploration_cap(lp.n(), bfs.sigma, &AdjacencyOptions::default());
    let mut visited: HashSet<crate::lp::BasisKey> = HashSet::new();
    let mut queue: VecDeque<Basis> = VecDeque::new();
    visited.insert(bfs.basis.key());
    queue.push_back(bfs.basis.clone());

    while let Some(basis) = queue.pop_front() {
        let directions = compute_directions(lp, &basis)?;
        if first_transition_column(lp, &basis, bfs.z.view(), &directions)?.is_some() {
            return Ok(basis);
        }
        // Internal node: every column pivots to another basis of the vertex.
        for j in 0..basis.nonbasic.len() {
            let rt = min_ratio_test(bfs.z.view(), &basis, directions.d.column(j));
            if !rt.is_degenerate() {
                continue;
            }
            for &i in &rt.argmin {
                let mut next = basis.clone();
                next.basic[i] = basis.nonbasic[j];
                next.nonbasic[j] = basis.basic[i];
                let key = next.key();
                if visited.insert(key) {
                    if visited.len() > cap {
                        return Err(LpError::ExplorationCapExceeded { cap });
                    }
                    queue.push_back(next);
                }
            }
        }
    }
    Err(LpError::NoTransitionNode {
        bases_seen: visited.len(),
    })
}

fn exploration_cap(n: usize, sigma: usize, opts: &AdjacencyOptions) -> usize {
    if let Some(cap) = opts.cap_override {
        return cap;
    }
    // 10 * U_min with U_min = 2^(sigma-1) * (n - sigma + 2).
    let u_min = 2f64.powi(sigma as i32 - 1) * ((n as f64) - (sigma as f64) + 2.0);
    (10.0 * u_min).ceil().min(1e9).max(16.0) as usize
}

/// All vertices adjacent to `bfs`, found by pivoting from a transition basis.
/// Entering columns with a positive step emit a neighbor; zero-step columns
/// pivot (TNP rule) to further bases of the same vertex, which are queued.
pub fn enumerate_adjacent_vertices(
    lp: &StandardFormLP,
    bfs: &BasicFeasibleSolution,
) -> Result<AdjacencySet> {
    enumerate_adjacent_vertices_with(lp, bfs, AdjacencyOptions::default())
}

pub fn enumerate_adjacent_vertices_with(
    lp: &StandardFormLP,
    bfs: &BasicFeasibleSolution,
    opts: AdjacencyOptions,
) -> Result<AdjacencySet> {
    let n = lp.n();
    let cap = exploration_cap(n, bfs.sigma, &opts);
    let seed = find_transition_basis(lp, bfs)?;
    let z = &bfs.z;

    let mut visited: HashSet<crate::lp::BasisKey> = HashSet::new();
    let mut queue: VecDeque<Basis> = VecDeque::new();
    visited.insert(seed.key());
    queue.push_back(seed);

    let mut adjacent: Vec<Array1<f64>> = Vec::new();
    let mut bases_visited = 0usize;

    while let Some(basis) = queue.pop_front() {
        bases_visited += 1;
        let directions = compute_directions(lp, &basis)?;
        let ratio_tests: Vec<RatioTest> = (0..basis.nonbasic.len())
            .map(|j| min_ratio_test(z.view(), &basis, directions.d.column(j)))
            .collect();
        for (j, rt) in ratio_tests.iter().enumerate() {
            rt.require_bounded(basis.nonbasic[j])?;
        }
        let t = match ratio_tests.iter().position(|rt| rt.theta > TOL_RATIO) {
            Some(t) => t,
            None => {
                // Round-off pushed us onto an internal node; recover once.
                log::warn!("dequeued basis lost its transition column; re-seeding");
                let reseed = find_transition_basis(
                    lp,
                    &BasicFeasibleSolution::new(z.clone(), basis, bfs.objective_value),
                )?;
                if visited.insert(reseed.key()) {
                    queue.push_back(reseed);
                }
                continue;
            }
        };

        for (j, rt) in ratio_tests.iter().enumerate() {
            if rt.theta > TOL_RATIO {
                // Nondegenerate pivot: the neighbor is z + theta * d with
                // d = e_j overlaid with the basic directions.
                let mut neighbor = z.clone();
                neighbor[basis.nonbasic[j]] += rt.theta;
                for (pos, &bi) in basis.basic.iter().enumerate() {
                    neighbor[bi] += rt.theta * directions.d[[pos, j]];
                }
                neighbor.mapv_inplace(|v| if v < 0.0 && v > -TOL_ZERO { 0.0 } else { v });
                let dup = adjacent
                    .iter()
                    .any(|row| inf_dist(row.view(), neighbor.view()) <= TOL_VERTEX_DEDUP);
                let is_self = inf_dist(z.view(), neighbor.view()) <= TOL_VERTEX_DEDUP;
                if !dup && !is_self {
                    adjacent.push(neighbor);
                }
            } else {
                // Degenerate pivot: stay on the vertex, switch basis by TNP.
                let i = tnp_select_leaving(&directions, t, j, &rt.argmin, &basis.basic)?;
                let mut next = basis.clone();
                next.basic[i] = basis.nonbasic[j];
                next.nonbasic[j] = basis.basic[i];
                let key = next.key();
                if visited.insert(key) {
                    if visited.len() > cap {
                        return Err(LpError::ExplorationCapExceeded { cap });
                    }
                    queue.push_back(next);
                }
            }
        }
    }

    if adjacent.is_empty() {
        return Err(LpError::EmptyAdjacency);
    }
    let mut matrix = Array2::zeros((adjacent.len(), n));
    for (r, row) in adjacent.iter().enumerate() {
        matrix.row_mut(r).assign(row);
    }
    debug_assert!(matrix
        .rows()
        .into_iter()
        .all(|row| lp.is_feasible_point(row, TOL_FEAS * 100.0)));
    Ok(AdjacencySet {
        vertex: z.clone(),
        adjacent: matrix,
        bases_visited,
        sigma: bfs.sigma,
    })
}

fn inf_dist(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).abs()))
}

/// Exhaustive adjacency oracle: enumerate every basis, keep the feasible
/// ones, group them into vertices, and call two vertices adjacent when some
/// basis of one differs from some basis of the other by exactly one column.
#[derive(Clone, Debug)]
pub struct BruteForceAdjacency {
    pub vertices: Vec<Array1<f64>>,
    /// Adjacency lists, indices into `vertices`.
    pub neighbors: Vec<Vec<usize>>,
    pub bases_per_vertex: Vec<Vec<crate::lp::BasisKey>>,
}

impl BruteForceAdjacency {
    pub fn vertex_index(&self, z: ArrayView1<'_, f64>) -> Option<usize> {
        self.vertices
            .iter()
            .position(|v| inf_dist(v.view(), z) <= TOL_VERTEX_DEDUP)
    }

    pub fn neighbors_of(&self, z: ArrayView1<'_, f64>) -> Option<Vec<Array1<f64>>> {
        let idx = self.vertex_index(z)?;
        Some(
            self.neighbors[idx]
                .iter()
                .map(|&i| self.vertices[i].clone())
                .collect(),
        )
    }
}

const BRUTE_FORCE_GUARD: u128 = 200_000;

pub fn brute_force_adjacency(lp: &StandardFormLP) -> Result<BruteForceAdjacency> {
    let n = lp.n();
    let m = lp.m();
    let total = binomial(n as u128, m as u128);
    if total > BRUTE_FORCE_GUARD {
        return Err(LpError::TooManyBases {
            bases: total,
            guard: BRUTE_FORCE_GUARD,
        });
    }

    let mut vertices: Vec<Array1<f64>> = Vec::new();
    let mut bases_per_vertex: Vec<Vec<crate::lp::BasisKey>> = Vec::new();

    let mut combo: Vec<usize> = (0..m).collect();
    loop {
        let bmat = lp.a.select(ndarray::Axis(1), &combo);
        if let Ok(lu) = LuFactors::factor(bmat.view(), TOL_PIVOT) {
            let zb = lu.solve(lp.b.view());
            if zb.iter().all(|&v| v >= -TOL_FEAS) {
                let mut z = Array1::zeros(n);
                for (pos, &j) in combo.iter().enumerate() {
                    z[j] = zb[pos].max(0.0);
                }
                let key = crate::lp::BasisKey(combo.clone());
                match vertices
                    .iter()
                    .position(|v| inf_dist(v.view(), z.view()) <= TOL_VERTEX_DEDUP)
                {
                    Some(idx) => bases_per_vertex[idx].push(key),
                    None => {
                        vertices.push(z);
                        bases_per_vertex.push(vec![key]);
                    }
                }
            }
        }
        if !next_combination(&mut combo, n) {
            break;
        }
    }

    let count = vertices.len();
    let mut neighbors = vec![Vec::new(); count];
    for u in 0..count {
        for v in (u + 1)..count {
            if bases_differ_by_one(&bases_per_vertex[u], &bases_per_vertex[v]) {
                neighbors[u].push(v);
                neighbors[v].push(u);
            }
        }
    }
    Ok(BruteForceAdjacency {
        vertices,
        neighbors,
        bases_per_vertex,
    })
}

fn bases_differ_by_one(a: &[crate::lp::BasisKey], b: &[crate::lp::BasisKey]) -> bool {
    for ka in a {
        for kb in b {
            let mut common = 0usize;
            let (mut i, mut j) = (0usize, 0usize);
            while i < ka.0.len() && j < kb.0.len() {
                match ka.0[i].cmp(&kb.0[j]) {
                    std::cmp::Ordering::Equal => {
                        common += 1;
                        i += 1;
                        j += 1;
                    }
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                }
            }
            if common + 1 == ka.0.len() {
                return true;
            }
        }
    }
    false
}

fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    if k == 0 {
        return false;
    }
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < n - (k - i) {
            combo[i] += 1;
            for j in (i + 1)..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut result: u128 = 1;
    for i in 0..k {
        result = result.saturating_mul(n - i) / (i + 1);
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{from_equality_form, to_standard_form, Sense, SolveStats};
    use crate::simplex::SimplexSolver;
    use ndarray::array;
    use std::sync::Arc;

    fn solver() -> SimplexSolver {
        SimplexSolver::new(Arc::new(SolveStats::default()))
    }

    /// `z1 + z3 <= 1, z2 + z3 <= 1, z >= 0`: a square-based pyramid whose
    /// apex `(0, 0, 1)` is degenerate.
    fn pyramid() -> StandardFormLP {
        to_standard_form(
            array![[1.0, 0.0, 1.0], [0.0, 1.0, 1.0]].view(),
            array![1.0, 1.0].view(),
            Sense::Min,
        )
        .unwrap()
    }

    fn apex_bfs(lp: &StandardFormLP, partner: usize) -> BasicFeasibleSolution {
        let basis = Basis::from_basic(vec![2, partner], lp.n());
        let z = crate::lp::basic_solution_from_basis(lp, &basis).unwrap();
        BasicFeasibleSolution::new(z, basis, 0.0)
    }

    #[test]
    fn directions_on_unit_box_slack_basis() {
        let lp = to_standard_form(
            array![[1.0, 0.0], [0.0, 1.0]].view(),
            array![1.0, 1.0].view(),
            Sense::Min,
        )
        .unwrap();
        let basis = Basis::from_basic(vec![2, 3], 4);
        let d = compute_directions(&lp, &basis).unwrap();
        // Increasing z1 by 1 decreases slack 1 by 1.
        assert_eq!(d.d.column(0).to_owned(), array![-1.0, 0.0]);
        assert_eq!(d.d.column(1).to_owned(), array![0.0, -1.0]);
    }

    #[test]
    fn directions_residual_is_tiny() {
        let lp = pyramid();
        let basis = Basis::from_basic(vec![2, 3], 5);
        let d = compute_directions(&lp, &basis).unwrap();
        let bmat = lp.a.select(ndarray::Axis(1), &basis.basic);
        let nmat = lp.a.select(ndarray::Axis(1), &basis.nonbasic);
        let residual = bmat.dot(&d.d) + nmat;
        assert!(residual.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn ratio_test_basic_cases() {
        let basis = Basis::from_basic(vec![0, 1], 4);
        let z = array![2.0, 4.0, 0.0, 0.0];
        let rt = min_ratio_test(z.view(), &basis, array![-1.0, -4.0].view());
        assert!((rt.theta - 1.0).abs() < 1e-12);
        assert_eq!(rt.argmin, vec![1]);

        let z = array![0.0, 3.0, 0.0, 0.0];
        let rt = min_ratio_test(z.view(), &basis, array![-1.0, -1.0].view());
        assert_eq!(rt.theta, 0.0);
        assert_eq!(rt.argmin, vec![0]);

        let z = array![2.0, 2.0, 0.0, 0.0];
        let rt = min_ratio_test(z.view(), &basis, array![-1.0, -1.0].view());
        assert!((rt.theta - 2.0).abs() < 1e-12);
        assert_eq!(rt.argmin, vec![0, 1]);
    }

    #[test]
    fn ratio_test_unbounded_edge() {
        let basis = Basis::from_basic(vec![0], 2);
        let z = array![1.0, 0.0];
        let rt = min_ratio_test(z.view(), &basis, array![1.0].view());
        assert!(rt.theta.is_infinite());
        assert!(matches!(
            rt.require_bounded(1),
            Err(LpError::UnboundedEdge { entering: 1 })
        ));
    }

    #[test]
    fn tnp_singleton_returns_it() {
        let d = PivotDirectionMatrix {
            d: array![[1.0, -1.0], [3.0, -1.0]],
        };
        let i = tnp_select_leaving(&d, 0, 1, &[1], &[4, 7]).unwrap();
        assert_eq!(i, 1);
    }

    #[test]
    fn tnp_picks_max_ratio() {
        // Column t = (1, 3), column j = (-1, -1): ratios (-1, -3), pick row 0.
        let d = PivotDirectionMatrix {
            d: array![[1.0, -1.0], [3.0, -1.0]],
        };
        let i = tnp_select_leaving(&d, 0, 1, &[0, 1], &[4, 7]).unwrap();
        assert_eq!(i, 0);
    }

    #[test]
    fn tnp_rejects_bad_argmin() {
        let d = PivotDirectionMatrix {
            d: array![[1.0, 0.5]],
        };
        assert!(matches!(
            tnp_select_leaving(&d, 0, 1, &[0], &[3]),
            Err(LpError::PivotContract(_))
        ));
    }

    #[test]
    fn nondegenerate_vertex_keeps_its_basis() {
        let lp = to_standard_form(
            array![[1.0, 0.0], [0.0, 1.0]].view(),
            array![1.0, 1.0].view(),
            Sense::Min,
        )
        .unwrap();
        let bfs = solver().solve(&lp, array![1.0, 1.0].view()).unwrap();
        assert_eq!(bfs.sigma, 0);
        let tb = find_transition_basis(&lp, &bfs).unwrap();
        assert_eq!(tb.key(), bfs.basis.key());
    }

    #[test]
    fn pyramid_apex_transition_basis_admits_positive_step() {
        let lp = pyramid();
        for partner in [0usize, 1, 3, 4] {
            let bfs = apex_bfs(&lp, partner);
            let tb = find_transition_basis(&lp, &bfs).unwrap();
            let d = compute_directions(&lp, &tb).unwrap();
            let found = first_transition_column(&lp, &tb, bfs.z.view(), &d).unwrap();
            assert!(found.is_some(), "partner {partner} gave no transition column");
        }
    }

    #[test]
    fn tnp_preserves_transition_column_on_pyramid() {
        let lp = pyramid();
        let bfs = apex_bfs(&lp, 3); // basis {z3, s1}
        let basis = bfs.basis.clone();
        let directions = compute_directions(&lp, &basis).unwrap();
        let mut t_col = None;
        let mut zero_cols = Vec::new();
        for j in 0..basis.nonbasic.len() {
            let rt = min_ratio_test(bfs.z.view(), &basis, directions.d.column(j));
            if rt.theta > TOL_RATIO && t_col.is_none() {
                t_col = Some(j);
            } else if rt.is_degenerate() {
                zero_cols.push((j, rt.argmin));
            }
        }
        let t = t_col.expect("apex basis with s1 is a transition node");
        for (j, argmin) in zero_cols {
            let i = tnp_select_leaving(&directions, t, j, &argmin, &basis.basic).unwrap();
            let mut next = basis.clone();
            next.basic[i] = basis.nonbasic[j];
            next.nonbasic[j] = basis.basic[i];
            // The tracked transition variable must still admit a positive step.
            let t_var = basis.nonbasic[t];
            let d2 = compute_directions(&lp, &next).unwrap();
            let t_new = next.nonbasic.iter().position(|&v| v == t_var).unwrap();
            let rt = min_ratio_test(bfs.z.view(), &next, d2.d.column(t_new));
            assert!(rt.theta > TOL_RATIO);
        }
    }

    #[test]
    fn triangle_vertex_has_two_neighbors() {
        let lp = from_equality_form(
            array![[1.0, 1.0, 1.0]].view(),
            array![1.0].view(),
            Sense::Min,
            vec![],
        )
        .unwrap();
        let bfs = solver().solve(&lp, array![1.0, 2.0, 3.0].view()).unwrap();
        let adj = enumerate_adjacent_vertices(&lp, &bfs).unwrap();
        assert_eq!(adj.adjacent.nrows(), 2);
        assert_eq!(adj.bases_visited, 1);
    }

    #[test]
    fn cube_corner_has_three_neighbors() {
        let lp = to_standard_form(
            array![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]].view(),
            array![1.0, 1.0, 1.0].view(),
            Sense::Min,
        )
        .unwrap();
        let bfs = solver().solve(&lp, array![1.0, 1.0, 1.0].view()).unwrap();
        assert_eq!(bfs.sigma, 0);
        let adj = enumerate_adjacent_vertices(&lp, &bfs).unwrap();
        assert_eq!(adj.adjacent.nrows(), 3);
        assert_eq!(adj.bases_visited, 1);
        // Structural parts are the three unit vectors.
        for r in 0..3 {
            let row = adj.adjacent.row(r);
            let sum: f64 = row.slice(ndarray::s![..3]).sum();
            assert!((sum - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn pyramid_apex_has_four_neighbors_via_multiple_bases() {
        let lp = pyramid();
        for partner in [0usize, 1, 3, 4] {
            let bfs = apex_bfs(&lp, partner);
            assert_eq!(bfs.sigma, 1);
            let adj = enumerate_adjacent_vertices(&lp, &bfs).unwrap();
            assert_eq!(
                adj.adjacent.nrows(),
                4,
                "apex with partner {partner} should see the 4 base corners"
            );
            assert!(adj.bases_visited >= 2);
            let expected = [
                array![0.0, 0.0, 0.0, 1.0, 1.0],
                array![1.0, 0.0, 0.0, 0.0, 1.0],
                array![0.0, 1.0, 0.0, 1.0, 0.0],
                array![1.0, 1.0, 0.0, 0.0, 0.0],
            ];
            for want in expected {
                assert!(
                    adj.adjacent
                        .rows()
                        .into_iter()
                        .any(|row| inf_dist(row, want.view()) < 1e-9),
                    "missing neighbor {want:?}"
                );
            }
        }
    }

    #[test]
    fn brute_force_triangle_and_square() {
        let triangle = from_equality_form(
            array![[1.0, 1.0, 1.0]].view(),
            array![1.0].view(),
            Sense::Min,
            vec![],
        )
        .unwrap();
        let bf = brute_force_adjacency(&triangle).unwrap();
        assert_eq!(bf.vertices.len(), 3);
        assert!(bf.neighbors.iter().all(|n| n.len() == 2));

        let square = to_standard_form(
            array![[1.0, 0.0], [0.0, 1.0]].view(),
            array![1.0, 1.0].view(),
            Sense::Min,
        )
        .unwrap();
        let bf = brute_force_adjacency(&square).unwrap();
        assert_eq!(bf.vertices.len(), 4);
        assert!(bf.neighbors.iter().all(|n| n.len() == 2));
    }

    #[test]
    fn brute_force_pyramid_apex_adjacent_to_base() {
        let lp = pyramid();
        let bf = brute_force_adjacency(&lp).unwrap();
        assert_eq!(bf.vertices.len(), 5);
        let apex = bf
            .vertex_index(array![0.0, 0.0, 1.0, 0.0, 0.0].view())
            .unwrap();
        assert_eq!(bf.neighbors[apex].len(), 4);
    }

    #[test]
    fn enumerate_matches_brute_force_on_degenerate_lid() {
        // Pyramid plus the redundant lid z3 <= 1: apex degeneracy rises to 2.
        let lp = to_standard_form(
            array![[1.0, 0.0, 1.0], [0.0, 1.0, 1.0], [0.0, 0.0, 1.0]].view(),
            array![1.0, 1.0, 1.0].view(),
            Sense::Min,
        )
        .unwrap();
        let bfs = solver().solve(&lp, array![0.0, 0.0, -1.0].view()).unwrap();
        assert!((bfs.z[2] - 1.0).abs() < 1e-9);
        assert_eq!(bfs.sigma, 2);
        let adj = enumerate_adjacent_vertices(&lp, &bfs).unwrap();
        let bf = brute_force_adjacency(&lp).unwrap();
        let expected = bf.neighbors_of(bfs.z.view()).unwrap();
        assert_eq!(adj.adjacent.nrows(), expected.len());
        for want in expected {
            assert!(adj
                .adjacent
                .rows()
                .into_iter()
                .any(|row| inf_dist(row, want.view()) <= TOL_VERTEX_DEDUP));
        }
    }

    #[test]
    fn brute_force_guard_trips() {
        // 30 choose 15 is far above the guard.
        let a = Array2::from_shape_fn((15, 15), |(i, j)| if i == j { 1.0 } else { 0.1 });
        let lp = to_standard_form(a.view(), Array1::ones(15).view(), Sense::Min).unwrap();
        assert!(matches!(
            brute_force_adjacency(&lp),
            Err(LpError::TooManyBases { .. })
        ));
    }
}
