//! Training losses and regret metrics.
//!
//! All losses here take cost vectors in the minimization convention; for a
//! maximization LP the caller negates predictions before evaluating the loss
//! and flips the returned gradient. `regret` and `normalized_regret` work in
//! the user-facing sense of the LP.

use ndarray::{Array1, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{LpError, Result};
use crate::lp::{Sense, StandardFormLP, TOL_OBJ};
use crate::simplex::SimplexSolver;

/// Loss value and its gradient with respect to the predicted cost vector.
#[derive(Clone, Debug)]
pub struct LossValueGrad {
    pub value: f64,
    pub grad: Array1<f64>,
}

impl LossValueGrad {
    pub fn check_finite(&self, context: &str) -> Result<()> {
        if self.value.is_finite() && self.grad.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(LpError::NonFinite {
                context: context.to_string(),
            })
        }
    }
}

/// Hinge margin for the adjacent-vertex loss. `infinite()` disables the
/// threshold entirely (the unthresholded ablation).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpsilonMargin(f64);

impl EpsilonMargin {
    pub fn new(epsilon: f64) -> Result<Self> {
        if epsilon >= 0.0 {
            Ok(Self(epsilon))
        } else {
            Err(LpError::Invalid(format!(
                "epsilon must be nonnegative, got {epsilon}"
            )))
        }
    }

    pub fn infinite() -> Self {
        Self(f64::INFINITY)
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    pub fn is_infinite(&self) -> bool {
        self.0.is_infinite()
    }
}

impl Serialize for EpsilonMargin {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for EpsilonMargin {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) if v >= 0.0 => Ok(EpsilonMargin(v)),
            Raw::Num(v) => Err(serde::de::Error::custom(format!("epsilon {v} < 0"))),
            Raw::Text(t) if t == "inf" || t == "infinity" => Ok(EpsilonMargin::infinite()),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("bad epsilon: {t}"))),
        }
    }
}

/// Adjacent-vertex alignment loss:
/// `sum over rows of max(c_hat . (z_star - z_adj), -epsilon)`.
///
/// Never touches a solver; the adjacent vertices are precomputed. The
/// subgradient at a kink is taken as zero (strict-inequality activation).
pub fn lava_loss(
    c_hat: ArrayView1<'_, f64>,
    z_star: ArrayView1<'_, f64>,
    z_adj: ArrayView2<'_, f64>,
    eps: EpsilonMargin,
) -> Result<LossValueGrad> {
    if z_adj.nrows() == 0 {
        return Err(LpError::EmptyAdjacency);
    }
    let n = c_hat.len();
    if z_star.len() != n || z_adj.ncols() != n {
        return Err(LpError::ShapeMismatch {
            context: "lava loss inputs",
            expected: n,
            got: z_star.len().max(z_adj.ncols()),
        });
    }
    let margin = eps.value();
    let obj_star = c_hat.dot(&z_star);
    let mut value = 0.0;
    let mut grad = Array1::zeros(n);
    for row in z_adj.rows() {
        let diff = obj_star - c_hat.dot(&row);
        if eps.is_infinite() {
            value += diff;
            grad += &(&z_star - &row);
        } else if diff > -margin {
            value += diff;
            grad += &(&z_star - &row);
        } else {
            value += -margin;
        }
    }
    Ok(LossValueGrad { value, grad })
}

/// Mean squared error over the cost coefficients.
pub fn mse_loss(c_hat: ArrayView1<'_, f64>, c: ArrayView1<'_, f64>) -> Result<LossValueGrad> {
    let n = c_hat.len();
    if c.len() != n {
        return Err(LpError::ShapeMismatch {
            context: "mse loss inputs",
            expected: n,
            got: c.len(),
        });
    }
    let diff = &c_hat - &c;
    let value = diff.dot(&diff) / n as f64;
    let grad = diff.mapv(|v| 2.0 * v / n as f64);
    Ok(LossValueGrad { value, grad })
}

/// SPO+ surrogate: `-min_z (2c_hat - c)^T z + 2 c_hat^T z_star - c^T z_star`,
/// with gradient `2 (z_star - z_star(2c_hat - c))`. Costs one LP solve.
pub fn spo_plus_loss(
    c_hat: ArrayView1<'_, f64>,
    c: ArrayView1<'_, f64>,
    z_star: ArrayView1<'_, f64>,
    lp: &StandardFormLP,
    solver: &SimplexSolver,
) -> Result<LossValueGrad> {
    let c_hat_full = lp.extend_costs(c_hat)?;
    let c_full = lp.extend_costs(c)?;
    let spo_cost_user = &c_hat_full * 2.0 - &c_full;
    let sol = solver.solve(lp, spo_cost_user.view())?;

    let sign = match lp.original_sense {
        Sense::Min => 1.0,
        Sense::Max => -1.0,
    };
    // Internal (minimization) cost vectors.
    let ch = &c_hat_full * sign;
    let ct = &c_full * sign;
    let spo_int = &ch * 2.0 - &ct;
    let value = -spo_int.dot(&sol.z) + 2.0 * ch.dot(&z_star) - ct.dot(&z_star);
    let grad = (&z_star.to_owned() - &sol.z).mapv(|v| 2.0 * v * sign);
    Ok(LossValueGrad { value, grad })
}

/// `Regret(c_hat, c) = c^T z(c_hat) - c^T z(c)` in the LP's original sense,
/// always nonnegative for an exact solver.
pub fn regret(
    c_hat: ArrayView1<'_, f64>,
    c: ArrayView1<'_, f64>,
    lp: &StandardFormLP,
    solver: &SimplexSolver,
) -> Result<f64> {
    let c_full = lp.extend_costs(c)?;
    let achieved = c_full.dot(&solver.solve(lp, c_hat)?.z);
    let best = solver.solve(lp, c)?.objective_value;
    Ok(match lp.original_sense {
        Sense::Min => achieved - best,
        Sense::Max => best - achieved,
    })
}

/// Normalized regret over a set of instances:
/// sum of regrets divided by the summed achieved objective.
pub fn normalized_regret(
    predictions: &[Array1<f64>],
    true_costs: &[Array1<f64>],
    lp: &StandardFormLP,
    solver: &SimplexSolver,
) -> Result<f64> {
    if predictions.len() != true_costs.len() {
        return Err(LpError::ShapeMismatch {
            context: "normalized regret inputs",
            expected: true_costs.len(),
            got: predictions.len(),
        });
    }
    let mut sum_regret = 0.0;
    let mut sum_achieved = 0.0;
    for (c_hat, c) in predictions.iter().zip(true_costs) {
        let c_full = lp.extend_costs(c.view())?;
        let achieved = c_full.dot(&solver.solve(lp, c_hat.view())?.z);
        let best = solver.solve(lp, c.view())?.objective_value;
        sum_regret += match lp.original_sense {
            Sense::Min => achieved - best,
            Sense::Max => best - achieved,
        };
        sum_achieved += achieved;
    }
    ratio_checked(sum_regret, sum_achieved)
}

/// Shared guard for Eq.-style ratios: errors on a vanishing denominator.
pub fn ratio_checked(numerator: f64, denominator: f64) -> Result<f64> {
    if denominator.abs() < 1e-12 {
        return Err(LpError::Invalid(format!(
            "normalized regret denominator is {denominator:.3e} (numerator {numerator:.3e})"
        )));
    }
    Ok(numerator / denominator)
}
