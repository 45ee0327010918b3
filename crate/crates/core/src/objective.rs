//! Squared-loss derivatives and the regularized second-order objective.
//!
//! For a tree with leaves `j = 1..T`, each holding gradient sum `G_j` and
//! hessian sum `H_j`, the optimal leaf output is `-G_j / (H_j + l2)` and the
//! objective at that optimum is `-1/2 * sum G_j^2 / (H_j + l2) + leaf_penalty * T`.

use crate::error::{Error, Result};

/// First and second derivative of the loss with respect to the prediction.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GradPair {
    pub g: f64,
    pub h: f64,
}

impl std::ops::Add for GradPair {
    type Output = GradPair;
    fn add(self, o: GradPair) -> GradPair {
        GradPair {
            g: self.g + o.g,
            h: self.h + o.h,
        }
    }
}

impl std::ops::AddAssign for GradPair {
    fn add_assign(&mut self, o: GradPair) {
        self.g += o.g;
        self.h += o.h;
    }
}

/// `1/2 (y - yhat)^2`
pub fn squared_loss(y: f64, yhat: f64) -> f64 {
    0.5 * (y - yhat) * (y - yhat)
}

/// Derivatives of the squared loss at `yhat`.
pub fn loss_grad(y: f64, yhat: f64) -> GradPair {
    GradPair { g: yhat - y, h: 1.0 }
}

fn check_denominator(h: f64, l2: f64) -> Result<f64> {
    let d = h + l2;
    if d > 0.0 {
        Ok(d)
    } else {
        Err(Error::Singularity { hessian: h, l2 })
    }
}

/// Closed-form optimal leaf output `-G / (H + l2)`.
pub fn leaf_weight(g: f64, h: f64, l2: f64) -> Result<f64> {
    Ok(-g / check_denominator(h, l2)?)
}

/// Objective value of a tree whose leaves hold the given `(G, H)` sums.
pub fn leaf_objective(leaves: &[(f64, f64)], l2: f64, leaf_penalty: f64) -> Result<f64> {
    let mut sum = 0.0;
    for &(g, h) in leaves {
        sum += g * g / check_denominator(h, l2)?;
    }
    Ok(-0.5 * sum + leaf_penalty * leaves.len() as f64)
}

/// Reduction of the objective obtained by splitting one leaf into two.
pub fn split_gain(
    g_left: f64,
    h_left: f64,
    g_right: f64,
    h_right: f64,
    l2: f64,
    leaf_penalty: f64,
) -> Result<f64> {
    let dl = check_denominator(h_left, l2)?;
    let dr = check_denominator(h_right, l2)?;
    let dp = check_denominator(h_left + h_right, l2)?;
    Ok(split_gain_unchecked(g_left, dl, g_right, dr, dp, leaf_penalty))
}

#[inline]
pub(crate) fn split_gain_unchecked(
    g_left: f64,
    denom_left: f64,
    g_right: f64,
    denom_right: f64,
    denom_parent: f64,
    leaf_penalty: f64,
) -> f64 {
    let g = g_left + g_right;
    0.5 * (g_left * g_left / denom_left + g_right * g_right / denom_right - g * g / denom_parent)
        - leaf_penalty
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grad_examples() {
        assert_eq!(loss_grad(3.0, 3.0), GradPair { g: 0.0, h: 1.0 });
        assert_eq!(loss_grad(0.0, 2.0), GradPair { g: 2.0, h: 1.0 });
        assert_eq!(loss_grad(5.0, 1.0), GradPair { g: -4.0, h: 1.0 });
    }

    #[test]
    fn weight_examples() {
        assert_eq!(leaf_weight(0.0, 3.0, 1.0).unwrap(), 0.0);
        assert_eq!(leaf_weight(2.0, 3.0, 1.0).unwrap(), -0.5);
        assert_eq!(leaf_weight(-3.0, 3.0, 0.0).unwrap(), 1.0);
        assert!(matches!(
            leaf_weight(1.0, 0.0, 0.0),
            Err(Error::Singularity { .. })
        ));
    }

    #[test]
    fn objective_examples() {
        assert_eq!(leaf_objective(&[(0.0, 1.0)], 0.0, 0.0).unwrap(), 0.0);
        assert_eq!(leaf_objective(&[(2.0, 3.0), (-2.0, 3.0)], 1.0, 0.0).unwrap(), -1.0);
        assert_eq!(leaf_objective(&[(2.0, 3.0), (-2.0, 3.0)], 1.0, 0.5).unwrap(), 0.0);
        assert!(leaf_objective(&[(1.0, -1.0)], 0.5, 0.0).is_err());
    }

    #[test]
    fn gain_examples() {
        assert_eq!(split_gain(0.0, 2.0, 0.0, 5.0, 1.0, 0.0).unwrap(), 0.0);
        assert_eq!(split_gain(2.0, 1.0, -2.0, 1.0, 0.0, 0.0).unwrap(), 4.0);
        assert_eq!(split_gain(2.0, 1.0, -2.0, 1.0, 0.0, 5.0).unwrap(), -1.0);
    }

    #[test]
    fn gain_is_parent_minus_children_objective() {
        let (gl, hl, gr, hr, l2, pen) = (1.5, 2.0, -0.25, 3.0, 0.7, 0.2);
        let parent = leaf_objective(&[(gl + gr, hl + hr)], l2, pen).unwrap();
        let children = leaf_objective(&[(gl, hl), (gr, hr)], l2, pen).unwrap();
        let gain = split_gain(gl, hl, gr, hr, l2, pen).unwrap();
        assert!((gain - (parent - children)).abs() < 1e-12);
    }

    #[test]
    fn optimal_weight_is_a_minimum() {
        for &(g, h, l2) in &[(2.0, 3.0, 1.0), (-7.5, 1.0, 0.0), (0.3, 10.0, 2.5)] {
            let w = leaf_weight(g, h, l2).unwrap();
            let f = |w: f64| 0.5 * (h + l2) * w * w + g * w;
            assert!(f(w + 1e-3) >= f(w));
            assert!(f(w - 1e-3) >= f(w));
        }
    }
}
