use crate::glm::link::{LinkFunction, LinkKind};
use crate::{Error, Matrix, Result, Vector};

/// Stopping rule for the Newton/IRLS solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleSettings {
    /// Stop once the gradient infinity-norm falls to this level.
    pub grad_tol: f64,
    pub max_iter: usize,
}

impl Default for MleSettings {
    fn default() -> Self {
        Self {
            grad_tol: 1e-8,
            max_iter: 100,
        }
    }
}

/// Ridge-penalized negative log-likelihood of `theta` under the link's
/// canonical exponential family (Gaussian for identity, Bernoulli for
/// logistic; fractional responses are allowed for the latter).
pub fn penalized_nll(link: LinkFunction, history: &[(Vector, f64)], ridge: f64, theta: &Vector) -> f64 {
    let data: f64 = history
        .iter()
        .map(|(x, y)| {
            let z = x.dot(theta);
            match link.kind() {
                LinkKind::Identity => 0.5 * (y - z) * (y - z),
                LinkKind::Logistic => softplus(z) - y * z,
            }
        })
        .sum();
    data + 0.5 * ridge * theta.norm_squared()
}

/// Maximum-likelihood estimate solving Σ (y − μ(xᵀθ)) x = ridge·θ.
pub fn mle_fit(link: LinkFunction, history: &[(Vector, f64)], ridge: f64) -> Result<Vector> {
    mle_fit_with(link, history, ridge, MleSettings::default(), None)
}

/// [`mle_fit`] with explicit stopping rule and an optional warm start.
pub fn mle_fit_with(
    link: LinkFunction,
    history: &[(Vector, f64)],
    ridge: f64,
    settings: MleSettings,
    warm_start: Option<&Vector>,
) -> Result<Vector> {
    let dim = check_history(history)?;
    if !(ridge >= 0.0 && ridge.is_finite()) {
        return Err(Error::Domain(format!("ridge must be finite and >= 0, got {ridge}")));
    }
    match link.kind() {
        LinkKind::Identity => fit_least_squares(history, dim, ridge),
        LinkKind::Logistic => {
            let init = match warm_start {
                Some(t) if t.len() == dim => t.clone(),
                _ => Vector::zeros(dim),
            };
            fit_newton(link, history, dim, ridge, settings, init)
        }
    }
}

fn check_history(history: &[(Vector, f64)]) -> Result<usize> {
    let first = history
        .first()
        .ok_or_else(|| Error::Domain("MLE requires a non-empty history".into()))?;
    let dim = first.0.len();
    if dim == 0 {
        return Err(Error::Domain("contexts must have positive dimension".into()));
    }
    for (i, (x, y)) in history.iter().enumerate() {
        if x.len() != dim {
            return Err(Error::Domain(format!(
                "history entry {i} has dimension {}, expected {dim}",
                x.len()
            )));
        }
        if !y.is_finite() || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("history entry {i} is not finite")));
        }
    }
    Ok(dim)
}

fn fit_least_squares(history: &[(Vector, f64)], dim: usize, ridge: f64) -> Result<Vector> {
    let mut gram = Matrix::identity(dim, dim) * ridge;
    let mut moment = Vector::zeros(dim);
    for (x, y) in history {
        gram.ger(1.0, x, x, 1.0);
        moment.axpy(*y, x, 1.0);
    }
    solve_spd(gram, &moment, ridge)
}

fn fit_newton(
    link: LinkFunction,
    history: &[(Vector, f64)],
    dim: usize,
    ridge: f64,
    settings: MleSettings,
    mut theta: Vector,
) -> Result<Vector> {
    let mut objective = penalized_nll(link, history, ridge, &theta);
    let mut grad_norm = f64::INFINITY;
    for _ in 0..settings.max_iter {
        let mut grad = &theta * ridge;
        let mut hess = Matrix::identity(dim, dim) * ridge;
        for (x, y) in history {
            let z = x.dot(&theta);
            grad.axpy(link.mean(z) - y, x, 1.0);
            hess.ger(link.slope(z), x, x, 1.0);
        }
        grad_norm = grad.amax();
        if grad_norm <= settings.grad_tol {
            return Ok(theta);
        }
        let step = solve_spd(hess, &grad, ridge)?;

        // Inside the quadratic region the predicted decrease is below the
        // objective's rounding, so the line search can no longer judge steps.
        let decrement = grad.dot(&step);
        if decrement <= 1e-12 * (1.0 + objective.abs()) {
            theta -= &step;
            objective = penalized_nll(link, history, ridge, &theta);
            continue;
        }

        // Damped Newton: halve until the objective does not increase.
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let candidate = &theta - &step * scale;
            let value = penalized_nll(link, history, ridge, &candidate);
            if value <= objective {
                theta = candidate;
                objective = value;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            // Objective is flat to machine precision along the step.
            break;
        }
    }
    // One last gradient evaluation at the final iterate.
    let mut grad = &theta * ridge;
    for (x, y) in history {
        grad.axpy(link.mean(x.dot(&theta)) - y, x, 1.0);
    }
    let final_norm = grad.amax();
    if final_norm <= settings.grad_tol {
        Ok(theta)
    } else {
        Err(Error::Convergence {
            iterations: settings.max_iter,
            grad_norm: final_norm.min(grad_norm),
        })
    }
}

fn solve_spd(matrix: Matrix, rhs: &Vector, ridge: f64) -> Result<Vector> {
    match matrix.cholesky() {
        Some(chol) => Ok(chol.solve(rhs)),
        None if ridge == 0.0 => Err(Error::Singular(
            "information matrix is not positive definite with ridge = 0".into(),
        )),
        None => Err(Error::Numeric(
            "information matrix lost positive definiteness".into(),
        )),
    }
}

#[inline]
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;

    fn e(dim: usize, i: usize) -> Vector {
        let mut v = Vector::zeros(dim);
        v[i] = 1.0;
        v
    }

    #[test]
    fn identity_orthonormal_noiseless() {
        let history = vec![(e(2, 0), 0.3), (e(2, 1), 0.7)];
        let theta = mle_fit(LinkFunction::identity(), &history, 0.0).unwrap();
        assert!((theta[0] - 0.3).abs() < 1e-15);
        assert!((theta[1] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn logistic_half_responses_give_zero() {
        let history = vec![(e(1, 0), 0.5); 10];
        let theta = mle_fit(LinkFunction::logistic(), &history, 0.0).unwrap();
        assert!(theta[0].abs() < 1e-6);
    }

    #[test]
    fn identity_matches_closed_form_ridge() {
        let mut rng = rng::from_seed(3);
        let history: Vec<_> = (0..30)
            .map(|_| (Vector::from_fn(4, |_, _| rng.random::<f64>()), rng.random::<f64>()))
            .collect();
        let ridge = 0.7;
        let theta = mle_fit(LinkFunction::identity(), &history, ridge).unwrap();
        let mut gram = Matrix::identity(4, 4) * ridge;
        let mut moment = Vector::zeros(4);
        for (x, y) in &history {
            gram += x * x.transpose();
            moment += x * *y;
        }
        let expected = gram.try_inverse().unwrap() * moment;
        assert!((theta - expected).amax() < 1e-12);
    }

    #[test]
    fn singular_without_ridge() {
        let history = vec![(e(2, 0), 1.0)];
        assert!(matches!(
            mle_fit(LinkFunction::identity(), &history, 0.0),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn large_nearly_separable_history_reaches_tolerance() {
        // Hundreds of rows with large features put the objective in the
        // hundreds; the final steps must still drive the gradient under 1e-8.
        let mut r = rng::from_seed(17);
        let history: Vec<(Vector, f64)> = (0..600)
            .map(|_| {
                let x = Vector::from_fn(12, |_, _| r.random_range(-3.0..3.0));
                let y = if x[0] + 0.5 * x[1] > 0.0 { 1.0 } else { 0.0 };
                (x, y)
            })
            .collect();
        let theta = mle_fit(LinkFunction::logistic(), &history, 1.0).unwrap();
        let mut grad = &theta * 1.0;
        for (x, y) in &history {
            grad.axpy(LinkFunction::logistic().mean(x.dot(&theta)) - y, x, 1.0);
        }
        assert!(grad.amax() <= 1e-8, "{}", grad.amax());
    }

    #[test]
    fn iteration_cap_reports_gradient() {
        let history = vec![(e(1, 0), 1.0), (e(1, 0), 1.0), (e(1, 0), 0.0)];
        let settings = MleSettings {
            grad_tol: 1e-8,
            max_iter: 1,
        };
        match mle_fit_with(LinkFunction::logistic(), &history, 0.0, settings, None) {
            Err(Error::Convergence { grad_norm, .. }) => assert!(grad_norm > 1e-8),
            other => panic!("unexpected {other:?}"),
        }
        let theta = mle_fit(LinkFunction::logistic(), &history, 0.0).unwrap();
        assert!((theta[0] - 2f64.ln()).abs() < 1e-8);
    }

    #[test]
    fn empty_and_ragged_histories_are_rejected() {
        assert!(mle_fit(LinkFunction::identity(), &[], 1.0).is_err());
        let ragged = vec![(e(2, 0), 1.0), (e(3, 0), 1.0)];
        assert!(matches!(
            mle_fit(LinkFunction::identity(), &ragged, 1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn logistic_gradient_vanishes_at_fit() {
        let mut rng = rng::from_seed(11);
        let truth = Vector::from_vec(vec![0.8, -1.2, 0.3]);
        let link = LinkFunction::logistic();
        let history: Vec<_> = (0..200)
            .map(|_| {
                let x = Vector::from_fn(3, |_, _| rng.random::<f64>() * 2.0 - 1.0);
                let p = link.mean(x.dot(&truth));
                let y = if rng.random::<f64>() < p { 1.0 } else { 0.0 };
                (x, y)
            })
            .collect();
        let ridge = 0.5;
        let theta = mle_fit(link, &history, ridge).unwrap();
        let mut grad = &theta * ridge;
        for (x, y) in &history {
            grad += x * (link.mean(x.dot(&theta)) - y);
        }
        assert!(grad.amax() <= 1e-8);
    }
}
