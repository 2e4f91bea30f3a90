//! Deterministic first-order optimizers shared by the gradient-based
//! learners: full-batch gradient descent with backtracking, and its
//! projected variant for a single convex constraint set.

/// Outcome of an optimizer run.
#[derive(Debug, Clone)]
pub struct OptimResult {
    pub x: Vec<f64>,
    pub objective: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Full-batch gradient descent with Armijo backtracking.
///
/// Stops when the gradient L2 norm drops to `tol` or after `max_iter`
/// iterations. The objective never increases between iterations.
pub fn gradient_descent<F>(x0: Vec<f64>, tol: f64, max_iter: usize, mut eval: F) -> OptimResult
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let mut x = x0;
    let (mut fx, mut grad) = eval(&x);
    let mut step = 1.0_f64;
    let mut iterations = 0;

    while iterations < max_iter {
        let gnorm = l2_norm(&grad);
        if gnorm <= tol {
            return OptimResult { x, objective: fx, grad_norm: gnorm, iterations, converged: true };
        }
        let g2 = gnorm * gnorm;
        // Backtrack until sufficient decrease.
        let mut t = step;
        let mut accepted = false;
        for _ in 0..60 {
            let candidate: Vec<f64> = x.iter().zip(&grad).map(|(xi, gi)| xi - t * gi).collect();
            let (fc, gc) = eval(&candidate);
            if fc.is_finite() && fc <= fx - 1e-4 * t * g2 {
                x = candidate;
                fx = fc;
                grad = gc;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // Step underflow: no descent direction progress left.
            let gn = l2_norm(&grad);
            return OptimResult { x, objective: fx, grad_norm: gn, iterations, converged: false };
        }
        // Let the step grow back so well-conditioned stretches move fast.
        step = (t * 2.0).min(1e6);
        iterations += 1;
    }
    let gn = l2_norm(&grad);
    OptimResult { x, objective: fx, grad_norm: gn, iterations, converged: gn <= tol }
}

/// Projected gradient descent onto a convex set given by `project`.
///
/// Convergence is measured on the gradient mapping (x - P(x - t g)) / t.
pub fn projected_gradient_descent<F, P>(
    x0: Vec<f64>,
    tol: f64,
    max_iter: usize,
    mut eval: F,
    project: P,
) -> OptimResult
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
    P: Fn(&[f64]) -> Vec<f64>,
{
    let mut x = project(&x0);
    let (mut fx, mut grad) = eval(&x);
    let mut step = 1.0_f64;
    let mut iterations = 0;

    while iterations < max_iter {
        // Probe the gradient mapping at unit step for the stopping test.
        let probe: Vec<f64> = x.iter().zip(&grad).map(|(xi, gi)| xi - gi).collect();
        let mapped = project(&probe);
        let residual = l2_norm(
            &x.iter().zip(&mapped).map(|(a, b)| a - b).collect::<Vec<f64>>(),
        );
        if residual <= tol {
            return OptimResult { x, objective: fx, grad_norm: residual, iterations, converged: true };
        }

        let mut t = step;
        let mut accepted = false;
        for _ in 0..60 {
            let moved: Vec<f64> = x.iter().zip(&grad).map(|(xi, gi)| xi - t * gi).collect();
            let candidate = project(&moved);
            let diff: Vec<f64> = candidate.iter().zip(&x).map(|(c, xi)| c - xi).collect();
            let dnorm2: f64 = diff.iter().map(|d| d * d).sum();
            if dnorm2 == 0.0 {
                t *= 0.5;
                continue;
            }
            let (fc, gc) = eval(&candidate);
            // Sufficient decrease for the proximal step.
            if fc.is_finite() && fc <= fx - (1e-4 / t) * dnorm2 {
                x = candidate;
                fx = fc;
                grad = gc;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            let probe: Vec<f64> = x.iter().zip(&grad).map(|(xi, gi)| xi - gi).collect();
            let mapped = project(&probe);
            let residual = l2_norm(
                &x.iter().zip(&mapped).map(|(a, b)| a - b).collect::<Vec<f64>>(),
            );
            return OptimResult { x, objective: fx, grad_norm: residual, iterations, converged: false };
        }
        step = (t * 2.0).min(1e6);
        iterations += 1;
    }
    let probe: Vec<f64> = x.iter().zip(&grad).map(|(xi, gi)| xi - gi).collect();
    let mapped = project(&probe);
    let residual = l2_norm(&x.iter().zip(&mapped).map(|(a, b)| a - b).collect::<Vec<f64>>());
    OptimResult { x, objective: fx, grad_norm: residual, iterations, converged: residual <= tol }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_quadratic() {
        // f(x) = (x0-3)^2 + 2(x1+1)^2
        let res = gradient_descent(vec![0.0, 0.0], 1e-10, 1000, |x| {
            let f = (x[0] - 3.0).powi(2) + 2.0 * (x[1] + 1.0).powi(2);
            let g = vec![2.0 * (x[0] - 3.0), 4.0 * (x[1] + 1.0)];
            (f, g)
        });
        assert!(res.converged);
        assert!((res.x[0] - 3.0).abs() < 1e-8);
        assert!((res.x[1] + 1.0).abs() < 1e-8);
    }

    #[test]
    fn objective_monotone_under_backtracking() {
        let mut last = f64::INFINITY;
        let mut values = Vec::new();
        gradient_descent(vec![5.0], 1e-12, 200, |x| {
            let f = x[0].powi(4) + x[0].powi(2);
            values.push(f);
            (f, vec![4.0 * x[0].powi(3) + 2.0 * x[0]])
        });
        // eval is also called for rejected candidates; track accepted ones by
        // rerunning and checking the reported optimum instead.
        let res = gradient_descent(vec![5.0], 1e-12, 200, |x| {
            let f = x[0].powi(4) + x[0].powi(2);
            (f, vec![4.0 * x[0].powi(3) + 2.0 * x[0]])
        });
        assert!(res.objective <= 1e-10);
        for v in values {
            // sanity: no NaN anywhere in the search
            assert!(v.is_finite());
            last = last.min(v);
        }
        assert!(last <= 1e-10);
    }

    #[test]
    fn projected_stays_feasible() {
        // minimize (x-5)^2 subject to x <= 1
        let res = projected_gradient_descent(
            vec![0.0],
            1e-10,
            500,
            |x| ((x[0] - 5.0).powi(2), vec![2.0 * (x[0] - 5.0)]),
            |x| vec![x[0].min(1.0)],
        );
        assert!(res.converged);
        assert!((res.x[0] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn projected_is_plain_gd_when_unconstrained() {
        let res = projected_gradient_descent(
            vec![4.0],
            1e-10,
            500,
            |x| ((x[0] - 2.0).powi(2), vec![2.0 * (x[0] - 2.0)]),
            |x| x.to_vec(),
        );
        assert!(res.converged);
        assert!((res.x[0] - 2.0).abs() < 1e-8);
    }
}
