//! Small quasi-Newton maximizer for two-parameter likelihoods.

#[derive(Debug, Clone, Copy)]
pub struct MaximizeOptions {
    pub max_iter: usize,
    /// Stop when the gradient's infinity norm falls below this.
    pub grad_tol: f64,
}

impl Default for MaximizeOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            grad_tol: 1e-7,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Optimum {
    pub point: [f64; 2],
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// BFGS ascent with a backtracking Armijo line search.
///
/// `objective` returns `None` where the function is undefined; the search
/// treats those points as infinitely bad.
pub fn maximize_bfgs<F>(objective: F, start: [f64; 2], opts: MaximizeOptions) -> Option<Optimum>
where
    F: Fn([f64; 2]) -> Option<(f64, [f64; 2])>,
{
    let (mut value, mut grad) = objective(start)?;
    let mut x = start;
    // inverse Hessian approximation of the negated objective
    let mut h = [[1.0, 0.0], [0.0, 1.0]];
    let mut stalled = 0;
    for iter in 0..opts.max_iter {
        if grad[0].abs().max(grad[1].abs()) < opts.grad_tol {
            return Some(Optimum {
                point: x,
                value,
                iterations: iter,
                converged: true,
            });
        }
        let mut dir = [
            h[0][0] * grad[0] + h[0][1] * grad[1],
            h[1][0] * grad[0] + h[1][1] * grad[1],
        ];
        let mut slope = dir[0] * grad[0] + dir[1] * grad[1];
        if slope <= 0.0 {
            // lost positive definiteness: fall back to steepest ascent
            h = [[1.0, 0.0], [0.0, 1.0]];
            dir = grad;
            slope = grad[0] * grad[0] + grad[1] * grad[1];
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial = [x[0] + step * dir[0], x[1] + step * dir[1]];
            if let Some((v, g)) = objective(trial) {
                if v.is_finite() && v >= value + 1e-4 * step * slope {
                    accepted = Some((trial, v, g));
                    break;
                }
            }
            step *= 0.5;
        }
        // gains below rounding of the objective mean the search is walking on noise
        let noise = 8.0 * f64::EPSILON * value.abs().max(1.0);
        stalled = match accepted {
            Some((_, v, _)) if v - value <= noise => stalled + 1,
            _ => 0,
        };
        let Some((next, next_value, next_grad)) = accepted.filter(|_| stalled < 3) else {
            // no ascent possible along the search direction
            return Some(Optimum {
                point: x,
                value,
                iterations: iter,
                converged: grad[0].abs().max(grad[1].abs()) < opts.grad_tol.sqrt(),
            });
        };
        let s = [next[0] - x[0], next[1] - x[1]];
        // gradient change of the negated objective
        let y = [grad[0] - next_grad[0], grad[1] - next_grad[1]];
        let sy = s[0] * y[0] + s[1] * y[1];
        if sy > 1e-12 {
            let hy = [h[0][0] * y[0] + h[0][1] * y[1], h[1][0] * y[0] + h[1][1] * y[1]];
            let yhy = y[0] * hy[0] + y[1] * hy[1];
            let rho = 1.0 / sy;
            for i in 0..2 {
                for j in 0..2 {
                    h[i][j] += (1.0 + yhy * rho) * rho * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
                }
            }
        }
        x = next;
        value = next_value;
        grad = next_grad;
    }
    Some(Optimum {
        point: x,
        value,
        iterations: opts.max_iter,
        converged: grad[0].abs().max(grad[1].abs()) < opts.grad_tol,
    })
}
