//! Sequential minimal optimization for the soft-margin SVM dual:
//!
//! minimize 0.5 a' Q a - sum(a) subject to 0 <= a_i <= C and y' a = 0,
//! where Q_ij = y_i y_j K(x_i, x_j).
//!
//! Each step picks the maximal violating pair (largest KKT violation over
//! the up set against the low set), solves the two-variable subproblem
//! analytically with box clipping, and updates the cached gradient. This is
//! the classic working-set-of-two scheme; convergence is declared when the
//! maximal violation falls below the tolerance.

/// Guards the two-variable step against a non-positive curvature estimate.
const TAU: f64 = 1e-12;

pub(crate) struct SmoSolution {
    pub alpha: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Symmetric kernel matrix stored row-major.
pub(crate) struct KernelMatrix {
    n: usize,
    values: Vec<f64>,
}

impl KernelMatrix {
    pub fn compute(points: &[&[f64]], kernel: impl Fn(&[f64], &[f64]) -> f64) -> Self {
        let n = points.len();
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = kernel(points[i], points[j]);
                values[i * n + j] = v;
                values[j * n + i] = v;
            }
        }
        KernelMatrix { n, values }
    }

    #[inline]
    fn k(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }
}

/// Runs SMO to `tolerance` or `max_iter` iterations. `y` holds labels in
/// {-1, +1}; `c` is the shared box bound.
pub(crate) fn solve(
    kernel: &KernelMatrix,
    y: &[f64],
    c: f64,
    tolerance: f64,
    max_iter: usize,
) -> SmoSolution {
    let n = y.len();
    assert_eq!(kernel.n, n);
    let q = |i: usize, j: usize| y[i] * y[j] * kernel.k(i, j);

    let mut alpha = vec![0.0; n];
    // Gradient of the dual objective; all -1 at alpha = 0.
    let mut grad = vec![-1.0; n];

    // A point can push its alpha up when (y=+1, a<C) or (y=-1, a>0), and
    // down in the mirrored cases; -y*grad orders the violations.
    let in_up = |t: usize, alpha: &[f64]| {
        (y[t] > 0.0 && alpha[t] < c) || (y[t] < 0.0 && alpha[t] > 0.0)
    };
    let in_low = |t: usize, alpha: &[f64]| {
        (y[t] > 0.0 && alpha[t] > 0.0) || (y[t] < 0.0 && alpha[t] < c)
    };

    let select = |alpha: &[f64], grad: &[f64]| {
        let mut i = None;
        let mut m = f64::NEG_INFINITY;
        let mut j = None;
        let mut low = f64::INFINITY;
        for t in 0..n {
            let v = -y[t] * grad[t];
            if in_up(t, alpha) && v > m {
                m = v;
                i = Some(t);
            }
            if in_low(t, alpha) && v < low {
                low = v;
                j = Some(t);
            }
        }
        (i, j, m, low)
    };

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        let (i, j, m, low) = select(&alpha, &grad);
        let (Some(i), Some(j)) = (i, j) else {
            converged = true;
            break;
        };
        if m - low <= tolerance {
            converged = true;
            break;
        }
        iterations += 1;

        let old_i = alpha[i];
        let old_j = alpha[j];
        if y[i] != y[j] {
            let quad = (q(i, i) + q(j, j) + 2.0 * q(i, j)).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else {
                if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = -diff;
                }
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = c + diff;
                }
            }
        } else {
            let quad = (q(i, i) + q(j, j) - 2.0 * q(i, j)).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = sum;
                }
                if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = sum;
                }
            }
        }

        let delta_i = alpha[i] - old_i;
        let delta_j = alpha[j] - old_j;
        for (t, g) in grad.iter_mut().enumerate() {
            *g += q(t, i) * delta_i + q(t, j) * delta_j;
        }
    }

    // At the optimum -y_t * grad_t equals the bias for every free vector;
    // with none free the KKT bounds still bracket it.
    let mut free_sum = 0.0;
    let mut free_count = 0usize;
    for t in 0..n {
        if alpha[t] > 0.0 && alpha[t] < c {
            free_sum += -y[t] * grad[t];
            free_count += 1;
        }
    }
    let bias = if free_count > 0 {
        free_sum / free_count as f64
    } else {
        let (_, _, m, low) = select(&alpha, &grad);
        if m.is_finite() && low.is_finite() {
            0.5 * (m + low)
        } else if m.is_finite() {
            m
        } else if low.is_finite() {
            low
        } else {
            0.0
        }
    };

    SmoSolution {
        alpha,
        bias,
        iterations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_kernel(points: &[Vec<f64>]) -> KernelMatrix {
        let refs: Vec<&[f64]> = points.iter().map(|p| p.as_slice()).collect();
        KernelMatrix::compute(&refs, |a, b| a.iter().zip(b).map(|(x, y)| x * y).sum())
    }

    #[test]
    fn symmetric_pair_solves_exactly() {
        // min 0.5 a'Qa - sum a with x = -1, +1: optimum a1 = a2 = 0.5,
        // bias 0, margin boundary at x = 0.
        let points = vec![vec![-1.0], vec![1.0]];
        let y = [-1.0, 1.0];
        let sol = solve(&linear_kernel(&points), &y, 10.0, 1e-6, 10_000);
        assert!(sol.converged);
        assert!((sol.alpha[0] - 0.5).abs() < 1e-6, "alpha {:?}", sol.alpha);
        assert!((sol.alpha[1] - 0.5).abs() < 1e-6);
        assert!(sol.bias.abs() < 1e-6, "bias {}", sol.bias);
    }

    #[test]
    fn equality_constraint_is_preserved() {
        let points = vec![
            vec![0.0, 1.0],
            vec![0.3, 0.8],
            vec![1.0, 0.1],
            vec![0.9, -0.2],
            vec![0.5, 0.5],
        ];
        let y = [1.0, 1.0, -1.0, -1.0, 1.0];
        let sol = solve(&linear_kernel(&points), &y, 5.0, 1e-4, 100_000);
        assert!(sol.converged);
        let balance: f64 = sol.alpha.iter().zip(&y).map(|(a, yy)| a * yy).sum();
        assert!(balance.abs() <= 1e-6, "balance {balance}");
        assert!(sol.alpha.iter().all(|&a| (0.0..=5.0).contains(&a)));
    }

    #[test]
    fn iteration_cap_is_respected() {
        let points = vec![vec![-1.0], vec![1.0], vec![-0.9], vec![0.9]];
        let y = [-1.0, 1.0, -1.0, 1.0];
        let sol = solve(&linear_kernel(&points), &y, 1.0, 1e-12, 1);
        assert_eq!(sol.iterations, 1);
    }
}
