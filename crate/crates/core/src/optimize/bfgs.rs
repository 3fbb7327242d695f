//! Dense BFGS with a backtracking Armijo line search. Used for the
//! two-parameter QAOA submanifold, so no sparsity or limited-memory
//! machinery is needed.

pub(crate) struct BfgsOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
}

const ARMIJO_C1: f64 = 1e-4;
const BACKTRACK: f64 = 0.5;
const MAX_BACKTRACKS: usize = 40;

/// Minimizes `f` starting from `x0`. `f` returns the value and gradient.
pub(crate) fn minimize(
    mut f: impl FnMut(&[f64]) -> (f64, Vec<f64>),
    x0: &[f64],
    grad_tol: f64,
    max_iter: usize,
) -> BfgsOutcome {
    let n = x0.len();
    let mut x = x0.to_vec();
    let (mut fx, mut gx) = f(&x);
    // Inverse Hessian approximation, dense row-major.
    let mut h_inv = identity(n);
    let mut iterations = 0;

    for _ in 0..max_iter {
        let gnorm = norm(&gx);
        if gnorm < grad_tol {
            break;
        }
        iterations += 1;

        let mut dir = mat_vec(&h_inv, &gx);
        dir.iter_mut().for_each(|d| *d = -*d);
        let mut slope = dot(&gx, &dir);
        if slope >= 0.0 {
            // Not a descent direction; reset to steepest descent.
            h_inv = identity(n);
            dir = gx.iter().map(|g| -g).collect();
            slope = dot(&gx, &dir);
        }

        // Backtracking line search with the Armijo condition.
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let xt: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + step * di).collect();
            let (ft, gt) = f(&xt);
            if ft <= fx + ARMIJO_C1 * step * slope {
                accepted = Some((xt, ft, gt));
                break;
            }
            step *= BACKTRACK;
        }
        let Some((xt, ft, gt)) = accepted else { break };

        let s: Vec<f64> = xt.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gt.iter().zip(&gx).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * norm(&s) * norm(&y) {
            bfgs_update(&mut h_inv, &s, &y, sy);
        }
        x = xt;
        fx = ft;
        gx = gt;
    }

    let grad_norm = norm(&gx);
    BfgsOutcome { x, value: fx, grad_norm, iterations }
}

fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

fn mat_vec(m: &[f64], v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n).map(|i| (0..n).map(|j| m[i * n + j] * v[j]).sum()).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Sherman-Morrison BFGS update of the inverse Hessian:
/// `H <- (I - r s y^T) H (I - r y s^T) + r s s^T` with `r = 1 / (s^T y)`.
fn bfgs_update(h_inv: &mut [f64], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let r = 1.0 / sy;
    let hy = mat_vec(h_inv, y);
    let yhy = dot(y, &hy);
    for i in 0..n {
        for j in 0..n {
            h_inv[i * n + j] += -r * (s[i] * hy[j] + hy[i] * s[j])
                + r * r * yhy * s[i] * s[j]
                + r * s[i] * s[j];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_quadratic_bowl() {
        let f = |x: &[f64]| {
            let v = (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 2.0).powi(2);
            (v, vec![2.0 * (x[0] - 1.0), 6.0 * (x[1] + 2.0)])
        };
        let out = minimize(f, &[5.0, 5.0], 1e-10, 200);
        assert!((out.x[0] - 1.0).abs() < 1e-7);
        assert!((out.x[1] + 2.0).abs() < 1e-7);
    }

    #[test]
    fn minimizes_rosenbrock() {
        let f = |x: &[f64]| {
            let (a, b) = (1.0, 100.0);
            let v = (a - x[0]).powi(2) + b * (x[1] - x[0] * x[0]).powi(2);
            let g = vec![
                -2.0 * (a - x[0]) - 4.0 * b * (x[1] - x[0] * x[0]) * x[0],
                2.0 * b * (x[1] - x[0] * x[0]),
            ];
            (v, g)
        };
        let out = minimize(f, &[-1.2, 1.0], 1e-8, 500);
        assert!((out.x[0] - 1.0).abs() < 1e-5, "got {:?}", out.x);
        assert!((out.x[1] - 1.0).abs() < 1e-5);
    }
}
