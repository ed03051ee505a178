//! Exact vertex enumeration for tiny linear programs.
//!
//! The feasible set is `{x : a_k . x <= b_k}`. Every basic solution is found
//! by solving each `N x N` subsystem of tight constraints; the ones that
//! satisfy all constraints are the polytope's vertices. Only sensible for a
//! handful of variables and constraints.

const PIVOT_EPS: f64 = 1e-12;
const FEAS_EPS: f64 = 1e-10;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Halfspace<const N: usize> {
    pub a: [f64; N],
    pub b: f64,
}

impl<const N: usize> Halfspace<N> {
    pub fn new(a: [f64; N], b: f64) -> Self {
        Halfspace { a, b }
    }

    fn slack(&self, x: &[f64; N]) -> f64 {
        self.b - dot(&self.a, x)
    }
}

fn dot<const N: usize>(a: &[f64; N], x: &[f64; N]) -> f64 {
    a.iter().zip(x).map(|(p, q)| p * q).sum()
}

/// Solve `m x = rhs` by Gaussian elimination with partial pivoting.
fn solve_square<const N: usize>(mut m: [[f64; N]; N], mut rhs: [f64; N]) -> Option<[f64; N]> {
    for col in 0..N {
        let pivot = (col..N).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[pivot][col].abs() < PIVOT_EPS {
            return None;
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..N {
            let f = m[row][col] / m[col][col];
            if f != 0.0 {
                for k in col..N {
                    m[row][k] -= f * m[col][k];
                }
                rhs[row] -= f * rhs[col];
            }
        }
    }
    let mut x = [0.0; N];
    for row in (0..N).rev() {
        let tail: f64 = (row + 1..N).map(|k| m[row][k] * x[k]).sum();
        x[row] = (rhs[row] - tail) / m[row][row];
    }
    Some(x)
}

/// All vertices of the polytope, deduplicated.
pub(crate) fn vertices<const N: usize>(constraints: &[Halfspace<N>]) -> Vec<[f64; N]> {
    let mut out: Vec<[f64; N]> = Vec::new();
    let mut chosen = [0usize; N];
    enumerate(constraints, 0, 0, &mut chosen, &mut out);
    out
}

fn enumerate<const N: usize>(
    cs: &[Halfspace<N>],
    start: usize,
    depth: usize,
    chosen: &mut [usize; N],
    out: &mut Vec<[f64; N]>,
) {
    if depth == N {
        let mut m = [[0.0; N]; N];
        let mut rhs = [0.0; N];
        for (r, &k) in chosen.iter().enumerate() {
            m[r] = cs[k].a;
            rhs[r] = cs[k].b;
        }
        if let Some(x) = solve_square(m, rhs) {
            let feasible = cs
                .iter()
                .all(|h| h.slack(&x) >= -FEAS_EPS * (1.0 + h.b.abs()));
            let fresh = !out
                .iter()
                .any(|y| y.iter().zip(&x).all(|(p, q)| (p - q).abs() < 1e-12));
            if feasible && fresh {
                out.push(x);
            }
        }
        return;
    }
    for k in start..cs.len() {
        if cs.len() - k < N - depth {
            break;
        }
        chosen[depth] = k;
        enumerate(cs, k + 1, depth + 1, chosen, out);
    }
}
