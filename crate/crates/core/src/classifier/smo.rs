//! Soft-margin binary SVM dual solved by SMO with second-order working set
//! selection.
//!
//! The dual is `min ½ αᵀQα − eᵀα` subject to `yᵀα = 0`, `0 ≤ α ≤ C`, with
//! `Q_ij = y_i y_j K(x_i, x_j)`. Iteration stops once the maximal KKT
//! violation `m(α) − M(α)` drops below `eps`.

/// Dense symmetric RBF kernel matrix.
#[derive(Debug, Clone)]
pub struct Gram {
    n: usize,
    values: Vec<f64>,
}

#[inline]
pub fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

impl Gram {
    pub fn rbf(data: &[Vec<f64>], gamma: f64) -> Self {
        let n = data.len();
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            values[i * n + i] = 1.0;
            for j in 0..i {
                let k = rbf(&data[i], &data[j], gamma);
                values[i * n + j] = k;
                values[j * n + i] = k;
            }
        }
        Self { n, values }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverParams {
    pub eps: f64,
    pub max_iter: usize,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self { eps: 1e-3, max_iter: 0 }
    }
}

impl SolverParams {
    fn iteration_cap(&self, n: usize) -> usize {
        if self.max_iter > 0 {
            self.max_iter
        } else {
            (100 * n).max(100_000)
        }
    }
}

#[derive(Debug, Clone)]
pub struct BinarySolution {
    pub alpha: Vec<f64>,
    pub rho: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Final maximal KKT violation.
    pub gap: f64,
}

const TAU: f64 = 1e-12;

/// Solves the binary dual over the samples `members` of `gram`, with labels
/// `y[t] ∈ {+1, −1}` aligned to `members`.
pub fn solve(gram: &Gram, members: &[usize], y: &[f64], c: f64, params: &SolverParams) -> BinarySolution {
    let n = members.len();
    debug_assert_eq!(n, y.len());
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let kdiag: Vec<f64> = members.iter().map(|&m| gram.get(m, m)).collect();
    let cap = params.iteration_cap(n);
    let mut iterations = 0;
    let mut converged = false;
    let mut gap = f64::INFINITY;

    let upper = |a: f64| a >= c;
    let lower = |a: f64| a <= 0.0;

    while iterations < cap {
        // first index: maximal violating candidate from I_up
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = usize::MAX;
        for t in 0..n {
            if y[t] > 0.0 {
                if !upper(alpha[t]) && -grad[t] >= gmax {
                    gmax = -grad[t];
                    i_sel = t;
                }
            } else if !lower(alpha[t]) && grad[t] >= gmax {
                gmax = grad[t];
                i_sel = t;
            }
        }
        // second index: largest objective decrease from I_low
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j_sel = usize::MAX;
        let mut obj_min = f64::INFINITY;
        if i_sel != usize::MAX {
            let row_i = gram.row(members[i_sel]);
            for t in 0..n {
                let k_it = row_i[members[t]];
                if y[t] > 0.0 {
                    if !lower(alpha[t]) {
                        let diff = gmax + grad[t];
                        if grad[t] >= gmax2 {
                            gmax2 = grad[t];
                        }
                        if diff > 0.0 {
                            let quad = kdiag[i_sel] + kdiag[t] - 2.0 * y[i_sel] * y[t] * k_it;
                            let obj = -(diff * diff) / if quad > 0.0 { quad } else { TAU };
                            if obj <= obj_min {
                                obj_min = obj;
                                j_sel = t;
                            }
                        }
                    }
                } else if !upper(alpha[t]) {
                    let diff = gmax - grad[t];
                    if -grad[t] >= gmax2 {
                        gmax2 = -grad[t];
                    }
                    if diff > 0.0 {
                        let quad = kdiag[i_sel] + kdiag[t] + 2.0 * y[i_sel] * y[t] * k_it;
                        let obj = -(diff * diff) / if quad > 0.0 { quad } else { TAU };
                        if obj <= obj_min {
                            obj_min = obj;
                            j_sel = t;
                        }
                    }
                }
            }
        }
        gap = gmax + gmax2;
        if i_sel == usize::MAX || j_sel == usize::MAX || gap < params.eps {
            converged = true;
            break;
        }
        iterations += 1;

        let (i, j) = (i_sel, j_sel);
        let k_ij = gram.get(members[i], members[j]);
        let q_ij = y[i] * y[j] * k_ij;
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let (mut ai, mut aj) = (old_i, old_j);
        if y[i] != y[j] {
            let mut quad = kdiag[i] + kdiag[j] + 2.0 * q_ij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > 0.0 {
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else if aj > c {
                aj = c;
                ai = c + diff;
            }
        } else {
            let mut quad = kdiag[i] + kdiag[j] - 2.0 * q_ij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > c {
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        alpha[i] = ai;
        alpha[j] = aj;

        let di = (ai - old_i) * y[i];
        let dj = (aj - old_j) * y[j];
        let row_i = gram.row(members[i]);
        let row_j = gram.row(members[j]);
        for t in 0..n {
            let m = members[t];
            grad[t] += y[t] * (row_i[m] * di + row_j[m] * dj);
        }
    }

    let rho = compute_rho(&alpha, &grad, y, c);
    BinarySolution {
        alpha,
        rho,
        iterations,
        converged,
        gap,
    }
}

fn compute_rho(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut free = 0usize;
    let mut sum_free = 0.0;
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            sum_free += yg;
        }
    }
    if free > 0 {
        sum_free / free as f64
    } else {
        (ub + lb) / 2.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decision(gram: &Gram, members: &[usize], y: &[f64], sol: &BinarySolution, target: usize) -> f64 {
        members
            .iter()
            .enumerate()
            .map(|(t, &m)| sol.alpha[t] * y[t] * gram.get(m, target))
            .sum::<f64>()
            - sol.rho
    }

    #[test]
    fn gram_is_symmetric_with_unit_diagonal() {
        let data = vec![vec![0.0, 1.0], vec![2.0, -1.0], vec![0.5, 0.5]];
        let g = Gram::rbf(&data, 0.7);
        for i in 0..3 {
            assert_eq!(g.get(i, i), 1.0);
            for j in 0..3 {
                assert_eq!(g.get(i, j), g.get(j, i));
            }
        }
        assert!((g.get(0, 1) - (-0.7f64 * 8.0).exp()).abs() < 1e-15);
    }

    #[test]
    fn kkt_conditions_hold() {
        // two overlapping clouds so that some multipliers hit the bound
        let data: Vec<Vec<f64>> = (0..40)
            .map(|i| {
                let s = if i < 20 { 1.0 } else { -1.0 };
                let t = i as f64 * 0.37;
                vec![s * 0.6 + t.sin(), (2.0 * t).cos()]
            })
            .collect();
        let y: Vec<f64> = (0..40).map(|i| if i < 20 { 1.0 } else { -1.0 }).collect();
        let members: Vec<usize> = (0..40).collect();
        let g = Gram::rbf(&data, 0.5);
        let c = 2.0;
        let sol = solve(&g, &members, &y, c, &SolverParams::default());
        assert!(sol.converged);
        let eq: f64 = sol.alpha.iter().zip(&y).map(|(a, yy)| a * yy).sum();
        assert!(eq.abs() < 1e-9);
        for t in 0..40 {
            let margin = y[t] * decision(&g, &members, &y, &sol, t);
            let a = sol.alpha[t];
            assert!((0.0..=c).contains(&a));
            if a <= 0.0 {
                assert!(margin >= 1.0 - 2e-3, "t={t} margin={margin}");
            } else if a >= c {
                assert!(margin <= 1.0 + 2e-3, "t={t} margin={margin}");
            } else {
                assert!((margin - 1.0).abs() <= 2e-3, "t={t} margin={margin}");
            }
        }
    }
}
