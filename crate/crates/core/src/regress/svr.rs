//! Epsilon-insensitive support vector regression. Nonlinear kernels are
//! solved in the dual by SMO with second-order working-set selection; the
//! linear kernel is solved in the primal by an interior-point method, whose
//! cost does not grow with C the way SMO's iteration count does.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{squared_distance, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    Linear,
    Rbf,
    Sigmoid,
}

impl Kernel {
    pub const ALL: [Kernel; 3] = [Kernel::Linear, Kernel::Rbf, Kernel::Sigmoid];

    pub fn as_str(&self) -> &'static str {
        match self {
            Kernel::Linear => "linear",
            Kernel::Rbf => "rbf",
            Kernel::Sigmoid => "sigmoid",
        }
    }

    pub fn eval(&self, gamma: f64, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Kernel::Linear => dot(a, b),
            Kernel::Rbf => (-gamma * squared_distance(a, b)).exp(),
            Kernel::Sigmoid => (gamma * dot(a, b)).tanh(),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solver controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvrSettings {
    /// Stop when the maximal KKT violation falls to this value.
    pub tolerance: f64,
    /// Iteration cap as a multiple of n².
    pub max_iter_factor: usize,
}

impl Default for SvrSettings {
    fn default() -> Self {
        Self { tolerance: 1e-3, max_iter_factor: 10 }
    }
}

/// `1 / (d · var(X))` over all entries of `x`, or 1 for constant data.
pub fn scale_gamma(x: &Matrix) -> f64 {
    let v = x.as_slice();
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|a| (a - m) * (a - m)).sum::<f64>() / n;
    if var > 0.0 {
        1.0 / (x.cols() as f64 * var)
    } else {
        1.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrModel {
    pub kernel: Kernel,
    pub gamma: f64,
    pub support: Matrix,
    /// `alpha - alpha*` of each support vector.
    pub coef: Vec<f64>,
    pub rho: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl SvrModel {
    pub fn predict_row(&self, x: &[f64]) -> f64 {
        self.support
            .iter_rows()
            .zip(&self.coef)
            .map(|(s, c)| c * self.kernel.eval(self.gamma, s, x))
            .sum::<f64>()
            - self.rho
    }
}

/// Full solution of the dual, before support vectors are extracted.
#[derive(Debug, Clone)]
pub struct SvrSolution {
    /// `alpha - alpha*` per training row.
    pub coef: Vec<f64>,
    pub rho: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Solves the ε-SVR dual for a precomputed kernel matrix `k` (n × n).
pub fn solve_dual(k: &Matrix, y: &[f64], c: f64, epsilon: f64, settings: &SvrSettings) -> Result<SvrSolution> {
    let n = y.len();
    if n < 2 {
        return Err(Error::Degenerate(format!("{n} training row(s), SVR needs at least 2")));
    }
    if k.rows() != n || k.cols() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: k.rows() });
    }
    if !(c > 0.0) || !(epsilon >= 0.0) {
        return Err(Error::InvalidArgument(format!("C = {c}, epsilon = {epsilon}")));
    }
    const TAU: f64 = 1e-12;
    let l = 2 * n;
    // Variables 0..n are alpha (sign +1), n..2n are alpha* (sign -1).
    let sign = |t: usize| if t < n { 1.0 } else { -1.0 };
    let kk = |s: usize, t: usize| k.get(s % n, t % n);
    let diag: Vec<f64> = (0..n).map(|t| k.get(t, t)).collect();
    let mut alpha = vec![0.0; l];
    let mut grad: Vec<f64> = (0..l)
        .map(|t| if t < n { epsilon - y[t] } else { epsilon + y[t - n] })
        .collect();
    let up = |t: usize, a: f64| if sign(t) > 0.0 { a < c } else { a > 0.0 };
    let low = |t: usize, a: f64| if sign(t) > 0.0 { a > 0.0 } else { a < c };

    let max_iter = settings.max_iter_factor.saturating_mul(n * n).max(1);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..l {
            if up(t, alpha[t]) {
                let v = -sign(t) * grad[t];
                if v >= gmax {
                    gmax = v;
                    i = t;
                }
            }
        }
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut best = f64::INFINITY;
        let (kii, ki) = if i == usize::MAX { (0.0, &[][..]) } else { (diag[i % n], k.row(i % n)) };
        for t in 0..l {
            if !low(t, alpha[t]) {
                continue;
            }
            let yg = sign(t) * grad[t];
            gmax2 = gmax2.max(yg);
            if i == usize::MAX {
                continue;
            }
            let b = gmax + yg;
            if b > 0.0 {
                let tn = if t < n { t } else { t - n };
                let a = kii + diag[tn] - 2.0 * ki[tn];
                let a = if a > 0.0 { a } else { TAU };
                let obj = -(b * b) / a;
                if obj <= best {
                    best = obj;
                    j = t;
                }
            }
        }
        if i == usize::MAX || j == usize::MAX || gmax + gmax2 < settings.tolerance {
            converged = true;
            break;
        }
        iterations += 1;

        let (yi, yj) = (sign(i), sign(j));
        let qij = yi * yj * kk(i, j);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let quad = {
            let q = kk(i, i) + kk(j, j) - 2.0 * yi * yj * qij;
            if q > 0.0 { q } else { TAU }
        };
        if yi != yj {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        if di != 0.0 || dj != 0.0 {
            let (ci, cj) = (yi * di, yj * dj);
            let (ki, kj) = (k.row(i % n), k.row(j % n));
            let (pos, neg) = grad.split_at_mut(n);
            for t in 0..n {
                let v = ci * ki[t] + cj * kj[t];
                pos[t] += v;
                neg[t] -= v;
            }
        }
    }
    if !converged {
        log::debug!("SVR solver stopped at the iteration cap ({max_iter})");
    }

    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free, mut sum_free) = (0usize, 0.0);
    for t in 0..l {
        let yg = sign(t) * grad[t];
        if alpha[t] >= c {
            if sign(t) < 0.0 { ub = ub.min(yg) } else { lb = lb.max(yg) }
        } else if alpha[t] <= 0.0 {
            if sign(t) > 0.0 { ub = ub.min(yg) } else { lb = lb.max(yg) }
        } else {
            free += 1;
            sum_free += yg;
        }
    }
    let rho = if free > 0 { sum_free / free as f64 } else { (ub + lb) / 2.0 };
    let coef = (0..n).map(|t| alpha[t] - alpha[t + n]).collect();
    Ok(SvrSolution { coef, rho, iterations, converged })
}

/// Primal solution of a linear SVR, with the dual coefficients recovered
/// from the interior-point multipliers.
#[derive(Debug, Clone)]
pub struct LinearSolution {
    pub w: Vec<f64>,
    pub b: f64,
    /// `alpha - alpha*` per training row; near zero (not exactly zero)
    /// strictly inside the tube.
    pub coef: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

const IPM_MAX_ITER: usize = 200;
const IPM_TOL: f64 = 1e-10;
const IPM_DUAL_TOL: f64 = 1e-8;
const IPM_STALL: f64 = 1e-14;

/// Solves `min ½|w|²/C + Σ ξ + ξ*` subject to `y - w·x - b ≤ ε + ξ`,
/// `w·x + b - y ≤ ε + ξ*`, `ξ, ξ* ≥ 0` with Mehrotra's predictor-corrector.
/// Slack variables are eliminated per row, so each Newton step costs one
/// (d+1)×(d+1) Cholesky factorization.
pub fn solve_linear_primal(x: &Matrix, y: &[f64], c: f64, epsilon: f64) -> Result<LinearSolution> {
    let (n, d) = (x.rows(), x.cols());
    if n < 2 {
        return Err(Error::Degenerate(format!("{n} training row(s), SVR needs at least 2")));
    }
    if n != y.len() {
        return Err(Error::DimensionMismatch { expected: n, actual: y.len() });
    }
    if !(c > 0.0) || !(epsilon >= 0.0) {
        return Err(Error::InvalidArgument(format!("C = {c}, epsilon = {epsilon}")));
    }
    let m = d + 1;
    let u = |i: usize, v: &[f64]| dot(x.row(i), &v[..d]) + v[d];
    // Constraint blocks: 0 ξ-tube, 1 ξ*-tube, 2 ξ ≥ 0, 3 ξ* ≥ 0.
    let h = |k: usize, i: usize| match k {
        0 => y[i] - epsilon,
        1 => -y[i] - epsilon,
        _ => 0.0,
    };
    let mut v = vec![0.0; m];
    let mut xi = vec![0.0; n];
    let mut xs = vec![0.0; n];
    let mut s = [vec![1.0; n], vec![1.0; n], vec![1.0; n], vec![1.0; n]];
    let mut lam = [vec![0.5; n], vec![0.5; n], vec![0.5; n], vec![0.5; n]];
    let ymax = y.iter().fold(0.0f64, |a, t| a.max(t.abs()));
    let total = (4 * n) as f64;

    let mut iterations = 0;
    let mut converged = false;
    loop {
        // Residuals r_p = Az - s - h and r_d = Qz + c - Aᵀλ.
        let mut rp = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for i in 0..n {
            let t = u(i, &v);
            let az = [t + xi[i], -t + xs[i], xi[i], xs[i]];
            for k in 0..4 {
                rp[k][i] = az[k] - s[k][i] - h(k, i);
            }
        }
        let mut rd_v: Vec<f64> = v.iter().map(|a| a / c).collect();
        rd_v[d] = 0.0;
        for i in 0..n {
            let g = lam[0][i] - lam[1][i];
            for (r, xv) in rd_v.iter_mut().zip(x.row(i)) {
                *r -= g * xv;
            }
            rd_v[d] -= g;
        }
        let rd_xi: Vec<f64> = (0..n).map(|i| 1.0 - lam[0][i] - lam[2][i]).collect();
        let rd_xs: Vec<f64> = (0..n).map(|i| 1.0 - lam[1][i] - lam[3][i]).collect();
        let mu = (0..4).map(|k| dot(&s[k], &lam[k])).sum::<f64>() / total;
        let pinf = rp.iter().flatten().fold(0.0f64, |a, r| a.max(r.abs()));
        let dinf = rd_v.iter().chain(&rd_xi).chain(&rd_xs).fold(0.0f64, |a, r| a.max(r.abs()));
        if mu < IPM_TOL && pinf < IPM_TOL * (1.0 + ymax) && dinf < IPM_DUAL_TOL {
            converged = true;
            break;
        }
        // Past this point rounding in the normal equations only adds noise.
        if iterations == IPM_MAX_ITER || mu < IPM_STALL {
            break;
        }
        iterations += 1;

        let dk: [Vec<f64>; 4] = std::array::from_fn(|k| (0..n).map(|i| lam[k][i] / s[k][i]).collect());
        let mut schur = Matrix::zeros(m, m);
        for j in 0..d {
            schur.set(j, j, 1.0 / c);
        }
        let mut row = vec![0.0; m];
        for i in 0..n {
            let e = dk[0][i] * dk[2][i] / (dk[0][i] + dk[2][i]) + dk[1][i] * dk[3][i] / (dk[1][i] + dk[3][i]);
            row[..d].copy_from_slice(x.row(i));
            row[d] = 1.0;
            for a in 0..m {
                let ea = e * row[a];
                for b in 0..=a {
                    schur.set(a, b, schur.get(a, b) + ea * row[b]);
                }
            }
        }
        let factor = cholesky(&schur)?;

        // Newton direction for a complementarity residual r_c.
        let direction = |rc: &[Vec<f64>; 4]| {
            let q: [Vec<f64>; 4] =
                std::array::from_fn(|k| (0..n).map(|i| rc[k][i] / s[k][i] + dk[k][i] * rp[k][i]).collect());
            let g_xi: Vec<f64> = (0..n).map(|i| -rd_xi[i] - q[0][i] - q[2][i]).collect();
            let g_xs: Vec<f64> = (0..n).map(|i| -rd_xs[i] - q[1][i] - q[3][i]).collect();
            let mut rhs: Vec<f64> = rd_v.iter().map(|r| -r).collect();
            for i in 0..n {
                let f = -(q[0][i] - q[1][i]) - dk[0][i] / (dk[0][i] + dk[2][i]) * g_xi[i]
                    + dk[1][i] / (dk[1][i] + dk[3][i]) * g_xs[i];
                for (r, xv) in rhs.iter_mut().zip(x.row(i)) {
                    *r += f * xv;
                }
                rhs[d] += f;
            }
            let dv = cholesky_solve(&factor, rhs);
            let mut dxi = vec![0.0; n];
            let mut dxs = vec![0.0; n];
            let mut ds: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; n]);
            let mut dl: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; n]);
            for i in 0..n {
                let t = u(i, &dv);
                dxi[i] = (g_xi[i] - dk[0][i] * t) / (dk[0][i] + dk[2][i]);
                dxs[i] = (g_xs[i] + dk[1][i] * t) / (dk[1][i] + dk[3][i]);
                let adz = [t + dxi[i], -t + dxs[i], dxi[i], dxs[i]];
                for k in 0..4 {
                    ds[k][i] = adz[k] + rp[k][i];
                    dl[k][i] = -q[k][i] - dk[k][i] * adz[k];
                }
            }
            (dv, dxi, dxs, ds, dl)
        };
        let max_step = |ds: &[Vec<f64>; 4], dl: &[Vec<f64>; 4]| {
            let mut a = 1.0f64;
            for k in 0..4 {
                for i in 0..n {
                    if ds[k][i] < 0.0 {
                        a = a.min(-s[k][i] / ds[k][i]);
                    }
                    if dl[k][i] < 0.0 {
                        a = a.min(-lam[k][i] / dl[k][i]);
                    }
                }
            }
            a
        };

        let rc_aff: [Vec<f64>; 4] = std::array::from_fn(|k| (0..n).map(|i| s[k][i] * lam[k][i]).collect());
        let (_, _, _, ds_aff, dl_aff) = direction(&rc_aff);
        let a_aff = max_step(&ds_aff, &dl_aff);
        let mu_aff = (0..4)
            .map(|k| (0..n).map(|i| (s[k][i] + a_aff * ds_aff[k][i]) * (lam[k][i] + a_aff * dl_aff[k][i])).sum::<f64>())
            .sum::<f64>()
            / total;
        let sigma = (mu_aff / mu).powi(3).min(1.0);
        let rc: [Vec<f64>; 4] = std::array::from_fn(|k| {
            (0..n).map(|i| s[k][i] * lam[k][i] + ds_aff[k][i] * dl_aff[k][i] - sigma * mu).collect()
        });
        let (dv, dxi, dxs, ds, dl) = direction(&rc);
        let a = (0.99 * max_step(&ds, &dl)).min(1.0);
        for (p, q) in v.iter_mut().zip(&dv) {
            *p += a * q;
        }
        for i in 0..n {
            xi[i] += a * dxi[i];
            xs[i] += a * dxs[i];
            for k in 0..4 {
                s[k][i] += a * ds[k][i];
                lam[k][i] += a * dl[k][i];
            }
        }
    }
    if !converged {
        log::debug!("linear SVR interior point stopped after {iterations} iterations");
    }
    let b = v[d];
    v.truncate(d);
    let coef = (0..n).map(|i| c * (lam[0][i] - lam[1][i])).collect();
    Ok(LinearSolution { w: v, b, coef, iterations, converged })
}

/// Lower Cholesky factor of a symmetric positive semidefinite matrix (only
/// the lower triangle is read). Pivots lost to rounding, which interior-point
/// normal equations produce near convergence, are replaced by a huge value
/// so that the corresponding direction component comes out as zero.
fn cholesky(a: &Matrix) -> Result<Matrix> {
    let m = a.rows();
    let scale = (0..m).fold(0.0f64, |acc, j| acc.max(a.get(j, j).abs()));
    if !scale.is_finite() {
        return Err(Error::Degenerate("normal equations are not finite".into()));
    }
    let tiny = 1e-14 * scale.max(f64::MIN_POSITIVE);
    let mut l = Matrix::zeros(m, m);
    for j in 0..m {
        let mut diag = a.get(j, j);
        for p in 0..j {
            diag -= l.get(j, p) * l.get(j, p);
        }
        let dj = if diag > tiny { diag.sqrt() } else { 1e64 };
        l.set(j, j, dj);
        for i in j + 1..m {
            let mut v = a.get(i, j);
            for p in 0..j {
                v -= l.get(i, p) * l.get(j, p);
            }
            l.set(i, j, v / dj);
        }
    }
    Ok(l)
}

fn cholesky_solve(l: &Matrix, mut b: Vec<f64>) -> Vec<f64> {
    let m = b.len();
    for i in 0..m {
        for p in 0..i {
            b[i] -= l.get(i, p) * b[p];
        }
        b[i] /= l.get(i, i);
    }
    for i in (0..m).rev() {
        for p in i + 1..m {
            b[i] -= l.get(p, i) * b[p];
        }
        b[i] /= l.get(i, i);
    }
    b
}

/// Kernel matrix of the rows of `x`.
pub fn gram(x: &Matrix, kernel: Kernel, gamma: f64) -> Matrix {
    let n = x.rows();
    let mut k = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = kernel.eval(gamma, x.row(i), x.row(j));
            k.set(i, j, v);
            k.set(j, i, v);
        }
    }
    k
}

/// Trains an SVR on (already standardized) rows `x`. A linear model is
/// stored collapsed: one support row holding the weight vector, coefficient 1.
pub fn train_svr(x: &Matrix, y: &[f64], c: f64, epsilon: f64, kernel: Kernel, settings: &SvrSettings) -> Result<SvrModel> {
    if x.rows() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.rows(), actual: y.len() });
    }
    let gamma = scale_gamma(x);
    if kernel == Kernel::Linear {
        let p = solve_linear_primal(x, y, c, epsilon)?;
        return Ok(SvrModel {
            kernel,
            gamma,
            support: Matrix::from_vec(1, x.cols(), p.w)?,
            coef: vec![1.0],
            rho: -p.b,
            iterations: p.iterations,
            converged: p.converged,
        });
    }
    let sol = solve_dual(&gram(x, kernel, gamma), y, c, epsilon, settings)?;
    Ok(from_solution(x, kernel, gamma, sol))
}

pub(crate) fn from_solution(x: &Matrix, kernel: Kernel, gamma: f64, sol: SvrSolution) -> SvrModel {
    let sv: Vec<usize> = (0..x.rows()).filter(|&i| sol.coef[i] != 0.0).collect();
    SvrModel {
        kernel,
        gamma,
        support: x.select_rows(&sv),
        coef: sv.iter().map(|&i| sol.coef[i]).collect(),
        rho: sol.rho,
        iterations: sol.iterations,
        converged: sol.converged,
    }
}
