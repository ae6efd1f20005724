//! Optimization problems behind one cautious-optimistic step.
//!
//! * [`ftrl_argmax`]: `argmax_{x in simplex} <g, x> - psi(x)`.
//! * [`lr_control_solve`]: the one-dimensional learning-rate problem
//!   `max_{lambda in (0, eta]} alpha log lambda + psi*(lambda r)`.
//! * [`lifted_oftrl_step`]: the same step posed over the lifted set `(0, 1] * simplex`.

use crate::error::{Error, Result};
use crate::game::dot;
use crate::regularizer::{clamp_interior, Regularizer, RegularizerKind};

pub const DEFAULT_FTRL_TOL: f64 = 1e-10;
pub const DEFAULT_LR_TOL: f64 = 1e-10;
pub const MAX_BISECTION_ITERS: usize = 200;

/// Smallest admissible learning rate, as a fraction of the cap `eta`.
pub const LAMBDA_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct FtrlSolution {
    pub x: Vec<f64>,
    /// `psi*_simplex(g)`.
    pub objective: f64,
    /// Frank-Wolfe duality gap `max_k s_k - <s, x>` with `s = g - grad psi(x)`.
    pub kkt_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LrSolution {
    pub lambda: f64,
    /// `f(lambda) = alpha log lambda + psi*(lambda r)`.
    pub objective: f64,
    /// `f'(lambda) = alpha / lambda + <r, x_lambda>`.
    pub derivative: f64,
    pub at_cap: bool,
    /// The FTRL iterate at the chosen learning rate.
    pub x: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LiftedStep {
    /// Lifted iterate `y`, with `sum(y) = lambda / eta`.
    pub y: Vec<f64>,
    pub mass: f64,
}

fn check_vector(reg: &Regularizer, v: &[f64], what: &str) -> Result<()> {
    if v.len() != reg.dim() {
        return Err(Error::InvalidInput(format!(
            "{what} has length {}, regularizer dimension is {}",
            v.len(),
            reg.dim()
        )));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(format!("{what} has non-finite entries")));
    }
    Ok(())
}

/// Solves `argmax_{x in simplex} <g, x> - psi(x)` and certifies it by its duality gap.
pub fn ftrl_argmax(reg: &Regularizer, g: &[f64], tol: f64) -> Result<FtrlSolution> {
    check_vector(reg, g, "g")?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let x = argmax_raw(reg, g, tol)?;
    let gap = duality_gap(reg, g, &x);
    let scale = 1.0 + g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(gap <= tol * scale) {
        return Err(Error::Convergence { solver: "ftrl_argmax", iterations: MAX_BISECTION_ITERS, residual: gap });
    }
    let objective = dot(g, &x) - reg.eval(&x);
    Ok(FtrlSolution { x, objective, kkt_residual: gap })
}

/// `(psi*_simplex(g), argmax)`.
pub fn conjugate(reg: &Regularizer, g: &[f64]) -> Result<(f64, Vec<f64>)> {
    let sol = ftrl_argmax(reg, g, DEFAULT_FTRL_TOL)?;
    Ok((sol.objective, sol.x))
}

/// Frank-Wolfe gap of `x` for the concave objective `<g, x> - psi(x)`.
pub fn duality_gap(reg: &Regularizer, g: &[f64], x: &[f64]) -> f64 {
    let mut z = x.to_vec();
    if reg.has_barrier() {
        for v in z.iter_mut() {
            *v = v.max(crate::regularizer::CLAMP_FLOOR);
        }
    }
    let mut grad = vec![0.0; x.len()];
    reg.grad_into(&z, &mut grad);
    let s: Vec<f64> = g.iter().zip(&grad).map(|(a, b)| a - b).collect();
    let best = s.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    (best - dot(&s, x)).max(0.0)
}

/// Uncertified argmax used in inner loops.
pub(crate) fn argmax_raw(reg: &Regularizer, g: &[f64], tol: f64) -> Result<Vec<f64>> {
    match reg.kind() {
        RegularizerKind::NegEntropy => Ok(softmax(g)),
        RegularizerKind::Log => Ok(barrier_dual(g, 1.0, |c| 1.0 / c, |c| -1.0 / (c * c))),
        RegularizerKind::Tsallis { q } => {
            let q = *q;
            let c = (1.0 - q) / q;
            let e = -1.0 / (1.0 - q);
            Ok(barrier_dual(g, 1.0 / c, move |gap| (c * gap).powf(e), move |gap| e * c * (c * gap).powf(e - 1.0)))
        }
        RegularizerKind::SquaredLp { p } if *p == 2.0 => Ok(project_simplex(g)),
        RegularizerKind::SquaredLp { p } => Ok(lp_dual(g, *p)),
        RegularizerKind::Combination(parts) => combination_argmax(reg, parts, g, tol),
    }
}

/// Numerically stable `exp(g) / sum exp(g)`.
pub fn softmax(g: &[f64]) -> Vec<f64> {
    let m = g.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let mut x: Vec<f64> = g.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = x.iter().sum();
    x.iter_mut().for_each(|v| *v /= s);
    x
}

/// Euclidean projection onto the simplex.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut css = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        css += ui;
        let t = (css - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&vi| (vi - theta).max(0.0)).collect()
}

/// Separable barrier regularizers: `x_k = phi(nu - g_k)` with `phi` convex and decreasing.
///
/// `start_gap` is the gap at which `phi` equals one, so `nu0 = max g + start_gap`
/// satisfies `sum_k phi(nu0 - g_k) >= 1`; Newton steps from there increase
/// monotonically to the root.
fn barrier_dual(g: &[f64], start_gap: f64, phi: impl Fn(f64) -> f64, dphi: impl Fn(f64) -> f64) -> Vec<f64> {
    let gmax = g.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let h = |nu: f64| g.iter().map(|&gk| phi(nu - gk)).sum::<f64>() - 1.0;
    let mut nu = gmax + start_gap;
    let mut lo = nu;
    let mut hi = gmax + start_gap * g.len() as f64 * 2.0;
    for _ in 0..MAX_BISECTION_ITERS {
        let hv = h(nu);
        if hv >= 0.0 {
            lo = lo.max(nu);
        } else {
            hi = hi.min(nu);
        }
        if hv.abs() <= 4.0 * f64::EPSILON {
            break;
        }
        let dh: f64 = g.iter().map(|&gk| dphi(nu - gk)).sum();
        let mut next = nu - hv / dh;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if next == nu {
            break;
        }
        nu = next;
    }
    let mut x: Vec<f64> = g.iter().map(|&gk| phi(nu - gk)).collect();
    let s: f64 = x.iter().sum();
    x.iter_mut().for_each(|v| *v /= s);
    x
}

/// Squared l_p norm, `1 < p < 2`: `x = ||w||_p^{p-2} w` with `w_k = (g_k - nu)_+^{1/(p-1)}`.
fn lp_dual(g: &[f64], p: f64) -> Vec<f64> {
    let a = 1.0 / (p - 1.0);
    let gmax = g.iter().fold(f64::NEG_INFINITY, |m, &b| m.max(b));
    let weights = |nu: f64| -> Vec<f64> { g.iter().map(|&gk| (gk - nu).max(0.0).powf(a)).collect() };
    let mass = |w: &[f64]| -> f64 {
        let norm = crate::regularizer::lp_norm(w, p);
        if norm == 0.0 {
            0.0
        } else {
            norm.powf(p - 2.0) * w.iter().sum::<f64>()
        }
    };
    let mut hi = gmax;
    let mut step = 1.0;
    let mut lo = gmax - step;
    while mass(&weights(lo)) < 1.0 {
        step *= 2.0;
        lo = gmax - step;
    }
    for _ in 0..MAX_BISECTION_ITERS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if mass(&weights(mid)) >= 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let w = weights(lo);
    let mut x = w;
    let s: f64 = x.iter().sum();
    x.iter_mut().for_each(|v| *v /= s);
    x
}

/// `psi'(x)` for one coordinate of a separable part; squared l_p parts use `norm_factor = ||x||_p^{2-p}`.
fn part_derivative(kind: &RegularizerKind, x: f64, norm_factor: f64) -> f64 {
    match kind {
        RegularizerKind::NegEntropy => 1.0 + x.ln(),
        RegularizerKind::Log => -1.0 / x,
        RegularizerKind::Tsallis { q } => -q / (1.0 - q) * x.powf(q - 1.0),
        RegularizerKind::SquaredLp { p } if *p == 2.0 => x,
        RegularizerKind::SquaredLp { p } => norm_factor * x.powf(p - 1.0),
        RegularizerKind::Combination(_) => unreachable!("combinations are flattened"),
    }
}

fn combination_argmax(reg: &Regularizer, parts: &[(f64, Regularizer)], g: &[f64], tol: f64) -> Result<Vec<f64>> {
    let curved: Vec<f64> = parts
        .iter()
        .filter_map(|(_, r)| match r.kind() {
            RegularizerKind::SquaredLp { p } if *p < 2.0 => Some(*p),
            _ => None,
        })
        .collect();
    if parts.iter().any(|(_, r)| matches!(r.kind(), RegularizerKind::Combination(_))) || curved.len() > 1 {
        return exponentiated_ascent(reg, g, tol);
    }
    if !reg.has_barrier() && curved.is_empty() {
        // Only squared l2 parts: a scaled Euclidean projection.
        let w: f64 = parts.iter().map(|(w, _)| w).sum();
        let scaled: Vec<f64> = g.iter().map(|v| v / w).collect();
        return Ok(project_simplex(&scaled));
    }
    let Some(&p) = curved.first() else {
        return Ok(separable_argmax(parts, g, 1.0));
    };
    // With the norm factor c held fixed the problem is separable; c is then
    // matched to ||x(c)||_p^{2-p}, which lies in [d^{(1/p-1)(2-p)}, 1].
    let d = g.len() as f64;
    let factor = |c: f64| -> (f64, Vec<f64>) {
        let x = separable_argmax(parts, g, c);
        (c - crate::regularizer::lp_norm(&x, p).powf(2.0 - p), x)
    };
    let (mut lo, mut hi) = (d.powf((1.0 / p - 1.0) * (2.0 - p)), 1.0f64);
    for _ in 0..MAX_BISECTION_ITERS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if factor(mid).0 < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(factor(0.5 * (lo + hi)).1)
}

/// Solves `g_k - psi'(x_k) = nu` coordinatewise with an outer bisection on `nu`.
fn separable_argmax(parts: &[(f64, Regularizer)], g: &[f64], norm_factor: f64) -> Vec<f64> {
    let hprime = |x: f64| -> f64 { parts.iter().map(|(w, r)| w * part_derivative(r.kind(), x, norm_factor)).sum() };
    // Inverts the increasing map x -> psi'(x) on (0, 1] by bisection on log x.
    let invert = |target: f64| -> f64 {
        if hprime(1.0) <= target {
            return 1.0;
        }
        let (mut lo, mut hi) = ((1e-300f64).ln(), 0.0f64);
        if hprime(lo.exp()) >= target {
            return 0.0;
        }
        for _ in 0..MAX_BISECTION_ITERS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if hprime(mid.exp()) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (0.5 * (lo + hi)).exp()
    };
    let d = g.len() as f64;
    let gmax = g.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let gmin = g.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let h0 = hprime(1.0 / d);
    let (mut lo, mut hi) = (gmin - h0, gmax - h0);
    let total = |nu: f64| g.iter().map(|&gk| invert(gk - nu)).sum::<f64>();
    for _ in 0..MAX_BISECTION_ITERS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if total(mid) >= 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let nu = 0.5 * (lo + hi);
    let mut x: Vec<f64> = g.iter().map(|&gk| invert(gk - nu)).collect();
    let s: f64 = x.iter().sum();
    x.iter_mut().for_each(|v| *v /= s);
    x
}

/// Entropic mirror ascent with backtracking for non-separable combinations.
fn exponentiated_ascent(reg: &Regularizer, g: &[f64], tol: f64) -> Result<Vec<f64>> {
    const MAX_ITERS: usize = 200_000;
    let d = g.len();
    let objective = |x: &[f64]| dot(g, x) - reg.eval(x);
    let scale = 1.0 + g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut x = vec![1.0 / d as f64; d];
    let mut fx = objective(&x);
    let mut step = 1.0;
    let mut grad = vec![0.0; d];
    let mut gap = f64::INFINITY;
    for _ in 0..MAX_ITERS {
        gap = duality_gap(reg, g, &x);
        if gap <= 0.1 * tol * scale {
            return Ok(x);
        }
        let mut z = x.clone();
        if reg.has_barrier() {
            clamp_interior(&mut z);
        }
        reg.grad_into(&z, &mut grad);
        let s: Vec<f64> = g.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let smax = s.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        loop {
            let mut cand: Vec<f64> = x.iter().zip(&s).map(|(xi, si)| xi * (step * (si - smax)).exp()).collect();
            let total: f64 = cand.iter().sum();
            cand.iter_mut().for_each(|v| *v /= total);
            let fc = objective(&cand);
            if fc >= fx {
                x = cand;
                fx = fc;
                step *= 1.5;
                break;
            }
            step *= 0.5;
            if step < 1e-300 {
                return Err(Error::Convergence {
                    solver: "exponentiated_ascent",
                    iterations: MAX_ITERS,
                    residual: gap,
                });
            }
        }
    }
    Err(Error::Convergence { solver: "exponentiated_ascent", iterations: MAX_ITERS, residual: gap })
}

/// `f(lambda) = alpha log lambda + psi*(lambda r)` evaluated through the argmax.
pub fn lr_objective(reg: &Regularizer, r: &[f64], alpha: f64, lambda: f64) -> Result<f64> {
    let g: Vec<f64> = r.iter().map(|v| lambda * v).collect();
    let sol = ftrl_argmax(reg, &g, DEFAULT_FTRL_TOL)?;
    Ok(alpha * lambda.ln() + sol.objective)
}

/// Envelope derivative `f'(lambda) = alpha / lambda + <r, x_lambda>`.
pub fn lr_derivative(reg: &Regularizer, r: &[f64], alpha: f64, lambda: f64) -> Result<f64> {
    let g: Vec<f64> = r.iter().map(|v| lambda * v).collect();
    let x = argmax_raw(reg, &g, DEFAULT_FTRL_TOL)?;
    Ok(alpha / lambda + dot(r, &x))
}

/// Chooses the learning rate by maximizing `alpha log lambda + psi*(lambda r)` over `(0, eta]`.
///
/// The objective is strictly concave when `alpha > gamma`, so the maximizer is
/// found by bisecting on the sign of the envelope derivative. Bisection runs on
/// `log lambda` over `[LAMBDA_FLOOR * eta, eta]` and stops once
/// `|f'(lambda)| * lambda / alpha <= tol` or the bracket collapses.
pub fn lr_control_solve(reg: &Regularizer, r: &[f64], eta: f64, alpha: f64, tol: f64) -> Result<LrSolution> {
    let gamma = reg.constants().gamma;
    if !(alpha > gamma) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must exceed gamma = {gamma}")));
    }
    solve_stationary(reg, r, eta, alpha, tol)
}

/// Derivative bisection without the `alpha > gamma` guard; the result is a
/// stationary point (or the cap) but only certified as the maximizer under concavity.
pub fn solve_stationary(reg: &Regularizer, r: &[f64], eta: f64, alpha: f64, tol: f64) -> Result<LrSolution> {
    check_vector(reg, r, "r")?;
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::InvalidParameter(format!("eta must be positive, got {eta}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    let eval = |lambda: f64| -> Result<(f64, Vec<f64>)> {
        let g: Vec<f64> = r.iter().map(|v| lambda * v).collect();
        let x = argmax_raw(reg, &g, DEFAULT_FTRL_TOL)?;
        Ok((alpha / lambda + dot(r, &x), x))
    };
    let finish = |lambda: f64, derivative: f64, x: Vec<f64>, at_cap: bool| -> Result<LrSolution> {
        let g: Vec<f64> = r.iter().map(|v| lambda * v).collect();
        let gap = duality_gap(reg, &g, &x);
        let scale = 1.0 + g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !(gap <= DEFAULT_FTRL_TOL * scale) {
            return Err(Error::Convergence { solver: "ftrl_argmax", iterations: MAX_BISECTION_ITERS, residual: gap });
        }
        let objective = alpha * lambda.ln() + dot(&g, &x) - reg.eval(&x);
        Ok(LrSolution { lambda, objective, derivative, at_cap, x })
    };

    let (d_cap, x_cap) = eval(eta)?;
    if d_cap >= 0.0 {
        return finish(eta, d_cap, x_cap, true);
    }
    let floor = eta * LAMBDA_FLOOR;
    let (d_floor, x_floor) = eval(floor)?;
    if d_floor <= 0.0 {
        return finish(floor, d_floor, x_floor, false);
    }
    let (mut lo, mut hi) = (floor.ln(), eta.ln());
    let mut best = (floor, d_floor, x_floor);
    for _ in 0..MAX_BISECTION_ITERS {
        let mid = 0.5 * (lo + hi);
        let lambda = mid.exp();
        let (dv, x) = eval(lambda)?;
        best = (lambda, dv, x);
        if dv.abs() * lambda / alpha <= tol || hi - lo <= 4.0 * f64::EPSILON {
            return finish(best.0, best.1, best.2, false);
        }
        if dv > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let residual = best.1.abs() * best.0 / alpha;
    Err(Error::Convergence { solver: "lr_control_solve", iterations: MAX_BISECTION_ITERS, residual })
}

/// One step over the lifted set:
/// `argmax_{y in (0,1] * simplex} eta <r, y> + alpha log(sum y) - psi(y / sum y)`.
///
/// The mass `s = sum y` is found by golden-section search on `log s`, using
/// only objective values, and the direction by the FTRL argmax at `eta * s * r`.
pub fn lifted_oftrl_step(reg: &Regularizer, r: &[f64], eta: f64, alpha: f64) -> Result<LiftedStep> {
    check_vector(reg, r, "r")?;
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::InvalidParameter(format!("eta must be positive, got {eta}")));
    }
    let gamma = reg.constants().gamma;
    if !(alpha > gamma) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must exceed gamma = {gamma}")));
    }
    let objective = |t: f64| -> Result<(f64, Vec<f64>)> {
        let s = t.exp();
        let g: Vec<f64> = r.iter().map(|v| eta * s * v).collect();
        let x = argmax_raw(reg, &g, DEFAULT_FTRL_TOL)?;
        Ok((dot(&g, &x) + alpha * t - reg.eval(&x), x))
    };
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (LAMBDA_FLOOR.ln(), 0.0f64);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = objective(c)?.0;
    let mut fd = objective(d)?.0;
    for _ in 0..MAX_BISECTION_ITERS {
        if b - a <= 1e-14 {
            break;
        }
        if fc < fd {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = objective(d)?.0;
        } else {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = objective(c)?.0;
        }
    }
    let mid = 0.5 * (a + b);
    let (f_mid, x_mid) = objective(mid)?;
    let (f_top, x_top) = objective(0.0)?;
    let (t, x) = if f_top >= f_mid { (0.0, x_top) } else { (mid, x_mid) };
    let mass = t.exp();
    Ok(LiftedStep { y: x.iter().map(|v| v * mass).collect(), mass })
}

/// Learning rate chosen at every `(r1, r2)` point of a two-action grid.
///
/// Landscapes are also drawn for `alpha <= gamma`, where only stationarity is certified.
pub fn landscape_grid(reg: &Regularizer, eta: f64, alpha: f64, grid: &[(f64, f64)]) -> Result<Vec<f64>> {
    if reg.dim() != 2 {
        return Err(Error::InvalidInput(format!("landscape needs a 2-action regularizer, got d = {}", reg.dim())));
    }
    grid.iter().map(|&(a, b)| solve_stationary(reg, &[a, b], eta, alpha, DEFAULT_LR_TOL).map(|s| s.lambda)).collect()
}

/// `n x n` grid over `[lo, hi]^2`, row-major in `r1`.
pub fn square_grid(lo: f64, hi: f64, n: usize) -> Vec<(f64, f64)> {
    let step = if n > 1 { (hi - lo) / (n - 1) as f64 } else { 0.0 };
    let axis: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
    axis.iter().flat_map(|&a| axis.iter().map(move |&b| (a, b))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn regs(d: usize) -> Vec<Regularizer> {
        vec![
            Regularizer::neg_entropy(d),
            Regularizer::log_barrier(d),
            Regularizer::squared_lp(d, 2.0).unwrap(),
            Regularizer::squared_lp(d, 1.4).unwrap(),
            Regularizer::tsallis(d, 0.5).unwrap(),
            Regularizer::tsallis(d, 0.3).unwrap(),
            Regularizer::combine(vec![
                (1.0, Regularizer::neg_entropy(d)),
                (0.5, Regularizer::squared_lp(d, 2.0).unwrap()),
            ])
            .unwrap(),
            Regularizer::combine(vec![
                (1.0, Regularizer::neg_entropy(d)),
                (1.0, Regularizer::squared_lp(d, 1.5).unwrap()),
            ])
            .unwrap(),
        ]
    }

    #[test]
    fn zero_signal_gives_uniform() {
        for d in [2, 3, 5] {
            for reg in regs(d) {
                let sol = ftrl_argmax(&reg, &vec![0.0; d], 1e-10).unwrap();
                for v in &sol.x {
                    assert!((v - 1.0 / d as f64).abs() < 1e-9, "{}: {:?}", reg.name(), sol.x);
                }
            }
        }
    }

    #[test]
    fn softmax_case() {
        let sol = ftrl_argmax(&Regularizer::neg_entropy(2), &[(2f64).ln(), 0.0], 1e-10).unwrap();
        assert!((sol.x[0] - 2.0 / 3.0).abs() < 1e-15);
        let (v, _) = conjugate(&Regularizer::neg_entropy(4), &[0.0; 4]).unwrap();
        assert!((v - (4f64).ln()).abs() < 1e-14);
    }

    #[test]
    fn constant_shift_of_signal() {
        for reg in regs(3) {
            let g = [0.3, -1.2, 0.8];
            let c = 2.5;
            let shifted: Vec<f64> = g.iter().map(|v| v + c).collect();
            let (v0, x0) = conjugate(&reg, &g).unwrap();
            let (v1, x1) = conjugate(&reg, &shifted).unwrap();
            assert!((v1 - v0 - c).abs() < 1e-9, "{}", reg.name());
            for (a, b) in x0.iter().zip(&x1) {
                assert!((a - b).abs() < 1e-8, "{}", reg.name());
            }
        }
    }

    #[test]
    fn certificates_hold_on_large_signals() {
        for reg in regs(6) {
            let g = [40.0, -300.0, 12.5, 39.9, -0.1, 7.0];
            let sol = ftrl_argmax(&reg, &g, 1e-10).unwrap();
            assert!((sol.x.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(sol.x.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let reg = Regularizer::neg_entropy(3);
        assert!(ftrl_argmax(&reg, &[0.0, f64::NAN, 1.0], 1e-10).is_err());
        assert!(ftrl_argmax(&reg, &[0.0, 1.0], 1e-10).is_err());
        assert!(matches!(lr_control_solve(&reg, &[0.0; 3], 1.0, 0.5, 1e-10), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn learning_rate_examples() {
        let reg = Regularizer::neg_entropy(4);
        let alpha = 4.0 * reg.constants().gamma + 1.0;
        let eta = 0.05;
        let s = lr_control_solve(&reg, &[0.0; 4], eta, alpha, 1e-10).unwrap();
        assert!(s.at_cap && s.lambda == eta);
        let s = lr_control_solve(&reg, &[0.5, 3.0, 0.0, 1.0], eta, alpha, 1e-10).unwrap();
        assert!(s.at_cap && s.lambda == eta);
        let c = -2.0 * alpha / eta;
        let s = lr_control_solve(&reg, &[c; 4], eta, alpha, 1e-10).unwrap();
        assert!(!s.at_cap);
        assert!((s.lambda - eta / 2.0).abs() < 1e-9 * eta, "{}", s.lambda);
    }

    #[test]
    fn landscape_needs_two_actions() {
        assert!(landscape_grid(&Regularizer::neg_entropy(3), 1.0, 40.0, &[(0.0, 0.0)]).is_err());
        let reg = Regularizer::neg_entropy(2);
        let lam = landscape_grid(&reg, 1.0, 4.0, &[(0.0, 0.0)]).unwrap();
        assert_eq!(lam, vec![1.0]);
    }

    #[test]
    fn lifted_cap_regime() {
        let reg = Regularizer::tsallis(3, 0.5).unwrap();
        let step = lifted_oftrl_step(&reg, &[0.0; 3], 0.1, 4.0 * reg.constants().gamma + 0.5).unwrap();
        assert_eq!(step.mass, 1.0);
        for v in &step.y {
            assert!((v - 1.0 / 3.0).abs() < 1e-12);
        }
    }
}
