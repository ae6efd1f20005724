//! Convex regularizers on the probability simplex.
//!
//! Each regularizer exposes value, gradient and Bregman-divergence oracles
//! together with its intrinsic-Lipschitz constant `gamma`, its strong-convexity
//! modulus `mu` with respect to the l1 norm, and the range `max_simplex psi`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::check_distribution;

/// Tolerance used when validating simplex inputs.
pub const SIMPLEX_TOL: f64 = 1e-10;

/// Floor applied to iterates before evaluating singular oracles.
pub const CLAMP_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub enum RegularizerKind {
    /// `sum_k x_k log x_k`
    NegEntropy,
    /// `-sum_k log x_k`
    Log,
    /// `1/2 ||x||_p^2`, `p` in `(1, 2]`
    SquaredLp { p: f64 },
    /// `(1 - sum_k x_k^q) / (1 - q)`, `q` in `(0, 1)`
    Tsallis { q: f64 },
    /// Positive weighted sum of regularizers over the same simplex.
    Combination(Vec<(f64, Regularizer)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Regularizer {
    kind: RegularizerKind,
    dim: usize,
}

/// Certified constants of a regularizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularizerConstants {
    /// Intrinsic-Lipschitz constant (`gamma(1)` for locally IL kinds).
    pub gamma: f64,
    /// Strong convexity with respect to l1.
    pub mu: f64,
    /// `max_simplex psi - psi(uniform)` for the globally bounded parts.
    pub r_max: f64,
    /// True when only the local IL inequality is certified.
    pub is_local: bool,
    /// Total weight times dimension of log-barrier parts; their range grows as `log(d T)`.
    pub log_weight: f64,
    pub dim: usize,
}

impl RegularizerConstants {
    /// Range term used by bounds at horizon `t`: `r_max + log_weight * log(d t)`.
    pub fn range(&self, t: u64) -> f64 {
        if self.log_weight == 0.0 {
            self.r_max
        } else {
            self.r_max + self.log_weight * ((self.dim as f64) * (t.max(1) as f64)).ln()
        }
    }
}

impl Regularizer {
    pub fn neg_entropy(dim: usize) -> Self {
        Self { kind: RegularizerKind::NegEntropy, dim }
    }

    pub fn log_barrier(dim: usize) -> Self {
        Self { kind: RegularizerKind::Log, dim }
    }

    pub fn squared_lp(dim: usize, p: f64) -> Result<Self> {
        if !(p > 1.0 && p <= 2.0) {
            return Err(Error::InvalidParameter(format!("p must lie in (1, 2], got {p}")));
        }
        Ok(Self { kind: RegularizerKind::SquaredLp { p }, dim })
    }

    pub fn tsallis(dim: usize, q: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidParameter(format!("q must lie in (0, 1), got {q}")));
        }
        Ok(Self { kind: RegularizerKind::Tsallis { q }, dim })
    }

    /// Squared l_p norm with `p* = 1 + 1/log d` (capped at 2 for `d < e^2`).
    pub fn squared_lp_star(dim: usize) -> Self {
        Self { kind: RegularizerKind::SquaredLp { p: p_star(dim) }, dim }
    }

    /// Tsallis entropy with `q* = 1 - 1/log d` (floored at 1/2 for `d < e^2`).
    pub fn tsallis_star(dim: usize) -> Self {
        Self { kind: RegularizerKind::Tsallis { q: q_star(dim) }, dim }
    }

    /// Weighted sum `sum_i a_i psi_i`; all parts must share the dimension. Nested sums are flattened.
    pub fn combine(parts: Vec<(f64, Regularizer)>) -> Result<Self> {
        let dim = parts
            .first()
            .map(|(_, r)| r.dim)
            .ok_or_else(|| Error::InvalidInput("combination needs at least one part".into()))?;
        for (w, r) in &parts {
            if r.dim != dim {
                return Err(Error::InvalidInput(format!("dimension mismatch in combination: {} vs {dim}", r.dim)));
            }
            if !(*w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidInput(format!("combination weight must be positive, got {w}")));
            }
        }
        let mut flat = Vec::with_capacity(parts.len());
        for (w, r) in parts {
            match r.kind {
                RegularizerKind::Combination(inner) => flat.extend(inner.into_iter().map(|(v, q)| (w * v, q))),
                _ => flat.push((w, r)),
            }
        }
        Ok(Self { kind: RegularizerKind::Combination(flat), dim })
    }

    pub fn kind(&self) -> &RegularizerKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Short human-readable name.
    pub fn name(&self) -> String {
        match &self.kind {
            RegularizerKind::NegEntropy => "neg_entropy".into(),
            RegularizerKind::Log => "log".into(),
            RegularizerKind::SquaredLp { p } => format!("squared_lp(p={p})"),
            RegularizerKind::Tsallis { q } => format!("tsallis(q={q})"),
            RegularizerKind::Combination(parts) => {
                let inner: Vec<String> = parts.iter().map(|(w, r)| format!("{w}*{}", r.name())).collect();
                format!("combination({})", inner.join(" + "))
            }
        }
    }

    /// Whether the gradient is singular on the simplex boundary.
    pub fn has_barrier(&self) -> bool {
        match &self.kind {
            RegularizerKind::NegEntropy | RegularizerKind::Log | RegularizerKind::Tsallis { .. } => true,
            RegularizerKind::SquaredLp { .. } => false,
            RegularizerKind::Combination(parts) => parts.iter().any(|(_, r)| r.has_barrier()),
        }
    }

    fn check_simplex(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::InvalidInput(format!(
                "vector has length {}, regularizer dimension is {}",
                x.len(),
                self.dim
            )));
        }
        check_distribution(x, SIMPLEX_TOL).map_err(Error::InvalidInput)
    }

    /// `psi(x)` for `x` in the simplex. Log returns `+inf` on zero entries.
    pub fn value(&self, x: &[f64]) -> Result<f64> {
        self.check_simplex(x)?;
        Ok(self.eval(x))
    }

    /// Unchecked value; also used for the natural extension off the simplex.
    pub(crate) fn eval(&self, x: &[f64]) -> f64 {
        match &self.kind {
            RegularizerKind::NegEntropy => x.iter().map(|&v| if v > 0.0 { v * v.ln() } else { 0.0 }).sum(),
            RegularizerKind::Log => {
                if x.iter().any(|&v| v <= 0.0) {
                    f64::INFINITY
                } else {
                    -x.iter().map(|v| v.ln()).sum::<f64>()
                }
            }
            RegularizerKind::SquaredLp { p } => 0.5 * lp_norm(x, *p).powi(2),
            RegularizerKind::Tsallis { q } => (1.0 - x.iter().map(|&v| v.max(0.0).powf(*q)).sum::<f64>()) / (1.0 - q),
            RegularizerKind::Combination(parts) => parts.iter().map(|(w, r)| w * r.eval(x)).sum(),
        }
    }

    /// `grad psi(x)`; singular kinds require strictly positive input.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_simplex(x)?;
        if self.has_barrier() && x.iter().any(|&v| v <= 0.0) {
            return Err(Error::Domain(format!("{} gradient needs a strictly positive point", self.name())));
        }
        let mut g = vec![0.0; self.dim];
        self.grad_into(x, &mut g);
        Ok(g)
    }

    /// Unchecked gradient written into `out`.
    pub(crate) fn grad_into(&self, x: &[f64], out: &mut [f64]) {
        match &self.kind {
            RegularizerKind::NegEntropy => {
                for (o, &v) in out.iter_mut().zip(x) {
                    *o = 1.0 + v.ln();
                }
            }
            RegularizerKind::Log => {
                for (o, &v) in out.iter_mut().zip(x) {
                    *o = -1.0 / v;
                }
            }
            RegularizerKind::SquaredLp { p } => {
                let norm = lp_norm(x, *p);
                let scale = norm.powf(2.0 - p);
                for (o, &v) in out.iter_mut().zip(x) {
                    *o = scale * v.max(0.0).powf(p - 1.0);
                }
            }
            RegularizerKind::Tsallis { q } => {
                let c = -q / (1.0 - q);
                for (o, &v) in out.iter_mut().zip(x) {
                    *o = c * v.powf(q - 1.0);
                }
            }
            RegularizerKind::Combination(parts) => {
                out.iter_mut().for_each(|o| *o = 0.0);
                let mut tmp = vec![0.0; out.len()];
                for (w, r) in parts {
                    r.grad_into(x, &mut tmp);
                    for (o, t) in out.iter_mut().zip(&tmp) {
                        *o += w * t;
                    }
                }
            }
        }
    }

    /// `D_psi(x_new || x_ref)`.
    pub fn bregman(&self, x_new: &[f64], x_ref: &[f64]) -> Result<f64> {
        self.check_simplex(x_new)?;
        self.check_simplex(x_ref)?;
        if self.has_barrier() && x_ref.iter().any(|&v| v <= 0.0) {
            return Err(Error::Domain(format!(
                "{} Bregman divergence needs a strictly positive reference point",
                self.name()
            )));
        }
        Ok(self.divergence(x_new, x_ref))
    }

    /// Unchecked Bregman divergence, using closed forms where they are better conditioned.
    pub(crate) fn divergence(&self, a: &[f64], b: &[f64]) -> f64 {
        match &self.kind {
            RegularizerKind::NegEntropy => {
                a.iter().zip(b).map(|(&p, &q)| if p > 0.0 { p * (p / q).ln() - p + q } else { q }).sum()
            }
            RegularizerKind::Log => a
                .iter()
                .zip(b)
                .map(|(&p, &q)| {
                    let ratio = p / q;
                    if ratio > 0.0 {
                        ratio - ratio.ln() - 1.0
                    } else {
                        f64::INFINITY
                    }
                })
                .sum(),
            RegularizerKind::Tsallis { q } => {
                let s: f64 = a
                    .iter()
                    .zip(b)
                    .map(|(&xp, &x)| x.powf(*q) - xp.max(0.0).powf(*q) + q * x.powf(q - 1.0) * (xp - x))
                    .sum();
                s / (1.0 - q)
            }
            RegularizerKind::SquaredLp { .. } => self.divergence_by_definition(a, b),
            RegularizerKind::Combination(parts) => parts.iter().map(|(w, r)| w * r.divergence(a, b)).sum(),
        }
    }

    /// `psi(a) - psi(b) - <grad psi(b), a - b>` evaluated literally.
    pub(crate) fn divergence_by_definition(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut g = vec![0.0; b.len()];
        self.grad_into(b, &mut g);
        let lin: f64 = g.iter().zip(a.iter().zip(b)).map(|(gk, (ak, bk))| gk * (ak - bk)).sum();
        self.eval(a) - self.eval(b) - lin
    }

    /// Certified `(gamma, mu, range)` constants.
    pub fn constants(&self) -> RegularizerConstants {
        let d = self.dim as f64;
        match &self.kind {
            RegularizerKind::NegEntropy => RegularizerConstants {
                gamma: 3.0 * d.ln().powi(2),
                mu: 1.0,
                r_max: d.ln(),
                is_local: false,
                log_weight: 0.0,
                dim: self.dim,
            },
            RegularizerKind::Log => RegularizerConstants {
                gamma: 18.0 * d,
                mu: 1.0,
                r_max: 0.0,
                is_local: true,
                log_weight: d,
                dim: self.dim,
            },
            RegularizerKind::SquaredLp { p } => RegularizerConstants {
                gamma: 2.0 / (p - 1.0),
                mu: (p - 1.0) * d.powf(2.0 / p - 2.0),
                r_max: 0.5 * (1.0 - d.powf(2.0 / p - 2.0)),
                is_local: false,
                log_weight: 0.0,
                dim: self.dim,
            },
            RegularizerKind::Tsallis { q } => {
                // The dedicated 1/2-Tsallis bound is four times tighter than the general one.
                let gamma = if *q == 0.5 { 4.0 * d.sqrt() } else { 4.0 * d.powf(1.0 - q) / (1.0 - q).powi(2) };
                let r_max = (d.powf(1.0 - q) - 1.0) / (1.0 - q);
                RegularizerConstants { gamma, mu: *q, r_max, is_local: false, log_weight: 0.0, dim: self.dim }
            }
            RegularizerKind::Combination(parts) => {
                let mut c = RegularizerConstants {
                    gamma: 0.0,
                    mu: 0.0,
                    r_max: 0.0,
                    is_local: false,
                    log_weight: 0.0,
                    dim: self.dim,
                };
                for (w, r) in parts {
                    let k = r.constants();
                    c.gamma += w * k.gamma;
                    c.mu += w * k.mu;
                    c.r_max += w * k.r_max;
                    c.log_weight += w * k.log_weight;
                    c.is_local |= k.is_local;
                }
                c
            }
        }
    }
}

/// `p* = 1 + 1/log d`, capped at 2.
pub fn p_star(dim: usize) -> f64 {
    (1.0 + 1.0 / (dim as f64).ln()).min(2.0)
}

/// `q* = 1 - 1/log d`; dimensions where this drops below 1/2 use 1/2.
pub fn q_star(dim: usize) -> f64 {
    (1.0 - 1.0 / (dim as f64).ln()).max(0.5)
}

pub(crate) fn lp_norm(x: &[f64], p: f64) -> f64 {
    if p == 2.0 {
        return x.iter().map(|v| v * v).sum::<f64>().sqrt();
    }
    x.iter().map(|&v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

/// Bregman divergence of `-log` on the positive reals.
pub fn neg_log_divergence(a: f64, b: f64) -> f64 {
    let ratio = a / b;
    ratio - ratio.ln() - 1.0
}

/// Clamps entries to [`CLAMP_FLOOR`] and renormalizes.
pub fn clamp_interior(x: &mut [f64]) {
    let mut s = 0.0;
    for v in x.iter_mut() {
        if *v < CLAMP_FLOOR {
            *v = CLAMP_FLOOR;
        }
        s += *v;
    }
    x.iter_mut().for_each(|v| *v /= s);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn values_at_symmetric_points() {
        let u4 = vec![0.25; 4];
        assert!(close(Regularizer::neg_entropy(4).value(&u4).unwrap(), -(4f64).ln(), 1e-15));
        assert_eq!(Regularizer::neg_entropy(4).value(&[1.0, 0.0, 0.0, 0.0]).unwrap(), 0.0);
        assert!(close(Regularizer::tsallis(4, 0.5).unwrap().value(&u4).unwrap(), -2.0, 1e-14));
        assert_eq!(Regularizer::log_barrier(2).value(&[1.0, 0.0]).unwrap(), f64::INFINITY);
    }

    #[test]
    fn gradients_at_symmetric_points() {
        let g = Regularizer::neg_entropy(2).gradient(&[0.5, 0.5]).unwrap();
        assert!(g.iter().all(|&v| close(v, 1.0 - (2f64).ln(), 1e-15)));
        let g = Regularizer::log_barrier(2).gradient(&[0.5, 0.5]).unwrap();
        assert_eq!(g, vec![-2.0, -2.0]);
    }

    #[test]
    fn singular_gradient_is_domain_error() {
        for r in [Regularizer::neg_entropy(2), Regularizer::log_barrier(2), Regularizer::tsallis(2, 0.3).unwrap()] {
            assert!(matches!(r.gradient(&[1.0, 0.0]), Err(Error::Domain(_))));
            assert!(matches!(r.bregman(&[0.5, 0.5], &[1.0, 0.0]), Err(Error::Domain(_))));
        }
        assert!(Regularizer::squared_lp(2, 1.5).unwrap().gradient(&[1.0, 0.0]).is_ok());
    }

    #[test]
    fn non_simplex_input_rejected() {
        let r = Regularizer::neg_entropy(2);
        assert!(matches!(r.value(&[0.7, 0.7]), Err(Error::InvalidInput(_))));
        assert!(matches!(r.value(&[0.5, 0.5, 0.0]), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn bregman_examples() {
        let e = Regularizer::neg_entropy(2);
        assert!(close(e.bregman(&[1.0, 0.0], &[0.5, 0.5]).unwrap(), (2f64).ln(), 1e-15));
        let l2 = Regularizer::squared_lp(2, 2.0).unwrap();
        assert!(close(l2.bregman(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0, 1e-15));
        for r in [e, l2, Regularizer::log_barrier(2), Regularizer::tsallis(2, 0.7).unwrap()] {
            assert!(close(r.bregman(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0, 1e-15));
        }
    }

    #[test]
    fn closed_form_divergences_match_definition() {
        let a = [0.1, 0.2, 0.3, 0.4];
        let b = [0.4, 0.1, 0.25, 0.25];
        for r in [
            Regularizer::neg_entropy(4),
            Regularizer::log_barrier(4),
            Regularizer::tsallis(4, 0.35).unwrap(),
            Regularizer::squared_lp(4, 1.3).unwrap(),
        ] {
            let fast = r.divergence(&a, &b);
            let slow = r.divergence_by_definition(&a, &b);
            assert!(close(fast, slow, 1e-12), "{}: {fast} vs {slow}", r.name());
        }
    }

    #[test]
    fn table_constants() {
        let c = Regularizer::neg_entropy(16).constants();
        assert!(close(c.gamma, 3.0 * (16f64).ln().powi(2), 1e-12));
        assert!(close(c.gamma, 23.0618, 1e-4));
        assert_eq!(c.mu, 1.0);
        assert!(close(c.r_max, (16f64).ln(), 1e-15));

        let c = Regularizer::tsallis(16, 0.5).unwrap().constants();
        assert_eq!(c.gamma, 16.0);
        assert_eq!(c.mu, 0.5);

        let c = Regularizer::tsallis(16, 0.25).unwrap().constants();
        assert!(close(c.gamma, 4.0 * 8.0 / 0.5625, 1e-12));

        let c = Regularizer::squared_lp(10, 2.0).unwrap().constants();
        assert_eq!(c.gamma, 2.0);
        assert!(close(c.mu, 0.1, 1e-15));
        assert!(close(c.r_max, 0.45, 1e-15));

        let c = Regularizer::log_barrier(4).constants();
        assert_eq!(c.gamma, 72.0);
        assert!(c.is_local);
        assert!(close(c.range(100), 4.0 * (400f64).ln(), 1e-12));
    }

    #[test]
    fn range_is_vertex_minus_uniform() {
        for d in [2usize, 5, 12] {
            let mut vertex = vec![0.0; d];
            vertex[0] = 1.0;
            let uniform = vec![1.0 / d as f64; d];
            for r in [
                Regularizer::neg_entropy(d),
                Regularizer::squared_lp(d, 1.3).unwrap(),
                Regularizer::tsallis(d, 0.7).unwrap(),
            ] {
                let direct = r.value(&vertex).unwrap() - r.value(&uniform).unwrap();
                assert!(close(r.constants().r_max, direct, 1e-12), "{}", r.name());
            }
        }
    }

    #[test]
    fn star_parameters() {
        assert!(close(p_star(16), 1.0 + 1.0 / (16f64).ln(), 1e-15));
        assert!(close(q_star(16), 1.0 - 1.0 / (16f64).ln(), 1e-15));
        assert_eq!(p_star(2), 2.0);
        assert_eq!(q_star(2), 0.5);
    }

    #[test]
    fn combination_rules() {
        let single = Regularizer::combine(vec![(1.0, Regularizer::neg_entropy(3))]).unwrap();
        let ne = Regularizer::neg_entropy(3);
        let x = [0.2, 0.3, 0.5];
        let y = [0.6, 0.1, 0.3];
        assert_eq!(single.value(&x).unwrap(), ne.value(&x).unwrap());
        assert_eq!(single.gradient(&x).unwrap(), ne.gradient(&x).unwrap());
        assert_eq!(single.bregman(&x, &y).unwrap(), ne.bregman(&x, &y).unwrap());
        assert_eq!(single.constants().gamma, ne.constants().gamma);

        let double = Regularizer::combine(vec![(2.0, Regularizer::neg_entropy(3))]).unwrap();
        assert!(close(double.constants().gamma, 2.0 * 3.0 * (3f64).ln().powi(2), 1e-12));
        assert_eq!(double.constants().mu, 2.0);
        assert!(close(double.value(&x).unwrap(), 2.0 * ne.value(&x).unwrap(), 1e-15));

        assert!(matches!(
            Regularizer::combine(vec![(1.0, Regularizer::neg_entropy(3)), (1.0, Regularizer::log_barrier(4))]),
            Err(Error::InvalidInput(_))
        ));
        assert!(Regularizer::combine(vec![(0.0, Regularizer::neg_entropy(3))]).is_err());
    }

    #[test]
    fn hyperparameter_ranges() {
        assert!(Regularizer::squared_lp(3, 1.0).is_err());
        assert!(Regularizer::squared_lp(3, 2.5).is_err());
        assert!(Regularizer::tsallis(3, 1.0).is_err());
        assert!(Regularizer::tsallis(3, 1.5).is_err());
        assert!(Regularizer::tsallis(3, 0.0).is_err());
    }
}
