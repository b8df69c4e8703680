//! Characteristic functions of multistable integrals.
//!
//! For step data `Φ_f(θ) = exp(-ψ(θ))` with `ψ(θ) = Σⱼ Wⱼ |θ|^{αⱼ}`, one
//! term per distinct exponent. [`CharExponent`] caches the terms; the free
//! functions are convenience wrappers.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::function_space::{ExponentTerm, MultistableSpec};

/// `ψ(θ) = Σⱼ Wⱼ |θ|^{αⱼ}`, the exponent of the characteristic function.
#[derive(Debug, Clone, PartialEq)]
pub struct CharExponent {
    terms: Vec<ExponentTerm>,
}

impl CharExponent {
    pub fn new(spec: &MultistableSpec) -> Self {
        Self {
            terms: spec.exponent_terms(),
        }
    }

    pub fn from_terms(terms: Vec<ExponentTerm>) -> Self {
        Self { terms }
    }

    pub fn terms(&self) -> &[ExponentTerm] {
        &self.terms
    }

    /// Smallest and largest exponent carrying weight.
    pub fn exponent_range(&self) -> Option<(f64, f64)> {
        Some((self.terms.first()?.alpha, self.terms.last()?.alpha))
    }

    /// `ψ(1) = Σⱼ Wⱼ`, the modular at scale 1.
    pub fn total_weight(&self) -> f64 {
        self.terms.iter().map(|t| t.weight).sum()
    }

    pub fn psi(&self, theta: f64) -> f64 {
        let t = theta.abs();
        if t == 0.0 {
            return 0.0;
        }
        self.terms.iter().map(|term| term.weight * t.powf(term.alpha)).sum()
    }

    pub fn cf(&self, theta: f64) -> f64 {
        (-self.psi(theta)).exp()
    }

    /// `1 - Φ(θ)` without cancellation for small `θ`.
    pub fn one_minus_cf(&self, theta: f64) -> f64 {
        -(-self.psi(theta)).exp_m1()
    }

    /// `ψ` continued analytically from the positive axis: `Σ Wⱼ z^{αⱼ}` on
    /// the principal branch, for `Re z > 0` or `z` on the positive axis.
    pub fn psi_complex(&self, z: Complex64) -> Complex64 {
        if z == Complex64::new(0.0, 0.0) {
            return z;
        }
        let (r, arg) = z.to_polar();
        let ln_r = r.ln();
        self.terms
            .iter()
            .map(|term| Complex64::from_polar(term.weight * (term.alpha * ln_r).exp(), term.alpha * arg))
            .sum()
    }

    pub fn cf_complex(&self, z: Complex64) -> Complex64 {
        (-self.psi_complex(z)).exp()
    }

    /// `1 - exp(-ψ(z))`, accurate when `ψ(z)` is small.
    pub fn one_minus_cf_complex(&self, z: Complex64) -> Complex64 {
        -expm1_complex(-self.psi_complex(z))
    }
}

/// `e^w - 1` without cancellation near `w = 0`.
pub fn expm1_complex(w: Complex64) -> Complex64 {
    let (x, y) = (w.re, w.im);
    if x > 1.0 || y.abs() > 1.0 {
        return w.exp() - 1.0;
    }
    let s = (0.5 * y).sin();
    Complex64::new(x.exp_m1() * y.cos() - 2.0 * s * s, x.exp() * y.sin())
}

/// `Φ_f(θ) = exp(-∫ |θ f(x)|^{α(x)} dx)`.
pub fn cf(spec: &MultistableSpec, theta: f64) -> f64 {
    CharExponent::new(spec).cf(theta)
}

/// Joint characteristic function of `(I(f₁), …, I(f_d))` at
/// `(θ₁, …, θ_d)`: `exp(-∫ |Σ θₗ fₗ(x)|^{α(x)} dx)`.
///
/// All specs must share one exponent function.
pub fn cf_multivariate(specs: &[MultistableSpec], thetas: &[f64]) -> Result<f64> {
    let Some(first) = specs.first() else {
        return Err(Error::domain("cf_multivariate needs at least one spec"));
    };
    if specs.len() != thetas.len() {
        return Err(Error::domain(format!(
            "{} specs but {} thetas",
            specs.len(),
            thetas.len()
        )));
    }
    if specs.iter().any(|s| s.alpha() != first.alpha()) {
        return Err(Error::domain("cf_multivariate needs a common exponent function"));
    }
    if thetas.iter().any(|t| !t.is_finite()) {
        return Err(Error::domain("thetas must be finite"));
    }
    let mut points: Vec<f64> = specs
        .iter()
        .flat_map(|s| s.cells().iter().flat_map(|c| [c.lo, c.hi]))
        .collect();
    points.sort_by(f64::total_cmp);
    points.dedup();
    let mut exponent = 0.0;
    for w in points.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let c: f64 = specs.iter().zip(thetas).map(|(s, t)| t * s.eval_f(mid)).sum();
        if c != 0.0 {
            exponent += c.abs().powf(first.eval_alpha(mid)) * (w[1] - w[0]);
        }
    }
    Ok((-exponent).exp())
}
