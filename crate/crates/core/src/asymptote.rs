//! First-order tail asymptote `T_f(λ) = ∫ |f(x)/λ|^{α(x)} C(α(x)) dx`
//! and the ratio `P(|I(f)| > λ) / T_f(λ)`.

use std::f64::consts::{FRAC_2_PI, FRAC_PI_2};

use rayon::prelude::*;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::function_space::MultistableSpec;
use crate::inversion::Inverter;
use crate::quadrature::{Estimate, QuadratureConfig};

/// Half-width of the window around `γ = 1` where `C(γ)` is replaced by its
/// limit `2/π`.
pub const GAMMA_ONE_SWITCH: f64 = 1e-8;

/// `C(γ) = (1-γ) / (Γ(2-γ) cos(πγ/2))`, continuously extended by
/// `C(1) = 2/π`. It is the constant in `P(|Z| > λ) ~ C(γ) λ^{-γ}` for a
/// standard symmetric γ-stable `Z`.
pub fn tail_constant(gamma_: f64) -> Result<f64> {
    if !(gamma_ > 0.0 && gamma_ < 2.0) {
        return Err(Error::domain(format!("tail constant needs γ in (0, 2), got {gamma_}")));
    }
    if (gamma_ - 1.0).abs() < GAMMA_ONE_SWITCH {
        return Ok(FRAC_2_PI);
    }
    // cos(πγ/2) = sin(π(1-γ)/2) keeps full relative precision near γ = 1.
    let u = 1.0 - gamma_;
    Ok(u / (gamma(1.0 + u) * (FRAC_PI_2 * u).sin()))
}

/// Cached weights `wᵢ = Wᵢ·C(αᵢ)`, one per distinct exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct TailAsymptote {
    /// `(αᵢ, wᵢ)` sorted by exponent.
    terms: Vec<(f64, f64)>,
}

impl TailAsymptote {
    pub fn new(spec: &MultistableSpec) -> Result<Self> {
        let terms = spec
            .exponent_terms()
            .into_iter()
            .map(|t| Ok((t.alpha, t.weight * tail_constant(t.alpha)?)))
            .collect::<Result<Vec<_>>>()?;
        if terms.is_empty() {
            return Err(Error::domain("the tail asymptote of f ≡ 0 vanishes identically"));
        }
        Ok(Self { terms })
    }

    pub fn terms(&self) -> &[(f64, f64)] {
        &self.terms
    }

    /// `T_f(λ) = Σ wᵢ λ^{-αᵢ}`.
    pub fn value(&self, lambda: f64) -> Result<f64> {
        check_lambda(lambda)?;
        Ok(self.terms.iter().map(|&(a, w)| w * lambda.powf(-a)).sum())
    }

    /// `d ln T / d ln λ`, a weighted mean of `-αᵢ`.
    pub fn log_slope(&self, lambda: f64) -> Result<f64> {
        check_lambda(lambda)?;
        let (mut num, mut den) = (0.0, 0.0);
        for &(a, w) in &self.terms {
            let v = w * lambda.powf(-a);
            num -= a * v;
            den += v;
        }
        Ok(num / den)
    }

    fn sum_with(&self, mut factor: impl FnMut(f64) -> f64) -> f64 {
        self.terms.iter().map(|&(a, w)| w * factor(a)).sum()
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("λ must be positive and finite, got {lambda}")))
    }
}

/// `T_f(λ)`.
pub fn tail_asymptote(spec: &MultistableSpec, lambda: f64) -> Result<f64> {
    TailAsymptote::new(spec)?.value(lambda)
}

/// One row of a ratio scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioPoint {
    pub lambda: f64,
    pub asymptote: f64,
    pub probability: Estimate,
    pub ratio: f64,
    /// Bound on `|ratio - exact ratio|` from the quadrature error.
    pub abs_err_bound: f64,
}

/// Relative accuracy demanded of the tail probability in ratio computations
/// unless the configuration asks for more.
fn ratio_config(cfg: &QuadratureConfig, asymptote: f64) -> QuadratureConfig {
    QuadratureConfig {
        abs_tol: cfg.abs_tol.min(cfg.rel_tol * asymptote).max(f64::MIN_POSITIVE),
        ..*cfg
    }
}

/// `P(|I(f)| > λ) / T_f(λ)`. The main theorem states that this tends to 1
/// uniformly over the unit sphere.
pub fn ratio(spec: &MultistableSpec, lambda: f64, cfg: &QuadratureConfig) -> Result<RatioPoint> {
    let asym = TailAsymptote::new(spec)?;
    let inv = Inverter::new(spec)?;
    ratio_with(&asym, &inv, lambda, cfg)
}

fn ratio_with(asym: &TailAsymptote, inv: &Inverter, lambda: f64, cfg: &QuadratureConfig) -> Result<RatioPoint> {
    let t = asym.value(lambda)?;
    let p = inv.tail(lambda, &ratio_config(cfg, t))?;
    Ok(RatioPoint {
        lambda,
        asymptote: t,
        probability: p,
        ratio: p.value / t,
        abs_err_bound: p.error / t,
    })
}

/// [`ratio`] over a grid, evaluated in parallel; rows come back in grid order.
pub fn ratio_scan(spec: &MultistableSpec, lambdas: &[f64], cfg: &QuadratureConfig) -> Result<Vec<RatioPoint>> {
    let asym = TailAsymptote::new(spec)?;
    let inv = Inverter::new(spec)?;
    lambdas.par_iter().map(|&l| ratio_with(&asym, &inv, l, cfg)).collect()
}

/// Outcome of the three scaling sandwiches for `T_f`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScalingCheck {
    /// `ξ^{-b} T(1) ≤ T(ξ)`.
    pub xi_lower: bool,
    /// `T(ξ) ≤ ξ^{-a} T(1)`.
    pub xi_upper: bool,
    /// `δ^{-a}T(λ) ≤ T(δλ) ≤ δ^{-b}T(λ)` for `δ ≤ 1`, reversed for `δ > 1`,
    /// evaluated at `λ = ξ`.
    pub delta: bool,
}

impl ScalingCheck {
    pub fn all(&self) -> bool {
        self.xi_lower && self.xi_upper && self.delta
    }
}

/// Evaluates both scaling remarks for `T_f` in closed form.
///
/// Each side is a sum over the same terms, so termwise monotonicity of
/// `x ↦ x^{-α}` carries over to the rounded sums; the only slack allowed is
/// a few ulps for the `(δλ)^{-α}` versus `δ^{-α}λ^{-α}` factorisation.
pub fn scaling_bounds_check(spec: &MultistableSpec, xi: f64, delta: f64) -> Result<ScalingCheck> {
    if !(xi >= 1.0) || !xi.is_finite() {
        return Err(Error::domain(format!("ξ must be at least 1, got {xi}")));
    }
    check_lambda(delta)?;
    let asym = TailAsymptote::new(spec)?;
    let (a, b) = spec.exponent_bounds();
    let t_xi = asym.sum_with(|al| xi.powf(-al));
    let xi_lower = asym.sum_with(|_| xi.powf(-b)) <= t_xi;
    let xi_upper = t_xi <= asym.sum_with(|_| xi.powf(-a));

    let lambda = xi;
    let t_scaled = asym.sum_with(|al| delta.powf(-al) * lambda.powf(-al));
    let (lo_exp, hi_exp) = if delta <= 1.0 { (a, b) } else { (b, a) };
    let lower = asym.sum_with(|al| delta.powf(-lo_exp) * lambda.powf(-al));
    let upper = asym.sum_with(|al| delta.powf(-hi_exp) * lambda.powf(-al));
    let slack = 8.0 * f64::EPSILON * t_scaled;
    let delta_ok = lower <= t_scaled + slack
        && t_scaled <= upper + slack
        && (asym.value(delta * lambda)? - t_scaled).abs() <= slack;
    Ok(ScalingCheck {
        xi_lower,
        xi_upper,
        delta: delta_ok,
    })
}
