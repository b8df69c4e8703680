//! Numerical counterparts of the quantities in the tail-asymptote argument:
//! the mollifier `φ_q`, `h_q`, `j₀`, `η_f`, `τ_f` and `ρ_f`, and checks of
//! each intermediate inequality ([`lemmas`]).
//!
//! All `θ`-integrals are even, so they are computed as `2∫_0^∞` on the
//! [`PhiTable`] panels plus a bound (or, for `h_q`, an exact expansion) for
//! the part beyond the table.

pub mod lemmas;
pub mod mollifier;
pub mod table;

pub use mollifier::{build_mollifier, smoothstep5, smoothstep5_derivative, Mollifier, DEFAULT_TABLE_RESOLUTION};
pub use table::{PhiTable, PhiWeight};

use crate::charfn::CharExponent;
use crate::error::{Error, Result};
use crate::function_space::MultistableSpec;
use crate::quadrature::Estimate;

/// `h_q(γ) = ∫ |θ|^γ φ_q(θ) dθ`.
///
/// The table covers `[0, Θ_max]`; the rest is integrated term by term from
/// the closed form of `φ_q`, so no decay model is involved.
pub fn h_q(moll: &Mollifier, gamma: f64) -> Result<Estimate> {
    if !(0.0..2.0).contains(&gamma) {
        return Err(Error::domain(format!("h_q needs γ in [0, 2), got {gamma}")));
    }
    let table = moll.table();
    let body = table.integrate(|t| t.powf(gamma), PhiWeight::Signed);
    let tail = moll.signed_moment_tail(gamma, table.theta_max());
    Ok(Estimate::new(
        2.0 * (body.value + tail.value),
        2.0 * (body.error + tail.error),
    ))
}

/// `j₀(λ, q)`, the integer with `q^{j₀} ≤ λ < q^{j₀+1}`.
pub fn j0(lambda: f64, q: f64) -> Result<u32> {
    if !(q > 1.0) || !q.is_finite() {
        return Err(Error::domain(format!("j0 needs q > 1, got {q}")));
    }
    if !(lambda >= q) || !lambda.is_finite() {
        return Err(Error::domain(format!("j0 needs λ ≥ q, got λ = {lambda}, q = {q}")));
    }
    let mut j = (lambda.ln() / q.ln()).floor().max(1.0) as i32;
    while q.powi(j) > lambda {
        j -= 1;
    }
    while q.powi(j + 1) <= lambda {
        j += 1;
    }
    Ok(j as u32)
}

/// `κ(u) = u - 1 + e^{-u}`, accurate for small `u`.
pub fn kappa1(u: f64) -> f64 {
    if u < 1e-2 {
        // u²/2 - u³/6 + u⁴/24 - …
        let mut term = 0.5 * u * u;
        let mut sum = term;
        for n in 3..12 {
            term *= -u / n as f64;
            sum += term;
        }
        sum
    } else {
        u + (-u).exp_m1()
    }
}

fn check_xi(xi: f64) -> Result<()> {
    if xi >= 1.0 && xi.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("ξ must be at least 1, got {xi}")))
    }
}

fn exponent_of(spec: &MultistableSpec) -> Result<CharExponent> {
    let psi = CharExponent::new(spec);
    if psi.terms().is_empty() {
        return Err(Error::domain("f ≡ 0 has no tail"));
    }
    Ok(psi)
}

/// `M(ξ) = Σ Wⱼ ξ^{-αⱼ}`, so that `ψ(θ/ξ) ≤ M(ξ) θ^b` for `θ ≥ 1`.
fn modular_at(psi: &CharExponent, xi: f64) -> f64 {
    psi.terms().iter().map(|t| t.weight * xi.powf(-t.alpha)).sum()
}

/// `η_f(ξ) = ∫ φ_q(θ) (1 - Φ_f(θ/ξ)) dθ`.
pub fn eta(spec: &MultistableSpec, moll: &Mollifier, xi: f64) -> Result<Estimate> {
    check_xi(xi)?;
    let psi = exponent_of(spec)?;
    let table = moll.table();
    let inv = 1.0 / xi;
    let body = table.integrate(|t| psi.one_minus_cf(t * inv), PhiWeight::Signed);
    // |1 - Φ| ≤ min(1, ψ) beyond the table.
    let theta = table.theta_max();
    let tail = psi
        .terms()
        .iter()
        .map(|t| t.weight * xi.powf(-t.alpha) * moll.abs_moment_tail_bound(t.alpha, theta))
        .sum::<f64>()
        .min(moll.abs_moment_tail_bound(0.0, theta));
    Ok(Estimate::new(2.0 * body.value, 2.0 * (body.error + tail)))
}

/// `τ_f(ξ) = ∫ |f(x)/ξ|^{α(x)} h_q(α(x)) dx`.
pub fn tau(spec: &MultistableSpec, moll: &Mollifier, xi: f64) -> Result<Estimate> {
    check_xi(xi)?;
    let psi = exponent_of(spec)?;
    let mut value = 0.0;
    let mut error = 0.0;
    for t in psi.terms() {
        let h = h_q(moll, t.alpha)?;
        let s = t.weight * xi.powf(-t.alpha);
        value += s * h.value;
        error += s * h.error;
    }
    Ok(Estimate::new(value, error))
}

/// `ρ_f(ξ) = ∫ |φ_q(θ)| κ(ψ(θ/ξ)) dθ` with `κ(u) = u - 1 + e^{-u}`.
pub fn rho(spec: &MultistableSpec, moll: &Mollifier, xi: f64) -> Result<Estimate> {
    check_xi(xi)?;
    let psi = exponent_of(spec)?;
    let table = moll.table();
    let inv = 1.0 / xi;
    let body = table.integrate(|t| kappa1(psi.psi(t * inv)), PhiWeight::Abs);
    let theta = table.theta_max();
    let b = psi.exponent_range().map_or(0.0, |r| r.1);
    let big_m = modular_at(&psi, xi);
    // κ(u) ≤ min(u, u²/2) and ψ(θ/ξ) ≤ M(ξ) θ^b beyond the table.
    let tail = (big_m * moll.abs_moment_tail_bound(b, theta))
        .min(0.5 * big_m * big_m * moll.abs_moment_tail_bound(2.0 * b, theta));
    Ok(Estimate::new(2.0 * body.value, 2.0 * (body.error + tail)))
}

/// `½ ∫ |φ_q(θ)| ψ(θ/ξ)² dθ`, the bound on `ρ_f(ξ)` that follows from
/// `κ(u) ≤ u²/2`. Returned as a guaranteed upper value: the table error
/// and the tail bound are added.
pub fn rho_quadratic_bound(spec: &MultistableSpec, moll: &Mollifier, xi: f64) -> Result<f64> {
    check_xi(xi)?;
    let psi = exponent_of(spec)?;
    let table = moll.table();
    let inv = 1.0 / xi;
    let body = table.integrate(
        |t| {
            let p = psi.psi(t * inv);
            0.5 * p * p
        },
        PhiWeight::Abs,
    );
    let b = psi.exponent_range().map_or(0.0, |r| r.1);
    let big_m = modular_at(&psi, xi);
    let tail = 0.5 * big_m * big_m * moll.abs_moment_tail_bound(2.0 * b, table.theta_max());
    Ok(2.0 * (body.value + body.error + tail))
}

/// `∫ (1 + |θ|)^γ |φ_q(θ)| dθ` truncated at (about) `cut`.
/// Returns the estimate and the effective truncation point.
pub fn abs_moment(moll: &Mollifier, gamma: f64, cut: f64) -> (Estimate, f64) {
    let (e, reached) = moll
        .table()
        .integrate_to(|t| (1.0 + t).powf(gamma), PhiWeight::Abs, cut);
    (Estimate::new(2.0 * e.value, 2.0 * e.error), reached)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptote::tail_constant;
    use crate::function_space::{ExponentFunction, StepFunction};
    use crate::quadrature::{adaptive, Tolerance};
    use approx::assert_abs_diff_eq;

    fn cauchy() -> MultistableSpec {
        MultistableSpec::new(
            StepFunction::indicator(0.0, 1.0, 1.0).unwrap(),
            ExponentFunction::constant(1.0).unwrap(),
        )
    }

    fn constant(alpha: f64, c: f64) -> MultistableSpec {
        MultistableSpec::new(
            StepFunction::indicator(0.0, 1.0, c).unwrap(),
            ExponentFunction::constant(alpha).unwrap(),
        )
    }

    /// `h_q(γ) = γ C(γ) ∫_1^∞ (1 - φ̂_q(x)) x^{-1-γ} dx`, from the Lévy
    /// measure representation of `|θ|^γ`.
    fn h_q_oracle(moll: &Mollifier, gamma: f64) -> f64 {
        let m = moll.support_radius();
        let inner = adaptive(
            |x: f64| (1.0 - moll.bump(x)) * x.powf(-1.0 - gamma),
            &[1.0, m],
            Tolerance::new(1e-15, 1e-13),
            1000,
        )
        .unwrap()
        .value;
        gamma * tail_constant(gamma).unwrap() * (inner + m.powf(-gamma) / gamma)
    }

    #[test]
    fn h_q_matches_levy_representation() {
        for q in [1.1, 1.25, 1.5, 2.0] {
            let moll = build_mollifier(q, DEFAULT_TABLE_RESOLUTION).unwrap();
            for gamma in [0.3, 0.8, 1.0, 1.5, 1.9] {
                let h = h_q(&moll, gamma).unwrap();
                let o = h_q_oracle(&moll, gamma);
                assert!(
                    (h.value - o).abs() < 1e-9 * o,
                    "q = {q}, γ = {gamma}: {} vs {o}",
                    h.value
                );
                assert!(h.error < 1e-9 * o);
            }
        }
    }

    #[test]
    fn h_q_examples() {
        let moll = build_mollifier(1.5, DEFAULT_TABLE_RESOLUTION).unwrap();
        let h = h_q(&moll, 1.0).unwrap().value;
        assert!(h / 1.5 <= tail_constant(1.0).unwrap());
        assert_abs_diff_eq!(h_q(&moll, 0.0).unwrap().value, 1.0, epsilon = 1e-12);
        for i in 1..20 {
            assert!(h_q(&moll, 0.1 * i as f64).unwrap().value > 0.0);
        }
        let widths: Vec<f64> = [2.0, 1.5, 1.25, 1.1]
            .iter()
            .map(|&q| {
                let m = build_mollifier(q, DEFAULT_TABLE_RESOLUTION).unwrap();
                let g = 1.2f64;
                (q.powf(g) - q.powf(-g)) * h_q(&m, g).unwrap().value
            })
            .collect();
        assert!(widths.windows(2).all(|w| w[1] < w[0]), "{widths:?}");
        assert!(h_q(&moll, 2.0).is_err());
    }

    #[test]
    fn j0_examples() {
        assert_eq!(j0(1.5, 1.5).unwrap(), 1);
        assert_eq!(j0(10.0, 2.0).unwrap(), 3);
        assert_eq!(j0(3.375, 1.5).unwrap(), 3);
        assert_eq!(j0(1e3, 1.25).unwrap(), 30);
        assert!(j0(1.2, 1.5).is_err());
        for (l, q) in [
            (7.0, 1.1),
            (1e6, 1.01),
            (2.0f64.powi(20), 2.0),
            (1.25f64.powi(17), 1.25),
        ] {
            let j = j0(l, q).unwrap() as i32;
            assert!(q.powi(j) <= l && l < q.powi(j + 1));
        }
    }

    #[test]
    fn kappa_series_and_inequality() {
        for u in [0.0, 1e-9, 1e-4, 9.99e-3, 1e-2, 0.5, 1.0, 100.0] {
            let k = kappa1(u);
            assert!(k >= 0.0 && k <= 0.5 * u * u);
        }
        let u = 9.99e-3f64;
        let direct = u + (-u).exp_m1();
        assert!((kappa1(u) - direct).abs() < 1e-12 * kappa1(u));
        assert_abs_diff_eq!(kappa1(1.0), (-1.0f64).exp(), epsilon = 1e-16);
    }

    #[test]
    fn eta_tau_rho_relations() {
        let moll = build_mollifier(1.5, DEFAULT_TABLE_RESOLUTION).unwrap();
        for spec in [cauchy(), constant(0.6, 2.0), constant(1.8, 0.7)] {
            for xi in [1.0, 10.0, 1e3] {
                let e = eta(&spec, &moll, xi).unwrap();
                let t = tau(&spec, &moll, xi).unwrap();
                let r = rho(&spec, &moll, xi).unwrap();
                assert!(r.value >= 0.0);
                let slack = e.error + t.error + r.error;
                assert!(t.value - r.value <= e.value + slack);
                assert!(e.value <= t.value + r.value + slack);
                assert!(r.value <= rho_quadratic_bound(&spec, &moll, xi).unwrap());
            }
        }
        // ξ → ∞
        assert!(eta(&cauchy(), &moll, 1e12).unwrap().value < 1e-11);
    }

    #[test]
    fn tau_constant_exponent_closed_form() {
        let moll = build_mollifier(1.25, DEFAULT_TABLE_RESOLUTION).unwrap();
        let spec = constant(0.6, 2.0);
        let xi = 10.0f64;
        let expected = xi.powf(-0.6) * h_q(&moll, 0.6).unwrap().value * 2.0f64.powf(0.6);
        assert_abs_diff_eq!(tau(&spec, &moll, xi).unwrap().value, expected, epsilon = 1e-15);
        let grid: Vec<f64> = (0..20)
            .map(|k| tau(&spec, &moll, 1.5f64.powi(k)).unwrap().value)
            .collect();
        assert!(grid.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn cauchy_eta_against_expectation() {
        // η(ξ) = E[1 - φ̂_q(I/ξ)] = 2∫_0^∞ (1 - φ̂_q(x/ξ)) dx / (π(1+x²)) for the Cauchy law.
        let moll = build_mollifier(1.5, DEFAULT_TABLE_RESOLUTION).unwrap();
        for xi in [1.0, 7.0, 50.0] {
            let m = moll.support_radius();
            let inner = adaptive(
                |x: f64| (1.0 - moll.bump(x / xi)) / (std::f64::consts::PI * (1.0 + x * x)),
                &[xi, m * xi],
                Tolerance::new(1e-16, 1e-13),
                1000,
            )
            .unwrap()
            .value;
            let expected = 2.0 * inner + 2.0 / std::f64::consts::PI * (1.0 / (m * xi)).atan();
            let e = eta(&cauchy(), &moll, xi).unwrap();
            assert!(
                (e.value - expected).abs() < 1e-11,
                "ξ = {xi}: {} vs {expected}",
                e.value
            );
        }
    }

    #[test]
    fn moments_stabilise() {
        let moll = build_mollifier(1.5, DEFAULT_TABLE_RESOLUTION).unwrap();
        let top = moll.table().theta_max();
        for gamma in [0.0, 2.0, 3.9] {
            let vals: Vec<f64> = [top / 8.0, top / 4.0, top / 2.0, top]
                .iter()
                .map(|&c| abs_moment(&moll, gamma, c).0.value)
                .collect();
            let incs: Vec<f64> = vals.windows(2).map(|w| w[1] - w[0]).collect();
            assert!(incs.iter().all(|&d| d >= 0.0));
            assert!(incs[2] <= incs[0], "γ = {gamma}: {vals:?}");
            assert!(incs[2] < 1e-3 * vals[3]);
        }
    }
}
