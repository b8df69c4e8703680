//! Density and tail probabilities of `I(f)` from its characteristic function.
//!
//! The default route ([`OscillationPolicy::RotatedContour`]) moves the
//! Fourier integrals off the real axis. `Φ(z) = exp(-Σ Wⱼ z^{αⱼ})` is
//! analytic in the sector `|arg z| < π/(2b)`, so along the ray
//! `z = t·e^{iφ}` with `φ = min(π/(4b), π/2)` the kernel `e^{iλz}` decays like
//! `e^{-λ t sin φ}`:
//!
//! ```text
//! P(|I| > λ) = (2/π) Im ∫_0^∞ e^{iλz} (1 - Φ(z)) dz / z
//! D(x)       = (1/π) Re ∫_0^∞ e^{i|x|z} Φ(z) dz
//! ```
//!
//! Both integrands are free of cancellation, which gives relative accuracy
//! deep in the tail where the real-axis form `1 - (2/π)∫ sin(λθ)Φ(θ)/θ dθ`
//! loses everything to rounding. The real-axis forms remain available via
//! the other policies and serve as an independent cross-check.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::charfn::CharExponent;
use crate::error::{Error, Result};
use crate::function_space::MultistableSpec;
use crate::quadrature::{
    adaptive, graded_points, oscillatory_integral, Envelope, Estimate, Kernel, OscillationPolicy, QuadratureConfig,
    Tolerance,
};

/// Levels of geometric refinement towards the origin of the contour.
const GRADING_LEVELS: u32 = 48;

/// Fourier inversion for one spec.
#[derive(Debug, Clone)]
pub struct Inverter {
    psi: CharExponent,
    lower: f64,
    upper: f64,
    angle: f64,
}

impl Inverter {
    pub fn new(spec: &MultistableSpec) -> Result<Self> {
        Self::from_exponent(CharExponent::new(spec))
    }

    pub fn from_exponent(psi: CharExponent) -> Result<Self> {
        let Some((lower, upper)) = psi.exponent_range() else {
            return Err(Error::domain("I(0) is a point mass at 0 and has no density"));
        };
        let angle = (PI / (4.0 * upper)).min(FRAC_PI_2);
        Ok(Self {
            psi,
            lower,
            upper,
            angle,
        })
    }

    pub fn exponent(&self) -> &CharExponent {
        &self.psi
    }

    /// `P(|I(f)| > λ)` with its error bound, clipped to `[0, 1]`.
    pub fn tail(&self, lambda: f64, cfg: &QuadratureConfig) -> Result<Estimate> {
        cfg.validate()?;
        if !(lambda >= 0.0) {
            return Err(Error::domain(format!(
                "tail threshold must be nonnegative, got {lambda}"
            )));
        }
        if lambda == 0.0 {
            return Ok(Estimate::new(1.0, 0.0));
        }
        if lambda.is_infinite() {
            return Ok(Estimate::new(0.0, 0.0));
        }
        let est = match cfg.oscillation {
            OscillationPolicy::RotatedContour => self.tail_contour(lambda, cfg)?,
            _ => self.tail_real_axis(lambda, cfg)?,
        };
        Ok(Estimate::new(est.value.clamp(0.0, 1.0), est.error))
    }

    /// Density at `x`. Values within `abs_tol` below zero are set to 0;
    /// see [`Inverter::density_raw`] for the unclamped estimate.
    pub fn density(&self, x: f64, cfg: &QuadratureConfig) -> Result<Estimate> {
        let est = self.density_raw(x, cfg)?;
        clamp_density(est, cfg.abs_tol)
    }

    /// Density at `x` before clamping.
    pub fn density_raw(&self, x: f64, cfg: &QuadratureConfig) -> Result<Estimate> {
        cfg.validate()?;
        if !x.is_finite() {
            return Err(Error::domain(format!("density argument must be finite, got {x}")));
        }
        match cfg.oscillation {
            OscillationPolicy::RotatedContour => self.density_contour(x.abs(), cfg),
            _ => self.density_real_axis(x.abs(), cfg),
        }
    }

    /// `P(I(f) ≤ x)`.
    pub fn cdf(&self, x: f64, cfg: &QuadratureConfig) -> Result<Estimate> {
        if x.is_nan() {
            return Err(Error::domain("cdf argument is NaN"));
        }
        let t = self.tail(x.abs(), cfg)?;
        let upper = 0.5 * t.value;
        let value = if x >= 0.0 { 1.0 - upper } else { upper };
        Ok(Estimate::new(value, 0.5 * t.error))
    }

    /// `P(lo < I(f) ≤ hi)`, built from tail values so that
    /// `interval(-λ, λ) = 1 - tail(λ)` holds to rounding.
    pub fn interval(&self, lo: f64, hi: f64, cfg: &QuadratureConfig) -> Result<Estimate> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::domain(format!("invalid interval ({lo}, {hi}]")));
        }
        if lo == hi {
            return Ok(Estimate::new(0.0, 0.0));
        }
        let (tl, th) = (self.tail(lo.abs(), cfg)?, self.tail(hi.abs(), cfg)?);
        let error = 0.5 * (tl.error + th.error);
        let value = if lo < 0.0 && hi > 0.0 {
            1.0 - 0.5 * (tl.value + th.value)
        } else if lo >= 0.0 {
            0.5 * (tl.value - th.value)
        } else {
            0.5 * (th.value - tl.value)
        };
        Ok(Estimate::new(value.clamp(0.0, 1.0), error))
    }

    /// Tail probability from integrating the density:
    /// `1 - 2∫_0^λ D(x) dx`. Independent of [`Inverter::tail`] and much
    /// slower; meant as a cross-check.
    pub fn tail_via_density(&self, lambda: f64, cfg: &QuadratureConfig) -> Result<Estimate> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::domain(format!("tail threshold must be positive, got {lambda}")));
        }
        let inner = QuadratureConfig {
            abs_tol: cfg.abs_tol / (8.0 * lambda.max(1.0)),
            ..*cfg
        };
        let mut failure = None;
        let mut inner_err = 0.0f64;
        let est = adaptive(
            |x: f64| match self.density_raw(x, &inner) {
                Ok(e) => {
                    inner_err = inner_err.max(e.error);
                    e.value
                }
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            },
            &[0.0, lambda],
            Tolerance::new(cfg.abs_tol / 4.0, 0.0),
            cfg.max_panels,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        let est = est?;
        Ok(Estimate::new(
            (1.0 - 2.0 * est.value).clamp(0.0, 1.0),
            2.0 * (est.error + inner_err * lambda),
        ))
    }

    fn tail_contour(&self, lambda: f64, cfg: &QuadratureConfig) -> Result<Estimate> {
        // s = λ t along the ray; the kernel becomes e^{i s e^{iφ}}.
        let rot = Complex64::from_polar(1.0, self.angle);
        let sin_phi = self.angle.sin();
        let trunc_target = (1e-3 * cfg.abs_tol).max(f64::MIN_POSITIVE);
        // ∫_S^∞ 2 e^{-s sin φ} ds / s ≤ 2 e^{-S sin φ} / (S sin φ)
        let bound = |s: f64| 2.0 * (-s * sin_phi).exp() / (s * sin_phi);
        let mut cut = 1.0;
        while bound(cut) > trunc_target {
            cut *= 1.25;
        }
        let inv_lambda = 1.0 / lambda;
        let integrand = |s: f64| {
            let z = rot * s;
            let kernel = (Complex64::i() * z).exp();
            (kernel * self.psi.one_minus_cf_complex(z * inv_lambda)).im / s
        };
        let est = adaptive(
            integrand,
            &graded_points(cut, GRADING_LEVELS),
            Tolerance::new(cfg.abs_tol * FRAC_PI_2, cfg.rel_tol),
            cfg.max_panels,
        )
        .map_err(|e| rescale_accuracy(e, 2.0 / PI))?;
        Ok(Estimate::new(2.0 / PI * est.value, 2.0 / PI * (est.error + bound(cut))))
    }

    fn density_contour(&self, x: f64, cfg: &QuadratureConfig) -> Result<Estimate> {
        let kappa = x.max(1.0);
        let omega = x / kappa;
        let rot = Complex64::from_polar(1.0, self.angle);
        let sin_phi = self.angle.sin();
        // |Φ(t e^{iφ})| ≤ exp(-c t^a) for t ≥ 1
        let c: f64 = self
            .psi
            .terms()
            .iter()
            .map(|t| t.weight * (t.alpha * self.angle).cos())
            .sum();
        let env = Envelope {
            scale: 1.0,
            rate: c,
            power: self.lower,
        };
        let bound = |u: f64| {
            let mut b = f64::INFINITY;
            if omega > 0.0 {
                b = (-omega * sin_phi * u).exp() / (omega * sin_phi);
            }
            if u >= kappa {
                b = b.min(kappa * env.tail_bound(u / kappa));
            }
            b / (PI * kappa)
        };
        let trunc_target = (0.05 * cfg.abs_tol).max(f64::MIN_POSITIVE);
        let mut cut = 1.0;
        while bound(cut) > trunc_target {
            cut *= 1.25;
            if !cut.is_finite() {
                return Err(Error::accuracy(
                    trunc_target,
                    f64::INFINITY,
                    "density contour truncation",
                ));
            }
        }
        let inv_kappa = 1.0 / kappa;
        let integrand = |u: f64| {
            let z = rot * u;
            let kernel = (Complex64::i() * omega * z).exp();
            (rot * kernel * self.psi.cf_complex(z * inv_kappa)).re
        };
        let scale = 1.0 / (PI * kappa);
        let est = adaptive(
            integrand,
            &graded_points(cut, GRADING_LEVELS),
            Tolerance::new(cfg.abs_tol / scale * 0.5, cfg.rel_tol),
            cfg.max_panels,
        )
        .map_err(|e| rescale_accuracy(e, scale))?;
        Ok(Estimate::new(scale * est.value, scale * est.error + bound(cut)))
    }

    fn real_axis_envelope(&self) -> Envelope {
        Envelope {
            scale: 1.0,
            rate: self.psi.total_weight(),
            power: self.lower,
        }
    }

    fn tail_real_axis(&self, lambda: f64, cfg: &QuadratureConfig) -> Result<Estimate> {
        let psi = &self.psi;
        let inner = QuadratureConfig {
            abs_tol: cfg.abs_tol * FRAC_PI_2,
            ..*cfg
        };
        let est = oscillatory_integral(
            |t| psi.cf(t) / t,
            Kernel::Sin,
            lambda,
            &inner,
            Some(self.real_axis_envelope()),
        )?;
        Ok(Estimate::new(1.0 - 2.0 / PI * est.value, 2.0 / PI * est.error))
    }

    fn density_real_axis(&self, x: f64, cfg: &QuadratureConfig) -> Result<Estimate> {
        let psi = &self.psi;
        let inner = QuadratureConfig {
            abs_tol: cfg.abs_tol * PI,
            ..*cfg
        };
        let est = oscillatory_integral(|t| psi.cf(t), Kernel::Cos, x, &inner, Some(self.real_axis_envelope()))?;
        Ok(Estimate::new(est.value / PI, est.error / PI))
    }

    /// Upper exponent used to choose the contour angle.
    pub fn upper_exponent(&self) -> f64 {
        self.upper
    }

    /// Angle of the rotated contour.
    pub fn contour_angle(&self) -> f64 {
        self.angle
    }
}

fn rescale_accuracy(e: Error, factor: f64) -> Error {
    match e {
        Error::Accuracy {
            target,
            achieved,
            context,
        } => Error::Accuracy {
            target: target * factor,
            achieved: achieved * factor,
            context,
        },
        other => other,
    }
}

fn clamp_density(est: Estimate, abs_tol: f64) -> Result<Estimate> {
    if est.value >= 0.0 {
        Ok(est)
    } else if est.value >= -abs_tol {
        Ok(Estimate::new(0.0, est.error))
    } else {
        Err(Error::accuracy(
            abs_tol,
            -est.value,
            "density estimate is negative beyond tolerance",
        ))
    }
}

/// Density of `I(f)` at `x`.
pub fn density(spec: &MultistableSpec, x: f64, cfg: &QuadratureConfig) -> Result<Estimate> {
    Inverter::new(spec)?.density(x, cfg)
}

/// `P(|I(f)| > λ)`.
pub fn tail_probability(spec: &MultistableSpec, lambda: f64, cfg: &QuadratureConfig) -> Result<Estimate> {
    Inverter::new(spec)?.tail(lambda, cfg)
}

/// `P(lo < I(f) ≤ hi)`.
pub fn interval_probability(spec: &MultistableSpec, lo: f64, hi: f64, cfg: &QuadratureConfig) -> Result<Estimate> {
    Inverter::new(spec)?.interval(lo, hi, cfg)
}

/// `P(I(f) ≤ x)`.
pub fn cdf(spec: &MultistableSpec, x: f64, cfg: &QuadratureConfig) -> Result<Estimate> {
    Inverter::new(spec)?.cdf(x, cfg)
}

/// `1 - 2∫_0^λ D`, the density-integration route to the tail.
pub fn tail_via_density(spec: &MultistableSpec, lambda: f64, cfg: &QuadratureConfig) -> Result<Estimate> {
    Inverter::new(spec)?.tail_via_density(lambda, cfg)
}

/// Densities on a grid, evaluated in parallel.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub xs: Vec<f64>,
    pub values: Vec<Estimate>,
    /// Evaluations that came out slightly negative and were set to 0.
    pub clamped: usize,
}

/// Largest fraction of clamped values a grid may contain.
pub const MAX_CLAMPED_FRACTION: f64 = 0.01;

pub fn density_grid(spec: &MultistableSpec, xs: &[f64], cfg: &QuadratureConfig) -> Result<DensityGrid> {
    let inv = Inverter::new(spec)?;
    let raw: Vec<Estimate> = xs.par_iter().map(|&x| inv.density_raw(x, cfg)).collect::<Result<_>>()?;
    let clamped = raw.iter().filter(|e| e.value < 0.0).count();
    let values = raw
        .into_iter()
        .map(|e| clamp_density(e, cfg.abs_tol))
        .collect::<Result<Vec<_>>>()?;
    if !xs.is_empty() && clamped as f64 > MAX_CLAMPED_FRACTION * xs.len() as f64 {
        return Err(Error::accuracy(
            MAX_CLAMPED_FRACTION,
            clamped as f64 / xs.len() as f64,
            "too many negative density values were clamped",
        ));
    }
    Ok(DensityGrid {
        xs: xs.to_vec(),
        values,
        clamped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function_space::{ExponentFunction, StepFunction};
    use approx::assert_abs_diff_eq;

    fn cauchy() -> MultistableSpec {
        MultistableSpec::new(
            StepFunction::indicator(0.0, 1.0, 1.0).unwrap(),
            ExponentFunction::constant(1.0).unwrap(),
        )
    }

    fn constant(alpha: f64) -> MultistableSpec {
        MultistableSpec::new(
            StepFunction::indicator(0.0, 1.0, 1.0).unwrap(),
            ExponentFunction::constant(alpha).unwrap(),
        )
    }

    fn two_exponent() -> MultistableSpec {
        MultistableSpec::new(
            StepFunction::new(vec![0.0, 1.0, 2.0], vec![1.0, 1.0]).unwrap(),
            ExponentFunction::new(vec![1.0], vec![0.8, 1.5]).unwrap(),
        )
    }

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn policies() -> [OscillationPolicy; 3] {
        [
            OscillationPolicy::RotatedContour,
            OscillationPolicy::ZeroSplitAccelerated,
            OscillationPolicy::AdaptivePanels,
        ]
    }

    #[test]
    fn cauchy_density_examples() {
        for policy in policies() {
            let c = cfg().with_policy(policy);
            for x in [0.0, 1.0, 5.0, -2.5] {
                let d = density(&cauchy(), x, &c).unwrap();
                assert_abs_diff_eq!(d.value, 1.0 / (PI * (1.0 + x * x)), epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn cauchy_tail_examples() {
        for policy in policies() {
            let c = cfg().with_policy(policy);
            for lambda in [1.0, 100.0] {
                let t = tail_probability(&cauchy(), lambda, &c).unwrap();
                assert_abs_diff_eq!(t.value, 2.0 / PI * (1.0 / lambda).atan(), epsilon = 1e-9);
            }
        }
        let t = tail_probability(&cauchy(), 100.0, &cfg()).unwrap();
        assert_abs_diff_eq!(t.value, 6.3660e-3, epsilon = 1e-7);
    }

    #[test]
    fn tail_relative_accuracy_deep_in_tail() {
        let c = QuadratureConfig {
            abs_tol: 1e-30,
            rel_tol: 1e-13,
            ..cfg()
        };
        for lambda in [1e3, 1e5, 1e8] {
            let t = tail_probability(&cauchy(), lambda, &c).unwrap();
            let exact = 2.0 / PI * (1.0 / lambda).atan();
            assert!(
                ((t.value - exact) / exact).abs() < 1e-12,
                "λ = {lambda}: {} vs {exact}",
                t.value
            );
        }
    }

    #[test]
    fn small_threshold_tends_to_one() {
        let s = two_exponent();
        let t = tail_probability(&s, 1e-9, &cfg()).unwrap();
        assert!(t.value > 1.0 - 1e-6);
        assert_eq!(tail_probability(&s, 0.0, &cfg()).unwrap().value, 1.0);
    }

    #[test]
    fn interval_examples() {
        let s = cauchy();
        let c = cfg();
        assert_abs_diff_eq!(
            interval_probability(&s, f64::NEG_INFINITY, f64::INFINITY, &c)
                .unwrap()
                .value,
            1.0
        );
        assert_abs_diff_eq!(
            interval_probability(&s, -1.0, 1.0, &c).unwrap().value,
            0.5,
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(
            interval_probability(&s, 0.0, f64::INFINITY, &c).unwrap().value,
            0.5,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            interval_probability(&s, 1.0, 3.0, &c).unwrap().value,
            ((3.0f64).atan() - (1.0f64).atan()) / PI,
            epsilon = 1e-9
        );
        assert!(interval_probability(&s, 2.0, 1.0, &c).is_err());
    }

    #[test]
    fn interval_matches_tail() {
        let s = two_exponent();
        let c = cfg();
        for lambda in [0.3, 2.0, 40.0] {
            let i = interval_probability(&s, -lambda, lambda, &c).unwrap();
            let t = tail_probability(&s, lambda, &c).unwrap();
            assert_abs_diff_eq!(i.value, 1.0 - t.value, epsilon = 2.0 * c.abs_tol);
        }
    }

    #[test]
    fn policies_agree_on_multistable_spec() {
        let s = two_exponent();
        for x in [0.0, 0.7, 4.0] {
            let reference = density(&s, x, &cfg()).unwrap().value;
            for policy in policies() {
                let d = density(&s, x, &cfg().with_policy(policy)).unwrap().value;
                assert_abs_diff_eq!(d, reference, epsilon = 1e-9);
            }
        }
        for lambda in [0.5, 3.0, 30.0] {
            let reference = tail_probability(&s, lambda, &cfg()).unwrap().value;
            for policy in policies() {
                let t = tail_probability(&s, lambda, &cfg().with_policy(policy)).unwrap().value;
                assert_abs_diff_eq!(t, reference, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn density_is_even_and_integrates_to_tail() {
        let s = constant(0.6);
        let c = QuadratureConfig { abs_tol: 1e-9, ..cfg() };
        for x in [0.2, 3.0, 20.0] {
            assert_abs_diff_eq!(
                density(&s, x, &c).unwrap().value,
                density(&s, -x, &c).unwrap().value,
                epsilon = 1e-15
            );
        }
        let s = two_exponent();
        for lambda in [1.0, 10.0, 100.0] {
            let direct = tail_probability(&s, lambda, &c).unwrap().value;
            let via = tail_via_density(&s, lambda, &c).unwrap().value;
            assert_abs_diff_eq!(direct, via, epsilon = 2.0 * c.abs_tol);
        }
    }

    #[test]
    fn density_grid_reports_clamps() {
        let g = density_grid(&two_exponent(), &[-1.0, 0.0, 1.0, 50.0], &cfg()).unwrap();
        assert_eq!(g.values.len(), 4);
        assert_eq!(g.clamped, 0);
        assert!(g.values.iter().all(|e| e.value > 0.0));
    }

    #[test]
    fn clamp_rule() {
        assert_eq!(clamp_density(Estimate::new(-1e-12, 1e-12), 1e-10).unwrap().value, 0.0);
        assert!(clamp_density(Estimate::new(-1e-8, 1e-12), 1e-10).is_err());
    }

    #[test]
    fn zero_spec_rejected() {
        let z = MultistableSpec::new(StepFunction::zero(), ExponentFunction::constant(1.0).unwrap());
        assert!(matches!(density(&z, 0.0, &cfg()), Err(Error::Domain(_))));
        assert!(matches!(tail_probability(&z, 1.0, &cfg()), Err(Error::Domain(_))));
    }

    #[test]
    fn tight_budget_is_an_accuracy_error() {
        let c = QuadratureConfig {
            max_panels: 2,
            abs_tol: 1e-14,
            ..cfg()
        };
        assert!(matches!(
            tail_probability(&two_exponent(), 10.0, &c),
            Err(Error::Accuracy { .. })
        ));
    }
}
