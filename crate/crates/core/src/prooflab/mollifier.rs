//! The C⁵ bump `φ̂_q` and its inverse Fourier transform `φ_q`.
//!
//! `φ̂_q(x) = 1` for `|x| ≤ 1`, `1 - S₅((|x|-1)/w)` on the transition, and
//! `0` for `|x| ≥ m`, with `m = (1+q)/2`, `w = m - 1` and the smoothstep
//! `S₅(t) = 462t⁶ - 1980t⁷ + 3465t⁸ - 3080t⁹ + 1386t¹⁰ - 252t¹¹`.
//!
//! `φ_q(θ) = (1/π) ∫_0^m cos(θx) φ̂_q(x) dx`. Integrating by parts until the
//! polynomial is exhausted gives an exact finite sum for `θ ≠ 0`:
//!
//! ```text
//! φ_q(θ) = (1/π) Σ_{k=6}^{11} [P⁽ᵏ⁾(m) sin(θm + kπ/2) - P⁽ᵏ⁾(1) sin(θ + kπ/2)] / θ^{k+1}
//! ```
//!
//! where `P = 1 - S₅((x-1)/w)`. The sum cancels badly for small `θw`. For
//! `6 ≤ θw < 30` six integrations by parts leave
//! `φ_q(θ) = (πθ⁶w⁵)⁻¹ ∫_0^1 cos(θ + θwt) S₅⁽⁶⁾(t) dt`, integrated by
//! Gauss–Legendre; below that, `sin θ/(πθ)` plus the transition integral.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, Estimate};

use super::table::PhiTable;

/// Coefficients of `S₅` in the monomial basis, degree 0 to 11.
const S5: [f64; 12] = [
    0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 462.0, -1980.0, 3465.0, -3080.0, 1386.0, -252.0,
];

/// Above this value of `θw` the closed form is used.
const CLOSED_FORM_SWITCH: f64 = 30.0;

/// Above this value of `θw` the sixth-derivative integral is used.
const DERIVATIVE_FORM_SWITCH: f64 = 6.0;

const GL_NODES: usize = 16;

/// Default number of table panels per period `2π/m`.
pub const DEFAULT_TABLE_RESOLUTION: usize = 8;

/// `S₅(t)` for `t ∈ [0, 1]`.
pub fn smoothstep5(t: f64) -> f64 {
    smoothstep5_derivative(0, t)
}

/// `k`-th derivative of the smoothstep polynomial.
pub fn smoothstep5_derivative(k: usize, t: f64) -> f64 {
    let mut acc = 0.0;
    for j in (k..S5.len()).rev() {
        let falling: f64 = ((j - k + 1)..=j).map(|i| i as f64).product();
        acc = acc * t + S5[j] * falling;
    }
    acc
}

/// `φ̂_q`, `φ_q` and a table of `φ_q` for integrals against it.
#[derive(Debug, Clone)]
pub struct Mollifier {
    q: f64,
    m: f64,
    w: f64,
    /// `P⁽ᵏ⁾(1)` and `P⁽ᵏ⁾(m)` for `k = 6..=11`.
    left: [f64; 6],
    right: [f64; 6],
    total_variation: f64,
    gl_nodes: Vec<f64>,
    gl_weights: Vec<f64>,
    table: PhiTable,
}

/// Builds `φ_q` and tabulates it with `table_resolution` panels per period.
pub fn build_mollifier(q: f64, table_resolution: usize) -> Result<Mollifier> {
    Mollifier::new(q, table_resolution)
}

impl Mollifier {
    pub fn new(q: f64, table_resolution: usize) -> Result<Self> {
        if !(q > 1.0) || !q.is_finite() {
            return Err(Error::domain(format!("mollifier needs q > 1, got {q}")));
        }
        if table_resolution == 0 {
            return Err(Error::domain("table resolution must be positive"));
        }
        let m = 0.5 * (1.0 + q);
        let w = m - 1.0;
        let mut left = [0.0; 6];
        let mut right = [0.0; 6];
        for (i, k) in (6..=11).enumerate() {
            let scale = w.powi(k as i32);
            left[i] = -smoothstep5_derivative(k, 0.0) / scale;
            right[i] = -smoothstep5_derivative(k, 1.0) / scale;
        }
        let (gl_nodes, gl_weights) = gauss_legendre(GL_NODES);
        let mut moll = Self {
            q,
            m,
            w,
            left,
            right,
            total_variation: sixth_derivative_variation() / w.powi(6),
            gl_nodes,
            gl_weights,
            table: PhiTable::empty(),
        };
        moll.check_bump()?;
        moll.table = PhiTable::build(&moll, table_resolution);
        Ok(moll)
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// `m = (1+q)/2`, the edge of the support of `φ̂_q`.
    pub fn support_radius(&self) -> f64 {
        self.m
    }

    pub fn table(&self) -> &PhiTable {
        &self.table
    }

    /// `φ̂_q(x)`.
    pub fn bump(&self, x: f64) -> f64 {
        let x = x.abs();
        if x <= 1.0 {
            1.0
        } else if x >= self.m {
            0.0
        } else {
            1.0 - smoothstep5(((x - 1.0) / self.w).min(1.0))
        }
    }

    /// `k`-th derivative of `φ̂_q` at `x ≥ 0`.
    pub fn bump_derivative(&self, k: usize, x: f64) -> f64 {
        if k == 0 {
            return self.bump(x);
        }
        if x <= 1.0 || x >= self.m {
            return 0.0;
        }
        -smoothstep5_derivative(k, (x - 1.0) / self.w) / self.w.powi(k as i32)
    }

    /// `φ_q(θ)`.
    pub fn phi(&self, theta: f64) -> f64 {
        let t = theta.abs();
        if t == 0.0 {
            return (1.0 + 0.5 * self.w) / PI;
        }
        let tw = t * self.w;
        if tw >= CLOSED_FORM_SWITCH {
            self.phi_closed_form(t)
        } else if tw >= DERIVATIVE_FORM_SWITCH {
            self.phi_sixth_derivative(t)
        } else {
            self.phi_quadrature(t)
        }
    }

    /// Exact finite sum; loses accuracy for small `θw`.
    pub fn phi_closed_form(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        let inv = 1.0 / t;
        let mut pow = inv.powi(7);
        for (i, k) in (6..=11).enumerate() {
            let shift = k as f64 * FRAC_PI_2;
            acc += (self.right[i] * (t * self.m + shift).sin() - self.left[i] * (t + shift).sin()) * pow;
            pow *= inv;
        }
        acc / PI
    }

    fn phi_sixth_derivative(&self, t: f64) -> f64 {
        let tw = t * self.w;
        let panels = 1 + (tw / PI).ceil() as usize;
        let h = 1.0 / panels as f64;
        let mut acc = 0.0;
        for p in 0..panels {
            let center = (p as f64 + 0.5) * h;
            for (x, wt) in self.gl_nodes.iter().zip(&self.gl_weights) {
                let s = center + 0.5 * h * x;
                acc += wt * (t + tw * s).cos() * smoothstep5_derivative(6, s);
            }
        }
        0.5 * h * acc / (PI * t.powi(6) * self.w.powi(5))
    }

    fn phi_quadrature(&self, t: f64) -> f64 {
        let panels = 1 + (t * self.w / PI).ceil() as usize;
        let h = self.w / panels as f64;
        let mut acc = 0.0;
        for p in 0..panels {
            let center = 1.0 + (p as f64 + 0.5) * h;
            for (x, wt) in self.gl_nodes.iter().zip(&self.gl_weights) {
                let xx = center + 0.5 * h * x;
                acc += wt * (t * xx).cos() * (1.0 - smoothstep5((xx - 1.0) / self.w));
            }
        }
        (t.sin() / t + 0.5 * h * acc) / PI
    }

    /// Rigorous bound `|φ_q(θ)| ≤ min(φ_q(0), V/(πθ⁷))` where `V` is the
    /// total variation of the sixth derivative of `φ̂_q` on `[0, ∞)`.
    pub fn phi_envelope(&self, theta: f64) -> f64 {
        let t = theta.abs();
        let at_zero = self.phi(0.0);
        if t == 0.0 {
            at_zero
        } else {
            at_zero.min(self.total_variation / (PI * t.powi(7)))
        }
    }

    /// `V`, the constant of the `θ⁻⁷` envelope.
    pub fn envelope_constant(&self) -> f64 {
        self.total_variation
    }

    /// Bound on `∫_Θ^∞ θ^s |φ_q(θ)| dθ` for `s < 6` and `Θ > 0`.
    pub fn abs_moment_tail_bound(&self, s: f64, theta: f64) -> f64 {
        debug_assert!(s < 6.0);
        self.total_variation / (PI * (6.0 - s) * theta.powf(6.0 - s))
    }

    /// `∫_Θ^∞ θ^γ φ_q(θ) dθ` from the closed form, for `Θw ≥ 30`.
    ///
    /// Each term is `∫_Θ^∞ θ^β sin(ωθ + c) dθ`, evaluated by the
    /// asymptotic expansion of the incomplete integral; with `ωΘ` in the
    /// hundreds it converges to rounding in a few terms.
    pub fn signed_moment_tail(&self, gamma: f64, theta: f64) -> Estimate {
        debug_assert!(theta * self.w >= CLOSED_FORM_SWITCH);
        let mut value = 0.0;
        let mut error = 0.0;
        for (i, k) in (6..=11).enumerate() {
            let beta = gamma - k as f64 - 1.0;
            let phase = Complex64::from_polar(1.0, k as f64 * FRAC_PI_2);
            let (er, e_err) = incomplete_oscillatory(beta, self.m, theta);
            let (el, l_err) = incomplete_oscillatory(beta, 1.0, theta);
            value += self.right[i] * (phase * er).im - self.left[i] * (phase * el).im;
            error += self.right[i].abs() * e_err + self.left[i].abs() * l_err;
        }
        Estimate::new(value / PI, error / PI + 1e-15 * value.abs())
    }

    fn check_bump(&self) -> Result<()> {
        let tol = 1e-9;
        let ok = (smoothstep5(0.5) - 0.5).abs() < 1e-15
            && self.bump(1.0) == 1.0
            && self.bump(self.m) == 0.0
            && (1..=5)
                .all(|k| smoothstep5_derivative(k, 0.0).abs() < tol && smoothstep5_derivative(k, 1.0).abs() < tol)
            && (smoothstep5(1.0) - 1.0).abs() < 1e-12;
        if ok {
            Ok(())
        } else {
            Err(Error::domain("transition polynomial is not C5 at its endpoints"))
        }
    }
}

/// `∫_Θ^∞ θ^β e^{iωθ} dθ` for `β < 0`, with the size of the last term used.
fn incomplete_oscillatory(beta: f64, omega: f64, theta: f64) -> (Complex64, f64) {
    let a = Complex64::from_polar(theta.powf(beta), omega * theta);
    let iw = Complex64::new(0.0, omega);
    let step = Complex64::new(0.0, omega * theta);
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut last = 1.0;
    for n in 1..200 {
        let next = term * (-(beta - n as f64 + 1.0)) / step;
        if next.norm() >= last {
            break;
        }
        term = next;
        sum += term;
        last = term.norm();
        if last < 1e-18 * sum.norm() {
            break;
        }
    }
    let prefactor = -a / iw;
    (prefactor * sum, prefactor.norm() * last)
}

/// Total variation of `S₅⁽⁶⁾` over `[0, 1]` plus its jumps at both ends.
fn sixth_derivative_variation() -> f64 {
    // Split [0, 1] at the sign changes of S₅⁽⁷⁾, then sum |ΔS₅⁽⁶⁾|.
    let d7 = |t: f64| smoothstep5_derivative(7, t);
    let mut points = vec![0.0];
    let n = 4096;
    for i in 0..n {
        let (mut a, mut b) = (i as f64 / n as f64, (i + 1) as f64 / n as f64);
        if d7(a) * d7(b) < 0.0 {
            for _ in 0..80 {
                let mid = 0.5 * (a + b);
                if d7(a) * d7(mid) <= 0.0 {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            points.push(0.5 * (a + b));
        }
    }
    points.push(1.0);
    let interior: f64 = points
        .windows(2)
        .map(|w| (smoothstep5_derivative(6, w[1]) - smoothstep5_derivative(6, w[0])).abs())
        .sum();
    let jumps = smoothstep5_derivative(6, 0.0).abs() + smoothstep5_derivative(6, 1.0).abs();
    (interior + jumps) * (1.0 + 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{adaptive, Tolerance};
    use approx::assert_abs_diff_eq;

    fn moll(q: f64) -> Mollifier {
        build_mollifier(q, DEFAULT_TABLE_RESOLUTION).unwrap()
    }

    #[test]
    fn smoothstep_properties() {
        assert_abs_diff_eq!(smoothstep5(0.5), 0.5, epsilon = 1e-15);
        assert_eq!(smoothstep5(0.0), 0.0);
        assert_abs_diff_eq!(smoothstep5(1.0), 1.0, epsilon = 1e-12);
        for k in 1..=5 {
            assert_abs_diff_eq!(smoothstep5_derivative(k, 0.0), 0.0);
            assert_abs_diff_eq!(smoothstep5_derivative(k, 1.0), 0.0, epsilon = 1e-8);
        }
        assert!(smoothstep5_derivative(6, 0.0).abs() > 1.0);
        for i in 1..100 {
            let t = i as f64 / 100.0;
            assert!(smoothstep5_derivative(1, t) > 0.0);
            assert_abs_diff_eq!(smoothstep5(t) + smoothstep5(1.0 - t), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn bump_boundary_values() {
        let m = moll(1.5);
        assert_eq!(m.bump(1.0), 1.0);
        assert_eq!(m.bump(-0.3), 1.0);
        assert_eq!(m.bump(1.25), 0.0);
        assert_eq!(m.bump(7.0), 0.0);
        assert_abs_diff_eq!(m.bump(1.125), 0.5, epsilon = 1e-15);
        assert!(build_mollifier(1.0, 8).is_err());
        assert!(build_mollifier(0.5, 8).is_err());
    }

    #[test]
    fn phi_matches_direct_quadrature() {
        for q in [1.1, 1.5, 2.0] {
            let m = moll(q);
            let r = m.support_radius();
            for theta in [0.0, 0.3, 2.0, 17.0, 100.0] {
                let direct = adaptive(
                    |x: f64| (theta * x).cos() * m.bump(x),
                    &[0.0, 1.0, r],
                    Tolerance::new(1e-14, 1e-13),
                    10_000,
                )
                .unwrap()
                .value
                    / PI;
                assert_abs_diff_eq!(m.phi(theta), direct, epsilon = 1e-13);
                assert_eq!(m.phi(theta), m.phi(-theta));
            }
        }
    }

    #[test]
    fn forms_agree_at_switches() {
        for q in [1.1, 1.25, 2.0] {
            let m = moll(q);
            let t = CLOSED_FORM_SWITCH / m.w;
            for s in [0.999, 1.0, 1.001] {
                let a = m.phi_closed_form(t * s);
                let b = m.phi_sixth_derivative(t * s);
                assert!((a - b).abs() <= 1e-14 * m.phi(0.0), "q = {q}: {a} vs {b}");
            }
            let t = DERIVATIVE_FORM_SWITCH / m.w;
            for s in [0.999, 1.0, 1.001] {
                let a = m.phi_quadrature(t * s);
                let b = m.phi_sixth_derivative(t * s);
                assert!((a - b).abs() <= 1e-14 * m.phi(0.0), "q = {q}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn phi_high_precision_values() {
        // Reference values from 40-digit quadrature, q = 1.1.
        let m = moll(1.1);
        for (theta, v) in [
            (3.0, 7.058_951_551_391_011_022e-3),
            (37.0, 1.864_312_243_825_906_147e-3),
            (100.0, 2.297_862_450_166_639_582e-3),
            (300.0, -2.677_558_402_190_999_610e-5),
            (550.0, -6.009_714_786_333_670_343e-7),
            (700.0, -1.399_773_737_964_082_088e-7),
            (2000.0, -1.054_875_412_502_331_768e-10),
        ] {
            assert!(
                (m.phi(theta) - v).abs() <= 1e-13 * v.abs(),
                "θ = {theta}: {} vs {v}",
                m.phi(theta)
            );
        }
    }

    #[test]
    fn envelope_dominates() {
        for q in [1.1, 1.5, 2.0] {
            let m = moll(q);
            for i in 1..4000 {
                let theta = 0.37 * i as f64;
                assert!(m.phi(theta).abs() <= m.phi_envelope(theta) * (1.0 + 1e-9) + 1e-300);
            }
        }
    }

    #[test]
    fn incomplete_integral_matches_quadrature() {
        let (v, err) = incomplete_oscillatory(-7.3, 1.2, 60.0);
        let re = adaptive(
            |t: f64| t.powf(-7.3) * (1.2 * t).cos(),
            &(0..=4000).map(|k| 60.0 + k as f64 * 0.5).collect::<Vec<_>>(),
            Tolerance::new(1e-25, 1e-13),
            100_000,
        )
        .unwrap()
        .value;
        assert!(
            (v.re - re).abs() < 1e-12 * v.norm() + 1e-20,
            "{} vs {re} (err {err})",
            v.re
        );
    }
}
