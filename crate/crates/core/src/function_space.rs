//! Piecewise-constant data for the variable-exponent space.
//!
//! An [`ExponentFunction`] is a step function `α(x)` covering the whole real
//! line with values in `(0, 2)`. A [`StepFunction`] is a step function `f`
//! with bounded support. Pairing them through [`refine`] gives a
//! [`MultistableSpec`]: the common refinement on which both are constant, so
//! every integral of the form `∫ |f(x)/s|^{α(x)} g(α(x)) dx` is a finite sum.

use crate::error::{Error, Result};

/// Default relative tolerance for [`MultistableSpec::quasinorm`].
pub const DEFAULT_QUASINORM_TOL: f64 = 1e-12;

/// Piecewise-constant exponent `α(x)`.
///
/// `breakpoints` split the line into `breakpoints.len() + 1` cells
/// `(-∞, b₀), [b₀, b₁), …, [b_{n-1}, ∞)`, one value per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentFunction {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    lower: f64,
    upper: f64,
}

impl ExponentFunction {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != breakpoints.len() + 1 {
            return Err(Error::domain(format!(
                "exponent function needs breakpoints.len() + 1 values, got {} breakpoints and {} values",
                breakpoints.len(),
                values.len()
            )));
        }
        check_increasing(&breakpoints, "exponent breakpoints")?;
        for (i, &v) in values.iter().enumerate() {
            if !(v > 0.0 && v < 2.0) {
                return Err(Error::domain(format!(
                    "exponent value {v} at index {i} is outside (0, 2)"
                )));
            }
        }
        let lower = values.iter().copied().fold(f64::INFINITY, f64::min);
        let upper = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            breakpoints,
            values,
            lower,
            upper,
        })
    }

    pub fn constant(alpha: f64) -> Result<Self> {
        Self::new(Vec::new(), vec![alpha])
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `a = min α`.
    pub fn lower_bound(&self) -> f64 {
        self.lower
    }

    /// `b = max α`.
    pub fn upper_bound(&self) -> f64 {
        self.upper
    }

    pub fn eval(&self, x: f64) -> f64 {
        let idx = self.breakpoints.partition_point(|&b| b <= x);
        self.values[idx]
    }
}

/// Step function with bounded support: coefficient `cᵢ` on `[bᵢ, bᵢ₊₁)`,
/// zero elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    breakpoints: Vec<f64>,
    coefficients: Vec<f64>,
}

impl StepFunction {
    pub fn new(breakpoints: Vec<f64>, coefficients: Vec<f64>) -> Result<Self> {
        if breakpoints.is_empty() && coefficients.is_empty() {
            return Ok(Self::zero());
        }
        if breakpoints.len() != coefficients.len() + 1 {
            return Err(Error::domain(format!(
                "step function needs coefficients.len() + 1 breakpoints, got {} breakpoints and {} coefficients",
                breakpoints.len(),
                coefficients.len()
            )));
        }
        check_increasing(&breakpoints, "step function breakpoints")?;
        if let Some((i, c)) = coefficients.iter().enumerate().find(|(_, c)| !c.is_finite()) {
            return Err(Error::domain(format!("coefficient {c} at index {i} is not finite")));
        }
        Ok(Self {
            breakpoints,
            coefficients,
        })
    }

    pub fn zero() -> Self {
        Self {
            breakpoints: Vec::new(),
            coefficients: Vec::new(),
        }
    }

    /// `height · 1_{[lo, hi)}`.
    pub fn indicator(lo: f64, hi: f64, height: f64) -> Result<Self> {
        Self::new(vec![lo, hi], vec![height])
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn support(&self) -> Option<(f64, f64)> {
        match (self.breakpoints.first(), self.breakpoints.last()) {
            (Some(&lo), Some(&hi)) => Some((lo, hi)),
            _ => None,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let Some((lo, hi)) = self.support() else {
            return 0.0;
        };
        if x < lo || x >= hi {
            return 0.0;
        }
        let idx = self.breakpoints.partition_point(|&b| b <= x);
        self.coefficients[idx - 1]
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            breakpoints: self.breakpoints.clone(),
            coefficients: self.coefficients.iter().map(|c| c * factor).collect(),
        }
    }
}

/// One cell of the common refinement: `f ≡ coefficient` and
/// `α ≡ exponent` on `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub lo: f64,
    pub hi: f64,
    pub coefficient: f64,
    pub exponent: f64,
}

impl Cell {
    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    /// `|c|^α · |cell|`, the cell's contribution to the modular at scale 1.
    pub fn weight(&self) -> f64 {
        if self.coefficient == 0.0 {
            0.0
        } else {
            self.coefficient.abs().powf(self.exponent) * self.length()
        }
    }
}

/// All cells sharing one exponent value, merged: `Σ |cᵢ|^α |cellᵢ|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentTerm {
    pub alpha: f64,
    pub weight: f64,
}

/// A pair `(f, α)` on its common refinement.
#[derive(Debug, Clone, PartialEq)]
pub struct MultistableSpec {
    f: StepFunction,
    alpha: ExponentFunction,
    cells: Vec<Cell>,
}

/// Intersects the partitions of `f` and `α` inside the support of `f`.
pub fn refine(f: &StepFunction, alpha: &ExponentFunction) -> MultistableSpec {
    let cells = match f.support() {
        None => Vec::new(),
        Some((lo, hi)) => {
            let mut points: Vec<f64> = f
                .breakpoints()
                .iter()
                .chain(alpha.breakpoints().iter().filter(|&&b| b > lo && b < hi))
                .copied()
                .collect();
            points.sort_by(f64::total_cmp);
            points.dedup();
            points
                .windows(2)
                .map(|w| {
                    let mid = 0.5 * (w[0] + w[1]);
                    Cell {
                        lo: w[0],
                        hi: w[1],
                        coefficient: f.eval(mid),
                        exponent: alpha.eval(mid),
                    }
                })
                .collect()
        }
    };
    MultistableSpec {
        f: f.clone(),
        alpha: alpha.clone(),
        cells,
    }
}

impl MultistableSpec {
    pub fn new(f: StepFunction, alpha: ExponentFunction) -> Self {
        refine(&f, &alpha)
    }

    pub fn f(&self) -> &StepFunction {
        &self.f
    }

    pub fn alpha(&self) -> &ExponentFunction {
        &self.alpha
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    /// `f ≡ 0` almost everywhere.
    pub fn is_zero(&self) -> bool {
        self.cells.iter().all(|c| c.weight() == 0.0)
    }

    /// `(a, b)`, the bounds of the exponent function.
    pub fn exponent_bounds(&self) -> (f64, f64) {
        (self.alpha.lower_bound(), self.alpha.upper_bound())
    }

    /// Cells grouped by exponent value, sorted by increasing exponent.
    /// Zero-weight groups are dropped.
    pub fn exponent_terms(&self) -> Vec<ExponentTerm> {
        let mut terms: Vec<ExponentTerm> = Vec::new();
        for cell in &self.cells {
            let w = cell.weight();
            if w == 0.0 {
                continue;
            }
            match terms.iter_mut().find(|t| t.alpha == cell.exponent) {
                Some(t) => t.weight += w,
                None => terms.push(ExponentTerm {
                    alpha: cell.exponent,
                    weight: w,
                }),
            }
        }
        terms.sort_by(|x, y| x.alpha.total_cmp(&y.alpha));
        terms
    }

    pub fn eval_f(&self, x: f64) -> f64 {
        let idx = self.cells.partition_point(|c| c.hi <= x);
        match self.cells.get(idx) {
            Some(c) if c.lo <= x => c.coefficient,
            _ => 0.0,
        }
    }

    pub fn eval_alpha(&self, x: f64) -> f64 {
        self.alpha.eval(x)
    }

    /// The spec of `δ·f` with the same exponent.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            f: self.f.scaled(factor),
            alpha: self.alpha.clone(),
            cells: self
                .cells
                .iter()
                .map(|c| Cell {
                    coefficient: c.coefficient * factor,
                    ..*c
                })
                .collect(),
        }
    }

    /// `∫ |f(x)/scale|^{α(x)} dx`, summed exactly over the cells.
    pub fn modular_integral(&self, scale: f64) -> Result<f64> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::domain(format!("modular scale must be positive, got {scale}")));
        }
        Ok(self
            .cells
            .iter()
            .filter(|c| c.coefficient != 0.0)
            .map(|c| (c.coefficient / scale).abs().powf(c.exponent) * c.length())
            .sum())
    }

    /// The unique `λ > 0` with `∫ |f/λ|^α = 1`, or 0 for `f ≡ 0`.
    ///
    /// The modular is `Σ Wⱼ λ^{-αⱼ}`, so its logarithm is convex and strictly
    /// decreasing in `ln λ`. The root is bracketed by `M₁^{1/a}` and
    /// `M₁^{1/b}` (with `M₁` the modular at scale 1) and polished by
    /// safeguarded Newton steps in `ln λ`.
    pub fn quasinorm(&self, rel_tol: f64) -> Result<f64> {
        if !(rel_tol > 0.0) || !rel_tol.is_finite() {
            return Err(Error::domain(format!("rel_tol must be positive, got {rel_tol}")));
        }
        let terms = self.exponent_terms();
        if terms.is_empty() {
            return Ok(0.0);
        }
        let a = terms[0].alpha;
        let b = terms[terms.len() - 1].alpha;
        let log_m1 = log_modular(&terms, 0.0);
        let (mut lo, mut hi) = {
            let (x, y) = (log_m1 / a, log_m1 / b);
            (x.min(y), x.max(y))
        };
        let mut s = 0.5 * (lo + hi);
        for _ in 0..200 {
            let g = log_modular(&terms, s);
            if g == 0.0 {
                break;
            }
            if g > 0.0 {
                lo = s;
            } else {
                hi = s;
            }
            let slope = log_modular_slope(&terms, s);
            let mut next = s - g / slope;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let step = (next - s).abs();
            s = next;
            if step <= 4.0 * f64::EPSILON * s.abs().max(1.0) || hi - lo <= 4.0 * f64::EPSILON * s.abs().max(1.0) {
                break;
            }
        }
        let lambda = s.exp();
        let residual = (self.modular_integral(lambda)? - 1.0).abs();
        if residual > rel_tol {
            return Err(Error::accuracy(rel_tol, residual, "quasinorm root search"));
        }
        Ok(lambda)
    }

    /// `f / ‖f‖_α`, a point on the unit sphere.
    pub fn normalize_to_sphere(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::domain("the zero function has no normalization"));
        }
        let norm = self.quasinorm(DEFAULT_QUASINORM_TOL)?;
        Ok(self.scaled(1.0 / norm))
    }
}

/// `ln Σ Wⱼ e^{-αⱼ s}` via log-sum-exp.
fn log_modular(terms: &[ExponentTerm], s: f64) -> f64 {
    let logs: Vec<f64> = terms.iter().map(|t| t.weight.ln() - t.alpha * s).collect();
    let peak = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    peak + logs.iter().map(|l| (l - peak).exp()).sum::<f64>().ln()
}

fn log_modular_slope(terms: &[ExponentTerm], s: f64) -> f64 {
    let logs: Vec<f64> = terms.iter().map(|t| t.weight.ln() - t.alpha * s).collect();
    let peak = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (num, den) = terms.iter().zip(&logs).fold((0.0, 0.0), |(n, d), (t, l)| {
        let e = (l - peak).exp();
        (n + t.alpha * e, d + e)
    });
    -num / den
}

fn check_increasing(points: &[f64], what: &str) -> Result<()> {
    if let Some(bad) = points.iter().find(|p| !p.is_finite()) {
        return Err(Error::domain(format!("{what} must be finite, found {bad}")));
    }
    if let Some(i) = points.windows(2).position(|w| w[0] >= w[1]) {
        return Err(Error::domain(format!(
            "{what} must be strictly increasing: {} then {} at index {}",
            points[i],
            points[i + 1],
            i + 1
        )));
    }
    Ok(())
}
