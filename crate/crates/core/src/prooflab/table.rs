//! Tabulated `φ_q` on fixed Gauss–Kronrod panels over `[0, Θ_max]`.
//!
//! Panel edges include every sign change of `φ_q`, so `|φ_q|` is smooth on
//! each panel, plus a geometric grading towards 0 for integrands with
//! algebraic behaviour at the origin. `Θ_max` is chosen so that the
//! `θ⁻⁷` envelope leaves less than `TAIL_MASS` of `∫|φ_q|` beyond it.

use crate::quadrature::{Estimate, WG, WGK, XGK};

use super::mollifier::Mollifier;

/// Bound on `∫_{Θ_max}^∞ |φ_q|`.
pub const TAIL_MASS: f64 = 1e-15;

const GRADING_LEVELS: i32 = 50;
const MIN_THETA_MAX: f64 = 64.0;

/// Whether the table integrates against `φ_q` or `|φ_q|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhiWeight {
    Signed,
    Abs,
}

#[derive(Debug, Clone)]
pub struct PhiTable {
    edges: Vec<f64>,
    /// Per panel: nodes ordered as `XGK[0]` left/right, …, `XGK[6]`
    /// left/right, centre.
    nodes: Vec<[f64; 15]>,
    phi: Vec<[f64; 15]>,
    theta_max: f64,
}

impl PhiTable {
    pub(crate) fn empty() -> Self {
        Self {
            edges: Vec::new(),
            nodes: Vec::new(),
            phi: Vec::new(),
            theta_max: 0.0,
        }
    }

    pub(crate) fn build(moll: &Mollifier, resolution: usize) -> Self {
        let m = moll.support_radius();
        let w = m - 1.0;
        let v = moll.envelope_constant();
        let theta_max = (v / (6.0 * std::f64::consts::PI * TAIL_MASS))
            .powf(1.0 / 6.0)
            .max(MIN_THETA_MAX)
            .max(31.0 / w);
        let h = 2.0 * std::f64::consts::PI / m / resolution as f64;
        let count = (theta_max / h).ceil() as usize;
        let theta_max = count as f64 * h;

        let mut edges: Vec<f64> = (1..GRADING_LEVELS).rev().map(|k| h * 0.5f64.powi(k)).collect();
        edges.insert(0, 0.0);
        let sub = 4;
        let n = count * sub;
        let xs: Vec<f64> = (0..=n).map(|i| i as f64 * h / sub as f64).collect();
        let fs: Vec<f64> = xs.iter().map(|&t| moll.phi(t)).collect();
        let phi = |t: f64| moll.phi(t);
        for i in 0..n {
            if i % sub == 0 {
                edges.push(xs[i]);
            }
            if let Some(z) = bisect_zero(phi, xs[i], xs[i + 1]) {
                edges.push(z);
            }
            // A same-signed local minimum of |φ_q| may hide a close pair of zeros.
            if i > 0
                && fs[i - 1] * fs[i] > 0.0
                && fs[i] * fs[i + 1] > 0.0
                && fs[i].abs() <= fs[i - 1].abs().min(fs[i + 1].abs())
            {
                let sign = fs[i].signum();
                let x = golden_min(|t| sign * moll.phi(t), xs[i - 1], xs[i + 1]);
                if sign * moll.phi(x) < 0.0 {
                    edges.extend(bisect_zero(phi, xs[i - 1], x));
                    edges.extend(bisect_zero(phi, x, xs[i + 1]));
                }
            }
        }
        edges.push(theta_max);
        edges.sort_by(f64::total_cmp);
        edges.dedup_by(|b, a| *b - *a <= 1e-13 * a.abs().max(1e-300));

        let mut nodes = Vec::with_capacity(edges.len() - 1);
        let mut phi = Vec::with_capacity(edges.len() - 1);
        for e in edges.windows(2) {
            let x = panel_nodes(e[0], e[1]);
            let mut p = [0.0; 15];
            for (pi, xi) in p.iter_mut().zip(&x) {
                *pi = moll.phi(*xi);
            }
            nodes.push(x);
            phi.push(p);
        }
        Self {
            edges,
            nodes,
            phi,
            theta_max,
        }
    }

    pub fn theta_max(&self) -> f64 {
        self.theta_max
    }

    pub fn panel_count(&self) -> usize {
        self.nodes.len()
    }

    /// Panel edges, starting at 0 and ending at `Θ_max`.
    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    /// `∫_0^{Θ_max} g(θ) φ_q(θ) dθ` (or against `|φ_q|`), with the sum of
    /// per-panel Kronrod–Gauss differences as error.
    pub fn integrate(&self, g: impl Fn(f64) -> f64, weight: PhiWeight) -> Estimate {
        self.integrate_to(g, weight, self.theta_max).0
    }

    /// As [`PhiTable::integrate`], over the panels ending at or before
    /// `cut`. Returns the estimate and the effective cut.
    pub fn integrate_to(&self, g: impl Fn(f64) -> f64, weight: PhiWeight, cut: f64) -> (Estimate, f64) {
        let mut value = 0.0;
        let mut error = 0.0;
        let mut reached = 0.0;
        for (i, (x, p)) in self.nodes.iter().zip(&self.phi).enumerate() {
            let (a, b) = (self.edges[i], self.edges[i + 1]);
            if b > cut {
                break;
            }
            let half = 0.5 * (b - a);
            let mut k = 0.0;
            let mut gs = 0.0;
            let mut mag = 0.0;
            for j in 0..15 {
                let ph = match weight {
                    PhiWeight::Signed => p[j],
                    PhiWeight::Abs => p[j].abs(),
                };
                let f = g(x[j]) * ph;
                let wk = if j == 14 { WGK[7] } else { WGK[j / 2] };
                k += wk * f;
                mag += wk * f.abs();
                if j == 14 {
                    gs += WG[3] * f;
                } else if (j / 2) % 2 == 1 {
                    gs += WG[j / 4] * f;
                }
            }
            value += half * k;
            error += half * ((k - gs).abs() + 50.0 * f64::EPSILON * mag);
            reached = b;
        }
        (Estimate::new(value, error), reached)
    }
}

fn panel_nodes(a: f64, b: f64) -> [f64; 15] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut x = [c; 15];
    for j in 0..7 {
        x[2 * j] = c - h * XGK[j];
        x[2 * j + 1] = c + h * XGK[j];
    }
    x
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        c
    } else {
        d
    }
}

fn bisect_zero(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> Option<f64> {
    let (mut fa, fb) = (f(a), f(b));
    if fa == 0.0 || fa * fb > 0.0 {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if fa * fm < 0.0 {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
    }
    Some(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::super::mollifier::build_mollifier;
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn table_reproduces_simple_integrals() {
        let m = build_mollifier(1.5, 8).unwrap();
        let t = m.table();
        assert!(t.theta_max() * (m.support_radius() - 1.0) >= 30.0);
        // 2∫_0^∞ φ_q = φ̂_q(0) = 1, with the tail beyond Θ_max negligible.
        let total = t.integrate(|_| 1.0, PhiWeight::Signed);
        assert_abs_diff_eq!(2.0 * total.value, 1.0, epsilon = 1e-12);
        // 2∫_0^∞ cos(xθ) φ_q(θ) dθ = φ̂_q(x).
        for x in [0.5, 1.1, 1.2, 2.0] {
            let v = t.integrate(|th| (x * th).cos(), PhiWeight::Signed);
            assert_abs_diff_eq!(2.0 * v.value, m.bump(x), epsilon = 1e-11);
        }
    }

    #[test]
    fn edges_include_sign_changes() {
        let m = build_mollifier(2.0, 8).unwrap();
        let t = m.table();
        for (i, e) in t.edges().windows(2).enumerate().take(5000) {
            let (a, b) = (e[0], e[1]);
            let inner = &t.phi[i];
            let pos = inner.iter().any(|&v| v > 1e-300);
            let neg = inner.iter().any(|&v| v < -1e-300);
            assert!(!(pos && neg), "panel [{a}, {b}] straddles a zero");
        }
    }
}
