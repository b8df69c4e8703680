//! Exact sampling of `I(f)` as a sum of independent symmetric stable terms.
//!
//! For piecewise-constant data the characteristic function factorises over
//! distinct exponents, so `I(f) = Σ σᵢ Zᵢ` in law with `Zᵢ` standard
//! symmetric `αᵢ`-stable and `σᵢ = (Σ_{cells with αᵢ} |c|^{αᵢ}|cell|)^{1/αᵢ}`.

use std::f64::consts::FRAC_PI_2;

use rand::distributions::{Distribution, Open01};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::function_space::MultistableSpec;

/// Draws per RNG substream.
pub const CHUNK_SIZE: usize = 1 << 16;

/// One symmetric stable summand `σ Z` with `Z` standard `α`-stable.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct StableComponent {
    pub alpha: f64,
    pub sigma: f64,
}

impl StableComponent {
    /// `exp(-|σθ|^α)`.
    pub fn cf(&self, theta: f64) -> f64 {
        (-(self.sigma * theta).abs().powf(self.alpha)).exp()
    }
}

/// Groups the refined cells by exponent. The product of the component
/// characteristic functions equals `cf(spec, θ)`.
pub fn mixture_decompose(spec: &MultistableSpec) -> Vec<StableComponent> {
    spec.exponent_terms()
        .into_iter()
        .map(|t| StableComponent {
            alpha: t.alpha,
            sigma: t.weight.powf(1.0 / t.alpha),
        })
        .collect()
}

/// One standard symmetric `α`-stable draw (characteristic function
/// `exp(-|θ|^α)`) by the Chambers–Mallows–Stuck transform.
pub fn sample_standard_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(draw(alpha, rng))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 2.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("stable index must lie in (0, 2), got {alpha}")))
    }
}

fn draw<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let v: f64 = Open01.sample(rng);
    let u = FRAC_PI_2 * (2.0 * v - 1.0);
    if alpha == 1.0 {
        return u.tan();
    }
    let e = -(-rng.gen::<f64>()).ln_1p();
    (alpha * u).sin() / u.cos().powf(1.0 / alpha) * (((1.0 - alpha) * u).cos() / e).powf((1.0 - alpha) / alpha)
}

/// `n` independent draws of `I(f)`. Chunk `k` of [`CHUNK_SIZE`] draws uses
/// stream `k` of a ChaCha8 generator seeded with `seed`, so the output does
/// not depend on the thread count.
pub fn sample(spec: &MultistableSpec, n: usize, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::domain("sample size must be at least 1"));
    }
    let components = mixture_decompose(spec);
    for c in &components {
        check_alpha(c.alpha)?;
    }
    let mut out = vec![0.0; n];
    out.par_chunks_mut(CHUNK_SIZE).enumerate().for_each(|(k, chunk)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        for x in chunk.iter_mut() {
            *x = components.iter().map(|c| c.sigma * draw(c.alpha, &mut rng)).sum();
        }
    });
    Ok(out)
}

/// A Monte Carlo proportion with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
}

impl McEstimate {
    fn from_count(hits: usize, n: usize) -> Self {
        let p = hits as f64 / n as f64;
        Self {
            estimate: p,
            std_error: (p * (1.0 - p) / n as f64).sqrt(),
        }
    }
}

/// Fraction of draws with `|x| > λ`.
pub fn mc_tail(draws: &[f64], lambda: f64) -> Result<McEstimate> {
    if draws.is_empty() {
        return Err(Error::domain("no draws"));
    }
    if !(lambda >= 0.0) {
        return Err(Error::domain(format!(
            "tail threshold must be nonnegative, got {lambda}"
        )));
    }
    let hits = draws.par_iter().filter(|x| x.abs() > lambda).count();
    Ok(McEstimate::from_count(hits, draws.len()))
}

/// Histogram density on `bins` equal bins of `[lo, hi]`. Each entry is the
/// bin centre and the density estimate with its standard error.
pub fn mc_histogram(draws: &[f64], lo: f64, hi: f64, bins: usize) -> Result<Vec<(f64, McEstimate)>> {
    if draws.is_empty() || bins == 0 || !(lo < hi) {
        return Err(Error::domain("histogram needs draws, bins > 0 and lo < hi"));
    }
    let width = (hi - lo) / bins as f64;
    let counts = draws
        .par_iter()
        .fold(
            || vec![0usize; bins],
            |mut acc, &x| {
                if x >= lo && x < hi {
                    acc[(((x - lo) / width) as usize).min(bins - 1)] += 1;
                }
                acc
            },
        )
        .reduce(
            || vec![0usize; bins],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            let p = McEstimate::from_count(c, draws.len());
            let centre = lo + (i as f64 + 0.5) * width;
            (
                centre,
                McEstimate {
                    estimate: p.estimate / width,
                    std_error: p.std_error / width,
                },
            )
        })
        .collect())
}
