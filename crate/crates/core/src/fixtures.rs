//! Named specs used by the tests, the acceptance run and the CLI.
//!
//! [`unit_sphere_family`] is the finite family over which uniform statements
//! ("for all f with ‖f‖ = 1") are checked.

use rand::Rng;

use crate::function_space::{ExponentFunction, MultistableSpec, StepFunction};

/// `f = 1_{[0,1]}`, `α ≡ 1`: `I(f)` is standard Cauchy.
pub fn cauchy() -> MultistableSpec {
    constant(1.0)
}

/// `f = 1_{[0,1]}` with constant exponent; already on the unit sphere.
///
/// # Panics
/// If `alpha` is outside `(0, 2)`.
pub fn constant(alpha: f64) -> MultistableSpec {
    MultistableSpec::new(
        StepFunction::indicator(0.0, 1.0, 1.0).expect("valid indicator"),
        ExponentFunction::constant(alpha).expect("exponent in (0, 2)"),
    )
}

/// `f ∝ 1_{[0,2]}` with `α = 0.8` on `[0,1)` and `1.5` on `[1,2)`,
/// normalised to the unit sphere.
pub fn two_exponent() -> MultistableSpec {
    MultistableSpec::new(
        StepFunction::indicator(0.0, 2.0, 1.0).expect("valid indicator"),
        ExponentFunction::new(vec![1.0], vec![0.8, 1.5]).expect("valid exponent"),
    )
    .normalize_to_sphere()
    .expect("nonzero")
}

/// `f = 1_{[0,2]}` with `α = 0.5` on `[0,1)` and `1.5` on `[1,2)`; not
/// normalised. Its quasinorm solves `λ^{-1/2} + λ^{-3/2} = 1`.
pub fn mixed_quasinorm() -> MultistableSpec {
    MultistableSpec::new(
        StepFunction::indicator(0.0, 2.0, 1.0).expect("valid indicator"),
        ExponentFunction::new(vec![1.0], vec![0.5, 1.5]).expect("valid exponent"),
    )
}

/// Three cells with signed coefficients `2, -1, 0.5` and exponents
/// `0.7, 1.2, 1.9`, normalised.
pub fn three_cell() -> MultistableSpec {
    MultistableSpec::new(
        StepFunction::new(vec![-1.0, 0.0, 0.5, 2.0], vec![2.0, -1.0, 0.5]).expect("valid step function"),
        ExponentFunction::new(vec![0.0, 0.5], vec![0.7, 1.2, 1.9]).expect("valid exponent"),
    )
    .normalize_to_sphere()
    .expect("nonzero")
}

/// Unit-sphere specs with their names.
pub fn unit_sphere_family() -> Vec<(&'static str, MultistableSpec)> {
    vec![
        ("cauchy", cauchy()),
        ("constant_0.6", constant(0.6)),
        ("constant_1.4", constant(1.4)),
        ("constant_1.8", constant(1.8)),
        ("two_exponent", two_exponent()),
        ("mixed", mixed_quasinorm().normalize_to_sphere().expect("nonzero")),
        ("three_cell", three_cell()),
    ]
}

/// Looks up a fixture of [`unit_sphere_family`] (or `mixed_quasinorm`,
/// unnormalised) by name.
pub fn by_name(name: &str) -> Option<MultistableSpec> {
    if name == "mixed_quasinorm" {
        return Some(mixed_quasinorm());
    }
    unit_sphere_family()
        .into_iter()
        .find(|(n, _)| *n == name)
        .map(|(_, s)| s)
}

/// A random nonzero spec: 1–5 cells of `f` on `[-5, 5]` with coefficients in
/// `[-3, 3]`, and 0–4 exponent breakpoints with values in `[0.1, 1.95]`.
pub fn random_spec<R: Rng + ?Sized>(rng: &mut R) -> MultistableSpec {
    loop {
        let cells = rng.gen_range(1..=5);
        let mut bp: Vec<f64> = (0..=cells).map(|_| rng.gen_range(-5.0..5.0)).collect();
        bp.sort_by(f64::total_cmp);
        bp.dedup();
        if bp.len() < 2 || bp.windows(2).any(|w| w[1] - w[0] < 1e-6) {
            continue;
        }
        let coeffs: Vec<f64> = (1..bp.len()).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let n_alpha = rng.gen_range(0..=4);
        let mut abp: Vec<f64> = (0..n_alpha).map(|_| rng.gen_range(-5.0..5.0)).collect();
        abp.sort_by(f64::total_cmp);
        abp.dedup();
        let values: Vec<f64> = (0..=abp.len()).map(|_| rng.gen_range(0.1..1.95)).collect();
        let (Ok(f), Ok(alpha)) = (StepFunction::new(bp, coeffs), ExponentFunction::new(abp, values)) else {
            continue;
        };
        let spec = MultistableSpec::new(f, alpha);
        if !spec.is_zero() {
            return spec;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function_space::DEFAULT_QUASINORM_TOL;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn family_is_on_the_unit_sphere() {
        for (name, spec) in unit_sphere_family() {
            let n = spec.quasinorm(DEFAULT_QUASINORM_TOL).unwrap();
            assert!((n - 1.0).abs() < 1e-11, "{name}: {n}");
            assert!(by_name(name).is_some());
        }
        assert!(by_name("nope").is_none());
    }

    #[test]
    fn mixed_quasinorm_value() {
        let n = mixed_quasinorm().quasinorm(1e-14).unwrap();
        assert!((n.powf(-0.5) + n.powf(-1.5) - 1.0).abs() < 1e-13);
        assert!((n - 2.148).abs() < 1e-3);
    }

    #[test]
    fn random_specs_are_nonzero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let s = random_spec(&mut rng);
            assert!(!s.is_zero());
            let (a, b) = s.exponent_bounds();
            assert!(0.1 <= a && b < 1.95);
        }
    }
}
