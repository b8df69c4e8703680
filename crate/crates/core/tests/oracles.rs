use multistable::asymptote::ratio;
use multistable::charfn::cf;
use multistable::fixtures;
use multistable::inversion::{density, interval_probability, tail_probability, Inverter};
use multistable::quadrature::{OscillationPolicy, QuadratureConfig};
use multistable::sampler::{mc_histogram, mc_tail, sample};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn monte_carlo_tail_within_four_standard_errors() {
    let cfg = QuadratureConfig::default();
    for (name, spec) in [
        ("two_exponent", fixtures::two_exponent()),
        ("three_cell", fixtures::three_cell()),
    ] {
        let draws = sample(&spec, 10_000_000, 2024).unwrap();
        for lambda in [1.0, 10.0, 100.0] {
            let mc = mc_tail(&draws, lambda).unwrap();
            let p = tail_probability(&spec, lambda, &cfg).unwrap();
            assert!(
                (mc.estimate - p.value).abs() <= 4.0 * mc.std_error,
                "{name}, λ = {lambda}: MC {} ± {}, quadrature {}",
                mc.estimate,
                mc.std_error,
                p.value
            );
        }
    }
}

#[test]
fn histogram_matches_bin_probabilities() {
    let cfg = QuadratureConfig::default();
    let spec = fixtures::two_exponent();
    let draws = sample(&spec, 10_000_000, 77).unwrap();
    let hist = mc_histogram(&draws, -5.0, 5.0, 100).unwrap();
    let mut good = 0;
    for (centre, h) in &hist {
        let p = interval_probability(&spec, centre - 0.05, centre + 0.05, &cfg).unwrap();
        let expected = p.value / 0.1;
        if (h.estimate - expected).abs() <= 5.0 * h.std_error {
            good += 1;
        }
        // The bin average lies between the density extremes over the bin.
        let d = density(&spec, *centre, &cfg).unwrap().value;
        assert!((expected - d).abs() < 0.01 * d.max(1e-3), "x = {centre}");
    }
    assert!(good >= 95, "{good} of 100 bins within 5 SE");
}

#[test]
fn empirical_cf_matches_on_random_specs() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..5 {
        let spec = fixtures::random_spec(&mut rng);
        let draws = sample(&spec, 200_000, 3).unwrap();
        let n = draws.len() as f64;
        for theta in [0.05, 0.3, 1.0] {
            let mean = draws.iter().map(|x| (theta * x).cos()).sum::<f64>() / n;
            // |cos| ≤ 1, so the standard error is at most 1/√n.
            assert!((mean - cf(&spec, theta)).abs() <= 5.0 / n.sqrt());
        }
    }
}

#[test]
fn oscillation_policies_agree() {
    let base = QuadratureConfig::default();
    for (name, spec) in fixtures::unit_sphere_family() {
        let inv = Inverter::new(&spec).unwrap();
        for lambda in [0.5, 3.0, 20.0] {
            let reference = inv.tail(lambda, &base).unwrap();
            for policy in [
                OscillationPolicy::ZeroSplitAccelerated,
                OscillationPolicy::AdaptivePanels,
            ] {
                let other = inv.tail(lambda, &base.with_policy(policy)).unwrap();
                assert!(
                    (other.value - reference.value).abs() <= 1e-8,
                    "{name}, λ = {lambda}, {policy:?}: {} vs {}",
                    other.value,
                    reference.value
                );
            }
            let d = inv.density(lambda, &base).unwrap();
            let d2 = inv
                .density(lambda, &base.with_policy(OscillationPolicy::ZeroSplitAccelerated))
                .unwrap();
            assert!((d.value - d2.value).abs() <= 1e-8, "{name}, x = {lambda}");
        }
    }
}

#[test]
fn ratio_tends_to_one_on_the_family() {
    let cfg = QuadratureConfig::default();
    for (name, spec) in fixtures::unit_sphere_family() {
        let gaps: Vec<f64> = [1e3, 1e5, 1e7]
            .iter()
            .map(|&l| (ratio(&spec, l, &cfg).unwrap().ratio - 1.0).abs())
            .collect();
        assert!(gaps[2] < gaps[0] && gaps[2] < 0.05, "{name}: {gaps:?}");
    }
}

#[test]
fn tail_is_monotone_and_consistent_with_density() {
    let cfg = QuadratureConfig::default();
    let spec = fixtures::three_cell();
    let inv = Inverter::new(&spec).unwrap();
    let mut prev = 1.0;
    for lambda in [0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0] {
        let p = inv.tail(lambda, &cfg).unwrap().value;
        assert!(p < prev);
        prev = p;
        let via = inv.tail_via_density(lambda, &cfg).unwrap();
        assert!((via.value - p).abs() <= 1e-8, "λ = {lambda}: {} vs {p}", via.value);
    }
}
