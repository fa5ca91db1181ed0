use num_complex::Complex64;
use proptest::prelude::*;
use statlength_core::axioms::{device_independence_on, scaling_residual_on};
use statlength_core::basis::mixing_strength;
use statlength_core::clicks::{estimate_frequencies, simulate_clicks, two_instrument_run};
use statlength_core::sampling::{self, unit_vector};
use statlength_core::uniqueness::{
    certify_exact, preservation_residual_vectors, preserver_search, GaussianRational, SearchConfig,
};
use statlength_core::{born_frequencies, random_unitary, Amplitude, BasisChange, Representation, SymmetricFunctional};

fn gaussian_int() -> impl Strategy<Value = GaussianRational> {
    (-6i64..=6, -6i64..=6).prop_map(|(re, im)| GaussianRational::from_integers(re, im))
}

fn amplitude() -> impl Strategy<Value = Amplitude> {
    (-10.0f64..10.0, -10.0f64..10.0).prop_map(|(re, im)| Amplitude::new(re, im))
}

/// Entry-wise evaluation of the cross-term closed form in floating point.
fn float_closed_form(p: u32, e: &[GaussianRational; 4]) -> f64 {
    use num_traits::ToPrimitive;
    let n = |z: &GaussianRational| z.norm_sqr().to_f64().unwrap();
    let p = p as i32;
    (p * p) as f64 * (n(&e[0]).powi(p - 1) * n(&e[1]) + n(&e[2]).powi(p - 1) * n(&e[3]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cross_term_routes_agree(entries in prop::array::uniform4(gaussian_int()), p in 2u32..=4) {
        let cert = certify_exact(p, &entries).unwrap();
        prop_assert!(cert.agree);
        prop_assert!(num_traits::Zero::is_zero(&cert.brute_force_imag));
        let zero_pattern = (&entries[0] * &entries[1]).is_zero() && (&entries[2] * &entries[3]).is_zero();
        prop_assert_eq!(cert.vanishes(), zero_pattern);
        let f = float_closed_form(p, &entries);
        prop_assert!((cert.value() - f).abs() <= 1e-12 * f.max(1.0));
    }

    #[test]
    fn born_is_device_independent(seed in any::<u64>(), dim in 2usize..=8) {
        let u = random_unitary(dim, seed).unwrap();
        let mut rng = sampling::stream(seed, 1);
        let vectors: Vec<Vec<Amplitude>> =
            (0..8).map(|_| unit_vector(&mut rng, dim).into_iter().map(Amplitude::from).collect()).collect();
        let r = device_independence_on(&SymmetricFunctional::born(), &u, &vectors, 1e-9, seed).unwrap();
        prop_assert!(r.max_residual <= 1e-12);
    }

    #[test]
    fn quartic_is_not_device_independent(seed in any::<u64>()) {
        // Random unitaries mix both rows almost surely.
        let u = random_unitary(2, seed).unwrap();
        prop_assume!(mixing_strength(u.matrix()) > 0.05);
        let vectors = vec![vec![Amplitude::ONE, Amplitude::ZERO]];
        let r = device_independence_on(&SymmetricFunctional::modulus_power(2), &u, &vectors, 1e-9, seed).unwrap();
        prop_assert!(r.max_residual > 1e-3);
    }

    #[test]
    fn pure_functionals_scale(c in amplitude(), p in 1u32..=4, samples in prop::collection::vec(amplitude(), 2..20)) {
        prop_assume!(c.norm_sqr() > 1e-6);
        let f = SymmetricFunctional::modulus_power(p);
        let r = scaling_residual_on(&f, c, &samples, 1e-9, 0).unwrap();
        prop_assert!(r.max_residual <= 1e-12);
    }

    #[test]
    fn born_frequencies_sum_to_one(amps in prop::collection::vec(amplitude(), 1..16)) {
        prop_assume!(amps.iter().any(|a| a.norm_sqr() > 0.0));
        let rep = Representation::from_amplitudes("A", &amps).unwrap();
        let nu = born_frequencies(&rep).unwrap();
        prop_assert!((nu.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(nu.iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn click_counts_sum_to_n(amps in prop::collection::vec(amplitude(), 1..6), n in 1u64..5000, seed in any::<u64>()) {
        prop_assume!(amps.iter().any(|a| a.norm_sqr() > 0.0));
        let rep = Representation::from_amplitudes("A", &amps).unwrap();
        let e = simulate_clicks(&rep, n, seed).unwrap();
        prop_assert_eq!(e.count_values().iter().sum::<u64>(), n);
        // Zero-amplitude outcomes never click.
        for (a, c) in amps.iter().zip(e.count_values()) {
            if a.norm_sqr() == 0.0 {
                prop_assert_eq!(c, 0);
            }
        }
    }

    #[test]
    fn unitary_instrument_changes_preserve_length(amps in prop::collection::vec(amplitude(), 2..6), seed in any::<u64>()) {
        prop_assume!(amps.iter().any(|a| a.norm_sqr() > 0.0));
        let rep = Representation::from_amplitudes("A", &amps).unwrap();
        let u = random_unitary(amps.len(), seed).unwrap();
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        let run = two_instrument_run(&rep, &u, 10, seed).unwrap();
        prop_assert!(run.length_gap <= 1e-14 * norm.max(1.0));
    }
}

#[test]
fn hadamard_change_equalizes_frequencies() {
    let rep = Representation::from_amplitudes("A", &[Amplitude::ONE, Amplitude::ZERO]).unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let u = BasisChange::from_real_rows(&[&[h, h], &[h, -h]]).unwrap();
    let run = two_instrument_run(&rep, &u, 1_000_000, 17).unwrap();
    assert!(run.length_gap <= 1e-12);
    let nu = estimate_frequencies(&run.b);
    assert!((nu[0] - 0.5).abs() < 0.005 && (nu[1] - 0.5).abs() < 0.005);
    assert_eq!(estimate_frequencies(&run.a), vec![1.0, 0.0]);
}

#[test]
fn near_unitary_perturbations_fail_preservation_or_stay_unitary() {
    let mut rng = sampling::stream(31, 0);
    for k in 0..100u64 {
        let dim = 2 + (k % 3) as usize;
        let u = random_unitary(dim, k).unwrap();
        let eps = 10f64.powf(-13.0 + 8.0 * (k as f64) / 99.0);
        let bump: Vec<Vec<Complex64>> = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| u.entry(i, j) + sampling::complex_gaussian(&mut rng) * eps)
                    .collect()
            })
            .collect();
        let v = BasisChange::from_rows(&bump).unwrap();
        let vectors: Vec<Vec<Complex64>> = (0..2 * dim * dim).map(|_| unit_vector(&mut rng, dim)).collect();
        if preservation_residual_vectors(1, &v, &vectors).unwrap() <= 1e-10 {
            assert!(v.unitarity_defect() <= 1e-6, "k = {k}");
        }
    }
}

#[test]
fn search_outputs_in_dimension_three() {
    let cfg = SearchConfig {
        restarts: 32,
        ..SearchConfig::default()
    };
    let p1 = preserver_search(1, 3, &cfg).unwrap();
    assert!(p1.admissible(), "{}", p1.best_residual);
    assert!(p1.best_matrix.unitarity_defect() <= 1e-6);
    let p2 = preserver_search(2, 3, &cfg).unwrap();
    assert!(!p2.admissible());
    assert!(p2.best_residual >= 1e-3);
}
