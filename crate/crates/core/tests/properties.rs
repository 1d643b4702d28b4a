use std::sync::OnceLock;

use aclr::benchmark::{perturb_target, preparation_error};
use aclr::chrono::{decode_with_key, encode_secret, hamming_distance, KeyEntry, SecretKey};
use aclr::revival::{build_revival, RevivalConstruction};
use aclr::spectra::{
    chain_momentum_sectors, pooled_unfolded_spacings, ratio_values, reflection_symmetric_momenta, unfold, Histogram,
};
use aclr::testing::{goe_levels, poisson_levels};
use aclr::{rng, ChainSpec, Complex64, EigenSystem, SpinProbe};
use proptest::prelude::*;

struct Setup {
    spec: ChainSpec,
    eig: EigenSystem,
    probe: SpinProbe,
    construction: RevivalConstruction,
}

fn l8() -> &'static Setup {
    static CELL: OnceLock<Setup> = OnceLock::new();
    CELL.get_or_init(|| {
        let spec = ChainSpec::new(8, 1).unwrap();
        let eig = EigenSystem::for_spec(&spec).unwrap();
        let probe = SpinProbe::new(&spec).unwrap();
        let construction = build_revival(&eig, 5.0, &spec).unwrap();
        Setup {
            spec,
            eig,
            probe,
            construction,
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn ratios_lie_in_unit_interval(seed in any::<u64>(), n in 50usize..300, goe in any::<bool>()) {
        let mut r = rng::seeded(seed);
        let levels = if goe { goe_levels(n.min(120), &mut r) } else { poisson_levels(n, &mut r) };
        let stats = ratio_values(&levels).unwrap();
        prop_assert!(stats.r_values.iter().all(|r| (0.0..=1.0).contains(r)));
    }

    #[test]
    fn unfolded_spacings_have_unit_mean(seed in any::<u64>(), n in 60usize..200) {
        let s = unfold(&goe_levels(n, &mut rng::seeded(seed)), 10).unwrap();
        let mean = s.iter().sum::<f64>() / s.len() as f64;
        prop_assert!((mean - 1.0).abs() <= 0.02);
    }

    #[test]
    fn preparation_error_is_phase_blind_and_bounded(seed in any::<u64>(), lambda in 0.0f64..4.0, phase in -7.0f64..7.0) {
        let s = l8();
        let exp = perturb_target(&s.construction, lambda, &mut rng::seeded(seed)).unwrap();
        let e = preparation_error(&s.construction.state, &exp).unwrap();
        prop_assert!((0.0..=1.0).contains(&e));
        let rotated = exp.scaled(Complex64::from_polar(1.0, phase));
        let ideal_rotated = s.construction.state.scaled(Complex64::from_polar(1.0, -phase));
        prop_assert!((preparation_error(&s.construction.state, &rotated).unwrap() - e).abs() < 1e-12);
        prop_assert!((preparation_error(&ideal_rotated, &exp).unwrap() - e).abs() < 1e-12);
        let v = s.probe.sz(&s.eig.evolve(&exp, 5.0).unwrap(), 1).unwrap();
        prop_assert!((-1.0..=1.0).contains(&v));
    }
}

#[test]
fn chaotic_spacings_show_level_repulsion() {
    let spec = ChainSpec::new(12, 1).unwrap();
    let sectors = chain_momentum_sectors(&spec).unwrap();
    let s = pooled_unfolded_spacings(&sectors, &reflection_symmetric_momenta(12), 10).unwrap();
    let chaotic = Histogram::new(&s, 50, 5.0).fraction_between(0.5, 1.5, s.len());
    let reference = poisson_levels(20_000, &mut rng::seeded(1));
    let p: Vec<f64> = reference.windows(2).map(|w| w[1] - w[0]).collect();
    let poisson = Histogram::new(&p, 50, 5.0).fraction_between(0.5, 1.5, p.len());
    assert!(chaotic > poisson, "{chaotic} vs {poisson}");
}

#[test]
fn wrong_times_erase_the_ones() {
    let s = l8();
    let (mut trials, mut hidden) = (0, 0);
    for seed in 0..10u64 {
        let mut r = rng::substream(seed, 2, 0);
        let key = SecretKey::random(s.spec.clone(), 8, 4.0, 8.0, &mut r).unwrap();
        let bits: Vec<bool> = (0..8).map(|i| (seed + i) % 3 != 0).collect();
        let ones = bits.iter().filter(|b| **b).count();
        let book = encode_secret(&bits, &key, &s.eig, seed).unwrap();
        for dt in [-1.5, -1.0, 1.0, 1.5] {
            let decoded = decode_with_key(&book, &key.shifted(dt).unwrap(), &s.eig, seed).unwrap();
            trials += 1;
            hidden += usize::from(hamming_distance(&bits, &decoded.bits) >= ones);
        }
    }
    assert!(hidden as f64 / trials as f64 >= 0.95, "{hidden}/{trials}");
}

#[test]
fn estimates_converge_to_the_expectation() {
    let s = l8();
    let key = SecretKey::with_options(
        s.spec.clone(),
        vec![KeyEntry { site: 1, t_star: 5.0 }, KeyEntry { site: 4, t_star: 6.5 }],
        10_000,
        0.5,
    )
    .unwrap();
    let bits = [true, false];
    let book = encode_secret(&bits, &key, &s.eig, 3).unwrap();
    let decoded = decode_with_key(&book, &key, &s.eig, 11).unwrap();
    for (i, entry) in key.entries().iter().enumerate() {
        let exact = s
            .probe
            .sz(&s.eig.evolve(&book.device_states[i], entry.t_star).unwrap(), entry.site)
            .unwrap();
        let dev = (decoded.per_bit_estimate[i] - exact).abs();
        assert!(dev <= 3.0 * decoded.per_bit_stderr[i], "device {i}: {dev}");
    }
}
