use mems_lab::filtering::{apply_filter, LocalFilter};
use mems_lab::frontier::{linear_envelope, mems_point};
use mems_lab::measures::{
    concurrence, eof_from_tangle, measure_report, negativity, spin_flip, wootters_lambdas,
};
use mems_lab::numerics::{hermitian_eig, CMat4};
use mems_lab::sampling::{ginibre_state, random_local_unitary, EnsembleKind, EnsembleSpec};
use mems_lab::states::{format_matrix_text, mems, parse_matrix_text, werner, DensityMatrix};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn state(seed: u64, rank: usize) -> DensityMatrix {
    ginibre_state(&mut ChaCha8Rng::seed_from_u64(seed), rank).unwrap()
}

fn max_abs_diff(a: &CMat4, b: &CMat4) -> f64 {
    let mut m = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            m = m.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn local_unitaries_preserve_every_measure(seed in any::<u64>(), rank in 1usize..=4) {
        let rho = state(seed, rank);
        let u = random_local_unitary(&mut ChaCha8Rng::seed_from_u64(seed.wrapping_add(1)));
        let moved = rho.conjugate_by(&u).unwrap();
        let a = measure_report(&rho);
        let b = measure_report(&moved);
        for ((name, x), (_, y)) in a.fields().into_iter().zip(b.fields()) {
            prop_assert!((x - y).abs() <= 1e-9, "{name}: {x} vs {y}");
        }
    }

    #[test]
    fn spin_flip_is_an_involution(seed in any::<u64>(), rank in 1usize..=4) {
        let rho = state(seed, rank);
        let flipped = DensityMatrix::new(spin_flip(&rho)).unwrap();
        let back = spin_flip(&flipped);
        prop_assert!(max_abs_diff(&back, rho.matrix()) <= 1e-14);
    }

    #[test]
    fn lambda_squares_sum_to_overlap(seed in any::<u64>(), rank in 1usize..=4) {
        let rho = state(seed, rank);
        let lambdas = wootters_lambdas(&rho).lambdas;
        let sum: f64 = lambdas.iter().map(|l| l * l).sum();
        let overlap = (*rho.matrix() * spin_flip(&rho)).trace().re;
        prop_assert!((sum - overlap).abs() <= 1e-10, "{sum} vs {overlap}");
        prop_assert!(lambdas.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn measures_stay_in_range(seed in any::<u64>(), rank in 1usize..=4) {
        let r = measure_report(&state(seed, rank));
        prop_assert!((0.0..=1.0).contains(&r.concurrence));
        prop_assert!((0.25 - 1e-12..=1.0 + 1e-12).contains(&r.purity));
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&r.linear_entropy));
        prop_assert!((-1e-12..=4f64.ln() + 1e-12).contains(&r.von_neumann));
        prop_assert!((0.0..=1.0).contains(&r.eof));
        prop_assert!((0.0..=0.5 + 1e-12).contains(&r.negativity));
        prop_assert!((r.tangle - r.concurrence * r.concurrence).abs() <= 1e-15);
    }

    #[test]
    fn sampled_states_lie_under_envelope(seed in any::<u64>(), rank in 1usize..=4) {
        let r = measure_report(&state(seed, rank));
        prop_assert!(r.tangle <= linear_envelope(r.linear_entropy.clamp(0.0, 1.0)) + 1e-9);
    }

    #[test]
    fn concurrence_and_negativity_agree(seed in any::<u64>(), rank in 1usize..=4) {
        let rho = state(seed, rank);
        let c = concurrence(&rho);
        let n = negativity(&rho);
        prop_assert_eq!(c > 1e-7, n > 1e-7, "C={} N={}", c, n);
    }

    #[test]
    fn eof_is_monotone_in_tangle(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(eof_from_tangle(lo) <= eof_from_tangle(hi) + 1e-15);
    }

    #[test]
    fn filter_composition_matches_sequential_application(
        seed in any::<u64>(),
        d in prop::array::uniform4(0.05f64..=1.0),
        e in prop::array::uniform4(0.05f64..=1.0),
    ) {
        let rho = state(seed, 4);
        let f = LocalFilter::new(d[0], d[1], d[2], d[3]).unwrap();
        let g = LocalFilter::new(e[0], e[1], e[2], e[3]).unwrap();
        let once = apply_filter(&rho, &f.compose(&g)).unwrap();
        let first = apply_filter(&rho, &f).unwrap();
        let second = apply_filter(&first.state, &g).unwrap();
        prop_assert!(max_abs_diff(once.state.matrix(), second.state.matrix()) <= 1e-12);
        let p = first.success_prob * second.success_prob;
        prop_assert!((once.success_prob - p).abs() <= 1e-12 * p.max(1e-300).max(once.success_prob));
    }

    #[test]
    fn every_ensemble_sample_is_valid(seed in any::<u64>(), which in 0usize..5, index in 0usize..10_000) {
        let kind = match which {
            0 => EnsembleKind::GinibreFull,
            1 => EnsembleKind::GinibreRank(1 + index % 4),
            2 => EnsembleKind::GinibreMixedRanks,
            3 => EnsembleKind::PureMixture(1 + index % 6),
            _ => EnsembleKind::PerturbMemsFamily { eps: 0.05 },
        };
        let spec = EnsembleSpec::new(kind, 1, seed).unwrap();
        let rho = spec.draw(index, &mut ChaCha8Rng::seed_from_u64(seed ^ index as u64));
        prop_assert!(DensityMatrix::new(rho.into_matrix()).is_ok());
    }

    #[test]
    fn text_format_round_trips_exactly(seed in any::<u64>(), rank in 1usize..=4) {
        let m = state(seed, rank).into_matrix();
        let back = parse_matrix_text(&format_matrix_text(&m)).unwrap();
        prop_assert_eq!(back, m);
    }

    #[test]
    fn eigendecomposition_reconstructs(seed in any::<u64>(), rank in 1usize..=4) {
        let m = state(seed, rank).into_matrix();
        let eig = hermitian_eig(&m).unwrap();
        prop_assert!((eig.reconstruct() - m).norm() <= 1e-12);
        prop_assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn mems_tangle_is_gamma_squared(gamma in 0.0f64..=1.0) {
        let r = measure_report(&mems(gamma).unwrap());
        let p = mems_point(gamma);
        prop_assert!((r.tangle - gamma * gamma).abs() <= 1e-12);
        prop_assert!((r.linear_entropy - p.linear_entropy).abs() <= 1e-12);
    }

    #[test]
    fn werner_is_dominated_by_envelope(gamma in 0.0f64..=1.0) {
        let r = measure_report(&werner(gamma).unwrap());
        prop_assert!(r.tangle <= linear_envelope(r.linear_entropy) + 1e-12);
    }
}
