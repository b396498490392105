//! Property-level checks of the basis expansion: boundedness, manifest
//! uniqueness, and recoverability of harmonic coefficients by least
//! squares on the position rows.

mod common;

use common::least_squares;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tsad_core::basis::{expand, BasisKind, Channel, FeatureConfig};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// Harmonic rows and Chebyshev-I rows stay in [-1, 1] for any input.
    #[test]
    fn harmonic_rows_are_bounded(
        window in prop::collection::vec(-1e3f64..1e3, 4..32),
        n_terms in 1usize..4,
        basis_pick in 0usize..2,
    ) {
        let mut cfg = FeatureConfig::new(n_terms, window.len());
        cfg.basis = if basis_pick == 0 { BasisKind::Fourier } else { BasisKind::ChebyshevFirst };
        let ft = expand(&window, &cfg).unwrap();
        for (r, ch) in ft.manifest.iter().enumerate() {
            let bounded = matches!(
                ch,
                Channel::ValueSin(_) | Channel::ValueCos(_)
                    | Channel::PositionSin(_) | Channel::PositionCos(_)
                    | Channel::ChebFirst(_)
            );
            if bounded {
                for &v in ft.tensor.row(r) {
                    prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&v), "{ch} = {v}");
                }
            }
        }
    }

    /// The manifest names every row exactly once.
    #[test]
    fn manifest_matches_tensor_rows(
        t_len in 2usize..24,
        n_terms in 1usize..4,
        include_raw in any::<bool>(),
        include_value in any::<bool>(),
        include_position in any::<bool>(),
    ) {
        prop_assume!(include_raw || include_value || include_position);
        let cfg = FeatureConfig {
            n_terms,
            window_len: t_len,
            basis: BasisKind::Fourier,
            include_raw,
            include_value,
            include_position,
        };
        let window = vec![0.25; t_len];
        let ft = expand(&window, &cfg).unwrap();
        prop_assert_eq!(ft.manifest.len(), ft.tensor.rows());
        prop_assert_eq!(ft.manifest.len(), cfg.channel_count());
        let mut names: Vec<String> = ft.manifest.iter().map(|c| c.to_string()).collect();
        names.sort();
        let before = names.len();
        names.dedup();
        prop_assert_eq!(names.len(), before);
    }
}

#[test]
fn least_squares_on_position_rows_recovers_harmonic_coefficients() {
    // Any window sampled from a sum of in-band position harmonics must be
    // reproduced exactly by regression on the position rows.
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for t_len in [8usize, 24, 96] {
        for n_terms in [1usize, 2, 3] {
            let true_coeffs: Vec<f64> = (0..2 * n_terms)
                .map(|_| rng.random_range(-2.0..2.0))
                .collect();
            let omega = 2.0 * std::f64::consts::PI / t_len as f64;
            let window: Vec<f64> = (0..t_len)
                .map(|t| {
                    (1..=n_terms)
                        .map(|n| {
                            let a = true_coeffs[2 * (n - 1)];
                            let b = true_coeffs[2 * (n - 1) + 1];
                            a * (omega * (n * t) as f64).sin() + b * (omega * (n * t) as f64).cos()
                        })
                        .sum()
                })
                .collect();

            let cfg = FeatureConfig::new(n_terms, t_len);
            let ft = expand(&window, &cfg).unwrap();
            // Design matrix: position rows as columns, one sample per t.
            let pos_rows: Vec<usize> = ft
                .manifest
                .iter()
                .enumerate()
                .filter(|(_, c)| matches!(c, Channel::PositionSin(_) | Channel::PositionCos(_)))
                .map(|(r, _)| r)
                .collect();
            assert_eq!(pos_rows.len(), 2 * n_terms);
            let design: Vec<Vec<f64>> = (0..t_len)
                .map(|t| pos_rows.iter().map(|&r| ft.tensor.get(r, t)).collect())
                .collect();
            let fitted = least_squares(&design, &window);
            for (got, want) in fitted.iter().zip(&true_coeffs) {
                assert!(
                    (got - want).abs() < 1e-8,
                    "T={t_len} N={n_terms}: {got} vs {want}"
                );
            }
        }
    }
}
