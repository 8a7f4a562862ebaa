//! Property tests for the structural invariants of the covariance map and
//! the graph queries.

mod support;

use crosscov::covariance::{reconstruct, validate, LatentParams, Tolerances};
use crosscov::graph::SeparationQuery;
use crosscov::nalgebra::{DMatrix, DVector};
use crosscov::parameterization::{decompose, salience_at_alpha};
use proptest::prelude::*;
use rand_chacha::ChaCha20Rng;
use rand_core::SeedableRng;

/// Strategy: a valid latent parameter set with dimensions 1..=4.
fn params_strategy() -> impl Strategy<Value = LatentParams> {
    let dim = 1usize..=4;
    (dim.clone(), dim, -1.0f64..=1.0).prop_flat_map(|(p, q, rho)| {
        let entries = -2.0f64..2.0;
        (
            prop::collection::vec(entries.clone(), p),
            prop::collection::vec(entries.clone(), q),
            prop::collection::vec(entries.clone(), p * p),
            prop::collection::vec(entries, q * q),
            Just(rho),
        )
            .prop_map(move |(a, b, ge, gz, rho)| {
                let ge = DMatrix::from_vec(p, p, ge);
                let gz = DMatrix::from_vec(q, q, gz);
                LatentParams::new(
                    DVector::from_vec(a),
                    DVector::from_vec(b),
                    rho,
                    &ge * ge.transpose(),
                    &gz * gz.transpose(),
                )
                .expect("constructed PSD blocks")
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reconstruction_validates_and_is_rank_one(params in params_strategy()) {
        let (cov, parts) = reconstruct(&params);
        let tol = Tolerances::default();
        // Symmetric, PSD, cross block of rank at most one.
        let checked = validate(cov.sigma().clone(), params.p(), params.q(), &tol, false).unwrap();
        prop_assert!(checked.cross_sv_ratio() <= tol.rank);
        // Q + E is exactly the reconstruction.
        prop_assert!(((&parts.q + &parts.e) - cov.sigma()).abs().max() == 0.0);
    }

    #[test]
    fn factorization_is_idempotent_on_cross_block(params in params_strategy()) {
        let (cov, _) = reconstruct(&params);
        let Ok(factors) = decompose(&cov) else {
            // Zero cross block: nothing to check.
            return Ok(());
        };
        let tol = Tolerances::default();
        let recovered = factors.cross_block();
        prop_assert!((recovered - cov.xy()).abs().max() <= tol.recon * cov.max_abs_entry().max(1.0));
    }

    #[test]
    fn scale_gauge_preserves_cross_product(
        params in params_strategy(),
        alpha1 in 0.2f64..4.0,
        alpha2 in 0.2f64..4.0,
    ) {
        let (cov, _) = reconstruct(&params);
        let Ok(factors) = decompose(&cov) else { return Ok(()) };
        let (a1, b1) = salience_at_alpha(&factors, alpha1).unwrap();
        let (a2, b2) = salience_at_alpha(&factors, alpha2).unwrap();
        let diff = (&a1 * b1.transpose() - &a2 * b2.transpose()).abs().max();
        prop_assert!(diff <= 1e-9 * cov.max_abs_entry().max(1.0));
    }

    #[test]
    fn m_separation_is_symmetric(seed in 0u64..500, n in 3usize..7) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let g = support::random_mixed_graph(&mut rng, n);
        let labels: Vec<String> = g.labels().to_vec();
        for x in 0..n {
            for y in (x + 1)..n {
                let z: Vec<String> = (0..n)
                    .filter(|&v| v != x && v != y && v % 2 == (seed as usize) % 2)
                    .map(|v| labels[v].clone())
                    .collect();
                let fwd = SeparationQuery::new(
                    vec![labels[x].clone()],
                    vec![labels[y].clone()],
                    z.clone(),
                );
                let rev = SeparationQuery::new(
                    vec![labels[y].clone()],
                    vec![labels[x].clone()],
                    z,
                );
                prop_assert_eq!(g.m_separated(&fwd).unwrap(), g.m_separated(&rev).unwrap());
            }
        }
    }
}
