use proptest::prelude::*;
use weaksym_core::reversal::{residual, theta_group};
use weaksym_core::{build_pair, sample_tangent, verify_pair, Params, SphericalPair, VerifyConfig};

const IDS: [&str; 8] = [
    "I-so8-su2sp2",
    "II-su",
    "III-su-sp",
    "IV-g2-a2",
    "IV-so7-g2",
    "V-so8-g2",
    "VI-so2n1-un",
    "VI-spn-spn1u1",
];

fn certify(pair: &SphericalPair, index: u64, seed: u64) -> weaksym_core::ReversalCertificate {
    use weaksym_core::hermitian::HermitianStructure;
    use weaksym_core::reversal::{reverse_family3, reverse_generic, reverse_hermitian};
    use weaksym_core::rng::{stream_rng, Stream};
    let x = sample_tangent(pair, index, seed).unwrap();
    let config = VerifyConfig::default();
    let mut rng = stream_rng(seed, index, Stream::Restarts);
    match pair.id.as_str() {
        "II-su" => reverse_hermitian(pair, &HermitianStructure::new(pair).unwrap(), &x, &config, &mut rng).unwrap(),
        "III-su-sp" => reverse_family3(pair, &x, &config, &mut rng).unwrap(),
        _ => reverse_generic(pair, &x, &config, &mut rng).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn certificates_are_honest(which in 0usize..IDS.len(), index in 0u64..1000, seed in 0u64..1000) {
        let pair = build_pair(IDS[which], &Params::new()).unwrap();
        let cert = certify(&pair, index, seed);
        let x = sample_tangent(&pair, index, seed).unwrap();
        prop_assert!(cert.success, "{} residual {}", pair.id, cert.residual);
        let again = residual(&pair, cert.h.matrix(), &x).unwrap();
        prop_assert!((again - cert.residual).abs() < 1e-12);
        prop_assert!(cert.h.membership_residual(pair.h.space()).unwrap() < 1e-7);
        prop_assert!(cert.h.unitarity_residual() < 1e-10);
        // Ad(h) preserves q
        let moved = cert.h.act(&pair.q.basis()[0]);
        prop_assert!(pair.q.relative_residual(&moved) < 1e-9);
    }

    #[test]
    fn reversal_is_scale_invariant(which in 0usize..IDS.len(), index in 0u64..1000, scale in 0.01f64..100.0) {
        let pair = build_pair(IDS[which], &Params::new()).unwrap();
        let cert = certify(&pair, index, 42);
        let x = sample_tangent(&pair, index, 42).unwrap();
        let scaled = residual(&pair, cert.h.matrix(), &x.scale(scale)).unwrap();
        prop_assert!((scaled - cert.residual).abs() < 1e-12);
    }

    #[test]
    fn theta_is_a_group_involution(which in 0usize..IDS.len(), index in 0u64..1000) {
        let pair = build_pair(IDS[which], &Params::new()).unwrap();
        let cert = certify(&pair, index, 7);
        let twice = theta_group(&pair, &theta_group(&pair, &cert.h));
        prop_assert!(twice.matrix().distance(cert.h.matrix()) < 1e-12);
    }
}

#[test]
fn reports_are_thread_independent() {
    let pair = build_pair("III-su-spu1", &Params::new()).unwrap();
    let config = VerifyConfig { samples: 12, ..Default::default() };
    let serial = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| verify_pair(&pair, &config).unwrap());
    let parallel = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(|| verify_pair(&pair, &config).unwrap());
    assert_eq!(serde_json::to_string(&serial).unwrap(), serde_json::to_string(&parallel).unwrap());
}

#[test]
fn expected_outcomes_at_default_parameters() {
    let config = VerifyConfig { samples: 100, ..Default::default() };
    let iv = verify_pair(&build_pair("IV-so8-spin7", &Params::new()).unwrap(), &config).unwrap();
    assert_eq!(iv.aggregate.successes, 100);
    let mut p = Params::new();
    p.insert("n".into(), 2);
    let iii = verify_pair(&build_pair("III-su-sp", &p).unwrap(), &config).unwrap();
    assert_eq!(iii.aggregate.successes, 100);
    assert_eq!(iii.aggregate.fallbacks, iii.samples.iter().filter(|s| s.method.contains('>')).count());
    let control = verify_pair(&build_pair("negative-control-su3-torus", &Params::new()).unwrap(), &config).unwrap();
    assert_eq!(control.aggregate.successes, 0);
}
