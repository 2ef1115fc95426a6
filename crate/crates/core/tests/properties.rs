// Properties checked against closed forms that do not go through the library's
// own crossing or census code.

use num_complex::Complex64;
use proptest::prelude::*;
use singlink::analysis::{trace_diagram, RunConfig};
use singlink::braid::algebraic_crossing_number;
use singlink::diskspec::{gcd, parse_config, BranchedDisk, SingularityConfig};
use singlink::zpoly::ZPolynomial;

fn torus_disk(n: u32, mu: u32, scale: f64) -> SingularityConfig {
    let d = BranchedDisk::new("k", ZPolynomial::z_pow(n), ZPolynomial::monomial(Complex64::new(scale, 0.0), mu, 0));
    SingularityConfig { name: "torus".into(), disks: vec![d] }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, failure_persistence: None, ..ProptestConfig::default() })]

    // (z^N, z^mu) links as the closure of (s1 s2 ... s_{N-1})^mu: N strands,
    // mu (N - 1) positive crossings. Its mirror has the opposite writhe.
    #[test]
    fn torus_links_are_positive_torus_braids(n in 2u32..=4, mu in 3u32..=9, scale in 0.5f64..2.0) {
        prop_assume!(mu > n && gcd(n, mu) == 1);
        let cfg = torus_disk(n, mu, scale);
        let run = RunConfig { epsilon: 1e-2, ..RunConfig::default() };
        let (_, d) = trace_diagram(&cfg, &run).unwrap();
        let want = (mu * (n - 1)) as i32;
        prop_assert_eq!(d.braid_index(0), n);
        prop_assert_eq!(algebraic_crossing_number(&d, 0), want);
        prop_assert_eq!(d.word.letters.len() as i32, want);
        prop_assert!(d.word.letters.iter().all(|&l| l > 0 && l < n as i32));

        let (_, m) = trace_diagram(&cfg.mirrored(), &run).unwrap();
        prop_assert_eq!(algebraic_crossing_number(&m, 0), -want);
    }

    // The .sing rendering of a configuration parses back to the same thing.
    #[test]
    fn display_round_trips(n in 2u32..=5, mu in 3u32..=9, re in -2.0f64..2.0, im in -2.0f64..2.0, bar in any::<bool>()) {
        let w2 = if bar { ZPolynomial::monomial(Complex64::new(re, im), 0, mu) } else { ZPolynomial::monomial(Complex64::new(re, im), mu, 0) };
        let cfg = SingularityConfig { name: String::new(), disks: vec![BranchedDisk::new("a", ZPolynomial::z_pow(n), w2)] };
        let back = parse_config(&cfg.to_string()).unwrap();
        prop_assert_eq!(back.disks, cfg.disks);
    }
}
