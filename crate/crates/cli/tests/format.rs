use proptest::prelude::*;

use qmc_cli::format::sci;

proptest! {
    #[test]
    fn sci_round_trips(x in prop::num::f64::NORMAL | prop::num::f64::ZERO) {
        let s = sci(x);
        let back: f64 = s.parse().unwrap();
        prop_assert!((back - x).abs() <= 1e-12 * x.abs());
        let (mantissa, exp) = s.split_once('e').unwrap();
        prop_assert_eq!(mantissa.split_once('.').unwrap().1.len(), 12);
        prop_assert!(exp.starts_with('+') || exp.starts_with('-'));
        prop_assert!(exp.len() >= 3);
    }
}
