//! Shifted geometric mean.

use super::StatsError;

/// `(prod (t_i + s))^(1/n) - s`, computed through logarithms so long runs of
/// large times cannot overflow. The shift damps the influence of very small
/// values.
pub fn shifted_geomean(times: &[f64], shift: f64) -> Result<f64, StatsError> {
    if times.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    debug_assert!(shift > 0.0);
    let log_sum: f64 = times.iter().map(|t| (t + shift).ln()).sum();
    Ok((log_sum / times.len() as f64).exp() - shift)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_element_is_identity() {
        assert!((shifted_geomean(&[90.0], 10.0).unwrap() - 90.0).abs() < 1e-9);
    }

    #[test]
    fn two_element_reference() {
        // sqrt(100 * 400) - 10 = 190
        let g = shifted_geomean(&[90.0, 390.0], 10.0).unwrap();
        assert!((g - 190.0).abs() < 1e-9, "got {g}");
    }

    #[test]
    fn zeros_stay_zero() {
        let g = shifted_geomean(&[0.0, 0.0], 10.0).unwrap();
        assert!(g.abs() < 1e-12);
    }

    #[test]
    fn empty_input_rejected() {
        assert_eq!(shifted_geomean(&[], 10.0), Err(StatsError::EmptyInput));
    }

    proptest! {
        #[test]
        fn monotone_in_each_entry(
            mut times in prop::collection::vec(0.0f64..1e4, 1..20),
            idx in 0usize..20,
            bump in 0.1f64..100.0,
        ) {
            let idx = idx % times.len();
            let before = shifted_geomean(&times, 10.0).unwrap();
            times[idx] += bump;
            let after = shifted_geomean(&times, 10.0).unwrap();
            prop_assert!(after >= before - 1e-9);
        }

        #[test]
        fn single_identity_holds(t in 0.0f64..1e6) {
            let g = shifted_geomean(&[t], 10.0).unwrap();
            prop_assert!((g - t).abs() <= 1e-9 * (1.0 + t));
        }
    }
}
