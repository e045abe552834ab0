use super::FeatureVector;
use crate::error::{Error, Result};

const ZERO_GUARD: f64 = 1e-8;
const DELTA_CAP: f64 = 1e6;

/// Relative change `(init − intra) / init` with a guard for vanishing `init`.
pub fn delta_value(init: f64, intra: f64) -> f64 {
    let diff = init - intra;
    if init.abs() >= ZERO_GUARD {
        let d = diff / init;
        if d.is_finite() {
            d
        } else {
            d.signum() * DELTA_CAP
        }
    } else if diff.abs() < ZERO_GUARD {
        0.0
    } else {
        diff.signum() * DELTA_CAP
    }
}

pub fn delta_features(init: &FeatureVector, intra: &FeatureVector) -> Result<FeatureVector> {
    if init.names != intra.names {
        return Err(Error::invalid(
            "delta features need identical feature name lists",
        ));
    }
    Ok(FeatureVector {
        names: init.names.clone(),
        values: init
            .values
            .iter()
            .zip(&intra.values)
            .map(|(&a, &b)| delta_value(a, b))
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{Family, FeatureName};
    use proptest::prelude::*;

    fn fv(values: &[f64]) -> FeatureVector {
        FeatureVector {
            names: (0..values.len())
                .map(|i| FeatureName {
                    filter: "original".into(),
                    family: Family::FirstOrder,
                    feature: format!("f{i}"),
                })
                .collect(),
            values: values.to_vec(),
        }
    }

    #[test]
    fn relative_change_examples() {
        assert_eq!(delta_value(2.0, 1.0), 0.5);
        assert_eq!(delta_value(0.0, 5.0), -1e6);
        assert_eq!(delta_value(0.0, -5.0), 1e6);
        assert_eq!(delta_value(0.0, 1e-9), 0.0);
        let f = fv(&[1.0, -3.0, 0.0]);
        assert!(delta_features(&f, &f).unwrap().values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn name_mismatch_rejected() {
        let a = fv(&[1.0, 2.0]);
        let mut b = a.clone();
        b.names.swap(0, 1);
        assert!(delta_features(&a, &b).is_err());
    }

    proptest! {
        #[test]
        fn self_delta_is_zero(vals in prop::collection::vec(prop_oneof![1e-8f64..1e8, -1e8f64..-1e-8], 1..20)) {
            let f = fv(&vals);
            prop_assert!(delta_features(&f, &f).unwrap().values.iter().all(|&v| v == 0.0));
        }

        #[test]
        fn always_finite(a in -1e300f64..1e300, b in -1e300f64..1e300) {
            prop_assert!(delta_value(a, b).is_finite());
        }
    }
}
