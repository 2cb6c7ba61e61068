use crate::error::{Error, Result};

/// Shannon entropy of a binary variable, in bits. The limits at 0 and 1 are
/// taken as 0 by continuity.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::ProbabilityOutOfRange { value: x });
    }
    if x == 0.0 || x == 1.0 {
        return Ok(0.0);
    }
    Ok(-x * x.log2() - (1.0 - x) * (1.0 - x).log2())
}

/// Mean photon number maximizing the secure key rate against a fixed
/// baseline QBER: 0.5 (1 - 2 h(q)) / (1 - h(q)).
///
/// Approaches 0.5 as q -> 0 and reaches zero where h(q) = 1/2 (q ~ 0.11);
/// past that point no photon number yields a positive rate.
pub fn optimal_mu(qber_baseline: f64) -> Result<f64> {
    let h = binary_entropy(qber_baseline)?;
    let numerator = 1.0 - 2.0 * h;
    if numerator <= 0.0 {
        return Err(Error::NoPositiveMu {
            qber: qber_baseline,
        });
    }
    Ok(0.5 * numerator / (1.0 - h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn entropy_known_values() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert_relative_eq!(
            binary_entropy(0.01).unwrap(),
            0.08079313589591118,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            binary_entropy(0.25).unwrap(),
            0.8112781244591328,
            max_relative = 1e-15
        );
    }

    #[test]
    fn entropy_rejects_out_of_range() {
        assert_eq!(
            binary_entropy(-0.1),
            Err(Error::ProbabilityOutOfRange { value: -0.1 })
        );
        assert!(binary_entropy(1.1).is_err());
        assert!(binary_entropy(f64::NAN).is_err());
    }

    #[test]
    fn optimal_mu_known_values() {
        assert_eq!(optimal_mu(0.0).unwrap(), 0.5);
        assert_relative_eq!(
            optimal_mu(0.01).unwrap(),
            0.45605279994582243,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            optimal_mu(0.04).unwrap(),
            0.34011502482137634,
            max_relative = 1e-15
        );
    }

    #[test]
    fn optimal_mu_vanishes_past_the_half_entropy_point() {
        // h(q) = 1/2 near q = 0.110, so 0.2 is far past the threshold
        assert_eq!(optimal_mu(0.2), Err(Error::NoPositiveMu { qber: 0.2 }));
        assert!(optimal_mu(0.11003).is_err());
        assert!(optimal_mu(0.11).is_ok());
    }
}
