//! Vector distance metrics used by the prototype explanations.

use super::DatasetError;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Euclidean,
    Cosine,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::Cosine => "cosine",
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "euclidean" => Ok(Metric::Euclidean),
            "cosine" => Ok(Metric::Cosine),
            other => Err(format!("unknown metric \"{other}\" (euclidean | cosine)")),
        }
    }
}

/// Distance between two equal-length vectors.
///
/// Euclidean is the ℓ2 norm of the difference; cosine is 1 − a·b/(‖a‖‖b‖).
/// Cosine with both vectors zero is an error; with exactly one zero vector
/// the distance is 1 by convention (treated as orthogonal).
pub fn distance(a: &[f64], b: &[f64], metric: Metric) -> Result<f64, DatasetError> {
    if a.len() != b.len() {
        return Err(DatasetError::DimensionMismatch(a.len(), b.len()));
    }
    match metric {
        Metric::Euclidean => Ok(a
            .iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()),
        Metric::Cosine => {
            let norm_a = a.iter().map(|x| x * x).sum::<f64>().sqrt();
            let norm_b = b.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm_a == 0.0 && norm_b == 0.0 {
                return Err(DatasetError::ZeroVector);
            }
            if norm_a == 0.0 || norm_b == 0.0 {
                return Ok(1.0);
            }
            let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            Ok(1.0 - dot / (norm_a * norm_b))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_three_four_five() {
        assert_eq!(
            distance(&[0.0, 0.0], &[3.0, 4.0], Metric::Euclidean).unwrap(),
            5.0
        );
    }

    #[test]
    fn cosine_identity_is_zero() {
        let v = [0.3, -1.2, 4.0];
        let d = distance(&v, &v, Metric::Cosine).unwrap();
        assert!(d.abs() < 1e-15);
    }

    #[test]
    fn cosine_orthogonal_is_one() {
        assert_eq!(
            distance(&[1.0, 0.0], &[0.0, 1.0], Metric::Cosine).unwrap(),
            1.0
        );
    }

    #[test]
    fn cosine_both_zero_is_error() {
        assert!(matches!(
            distance(&[0.0, 0.0], &[0.0, 0.0], Metric::Cosine),
            Err(DatasetError::ZeroVector)
        ));
    }

    #[test]
    fn cosine_single_zero_is_one_by_convention() {
        assert_eq!(
            distance(&[0.0, 0.0], &[1.0, 2.0], Metric::Cosine).unwrap(),
            1.0
        );
    }

    #[test]
    fn length_mismatch_is_error() {
        assert!(matches!(
            distance(&[1.0], &[1.0, 2.0], Metric::Euclidean),
            Err(DatasetError::DimensionMismatch(1, 2))
        ));
    }

    #[test]
    fn symmetric_and_zero_on_identical() {
        let a = [1.0, -2.0, 0.5];
        let b = [0.25, 3.0, -1.5];
        for metric in [Metric::Euclidean, Metric::Cosine] {
            let ab = distance(&a, &b, metric).unwrap();
            let ba = distance(&b, &a, metric).unwrap();
            assert_eq!(ab, ba);
            assert!(distance(&a, &a, metric).unwrap().abs() < 1e-15);
        }
    }
}
