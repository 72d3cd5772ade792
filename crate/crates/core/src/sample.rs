//! Raw paired measurements and their rank transform onto the open unit square.

use serde::{Deserialize, Serialize};

use crate::error::{CddError, Result};

/// Fewest observations accepted by the estimators.
pub const MIN_OBSERVATIONS: usize = 10;

/// Two equally long columns of raw measurements, e.g. expression of two genes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedSample {
    x1: Vec<f64>,
    x2: Vec<f64>,
    labels: (String, String),
}

impl PairedSample {
    pub fn new(x1: Vec<f64>, x2: Vec<f64>, labels: (String, String)) -> Result<Self> {
        if x1.len() != x2.len() {
            return Err(CddError::LengthMismatch {
                left: x1.len(),
                right: x2.len(),
            });
        }
        if x1.len() < MIN_OBSERVATIONS {
            return Err(CddError::TooFewObservations {
                got: x1.len(),
                min: MIN_OBSERVATIONS,
            });
        }
        if let Some(index) = x1.iter().zip(&x2).position(|(a, b)| !a.is_finite() || !b.is_finite()) {
            return Err(CddError::NonFinite { index });
        }
        Ok(Self { x1, x2, labels })
    }

    pub fn unlabeled(x1: Vec<f64>, x2: Vec<f64>) -> Result<Self> {
        Self::new(x1, x2, ("U".to_string(), "V".to_string()))
    }

    pub fn len(&self) -> usize {
        self.x1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x1.is_empty()
    }

    pub fn x1(&self) -> &[f64] {
        &self.x1
    }

    pub fn x2(&self) -> &[f64] {
        &self.x2
    }

    pub fn labels(&self) -> (&str, &str) {
        (&self.labels.0, &self.labels.1)
    }

    /// The same sample with the two variables exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            x1: self.x2.clone(),
            x2: self.x1.clone(),
            labels: (self.labels.1.clone(), self.labels.0.clone()),
        }
    }

    /// Rows picked by `indices`, with repetition allowed (bootstrap resampling).
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            x1: indices.iter().map(|&i| self.x1[i]).collect(),
            x2: indices.iter().map(|&i| self.x2[i]).collect(),
            labels: self.labels.clone(),
        }
    }
}

/// Pseudo-observations `(u, v)`, every coordinate strictly inside (0, 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoSample {
    u: Vec<f64>,
    v: Vec<f64>,
    labels: (String, String),
}

impl PseudoSample {
    /// Wraps values that are already on the unit scale (simulated data, hand cases).
    ///
    /// Unlike [`to_pseudo_observations`] this only requires a nonempty sample.
    pub fn new(u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if u.len() != v.len() {
            return Err(CddError::LengthMismatch {
                left: u.len(),
                right: v.len(),
            });
        }
        if u.is_empty() {
            return Err(CddError::TooFewObservations { got: 0, min: 1 });
        }
        for &x in u.iter().chain(&v) {
            if !(x > 0.0 && x < 1.0) {
                return Err(CddError::Domain {
                    what: "pseudo-observation",
                    value: x,
                });
            }
        }
        Ok(Self {
            u,
            v,
            labels: ("U".to_string(), "V".to_string()),
        })
    }

    pub fn with_labels(mut self, labels: (String, String)) -> Self {
        self.labels = labels;
        self
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn labels(&self) -> (&str, &str) {
        (&self.labels.0, &self.labels.1)
    }

    pub fn swapped(&self) -> Self {
        Self {
            u: self.v.clone(),
            v: self.u.clone(),
            labels: (self.labels.1.clone(), self.labels.0.clone()),
        }
    }
}

/// Mid-ranks (1-based, ties share the average of the ranks they span).
pub fn mid_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = rank;
        }
        start = end;
    }
    ranks
}

/// Maps each coordinate to `rank / (n + 1)` using mid-ranks.
pub fn to_pseudo_observations(sample: &PairedSample) -> Result<PseudoSample> {
    let n = sample.len();
    if n < MIN_OBSERVATIONS {
        return Err(CddError::TooFewObservations {
            got: n,
            min: MIN_OBSERVATIONS,
        });
    }
    let denom = (n + 1) as f64;
    let scale = |xs: &[f64]| -> Vec<f64> { mid_ranks(xs).into_iter().map(|r| r / denom).collect() };
    let (a, b) = sample.labels();
    Ok(PseudoSample {
        u: scale(sample.x1()),
        v: scale(sample.x2()),
        labels: (a.to_string(), b.to_string()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pad(mut head: Vec<f64>, n: usize) -> Vec<f64> {
        let start = head.len();
        head.extend((start..n).map(|i| 100.0 + i as f64));
        head
    }

    #[test]
    fn three_distinct_values() {
        assert_eq!(mid_ranks(&[3.0, 1.0, 2.0]), vec![3.0, 1.0, 2.0]);
        let r: Vec<f64> = mid_ranks(&[3.0, 1.0, 2.0]).iter().map(|r| r / 4.0).collect();
        assert_eq!(r, vec![0.75, 0.25, 0.5]);
        let r: Vec<f64> = mid_ranks(&[10.0, 20.0, 30.0]).iter().map(|r| r / 4.0).collect();
        assert_eq!(r, vec![0.25, 0.5, 0.75]);
    }

    #[test]
    fn ties_share_mid_rank() {
        // values ranked 3 and 4 tie
        let x1 = pad(vec![1.0, 2.0, 5.0, 5.0], 12);
        let x2: Vec<f64> = (0..12).map(f64::from).collect();
        let ps = to_pseudo_observations(&PairedSample::unlabeled(x1, x2).unwrap()).unwrap();
        assert_eq!(ps.u()[2], 3.5 / 13.0);
        assert_eq!(ps.u()[3], 3.5 / 13.0);
    }

    #[test]
    fn increasing_input_gives_uniform_grid() {
        let n = 15;
        let x: Vec<f64> = (0..n).map(|i| (i as f64).powi(3) - 7.0).collect();
        let ps = to_pseudo_observations(&PairedSample::unlabeled(x.clone(), x).unwrap()).unwrap();
        for (i, &u) in ps.u().iter().enumerate() {
            assert_eq!(u, (i + 1) as f64 / (n + 1) as f64);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let short: Vec<f64> = (0..9).map(f64::from).collect();
        assert!(matches!(
            PairedSample::unlabeled(short.clone(), short),
            Err(CddError::TooFewObservations { got: 9, .. })
        ));
        let mut x: Vec<f64> = (0..12).map(f64::from).collect();
        let y = x.clone();
        x[4] = f64::NAN;
        assert!(matches!(
            PairedSample::unlabeled(x, y.clone()),
            Err(CddError::NonFinite { index: 4 })
        ));
        let mut z = y.clone();
        z[0] = f64::INFINITY;
        assert!(PairedSample::unlabeled(y, z).is_err());
        assert!(PseudoSample::new(vec![0.0, 0.5], vec![0.5, 0.5]).is_err());
        assert!(PseudoSample::new(vec![0.2, 0.5], vec![0.5, 1.0]).is_err());
    }

    fn sample_strategy() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (10usize..60).prop_flat_map(|n| {
            (
                prop::collection::vec(-5i32..5, n).prop_map(|v| v.into_iter().map(f64::from).collect()),
                prop::collection::vec(-1e3f64..1e3, n),
            )
        })
    }

    proptest! {
        #[test]
        fn monotone_transform_invariance((x1, x2) in sample_strategy()) {
            let base = to_pseudo_observations(&PairedSample::unlabeled(x1.clone(), x2.clone()).unwrap()).unwrap();
            let moved: Vec<f64> = x1.iter().map(|x| (x / 3.0).exp() + 2.0 * x).collect();
            let other = to_pseudo_observations(&PairedSample::unlabeled(moved, x2).unwrap()).unwrap();
            prop_assert_eq!(base, other);
        }

        #[test]
        fn range_and_order((x1, x2) in sample_strategy()) {
            let n = x1.len() as f64;
            let ps = to_pseudo_observations(&PairedSample::unlabeled(x1.clone(), x2).unwrap()).unwrap();
            for (i, &u) in ps.u().iter().enumerate() {
                prop_assert!(u >= 1.0 / (n + 1.0) && u <= n / (n + 1.0));
                for (j, &w) in ps.u().iter().enumerate() {
                    prop_assert_eq!(x1[i].total_cmp(&x1[j]), u.total_cmp(&w));
                }
            }
        }

        #[test]
        fn permutation_equivariance((x1, x2) in sample_strategy(), shift in 1usize..9) {
            let n = x1.len();
            let perm: Vec<usize> = (0..n).map(|i| (i * 7 + shift) % n).collect();
            let mut seen = vec![false; n];
            for &p in &perm { seen[p] = true; }
            prop_assume!(seen.iter().all(|&s| s));
            let sample = PairedSample::unlabeled(x1, x2).unwrap();
            let base = to_pseudo_observations(&sample).unwrap();
            let permuted = to_pseudo_observations(&sample.select(&perm)).unwrap();
            for (k, &p) in perm.iter().enumerate() {
                prop_assert_eq!(permuted.u()[k], base.u()[p]);
                prop_assert_eq!(permuted.v()[k], base.v()[p]);
            }
        }
    }
}
