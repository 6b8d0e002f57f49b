//! Finite unions of disjoint bounded open intervals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative merge tolerance applied by [`IntervalUnion::normalize_default`].
pub const DEFAULT_RELATIVE_MERGE_TOL: f64 = 1e-12;

/// Sorted open intervals whose closures are pairwise disjoint.
///
/// Open and closed variants differ by a null set and are not distinguished.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct IntervalUnion {
    intervals: Vec<(f64, f64)>,
}

/// The geometric quantities entering the multi-interval error budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Descriptors {
    pub k: usize,
    pub lengths: Vec<f64>,
    pub gaps: Vec<f64>,
    pub measure: f64,
    pub min_length: Option<f64>,
    pub min_gap: Option<f64>,
}

impl IntervalUnion {
    pub fn empty() -> Self {
        Self::default()
    }

    /// A single interval `(left, right)`.
    pub fn single(left: f64, right: f64) -> Result<Self> {
        Self::normalize(&[(left, right)], 0.0)
    }

    /// Sorts `raw`, merges neighbours whose gap is at most `merge_tol` and
    /// rejects overlaps deeper than that.
    pub fn normalize(raw: &[(f64, f64)], merge_tol: f64) -> Result<Self> {
        if !(merge_tol >= 0.0) {
            return Err(Error::validation(format!("merge tolerance must be >= 0, got {merge_tol}")));
        }
        for &(l, r) in raw {
            if !(l.is_finite() && r.is_finite()) {
                return Err(Error::validation(format!("interval ({l}, {r}) is not bounded")));
            }
            if !(l < r) {
                return Err(Error::validation(format!("interval ({l}, {r}) has left >= right")));
            }
        }
        let mut sorted = raw.to_vec();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(sorted.len());
        for (l, r) in sorted {
            match out.last_mut() {
                Some(last) => {
                    let gap = l - last.1;
                    if gap < -merge_tol {
                        return Err(Error::validation(format!(
                            "intervals ({}, {}) and ({l}, {r}) overlap",
                            last.0, last.1
                        )));
                    }
                    if gap <= merge_tol {
                        last.1 = last.1.max(r);
                    } else {
                        out.push((l, r));
                    }
                }
                None => out.push((l, r)),
            }
        }
        Ok(Self { intervals: out })
    }

    /// [`normalize`](Self::normalize) with tolerance `1e-12 × span`.
    pub fn normalize_default(raw: &[(f64, f64)]) -> Result<Self> {
        let lo = raw.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let hi = raw.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        let span = if raw.is_empty() { 0.0 } else { (hi - lo).abs() };
        let tol = if span.is_finite() { DEFAULT_RELATIVE_MERGE_TOL * span } else { 0.0 };
        Self::normalize(raw, tol)
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(l, r)| r - l).sum()
    }

    pub fn boundary_count(&self) -> usize {
        2 * self.intervals.len()
    }

    pub fn lengths(&self) -> Vec<f64> {
        self.intervals.iter().map(|(l, r)| r - l).collect()
    }

    pub fn gaps(&self) -> Vec<f64> {
        self.intervals.windows(2).map(|w| w[1].0 - w[0].1).collect()
    }

    /// Multiplies every endpoint by `factor`.
    pub fn scale(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) || !factor.is_finite() {
            return Err(Error::domain(format!("scale factor must be > 0, got {factor}")));
        }
        Ok(Self { intervals: self.intervals.iter().map(|(l, r)| (l * factor, r * factor)).collect() })
    }

    /// Moves every endpoint by `shift`.
    pub fn translate(&self, shift: f64) -> Self {
        Self { intervals: self.intervals.iter().map(|(l, r)| (l + shift, r + shift)).collect() }
    }

    pub fn descriptors(&self) -> Descriptors {
        let lengths = self.lengths();
        let gaps = self.gaps();
        Descriptors {
            k: self.len(),
            measure: lengths.iter().sum(),
            min_length: lengths.iter().copied().reduce(f64::min),
            min_gap: gaps.iter().copied().reduce(f64::min),
            lengths,
            gaps,
        }
    }

    /// Each component as its own union.
    pub fn components(&self) -> impl Iterator<Item = IntervalUnion> + '_ {
        self.intervals.iter().map(|&iv| IntervalUnion { intervals: vec![iv] })
    }
}

impl TryFrom<Vec<[f64; 2]>> for IntervalUnion {
    type Error = Error;

    fn try_from(raw: Vec<[f64; 2]>) -> Result<Self> {
        let pairs: Vec<(f64, f64)> = raw.into_iter().map(|[l, r]| (l, r)).collect();
        Self::normalize(&pairs, 0.0)
    }
}

impl From<IntervalUnion> for Vec<[f64; 2]> {
    fn from(u: IntervalUnion) -> Self {
        u.intervals.into_iter().map(|(l, r)| [l, r]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_interval() {
        let u = IntervalUnion::normalize(&[(0.0, 1.0)], 0.0).unwrap();
        assert_eq!(u.len(), 1);
        assert_eq!(u.measure(), 1.0);
        assert_eq!(u.boundary_count(), 2);
    }

    #[test]
    fn sorts_and_reports_gaps() {
        let u = IntervalUnion::normalize(&[(2.0, 3.0), (0.0, 1.0)], 0.0).unwrap();
        assert_eq!(u.intervals(), &[(0.0, 1.0), (2.0, 3.0)]);
        assert_eq!(u.gaps(), vec![1.0]);
    }

    #[test]
    fn merges_near_duplicates() {
        let u = IntervalUnion::normalize(&[(0.0, 1.0), (1.0 - 1e-12, 2.0)], 1e-9).unwrap();
        assert_eq!(u.intervals(), &[(0.0, 2.0)]);
    }

    #[test]
    fn rejects_overlap_and_inverted() {
        assert!(matches!(
            IntervalUnion::normalize(&[(0.0, 1.0), (0.5, 2.0)], 1e-9),
            Err(Error::Validation(_))
        ));
        assert!(IntervalUnion::normalize(&[(1.0, 1.0)], 0.0).is_err());
        assert!(IntervalUnion::normalize(&[(0.0, f64::INFINITY)], 0.0).is_err());
    }

    #[test]
    fn scaling() {
        let u = IntervalUnion::normalize(&[(0.0, 1.0)], 0.0).unwrap().scale(10.0).unwrap();
        assert_eq!(u.intervals(), &[(0.0, 10.0)]);
        let v = IntervalUnion::normalize(&[(0.0, 1.0), (2.0, 3.0)], 0.0).unwrap().scale(2.0).unwrap();
        assert_eq!(v.intervals(), &[(0.0, 2.0), (4.0, 6.0)]);
        assert_eq!(v.gaps(), vec![2.0]);
        assert!(v.scale(0.0).is_err());
    }

    #[test]
    fn descriptor_values() {
        let d = IntervalUnion::single(0.0, 1.0).unwrap().descriptors();
        assert_eq!((d.k, d.measure), (1, 1.0));
        assert!(d.gaps.is_empty() && d.min_gap.is_none());

        let d = IntervalUnion::normalize(&[(0.0, 1.0), (1.5, 4.0)], 0.0).unwrap().descriptors();
        assert_eq!(d.k, 2);
        assert_eq!(d.lengths, vec![1.0, 2.5]);
        assert_eq!(d.gaps, vec![0.5]);
        assert_eq!(d.min_length, Some(1.0));

        let (a, gap, b) = (0.7, 0.3, 2.0);
        let d = IntervalUnion::normalize(&[(0.0, a), (a + gap, a + gap + b)], 0.0)
            .unwrap()
            .descriptors();
        assert!((d.min_gap.unwrap() - gap).abs() < 1e-15);
    }

    #[test]
    fn json_round_trip() {
        let u = IntervalUnion::normalize(&[(0.0, 1.0), (1.5, 4.0)], 0.0).unwrap();
        let s = serde_json::to_string(&u).unwrap();
        assert_eq!(s, "[[0.0,1.0],[1.5,4.0]]");
        let back: IntervalUnion = serde_json::from_str(&s).unwrap();
        assert_eq!(back, u);
        assert!(serde_json::from_str::<IntervalUnion>("[[0,2],[1,3]]").is_err());
    }

    fn raw_union() -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((0.01f64..5.0, 0.01f64..5.0), 1..8).prop_map(|parts| {
            let mut x = 0.0;
            parts
                .into_iter()
                .map(|(gap, len)| {
                    let l = x + gap;
                    x = l + len;
                    (l, x)
                })
                .rev()
                .collect()
        })
    }

    proptest! {
        #[test]
        fn normalize_idempotent(raw in raw_union()) {
            let once = IntervalUnion::normalize_default(&raw).unwrap();
            let twice = IntervalUnion::normalize_default(once.intervals()).unwrap();
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn scale_composes(raw in raw_union(), a in 0.1f64..50.0, b in 0.1f64..50.0) {
            let u = IntervalUnion::normalize_default(&raw).unwrap();
            let two_step = u.scale(a).unwrap().scale(b).unwrap();
            let one_step = u.scale(a * b).unwrap();
            for (p, q) in two_step.intervals().iter().zip(one_step.intervals()) {
                prop_assert!((p.0 - q.0).abs() <= 1e-14 * q.0.abs().max(1e-300));
                prop_assert!((p.1 - q.1).abs() <= 1e-14 * q.1.abs());
            }
            prop_assert!((u.scale(a).unwrap().measure() - a * u.measure()).abs() < 1e-12 * a * u.measure());
        }
    }
}
