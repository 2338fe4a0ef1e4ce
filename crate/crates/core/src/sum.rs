//! Compensated accumulation.
//!
//! Barycenter-type sums are dominated by cancellation, so every reduction in
//! this crate goes through a Neumaier accumulator and, for long inputs, a
//! fixed-shape chunked tree. The result depends only on the input order,
//! never on how a caller splits work.

use crate::vec2::Vec2;

/// Chunk length of the reduction tree.
pub const CHUNK: usize = 4096;

/// Neumaier (improved Kahan–Babuška) running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }

    /// Adds another accumulator without first rounding it to one double.
    #[inline]
    pub fn merge(&mut self, other: &NeumaierSum) {
        self.add(other.sum);
        self.add(other.comp);
    }
}

impl Extend<f64> for NeumaierSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for v in iter {
            self.add(v);
        }
    }
}

/// Componentwise compensated sum of vectors.
#[derive(Clone, Copy, Debug, Default)]
pub struct VecSum {
    x: NeumaierSum,
    y: NeumaierSum,
}

impl VecSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, v: Vec2) {
        self.x.add(v.x);
        self.y.add(v.y);
    }

    pub fn value(&self) -> Vec2 {
        Vec2::new(self.x.value(), self.y.value())
    }

    #[inline]
    pub fn merge(&mut self, other: &VecSum) {
        self.x.merge(&other.x);
        self.y.merge(&other.y);
    }
}

/// Deterministic compensated sum: Neumaier within fixed chunks, then
/// Neumaier over the chunk partials (both words of each).
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut outer = NeumaierSum::new();
    let mut inner = NeumaierSum::new();
    let mut n = 0usize;
    for v in values {
        inner.add(v);
        n += 1;
        if n == CHUNK {
            outer.merge(&inner);
            inner = NeumaierSum::new();
            n = 0;
        }
    }
    outer.merge(&inner);
    outer.value()
}

/// Vector counterpart of [`compensated_sum`].
pub fn compensated_vec_sum<I: IntoIterator<Item = Vec2>>(values: I) -> Vec2 {
    let mut outer = VecSum::new();
    let mut inner = VecSum::new();
    let mut n = 0usize;
    for v in values {
        inner.add(v);
        n += 1;
        if n == CHUNK {
            outer.merge(&inner);
            inner = VecSum::new();
            n = 0;
        }
    }
    outer.merge(&inner);
    outer.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_small_terms_lost_by_naive_sum() {
        let vals = [1.0, 1e100, 1.0, -1e100];
        let naive: f64 = vals.iter().sum();
        assert_eq!(naive, 0.0);
        assert_eq!(compensated_sum(vals), 2.0);
    }

    #[test]
    fn cancels_antisymmetric_sequences() {
        let vals: Vec<f64> = (1..20_000)
            .flat_map(|k| {
                let t = (k as f64 * 0.37).sin() * 1e3;
                [t, 1e-9, -t]
            })
            .collect();
        let s = compensated_sum(vals.iter().copied());
        assert!((s - 19_999.0 * 1e-9).abs() < 1e-15, "{s:e}");
    }

    #[test]
    fn vector_sum_matches_componentwise() {
        let pts: Vec<Vec2> = (0..10_000).map(|k| Vec2::new(k as f64, -(k as f64) * 0.5)).collect();
        let s = compensated_vec_sum(pts.iter().copied());
        assert_eq!(s.x, compensated_sum(pts.iter().map(|p| p.x)));
        assert_eq!(s.y, compensated_sum(pts.iter().map(|p| p.y)));
    }
}
