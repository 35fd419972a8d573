//! Compensated (Neumaier) summation.
//!
//! All mass-like reductions in this crate go through [`NeumaierSum`] in a
//! fixed order, so totals do not depend on the thread count used to produce
//! the summands.

use nalgebra::Vector3;

/// Running Neumaier sum of `f64` terms.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Compensated sum of an iterator, in iteration order.
pub fn sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<NeumaierSum>().value()
}

/// Componentwise compensated sum of vectors.
pub fn sum_vec<I: IntoIterator<Item = Vector3<f64>>>(iter: I) -> Vector3<f64> {
    let mut acc = [NeumaierSum::new(); 3];
    for v in iter {
        for (a, x) in acc.iter_mut().zip(v.iter()) {
            a.add(*x);
        }
    }
    Vector3::new(acc[0].value(), acc[1].value(), acc[2].value())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_terms() {
        let terms = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(sum(terms), 2.0);
        let naive: f64 = terms.iter().sum();
        assert_eq!(naive, 0.0);
    }

    #[test]
    fn empty_is_zero() {
        assert_eq!(sum(std::iter::empty()), 0.0);
    }
}
