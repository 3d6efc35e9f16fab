//! Compensated (Neumaier) summation.
//!
//! Accumulation is deterministic and, whenever plain left-to-right addition
//! would be exact, the compensated result is bit-identical to it — the
//! correction terms are then all zero. For long mixed-magnitude sums it keeps
//! the error near one rounding of the final value.

/// Running Neumaier sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    correction: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        // No correction once the sum saturates: inf - inf would poison the
        // accumulator with NaN.
        if t.is_finite() {
            if self.sum.abs() >= x.abs() {
                self.correction += (self.sum - t) + x;
            } else {
                self.correction += (x - t) + self.sum;
            }
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.correction
    }
}

/// Compensated sum of a slice.
pub fn compensated_sum(values: &[f64]) -> f64 {
    let mut acc = CompensatedSum::new();
    for &v in values {
        acc.add(v);
    }
    acc.value()
}
