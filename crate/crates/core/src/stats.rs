//! Moment accumulators for Monte Carlo output.
//!
//! Accumulation is Welford's running mean and second moment, merged
//! across chunks pairwise. Two properties matter here: a constant
//! stream reports exactly zero variance (the update is 0.0 bitwise, no
//! cancellation residue), and merging partial accumulators in a fixed
//! chunk order is deterministic, which the worker-count independence
//! contract rests on.

/// Running first and second moments of one scalar stream.
#[derive(Debug, Clone, Copy, Default)]
pub struct Moments {
    pub count: u64,
    mean: f64,
    /// Sum of squared deviations from the running mean.
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Fixed-order merge; callers must fold chunks in chunk order.
    pub fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let total = self.count + other.count;
        let delta = other.mean - self.mean;
        self.m2 += other.m2
            + delta * delta * (self.count as f64 * other.count as f64 / total as f64);
        self.mean += delta * other.count as f64 / total as f64;
        self.count = total;
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            return 0.0;
        }
        self.mean
    }

    /// Standard error of the mean; zero for fewer than two samples.
    pub fn se(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        (self.m2.max(0.0) / ((n - 1.0) * n)).sqrt()
    }
}

/// Moments of a fixed-length vector stream, one accumulator per slot.
#[derive(Debug, Clone)]
pub struct VecMoments {
    pub slots: Vec<Moments>,
}

impl VecMoments {
    pub fn new(len: usize) -> Self {
        Self {
            slots: vec![Moments::default(); len],
        }
    }

    pub fn push(&mut self, xs: &[f64]) {
        debug_assert_eq!(xs.len(), self.slots.len());
        for (m, &x) in self.slots.iter_mut().zip(xs) {
            m.push(x);
        }
    }

    pub fn merge(&mut self, other: &VecMoments) {
        debug_assert_eq!(self.slots.len(), other.slots.len());
        for (m, o) in self.slots.iter_mut().zip(&other.slots) {
            m.merge(o);
        }
    }
}
