//! Compensated accumulation in a fixed order.

use crate::curve::Vec2;

#[derive(Clone, Copy, Debug, Default)]
pub struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let y = value - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Kahan2 {
    x: Kahan,
    y: Kahan,
}

impl Kahan2 {
    #[inline]
    pub fn add(&mut self, v: Vec2) {
        self.x.add(v.x);
        self.y.add(v.y);
    }

    #[inline]
    pub fn value(&self) -> Vec2 {
        Vec2::new(self.x.value(), self.y.value())
    }
}

/// Compensated sum of a slice, left to right.
pub fn kahan_sum(values: &[f64]) -> f64 {
    let mut acc = Kahan::new();
    for &v in values {
        acc.add(v);
    }
    acc.value()
}
