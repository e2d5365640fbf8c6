//! Special functions: Mittag-Leffler family, gamma helpers, quadrature.

pub mod gamma;
pub mod ml;
pub mod quadrature;

pub use ml::{conv_ml, ml_asymptotic_neg, ml_one, ml_one_deriv, ml_two, MLParams};
pub use quadrature::{gauss_laguerre, QuadratureRule};

/// Neumaier compensated sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct Compensated {
    sum: f64,
    comp: f64,
}

impl Compensated {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for Compensated {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut c = Compensated::default();
        for x in iter {
            c.add(x);
        }
        c
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<Compensated>().value()
}
