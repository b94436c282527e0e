use std::ops::Mul;

/// A real number stored as `mant * e^{log}` so that exponentially large and
/// small factors can be combined before anything is materialized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled {
    pub mant: f64,
    pub log: f64,
}

impl Scaled {
    pub const ONE: Scaled = Scaled { mant: 1.0, log: 0.0 };

    pub fn new(mant: f64, log: f64) -> Self {
        Scaled { mant, log }
    }

    pub fn exp(log: f64) -> Self {
        Scaled { mant: 1.0, log }
    }

    /// `ln |value|`; `-inf` for zero.
    pub fn ln_abs(&self) -> f64 {
        self.mant.abs().ln() + self.log
    }

    pub fn value(&self) -> f64 {
        if self.mant == 0.0 {
            0.0
        } else {
            self.mant * self.log.exp()
        }
    }

    pub fn square(&self) -> Self {
        Scaled {
            mant: self.mant * self.mant,
            log: 2.0 * self.log,
        }
    }
}

impl Mul for Scaled {
    type Output = Scaled;
    fn mul(self, rhs: Scaled) -> Scaled {
        Scaled {
            mant: self.mant * rhs.mant,
            log: self.log + rhs.log,
        }
    }
}

impl Mul<f64> for Scaled {
    type Output = Scaled;
    fn mul(self, rhs: f64) -> Scaled {
        Scaled {
            mant: self.mant * rhs,
            log: self.log,
        }
    }
}
