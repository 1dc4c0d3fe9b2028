use crate::error::{Error, Result};

/// Linear schedule `A(s) = 1 - s`, `B(s) = s`, with `s = t / tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnealSchedule {
    tau: f64,
}

impl AnnealSchedule {
    pub fn new(tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::InvalidArgument(format!("annealing time must be > 0, got {tau}")));
        }
        Ok(Self { tau })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    #[inline]
    pub fn a(s: f64) -> f64 {
        1.0 - s
    }

    #[inline]
    pub fn b(s: f64) -> f64 {
        s
    }

    /// `int_{t1}^{t2} B(t/tau) dt`.
    #[inline]
    pub fn b_integral(&self, t1: f64, t2: f64) -> f64 {
        (t2 * t2 - t1 * t1) / (2.0 * self.tau)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints() {
        assert_eq!((AnnealSchedule::a(0.0), AnnealSchedule::b(0.0)), (1.0, 0.0));
        assert_eq!((AnnealSchedule::a(1.0), AnnealSchedule::b(1.0)), (0.0, 1.0));
        assert!(AnnealSchedule::new(0.0).is_err());
        assert!(AnnealSchedule::new(f64::INFINITY).is_err());
    }

    #[test]
    fn b_integral_matches_trapezoid() {
        let sch = AnnealSchedule::new(7.0).unwrap();
        // B is linear in t, so the trapezoid rule is exact.
        let (t1, t2) = (1.5, 4.0);
        let trap = 0.5 * (t2 - t1) * (AnnealSchedule::b(t1 / 7.0) + AnnealSchedule::b(t2 / 7.0));
        assert!((sch.b_integral(t1, t2) - trap).abs() < 1e-15);
    }
}
