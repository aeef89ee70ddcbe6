//! C-infinity transition functions built from `exp(-1/x)`.

fn flat(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

fn flat_prime(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        flat(x) / (x * x)
    }
}

/// Smooth step: 0 for `x <= 0`, 1 for `x >= 1`, all derivatives vanish at both ends.
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = flat(x);
        a / (a + flat(1.0 - x))
    }
}

pub fn smooth_step_prime(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    let (a, b) = (flat(x), flat(1.0 - x));
    (flat_prime(x) * b + a * flat_prime(1.0 - x)) / ((a + b) * (a + b))
}

/// Largest slope of [`smooth_step`], attained at `x = 1/2` by symmetry.
pub fn smooth_step_max_slope() -> f64 {
    smooth_step_prime(0.5)
}

/// Radial plateau cutoff: 1 on `|x| <= inner`, 0 on `|x| >= outer`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plateau {
    pub inner: f64,
    pub outer: f64,
}

impl Plateau {
    pub fn new(inner: f64, outer: f64) -> Self {
        assert!(0.0 < inner && inner < outer, "plateau radii must satisfy 0 < inner < outer");
        Self { inner, outer }
    }

    pub fn eval(&self, r: f64) -> f64 {
        smooth_step((self.outer - r) / (self.outer - self.inner))
    }

    /// d/dr of [`Plateau::eval`].
    pub fn radial_derivative(&self, r: f64) -> f64 {
        let w = self.outer - self.inner;
        -smooth_step_prime((self.outer - r) / w) / w
    }

    pub fn lipschitz(&self) -> f64 {
        smooth_step_max_slope() / (self.outer - self.inner)
    }

    pub fn support_radius(&self) -> f64 {
        self.outer
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_is_symmetric_and_saturates() {
        for k in 0..=100 {
            let x = k as f64 / 100.0;
            assert!((smooth_step(x) + smooth_step(1.0 - x) - 1.0).abs() < 1e-15);
        }
        assert_eq!(smooth_step(-0.1), 0.0);
        assert_eq!(smooth_step(1.2), 1.0);
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        for &x in &[0.1, 0.3, 0.5, 0.77, 0.95] {
            let h = 1e-6;
            let fd = (smooth_step(x + h) - smooth_step(x - h)) / (2.0 * h);
            assert!((fd - smooth_step_prime(x)).abs() < 1e-8, "x = {x}");
        }
    }

    #[test]
    fn peak_slope_is_at_midpoint() {
        let peak = smooth_step_max_slope();
        let sampled = (1..1000)
            .map(|k| smooth_step_prime(k as f64 / 1000.0))
            .fold(0.0, f64::max);
        assert!(sampled <= peak + 1e-12);
    }

    #[test]
    fn plateau_levels() {
        let p = Plateau::new(0.5, 1.0);
        assert_eq!(p.eval(0.3), 1.0);
        assert_eq!(p.eval(0.5), 1.0);
        assert_eq!(p.eval(1.0), 0.0);
        assert!(p.eval(0.75) > 0.0 && p.eval(0.75) < 1.0);
    }
}
