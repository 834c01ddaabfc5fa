//! Shared numerical kernels: log-domain arithmetic, special functions, and
//! adaptive quadrature.

pub mod quad;
pub mod special;

/// `ln(e^a + e^b)` without overflow.
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(sum_i e^{x_i})` over a slice; `-inf` for an empty slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi == f64::NEG_INFINITY || hi == f64::INFINITY {
        return hi;
    }
    let sum: f64 = xs.iter().map(|&x| (x - hi).exp()).sum();
    hi + sum.ln()
}

/// Streaming log-sum-exp accumulator; numerically equivalent to collecting
/// terms and calling [`log_sum_exp`] once, without storing them.
#[derive(Debug, Clone, Copy)]
pub struct LogSumExp {
    hi: f64,
    sum: f64,
}

impl LogSumExp {
    pub fn new() -> Self {
        LogSumExp {
            hi: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }

    pub fn add(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x <= self.hi {
            self.sum += (x - self.hi).exp();
        } else {
            self.sum = self.sum * (self.hi - x).exp() + 1.0;
            self.hi = x;
        }
    }

    pub fn value(&self) -> f64 {
        if self.hi == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.hi + self.sum.ln()
        }
    }
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self::new()
    }
}

/// `ln(1 + e^x)`, stable over the whole line.
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn log_sum_exp_matches_naive_on_moderate_values() {
        let xs = [0.3f64, -1.2, 2.0, 0.0];
        let naive: f64 = xs.iter().map(|x| x.exp()).sum::<f64>().ln();
        assert_relative_eq!(log_sum_exp(&xs), naive, max_relative = 1e-14);
        let mut acc = LogSumExp::new();
        for &x in &xs {
            acc.add(x);
        }
        assert_relative_eq!(acc.value(), naive, max_relative = 1e-14);
    }

    #[test]
    fn log_sum_exp_survives_extreme_scales() {
        let xs = [-1e6, -1e6 + 1.0];
        let expect = -1e6 + 1.0 + (1.0f64 + (-1.0f64).exp()).ln();
        assert_relative_eq!(log_sum_exp(&xs), expect, max_relative = 1e-12);
    }

    #[test]
    fn softplus_tails() {
        assert_relative_eq!(softplus(0.0), 2f64.ln());
        assert_relative_eq!(softplus(50.0), 50.0 + (-50f64).exp(), epsilon = 1e-15);
        assert_relative_eq!(softplus(-50.0), (-50f64).exp(), max_relative = 1e-12);
    }
}
