//! Binary information measures shared across modules. All logs are base 2.

/// `-p log2 p` with the convention `0 log 0 = 0`.
#[inline]
pub fn neg_xlogx(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

/// Binary entropy in bits.
pub fn h2(p: f64) -> f64 {
    neg_xlogx(p) + neg_xlogx(1.0 - p)
}

/// Inverse of [`h2`] restricted to `[0, 1/2]`, by bisection to 1e-12.
pub fn h2_inv(h: f64) -> f64 {
    if h <= 0.0 {
        return 0.0;
    }
    if h >= 1.0 {
        return 0.5;
    }
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if h2(mid) < h {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Binary convolution `a(1-b) + b(1-a)`: the probability that the XOR of
/// independent `Ber(a)` and `Ber(b)` variables is one.
#[inline]
pub fn bin_conv(a: f64, b: f64) -> f64 {
    a * (1.0 - b) + b * (1.0 - a)
}

/// Conditional entropy contribution of a pair of joint masses `(p0, p1)`
/// sharing the same conditioning value: `p0 log(s/p0) + p1 log(s/p1)`.
#[inline]
pub fn pair_entropy(p0: f64, p1: f64) -> f64 {
    let s = p0 + p1;
    if s <= 0.0 {
        return 0.0;
    }
    let mut acc = 0.0;
    if p0 > 0.0 {
        acc += p0 * (s / p0).log2();
    }
    if p1 > 0.0 {
        acc += p1 * (s / p1).log2();
    }
    acc
}

/// Bhattacharyya contribution `2 sqrt(p0 p1)` of a pair of joint masses.
#[inline]
pub fn pair_bhattacharyya(p0: f64, p1: f64) -> f64 {
    2.0 * (p0 * p1).sqrt()
}

/// Compensated (Neumaier) summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
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

/// Wilson score interval for a binomial proportion; returns `(lo, hi)`.
pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn h2_values() {
        assert_eq!(h2(0.0), 0.0);
        assert_eq!(h2(1.0), 0.0);
        assert_abs_diff_eq!(h2(0.5), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(h2(0.11), 0.4999, epsilon = 1e-4);
    }

    #[test]
    fn h2_inverse_roundtrip() {
        for k in 1..100 {
            let h = k as f64 / 100.0;
            assert_abs_diff_eq!(h2(h2_inv(h)), h, epsilon = 1e-10);
        }
        assert_abs_diff_eq!(h2_inv(0.5), 0.110028, epsilon = 1e-6);
    }

    #[test]
    fn pair_entropy_matches_h2() {
        assert_abs_diff_eq!(pair_entropy(0.3, 0.1), 0.4 * h2(0.75), epsilon = 1e-15);
        assert_eq!(pair_entropy(0.0, 0.0), 0.0);
        assert_eq!(pair_entropy(0.2, 0.0), 0.0);
    }

    #[test]
    fn wilson_contains_estimate() {
        let (lo, hi) = wilson_interval(10, 200, 1.96);
        assert!(lo < 0.05 && 0.05 < hi);
        let (lo, hi) = wilson_interval(0, 100, 3.0);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.1);
    }

    #[test]
    fn kahan_beats_naive() {
        let mut k = KahanSum::default();
        k.add(1.0);
        for _ in 0..1000 {
            k.add(1e-16);
        }
        assert_abs_diff_eq!(k.value(), 1.0 + 1e-13, epsilon = 1e-16);
    }
}
