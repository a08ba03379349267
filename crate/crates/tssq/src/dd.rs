//! Minimal double-double arithmetic.
//!
//! A value is stored as an unevaluated sum `hi + lo` of two doubles with
//! `|lo| <= ulp(hi)/2`, giving roughly 31 significant digits. Only the
//! operations needed elsewhere in the crate are provided: field arithmetic,
//! square root, exp and ln. The transcendentals are accurate to a few units
//! in the second component, which is far more than the call sites require.

/// Double-double number: the unevaluated sum `hi + lo`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Requires |a| >= |b| (or a == 0).
#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    pub const PI: Dd = Dd {
        hi: 3.141592653589793,
        lo: 1.2246467991473532e-16,
    };
    pub const LN2: Dd = Dd {
        hi: 0.6931471805599453,
        lo: 2.3190468138462996e-17,
    };

    #[inline]
    pub fn new(hi: f64, lo: f64) -> Dd {
        let (s, e) = two_sum(hi, lo);
        Dd { hi: s, lo: e }
    }

    #[inline]
    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    /// Multiply by a plain double.
    #[inline]
    pub fn scale(self, x: f64) -> Dd {
        let (p, e) = two_prod(self.hi, x);
        let (hi, lo) = quick_two_sum(p, e + self.lo * x);
        Dd { hi, lo }
    }

    pub fn powi(self, n: i32) -> Dd {
        if n == 0 {
            return Dd::ONE;
        }
        let mut base = if n < 0 { Dd::ONE / self } else { self };
        let mut k = n.unsigned_abs();
        let mut acc = Dd::ONE;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            k >>= 1;
        }
        acc
    }

    pub fn sqrt(self) -> Dd {
        if self.hi == 0.0 && self.lo == 0.0 {
            return Dd::ZERO;
        }
        debug_assert!(self.hi > 0.0, "sqrt of negative double-double");
        // One Newton correction on the double estimate keeps full precision.
        let y = self.hi.sqrt();
        let yd = Dd::from_f64(y);
        yd + (self - yd * yd).scale(0.5 / y)
    }

    pub fn exp(self) -> Dd {
        // exp(x) = 2^k exp(r) with r = x - k ln2 reduced to |r| <= ln2/2.
        let k = (self.hi / Dd::LN2.hi).round();
        let r = self - Dd::LN2.scale(k);
        let mut sum = Dd::ONE + r;
        let mut term = r;
        let mut fac = 1.0;
        loop {
            fac += 1.0;
            term = term * r / Dd::from_f64(fac);
            sum = sum + term;
            if term.hi.abs() < 1e-35 * sum.hi.abs() || fac > 40.0 {
                break;
            }
        }
        let p = (k as i32).max(-1022).min(1023);
        let s = f64::from_bits(((1023 + p) as u64) << 52);
        Dd {
            hi: sum.hi * s,
            lo: sum.lo * s,
        }
    }

    pub fn ln(self) -> Dd {
        debug_assert!(self.hi > 0.0, "ln of non-positive double-double");
        // Refine the double log by one residual step: with L0 = ln(hi) in
        // doubles, r = x e^{-L0} - 1 is O(eps) and ln x = L0 + ln(1+r).
        let l0 = self.hi.ln();
        let r = self * Dd::from_f64(-l0).exp() - Dd::ONE;
        Dd::from_f64(l0) + r * (Dd::ONE - r.scale(0.5))
    }

    /// Sine and cosine via argument reduction modulo pi/2 and Taylor
    /// series on the reduced range |r| <= pi/4.  Accurate to roughly
    /// 1e-31 absolute for arguments of moderate size (|x| up to ~1e6);
    /// intended for curve evaluation, not astronomical phases.
    pub fn sin_cos(self) -> (Dd, Dd) {
        let half_pi = Dd::PI.scale(0.5);
        let k = (self.hi / half_pi.hi).round();
        let r = self - half_pi * Dd::from_f64(k);
        let r2 = r * r;
        // Joint Taylor loop: term_{j} for sin carries r^{2j+1}/(2j+1)!,
        // for cos r^{2j}/(2j)!.  The incremental divisors stay below 2^53
        // so Dd::from_f64 represents them exactly.
        let mut sin_sum = r;
        let mut sin_term = r;
        let mut cos_sum = Dd::ONE;
        let mut cos_term = Dd::ONE;
        let mut j = 0.0f64;
        loop {
            j += 1.0;
            let two_j = 2.0 * j;
            cos_term = -(cos_term * r2) / Dd::from_f64(two_j * (two_j - 1.0));
            sin_term = -(sin_term * r2) / Dd::from_f64(two_j * (two_j + 1.0));
            cos_sum = cos_sum + cos_term;
            sin_sum = sin_sum + sin_term;
            if cos_term.hi.abs() < 1e-35 && sin_term.hi.abs() < 1e-35 || j > 20.0 {
                break;
            }
        }
        match (k as i64).rem_euclid(4) {
            0 => (sin_sum, cos_sum),
            1 => (cos_sum, -sin_sum),
            2 => (-sin_sum, -cos_sum),
            _ => (-cos_sum, sin_sum),
        }
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Dd {
        Dd::from_f64(x)
    }
}

impl std::ops::Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl std::ops::Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, rhs: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, rhs.hi);
        let (t1, t2) = two_sum(self.lo, rhs.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        Dd { hi, lo }
    }
}

impl std::ops::Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, rhs: Dd) -> Dd {
        self + (-rhs)
    }
}

impl std::ops::Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, rhs: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, rhs.hi);
        let (hi, lo) = quick_two_sum(p, e + (self.hi * rhs.lo + self.lo * rhs.hi));
        Dd { hi, lo }
    }
}

impl std::ops::Div for Dd {
    type Output = Dd;
    fn div(self, rhs: Dd) -> Dd {
        let q1 = self.hi / rhs.hi;
        let mut r = self - rhs.scale(q1);
        let q2 = r.hi / rhs.hi;
        r = r - rhs.scale(q2);
        let q3 = r.hi / rhs.hi;
        let (s, e) = quick_two_sum(q1, q2);
        Dd { hi: s, lo: e } + Dd::from_f64(q3)
    }
}

impl std::ops::Add<f64> for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, rhs: f64) -> Dd {
        self + Dd::from_f64(rhs)
    }
}

impl std::ops::Sub<f64> for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, rhs: f64) -> Dd {
        self + Dd::from_f64(-rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_dd_close(got: Dd, hi: f64, lo: f64, tol: f64) {
        let diff = (got - Dd::new(hi, lo)).to_f64().abs();
        let scale = hi.abs().max(1e-300);
        assert!(
            diff <= tol * scale,
            "got {:?}, want ({:e}, {:e}), rel diff {:e}",
            got,
            hi,
            lo,
            diff / scale
        );
    }

    #[test]
    fn add_mul_exactness() {
        // (1 + 2^-60) round-trips through dd arithmetic without loss.
        let x = Dd::new(1.0, 2f64.powi(-60));
        let y = x + Dd::from_f64(1.0);
        assert_eq!(y.hi, 2.0);
        assert_eq!(y.lo, 2f64.powi(-60));
        let z = x * Dd::from_f64(2.0) - Dd::from_f64(2.0);
        assert_eq!(z.to_f64(), 2f64.powi(-59));
    }

    #[test]
    fn div_recovers_thirds() {
        let third = Dd::ONE / Dd::from_f64(3.0);
        assert_dd_close(third, 0.3333333333333333, 1.850371707708594e-17, 1e-30);
        let one = third.scale(3.0);
        assert!((one - Dd::ONE).to_f64().abs() < 1e-31);
    }

    #[test]
    fn sqrt_matches_reference() {
        assert_dd_close(
            Dd::from_f64(2.0).sqrt(),
            1.4142135623730951,
            -9.667293313452913e-17,
            1e-30,
        );
        let x = Dd::new(1e-8, 0.0).sqrt();
        assert!((x * x - Dd::from_f64(1e-8)).to_f64().abs() < 1e-39);
    }

    #[test]
    fn exp_matches_reference() {
        assert_dd_close(
            Dd::from_f64(-0.34657359027997264).exp(),
            0.7071067811865476,
            -4.013739792746569e-17,
            1e-29,
        );
        assert_dd_close(
            Dd::from_f64(0.25).exp(),
            1.2840254166877414,
            8.968972781793724e-17,
            1e-29,
        );
        assert_dd_close(
            Dd::from_f64(-18.0).exp(),
            1.522997974471263e-08,
            -7.170963862158597e-25,
            1e-29,
        );
        assert_eq!(Dd::ZERO.exp().to_f64(), 1.0);
    }

    #[test]
    fn ln_matches_reference() {
        assert_dd_close(
            Dd::from_f64(0.7853981633974483).ln(),
            -0.2415644752704905,
            8.17002340747482e-18,
            1e-29,
        );
        assert_dd_close(
            Dd::from_f64(0.001).ln(),
            -6.907755278982137,
            -2.1613487097372872e-16,
            1e-29,
        );
        assert_dd_close(
            Dd::from_f64(37.5).ln(),
            3.624340932976365,
            -3.932410912927591e-17,
            1e-29,
        );
    }

    #[test]
    fn ln_exp_roundtrip() {
        for &x in &[1e-6, 0.02, 0.9, 1.0 + 1e-14, 17.25, 4096.0] {
            let r = Dd::from_f64(x).ln().exp();
            assert!(
                (r - Dd::from_f64(x)).to_f64().abs() <= 1e-29 * x,
                "roundtrip failed for {x}"
            );
        }
    }

    #[test]
    fn powi_small_powers() {
        let x = Dd::from_f64(0.3);
        let x5 = x.powi(5);
        let manual = x * x * x * x * x;
        assert!((x5 - manual).to_f64().abs() < 1e-33);
        assert!((x.powi(-2) * x * x - Dd::ONE).to_f64().abs() < 1e-30);
    }

    #[test]
    fn sin_cos_matches_reference() {
        let cases = [
            (0.7, (0.644217687237691, 2.8740567927338755e-18), (0.7648421872844885, -4.013780434022238e-17)),
            (2.5, (0.5984721441039565, -5.521403334082375e-17), (-0.8011436155469337, -1.8674742705085553e-17)),
            (31.0, (-0.404037645323065, 1.394892831018849e-17), (0.9147423578045313, -1.9002118646599085e-18)),
            (-4.2, (0.8715757724135882, -4.298425632639332e-17), (-0.4902608213406994, 3.5857105369120555e-18)),
            (0.001, (0.0009999998333333417, 5.670638989736153e-21), (0.9999995000000417, -7.831485455398128e-18)),
        ];
        for (x, s, c) in cases {
            let (sin, cos) = Dd::from_f64(x).sin_cos();
            assert_dd_close(sin, s.0, s.1, 1e-29);
            assert_dd_close(cos, c.0, c.1, 1e-29);
        }
    }

    #[test]
    fn sin_cos_pythagorean_identity() {
        for &x in &[0.0, 1e-9, 0.5, 1.5707963, 3.0, 12.345, -7.7, 44.0] {
            let (s, c) = Dd::from_f64(x).sin_cos();
            assert!(
                (s * s + c * c - Dd::ONE).to_f64().abs() < 1e-30,
                "identity failed at {x}"
            );
        }
    }
}
